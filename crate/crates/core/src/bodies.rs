//! Starbodies as black-box radial or gauge evaluators.
//!
//! Every body is sampled at construction: values must be positive and
//! finite on a probe grid, and an attached Lipschitz constant must hold on
//! random point pairs. After that, evaluation is trusted.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::harmonics::SphereFunction;
use crate::quadrature::SphereRule;
use crate::sphere::{dot, norm, normalized, random_points, sample_points};
use crate::{Error, Result};

const PROBE_POINTS: usize = 10_000;
const PROBE_PAIRS: usize = 10_000;
const PROBE_SEED: u64 = 0x5eed_b0d1;
const LIPSCHITZ_SLACK: f64 = 1e-9;

/// Whether a body's evaluator is its radial or its gauge function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyKind {
    Radial,
    Gauge,
}

impl BodyKind {
    pub fn swap(self) -> Self {
        match self {
            BodyKind::Radial => BodyKind::Gauge,
            BodyKind::Gauge => BodyKind::Radial,
        }
    }
}

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A starbody in R^n given by its radial or gauge function on S^{n-1}.
#[derive(Clone)]
pub struct StarBody {
    n: usize,
    kind: BodyKind,
    name: String,
    lipschitz: Option<f64>,
    eval: Evaluator,
}

impl fmt::Debug for StarBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StarBody")
            .field("n", &self.n)
            .field("kind", &self.kind)
            .field("name", &self.name)
            .field("lipschitz", &self.lipschitz)
            .finish()
    }
}

impl StarBody {
    /// Wraps `eval` (called with unit vectors) and runs the construction probe.
    pub fn new(
        n: usize,
        kind: BodyKind,
        name: impl Into<String>,
        lipschitz: Option<f64>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::from_arc(n, kind, name.into(), lipschitz, Arc::new(eval))
    }

    fn from_arc(
        n: usize,
        kind: BodyKind,
        name: String,
        lipschitz: Option<f64>,
        eval: Evaluator,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("StarBody::new", "dimension must be at least 2"));
        }
        if let Some(k) = lipschitz {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::domain(
                    "StarBody::new",
                    format!("Lipschitz constant {k} is not positive"),
                ));
            }
        }
        let body = StarBody {
            n,
            kind,
            name,
            lipschitz,
            eval,
        };
        body.probe()?;
        Ok(body)
    }

    fn probe(&self) -> Result<()> {
        for x in sample_points(self.n, PROBE_POINTS, PROBE_SEED) {
            let v = (self.eval)(&x);
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(
                    "StarBody::new",
                    format!(
                        "{} is not a starbody: {:?} value {v} at {x:?}",
                        self.name, self.kind
                    ),
                ));
            }
        }
        if let Some(kappa) = self.lipschitz {
            let a = random_points(self.n, PROBE_PAIRS, PROBE_SEED ^ 1);
            let b = random_points(self.n, PROBE_PAIRS, PROBE_SEED ^ 2);
            for (x, y) in a.iter().zip(&b) {
                let gap = ((self.eval)(x) - (self.eval)(y)).abs();
                let dist: f64 = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
                if gap > kappa * dist * (1.0 + LIPSCHITZ_SLACK) + LIPSCHITZ_SLACK {
                    return Err(Error::domain(
                        "StarBody::new",
                        format!(
                            "{}: Lipschitz constant {kappa} violated between {x:?} and {y:?}",
                            self.name
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> BodyKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    /// Returns a copy with a different label.
    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Evaluates at `x / |x|` for any nonzero `x` of the right dimension.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::domain(
                "StarBody::eval",
                format!("point has dimension {}, body has {}", x.len(), self.n),
            ));
        }
        let u = normalized(x)
            .ok_or_else(|| Error::domain("StarBody::eval", "cannot evaluate at the origin"))?;
        let v = (self.eval)(&u);
        if !v.is_finite() {
            return Err(Error::numeric(
                "StarBody::eval",
                format!("{} evaluates to {v} at {u:?}", self.name),
            ));
        }
        Ok(v)
    }

    /// Evaluates at a unit vector without checks.
    pub fn eval_unit(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }
}

impl SphereFunction for StarBody {
    fn dimension(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }
}

/// The polytope {x : ⟨H_i, x⟩ ≤ 1 for all i}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetPolytope {
    pub n: usize,
    pub facets: Vec<Vec<f64>>,
}

impl FacetPolytope {
    pub fn new(n: usize, facets: Vec<Vec<f64>>) -> Result<Self> {
        if facets.is_empty() {
            return Err(Error::domain("FacetPolytope::new", "no facets given"));
        }
        if let Some(h) = facets.iter().find(|h| h.len() != n) {
            return Err(Error::domain(
                "FacetPolytope::new",
                format!("facet {h:?} does not have dimension {n}"),
            ));
        }
        if facets.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::domain("FacetPolytope::new", "non-finite facet entry"));
        }
        Ok(FacetPolytope { n, facets })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: FacetPolytope = serde_json::from_str(text)?;
        Self::new(raw.n, raw.facets)
    }

    /// The cube [-1, 1]^n.
    pub fn cube(n: usize) -> Self {
        let facets = (0..n)
            .flat_map(|i| {
                [1.0, -1.0].map(|s| {
                    let mut h = vec![0.0; n];
                    h[i] = s;
                    h
                })
            })
            .collect();
        FacetPolytope { n, facets }
    }

    /// The triangle with vertices (-1,-1), (1,-1), (0,1).
    pub fn triangle() -> Self {
        FacetPolytope {
            n: 2,
            facets: vec![vec![0.0, -1.0], vec![2.0, 1.0], vec![-2.0, 1.0]],
        }
    }

    fn max_facet(&self, x: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|h| dot(h, x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn max_facet_norm(&self) -> f64 {
        self.facets.iter().map(|h| norm(h)).fold(0.0, f64::max)
    }
}

/// Gauge γ(x) = max_i ⟨H_i, x⟩ with κ = max_i |H_i|.
pub fn polytope_gauge(p: &FacetPolytope) -> Result<StarBody> {
    let poly = p.clone();
    StarBody::new(
        p.n,
        BodyKind::Gauge,
        "polytope",
        Some(p.max_facet_norm()),
        move |x| poly.max_facet(x),
    )
    .map_err(|e| match e {
        Error::Domain { msg, .. } => Error::domain(
            "polytope_gauge",
            format!("polytope is unbounded or excludes the origin ({msg})"),
        ),
        other => other,
    })
}

/// Radial ρ(x) = 1 / max_i ⟨H_i, x⟩, the reciprocal of [`polytope_gauge`].
pub fn polytope_radial(p: &FacetPolytope) -> Result<StarBody> {
    reciprocal(&polytope_gauge(p)?)
}

/// Radial function of the cube [-1, 1]³ with κ = R²/r = 3.
pub fn cube() -> Result<StarBody> {
    let poly = FacetPolytope::cube(3);
    StarBody::new(
        3,
        BodyKind::Radial,
        "cube",
        Some(lipschitz_from_kernel(1.0, 3f64.sqrt(), BodyKind::Radial)),
        move |x| 1.0 / poly.max_facet(x),
    )
}

/// Radial function of the triangle conv{(-1,-1), (1,-1), (0,1)}.
pub fn triangle() -> Result<StarBody> {
    Ok(polytope_radial(&FacetPolytope::triangle())?.renamed("triangle"))
}

/// Radial function of the cylinder {x₁² + x₂² ≤ 1, |x₃| ≤ 1}.
pub fn cylinder() -> Result<StarBody> {
    StarBody::new(
        3,
        BodyKind::Radial,
        "cylinder",
        Some(lipschitz_from_kernel(1.0, 2f64.sqrt(), BodyKind::Radial)),
        cylinder_radial,
    )
}

fn cylinder_radial(x: &[f64]) -> f64 {
    let cap = 1.0 / x[2].abs();
    let lateral = 1.0 / (1.0 - x[2] * x[2]).max(0.0).sqrt();
    cap.min(lateral)
}

/// Radial value of the tin-can cap at height a = |x₃| ∈ [1/√2, 1], written
/// in a form free of the 0/0 cancellation at a = 1.
pub(crate) fn tin_can_cap(a: f64) -> f64 {
    let arg = 2.0 * a * a - 1.0;
    if arg < -1e-12 {
        return f64::NAN;
    }
    let s = arg.max(0.0).sqrt();
    (2.0 * (a * a + s) / (a * (1.0 + a) * (1.0 + s) * (s + 2.0 * a - 1.0))).sqrt()
}

/// The dented tin can: a cylinder with concave top and bottom whose
/// intersection body is a cylinder.
pub fn dented_tin_can() -> Result<StarBody> {
    StarBody::new(3, BodyKind::Radial, "tin-can", None, |x: &[f64]| {
        let a = x[2].abs();
        let r2 = x[0] * x[0] + x[1] * x[1];
        let lateral = 1.0 / (1.0 - a * a).max(0.0).sqrt();
        if a * a < r2 {
            lateral
        } else {
            tin_can_cap(a).min(lateral)
        }
    })
}

/// Radial value of the elliptope along the unit vector (x, y, z) by
/// bisection on positive semidefiniteness of
/// [[1, tx, ty], [tx, 1, tz], [ty, tz, 1]].
pub(crate) fn elliptope_bisection(x: &[f64]) -> f64 {
    let inside = |t: f64| {
        let (a, b, c) = (t * x[0], t * x[1], t * x[2]);
        let e2 = 3.0 - (a * a + b * b + c * c);
        let e3 = 1.0 - (a * a + b * b + c * c) + 2.0 * a * b * c;
        e2 >= 0.0 && e3 >= 0.0
    };
    let (mut lo, mut hi) = (0.0, 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Trigonometric closed form, valid for |xyz| bounded away from zero.
fn elliptope_closed_form(x: &[f64]) -> f64 {
    // The closed form is stated for the reflected point.
    let p = -x[0] * x[1] * x[2];
    let p2 = p * p;
    let inner = p2 * (1.0 - 27.0 * p2);
    if inner < -1e-12 {
        return f64::NAN;
    }
    let im = 6.0 * 3f64.sqrt() * inner.max(0.0).sqrt();
    let theta = im.atan2(54.0 * p2 - 1.0);
    let (s, c) = (theta / 3.0).sin_cos();
    if p < 0.0 {
        (3f64.sqrt() * s - c - 1.0) / (6.0 * p)
    } else {
        (2.0 * c - 1.0) / (6.0 * p)
    }
}

/// The elliptope of 3×3 correlation matrices, in coordinates of the
/// off-diagonal entries.
pub fn elliptope() -> Result<StarBody> {
    let r_min = 3f64.sqrt() / 2.0;
    let r_max = 3f64.sqrt();
    StarBody::new(
        3,
        BodyKind::Radial,
        "elliptope",
        Some(lipschitz_from_kernel(r_min, r_max, BodyKind::Radial)),
        |x: &[f64]| {
            if (x[0] * x[1] * x[2]).abs() < 1e-8 {
                elliptope_bisection(x)
            } else {
                elliptope_closed_form(x)
            }
        },
    )
}

/// The unit ball in R^n (radial function 1).
pub fn ball(n: usize) -> Result<StarBody> {
    StarBody::new(n, BodyKind::Radial, "ball", None, |_: &[f64]| 1.0)
}

/// Swaps radial and gauge: eval ↦ 1/eval, κ ↦ κ · max(1/eval)².
pub fn reciprocal(b: &StarBody) -> Result<StarBody> {
    let inner = b.eval.clone();
    let lipschitz = b.lipschitz.map(|k| {
        let worst = sample_points(b.n, PROBE_POINTS, PROBE_SEED)
            .iter()
            .map(|x| 1.0 / (inner)(x))
            .fold(0.0, f64::max);
        k * worst * worst
    });
    StarBody::from_arc(
        b.n,
        b.kind.swap(),
        b.name.clone(),
        lipschitz,
        Arc::new(move |x: &[f64]| 1.0 / inner(x)),
    )
}

/// Lipschitz constant of a convex body with B_r ⊆ L ⊆ B_R: 1/r for the
/// gauge, R²/r for the radial function.
pub fn lipschitz_from_kernel(r: f64, big_r: f64, kind: BodyKind) -> f64 {
    match kind {
        BodyKind::Gauge => 1.0 / r,
        BodyKind::Radial => big_r * big_r / r,
    }
}

/// Quadrature estimate (1/n) Σ W(z_i) ρ(z_i)^n of the volume.
///
/// The integrand is generally not polynomial, so accuracy depends on its
/// smoothness rather than on the rule's exactness degree.
pub fn volume(b: &StarBody, rule: &SphereRule) -> Result<f64> {
    if b.kind != BodyKind::Radial {
        return Err(Error::domain("volume", "a radial function is required"));
    }
    if b.n != rule.dimension() {
        return Err(Error::domain(
            "volume",
            format!("body in R^{} but rule on S^{}", b.n, rule.dimension() - 1),
        ));
    }
    let n = b.n as i32;
    Ok(rule.integrate(|z| b.eval_unit(z).powi(n)) / b.n as f64)
}

/// Outcome of [`convexity_check_2d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Convexity {
    Convex,
    /// Most negative sampled curvature term and where it occurs.
    Nonconvex { witness: f64, value: f64 },
}

/// Tests convexity of a planar starbody given as a function of the angle.
///
/// A gauge p is convex iff p + p'' ≥ 0; a radial q is tested through its
/// reciprocal 1/q. Derivatives are central differences on `grid_size`
/// equispaced angles.
pub fn convexity_check_2d(
    p: impl Fn(f64) -> f64,
    kind: BodyKind,
    grid_size: usize,
) -> Result<Convexity> {
    if grid_size < 8 {
        return Err(Error::domain(
            "convexity_check_2d",
            format!("grid of {grid_size} angles is too coarse"),
        ));
    }
    let h = std::f64::consts::TAU / grid_size as f64;
    let gauge: Vec<f64> = (0..grid_size)
        .map(|i| {
            let v = p(i as f64 * h);
            match kind {
                BodyKind::Gauge => v,
                BodyKind::Radial => 1.0 / v,
            }
        })
        .collect();
    if let Some(i) = gauge.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::domain(
            "convexity_check_2d",
            format!("gauge is not positive at θ = {}", i as f64 * h),
        ));
    }
    let scale = gauge.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = (f64::INFINITY, 0.0);
    for i in 0..grid_size {
        let prev = gauge[(i + grid_size - 1) % grid_size];
        let next = gauge[(i + 1) % grid_size];
        let curvature = gauge[i] + (next - 2.0 * gauge[i] + prev) / (h * h);
        if curvature < worst.0 {
            worst = (curvature, i as f64 * h);
        }
    }
    if worst.0 >= -1e-6 * scale {
        Ok(Convexity::Convex)
    } else {
        Ok(Convexity::Nonconvex {
            witness: worst.1,
            value: worst.0,
        })
    }
}

/// Built-in bodies by name: cube, cylinder, tin-can, elliptope, ball, triangle.
pub fn body_by_name(name: &str) -> Result<StarBody> {
    match name {
        "cube" => cube(),
        "cylinder" => cylinder(),
        "tin-can" => dented_tin_can(),
        "elliptope" => elliptope(),
        "ball" => ball(3),
        "triangle" => triangle(),
        other => Err(Error::Config(format!(
            "unknown body {other:?}; expected one of cube, cylinder, tin-can, elliptope, ball, triangle"
        ))),
    }
}


#[cfg(test)]
mod membership_oracle {
    //! Radial values recovered by bisection on set membership, independent
    //! of the closed-form evaluators.

    use super::*;
    use proptest::prelude::*;

    fn ray_bisection(inside: impl Fn(&[f64; 3]) -> bool, x: &[f64]) -> f64 {
        let (mut lo, mut hi) = (0.0, 4.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if inside(&[mid * x[0], mid * x[1], mid * x[2]]) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn in_cube(p: &[f64; 3]) -> bool {
        p.iter().all(|c| c.abs() <= 1.0)
    }

    fn in_cylinder(p: &[f64; 3]) -> bool {
        p[0] * p[0] + p[1] * p[1] <= 1.0 && p[2].abs() <= 1.0
    }

    /// Correlation matrix [[1,a,b],[a,1,c],[b,c,1]] is PSD iff the
    /// coefficients of its characteristic polynomial alternate in sign.
    fn in_elliptope(p: &[f64; 3]) -> bool {
        let (a, b, c) = (p[0], p[1], p[2]);
        let s = a * a + b * b + c * c;
        3.0 - s >= 0.0 && 1.0 - s + 2.0 * a * b * c >= 0.0
    }

    #[test]
    fn closed_forms_match_membership() {
        let bodies: [(StarBody, fn(&[f64; 3]) -> bool); 3] = [
            (cube().unwrap(), in_cube),
            (cylinder().unwrap(), in_cylinder),
            (elliptope().unwrap(), in_elliptope),
        ];
        for (body, inside) in &bodies {
            for x in random_points(3, 1000, 21) {
                let exact = ray_bisection(inside, &x);
                let v = body.eval_unit(&x);
                assert!(
                    (v - exact).abs() <= 1e-8 * exact,
                    "{}: {v} vs {exact} at {x:?}",
                    body.name()
                );
            }
        }
    }

    #[test]
    fn elliptope_reference_directions() {
        let e = elliptope().unwrap();
        for x in [[0.0, 0.0, 1.0], [1.0, 1.0, 1.0], [-1.0, -1.0, -1.0], [1.0, 0.0, -1.0]] {
            let u = normalized(&x).unwrap();
            let exact = ray_bisection(in_elliptope, &u);
            assert!((e.eval_unit(&u) - exact).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn gauge_times_radial_is_one(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0) {
            prop_assume!(a * a + b * b + c * c > 1e-6);
            let x = [a, b, c];
            for body in [cube().unwrap(), cylinder().unwrap(), elliptope().unwrap()] {
                let g = reciprocal(&body).unwrap();
                let prod = g.eval(&x).unwrap() * body.eval(&x).unwrap();
                prop_assert!((prod - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn evaluation_is_scale_invariant(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0, s in 0.01f64..100.0) {
            prop_assume!(a * a + b * b + c * c > 1e-6);
            let d = dented_tin_can().unwrap();
            let x = [a, b, c];
            let y = [s * a, s * b, s * c];
            let (u, v) = (d.eval(&x).unwrap(), d.eval(&y).unwrap());
            prop_assert!((u - v).abs() <= 1e-12 * u);
        }
    }
}
