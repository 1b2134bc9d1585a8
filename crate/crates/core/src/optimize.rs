//! Maximization on S² by multistart projected gradient ascent, and the two
//! derived problems: the largest central slice and the width of a polar body.

use serde::Serialize;

use crate::bodies::StarBody;
use crate::harmonics::HarmonicExpansion;
use crate::intersect::intersection_body_approx;
use crate::quadrature::{sphere_rule, SphereRule};
use crate::sphere::{dot, fibonacci_lattice, normalized, random_rotation, rotate, SpherePoint};
use crate::{Error, Result};

const ARMIJO: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const INITIAL_STEP: f64 = 0.1;
const MIN_STEP: f64 = 1e-16;
const FD_STEP: f64 = 1e-6;

/// Best point found on the sphere.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereMaximum {
    pub value: f64,
    pub direction: Vec<f64>,
    /// Norm of the tangent gradient at `direction`.
    pub refinement_residual: f64,
}

impl SphereMaximum {
    pub fn point(&self) -> SpherePoint {
        SpherePoint::new(self.direction.clone()).expect("direction is a unit vector")
    }
}

/// A function on S² to be maximized.
pub trait SphereObjective: Sync {
    fn value(&self, x: &[f64]) -> Result<f64>;

    /// Value and tangent gradient at a unit vector. The default uses
    /// central differences along an orthonormal tangent frame.
    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let v = self.value(x)?;
        let mut grad = [0.0; 3];
        for t in tangent_frame(x) {
            let along = |s: f64| -> Result<f64> {
                let p: Vec<f64> = x.iter().zip(&t).map(|(a, b)| a + s * b).collect();
                self.value(&normalized(&p).expect("nonzero"))
            };
            let d = (along(FD_STEP)? - along(-FD_STEP)?) / (2.0 * FD_STEP);
            for (g, tc) in grad.iter_mut().zip(&t) {
                *g += d * tc;
            }
        }
        Ok((v, grad.to_vec()))
    }

    /// Whether f(x) = f(-x) for all x.
    fn is_even(&self) -> bool {
        false
    }
}

fn tangent_frame(x: &[f64]) -> [[f64; 3]; 2] {
    // Cross with the coordinate axis least aligned with x.
    let axis = (0..3)
        .min_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()))
        .unwrap_or(0);
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let cross = |a: &[f64], b: &[f64]| {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    };
    let u = cross(x, &e);
    let un = normalized(&u).expect("axis not parallel to x");
    let v = cross(x, &un);
    [[un[0], un[1], un[2]], v]
}

/// Sphere polynomial with its analytic gradient.
pub struct ExpansionObjective<'a> {
    pub expansion: &'a HarmonicExpansion,
    pub even: bool,
}

impl SphereObjective for ExpansionObjective<'_> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.expansion.eval_unit(x))
    }

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok(self.expansion.value_and_gradient_unit(x))
    }

    fn is_even(&self) -> bool {
        self.even
    }
}

/// x ↦ 1/e(x) + 1/e(-x) for a positive sphere polynomial e.
pub struct WidthObjective<'a> {
    pub expansion: &'a HarmonicExpansion,
}

impl WidthObjective<'_> {
    fn checked(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (v, g) = self.expansion.value_and_ambient_gradient(x);
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Positivity {
                op: "width",
                value: v,
                point: x.to_vec(),
            });
        }
        Ok((v, g))
    }
}

impl SphereObjective for WidthObjective<'_> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        let minus: Vec<f64> = x.iter().map(|c| -c).collect();
        let a = self.expansion.eval_unit(x);
        let b = self.expansion.eval_unit(&minus);
        for (v, p) in [(a, x), (b, &minus[..])] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Positivity {
                    op: "width",
                    value: v,
                    point: p.to_vec(),
                });
            }
        }
        Ok(1.0 / a + 1.0 / b)
    }

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let minus: Vec<f64> = x.iter().map(|c| -c).collect();
        let (a, ga) = self.checked(x)?;
        let (b, gb) = self.checked(&minus)?;
        // d/dx 1/e(x) = -∇e(x)/e², d/dx 1/e(-x) = ∇e(-x)/e(-x)².
        let mut g: Vec<f64> = ga
            .iter()
            .zip(&gb)
            .map(|(p, q)| -p / (a * a) + q / (b * b))
            .collect();
        let radial = dot(&g, x);
        for (gc, xc) in g.iter_mut().zip(x) {
            *gc -= radial * xc;
        }
        Ok((1.0 / a + 1.0 / b, g))
    }

    fn is_even(&self) -> bool {
        true
    }
}

/// Settings for [`maximize_on_sphere`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaximizeOptions {
    /// Number of coarse candidates refined by gradient ascent.
    pub restarts: usize,
    /// The coarse scan uses the nodes of `sphere_rule(3, grid_k)` and a
    /// Fibonacci lattice of 4(grid_k + 1)² points.
    pub grid_k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once the tangent gradient norm falls to this value.
    pub tol: f64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        MaximizeOptions {
            restarts: 32,
            grid_k: 40,
            seed: 0,
            max_iter: 500,
            tol: 1e-8,
        }
    }
}

/// Coarse scan points: rule nodes plus a seeded rotation of a Fibonacci lattice.
pub fn scan_points(grid_k: usize, seed: u64) -> Result<Vec<[f64; 3]>> {
    let rule: SphereRule = sphere_rule(3, grid_k)?;
    let rot = random_rotation(seed);
    let mut pts: Vec<[f64; 3]> = rule.nodes().map(|z| [z[0], z[1], z[2]]).collect();
    pts.extend(
        fibonacci_lattice(4 * (grid_k + 1) * (grid_k + 1))
            .iter()
            .map(|p| rotate(&rot, p)),
    );
    Ok(pts)
}

struct Refined {
    value: f64,
    x: Vec<f64>,
    residual: f64,
}

fn refine(
    f: &dyn SphereObjective,
    start: &[f64],
    opts: &MaximizeOptions,
) -> Result<Option<Refined>> {
    let mut x = start.to_vec();
    let (mut v, mut g) = f.value_and_gradient(&x)?;
    let mut step = INITIAL_STEP;
    for _ in 0..opts.max_iter {
        let gn2 = dot(&g, &g);
        if gn2.sqrt() <= opts.tol {
            break;
        }
        let mut accepted = None;
        let mut t = step;
        while t >= MIN_STEP {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + t * b).collect();
            let trial = normalized(&trial).expect("nonzero trial point");
            let tv = f.value(&trial)?;
            if tv >= v + ARMIJO * t * gn2 {
                accepted = Some((trial, t));
                break;
            }
            t *= SHRINK;
        }
        match accepted {
            Some((trial, t)) => {
                let (nv, ng) = f.value_and_gradient(&trial)?;
                // Barzilai–Borwein length for the next trial step.
                let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = g.iter().zip(&ng).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                step = if sy > 0.0 {
                    (dot(&s, &s) / sy).clamp(1e-10, 1e3)
                } else {
                    2.0 * t
                };
                x = trial;
                v = nv;
                g = ng;
            }
            None => {
                let residual = dot(&g, &g).sqrt();
                if residual > 1e-7 * (1.0 + v.abs()) {
                    return Ok(None);
                }
                break;
            }
        }
    }
    if !v.is_finite() {
        return Ok(None);
    }
    Ok(Some(Refined {
        value: v,
        residual: dot(&g, &g).sqrt(),
        x,
    }))
}

fn canonical_sign(x: &mut [f64]) {
    if let Some(c) = x.iter().find(|c| c.abs() > 1e-12) {
        if *c < 0.0 {
            x.iter_mut().for_each(|c| *c = -*c);
        }
    }
}

/// Multistart maximization of `f` over S².
pub fn maximize_on_sphere(
    f: &dyn SphereObjective,
    opts: &MaximizeOptions,
) -> Result<SphereMaximum> {
    const OP: &str = "maximize_on_sphere";
    if opts.restarts == 0 {
        return Err(Error::domain(OP, "at least one restart is required"));
    }
    let even = f.is_even();
    let mut scored = Vec::new();
    for p in scan_points(opts.grid_k, opts.seed)? {
        let v = f.value(&p)?;
        if v.is_finite() {
            scored.push((v, p));
        }
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.partial_cmp(&b.1).unwrap()));
    let best_coarse = scored.first().map_or(f64::NAN, |s| s.0);

    // Greedy pick of well-separated starting points.
    let min_cos = (std::f64::consts::PI / (opts.grid_k + 1) as f64).cos();
    let mut starts: Vec<[f64; 3]> = Vec::with_capacity(opts.restarts);
    for (_, p) in &scored {
        if starts.len() == opts.restarts {
            break;
        }
        let clash = starts.iter().any(|s| {
            let c = dot(s, p);
            c > min_cos || (even && -c > min_cos)
        });
        if !clash {
            starts.push(*p);
        }
    }

    let mut best: Option<Refined> = None;
    for s in &starts {
        let Some(mut r) = refine(f, s, opts)? else {
            continue;
        };
        if even {
            canonical_sign(&mut r.x);
        }
        let better = match &best {
            None => true,
            Some(b) => {
                r.value > b.value
                    || (r.value == b.value && r.x.partial_cmp(&b.x) == Some(std::cmp::Ordering::Less))
            }
        };
        if better {
            best = Some(r);
        }
    }
    let best = best.ok_or(Error::Optimization {
        op: OP,
        best_coarse,
    })?;
    Ok(SphereMaximum {
        value: best.value,
        direction: best.x,
        refinement_residual: best.residual,
    })
}

/// Largest central slice of a radial body in R³: the maximum of its
/// approximate intersection body.
pub fn largest_slice(
    b: &StarBody,
    k: usize,
    m: usize,
    rule: &SphereRule,
    opts: &MaximizeOptions,
) -> Result<SphereMaximum> {
    let e = intersection_body_approx(b, k, m, rule)?;
    maximize_on_sphere(
        &ExpansionObjective {
            expansion: &e,
            even: true,
        },
        opts,
    )
}

/// Width of L from an approximation of the radial function of its polar
/// L°: the maximum over x of 1/e(x) + 1/e(-x).
pub fn width(e: &HarmonicExpansion, opts: &MaximizeOptions) -> Result<SphereMaximum> {
    if e.dimension() != 3 {
        return Err(Error::domain("width", "only dimension 3 is supported"));
    }
    maximize_on_sphere(&WidthObjective { expansion: e }, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{ball, cube};
    use crate::harmonics::{harmonic_component, mollified_approx, FnOnSphere};
    use crate::sphere::random_points;

    fn quick() -> MaximizeOptions {
        MaximizeOptions {
            restarts: 8,
            grid_k: 12,
            ..Default::default()
        }
    }

    struct Plain<F>(F);
    impl<F: Fn(&[f64]) -> f64 + Sync> SphereObjective for Plain<F> {
        fn value(&self, x: &[f64]) -> Result<f64> {
            Ok((self.0)(x))
        }
    }

    #[test]
    fn constant_objective() {
        let m = maximize_on_sphere(&Plain(|_: &[f64]| 2.5), &quick()).unwrap();
        assert_eq!(m.value, 2.5);
        assert_eq!(m.refinement_residual, 0.0);
    }

    #[test]
    fn linear_objective() {
        let m = maximize_on_sphere(&Plain(|x: &[f64]| x[2]), &quick()).unwrap();
        assert!((m.value - 1.0).abs() < 1e-8);
        assert!((m.direction[2] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn expansion_maximum_and_residual() {
        let rule = sphere_rule(3, 2).unwrap();
        let f = FnOnSphere::new(3, |x: &[f64]| x[0] - 2.0 * x[1]);
        let e = harmonic_component(&f, 1, &rule).unwrap();
        let m = maximize_on_sphere(
            &ExpansionObjective {
                expansion: &e,
                even: false,
            },
            &quick(),
        )
        .unwrap();
        assert!((m.value - 5f64.sqrt()).abs() < 1e-10);
        assert!(m.refinement_residual <= 1e-7 * (1.0 + m.value));
        assert!((m.point().coords()[0] * 5f64.sqrt() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn refinement_never_loses_to_the_scan() {
        let rule = sphere_rule(3, 12).unwrap();
        let e = mollified_approx(&cube().unwrap(), 6, 12, &rule).unwrap();
        let opts = quick();
        let m = maximize_on_sphere(
            &ExpansionObjective {
                expansion: &e,
                even: true,
            },
            &opts,
        )
        .unwrap();
        let coarse = scan_points(opts.grid_k, opts.seed)
            .unwrap()
            .iter()
            .map(|p| e.eval_unit(p))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(m.value >= coarse);
        let again = maximize_on_sphere(
            &ExpansionObjective {
                expansion: &e,
                even: true,
            },
            &opts,
        )
        .unwrap();
        assert_eq!(m, again);
        let first = m.direction.iter().find(|c| c.abs() > 1e-12).unwrap();
        assert!(*first > 0.0);
    }

    #[test]
    fn ball_width_is_two() {
        let rule = sphere_rule(3, 6).unwrap();
        let e = mollified_approx(&ball(3).unwrap(), 3, 6, &rule).unwrap();
        let w = width(&e, &quick()).unwrap();
        assert!((w.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn width_objective_is_antipodal_and_has_correct_gradient() {
        let rule = sphere_rule(3, 10).unwrap();
        let e = mollified_approx(&cube().unwrap(), 5, 10, &rule).unwrap();
        let w = WidthObjective { expansion: &e };
        for x in random_points(3, 20, 4) {
            let minus: Vec<f64> = x.iter().map(|c| -c).collect();
            assert!((w.value(&x).unwrap() - w.value(&minus).unwrap()).abs() < 1e-12);
            let (_, g) = w.value_and_gradient(&x).unwrap();
            for t in tangent_frame(&x) {
                let along = |s: f64| {
                    let p: Vec<f64> = x.iter().zip(&t).map(|(a, b)| a + s * b).collect();
                    w.value(&normalized(&p).unwrap()).unwrap()
                };
                let fd = (along(1e-5) - along(-1e-5)) / 2e-5;
                assert!((fd - dot(&g, &t)).abs() < 1e-5 * fd.abs().max(1.0));
            }
        }
    }

    #[test]
    fn nonpositive_expansion_is_reported() {
        let rule = sphere_rule(3, 2).unwrap();
        let f = FnOnSphere::new(3, |x: &[f64]| x[2]);
        let e = harmonic_component(&f, 1, &rule).unwrap();
        assert!(matches!(
            width(&e, &quick()),
            Err(Error::Positivity { .. })
        ));
    }

    #[test]
    fn ball_slice() {
        let rule = sphere_rule(3, 8).unwrap();
        let m = largest_slice(&ball(3).unwrap(), 4, 8, &rule, &quick()).unwrap();
        assert!((m.value - std::f64::consts::PI).abs() < 1e-8);
    }

    #[test]
    fn no_restarts_is_an_error() {
        let opts = MaximizeOptions {
            restarts: 0,
            ..quick()
        };
        assert!(maximize_on_sphere(&Plain(|x: &[f64]| x[0]), &opts).is_err());
    }
}
