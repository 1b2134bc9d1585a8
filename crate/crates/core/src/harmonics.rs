//! Harmonic components of black-box functions on S^{n-1}, the Newman–Shapiro
//! filter, and the mollified polynomial approximations built from them.
//!
//! Every expansion produced here has the form
//!
//! ```text
//! p(x) = Σ_i s_i K(⟨x, z_i⟩),   K(t) = Σ_j μ_j Z_j(t),   s_i = W(z_i) f(z_i)
//! ```
//!
//! where (z_i, W) is a quadrature rule on the sphere and Z_j is the zonal
//! kernel of degree j. With μ_j = 1 for a single j this is the quadrature
//! estimate of the j-th harmonic component of f; with μ_j = λ_j, the
//! zonal coefficients of the filter u_{2k}, it is the approximate
//! convolution T_u f. The kernel is cached in the Gegenbauer basis so an
//! evaluation costs O(#nodes · max degree).

use serde::{Deserialize, Serialize};

use crate::gegenbauer::{harmonic_dim, GegenbauerBasis, ZonalKernel};
use crate::quadrature::{gauss_gegenbauer, sphere_area, SphereRule};
use crate::sphere::{dot, normalized, sample_points};
use crate::{Error, Result};

const EXPANSION_FORMAT: &str = "polystar-expansion-v1";

/// A real function on the unit sphere, evaluated at unit vectors.
///
/// Implementations must be deterministic and safe to call concurrently.
pub trait SphereFunction: Sync {
    fn dimension(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
}

/// Adapts a closure into a [`SphereFunction`].
pub struct FnOnSphere<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnOnSphere<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnOnSphere { n, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> SphereFunction for FnOnSphere<F> {
    fn dimension(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// One degree of an expansion and its multiplier μ_j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeCoeff {
    pub j: usize,
    pub coeff: f64,
}

/// A polynomial on S^{n-1} stored as quadrature samples and a zonal kernel.
#[derive(Debug, Clone)]
pub struct HarmonicExpansion {
    n: usize,
    degrees: Vec<DegreeCoeff>,
    nodes: Vec<f64>,
    samples: Vec<f64>,
    basis: GegenbauerBasis,
    /// Kernel K in the Gegenbauer basis: K(t) = Σ_j kernel[j] C_j(t).
    kernel: Vec<f64>,
    /// Recurrence multipliers 2(j+α-1)/j and (j+2α-2)/j for j >= 2.
    rec_t: Vec<f64>,
    rec_prev: Vec<f64>,
}

impl HarmonicExpansion {
    /// Builds an expansion from row-major `nodes` and weighted `samples`.
    pub fn new(
        n: usize,
        degrees: Vec<DegreeCoeff>,
        nodes: Vec<f64>,
        samples: Vec<f64>,
    ) -> Result<Self> {
        let basis = GegenbauerBasis::for_dimension(n)?;
        if nodes.len() != n * samples.len() {
            return Err(Error::domain(
                "HarmonicExpansion::new",
                format!(
                    "{} node coordinates do not match {} samples in dimension {n}",
                    nodes.len(),
                    samples.len()
                ),
            ));
        }
        let top = degrees.iter().map(|d| d.j).max();
        let mut kernel = vec![0.0; top.map_or(0, |t| t + 1)];
        for d in &degrees {
            let z = ZonalKernel::new(n, d.j)?;
            kernel[d.j] += d.coeff * z.norm_factor();
        }
        let alpha = basis.alpha();
        let (rec_t, rec_prev) = (0..kernel.len())
            .map(|j| {
                if j < 2 {
                    (0.0, 0.0)
                } else {
                    let jf = j as f64;
                    (
                        2.0 * (jf + alpha - 1.0) / jf,
                        (jf + 2.0 * alpha - 2.0) / jf,
                    )
                }
            })
            .unzip();
        Ok(HarmonicExpansion {
            n,
            degrees,
            nodes,
            samples,
            basis,
            kernel,
            rec_t,
            rec_prev,
        })
    }

    /// Expansion whose samples are W(z_i) · values[i] on `rule`.
    pub fn from_rule_values(
        rule: &SphereRule,
        degrees: Vec<DegreeCoeff>,
        values: &[f64],
    ) -> Result<Self> {
        if values.len() != rule.len() {
            return Err(Error::domain(
                "HarmonicExpansion::from_rule_values",
                "one value per rule node required",
            ));
        }
        let samples = rule
            .weights()
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .collect();
        Self::new(
            rule.dimension(),
            degrees,
            rule.flat_nodes().to_vec(),
            samples,
        )
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn degrees(&self) -> &[DegreeCoeff] {
        &self.degrees
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn node_count(&self) -> usize {
        self.samples.len()
    }

    /// Largest j with μ_j ≠ 0 (0 for the zero expansion).
    pub fn max_degree(&self) -> usize {
        self.degrees
            .iter()
            .filter(|d| d.coeff != 0.0)
            .map(|d| d.j)
            .max()
            .unwrap_or(0)
    }

    fn unit(&self, op: &'static str, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::domain(
                op,
                format!("point has dimension {}, expansion has {}", x.len(), self.n),
            ));
        }
        let nrm = dot(x, x).sqrt();
        if (nrm - 1.0).abs() > 1e-9 {
            return Err(Error::domain(op, format!("point has norm {nrm}, expected 1")));
        }
        normalized(x).ok_or_else(|| Error::domain(op, "zero vector"))
    }

    /// Value at `x` (unit within 1e-9; renormalized internally).
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let u = self.unit("eval_expansion", x)?;
        Ok(self.eval_unit(&u))
    }

    /// Kernel K(t) and K'(t).
    #[inline]
    fn kernel_with_derivative(&self, t: f64) -> (f64, f64) {
        let k = &self.kernel;
        match k.len() {
            0 => (0.0, 0.0),
            1 => (k[0], 0.0),
            len => {
                let two_a = 2.0 * self.basis.alpha();
                let (mut c0, mut c1) = (1.0, two_a * t);
                let (mut d0, mut d1) = (0.0, two_a);
                let mut v = k[0] + k[1] * c1;
                let mut dv = k[1] * d1;
                for j in 2..len {
                    let (a, b) = (self.rec_t[j], self.rec_prev[j]);
                    let c2 = a * t * c1 - b * c0;
                    let d2 = a * (c1 + t * d1) - b * d0;
                    v += k[j] * c2;
                    dv += k[j] * d2;
                    c0 = c1;
                    c1 = c2;
                    d0 = d1;
                    d1 = d2;
                }
                (v, dv)
            }
        }
    }

    #[inline]
    fn kernel_value(&self, t: f64) -> f64 {
        let k = &self.kernel;
        match k.len() {
            0 => 0.0,
            1 => k[0],
            len => {
                let (mut c0, mut c1) = (1.0, 2.0 * self.basis.alpha() * t);
                let mut v = k[0] + k[1] * c1;
                for j in 2..len {
                    let c2 = self.rec_t[j] * t * c1 - self.rec_prev[j] * c0;
                    v += k[j] * c2;
                    c0 = c1;
                    c1 = c2;
                }
                v
            }
        }
    }

    /// Value at a unit vector of the right dimension, without checks.
    pub fn eval_unit(&self, x: &[f64]) -> f64 {
        self.nodes
            .chunks_exact(self.n)
            .zip(&self.samples)
            .map(|(z, s)| s * self.kernel_value(dot(x, z).clamp(-1.0, 1.0)))
            .sum()
    }

    /// Value and Euclidean gradient of x ↦ Σ s_i K(⟨x, z_i⟩), without checks.
    pub(crate) fn value_and_ambient_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.n];
        let mut value = 0.0;
        for (z, s) in self.nodes.chunks_exact(self.n).zip(&self.samples) {
            let (k, dk) = self.kernel_with_derivative(dot(x, z).clamp(-1.0, 1.0));
            value += s * k;
            let c = s * dk;
            for (g, zc) in grad.iter_mut().zip(z) {
                *g += c * zc;
            }
        }
        (value, grad)
    }

    /// Value and tangent (Riemannian) gradient at a unit vector, unchecked.
    pub fn value_and_gradient_unit(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (v, mut g) = self.value_and_ambient_gradient(x);
        let radial = dot(&g, x);
        for (gc, xc) in g.iter_mut().zip(x) {
            *gc -= radial * xc;
        }
        (v, g)
    }

    /// Ambient gradient projected onto the tangent space at `x`.
    pub fn eval_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let u = self.unit("eval_expansion_gradient", x)?;
        Ok(self.value_and_gradient_unit(&u).1)
    }

    /// The degree-j part Σ_i s_i μ_j Z_j(⟨x, z_i⟩), evaluated directly.
    pub fn eval_component(&self, j: usize, x: &[f64]) -> Result<f64> {
        let u = self.unit("eval_component", x)?;
        let mu: f64 = self
            .degrees
            .iter()
            .filter(|d| d.j == j)
            .map(|d| d.coeff)
            .sum();
        if mu == 0.0 {
            return Ok(0.0);
        }
        let z = ZonalKernel::new(self.n, j)?;
        let total: f64 = self
            .nodes
            .chunks_exact(self.n)
            .zip(&self.samples)
            .map(|(node, s)| s * self.basis.eval_unchecked(j, dot(&u, node).clamp(-1.0, 1.0)))
            .sum();
        Ok(mu * z.norm_factor() * total)
    }

    /// Sum of [`Self::eval_component`] over all stored degrees.
    pub fn eval_by_components(&self, x: &[f64]) -> Result<f64> {
        let mut seen: Vec<usize> = self.degrees.iter().map(|d| d.j).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.into_iter().map(|j| self.eval_component(j, x)).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ExpansionFile {
            format: EXPANSION_FORMAT.to_string(),
            n: self.n,
            degrees: self.degrees.clone(),
            nodes: self.nodes.chunks_exact(self.n).map(|z| z.to_vec()).collect(),
            samples: self.samples.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ExpansionFile = serde_json::from_str(text)?;
        if file.format != EXPANSION_FORMAT {
            return Err(Error::Config(format!(
                "unsupported expansion format {:?}, expected {EXPANSION_FORMAT:?}",
                file.format
            )));
        }
        if file.nodes.iter().any(|z| z.len() != file.n) {
            return Err(Error::Config("malformed expansion file".to_string()));
        }
        Self::new(
            file.n,
            file.degrees,
            file.nodes.into_iter().flatten().collect(),
            file.samples,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct ExpansionFile {
    format: String,
    n: usize,
    degrees: Vec<DegreeCoeff>,
    nodes: Vec<Vec<f64>>,
    samples: Vec<f64>,
}

fn sample_function(op: &'static str, f: &dyn SphereFunction, rule: &SphereRule) -> Result<Vec<f64>> {
    if f.dimension() != rule.dimension() {
        return Err(Error::domain(
            op,
            format!(
                "function lives on S^{} but the rule on S^{}",
                f.dimension() - 1,
                rule.dimension() - 1
            ),
        ));
    }
    let values: Vec<f64> = rule.nodes().map(|z| f.value(z)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::numeric(
            op,
            format!("function is not finite at node {:?}", rule.node(i)),
        ));
    }
    Ok(values)
}

/// Quadrature estimate of the degree-d harmonic component of `f`.
///
/// The rule must be exact in degree 2d (and in d + m for the error bound
/// [`component_error_bound`] with the caller's m to apply).
pub fn harmonic_component(
    f: &dyn SphereFunction,
    d: usize,
    rule: &SphereRule,
) -> Result<HarmonicExpansion> {
    if rule.exact_degree() < 2 * d {
        return Err(Error::domain(
            "harmonic_component",
            format!(
                "rule exact in degree {} but degree {} is required",
                rule.exact_degree(),
                2 * d
            ),
        ));
    }
    let values = sample_function("harmonic_component", f, rule)?;
    HarmonicExpansion::from_rule_values(rule, vec![DegreeCoeff { j: d, coeff: 1.0 }], &values)
}

/// Zonal coefficients λ_0..λ_{2k} of the Newman–Shapiro filter
/// u_{2k}(t) = c (C_{k+1}(t) / (t - λ_{k+1}))², normalized so λ_0 = 1.
#[derive(Debug, Clone)]
pub struct Filter {
    pub n: usize,
    pub k: usize,
    pub coeffs: Vec<f64>,
    /// Largest root of C_{k+1}^(α).
    pub largest_root: f64,
}

impl Filter {
    /// Uniform error bound (π/√2) √(1 - λ_{k+1}) κ of T_u f for a
    /// κ-Lipschitz f.
    pub fn convolution_error_bound(&self, kappa: f64) -> f64 {
        std::f64::consts::PI / std::f64::consts::SQRT_2
            * (1.0 - self.largest_root).max(0.0).sqrt()
            * kappa
    }

    pub fn degrees(&self) -> Vec<DegreeCoeff> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, &coeff)| DegreeCoeff { j, coeff })
            .collect()
    }
}

pub fn newman_shapiro_filter(n: usize, k: usize) -> Result<Filter> {
    const OP: &str = "newman_shapiro_filter";
    let basis = GegenbauerBasis::for_dimension(n)?;
    let alpha = basis.alpha();
    let roots = basis.roots(k + 1)?;
    let top = *roots.last().expect("k + 1 >= 1 roots");

    // The top eigenvalue must be an actual root of C_{k+1}.
    let grid_max = (0..=2000)
        .map(|i| basis.eval_unchecked(k + 1, -1.0 + i as f64 / 1000.0).abs())
        .fold(0.0, f64::max);
    let residual = basis.eval_unchecked(k + 1, top).abs();
    if residual > 1e-8 * grid_max {
        return Err(Error::numeric(
            OP,
            format!("deflation residual {residual} at root {top}"),
        ));
    }

    // C_{k+1}(t) / (t - λ_{k+1}) is proportional to the product over the
    // remaining roots; the constant cancels in the normalization.
    let others = &roots[..roots.len() - 1];
    let rule = gauss_gegenbauer(alpha, 2 * k + 1)?;
    let filter_values: Vec<f64> = rule
        .nodes
        .iter()
        .map(|&t| {
            let q: f64 = others.iter().map(|r| t - r).product();
            q * q
        })
        .collect();
    let mass: f64 = filter_values
        .iter()
        .zip(&rule.weights)
        .map(|(u, w)| u * w)
        .sum();

    let mut coeffs = Vec::with_capacity(2 * k + 1);
    let mut c = vec![0.0; 2 * k + 1];
    let mut sums = vec![0.0; 2 * k + 1];
    for ((&t, &w), &u) in rule.nodes.iter().zip(&rule.weights).zip(&filter_values) {
        basis.eval_all(t, &mut c);
        for (s, cj) in sums.iter_mut().zip(&c) {
            *s += w * u * cj;
        }
    }
    for (j, s) in sums.iter().enumerate() {
        coeffs.push(s / (mass * basis.value_at_one(j)));
    }
    coeffs[0] = 1.0;
    Ok(Filter {
        n,
        k,
        coeffs,
        largest_root: top,
    })
}

/// Bound c_{κ,d,n,m} = π(n-2)κ/m · √(2 μ(S^{n-1}) dim H_d) on the uniform
/// error of [`harmonic_component`] with a rule exact in degree d + m.
pub fn component_error_bound(kappa: f64, d: usize, n: usize, m: usize) -> f64 {
    std::f64::consts::PI * (n as f64 - 2.0) * kappa / m as f64
        * (2.0 * sphere_area(n) * harmonic_dim(n, d) as f64).sqrt()
}

/// Total uniform error budget of [`mollified_approx`]: the convolution
/// bound plus Σ_j |λ_j| c_{κ,j,n,m}.
pub fn mollified_error_bound(filter: &Filter, kappa: f64, m: usize) -> f64 {
    filter.convolution_error_bound(kappa)
        + filter
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, l)| l.abs() * component_error_bound(kappa, j, filter.n, m))
            .sum::<f64>()
}

/// Rule exactness needed by [`mollified_approx`]: max(2k + m, 4k).
pub fn required_rule_degree(k: usize, m: usize) -> usize {
    (2 * k + m).max(4 * k)
}

/// Mollified approximation Σ_{j=0}^{2k} λ_j f̃_j of `f` with a single
/// evaluation of `f` per rule node.
pub fn mollified_approx(
    f: &dyn SphereFunction,
    k: usize,
    m: usize,
    rule: &SphereRule,
) -> Result<HarmonicExpansion> {
    let needed = required_rule_degree(k, m);
    if rule.exact_degree() < needed {
        return Err(Error::domain(
            "mollified_approx",
            format!(
                "rule exact in degree {} but degree {needed} is required",
                rule.exact_degree()
            ),
        ));
    }
    let filter = newman_shapiro_filter(rule.dimension(), k)?;
    let values = sample_function("mollified_approx", f, rule)?;
    HarmonicExpansion::from_rule_values(rule, filter.degrees(), &values)
}

/// Smallest value of `e` over `count` quasi-uniform points, with its location.
///
/// For expansions produced by [`mollified_approx`] from a function that is
/// nonnegative on the rule nodes this is ≥ 0 up to rounding; for
/// sign-changing inputs it may be negative.
pub fn nonnegativity_probe(e: &HarmonicExpansion, count: usize, seed: u64) -> (f64, Vec<f64>) {
    let mut best = (f64::INFINITY, vec![]);
    for x in sample_points(e.dimension(), count, seed) {
        let v = e.eval_unit(&x);
        if v < best.0 {
            best = (v, x);
        }
    }
    best
}

/// max |e(x) - f(x)| over `count` quasi-uniform points.
pub fn sampled_sup_error(
    e: &HarmonicExpansion,
    f: &dyn SphereFunction,
    count: usize,
    seed: u64,
) -> f64 {
    sample_points(e.dimension(), count, seed)
        .iter()
        .map(|x| (e.eval_unit(x) - f.value(x)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::sphere_rule;
    use crate::sphere::random_points;

    #[test]
    fn constants_have_no_degree_two_part() {
        let rule = sphere_rule(3, 2).unwrap();
        let one = FnOnSphere::new(3, |_: &[f64]| 1.0);
        let e = harmonic_component(&one, 2, &rule).unwrap();
        for x in sample_points(3, 10_000, 1) {
            assert!(e.eval_unit(&x).abs() < 1e-10);
        }
    }

    #[test]
    fn coordinate_function_is_degree_one() {
        let rule = sphere_rule(3, 2).unwrap();
        let f = FnOnSphere::new(3, |x: &[f64]| x[0]);
        let e = harmonic_component(&f, 1, &rule).unwrap();
        assert!(sampled_sup_error(&e, &f, 2_000, 2) < 1e-9);
    }

    #[test]
    fn square_minus_mean_is_degree_two() {
        let rule = sphere_rule(3, 2).unwrap();
        let f = FnOnSphere::new(3, |x: &[f64]| x[0] * x[0]);
        let e = harmonic_component(&f, 2, &rule).unwrap();
        let oracle = FnOnSphere::new(3, |x: &[f64]| x[0] * x[0] - 1.0 / 3.0);
        assert!(sampled_sup_error(&e, &oracle, 2_000, 3) < 1e-8);
    }

    #[test]
    fn component_rejects_bad_inputs() {
        let rule = sphere_rule(3, 2).unwrap();
        let f4 = FnOnSphere::new(4, |_: &[f64]| 1.0);
        assert!(matches!(
            harmonic_component(&f4, 1, &rule),
            Err(Error::Domain { .. })
        ));
        let f3 = FnOnSphere::new(3, |_: &[f64]| 1.0);
        assert!(harmonic_component(&f3, 3, &rule).is_err());
        let nan = FnOnSphere::new(3, |_: &[f64]| f64::NAN);
        assert!(matches!(
            harmonic_component(&nan, 1, &rule),
            Err(Error::Numeric { .. })
        ));
    }

    #[test]
    fn trivial_filter() {
        let f = newman_shapiro_filter(3, 0).unwrap();
        assert_eq!(f.coeffs, vec![1.0]);
    }

    #[test]
    fn filter_invariants() {
        for n in [3, 4, 5] {
            for k in [1, 4, 15] {
                let f = newman_shapiro_filter(n, k).unwrap();
                let basis = GegenbauerBasis::for_dimension(n).unwrap();
                assert_eq!(f.coeffs.len(), 2 * k + 1);
                assert!((f.coeffs[1] - basis.largest_root(k + 1).unwrap()).abs() < 1e-9);
                assert!(f.coeffs.iter().all(|l| l.abs() <= 1.0 + 1e-10));
            }
        }
    }

    #[test]
    fn filter_zonal_sum_is_the_filter_polynomial() {
        // u(t) = Σ λ_j Z_j(t) must be proportional to the squared deflated
        // Gegenbauer polynomial; compare ratios at a few points.
        let n = 3;
        let k = 5;
        let f = newman_shapiro_filter(n, k).unwrap();
        let basis = GegenbauerBasis::for_dimension(n).unwrap();
        let u = |t: f64| -> f64 {
            f.coeffs
                .iter()
                .enumerate()
                .map(|(j, l)| l * ZonalKernel::new(n, j).unwrap().eval(t).unwrap())
                .sum()
        };
        let direct = |t: f64| {
            let q = basis.eval(k + 1, t).unwrap() / (t - f.largest_root);
            q * q
        };
        let ratio = u(0.1) / direct(0.1);
        for t in [-0.9, -0.3, 0.45, 0.77] {
            assert!((u(t) / direct(t) - ratio).abs() < 1e-9 * ratio.abs());
        }
        // Normalization: ∫ u(⟨x,y⟩) dμ(y) = λ_0 = 1 means u integrates to 1.
        let rule = sphere_rule(3, 2 * k).unwrap();
        let integral = rule.integrate(|y| u(y[2]));
        assert!((integral - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mollified_ball_is_constant() {
        let rule = sphere_rule(3, 12).unwrap();
        let one = FnOnSphere::new(3, |_: &[f64]| 1.0);
        let e = mollified_approx(&one, 6, 12, &rule).unwrap();
        assert!(sampled_sup_error(&e, &one, 2_000, 4) < 1e-9);
        let (min, _) = nonnegativity_probe(&e, 2_000, 4);
        assert!((min - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coordinate_is_an_eigenfunction() {
        let k = 6;
        let rule = sphere_rule(3, 2 * k).unwrap();
        let f = FnOnSphere::new(3, |x: &[f64]| x[2]);
        let e = mollified_approx(&f, k, 2 * k, &rule).unwrap();
        let lambda1 = newman_shapiro_filter(3, k).unwrap().coeffs[1];
        let scaled = FnOnSphere::new(3, move |x: &[f64]| lambda1 * x[2]);
        assert!(sampled_sup_error(&e, &scaled, 2_000, 5) < 1e-10);
        let g = e.eval_gradient(&[1.0, 0.0, 0.0]).unwrap();
        assert!(g[0].abs() < 1e-10 && g[1].abs() < 1e-10 && (g[2] - lambda1).abs() < 1e-10);
        // Sign-changing input: the probe reports the negative part.
        assert!(nonnegativity_probe(&e, 1_000, 5).0 < 0.0);
    }

    #[test]
    fn insufficient_rule_for_mollifier() {
        let rule = sphere_rule(3, 10).unwrap();
        let one = FnOnSphere::new(3, |_: &[f64]| 1.0);
        assert!(mollified_approx(&one, 6, 12, &rule).is_err());
    }

    #[test]
    fn zero_and_constant_expansions() {
        let rule = sphere_rule(3, 3).unwrap();
        let zero = HarmonicExpansion::from_rule_values(&rule, vec![], &vec![1.0; rule.len()]).unwrap();
        assert_eq!(zero.eval(&[0.0, 1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(zero.max_degree(), 0);
        let one = FnOnSphere::new(3, |_: &[f64]| 2.5);
        let c = harmonic_component(&one, 0, &rule).unwrap();
        let g = c.eval_gradient(&[0.6, 0.0, 0.8]).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn two_evaluation_paths_agree() {
        let rule = sphere_rule(3, 10).unwrap();
        let f = FnOnSphere::new(3, |x: &[f64]| (3.0 * x[0]).sin() + x[1] * x[2] + 2.0);
        let e = mollified_approx(&f, 5, 10, &rule).unwrap();
        assert_eq!(e.max_degree(), 10);
        for x in random_points(3, 50, 6) {
            let a = e.eval(&x).unwrap();
            let b = e.eval_by_components(&x).unwrap();
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let rule = sphere_rule(4, 8).unwrap();
        let f = FnOnSphere::new(4, |x: &[f64]| (x[0] - 0.3 * x[3]).exp() + x[1] * x[1]);
        let e = mollified_approx(&f, 4, 8, &rule).unwrap();
        let h = 1e-5;
        for x in random_points(4, 10, 8) {
            let g = e.eval_gradient(&x).unwrap();
            // Finite differences along geodesics in coordinate-tangent directions.
            for axis in 0..4 {
                let mut v: Vec<f64> = (0..4).map(|i| if i == axis { 1.0 } else { 0.0 }).collect();
                let r = dot(&v, &x);
                for (vc, xc) in v.iter_mut().zip(&x) {
                    *vc -= r * xc;
                }
                let along = |s: f64| {
                    let p: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + s * b).collect();
                    e.eval_unit(&normalized(&p).unwrap())
                };
                let fd = (along(h) - along(-h)) / (2.0 * h);
                let an = dot(&g, &v);
                assert!((fd - an).abs() < 1e-5 * an.abs().max(1.0), "{fd} vs {an}");
            }
        }
    }

    #[test]
    fn eval_rejects_bad_points() {
        let rule = sphere_rule(3, 1).unwrap();
        let one = FnOnSphere::new(3, |_: &[f64]| 1.0);
        let e = harmonic_component(&one, 0, &rule).unwrap();
        assert!(e.eval(&[1.0, 0.0]).is_err());
        assert!(e.eval(&[2.0, 0.0, 0.0]).is_err());
        assert!(e.eval(&[1.0 + 1e-10, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn json_round_trip_is_bit_identical() {
        let rule = sphere_rule(3, 6).unwrap();
        let f = FnOnSphere::new(3, |x: &[f64]| 1.0 + 0.3 * x[0] * x[1]);
        let e = mollified_approx(&f, 3, 6, &rule).unwrap();
        let back = HarmonicExpansion::from_json(&e.to_json().unwrap()).unwrap();
        for x in random_points(3, 100, 9) {
            assert_eq!(e.eval_unit(&x).to_bits(), back.eval_unit(&x).to_bits());
        }
    }
}
