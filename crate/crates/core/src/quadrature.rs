//! Gauss–Gegenbauer rules on [-1, 1] and product rules on S^{n-1}.
//!
//! Interval rules come from the Golub–Welsch eigenproblem of the Jacobi
//! matrix. Sphere rules are built recursively: the S¹ rule uses 2(k+1)
//! equispaced nodes, and S^{ℓ-1} is assembled from a Gauss rule for the
//! weight (1 - t²)^{(ℓ-3)/2} and the rule on S^{ℓ-2} through the map
//! (z, y) ↦ (z, √(1 - z²) y). The resulting rule has 2(k+1)^{n-1} nodes and
//! integrates every polynomial of degree ≤ 2k exactly.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::eigen::symmetric_tridiagonal;
use crate::gegenbauer::jacobi_offdiagonal;
use crate::{Error, Result};

const RULE_FORMAT: &str = "polystar-rule-v1";

/// Relative tolerance of the post-construction moment check.
const EXACTNESS_TOL: f64 = 1e-10;

/// Gauss rule on [-1, 1] for the weight ω_α(t) = (1 - t²)^{α - 1/2}.
#[derive(Debug, Clone)]
pub struct IntervalRule {
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

impl IntervalRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// ∫_{-1}^{1} ω_α(t) dt = √π Γ(α + 1/2) / Γ(α + 1).
pub fn gegenbauer_weight_mass(alpha: f64) -> f64 {
    interval_moment(alpha, 0)
}

/// ∫_{-1}^{1} t^p ω_α(t) dt in closed form (Beta function).
pub fn interval_moment(alpha: f64, p: usize) -> f64 {
    if p % 2 == 1 {
        return 0.0;
    }
    let half = p as f64 / 2.0;
    (ln_gamma(half + 0.5) + ln_gamma(alpha + 0.5) - ln_gamma(half + alpha + 1.0)).exp()
}

/// N-point Gauss–Gegenbauer rule, exact in degree 2N - 1.
pub fn gauss_gegenbauer(alpha: f64, count: usize) -> Result<IntervalRule> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(
            "gauss_gegenbauer",
            format!("alpha must be positive, got {alpha}"),
        ));
    }
    if count == 0 {
        return Err(Error::domain("gauss_gegenbauer", "node count must be positive"));
    }
    let off = jacobi_offdiagonal(alpha, count);
    let eig = symmetric_tridiagonal(&vec![0.0; count], &off)?;
    let mass = gegenbauer_weight_mass(alpha);
    let mut nodes = eig.values;
    let mut weights: Vec<f64> = eig.first_components.iter().map(|v| mass * v * v).collect();

    // The weight is even: enforce exact antipodal symmetry of the rule.
    for i in 0..count / 2 {
        let j = count - 1 - i;
        let t = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -t;
        nodes[j] = t;
        weights[i] = w;
        weights[j] = w;
    }
    if count % 2 == 1 {
        nodes[count / 2] = 0.0;
    }

    let rule = IntervalRule {
        alpha,
        nodes,
        weights,
        exact_degree: 2 * count - 1,
    };
    verify_interval_rule(&rule)?;
    Ok(rule)
}

fn verify_interval_rule(rule: &IntervalRule) -> Result<()> {
    if rule.weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::numeric("gauss_gegenbauer", "nonpositive weight"));
    }
    if rule.nodes.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::numeric("gauss_gegenbauer", "nodes not strictly increasing"));
    }
    for p in 0..=rule.exact_degree {
        let exact = interval_moment(rule.alpha, p);
        let approx = rule.integrate(|t| t.powi(p as i32));
        let err = (approx - exact).abs();
        let scale = if exact == 0.0 { 1.0 } else { exact.abs() };
        if err > EXACTNESS_TOL * scale {
            return Err(Error::numeric(
                "gauss_gegenbauer",
                format!("moment t^{p}: rule gives {approx}, exact {exact}"),
            ));
        }
    }
    Ok(())
}

/// μ(S^{n-1}) = 2 π^{n/2} / Γ(n/2).
pub fn sphere_area(n: usize) -> f64 {
    assert!(n >= 1, "sphere_area needs n >= 1");
    let h = n as f64 / 2.0;
    2.0 * (h * std::f64::consts::PI.ln() - ln_gamma(h)).exp()
}

/// Exact ∫_{S^{n-1}} Π x_i^{a_i} dμ.
pub fn moment_oracle(exponents: &[usize]) -> f64 {
    if exponents.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let n = exponents.len();
    let total: usize = exponents.iter().sum();
    let log: f64 = exponents
        .iter()
        .map(|&a| ln_gamma((a as f64 + 1.0) / 2.0))
        .sum::<f64>()
        - ln_gamma((total + n) as f64 / 2.0);
    2.0 * log.exp()
}

/// Product quadrature rule on S^{n-1}, exact in degree 2k.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    n: usize,
    k: usize,
    /// Row-major node coordinates, `n` per node.
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereRule {
    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Parameter k of the construction; the rule is exact in degree 2k.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn exact_degree(&self) -> usize {
        2 * self.k
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.n..(i + 1) * self.n]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.n)
    }

    pub(crate) fn flat_nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes()
            .zip(&self.weights)
            .map(|(x, &w)| w * f(x))
            .sum()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = RuleFile {
            format: RULE_FORMAT.to_string(),
            n: self.n,
            k: self.k,
            nodes: self.nodes().map(|x| x.to_vec()).collect(),
            weights: self.weights.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: RuleFile = serde_json::from_str(text)?;
        if file.format != RULE_FORMAT {
            return Err(Error::Config(format!(
                "unsupported rule format {:?}, expected {RULE_FORMAT:?}",
                file.format
            )));
        }
        let expected = 2 * (file.k + 1).pow(file.n as u32 - 1);
        if file.nodes.len() != file.weights.len()
            || file.nodes.len() != expected
            || file.nodes.iter().any(|x| x.len() != file.n)
        {
            return Err(Error::Config("malformed rule file".to_string()));
        }
        Ok(SphereRule {
            n: file.n,
            k: file.k,
            nodes: file.nodes.into_iter().flatten().collect(),
            weights: file.weights,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RuleFile {
    format: String,
    n: usize,
    k: usize,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// Equispaced rule on S¹: 2(k+1) nodes at angles πi/(k+1), weights π/(k+1).
pub fn circle_rule(k: usize) -> SphereRule {
    let count = 2 * (k + 1);
    let w = std::f64::consts::PI / (k + 1) as f64;
    let mut nodes = Vec::with_capacity(2 * count);
    for i in 0..count {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
        nodes.push(theta.cos());
        nodes.push(theta.sin());
    }
    SphereRule {
        n: 2,
        k,
        nodes,
        weights: vec![w; count],
    }
}

/// Rule on S^{n-1} exact in degree 2k with 2(k+1)^{n-1} nodes.
pub fn sphere_rule(n: usize, k: usize) -> Result<SphereRule> {
    if n < 2 {
        return Err(Error::domain(
            "sphere_rule",
            format!("dimension must be at least 2, got {n}"),
        ));
    }
    let mut rule = circle_rule(k);
    for ell in 3..=n {
        let interval = gauss_gegenbauer((ell as f64 - 2.0) / 2.0, k + 1)?;
        let mut nodes = Vec::with_capacity(ell * interval.len() * rule.len());
        let mut weights = Vec::with_capacity(interval.len() * rule.len());
        for (&z, &wz) in interval.nodes.iter().zip(&interval.weights) {
            let r = (1.0 - z * z).sqrt();
            for (y, &wy) in rule.nodes().zip(&rule.weights) {
                nodes.push(z);
                nodes.extend(y.iter().map(|c| r * c));
                weights.push(wz * wy);
            }
        }
        rule = SphereRule {
            n: ell,
            k,
            nodes,
            weights,
        };
    }
    Ok(rule)
}
