//! Polynomial approximation of intersection bodies in R³.
//!
//! The radial function of IL at x is the area of L ∩ x^⊥, the spherical
//! Radon transform of ½ρ_L². On S² the transform acts on degree-j
//! harmonics by the factor 2π·P_j(0), so it can be applied directly to a
//! mollified expansion of ½ρ_L².

use std::f64::consts::TAU;

use crate::bodies::{BodyKind, StarBody};
use crate::gegenbauer::legendre_at_zero;
use crate::harmonics::{
    newman_shapiro_filter, required_rule_degree, DegreeCoeff, HarmonicExpansion,
};
use crate::quadrature::SphereRule;
use crate::{Error, Result};

/// Funk–Hecke multipliers c_j = P_j(0) of the Radon transform on S².
#[derive(Debug, Clone, PartialEq)]
pub struct RadonMultipliers {
    pub values: Vec<f64>,
}

pub fn radon_multipliers(d: usize) -> RadonMultipliers {
    RadonMultipliers {
        values: (0..=d).map(legendre_at_zero).collect(),
    }
}

/// Mollified degree-2k approximation of the radial function of IL.
pub fn intersection_body_approx(
    b: &StarBody,
    k: usize,
    m: usize,
    rule: &SphereRule,
) -> Result<HarmonicExpansion> {
    const OP: &str = "intersection_body_approx";
    if b.dimension() != 3 || rule.dimension() != 3 {
        return Err(Error::domain(
            OP,
            format!(
                "only dimension 3 is supported (body in R^{}, rule on S^{})",
                b.dimension(),
                rule.dimension() - 1
            ),
        ));
    }
    if b.kind() != BodyKind::Radial {
        return Err(Error::domain(OP, "a radial function is required"));
    }
    let needed = required_rule_degree(k, m);
    if rule.exact_degree() < needed {
        return Err(Error::domain(
            OP,
            format!(
                "rule exact in degree {} but degree {needed} is required",
                rule.exact_degree()
            ),
        ));
    }
    let filter = newman_shapiro_filter(3, k)?;
    let radon = radon_multipliers(2 * k);
    let degrees = filter
        .coeffs
        .iter()
        .zip(&radon.values)
        .enumerate()
        .filter(|(j, _)| j % 2 == 0)
        .map(|(j, (lambda, c))| DegreeCoeff {
            j,
            coeff: TAU * c * lambda,
        })
        .collect();
    let mut values = Vec::with_capacity(rule.len());
    for z in rule.nodes() {
        let r = b.eval_unit(z);
        if !r.is_finite() {
            return Err(Error::numeric(
                OP,
                format!("radial function is not finite at node {z:?}"),
            ));
        }
        values.push(0.5 * r * r);
    }
    HarmonicExpansion::from_rule_values(rule, degrees, &values)
}
