//! Gegenbauer (ultraspherical) polynomials C_j^(α) and the zonal kernels
//! they induce on S^{n-1}, with α = (n - 2) / 2.

use statrs::function::gamma::ln_gamma;

use crate::eigen::symmetric_tridiagonal;
use crate::quadrature::sphere_area;
use crate::{Error, Result};

/// Slack allowed on |t| <= 1 before an argument is rejected.
const DOMAIN_TOL: f64 = 1e-12;

/// The family C_j^(α), j = 0, 1, 2, ... for a fixed α > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GegenbauerBasis {
    alpha: f64,
}

impl GegenbauerBasis {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain(
                "GegenbauerBasis::new",
                format!("alpha must be positive, got {alpha}"),
            ));
        }
        Ok(GegenbauerBasis { alpha })
    }

    /// Basis attached to the sphere S^{n-1}; requires n >= 3.
    pub fn for_dimension(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain(
                "GegenbauerBasis::for_dimension",
                format!("ambient dimension must be at least 3, got {n}"),
            ));
        }
        Self::new((n as f64 - 2.0) / 2.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// C_j^(α)(t) by the forward three-term recurrence.
    pub fn eval(&self, j: usize, t: f64) -> Result<f64> {
        check_domain("eval_gegenbauer", t)?;
        Ok(self.eval_unchecked(j, t))
    }

    pub(crate) fn eval_unchecked(&self, j: usize, t: f64) -> f64 {
        let a = self.alpha;
        if j == 0 {
            return 1.0;
        }
        let mut prev = 1.0;
        let mut cur = 2.0 * a * t;
        for i in 2..=j {
            let fi = i as f64;
            let next = (2.0 * t * (fi + a - 1.0) * cur - (fi + 2.0 * a - 2.0) * prev) / fi;
            prev = cur;
            cur = next;
        }
        cur
    }

    /// Writes C_0(t), ..., C_{out.len()-1}(t) into `out`.
    pub(crate) fn eval_all(&self, t: f64, out: &mut [f64]) {
        let a = self.alpha;
        if out.is_empty() {
            return;
        }
        out[0] = 1.0;
        if out.len() > 1 {
            out[1] = 2.0 * a * t;
        }
        for i in 2..out.len() {
            let fi = i as f64;
            out[i] = (2.0 * t * (fi + a - 1.0) * out[i - 1] - (fi + 2.0 * a - 2.0) * out[i - 2]) / fi;
        }
    }

    /// C_j^(α)(1), computed through the same recurrence as [`Self::eval`].
    pub fn value_at_one(&self, j: usize) -> f64 {
        self.eval_unchecked(j, 1.0)
    }

    /// ∫_{-1}^{1} C_j(t)² (1 - t²)^{α - 1/2} dt.
    pub fn norm_sq(&self, j: usize) -> f64 {
        let a = self.alpha;
        let jf = j as f64;
        let log = std::f64::consts::PI.ln() + (1.0 - 2.0 * a) * std::f64::consts::LN_2
            + ln_gamma(jf + 2.0 * a)
            - ln_gamma(jf + 1.0)
            - (jf + a).ln()
            - 2.0 * ln_gamma(a);
        log.exp()
    }

    /// d/dt C_j^(α)(t) = 2α C_{j-1}^(α+1)(t).
    pub fn derivative(&self, j: usize, t: f64) -> Result<f64> {
        check_domain("eval_gegenbauer_derivative", t)?;
        if j == 0 {
            return Ok(0.0);
        }
        let shifted = GegenbauerBasis {
            alpha: self.alpha + 1.0,
        };
        Ok(2.0 * self.alpha * shifted.eval_unchecked(j - 1, t))
    }

    /// Largest root of C_j^(α): the top eigenvalue of the j×j Jacobi matrix.
    pub fn largest_root(&self, j: usize) -> Result<f64> {
        Ok(*self.roots(j)?.last().expect("j >= 1"))
    }

    /// All roots of C_j^(α) in ascending order.
    pub fn roots(&self, j: usize) -> Result<Vec<f64>> {
        if j == 0 {
            return Err(Error::domain("largest_root", "degree must be at least 1"));
        }
        let off = jacobi_offdiagonal(self.alpha, j);
        let eig = symmetric_tridiagonal(&vec![0.0; j], &off)?;
        Ok(eig.values)
    }
}

/// Off-diagonal entries β_1..β_{N-1} of the symmetric Jacobi matrix of the
/// orthonormal Gegenbauer polynomials (the diagonal vanishes).
pub(crate) fn jacobi_offdiagonal(alpha: f64, size: usize) -> Vec<f64> {
    (1..size)
        .map(|j| {
            let jf = j as f64;
            0.5 * (jf * (jf + 2.0 * alpha - 1.0) / ((jf + alpha - 1.0) * (jf + alpha))).sqrt()
        })
        .collect()
}

fn check_domain(op: &'static str, t: f64) -> Result<()> {
    if !(t.abs() <= 1.0 + DOMAIN_TOL) {
        return Err(Error::domain(op, format!("argument {t} outside [-1, 1]")));
    }
    Ok(())
}

/// Upper bound on 1 - λ_{k+1}, the gap between 1 and the largest root of
/// C_{k+1}^(α) (Driver–Jordaan).
pub fn largest_root_gap_bound(alpha: f64, k: usize) -> f64 {
    let kf = k as f64;
    let num = (2.0 * alpha + 1.0) * (2.0 * alpha + 5.0);
    num / (4.0 * kf * (kf + 2.0 * alpha + 2.0) + num)
}

fn binomial(top: u64, bottom: u64) -> u128 {
    if bottom > top {
        return 0;
    }
    let bottom = bottom.min(top - bottom);
    let mut r: u128 = 1;
    for i in 1..=bottom as u128 {
        r = r * (top as u128 - bottom as u128 + i) / i;
    }
    r
}

/// Dimension of the space H_d of degree-d spherical harmonics on S^{n-1}.
pub fn harmonic_dim(n: usize, d: usize) -> u128 {
    assert!(n >= 2, "harmonic_dim needs n >= 2");
    let first = binomial((n + d - 2) as u64, d as u64);
    let second = if d == 0 || n + d < 3 {
        0
    } else {
        binomial((n + d - 3) as u64, (d - 1) as u64)
    };
    first + second
}

/// Legendre polynomial at the origin: 0 for odd j, (-1)^{j/2} (j-1)!!/j!! otherwise.
pub fn legendre_at_zero(j: usize) -> f64 {
    if j % 2 == 1 {
        return 0.0;
    }
    let mut v = 1.0;
    let mut i = 2;
    while i <= j {
        v *= -((i - 1) as f64) / i as f64;
        i += 2;
    }
    v
}

/// Normalized reproducing kernel of H_d:
/// Z_d(t) = dim(H_d) / (μ(S^{n-1}) C_d(1)) · C_d(t).
#[derive(Debug, Clone, Copy)]
pub struct ZonalKernel {
    n: usize,
    d: usize,
    basis: GegenbauerBasis,
    norm_factor: f64,
}

impl ZonalKernel {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        let basis = GegenbauerBasis::for_dimension(n)?;
        let norm_factor =
            harmonic_dim(n, d) as f64 / (sphere_area(n) * basis.value_at_one(d));
        Ok(ZonalKernel {
            n,
            d,
            basis,
            norm_factor,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn norm_factor(&self) -> f64 {
        self.norm_factor
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.norm_factor * self.basis.eval(self.d, t)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    fn legendre() -> GegenbauerBasis {
        GegenbauerBasis::new(0.5).unwrap()
    }

    #[test]
    fn recurrence_base_cases() {
        let b = legendre();
        assert_eq!(b.eval(0, 0.3).unwrap(), 1.0);
        assert_eq!(b.eval(1, 1.0).unwrap(), 1.0);
        assert!((b.eval(2, 0.0).unwrap() + 0.5).abs() < 1e-15);
        let b2 = GegenbauerBasis::new(1.7).unwrap();
        assert!((b2.eval(1, 0.4).unwrap() - 2.0 * 1.7 * 0.4).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(legendre().eval(3, 1.0 + 1e-6).is_err());
        assert!(legendre().eval(3, 1.0 + 1e-13).is_ok());
        assert!(GegenbauerBasis::new(0.0).is_err());
        assert!(GegenbauerBasis::for_dimension(2).is_err());
        assert!(legendre().largest_root(0).is_err());
    }

    #[test]
    fn legendre_norms() {
        let b = legendre();
        assert!((b.norm_sq(0) - 2.0).abs() < 1e-13);
        assert!((b.norm_sq(1) - 2.0 / 3.0).abs() < 1e-13);
        assert!((b.norm_sq(2) - 0.4).abs() < 1e-13);
        // Large degrees stay finite thanks to log-gamma.
        let big = GegenbauerBasis::new(3.0).unwrap().norm_sq(400);
        assert!(big.is_finite() && big > 0.0);
    }

    #[test]
    fn largest_roots() {
        let b = legendre();
        assert!(b.largest_root(1).unwrap().abs() < 1e-15);
        assert!((b.largest_root(2).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-10);
        let k = 15;
        let gap = 1.0 - b.largest_root(k + 1).unwrap();
        assert!(gap < largest_root_gap_bound(0.5, k));
    }

    #[test]
    fn harmonic_dimensions() {
        assert_eq!(harmonic_dim(3, 0), 1);
        assert_eq!(harmonic_dim(3, 2), 5);
        assert_eq!(harmonic_dim(4, 2), 9);
        assert_eq!(harmonic_dim(2, 0), 1);
        assert_eq!(harmonic_dim(2, 5), 2);
        for d in 0..30 {
            assert_eq!(harmonic_dim(3, d), 2 * d as u128 + 1);
        }
    }

    #[test]
    fn zonal_values() {
        let z0 = ZonalKernel::new(3, 0).unwrap();
        assert!((z0.eval(0.7).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        let z1 = ZonalKernel::new(3, 1).unwrap();
        assert!((z1.eval(1.0).unwrap() - 3.0 / (4.0 * PI)).abs() < 1e-15);
        let z2 = ZonalKernel::new(3, 2).unwrap();
        assert!((z2.eval(0.0).unwrap() + 5.0 / (4.0 * PI) * 0.5).abs() < 1e-15);
        for d in 0..20 {
            let z = ZonalKernel::new(4, d).unwrap();
            let expected = harmonic_dim(4, d) as f64 / sphere_area(4);
            assert!((z.eval(1.0).unwrap() - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn legendre_at_origin() {
        assert_eq!(legendre_at_zero(0), 1.0);
        assert_eq!(legendre_at_zero(3), 0.0);
        assert_eq!(legendre_at_zero(2), -0.5);
        assert_eq!(legendre_at_zero(4), 0.375);
        let b = legendre();
        for j in 0..40 {
            assert!((legendre_at_zero(j) - b.eval(j, 0.0).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_values() {
        let b = legendre();
        assert!((b.derivative(1, 0.37).unwrap() - 1.0).abs() < 1e-15);
        assert!(b.derivative(2, 0.0).unwrap().abs() < 1e-15);
        assert!((b.derivative(2, 1.0).unwrap() - 3.0).abs() < 1e-14);
        assert_eq!(b.derivative(0, 0.2).unwrap(), 0.0);
    }

    #[test]
    fn eval_all_matches_eval() {
        let b = GegenbauerBasis::new(1.5).unwrap();
        let mut out = vec![0.0; 25];
        b.eval_all(-0.31, &mut out);
        for (j, v) in out.iter().enumerate() {
            assert_eq!(*v, b.eval(j, -0.31).unwrap());
        }
    }
}
