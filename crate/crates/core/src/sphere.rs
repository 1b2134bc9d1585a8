//! Points on the unit sphere and deterministic sampling patterns.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Tolerance on |x| beyond which an input is rejected instead of renormalized.
const UNIT_TOL: f64 = 1e-9;

/// A unit vector in R^n.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(Vec<f64>);

impl SpherePoint {
    /// Normalizes `coords`; fails on the zero vector or non-finite input.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let norm = norm(&coords);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::domain(
                "SpherePoint::new",
                format!("cannot normalize {coords:?}"),
            ));
        }
        Ok(SpherePoint(coords.into_iter().map(|c| c / norm).collect()))
    }

    /// Accepts a vector already of unit norm (within 1e-9) and renormalizes it.
    pub fn from_unit(coords: Vec<f64>) -> Result<Self> {
        let norm = norm(&coords);
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::domain(
                "SpherePoint::from_unit",
                format!("vector has norm {norm}, expected 1"),
            ));
        }
        Self::new(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn antipode(&self) -> SpherePoint {
        SpherePoint(self.0.iter().map(|c| -c).collect())
    }
}

impl AsRef<[f64]> for SpherePoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Returns `x / |x|`, or `None` for the zero vector.
pub fn normalized(x: &[f64]) -> Option<Vec<f64>> {
    let n = norm(x);
    if n > 0.0 && n.is_finite() {
        Some(x.iter().map(|c| c / n).collect())
    } else {
        None
    }
}

/// Angle in radians between two nonzero vectors.
pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let c = dot(a, b) / (norm(a) * norm(b));
    c.clamp(-1.0, 1.0).acos()
}

/// Fibonacci lattice of `count` nearly uniform points on S².
pub fn fibonacci_lattice(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (1.0 + 5f64.sqrt());
    (0..count)
        .map(|i| {
            let s = i as f64 + 0.5;
            let z = 1.0 - 2.0 * s / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * s;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// `count` independent uniform points on S^{n-1}.
pub fn random_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Some(u) = normalized(&v) {
            out.push(u);
        }
    }
    out
}

/// Quasi-uniform probe set used for sup-norm estimates: on S² half of the
/// points come from a Fibonacci lattice and half from a seeded generator;
/// in other dimensions all points are seeded random.
pub fn sample_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    if n == 3 {
        let lattice = count / 2;
        let mut pts: Vec<Vec<f64>> = fibonacci_lattice(lattice)
            .into_iter()
            .map(|p| p.to_vec())
            .collect();
        pts.extend(random_points(3, count - lattice, seed));
        pts
    } else {
        random_points(n, count, seed)
    }
}

/// Uniformly random rotation of R³ drawn from `seed` (quaternion method).
pub fn random_rotation(seed: u64) -> [[f64; 3]; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q: Vec<f64> = loop {
        let v: Vec<f64> = (0..4).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Some(u) = normalized(&v) {
            break u;
        }
    };
    let (w, x, y, z) = (q[0], q[1], q[2], q[3]);
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

pub fn rotate(r: &[[f64; 3]; 3], p: &[f64; 3]) -> [f64; 3] {
    [
        r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2],
        r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2],
        r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2],
    ]
}
