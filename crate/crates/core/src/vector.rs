//! Dense real vectors, tolerances and seeded sampling.
//!
//! Everything else in the crate is built on [`Vector`]. Values are immutable
//! after construction; arithmetic returns fresh vectors.

use std::ops::{Add, Index, Mul, Neg, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of finite-dimensional real space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Builds a vector, rejecting empty input and non-finite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(v) = entries.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("vector entry {v}")));
        }
        Ok(Self(entries))
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    /// Zero vector of dimension `dim` (`dim` must be positive).
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        Self(vec![0.0; dim])
    }

    /// Internal constructor for results of arithmetic on validated vectors.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn ensure_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found: self.dim() })
        }
    }

    /// Inner product; errors on dimension mismatch.
    pub fn inner(&self, other: &Vector) -> Result<f64> {
        other.ensure_dim(self.dim())?;
        Ok(self.dot(other))
    }

    pub(crate) fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// `‖self − other‖`, computed without allocating.
    pub fn distance(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `self + scale * dir`.
    pub fn axpy(&self, scale: f64, dir: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), dir.dim());
        Vector(self.0.iter().zip(&dir.0).map(|(a, d)| a + scale * d).collect())
    }

    /// `‖self‖₁`
    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|a| a.abs()).sum()
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &Vector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Vector::new(value)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;

    fn add(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;

    fn sub(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;

    fn mul(self, rhs: &Vector) -> Vector {
        Vector(rhs.0.iter().map(|a| self * a).collect())
    }
}

impl Neg for &Vector {
    type Output = Vector;

    fn neg(self) -> Vector {
        Vector(self.0.iter().map(|a| -a).collect())
    }
}

/// Inner product of two vectors of equal dimension.
pub fn inner(x: &Vector, y: &Vector) -> Result<f64> {
    x.inner(y)
}

pub fn norm(x: &Vector) -> f64 {
    x.norm()
}

/// `min_{y ∈ sample} ‖x − y‖`; the discretized distance used by grid oracles.
pub fn dist_to_point_set(x: &Vector, sample: &[Vector]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut best = f64::INFINITY;
    for y in sample {
        y.ensure_dim(x.dim())?;
        best = best.min(x.distance(y));
    }
    Ok(best)
}

/// Numerical tolerance policy shared by iterations and monitors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Exact-identity checks.
    pub eq_tol: f64,
    /// Convergence detection.
    pub conv_tol: f64,
    /// Permitted negative slack in inequality monitors.
    pub slack_tol: f64,
    /// Threshold for the `0 ∈ ∂φ` branch.
    pub subgrad_zero_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { eq_tol: 1e-10, conv_tol: 1e-8, slack_tol: 1e-12, subgrad_zero_tol: 1e-12 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.eq_tol, self.conv_tol, self.slack_tol, self.subgrad_zero_tol];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidTolerances("all tolerances must be positive".into()));
        }
        if !(self.slack_tol <= self.eq_tol && self.eq_tol <= self.conv_tol) {
            return Err(Error::InvalidTolerances(
                "require slack_tol <= eq_tol <= conv_tol".into(),
            ));
        }
        Ok(())
    }

    /// Copy with a new `conv_tol`, lowering `eq_tol`/`slack_tol` if needed to keep the ordering.
    pub fn with_conv_tol(mut self, conv_tol: f64) -> Self {
        self.conv_tol = conv_tol;
        self.eq_tol = self.eq_tol.min(conv_tol);
        self.slack_tol = self.slack_tol.min(self.eq_tol);
        self
    }
}

/// Seeded box sampler used by the operator verifiers.
///
/// Points are drawn uniformly from `center ± half_width` in every coordinate
/// (the origin when `center` is `None`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub seed: u64,
    pub count: usize,
    pub half_width: f64,
    #[serde(default)]
    pub center: Option<Vector>,
}

impl SampleSpec {
    pub fn new(seed: u64, count: usize) -> Self {
        Self { seed, count, half_width: 5.0, center: None }
    }

    pub fn with_half_width(mut self, half_width: f64) -> Self {
        self.half_width = half_width;
        self
    }

    pub fn with_center(mut self, center: Vector) -> Self {
        self.center = Some(center);
        self
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Draws `count` points of dimension `dim`.
    pub fn points(&self, dim: usize) -> Result<Vec<Vector>> {
        let mut rng = self.rng();
        (0..self.count).map(|_| self.draw(&mut rng, dim)).collect()
    }

    /// Draws `count` pairs of points of dimension `dim`.
    pub fn pairs(&self, dim: usize) -> Result<Vec<(Vector, Vector)>> {
        let mut rng = self.rng();
        (0..self.count)
            .map(|_| Ok((self.draw(&mut rng, dim)?, self.draw(&mut rng, dim)?)))
            .collect()
    }

    fn draw(&self, rng: &mut ChaCha8Rng, dim: usize) -> Result<Vector> {
        if let Some(c) = &self.center {
            c.ensure_dim(dim)?;
        }
        let w = self.half_width;
        let entries = (0..dim)
            .map(|i| {
                let c = self.center.as_ref().map_or(0.0, |c| c[i]);
                c + rng.random_range(-w..=w)
            })
            .collect();
        Ok(Vector(entries))
    }
}

/// Uniformly distributed unit vector (normalized Gaussian sample).
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vector {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-300 {
            return Vector(g.into_iter().map(|a| a / n).collect());
        }
    }
}
