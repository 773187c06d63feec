//! Marčenko–Pastur machinery for a discrete population spectrum `H` and
//! concentration `y = p/n`.
//!
//! Conventions: `m_F` is the Stieltjes transform of the limiting sample
//! spectral distribution `F` and `m` (the companion transform) is that of
//! `F̲ = (1 - y) δ_0 + y F`, related by `m = (y - 1)/z + y m_F`. The companion
//! transform inverts explicitly:
//! `z = -1/m + y Σ_k w_k τ_k / (1 + τ_k m)`.

mod law;
mod quest;
mod stieltjes;

pub use law::{forward_esd, MpLaw, QuantilePoint, SupportInterval};
pub use quest::{quest_invert, QuestFit, QuestOptions, QuestSolver};
pub use stieltjes::{
    companion_stieltjes, generalized_stieltjes, m_breve, stieltjes, stieltjes_residual, theta_limit,
    theta_limit_as_printed,
};

use crate::error::{Error, Result};

pub type Complex = num_complex::Complex64;

/// Weighted atoms with ascending locations and weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpectrum {
    locations: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteSpectrum {
    /// Sorts, merges equal locations, drops zero weights and normalizes.
    pub fn new(locations: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if locations.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: locations.len(),
                actual: weights.len(),
            });
        }
        if locations.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
            return Err(Error::InvalidParameter(
                "atom locations must be finite and nonnegative".into(),
            ));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "atom weights must be finite and nonnegative".into(),
            ));
        }
        let mut pairs: Vec<(f64, f64)> = locations.into_iter().zip(weights).filter(|&(_, w)| w > 0.0).collect();
        if pairs.is_empty() {
            return Err(Error::InvalidParameter("spectrum has no mass".into()));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut locations = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (t, w) in pairs {
            if locations.last() == Some(&t) {
                *weights.last_mut().expect("nonempty") += w;
            } else {
                locations.push(t);
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self { locations, weights })
    }

    pub fn point_mass(location: f64) -> Self {
        Self {
            locations: vec![location],
            weights: vec![1.0],
        }
    }

    /// Equal-weight atoms at the given values (an ESD).
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        let w = vec![1.0; values.len()];
        Self::new(values.to_vec(), w)
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.locations.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.atoms().map(|(t, w)| t * w).sum()
    }

    /// Right-continuous CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.locations.partition_point(|&t| t <= x);
        self.weights[..k].iter().sum()
    }

    /// `inf { x : F(x) >= u }`.
    pub fn quantile(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for (t, w) in self.atoms() {
            acc += w;
            if acc >= u - 1e-12 {
                return t;
            }
        }
        *self.locations.last().expect("nonempty")
    }

    /// Quantiles at `(i - 1/2)/p`, `i = 1..p`, ascending.
    pub fn midpoint_quantiles(&self, p: usize) -> Vec<f64> {
        (0..p).map(|i| self.quantile((i as f64 + 0.5) / p as f64)).collect()
    }

    /// 1-Wasserstein distance `∫ |F - G|`.
    pub fn wasserstein1(&self, other: &DiscreteSpectrum) -> f64 {
        let mut pts: Vec<f64> = self.locations.iter().chain(other.locations.iter()).copied().collect();
        pts.sort_by(f64::total_cmp);
        pts.windows(2)
            .map(|w| (self.cdf(w[0]) - other.cdf(w[0])).abs() * (w[1] - w[0]))
            .sum()
    }
}

/// Concentration ratio paired with a population spectrum.
#[derive(Debug, Clone)]
pub struct MpModel {
    pub y: f64,
    pub h: DiscreteSpectrum,
}

impl MpModel {
    pub fn new(y: f64, h: DiscreteSpectrum) -> Result<Self> {
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "concentration must be positive, got {y}"
            )));
        }
        if h.locations.iter().all(|&t| t == 0.0) {
            return Err(Error::InvalidParameter(
                "population spectrum is a point mass at zero".into(),
            ));
        }
        Ok(Self { y, h })
    }

    /// `z(m) = -1/m + y Σ w τ / (1 + τ m)` and its derivative in `m`.
    pub(crate) fn companion_inverse(&self, m: Complex) -> (Complex, Complex) {
        let mut s = Complex::new(0.0, 0.0);
        let mut ds = Complex::new(0.0, 0.0);
        for (t, w) in self.h.atoms() {
            let q = (Complex::new(1.0, 0.0) + m * t).inv();
            s += q * (w * t);
            ds += q * q * (w * t * t);
        }
        let inv = m.inv();
        (-inv + s * self.y, inv * inv - ds * self.y)
    }

    /// Rough upper bound on the support of `F`.
    pub fn scale(&self) -> f64 {
        let top = self.h.locations.last().copied().unwrap_or(1.0);
        top * (1.0 + self.y.sqrt()).powi(2)
    }
}
