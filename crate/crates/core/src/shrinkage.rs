//! Nonlinear shrinkage of sample eigenvalues toward the oracle values
//! `d = λ / |1 - y - y λ m̆_F(λ)|²` under an estimated population spectrum.

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, Matrix, SymMatrix, Vector};
use crate::mplaw::{quest_invert, DiscreteSpectrum, MpLaw, MpModel, QuestFit, QuestOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationRule {
    /// Cap every eigenvalue at this value.
    Explicit(f64),
    /// `L = 10 · mean(eigs) · (1 + √y)²`.
    Auto,
}

impl TruncationRule {
    pub fn cap(&self, eigs: &[f64], y: f64) -> Result<f64> {
        match *self {
            TruncationRule::Explicit(l) if l > 0.0 && l.is_finite() => Ok(l),
            TruncationRule::Explicit(l) => Err(Error::InvalidParameter(format!(
                "truncation cap must be positive, got {l}"
            ))),
            TruncationRule::Auto => {
                let mean = eigs.iter().sum::<f64>() / eigs.len().max(1) as f64;
                Ok(10.0 * mean * (1.0 + y.sqrt()).powi(2))
            }
        }
    }
}

/// Caps eigenvalues at `L`; returns the capped values and how many changed.
pub fn truncate_eigs(eigs: &[f64], rule: TruncationRule, y: f64) -> Result<(Vec<f64>, usize)> {
    let cap = rule.cap(eigs, y)?;
    let count = eigs.iter().filter(|&&l| l > cap).count();
    Ok((eigs.iter().map(|&l| l.min(cap)).collect(), count))
}

#[derive(Debug, Clone)]
pub struct ShrinkageResult {
    /// `d_i`, aligned with the eigenvector columns (descending sample order).
    pub shrunk: Vec<f64>,
    pub eigenvectors: Matrix,
    pub estimate: SymMatrix,
    pub truncation_count: usize,
}

#[derive(Debug, Clone)]
pub struct NlsEstimate {
    pub shrinkage: ShrinkageResult,
    /// `Ĥ` as `p` atoms at its quantiles `(i - 1/2)/p`.
    pub spectrum: DiscreteSpectrum,
    pub fit: QuestFit,
}

/// Oracle shrinkage evaluator for one limiting law.
#[derive(Debug, Clone)]
pub struct OracleShrinker {
    law: MpLaw,
}

impl OracleShrinker {
    pub fn new(model: &MpModel) -> Result<Self> {
        Ok(Self {
            law: MpLaw::new(model)?,
        })
    }

    pub fn law(&self) -> &MpLaw {
        &self.law
    }

    /// `d(λ)`. At `λ = 0` with `y > 1` this is `1/((y - 1) m(0))` with `m`
    /// the companion transform; with `y <= 1` it is the limit `0`.
    pub fn d(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eigenvalue must be nonnegative, got {lambda}"
            )));
        }
        let y = self.law.model().y;
        if lambda == 0.0 {
            if y <= 1.0 {
                return Ok(0.0);
            }
            let m0 = self.law.companion_boundary(0.0)?;
            return Ok(1.0 / ((y - 1.0) * m0.re));
        }
        // 1 - y - y λ m_F = -λ m, so the oracle is 1/(λ |m|²)
        let m = self.law.companion_boundary(lambda)?;
        Ok(1.0 / (lambda * m.norm_sqr()))
    }
}

/// `d(λ)` for a single eigenvalue; builds the limiting law on every call.
pub fn oracle_d(lambda: f64, model: &MpModel) -> Result<f64> {
    OracleShrinker::new(model)?.d(lambda)
}

/// Truncate, invert for `Ĥ`, and replace each eigenvalue by its oracle value.
pub fn nls_estimate(s: &SymMatrix, y: f64, rule: TruncationRule, opts: &QuestOptions) -> Result<NlsEstimate> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "concentration must be positive, got {y}"
        )));
    }
    let decomp = eig_sym(s)?;
    let p = decomp.dim();
    let raw: Vec<f64> = decomp.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let (eigs, truncation_count) = truncate_eigs(&raw, rule, y)?;
    let fit = quest_invert(&eigs, y, opts)?;
    let shrinker = OracleShrinker::new(&MpModel::new(y, fit.spectrum.clone())?)?;
    let zero_cut = 1e-12 * eigs[0];
    let shrunk = eigs
        .iter()
        .map(|&l| {
            let l = if y > 1.0 && l < zero_cut { 0.0 } else { l };
            shrinker.d(l).map(|d| d.max(0.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    let estimate = SymMatrix::symmetrized(decomp.with_eigenvalues(&Vector::from_column_slice(&shrunk)))?;
    let mut q = fit.spectrum.midpoint_quantiles(p);
    q.reverse();
    Ok(NlsEstimate {
        shrinkage: ShrinkageResult {
            shrunk,
            eigenvectors: decomp.eigenvectors,
            estimate,
            truncation_count,
        },
        spectrum: DiscreteSpectrum::from_samples(&q)?,
        fit,
    })
}

/// Descending population eigenvalue estimates: the `(i - 1/2)/p` quantiles
/// of `Ĥ`.
pub fn spectrum_estimate(s: &SymMatrix, y: f64, rule: TruncationRule, opts: &QuestOptions) -> Result<Vec<f64>> {
    let decomp = eig_sym(s)?;
    let raw: Vec<f64> = decomp.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let (eigs, _) = truncate_eigs(&raw, rule, y)?;
    let fit = quest_invert(&eigs, y, opts)?;
    let mut q = fit.spectrum.midpoint_quantiles(decomp.dim());
    q.reverse();
    Ok(q)
}
