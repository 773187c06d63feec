//! Time-variation adjustment of BEKK returns.
//!
//! Each return is rescaled by `P_t^{-1/2}`, where
//! `P_t = c I + Σ_{j=1..M} â b̂^{j-1} R_{t-j} R_{t-j}ᵀ` and
//! `c = (1 - â - b̂ + â b̂^M) / (1 - b̂)`. The inverse square root is formed
//! from the `M x M` Gram matrix of the scaled lags.

use rayon::prelude::*;

use crate::bekk::{check_stationary, ReturnsPanel};
use crate::error::{Error, Result};
use crate::linalg::{lowrank_inv_sqrt, LowRankInvSqrt, Matrix, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvAdjustConfig {
    pub m_p: usize,
    pub a_hat: f64,
    pub b_hat: f64,
}

impl TvAdjustConfig {
    pub fn new(m_p: usize, a_hat: f64, b_hat: f64) -> Result<Self> {
        if m_p == 0 {
            return Err(Error::InvalidParameter("number of lags must be positive".into()));
        }
        check_stationary(a_hat, b_hat)?;
        Ok(Self { m_p, a_hat, b_hat })
    }

    /// Identity coefficient `c` of `P_t`.
    pub fn base_scale(&self) -> f64 {
        let (a, b) = (self.a_hat, self.b_hat);
        (1.0 - a - b + a * b.powi(self.m_p as i32)) / (1.0 - b)
    }
}

#[derive(Debug, Clone)]
pub struct TvAdjPanel {
    /// `p x (n - dropped_prefix)`.
    pub adjusted: Matrix,
    /// `(1/n_eff) Σ R̃_t R̃_tᵀ`.
    pub covariance: SymMatrix,
    /// Leading panel columns used only as lags.
    pub dropped_prefix: usize,
}

impl TvAdjPanel {
    pub fn effective_n(&self) -> usize {
        self.adjusted.ncols()
    }
}

/// Number of lags: `ceil(2 p^0.4)` limited to `[2, floor(sqrt p) - 1]`.
pub fn default_mp(p: usize) -> usize {
    let raw = (2.0 * (p as f64).powf(0.4)).ceil() as usize;
    let upper = ((p as f64).sqrt().floor() as usize).saturating_sub(1);
    raw.min(upper).max(2)
}

/// `B` with columns `sqrt(â b̂^{j-1}) R_{t-j}`, `j = 1..M`.
fn lag_matrix(panel: &ReturnsPanel, t: usize, cfg: &TvAdjustConfig) -> Result<Matrix> {
    let p = panel.p();
    let mut b = Matrix::zeros(p, cfg.m_p);
    let mut weight = cfg.a_hat;
    for j in 1..=cfg.m_p {
        let lag = panel
            .lagged(t as isize - j as isize)
            .ok_or_else(|| Error::InvalidParameter(format!("return {t} has no lag {j} (panel starts too late)")))?;
        let s = weight.sqrt();
        for (dst, &src) in b.column_mut(j - 1).iter_mut().zip(lag) {
            *dst = s * src;
        }
        weight *= cfg.b_hat;
    }
    Ok(b)
}

/// Dense `P_t` for checking the factored form.
pub fn projection_matrix(panel: &ReturnsPanel, t: usize, cfg: &TvAdjustConfig) -> Result<SymMatrix> {
    let b = lag_matrix(panel, t, cfg)?;
    let p = panel.p();
    SymMatrix::symmetrized(Matrix::identity(p, p) * cfg.base_scale() + &b * b.transpose())
}

/// `P_t^{-1/2}` for panel column `t` (zero-based; lags may come from the
/// pre-sample block).
pub fn projection_inv_sqrt(panel: &ReturnsPanel, t: usize, cfg: &TvAdjustConfig) -> Result<LowRankInvSqrt> {
    check_stationary(cfg.a_hat, cfg.b_hat)?;
    if cfg.a_hat == 0.0 {
        return lowrank_inv_sqrt(cfg.base_scale(), &Matrix::zeros(panel.p(), 0));
    }
    lowrank_inv_sqrt(cfg.base_scale(), &lag_matrix(panel, t, cfg)?)
}

/// First panel column with all `M` lags available.
pub fn first_adjustable(panel: &ReturnsPanel, m_p: usize) -> usize {
    m_p.saturating_sub(panel.presample.ncols())
}

pub fn tv_adjust(panel: &ReturnsPanel, cfg: &TvAdjustConfig) -> Result<TvAdjPanel> {
    check_stationary(cfg.a_hat, cfg.b_hat)?;
    let first = first_adjustable(panel, cfg.m_p);
    let n_eff = panel.n().saturating_sub(first);
    if n_eff <= 10 {
        return Err(Error::InvalidParameter(format!(
            "panel of {} returns leaves {n_eff} adjusted observations with {} lags",
            panel.n(),
            cfg.m_p
        )));
    }
    let columns: Vec<Vec<f64>> = (first..panel.n())
        .into_par_iter()
        .map(|t| {
            let f = projection_inv_sqrt(panel, t, cfg)?;
            let r = panel.lagged(t as isize).expect("t is inside the panel");
            Ok(f.apply(r)?.as_slice().to_vec())
        })
        .collect::<Result<_>>()?;
    let p = panel.p();
    let mut adjusted = Matrix::zeros(p, n_eff);
    for (k, col) in columns.iter().enumerate() {
        adjusted.column_mut(k).copy_from_slice(col);
    }
    let covariance = SymMatrix::sample_covariance(&adjusted)?;
    Ok(TvAdjPanel {
        adjusted,
        covariance,
        dropped_prefix: first,
    })
}
