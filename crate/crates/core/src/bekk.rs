//! Scalar-BEKK simulation and closed-form moment oracles.
//!
//! The conditional covariance follows
//! `Σ_{t+1} = (1 - a - b) Σ̄ + a R_t R_tᵀ + b Σ_t`, with `R_t = L_t z_t`,
//! `L_t` the Cholesky factor of `Σ_t` and `z_t` standard Gaussian.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_into, lower_mul_vec, LowerTriangular, Matrix, SymMatrix};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone)]
pub struct BekkParams {
    pub a: f64,
    pub b: f64,
    pub sigma_bar: SymMatrix,
}

impl BekkParams {
    pub fn new(a: f64, b: f64, sigma_bar: SymMatrix) -> Result<Self> {
        check_stationary(a, b)?;
        Ok(Self { a, b, sigma_bar })
    }

    pub fn dim(&self) -> usize {
        self.sigma_bar.dim()
    }
}

pub(crate) fn check_stationary(a: f64, b: f64) -> Result<()> {
    let ok = a.is_finite() && b.is_finite() && (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b) && a + b < 1.0;
    if ok {
        Ok(())
    } else {
        Err(Error::NonStationary { a, b })
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub seed: u64,
    /// Replication index; selects the ChaCha stream.
    pub replication: u64,
    pub burn_in: usize,
    pub n: usize,
    pub emit_paired_iid: bool,
    /// Number of trailing burn-in returns kept as pre-sample lags.
    pub presample: usize,
}

impl SimConfig {
    pub fn new(seed: u64, n: usize) -> Self {
        Self {
            seed,
            replication: 0,
            burn_in: 1000,
            n,
            emit_paired_iid: false,
            presample: 0,
        }
    }
}

/// A `p x n` panel of returns; column `t` is `R_{t+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsPanel {
    pub returns: Matrix,
    /// `Σ̄`-factor times the same innovations, when requested.
    pub paired_iid: Option<Matrix>,
    /// Returns immediately preceding column 0, oldest first.
    pub presample: Matrix,
    pub seed: u64,
    pub replication: u64,
}

impl ReturnsPanel {
    pub fn from_returns(returns: Matrix) -> Result<Self> {
        if let Some(pos) = returns.iter().position(|v| !v.is_finite()) {
            let p = returns.nrows().max(1);
            return Err(Error::NonFinite {
                row: pos % p,
                col: pos / p,
            });
        }
        let p = returns.nrows();
        Ok(Self {
            returns,
            paired_iid: None,
            presample: Matrix::zeros(p, 0),
            seed: 0,
            replication: 0,
        })
    }

    pub fn p(&self) -> usize {
        self.returns.nrows()
    }

    pub fn n(&self) -> usize {
        self.returns.ncols()
    }

    /// Coordinate `i` as a time series.
    pub fn series(&self, i: usize) -> Vec<f64> {
        self.returns.row(i).iter().copied().collect()
    }

    /// Return at position `t` relative to the panel start; negative indices
    /// reach into the pre-sample block.
    pub fn lagged(&self, t: isize) -> Option<&[f64]> {
        let p = self.p();
        if t >= 0 {
            let t = t as usize;
            (t < self.n()).then(|| &self.returns.as_slice()[t * p..(t + 1) * p])
        } else {
            let k = self.presample.ncols() as isize + t;
            (k >= 0).then(|| {
                let k = k as usize;
                &self.presample.as_slice()[k * p..(k + 1) * p]
            })
        }
    }
}

/// Step-by-step BEKK state machine.
pub struct BekkSimulator {
    p: usize,
    a: f64,
    b: f64,
    sigma_bar: Vec<f64>,
    sigma: Vec<f64>,
    factor: Vec<f64>,
    bar_factor: LowerTriangular,
    z: Vec<f64>,
    r: Vec<f64>,
    step: usize,
}

impl BekkSimulator {
    pub fn new(params: &BekkParams) -> Result<Self> {
        let p = params.dim();
        let bar_factor = cholesky(&params.sigma_bar).map_err(|e| Error::SimulationFactorization {
            step: 0,
            source: Box::new(e),
        })?;
        let sigma_bar = params.sigma_bar.as_slice().to_vec();
        Ok(Self {
            p,
            a: params.a,
            b: params.b,
            sigma: sigma_bar.clone(),
            sigma_bar,
            factor: vec![0.0; p * p],
            bar_factor,
            z: vec![0.0; p],
            r: vec![0.0; p],
            step: 0,
        })
    }

    /// Current conditional covariance `Σ_t`, row-major.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn innovations(&self) -> &[f64] {
        &self.z
    }

    pub fn last_return(&self) -> &[f64] {
        &self.r
    }

    /// Draws `z_t`, emits `R_t = L_t z_t` and advances `Σ_t` to `Σ_{t+1}`.
    pub fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<&[f64]> {
        let p = self.p;
        cholesky_into(&self.sigma, p, &mut self.factor).map_err(|e| Error::SimulationFactorization {
            step: self.step,
            source: Box::new(e),
        })?;
        for z in &mut self.z {
            *z = rng.sample(StandardNormal);
        }
        lower_mul_vec(&self.factor, p, &self.z, &mut self.r);
        let (a, b) = (self.a, self.b);
        let c = 1.0 - a - b;
        for i in 0..p {
            let ri = a * self.r[i];
            let row = i * p;
            for j in 0..p {
                let k = row + j;
                self.sigma[k] = c * self.sigma_bar[k] + ri * self.r[j] + b * self.sigma[k];
            }
        }
        self.step += 1;
        Ok(&self.r)
    }

    /// `L̄ z_t` for the innovations of the most recent step.
    pub fn paired_return(&self, out: &mut [f64]) {
        self.bar_factor.mul_vec(&self.z, out);
    }
}

pub fn simulate(params: &BekkParams, cfg: &SimConfig) -> Result<ReturnsPanel> {
    let mut rng = rng::stream(cfg.seed, cfg.replication, Purpose::Innovations);
    simulate_with_rng(params, cfg, &mut rng)
}

pub fn simulate_with_rng<R: Rng + ?Sized>(params: &BekkParams, cfg: &SimConfig, rng: &mut R) -> Result<ReturnsPanel> {
    if cfg.presample > cfg.burn_in {
        return Err(Error::InvalidParameter(format!(
            "pre-sample length {} exceeds burn-in {}",
            cfg.presample, cfg.burn_in
        )));
    }
    let p = params.dim();
    let mut sim = BekkSimulator::new(params)?;
    let mut presample = Matrix::zeros(p, cfg.presample);
    for t in 0..cfg.burn_in {
        let r = sim.advance(rng)?;
        let keep_from = cfg.burn_in - cfg.presample;
        if t >= keep_from {
            presample.column_mut(t - keep_from).copy_from_slice(r);
        }
    }
    let mut returns = Matrix::zeros(p, cfg.n);
    let mut paired = cfg.emit_paired_iid.then(|| Matrix::zeros(p, cfg.n));
    let mut buf = vec![0.0; p];
    for t in 0..cfg.n {
        let r = sim.advance(rng)?;
        returns.column_mut(t).copy_from_slice(r);
        if let Some(m) = paired.as_mut() {
            sim.paired_return(&mut buf);
            m.column_mut(t).copy_from_slice(&buf);
        }
    }
    Ok(ReturnsPanel {
        returns,
        paired_iid: paired,
        presample,
        seed: cfg.seed,
        replication: cfg.replication,
    })
}

/// Reducibility index `(a / (1 - a - b)) * min(sqrt(p (1 - a - b)), 1)`.
pub fn eta(a: f64, b: f64, p: usize) -> Result<f64> {
    if !(a + b < 1.0) || p == 0 {
        return Err(Error::NonStationary { a, b });
    }
    let gap = 1.0 - a - b;
    Ok(a / gap * (p as f64 * gap).sqrt().min(1.0))
}

/// Stationary `E tr(Σ_t²)` of the standardized process (`Σ̄ = I`).
pub fn expected_tr_sigma_sq_identity(a: f64, b: f64, p: usize) -> Result<f64> {
    check_stationary(a, b)?;
    let s2 = (a + b) * (a + b);
    let denom = 1.0 - a * a - s2;
    if !(denom > 0.0) {
        return Err(Error::MomentConditionViolated {
            constant: "1 - a^2 - (a+b)^2",
            value: denom,
        });
    }
    let inv_cp = 1.0 - 2.0 * a.powi(4) / (denom * (1.0 - s2));
    if !(inv_cp > 0.0) {
        return Err(Error::MomentConditionViolated {
            constant: "C_p",
            value: inv_cp,
        });
    }
    let cp = inv_cp.recip();
    let c2 = a * a / denom;
    let p = p as f64;
    // C_p * C_p^(2) * ((1-(a+b)^2)/a^2 * p + p^2), written without the 1/a^2.
    Ok(cp * ((1.0 - s2) / denom * p + c2 * p * p))
}

/// `E[(zᵀ A z)²] = (tr A)² + 2 tr(A²)` for standard Gaussian `z`.
pub fn gaussian_quadratic_second_moment(a: &SymMatrix) -> f64 {
    let tr = a.trace();
    let tr_sq: f64 = a.as_slice().iter().map(|v| v * v).sum();
    tr * tr + 2.0 * tr_sq
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64, p: usize) -> BekkParams {
        BekkParams::new(a, b, SymMatrix::toeplitz(p, 0.4)).unwrap()
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta(0.0, 0.9, 100).unwrap(), 0.0);
        assert!((eta(0.05, 0.9, 100).unwrap() - 1.0).abs() < 1e-12);
        assert!((eta(0.15, 0.25, 100).unwrap() - 0.25).abs() < 1e-12);
        assert!(eta(0.5, 0.5, 10).is_err());
    }

    #[test]
    fn moment_formula_limits() {
        let v = expected_tr_sigma_sq_identity(0.0, 0.5, 40).unwrap();
        assert!((v - 40.0).abs() < 1e-12);
        let v = expected_tr_sigma_sq_identity(1e-6, 0.5, 40).unwrap();
        assert!((v - 40.0).abs() < 1e-6);
        assert!(expected_tr_sigma_sq_identity(0.3, 0.95, 10).is_err());
        // (a+b)^2 + a^2 >= 1 violates the second-moment condition
        assert!(matches!(
            expected_tr_sigma_sq_identity(0.6, 0.3, 10),
            Err(Error::MomentConditionViolated { .. })
        ));
    }

    #[test]
    fn quadratic_moment_examples() {
        let v = gaussian_quadratic_second_moment(&SymMatrix::identity(5));
        assert_eq!(v, 25.0 + 10.0);
        let v = gaussian_quadratic_second_moment(&SymMatrix::from_diagonal(&[1.0, 2.0]));
        assert_eq!(v, 19.0);
    }

    #[test]
    fn zero_coefficients_reproduce_iid() {
        let mut cfg = SimConfig::new(9, 30);
        cfg.burn_in = 20;
        cfg.emit_paired_iid = true;
        let panel = simulate(&params(0.0, 0.0, 6), &cfg).unwrap();
        assert_eq!(Some(&panel.returns), panel.paired_iid.as_ref());
    }

    #[test]
    fn deterministic_given_seed() {
        let mut cfg = SimConfig::new(42, 40);
        cfg.burn_in = 50;
        cfg.emit_paired_iid = true;
        cfg.presample = 5;
        let one = simulate(&params(0.05, 0.9, 8), &cfg).unwrap();
        let two = simulate(&params(0.05, 0.9, 8), &cfg).unwrap();
        assert_eq!(one, two);
        cfg.replication = 1;
        let three = simulate(&params(0.05, 0.9, 8), &cfg).unwrap();
        assert_ne!(one.returns, three.returns);
    }

    #[test]
    fn paired_panel_replays_innovations() {
        let p = 5;
        let mut cfg = SimConfig::new(3, 25);
        cfg.burn_in = 10;
        cfg.emit_paired_iid = true;
        let prm = params(0.1, 0.65, p);
        let panel = simulate(&prm, &cfg).unwrap();
        // replay the innovation stream and rebuild L̄ z_t independently
        let mut rng = rng::stream(3, 0, Purpose::Innovations);
        let l = cholesky(&prm.sigma_bar).unwrap().to_matrix();
        let paired = panel.paired_iid.unwrap();
        for t in 0..(cfg.burn_in + cfg.n) {
            let z = crate::linalg::Vector::from_fn(p, |_, _| rng.sample(StandardNormal));
            if t >= cfg.burn_in {
                let want = &l * z;
                let got = paired.column(t - cfg.burn_in);
                assert!((got - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn presample_holds_trailing_burn_in_returns() {
        let mut cfg = SimConfig::new(5, 10);
        cfg.burn_in = 12;
        cfg.presample = 3;
        let prm = params(0.1, 0.65, 4);
        let panel = simulate(&prm, &cfg).unwrap();
        let mut long = cfg.clone();
        long.burn_in = 9;
        long.presample = 0;
        long.n = 13;
        let full = simulate(&prm, &long).unwrap();
        for k in 0..3 {
            assert_eq!(panel.presample.column(k), full.returns.column(k));
        }
        assert_eq!(panel.lagged(-1).unwrap(), full.returns.column(2).as_slice());
        assert_eq!(panel.lagged(0).unwrap(), full.returns.column(3).as_slice());
        assert!(panel.lagged(-4).is_none());
    }

    #[test]
    fn conditional_covariance_mean_is_unconditional() {
        // E Σ_t = Σ̄: time-average of tr(Σ_t)/p over a long identity run
        let p = 20;
        let prm = BekkParams::new(0.05, 0.9, SymMatrix::identity(p)).unwrap();
        let mut sim = BekkSimulator::new(&prm).unwrap();
        let mut rng = rng::stream(77, 0, Purpose::Auxiliary);
        for _ in 0..1000 {
            sim.advance(&mut rng).unwrap();
        }
        let steps = 100_000;
        let mut mean = vec![0.0; p * p];
        let mut traces = Vec::with_capacity(steps);
        for _ in 0..steps {
            sim.advance(&mut rng).unwrap();
            for (m, s) in mean.iter_mut().zip(sim.sigma()) {
                *m += s / steps as f64;
            }
            traces.push((0..p).map(|i| sim.sigma()[i * p + i]).sum::<f64>() / p as f64);
        }
        let max_err = (0..p * p)
            .map(|k| (mean[k] - if k % (p + 1) == 0 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        assert!(max_err <= 0.05, "max entry error {max_err}");
        // batch-means standard error over the serially dependent trace path
        let batches = 100;
        let per = steps / batches;
        let bm: Vec<f64> = traces.chunks(per).map(|c| c.iter().sum::<f64>() / per as f64).collect();
        let grand = bm.iter().sum::<f64>() / batches as f64;
        let var = bm.iter().map(|x| (x - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
        let se = (var / batches as f64).sqrt();
        assert!((grand - 1.0).abs() <= 3.0 * se + 1e-3, "{grand} ± {se}");
    }
}
