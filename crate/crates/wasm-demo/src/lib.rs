//! Browser bindings: the limiting spectral law of a two-atom population, a
//! simulated panel before and after time-variation adjustment, and the
//! shrinkage estimates built from both.

use wasm_bindgen::prelude::*;

use bekkshrink::bekk::{simulate, BekkParams, ReturnsPanel, SimConfig};
use bekkshrink::garch::{fit_garch_pooled, GarchOptions};
use bekkshrink::linalg::{eig_sym, SymMatrix};
use bekkshrink::metrics::{eig_rms_distance, frobenius_error, EsdSample};
use bekkshrink::mplaw::{DiscreteSpectrum, MpLaw, MpModel, QuestOptions};
use bekkshrink::rng::{stream, Purpose};
use bekkshrink::shrinkage::{nls_estimate, TruncationRule};
use bekkshrink::tvadjust::{default_mp, tv_adjust, TvAdjPanel, TvAdjustConfig};

fn js<E: std::fmt::Display>(e: E) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct MpCurve {
    x: Vec<f64>,
    density: Vec<f64>,
    edges: Vec<f64>,
    zero_mass: f64,
}

#[wasm_bindgen]
impl MpCurve {
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    pub fn density(&self) -> Vec<f64> {
        self.density.clone()
    }

    /// Support intervals as `[left0, right0, left1, right1, ...]`.
    pub fn edges(&self) -> Vec<f64> {
        self.edges.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn zero_mass(&self) -> f64 {
        self.zero_mass
    }
}

/// Density of the limiting law for `H = w δ(t1) + (1 - w) δ(t2)` at
/// concentration `y`, on `points` grid points spanning the support.
#[wasm_bindgen]
pub fn mp_density(y: f64, t1: f64, t2: f64, w: f64, points: usize) -> Result<MpCurve, JsError> {
    let h = DiscreteSpectrum::new(vec![t1, t2], vec![w, 1.0 - w]).map_err(js)?;
    let law = MpLaw::new(&MpModel::new(y, h).map_err(js)?).map_err(js)?;
    let support = law.support();
    let lo = support.first().map_or(0.0, |iv| iv.left);
    let hi = support.last().map_or(1.0, |iv| iv.right);
    let pad = 0.05 * (hi - lo);
    let (a, b) = ((lo - pad).max(0.0), hi + pad);
    let points = points.clamp(16, 4000);
    let x: Vec<f64> = (0..points)
        .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
        .collect();
    let density = x
        .iter()
        .map(|&v| law.density(v))
        .collect::<Result<_, _>>()
        .map_err(js)?;
    Ok(MpCurve {
        x,
        density,
        edges: support.iter().flat_map(|iv| [iv.left, iv.right]).collect(),
        zero_mass: law.zero_mass(),
    })
}

struct Sim {
    panel: ReturnsPanel,
    sigma: SymMatrix,
    raw: SymMatrix,
    iid: SymMatrix,
    adjusted: TvAdjPanel,
    a_hat: f64,
    b_hat: f64,
}

fn check_dims(p: usize, n: usize) -> Result<(), &'static str> {
    if (4..=150).contains(&p) && (60..=2000).contains(&n) {
        Ok(())
    } else {
        Err("need 4 <= p <= 150 and 60 <= n <= 2000")
    }
}

fn run_sim(p: usize, n: usize, a: f64, b: f64, rho: f64, seed: u64, estimate_ab: bool) -> Result<Sim, JsError> {
    check_dims(p, n).map_err(JsError::new)?;
    let sigma = SymMatrix::toeplitz(p, rho);
    let params = BekkParams::new(a, b, sigma.clone()).map_err(js)?;
    let mut cfg = SimConfig::new(seed, n);
    cfg.burn_in = 500;
    cfg.emit_paired_iid = true;
    let panel = simulate(&params, &cfg).map_err(js)?;
    let (a_hat, b_hat) = if estimate_ab {
        let mut rng = stream(seed, 0, Purpose::Pooling);
        let fit = fit_garch_pooled(&panel, p.min(10), &GarchOptions::default(), &mut rng).map_err(js)?;
        (fit.a_hat, fit.b_hat)
    } else {
        (a, b)
    };
    let adjusted = tv_adjust(&panel, &TvAdjustConfig::new(default_mp(p), a_hat, b_hat).map_err(js)?).map_err(js)?;
    let raw = SymMatrix::sample_covariance(&panel.returns).map_err(js)?;
    let iid = SymMatrix::sample_covariance(panel.paired_iid.as_ref().expect("paired panel")).map_err(js)?;
    Ok(Sim {
        panel,
        sigma,
        raw,
        iid,
        adjusted,
        a_hat,
        b_hat,
    })
}

#[wasm_bindgen]
pub struct EsdComparison {
    raw: Vec<f64>,
    adjusted: Vec<f64>,
    iid: Vec<f64>,
    a_hat: f64,
    b_hat: f64,
    raw_dist: f64,
    tv_dist: f64,
}

#[wasm_bindgen]
impl EsdComparison {
    pub fn raw(&self) -> Vec<f64> {
        self.raw.clone()
    }

    pub fn adjusted(&self) -> Vec<f64> {
        self.adjusted.clone()
    }

    pub fn iid(&self) -> Vec<f64> {
        self.iid.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn a_hat(&self) -> f64 {
        self.a_hat
    }

    #[wasm_bindgen(getter)]
    pub fn b_hat(&self) -> f64 {
        self.b_hat
    }

    #[wasm_bindgen(getter)]
    pub fn raw_dist(&self) -> f64 {
        self.raw_dist
    }

    #[wasm_bindgen(getter)]
    pub fn tv_dist(&self) -> f64 {
        self.tv_dist
    }
}

/// Sorted eigenvalues of the raw, adjusted and paired i.i.d. sample
/// covariances of one simulated panel.
#[wasm_bindgen]
pub fn compare_esd(
    p: usize,
    n: usize,
    a: f64,
    b: f64,
    rho: f64,
    seed: u64,
    estimate_ab: bool,
) -> Result<EsdComparison, JsError> {
    let sim = run_sim(p, n, a, b, rho, seed, estimate_ab)?;
    let raw = EsdSample::of(&sim.raw).map_err(js)?;
    let tv = EsdSample::of(&sim.adjusted.covariance).map_err(js)?;
    let iid = EsdSample::of(&sim.iid).map_err(js)?;
    Ok(EsdComparison {
        raw_dist: eig_rms_distance(&raw, &iid).map_err(js)?,
        tv_dist: eig_rms_distance(&tv, &iid).map_err(js)?,
        raw: raw.eigs().to_vec(),
        adjusted: tv.eigs().to_vec(),
        iid: iid.eigs().to_vec(),
        a_hat: sim.a_hat,
        b_hat: sim.b_hat,
    })
}

#[wasm_bindgen]
pub struct ShrinkDemo {
    truth: Vec<f64>,
    raw_spectrum: Vec<f64>,
    tv_spectrum: Vec<f64>,
    raw_frob: f64,
    tv_frob: f64,
    sample_frob: f64,
}

#[wasm_bindgen]
impl ShrinkDemo {
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }

    pub fn raw_spectrum(&self) -> Vec<f64> {
        self.raw_spectrum.clone()
    }

    pub fn tv_spectrum(&self) -> Vec<f64> {
        self.tv_spectrum.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn raw_frob(&self) -> f64 {
        self.raw_frob
    }

    #[wasm_bindgen(getter)]
    pub fn tv_frob(&self) -> f64 {
        self.tv_frob
    }

    #[wasm_bindgen(getter)]
    pub fn sample_frob(&self) -> f64 {
        self.sample_frob
    }
}

/// Spectrum estimates (ascending) and Frobenius errors of nonlinear
/// shrinkage applied to the raw and the adjusted sample covariance.
#[wasm_bindgen]
pub fn shrink(
    p: usize,
    n: usize,
    a: f64,
    b: f64,
    rho: f64,
    seed: u64,
    estimate_ab: bool,
) -> Result<ShrinkDemo, JsError> {
    let sim = run_sim(p, n, a, b, rho, seed, estimate_ab)?;
    let opts = QuestOptions::default();
    let y_raw = p as f64 / sim.panel.n() as f64;
    let y_tv = p as f64 / sim.adjusted.effective_n() as f64;
    let raw = nls_estimate(&sim.raw, y_raw, TruncationRule::Auto, &opts).map_err(js)?;
    let tv = nls_estimate(&sim.adjusted.covariance, y_tv, TruncationRule::Auto, &opts).map_err(js)?;
    Ok(ShrinkDemo {
        truth: eig_sym(&sim.sigma).map_err(js)?.ascending(),
        raw_spectrum: raw.spectrum.midpoint_quantiles(p),
        tv_spectrum: tv.spectrum.midpoint_quantiles(p),
        raw_frob: frobenius_error(&raw.shrinkage.estimate, &sim.sigma).map_err(js)?,
        tv_frob: frobenius_error(&tv.shrinkage.estimate, &sim.sigma).map_err(js)?,
        sample_frob: frobenius_error(&sim.raw, &sim.sigma).map_err(js)?,
    })
}
