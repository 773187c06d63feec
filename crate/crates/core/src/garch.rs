//! Constrained Gaussian QMLE of the univariate GARCH(1,1) model
//! `σ²_{t+1} = (1 - a - b) σ̄² + a R_t² + b σ²_t`.
//!
//! The feasible set is `0 <= a, b <= 1`, `a + b <= 1 - δ`, `δ <= σ̄² < C`.
//! Minimization is a projected BFGS iteration with analytic gradients,
//! restarted from a fixed grid of `(a, b)` values.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::bekk::ReturnsPanel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GarchFit {
    pub a_hat: f64,
    pub b_hat: f64,
    /// Unconditional variance; `NaN` for pooled fits.
    pub sigma_bar2_hat: f64,
    pub neg_log_lik: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct GarchOptions {
    pub delta: f64,
    /// Upper bound on `σ̄²`; `None` means ten times the sample variance.
    pub cap_c: Option<f64>,
    pub max_iter: usize,
}

impl Default for GarchOptions {
    fn default() -> Self {
        Self {
            delta: 0.01,
            cap_c: None,
            max_iter: 500,
        }
    }
}

/// Starting `(a, b)` values; points violating `a + b <= 1 - δ` are skipped and
/// `(δ, δ)` is always included. Every start uses `σ̄²` = sample variance.
pub const START_A: [f64; 3] = [0.05, 0.2, 0.5];
pub const START_B: [f64; 3] = [0.1, 0.5, 0.85];

fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

struct Problem<'a> {
    sq: Vec<f64>,
    init_var: f64,
    delta: f64,
    cap: f64,
    _series: &'a [f64],
}

impl Problem<'_> {
    /// Mean of `R²/σ² + log σ²` and its gradient in `(a, b, σ̄²)`.
    fn eval(&self, x: [f64; 3], grad: Option<&mut [f64; 3]>) -> f64 {
        let [a, b, s] = x;
        let n = self.sq.len();
        let c = 1.0 - a - b;
        let mut var = self.init_var;
        let (mut da, mut db, mut ds) = (0.0, 0.0, 0.0);
        let mut obj = 0.0;
        let mut g = [0.0; 3];
        let want_grad = grad.is_some();
        for &r2 in &self.sq {
            obj += r2 / var + var.ln();
            if want_grad {
                let w = (1.0 - r2 / var) / var;
                g[0] += w * da;
                g[1] += w * db;
                g[2] += w * ds;
                let nda = -s + r2 + b * da;
                let ndb = -s + var + b * db;
                let nds = c + b * ds;
                da = nda;
                db = ndb;
                ds = nds;
            }
            var = c * s + a * r2 + b * var;
        }
        if let Some(out) = grad {
            for k in 0..3 {
                out[k] = g[k] / n as f64;
            }
        }
        obj / n as f64
    }

    fn project(&self, x: [f64; 3]) -> [f64; 3] {
        let (a, b) = project_capped_simplex(x[0], x[1], 1.0 - self.delta);
        let s = x[2].clamp(self.delta, self.cap * (1.0 - 1e-12));
        [a, b, s]
    }
}

/// Euclidean projection onto `{a >= 0, b >= 0, a + b <= total}`.
fn project_capped_simplex(a: f64, b: f64, total: f64) -> (f64, f64) {
    let (pa, pb) = (a.max(0.0), b.max(0.0));
    if pa + pb <= total {
        return (pa, pb);
    }
    let shift = (a + b - total) / 2.0;
    let (qa, qb) = (a - shift, b - shift);
    if qa < 0.0 {
        (0.0, total)
    } else if qb < 0.0 {
        (total, 0.0)
    } else {
        (qa, qb)
    }
}

struct LocalFit {
    x: [f64; 3],
    obj: f64,
    converged: bool,
    iterations: usize,
}

fn sub(x: [f64; 3], y: [f64; 3]) -> [f64; 3] {
    [x[0] - y[0], x[1] - y[1], x[2] - y[2]]
}

fn dot3(x: [f64; 3], y: [f64; 3]) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

fn projected_bfgs(prob: &Problem<'_>, start: [f64; 3], max_iter: usize) -> LocalFit {
    let mut x = prob.project(start);
    let mut g = [0.0; 3];
    let mut f = prob.eval(x, Some(&mut g));
    let mut h = [[0.0; 3]; 3];
    let reset = |h: &mut [[f64; 3]; 3]| {
        *h = [[0.0; 3]; 3];
        for (k, row) in h.iter_mut().enumerate() {
            row[k] = 1.0;
        }
    };
    reset(&mut h);
    for it in 0..max_iter {
        let pg = sub(x, prob.project(sub(x, g)));
        if dot3(pg, pg).sqrt() < 1e-8 {
            return LocalFit {
                x,
                obj: f,
                converged: true,
                iterations: it,
            };
        }
        let mut accepted = None;
        for attempt in 0..2 {
            let dir = if attempt == 0 {
                let mut d = [0.0; 3];
                for (i, row) in h.iter().enumerate() {
                    d[i] = -dot3(*row, g);
                }
                d
            } else {
                [-g[0], -g[1], -g[2]]
            };
            let mut step = 1.0;
            for _ in 0..40 {
                let trial = prob.project([x[0] + step * dir[0], x[1] + step * dir[1], x[2] + step * dir[2]]);
                let moved = sub(trial, x);
                let ft = prob.eval(trial, None);
                if ft.is_finite() && ft <= f + 1e-4 * dot3(g, moved) && dot3(moved, moved) > 0.0 {
                    accepted = Some(trial);
                    break;
                }
                step *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
            reset(&mut h);
        }
        let Some(xn) = accepted else {
            return LocalFit {
                x,
                obj: f,
                converged: true,
                iterations: it,
            };
        };
        let mut gn = [0.0; 3];
        let fnew = prob.eval(xn, Some(&mut gn));
        let s = sub(xn, x);
        let y = sub(gn, g);
        let sy = dot3(s, y);
        if sy > 1e-14 {
            // inverse BFGS update
            let mut hy = [0.0; 3];
            for i in 0..3 {
                hy[i] = dot3(h[i], y);
            }
            let yhy = dot3(y, hy);
            for i in 0..3 {
                for j in 0..3 {
                    h[i][j] += (sy + yhy) * s[i] * s[j] / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        let done = (f - fnew).abs() < 1e-12 * (1.0 + f.abs());
        x = xn;
        f = fnew;
        g = gn;
        if done {
            return LocalFit {
                x,
                obj: f,
                converged: true,
                iterations: it + 1,
            };
        }
    }
    LocalFit {
        x,
        obj: f,
        converged: false,
        iterations: max_iter,
    }
}

/// Start points for [`fit_garch`], in search order.
pub fn start_grid(delta: f64) -> Vec<(f64, f64)> {
    let mut pts = vec![(delta, delta)];
    for &a in &START_A {
        for &b in &START_B {
            if a + b <= 1.0 - delta {
                pts.push((a, b));
            }
        }
    }
    pts
}

/// Objective `(1/n) Σ [R²/σ² + log σ²]` at `(a, b, σ̄²)`, with `σ²_1` equal to
/// the sample variance.
pub fn garch_objective(series: &[f64], a: f64, b: f64, sigma_bar2: f64) -> f64 {
    let prob = Problem {
        sq: series.iter().map(|v| v * v).collect(),
        init_var: sample_variance(series),
        delta: 0.0,
        cap: f64::INFINITY,
        _series: series,
    };
    prob.eval([a, b, sigma_bar2], None)
}

pub fn fit_garch(series: &[f64], opts: &GarchOptions) -> Result<GarchFit> {
    if series.len() < 50 {
        return Err(Error::InvalidParameter(format!(
            "GARCH fit needs at least 50 observations, got {}",
            series.len()
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("series has non-finite values".into()));
    }
    let var = sample_variance(series);
    if !(var > 0.0) {
        return Err(Error::DegenerateSeries);
    }
    let delta = opts.delta;
    let cap = opts.cap_c.unwrap_or(10.0 * var);
    if !(delta > 0.0 && delta < 0.5 && cap > 0.5 && cap > delta) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < delta < 0.5 < C, got delta = {delta}, C = {cap}"
        )));
    }
    let prob = Problem {
        sq: series.iter().map(|v| v * v).collect(),
        init_var: var,
        delta,
        cap,
        _series: series,
    };
    let mut best: Option<LocalFit> = None;
    for (a, b) in start_grid(delta) {
        let fit = projected_bfgs(&prob, [a, b, var], opts.max_iter);
        if best.as_ref().is_none_or(|cur| fit.obj < cur.obj) {
            best = Some(fit);
        }
    }
    let best = best.expect("start grid is never empty");
    Ok(GarchFit {
        a_hat: best.x[0],
        b_hat: best.x[1],
        sigma_bar2_hat: best.x[2],
        neg_log_lik: best.obj,
        converged: best.converged,
        iterations: best.iterations,
    })
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Fits `k` distinct uniformly drawn coordinates and combines `(â, b̂)` by
/// coordinate-wise median. With `k = 1` the single fit is returned unchanged.
pub fn fit_garch_pooled<R: Rng + ?Sized>(
    panel: &ReturnsPanel,
    k: usize,
    opts: &GarchOptions,
    rng: &mut R,
) -> Result<GarchFit> {
    let p = panel.p();
    if k == 0 || k > p {
        return Err(Error::InvalidParameter(format!("pool size {k} must be in 1..={p}")));
    }
    let coords = index::sample(rng, p, k).into_vec();
    fit_garch_coordinates(panel, &coords, opts)
}

pub fn fit_garch_coordinates(panel: &ReturnsPanel, coords: &[usize], opts: &GarchOptions) -> Result<GarchFit> {
    let fits: Vec<GarchFit> = coords
        .par_iter()
        .map(|&i| fit_garch(&panel.series(i), opts))
        .collect::<Vec<_>>()
        .into_iter()
        .filter_map(|r| r.ok())
        .collect();
    if fits.is_empty() {
        return Err(Error::PooledFitFailed(coords.len()));
    }
    if coords.len() == 1 {
        return Ok(fits[0]);
    }
    let mut a: Vec<f64> = fits.iter().map(|f| f.a_hat).collect();
    let mut b: Vec<f64> = fits.iter().map(|f| f.b_hat).collect();
    let mut nll: Vec<f64> = fits.iter().map(|f| f.neg_log_lik).collect();
    let (a_hat, b_hat) = project_capped_simplex(median(&mut a), median(&mut b), 1.0 - opts.delta);
    let converged = 2 * fits.iter().filter(|f| f.converged).count() > coords.len();
    Ok(GarchFit {
        a_hat,
        b_hat,
        sigma_bar2_hat: f64::NAN,
        neg_log_lik: median(&mut nll),
        converged,
        iterations: fits.iter().map(|f| f.iterations).max().unwrap_or(0),
    })
}

/// Simulates a univariate GARCH(1,1) path started at `σ̄²`.
pub fn simulate_garch<R: Rng + ?Sized>(
    a: f64,
    b: f64,
    sigma_bar2: f64,
    n: usize,
    burn_in: usize,
    rng: &mut R,
) -> Vec<f64> {
    use rand_distr::StandardNormal;
    let mut var = sigma_bar2;
    let mut out = Vec::with_capacity(n);
    for t in 0..burn_in + n {
        let z: f64 = rng.sample(StandardNormal);
        let r = var.sqrt() * z;
        if t >= burn_in {
            out.push(r);
        }
        var = (1.0 - a - b) * sigma_bar2 + a * r * r + b * var;
    }
    out
}
