use std::f64::consts::PI;

use super::stieltjes::{companion_stieltjes, newton_companion};
use super::{Complex, DiscreteSpectrum, MpModel};
use crate::error::{Error, Result};

/// Chebyshev nodes per support interval.
const NODES: usize = 64;

/// One connected component of the support of `F`, with the companion
/// transform sampled at `x_j = l + (r - l)(1 - cos θ_j)/2`, `θ_j = jπ/N`.
#[derive(Debug, Clone)]
pub struct SupportInterval {
    pub left: f64,
    pub right: f64,
    pub cdf_left: f64,
    pub cdf_right: f64,
    s_left: f64,
    s_right: f64,
    nodes: Vec<Complex>,
    node_cdf: Vec<f64>,
}

impl SupportInterval {
    fn x_at(&self, theta: f64) -> f64 {
        self.left + (self.right - self.left) * (1.0 - theta.cos()) / 2.0
    }

    fn theta_at(&self, x: f64) -> f64 {
        let u = 1.0 - 2.0 * (x - self.left) / (self.right - self.left);
        u.clamp(-1.0, 1.0).acos()
    }

    /// Linear interpolation of the node samples, used as a Newton start.
    fn guess(&self, theta: f64) -> Complex {
        let h = PI / NODES as f64;
        let j = ((theta / h).floor() as usize).min(NODES - 1);
        let frac = theta / h - j as f64;
        let g = self.nodes[j] * (1.0 - frac) + self.nodes[j + 1] * frac;
        Complex::new(g.re, g.im.max(1e-300))
    }
}

/// Where a quantile landed: on the zero atom, on a support edge bordering a
/// flat stretch of the CDF, or strictly inside the support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuantilePoint {
    Zero,
    Edge { x: f64, s: f64 },
    Interior { x: f64, m: Complex },
}

impl QuantilePoint {
    pub fn x(&self) -> f64 {
        match *self {
            QuantilePoint::Zero => 0.0,
            QuantilePoint::Edge { x, .. } | QuantilePoint::Interior { x, .. } => x,
        }
    }
}

/// Limiting sample spectral distribution `F` for an [`MpModel`].
///
/// Support edges come from the real inverse map in `s = -1/m`:
/// `x(s) = s - y Σ w τ s/(τ - s)`, whose critical points `ψ(s) = 1` with
/// `ψ(s) = y Σ w τ²/(τ - s)²` are the edges. Inside the support the CDF is
/// `F̲(x) = [arg m - y Σ w arg(1 + τ m) + x Im m]/π` at the boundary value
/// `m = m(x + i0)`, and `F = (F̲ - 1 + y)/y`.
#[derive(Debug, Clone)]
pub struct MpLaw {
    model: MpModel,
    taus: Vec<f64>,
    ws: Vec<f64>,
    w_zero: f64,
    zero_mass: f64,
    intervals: Vec<SupportInterval>,
}

fn psi(taus: &[f64], ws: &[f64], y: f64, s: f64) -> f64 {
    y * taus
        .iter()
        .zip(ws)
        .map(|(&t, &w)| w * t * t / ((t - s) * (t - s)))
        .sum::<f64>()
}

fn dpsi(taus: &[f64], ws: &[f64], y: f64, s: f64) -> f64 {
    2.0 * y
        * taus
            .iter()
            .zip(ws)
            .map(|(&t, &w)| w * t * t / (t - s).powi(3))
            .sum::<f64>()
}

/// Bisection for a sign change of `g` on `(lo, hi)`; `g(lo) < 0 < g(hi)` in
/// the orientation given by `rising`.
fn bisect(mut lo: f64, mut hi: f64, rising: bool, g: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid);
        if (v < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl MpLaw {
    pub fn new(model: &MpModel) -> Result<Self> {
        let y = model.y;
        let mut taus = Vec::new();
        let mut ws = Vec::new();
        let mut w_zero = 0.0;
        for (t, w) in model.h.atoms() {
            if t > 0.0 {
                taus.push(t);
                ws.push(w);
            } else {
                w_zero += w;
            }
        }
        let k = taus.len();
        let m2: f64 = taus.iter().zip(&ws).map(|(t, w)| w * t * t).sum();

        // ψ = 1 roots in s, bracketing each gap of the support
        let ps = |s: f64| psi(&taus, &ws, y, s) - 1.0;
        let lo = taus[0] - 2.0 * (y * m2).sqrt();
        let hi = taus[0] - taus[0] * (y * ws[0]).sqrt() / 2.0;
        let s_first = bisect(lo, hi, true, ps);
        let mut edges = vec![s_first];
        let mut cdf_gaps = Vec::new();
        let mut cum = w_zero;
        for j in 0..k - 1 {
            cum += ws[j];
            let (t0, t1) = (taus[j], taus[j + 1]);
            let gap = t1 - t0;
            let a = (ws[j] * t0 * t0).cbrt();
            let b = (ws[j + 1] * t1 * t1).cbrt();
            if y * (a + b).powi(3) >= gap * gap {
                continue;
            }
            let s_min = bisect(t0, t1, true, |s| dpsi(&taus, &ws, y, s));
            if ps(s_min) >= 0.0 {
                continue;
            }
            edges.push(bisect(t0, s_min, false, ps));
            edges.push(bisect(s_min, t1, true, ps));
            cdf_gaps.push(cum);
        }
        let t_last = taus[k - 1];
        let lo = t_last + t_last * (y * ws[k - 1]).sqrt() / 2.0;
        let hi = t_last + 2.0 * (y * m2).sqrt();
        edges.push(bisect(lo, hi, false, ps));

        let zero_mass = if s_first > 0.0 { w_zero } else { 1.0 - 1.0 / y };
        let mut law = Self {
            model: model.clone(),
            taus,
            ws,
            w_zero,
            zero_mass,
            intervals: Vec::new(),
        };
        let mut cdf_left = zero_mass;
        for (i, pair) in edges.chunks(2).enumerate() {
            let (s_left, s_right) = (pair[0], pair[1]);
            let cdf_right = cdf_gaps.get(i).copied().unwrap_or(1.0);
            let mut iv = SupportInterval {
                left: law.x_of_s(s_left),
                right: law.x_of_s(s_right),
                cdf_left,
                cdf_right,
                s_left,
                s_right,
                nodes: Vec::new(),
                node_cdf: Vec::new(),
            };
            law.sample_interval(&mut iv)?;
            law.intervals.push(iv);
            cdf_left = cdf_right;
        }
        Ok(law)
    }

    pub fn model(&self) -> &MpModel {
        &self.model
    }

    pub fn support(&self) -> &[SupportInterval] {
        &self.intervals
    }

    /// Mass of `F` at zero.
    pub fn zero_mass(&self) -> f64 {
        self.zero_mass
    }

    fn x_of_s(&self, s: f64) -> f64 {
        let y = self.model.y;
        s - y * self
            .taus
            .iter()
            .zip(&self.ws)
            .map(|(&t, &w)| w * t * s / (t - s))
            .sum::<f64>()
    }

    fn second_derivative(&self, m: f64) -> f64 {
        let y = self.model.y;
        -2.0 / m.powi(3)
            + 2.0
                * y
                * self
                    .taus
                    .iter()
                    .zip(&self.ws)
                    .map(|(&t, &w)| w * t.powi(3) / (1.0 + t * m).powi(3))
                    .sum::<f64>()
    }

    fn solve_interior(&self, x: f64, start: Complex) -> Result<Complex> {
        let tol = 1e-13 * (1.0 + x.abs());
        let z = Complex::new(x, 0.0);
        // real roots of z(m) = x also exist inside the support; they are not
        // the boundary value
        let genuine = |m: Complex| m.im > 1e-10 * m.norm();
        if let Some(m) = newton_companion(&self.model, z, start, tol) {
            if genuine(m) {
                return Ok(m);
            }
        }
        let m = companion_stieltjes(&self.model, z)?;
        if genuine(m) {
            Ok(m)
        } else {
            Err(Error::StieltjesNoConvergence { residual: m.im })
        }
    }

    fn edge_guess(&self, s_edge: f64, x: f64, x_edge: f64) -> Complex {
        let me = -1.0 / s_edge;
        let curv = self.second_derivative(me).abs().max(1e-300);
        Complex::new(me, (2.0 * (x - x_edge).abs() / curv).sqrt())
    }

    fn sample_interval(&self, iv: &mut SupportInterval) -> Result<()> {
        let mut nodes = vec![Complex::new(0.0, 0.0); NODES + 1];
        nodes[0] = Complex::new(-1.0 / iv.s_left, 0.0);
        nodes[NODES] = Complex::new(-1.0 / iv.s_right, 0.0);
        let theta = |j: usize| j as f64 * PI / NODES as f64;
        let half = NODES / 2;
        for j in 1..=half {
            let x = iv.x_at(theta(j));
            let start = if j == 1 {
                self.edge_guess(iv.s_left, x, iv.left)
            } else {
                nodes[j - 1] * 2.0 - nodes[j - 2]
            };
            nodes[j] = self.solve_interior(x, Complex::new(start.re, start.im.max(1e-12)))?;
        }
        for j in (half + 1..NODES).rev() {
            let x = iv.x_at(theta(j));
            let start = if j == NODES - 1 {
                self.edge_guess(iv.s_right, x, iv.right)
            } else {
                nodes[j + 1] * 2.0 - nodes[j + 2]
            };
            nodes[j] = self.solve_interior(x, Complex::new(start.re, start.im.max(1e-12)))?;
        }
        let mut node_cdf = Vec::with_capacity(NODES + 1);
        node_cdf.push(iv.cdf_left);
        for (j, m) in nodes.iter().enumerate().take(NODES).skip(1) {
            node_cdf.push(
                self.cdf_from_companion(iv.x_at(theta(j)), *m)
                    .clamp(iv.cdf_left, iv.cdf_right),
            );
        }
        node_cdf.push(iv.cdf_right);
        // rounding can break monotonicity right at the edges
        for j in 1..=NODES {
            if node_cdf[j] < node_cdf[j - 1] {
                node_cdf[j] = node_cdf[j - 1];
            }
        }
        iv.nodes = nodes;
        iv.node_cdf = node_cdf;
        Ok(())
    }

    fn cdf_from_companion(&self, x: f64, m: Complex) -> f64 {
        let y = self.model.y;
        let mut args = 0.0;
        for (&t, &w) in self.taus.iter().zip(&self.ws) {
            args += w * (Complex::new(1.0, 0.0) + m * t).arg();
        }
        let under = (m.arg() - y * args + x * m.im) / PI;
        (under - 1.0 + y) / y
    }

    fn locate(&self, x: f64) -> Option<&SupportInterval> {
        self.intervals.iter().find(|iv| x > iv.left && x < iv.right)
    }

    /// Companion transform at `x + i0`: complex inside the support, real
    /// (`-1/s` with `x(s) = x`) outside it.
    pub fn companion_boundary(&self, x: f64) -> Result<Complex> {
        if let Some(iv) = self.locate(x) {
            let th = iv.theta_at(x);
            return self.solve_interior(x, iv.guess(th));
        }
        let s = self.gap_s(x)?;
        if s == 0.0 {
            return Err(Error::InvalidParameter(
                "companion transform has a pole at zero here".into(),
            ));
        }
        Ok(Complex::new(-1.0 / s, 0.0))
    }

    /// Root of `x(s) = x` on the monotone branch covering a gap.
    fn gap_s(&self, x: f64) -> Result<f64> {
        let ivs = &self.intervals;
        let g = |s: f64| self.x_of_s(s) - x;
        if x <= ivs[0].left {
            let hi = ivs[0].s_left;
            let mut width = 1.0 + hi.abs();
            while g(hi - width) > 0.0 {
                width *= 2.0;
            }
            return Ok(bisect(hi - width, hi, true, g));
        }
        let last = ivs.last().expect("nonempty support");
        if x >= last.right {
            let lo = last.s_right;
            let mut width = 1.0 + lo.abs();
            while g(lo + width) < 0.0 {
                width *= 2.0;
            }
            return Ok(bisect(lo, lo + width, true, g));
        }
        for w in ivs.windows(2) {
            if x >= w[0].right && x <= w[1].left {
                return Ok(bisect(w[0].s_right, w[1].s_left, true, g));
            }
        }
        Err(Error::InvalidParameter(format!("{x} lies on a support edge")))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Ok(0.0);
        }
        for iv in &self.intervals {
            if x <= iv.left {
                return Ok(iv.cdf_left);
            }
            if x < iv.right {
                let m = self.companion_boundary(x)?;
                return Ok(self.cdf_from_companion(x, m).clamp(iv.cdf_left, iv.cdf_right));
            }
        }
        Ok(1.0)
    }

    /// Density of the continuous part of `F`.
    pub fn density(&self, x: f64) -> Result<f64> {
        match self.locate(x) {
            Some(_) => Ok(self.companion_boundary(x)?.im / (PI * self.model.y)),
            None => Ok(0.0),
        }
    }

    /// `inf { x : F(x) >= u }` for each level, with the companion value at
    /// the quantile for derivative computations.
    pub fn quantiles(&self, levels: &[f64]) -> Result<Vec<QuantilePoint>> {
        levels.iter().map(|&u| self.quantile(u)).collect()
    }

    pub fn quantile(&self, u: f64) -> Result<QuantilePoint> {
        if u <= self.zero_mass {
            return Ok(QuantilePoint::Zero);
        }
        let iv = self
            .intervals
            .iter()
            .find(|iv| u <= iv.cdf_right)
            .unwrap_or_else(|| self.intervals.last().expect("nonempty support"));
        if u <= iv.cdf_left {
            return Ok(QuantilePoint::Edge {
                x: iv.left,
                s: iv.s_left,
            });
        }
        if u >= iv.cdf_right {
            return Ok(QuantilePoint::Edge {
                x: iv.right,
                s: iv.s_right,
            });
        }
        let j = iv.node_cdf.partition_point(|&c| c < u).clamp(1, NODES);
        let h = PI / NODES as f64;
        let (mut lo, mut hi) = ((j - 1) as f64 * h, j as f64 * h);
        let (f_lo, f_hi) = (iv.node_cdf[j - 1], iv.node_cdf[j]);
        let mut th = if f_hi > f_lo {
            lo + (hi - lo) * (u - f_lo) / (f_hi - f_lo)
        } else {
            0.5 * (lo + hi)
        };
        let mut m = iv.guess(th);
        let y = self.model.y;
        for _ in 0..100 {
            let x = iv.x_at(th);
            m = self.solve_interior(x, m)?;
            let f = self.cdf_from_companion(x, m) - u;
            if f.abs() <= 1e-14 {
                break;
            }
            if f < 0.0 {
                lo = th;
            } else {
                hi = th;
            }
            if hi - lo <= 1e-15 {
                break;
            }
            let slope = m.im / (PI * y) * (iv.right - iv.left) * th.sin() / 2.0;
            let newton = th - f / slope;
            th = if slope > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            m = iv.guess(th);
        }
        let x = iv.x_at(th);
        Ok(QuantilePoint::Interior { x, m })
    }

    /// Derivatives of a quantile in each positive atom's location and weight,
    /// written into `d_tau`/`d_w` (indexed like `taus`).
    pub(crate) fn quantile_gradient(
        &self,
        q: &QuantilePoint,
        taus: &[f64],
        ws: &[f64],
        d_tau: &mut [f64],
        d_w: &mut [f64],
    ) {
        let y = self.model.y;
        match *q {
            QuantilePoint::Zero => {
                d_tau.fill(0.0);
                d_w.fill(0.0);
            }
            QuantilePoint::Edge { s, .. } => {
                for k in 0..taus.len() {
                    let (t, w) = (taus[k], ws[k]);
                    d_tau[k] = y * w * s * s / ((t - s) * (t - s));
                    d_w[k] = -y * t * s / (t - s);
                }
            }
            QuantilePoint::Interior { m, .. } => {
                let dens = m.im / (PI * y);
                for k in 0..taus.len() {
                    let (t, w) = (taus[k], ws[k]);
                    let u = Complex::new(1.0, 0.0) + m * t;
                    let df_dtau = -w * (m / u).im / PI;
                    let df_dw = -u.arg() / PI;
                    d_tau[k] = -df_dtau / dens;
                    d_w[k] = -df_dw / dens;
                }
            }
        }
    }

    /// Weight of the population atom at zero.
    pub fn population_zero_weight(&self) -> f64 {
        self.w_zero
    }
}

/// Discretized `F`: an atom at zero for its point mass plus one atom per
/// Chebyshev cell of each support interval, weighted by the CDF increment.
pub fn forward_esd(model: &MpModel, grid_size: usize) -> Result<DiscreteSpectrum> {
    if grid_size < 64 {
        return Err(Error::InvalidParameter(format!(
            "grid size must be at least 64, got {grid_size}"
        )));
    }
    let law = MpLaw::new(model)?;
    let mut locs = Vec::with_capacity(grid_size + 1);
    let mut ws = Vec::with_capacity(grid_size + 1);
    if law.zero_mass > 0.0 {
        locs.push(0.0);
        ws.push(law.zero_mass);
    }
    let total: f64 = law.intervals.iter().map(|iv| iv.cdf_right - iv.cdf_left).sum();
    for iv in &law.intervals {
        let share = (iv.cdf_right - iv.cdf_left) / total;
        let cells = ((grid_size as f64 * share).round() as usize).max(16);
        let mut prev = iv.cdf_left;
        for c in 0..cells {
            let th_hi = (c + 1) as f64 * PI / cells as f64;
            let next = if c + 1 == cells {
                iv.cdf_right
            } else {
                law.cdf(iv.x_at(th_hi))?
            };
            let th_mid = (c as f64 + 0.5) * PI / cells as f64;
            locs.push(iv.x_at(th_mid));
            ws.push((next - prev).max(0.0));
            prev = next.max(prev);
        }
    }
    DiscreteSpectrum::new(locs, ws)
}
