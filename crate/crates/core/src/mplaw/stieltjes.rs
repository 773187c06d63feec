use super::{Complex, MpModel};
use crate::error::{Error, Result};
use crate::linalg::{eig_sym, SpectralDecomp, SymMatrix};

const ONE: Complex = Complex::new(1.0, 0.0);

/// Newton iteration on `z(m) - z = 0` with backtracking that keeps
/// `Im m >= 0` and decreases the residual.
pub(crate) fn newton_companion(model: &MpModel, z: Complex, start: Complex, tol: f64) -> Option<Complex> {
    let mut m = start;
    let (zm, _) = model.companion_inverse(m);
    let mut res = (zm - z).norm();
    for _ in 0..80 {
        if res <= tol {
            return Some(m);
        }
        let (zm, dz) = model.companion_inverse(m);
        let h = zm - z;
        if dz.norm() == 0.0 || !dz.is_finite() {
            return None;
        }
        let step = h / dz;
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let cand = m - step * t;
            if cand.im >= 0.0 && cand.is_finite() {
                let r = (model.companion_inverse(cand).0 - z).norm();
                if r < res {
                    m = cand;
                    res = r;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            return (res <= tol * 1e3).then_some(m);
        }
    }
    (res <= tol).then_some(m)
}

fn fixed_point_companion(model: &MpModel, z: Complex, mut m: Complex, iters: usize) -> Complex {
    for _ in 0..iters {
        let mut s = Complex::new(0.0, 0.0);
        for (t, w) in model.h.atoms() {
            s += (ONE + m * t).inv() * (w * t);
        }
        m = -(z - s * model.y).inv();
    }
    m
}

/// Companion transform `m(z)` for `Im z >= 0`, following the Herglotz branch
/// by continuation in the imaginary part from far above the real axis.
pub fn companion_stieltjes(model: &MpModel, z: Complex) -> Result<Complex> {
    if z.im < 0.0 {
        return Err(Error::InvalidParameter("Stieltjes transform needs Im z >= 0".into()));
    }
    let scale = model.scale() + z.re.abs();
    let tol = 1e-14 * (1.0 + z.norm());
    let mut eta = scale.max(z.im);
    let start_z = Complex::new(z.re, eta);
    let mut m = fixed_point_companion(model, start_z, -start_z.inv(), 200);
    m = newton_companion(model, start_z, m, tol).ok_or(Error::StieltjesNoConvergence { residual: f64::NAN })?;
    let mut ratio = 0.25;
    while eta > z.im {
        let mut next = (eta * ratio).max(z.im);
        if next < 1e-13 * scale {
            next = z.im;
        }
        match newton_companion(model, Complex::new(z.re, next), m, tol) {
            Some(v) => {
                m = v;
                eta = next;
                ratio = (ratio * 0.5).max(0.05);
            }
            None => {
                ratio = ratio.sqrt();
                if ratio > 0.999 {
                    let residual = (model.companion_inverse(m).0 - z).norm();
                    return Err(Error::StieltjesNoConvergence { residual });
                }
            }
        }
    }
    Ok(m)
}

/// `|m - Σ w / (τ (1 - y (1 + z m)) - z)|`.
pub fn stieltjes_residual(model: &MpModel, z: Complex, m: Complex) -> f64 {
    (m - rhs(model, z, m).0).norm()
}

fn rhs(model: &MpModel, z: Complex, m: Complex) -> (Complex, Complex) {
    let y = model.y;
    let mut s = Complex::new(0.0, 0.0);
    let mut ds = Complex::new(0.0, 0.0);
    let a = ONE - (ONE + z * m) * y;
    for (t, w) in model.h.atoms() {
        let q = (a * t - z).inv();
        s += q * w;
        ds += q * q * (w * t * y) * z;
    }
    (s, ds)
}

/// Stieltjes transform `m_F(z)`, `Im z > 0`, of the limiting spectral
/// distribution: the root of `m = Σ w / (τ (1 - y (1 + z m)) - z)` with
/// `Im m >= 0`. The companion continuation supplies the branch; damped
/// fixed-point steps (damping halved on residual increase) and Newton steps
/// then drive the residual of this form below `1e-10`.
pub fn stieltjes(model: &MpModel, z: Complex) -> Result<Complex> {
    if !(z.im > 0.0) {
        return Err(Error::InvalidParameter("Stieltjes transform needs Im z > 0".into()));
    }
    let y = model.y;
    let mc = companion_stieltjes(model, z)?;
    let mut m = (mc - (y - 1.0) / z) / y;
    let mut res = stieltjes_residual(model, z, m);
    let mut omega = 1.0;
    for _ in 0..200 {
        if res <= 1e-14 * (1.0 + m.norm()) {
            break;
        }
        let (r, dr) = rhs(model, z, m);
        // Newton on m - r(m)
        let newton = m - (m - r) / (ONE - dr);
        let nr = stieltjes_residual(model, z, newton);
        if newton.im >= 0.0 && nr < res {
            m = newton;
            res = nr;
            continue;
        }
        let damped = m * (1.0 - omega) + r * omega;
        let dr_res = stieltjes_residual(model, z, damped);
        if dr_res < res && damped.im >= 0.0 {
            m = damped;
            res = dr_res;
        } else {
            omega *= 0.5;
            if omega < 1e-6 {
                break;
            }
        }
    }
    if res <= 1e-10 && m.im >= -1e-15 {
        Ok(m)
    } else {
        Err(Error::StieltjesNoConvergence { residual: res })
    }
}

/// Boundary value `lim_{ε→0+} m_F(λ + iε)` by Richardson extrapolation over
/// `ε_j = 1e-2 · 2^{-j}`.
pub fn m_breve(model: &MpModel, lambda: f64) -> Result<Complex> {
    let mut rows: Vec<Vec<Complex>> = Vec::new();
    let mut last_change = f64::INFINITY;
    for j in 0..30 {
        let eps = 1e-2 * 0.5f64.powi(j);
        let v = stieltjes(model, Complex::new(lambda, eps))?;
        let mut row = vec![v];
        if let Some(prev) = rows.last() {
            for k in 1..=prev.len() {
                let factor = 2f64.powi(k as i32) - 1.0;
                let next = row[k - 1] + (row[k - 1] - prev[k - 1]) / factor;
                row.push(next);
            }
            let cur = *row.last().expect("nonempty");
            let old = *prev.last().expect("nonempty");
            last_change = (cur - old).norm();
            if last_change < 1e-8 {
                return Ok(Complex::new(cur.re, cur.im.max(0.0)));
            }
        }
        // keep the tableau shallow: high orders amplify rounding noise
        if row.len() > 6 {
            row.truncate(6);
        }
        rows.push(row);
    }
    Err(Error::BoundaryLimit { change: last_change })
}

/// `(1/p) tr((S - zI)^{-1} g(Σ̄))` from the decomposition of `S`.
pub fn generalized_stieltjes(
    s: &SpectralDecomp,
    sigma_bar: &SymMatrix,
    g: &dyn Fn(f64) -> f64,
    z: Complex,
) -> Result<Complex> {
    let p = s.dim();
    if sigma_bar.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            actual: sigma_bar.dim(),
        });
    }
    let gs = eig_sym(sigma_bar)?.map_eigenvalues(g);
    let mut acc = Complex::new(0.0, 0.0);
    for i in 0..p {
        let u = s.eigenvectors.column(i);
        let weight = (u.transpose() * &gs * u)[(0, 0)];
        acc += (Complex::new(s.eigenvalues[i], 0.0) - z).inv() * weight;
    }
    Ok(acc / p as f64)
}

/// Limit of the generalized Stieltjes transform written with the same
/// `y` convention as the `m_F` equation:
/// `Σ w g(τ) / (τ (1 - y - y z m_F) - z)`. With `g ≡ 1` this is `m_F`.
pub fn theta_limit(model: &MpModel, g: &dyn Fn(f64) -> f64, z: Complex) -> Result<Complex> {
    let m = stieltjes(model, z)?;
    let a = ONE - (ONE + z * m) * model.y;
    Ok(model.h.atoms().map(|(t, w)| (a * t - z).inv() * (w * g(t))).sum())
}

/// The same limit with `y⁻¹` in place of `y`:
/// `Σ w g(τ) / (τ (1 - y⁻¹ - y⁻¹ z m_F) - z)`. It disagrees with
/// [`theta_limit`] (and with `m_F` at `g ≡ 1`) unless `y = 1`.
pub fn theta_limit_as_printed(model: &MpModel, g: &dyn Fn(f64) -> f64, z: Complex) -> Result<Complex> {
    let m = stieltjes(model, z)?;
    let inv_y = model.y.recip();
    let a = ONE - (ONE + z * m) * inv_y;
    Ok(model.h.atoms().map(|(t, w)| (a * t - z).inv() * (w * g(t))).sum())
}
