use super::law::MpLaw;
use super::{DiscreteSpectrum, MpModel};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuestOptions {
    /// Atom count; `None` means `min(p, 100)`.
    pub atoms: Option<usize>,
    pub max_iter: usize,
    /// Stop when an accepted step lowers the objective by less than this
    /// fraction.
    pub rel_tol: f64,
    /// Let atom weights move; otherwise they stay at `1/K`.
    pub free_weights: bool,
    pub solver: QuestSolver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuestSolver {
    /// Projected gradient descent with an adaptive step.
    ProjectedGradient,
    /// Levenberg–Marquardt followed by projection.
    LevenbergMarquardt,
}

impl Default for QuestOptions {
    fn default() -> Self {
        Self {
            atoms: None,
            max_iter: 500,
            rel_tol: 1e-4,
            free_weights: false,
            solver: QuestSolver::ProjectedGradient,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuestFit {
    pub spectrum: DiscreteSpectrum,
    /// `(1/p) Σ (q_i(Ĥ) - λ_(i))²`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - 1.0) / (j + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    for x in v {
        *x = (*x - theta).max(0.0);
    }
}

struct Eval {
    residuals: Vec<f64>,
    sse: f64,
    law: MpLaw,
    points: Vec<super::QuantilePoint>,
}

fn evaluate(taus: &[f64], ws: &[f64], y: f64, levels: &[f64], target: &[f64]) -> Result<Eval> {
    let model = MpModel::new(y, DiscreteSpectrum::new(taus.to_vec(), ws.to_vec())?)?;
    let law = MpLaw::new(&model)?;
    let points = law.quantiles(levels)?;
    let residuals: Vec<f64> = points.iter().zip(target).map(|(q, &l)| q.x() - l).collect();
    let sse = residuals.iter().map(|r| r * r).sum();
    Ok(Eval {
        residuals,
        sse,
        law,
        points,
    })
}

/// Recovers a population spectrum from sample eigenvalues by matching the
/// quantiles `(i - 1/2)/p` of the limiting law to the sorted eigenvalues.
///
/// Atom locations are free and weights stay at `1/K` unless
/// [`QuestOptions::free_weights`] is set. Each step (projected gradient or
/// Levenberg–Marquardt) is followed by projection of the weights onto the
/// simplex and of the locations onto `[floor, ∞)`. Starts from the sample
/// quantiles. On optimizer trouble the best point so far is returned with
/// `converged = false`.
///
/// With noisy eigenvalues the default gradient solver, stopped at a loose
/// relative tolerance, gives a smoother and more accurate `Ĥ` than a fully
/// converged fit, which chases sampling noise. Use Levenberg–Marquardt with
/// a tight tolerance to solve exact inputs.
pub fn quest_invert(sample_eigs: &[f64], y: f64, opts: &QuestOptions) -> Result<QuestFit> {
    let p = sample_eigs.len();
    if p == 0 {
        return Err(Error::InvalidParameter("no eigenvalues to invert".into()));
    }
    if sample_eigs.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
        return Err(Error::InvalidParameter(
            "eigenvalues must be finite and nonnegative".into(),
        ));
    }
    if !(y > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "concentration must be positive, got {y}"
        )));
    }
    let mut target = sample_eigs.to_vec();
    target.sort_by(f64::total_cmp);
    let mean = target.iter().sum::<f64>() / p as f64;
    if mean <= 0.0 {
        return Err(Error::InvalidParameter("all eigenvalues are zero".into()));
    }
    let levels: Vec<f64> = (0..p).map(|i| (i as f64 + 0.5) / p as f64).collect();
    let k = opts.atoms.unwrap_or(p.min(100)).max(1);
    let floor = 1e-6 * mean;

    let positive: Vec<f64> = target.iter().copied().filter(|&l| l > floor).collect();
    let source = if positive.is_empty() { &target } else { &positive };
    let np = source.len();
    let mut taus: Vec<f64> = (0..k)
        .map(|j| source[(((j as f64 + 0.5) / k as f64) * np as f64) as usize].max(floor))
        .collect();
    let mut ws = vec![1.0 / k as f64; k];

    let mut cur = evaluate(&taus, &ws, y, &levels, &target)?;
    let penalty = mean * (p as f64).sqrt();
    let mut mu = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    let mut grad_t = vec![0.0; k];
    let mut grad_w = vec![0.0; k];
    let np = if opts.free_weights { 2 * k } else { k };
    let mut step_len = 0.0;
    while opts.solver == QuestSolver::ProjectedGradient && iterations < opts.max_iter {
        iterations += 1;
        let mut gt = vec![0.0; k];
        let mut gw = vec![0.0; k];
        let excess = ws.iter().sum::<f64>() - 1.0;
        for (q, &r) in cur.points.iter().zip(&cur.residuals) {
            cur.law.quantile_gradient(q, &taus, &ws, &mut grad_t, &mut grad_w);
            for j in 0..k {
                gt[j] += 2.0 * r * grad_t[j];
                gw[j] += 2.0 * r * grad_w[j];
            }
        }
        for g in &mut gw {
            *g += 2.0 * penalty * penalty * excess;
        }
        if step_len == 0.0 {
            let g2: f64 = gt.iter().map(|g| g * g).sum();
            step_len = 0.1 * mean / g2.sqrt().max(1e-300);
        }
        let mut improved = false;
        while step_len > 1e-20 {
            let t_new: Vec<f64> = (0..k).map(|j| (taus[j] - step_len * gt[j]).max(floor)).collect();
            let mut w_new = ws.clone();
            if opts.free_weights {
                for j in 0..k {
                    w_new[j] -= step_len * gw[j];
                }
                project_simplex(&mut w_new);
            }
            let moved: f64 = (0..k)
                .map(|j| (t_new[j] - taus[j]).powi(2) + (w_new[j] - ws[j]).powi(2))
                .sum();
            match evaluate(&t_new, &w_new, y, &levels, &target) {
                Ok(trial) if trial.sse <= cur.sse - 1e-4 * moved / step_len => {
                    let rel = (cur.sse - trial.sse) / cur.sse.max(1e-300);
                    taus = t_new;
                    ws = w_new;
                    cur = trial;
                    step_len *= 2.0;
                    improved = true;
                    converged = rel < opts.rel_tol;
                    break;
                }
                _ => step_len *= 0.5,
            }
        }
        if !improved || converged {
            converged = true;
            break;
        }
    }
    while opts.solver == QuestSolver::LevenbergMarquardt && iterations < opts.max_iter {
        iterations += 1;
        // Jacobian rows: p quantiles plus the mass constraint
        let mut jac = Matrix::zeros(p + 1, np);
        for (i, q) in cur.points.iter().enumerate() {
            cur.law.quantile_gradient(q, &taus, &ws, &mut grad_t, &mut grad_w);
            for j in 0..k {
                jac[(i, j)] = grad_t[j];
                if opts.free_weights {
                    jac[(i, k + j)] = grad_w[j];
                }
            }
        }
        if opts.free_weights {
            for j in 0..k {
                jac[(p, k + j)] = penalty;
            }
        }
        let mut r = nalgebra::DVector::from_vec(cur.residuals.clone());
        r = r.push(penalty * (ws.iter().sum::<f64>() - 1.0));
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let diag_floor = 1e-12 * jtj.diagonal().max().max(1e-300);

        let mut improved = false;
        while mu < 1e12 {
            let mut a = jtj.clone();
            for j in 0..np {
                a[(j, j)] += mu * jtj[(j, j)].max(diag_floor);
            }
            let Some(chol) = a.cholesky() else {
                mu *= 4.0;
                continue;
            };
            let step = chol.solve(&(-&jtr));
            let mut t_new: Vec<f64> = (0..k).map(|j| (taus[j] + step[j]).max(floor)).collect();
            let mut w_new = ws.clone();
            if opts.free_weights {
                for j in 0..k {
                    w_new[j] += step[k + j];
                }
                project_simplex(&mut w_new);
            }
            if w_new.iter().all(|&w| w == 0.0) {
                mu *= 4.0;
                continue;
            }
            for t in &mut t_new {
                if !t.is_finite() {
                    *t = floor;
                }
            }
            match evaluate(&t_new, &w_new, y, &levels, &target) {
                Ok(trial) if trial.sse < cur.sse => {
                    let rel = (cur.sse - trial.sse) / cur.sse.max(1e-300);
                    taus = t_new;
                    ws = w_new;
                    cur = trial;
                    mu = (mu / 3.0).max(1e-12);
                    improved = true;
                    if rel < opts.rel_tol {
                        converged = true;
                    }
                    break;
                }
                _ => mu *= 4.0,
            }
        }
        if !improved {
            // no descent direction left at any damping: a stationary point
            converged = cur.sse.is_finite();
            break;
        }
        if converged || cur.sse <= 1e-24 * mean * mean * p as f64 {
            converged = true;
            break;
        }
    }
    Ok(QuestFit {
        spectrum: DiscreteSpectrum::new(taus, ws)?,
        objective: cur.sse / p as f64,
        iterations,
        converged,
    })
}
