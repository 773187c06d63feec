//! Reproduction criteria for the simulation study, one line per criterion.
//!
//! Runs as a plain binary (`harness = false`). Each criterion prints
//! `PASS` or `FAIL` with the numbers behind the verdict. The process exits
//! nonzero only when `BEKKSHRINK_STRICT=1` and some criterion fails, so the
//! regular test run reports failures without hiding them. The p = 500 half
//! of criterion 8 runs only with `BEKKSHRINK_LARGE=1`.
//! `BEKKSHRINK_ONLY=4,6` limits the run to the listed criteria.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use bekkshrink::bekk::{expected_tr_sigma_sq_identity, gaussian_quadratic_second_moment, BekkParams, BekkSimulator};
use bekkshrink::experiments::{records_csv, replicate, run_scenario, summarize, summary_csv, LagRule, ScenarioConfig};
use bekkshrink::linalg::{eig_sym, lowrank_inv_sqrt, Matrix, SymMatrix};
use bekkshrink::metrics::{levy_distance, second_moment, EsdSample};
use bekkshrink::mplaw::{
    forward_esd, quest_invert, stieltjes, Complex, DiscreteSpectrum, MpLaw, MpModel, QuestOptions, QuestSolver,
};
use bekkshrink::rng::{stream, Purpose};

const SETTINGS: [(f64, f64); 4] = [(0.0, 0.0), (0.15, 0.25), (0.1, 0.65), (0.05, 0.9)];
const SWEEP: [usize; 4] = [3, 6, 12, 16];

struct Verdict {
    pass: bool,
    detail: String,
}

fn report(id: usize, name: &str, v: &Verdict) {
    println!(
        "criterion {id} ({name}): {} | {}",
        if v.pass { "PASS" } else { "FAIL" },
        v.detail
    );
}

/// Paper cell: mean and standard deviation over 100 replications.
#[derive(Clone, Copy)]
struct Cell(f64, f64);

impl Cell {
    fn tol(&self) -> f64 {
        3.0 * self.1 / 10.0
    }

    fn holds(&self, got: f64) -> bool {
        (got - self.0).abs() <= self.tol()
    }
}

/// Table rows as (raw, adjusted) over the four settings; `None` where the
/// table has no entry.
struct Table {
    metric_raw: usize,
    metric_tv: usize,
    raw: [Option<Cell>; 4],
    tv: [Option<Cell>; 4],
}

const TABLE1: Table = Table {
    metric_raw: 0,
    metric_tv: 1,
    raw: [
        None,
        Some(Cell(0.277, 0.078)),
        Some(Cell(0.413, 0.106)),
        Some(Cell(0.907, 0.195)),
    ],
    tv: [
        None,
        Some(Cell(0.089, 0.034)),
        Some(Cell(0.123, 0.033)),
        Some(Cell(0.215, 0.079)),
    ],
};

const TABLE2: Table = Table {
    metric_raw: 2,
    metric_tv: 3,
    raw: [
        Some(Cell(0.136, 0.041)),
        Some(Cell(0.411, 0.094)),
        Some(Cell(0.566, 0.124)),
        Some(Cell(1.109, 0.209)),
    ],
    tv: [
        Some(Cell(0.143, 0.047)),
        Some(Cell(0.217, 0.071)),
        Some(Cell(0.251, 0.071)),
        Some(Cell(0.313, 0.100)),
    ],
};

const TABLE3: Table = Table {
    metric_raw: 4,
    metric_tv: 5,
    raw: [
        Some(Cell(5.079, 0.048)),
        Some(Cell(6.668, 0.558)),
        Some(Cell(7.933, 0.894)),
        Some(Cell(12.810, 1.824)),
    ],
    tv: [
        Some(Cell(5.080, 0.049)),
        Some(Cell(5.219, 0.096)),
        Some(Cell(5.308, 0.078)),
        Some(Cell(6.433, 0.711)),
    ],
};

/// Scenario means for the four settings, indexed by metric.
type Means = [[f64; 6]; 4];

fn table_means(mp: LagRule) -> Means {
    let mut out = [[0.0; 6]; 4];
    for (k, &(a, b)) in SETTINGS.iter().enumerate() {
        let cfg = ScenarioConfig {
            a,
            b,
            m_p: mp,
            ..ScenarioConfig::default()
        };
        let run = run_scenario(&cfg, None).expect("scenario run");
        out[k] = summarize(&run.records).map(|m| m.mean);
    }
    out
}

struct TableCheck {
    cells_pass: bool,
    ordered: bool,
    line: String,
}

fn check_table(t: &Table, m: &Means) -> TableCheck {
    let mut cells_pass = true;
    let mut ordered = true;
    let mut parts = Vec::new();
    for k in 0..4 {
        let (raw, tv) = (m[k][t.metric_raw], m[k][t.metric_tv]);
        for (label, cell, got) in [("raw", t.raw[k], raw), ("tv", t.tv[k], tv)] {
            if let Some(c) = cell {
                let ok = c.holds(got);
                cells_pass &= ok;
                parts.push(format!(
                    "{label}{:?}={got:.3} vs {:.3}±{:.3}{}",
                    SETTINGS[k],
                    c.0,
                    c.tol(),
                    if ok { "" } else { "*" }
                ));
            }
        }
        if k > 0 && !(tv < raw) {
            ordered = false;
        }
    }
    TableCheck {
        cells_pass,
        ordered,
        line: parts.join(", "),
    }
}

/// Criteria 1-3: tables at the default lag count, then the sweep if needed.
fn tables() -> [Verdict; 3] {
    let mut runs: BTreeMap<String, Means> = BTreeMap::new();
    runs.insert(
        format!("auto={}", LagRule::Auto.resolve(100)),
        table_means(LagRule::Auto),
    );
    let tabs = [&TABLE1, &TABLE2, &TABLE3];
    let default_key = runs.keys().next().unwrap().clone();
    let need_sweep = tabs.iter().any(|t| !check_table(t, &runs[&default_key]).cells_pass);
    if need_sweep {
        for mp in SWEEP {
            runs.insert(format!("{mp}"), table_means(LagRule::Fixed(mp)));
        }
    }
    tabs.map(|t| {
        let checks: Vec<(String, TableCheck)> = runs.iter().map(|(k, m)| (k.clone(), check_table(t, m))).collect();
        let passing: Vec<&str> = checks
            .iter()
            .filter(|(_, c)| c.cells_pass)
            .map(|(k, _)| k.as_str())
            .collect();
        let ordered = checks.iter().all(|(_, c)| c.ordered);
        let mut detail = format!(
            "M_p values with all cells in tolerance: [{}]; adjusted < raw for every M_p: {ordered}",
            passing.join(" ")
        );
        for (k, c) in &checks {
            detail.push_str(&format!("; M_p {k}: {}", c.line));
        }
        Verdict {
            pass: !passing.is_empty() && ordered,
            detail,
        }
    })
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn theorem2_gap() -> Verdict {
    let cfg = ScenarioConfig {
        rho: 0.0,
        a: 0.05,
        b: 0.9,
        use_true_ab: true,
        ..ScenarioConfig::default()
    };
    let (mut bekk, mut iid) = (Vec::new(), Vec::new());
    for r in 0..100 {
        let out = replicate(&cfg, r).expect("replication");
        bekk.push(second_moment(&out.raw));
        iid.push(second_moment(&out.iid));
    }
    let (mb, _) = mean_se(&bekk);
    let (mi, si) = mean_se(&iid);
    let gap_ok = mb - mi >= 0.1;
    let iid_ok = (mi - 1.8).abs() <= 3.0 * si;
    Verdict {
        pass: gap_ok && iid_ok,
        detail: format!(
            "BEKK M2 {mb:.4}, iid M2 {mi:.4} (se {si:.4}); gap {:.4} >= 0.1: {gap_ok}; |iid - 1.8| <= 3se: {iid_ok}",
            mb - mi
        ),
    }
}

fn random_psd(p: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    let g = Matrix::from_fn(p, p, |_, _| StandardNormal.sample(rng));
    SymMatrix::symmetrized(&g * g.transpose() / p as f64).unwrap()
}

fn moment_oracles() -> Verdict {
    let mut rng = stream(11, 0, Purpose::Auxiliary);
    let mut parts = Vec::new();
    let mut pass = true;
    for _ in 0..5 {
        let p = rng.random_range(2..=20);
        let a = random_psd(p, &mut rng);
        let draws = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        let mut z = vec![0.0; p];
        for _ in 0..draws {
            for v in z.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            let mut q = 0.0;
            for j in 0..p {
                let mut row = 0.0;
                for i in 0..p {
                    row += a.get(i, j) * z[i];
                }
                q += z[j] * row;
            }
            let v = q * q;
            s += v;
            s2 += v * v;
        }
        let n = draws as f64;
        let mean = s / n;
        let se = ((s2 / n - mean * mean) / n).sqrt();
        let want = gaussian_quadratic_second_moment(&a);
        let ok = (mean - want).abs() <= 3.0 * se;
        pass &= ok;
        parts.push(format!("p={p}: {mean:.4} vs {want:.4} (se {se:.4})"));
    }

    let (p, a, b) = (50, 0.15, 0.25);
    let prm = BekkParams::new(a, b, SymMatrix::identity(p)).unwrap();
    let mut sim = BekkSimulator::new(&prm).unwrap();
    let mut rng = stream(12, 0, Purpose::Auxiliary);
    for _ in 0..2_000 {
        sim.advance(&mut rng).unwrap();
    }
    let (batches, per) = (200, 1_000);
    let mut bm = Vec::with_capacity(batches);
    for _ in 0..batches {
        let mut acc = 0.0;
        for _ in 0..per {
            sim.advance(&mut rng).unwrap();
            acc += sim.sigma().iter().map(|v| v * v).sum::<f64>();
        }
        bm.push(acc / per as f64);
    }
    let (mean, se) = mean_se(&bm);
    let want = expected_tr_sigma_sq_identity(a, b, p).unwrap();
    let ok = (mean - want).abs() <= 3.0 * se;
    pass &= ok;
    parts.push(format!(
        "E tr(Σ_t²) at p={p}: {mean:.3} vs {want:.3} (batch-means se {se:.3})"
    ));
    Verdict {
        pass,
        detail: parts.join("; "),
    }
}

/// Closed-form Stieltjes transform of the identity-population law.
fn mp_identity(y: f64, z: Complex) -> Complex {
    let d = ((z - 1.0 - y) * (z - 1.0 - y) - 4.0 * y).sqrt();
    [d, -d]
        .into_iter()
        .map(|r| (Complex::new(1.0 - y, 0.0) - z + r) / (2.0 * y * z))
        .max_by(|u, v| u.im.total_cmp(&v.im))
        .unwrap()
}

fn mp_exactness() -> Verdict {
    let mut rng = stream(13, 0, Purpose::Auxiliary);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let y = rng.random_range(0.1..2.0);
        let z = Complex::new(rng.random_range(-1.0..6.0), rng.random_range(1e-3..3.0));
        let model = MpModel::new(y, DiscreteSpectrum::point_mass(1.0)).unwrap();
        let got = stieltjes(&model, z).unwrap();
        worst = worst.max((got - mp_identity(y, z)).norm());
    }
    let stieltjes_ok = worst <= 1e-8;

    let law = MpLaw::new(&MpModel::new(0.8, DiscreteSpectrum::point_mass(1.0)).unwrap()).unwrap();
    let iv = &law.support()[0];
    let (lo, hi) = ((1.0 - 0.8f64.sqrt()).powi(2), (1.0 + 0.8f64.sqrt()).powi(2));
    let edge_err = (iv.left - lo).abs().max((iv.right - hi).abs());
    let esd = forward_esd(law.model(), 400).unwrap();
    let edges_ok =
        edge_err <= 1e-3 && law.support().len() == 1 && (esd.weights().iter().sum::<f64>() - 1.0).abs() < 1e-6;

    let exact = QuestOptions {
        solver: QuestSolver::LevenbergMarquardt,
        rel_tol: 1e-9,
        ..QuestOptions::default()
    };
    let mut w1s = Vec::new();
    for h in [
        DiscreteSpectrum::point_mass(1.0),
        DiscreteSpectrum::new(vec![1.0, 3.0], vec![0.5, 0.5]).unwrap(),
    ] {
        let law = MpLaw::new(&MpModel::new(0.8, h.clone()).unwrap()).unwrap();
        let levels: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let q: Vec<f64> = law.quantiles(&levels).unwrap().iter().map(|q| q.x()).collect();
        w1s.push(quest_invert(&q, 0.8, &exact).unwrap().spectrum.wasserstein1(&h));
    }
    let quest_ok = w1s.iter().all(|&w| w <= 0.05);
    Verdict {
        pass: stieltjes_ok && edges_ok && quest_ok,
        detail: format!(
            "max |m - closed form| {worst:.2e}; edge error {edge_err:.2e}; self-inversion W1 {:.2e} (point mass), {:.2e} (two atoms)",
            w1s[0], w1s[1]
        ),
    }
}

fn woodbury_exactness() -> Verdict {
    let mut rng = stream(14, 0, Purpose::Auxiliary);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = rng.random_range(2..=50);
        let m = rng.random_range(1..=10usize.min(p));
        let c = rng.random_range(0.05..2.0);
        let b = Matrix::from_fn(p, m, |_, _| StandardNormal.sample(&mut rng));
        let dense = SymMatrix::symmetrized(Matrix::identity(p, p) * c + &b * b.transpose()).unwrap();
        let oracle = eig_sym(&dense).unwrap().map_eigenvalues(|l| l.powf(-0.5));
        let fast = lowrank_inv_sqrt(c, &b).unwrap().to_dense();
        worst = worst.max((fast - &oracle).norm() / oracle.norm());
    }
    Verdict {
        pass: worst <= 1e-9,
        detail: format!("max relative Frobenius error {worst:.2e} over 100 instances"),
    }
}

fn levy_to_limit(p: usize, reps: u64) -> f64 {
    let cfg = ScenarioConfig {
        p,
        n: p * 5 / 4,
        a: 0.05,
        b: 0.9,
        ..ScenarioConfig::default()
    };
    let h = DiscreteSpectrum::from_samples(&eig_sym(&cfg.sigma_bar()).unwrap().ascending()).unwrap();
    let mut ds = Vec::new();
    for r in 0..reps {
        let out = replicate(&cfg, r).expect("replication");
        let y = p as f64 / out.adjusted.effective_n() as f64;
        let limit = forward_esd(&MpModel::new(y, h.clone()).unwrap(), 2000).unwrap();
        let esd = EsdSample::of(&out.adjusted.covariance).unwrap().to_spectrum();
        ds.push(levy_distance(&esd, &limit));
    }
    ds.iter().sum::<f64>() / ds.len() as f64
}

fn convergence_trend() -> Option<Verdict> {
    let small = levy_to_limit(100, 20);
    if std::env::var("BEKKSHRINK_LARGE").as_deref() != Ok("1") {
        println!("criterion 8 (convergence trend): NOT RUN | p=100 mean Levy distance {small:.4}; set BEKKSHRINK_LARGE=1 for the p=500 comparison");
        return None;
    }
    let large = levy_to_limit(500, 20);
    Some(Verdict {
        pass: large < small,
        detail: format!("mean Levy distance p=100: {small:.4}, p=500: {large:.4}"),
    })
}

fn determinism() -> Verdict {
    let cfg = ScenarioConfig {
        replications: 8,
        ..ScenarioConfig::default()
    };
    let outputs: Vec<String> = [1, 2, 8]
        .iter()
        .map(|&w| {
            let run = run_scenario(&cfg, Some(w)).expect("scenario run");
            records_csv(&run.records) + &summary_csv(&cfg, &run.records)
        })
        .collect();
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    Verdict {
        pass: same,
        detail: format!(
            "records and summary CSV identical under 1, 2 and 8 workers: {same} ({} bytes)",
            outputs[0].len()
        ),
    }
}

fn main() {
    let mut failed = Vec::new();
    let mut record = |id: usize, name: &str, v: Verdict| {
        report(id, name, &v);
        if !v.pass {
            failed.push(id);
        }
    };
    let only: Option<Vec<usize>> = std::env::var("BEKKSHRINK_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let wanted = |id: usize| only.as_ref().is_none_or(|o| o.contains(&id));
    let clock = std::time::Instant::now();
    if wanted(1) || wanted(2) || wanted(3) {
        let [t1, t2, t3] = tables();
        for (id, name, v) in [
            (1, "eigenvalue distance table", t1),
            (2, "spectrum estimation table", t2),
            (3, "Frobenius error table", t3),
        ] {
            if wanted(id) {
                record(id, name, v);
            }
        }
    }
    if wanted(4) {
        record(4, "second-moment gap", theorem2_gap());
    }
    if wanted(5) {
        record(5, "moment oracles", moment_oracles());
    }
    if wanted(6) {
        record(6, "MP machinery exactness", mp_exactness());
    }
    if wanted(7) {
        record(7, "low-rank inverse square root", woodbury_exactness());
    }
    if wanted(8) {
        if let Some(v) = convergence_trend() {
            record(8, "convergence trend", v);
        }
    }
    if wanted(9) {
        record(9, "determinism", determinism());
    }
    println!(
        "acceptance: {} failing criteria {:?} ({:.0} s)",
        failed.len(),
        failed,
        clock.elapsed().as_secs_f64()
    );
    if !failed.is_empty() && std::env::var("BEKKSHRINK_STRICT").as_deref() == Ok("1") {
        std::process::exit(1);
    }
}
