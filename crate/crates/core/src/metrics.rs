use crate::error::{Error, Result};
use crate::linalg::{eig_sym, SymMatrix};
use crate::mplaw::DiscreteSpectrum;

/// Sorted (ascending) eigenvalues of one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EsdSample {
    eigs: Vec<f64>,
}

impl EsdSample {
    pub fn new(mut eigs: Vec<f64>) -> Result<Self> {
        if eigs.is_empty() || eigs.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter("ESD needs finite eigenvalues".into()));
        }
        eigs.sort_by(f64::total_cmp);
        Ok(Self { eigs })
    }

    pub fn of(s: &SymMatrix) -> Result<Self> {
        Self::new(eig_sym(s)?.ascending())
    }

    pub fn eigs(&self) -> &[f64] {
        &self.eigs
    }

    pub fn len(&self) -> usize {
        self.eigs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigs.is_empty()
    }

    pub fn to_spectrum(&self) -> DiscreteSpectrum {
        DiscreteSpectrum::from_samples(&self.eigs).expect("ESD is nonempty and finite")
    }
}

/// Does `F(x - ε) - ε <= G(x) <= F(x + ε) + ε` hold everywhere? Both sides
/// are right-continuous steps, so `G(x) - F(x + ε)` peaks at a jump of `G`
/// and `F(x - ε) - G(x)` at a shifted jump of `F`.
fn within_band(f: &DiscreteSpectrum, g: &DiscreteSpectrum, eps: f64) -> bool {
    let slack = 1e-12;
    let upper = g.locations().iter().all(|&x| g.cdf(x) - f.cdf(x + eps) <= eps + slack);
    upper && f.locations().iter().all(|&t| f.cdf(t) - g.cdf(t + eps) <= eps + slack)
}

/// Levy distance, to `1e-6` by bisection on `ε` (exactly `0` for equal
/// distributions).
pub fn levy_distance(f: &DiscreteSpectrum, g: &DiscreteSpectrum) -> f64 {
    if within_band(f, g, 0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if within_band(f, g, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `√Σ (a_i - b_i)²` over rank-matched eigenvalues.
pub fn eig_l2_distance(a: &EsdSample, b: &EsdSample) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(a.eigs
        .iter()
        .zip(&b.eigs)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// [`eig_l2_distance`] divided by `√p`.
pub fn eig_rms_distance(a: &EsdSample, b: &EsdSample) -> Result<f64> {
    Ok(eig_l2_distance(a, b)? / (a.len() as f64).sqrt())
}

pub fn frobenius_error(est: &SymMatrix, truth: &SymMatrix) -> Result<f64> {
    if est.dim() != truth.dim() {
        return Err(Error::DimensionMismatch {
            expected: truth.dim(),
            actual: est.dim(),
        });
    }
    Ok((est.as_matrix() - truth.as_matrix()).norm())
}

/// `tr(S²)/p`.
pub fn second_moment(s: &SymMatrix) -> f64 {
    let x = s.as_slice();
    x.iter().map(|v| v * v).sum::<f64>() / s.dim() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn esd(v: &[f64]) -> DiscreteSpectrum {
        DiscreteSpectrum::from_samples(v).unwrap()
    }

    #[test]
    fn levy_examples() {
        let a = esd(&[0.0]);
        let b = esd(&[0.5]);
        assert!((levy_distance(&a, &b) - 0.5).abs() < 1e-6);
        let f = esd(&[0.1, 0.7, 1.3, 2.0]);
        assert_eq!(levy_distance(&f, &f), 0.0);
        // far apart masses saturate at the vertical gap
        assert!((levy_distance(&esd(&[0.0]), &esd(&[10.0])) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn distance_examples() {
        let a = EsdSample::new(vec![1.0, 2.0, 3.0]).unwrap();
        let b = EsdSample::new(vec![5.0, 2.0, 1.0]).unwrap();
        assert_eq!(eig_l2_distance(&a, &b).unwrap(), 2.0);
        assert_eq!(eig_l2_distance(&a, &a).unwrap(), 0.0);
        assert!(eig_l2_distance(&a, &EsdSample::new(vec![1.0]).unwrap()).is_err());
        let i = SymMatrix::identity(4);
        let two = SymMatrix::from_diagonal(&[2.0; 4]);
        assert_eq!(frobenius_error(&i, &two).unwrap(), 2.0);
        assert_eq!(frobenius_error(&i, &i).unwrap(), 0.0);
        assert_eq!(second_moment(&SymMatrix::identity(7)), 1.0);
    }

    #[test]
    fn second_moment_matches_eigenvalues() {
        let s = SymMatrix::toeplitz(12, 0.6);
        let eigs = eig_sym(&s).unwrap().eigenvalues;
        let via_eigs = eigs.iter().map(|l| l * l).sum::<f64>() / 12.0;
        assert!((second_moment(&s) - via_eigs).abs() < 1e-8);
    }

    fn sample() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..6.0, 1..12)
    }

    proptest! {
        #[test]
        fn levy_is_symmetric_and_triangular(a in sample(), b in sample(), c in sample()) {
            let (fa, fb, fc) = (esd(&a), esd(&b), esd(&c));
            let ab = levy_distance(&fa, &fb);
            prop_assert!((ab - levy_distance(&fb, &fa)).abs() <= 2e-7);
            prop_assert!(ab <= 1.0 + 1e-12);
            prop_assert!(ab <= levy_distance(&fa, &fc) + levy_distance(&fc, &fb) + 4e-7);
            prop_assert_eq!(levy_distance(&fa, &fa), 0.0);
        }

        #[test]
        fn l2_is_a_metric(n in 1usize..10, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || EsdSample::new((0..n).map(|_| rng.random_range(0.0..5.0)).collect()).unwrap();
            let (a, b, c) = (draw(), draw(), draw());
            let ab = eig_l2_distance(&a, &b).unwrap();
            prop_assert_eq!(ab, eig_l2_distance(&b, &a).unwrap());
            prop_assert!(ab <= eig_l2_distance(&a, &c).unwrap() + eig_l2_distance(&c, &b).unwrap() + 1e-12);
        }

        #[test]
        fn frobenius_is_a_metric(p in 1usize..6, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || SymMatrix::from_fn(p, |_, _| rng.random_range(-1.0..1.0));
            let (a, b, c) = (draw(), draw(), draw());
            let ab = frobenius_error(&a, &b).unwrap();
            prop_assert!((ab - frobenius_error(&b, &a).unwrap()).abs() < 1e-15);
            prop_assert!(ab <= frobenius_error(&a, &c).unwrap() + frobenius_error(&c, &b).unwrap() + 1e-12);
        }
    }
}
