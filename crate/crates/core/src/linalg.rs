//! Dense symmetric linear algebra.
//!
//! Storage is `nalgebra::DMatrix` (column-major). The symmetric eigensolver is
//! nalgebra's Householder tridiagonalization followed by implicit-shift QR; the
//! Cholesky factor and the low-rank inverse square root are implemented here.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

const SYMMETRY_TOL: f64 = 1e-12;

/// Dense symmetric `p x p` matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    inner: Matrix,
}

impl SymMatrix {
    /// Validates symmetry and finiteness.
    pub fn new(m: Matrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                actual: m.ncols(),
            });
        }
        let p = m.nrows();
        for j in 0..p {
            for i in 0..p {
                let v = m[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if i < j {
                    let gap = (v - m[(j, i)]).abs();
                    if gap > SYMMETRY_TOL * (1.0 + v.abs()) {
                        return Err(Error::NotSymmetric { row: i, col: j, gap });
                    }
                }
            }
        }
        Ok(Self { inner: m })
    }

    /// Averages `m` with its transpose. Use for results of floating-point
    /// products that are symmetric in exact arithmetic.
    pub fn symmetrized(m: Matrix) -> Result<Self> {
        let t = m.transpose();
        Self::new((m + t) * 0.5)
    }

    /// Builds from the upper triangle `f(i, j)`, `i <= j`.
    pub fn from_fn(p: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(p, p);
        for j in 0..p {
            for i in 0..=j {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self { inner: m }
    }

    pub fn identity(p: usize) -> Self {
        Self {
            inner: Matrix::identity(p, p),
        }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self {
            inner: Matrix::from_diagonal(&Vector::from_column_slice(d)),
        }
    }

    /// Toeplitz matrix with entries `rho^|i-j|`.
    pub fn toeplitz(p: usize, rho: f64) -> Self {
        Self::from_fn(p, |i, j| rho.powi((j - i) as i32))
    }

    /// `(1/n) X Xᵀ` for a `p x n` data matrix whose columns are observations.
    pub fn sample_covariance(x: &Matrix) -> Result<Self> {
        if x.ncols() == 0 {
            return Err(Error::InvalidParameter("sample covariance of an empty panel".into()));
        }
        let n = x.ncols() as f64;
        Self::symmetrized(x * x.transpose() / n)
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.inner
    }

    pub fn into_matrix(self) -> Matrix {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    /// `p x p` entries in row-major order (equal to column-major by symmetry).
    pub fn as_slice(&self) -> &[f64] {
        self.inner.as_slice()
    }
}

/// Eigenvalues sorted descending with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    pub eigenvalues: Vector,
    pub eigenvectors: Matrix,
}

impl SpectralDecomp {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V f(Λ) Vᵀ`.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let scaled = Vector::from_iterator(self.dim(), self.eigenvalues.iter().map(|&l| f(l)));
        self.with_eigenvalues(&scaled)
    }

    /// `V diag(d) Vᵀ`.
    pub fn with_eigenvalues(&self, d: &Vector) -> Matrix {
        let mut vd = self.eigenvectors.clone();
        for (j, mut col) in vd.column_iter_mut().enumerate() {
            col *= d[j];
        }
        vd * self.eigenvectors.transpose()
    }

    pub fn reconstruct(&self) -> Matrix {
        self.with_eigenvalues(&self.eigenvalues)
    }

    /// Eigenvalues in ascending order.
    pub fn ascending(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.eigenvalues.iter().copied().collect();
        v.reverse();
        v
    }
}

pub fn eig_sym(a: &SymMatrix) -> Result<SpectralDecomp> {
    let p = a.dim();
    if p == 0 {
        return Ok(SpectralDecomp {
            eigenvalues: Vector::zeros(0),
            eigenvectors: Matrix::zeros(0, 0),
        });
    }
    let max_iter = 1000 * p.max(10);
    let eig = SymmetricEigen::try_new(a.as_matrix().clone(), f64::EPSILON, max_iter).ok_or_else(|| {
        Error::EigenNoConvergence {
            dim: p,
            residual: f64::NAN,
        }
    })?;
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = Vector::from_iterator(p, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut eigenvectors = Matrix::zeros(p, p);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    let out = SpectralDecomp {
        eigenvalues,
        eigenvectors,
    };
    let residual = (out.reconstruct() - a.as_matrix()).norm();
    if !(residual <= 1e-8 * (1.0 + a.frobenius_norm())) {
        return Err(Error::EigenNoConvergence { dim: p, residual });
    }
    Ok(out)
}

/// Lower-triangular Cholesky factor stored row-major.
#[derive(Debug, Clone)]
pub struct LowerTriangular {
    dim: usize,
    rows: Vec<f64>,
}

impl LowerTriangular {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i * self.dim + j]
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_row_slice(self.dim, self.dim, &self.rows)
    }

    /// `L x`.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        lower_mul_vec(&self.rows, self.dim, x, out);
    }
}

pub fn cholesky(a: &SymMatrix) -> Result<LowerTriangular> {
    let p = a.dim();
    let mut rows = vec![0.0; p * p];
    cholesky_into(a.as_slice(), p, &mut rows)?;
    Ok(LowerTriangular { dim: p, rows })
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..n {
        s += a[k] * b[k];
    }
    s
}

/// Row-major Cholesky into `l` (`p*p`, upper part left at zero). `a` is read
/// row-major; for symmetric input any layout works.
pub(crate) fn cholesky_into(a: &[f64], p: usize, l: &mut [f64]) -> Result<()> {
    debug_assert_eq!(a.len(), p * p);
    debug_assert_eq!(l.len(), p * p);
    for i in 0..p {
        for j in 0..=i {
            let (head, tail) = l.split_at_mut(i * p);
            let row_i = &tail[..p];
            let s = if i == j {
                a[i * p + i] - dot(&row_i[..j], &row_i[..j])
            } else {
                a[i * p + j] - dot(&row_i[..j], &head[j * p..j * p + j])
            };
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                }
                tail[i] = s.sqrt();
            } else {
                let ljj = head[j * p + j];
                tail[j] = s / ljj;
            }
        }
        for v in &mut l[i * p + i + 1..(i + 1) * p] {
            *v = 0.0;
        }
    }
    Ok(())
}

pub(crate) fn lower_mul_vec(l: &[f64], p: usize, x: &[f64], out: &mut [f64]) {
    for i in 0..p {
        out[i] = dot(&l[i * p..i * p + i + 1], &x[..i + 1]);
    }
}

/// Spectral norm (largest absolute eigenvalue) from a decomposition.
fn spectral_norm(d: &SpectralDecomp) -> f64 {
    d.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()))
}

/// Symmetric positive semidefinite square root.
pub fn sqrt_sym(a: &SymMatrix) -> Result<SymMatrix> {
    let d = eig_sym(a)?;
    let norm = spectral_norm(&d);
    if let Some(&neg) = d.eigenvalues.iter().find(|&&l| l < -1e-6 * norm) {
        return Err(Error::NegativeEigenvalue { value: neg, norm });
    }
    SymMatrix::symmetrized(d.map_eigenvalues(|l| l.max(0.0).sqrt()))
}

/// Factored `(cI + B Bᵀ)^{-1/2} = c^{-1/2} I + U diag(d) Uᵀ`.
#[derive(Debug, Clone)]
pub struct LowRankInvSqrt {
    pub dim: usize,
    /// `c^{-1/2}`.
    pub base_scale: f64,
    /// `p x r`, orthonormal columns.
    pub basis: Matrix,
    /// `(λ_j + c)^{-1/2} - c^{-1/2}`, all nonpositive.
    pub coeffs: Vector,
}

impl LowRankInvSqrt {
    pub fn rank(&self) -> usize {
        self.coeffs.len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vector> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        let mut out = Vector::from_column_slice(x) * self.base_scale;
        for (j, col) in self.basis.column_iter().enumerate() {
            let w = self.coeffs[j] * dot(col.as_slice(), x);
            out.axpy(w, &col, 1.0);
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::identity(self.dim, self.dim) * self.base_scale;
        for (j, col) in self.basis.column_iter().enumerate() {
            m.ger(self.coeffs[j], &col, &col, 1.0);
        }
        m
    }
}

/// Inverse square root of `cI + B Bᵀ` through the `M x M` Gram matrix `BᵀB`.
/// Gram eigenvalues below `1e-12 * max` are treated as zero directions.
pub fn lowrank_inv_sqrt(c: f64, b: &Matrix) -> Result<LowRankInvSqrt> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("base scale must be positive, got {c}")));
    }
    let p = b.nrows();
    let base_scale = c.sqrt().recip();
    let empty = LowRankInvSqrt {
        dim: p,
        base_scale,
        basis: Matrix::zeros(p, 0),
        coeffs: Vector::zeros(0),
    };
    if b.ncols() == 0 {
        return Ok(empty);
    }
    let gram = SymMatrix::symmetrized(b.transpose() * b)?;
    let eig = eig_sym(&gram)?;
    let top = eig.eigenvalues[0];
    if !(top > 0.0) {
        return Ok(empty);
    }
    let keep: Vec<usize> = (0..eig.dim()).filter(|&j| eig.eigenvalues[j] > 1e-12 * top).collect();
    let mut basis = Matrix::zeros(p, keep.len());
    let mut coeffs = Vector::zeros(keep.len());
    for (k, &j) in keep.iter().enumerate() {
        let lambda = eig.eigenvalues[j];
        let col = b * eig.eigenvectors.column(j) / lambda.sqrt();
        basis.set_column(k, &col);
        coeffs[k] = (lambda + c).sqrt().recip() - base_scale;
    }
    Ok(LowRankInvSqrt {
        dim: p,
        base_scale,
        basis,
        coeffs,
    })
}

pub fn apply_inv_sqrt(f: &LowRankInvSqrt, x: &[f64]) -> Result<Vector> {
    f.apply(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
        Matrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
    }

    fn random_orthogonal(rng: &mut ChaCha8Rng, p: usize) -> Matrix {
        random_matrix(rng, p, p).qr().q()
    }

    fn dense_inv_sqrt(c: f64, b: &Matrix) -> Matrix {
        let p = b.nrows();
        let m = Matrix::identity(p, p) * c + b * b.transpose();
        let d = eig_sym(&SymMatrix::symmetrized(m).unwrap()).unwrap();
        d.map_eigenvalues(|l| l.sqrt().recip())
    }

    #[test]
    fn identity_and_diagonal_eigenvalues() {
        let d = eig_sym(&SymMatrix::identity(3)).unwrap();
        assert_eq!(d.eigenvalues.as_slice(), &[1.0, 1.0, 1.0]);
        let d = eig_sym(&SymMatrix::from_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        for (got, want) in d.eigenvalues.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn recovers_known_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = random_orthogonal(&mut rng, 8);
        let want = [9.0, 5.5, 4.0, 2.0, 1.0, 0.5, -0.25, -3.0];
        let a = &q * Matrix::from_diagonal(&Vector::from_column_slice(&want)) * q.transpose();
        let d = eig_sym(&SymMatrix::symmetrized(a).unwrap()).unwrap();
        for (got, want) in d.eigenvalues.iter().zip(want) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn decomposition_residuals_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 0..200 {
            let p = 2 + k % 39;
            let g = random_matrix(&mut rng, p, p);
            let a = SymMatrix::symmetrized(&g + g.transpose()).unwrap();
            let d = eig_sym(&a).unwrap();
            let recon = (d.reconstruct() - a.as_matrix()).norm();
            assert!(recon <= 1e-8 * (1.0 + a.frobenius_norm()));
            let ortho = (d.eigenvectors.transpose() * &d.eigenvectors - Matrix::identity(p, p)).norm();
            assert!(ortho <= 1e-10 * p as f64);
            assert!(d.eigenvalues.as_slice().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn cholesky_examples() {
        let l = cholesky(&SymMatrix::identity(4)).unwrap();
        assert_eq!(l.to_matrix(), Matrix::identity(4, 4));

        let a = SymMatrix::new(Matrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 3.0])).unwrap();
        let l = cholesky(&a).unwrap().to_matrix();
        let want = Matrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 2f64.sqrt()]);
        assert!((l - want).norm() < 1e-15);

        let bad = SymMatrix::from_diagonal(&[1.0, -1e-8, 2.0]);
        match cholesky(&bad) {
            Err(Error::NotPositiveDefinite { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected pivot failure, got {other:?}"),
        }
    }

    #[test]
    fn cholesky_reconstructs_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [1, 2, 5, 17, 40] {
            let g = random_matrix(&mut rng, p, p + 3);
            let a = SymMatrix::symmetrized(&g * g.transpose()).unwrap();
            let l = cholesky(&a).unwrap().to_matrix();
            assert!((&l * l.transpose() - a.as_matrix()).norm() <= 1e-10 * a.frobenius_norm());
        }
    }

    #[test]
    fn sqrt_examples() {
        let b = sqrt_sym(&SymMatrix::from_diagonal(&[4.0; 3])).unwrap();
        assert!((b.as_matrix() - Matrix::identity(3, 3) * 2.0).norm() < 1e-14);
        let b = sqrt_sym(&SymMatrix::from_diagonal(&[9.0, 4.0])).unwrap();
        assert!((b.as_matrix() - Matrix::from_diagonal(&Vector::from_vec(vec![3.0, 2.0]))).norm() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_matrix(&mut rng, 12, 6);
        let a = SymMatrix::symmetrized(&g * g.transpose()).unwrap();
        let b = sqrt_sym(&a).unwrap();
        assert!((b.as_matrix() * b.as_matrix() - a.as_matrix()).norm() <= 1e-8 * (1.0 + a.frobenius_norm()));
        // cholesky-reconstructed input gives the same root
        let l = cholesky(&SymMatrix::symmetrized(a.as_matrix() + Matrix::identity(12, 12)).unwrap())
            .unwrap()
            .to_matrix();
        let rebuilt = SymMatrix::symmetrized(&l * l.transpose()).unwrap();
        let direct = sqrt_sym(&SymMatrix::symmetrized(a.as_matrix() + Matrix::identity(12, 12)).unwrap()).unwrap();
        assert!((sqrt_sym(&rebuilt).unwrap().as_matrix() - direct.as_matrix()).norm() < 1e-9);
    }

    #[test]
    fn sqrt_rejects_negative_definite() {
        let a = SymMatrix::from_diagonal(&[1.0, -0.5]);
        assert!(matches!(sqrt_sym(&a), Err(Error::NegativeEigenvalue { .. })));
    }

    #[test]
    fn lowrank_zero_correction() {
        let f = lowrank_inv_sqrt(0.25, &Matrix::zeros(5, 3)).unwrap();
        assert_eq!(f.rank(), 0);
        assert!((f.base_scale - 2.0).abs() < 1e-15);
        let f = lowrank_inv_sqrt(1.0, &Matrix::zeros(4, 2)).unwrap();
        let x = [1.0, -2.0, 3.0, 0.5];
        assert_eq!(f.apply(&x).unwrap().as_slice(), &x);
        assert_eq!(f.apply(&[0.0; 4]).unwrap().as_slice(), &[0.0; 4]);
        assert!(lowrank_inv_sqrt(0.0, &Matrix::zeros(3, 1)).is_err());
        assert!(lowrank_inv_sqrt(-1.0, &Matrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn lowrank_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let b = random_matrix(&mut rng, 6, 2);
        let f = lowrank_inv_sqrt(0.3, &b).unwrap();
        assert!(f.coeffs.iter().all(|&d| d <= 0.0));
        let dense = dense_inv_sqrt(0.3, &b);
        assert!((f.to_dense() - &dense).norm() < 1e-10);
        let x: Vec<f64> = (0..6).map(|_| rng.sample(StandardNormal)).collect();
        let got = f.apply(&x).unwrap();
        let want = &dense * Vector::from_column_slice(&x);
        assert!((got - want).norm() < 1e-10);
    }

    #[test]
    fn lowrank_drops_duplicated_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let col: Vec<f64> = (0..7).map(|_| rng.sample(StandardNormal)).collect();
        let other: Vec<f64> = (0..7).map(|_| rng.sample(StandardNormal)).collect();
        let b = Matrix::from_columns(&[
            Vector::from_column_slice(&col),
            Vector::from_column_slice(&other),
            Vector::from_column_slice(&col),
        ]);
        let f = lowrank_inv_sqrt(0.7, &b).unwrap();
        assert_eq!(f.rank(), 2);
        assert!((f.to_dense() - dense_inv_sqrt(0.7, &b)).norm() < 1e-10);
    }

    #[test]
    fn lowrank_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let p = rng.random_range(2..=50);
            let m = rng.random_range(1..=10.min(p - 1).max(1));
            let c = rng.random_range(0.05..2.0);
            let b = random_matrix(&mut rng, p, m);
            let f = lowrank_inv_sqrt(c, &b).unwrap();
            let dense = dense_inv_sqrt(c, &b);
            let x = Vector::from_fn(p, |_, _| rng.sample(StandardNormal));
            let got = f.apply(x.as_slice()).unwrap();
            let want = &dense * &x;
            assert!((&got - &want).norm() <= 1e-9 * want.norm());
        }
    }
}
