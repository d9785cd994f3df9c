//! Dense complex matrix/vector algebra for small dimensions.
//!
//! Everything here is plain row-major storage over `num_complex::Complex64`
//! with hand-rolled kernels: products, Kronecker products, partial traces,
//! adjoints, a cyclic Jacobi eigensolver for Hermitian matrices, and seeded
//! Haar-random unitaries. All values are immutable after construction and
//! every operation is a pure function, so concurrent reads are safe.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Shorthand for a real complex scalar.
#[inline]
pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Default tolerance for Hermiticity and eigenvalue checks.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("entry count {got} does not match {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, got: usize },
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("vector norm {norm} is not 1 within {tol}")]
    NotNormalized { norm: f64, tol: f64 },
    #[error("eigensolver did not converge after {0} sweeps")]
    EigNoConvergence(usize),
}

/// Which tensor factor of a receiver ⊗ environment operator to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Receiver,
    Environment,
}

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Serializes as `{rows, cols, data}` with entries as `[re, im]` pairs, the
/// shared wire shape for complex matrices.
impl serde::Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("ComplexMatrix", 3)?;
        s.serialize_field("rows", &self.rows)?;
        s.serialize_field("cols", &self.cols)?;
        let data: Vec<Vec<[f64; 2]>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| [self.get(i, j).re, self.get(i, j).im]).collect())
            .collect();
        s.serialize_field("data", &data)?;
        s.end()
    }
}

impl ComplexMatrix {
    /// Build a matrix from row-major entries, checking shape and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, TensorError> {
        if data.len() != rows * cols {
            return Err(TensorError::ShapeMismatch { rows, cols, got: data.len() });
        }
        if let Some(idx) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(TensorError::NonFinite(idx));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = cr(1.0);
        }
        m
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self, TensorError> {
        Self::new(rows, cols, entries.iter().map(|&r| cr(r)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Projector |i⟩⟨i| in dimension `dim`.
    pub fn basis_projector(dim: usize, i: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        m.data[i * dim + i] = cr(1.0);
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in sub");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.data[i * self.cols + k];
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                let row = i * other.cols;
                let orow = k * other.cols;
                for j in 0..other.cols {
                    out.data[row + j] += aik * other.data[orow + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matvec");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Tr(self · other), computed without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch in trace_product");
        assert_eq!(self.rows, other.cols, "outer dimension mismatch in trace_product");
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.get(i, k) * other.get(k, i);
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in diff");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..=i {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.adjoint().matmul(self).max_abs_diff(&Self::identity(self.rows)) <= tol
    }

    /// Average out the anti-Hermitian part. Used to stop round-off drift on
    /// operators that are Hermitian by construction.
    pub fn hermitian_part(&self) -> Self {
        debug_assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * 0.5
        })
    }
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ia in 0..a.rows() {
        for ja in 0..a.cols() {
            let av = a.get(ia, ja);
            if av.norm_sqr() == 0.0 {
                continue;
            }
            for ib in 0..b.rows() {
                for jb in 0..b.cols() {
                    out.set(ia * b.rows() + ib, ja * b.cols() + jb, av * b.get(ib, jb));
                }
            }
        }
    }
    out
}

/// Partial trace of an operator on receiver ⊗ environment.
///
/// The joint basis index convention is receiver-major: |b⟩⊗|e⟩ sits at flat
/// index `b * d_e + e`. This single convention is shared by every module.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<ComplexMatrix, TensorError> {
    let (d_b, d_e) = dims;
    let n = d_b * d_e;
    if !m.is_square() {
        return Err(TensorError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if m.rows() != n {
        return Err(TensorError::DimensionMismatch(format!(
            "operator of size {} does not factor as {}x{}",
            m.rows(),
            d_b,
            d_e
        )));
    }
    let out = match keep {
        Subsystem::Receiver => ComplexMatrix::from_fn(d_b, d_b, |b, bp| {
            (0..d_e).map(|e| m.get(b * d_e + e, bp * d_e + e)).sum()
        }),
        Subsystem::Environment => ComplexMatrix::from_fn(d_e, d_e, |e, ep| {
            (0..d_b).map(|b| m.get(b * d_e + e, b * d_e + ep)).sum()
        }),
    };
    Ok(out)
}

/// True iff `m` is Hermitian within `tol` and all eigenvalues are ≥ −tol.
pub fn is_psd(m: &ComplexMatrix, tol: f64) -> Result<bool, TensorError> {
    if !m.is_square() {
        return Err(TensorError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if !m.is_hermitian(tol) {
        return Ok(false);
    }
    let evals = hermitian_eigenvalues(m)?;
    Ok(evals.iter().all(|&l| l >= -tol))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>, TensorError> {
    Ok(hermitian_eigh(m)?.0)
}

/// Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues ascending and the unitary whose columns are the
/// matching eigenvectors, so `m = V diag(λ) V†` up to round-off. Only the
/// Hermitian part of `m` enters the iteration.
pub fn hermitian_eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), TensorError> {
    if !m.is_square() {
        return Err(TensorError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    if n == 0 {
        return Ok((vec![], ComplexMatrix::zeros(0, 0)));
    }
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let stop = 1e-14 * scale;

    const MAX_SWEEPS: usize = 64;
    for _sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a.get(p, q).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= stop {
            return Ok(sorted_eigh(a, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let abs = apq.norm();
                if abs <= stop / (n as f64) {
                    continue;
                }
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                // Phase factor turning the (p,q) entry real, then a real
                // Jacobi rotation zeroing it.
                let u = apq / abs;
                let tau = (app - aqq) / (2.0 * abs);
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // W = diag(1, conj(u)) * [[c, s], [-s, c]] on rows/cols (p,q).
                let wpp = cr(c);
                let wpq = cr(s);
                let wqp = -u.conj() * s;
                let wqq = u.conj() * c;
                // columns: A <- A W, V <- V W
                for r in 0..n {
                    let arp = a.get(r, p);
                    let arq = a.get(r, q);
                    a.set(r, p, arp * wpp + arq * wqp);
                    a.set(r, q, arp * wpq + arq * wqq);
                    let vrp = v.get(r, p);
                    let vrq = v.get(r, q);
                    v.set(r, p, vrp * wpp + vrq * wqp);
                    v.set(r, q, vrp * wpq + vrq * wqq);
                }
                // rows: A <- W† A
                for r in 0..n {
                    let apr = a.get(p, r);
                    let aqr = a.get(q, r);
                    a.set(p, r, wpp.conj() * apr + wqp.conj() * aqr);
                    a.set(q, r, wpq.conj() * apr + wqq.conj() * aqr);
                }
                // keep the worked pair exactly Hermitian
                a.set(p, q, a.get(q, p).conj());
                a.set(p, p, cr(a.get(p, p).re));
                a.set(q, q, cr(a.get(q, q).re));
            }
        }
    }
    Err(TensorError::EigNoConvergence(MAX_SWEEPS))
}

fn sorted_eigh(a: ComplexMatrix, v: ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = a.rows();
    let mut order: Vec<usize> = (0..n).collect();
    let evals: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).expect("finite eigenvalues"));
    let sorted_vals: Vec<f64> = order.iter().map(|&i| evals[i]).collect();
    let sorted_vecs = ComplexMatrix::from_fn(n, n, |r, c| v.get(r, order[c]));
    (sorted_vals, sorted_vecs)
}

/// Haar-distributed random unitary, deterministic for a fixed seed.
///
/// Orthonormalizes a seeded complex Gaussian matrix column by column
/// (modified Gram–Schmidt), which fixes the phase convention by keeping the
/// diagonal of the implicit triangular factor positive real.
pub fn haar_random_unitary(d: usize, seed: u64) -> ComplexMatrix {
    assert!(d >= 1, "dimension must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    };
    let mut cols: Vec<Vec<C64>> = (0..d)
        .map(|_| (0..d).map(|_| draw(&mut rng)).collect())
        .collect();
    let mut j = 0;
    while j < d {
        // two orthogonalization passes for numerical stability
        for _ in 0..2 {
            for k in 0..j {
                let proj: C64 = (0..d).map(|r| cols[k][r].conj() * cols[j][r]).sum();
                for r in 0..d {
                    let delta = proj * cols[k][r];
                    cols[j][r] -= delta;
                }
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            // essentially impossible for Gaussian draws; redraw deterministically
            cols[j] = (0..d).map(|_| draw(&mut rng)).collect();
            continue;
        }
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
        j += 1;
    }
    ComplexMatrix::from_fn(d, d, |r, c| cols[c][r])
}

/// Unit-norm complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// Wrap amplitudes, requiring Euclidean norm 1 within 1e-12.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self, TensorError> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(TensorError::NotNormalized { norm, tol: 1e-12 });
        }
        if let Some(idx) = amplitudes.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(TensorError::NonFinite(idx));
        }
        Ok(Self { amplitudes })
    }

    /// Normalize arbitrary amplitudes into a state.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self, TensorError> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(TensorError::NotNormalized { norm, tol: 1e-12 });
        }
        Self::new(amplitudes.into_iter().map(|z| z / norm).collect())
    }

    /// Computational basis state |i⟩.
    pub fn basis(dim: usize, i: usize) -> Self {
        assert!(i < dim, "basis index out of range");
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[i] = cr(1.0);
        Self { amplitudes }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in inner product");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |self⟩ ⊗ |other⟩ with receiver-major flat indexing.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Self { amplitudes }
    }

    /// Rank-one projector |self⟩⟨self|.
    pub fn projector(&self) -> ComplexMatrix {
        let d = self.dim();
        ComplexMatrix::from_fn(d, d, |i, j| self.amplitudes[i] * self.amplitudes[j].conj())
    }

    /// Column-vector view as a d×1 matrix.
    pub fn as_column(&self) -> ComplexMatrix {
        ComplexMatrix { rows: self.dim(), cols: 1, data: self.amplitudes.clone() }
    }
}

/// Projector onto the span of an orthonormal family, Σ|v⟩⟨v|.
pub fn span_projector(vectors: &[StateVector]) -> ComplexMatrix {
    assert!(!vectors.is_empty(), "empty family has no span");
    let d = vectors[0].dim();
    let mut p = ComplexMatrix::zeros(d, d);
    for v in vectors {
        p = p.add(&v.projector());
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let a = random_matrix(n, n, seed);
        a.add(&a.adjoint()).scale(cr(0.5))
    }

    /// Independent Kronecker oracle: direct four-index expansion.
    fn kron_oracle(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(a.rows() * b.rows(), a.cols() * b.cols(), |i, j| {
            let (ia, ib) = (i / b.rows(), i % b.rows());
            let (ja, jb) = (j / b.cols(), j % b.cols());
            a.get(ia, ja) * b.get(ib, jb)
        })
    }

    #[test]
    fn kron_identity_case() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_basis_projectors() {
        let p0 = ComplexMatrix::basis_projector(2, 0);
        let p1 = ComplexMatrix::basis_projector(2, 1);
        // |0⟩⟨0| ⊗ |1⟩⟨1| = |01⟩⟨01|, flat index 0*2+1 = 1
        assert_eq!(kron(&p0, &p1), ComplexMatrix::basis_projector(4, 1));
    }

    #[test]
    fn kron_mixed_product_property() {
        for seed in 0..8 {
            let a = random_matrix(2, 2, 4 * seed);
            let b = random_matrix(2, 2, 4 * seed + 1);
            let c = random_matrix(2, 2, 4 * seed + 2);
            let d = random_matrix(2, 2, 4 * seed + 3);
            let lhs = kron(&a, &b).matmul(&kron(&c, &d));
            let rhs = kron_oracle(&a.matmul(&c), &b.matmul(&d));
            assert!(lhs.max_abs_diff(&rhs) <= 1e-13);
        }
    }

    #[test]
    fn kron_matches_oracle() {
        let a = random_matrix(3, 2, 7);
        let b = random_matrix(2, 4, 8);
        assert!(kron(&a, &b).max_abs_diff(&kron_oracle(&a, &b)) == 0.0);
    }

    #[test]
    fn kron_is_associative() {
        for seed in 0..8 {
            let a = random_matrix(2, 3, 3 * seed + 70);
            let b = random_matrix(3, 2, 3 * seed + 71);
            let c = random_matrix(2, 2, 3 * seed + 72);
            let left = kron(&kron(&a, &b), &c);
            let right = kron(&a, &kron(&b, &c));
            assert!(left.max_abs_diff(&right) <= 1e-15);
        }
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho = random_hermitian(3, 11);
        let mut sigma = random_hermitian(2, 12);
        // normalize sigma to unit trace
        let t = sigma.trace().re;
        sigma = sigma.scale(cr(1.0 / t));
        let joint = kron(&rho, &sigma);
        let reduced = partial_trace(&joint, (3, 2), Subsystem::Receiver).unwrap();
        assert!(reduced.max_abs_diff(&rho) <= 1e-12);
    }

    #[test]
    fn partial_trace_of_maximally_entangled() {
        let d = 3;
        let amps: Vec<C64> = (0..d * d)
            .map(|k| if k % (d + 1) == 0 { cr(1.0 / (d as f64).sqrt()) } else { cr(0.0) })
            .collect();
        let phi = StateVector::new(amps).unwrap();
        let reduced = partial_trace(&phi.projector(), (d, d), Subsystem::Environment).unwrap();
        let expected = ComplexMatrix::identity(d).scale(cr(1.0 / d as f64));
        assert!(reduced.max_abs_diff(&expected) <= 1e-12);
    }

    /// Brute-force double-loop oracle for the partial trace.
    fn partial_trace_oracle(m: &ComplexMatrix, d_b: usize, d_e: usize, keep: Subsystem) -> ComplexMatrix {
        match keep {
            Subsystem::Receiver => {
                let mut out = ComplexMatrix::zeros(d_b, d_b);
                for b in 0..d_b {
                    for bp in 0..d_b {
                        let mut acc = C64::new(0.0, 0.0);
                        for e in 0..d_e {
                            acc += m.get(b * d_e + e, bp * d_e + e);
                        }
                        out.set(b, bp, acc);
                    }
                }
                out
            }
            Subsystem::Environment => {
                let mut out = ComplexMatrix::zeros(d_e, d_e);
                for e in 0..d_e {
                    for ep in 0..d_e {
                        let mut acc = C64::new(0.0, 0.0);
                        for b in 0..d_b {
                            acc += m.get(b * d_e + e, b * d_e + ep);
                        }
                        out.set(e, ep, acc);
                    }
                }
                out
            }
        }
    }

    #[test]
    fn partial_trace_matches_summation_oracle() {
        let m = random_hermitian(6, 21);
        for keep in [Subsystem::Receiver, Subsystem::Environment] {
            let got = partial_trace(&m, (2, 3), keep).unwrap();
            let want = partial_trace_oracle(&m, 2, 3, keep);
            assert!(got.max_abs_diff(&want) == 0.0);
        }
    }

    #[test]
    fn partial_trace_preserves_trace() {
        for seed in 0..6 {
            let m = random_hermitian(12, 100 + seed);
            for keep in [Subsystem::Receiver, Subsystem::Environment] {
                let red = partial_trace(&m, (3, 4), keep).unwrap();
                assert!((red.trace() - m.trace()).norm() <= 1e-12 * m.frobenius_norm().max(1.0));
            }
        }
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = ComplexMatrix::identity(5);
        assert!(partial_trace(&m, (2, 3), Subsystem::Receiver).is_err());
    }

    #[test]
    fn is_psd_on_identity_and_negative() {
        assert!(is_psd(&ComplexMatrix::identity(3), 1e-9).unwrap());
        let m = ComplexMatrix::diagonal(&[cr(1.0), cr(-1e-6)]);
        assert!(!is_psd(&m, 1e-9).unwrap());
    }

    #[test]
    fn is_psd_gram_construction() {
        for seed in 0..10 {
            let a = random_matrix(5, 5, 300 + seed);
            let gram = a.adjoint().matmul(&a);
            assert!(is_psd(&gram, 1e-9).unwrap());
        }
    }

    #[test]
    fn is_psd_rejects_non_square() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(is_psd(&m, 1e-9).is_err());
    }

    #[test]
    fn eigh_reconstructs_matrix() {
        for n in [1usize, 2, 3, 7, 12] {
            let m = random_hermitian(n, 40 + n as u64);
            let (vals, vecs) = hermitian_eigh(&m).unwrap();
            assert!(vecs.is_unitary(1e-12));
            let lambda = ComplexMatrix::diagonal(&vals.iter().map(|&l| cr(l)).collect::<Vec<_>>());
            let rebuilt = vecs.matmul(&lambda).matmul(&vecs.adjoint());
            assert!(rebuilt.max_abs_diff(&m) <= 1e-12 * m.frobenius_norm().max(1.0) * 10.0);
            // ascending order
            for w in vals.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn eigh_known_diagonal() {
        let m = ComplexMatrix::diagonal(&[cr(3.0), cr(-1.0), cr(2.0)]);
        let vals = hermitian_eigenvalues(&m).unwrap();
        assert_eq!(vals, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn haar_unitary_is_unitary_and_deterministic() {
        let u1 = haar_random_unitary(7, 42);
        let u2 = haar_random_unitary(7, 42);
        assert_eq!(u1, u2);
        let gram = u1.adjoint().matmul(&u1);
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(7)) <= 1e-12);
        let other = haar_random_unitary(7, 43);
        assert!(u1.max_abs_diff(&other) > 1e-3);
    }

    #[test]
    fn haar_unitary_scalar_case() {
        let u = haar_random_unitary(1, 5);
        assert!((u.get(0, 0).norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn state_vector_validation() {
        assert!(StateVector::new(vec![cr(0.5), cr(0.5)]).is_err());
        let v = StateVector::normalized(vec![cr(1.0), cr(1.0)]).unwrap();
        assert!((v.amplitudes()[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-15);
    }

    #[test]
    fn state_tensor_indexing_is_receiver_major() {
        let b = StateVector::basis(3, 1);
        let e = StateVector::basis(3, 2);
        let joint = b.tensor(&e);
        // |12⟩ ↦ flat index 1*3+2 = 5
        assert_eq!(joint.amplitudes()[5], cr(1.0));
        assert_eq!(joint.amplitudes().iter().filter(|z| z.norm() > 0.0).count(), 1);
    }
}
