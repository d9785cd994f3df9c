//! PSD factorizations M_ij = Tr(R_i C_j) and their validation, plus the
//! extraction of witnesses from quantum strategies: states through a channel
//! paired with measurement effects realize every entry as such a trace, so a
//! strategy on an r-level system yields a size-r factorization directly.

use crate::channel::{channel_apply, ChannelError, DensityMatrix, Isometry, Povm};
use crate::constructions::ChannelMatrix;
use crate::tensor::{cr, is_psd, ComplexMatrix, TensorError, PSD_TOL};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactorizationError {
    #[error("{side} factor {index} has shape {rows}x{cols}, expected {size}x{size}")]
    FactorShape { side: &'static str, index: usize, rows: usize, cols: usize, size: usize },
    #[error("{side} factor {index} is not positive semidefinite within {tol}")]
    FactorNotPsd { side: &'static str, index: usize, tol: f64 },
    #[error("factorization is {n}x{m} but the matrix is {rows}x{cols}")]
    MatrixShapeMismatch { n: usize, m: usize, rows: usize, cols: usize },
    #[error("relabelling kernel has {got} rows but the measurement has {want} outcomes")]
    KernelMismatch { want: usize, got: usize },
    #[error("encoding {index} has dimension {got}, expected {want}")]
    EncodingDim { index: usize, want: usize, got: usize },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Families {R_i}, {C_j} of r×r PSD matrices realizing a matrix entrywise
/// as M_ij = Tr(R_i C_j).
#[derive(Debug, Clone, serde::Serialize)]
pub struct PsdFactorization {
    size: usize,
    row_factors: Vec<ComplexMatrix>,
    col_factors: Vec<ComplexMatrix>,
}

impl PsdFactorization {
    pub fn new(
        size: usize,
        row_factors: Vec<ComplexMatrix>,
        col_factors: Vec<ComplexMatrix>,
    ) -> Result<Self, FactorizationError> {
        for (side, family) in [("row", &row_factors), ("column", &col_factors)] {
            for (index, f) in family.iter().enumerate() {
                if f.rows() != size || f.cols() != size {
                    return Err(FactorizationError::FactorShape {
                        side,
                        index,
                        rows: f.rows(),
                        cols: f.cols(),
                        size,
                    });
                }
                if !is_psd(f, PSD_TOL)? {
                    return Err(FactorizationError::FactorNotPsd { side, index, tol: PSD_TOL });
                }
            }
        }
        Ok(Self { size, row_factors, col_factors })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn row_factors(&self) -> &[ComplexMatrix] {
        &self.row_factors
    }

    pub fn col_factors(&self) -> &[ComplexMatrix] {
        &self.col_factors
    }

    pub fn inputs(&self) -> usize {
        self.row_factors.len()
    }

    pub fn outputs(&self) -> usize {
        self.col_factors.len()
    }

    /// The matrix of trace pairings Tr(R_i C_j).
    pub fn realized(&self) -> Vec<Vec<f64>> {
        self.row_factors
            .iter()
            .map(|r| self.col_factors.iter().map(|c| r.trace_product(c).re).collect())
            .collect()
    }
}

/// Extract the factorization of a strategy on an r-level system: row factors
/// are the encoded states, column factors fold the stochastic output
/// relabelling q(j|k) into the effects, C_j = Σ_k q(j|k) Λ_k.
pub fn factorization_from_strategy(
    encodings: &[DensityMatrix],
    povm: &Povm,
    relabel: &ChannelMatrix,
) -> Result<PsdFactorization, FactorizationError> {
    let size = povm.dim();
    for (index, rho) in encodings.iter().enumerate() {
        if rho.dim() != size {
            return Err(FactorizationError::EncodingDim { index, want: size, got: rho.dim() });
        }
    }
    if relabel.rows() != povm.outcomes() {
        return Err(FactorizationError::KernelMismatch {
            want: povm.outcomes(),
            got: relabel.rows(),
        });
    }
    let row_factors: Vec<ComplexMatrix> =
        encodings.iter().map(|rho| rho.matrix().clone()).collect();
    let col_factors: Vec<ComplexMatrix> = (0..relabel.cols())
        .map(|j| {
            let mut c = ComplexMatrix::zeros(size, size);
            for (k, lam) in povm.effects().iter().enumerate() {
                let q = relabel.get(k, j);
                if q != 0.0 {
                    c = c.add(&lam.scale(cr(q)));
                }
            }
            c
        })
        .collect();
    PsdFactorization::new(size, row_factors, col_factors)
}

/// Factorization of an unassisted channel strategy: row factors are the
/// channel outputs N(ρ_i), column factors the receiver effects. Its size is
/// the receiver dimension, which is why a channel never beats an identity
/// channel of that dimension.
pub fn factorization_from_channel(
    v: &Isometry,
    encodings: &[DensityMatrix],
    povm: &Povm,
) -> Result<PsdFactorization, FactorizationError> {
    let outputs: Result<Vec<DensityMatrix>, ChannelError> =
        encodings.iter().map(|rho| channel_apply(v, rho)).collect();
    factorization_from_strategy(&outputs?, povm, &ChannelMatrix::identity(povm.outcomes()))
}

/// The always-available diagonal witness of size min(n, m): point-mass
/// factors along the shorter axis.
pub fn diagonal_factorization(m: &ChannelMatrix) -> PsdFactorization {
    let (n, mm) = (m.rows(), m.cols());
    if mm <= n {
        let size = mm;
        let row_factors: Vec<ComplexMatrix> = (0..n)
            .map(|i| {
                ComplexMatrix::diagonal(&(0..mm).map(|j| cr(m.get(i, j))).collect::<Vec<_>>())
            })
            .collect();
        let col_factors: Vec<ComplexMatrix> =
            (0..mm).map(|j| ComplexMatrix::basis_projector(size, j)).collect();
        PsdFactorization { size, row_factors, col_factors }
    } else {
        let size = n;
        let row_factors: Vec<ComplexMatrix> =
            (0..n).map(|i| ComplexMatrix::basis_projector(size, i)).collect();
        let col_factors: Vec<ComplexMatrix> = (0..mm)
            .map(|j| {
                ComplexMatrix::diagonal(&(0..n).map(|i| cr(m.get(i, j))).collect::<Vec<_>>())
            })
            .collect();
        PsdFactorization { size, row_factors, col_factors }
    }
}

/// Max-abs deviation of the realized pairings from the matrix, after
/// checking every factor is PSD. A non-PSD factor is an error, never a
/// silently accepted witness.
pub fn validate_factorization(
    m: &ChannelMatrix,
    f: &PsdFactorization,
) -> Result<f64, FactorizationError> {
    if f.inputs() != m.rows() || f.outputs() != m.cols() {
        return Err(FactorizationError::MatrixShapeMismatch {
            n: f.inputs(),
            m: f.outputs(),
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    for (side, family) in [("row", f.row_factors()), ("column", f.col_factors())] {
        for (index, factor) in family.iter().enumerate() {
            if !is_psd(factor, PSD_TOL)? {
                return Err(FactorizationError::FactorNotPsd { side, index, tol: PSD_TOL });
            }
        }
    }
    let mut worst: f64 = 0.0;
    for (i, row) in f.realized().iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            worst = worst.max((v - m.get(i, j)).abs());
        }
    }
    Ok(worst)
}
