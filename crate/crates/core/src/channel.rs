//! Stinespring-style channel model: isometries into receiver ⊗ environment,
//! POVMs, density matrices, channel and complementary-channel application,
//! and unassisted channel-matrix evaluation.
//!
//! Channels are represented exclusively by isometries; every object handled
//! here is given in that dilation form. Values are immutable and operations
//! pure.

use crate::constructions::{ChannelMatrix, ConstructionError};
use crate::tensor::{
    cr, is_psd, partial_trace, ComplexMatrix, StateVector, Subsystem, TensorError, PSD_TOL,
};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("isometry column count {cols} exceeds joint dimension {joint}")]
    TooManyColumns { cols: usize, joint: usize },
    #[error("isometry shape {rows}x{cols} does not match dims (d_a={d_a}, d_b={d_b}, d_e={d_e})")]
    IsometryShape { rows: usize, cols: usize, d_a: usize, d_b: usize, d_e: usize },
    #[error("V†V deviates from identity by {0:.3e} (tolerance 1e-12)")]
    NotIsometric(f64),
    #[error("POVM effect {index} is not positive semidefinite within {tol}")]
    EffectNotPsd { index: usize, tol: f64 },
    #[error("POVM effects sum deviates from identity by {0:.3e}")]
    EffectsDontSum(f64),
    #[error("POVM has no effects")]
    EmptyPovm,
    #[error("POVM effect {index} has shape {rows}x{cols}, expected {dim}x{dim}")]
    EffectShape { index: usize, rows: usize, cols: usize, dim: usize },
    #[error("density matrix is not positive semidefinite within {0}")]
    NotPsd(f64),
    #[error("density matrix trace {0} differs from 1 by more than 1e-12")]
    BadTrace(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("subspace basis is empty")]
    EmptyBasis,
    #[error("basis vectors {0} and {1} have Gram entry {2:.3e} off orthonormal (tolerance 1e-10)")]
    BasisNotOrthonormal(usize, usize, f64),
    #[error("rotation must be unitary of size {expected}, got {rows}x{cols} with defect {defect:.3e}")]
    BadRotation { expected: usize, rows: usize, cols: usize, defect: f64 },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}

/// Isometry V from the input space into receiver ⊗ environment,
/// with V†V = identity within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    matrix: ComplexMatrix,
    d_a: usize,
    d_b: usize,
    d_e: usize,
}

pub const ISOMETRY_TOL: f64 = 1e-12;

impl Isometry {
    pub fn new(matrix: ComplexMatrix, dims: (usize, usize, usize)) -> Result<Self, ChannelError> {
        let (d_a, d_b, d_e) = dims;
        if matrix.rows() != d_b * d_e || matrix.cols() != d_a {
            return Err(ChannelError::IsometryShape {
                rows: matrix.rows(),
                cols: matrix.cols(),
                d_a,
                d_b,
                d_e,
            });
        }
        if d_a > d_b * d_e {
            return Err(ChannelError::TooManyColumns { cols: d_a, joint: d_b * d_e });
        }
        let gram = matrix.adjoint().matmul(&matrix);
        let defect = gram.max_abs_diff(&ComplexMatrix::identity(d_a));
        if defect > ISOMETRY_TOL {
            return Err(ChannelError::NotIsometric(defect));
        }
        Ok(Self { matrix, d_a, d_b, d_e })
    }

    /// Trivial dilation of the identity channel: |i⟩ ↦ |i⟩⊗|0⟩ (d_e = 1).
    pub fn identity_channel(d: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(d), d_a: d, d_b: d, d_e: 1 }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn input_dim(&self) -> usize {
        self.d_a
    }

    pub fn receiver_dim(&self) -> usize {
        self.d_b
    }

    pub fn environment_dim(&self) -> usize {
        self.d_e
    }

    /// V ρ V† on the joint receiver ⊗ environment space.
    pub fn conjugate(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.matrix.matmul(rho).matmul(&self.matrix.adjoint())
    }

    /// Projector onto Range(V), i.e. V V†.
    pub fn range_projector(&self) -> ComplexMatrix {
        self.matrix.matmul(&self.matrix.adjoint())
    }
}

/// Generalized measurement: PSD effects summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<ComplexMatrix>,
    dim: usize,
}

impl Povm {
    pub fn new(effects: Vec<ComplexMatrix>) -> Result<Self, ChannelError> {
        let dim = effects.first().map(|e| e.rows()).ok_or(ChannelError::EmptyPovm)?;
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (index, e) in effects.iter().enumerate() {
            if e.rows() != dim || e.cols() != dim {
                return Err(ChannelError::EffectShape {
                    index,
                    rows: e.rows(),
                    cols: e.cols(),
                    dim,
                });
            }
            if !is_psd(e, PSD_TOL)? {
                return Err(ChannelError::EffectNotPsd { index, tol: PSD_TOL });
            }
            sum = sum.add(e);
        }
        let defect = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > PSD_TOL {
            return Err(ChannelError::EffectsDontSum(defect));
        }
        Ok(Self { effects, dim })
    }

    /// Computational-basis measurement {|i⟩⟨i|}.
    pub fn computational(d: usize) -> Self {
        let effects = (0..d).map(|i| ComplexMatrix::basis_projector(d, i)).collect();
        Self { effects, dim: d }
    }

    /// Single-effect measurement {I_d}; carries no information.
    pub fn trivial(d: usize) -> Self {
        Self { effects: vec![ComplexMatrix::identity(d)], dim: d }
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Quantum state: PSD within 1e-9 with unit trace within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, ChannelError> {
        if !is_psd(&matrix, PSD_TOL)? {
            return Err(ChannelError::NotPsd(PSD_TOL));
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > 1e-12 {
            return Err(ChannelError::BadTrace(trace));
        }
        Ok(Self { matrix })
    }

    pub fn pure(state: &StateVector) -> Self {
        Self { matrix: state.projector() }
    }

    pub fn basis_state(dim: usize, i: usize) -> Self {
        Self::pure(&StateVector::basis(dim, i))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(d).scale(cr(1.0 / d as f64)) }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

/// Receiver marginal Tr_E(V ρ V†) of the dilation.
pub fn channel_apply(v: &Isometry, rho: &DensityMatrix) -> Result<DensityMatrix, ChannelError> {
    if rho.dim() != v.input_dim() {
        return Err(ChannelError::DimensionMismatch(format!(
            "state dimension {} does not match channel input {}",
            rho.dim(),
            v.input_dim()
        )));
    }
    let joint = v.conjugate(rho.matrix());
    let reduced = partial_trace(&joint, (v.receiver_dim(), v.environment_dim()), Subsystem::Receiver)?;
    DensityMatrix::new(reduced.hermitian_part())
}

/// Environment marginal Tr_B(V ρ V†) of the dilation.
pub fn complementary_apply(v: &Isometry, rho: &DensityMatrix) -> Result<DensityMatrix, ChannelError> {
    if rho.dim() != v.input_dim() {
        return Err(ChannelError::DimensionMismatch(format!(
            "state dimension {} does not match channel input {}",
            rho.dim(),
            v.input_dim()
        )));
    }
    let joint = v.conjugate(rho.matrix());
    let reduced =
        partial_trace(&joint, (v.receiver_dim(), v.environment_dim()), Subsystem::Environment)?;
    DensityMatrix::new(reduced.hermitian_part())
}

/// Assemble an isometry whose range is the span of an orthonormal family.
///
/// Column i of the result is `Σ_k rotation[k][i] · basis[k]`; the rotation,
/// when given, reparametrizes the input basis without moving the range, so
/// V V† is rotation-independent.
pub fn isometry_from_subspace_basis(
    basis: &[StateVector],
    dims: (usize, usize),
    rotation: Option<&ComplexMatrix>,
) -> Result<Isometry, ChannelError> {
    if basis.is_empty() {
        return Err(ChannelError::EmptyBasis);
    }
    let (d_b, d_e) = dims;
    let joint = d_b * d_e;
    let d_a = basis.len();
    for (i, v) in basis.iter().enumerate() {
        if v.dim() != joint {
            return Err(ChannelError::DimensionMismatch(format!(
                "basis vector {i} has dimension {}, expected {joint}",
                v.dim()
            )));
        }
        for (j, w) in basis.iter().enumerate().take(i + 1) {
            let g = v.inner(w);
            let want = if i == j { 1.0 } else { 0.0 };
            let off = (g - cr(want)).norm();
            if off > 1e-10 {
                return Err(ChannelError::BasisNotOrthonormal(i, j, off));
            }
        }
    }
    let mut v = ComplexMatrix::zeros(joint, d_a);
    for (col, vec) in basis.iter().enumerate() {
        for (row, amp) in vec.amplitudes().iter().enumerate() {
            v.set(row, col, *amp);
        }
    }
    if let Some(u) = rotation {
        if u.rows() != d_a || u.cols() != d_a || !u.is_unitary(1e-10) {
            let defect = if u.is_square() {
                u.adjoint().matmul(u).max_abs_diff(&ComplexMatrix::identity(u.rows()))
            } else {
                f64::INFINITY
            };
            return Err(ChannelError::BadRotation {
                expected: d_a,
                rows: u.rows(),
                cols: u.cols(),
                defect,
            });
        }
        v = v.matmul(u);
    }
    Isometry::new(v, (d_a, d_b, d_e))
}

/// Channel matrix of the unassisted strategy: P_ij = Tr[M_j · N(ρ_i)].
pub fn unassisted_channel_matrix(
    v: &Isometry,
    encodings: &[DensityMatrix],
    bob_povm: &Povm,
) -> Result<ChannelMatrix, ChannelError> {
    if bob_povm.dim() != v.receiver_dim() {
        return Err(ChannelError::DimensionMismatch(format!(
            "POVM dimension {} does not match receiver dimension {}",
            bob_povm.dim(),
            v.receiver_dim()
        )));
    }
    let mut rows = Vec::with_capacity(encodings.len());
    for rho in encodings {
        let out = channel_apply(v, rho)?;
        let row: Vec<f64> = bob_povm
            .effects()
            .iter()
            .map(|m| m.trace_product(out.matrix()).re)
            .collect();
        rows.push(row);
    }
    Ok(ChannelMatrix::from_rows(rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::canonical_basis_7;
    use crate::tensor::haar_random_unitary;

    fn random_density(d: usize, seed: u64) -> DensityMatrix {
        let u = haar_random_unitary(d, seed);
        // mixed state with distinct eigenvalues
        let weights: Vec<f64> = (1..=d).map(|k| k as f64).collect();
        let total: f64 = weights.iter().sum();
        let diag: Vec<_> = weights.iter().map(|w| cr(w / total)).collect();
        let m = u.matmul(&ComplexMatrix::diagonal(&diag)).matmul(&u.adjoint());
        DensityMatrix::new(m.hermitian_part()).unwrap()
    }

    fn canonical_isometry_7() -> Isometry {
        isometry_from_subspace_basis(&canonical_basis_7(), (3, 3), None).unwrap()
    }

    #[test]
    fn identity_channel_is_identity_map() {
        let v = Isometry::identity_channel(4);
        let rho = random_density(4, 3);
        let out = channel_apply(&v, &rho).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) <= 1e-13);
    }

    #[test]
    fn seven_dim_channel_on_entangled_encoding() {
        // the encoding mapped to (|00⟩−|11⟩)/√2 reduces to (|0⟩⟨0|+|1⟩⟨1|)/2
        let v = canonical_isometry_7();
        let rho = DensityMatrix::basis_state(7, 5);
        let out = channel_apply(&v, &rho).unwrap();
        let want = ComplexMatrix::diagonal(&[cr(0.5), cr(0.5), cr(0.0)]);
        assert!(out.matrix().max_abs_diff(&want) <= 1e-13);
        // the environment marginal is the same by symmetry of the state
        let env = complementary_apply(&v, &rho).unwrap();
        assert!(env.matrix().max_abs_diff(&want) <= 1e-13);
    }

    #[test]
    fn channel_preserves_trace_on_random_inputs() {
        let basis = canonical_basis_7();
        for seed in 0..5 {
            let u = haar_random_unitary(7, 900 + seed);
            let v = isometry_from_subspace_basis(&basis, (3, 3), Some(&u)).unwrap();
            let rho = random_density(7, seed);
            let out = channel_apply(&v, &rho).unwrap();
            let env = complementary_apply(&v, &rho).unwrap();
            assert!((out.matrix().trace().re - 1.0).abs() <= 1e-12);
            assert!((env.matrix().trace().re - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn complementary_of_product_range_isometry_is_identity() {
        // |i⟩ ↦ |0⟩⊗|i⟩: receiver learns nothing, environment gets the input
        let d = 3;
        let basis: Vec<StateVector> =
            (0..d).map(|i| StateVector::basis(d, 0).tensor(&StateVector::basis(d, i))).collect();
        let v = isometry_from_subspace_basis(&basis, (d, d), None).unwrap();
        let rho = random_density(d, 7);
        let env = complementary_apply(&v, &rho).unwrap();
        assert!(env.matrix().max_abs_diff(rho.matrix()) <= 1e-13);
    }

    #[test]
    fn rotation_preserves_range_projector() {
        let basis = canonical_basis_7();
        let v = isometry_from_subspace_basis(&basis, (3, 3), None).unwrap();
        let u = haar_random_unitary(7, 11);
        let vr = isometry_from_subspace_basis(&basis, (3, 3), Some(&u)).unwrap();
        assert!(vr.matrix().adjoint().matmul(vr.matrix()).max_abs_diff(&ComplexMatrix::identity(7)) <= 1e-12);
        assert!(v.range_projector().max_abs_diff(&vr.range_projector()) <= 1e-12);
    }

    #[test]
    fn isometry_rejects_non_orthonormal_basis() {
        let mut basis = canonical_basis_7();
        basis[1] = basis[0].clone();
        assert!(matches!(
            isometry_from_subspace_basis(&basis, (3, 3), None),
            Err(ChannelError::BasisNotOrthonormal(..))
        ));
    }

    #[test]
    fn isometry_rejects_non_unitary_rotation() {
        let basis = canonical_basis_7();
        let bad = ComplexMatrix::identity(7).scale(cr(0.5));
        assert!(matches!(
            isometry_from_subspace_basis(&basis, (3, 3), Some(&bad)),
            Err(ChannelError::BadRotation { .. })
        ));
    }

    #[test]
    fn unassisted_identity_strategy() {
        let v = Isometry::identity_channel(3);
        let encodings: Vec<_> = (0..3).map(|i| DensityMatrix::basis_state(3, i)).collect();
        let p = unassisted_channel_matrix(&v, &encodings, &Povm::computational(3)).unwrap();
        assert!(p.max_abs_diff(&ChannelMatrix::identity(3)) <= 1e-14);
    }

    #[test]
    fn unassisted_trivial_povm_gives_ones_column() {
        let v = canonical_isometry_7();
        let encodings: Vec<_> = (0..7).map(|i| DensityMatrix::basis_state(7, i)).collect();
        let p = unassisted_channel_matrix(&v, &encodings, &Povm::trivial(3)).unwrap();
        assert_eq!(p.cols(), 1);
        for i in 0..7 {
            assert!((p.get(i, 0) - 1.0).abs() <= 1e-13);
        }
    }

    #[test]
    fn unassisted_marginalizes_environment() {
        // receiver-only decoding of the seven-symbol strategy: rows collapse to
        // the receiver marginal of the joint outcome distribution
        let v = canonical_isometry_7();
        let encodings: Vec<_> = (0..7).map(|i| DensityMatrix::basis_state(7, i)).collect();
        let p = unassisted_channel_matrix(&v, &encodings, &Povm::computational(3)).unwrap();
        // encoding 0 maps to |02⟩: receiver outcome 0 with certainty
        assert!((p.get(0, 0) - 1.0).abs() <= 1e-13);
        // encoding 5 maps to (|00⟩−|11⟩)/√2: outcomes 0 and 1 each with 1/2
        assert!((p.get(5, 0) - 0.5).abs() <= 1e-13);
        assert!((p.get(5, 1) - 0.5).abs() <= 1e-13);
        // encoding 6: 1/6, 1/6, 2/3
        assert!((p.get(6, 0) - 1.0 / 6.0).abs() <= 1e-13);
        assert!((p.get(6, 2) - 2.0 / 3.0).abs() <= 1e-13);
    }

    #[test]
    fn povm_validation() {
        let half = ComplexMatrix::identity(2).scale(cr(0.5));
        assert!(Povm::new(vec![half.clone(), half]).is_ok());
        let bad = ComplexMatrix::diagonal(&[cr(1.5), cr(0.5)]);
        let rest = ComplexMatrix::identity(2).sub(&bad);
        // effects sum to I but one has a negative eigenvalue partner
        assert!(Povm::new(vec![bad, rest]).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(ComplexMatrix::identity(2)).is_err()); // trace 2
        assert!(DensityMatrix::new(ComplexMatrix::diagonal(&[cr(1.5), cr(-0.5)])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::diagonal(&[cr(0.5), cr(0.5)])).is_ok());
    }
}
