//! Concrete objects of the seven-symbol and general-dimension families:
//! the orthonormal range bases, the product-pair index maps, and the target
//! channel matrices they give rise to.
//!
//! Index conventions, frozen: the seven-vector basis keeps its traditional
//! 1-based ordering ψ₁..ψ₇ internally re-exposed as 0-based slots 0..6; the
//! general basis is 0-based with the d−1 entangled vectors first. Output
//! labels y₁..yₘ map to columns 1..m in reports and 0..m−1 in memory.

use crate::tensor::{cr, StateVector, C64};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("probability parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("local dimension {0} must be at least 3")]
    DimensionTooSmall(usize),
    #[error("product index requires i != j, got ({0}, {0})")]
    DiagonalPair(usize),
    #[error("index {0} out of range for dimension {1}")]
    IndexOutOfRange(usize, usize),
    #[error("channel matrix entry ({row},{col}) = {value} outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },
    #[error("channel matrix row {row} sums to {sum}, expected 1 within {tol}")]
    RowNotStochastic { row: usize, sum: f64, tol: f64 },
    #[error("entry count {got} does not match {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, got: usize },
}

/// Row-stochastic matrix of conditional probabilities p(y_j | x_i).
///
/// Entries are validated to lie in [0, 1] and every row must sum to 1 within
/// 1e-12. Tiny negatives in (−1e-12, 0) from floating error are clamped to 0
/// on construction; anything more negative is an error.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Serializes as `{rows, cols, data}` with a plain row-of-rows data array.
impl serde::Serialize for ChannelMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("ChannelMatrix", 3)?;
        s.serialize_field("rows", &self.rows)?;
        s.serialize_field("cols", &self.cols)?;
        let data: Vec<&[f64]> = (0..self.rows).map(|i| self.row(i)).collect();
        s.serialize_field("data", &data)?;
        s.end()
    }
}

pub const ROW_SUM_TOL: f64 = 1e-12;

impl ChannelMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, ConstructionError> {
        if data.len() != rows * cols {
            return Err(ConstructionError::ShapeMismatch { rows, cols, got: data.len() });
        }
        let mut data = data;
        for (idx, v) in data.iter_mut().enumerate() {
            if *v < 0.0 && *v > -ROW_SUM_TOL {
                *v = 0.0;
            }
            if !v.is_finite() || *v < 0.0 || *v > 1.0 + ROW_SUM_TOL {
                return Err(ConstructionError::EntryOutOfRange {
                    row: idx / cols,
                    col: idx % cols,
                    value: *v,
                });
            }
            if *v > 1.0 {
                *v = 1.0;
            }
        }
        for i in 0..rows {
            let sum: f64 = data[i * cols..(i + 1) * cols].iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(ConstructionError::RowNotStochastic { row: i, sum, tol: ROW_SUM_TOL });
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, ConstructionError> {
        let n = rows.len();
        let m = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut data = Vec::with_capacity(n * m);
        for r in &rows {
            if r.len() != m {
                return Err(ConstructionError::ShapeMismatch { rows: n, cols: m, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(n, m, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { rows: n, cols: n, data }
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
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.get(i, j);
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch comparing channel matrices"
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Sum of diagonal entries; caller must ensure the matrix is square.
    pub fn trace(&self) -> f64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }
}

/// Maximally entangled state |φ⁺_d⟩ = (1/√d) Σ_k |k⟩⊗|k⟩.
pub fn maximally_entangled(d: usize) -> StateVector {
    let amp = cr(1.0 / (d as f64).sqrt());
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    for k in 0..d {
        amps[k * d + k] = amp;
    }
    StateVector::new(amps).expect("maximally entangled state is normalized")
}

/// The range convention, recorded verbatim in reports.
pub const RANGE_DEFINITION_NOTE: &str =
    "the seven-vector range is pinned to its explicit basis, the orthocomplement \
     of the maximally entangled vector and |01⟩; a stricter set-builder reading \
     that also excluded every product vector |i⟩⊗|j≠i⟩ would contradict the five \
     product vectors in that basis and is deliberately not applied";

/// The seven orthonormal vectors in dimension 9 spanning the orthocomplement
/// of {|φ⁺₃⟩, |01⟩}: five product vectors |02⟩, |10⟩, |12⟩, |20⟩, |21⟩
/// followed by (|00⟩−|11⟩)/√2 and (|00⟩+|11⟩)/√6 − √(2/3)|22⟩.
pub fn canonical_basis_7() -> Vec<StateVector> {
    let product = |b: usize, e: usize| StateVector::basis(3, b).tensor(&StateVector::basis(3, e));
    let mut psi6 = vec![C64::new(0.0, 0.0); 9];
    psi6[0] = cr(1.0 / 2f64.sqrt()); // |00⟩
    psi6[4] = cr(-1.0 / 2f64.sqrt()); // |11⟩
    let mut psi7 = vec![C64::new(0.0, 0.0); 9];
    psi7[0] = cr(1.0 / 6f64.sqrt());
    psi7[4] = cr(1.0 / 6f64.sqrt());
    psi7[8] = cr(-(2f64 / 3.0).sqrt()); // |22⟩
    vec![
        product(0, 2),
        product(1, 0),
        product(1, 2),
        product(2, 0),
        product(2, 1),
        StateVector::new(psi6).expect("normalized"),
        StateVector::new(psi7).expect("normalized"),
    ]
}

/// Flat index of the product vector |i⟩⊗|j⟩ (i ≠ j) in the general basis.
///
/// The pairs fill the slots d−1 .. d²−2 bijectively: k = i(d−1) + j + (d−1)
/// when i > j and k = i(d−1) + (j−1) + (d−1) when i < j.
pub fn product_index(i: usize, j: usize, d: usize) -> Result<usize, ConstructionError> {
    if i == j {
        return Err(ConstructionError::DiagonalPair(i));
    }
    if i >= d || j >= d {
        return Err(ConstructionError::IndexOutOfRange(i.max(j), d));
    }
    let base = i * (d - 1) + (d - 1);
    Ok(if i > j { base + j } else { base + j - 1 })
}

/// Inverse of [`product_index`]: recovers the ordered pair (i, j).
pub fn product_index_inverse(k: usize, d: usize) -> Result<(usize, usize), ConstructionError> {
    if k < d - 1 || k > d * d - 2 {
        return Err(ConstructionError::IndexOutOfRange(k, d * d - 1));
    }
    let t = k - (d - 1);
    let i = t / (d - 1);
    let r = t % (d - 1);
    let j = if r < i { r } else { r + 1 };
    Ok((i, j))
}

/// Orthonormal basis of the subspace of C^d ⊗ C^d orthogonal to |φ⁺_d⟩.
///
/// The first d−1 vectors are entangled,
/// ψ_k = (1/√(k+2)) |φ⁺_{k+1}⟩ − √((k+1)/(k+2)) |k+1,k+1⟩, k = 0..d−2,
/// and the remaining d(d−1) are the products |i⟩⊗|j⟩ (i ≠ j) placed by
/// [`product_index`].
pub fn canonical_basis_general(d: usize) -> Result<Vec<StateVector>, ConstructionError> {
    if d < 3 {
        return Err(ConstructionError::DimensionTooSmall(d));
    }
    let dim = d * d;
    let mut basis = Vec::with_capacity(dim - 1);
    for k in 0..d - 1 {
        let kf = k as f64;
        let head = 1.0 / ((kf + 2.0) * (kf + 1.0)).sqrt();
        let tail = -((kf + 1.0) / (kf + 2.0)).sqrt();
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        for i in 0..=k {
            amps[i * d + i] = cr(head);
        }
        amps[(k + 1) * d + (k + 1)] = cr(tail);
        basis.push(StateVector::new(amps).expect("normalized by construction"));
    }
    // products, in product_index order
    let mut slots: Vec<Option<StateVector>> = vec![None; dim - 1];
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let k = product_index(i, j, d)?;
            slots[k] = Some(StateVector::basis(d, i).tensor(&StateVector::basis(d, j)));
        }
    }
    for slot in slots.into_iter().skip(d - 1) {
        basis.push(slot.expect("product index map is a bijection"));
    }
    Ok(basis)
}

/// The 7×7 target matrix: identity on the first five symbols and a
/// two-row stochastic tail mixing the last two outputs,
/// row 6 = (0,…,0, p, 1−p), row 7 = (0,…,0, p/3, 1−p/3).
pub fn matrix_m7(p: f64) -> Result<ChannelMatrix, ConstructionError> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(ConstructionError::ParameterOutOfRange(p));
    }
    let mut data = vec![0.0; 49];
    for i in 0..5 {
        data[i * 7 + i] = 1.0;
    }
    data[5 * 7 + 5] = p;
    data[5 * 7 + 6] = 1.0 - p;
    let p3 = p / 3.0;
    data[6 * 7 + 5] = p3;
    data[6 * 7 + 6] = 1.0 - p3;
    ChannelMatrix::new(7, 7, data)
}

/// The (d²−1)×(d²−1) target matrix: a lower-triangular (d−1)-block with
/// entries 2/(i(i+1)) in the first column, 1/(i(i+1)) strictly inside,
/// i/(i+1) on the diagonal (1-based i), direct-summed with the identity on
/// the remaining d(d−1) symbols.
pub fn matrix_general(d: usize) -> Result<ChannelMatrix, ConstructionError> {
    if d < 3 {
        return Err(ConstructionError::DimensionTooSmall(d));
    }
    let k = d * d - 1;
    let head = d - 1;
    let mut data = vec![0.0; k * k];
    for i1 in 1..=head {
        let i = i1 - 1;
        let denom = (i1 * (i1 + 1)) as f64;
        for j1 in 1..=i1 {
            let j = j1 - 1;
            data[i * k + j] = if j1 == 1 && i1 == 1 {
                1.0
            } else if j1 == 1 {
                2.0 / denom
            } else if j1 < i1 {
                1.0 / denom
            } else {
                i1 as f64 / (i1 + 1) as f64
            };
        }
    }
    for t in head..k {
        data[t * k + t] = 1.0;
    }
    ChannelMatrix::new(k, k, data)
}
