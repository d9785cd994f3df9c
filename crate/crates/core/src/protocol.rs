//! Simulation of assisted decoding strategies: minimal assistance (local
//! measurements on receiver and environment merged by a classical kernel),
//! the two one-way variants, the concrete seven-symbol and general-dimension
//! protocols, PR-box-assisted strategies, and shared-randomness mixtures.
//!
//! All probabilities are computed in closed form from dense conditional
//! tables; nothing is sampled, so simulated matrices carry no Monte Carlo
//! noise. Strategies are immutable after construction and simulations are
//! pure, so independent simulations may run concurrently.

use crate::channel::{channel_apply, ChannelError, DensityMatrix, Isometry, Povm};
use crate::constructions::{
    canonical_basis_7, canonical_basis_general, matrix_general, product_index, ChannelMatrix,
    ConstructionError,
};
use crate::tensor::{kron, ComplexMatrix, StateVector, TensorError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("kernel row ({l},{k}) sums to {sum}, expected 1 within 1e-12")]
    KernelRowNotStochastic { l: usize, k: usize, sum: f64 },
    #[error("kernel table has {got} entries, expected {want}")]
    KernelShape { want: usize, got: usize },
    #[error("kernel covers {got} ({side}) outcomes but the measurement has {want}")]
    KernelGap { side: &'static str, want: usize, got: usize },
    #[error("strategy has {got} indexed POVMs but the partner measurement has {want} outcomes")]
    IndexedFamilySize { want: usize, got: usize },
    #[error("probability parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),
    #[error("mixture weight vector {0:?} is not a probability distribution")]
    InvalidWeights(Vec<f64>),
    #[error("cannot mix an empty collection of matrices")]
    EmptyMixture,
    #[error("matrix {index} has shape {rows}x{cols}, expected {want_rows}x{want_cols}")]
    MixShapeMismatch { index: usize, rows: usize, cols: usize, want_rows: usize, want_cols: usize },
    #[error("PR strategy field {field} has size {got}, expected {want}")]
    PrShape { field: &'static str, want: usize, got: usize },
    #[error("PR decode map sends outcome {0} to output {1}, beyond {2} outputs")]
    PrDecodeRange(usize, usize, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Stochastic decoding table q(y | l, k) over receiver outcome l and
/// environment outcome k. Every conditional row sums to 1 within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeKernel {
    bob_outcomes: usize,
    env_outcomes: usize,
    outputs: usize,
    table: Vec<f64>, // [(l * env_outcomes + k) * outputs + y]
}

impl DecodeKernel {
    pub fn new(
        bob_outcomes: usize,
        env_outcomes: usize,
        outputs: usize,
        table: Vec<f64>,
    ) -> Result<Self, ProtocolError> {
        let want = bob_outcomes * env_outcomes * outputs;
        if table.len() != want {
            return Err(ProtocolError::KernelShape { want, got: table.len() });
        }
        for l in 0..bob_outcomes {
            for k in 0..env_outcomes {
                let base = (l * env_outcomes + k) * outputs;
                let sum: f64 = table[base..base + outputs].iter().sum();
                if (sum - 1.0).abs() > 1e-12 || table[base..base + outputs].iter().any(|&q| q < 0.0)
                {
                    return Err(ProtocolError::KernelRowNotStochastic { l, k, sum });
                }
            }
        }
        Ok(Self { bob_outcomes, env_outcomes, outputs, table })
    }

    /// Deterministic kernel y = f(l, k).
    pub fn deterministic(
        bob_outcomes: usize,
        env_outcomes: usize,
        outputs: usize,
        f: impl Fn(usize, usize) -> usize,
    ) -> Self {
        let mut table = vec![0.0; bob_outcomes * env_outcomes * outputs];
        for l in 0..bob_outcomes {
            for k in 0..env_outcomes {
                let y = f(l, k);
                assert!(y < outputs, "decode target out of range");
                table[(l * env_outcomes + k) * outputs + y] = 1.0;
            }
        }
        Self { bob_outcomes, env_outcomes, outputs, table }
    }

    #[inline]
    pub fn prob(&self, l: usize, k: usize, y: usize) -> f64 {
        self.table[(l * self.env_outcomes + k) * self.outputs + y]
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn bob_outcomes(&self) -> usize {
        self.bob_outcomes
    }

    pub fn env_outcomes(&self) -> usize {
        self.env_outcomes
    }
}

/// Minimal-assistance strategy: local POVMs on both sides, no communication
/// before measurement, outcomes merged by a classical kernel.
#[derive(Debug, Clone)]
pub struct MinimalStrategy {
    pub encodings: Vec<DensityMatrix>,
    pub bob_povm: Povm,
    pub env_povm: Povm,
    pub kernel: DecodeKernel,
}

/// The three assistance variants. `EnvToBob` lets the receiver pick a POVM
/// conditioned on the environment outcome; `BobToEnv` conditions the
/// environment measurement on the receiver outcome and keeps a classical
/// decode kernel; `Minimal` allows neither direction.
#[derive(Debug, Clone)]
pub enum AssistedStrategy {
    Minimal(MinimalStrategy),
    EnvToBob { encodings: Vec<DensityMatrix>, env_povm: Povm, bob_povms: Vec<Povm> },
    BobToEnv { encodings: Vec<DensityMatrix>, bob_povm: Povm, env_povms: Vec<Povm>, kernel: DecodeKernel },
}

/// PR-box-assisted strategy.
///
/// Per transmission the box is queried once on each side, sender first: the
/// sender inputs f(x) and receives bit a, prepares prep(x, a); the receiver
/// measures, inputs g(j), receives b with a ⊕ b = f(x)·g(j), and outputs
/// dec(j, b).
#[derive(Debug, Clone)]
pub struct PrStrategy {
    pub isometry: Isometry,
    /// sender-side box input per symbol
    pub f: Vec<u8>,
    /// prep[x][a]: state prepared for symbol x given box output a
    pub prep: Vec<[DensityMatrix; 2]>,
    pub bob_povm: Povm,
    /// receiver-side box input per measurement outcome
    pub g: Vec<u8>,
    /// dec[j][b]: output label for outcome j and box output b
    pub dec: Vec<[usize; 2]>,
    pub outputs: usize,
}

impl PrStrategy {
    fn validate(&self) -> Result<(), ProtocolError> {
        let n = self.f.len();
        let m = self.bob_povm.outcomes();
        if self.prep.len() != n {
            return Err(ProtocolError::PrShape { field: "prep", want: n, got: self.prep.len() });
        }
        if self.g.len() != m {
            return Err(ProtocolError::PrShape { field: "g", want: m, got: self.g.len() });
        }
        if self.dec.len() != m {
            return Err(ProtocolError::PrShape { field: "dec", want: m, got: self.dec.len() });
        }
        for row in &self.dec {
            for &y in row {
                if y >= self.outputs {
                    return Err(ProtocolError::PrDecodeRange(0, y, self.outputs));
                }
            }
        }
        if self.bob_povm.dim() != self.isometry.receiver_dim() {
            return Err(ProtocolError::DimensionMismatch(format!(
                "POVM dimension {} vs receiver dimension {}",
                self.bob_povm.dim(),
                self.isometry.receiver_dim()
            )));
        }
        Ok(())
    }

    pub fn inputs(&self) -> usize {
        self.f.len()
    }
}

fn joint_outcome_probs(
    v: &Isometry,
    rho: &DensityMatrix,
    bob_povm: &Povm,
    env_povm: &Povm,
) -> Result<Vec<Vec<f64>>, ProtocolError> {
    check_strategy_dims(v, rho, bob_povm, env_povm)?;
    let joint = v.conjugate(rho.matrix());
    let mut probs = vec![vec![0.0; env_povm.outcomes()]; bob_povm.outcomes()];
    for (l, lam_b) in bob_povm.effects().iter().enumerate() {
        for (k, lam_e) in env_povm.effects().iter().enumerate() {
            let effect = kron(lam_b, lam_e);
            probs[l][k] = effect.trace_product(&joint).re;
        }
    }
    Ok(probs)
}

fn check_strategy_dims(
    v: &Isometry,
    rho: &DensityMatrix,
    bob_povm: &Povm,
    env_povm: &Povm,
) -> Result<(), ProtocolError> {
    if rho.dim() != v.input_dim() {
        return Err(ProtocolError::DimensionMismatch(format!(
            "encoding dimension {} vs channel input {}",
            rho.dim(),
            v.input_dim()
        )));
    }
    if bob_povm.dim() != v.receiver_dim() || env_povm.dim() != v.environment_dim() {
        return Err(ProtocolError::DimensionMismatch(format!(
            "POVM dims ({}, {}) vs channel output dims ({}, {})",
            bob_povm.dim(),
            env_povm.dim(),
            v.receiver_dim(),
            v.environment_dim()
        )));
    }
    Ok(())
}

/// Channel matrix of an assisted strategy through the dilation `v`.
///
/// Minimal: P_ij = Σ_{l,k} q(j|l,k) · Tr[(Λ_l ⊗ Λ_k) VρᵢV†]. The one-way
/// variants replace one local POVM by an outcome-indexed family.
pub fn simulate_assisted(
    v: &Isometry,
    strategy: &AssistedStrategy,
) -> Result<ChannelMatrix, ProtocolError> {
    match strategy {
        AssistedStrategy::Minimal(s) => simulate_minimal(v, s),
        AssistedStrategy::EnvToBob { encodings, env_povm, bob_povms } => {
            if bob_povms.len() != env_povm.outcomes() {
                return Err(ProtocolError::IndexedFamilySize {
                    want: env_povm.outcomes(),
                    got: bob_povms.len(),
                });
            }
            let outputs = bob_povms.first().map(|p| p.outcomes()).unwrap_or(0);
            for p in bob_povms {
                if p.outcomes() != outputs {
                    return Err(ProtocolError::IndexedFamilySize { want: outputs, got: p.outcomes() });
                }
            }
            let mut rows = Vec::with_capacity(encodings.len());
            for rho in encodings {
                let mut row = vec![0.0; outputs];
                for (k, bob_povm) in bob_povms.iter().enumerate() {
                    let probs = joint_outcome_probs(v, rho, bob_povm, env_povm)?;
                    for (j, row_entry) in row.iter_mut().enumerate() {
                        *row_entry += probs[j][k];
                    }
                }
                rows.push(row);
            }
            Ok(ChannelMatrix::from_rows(rows)?)
        }
        AssistedStrategy::BobToEnv { encodings, bob_povm, env_povms, kernel } => {
            if env_povms.len() != bob_povm.outcomes() {
                return Err(ProtocolError::IndexedFamilySize {
                    want: bob_povm.outcomes(),
                    got: env_povms.len(),
                });
            }
            if kernel.bob_outcomes() != bob_povm.outcomes() {
                return Err(ProtocolError::KernelGap {
                    side: "receiver",
                    want: bob_povm.outcomes(),
                    got: kernel.bob_outcomes(),
                });
            }
            let mut rows = Vec::with_capacity(encodings.len());
            for rho in encodings {
                let mut row = vec![0.0; kernel.outputs()];
                for (l, env_povm) in env_povms.iter().enumerate() {
                    if kernel.env_outcomes() != env_povm.outcomes() {
                        return Err(ProtocolError::KernelGap {
                            side: "environment",
                            want: env_povm.outcomes(),
                            got: kernel.env_outcomes(),
                        });
                    }
                    let probs = joint_outcome_probs(v, rho, bob_povm, env_povm)?;
                    for k in 0..env_povm.outcomes() {
                        for (y, row_entry) in row.iter_mut().enumerate() {
                            *row_entry += probs[l][k] * kernel.prob(l, k, y);
                        }
                    }
                }
                rows.push(row);
            }
            Ok(ChannelMatrix::from_rows(rows)?)
        }
    }
}

fn simulate_minimal(v: &Isometry, s: &MinimalStrategy) -> Result<ChannelMatrix, ProtocolError> {
    if s.kernel.bob_outcomes() != s.bob_povm.outcomes()
        || s.kernel.env_outcomes() != s.env_povm.outcomes()
    {
        return Err(ProtocolError::KernelGap {
            side: "joint",
            want: s.bob_povm.outcomes() * s.env_povm.outcomes(),
            got: s.kernel.bob_outcomes() * s.kernel.env_outcomes(),
        });
    }
    let mut rows = Vec::with_capacity(s.encodings.len());
    for rho in &s.encodings {
        let probs = joint_outcome_probs(v, rho, &s.bob_povm, &s.env_povm)?;
        let mut row = vec![0.0; s.kernel.outputs()];
        for (l, by_env) in probs.iter().enumerate() {
            for (k, &p_lk) in by_env.iter().enumerate() {
                if p_lk == 0.0 {
                    continue;
                }
                for (y, row_entry) in row.iter_mut().enumerate() {
                    *row_entry += p_lk * s.kernel.prob(l, k, y);
                }
            }
        }
        rows.push(row);
    }
    Ok(ChannelMatrix::from_rows(rows)?)
}

/// Rewrite a minimal strategy as env→receiver assistance producing the same
/// matrix: the receiver keeps the one physical measurement {Λ_l} and only the
/// classical relabelling depends on the communicated outcome,
/// Λ_{j|k} = Σ_l q(j|l,k) Λ_l.
pub fn minimal_to_env_assisted(s: &MinimalStrategy) -> Result<AssistedStrategy, ProtocolError> {
    let d_b = s.bob_povm.dim();
    let mut bob_povms = Vec::with_capacity(s.env_povm.outcomes());
    for k in 0..s.env_povm.outcomes() {
        let effects: Vec<ComplexMatrix> = (0..s.kernel.outputs())
            .map(|j| {
                let mut eff = ComplexMatrix::zeros(d_b, d_b);
                for (l, lam) in s.bob_povm.effects().iter().enumerate() {
                    let q = s.kernel.prob(l, k, j);
                    if q != 0.0 {
                        eff = eff.add(&lam.scale(crate::tensor::cr(q)));
                    }
                }
                eff
            })
            .collect();
        bob_povms.push(Povm::new(effects)?);
    }
    Ok(AssistedStrategy::EnvToBob {
        encodings: s.encodings.clone(),
        env_povm: s.env_povm.clone(),
        bob_povms,
    })
}

/// The seven-symbol minimal-assistance protocol.
///
/// The isometry carries the canonical seven-vector basis (optionally
/// reparametrized by a unitary rotation of the input space), the encodings
/// are the rotated computational states mapped onto that basis, both sides
/// measure in the computational basis, and the kernel resolves correlated
/// outcomes with a {p, 1−p} coin:
/// anti-correlated pairs identify the first five symbols, (0,0) and (1,1)
/// decode to y₆ with probability p and y₇ otherwise, (2,2) always to y₇.
/// The cell (0,1) never fires for in-range encodings; it is pinned to y₇ to
/// keep the kernel total.
pub fn strategy_n7(
    p: f64,
    rotation: Option<&ComplexMatrix>,
) -> Result<(Isometry, MinimalStrategy), ProtocolError> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(ProtocolError::ParameterOutOfRange(p));
    }
    let basis = canonical_basis_7();
    let isometry = crate::channel::isometry_from_subspace_basis(&basis, (3, 3), rotation)?;
    let encodings: Vec<DensityMatrix> = match rotation {
        None => (0..7).map(|i| DensityMatrix::basis_state(7, i)).collect(),
        Some(u) => {
            let u_dag = u.adjoint();
            (0..7)
                .map(|i| {
                    let col: Vec<_> = (0..7).map(|r| u_dag.get(r, i)).collect();
                    DensityMatrix::pure(&StateVector::new(col).expect("unitary column"))
                })
                .collect()
        }
    };
    let mut table = vec![0.0; 3 * 3 * 7];
    let mut det = |l: usize, k: usize, y: usize| table[(l * 3 + k) * 7 + y] = 1.0;
    det(0, 2, 0);
    det(1, 0, 1);
    det(1, 2, 2);
    det(2, 0, 3);
    det(2, 1, 4);
    det(2, 2, 6);
    det(0, 1, 6); // unreachable cell, pinned
    for (l, k) in [(0, 0), (1, 1)] {
        table[(l * 3 + k) * 7 + 5] = p;
        table[(l * 3 + k) * 7 + 6] = 1.0 - p;
    }
    let kernel = DecodeKernel::new(3, 3, 7, table)?;
    Ok((
        isometry,
        MinimalStrategy {
            encodings,
            bob_povm: Povm::computational(3),
            env_povm: Povm::computational(3),
            kernel,
        },
    ))
}

/// The general-dimension minimal-assistance protocol for d ≥ 3.
///
/// Computational encodings map onto the canonical d²−1 basis; both sides
/// measure computationally. Distinct outcomes (b, e) identify the product
/// symbol at `product_index(b, e, d)`; equal outcomes in {0, 1} decode to
/// y₀ and equal outcomes l ≥ 2 to y_{l−1}.
pub fn strategy_general(d: usize) -> Result<(Isometry, MinimalStrategy), ProtocolError> {
    let basis = canonical_basis_general(d)?;
    let k_d = d * d - 1;
    let isometry = crate::channel::isometry_from_subspace_basis(&basis, (d, d), None)?;
    let encodings: Vec<DensityMatrix> = (0..k_d).map(|i| DensityMatrix::basis_state(k_d, i)).collect();
    let kernel = DecodeKernel::deterministic(d, d, k_d, |b, e| {
        if b != e {
            product_index(b, e, d).expect("b != e")
        } else if b <= 1 {
            0
        } else {
            b - 1
        }
    });
    Ok((
        isometry,
        MinimalStrategy {
            encodings,
            bob_povm: Povm::computational(d),
            env_povm: Povm::computational(d),
            kernel,
        },
    ))
}

/// Channel matrix of a PR-box strategy, evaluated in closed form:
/// P(y|x) = Σ_a ½ Σ_j Tr[M_j N(prep(x,a))] · [y = dec(j, a ⊕ f(x)g(j))].
pub fn simulate_pr(s: &PrStrategy) -> Result<ChannelMatrix, ProtocolError> {
    s.validate()?;
    let mut rows = Vec::with_capacity(s.inputs());
    for x in 0..s.inputs() {
        let mut row = vec![0.0; s.outputs];
        // the box answers the sender first: a is an unbiased coin, and the
        // receiver's later query returns b = a ⊕ f(x)·g(j)
        for a in 0..2u8 {
            let out = channel_apply(&s.isometry, &s.prep[x][a as usize])?;
            for (j, effect) in s.bob_povm.effects().iter().enumerate() {
                let prob = effect.trace_product(out.matrix()).re;
                let b = a ^ (s.f[x] & s.g[j]);
                row[s.dec[j][b as usize]] += 0.5 * prob;
            }
        }
        rows.push(row);
    }
    Ok(ChannelMatrix::from_rows(rows)?)
}

/// The substitute protocol realizing the same statistics from a shared
/// unbiased bit λ plus one classical bit: the sender uses a := λ and
/// transmits f(x); the receiver sets b := λ ⊕ f(x)·g(j).
pub fn simulate_pr_via_sr_cbit(s: &PrStrategy) -> Result<ChannelMatrix, ProtocolError> {
    s.validate()?;
    let mut rows = Vec::with_capacity(s.inputs());
    for x in 0..s.inputs() {
        let sent_bit = s.f[x];
        let mut row = vec![0.0; s.outputs];
        for lambda in 0..2u8 {
            let prepared = &s.prep[x][lambda as usize]; // a := λ
            let out = channel_apply(&s.isometry, prepared)?;
            for (j, effect) in s.bob_povm.effects().iter().enumerate() {
                let prob = effect.trace_product(out.matrix()).re;
                let b = lambda ^ (sent_bit & s.g[j]);
                row[s.dec[j][b as usize]] += 0.5 * prob;
            }
        }
        rows.push(row);
    }
    Ok(ChannelMatrix::from_rows(rows)?)
}

/// Entrywise convex combination of channel matrices.
pub fn mix(matrices: &[ChannelMatrix], weights: &[f64]) -> Result<ChannelMatrix, ProtocolError> {
    let first = matrices.first().ok_or(ProtocolError::EmptyMixture)?;
    if weights.len() != matrices.len()
        || weights.iter().any(|&w| !(0.0..=1.0 + 1e-12).contains(&w))
        || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12
    {
        return Err(ProtocolError::InvalidWeights(weights.to_vec()));
    }
    let (n, m) = (first.rows(), first.cols());
    let mut data = vec![0.0; n * m];
    for (index, (mat, &w)) in matrices.iter().zip(weights).enumerate() {
        if mat.rows() != n || mat.cols() != m {
            return Err(ProtocolError::MixShapeMismatch {
                index,
                rows: mat.rows(),
                cols: mat.cols(),
                want_rows: n,
                want_cols: m,
            });
        }
        for (d, e) in data.iter_mut().zip(mat.entries()) {
            *d += w * e;
        }
    }
    Ok(ChannelMatrix::new(n, m, data)?)
}

/// Simulation of the general-d protocol compared against its closed form;
/// convenience used by reports.
pub fn general_deviation(d: usize) -> Result<f64, ProtocolError> {
    let (v, s) = strategy_general(d)?;
    let sim = simulate_assisted(&v, &AssistedStrategy::Minimal(s))?;
    Ok(sim.max_abs_diff(&matrix_general(d)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::matrix_m7;
    use crate::tensor::haar_random_unitary;

    fn minimal(v: &Isometry, s: &MinimalStrategy) -> ChannelMatrix {
        simulate_assisted(v, &AssistedStrategy::Minimal(s.clone())).unwrap()
    }

    #[test]
    fn n7_matches_closed_form_at_quarter_points() {
        for &p in &[0.0, 0.25, 0.5, 0.75, 1.0] {
            let (v, s) = strategy_n7(p, None).unwrap();
            let sim = minimal(&v, &s);
            assert!(sim.max_abs_diff(&matrix_m7(p).unwrap()) <= 1e-12, "p = {p}");
        }
    }

    #[test]
    fn n7_table_rows_for_last_symbols() {
        let p = 0.75;
        let (v, s) = strategy_n7(p, None).unwrap();
        let sim = minimal(&v, &s);
        assert!((sim.get(5, 5) - p).abs() <= 1e-13);
        assert!((sim.get(5, 6) - (1.0 - p)).abs() <= 1e-13);
        assert!((sim.get(6, 5) - p / 3.0).abs() <= 1e-13);
        assert!((sim.get(6, 6) - (1.0 - p / 3.0)).abs() <= 1e-13);
    }

    #[test]
    fn n7_rotation_invariance() {
        let u = haar_random_unitary(7, 7);
        let (v, s) = strategy_n7(0.6, Some(&u)).unwrap();
        let (v0, s0) = strategy_n7(0.6, None).unwrap();
        let rotated = minimal(&v, &s);
        let plain = minimal(&v0, &s0);
        assert!(rotated.max_abs_diff(&plain) <= 1e-12);
    }

    #[test]
    fn n7_rejects_bad_p() {
        assert!(strategy_n7(1.5, None).is_err());
    }

    #[test]
    fn trivial_environment_equals_unassisted() {
        let (v, s) = strategy_n7(0.5, None).unwrap();
        // replace the environment measurement with {I} and merge outcomes by
        // the receiver index alone
        let kernel = DecodeKernel::deterministic(3, 1, 3, |l, _| l);
        let trivial = MinimalStrategy {
            encodings: s.encodings.clone(),
            bob_povm: Povm::computational(3),
            env_povm: Povm::trivial(3),
            kernel,
        };
        let sim = minimal(&v, &trivial);
        let unassisted =
            crate::channel::unassisted_channel_matrix(&v, &s.encodings, &Povm::computational(3))
                .unwrap();
        assert!(sim.max_abs_diff(&unassisted) <= 1e-13);
    }

    #[test]
    fn env_to_bob_ignoring_k_collapses_to_minimal() {
        // a strategy whose conditional POVMs ignore the environment outcome
        // equals the minimal strategy with the same fixed relabelling
        let (v, s) = strategy_n7(1.0, None).unwrap();
        let fixed_relabel = DecodeKernel::deterministic(3, 3, 3, |l, _| l);
        let min = MinimalStrategy {
            encodings: s.encodings.clone(),
            bob_povm: s.bob_povm.clone(),
            env_povm: s.env_povm.clone(),
            kernel: fixed_relabel,
        };
        let env_to_bob = AssistedStrategy::EnvToBob {
            encodings: s.encodings.clone(),
            env_povm: s.env_povm.clone(),
            bob_povms: vec![s.bob_povm.clone(); 3],
        };
        let a = minimal(&v, &min);
        let b = simulate_assisted(&v, &env_to_bob).unwrap();
        assert!(a.max_abs_diff(&b) <= 1e-13);
    }

    #[test]
    fn minimal_embeds_into_env_assisted() {
        for &p in &[0.3, 1.0] {
            let (v, s) = strategy_n7(p, None).unwrap();
            let direct = minimal(&v, &s);
            let embedded = minimal_to_env_assisted(&s).unwrap();
            let via_env = simulate_assisted(&v, &embedded).unwrap();
            assert!(direct.max_abs_diff(&via_env) <= 1e-12, "p = {p}");
        }
    }

    #[test]
    fn bob_to_env_with_fixed_family_matches_minimal() {
        let (v, s) = strategy_n7(0.4, None).unwrap();
        let bob_to_env = AssistedStrategy::BobToEnv {
            encodings: s.encodings.clone(),
            bob_povm: s.bob_povm.clone(),
            env_povms: vec![s.env_povm.clone(); 3],
            kernel: s.kernel.clone(),
        };
        let a = minimal(&v, &s);
        let b = simulate_assisted(&v, &bob_to_env).unwrap();
        assert!(a.max_abs_diff(&b) <= 1e-13);
    }

    #[test]
    fn general_d3_matches_closed_form() {
        assert!(general_deviation(3).unwrap() <= 1e-12);
    }

    #[test]
    fn kernel_gap_is_rejected() {
        let (v, s) = strategy_n7(0.5, None).unwrap();
        // kernel covering only two receiver outcomes for a three-outcome POVM
        let short = DecodeKernel::deterministic(2, 3, 7, |_, _| 0);
        let broken = MinimalStrategy {
            encodings: s.encodings.clone(),
            bob_povm: s.bob_povm.clone(),
            env_povm: s.env_povm.clone(),
            kernel: short,
        };
        assert!(matches!(
            simulate_assisted(&v, &AssistedStrategy::Minimal(broken)),
            Err(ProtocolError::KernelGap { .. })
        ));
    }

    #[test]
    fn general_first_column_and_diagonal() {
        let d = 4;
        let (v, s) = strategy_general(d).unwrap();
        let sim = minimal(&v, &s);
        for k in 0..d - 1 {
            let kf = k as f64;
            let expect_first = 2.0 / ((kf + 1.0) * (kf + 2.0));
            assert!((sim.get(k, 0) - expect_first).abs() <= 1e-13, "row {k} first column");
            if k >= 1 {
                // at k = 0 the diagonal is the first column and carries all mass
                let expect_diag = (kf + 1.0) / (kf + 2.0);
                assert!((sim.get(k, k) - expect_diag).abs() <= 1e-13, "row {k} diagonal");
            }
        }
    }

    #[test]
    fn general_rejects_small_d() {
        assert!(strategy_general(2).is_err());
    }

    #[test]
    fn mix_basic_cases() {
        let i2 = ChannelMatrix::identity(2);
        let single = mix(&[i2.clone()], &[1.0]).unwrap();
        assert!(single.max_abs_diff(&i2) == 0.0);

        let swap = ChannelMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let half = mix(&[i2, swap], &[0.5, 0.5]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(half.get(i, j), 0.5);
            }
        }
    }

    #[test]
    fn mix_trace_is_linear() {
        let a = matrix_m7(0.2).unwrap();
        let b = matrix_m7(0.9).unwrap();
        let w = [0.3, 0.7];
        let mixed = mix(&[a.clone(), b.clone()], &w).unwrap();
        let want = w[0] * a.trace() + w[1] * b.trace();
        assert!((mixed.trace() - want).abs() <= 1e-12);
    }

    #[test]
    fn mix_rejects_bad_weights() {
        let i2 = ChannelMatrix::identity(2);
        assert!(mix(&[i2.clone(), i2], &[0.5, 0.6]).is_err());
    }

    fn toy_pr_strategy(f_bits: Vec<u8>) -> PrStrategy {
        // identity channel on 3 levels, computational decoding, cyclic relabel
        let n = f_bits.len();
        let prep: Vec<[DensityMatrix; 2]> = (0..n)
            .map(|x| {
                [DensityMatrix::basis_state(3, x % 3), DensityMatrix::basis_state(3, (x + 1) % 3)]
            })
            .collect();
        PrStrategy {
            isometry: Isometry::identity_channel(3),
            f: f_bits,
            prep,
            bob_povm: Povm::computational(3),
            g: vec![1, 0, 1],
            dec: vec![[0, 1], [1, 2], [2, 0]],
            outputs: 3,
        }
    }

    #[test]
    fn pr_zero_f_reduces_to_shared_randomness() {
        // f ≡ 0 forces a = b, so the box is an unbiased shared coin over the
        // two preparations
        let s = toy_pr_strategy(vec![0, 0, 0]);
        let pr = simulate_pr(&s).unwrap();
        for x in 0..3 {
            let mut row = vec![0.0; 3];
            for a in 0..2usize {
                let out = channel_apply(&s.isometry, &s.prep[x][a]).unwrap();
                for (j, eff) in s.bob_povm.effects().iter().enumerate() {
                    row[s.dec[j][a]] += 0.5 * eff.trace_product(out.matrix()).re;
                }
            }
            for y in 0..3 {
                assert!((pr.get(x, y) - row[y]).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn pr_equals_sr_cbit_substitute() {
        for bits in [vec![0, 1, 0], vec![1, 1, 1], vec![1, 0, 1]] {
            let s = toy_pr_strategy(bits);
            let a = simulate_pr(&s).unwrap();
            let b = simulate_pr_via_sr_cbit(&s).unwrap();
            assert!(a.max_abs_diff(&b) <= 1e-12);
        }
    }

    #[test]
    fn pr_with_box_blind_preparation_is_relabelled_unassisted() {
        // prep independent of the box output: the receiver's box bit is an
        // unbiased coin, so the matrix is the unassisted one pushed through
        // the stochastic relabel j ↦ ½ dec(j,0) + ½ dec(j,1)
        let mut s = toy_pr_strategy(vec![1, 0, 1]);
        for pair in s.prep.iter_mut() {
            pair[1] = pair[0].clone();
        }
        let pr = simulate_pr(&s).unwrap();
        let unassisted = crate::channel::unassisted_channel_matrix(
            &s.isometry,
            &s.prep.iter().map(|p| p[0].clone()).collect::<Vec<_>>(),
            &s.bob_povm,
        )
        .unwrap();
        let mut relabelled = vec![vec![0.0; s.outputs]; 3];
        for x in 0..3 {
            for j in 0..3 {
                relabelled[x][s.dec[j][0]] += 0.5 * unassisted.get(x, j);
                relabelled[x][s.dec[j][1]] += 0.5 * unassisted.get(x, j);
            }
        }
        let relabelled = ChannelMatrix::from_rows(relabelled).unwrap();
        assert!(pr.max_abs_diff(&relabelled) <= 1e-13);
    }
}
