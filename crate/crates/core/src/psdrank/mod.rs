//! PSD-rank machinery: monotone and decomposition lower bounds, witness
//! extraction from quantum strategies, a numerical factorization solver, and
//! certificate assembly. The bound engine is pure and reentrant; solver
//! restarts may run concurrently with per-restart derived seeds.

pub mod bounds;
pub mod certificate;
pub mod factorization;
pub mod solver;

pub use bounds::{lower_bound, max_monotone, BoundMethod, LowerBound};
pub use certificate::{auto_hints, certify, CertifyConfig, RankCertificate, Verdict, WitnessHint, WitnessSource};
pub use factorization::{
    diagonal_factorization, factorization_from_channel, factorization_from_strategy,
    validate_factorization, FactorizationError, PsdFactorization,
};
pub use solver::{solve_factorization, SolverConfig, SolverOutcome};
