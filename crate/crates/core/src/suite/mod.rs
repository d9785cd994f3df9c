//! The verification suite: eleven numbered checks covering protocol
//! reproduction, fidelity and capacity values, rank certification, the
//! randomized consistency sweeps, solver behaviour, and the record of cited
//! results. The acceptance test target and the `paper-suite` command both
//! run exactly these, so a criterion passes in CI iff it passes on the
//! command line.
//!
//! Every check is deterministic for a fixed seed. Tolerances are pinned
//! here, in code.

pub mod oracles;

use crate::channel::unassisted_channel_matrix;
use crate::constructions::{
    canonical_basis_7, canonical_basis_general, matrix_general, matrix_m7, maximally_entangled,
    ChannelMatrix,
};
use crate::info::{
    capacity, cited_results, pr_fidelity_bound_n7, quantum_fidelity_bound, trace_fidelity,
    CapacityOptions, Justification,
};
use crate::protocol::{simulate_assisted, simulate_pr, simulate_pr_via_sr_cbit, strategy_general,
    strategy_n7, AssistedStrategy};
use crate::psdrank::{
    auto_hints, certify, factorization_from_channel, lower_bound, max_monotone,
    solve_factorization, validate_factorization, CertifyConfig, PsdFactorization, SolverConfig,
    Verdict,
};
use crate::sampling::{random_pr_strategy, random_unassisted_strategy};
use crate::tensor::{cr, haar_random_unitary, ComplexMatrix, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::time::{Duration, Instant};

/// One named assertion with the value and tolerance it was checked at.
/// Structural assertions carry no number.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value: Some(value), tolerance: Some(tolerance), passed: value <= tolerance }
    }

    fn exceeds(name: impl Into<String>, value: f64, floor: f64) -> Self {
        Self { name: name.into(), value: Some(value), tolerance: Some(floor), passed: value > floor }
    }

    fn structural(name: impl Into<String>, passed: bool) -> Self {
        Self { name: name.into(), value: None, tolerance: None, passed }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Wall-clock time, for console display; excluded from serialized
    /// reports so they stay byte-stable.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CriterionResult {
    fn collect(id: usize, name: &'static str, start: Instant, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self { id, name, passed, checks, elapsed: start.elapsed() }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Parallelize solver restarts and the big sampling sweeps.
    pub parallel: bool,
}

pub const CRITERIA: [(usize, &str); 11] = [
    (1, "protocol reproduction over the p-grid and rotations"),
    (2, "transmission fidelity values and separation"),
    (3, "rank certification of the seven-symbol family"),
    (4, "general-dimension reproduction and certification"),
    (5, "basis orthonormality and avoided vectors"),
    (6, "monotone orientation guard"),
    (7, "capacity against closed-form oracles"),
    (8, "box-assisted consistency and trace ceiling"),
    (9, "receiver-dimension factorization property"),
    (10, "solver convergence and infeasibility evidence"),
    (11, "cited results recorded, never computed"),
];

pub fn run_all(cfg: &SuiteConfig) -> Vec<CriterionResult> {
    (1..=11).map(|id| run_criterion(id, cfg)).collect()
}

pub fn run_criterion(id: usize, cfg: &SuiteConfig) -> CriterionResult {
    match id {
        1 => criterion_1(cfg),
        2 => criterion_2(),
        3 => criterion_3(cfg),
        4 => criterion_4(cfg),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(cfg),
        9 => criterion_9(cfg),
        10 => criterion_10(cfg),
        11 => criterion_11(),
        other => panic!("criterion {other} does not exist"),
    }
}

fn p_grid() -> Vec<f64> {
    (0..=20).map(|k| k as f64 / 20.0).collect()
}

fn criterion_1(cfg: &SuiteConfig) -> CriterionResult {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let rotations: Vec<Option<ComplexMatrix>> = std::iter::once(None)
        .chain((1..=5).map(|k| Some(haar_random_unitary(7, cfg.seed.wrapping_add(k)))))
        .collect();
    for p in p_grid() {
        let target = matrix_m7(p).expect("grid p is in range");
        for rot in &rotations {
            match strategy_n7(p, rot.as_ref())
                .and_then(|(v, s)| simulate_assisted(&v, &AssistedStrategy::Minimal(s)))
            {
                Ok(sim) => worst = worst.max(sim.max_abs_diff(&target)),
                Err(_) => ok = false,
            }
        }
    }
    let mut checks = vec![Check::at_most(
        "max |simulated − closed form| over 21 p-values × 6 isometries",
        worst,
        1e-12,
    )];
    checks.push(Check::structural("all simulations completed", ok));
    checks.push(Check::structural(
        "runtime under the 1 s budget",
        start.elapsed() < Duration::from_secs(1),
    ));
    CriterionResult::collect(1, CRITERIA[0].1, start, checks)
}

fn criterion_2() -> CriterionResult {
    let start = Instant::now();
    let mut checks = Vec::new();
    let t1 = trace_fidelity(&matrix_m7(1.0).unwrap()).unwrap();
    checks.push(Check::at_most("|Tr at p=1 − 20/3|", (t1 - 20.0 / 3.0).abs(), 1e-12));
    let mut worst: f64 = 0.0;
    let mut separated = true;
    let bound6 = quantum_fidelity_bound(6).value;
    for p in p_grid() {
        let t = trace_fidelity(&matrix_m7(p).unwrap()).unwrap();
        worst = worst.max((t - (6.0 + 2.0 * p / 3.0)).abs());
        if p > 0.0 && t <= bound6 {
            separated = false;
        }
    }
    checks.push(Check::at_most("max |Tr − (6 + 2p/3)| over the p-grid", worst, 1e-12));
    checks.push(Check::structural(
        "trace exceeds the 6-level ceiling for every p > 0",
        separated,
    ));
    CriterionResult::collect(2, CRITERIA[1].1, start, checks)
}

fn certify_cfg(cfg: &SuiteConfig) -> CertifyConfig {
    CertifyConfig {
        solver: SolverConfig { seed: cfg.seed, parallel: cfg.parallel, ..Default::default() },
        ..Default::default()
    }
}

fn criterion_3(cfg: &SuiteConfig) -> CriterionResult {
    let start = Instant::now();
    let mut checks = Vec::new();
    for &p in &[0.1, 0.25, 0.5, 0.75, 1.0] {
        let m = matrix_m7(p).unwrap();
        match certify(&m, &auto_hints(&m), &certify_cfg(cfg)) {
            Ok(cert) => {
                checks.push(Check::structural(
                    format!("p={p}: bounds 7/7 with verdict equal"),
                    cert.lower_bound() == 7 && cert.upper_bound == 7 && cert.verdict == Verdict::Equal,
                ));
                checks.push(Check::at_most(
                    format!("p={p}: witness residual"),
                    cert.witness_residual,
                    1e-10,
                ));
            }
            Err(e) => checks.push(Check::structural(format!("p={p}: certify failed: {e}"), false)),
        }
    }
    let m0 = matrix_m7(0.0).unwrap();
    match certify(&m0, &auto_hints(&m0), &certify_cfg(cfg)) {
        Ok(cert) => {
            checks.push(Check::structural(
                "p=0: lower bound 6",
                cert.lower_bound() == 6,
            ));
            checks.push(Check::structural(
                "p=0: validated size-6 witness",
                cert.upper_bound == 6 && cert.verdict == Verdict::Equal,
            ));
        }
        Err(e) => checks.push(Check::structural(format!("p=0: certify failed: {e}"), false)),
    }
    CriterionResult::collect(3, CRITERIA[2].1, start, checks)
}

fn criterion_4(cfg: &SuiteConfig) -> CriterionResult {
    let start = Instant::now();
    let mut checks = Vec::new();
    for d in [3usize, 4, 5] {
        let target = matrix_general(d).unwrap();
        match strategy_general(d)
            .and_then(|(v, s)| simulate_assisted(&v, &AssistedStrategy::Minimal(s)))
        {
            Ok(sim) => checks.push(Check::at_most(
                format!("d={d}: max |simulated − closed form|"),
                sim.max_abs_diff(&target),
                1e-12,
            )),
            Err(e) => checks.push(Check::structural(format!("d={d}: simulation failed: {e}"), false)),
        }
        match certify(&target, &auto_hints(&target), &certify_cfg(cfg)) {
            Ok(cert) => checks.push(Check::structural(
                format!("d={d}: bounds {}/{} equal {}", cert.lower_bound(), cert.upper_bound, d * d - 1),
                cert.lower_bound() == d * d - 1
                    && cert.upper_bound == d * d - 1
                    && cert.verdict == Verdict::Equal,
            )),
            Err(e) => checks.push(Check::structural(format!("d={d}: certify failed: {e}"), false)),
        }
    }
    checks.push(Check::structural(
        "runtime under the 30 s budget",
        start.elapsed() < Duration::from_secs(30),
    ));
    CriterionResult::collect(4, CRITERIA[3].1, start, checks)
}

fn criterion_5() -> CriterionResult {
    let start = Instant::now();
    let mut checks = Vec::new();
    for d in 3..=6usize {
        let basis = canonical_basis_general(d).unwrap();
        let mut gram_dev: f64 = 0.0;
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                gram_dev = gram_dev.max((a.inner(b) - cr(want)).norm());
            }
        }
        checks.push(Check::at_most(format!("d={d}: Gram deviation from identity"), gram_dev, 1e-12));
        let phi = maximally_entangled(d);
        let avoid: f64 =
            basis.iter().map(|v| phi.inner(v).norm()).fold(0.0, f64::max);
        checks.push(Check::at_most(format!("d={d}: overlap with the entangled vector"), avoid, 1e-12));
    }
    let seven = canonical_basis_7();
    let mut gram_dev: f64 = 0.0;
    for (i, a) in seven.iter().enumerate() {
        for (j, b) in seven.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            gram_dev = gram_dev.max((a.inner(b) - cr(want)).norm());
        }
    }
    checks.push(Check::at_most("seven-vector basis: Gram deviation", gram_dev, 1e-12));
    let ket01 = StateVector::basis(3, 0).tensor(&StateVector::basis(3, 1));
    let phi3 = maximally_entangled(3);
    let worst01: f64 = seven.iter().map(|v| ket01.inner(v).norm()).fold(0.0, f64::max);
    let worst_phi: f64 = seven.iter().map(|v| phi3.inner(v).norm()).fold(0.0, f64::max);
    checks.push(Check::at_most("seven-vector basis: overlap with |01⟩", worst01, 1e-12));
    checks.push(Check::at_most("seven-vector basis: overlap with the entangled vector", worst_phi, 1e-12));
    CriterionResult::collect(5, CRITERIA[4].1, start, checks)
}

fn criterion_6() -> CriterionResult {
    let start = Instant::now();
    let m = ChannelMatrix::from_rows(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
    let mut checks = Vec::new();
    checks.push(Check::at_most(
        "|max_monotone([[0,1],[0,1]]) − 1|",
        (max_monotone(&m) - 1.0).abs(),
        1e-15,
    ));
    // the explicit size-1 witness: R₁ = R₂ = [1], C₁ = [0], C₂ = [1]
    let one = ComplexMatrix::identity(1);
    let zero = ComplexMatrix::zeros(1, 1);
    let witness = PsdFactorization::new(1, vec![one.clone(), one.clone()], vec![zero, one])
        .expect("scalars are PSD");
    match validate_factorization(&m, &witness) {
        Ok(res) => checks.push(Check::at_most("size-1 witness residual", res, 1e-12)),
        Err(e) => checks.push(Check::structural(format!("witness rejected: {e}"), false)),
    }
    // regression: the row-maxima orientation would report 2 here
    let b = lower_bound(&m);
    checks.push(Check::structural(
        "lower bound engine reports 1, not the row-maxima value 2",
        b.value == 1,
    ));
    CriterionResult::collect(6, CRITERIA[5].1, start, checks)
}

fn criterion_7() -> CriterionResult {
    let start = Instant::now();
    let mut checks = Vec::new();
    let mut worst_id: f64 = 0.0;
    for n in 1..=8usize {
        match capacity(&ChannelMatrix::identity(n), &CapacityOptions::default()) {
            Ok(r) => worst_id = worst_id.max((r.bits - (n as f64).log2()).abs()),
            Err(_) => worst_id = f64::INFINITY,
        }
    }
    checks.push(Check::at_most("max |capacity(I_n) − log2 n| for n ≤ 8", worst_id, 1e-9));

    let m = matrix_m7(1.0).unwrap();
    let c_z = oracles::z_channel_capacity(1.0 / 3.0);
    let want = oracles::direct_sum_capacity(&[5f64.log2(), c_z]);
    match capacity(&m, &CapacityOptions::default()) {
        Ok(r) => checks.push(Check::at_most(
            "|capacity − log2(5 + 2^{C_Z})| at full strength",
            (r.bits - want).abs(),
            1e-6,
        )),
        Err(e) => checks.push(Check::structural(format!("capacity failed: {e}"), false)),
    }

    let opts = CapacityOptions { support: Some((0..6).collect()), ..Default::default() };
    match capacity(&m, &opts) {
        Ok(r) => checks.push(Check::at_most(
            "|masked capacity − log2 6| on the first six symbols",
            (r.bits - 6f64.log2()).abs(),
            1e-9,
        )),
        Err(e) => checks.push(Check::structural(format!("masked capacity failed: {e}"), false)),
    }
    CriterionResult::collect(7, CRITERIA[6].1, start, checks)
}

fn criterion_8(cfg: &SuiteConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(808);
    let mut worst_dev: f64 = 0.0;
    let mut worst_trace = f64::NEG_INFINITY;
    let mut failures = 0usize;
    const SAMPLES: usize = 10_000;
    for idx in 0..SAMPLES {
        let n = 5 + idx % 3;
        let s = random_pr_strategy(n, 7, 3, 3, &mut rng);
        match (simulate_pr(&s), simulate_pr_via_sr_cbit(&s)) {
            (Ok(a), Ok(b)) => {
                worst_dev = worst_dev.max(a.max_abs_diff(&b));
                worst_trace = worst_trace.max(a.trace());
            }
            _ => failures += 1,
        }
    }
    let bound = pr_fidelity_bound_n7();
    let mut checks = vec![
        Check::at_most(
            format!("max |box-assisted − substitute protocol| over {SAMPLES} strategies"),
            worst_dev,
            1e-12,
        ),
        Check::at_most("max square-matrix trace over sampled strategies", worst_trace, 5.0 + 1e-9),
        Check::structural("all sampled strategies simulated", failures == 0),
        Check::structural("box-assisted fidelity ceiling is 5", bound.value == 5.0),
        Check::at_most(
            "|(20/3 − ceiling) − 5/3| separation",
            (20.0 / 3.0 - bound.value - 5.0 / 3.0).abs(),
            1e-12,
        ),
    ];
    checks.push(Check::structural(
        "ceiling derivation carries a cited step",
        bound.chain.iter().any(|s| s.justification == Justification::Cited),
    ));
    CriterionResult::collect(8, CRITERIA[7].1, start, checks)
}

fn criterion_9(cfg: &SuiteConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(909);
    let mut worst_residual: f64 = 0.0;
    let mut worst_trace = f64::NEG_INFINITY;
    let mut wrong_size = 0usize;
    let mut failures = 0usize;
    const SAMPLES: usize = 1_000;
    for idx in 0..SAMPLES {
        let n = 3 + idx % 5;
        let d_a = 4 + idx % 4;
        let s = random_unassisted_strategy(n, d_a, 3, 3, &mut rng);
        let matrix = match unassisted_channel_matrix(&s.isometry, &s.encodings, &s.povm) {
            Ok(m) => m,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        worst_trace = worst_trace.max(matrix.trace());
        match factorization_from_channel(&s.isometry, &s.encodings, &s.povm) {
            Ok(f) => {
                if f.size() != 3 {
                    wrong_size += 1;
                }
                match validate_factorization(&matrix, &f) {
                    Ok(res) => worst_residual = worst_residual.max(res),
                    Err(_) => failures += 1,
                }
            }
            Err(_) => failures += 1,
        }
    }
    let checks = vec![
        Check::at_most(
            format!("max extracted-factorization residual over {SAMPLES} strategies"),
            worst_residual,
            1e-10,
        ),
        Check::at_most("max square-matrix trace over sampled strategies", worst_trace, 3.0 + 1e-9),
        Check::structural("every extracted factorization has the receiver size 3", wrong_size == 0),
        Check::structural("all sampled strategies simulated", failures == 0),
    ];
    CriterionResult::collect(9, CRITERIA[8].1, start, checks)
}

fn criterion_10(cfg: &SuiteConfig) -> CriterionResult {
    let start = Instant::now();
    let m = matrix_m7(1.0).unwrap();
    let solver = SolverConfig { seed: cfg.seed, parallel: cfg.parallel, ..Default::default() };
    debug_assert_eq!(solver.restarts, 50);
    let feasible = solve_factorization(&m, 7, &solver);
    let infeasible = solve_factorization(&m, 6, &solver);
    let mut checks = vec![
        Check::at_most(
            "relative residual at the feasible size 7 (50 restarts)",
            feasible.rel_residual,
            1e-6,
        ),
        Check::exceeds(
            "best relative residual at the infeasible size 6 (50 restarts)",
            infeasible.rel_residual,
            1e-3,
        ),
    ];
    checks.push(Check::structural(
        "runtime under the 2 min budget",
        start.elapsed() < Duration::from_secs(120),
    ));
    CriterionResult::collect(10, CRITERIA[9].1, start, checks)
}

fn criterion_11() -> CriterionResult {
    let start = Instant::now();
    let cited = cited_results();
    let ids: Vec<&str> = cited.iter().map(|c| c.id).collect();
    let mut checks = vec![
        Check::structural(
            "separable-measurement indistinguishability recorded as cited",
            ids.contains(&"sep-indistinguishable-range"),
        ),
        Check::structural(
            "LOCC indistinguishability of orthocomplement bases recorded as cited",
            ids.contains(&"locc-indistinguishable-orthocomplement"),
        ),
        Check::structural("no-hypersignaling recorded as cited", ids.contains(&"no-hypersignaling")),
    ];
    // in the fidelity-ceiling chain the cited step is never marked computed
    let chain = pr_fidelity_bound_n7().chain;
    checks.push(Check::structural(
        "derivation chain marks the imported inclusion as cited, not computed",
        chain
            .iter()
            .filter(|s| s.claim.contains("no-hypersignaling"))
            .all(|s| s.justification == Justification::Cited),
    ));
    CriterionResult::collect(11, CRITERIA[10].1, start, checks)
}

/// Deterministic sanity probe used by tests: two runs with one seed agree.
pub fn results_fingerprint(results: &[CriterionResult]) -> String {
    let mut out = String::new();
    for r in results {
        out.push_str(&format!("{}:{}", r.id, r.passed));
        for c in &r.checks {
            out.push_str(&format!(
                "|{}={:?},{:?},{}",
                c.name,
                c.value.map(f64::to_bits),
                c.tolerance.map(f64::to_bits),
                c.passed
            ));
        }
        out.push('\n');
    }
    out
}
