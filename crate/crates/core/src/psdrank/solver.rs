//! Numerical search for a size-r PSD factorization of a channel matrix.
//!
//! Parametrizes R_i = A_i†A_i and C_j = B_j†B_j, which keeps every factor
//! exactly PSD, and minimizes Σ_ij (Tr(R_i C_j) − M_ij)² by damped
//! least-squares steps on the A/B variables: each step solves the
//! Gauss–Newton normal equations in residual space with a Levenberg
//! regularizer and is accepted only if the residual decreases, so the
//! iteration interpolates between gradient descent and Newton behaviour and
//! the residual is monotone. Restarts are seeded independently and the best
//! result wins; ties go to the lowest restart index, so the outcome is
//! deterministic even when restarts run concurrently.
//!
//! Success and failure here are configuration, not truth: a converged
//! factorization is an upper-bound witness, while a failure to converge is
//! merely evidence; certificates cite lower bounds as the authority.

use crate::constructions::ChannelMatrix;
use crate::psdrank::factorization::PsdFactorization;
use crate::tensor::{cr, ComplexMatrix, C64};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

/// Budget and determinism knobs for [`solve_factorization`].
#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    /// Relative Frobenius residual declaring success.
    pub success_threshold: f64,
    /// Run restarts on the rayon pool. Result selection is order-independent.
    pub parallel: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { seed: 0, restarts: 50, max_iters: 300, success_threshold: 1e-6, parallel: false }
    }
}

/// Best factorization found across restarts.
#[derive(Debug, Clone)]
pub struct SolverOutcome {
    pub factorization: PsdFactorization,
    /// ‖realized − M‖_F / ‖M‖_F for the returned factorization.
    pub rel_residual: f64,
    pub converged: bool,
    pub best_restart: usize,
    pub iterations: usize,
}

pub fn solve_factorization(m: &ChannelMatrix, r: usize, cfg: &SolverConfig) -> SolverOutcome {
    assert!(r >= 1, "factorization size must be at least 1");
    let run = |restart: usize| -> (f64, usize, usize, State) {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(restart as u64 + 1);
        let (residual, iterations, state) = single_restart(m, r, cfg, &mut rng);
        (residual, restart, iterations, state)
    };
    let results: Vec<(f64, usize, usize, State)> = if cfg.parallel {
        (0..cfg.restarts).into_par_iter().map(run).collect()
    } else {
        (0..cfg.restarts).map(run).collect()
    };
    let best = results
        .into_iter()
        .min_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).expect("finite residuals"))
        .expect("at least one restart");
    let (rel_residual, best_restart, iterations, state) = best;
    let rows: Vec<ComplexMatrix> = state.a.iter().map(gram_of).collect();
    let cols: Vec<ComplexMatrix> = state.b.iter().map(gram_of).collect();
    SolverOutcome {
        factorization: PsdFactorization::new(r, rows, cols)
            .expect("A†A parametrization is PSD by construction"),
        rel_residual,
        converged: rel_residual <= cfg.success_threshold,
        best_restart,
        iterations,
    }
}

fn gram_of(a: &ComplexMatrix) -> ComplexMatrix {
    a.adjoint().matmul(a).hermitian_part()
}

#[derive(Clone)]
struct State {
    a: Vec<ComplexMatrix>,
    b: Vec<ComplexMatrix>,
}

impl State {
    fn realized(&self) -> (Vec<ComplexMatrix>, Vec<ComplexMatrix>) {
        (self.a.iter().map(gram_of).collect(), self.b.iter().map(gram_of).collect())
    }
}

fn residual_vector(m: &ChannelMatrix, rows: &[ComplexMatrix], cols: &[ComplexMatrix]) -> Vec<f64> {
    let mut e = Vec::with_capacity(rows.len() * cols.len());
    for r in rows {
        for c in cols {
            e.push(r.trace_product(c).re);
        }
    }
    for (idx, v) in e.iter_mut().enumerate() {
        *v -= m.entries()[idx];
    }
    e
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn single_restart(
    m: &ChannelMatrix,
    r: usize,
    cfg: &SolverConfig,
    rng: &mut impl RngCore,
) -> (f64, usize, State) {
    let n = m.rows();
    let mm = m.cols();
    let m_norm = norm(m.entries()).max(f64::MIN_POSITIVE);
    let mean = m.entries().iter().sum::<f64>() / (n * mm) as f64;
    let sigma = (mean.max(1e-3) / (r as f64).powi(3)).sqrt().sqrt();

    let draw = |rng: &mut dyn RngCore| {
        ComplexMatrix::from_fn(r, r, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re * sigma, im * sigma)
        })
    };
    let mut state = State {
        a: (0..n).map(|_| draw(rng)).collect(),
        b: (0..mm).map(|_| draw(rng)).collect(),
    };

    let (mut rows, mut cols) = state.realized();
    let mut e = residual_vector(m, &rows, &cols);
    let mut res = norm(&e) / m_norm;
    let mut best_res = res;
    let mut best_state = state.clone();
    let mut best_iter = 0;
    let mut lambda = 1e-2;

    // run well past the success threshold; close to a solution the damped
    // steps are quadratically convergent, so the extra iterations are few
    let floor = (cfg.success_threshold * 1e-6).max(1e-13);
    for iter in 0..cfg.max_iters {
        if best_res <= floor {
            break;
        }
        // Gauss–Newton kernel in residual space:
        // K[(ij),(kl)] = δ_ik Re Tr(C_j R_i C_l) + δ_jl Re Tr(R_i C_j R_k)
        let dim = n * mm;
        let mut k = vec![0.0; dim * dim];
        // X[i][l] = R_i C_l
        let x: Vec<Vec<ComplexMatrix>> =
            rows.iter().map(|ri| cols.iter().map(|cl| ri.matmul(cl)).collect()).collect();
        for i in 0..n {
            for j in 0..mm {
                for l in 0..mm {
                    let v = cols[j].trace_product(&x[i][l]).re;
                    k[(i * mm + j) * dim + (i * mm + l)] += v;
                }
            }
        }
        // W[j][k] = C_j R_k
        let w: Vec<Vec<ComplexMatrix>> =
            cols.iter().map(|cj| rows.iter().map(|rk| cj.matmul(rk)).collect()).collect();
        for j in 0..mm {
            for i in 0..n {
                for kk in 0..n {
                    let v = rows[i].trace_product(&w[j][kk]).re;
                    k[(i * mm + j) * dim + (kk * mm + j)] += v;
                }
            }
        }
        for v in k.iter_mut() {
            *v *= 4.0;
        }

        let diag_scale: Vec<f64> =
            (0..dim).map(|d| k[d * dim + d].max(1e-12 * m_norm * m_norm)).collect();
        let neg_e: Vec<f64> = e.iter().map(|v| -v).collect();

        let mut accepted = false;
        for _try in 0..10 {
            let mut kl = k.clone();
            for d in 0..dim {
                kl[d * dim + d] += lambda * diag_scale[d];
            }
            let Some(y) = cholesky_solve(&kl, dim, &neg_e) else {
                lambda *= 8.0;
                continue;
            };
            // map back through Jᵀ: ΔA_k = 2 Σ_j y[k,j] A_k C_j, ΔB_l = 2 Σ_i y[i,l] B_l R_i
            let mut trial = state.clone();
            for i in 0..n {
                let mut coeff = ComplexMatrix::zeros(r, r);
                for j in 0..mm {
                    let yij = y[i * mm + j];
                    if yij != 0.0 {
                        coeff = coeff.add(&cols[j].scale(cr(2.0 * yij)));
                    }
                }
                trial.a[i] = trial.a[i].add(&state.a[i].matmul(&coeff));
            }
            for j in 0..mm {
                let mut coeff = ComplexMatrix::zeros(r, r);
                for i in 0..n {
                    let yij = y[i * mm + j];
                    if yij != 0.0 {
                        coeff = coeff.add(&rows[i].scale(cr(2.0 * yij)));
                    }
                }
                trial.b[j] = trial.b[j].add(&state.b[j].matmul(&coeff));
            }
            let (trial_rows, trial_cols) = trial.realized();
            let trial_e = residual_vector(m, &trial_rows, &trial_cols);
            let trial_res = norm(&trial_e) / m_norm;
            if trial_res < res {
                state = trial;
                rows = trial_rows;
                cols = trial_cols;
                e = trial_e;
                res = trial_res;
                lambda = (lambda * 0.35).max(1e-14);
                accepted = true;
                break;
            }
            lambda *= 8.0;
        }
        if res < best_res {
            best_res = res;
            best_state = state.clone();
            best_iter = iter + 1;
        }
        if !accepted {
            // locally stuck; the remaining budget is better spent on the
            // next restart
            break;
        }
    }
    (best_res, best_iter, best_state)
}

/// Dense Cholesky solve for a small SPD system; None if not positive
/// definite within working precision.
fn cholesky_solve(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    // forward then back substitution
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    Some(x)
}
