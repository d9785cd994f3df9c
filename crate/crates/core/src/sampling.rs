//! Seeded random generators for states, measurements, isometries, and whole
//! decoding strategies. Everything is deterministic for a fixed seed; the
//! large randomized consistency sweeps and the `pr-sample` command are built
//! on these.

use crate::channel::{DensityMatrix, Isometry, Povm};
use crate::protocol::PrStrategy;
use crate::tensor::{cr, haar_random_unitary, hermitian_eigh, ComplexMatrix, C64};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl RngCore) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

/// Full-rank random state G G† / Tr(G G†) from a complex Gaussian G.
pub fn random_density_matrix(d: usize, rng: &mut impl RngCore) -> DensityMatrix {
    let g = gaussian_matrix(d, d, rng);
    let w = g.matmul(&g.adjoint());
    let trace = w.trace().re;
    DensityMatrix::new(w.scale(cr(1.0 / trace)).hermitian_part())
        .expect("normalized Wishart matrix is a state")
}

/// Random pure state from a Gaussian amplitude vector.
pub fn random_pure_state(d: usize, rng: &mut impl RngCore) -> DensityMatrix {
    let amps: Vec<C64> = (0..d)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect();
    let state = crate::tensor::StateVector::normalized(amps).expect("Gaussian vector is nonzero");
    DensityMatrix::pure(&state)
}

/// Random POVM with `outcomes` effects in dimension `d`.
///
/// Draws Wishart matrices A_k and whitens them by S^{-1/2} with S = Σ A_k,
/// so the effects are PSD and sum to the identity.
pub fn random_povm(d: usize, outcomes: usize, rng: &mut impl RngCore) -> Povm {
    assert!(outcomes >= 1);
    let raws: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let g = gaussian_matrix(d, d, rng);
            g.matmul(&g.adjoint())
        })
        .collect();
    let mut total = ComplexMatrix::zeros(d, d);
    for a in &raws {
        total = total.add(a);
    }
    let (vals, vecs) = hermitian_eigh(&total.hermitian_part()).expect("Hermitian sum");
    let inv_sqrt_diag: Vec<C64> =
        vals.iter().map(|&l| cr(1.0 / l.max(1e-300).sqrt())).collect();
    let inv_sqrt = vecs
        .matmul(&ComplexMatrix::diagonal(&inv_sqrt_diag))
        .matmul(&vecs.adjoint());
    let effects: Vec<ComplexMatrix> = raws
        .iter()
        .map(|a| inv_sqrt.matmul(a).matmul(&inv_sqrt).hermitian_part())
        .collect();
    Povm::new(effects).expect("whitened Wishart family is a POVM")
}

/// Haar-random isometry: the first d_a columns of a Haar unitary on the
/// joint receiver ⊗ environment space.
pub fn random_isometry(d_a: usize, d_b: usize, d_e: usize, rng: &mut impl RngCore) -> Isometry {
    assert!(d_a <= d_b * d_e, "input dimension exceeds the joint space");
    let u = haar_random_unitary(d_b * d_e, rng.next_u64());
    let v = ComplexMatrix::from_fn(d_b * d_e, d_a, |r, c| u.get(r, c));
    Isometry::new(v, (d_a, d_b, d_e)).expect("truncated unitary is an isometry")
}

/// An unassisted strategy: encodings plus a receiver measurement.
pub struct UnassistedStrategy {
    pub isometry: Isometry,
    pub encodings: Vec<DensityMatrix>,
    pub povm: Povm,
}

/// Random unassisted strategy with `n` symbols and as many decoder outcomes,
/// through a Haar-random dilation with receiver dimension `d_b`.
pub fn random_unassisted_strategy(
    n: usize,
    d_a: usize,
    d_b: usize,
    d_e: usize,
    rng: &mut impl RngCore,
) -> UnassistedStrategy {
    let isometry = random_isometry(d_a, d_b, d_e, rng);
    let encodings = (0..n).map(|_| random_density_matrix(d_a, rng)).collect();
    let povm = random_povm(d_b, n, rng);
    UnassistedStrategy { isometry, encodings, povm }
}

/// Random minimal-assistance strategy: random encodings, random local POVMs
/// on both sides, and a random stochastic decode table over `outputs`
/// labels.
pub fn random_minimal_strategy(
    n: usize,
    d_a: usize,
    d_b: usize,
    d_e: usize,
    outputs: usize,
    rng: &mut impl RngCore,
) -> (Isometry, crate::protocol::MinimalStrategy) {
    let isometry = random_isometry(d_a, d_b, d_e, rng);
    let encodings = (0..n).map(|_| random_density_matrix(d_a, rng)).collect();
    let bob_povm = random_povm(d_b, d_b, rng);
    let env_povm = random_povm(d_e, d_e, rng);
    let mut table = vec![0.0; d_b * d_e * outputs];
    for cell in table.chunks_mut(outputs) {
        let mut sum = 0.0;
        for v in cell.iter_mut() {
            *v = rng.gen_range(0.01..1.0);
            sum += *v;
        }
        for v in cell.iter_mut() {
            *v /= sum;
        }
    }
    let kernel = crate::protocol::DecodeKernel::new(d_b, d_e, outputs, table)
        .expect("normalized rows are stochastic");
    (isometry, crate::protocol::MinimalStrategy { encodings, bob_povm, env_povm, kernel })
}

/// Random PR-box strategy with `n` symbols, `n` decoder outcomes and `n`
/// output labels, through a Haar-random dilation with receiver dimension
/// `d_b`. Preparations are random pure states, decode maps are uniform.
pub fn random_pr_strategy(
    n: usize,
    d_a: usize,
    d_b: usize,
    d_e: usize,
    rng: &mut impl RngCore,
) -> PrStrategy {
    let isometry = random_isometry(d_a, d_b, d_e, rng);
    let prep: Vec<[DensityMatrix; 2]> = (0..n)
        .map(|_| [random_pure_state(d_a, rng), random_pure_state(d_a, rng)])
        .collect();
    let bob_povm = random_povm(d_b, n, rng);
    let f: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
    let g: Vec<u8> = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
    let dec: Vec<[usize; 2]> =
        (0..n).map(|_| [rng.gen_range(0..n), rng.gen_range(0..n)]).collect();
    PrStrategy { isometry, f, prep, bob_povm, g, dec, outputs: n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::unassisted_channel_matrix;
    use crate::tensor::is_psd;

    #[test]
    fn random_povm_is_valid_and_deterministic() {
        let mut rng = rng_from_seed(5);
        let p = random_povm(3, 5, &mut rng);
        assert_eq!(p.outcomes(), 5);
        for e in p.effects() {
            assert!(is_psd(e, 1e-9).unwrap());
        }
        let mut rng2 = rng_from_seed(5);
        let p2 = random_povm(3, 5, &mut rng2);
        assert_eq!(p.effects()[0], p2.effects()[0]);
    }

    #[test]
    fn random_strategy_yields_stochastic_matrix() {
        let mut rng = rng_from_seed(9);
        let s = random_unassisted_strategy(5, 7, 3, 3, &mut rng);
        // ChannelMatrix construction revalidates row-stochasticity
        let m = unassisted_channel_matrix(&s.isometry, &s.encodings, &s.povm).unwrap();
        assert_eq!((m.rows(), m.cols()), (5, 5));
    }

    #[test]
    fn random_pr_strategy_simulates() {
        let mut rng = rng_from_seed(11);
        let s = random_pr_strategy(6, 7, 3, 3, &mut rng);
        let a = crate::protocol::simulate_pr(&s).unwrap();
        let b = crate::protocol::simulate_pr_via_sr_cbit(&s).unwrap();
        assert!(a.max_abs_diff(&b) <= 1e-12);
    }
}
