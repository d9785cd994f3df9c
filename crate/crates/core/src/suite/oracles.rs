//! Independent oracles used by the verification suite. These deliberately
//! avoid the implementation paths they check: capacities come from closed
//! forms, not the alternating-maximization iteration.

/// Closed-form capacity of the asymmetric binary channel
/// [[1, 0], [ε, 1−ε]] (one noiseless input, one that leaks into the first
/// output with probability ε): log2(1 + (1−ε)·ε^{ε/(1−ε)}).
pub fn z_channel_capacity(eps: f64) -> f64 {
    assert!((0.0..1.0).contains(&eps));
    if eps == 0.0 {
        return 1.0;
    }
    (1.0 + (1.0 - eps) * eps.powf(eps / (1.0 - eps))).log2()
}

/// Capacity of a direct sum of channels with disjoint outputs:
/// 2^C = Σ_k 2^{C_k}.
pub fn direct_sum_capacity(block_capacities: &[f64]) -> f64 {
    block_capacities.iter().map(|&c| 2f64.powf(c)).sum::<f64>().log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_channel_limits() {
        assert!((z_channel_capacity(0.0) - 1.0).abs() <= 1e-15);
        // ε = 1/2 is the textbook value log2(5/4)
        assert!((z_channel_capacity(0.5) - (1.25f64).log2()).abs() <= 1e-15);
    }

    #[test]
    fn direct_sum_of_identities() {
        // I₂ ⊕ I₂ has capacity log2(2 + 2) = 2
        assert!((direct_sum_capacity(&[1.0, 1.0]) - 2.0).abs() <= 1e-15);
    }
}
