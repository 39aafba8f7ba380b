//! Shared fixtures for the benchmarks.

use dirac_tomography::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `n` reproducible random normalized spinors.
pub fn spinors(n: usize, seed: u64) -> Vec<DiracSpinor> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| DiracSpinor::random_normalized(&mut rng)).collect()
}

/// Exact datasets for `psis` under `protocol`.
pub fn datasets(psis: &[DiracSpinor], protocol: Protocol) -> Vec<MarginalDataset> {
    psis.iter().map(|p| simulate_dataset(p, protocol, &ShotModel::Exact).expect("built-in protocol")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_reproducible() {
        assert_eq!(spinors(3, 1), spinors(3, 1));
        assert_eq!(datasets(&spinors(2, 1), Protocol::DiscreteMajorana).len(), 2);
    }
}
