//! Soft-rank permutation e-values from Monte Carlo resampled statistics.

use epbh::constructors::{soft_rank_evalue, PermutationStatistics};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> epbh::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let null = Normal::new(0.0, 1.0).unwrap();
    let resampled: Vec<f64> = (0..99).map(|_| null.sample(&mut rng)).collect();

    for l0 in [-1.0, 0.0, 2.0, 3.5] {
        for r in [0.0, 1.0, 3.0] {
            let s = soft_rank_evalue(&PermutationStatistics::new(l0, resampled.clone(), r)?);
            println!("L0 = {l0:>4}, r = {r}: E = {:>8.3}, P = {:.4}", s.e.get(), s.p.get());
        }
    }
    Ok(())
}
