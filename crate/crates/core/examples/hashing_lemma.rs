//! How often does a coordinate share its bucket with too much mass?
//!
//! Builds the vector that makes the hashing bound tight and estimates
//! `P(‖x_{B_j∖{j}}‖_p > ‖x_{[m]∖{j}}‖_p / (αD)^{1/p})` over fresh hashes.
//!
//!     cargo run --release --example hashing_lemma

use adaptive_linf::harness::gen::hash_adversary;
use adaptive_linf::random::{BucketHash, PairwiseHash, SeedSpec};
use adaptive_linf::select::bucket_residual_norm;

fn main() -> adaptive_linf::Result<()> {
    let (m, alpha, buckets, j) = (1u64 << 20, 0.1, 1000u64, 777_777u64);
    let draws = 10_000u64;
    let seed = SeedSpec::new(2024);
    for p in [1.0, 2.0] {
        let x = hash_adversary(m, alpha, buckets, p, j, 1.0)?;
        let bound = 1.0 / (alpha * buckets as f64).powf(1.0 / p);
        let (mut over, mut touched) = (0u64, 0u64);
        for t in 0..draws {
            let h = BucketHash::Pairwise(PairwiseHash::new(&seed.derive("hash", t), buckets)?);
            let noise = bucket_residual_norm(&x, &h, j, p);
            over += u64::from(noise > bound * (1.0 + 1e-12));
            touched += u64::from(noise > 0.0);
        }
        println!(
            "p = {p}: P(noise > bound) = {:.4}, P(any collision) = {:.4}, alpha = {alpha}",
            over as f64 / draws as f64,
            touched as f64 / draws as f64,
        );
    }
    Ok(())
}
