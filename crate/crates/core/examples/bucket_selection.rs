//! Count-sketch bucket selection on three isolated spikes.
//!
//!     cargo run --release --example bucket_selection

use adaptive_linf::random::{BucketHash, PairwiseHash, SeedSpec};
use adaptive_linf::select::{build_sketch, compute_q, select_streaming, SelectParams};
use adaptive_linf::{MeasurementOracle, SparseVector};

fn main() -> adaptive_linf::Result<()> {
    let m = 1u64 << 16;
    let buckets = 1024;
    let (eps, p, delta1) = (0.25, 1.0, 0.25);
    let params = SelectParams::for_guarantee(eps, p, delta1, buckets)?;
    println!("R = {}, G = {}, k = {}", params.repetitions, params.groups, params.k);

    let mut entries = vec![(100, 0.3), (30_000, -0.3), (60_000, 0.3)];
    entries.extend((0..100).map(|t| (200 + 641 * t, 0.001)));
    let x = SparseVector::from_entries(m, entries)?;

    let seed = SeedSpec::new(7);
    let trials = 200;
    let mut covered = 0;
    for t in 0..trials {
        let path = seed.derive("trial", t);
        let hash = BucketHash::Pairwise(PairwiseHash::new(&path.derive("bucket-hash", 0), buckets)?);
        let mut oracle = MeasurementOracle::new(x.clone());
        let sketch = build_sketch(&mut oracle, hash, &params, &path)?;
        let chosen = select_streaming(&sketch, params.k)?;
        let q = compute_q(&x, &hash, eps);
        if q.is_subset(&chosen) {
            covered += 1;
        }
        if t == 0 {
            let best = q.iter().map(|d| format!("{d}: {:.3}", sketch.bucket_score(d))).collect::<Vec<_>>();
            println!("important buckets and scores: {}", best.join(", "));
            println!("measurements: {}", oracle.cost_report().n1);
        }
    }
    println!("Q within the selected buckets in {covered}/{trials} trials");
    Ok(())
}
