//! Spotting one heavy coordinate among 2^40 with a handful of measurements.
//!
//!     cargo run --release --example spot

use adaptive_linf::random::SeedSpec;
use adaptive_linf::spot::{iid_condition_threshold, kstar, spot, CandidateSet, SpotSchedule, Variant};
use adaptive_linf::{MeasurementOracle, SparseVector};

fn main() -> adaptive_linf::Result<()> {
    let m = 1u64 << 40;
    let alpha = 0.5;
    let j = 987_654_321_012;
    let gamma = iid_condition_threshold(alpha, Variant::Pairwise);

    // Noise exactly at the tolerated level, spread over 20 coordinates.
    let noise = 1.0 / gamma / 20f64.sqrt();
    let mut entries: Vec<(u64, f64)> = (1..=20).map(|t| (t * 49_999_999_999, noise)).collect();
    entries.push((j, 1.0));
    let x = SparseVector::from_entries(m, entries)?;

    let schedule = SpotSchedule::for_dim(alpha, m)?;
    println!("k* = {}, hash ranges: {:?}", kstar(m)?, schedule.sizes());

    let mut oracle = MeasurementOracle::new(x);
    let out = spot(&mut oracle, CandidateSet::everything(), &schedule, &SeedSpec::new(1).root())?;
    for (k, step) in out.trace.iter().enumerate() {
        println!("step {k}: D = {:>20}, v = {:?}", step.range, step.value);
    }
    println!("found {:?} with {} measurements (true index {j})", out.found.as_slice(), out.measurements);
    Ok(())
}
