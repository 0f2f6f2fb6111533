//! Measurement cost against dimension: `n2` grows like `log log m`.
//!
//!     cargo run --release --example cost_sweep

use adaptive_linf::harness::{sweep_cost, write_csv};
use adaptive_linf::pipeline::Variant;

fn main() -> adaptive_linf::Result<()> {
    let ms: Vec<u64> = [16, 24, 32, 40, 48, 56].iter().map(|e| 1u64 << e).chain([u64::MAX]).collect();
    let rows = sweep_cost(1.0, 0.25, 0.25, &ms, Variant::Pairwise, 0, 0)?;
    write_csv(std::io::stdout(), &rows)?;

    // Measured ledgers where the pipeline is cheap enough to run here.
    let rows = sweep_cost(1.0, 0.9, 0.9, &[1 << 18, 1 << 30, 1 << 40], Variant::Pairwise, 4, 5)?;
    write_csv(std::io::stdout(), &rows)
}
