//! Adaptive pipeline against non-adaptive count-sketch recovery with the
//! same number of measurements, on two-level instances with a short and a
//! long tail.
//!
//!     cargo run --release --example baseline

use adaptive_linf::harness::{baseline_compare, BaselineRow, Generator};

fn main() -> adaptive_linf::Result<()> {
    let m = 1u64 << 16;
    for gamma in [16.0, 1024.0] {
        let generator = Generator::TwoLevel { k1: 1, gamma };
        let rows = baseline_compare(1.0, 0.5, 0.5, m, &generator, 6, 3)?;
        println!("{}", generator.name());
        println!("{:>5} {:>9} {:>12} {:>6} {:>9} {:>12}", "trial", "budget", "adaptive", "G", "budget", "sketch");
        for r in &rows {
            println!("{:>5} {:>9} {:>12.3e} {:>6} {:>9} {:>12.3e}",
                r.trial, r.adaptive_total, r.adaptive_error, r.baseline_groups, r.baseline_total, r.baseline_error);
        }
        let mean = |f: fn(&BaselineRow) -> f64| rows.iter().map(f).sum::<f64>() / rows.len() as f64;
        println!("mean error: adaptive {:.3e}, count sketch {:.3e}\n", mean(|r| r.adaptive_error), mean(|r| r.baseline_error));
    }
    Ok(())
}
