//! Monte Carlo failure rate of the pipeline, written as CSV to stdout.
//!
//!     cargo run --release --example trials

use adaptive_linf::harness::{run_trials, write_csv, Generator, TrialConfig, TrialRow};
use adaptive_linf::pipeline::{Mode, Variant};

fn main() -> adaptive_linf::Result<()> {
    let generators = [
        Generator::Spike { value: 1.0 },
        Generator::TwoLevel { k1: 2, gamma: 2.0 },
        Generator::RandomUnit { s: 50 },
    ];
    let mut rows = Vec::new();
    for generator in generators {
        let config = TrialConfig {
            generator,
            p: 1.0,
            eps: 0.25,
            delta: 0.25,
            m: 1 << 20,
            trials: 100,
            seed: 1,
            mode: Mode::Implicit,
            variant: Variant::Pairwise,
        };
        let report = run_trials(&config)?;
        rows.push(TrialRow::new(&config, &report));
    }
    write_csv(std::io::stdout(), &rows)
}
