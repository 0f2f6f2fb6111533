//! Instance generators, Monte Carlo trials, cost sweeps and the
//! count-sketch baseline.

pub mod gen;
pub mod sweep;
pub mod trials;

pub use gen::Generator;
pub use sweep::{baseline_compare, count_sketch_recover, sweep_cost, write_csv, BaselineRow, SweepRow};
pub use trials::{run_trials, three_sigma, TrialConfig, TrialReport, TrialRow};
