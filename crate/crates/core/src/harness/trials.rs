//! Monte Carlo trials of the full pipeline.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::harness::gen::Generator;
use crate::measurement::{CostLedger, MeasurementOracle};
use crate::pipeline::{approximate, derive_params, Mode, Variant};
use crate::random::SeedSpec;
use crate::vector::{linf_dist, IndexSet};

#[derive(Clone, Debug, PartialEq)]
pub struct TrialConfig {
    pub generator: Generator,
    pub p: f64,
    pub eps: f64,
    pub delta: f64,
    pub m: u64,
    pub trials: u64,
    pub seed: u64,
    pub mode: Mode,
    pub variant: Variant,
}

/// One pipeline run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSample {
    pub error: f64,
    pub failed: bool,
    pub selected: IndexSet,
    pub ledger: CostLedger,
}

/// Per-stage min, mean and max over a set of ledgers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerStats {
    pub min: CostLedger,
    pub mean: [f64; 4],
    pub max: CostLedger,
}

impl LedgerStats {
    pub fn from_ledgers<'a>(ledgers: impl IntoIterator<Item = &'a CostLedger>) -> Option<Self> {
        let mut it = ledgers.into_iter();
        let first = *it.next()?;
        let (mut min, mut max) = (first, first);
        let mut sum = [first.n1, first.n2, first.n3, first.total()].map(u128::from);
        let mut n = 1u128;
        for l in it {
            min = CostLedger { n1: min.n1.min(l.n1), n2: min.n2.min(l.n2), n3: min.n3.min(l.n3) };
            max = CostLedger { n1: max.n1.max(l.n1), n2: max.n2.max(l.n2), n3: max.n3.max(l.n3) };
            for (s, v) in sum.iter_mut().zip([l.n1, l.n2, l.n3, l.total()]) {
                *s += u128::from(v);
            }
            n += 1;
        }
        Some(Self {
            min,
            mean: sum.map(|s| s as f64 / n as f64),
            max,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    pub trials: u64,
    pub successes: u64,
    pub failures: u64,
    pub mean_error: f64,
    pub max_error: f64,
    pub ledger: LedgerStats,
    pub samples: Vec<TrialSample>,
}

impl TrialReport {
    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }

    /// `3·√(r(1−r)/N)` at the empirical rate `r`.
    pub fn half_width(&self) -> f64 {
        three_sigma(self.failure_rate(), self.trials)
    }
}

/// `3·√(q(1−q)/n)`, the binomial 3σ half-width at rate `q`.
pub fn three_sigma(q: f64, n: u64) -> f64 {
    3.0 * (q * (1.0 - q) / n as f64).sqrt()
}

/// Runs `config.trials` independent trials in parallel.
///
/// Trial `t` draws its instance and its algorithm randomness from seed paths
/// keyed by `t`, so the report does not depend on scheduling.
pub fn run_trials(config: &TrialConfig) -> Result<TrialReport> {
    if config.trials == 0 {
        return Err(crate::Error::invalid("trial count must be at least 1"));
    }
    let params = derive_params(config.p, config.eps, config.delta, config.m, config.variant)?;
    let seed = SeedSpec::new(config.seed);
    let samples = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let path = seed.derive("trial", t);
            let x = config.generator.sample(config.m, config.p, &path.derive("instance", 0))?;
            let mut oracle = MeasurementOracle::new(x.clone());
            let out = approximate(&mut oracle, &params, config.mode, &path.derive("algorithm", 0))?;
            let error = linf_dist(&x, &out.z)?;
            Ok(TrialSample {
                error,
                failed: error > config.eps,
                selected: out.selected,
                ledger: out.ledger,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(samples))
}

pub fn summarize(samples: Vec<TrialSample>) -> TrialReport {
    let failures = samples.iter().filter(|s| s.failed).count() as u64;
    let trials = samples.len() as u64;
    TrialReport {
        trials,
        successes: trials - failures,
        failures,
        mean_error: samples.iter().map(|s| s.error).sum::<f64>() / trials as f64,
        max_error: samples.iter().map(|s| s.error).fold(0.0, f64::max),
        ledger: LedgerStats::from_ledgers(samples.iter().map(|s| &s.ledger)).expect("at least one trial"),
        samples,
    }
}

/// Flat CSV form of a [`TrialReport`].
#[derive(Clone, Debug, Serialize)]
pub struct TrialRow {
    pub generator: String,
    pub p: f64,
    pub eps: f64,
    pub delta: f64,
    pub m: u64,
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub half_width: f64,
    pub mean_error: f64,
    pub max_error: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub total: f64,
    pub n2_max: u64,
}

impl TrialRow {
    pub fn new(config: &TrialConfig, report: &TrialReport) -> Self {
        let [n1, n2, n3, total] = report.ledger.mean;
        Self {
            generator: config.generator.name(),
            p: config.p,
            eps: config.eps,
            delta: config.delta,
            m: config.m,
            trials: report.trials,
            failures: report.failures,
            failure_rate: report.failure_rate(),
            half_width: report.half_width(),
            mean_error: report.mean_error,
            max_error: report.max_error,
            n1,
            n2,
            n3,
            total,
            n2_max: report.ledger.max.n2,
        }
    }
}
