//! Cost sweeps over `m` and the non-adaptive count-sketch comparison.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::gen::Generator;
use crate::measurement::MeasurementOracle;
use crate::pipeline::{approximate, derive_params, predicted_cost, Mode, Variant};
use crate::random::{trivial_hash, SeedSpec, Stream};
use crate::select::{build_sketch, SelectParams};
use crate::vector::{linf_dist, SparseVector};

/// One row of the cost table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: String,
    pub kstar: u32,
    pub n1: u64,
    pub n2_max: u64,
    pub n3_max: u64,
    /// Mean measured ledger, when the pipeline can run at this `m`.
    pub measured_n1: Option<f64>,
    pub measured_n2: Option<f64>,
    pub measured_n3: Option<f64>,
    pub note: String,
}

/// Predicted cost for every `m`; with `trials > 0`, also the mean ledger of
/// that many implicit-mode runs on random spikes.
pub fn sweep_cost(
    p: f64,
    eps: f64,
    delta: f64,
    ms: &[u64],
    variant: Variant,
    trials: u64,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    ms.iter()
        .map(|&m| {
            let params = derive_params(p, eps, delta, m, variant)?;
            let cost = predicted_cost(&params)?;
            let mut row = SweepRow {
                m: crate::io::format_dim(m),
                kstar: cost.kstar,
                n1: cost.n1,
                n2_max: cost.n2_max,
                n3_max: cost.n3_max,
                measured_n1: None,
                measured_n2: None,
                measured_n3: None,
                note: String::new(),
            };
            if trials == 0 {
                return Ok(row);
            }
            let runs: Vec<Result<_>> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let path = SeedSpec::new(seed).derive("sweep", t);
                    let x = Generator::Spike { value: 1.0 }.sample(m, p, &path.derive("instance", 0))?;
                    let mut oracle = MeasurementOracle::new(x);
                    Ok(approximate(&mut oracle, &params, Mode::Implicit, &path.derive("algorithm", 0))?.ledger)
                })
                .collect();
            match runs.into_iter().collect::<Result<Vec<_>>>() {
                Ok(ledgers) => {
                    let n = ledgers.len() as f64;
                    row.measured_n1 = Some(ledgers.iter().map(|l| l.n1 as f64).sum::<f64>() / n);
                    row.measured_n2 = Some(ledgers.iter().map(|l| l.n2 as f64).sum::<f64>() / n);
                    row.measured_n3 = Some(ledgers.iter().map(|l| l.n3 as f64).sum::<f64>() / n);
                }
                Err(e @ Error::Overflow { .. }) => row.note = e.to_string(),
                Err(e) => return Err(e),
            }
            Ok(row)
        })
        .collect()
}

/// Count-sketch recovery: identity hashing, `R` repetitions of `G` groups,
/// and the estimate `median_r σ_{r,i} Ŷ_{r,i}` at every coordinate.
///
/// Non-adaptive: all `R·G` functionals are fixed before any is measured.
/// Builds a dense estimate, so `m` must be small.
pub fn count_sketch_recover(
    oracle: &mut MeasurementOracle,
    repetitions: usize,
    groups: u64,
    stream: &Stream,
) -> Result<SparseVector> {
    let m = oracle.dim();
    if m > crate::harness::gen::DENSE_LIMIT {
        return Err(Error::invalid(format!(
            "count-sketch recovery builds a dense estimate; m = {m} too large"
        )));
    }
    let params = SelectParams::new(repetitions, groups, 1, m)?;
    let sketch = build_sketch(oracle, trivial_hash(m)?, &params, stream)?;
    let entries = (0..m)
        .map(|i| Ok((i, sketch.count_sketch_estimate(i)?)))
        .collect::<Result<Vec<_>>>()?;
    SparseVector::from_entries(m, entries)
}

/// One trial of the baseline comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaselineRow {
    pub trial: u64,
    pub adaptive_total: u64,
    pub adaptive_error: f64,
    pub baseline_repetitions: usize,
    pub baseline_groups: u64,
    pub baseline_total: u64,
    pub baseline_error: f64,
}

/// Runs the adaptive pipeline, then count-sketch recovery with the same `R`
/// and the largest `G` whose `R·G` fits in the adaptive run's total budget.
pub fn baseline_compare(
    p: f64,
    eps: f64,
    delta: f64,
    m: u64,
    generator: &Generator,
    trials: u64,
    seed: u64,
) -> Result<Vec<BaselineRow>> {
    let params = derive_params(p, eps, delta, m, Variant::Pairwise)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let path = SeedSpec::new(seed).derive("baseline", t);
            let x = generator.sample(m, p, &path.derive("instance", 0))?;
            let mut oracle = MeasurementOracle::new(x.clone());
            let out = approximate(&mut oracle, &params, Mode::Implicit, &path.derive("algorithm", 0))?;
            let budget = out.ledger.total();
            let r = params.repetitions;
            let g = (budget / r as u64).max(1);
            let mut base_oracle = MeasurementOracle::new(x.clone());
            let z = count_sketch_recover(&mut base_oracle, r, g, &path.derive("baseline", 0))?;
            Ok(BaselineRow {
                trial: t,
                adaptive_total: budget,
                adaptive_error: linf_dist(&x, &out.z)?,
                baseline_repetitions: r,
                baseline_groups: g,
                baseline_total: base_oracle.cost_report().total(),
                baseline_error: linf_dist(&x, &z)?,
            })
        })
        .collect()
}

/// Writes `rows` as CSV with a single header row.
pub fn write_csv<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_closed_form() {
        let ms = [1u64 << 16, 1 << 32, 1 << 48, u64::MAX];
        let rows = sweep_cost(1.0, 0.25, 0.25, &ms, Variant::Pairwise, 0, 0).unwrap();
        assert_eq!(rows.iter().map(|r| r.kstar).collect::<Vec<_>>(), vec![6, 12, 16, 18]);
        assert!(rows.iter().all(|r| r.n1 == 10_980 && r.n2_max == 45 * (2 * u64::from(r.kstar) + 2)));
        assert_eq!(rows[3].m, "18446744073709551616");
    }

    #[test]
    fn sweep_notes_overflow() {
        let rows = sweep_cost(1.0, 0.9, 0.9, &[1 << 18, 1 << 60], Variant::Pairwise, 1, 3).unwrap();
        assert!(rows[0].measured_n1.is_some());
        assert!(rows[1].measured_n1.is_none());
        assert!(rows[1].note.contains("overflow"));
    }

    #[test]
    fn count_sketch_recovers_spike() {
        let m = 1u64 << 12;
        let x = SparseVector::spike(m, 99, 0.5).unwrap();
        let mut o = MeasurementOracle::new(x.clone());
        let z = count_sketch_recover(&mut o, 9, 64, &SeedSpec::new(2).root()).unwrap();
        assert_eq!(o.cost_report().n1, 9 * 64);
        // Another coordinate sharing every group with 99 would need 9 collisions.
        assert!(linf_dist(&x, &z).unwrap() <= 0.5);
        assert_eq!(z.get(99), 0.5);
    }

    #[test]
    fn starved_count_sketch_is_crude() {
        let m = 1u64 << 10;
        let x = SparseVector::spike(m, 3, 0.8).unwrap();
        let mut o = MeasurementOracle::new(x.clone());
        let z = count_sketch_recover(&mut o, 1, 1, &SeedSpec::new(2).root()).unwrap();
        assert_eq!(o.cost_report().total(), 1);
        assert_eq!(linf_dist(&x, &z).unwrap(), 0.8);
    }

    #[test]
    fn csv_header_once() {
        let rows = sweep_cost(1.0, 0.25, 0.25, &[1 << 16, 1 << 20], Variant::Pairwise, 0, 0).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "m,kstar,n1,n2_max,n3_max,measured_n1,measured_n2,measured_n3,note");
        assert!(lines[1].starts_with("65536,6,10980,630,45,,,,"));
    }
}
