//! The expected-error variant, and `p > 2` through the `ℓ₂` algorithm.
//!
//!     cargo run --release --example expected_error

use adaptive_linf::harness::gen::{dense_tail, random_unit};
use adaptive_linf::pipeline::{approximate_expected, approximate_p_gt2, reduced_eps, Mode, Variant};
use adaptive_linf::random::SeedSpec;
use adaptive_linf::vector::{linf_dist, lq_error};
use adaptive_linf::MeasurementOracle;

fn main() -> adaptive_linf::Result<()> {
    let seed = SeedSpec::new(4);

    let m = 1u64 << 16;
    let x = random_unit(m, 30, 2.0, &seed.derive("x", 0))?;
    let runs = 10;
    let mut sum = 0.0;
    for t in 0..runs {
        let mut oracle = MeasurementOracle::new(x.clone());
        let out = approximate_expected(&mut oracle, 2.0, 0.9, Variant::Pairwise, Mode::Implicit, &seed.derive("expected", t))?;
        sum += linf_dist(&x, &out.z)?;
    }
    println!("p = 2, eps = 0.9: mean sup error over {runs} runs = {:.4}", sum / runs as f64);

    // Every coordinate carries weight for p > 2, so keep m small.
    let (m, p, eps) = (1u64 << 8, 3.0, 0.9);
    let x = dense_tail(m, 1, p)?;
    println!("p = {p}: reduced eps = {:.5}", reduced_eps(p, eps, m)?);
    let mut oracle = MeasurementOracle::new(x.clone());
    let out = approximate_p_gt2(&mut oracle, p, eps, Variant::Iid, Mode::Implicit, &seed.derive("p3", 0))?;
    println!(
        "sup error {:.4}, l3 error {:.4}, cost {}",
        linf_dist(&x, &out.z)?,
        lq_error(&x, &out.z, p)?,
        out.ledger.total()
    );
    Ok(())
}
