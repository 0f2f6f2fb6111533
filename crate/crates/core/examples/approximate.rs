//! End-to-end approximation of a sparse vector in dimension 2^40.
//!
//!     cargo run --release --example approximate

use adaptive_linf::harness::gen::{random_unit, scatter, two_level};
use adaptive_linf::pipeline::{approximate, derive_params, predicted_cost, Mode, Variant};
use adaptive_linf::random::SeedSpec;
use adaptive_linf::vector::{heavy_set, linf_dist};
use adaptive_linf::MeasurementOracle;

fn main() -> adaptive_linf::Result<()> {
    let m = 1u64 << 40;
    let (p, eps, delta) = (1.0, 0.25, 0.25);
    let params = derive_params(p, eps, delta, m, Variant::Pairwise)?;
    let cost = predicted_cost(&params)?;
    println!("D = {}, R = {}, G = {}, k = {}", params.buckets, params.repetitions, params.groups, params.k);
    println!("budget: n1 = {}, n2 <= {}, n3 <= {}", cost.n1, cost.n2_max, cost.n3_max);

    let seed = SeedSpec::new(99);
    let instances = [
        ("two-level", scatter(&two_level(m, 1, 8.0, p)?, &seed.derive("place", 0))?),
        ("random-unit", random_unit(m, 200, p, &seed.derive("x", 1))?),
    ];
    for (name, x) in instances {
        let mut oracle = MeasurementOracle::new(x.clone());
        let out = approximate(&mut oracle, &params, Mode::Implicit, &seed.derive("run", 0))?;
        let l = out.ledger;
        println!(
            "{name}: heavy {:?}, kept {:?}, error {:.4}, n1 = {}, n2 = {}, n3 = {}",
            heavy_set(&x, eps).as_slice(),
            out.selected.as_slice(),
            linf_dist(&x, &out.z)?,
            l.n1, l.n2, l.n3,
        );
    }
    Ok(())
}
