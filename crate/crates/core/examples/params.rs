//! Derived constants and worst-case cost for a few settings.
//!
//!     cargo run --example params

use adaptive_linf::pipeline::{derive_params, predicted_cost, Variant};

fn main() -> adaptive_linf::Result<()> {
    let cases = [
        (1.0, 0.25, 0.25, 1u64 << 40, Variant::Pairwise),
        (1.0, 0.25, 0.25, 1u64 << 40, Variant::Iid),
        (2.0, 0.5, 0.5, 1u64 << 32, Variant::Pairwise),
        (1.5, 0.3, 0.1, 1u64 << 20, Variant::Pairwise),
    ];
    println!("{:>4} {:>5} {:>5} {:>14} {:>9} {:>22} {:>3} {:>5} {:>6} {:>3} {:>7} {:>7}",
        "p", "eps", "delta", "m", "variant", "D", "R", "k", "n1", "k*", "n2_max", "trivial");
    for (p, eps, delta, m, variant) in cases {
        let a = derive_params(p, eps, delta, m, variant)?;
        let c = predicted_cost(&a)?;
        println!("{:>4} {:>5} {:>5} {:>14} {:>9?} {:>22} {:>3} {:>5} {:>6} {:>3} {:>7} {:>7}",
            p, eps, delta, m, variant, a.buckets, a.repetitions, a.k, c.n1, c.kstar, c.n2_max, a.trivial_branch());
    }

    // With ε = δ = 2^-j and p = 2, D is an exact multiple of 268 697 664.
    for j in 1..=2 {
        let e = 0.5f64.powi(j);
        let a = derive_params(2.0, e, e, u64::MAX, Variant::Pairwise)?;
        println!("eps = delta = 2^-{j}: D / (eps^-10 delta^-4) = {}, k / k0 = {}",
            a.buckets as f64 * e.powi(14), a.k / a.k0);
    }
    Ok(())
}
