//! Writing a vector file, reading it back and approximating it.
//!
//!     cargo run --release --example vector_file

use adaptive_linf::harness::gen::random_unit;
use adaptive_linf::io::{load, save};
use adaptive_linf::pipeline::{approximate, derive_params, Mode, Variant};
use adaptive_linf::random::SeedSpec;
use adaptive_linf::vector::linf_dist;
use adaptive_linf::MeasurementOracle;

fn main() -> adaptive_linf::Result<()> {
    let path = std::env::temp_dir().join("adaptive-linf-example.txt");
    let x = random_unit(1 << 30, 5, 1.0, &SeedSpec::new(8).root())?;
    save(&path, &x, 1.0)?;
    print!("{}", std::fs::read_to_string(&path)?);

    let file = load(&path)?;
    assert_eq!(file.x, x);
    let params = derive_params(file.p, 0.5, 0.5, file.x.dim(), Variant::Pairwise)?;
    let mut oracle = MeasurementOracle::new(file.x.clone());
    let out = approximate(&mut oracle, &params, Mode::Implicit, &SeedSpec::new(1).root())?;
    let one_based: Vec<u64> = out.selected.iter().map(|i| i + 1).collect();
    println!("K = {one_based:?}, error = {:.4}, total cost = {}", linf_dist(&file.x, &out.z)?, out.ledger.total());
    Ok(())
}
