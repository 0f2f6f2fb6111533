use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use adaptive_linf::harness::{self, Generator, TrialConfig, TrialRow};
use adaptive_linf::io::{load, parse_dim, save};
use adaptive_linf::pipeline::{approximate, derive_params, predicted_cost, Mode, Variant};
use adaptive_linf::vector::linf_dist;
use adaptive_linf::{MeasurementOracle, SeedSpec};

#[derive(Parser)]
#[command(version, about = "Adaptive uniform approximation from linear measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print derived parameters and predicted cost.
    Params(Common),
    /// Approximate a vector read from a file.
    Run {
        #[arg(long)]
        vector: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Also write the ledger as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo trials on generated instances.
    Trials {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 100)]
        n_trials: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predicted and measured cost across dimensions.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated dimensions, `2^k` allowed.
        #[arg(long, value_delimiter = ',', value_parser = parse_m, default_value = "2^16,2^32,2^48,2^64")]
        ms: Vec<u64>,
        #[arg(long, default_value_t = 0)]
        n_trials: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Adaptive pipeline against count-sketch recovery on the same budget.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 20)]
        n_trials: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a generated instance to a vector file.
    Gen {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long, default_value_t = 0.25)]
    delta: f64,
    #[arg(long, value_parser = parse_m, default_value = "2^20")]
    m: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Implicit)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = VariantArg::Pairwise)]
    variant: VariantArg,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long = "gen", value_enum, default_value_t = GenKind::Spike)]
    kind: GenKind,
    #[arg(long, default_value_t = 1)]
    k1: u64,
    #[arg(long, default_value_t = 8.0)]
    gamma: f64,
    #[arg(long, default_value_t = 50)]
    s: u64,
    #[arg(long, default_value_t = 1.0)]
    value: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Explicit,
    Implicit,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Pairwise,
    Iid,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Zero,
    Spike,
    TwoLevel,
    RandomUnit,
    DenseTail,
    /// Spike, two-level or random-unit, picked per instance.
    Mixture,
}

fn parse_m(s: &str) -> Result<u64, String> {
    parse_dim(s).map_err(|e| e.to_string())
}

impl Common {
    fn mode(&self) -> Mode {
        match self.mode {
            ModeArg::Explicit => Mode::Explicit,
            ModeArg::Implicit => Mode::Implicit,
        }
    }

    fn variant(&self) -> Variant {
        match self.variant {
            VariantArg::Pairwise => Variant::Pairwise,
            VariantArg::Iid => Variant::Iid,
        }
    }
}

impl GenArgs {
    fn generator(&self) -> Generator {
        match self.kind {
            GenKind::Zero => Generator::Zero,
            GenKind::Spike => Generator::Spike { value: self.value },
            GenKind::TwoLevel => Generator::TwoLevel { k1: self.k1, gamma: self.gamma },
            GenKind::RandomUnit => Generator::RandomUnit { s: self.s },
            GenKind::DenseTail => Generator::DenseTail { k1: self.k1 },
            GenKind::Mixture => Generator::Mixture(vec![
                Generator::Spike { value: self.value },
                Generator::TwoLevel { k1: self.k1, gamma: self.gamma },
                Generator::RandomUnit { s: self.s },
            ]),
        }
    }
}

fn sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout()),
    })
}

fn run(cli: Cli) -> adaptive_linf::Result<()> {
    match cli.command {
        Command::Params(c) => {
            let a = derive_params(c.p, c.eps, c.delta, c.m, c.variant())?;
            let cost = predicted_cost(&a)?;
            println!("p={}\neps={}\ndelta={}\nm={}", a.p, a.eps, a.delta, adaptive_linf::io::format_dim(a.m));
            println!("k0={}\nalpha={}\ngamma={}\nD={}\nR={}\nG={}\nk={}", a.k0, a.alpha, a.gamma, a.buckets, a.repetitions, a.groups, a.k);
            println!("delta0={}\ndelta1={}\ntrivial_branch={}", a.delta0, a.delta1, a.trivial_branch());
            println!("kstar={}\nn1={}\nn2_max={}\nn3_max={}\ntotal_max={}", cost.kstar, cost.n1, cost.n2_max, cost.n3_max, cost.total_max());
        }
        Command::Run { vector, common: c, out: csv_out } => {
            let file = load(vector)?;
            let params = derive_params(file.p, c.eps, c.delta, file.x.dim(), c.variant())?;
            let mut oracle = MeasurementOracle::new(file.x.clone());
            let out = approximate(&mut oracle, &params, c.mode(), &SeedSpec::new(c.seed).root())?;
            let k: Vec<String> = out.selected.iter().map(|i| (i + 1).to_string()).collect();
            println!("K={}", k.join(","));
            println!("linf_error={}", linf_dist(&file.x, &out.z)?);
            let l = out.ledger;
            println!("n1={}\nn2={}\nn3={}\ntotal={}", l.n1, l.n2, l.n3, l.total());
            if csv_out.is_some() {
                harness::write_csv(sink(&csv_out)?, &[l])?;
            }
        }
        Command::Trials { common: c, gen, n_trials, out } => {
            let config = TrialConfig {
                generator: gen.generator(),
                p: c.p,
                eps: c.eps,
                delta: c.delta,
                m: c.m,
                trials: n_trials,
                seed: c.seed,
                mode: c.mode(),
                variant: c.variant(),
            };
            let report = harness::run_trials(&config)?;
            harness::write_csv(sink(&out)?, &[TrialRow::new(&config, &report)])?;
        }
        Command::Sweep { common: c, ms, n_trials, out } => {
            let rows = harness::sweep_cost(c.p, c.eps, c.delta, &ms, c.variant(), n_trials, c.seed)?;
            harness::write_csv(sink(&out)?, &rows)?;
        }
        Command::Baseline { common: c, gen, n_trials, out } => {
            let rows = harness::baseline_compare(c.p, c.eps, c.delta, c.m, &gen.generator(), n_trials, c.seed)?;
            harness::write_csv(sink(&out)?, &rows)?;
        }
        Command::Gen { common: c, gen, out } => {
            let x = gen.generator().sample(c.m, c.p, &SeedSpec::new(c.seed).root())?;
            save(out, &x, c.p)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
