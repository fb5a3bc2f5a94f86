//! `strength`: batch reports on partition rank, bias, singular loci, descent
//! and embeddings of forms.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use strength::Error;

#[derive(Parser, Debug)]
#[command(name = "strength", version, about = "Audits for multilinear and homogeneous forms")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Form document (JSON).
    #[arg(long, global = true)]
    pub form: Option<PathBuf>,
    /// Collection document (JSON); a single form counts as a collection of one.
    #[arg(long, global = true)]
    pub collection: Option<PathBuf>,
    /// Target collection for embeddings.
    #[arg(long, global = true)]
    pub targets: Option<PathBuf>,
    /// Reinterpret the input over this ring: Z, Q, F5, F2^3.
    #[arg(long, global = true)]
    pub ring: Option<String>,
    #[arg(long, global = true)]
    pub prime: Option<u32>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub primes: Vec<u32>,
    /// Enumeration cap in points or combinations.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    pub cap: u128,
    /// Enumeration cap for exact bias computations.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    pub bias_cap: u128,
    /// Search budget in nodes.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub budget: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for internal parallelism; never changes results.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// JSON file overriding entries of the constants table.
    #[arg(long, global = true)]
    pub constants: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Partition-rank (and Schmidt-rank) bounds with certificates.
    Rank {
        /// Write the upper-bound certificate here as JSON.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Exact bias by slice enumeration.
    Bias,
    /// Singular-locus point counts and codimension estimates.
    Geometry,
    /// Mod-p descent table for an integer form.
    Descent {
        /// Write the counting-chain replay here as CSV.
        #[arg(long)]
        chain: Option<PathBuf>,
    },
    /// Solve for linear maps taking the source collection to the targets.
    Embed {
        #[arg(long, default_value = "exhaustive")]
        strategy: String,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
    },
    /// Inequality audits, one CSV row per instance.
    Audit {
        #[command(subcommand)]
        kind: AuditKind,
    },
    /// Generate a reproducible corpus of forms into --out.
    Corpus {
        #[arg(long)]
        profile: String,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 3)]
        max_rank: usize,
        #[arg(long, default_value_t = 3)]
        p: u32,
        #[arg(long, default_value_t = 12)]
        count: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum AuditKind {
    /// Box-count scaling on fuzzed systems, or on --collection over Z.
    Scaling {
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// Count modulo this number instead of over Z (with --collection).
        #[arg(long)]
        modulus: Option<u64>,
        #[arg(long, default_value_t = 2)]
        radius: u64,
        #[arg(long, default_value_t = 2)]
        scale: u64,
    },
    /// Small kernel vectors of random rank-deficient matrices, or of --matrix.
    Kernel {
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// JSON array of integer rows.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Schmidt rank of a collection against the constants of its regime.
    Main,
    /// Certified collective rank against the embedding threshold.
    Universality,
    /// Bias and restriction checks of the coefficient system.
    Relabel {
        #[arg(long, default_value_t = 2)]
        t: usize,
    },
    /// Birch rank against Schmidt rank, both directions.
    Geometry,
    /// Mod-p descent summary row.
    Descent,
    /// Fibers of random projections of the singular locus.
    Noether {
        #[arg(long, default_value_t = 1)]
        t: usize,
        #[arg(long, default_value_t = 8)]
        trials: usize,
    },
    /// Sampled pseudo-norm axioms of a ring model.
    Norm {
        /// Ring model JSON.
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 8)]
        radius: u128,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
    },
}

/// Process exit status for a library error.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CapExceeded { .. } => 3,
        Error::Parse(_)
        | Error::InvalidInput(_)
        | Error::DimensionMismatch(_)
        | Error::NotPrime(_)
        | Error::Reducible { .. }
        | Error::InvalidModulus(_)
        | Error::MalformedPartition(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.workers {
        if n == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(2);
        }
        std::env::set_var("RAYON_NUM_THREADS", n.to_string());
    }
    if cli.global.cap == 0 || cli.global.bias_cap == 0 || cli.global.budget == 0 {
        eprintln!("error: caps and budgets must be positive");
        return ExitCode::from(2);
    }
    match commands::run(&cli) {
        Ok(commands::Status::Clean) => ExitCode::SUCCESS,
        Ok(commands::Status::ProvedViolation) => {
            eprintln!("error: a proved statement failed its exact check");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let cap = Error::CapExceeded {
            what: "x",
            needed: 2,
            cap: 1,
        };
        assert_eq!(exit_code(&cap), 3);
        assert_eq!(exit_code(&Error::Parse("x".into())), 2);
        assert_eq!(exit_code(&Error::FullRank), 1);
    }

    #[test]
    fn ring_flag() {
        assert_eq!(input::parse_ring("Z").unwrap(), strength::AnyRing::Integers);
        let f = input::parse_ring("F2^3").unwrap();
        assert!(matches!(f, strength::AnyRing::Finite(ref k) if k.order() == 8));
        assert!(input::parse_ring("F4").is_err());
        assert!(input::parse_ring("banana").is_err());
    }
}
