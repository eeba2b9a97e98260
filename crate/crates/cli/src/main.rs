//! `xorcache`: run, verify, simulate and benchmark small-buffer coded caching.
//!
//! Exit codes: 0 on success, 1 on I/O trouble, 2 on invalid input, 3 when a
//! schedule fails to deliver some user's file.

mod table;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use xorcache::rational::{self, Rational};
use xorcache::{
    deliver, peak_rate_with_budget, place, simulate_payload, verify_decodability, DeliverySchedule,
    DemandVector, PlacementPlan, ProblemInstance, DEFAULT_ENUMERATION_BUDGET,
};

use table::{Grid, Sweep};

const EXIT_IO: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_UNDECODABLE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "xorcache",
    version,
    about = "Coded caching for small-buffer users"
)]
struct Cli {
    /// Worker threads for `peak`; defaults to one per core.
    #[arg(long, global = true, env = "XORCACHE_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Shape {
    /// Number of files N.
    #[arg(long = "n", value_parser = clap::value_parser!(u32).range(1..))]
    n: u32,
    /// Number of users K (K >= N).
    #[arg(long = "k", value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
}

impl Shape {
    fn n(&self) -> usize {
        self.n as usize
    }

    fn k(&self) -> usize {
        self.k as usize
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Write the placement plan.
    Place {
        #[command(flatten)]
        shape: Shape,
        /// Cache size, `0` or `1/K`. Defaults to `1/K`.
        #[arg(long, value_parser = parse_rational)]
        m: Option<Rational>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the delivery schedule for one demand vector.
    Deliver {
        #[command(flatten)]
        shape: Shape,
        /// Comma-separated file index per user, e.g. `1,2,3,1`.
        #[arg(long)]
        demand: String,
        #[arg(long, value_parser = parse_rational)]
        m: Option<Rational>,
        /// Schedule JSON output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the placement plan here.
        #[arg(long)]
        plan_out: Option<PathBuf>,
    },
    /// Check that every user can decode its file from a plan and schedule.
    Verify {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        demand: String,
        /// Print the full certificate as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Broadcast real bytes and decode them at every user.
    Simulate {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        demand: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// File size in bytes; must be a multiple of the parts per file.
        #[arg(long)]
        bytes: usize,
        #[arg(long, value_parser = parse_rational)]
        m: Option<Rational>,
        #[arg(long)]
        json: bool,
    },
    /// Certify the peak rate over every demand vector.
    Peak {
        #[command(flatten)]
        shape: Shape,
        /// Refuse when N^K exceeds this many demand vectors.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        budget: u128,
        #[arg(long)]
        json: bool,
    },
    /// Compare rates across a sweep of instances and cache sizes.
    Table {
        /// File counts, e.g. `3` or `1..4` (inclusive).
        #[arg(long = "n")]
        n_range: String,
        /// User counts; pairs with K < N are skipped.
        #[arg(long = "k")]
        k_range: String,
        /// Absolute cache sizes, e.g. `0,1/8,1/4`. Each must lie in [0, N/K].
        #[arg(long = "m", conflicts_with = "steps")]
        grid: Option<String>,
        /// Grid of `j/(steps*K)` for `j = 0..=steps*N`.
        #[arg(long, default_value_t = 4)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

fn parse_rational(text: &str) -> Result<Rational, String> {
    rational::parse(text).map_err(|e| e.to_string())
}

fn instance(shape: Shape, m: Option<Rational>) -> anyhow::Result<ProblemInstance> {
    Ok(match m {
        Some(m) => ProblemInstance::new(shape.n(), shape.k(), m)?,
        None => ProblemInstance::coded(shape.n(), shape.k())?,
    })
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))
            .with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// A simulated user failed to reconstruct its file.
#[derive(Debug)]
struct Undecodable(String);

impl std::fmt::Display for Undecodable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Undecodable {}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("configuring worker pool")?;
    }
    match cli.command {
        Command::Place { shape, m, out } => {
            let plan = place(&instance(shape, m)?)?;
            emit(&plan.to_json(), out.as_deref())?;
        }
        Command::Deliver {
            shape,
            demand,
            m,
            out,
            plan_out,
        } => {
            let inst = instance(shape, m)?;
            let demand = DemandVector::parse(&demand, inst.n_files())?;
            let plan = place(&inst)?;
            let schedule = deliver(&plan, &demand)?;
            if let Some(path) = plan_out {
                emit(&plan.to_json(), Some(&path))?;
            }
            match out {
                Some(path) => {
                    emit(&schedule.to_json(), Some(&path))?;
                    println!("rate {}", schedule.rate());
                    println!("transmissions {}", schedule.len());
                }
                None => emit(&schedule.to_json(), None)?,
            }
        }
        Command::Verify {
            shape,
            plan,
            schedule,
            demand,
            json,
        } => {
            let plan = PlacementPlan::from_json(&read(&plan)?)?;
            let schedule = DeliverySchedule::from_json(&read(&schedule)?)?;
            let inst = plan.instance;
            if inst.n_files() != shape.n() || inst.n_users() != shape.k() {
                bail!(xorcache::Error::InvalidInstance(format!(
                    "files describe N = {}, K = {} but --n {} --k {} was given",
                    inst.n_files(),
                    inst.n_users(),
                    shape.n,
                    shape.k
                )));
            }
            let demand = DemandVector::parse(&demand, inst.n_files())?;
            if demand != schedule.demand {
                bail!(xorcache::Error::InvalidDemand(format!(
                    "schedule answers demand {} but {demand} was given",
                    schedule.demand
                )));
            }
            let cert = verify_decodability(&plan, &schedule, &demand)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&cert)?);
            } else {
                println!("ok: {} users decode their files", cert.users.len());
                for user in &cert.users {
                    let coded = user
                        .witnesses
                        .iter()
                        .filter(|w| !w.cache.is_empty())
                        .count();
                    println!(
                        "user {}: file {}, {} parts ({} via cache)",
                        user.user,
                        user.file,
                        user.witnesses.len(),
                        coded
                    );
                }
                println!("rate {}", schedule.rate());
            }
        }
        Command::Simulate {
            shape,
            demand,
            seed,
            bytes,
            m,
            json,
        } => {
            let inst = instance(shape, m)?;
            let demand = DemandVector::parse(&demand, inst.n_files())?;
            let plan = place(&inst)?;
            let schedule = deliver(&plan, &demand)?;
            let report = simulate_payload(seed, bytes, &plan, &schedule, &demand)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                for user in &report.users {
                    let status = if user.bit_exact() {
                        "bit-exact"
                    } else {
                        "FAILED"
                    };
                    println!("user {}: file {} {status}", user.user, user.file);
                }
                println!("bytes broadcast {}", report.bytes_broadcast);
            }
            if let Some(user) = report.first_failure() {
                bail!(Undecodable(format!(
                    "user {} did not reconstruct file {}",
                    user.user, user.file
                )));
            }
        }
        Command::Peak {
            shape,
            budget,
            json,
        } => {
            let report = peak_rate_with_budget(shape.n(), shape.k(), budget)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                println!("{}", report.peak);
                eprintln!(
                    "{} demand vectors certified, {} attain the peak",
                    report.demands_checked,
                    report.worst_demands.len()
                );
            }
        }
        Command::Table {
            n_range,
            k_range,
            grid,
            steps,
            format,
        } => {
            let sweep = Sweep {
                n_range: table::parse_range(&n_range).map_err(invalid)?,
                k_range: table::parse_range(&k_range).map_err(invalid)?,
                grid: match grid {
                    Some(text) => Grid::Absolute(table::parse_grid(&text).map_err(invalid)?),
                    None if steps == 0 => {
                        bail!(invalid(anyhow::anyhow!("--steps must be positive")))
                    }
                    None => Grid::PerUser(steps),
                },
            };
            let rows = sweep.rows().map_err(invalid)?;
            match format {
                Format::Csv => {
                    println!("{}", table::HEADER);
                    for row in &rows {
                        println!("{}", row.to_csv());
                    }
                }
                Format::Json => {
                    let values: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|r| {
                            serde_json::json!({
                                "n": r.n,
                                "k": r.k,
                                "m": r.m.to_string(),
                                "r_ours": r.ours.map(|v| v.to_string()),
                                "r_mn": r.mn.to_string(),
                                "r_cutset": r.cutset.to_string(),
                                "tight": r.tight(),
                                "r_envelope": r.envelope.to_string(),
                            })
                        })
                        .collect();
                    println!("{}", serde_json::to_string_pretty(&values)?);
                }
            }
        }
    }
    Ok(())
}

fn invalid(err: anyhow::Error) -> anyhow::Error {
    anyhow::Error::new(xorcache::Error::Malformed(format!("{err:#}")))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Undecodable>().is_some() {
        return EXIT_UNDECODABLE;
    }
    match err.downcast_ref::<xorcache::Error>() {
        Some(e) if e.is_verification_failure() => EXIT_UNDECODABLE,
        Some(_) => EXIT_INVALID,
        None => EXIT_IO,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
