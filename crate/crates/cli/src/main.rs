use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hillshare::allocator::{allocate, allocate_two_agents_tight, report};
use hillshare::csv::{parse_allocation, read_instance, read_rows, write_allocation, write_rows};
use hillshare::experiments::{
    alpha_grid, curve_csv, curve_samples, histogram_csv, ingest_csv, ingest_records, records_csv,
    run_histogram, ArithmeticMode, ExperimentConfig, RatioHistogram,
};
use hillshare::rational::{parse_rational, to_decimal, to_fraction, Rational};
use hillshare::{
    exact_mms, fits_under, guarantee, hill_share, mms_lower_bound, theoretical_ratio,
    witness_lower, witness_upper, Allocation, Error, Instance, ObjectCount, ShareQuery,
};

#[derive(Parser)]
#[command(
    name = "hillshare",
    version,
    about = "Worst-case fair shares for indivisible chores"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed-form share.
    Share {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_enum, default_value = "upper")]
        kind: ShareKind,
    },
    /// Print an instance attaining a bound.
    Witness {
        #[command(flatten)]
        query: QueryArgs,
        #[arg(long, value_enum, default_value = "upper")]
        kind: WitnessKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact MinMaxShare of every row of an instance file.
    Mms {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        n: usize,
        /// Also print an optimal partition (1-based object indices).
        #[arg(long)]
        partition: bool,
    },
    /// Allocate so that every agent stays within her guarantee.
    Allocate {
        #[arg(long)]
        instance: PathBuf,
        /// Copy a single-row file to this many agents.
        #[arg(long)]
        agents: Option<usize>,
        /// Two agents only: cut and choose against the tighter share.
        #[arg(long)]
        tight: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an allocation against every agent's guarantee.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        /// Report from `allocate`, or one line of object indices per agent.
        #[arg(long)]
        allocation: PathBuf,
        #[arg(long)]
        agents: Option<usize>,
    },
    /// Reproducible numerical studies.
    Experiment {
        #[command(subcommand)]
        kind: ExperimentKind,
    },
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    n: u64,
    #[arg(long, conflicts_with = "unrestricted")]
    m: Option<u64>,
    #[arg(long)]
    unrestricted: bool,
    /// Largest single-object disutility, as a decimal or `p/q`.
    #[arg(long, value_parser = parse_alpha)]
    alpha: Rational,
}

impl QueryArgs {
    fn object_count(&self) -> ObjectCount {
        match self.m {
            Some(m) => ObjectCount::Finite(m),
            None => ObjectCount::Unrestricted,
        }
    }

    fn query(&self) -> Result<ShareQuery, Error> {
        ShareQuery::new(self.n, self.object_count(), self.alpha.clone())
    }
}

fn parse_alpha(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, ValueEnum)]
enum ShareKind {
    Upper,
    Lower,
    Guarantee,
    Ratio,
}

#[derive(Clone, Copy, ValueEnum)]
enum WitnessKind {
    Upper,
    Lower,
}

#[derive(Clone, Copy, ValueEnum)]
enum Arithmetic {
    Exact,
    Float,
}

#[derive(Subcommand)]
enum ExperimentKind {
    /// Ratio histogram over random segment instances.
    Synthetic {
        /// Seed for every random draw; recorded in the output header.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u64>,
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long, value_enum, default_value = "float")]
        arithmetic: Arithmetic,
        /// Also write one line per instance here.
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed forms on a grid of alpha values.
    Curve {
        /// Seed for every random draw; recorded in the output header.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: Option<u64>,
        /// Grid resolution: alpha = j/points plus every region endpoint.
        #[arg(long, default_value_t = 1000)]
        points: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ratios for disutility rows read from a file.
    Ingest {
        /// Seed for every random draw; recorded in the output header.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        n: u64,
        /// Also write one line per row here.
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn show(r: &Rational) -> String {
    format!("{} ({})", to_fraction(r), to_decimal(r, 12))
}

fn load_instance(path: &Path, agents: Option<usize>) -> Result<Instance, Failure> {
    match agents {
        None => Ok(read_instance(path)?),
        Some(n) => {
            let rows = read_rows(path)?;
            if rows.len() != 1 {
                return Err(Failure::Usage(format!(
                    "--agents needs a single-row file, found {} rows",
                    rows.len()
                )));
            }
            if n == 0 {
                return Err(Failure::Usage("--agents must be at least 1".into()));
            }
            Ok(Instance::normalize(&vec![rows[0].clone(); n])?)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Share { query, kind } => {
            let value = match kind {
                ShareKind::Guarantee => guarantee(query.n, &query.alpha)?,
                ShareKind::Upper => hill_share(&query.query()?),
                ShareKind::Lower => mms_lower_bound(&query.query()?),
                ShareKind::Ratio => theoretical_ratio(&query.query()?),
            };
            println!("{}", show(&value));
            Ok(())
        }
        Command::Witness { query, kind, out } => {
            let q = query.query()?;
            let w = match kind {
                WitnessKind::Upper => witness_upper(&q),
                WitnessKind::Lower => witness_lower(&q),
            };
            let mut text = format!(
                "# claimed_mms={} construction={} n={} m={} alpha={}\n",
                to_fraction(&w.claimed_mms),
                w.construction,
                q.n(),
                q.m(),
                to_fraction(q.alpha())
            );
            text.push_str(&write_rows([w.profile.values()]));
            emit(out.as_deref(), &text)
        }
        Command::Mms {
            instance,
            n,
            partition,
        } => {
            let inst = read_instance(&instance)?;
            for v in inst.profile() {
                let sol = exact_mms(v, n)?;
                println!("{}", show(&sol.value));
                if partition {
                    print!("{}", write_allocation(&sol.allocation));
                }
            }
            Ok(())
        }
        Command::Allocate {
            instance,
            agents,
            tight,
            out,
        } => {
            let inst = load_instance(&instance, agents)?;
            let (alloc, caps) = if tight {
                let alloc = allocate_two_agents_tight(&inst)?;
                let caps = inst
                    .profile()
                    .iter()
                    .map(|v| {
                        if v.is_zero() {
                            Ok(Rational::from_integer(0.into()))
                        } else {
                            Ok(hill_share(&ShareQuery::finite(
                                2,
                                v.len() as u64,
                                v.alpha(),
                            )?))
                        }
                    })
                    .collect::<Result<Vec<_>, Error>>()?;
                (alloc, Some(caps))
            } else {
                (allocate(&inst)?.allocation, None)
            };
            let rows = report(&inst, &alloc)?;
            let mut text = format!(
                "# allocate instance={} agents={} objects={} method={}\n",
                instance.display(),
                inst.n(),
                inst.m(),
                if tight {
                    "cut-and-choose"
                } else {
                    "moving-knife"
                }
            );
            text.push_str("agent,bundle,disutility,disutility_decimal,alpha,guarantee,satisfied\n");
            for (i, r) in rows.iter().enumerate() {
                let cap = caps.as_ref().map_or(&r.guarantee, |c| &c[i]);
                let bundle: Vec<String> = alloc
                    .bundle(i)
                    .iter()
                    .map(|e| (e + 1).to_string())
                    .collect();
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{},{}",
                    i + 1,
                    bundle.join(" "),
                    to_fraction(&r.achieved),
                    to_decimal(&r.achieved, 12),
                    to_fraction(&r.alpha),
                    to_fraction(cap),
                    r.achieved <= *cap
                );
            }
            emit(out.as_deref(), &text)
        }
        Command::Verify {
            instance,
            allocation,
            agents,
        } => {
            let inst = load_instance(&instance, agents)?;
            let text = std::fs::read_to_string(&allocation)
                .map_err(|e| Failure::Usage(format!("{}: {e}", allocation.display())))?;
            let alloc = parse_allocation_file(&text, inst.n(), inst.m())?;
            let rows = report(&inst, &alloc)?;
            println!("agent,disutility,guarantee,satisfied,mms_fits");
            let mut bad = Vec::new();
            for (i, r) in rows.iter().enumerate() {
                let v = inst.agent(i);
                let fits = if v.is_zero() {
                    Some(true)
                } else {
                    match fits_under(v, inst.n(), &r.guarantee) {
                        Ok(b) => Some(b),
                        Err(Error::Resource(msg)) => {
                            log::warn!("agent {}: {msg}", i + 1);
                            None
                        }
                        Err(e) => return Err(e.into()),
                    }
                };
                println!(
                    "{},{},{},{},{}",
                    i + 1,
                    to_fraction(&r.achieved),
                    to_fraction(&r.guarantee),
                    r.satisfied,
                    fits.map_or("unknown".to_string(), |b| b.to_string())
                );
                if !r.satisfied || fits == Some(false) {
                    bad.push(i + 1);
                }
            }
            if bad.is_empty() {
                Ok(())
            } else {
                Err(Failure::Violation(format!(
                    "guarantee violated for agents {bad:?}"
                )))
            }
        }
        Command::Experiment { kind } => run_experiment(kind),
    }
}

/// Accepts the `allocate` report or plain index lines.
fn parse_allocation_file(text: &str, n: usize, m: usize) -> Result<Allocation, Failure> {
    let data = text.lines().filter(|l| !l.trim_start().starts_with('#'));
    let is_report = data
        .clone()
        .next()
        .is_some_and(|l| l.starts_with("agent,bundle"));
    let mut alloc = if is_report {
        let lines: Vec<String> = data
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split(',').nth(1).unwrap_or("").to_string())
            .collect();
        parse_allocation(&(lines.join("\n") + "\n"), m)?
    } else {
        parse_allocation(text, m)?
    };
    if alloc.n() < n {
        let mut b = alloc.into_bundles();
        b.resize(n, Vec::new());
        alloc = Allocation::new(b, m)?;
    }
    if alloc.n() != n {
        return Err(Failure::Usage(format!(
            "allocation has {} bundles for {n} agents",
            alloc.n()
        )));
    }
    Ok(alloc)
}

fn run_experiment(kind: ExperimentKind) -> Result<(), Failure> {
    match kind {
        ExperimentKind::Synthetic {
            seed,
            n,
            m,
            count,
            arithmetic,
            records,
            out,
        } => {
            let cfg = ExperimentConfig {
                n,
                m_values: m,
                instances_per_setting: count,
                seed,
                arithmetic: match arithmetic {
                    Arithmetic::Exact => ArithmeticMode::Exact,
                    Arithmetic::Float => ArithmeticMode::Float,
                },
            };
            let h = run_histogram(&cfg)?;
            let header = cfg.header("synthetic");
            if let Some(p) = records {
                emit(Some(&p), &records_csv(&h, &header))?;
            }
            emit(out.as_deref(), &histogram_csv(&h, &header))
        }
        ExperimentKind::Curve {
            seed,
            n,
            m,
            points,
            out,
        } => {
            let count = m.map_or(ObjectCount::Unrestricted, ObjectCount::Finite);
            if points < 2 {
                return Err(Failure::Usage("--points must be at least 2".into()));
            }
            let rows = curve_samples(n, &alpha_grid(n, points), count);
            let header = format!("# curve n={n} m={count} points={points} seed={seed}");
            emit(out.as_deref(), &curve_csv(&rows, &header))
        }
        ExperimentKind::Ingest {
            seed,
            file,
            n,
            records,
            out,
        } => {
            let vectors = ingest_csv(&file)?;
            let recs = ingest_records(&vectors, n)?;
            let mut counts: Vec<u64> = Vec::new();
            for r in &recs {
                let b = hillshare::experiments::bucket_index(&r.ratio);
                if counts.len() <= b {
                    counts.resize(b + 1, 0);
                }
                counts[b] += 1;
            }
            let h = RatioHistogram {
                n,
                counts: vec![(vectors.first().map_or(0, |v| v.len() as u64), counts)],
                records: recs,
            };
            let header = format!("# ingest file={} n={n} seed={seed}", file.display());
            if let Some(p) = records {
                emit(Some(&p), &records_csv(&h, &header))?;
            }
            emit(out.as_deref(), &histogram_csv(&h, &header))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
