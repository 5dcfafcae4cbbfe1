//! Command-line front door. Every subcommand builds a run manifest, executes
//! it, writes `manifest.json` + the result CSV + `summary.json` into `--out`,
//! and prints the summary. Exit codes: 0 ok, 1 domain error, 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wimanlab::bounds::BoundParams;
use wimanlab::manifest::{levy_budget, Job, RunManifest, SeriesFamily, SeriesSpec, SystemSpec};
use wimanlab::random::SystemKind;
use wimanlab::scan::{Predicate, RadialGrid};
use wimanlab::torus::TorusBudget;

#[derive(Parser)]
#[command(name = "wimanlab", version, about = "Wiman-type inequalities, measured")]
struct Cli {
    /// Worker threads for cell and trial evaluation (default: all cores).
    /// Results never depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory for manifest.json, the result CSV, and summary.json
    /// (default: the current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

/// "e2.5" means e^2.5; anything else parses as a plain decimal.
fn parse_radius(s: &str) -> Result<f64, String> {
    let v = if let Some(exponent) = s.strip_prefix('e') {
        exponent.parse::<f64>().map(f64::exp)
    } else {
        s.parse::<f64>()
    };
    match v {
        Ok(r) if r.is_finite() && r > 0.0 => Ok(r),
        _ => Err(format!("bad radius {s:?}; use a decimal or eK shorthand like e2.5")),
    }
}

fn parse_predicate(s: &str) -> Result<Predicate, String> {
    Predicate::parse(s).ok_or_else(|| {
        format!(
            "unknown predicate {s:?}; one of eq3, eq5, star_quarter, thm11b_half, \
             eq9_tail, lemma23, classical:EXPONENT"
        )
    })
}

fn parse_kind(s: &str) -> Result<SystemKind, String> {
    SystemKind::parse(s).ok_or_else(|| {
        format!("unknown system {s:?}; one of rademacher, steinhaus, complex_ms, all_plus_one")
    })
}

fn parse_family(s: &str) -> Result<SeriesFamily, String> {
    match s {
        "exp_sum" => Ok(SeriesFamily::ExpSum),
        _ => Err(format!("unknown family {s:?}; only exp_sum is built in")),
    }
}

#[derive(Args)]
struct SeriesArgs {
    /// Built-in series family.
    #[arg(long, default_value = "exp_sum", value_parser = parse_family)]
    family: SeriesFamily,
    /// Number of variables.
    #[arg(long, default_value_t = 1)]
    p: usize,
    /// Truncation: largest total degree kept.
    #[arg(long = "N", default_value_t = 1200)]
    truncation: u32,
    /// Series text file (header `p truncation`, then `n_1 .. n_p log_mod
    /// phase` per line); overrides the family flags.
    #[arg(long)]
    series_file: Option<PathBuf>,
}

impl SeriesArgs {
    fn spec(&self) -> SeriesSpec {
        match &self.series_file {
            Some(path) => SeriesSpec::File { path: path.clone() },
            None => SeriesSpec::Family {
                family: self.family,
                p: self.p,
                truncation: self.truncation,
            },
        }
    }
}

#[derive(Args)]
struct SystemArgs {
    /// Coefficient system to randomize with.
    #[arg(long, value_parser = parse_kind)]
    system: Option<SystemKind>,
    /// Seed for the coefficient system.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl SystemArgs {
    fn optional(&self) -> Option<SystemSpec> {
        self.system.map(|kind| SystemSpec { kind, seed: self.seed })
    }

    fn or_default(&self, default_kind: SystemKind) -> SystemSpec {
        SystemSpec { kind: self.system.unwrap_or(default_kind), seed: self.seed }
    }
}

#[derive(Args)]
struct BudgetArgs {
    /// Torus grid points per axis (snaps up to a power of two).
    #[arg(long)]
    grid: Option<usize>,
    /// Coordinate-ascent refinement sweeps.
    #[arg(long)]
    refine: Option<usize>,
    /// Random start tuples when p >= 3.
    #[arg(long)]
    samples: Option<usize>,
}

impl BudgetArgs {
    fn budget(&self, base: TorusBudget) -> TorusBudget {
        TorusBudget {
            grid_per_axis: self.grid.unwrap_or(base.grid_per_axis),
            refine_steps: self.refine.unwrap_or(base.refine_steps),
            sample_count: self.samples.unwrap_or(base.sample_count),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Maximal term, modulus-sum majorant, and a certified max estimate at
    /// one radius tuple.
    Analyze {
        #[command(flatten)]
        series: SeriesArgs,
        /// Radius per axis, comma separated.
        #[arg(long = "r", value_delimiter = ',', required = true, value_parser = parse_radius)]
        radii: Vec<f64>,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Scan a radial grid for cells violating an inequality and account
    /// their logarithmic measure.
    Scan {
        #[command(flatten)]
        series: SeriesArgs,
        /// eq3 | eq5 | star_quarter | thm11b_half | eq9_tail | lemma23 |
        /// classical:EXPONENT
        #[arg(long, value_parser = parse_predicate)]
        predicate: Predicate,
        /// Lower radius per axis, comma separated.
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_radius)]
        r_lo: Vec<f64>,
        /// Upper radius per axis, comma separated.
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_radius)]
        r_hi: Vec<f64>,
        /// Cells per axis.
        #[arg(long, default_value_t = 8)]
        cells: usize,
        /// Exponent slack in the multivariate brackets.
        #[arg(long)]
        delta: Option<f64>,
        /// Slack in the directional-derivative bound.
        #[arg(long)]
        delta1: Option<f64>,
        /// Slack in the tail-cut degree.
        #[arg(long)]
        delta2: Option<f64>,
        /// Slack in the single-variable classical bound.
        #[arg(long)]
        eps: Option<f64>,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Salem-Zygmund tail Monte Carlo for the randomized sup/2-norm ratio.
    McTail {
        /// Total degree of the unit-coefficient polynomial.
        #[arg(long = "N", default_value_t = 64)]
        degree: u32,
        /// Number of variables.
        #[arg(long, default_value_t = 1)]
        p: usize,
        /// Quantile parameter: the fit reports the (1 - 1/N^beta)-quantile.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Exceedance threshold; defaults to the fitted quantile itself.
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Lower-bound experiment over the slice regions A_t (steinhaus scope).
    Levy {
        /// Number of variables.
        #[arg(long, default_value_t = 2)]
        p: usize,
        /// Slack below the p/4 exponent in the bound being checked.
        #[arg(long, default_value_t = 0.15)]
        eps: f64,
        /// Pinned first radii of the slices, comma separated, increasing.
        #[arg(long = "t", value_delimiter = ',', required = true, value_parser = parse_radius)]
        t_values: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Truncation of the exp-sum series under test.
        #[arg(long = "N", default_value_t = 600)]
        truncation: u32,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Fit the empirical Wiman exponent along the isotropic diagonal.
    Fit {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, default_value = "e2", value_parser = parse_radius)]
        r_lo: f64,
        #[arg(long, default_value = "e6", value_parser = parse_radius)]
        r_hi: f64,
        /// Log-spaced sample radii between r_lo and r_hi.
        #[arg(long, default_value_t = 24)]
        points: usize,
        /// Independent randomized trials (needs --system; 1 when absent).
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

impl Command {
    fn into_job(self) -> Result<Job, String> {
        Ok(match self {
            Command::Analyze { series, radii, system, budget } => Job::Analyze {
                series: series.spec(),
                radii,
                system: system.optional(),
                budget: budget.budget(TorusBudget::default()),
            },
            Command::Scan {
                series,
                predicate,
                r_lo,
                r_hi,
                cells,
                delta,
                delta1,
                delta2,
                eps,
                system,
                budget,
            } => {
                let grid = RadialGrid::new(r_lo, r_hi, cells).map_err(|e| e.to_string())?;
                let mut params = BoundParams::default();
                if let Some(v) = delta {
                    params.delta = v;
                }
                if let Some(v) = delta1 {
                    params.delta1 = v;
                }
                if let Some(v) = delta2 {
                    params.delta2 = v;
                }
                if let Some(v) = eps {
                    params.eps = v;
                }
                Job::Scan {
                    series: series.spec(),
                    predicate,
                    grid,
                    system: system.optional(),
                    params,
                    budget: budget.budget(TorusBudget::default()),
                }
            }
            Command::McTail { degree, p, beta, trials, threshold, system, budget } => {
                Job::McTail {
                    degree,
                    p,
                    beta,
                    trials,
                    system: system.or_default(SystemKind::Steinhaus),
                    threshold,
                    budget: budget.budget(TorusBudget::default()),
                }
            }
            Command::Levy { p, eps, t_values, trials, truncation, system, budget } => {
                Job::Levy {
                    p,
                    eps,
                    t_values,
                    trials,
                    truncation,
                    system: system.or_default(SystemKind::Steinhaus),
                    budget: budget.budget(levy_budget()),
                }
            }
            Command::Fit { series, r_lo, r_hi, points, trials, system, budget } => Job::Fit {
                series: series.spec(),
                r_lo,
                r_hi,
                points,
                system: system.optional(),
                trials,
                budget: budget.budget(TorusBudget::default()),
            },
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
            eprintln!("error: could not size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    let job = match cli.command.into_job() {
        Ok(job) => job,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let manifest = RunManifest { job, out: cli.out };
    match manifest.execute() {
        Ok(artifacts) => {
            let dir = manifest.out.clone().unwrap_or_else(|| PathBuf::from("."));
            if let Err(e) = artifacts.write_to(&dir) {
                eprintln!("error: writing artifacts under {}: {e}", dir.display());
                return ExitCode::from(1);
            }
            print!("{}", artifacts.summary_json);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
