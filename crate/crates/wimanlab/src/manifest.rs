//! Manifest-driven runs: the JSON schema the command line consumes, the
//! dispatcher that turns a manifest into result text, and the CSV and
//! summary renderers. A manifest pins every output byte, so rerunning one
//! reproduces the artifacts exactly.
//!
//! Exit-code convention: a manifest that fails to parse, or parses into
//! something no experiment can run ([`RunError::Invalid`]), is a usage
//! error (status 2). Everything the experiment modules reject at runtime
//! (domains, truncation gates, theorem scope) is a domain error (status 1).

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::bounds::BoundParams;
use crate::levy::{lower_bound_experiment, HoldCheck, LevyError};
use crate::random::{CoefficientSystem, SystemKind};
use crate::scan::{
    diagonal_exponent_samples, exponent_fit, scan, ExceptionalReport, ExponentFit, Predicate,
    RadialGrid, ScanError,
};
use crate::series::{MultiPowerSeries, SeriesError};
use crate::torus::{
    max_modulus, tail_probability_mc, GridMode, McTrial, TorusBudget, TorusError,
};

/// Term-count cap for family-built series; a manifest asking for more is a
/// manifest defect, not a computation to attempt.
const MAX_FAMILY_TERMS: u128 = 1 << 24;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Parsed fine but cannot describe a runnable experiment; exits 2.
    #[error("manifest invalid: {0}")]
    Invalid(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Scan(#[from] ScanError),
    #[error(transparent)]
    Levy(#[from] LevyError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Invalid(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesFamily {
    /// exp(z_1 + ... + z_p) truncated at the given total degree.
    ExpSum,
}

/// Where the series under study comes from: a built-in family or a text
/// file in the `write_text` format.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum SeriesSpec {
    Family { family: SeriesFamily, p: usize, truncation: u32 },
    File { path: PathBuf },
}

impl SeriesSpec {
    pub fn build(&self) -> Result<MultiPowerSeries, RunError> {
        match self {
            Self::Family { family: SeriesFamily::ExpSum, p, truncation } => {
                if *p == 0 {
                    return Err(RunError::Invalid("family series needs p >= 1".into()));
                }
                let count =
                    crate::mathutil::binomial(*truncation as u64 + *p as u64, *p as u64);
                if count > MAX_FAMILY_TERMS {
                    return Err(RunError::Invalid(format!(
                        "family would hold {count} terms; the cap is {MAX_FAMILY_TERMS}"
                    )));
                }
                Ok(MultiPowerSeries::make_exp_sum(*p, *truncation))
            }
            Self::File { path } => {
                let file = fs::File::open(path).map_err(SeriesError::from)?;
                Ok(MultiPowerSeries::read_text(io::BufReader::new(file))?)
            }
        }
    }
}

/// A coefficient system plus the seed that makes a run replayable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SystemSpec {
    pub kind: SystemKind,
    pub seed: u64,
}

impl SystemSpec {
    pub fn system(self) -> CoefficientSystem {
        CoefficientSystem::new(self.kind, self.seed)
    }
}

fn one_trial() -> usize {
    1
}

/// Levy runs lean on the certified-lower-bound side of the estimator and
/// retry failed checks at a doubled budget, so they start cheap.
pub fn levy_budget() -> TorusBudget {
    TorusBudget { grid_per_axis: 64, refine_steps: 0, sample_count: 0 }
}

/// The experiment a manifest names. Serialized with a `command` tag, so
/// the JSON reads `{"command": "scan", ...}`.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Job {
    /// Growth quantities of one series at one radius tuple.
    Analyze {
        series: SeriesSpec,
        radii: Vec<f64>,
        #[serde(default)]
        system: Option<SystemSpec>,
        #[serde(default)]
        budget: TorusBudget,
    },
    /// Exceptional-set scan of one inequality over a radial grid.
    Scan {
        series: SeriesSpec,
        predicate: Predicate,
        grid: RadialGrid,
        #[serde(default)]
        system: Option<SystemSpec>,
        #[serde(default)]
        params: BoundParams,
        #[serde(default)]
        budget: TorusBudget,
    },
    /// Salem-Zygmund tail Monte Carlo on unit-coefficient polynomials.
    McTail {
        degree: u32,
        p: usize,
        beta: f64,
        trials: usize,
        system: SystemSpec,
        #[serde(default)]
        threshold: Option<f64>,
        #[serde(default)]
        budget: TorusBudget,
    },
    /// Lower-bound experiment over the slice regions A_t.
    Levy {
        p: usize,
        eps: f64,
        t_values: Vec<f64>,
        trials: usize,
        truncation: u32,
        system: SystemSpec,
        #[serde(default = "levy_budget")]
        budget: TorusBudget,
    },
    /// Wiman exponent fit along the isotropic diagonal.
    Fit {
        series: SeriesSpec,
        r_lo: f64,
        r_hi: f64,
        points: usize,
        #[serde(default)]
        system: Option<SystemSpec>,
        #[serde(default = "one_trial")]
        trials: usize,
        #[serde(default)]
        budget: TorusBudget,
    },
}

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub job: Job,
    /// Output directory; omitted means the caller decides.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Everything a run writes, held as text so callers can compare bytes.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub manifest_json: String,
    pub csv_name: &'static str,
    pub csv: String,
    pub summary_json: String,
}

impl RunArtifacts {
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("manifest.json"), &self.manifest_json)?;
        fs::write(dir.join(self.csv_name), &self.csv)?;
        fs::write(dir.join("summary.json"), &self.summary_json)?;
        Ok(())
    }
}

#[derive(Debug, serde::Serialize)]
struct AnalyzeSummary {
    radii: Vec<f64>,
    /// ln of the maximal term.
    mu_log: f64,
    /// Multi-index attaining it.
    maximal_term: Vec<u32>,
    /// ln of the modulus-sum majorant.
    sum_log: f64,
    /// Certified lower estimate of ln max |f|.
    max_log: f64,
    grid_mode: GridMode,
    grid_used: usize,
}

#[derive(Debug, serde::Serialize)]
struct ScanSummary {
    predicate: String,
    scanned_cells: usize,
    flagged_cells: usize,
    flagged_log_measure: f64,
    scanned_log_measure: f64,
    /// Fit of ln(lhs/mu) against ln ln mu over the scanned centers; absent
    /// when the grid is too small or too narrow for a meaningful slope.
    fit: Option<ExponentFit>,
}

#[derive(Debug, serde::Serialize)]
struct McSummary {
    #[serde(rename = "N")]
    degree: u32,
    p: usize,
    beta: f64,
    trials: usize,
    seed: u64,
    quantile_ratio: f64,
    exceed_fraction: f64,
}

#[derive(Debug, serde::Serialize)]
struct LevySummary {
    hold_fraction: f64,
    /// Growth rate of the accumulated region measure against ln t.
    slope: f64,
    eps: f64,
    seed: u64,
}

#[derive(Debug, serde::Serialize)]
struct FitSummary {
    trials: usize,
    median_slope: f64,
    min_slope: f64,
    max_slope: f64,
    median_r2: f64,
}

impl RunManifest {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn command_name(&self) -> &'static str {
        match self.job {
            Job::Analyze { .. } => "analyze",
            Job::Scan { .. } => "scan",
            Job::McTail { .. } => "mc-tail",
            Job::Levy { .. } => "levy",
            Job::Fit { .. } => "fit",
        }
    }

    /// Run the named experiment. Output text depends only on the manifest;
    /// worker count and filesystem layout never reach the artifacts.
    pub fn execute(&self) -> Result<RunArtifacts, RunError> {
        let (csv_name, csv, summary_json) = match &self.job {
            Job::Analyze { series, radii, system, budget } => {
                let base = series.build()?;
                let f = match system {
                    Some(spec) => spec.system().randomize(&base),
                    None => base,
                };
                let (mu_log, maximal_term) = f.maximal_term_log(radii)?;
                let sum_log = f.sum_modulus_log(radii)?;
                let sup = max_modulus(&f, radii, budget)?;
                ("analyze.csv", analyze_csv(radii, mu_log, sum_log, sup.log_value), pretty(
                    &AnalyzeSummary {
                        radii: radii.clone(),
                        mu_log,
                        maximal_term,
                        sum_log,
                        max_log: sup.log_value,
                        grid_mode: sup.mode,
                        grid_used: sup.grid_used,
                    },
                ))
            }
            Job::Scan { series, predicate, grid, system, params, budget } => {
                let base = series.build()?;
                let f = match system {
                    Some(spec) => spec.system().randomize(&base),
                    None => base,
                };
                let report = scan(&f, grid, *predicate, params, budget)?;
                let samples: Vec<(f64, f64)> = report
                    .cells
                    .iter()
                    .filter(|c| c.mu_log > 1.0)
                    .map(|c| (c.mu_log.ln(), c.lhs_log - c.mu_log))
                    .collect();
                let fit = exponent_fit(&samples).ok();
                let summary = pretty(&ScanSummary {
                    predicate: report.predicate_name.clone(),
                    scanned_cells: report.cells.len(),
                    flagged_cells: report.flagged.len(),
                    flagged_log_measure: report.flagged_log_measure,
                    scanned_log_measure: report.scanned_log_measure,
                    fit,
                });
                ("scan.csv", scan_csv(&report), summary)
            }
            Job::McTail { degree, p, beta, trials, system, threshold, budget } => {
                let res = tail_probability_mc(
                    *degree,
                    *p,
                    *beta,
                    *trials,
                    system.system(),
                    *threshold,
                    budget,
                )?;
                let summary = pretty(&McSummary {
                    degree: *degree,
                    p: *p,
                    beta: *beta,
                    trials: *trials,
                    seed: system.seed,
                    quantile_ratio: res.quantile_ratio,
                    exceed_fraction: res.exceed_fraction,
                });
                ("mc_tail.csv", mc_csv(&res.trials), summary)
            }
            Job::Levy { p, eps, t_values, trials, truncation, system, budget } => {
                let res = lower_bound_experiment(
                    *p,
                    *eps,
                    t_values,
                    *trials,
                    system.system(),
                    *truncation,
                    budget,
                )?;
                let summary = pretty(&LevySummary {
                    hold_fraction: res.hold_fraction,
                    slope: res.region_log_measure_slope,
                    eps: *eps,
                    seed: system.seed,
                });
                ("levy.csv", levy_csv(*p, &res.checks), summary)
            }
            Job::Fit { series, r_lo, r_hi, points, system, trials, budget } => {
                let base = series.build()?;
                if *trials == 0 {
                    return Err(RunError::Invalid("fit needs at least one trial".into()));
                }
                if system.is_none() && *trials != 1 {
                    return Err(RunError::Invalid(
                        "a deterministic fit repeats itself; use trials = 1".into(),
                    ));
                }
                let mut fits = Vec::with_capacity(*trials);
                for trial in 0..*trials as u64 {
                    let f = match system {
                        Some(spec) => spec.system().trial_system(trial).randomize(&base),
                        None => base.clone(),
                    };
                    let samples = diagonal_exponent_samples(&f, *r_lo, *r_hi, *points, budget)?;
                    fits.push(exponent_fit(&samples)?);
                }
                let mut slopes: Vec<f64> = fits.iter().map(|f| f.slope).collect();
                let mut r2s: Vec<f64> = fits.iter().map(|f| f.r2).collect();
                let summary = pretty(&FitSummary {
                    trials: *trials,
                    median_slope: crate::mathutil::median(&mut slopes),
                    min_slope: slopes.iter().cloned().fold(f64::INFINITY, f64::min),
                    max_slope: slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    median_r2: crate::mathutil::median(&mut r2s),
                });
                ("fit.csv", fit_csv(&fits), summary)
            }
        };
        Ok(RunArtifacts { manifest_json: self.to_json(), csv_name, csv, summary_json })
    }
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    s
}

/// One numeric CSV field in shortest round-trip form. Non-finite values
/// (the ln of an empty tail sum is -inf) print as an empty field so no NaN
/// or infinity reaches a downstream parser.
fn field(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

fn radius_header(out: &mut String, from: usize, to: usize) {
    for i in from..=to {
        out.push_str(&format!(",r_{i}"));
    }
}

/// `cell_id, r_1..r_p, lhs_log, rhs_log, flagged`, one row per cell in
/// cell-id order.
pub fn scan_csv(report: &ExceptionalReport) -> String {
    let p = report.cells.first().map_or(0, |c| c.radii.len());
    let mut out = String::from("cell_id");
    radius_header(&mut out, 1, p);
    out.push_str(",lhs_log,rhs_log,flagged\n");
    for c in &report.cells {
        out.push_str(&format!("{}", c.cell_id));
        for &r in &c.radii {
            out.push(',');
            out.push_str(&field(r));
        }
        out.push_str(&format!(",{},{},{}\n", field(c.lhs_log), field(c.rhs_log), c.flagged));
    }
    out
}

/// `trial, W, S, ratio` with W and S on the linear scale.
pub fn mc_csv(trials: &[McTrial]) -> String {
    let mut out = String::from("trial,W,S,ratio\n");
    for (i, t) in trials.iter().enumerate() {
        out.push_str(&format!(
            "{i},{},{},{}\n",
            field(t.w_log.exp()),
            field(t.s_log.exp()),
            field(t.ratio)
        ));
    }
    out
}

/// `t, r_2..r_p, trial, lhs_log, rhs_log, holds`; the pinned first radius
/// is the t column, so only the free axes get radius columns.
pub fn levy_csv(p: usize, checks: &[HoldCheck]) -> String {
    let mut out = String::from("t");
    radius_header(&mut out, 2, p);
    out.push_str(",trial,lhs_log,rhs_log,holds\n");
    for c in checks {
        out.push_str(&field(c.t));
        for &r in &c.radii[1..] {
            out.push(',');
            out.push_str(&field(r));
        }
        out.push_str(&format!(
            ",{},{},{},{}\n",
            c.trial,
            field(c.lhs_log),
            field(c.rhs_log),
            c.holds
        ));
    }
    out
}

/// `trial, slope, intercept, r2, sample_count`, one row per trial.
pub fn fit_csv(fits: &[ExponentFit]) -> String {
    let mut out = String::from("trial,slope,intercept,r2,sample_count\n");
    for (i, f) in fits.iter().enumerate() {
        out.push_str(&format!(
            "{i},{},{},{},{}\n",
            field(f.slope),
            field(f.intercept),
            field(f.r2),
            f.sample_count
        ));
    }
    out
}

fn analyze_csv(radii: &[f64], mu_log: f64, sum_log: f64, max_log: f64) -> String {
    let mut out = String::new();
    radius_header(&mut out, 1, radii.len());
    out.remove(0); // leading comma from the shared header helper
    out.push_str(",mu_log,sum_log,max_log\n");
    for &r in radii {
        out.push_str(&field(r));
        out.push(',');
    }
    out.push_str(&format!("{},{},{}\n", field(mu_log), field(sum_log), field(max_log)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan::CellRecord;
    use std::collections::BTreeSet;
    use std::f64::consts::E;

    fn parse_summary(a: &RunArtifacts) -> serde_json::Value {
        serde_json::from_str(&a.summary_json).expect("summary is json")
    }

    #[test]
    fn manifest_json_round_trips_every_command() {
        let texts = [
            r#"{"command":"analyze","series":{"source":"family","family":"exp_sum","p":2,"truncation":80},"radii":[7.389056098930650,7.389056098930650]}"#,
            r#"{"command":"scan","series":{"source":"family","family":"exp_sum","p":1,"truncation":60},"predicate":{"classical":{"exponent":0.55}},"grid":{"lo":[7.4],"hi":[20.0],"cells_per_axis":4}}"#,
            r#"{"command":"mc-tail","degree":64,"p":1,"beta":1.0,"trials":50,"system":{"kind":"steinhaus","seed":7}}"#,
            r#"{"command":"levy","p":1,"eps":0.3,"t_values":[7.4,20.0],"trials":2,"truncation":128,"system":{"kind":"steinhaus","seed":3},"out":"runs/levy"}"#,
            r#"{"command":"fit","series":{"source":"file","path":"series.txt"},"r_lo":7.4,"r_hi":55.0,"points":12}"#,
        ];
        let names = ["analyze", "scan", "mc-tail", "levy", "fit"];
        for (text, name) in texts.iter().zip(names) {
            let m = RunManifest::from_json(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(m.command_name(), name);
            let echo = m.to_json();
            let back = RunManifest::from_json(&echo).unwrap();
            assert_eq!(back.to_json(), echo, "echo not a fixed point for {name}");
            assert!(echo.contains(&format!("\"command\": \"{name}\"")));
        }
        // Defaults fill in: the analyze manifest above carried no budget.
        let m = RunManifest::from_json(texts[0]).unwrap();
        match m.job {
            Job::Analyze { budget, system, .. } => {
                assert_eq!(budget.grid_per_axis, TorusBudget::default().grid_per_axis);
                assert!(system.is_none());
            }
            _ => unreachable!(),
        }
        // The levy default budget is the cheap certified-lower-bound one.
        let m = RunManifest::from_json(texts[3]).unwrap();
        match m.job {
            Job::Levy { budget, .. } => {
                assert_eq!((budget.grid_per_axis, budget.refine_steps), (64, 0));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn schema_and_semantic_defects_exit_two() {
        assert!(RunManifest::from_json(r#"{"command":"frobnicate"}"#).is_err());
        assert!(RunManifest::from_json(r#"{"command":"mc-tail","degree":64}"#).is_err());
        assert!(RunManifest::from_json("{}").is_err());
        // Grid deserialization funnels through validation: lo <= 1 is a
        // parse failure, not a grid that scans garbage.
        assert!(serde_json::from_str::<RadialGrid>(
            r#"{"lo":[0.5],"hi":[2.0],"cells_per_axis":2}"#
        )
        .is_err());

        let zero_p = SeriesSpec::Family { family: SeriesFamily::ExpSum, p: 0, truncation: 5 };
        match zero_p.build() {
            Err(e @ RunError::Invalid(_)) => assert_eq!(e.exit_code(), 2),
            other => panic!("expected Invalid, got {other:?}"),
        }
        let huge =
            SeriesSpec::Family { family: SeriesFamily::ExpSum, p: 3, truncation: 100_000 };
        assert!(matches!(huge.build(), Err(RunError::Invalid(_))));

        // Domain errors keep exit code 1.
        let m = RunManifest::from_json(
            r#"{"command":"levy","p":1,"eps":0.3,"t_values":[30.0],"trials":2,
                "truncation":100,"system":{"kind":"steinhaus","seed":3}}"#,
        )
        .unwrap();
        match m.execute() {
            Err(e @ RunError::Levy(LevyError::TruncationInadequate { .. })) => {
                assert_eq!(e.exit_code(), 1)
            }
            other => panic!("expected the coverage gate, got {other:?}"),
        }
    }

    #[test]
    fn csv_renderers_follow_the_declared_schemas() {
        let report = ExceptionalReport {
            predicate_name: "eq9_tail".into(),
            flagged: BTreeSet::from([1]),
            flagged_log_measure: 0.25,
            scanned_log_measure: 1.0,
            cells: vec![
                CellRecord {
                    cell_id: 0,
                    radii: vec![2.0, 4.0],
                    lhs_log: f64::NEG_INFINITY,
                    rhs_log: 1.5,
                    mu_log: 1.2,
                    flagged: false,
                },
                CellRecord {
                    cell_id: 1,
                    radii: vec![2.0, 8.0],
                    lhs_log: 2.5,
                    rhs_log: 1.5,
                    mu_log: 2.2,
                    flagged: true,
                },
            ],
        };
        assert_eq!(
            scan_csv(&report),
            "cell_id,r_1,r_2,lhs_log,rhs_log,flagged\n\
             0,2,4,,1.5,false\n\
             1,2,8,2.5,1.5,true\n"
        );

        let rows = vec![McTrial { w_log: 0.0, s_log: 2f64.ln(), ratio: 0.5 }];
        assert_eq!(mc_csv(&rows), "trial,W,S,ratio\n0,1,2,0.5\n");

        let checks = vec![HoldCheck {
            t: 20.0,
            radii: vec![20.0, 25.0, 30.0],
            trial: 3,
            lhs_log: 21.5,
            rhs_log: 20.0,
            holds: true,
            retried: false,
        }];
        assert_eq!(
            levy_csv(3, &checks),
            "t,r_2,r_3,trial,lhs_log,rhs_log,holds\n20,25,30,3,21.5,20,true\n"
        );
        assert_eq!(levy_csv(1, &[]), "t,trial,lhs_log,rhs_log,holds\n");

        let fits =
            vec![ExponentFit { slope: 0.5, intercept: 0.9, r2: 0.999, sample_count: 12 }];
        assert_eq!(
            fit_csv(&fits),
            "trial,slope,intercept,r2,sample_count\n0,0.5,0.9,0.999,12\n"
        );
    }

    #[test]
    fn analyze_matches_the_sum_identity_and_reruns_identically() {
        let r = E * E;
        let m = RunManifest {
            job: Job::Analyze {
                series: SeriesSpec::Family {
                    family: SeriesFamily::ExpSum,
                    p: 2,
                    truncation: 80,
                },
                radii: vec![r, r],
                system: None,
                budget: TorusBudget { grid_per_axis: 64, refine_steps: 1, sample_count: 0 },
            },
            out: None,
        };
        let a = m.execute().unwrap();
        let v = parse_summary(&a);
        // ln of the modulus-sum majorant for exp(z_1 + z_2) is r_1 + r_2.
        assert!((v["sum_log"].as_f64().unwrap() - 2.0 * r).abs() < 1e-6);
        assert!(v["mu_log"].as_f64().unwrap() < v["sum_log"].as_f64().unwrap());
        assert!(v["max_log"].as_f64().unwrap() <= v["sum_log"].as_f64().unwrap() + 1e-12);
        assert_eq!(a.csv.lines().count(), 2);
        assert_eq!(a.csv.lines().next().unwrap(), "r_1,r_2,mu_log,sum_log,max_log");

        let b = m.execute().unwrap();
        assert_eq!(a.csv, b.csv);
        assert_eq!(a.summary_json, b.summary_json);
        assert_eq!(a.manifest_json, b.manifest_json);

        // The echo re-executes to the same bytes.
        let echoed = RunManifest::from_json(&a.manifest_json).unwrap();
        let c = echoed.execute().unwrap();
        assert_eq!(a.csv, c.csv);
        assert_eq!(a.summary_json, c.summary_json);
    }

    #[test]
    fn mc_tail_runs_are_byte_identical_and_summarized() {
        let m = RunManifest::from_json(
            r#"{"command":"mc-tail","degree":64,"p":1,"beta":1.0,"trials":50,
                "system":{"kind":"steinhaus","seed":7}}"#,
        )
        .unwrap();
        let a = m.execute().unwrap();
        let b = m.execute().unwrap();
        assert_eq!(a.csv, b.csv);
        assert_eq!(a.csv_name, "mc_tail.csv");
        assert_eq!(a.csv.lines().count(), 51);
        let v = parse_summary(&a);
        assert_eq!(v["N"].as_u64(), Some(64));
        assert_eq!(v["p"].as_u64(), Some(1));
        assert_eq!(v["trials"].as_u64(), Some(50));
        assert_eq!(v["seed"].as_u64(), Some(7));
        assert!(v["quantile_ratio"].as_f64().unwrap() > 0.0);
        assert!(v["exceed_fraction"].as_f64().unwrap() <= 1.0);
    }

    #[test]
    fn scan_manifest_hits_the_truncation_gate_with_exit_one() {
        let m = RunManifest::from_json(
            r#"{"command":"scan",
                "series":{"source":"family","family":"exp_sum","p":1,"truncation":10},
                "predicate":"eq9_tail",
                "grid":{"lo":[7.4],"hi":[13.5],"cells_per_axis":2}}"#,
        )
        .unwrap();
        match m.execute() {
            Err(e @ RunError::Scan(ScanError::TruncationInadequate { .. })) => {
                assert_eq!(e.exit_code(), 1);
                let msg = e.to_string();
                assert!(msg.contains("truncation inadequate"), "{msg}");
            }
            other => panic!("expected the truncation gate, got {other:?}"),
        }
    }

    #[test]
    fn deterministic_fit_recovers_the_half_exponent() {
        let m = RunManifest {
            job: Job::Fit {
                series: SeriesSpec::Family {
                    family: SeriesFamily::ExpSum,
                    p: 1,
                    truncation: 420,
                },
                r_lo: E * E,
                r_hi: E.powi(4),
                points: 12,
                system: None,
                trials: 1,
                budget: TorusBudget { grid_per_axis: 128, refine_steps: 1, sample_count: 0 },
            },
            out: None,
        };
        let a = m.execute().unwrap();
        let v = parse_summary(&a);
        let slope = v["median_slope"].as_f64().unwrap();
        assert!((0.35..0.65).contains(&slope), "slope = {slope}");
        assert!(v["median_r2"].as_f64().unwrap() > 0.95);
        assert_eq!(a.csv.lines().count(), 2);

        let zero = RunManifest {
            job: Job::Fit {
                series: SeriesSpec::Family {
                    family: SeriesFamily::ExpSum,
                    p: 1,
                    truncation: 420,
                },
                r_lo: E * E,
                r_hi: E.powi(4),
                points: 12,
                system: None,
                trials: 3,
                budget: TorusBudget::default(),
            },
            out: None,
        };
        assert!(matches!(zero.execute(), Err(RunError::Invalid(_))));
    }

    #[test]
    fn file_series_flow_through_manifests_and_artifacts_write() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("poly.txt");
        let f = MultiPowerSeries::from_terms(
            1,
            8,
            vec![(vec![0], 0.0, 0.0), (vec![3], 0.0, 0.0), (vec![8], 0.0, 0.0)],
        )
        .unwrap();
        let mut buf = Vec::new();
        f.write_text(&mut buf).unwrap();
        fs::write(&path, buf).unwrap();

        let m = RunManifest {
            job: Job::Analyze {
                series: SeriesSpec::File { path: path.clone() },
                radii: vec![2.0],
                system: None,
                budget: TorusBudget { grid_per_axis: 64, refine_steps: 2, sample_count: 0 },
            },
            out: None,
        };
        let a = m.execute().unwrap();
        let v = parse_summary(&a);
        // mu at r = 2 is the degree-8 term: 2^8.
        assert!((v["mu_log"].as_f64().unwrap() - 8.0 * 2f64.ln()).abs() < 1e-12);
        // max at theta = 0 is 1 + 2^3 + 2^8 for all-positive coefficients.
        assert!((v["max_log"].as_f64().unwrap() - 265f64.ln()).abs() < 1e-9);

        let out = dir.path().join("run");
        a.write_to(&out).unwrap();
        assert_eq!(fs::read_to_string(out.join("analyze.csv")).unwrap(), a.csv);
        assert_eq!(fs::read_to_string(out.join("manifest.json")).unwrap(), a.manifest_json);
        assert_eq!(fs::read_to_string(out.join("summary.json")).unwrap(), a.summary_json);

        let missing = SeriesSpec::File { path: dir.path().join("nope.txt") };
        match missing.build() {
            Err(e @ RunError::Series(_)) => assert_eq!(e.exit_code(), 1),
            other => panic!("expected a series error, got {other:?}"),
        }
    }
}
