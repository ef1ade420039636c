//! Command-line surface: spec ingestion, command dispatch, report emission.

use std::io::Write as _;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::builtin;
use crate::eigen::h_values;
use crate::error::{Error, Result};
use crate::gibbs::top_cylinders;
use crate::oracle::oracle_pressure;
use crate::potential::{PatternPoint, WaltersPotential, Word};
use crate::pressure::{pressure, DEFAULT_TOL};
use crate::report::{
    CheckRow, ChecklistReport, CsvReport, EigenReport, EigenRow, GibbsReport, GibbsRow, Limits,
    OracleReport, OracleRow, PressureReport, RateRow, RatesReport, SubactionRow, ValidateReport,
    ZeroTempReport,
};
use crate::zerotemp::{
    beta_max, calibration_residual, check_max_hypothesis, compute_a, nonpositive_a, numeric_slope,
    select_measure, Subaction,
};

#[derive(Parser)]
#[command(
    name = "walters-thermo",
    about = "Finite-temperature thermodynamics and zero-temperature limits for run-structured potentials on the binary shift",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SourceArgs {
    /// JSON potential spec file
    #[arg(long, value_name = "FILE", conflicts_with = "builtin")]
    spec: Option<PathBuf>,
    /// built-in instance: zero, constant:K, example1[:B1], thm2, thm2-mirror, symmetric
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
}

impl SourceArgs {
    fn load(&self) -> Result<WaltersPotential> {
        match (&self.spec, &self.builtin) {
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)?;
                WaltersPotential::from_json_str(&text)
            }
            (None, Some(name)) => builtin::by_name(name),
            _ => Err(Error::InvalidSpec(
                "exactly one of --spec and --builtin is required".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// report format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// write the report to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    /// single temperature
    #[arg(long, conflicts_with = "t_grid")]
    t: Option<f64>,
    /// temperature grid A:B:N or A:B:N:log
    #[arg(long, value_name = "A:B:N[:log]")]
    t_grid: Option<String>,
}

impl GridArgs {
    fn resolve(&self, default: &[f64]) -> Result<Vec<f64>> {
        match (&self.t, &self.t_grid) {
            (Some(t), None) => Ok(vec![*t]),
            (None, Some(g)) => parse_grid(g),
            (None, None) => Ok(default.to_vec()),
            _ => unreachable!("clap enforces the conflict"),
        }
    }
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = |why: &str| Error::InvalidSpec(format!("grid {s:?}: {why}"));
    let log_spaced = match parts.len() {
        3 => false,
        4 if parts[3] == "log" => true,
        _ => return Err(bad("expected A:B:N or A:B:N:log")),
    };
    let a: f64 = parts[0].parse().map_err(|_| bad("bad start"))?;
    let b: f64 = parts[1].parse().map_err(|_| bad("bad stop"))?;
    let n: usize = parts[2].parse().map_err(|_| bad("bad count"))?;
    if n < 2 || !(a < b) {
        return Err(bad("need at least 2 points with start < stop"));
    }
    if log_spaced && !(a > 0.0) {
        return Err(bad("log spacing needs a positive start"));
    }
    let step = if log_spaced { (b / a).ln() / (n - 1) as f64 } else { (b - a) / (n - 1) as f64 };
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else if log_spaced {
                a * ((i as f64) * step).exp()
            } else {
                a + (i as f64) * step
            }
        })
        .collect())
}

fn parse_words(raw: &[String], default: &[&str]) -> Result<Vec<Word>> {
    let take: Vec<String> = if raw.is_empty() {
        default.iter().map(|s| s.to_string()).collect()
    } else {
        raw.to_vec()
    };
    take.iter().map(|s| Word::parse(s)).collect()
}

#[derive(Subcommand)]
enum Command {
    /// Check a potential spec: limits, summable tails, maximization screen
    Validate {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve the pressure equation over one or more temperatures
    Pressure {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// root residual tolerance
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Eigenfunction values on run classes with residual certification
    Eigen {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        t: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Gibbs cylinder measures at one temperature
    Gibbs {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        t: f64,
        /// cylinder word, repeatable; defaults to all words of length <= 2
        #[arg(long = "word", value_name = "W")]
        words: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Maximizing constant, subaction table, calibration check
    ZeroTemp {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Measure-selection verdict with the compared sums
    Select {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fitted decay slopes of epsilon and cylinder measures over a grid
    Rates {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// cylinder word, repeatable; defaults to 01, 10, 001
        #[arg(long = "word", value_name = "W")]
        words: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Depth-k transfer-model eigenvalue sweep
    Oracle {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        t: f64,
        /// largest depth in the sweep 4, 6, ..., K
        #[arg(long, default_value_t = 12)]
        depth: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// End-to-end reproduction checklist for the bundled example instance
    Example1 {
        #[command(flatten)]
        output: OutputArgs,
    },
}

pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("WALTERS_THERMO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::InvalidSpec(format!("WALTERS_THERMO_THREADS={raw:?} is not a positive integer")))?;
    // a second initialization in the same process is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn emit<R: serde::Serialize + CsvReport>(report: &R, output: &OutputArgs) -> Result<()> {
    let text = match output.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            s
        }
        Format::Csv => report.to_csv(),
    };
    match &output.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Validate { source, output } => {
            let f = source.load()?;
            let (beta, screen) = match beta_max(&f) {
                Ok(b) => (Some(b), Some(check_max_hypothesis(&f)?)),
                Err(_) => (None, None),
            };
            let report = ValidateReport {
                limits: Limits {
                    a: f.a_limit(),
                    b: f.b_limit(),
                    c: f.c_limit(),
                    d: f.d_limit(),
                },
                sup_f: f.sup_f(),
                tail_sum_a: f.a_seq().tail_sum(1),
                tail_sum_c: f.c_seq().tail_sum(1),
                beta,
                screen,
            };
            emit(&report, &output)?;
            Ok(0)
        }
        Command::Pressure { source, grid, tol, output } => {
            let f = source.load()?;
            let ts = grid.resolve(&[1.0])?;
            let rows = ts
                .par_iter()
                .map(|&t| pressure(&f, t, tol))
                .collect::<Result<Vec<_>>>()?;
            emit(&PressureReport { rows }, &output)?;
            Ok(0)
        }
        Command::Eigen { source, t, output } => {
            let f = source.load()?;
            let e = h_values(&f, t)?;
            let q_cap = 30;
            let mut rows = Vec::new();
            for q in 1..=q_cap {
                rows.push(EigenRow {
                    q,
                    log_alpha: e.log_alpha(q)?,
                    log_beta: e.log_beta(q)?,
                    residual_zeros: e.residual(PatternPoint::ZeroRun(q))?,
                    residual_ones: e.residual(PatternPoint::OneRun(q))?,
                });
            }
            let report = EigenReport {
                t,
                p: e.p(),
                epsilon: e.epsilon(),
                log_beta_inf: e.log_beta_inf(),
                max_residual: e.max_residual(q_cap)?,
                rows,
            };
            emit(&report, &output)?;
            Ok(0)
        }
        Command::Gibbs { source, t, words, output } => {
            let f = source.load()?;
            let words = parse_words(&words, &["0", "1", "00", "01", "10", "11"])?;
            let table = top_cylinders(&f, t)?;
            let mut rows = Vec::new();
            for w in &words {
                let log_mu = table.cylinder_measure(w)?;
                rows.push(GibbsRow {
                    word: w.as_str().to_string(),
                    log_mu: log_mu.0,
                    mu: log_mu.linear(),
                });
            }
            let report = GibbsReport {
                t,
                p: table.p(),
                log_s0: table.log_s0(),
                log_s1: table.log_s1(),
                deficit_events: table.deficit_events(),
                rows,
            };
            emit(&report, &output)?;
            Ok(0)
        }
        Command::ZeroTemp { source, output } => {
            let f = source.load()?;
            let beta = beta_max(&f)?;
            let screen = check_max_hypothesis(&f)?;
            let (a, a_case) = compute_a(&f)?;
            let nonpositive = match nonpositive_a(&f) {
                Ok(v) => Some(v),
                Err(Error::NotNonPositive(_)) => None,
                Err(e) => return Err(e),
            };
            let v = Subaction::new(&f, a)?;
            let q_show = 10;
            let mut rows = vec![
                SubactionRow { class: "0inf".into(), q: 0, v: v.value(PatternPoint::ZeroInf) },
                SubactionRow { class: "1inf".into(), q: 0, v: v.value(PatternPoint::OneInf) },
            ];
            for q in 1..=q_show {
                rows.push(SubactionRow {
                    class: "0q1".into(),
                    q,
                    v: v.value(PatternPoint::ZeroRun(q)),
                });
                rows.push(SubactionRow {
                    class: "1q0".into(),
                    q,
                    v: v.value(PatternPoint::OneRun(q)),
                });
            }
            let calibration_q_max = 30;
            let report = ZeroTempReport {
                beta,
                screen,
                a,
                a_case,
                nonpositive_a: nonpositive,
                route_gap: nonpositive.map(|np| (np - a).abs()),
                calibration_residual: calibration_residual(
                    &f,
                    &|p| v.value(p),
                    calibration_q_max,
                )?,
                calibration_q_max,
                rows,
            };
            emit(&report, &output)?;
            Ok(0)
        }
        Command::Select { source, output } => {
            let f = source.load()?;
            emit(&select_measure(&f)?, &output)?;
            Ok(0)
        }
        Command::Rates { source, grid, words, output } => {
            let f = source.load()?;
            let ts = grid.resolve(&[20.0, 40.0, 60.0, 80.0])?;
            let words = parse_words(&words, &["01", "10", "001"])?;
            let report = rates_report(&f, &ts, &words)?;
            emit(&report, &output)?;
            Ok(0)
        }
        Command::Oracle { source, t, depth, output } => {
            let f = source.load()?;
            if !(4..=16).contains(&depth) {
                return Err(Error::Domain(format!("depth {depth} must lie in 4..=16")));
            }
            let p = pressure(&f, t, DEFAULT_TOL)?.p;
            let ks: Vec<u32> = (4..=depth).step_by(2).collect();
            let rows = ks
                .par_iter()
                .map(|&k| {
                    let log_lambda = oracle_pressure(&f, t, k)?;
                    Ok(OracleRow { k, log_lambda, gap: (log_lambda - p).abs() })
                })
                .collect::<Result<Vec<_>>>()?;
            emit(&OracleReport { t, p, rows }, &output)?;
            Ok(0)
        }
        Command::Example1 { output } => {
            let report = example1_checklist()?;
            let code = if report.all_passed { 0 } else { 3 };
            emit(&report, &output)?;
            Ok(code)
        }
    }
}

/// Solve everything the rates report needs at one temperature, then fit.
fn rates_report(f: &WaltersPotential, ts: &[f64], words: &[Word]) -> Result<RatesReport> {
    struct Sample {
        t: f64,
        log_eps: f64,
        log_mus: Vec<f64>,
    }
    let samples: Vec<Sample> = ts
        .par_iter()
        .map(|&t| {
            let table = top_cylinders(f, t)?;
            let log_mus = words
                .iter()
                .map(|w| table.cylinder_measure(w).map(|v| v.0))
                .collect::<Result<Vec<_>>>()?;
            Ok(Sample { t, log_eps: table.epsilon().ln(), log_mus })
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let eps_pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.t, s.log_eps)).collect();
    let fit = numeric_slope(&eps_pts)?;
    rows.push(RateRow {
        target: "epsilon".into(),
        slope: fit.slope,
        intercept: fit.intercept,
        r2: fit.r2,
        per_point: fit.per_point,
    });
    for (i, w) in words.iter().enumerate() {
        let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.t, s.log_mus[i])).collect();
        let fit = numeric_slope(&pts)?;
        rows.push(RateRow {
            target: w.as_str().to_string(),
            slope: fit.slope,
            intercept: fit.intercept,
            r2: fit.r2,
            per_point: fit.per_point,
        });
    }
    Ok(RatesReport { grid: ts.to_vec(), rows })
}

fn check(rows: &mut Vec<CheckRow>, name: &str, passed: bool, detail: String) {
    rows.push(CheckRow { name: name.into(), passed, detail });
}

/// The bundled example instance reproduced end to end: exact constant and
/// subaction values, fixed-point symmetries of the Gibbs family, and decay
/// rates approaching the constant.
fn example1_checklist() -> Result<ChecklistReport> {
    let mut rows = Vec::new();
    for b1 in [-1.0, -0.2] {
        let tag = format!("b1={b1}");
        let f = builtin::example1(b1);
        let (a, case) = compute_a(&f)?;
        check(
            &mut rows,
            &format!("constant-exact [{tag}]"),
            a == -3.5,
            format!("A = {a} via {case:?}"),
        );
        let v = Subaction::new(&f, a)?;
        let v1 = v.value(PatternPoint::OneInf);
        check(&mut rows, &format!("v-at-1inf [{tag}]"), v1 == -0.5, format!("V(1^inf) = {v1}"));
        let mut v_ok = true;
        let mut v_detail = String::new();
        for p in 2..=6u32 {
            let got = v.value(PatternPoint::ZeroRun(p));
            let want = f.b_limit() - f.a_seq().partial_sum(1, p - 1);
            if got != want {
                v_ok = false;
                v_detail = format!("p = {p}: {got} vs {want}");
                break;
            }
        }
        check(
            &mut rows,
            &format!("v-on-zero-runs [{tag}]"),
            v_ok,
            if v_ok { "exact for p = 2..6".into() } else { v_detail },
        );
        let resid = calibration_residual(&f, &|pt| v.value(pt), 30)?;
        check(
            &mut rows,
            &format!("calibration [{tag}]"),
            resid < 1e-9,
            format!("residual {resid:e}"),
        );
        let mut beta_dev: f64 = 0.0;
        let mut half_dev: f64 = 0.0;
        for t in [1.0, 5.0, 20.0] {
            let table = top_cylinders(&f, t)?;
            let beta_inf = table.eigen().log_beta_inf().exp();
            let want = (-t / 2.0).exp();
            beta_dev = beta_dev.max(((beta_inf - want) / want).abs());
            half_dev = half_dev.max((table.log_mu0().exp() - 0.5).abs());
        }
        check(
            &mut rows,
            &format!("fixed-point-eigenvalue [{tag}]"),
            beta_dev < 1e-8,
            format!("max rel dev {beta_dev:e} vs exp(-t/2)"),
        );
        check(
            &mut rows,
            &format!("mu-zero-half [{tag}]"),
            half_dev < 1e-10,
            format!("max dev {half_dev:e}"),
        );
        let table = top_cylinders(&f, 1.0)?;
        let mut sym_dev: f64 = 0.0;
        for j in 2..=6u32 {
            let zeros = "0".repeat(j as usize) + "1";
            let ones = "1".repeat(j as usize) + "0";
            let mz = table.cylinder_measure(&Word::parse(&zeros)?)?.linear();
            let mo = table.cylinder_measure(&Word::parse(&ones)?)?.linear();
            sym_dev = sym_dev.max(((mz - mo) / mo).abs());
        }
        check(
            &mut rows,
            &format!("run-symmetry [{tag}]"),
            sym_dev < 1e-8,
            format!("max rel dev {sym_dev:e}"),
        );
    }
    // decay rates on the default grid approach the constant
    let f = builtin::example1(-1.0);
    let ts = [20.0, 40.0, 60.0, 80.0];
    let words: Vec<Word> = ["01", "10", "001"].iter().map(|s| Word::parse(s).unwrap()).collect();
    let rates = rates_report(&f, &ts, &words)?;
    let mut s0_pts = Vec::new();
    for &t in &ts {
        s0_pts.push((t, top_cylinders(&f, t)?.log_s0()));
    }
    let s0_fit = numeric_slope(&s0_pts)?;
    let trend = |per_point: &[(f64, f64)], target: f64| -> (bool, f64, f64) {
        let first = (per_point[0].1 - target).abs();
        let last = (per_point.last().unwrap().1 - target).abs();
        (last < 0.2 && last < first, first, last)
    };
    for row in &rates.rows {
        let (ok, first, last) = trend(&row.per_point, -3.5);
        check(
            &mut rows,
            &format!("rate-{}", row.target),
            ok,
            format!("dev {first:e} at t={} -> {last:e} at t={}", ts[0], ts[3]),
        );
    }
    let (ok, first, last) = trend(&s0_fit.per_point, 3.5);
    check(
        &mut rows,
        "rate-s0",
        ok,
        format!("dev {first:e} at t={} -> {last:e} at t={}", ts[0], ts[3]),
    );
    let all_passed = rows.iter().all(|r| r.passed);
    Ok(ChecklistReport { all_passed, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("1:3:3").unwrap(), vec![1.0, 2.0, 3.0]);
        let g = parse_grid("1:100:3:log").unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12);
        assert_eq!(g[2], 100.0);
        assert!(parse_grid("3:1:3").is_err());
        assert!(parse_grid("1:3:1").is_err());
        assert!(parse_grid("1:3").is_err());
        assert!(parse_grid("-1:3:3:log").is_err());
        assert!(parse_grid("a:b:c").is_err());
    }

    #[test]
    fn example1_checklist_all_pass() {
        let report = example1_checklist().unwrap();
        for row in &report.rows {
            assert!(row.passed, "{}: {}", row.name, row.detail);
        }
        assert!(report.all_passed);
    }
}
