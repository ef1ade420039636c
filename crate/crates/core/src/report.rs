//! Report types emitted by the CLI: one struct per command, serialized to
//! JSON one-to-one or to CSV with fixed documented columns. All containers
//! are ordered so identical inputs produce byte-identical output.

use serde::{Deserialize, Serialize};

use crate::pressure::PressureSolution;
use crate::zerotemp::{ACase, MaxHypothesis, SelectionReport};

/// CSV rendering with a fixed header row per report type.
pub trait CsvReport {
    fn to_csv(&self) -> String;
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// `validate`: spec health, sequence limits, summable tails, and the
/// boundary-maximization screen (absent when the two limits differ).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub limits: Limits,
    pub sup_f: f64,
    pub tail_sum_a: f64,
    pub tail_sum_c: f64,
    pub beta: Option<f64>,
    pub screen: Option<MaxHypothesis>,
}

impl CsvReport for ValidateReport {
    // columns: a,b,c,d,sup_f,tail_sum_a,tail_sum_c,beta,screen
    fn to_csv(&self) -> String {
        let screen = match self.screen {
            None => "not-applicable".into(),
            Some(MaxHypothesis::Pass) => "pass".into(),
            Some(MaxHypothesis::PeriodicAttainer { j0, j1 }) => {
                format!("periodic-attainer:{j0}:{j1}")
            }
        };
        let beta = self.beta.map(num).unwrap_or_else(|| "".into());
        format!(
            "a,b,c,d,sup_f,tail_sum_a,tail_sum_c,beta,screen\n{},{},{},{},{},{},{},{},{}\n",
            num(self.limits.a),
            num(self.limits.b),
            num(self.limits.c),
            num(self.limits.d),
            num(self.sup_f),
            num(self.tail_sum_a),
            num(self.tail_sum_c),
            beta,
            screen
        )
    }
}

/// `pressure`: one row per requested temperature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureReport {
    pub rows: Vec<PressureSolution>,
}

impl CsvReport for PressureReport {
    // columns: t,p,epsilon,iterations,residual
    fn to_csv(&self) -> String {
        let mut out = String::from("t,p,epsilon,iterations,residual\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                num(r.t),
                num(r.p),
                num(r.epsilon),
                r.iterations,
                num(r.residual)
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenRow {
    pub q: u32,
    pub log_alpha: f64,
    pub log_beta: f64,
    pub residual_zeros: f64,
    pub residual_ones: f64,
}

/// `eigen`: eigenfunction values on run classes with the per-class
/// recurrence residuals certifying them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub t: f64,
    pub p: f64,
    pub epsilon: f64,
    pub log_beta_inf: f64,
    pub max_residual: f64,
    pub rows: Vec<EigenRow>,
}

impl CsvReport for EigenReport {
    // columns: q,log_alpha,log_beta,residual_zeros,residual_ones
    fn to_csv(&self) -> String {
        let mut out = String::from("q,log_alpha,log_beta,residual_zeros,residual_ones\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.q,
                num(r.log_alpha),
                num(r.log_beta),
                num(r.residual_zeros),
                num(r.residual_ones)
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsRow {
    pub word: String,
    pub log_mu: f64,
    pub mu: f64,
}

/// `gibbs`: cylinder table at one temperature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GibbsReport {
    pub t: f64,
    pub p: f64,
    pub log_s0: f64,
    pub log_s1: f64,
    pub deficit_events: u64,
    pub rows: Vec<GibbsRow>,
}

impl CsvReport for GibbsReport {
    // columns: word,log_mu,mu
    fn to_csv(&self) -> String {
        let mut out = String::from("word,log_mu,mu\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.word, num(r.log_mu), num(r.mu)));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubactionRow {
    /// "0inf", "1inf", "0q1", or "1q0"
    pub class: String,
    pub q: u32,
    pub v: f64,
}

/// `zero-temp`: the maximizing constant with its provenance, the second
/// route when applicable, the subaction table, and its calibration check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroTempReport {
    pub beta: f64,
    pub screen: MaxHypothesis,
    pub a: f64,
    pub a_case: ACase,
    pub nonpositive_a: Option<f64>,
    pub route_gap: Option<f64>,
    pub calibration_residual: f64,
    pub calibration_q_max: u32,
    pub rows: Vec<SubactionRow>,
}

impl CsvReport for ZeroTempReport {
    // columns: class,q,v
    fn to_csv(&self) -> String {
        let mut out = String::from("class,q,v\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.class, r.q, num(r.v)));
        }
        out
    }
}

impl CsvReport for SelectionReport {
    // columns: verdict,in_class,sum_a,sum_c,b_plus_d
    fn to_csv(&self) -> String {
        let verdict = match self.verdict {
            crate::zerotemp::SelectionVerdict::Delta0 => "delta0",
            crate::zerotemp::SelectionVerdict::Delta1 => "delta1",
            crate::zerotemp::SelectionVerdict::MixedOrUndetermined => "mixed-or-undetermined",
        };
        format!(
            "verdict,in_class,sum_a,sum_c,b_plus_d\n{},{},{},{},{}\n",
            verdict,
            self.in_class,
            num(self.sum_a),
            num(self.sum_c),
            num(self.b_plus_d)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    /// "epsilon", "s0", or the cylinder word
    pub target: String,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// per-temperature normalized values (t, y/t)
    pub per_point: Vec<(f64, f64)>,
}

/// `rates`: fitted log-slopes over the temperature grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatesReport {
    pub grid: Vec<f64>,
    pub rows: Vec<RateRow>,
}

impl CsvReport for RatesReport {
    // columns: target,slope,intercept,r2 (per-point detail is JSON-only)
    fn to_csv(&self) -> String {
        let mut out = String::from("target,slope,intercept,r2\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.target,
                num(r.slope),
                num(r.intercept),
                num(r.r2)
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub k: u32,
    pub log_lambda: f64,
    pub gap: f64,
}

/// `oracle`: depth-k eigenvalue sweep against the series pressure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub t: f64,
    pub p: f64,
    pub rows: Vec<OracleRow>,
}

impl CsvReport for OracleReport {
    // columns: k,log_lambda,gap
    fn to_csv(&self) -> String {
        let mut out = String::from("k,log_lambda,gap\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.k, num(r.log_lambda), num(r.gap)));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// `example1`: end-to-end reproduction checklist.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChecklistReport {
    pub all_passed: bool,
    pub rows: Vec<CheckRow>,
}

impl CsvReport for ChecklistReport {
    // columns: name,passed,detail
    fn to_csv(&self) -> String {
        let mut out = String::from("name,passed,detail\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.name, r.passed, r.detail));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trips() {
        let rep = PressureReport {
            rows: vec![PressureSolution {
                t: 1.0,
                p: 0.5,
                epsilon: 0.25,
                iterations: 42,
                residual: 1e-13,
            }],
        };
        let s = serde_json::to_string(&rep).unwrap();
        let back: PressureReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn csv_has_fixed_columns() {
        let rep = OracleReport {
            t: 1.0,
            p: 0.05,
            rows: vec![OracleRow { k: 4, log_lambda: 0.06, gap: 0.01 }],
        };
        let csv = rep.to_csv();
        assert!(csv.starts_with("k,log_lambda,gap\n"));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn float_formatting_round_trips() {
        let x = 0.053819217463177504_f64;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }
}
