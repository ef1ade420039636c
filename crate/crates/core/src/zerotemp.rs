//! Zero-temperature objects: the maximizing constant `A`, the calibrated
//! subaction `V`, the selection verdict for the limiting measure, and
//! numeric decay rates along temperature grids.
//!
//! All closed-form arithmetic runs in double-double precision so that
//! instances with exactly rational answers come out bitwise exact after the
//! final rounding.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::gibbs::top_cylinders;
use crate::numerics::Side;
use crate::potential::{PatternPoint, SequenceSpec, Tail, WaltersPotential, Word};
use crate::pressure::epsilon;

/// Residual tolerance for accepting a candidate constant.
const CANDIDATE_TOL: f64 = 1e-10;
/// Distinctness tolerance when deduplicating candidate values.
const DEDUPE_TOL: f64 = 1e-12;
/// Tolerance in the finite-attainment classification of a branch supremum.
const ATTAIN_TOL: f64 = 1e-12;
/// Decay tolerance for the branch-supremum enumeration horizon.
const SUP_TOL: f64 = 1e-15;
const SUP_CAP: u64 = 1_000_000;

/// The common sequence limit `beta = a = c`, the zero-temperature energy
/// density of the two fixed points. Errors when the limits differ.
pub fn beta_max(f: &WaltersPotential) -> Result<f64> {
    let a = f.a_limit();
    let c = f.c_limit();
    if a != c {
        return Err(Error::HypothesisViolation { a, c });
    }
    Ok(a)
}

/// How a branch supremum is attained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Attained {
    /// Maximum reached at a finite offset.
    Finite(u64),
    /// Approached only along the limit form.
    Limit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupBranch {
    pub value: f64,
    pub attained: Attained,
}

fn side_seqs(f: &WaltersPotential, side: Side) -> (&SequenceSpec, &SequenceSpec) {
    match side {
        Side::D => (f.d_seq(), f.a_seq()),
        Side::B => (f.b_seq(), f.c_seq()),
    }
}

fn sup_horizon(s_seq: &SequenceSpec, r_seq: &SequenceSpec, q: u32) -> u64 {
    let base = s_seq.prefix_end().max(r_seq.prefix_end()).saturating_sub(q) as u64;
    let horizon = |seq: &SequenceSpec| -> u64 {
        match seq.tail {
            Tail::Constant { .. } => 0,
            Tail::Geometric { ratio, .. } => {
                (SUP_TOL.ln() / ratio.abs().ln()).ceil().max(0.0) as u64
            }
        }
    };
    (base + horizon(s_seq).max(horizon(r_seq))).min(SUP_CAP)
}

fn sup_branch_dd(f: &WaltersPotential, side: Side, q: u32) -> Result<(Dd, Attained)> {
    let beta = Dd::new(beta_max(f)?);
    let (s_seq, r_seq) = side_seqs(f, side);
    let j_max = sup_horizon(s_seq, r_seq, q);
    let mut run = Dd::ZERO; // sum of (r_{q+i} - beta), i = 1..j
    let mut best = s_seq.value_at_dd(q);
    let mut best_j: u64 = 0;
    for j in 1..=j_max {
        run = run.add(r_seq.value_at_dd(q + j as u32).sub(beta));
        let g = s_seq.value_at_dd(q + j as u32).add(run);
        if best.lt(g) {
            best = g;
            best_j = j;
        }
    }
    // limit form: s_lim + sum_{i >= 1} (r_{q+i} - beta)
    let limit = Dd::new(s_seq.limit()).add(r_seq.tail_sum_dd(q));
    if best.sub(limit).f64() >= -ATTAIN_TOL {
        Ok((best.max(limit), Attained::Finite(best_j)))
    } else {
        Ok((limit, Attained::Limit))
    }
}

/// Supremum of `s_{q+j} + sum_{i=1..j} (r_{q+i} - beta)` over `j >= 0`,
/// including its limit form, with the attainment classification.
pub fn sup_branch(f: &WaltersPotential, side: Side, q: u32) -> Result<SupBranch> {
    if q == 0 {
        return Err(Error::Domain("branch index q must be at least 1".into()));
    }
    let (v, attained) = sup_branch_dd(f, side, q)?;
    Ok(SupBranch { value: v.f64(), attained })
}

/// Outcome of the boundary-maximization screen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaxHypothesis {
    /// Only the two fixed points can carry a maximizing measure.
    Pass,
    /// The periodic orbit `(0^{j0+1} 1^{j1+1})^inf` matches the boundary
    /// value, so maximizing measures are not confined to the fixed points.
    PeriodicAttainer { j0: u64, j1: u64 },
}

/// Screen whether any maximizing measure can live away from the two fixed
/// points: fails exactly when both branch suprema are attained at finite
/// offsets and their sum reaches `2 beta`.
pub fn check_max_hypothesis(f: &WaltersPotential) -> Result<MaxHypothesis> {
    let beta = beta_max(f)?;
    let (vd, ad) = sup_branch_dd(f, Side::D, 1)?;
    let (vb, ab) = sup_branch_dd(f, Side::B, 1)?;
    let two_beta = Dd::new(beta).add_f(beta);
    let total = vd.add(vb).sub(two_beta).f64();
    if total >= -ATTAIN_TOL {
        if let (Attained::Finite(j0), Attained::Finite(j1)) = (ad, ab) {
            return Ok(MaxHypothesis::PeriodicAttainer { j0, j1 });
        }
    }
    Ok(MaxHypothesis::Pass)
}

/// Which candidate produced the maximizing constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ACase {
    Zero,
    A1,
    A2,
    A3,
}

/// The constant `A = lim (P(t f) - t beta)`, located by screening the four
/// closed-form candidates against the fixed-point equation
/// `max(sup_D, d + T_a - y) + max(sup_B, b + T_c - y) = 2 beta`.
/// Requires the screen to pass.
pub fn compute_a(f: &WaltersPotential) -> Result<(f64, ACase)> {
    let beta = Dd::new(beta_max(f)?);
    if let MaxHypothesis::PeriodicAttainer { j0, j1 } = check_max_hypothesis(f)? {
        return Err(Error::PeriodicAttainer { j0, j1 });
    }
    let (sup_d, _) = sup_branch_dd(f, Side::D, 1)?;
    let (sup_b, _) = sup_branch_dd(f, Side::B, 1)?;
    let t_a = f.a_seq().tail_sum_dd(1);
    let t_c = f.c_seq().tail_sum_dd(1);
    let b = Dd::new(f.b_limit());
    let d = Dd::new(f.d_limit());
    let two_beta = beta.add(beta);

    let candidates = [
        (ACase::Zero, Dd::ZERO),
        (ACase::A1, d.add(b).add(t_a).add(t_c).half().sub(beta)),
        (ACase::A2, b.add(t_c).add(sup_d).sub(two_beta)),
        (ACase::A3, d.add(t_a).add(sup_b).sub(two_beta)),
    ];
    let rhs = |y: Dd| -> Dd {
        let left = sup_d.max(d.add(t_a).sub(y));
        let right = sup_b.max(b.add(t_c).sub(y));
        left.add(right)
    };
    let mut accepted: Vec<(ACase, Dd)> = Vec::new();
    for (case, y) in candidates {
        if y.f64() > CANDIDATE_TOL {
            continue;
        }
        let resid = rhs(y).sub(two_beta).abs().f64();
        if resid <= CANDIDATE_TOL {
            accepted.push((case, y));
        }
    }
    if accepted.is_empty() {
        return Err(Error::NoCandidate);
    }
    let (first_case, first) = accepted[0];
    let mut distinct: Vec<f64> = vec![first.f64()];
    for (_, y) in &accepted[1..] {
        if y.sub(first).abs().f64() > DEDUPE_TOL {
            distinct.push(y.f64());
        }
    }
    if distinct.len() > 1 {
        return Err(Error::MultipleCandidates(distinct));
    }
    Ok((first.f64(), first_case))
}

struct NonPositiveView {
    b: f64,
    d: f64,
    sum_a: Dd,
    sum_c: Dd,
}

fn nonpositive_view(f: &WaltersPotential) -> Result<NonPositiveView> {
    if f.a_limit() != 0.0 || f.c_limit() != 0.0 {
        return Err(Error::NotNonPositive(format!(
            "limits a = {}, c = {} must both be 0",
            f.a_limit(),
            f.c_limit()
        )));
    }
    let constant_negative = |seq: &SequenceSpec, name: &str| -> Result<f64> {
        let lim = seq.limit();
        if !(lim < 0.0) {
            return Err(Error::NotNonPositive(format!("{name} must be a negative constant")));
        }
        let tail_constant = match seq.tail {
            Tail::Constant { .. } => true,
            Tail::Geometric { coeff, .. } => coeff == 0.0,
        };
        if !tail_constant || seq.prefix.iter().any(|&v| v != lim) {
            return Err(Error::NotNonPositive(format!("sequence {name} must be constant")));
        }
        Ok(lim)
    };
    let strictly_negative = |seq: &SequenceSpec, name: &str| -> Result<()> {
        if seq.prefix.iter().any(|&v| !(v < 0.0)) {
            return Err(Error::NotNonPositive(format!(
                "sequence {name} must be strictly negative"
            )));
        }
        match seq.tail {
            Tail::Constant { .. } => Err(Error::NotNonPositive(format!(
                "sequence {name} must stay strictly negative while vanishing"
            ))),
            Tail::Geometric { coeff, ratio, .. } => {
                if coeff < 0.0 && ratio > 0.0 {
                    Ok(())
                } else {
                    Err(Error::NotNonPositive(format!(
                        "sequence {name} tail must keep a fixed negative sign"
                    )))
                }
            }
        }
    };
    let b = constant_negative(f.b_seq(), "b")?;
    let d = constant_negative(f.d_seq(), "d")?;
    strictly_negative(f.a_seq(), "a")?;
    strictly_negative(f.c_seq(), "c")?;
    Ok(NonPositiveView {
        b,
        d,
        sum_a: f.a_seq().tail_sum_dd(1),
        sum_c: f.c_seq().tail_sum_dd(1),
    })
}

/// Direct piecewise formula for the maximizing constant on the non-positive
/// class (`a = c = 0`, `b`, `d` constant negative, all `a_n`, `c_n` < 0):
///
/// * if `sum(a) <= b + d + sum(c)`: `A = b + d + sum(c)`
/// * else if `sum(c) <= b + d + sum(a)`: `A = b + d + sum(a)`
/// * else `A = (b + d)/2 + sum(a)/2 + sum(c)/2`
///
/// Kept independent of the candidate screening as a second route.
pub fn nonpositive_a(f: &WaltersPotential) -> Result<f64> {
    let v = nonpositive_view(f)?;
    let bd = Dd::new(v.b).add_f(v.d);
    let via_c = bd.add(v.sum_c);
    let via_a = bd.add(v.sum_a);
    if v.sum_a.le(via_c) {
        Ok(via_c.f64())
    } else if v.sum_c.le(via_a) {
        Ok(via_a.f64())
    } else {
        Ok(bd.add(v.sum_a).add(v.sum_c).half().f64())
    }
}

/// Calibrated subaction evaluator for a fixed constant `A`. The subaction
/// is constant on first-run classes, normalized by `V(0^inf) = 0`.
pub struct Subaction {
    f: WaltersPotential,
    beta: f64,
    a_const: Dd,
}

impl Subaction {
    pub fn new(f: &WaltersPotential, a_const: f64) -> Result<Subaction> {
        let beta = beta_max(f)?;
        Ok(Subaction { f: f.clone(), beta, a_const: Dd::new(a_const) })
    }

    fn m_d(&self, q: u32) -> Dd {
        let (sup, _) = sup_branch_dd(&self.f, Side::D, q).expect("limits validated at build");
        let alt = Dd::new(self.f.d_limit())
            .add(self.f.a_seq().tail_sum_dd(q))
            .sub(self.a_const);
        sup.max(alt)
    }

    fn m_b(&self, q: u32) -> Dd {
        let (sup, _) = sup_branch_dd(&self.f, Side::B, q).expect("limits validated at build");
        let alt = Dd::new(self.f.b_limit())
            .add(self.f.c_seq().tail_sum_dd(q))
            .sub(self.a_const);
        sup.max(alt)
    }

    /// `V` on the class of the given pattern point. First-run classes with
    /// run length 1 are accepted for `ZeroRun`/`OneRun`.
    pub fn value(&self, point: PatternPoint) -> f64 {
        match point {
            PatternPoint::ZeroInf => 0.0,
            PatternPoint::OneInf => {
                // b - d - beta + M_D(1)
                Dd::new(self.f.b_limit())
                    .add_f(-self.f.d_limit())
                    .add_f(-self.beta)
                    .add(self.m_d(1))
                    .f64()
            }
            PatternPoint::ZeroRun(q) => {
                assert!(q >= 1, "run length must be at least 1");
                // A - d + M_D(q)
                self.a_const
                    .add_f(-self.f.d_limit())
                    .add(self.m_d(q))
                    .f64()
            }
            PatternPoint::OneRun(q) => {
                assert!(q >= 1, "run length must be at least 1");
                // -d - beta + A + M_D(1) + M_B(q)
                Dd::new(-self.f.d_limit())
                    .add_f(-self.beta)
                    .add(self.a_const)
                    .add(self.m_d(1))
                    .add(self.m_b(q))
                    .f64()
            }
            PatternPoint::ZeroOneRun(_) | PatternPoint::ZeroOneInf => {
                self.value(PatternPoint::ZeroRun(1))
            }
            PatternPoint::OneZeroRun(_) | PatternPoint::OneZeroInf => {
                self.value(PatternPoint::OneRun(1))
            }
        }
    }
}

/// One-shot subaction value.
pub fn subaction(f: &WaltersPotential, a_const: f64, point: PatternPoint) -> Result<f64> {
    Ok(Subaction::new(f, a_const)?.value(point))
}

/// Largest violation of the calibration identity
/// `V(y) = max_{xy} (f(xy) + V(xy)) - beta` over the four limit classes and
/// run classes up to `q_max`. `V` is supplied as a table so alternative
/// candidates can be checked.
pub fn calibration_residual(
    f: &WaltersPotential,
    v: &dyn Fn(PatternPoint) -> f64,
    q_max: u32,
) -> Result<f64> {
    let beta = beta_max(f)?;
    let resid = |lhs: f64, branch0: f64, branch1: f64| -> f64 {
        (lhs - (branch0.max(branch1) - beta)).abs()
    };
    // y = 0^inf: preimages 0^inf and 1 0^inf
    let mut worst = resid(
        v(PatternPoint::ZeroInf),
        f.a_limit() + v(PatternPoint::ZeroInf),
        f.d_limit() + v(PatternPoint::OneZeroInf),
    );
    // y = 1^inf: preimages 0 1^inf and 1^inf
    worst = worst.max(resid(
        v(PatternPoint::OneInf),
        f.b_limit() + v(PatternPoint::ZeroOneInf),
        f.c_limit() + v(PatternPoint::OneInf),
    ));
    for q in 1..=q_max {
        // y = 0^q 1 ...: preimages 0^{q+1} 1 ... and 1 0^q 1 ...
        worst = worst.max(resid(
            v(PatternPoint::ZeroRun(q)),
            f.a_seq().value_at(q + 1) + v(PatternPoint::ZeroRun(q + 1)),
            f.d_seq().value_at(q) + v(PatternPoint::OneZeroRun(q)),
        ));
        // y = 1^q 0 ...: preimages 0 1^q 0 ... and 1^{q+1} 0 ...
        worst = worst.max(resid(
            v(PatternPoint::OneRun(q)),
            f.b_seq().value_at(q) + v(PatternPoint::ZeroOneRun(q)),
            f.c_seq().value_at(q + 1) + v(PatternPoint::OneRun(q + 1)),
        ));
    }
    Ok(worst)
}

/// Which limiting measure the low-temperature family selects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionVerdict {
    /// Concentrates on `0^inf`.
    Delta0,
    /// Concentrates on `1^inf`.
    Delta1,
    MixedOrUndetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub verdict: SelectionVerdict,
    pub in_class: bool,
    /// `sum_{n >= 2} a_n`
    pub sum_a: f64,
    /// `sum_{n >= 2} c_n`
    pub sum_c: f64,
    /// `b + d` (constant values when in class, limits otherwise)
    pub b_plus_d: f64,
}

/// Decide measure selection on the non-positive class: the side with the
/// strictly smaller total `sum(a)` vs `b + d + sum(c)` loses its fixed
/// point. Outside the class, or at equality, the verdict stays open.
pub fn select_measure(f: &WaltersPotential) -> Result<SelectionReport> {
    let sum_a = f.a_seq().tail_sum_dd(1);
    let sum_c = f.c_seq().tail_sum_dd(1);
    let b_plus_d = f.b_limit() + f.d_limit();
    let in_class = nonpositive_view(f).is_ok();
    let verdict = if in_class {
        let bd = Dd::new(f.b_limit()).add_f(f.d_limit());
        if sum_a.lt(bd.add(sum_c)) {
            SelectionVerdict::Delta1
        } else if sum_c.lt(bd.add(sum_a)) {
            SelectionVerdict::Delta0
        } else {
            SelectionVerdict::MixedOrUndetermined
        }
    } else {
        SelectionVerdict::MixedOrUndetermined
    };
    Ok(SelectionReport {
        verdict,
        in_class,
        sum_a: sum_a.f64(),
        sum_c: sum_c.f64(),
        b_plus_d,
    })
}

/// Least-squares slope of `y` against `t`, with the goodness of fit and the
/// per-point normalized values `y/t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// `(t, y/t)` pairs, the finite-t estimates of the limit slope.
    pub per_point: Vec<(f64, f64)>,
}

/// Fit a line through `(t, y)` points. Needs at least 3 points with
/// strictly increasing `t`.
pub fn numeric_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    for w in points.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::DegenerateFit(format!(
                "temperatures must strictly increase, got {} then {}",
                w[0].0, w[1].0
            )));
        }
    }
    let n = points.len() as f64;
    let tbar = points.iter().map(|p| p.0).sum::<f64>() / n;
    let ybar = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - tbar).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - tbar) * (p.1 - ybar)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - ybar).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * tbar;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok(SlopeFit {
        slope,
        intercept,
        r2,
        per_point: points.iter().map(|p| (p.0, p.1 / p.0)).collect(),
    })
}

/// Slope fit of `ln eps_t` over a temperature grid; its slope estimates the
/// maximizing constant.
pub fn epsilon_rate(f: &WaltersPotential, grid: &[f64]) -> Result<SlopeFit> {
    let logs: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&t| epsilon(f, t).map(|e| (t, e.ln())))
        .collect::<Result<_>>()?;
    numeric_slope(&logs)
}

/// Slope fit of `ln mu_t([w])` over a temperature grid.
pub fn cylinder_rate(f: &WaltersPotential, w: &Word, grid: &[f64]) -> Result<SlopeFit> {
    let logs: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&t| {
            let table = top_cylinders(f, t)?;
            Ok((t, table.cylinder_measure(w)?.0))
        })
        .collect::<Result<_>>()?;
    numeric_slope(&logs)
}

/// Slope fit of `ln S_0` over a temperature grid.
pub fn s0_rate(f: &WaltersPotential, grid: &[f64]) -> Result<SlopeFit> {
    let logs: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&t| top_cylinders(f, t).map(|tb| (t, tb.log_s0())))
        .collect::<Result<_>>()?;
    numeric_slope(&logs)
}
