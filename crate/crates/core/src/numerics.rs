//! Log-scale numerics: stable elementary helpers, geometric closed forms,
//! and the two renewal series that drive everything else.
//!
//! All series are evaluated with exponents centered at `t * pivot` where
//! `pivot = max(a, c)`, so only the gap `eps = P - t * pivot` enters. Terms
//! up to a split point are summed exactly; beyond it both sequences are
//! within a configured tolerance of their limits and a constant-tail closed
//! form finishes the sum, with the neglected correction reported as a
//! relative `truncation_bound`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{SequenceSpec, Tail, WaltersPotential};

/// Natural logarithm of a non-negative quantity; `-inf` encodes zero.
/// Serialized as the raw number, with `-inf` mapped to JSON null.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogValue(pub f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);

    pub fn linear(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl From<f64> for LogValue {
    fn from(x: f64) -> LogValue {
        LogValue(x)
    }
}

impl std::fmt::Display for LogValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for LogValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::NEG_INFINITY {
            s.serialize_none()
        } else {
            s.serialize_some(&self.0)
        }
    }
}

impl<'de> Deserialize<'de> for LogValue {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<LogValue, D::Error> {
        let v = Option::<f64>::deserialize(d)?;
        Ok(LogValue(v.unwrap_or(f64::NEG_INFINITY)))
    }
}

/// `ln(1 - e^z)` for `z < 0`.
pub fn log1mexp(z: f64) -> f64 {
    debug_assert!(z < 0.0);
    if z < -std::f64::consts::LN_2 {
        (-z.exp()).ln_1p()
    } else {
        (-z.exp_m1()).ln()
    }
}

/// `ln(e^x - 1)` for `x > 0`.
pub fn ln_expm1(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x > 40.0 {
        // e^x - 1 = e^x (1 - e^-x)
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

/// `ln(e^x + e^y)`.
pub fn log_add(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(e^x - e^y)` clamped at zero: returns the log difference and a linear
/// deficit. When `y <= x` the deficit is 0; otherwise the result is `-inf`
/// and the deficit is `e^y - e^x`, the amount by which the subtrahend
/// exceeded the minuend.
pub fn log_sub(x: f64, y: f64) -> (f64, f64) {
    if y == f64::NEG_INFINITY {
        return (x, 0.0);
    }
    if y <= x {
        if y == x {
            return (f64::NEG_INFINITY, 0.0);
        }
        (x + log1mexp(y - x), 0.0)
    } else {
        (f64::NEG_INFINITY, x.exp() * (y - x).exp_m1())
    }
}

/// `ln(sum e^{x_i})`; `-inf` for an empty stream.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = v.iter().map(|x| (x - m).exp()).sum();
    m + s.ln()
}

/// `ln(sum_{j >= 0} e^{j z})` for `z < 0`.
pub fn geometric_sum(z: f64) -> Result<f64> {
    if !(z < 0.0) {
        return Err(Error::Domain(format!("geometric sum needs z < 0, got {z}")));
    }
    Ok(-log1mexp(z))
}

/// `ln(sum_{j >= j1} (j + 1) e^{j z})` for `z < 0`.
pub fn weighted_geometric_sum(z: f64, j1: u64) -> Result<f64> {
    if !(z < 0.0) {
        return Err(Error::Domain(format!("weighted geometric sum needs z < 0, got {z}")));
    }
    let l = log1mexp(z);
    let j1f = j1 as f64;
    Ok(j1f * z - 2.0 * l + (j1f * l.exp()).ln_1p())
}

/// Which renewal series: `D` pairs the `d` sequence with `a` partial sums,
/// `B` pairs `b` with `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    D,
    B,
}

/// A series value in log scale plus a relative bound on the neglected
/// tail-model correction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub log_value: LogValue,
    pub truncation_bound: f64,
}

/// Relative size at which the tail model takes over from exact terms.
const SPLIT_TOL: f64 = 1e-15;
/// Hard cap on exactly-summed terms; beyond it the truncation bound grows.
const SPLIT_CAP: u64 = 2_000_000;

/// First index offset `j` beyond which both sequences sit within the split
/// tolerance of their limits, so a constant-tail model applies.
pub(crate) fn settle_index(s_seq: &SequenceSpec, r_seq: &SequenceSpec, q: u32, t: f64) -> u64 {
    split_point(s_seq, r_seq, q, t)
}

fn split_point(s_seq: &SequenceSpec, r_seq: &SequenceSpec, q: u32, t: f64) -> u64 {
    let base = s_seq
        .prefix_end()
        .max(r_seq.prefix_end())
        .saturating_sub(q) as u64;
    // smallest index n with t * sum_{m >= n} |s_m - limit| <= SPLIT_TOL
    let geo = |seq: &SequenceSpec| -> u64 {
        match seq.tail {
            Tail::Constant { .. } => 0,
            Tail::Geometric { coeff, ratio, .. } => {
                if coeff == 0.0 {
                    return 0;
                }
                let ra = ratio.abs();
                let need = SPLIT_TOL * (1.0 - ra) / (t * coeff.abs());
                if need >= 1.0 {
                    return 0;
                }
                let n = (need.ln() / ra.ln()).ceil();
                let n = if n.is_finite() && n > 0.0 { n as u64 } else { 0 };
                n.saturating_sub(q as u64)
            }
        }
    };
    base.max(geo(s_seq)).max(geo(r_seq)).min(SPLIT_CAP)
}

fn sides<'a>(f: &'a WaltersPotential, side: Side) -> (&'a SequenceSpec, &'a SequenceSpec) {
    match side {
        Side::D => (f.d_seq(), f.a_seq()),
        Side::B => (f.b_seq(), f.c_seq()),
    }
}

/// The renewal series at inverse temperature `t` and pressure `P`:
///
/// `sum_{j >= 0} (j + 1)^w  exp(t s_{q+j} + t (r_{q+1} + ... + r_{q+j}) - j P)`
///
/// with `(s, r) = (d, a)` on side `D` and `(b, c)` on side `B`, and `w = 1`
/// exactly when `weighted` is set. Requires `q >= 1` and `t > 0`. Fails with
/// `DivergentSeries` when `P <= t * max(a, c)`.
pub fn pattern_series(
    f: &WaltersPotential,
    side: Side,
    q: u32,
    t: f64,
    p: f64,
    weighted: bool,
) -> Result<SeriesValue> {
    let eps = p - t * f.pivot();
    pattern_series_eps(f, side, q, t, eps, weighted)
}

/// Same series, parameterized by the exact gap `eps = P - t * max(a, c)`.
/// Callers that solved for the pressure pass the solver's `eps` directly so
/// no precision is lost re-deriving it from a rounded `P`.
pub fn pattern_series_eps(
    f: &WaltersPotential,
    side: Side,
    q: u32,
    t: f64,
    eps: f64,
    weighted: bool,
) -> Result<SeriesValue> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("inverse temperature must be positive, got {t}")));
    }
    if q == 0 {
        return Err(Error::Domain("series index q must be at least 1".into()));
    }
    let pivot = f.pivot();
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::DivergentSeries { value: t * pivot + eps, bound: t * pivot });
    }
    let (s_seq, r_seq) = sides(f, side);
    let s_lim = s_seq.limit();
    let r_lim = r_seq.limit();

    let j_split = split_point(s_seq, r_seq, q, t);
    let mut terms: Vec<f64> = Vec::with_capacity(j_split as usize + 1);
    let mut rtil = 0.0f64; // sum of (r_{q+i} - pivot), Kahan-compensated
    let mut comp = 0.0f64;
    for j in 0..=j_split {
        if j >= 1 {
            let y = (r_seq.value_at(q + j as u32) - pivot) - comp;
            let s = rtil + y;
            comp = (s - rtil) - y;
            rtil = s;
        }
        let mut e = t * s_seq.value_at(q + j as u32) + t * rtil - (j as f64) * eps;
        if weighted {
            e += ((j + 1) as f64).ln();
        }
        terms.push(e);
    }
    let head = log_sum_exp(terms);

    // constant-tail model from j_split + 1 on
    let z = t * (r_lim - pivot) - eps;
    debug_assert!(z < 0.0);
    let c_log = t * s_lim + t * rtil - (j_split as f64) * t * (r_lim - pivot);
    let l = log1mexp(z);
    let j1 = (j_split + 1) as f64;
    let tail_log = if weighted {
        c_log + j1 * z - 2.0 * l + (j1 * l.exp()).ln_1p()
    } else {
        c_log + j1 * z - l
    };
    let total = log_add(head, tail_log);

    // exponent error of the tail model, turned into a relative bound
    let n1 = q + j_split as u32 + 1;
    let delta = t * (s_seq.tail_deviation(n1) + r_seq.tail_deviation_sum(n1));
    let rel = if delta > 700.0 {
        f64::MAX
    } else {
        delta.exp_m1() * (tail_log - total).exp()
    };
    Ok(SeriesValue { log_value: LogValue(total), truncation_bound: rel.max(0.0) })
}
