//! Eigenfunction data of the weighted transfer operator at the solved
//! pressure. The eigenfunction `h` is constant on the level sets of the
//! potential, so it is determined by `h(0^inf) = 1`, the values `alpha_q`
//! on first-run-of-zeros classes, `beta_q` on first-run-of-ones classes,
//! and `beta_inf = h(1^inf)`.

use crate::error::{Error, Result};
use crate::numerics::{ln_expm1, log_sum_exp, pattern_series_eps, LogValue, Side};
use crate::potential::{PatternPoint, WaltersPotential, Word};
use crate::pressure::{pressure, PressureSolution, DEFAULT_TOL};

/// Number of `alpha_q`/`beta_q` values precomputed at construction; larger
/// indices are evaluated on demand through the same series path.
pub const DEFAULT_Q_MAX: u32 = 64;

/// Eigenfunction values at one inverse temperature. Immutable after
/// construction.
#[derive(Clone, Debug)]
pub struct EigenValues {
    pot: WaltersPotential,
    t: f64,
    eps: f64,
    p: f64,
    q_max: u32,
    log_alpha: Vec<f64>,
    log_beta: Vec<f64>,
    log_beta_inf: f64,
    /// `ln(e^P - e^{t a})`
    lea: f64,
    /// `ln(e^P - e^{t c})`
    lec: f64,
}

/// Build the eigenfunction table with default depth and tolerance.
pub fn h_values(f: &WaltersPotential, t: f64) -> Result<EigenValues> {
    h_values_with(f, t, DEFAULT_Q_MAX, DEFAULT_TOL)
}

pub fn h_values_with(
    f: &WaltersPotential,
    t: f64,
    q_max: u32,
    tol: f64,
) -> Result<EigenValues> {
    let sol = pressure(f, t, tol)?;
    h_values_at(f, &sol, q_max)
}

/// Build from an already-solved pressure, reusing its exact gap.
pub fn h_values_at(
    f: &WaltersPotential,
    sol: &PressureSolution,
    q_max: u32,
) -> Result<EigenValues> {
    if q_max == 0 {
        return Err(Error::Domain("q_max must be at least 1".into()));
    }
    let t = sol.t;
    let eps = sol.epsilon;
    let pivot = f.pivot();
    let p = t * pivot + eps;
    // e^P - e^{t s} = e^{t s} (e^{P - t s} - 1) with P - t s = t (pivot - s) + eps > 0
    let lea = t * f.a_limit() + ln_expm1(t * (pivot - f.a_limit()) + eps);
    let lec = t * f.c_limit() + ln_expm1(t * (pivot - f.c_limit()) + eps);
    let tb = t * f.b_limit();
    let td = t * f.d_limit();

    let log_d1 = pattern_series_eps(f, Side::D, 1, t, eps, false)?.log_value.0;
    let log_beta_inf = tb + lea - (td + lec + p) + log_d1;
    let ca = lea - td - p;
    let cb = log_beta_inf + lec - tb - p;

    let mut log_alpha = Vec::with_capacity(q_max as usize);
    let mut log_beta = Vec::with_capacity(q_max as usize);
    for q in 1..=q_max {
        let dq = pattern_series_eps(f, Side::D, q, t, eps, false)?.log_value.0;
        let bq = pattern_series_eps(f, Side::B, q, t, eps, false)?.log_value.0;
        log_alpha.push(ca + dq);
        log_beta.push(cb + bq);
    }
    Ok(EigenValues {
        pot: f.clone(),
        t,
        eps,
        p,
        q_max,
        log_alpha,
        log_beta,
        log_beta_inf,
        lea,
        lec,
    })
}

impl EigenValues {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn epsilon(&self) -> f64 {
        self.eps
    }

    pub fn q_max(&self) -> u32 {
        self.q_max
    }

    pub fn potential(&self) -> &WaltersPotential {
        &self.pot
    }

    /// `ln h` on the class `0^q 1 ...`, `q >= 1`.
    pub fn log_alpha(&self, q: u32) -> Result<f64> {
        if q == 0 {
            return Err(Error::Domain("alpha index must be at least 1".into()));
        }
        if q <= self.q_max {
            return Ok(self.log_alpha[(q - 1) as usize]);
        }
        let dq = pattern_series_eps(&self.pot, Side::D, q, self.t, self.eps, false)?
            .log_value
            .0;
        Ok(self.lea - self.t * self.pot.d_limit() - self.p + dq)
    }

    /// `ln h` on the class `1^q 0 ...`, `q >= 1`.
    pub fn log_beta(&self, q: u32) -> Result<f64> {
        if q == 0 {
            return Err(Error::Domain("beta index must be at least 1".into()));
        }
        if q <= self.q_max {
            return Ok(self.log_beta[(q - 1) as usize]);
        }
        let bq = pattern_series_eps(&self.pot, Side::B, q, self.t, self.eps, false)?
            .log_value
            .0;
        Ok(self.log_beta_inf + self.lec - self.t * self.pot.b_limit() - self.p + bq)
    }

    /// `ln h(1^inf)`.
    pub fn log_beta_inf(&self) -> f64 {
        self.log_beta_inf
    }

    /// `ln h` on the cylinder `[w]` when `w` pins the first run (its first
    /// run is followed by the opposite symbol); `None` on pure runs.
    pub fn h_on_word(&self, w: &Word) -> Result<Option<LogValue>> {
        let runs = w.runs();
        if runs.len() < 2 {
            return Ok(None);
        }
        let (sym, p) = runs[0];
        let v = if sym == 0 { self.log_alpha(p)? } else { self.log_beta(p)? };
        Ok(Some(LogValue(v)))
    }

    /// Relative residual of the eigenvalue identity
    /// `e^{t f(0x)} h(0x) + e^{t f(1x)} h(1x) = e^P h(x)` at a point of the
    /// given class. Run lengths of 1 are accepted for `ZeroRun`/`OneRun`
    /// since only `h` values and neighbor sequence entries enter.
    pub fn residual(&self, point: PatternPoint) -> Result<f64> {
        enum Cls {
            AllZeros,
            AllOnes,
            /// `0^q 1 ...`
            Zeros(u32),
            /// `1^q 0 ...`
            Ones(u32),
        }
        // Classes starting 01 or 10 have a first run of length 1; their
        // identity coincides with the q = 1 run class.
        let cls = match point {
            PatternPoint::ZeroInf => Cls::AllZeros,
            PatternPoint::OneInf => Cls::AllOnes,
            PatternPoint::ZeroRun(q) => Cls::Zeros(q),
            PatternPoint::OneRun(q) => Cls::Ones(q),
            PatternPoint::ZeroOneRun(_) | PatternPoint::ZeroOneInf => Cls::Zeros(1),
            PatternPoint::OneZeroRun(_) | PatternPoint::OneZeroInf => Cls::Ones(1),
        };
        let t = self.t;
        let f = &self.pot;
        let (lhs, rhs) = match cls {
            Cls::AllZeros => {
                // x = 0^inf: 0x = 0^inf, 1x = 1 0^inf
                let lhs = log_sum_exp([
                    t * f.a_limit(),
                    t * f.d_limit() + self.log_beta(1)?,
                ]);
                (lhs, self.p)
            }
            Cls::AllOnes => {
                // x = 1^inf: 0x = 0 1^inf, 1x = 1^inf
                let lhs = log_sum_exp([
                    t * f.b_limit() + self.log_alpha(1)?,
                    t * f.c_limit() + self.log_beta_inf,
                ]);
                (lhs, self.p + self.log_beta_inf)
            }
            Cls::Zeros(q) => {
                if q == 0 {
                    return Err(Error::Domain("run length must be at least 1".into()));
                }
                // x = 0^q 1 z: 0x = 0^{q+1} 1 z, 1x = 1 0^q 1 z
                let lhs = log_sum_exp([
                    t * f.a_seq().value_at(q + 1) + self.log_alpha(q + 1)?,
                    t * f.d_seq().value_at(q) + self.log_beta(1)?,
                ]);
                (lhs, self.p + self.log_alpha(q)?)
            }
            Cls::Ones(q) => {
                if q == 0 {
                    return Err(Error::Domain("run length must be at least 1".into()));
                }
                // x = 1^q 0 z: 0x = 0 1^q 0 z, 1x = 1^{q+1} 0 z
                let lhs = log_sum_exp([
                    t * f.b_seq().value_at(q) + self.log_alpha(1)?,
                    t * f.c_seq().value_at(q + 1) + self.log_beta(q + 1)?,
                ]);
                (lhs, self.p + self.log_beta(q)?)
            }
        };
        Ok((lhs - rhs).exp_m1().abs())
    }

    /// Largest residual over the four limit classes and all run classes up
    /// to `q_cap`.
    pub fn max_residual(&self, q_cap: u32) -> Result<f64> {
        let mut worst = self
            .residual(PatternPoint::ZeroInf)?
            .max(self.residual(PatternPoint::OneInf)?);
        for q in 1..=q_cap {
            worst = worst
                .max(self.residual(PatternPoint::ZeroRun(q))?)
                .max(self.residual(PatternPoint::OneRun(q))?);
        }
        Ok(worst)
    }
}

/// One-shot residual check without keeping the table.
pub fn eigen_residual(f: &WaltersPotential, t: f64, point: PatternPoint) -> Result<f64> {
    h_values(f, t)?.residual(point)
}
