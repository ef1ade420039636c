//! Pressure solver: finds `P` with `D_1(P) * B_1(P) = e^{2P}`.
//!
//! The unknown is the gap `eps = P - t * max(a, c)` which stays positive but
//! shrinks exponentially in `t`, so the bisection runs in `u = ln(eps)`.
//! `G(eps) = ln D_1 + ln B_1 - 2 (t * pivot + eps)` is strictly decreasing
//! and has a guaranteed sign change on the constructed bracket.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{pattern_series_eps, Side};
use crate::potential::WaltersPotential;

/// Default residual tolerance on `G`.
pub const DEFAULT_TOL: f64 = 1e-12;

// Budget counts G evaluations; the halving descent alone can take ~1000
// steps when the gap sits near the 1e-300 floor.
const MAX_ITERS: u64 = 1500;
/// Below this gap the bracket search gives up: the pressure equation is
/// numerically indistinguishable from its divergence threshold.
const MIN_EPS: f64 = 1e-300;
/// Relative width of the `u = ln(eps)` interval at which bisection stops.
const U_WIDTH_TOL: f64 = 1e-15;

/// Solved pressure at one inverse temperature. `epsilon` carries the gap
/// `P - t * max(a, c)` at full precision; downstream series evaluations use
/// it directly instead of re-deriving it from the rounded `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureSolution {
    pub t: f64,
    pub p: f64,
    pub epsilon: f64,
    pub iterations: u64,
    pub residual: f64,
}

fn g_of_eps(f: &WaltersPotential, t: f64, eps: f64) -> Result<f64> {
    let d1 = pattern_series_eps(f, Side::D, 1, t, eps, false)?;
    let b1 = pattern_series_eps(f, Side::B, 1, t, eps, false)?;
    Ok(d1.log_value.0 + b1.log_value.0 - 2.0 * (t * f.pivot() + eps))
}

/// Solve the pressure equation at inverse temperature `t > 0`.
pub fn pressure(f: &WaltersPotential, t: f64, tol: f64) -> Result<PressureSolution> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("inverse temperature must be positive, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let pivot = f.pivot();
    let mut iterations: u64 = 0;

    // Lower bracket end: halve eta until G(eta) > 0.
    let mut eta = 1.0f64;
    let mut g_eta = g_of_eps(f, t, eta)?;
    iterations += 1;
    let halved = g_eta <= 0.0;
    while g_eta <= 0.0 {
        eta *= 0.5;
        if eta < MIN_EPS {
            return Err(Error::BracketFailure);
        }
        g_eta = g_of_eps(f, t, eta)?;
        iterations += 1;
    }
    // Upper bracket end: the previous halving step, or the coarse a-priori
    // bound eps <= t * (sup f - pivot) + ln 2 when G(1) was already positive.
    let hi = if halved {
        2.0 * eta
    } else {
        let cap = t * (f.sup_f() - pivot) + std::f64::consts::LN_2;
        if cap <= eta {
            return Err(Error::BracketFailure);
        }
        cap
    };
    if g_of_eps(f, t, hi)? > 0.0 {
        return Err(Error::BracketFailure);
    }
    iterations += 1;

    let mut ulo = eta.ln();
    let mut uhi = hi.ln();
    let mut best_eps = eta;
    let mut best_g = g_eta;
    loop {
        let um = 0.5 * (ulo + uhi);
        let em = um.exp();
        let gm = g_of_eps(f, t, em)?;
        iterations += 1;
        if gm.abs() < best_g.abs() {
            best_g = gm;
            best_eps = em;
        }
        if gm.abs() <= tol {
            return Ok(PressureSolution {
                t,
                p: t * pivot + em,
                epsilon: em,
                iterations,
                residual: gm.abs(),
            });
        }
        if gm > 0.0 {
            ulo = um;
        } else {
            uhi = um;
        }
        if uhi - ulo < U_WIDTH_TOL * uhi.abs().max(1.0) {
            // interval exhausted at f64 resolution; return the best point
            return Ok(PressureSolution {
                t,
                p: t * pivot + best_eps,
                epsilon: best_eps,
                iterations,
                residual: best_g.abs(),
            });
        }
        if iterations > MAX_ITERS {
            return Err(Error::NonConvergence { iterations, residual: gm.abs() });
        }
    }
}

/// The gap `eps_t = P(t f) - t * beta` for potentials with `a = c`.
pub fn epsilon(f: &WaltersPotential, t: f64) -> Result<f64> {
    let a = f.a_limit();
    let c = f.c_limit();
    if a != c {
        return Err(Error::HypothesisViolation { a, c });
    }
    Ok(pressure(f, t, DEFAULT_TOL)?.epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    fn rel(x: f64, y: f64) -> f64 {
        ((x - y) / y).abs()
    }

    #[test]
    fn zero_potential_gives_log_2() {
        for t in [0.5, 1.0, 10.0, 100.0] {
            let s = pressure(&builtin::zero(), t, DEFAULT_TOL).unwrap();
            assert!((s.p - 2.0f64.ln()).abs() < 1e-13, "t={t}");
            assert!((s.epsilon - 2.0f64.ln()).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_potential_shifts_log_2() {
        for t in [1.0, 10.0, 50.0] {
            let s = pressure(&builtin::constant(-0.3), t, DEFAULT_TOL).unwrap();
            assert!((s.p - (2.0f64.ln() - 0.3 * t)).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn example1_reference_gaps() {
        let f = builtin::example1(-1.0);
        let cases = [
            (0.5, 0.286933596725288338898560817599),
            (1.0, 0.0538192174631775037315769927273),
            (2.0, 0.00107921307638239336010878874046),
            (5.0, 2.52815037742194944857959725907e-8),
            (20.0, 3.97544974410265946555785386963e-31),
        ];
        for (t, want) in cases {
            let s = pressure(&f, t, DEFAULT_TOL).unwrap();
            assert!(rel(s.epsilon, want) < 1e-11, "t={t} got {} want {want}", s.epsilon);
        }
        // extreme inverse temperature: compare in log scale
        let s = pressure(&f, 80.0, DEFAULT_TOL).unwrap();
        assert!((s.epsilon.ln() - (-280.0)).abs() < 1e-9);
    }

    #[test]
    fn example1_other_b1() {
        let f = builtin::example1(-0.2);
        let s = pressure(&f, 1.0, DEFAULT_TOL).unwrap();
        assert!(rel(s.epsilon, 0.137930891647105657486354072547) < 1e-11);
        let s = pressure(&f, 5.0, DEFAULT_TOL).unwrap();
        assert!(rel(s.epsilon, 3.9726321300541266486152401809e-8) < 1e-11);
    }

    #[test]
    fn thm2_reference_gaps() {
        let f = builtin::thm2();
        let cases = [
            (1.0, 0.0211787637978509094638099898231),
            (5.0, 2.0612478833549363289422046726e-9),
            (10.0, 4.24835426404850019348150174824e-18),
            (20.0, 1.80485138784541517997977644688e-35),
            (40.0, 3.25748853220752126239150453895e-70),
        ];
        for (t, want) in cases {
            let s = pressure(&f, t, DEFAULT_TOL).unwrap();
            assert!(rel(s.epsilon, want) < 1e-11, "t={t} got {} want {want}", s.epsilon);
        }
    }

    #[test]
    fn symmetric_reference_gap() {
        let s = pressure(&builtin::symmetric(), 1.0, DEFAULT_TOL).unwrap();
        assert!(rel(s.epsilon, 0.0809760654003523630887382980779) < 1e-11);
    }

    #[test]
    fn residual_vanishes_at_solution() {
        let f = builtin::example1(-1.0);
        let s = pressure(&f, 1.0, DEFAULT_TOL).unwrap();
        assert!(s.residual <= DEFAULT_TOL);
        let g = g_of_eps(&f, 1.0, s.epsilon).unwrap();
        assert!(g.abs() <= DEFAULT_TOL);
    }

    #[test]
    fn constant_shift_identity() {
        let f = builtin::example1(-1.0);
        for kappa in [0.7, -0.4] {
            for t in [1.0, 10.0] {
                let base = pressure(&f, t, DEFAULT_TOL).unwrap();
                let shifted = pressure(&f.shifted(kappa), t, DEFAULT_TOL).unwrap();
                assert!(
                    (shifted.p - (base.p + kappa * t)).abs() < 1e-10,
                    "kappa={kappa} t={t}"
                );
            }
        }
    }

    #[test]
    fn epsilon_requires_equal_limits() {
        let f = builtin::example1(-1.0);
        assert!(epsilon(&f, 1.0).is_ok());
        let g = crate::potential::WaltersPotential::new(
            f.a_seq().clone(),
            f.b_seq().clone(),
            crate::potential::SequenceSpec::new(
                2,
                vec![],
                crate::potential::Tail::Constant { limit: 0.5 },
            )
            .unwrap(),
            f.d_seq().clone(),
        )
        .unwrap();
        assert!(matches!(epsilon(&g, 1.0), Err(Error::HypothesisViolation { .. })));
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = builtin::zero();
        assert!(pressure(&f, 0.0, DEFAULT_TOL).is_err());
        assert!(pressure(&f, -1.0, DEFAULT_TOL).is_err());
        assert!(pressure(&f, 1.0, 0.0).is_err());
    }
}
