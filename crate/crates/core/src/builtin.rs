//! Named built-in potentials used by the CLI and the test suite.

use crate::error::{Error, Result};
use crate::potential::{SequenceSpec, Tail, WaltersPotential};

fn seq(start_index: u32, prefix: Vec<f64>, tail: Tail) -> SequenceSpec {
    SequenceSpec::new(start_index, prefix, tail).expect("builtin sequence is valid")
}

/// The zero potential: every sequence and limit is 0.
pub fn zero() -> WaltersPotential {
    constant(0.0)
}

/// The constant potential `f = kappa`.
pub fn constant(kappa: f64) -> WaltersPotential {
    WaltersPotential::new(
        seq(2, vec![], Tail::Constant { limit: kappa }),
        seq(1, vec![], Tail::Constant { limit: kappa }),
        seq(2, vec![], Tail::Constant { limit: kappa }),
        seq(1, vec![], Tail::Constant { limit: kappa }),
    )
    .expect("constant potential is valid")
}

/// Worked instance with dyadic `a`/`b` tails and ratio-1/3 `c`/`d` tails:
/// `a_p = -4 * 2^-p`, `c_p = -9 * 3^-p`, `b_q = -2 + 4 * 2^-q` for `q >= 2`,
/// `d_q = -3/2 + (9/2) * 3^-q` for `q >= 2`, with the shared free value
/// `b_1 = d_1` passed in (it does not affect the zero-temperature constant).
/// Limits: `a = c = 0`, `b = -2`, `d = -3/2`.
pub fn example1(b1: f64) -> WaltersPotential {
    WaltersPotential::new(
        seq(2, vec![], Tail::Geometric { limit: 0.0, coeff: -4.0, ratio: 0.5 }),
        seq(1, vec![b1, -1.0], Tail::Geometric { limit: -2.0, coeff: 4.0, ratio: 0.5 }),
        // c_2 = -1 exactly; later values use the ratio-1/3 tail model
        seq(2, vec![-1.0], Tail::Geometric { limit: 0.0, coeff: -9.0, ratio: 1.0 / 3.0 }),
        seq(1, vec![b1, -1.0], Tail::Geometric { limit: -1.5, coeff: 4.5, ratio: 1.0 / 3.0 }),
    )
    .expect("example1 is valid")
}

/// Selection instance: `a_2 = -10`, `a_j = c_j = -2^(2-j)` otherwise,
/// `b = d = -1` constant. The `a`-sum is -11, strictly below
/// `b + d + sum(c) = -4`, so the low-temperature measures select `1^inf`.
pub fn thm2() -> WaltersPotential {
    WaltersPotential::new(
        seq(2, vec![-10.0], Tail::Geometric { limit: 0.0, coeff: -4.0, ratio: 0.5 }),
        seq(1, vec![], Tail::Constant { limit: -1.0 }),
        seq(2, vec![], Tail::Geometric { limit: 0.0, coeff: -4.0, ratio: 0.5 }),
        seq(1, vec![], Tail::Constant { limit: -1.0 }),
    )
    .expect("thm2 is valid")
}

/// `thm2` with the `a` and `c` sequences swapped; selects `0^inf`.
pub fn thm2_mirror() -> WaltersPotential {
    WaltersPotential::new(
        seq(2, vec![], Tail::Geometric { limit: 0.0, coeff: -4.0, ratio: 0.5 }),
        seq(1, vec![], Tail::Constant { limit: -1.0 }),
        seq(2, vec![-10.0], Tail::Geometric { limit: 0.0, coeff: -4.0, ratio: 0.5 }),
        seq(1, vec![], Tail::Constant { limit: -1.0 }),
    )
    .expect("thm2-mirror is valid")
}

/// Fully symmetric instance: `a_j = c_j = -2^(2-j)`, `b = d = -1`.
pub fn symmetric() -> WaltersPotential {
    WaltersPotential::new(
        seq(2, vec![], Tail::Geometric { limit: 0.0, coeff: -4.0, ratio: 0.5 }),
        seq(1, vec![], Tail::Constant { limit: -1.0 }),
        seq(2, vec![], Tail::Geometric { limit: 0.0, coeff: -4.0, ratio: 0.5 }),
        seq(1, vec![], Tail::Constant { limit: -1.0 }),
    )
    .expect("symmetric is valid")
}

/// Parse a builtin name: `zero`, `constant:<kappa>`, `example1`,
/// `example1:<b1>`, `thm2`, `thm2-mirror`, `symmetric`.
pub fn by_name(name: &str) -> Result<WaltersPotential> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    let parse_arg = |a: Option<&str>, what: &str| -> Result<Option<f64>> {
        match a {
            None => Ok(None),
            Some(s) => s
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::InvalidSpec(format!("invalid {what} value {s:?}"))),
        }
    };
    match head {
        "zero" => {
            if arg.is_some() {
                return Err(Error::InvalidSpec("zero takes no parameter".into()));
            }
            Ok(zero())
        }
        "constant" => {
            let kappa = parse_arg(arg, "constant")?
                .ok_or_else(|| Error::InvalidSpec("constant:<kappa> needs a value".into()))?;
            if !kappa.is_finite() {
                return Err(Error::InvalidSpec("constant value must be finite".into()));
            }
            Ok(constant(kappa))
        }
        "example1" => {
            let b1 = parse_arg(arg, "b1")?.unwrap_or(-1.0);
            if !b1.is_finite() {
                return Err(Error::InvalidSpec("b1 must be finite".into()));
            }
            Ok(example1(b1))
        }
        "thm2" => {
            if arg.is_some() {
                return Err(Error::InvalidSpec("thm2 takes no parameter".into()));
            }
            Ok(thm2())
        }
        "thm2-mirror" => {
            if arg.is_some() {
                return Err(Error::InvalidSpec("thm2-mirror takes no parameter".into()));
            }
            Ok(thm2_mirror())
        }
        "symmetric" => {
            if arg.is_some() {
                return Err(Error::InvalidSpec("symmetric takes no parameter".into()));
            }
            Ok(symmetric())
        }
        _ => Err(Error::InvalidSpec(format!(
            "unknown builtin {name:?}; available: zero, constant:<kappa>, example1[:<b1>], thm2, thm2-mirror, symmetric"
        ))),
    }
}
