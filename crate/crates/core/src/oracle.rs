//! Independent cross-check by finite-memory approximation: a depth-k Markov
//! model on 2^k window states whose dominant eigenvalue approximates e^P and
//! whose stationary measure approximates the Gibbs cylinder weights. Kept
//! deliberately separate from the series-based solvers: no code from the
//! pressure or gibbs modules is used here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{log_add, log_sum_exp};
use crate::potential::{WaltersPotential, Word};

const MAX_K: u32 = 16;
/// Eigenvalue runs may stop once the growth-ratio bracket is this tight;
/// the bracket always contains log lambda.
const WIDTH_TOL: f64 = 1e-12;
/// Stop the eigenvector runs when the spread of per-component growth
/// ratios, which bounds the eigenvalue bracket width, falls below this.
const VECTOR_TOL: f64 = 5e-13;
/// The bracket's upper edge decreases monotonically to log lambda; once its
/// total decrease over a FLAT_RUN window drops below FLAT_RUN * FLAT_TOL the
/// remaining drift is below FLAT_TOL over the spectral gap, and the bracket
/// width independently bounds the error in the tiny-gap regime.
const FLAT_TOL: f64 = 1e-14;
const FLAT_RUN: u64 = 64;
/// An eigenvalue run that exhausts its budget still returns when the bracket
/// certifies this many digits; the width records the honest error bound.
const CAPPED_WIDTH_TOL: f64 = 1e-6;
const MIN_ITERS: u64 = 16;
const MAX_ITERS: u64 = 200_000;

/// How a (k+1)-window is completed to an infinite sequence when evaluating
/// the potential on it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionMode {
    /// Continue the last run forever.
    #[default]
    RunTail,
    /// Repeat the whole window periodically.
    Periodic,
}

/// Depth-k transfer model: states are k-windows, transitions append one
/// symbol, and each transition (u, y) carries log-weight t * f(u y ...).
pub struct DepthKModel {
    k: u32,
    t: f64,
    /// Indexed by (u << 1) | y.
    log_weights: Vec<f64>,
}

fn window_bits(value: u64, len: u32) -> Vec<u8> {
    (0..len).rev().map(|i| ((value >> i) & 1) as u8).collect()
}

/// Potential value on the window under the chosen completion.
fn window_value(f: &WaltersPotential, bits: &[u8], mode: ExtensionMode) -> f64 {
    let w = Word::from_bits(bits);
    match mode {
        ExtensionMode::RunTail => {
            if let Some(v) = f.f_on_word(&w) {
                return v;
            }
            // one run: constant completion; two runs with a length-1 first
            // run: the second run already continues forever
            let (sym, _) = w.first_run();
            match (sym, w.runs().len()) {
                (0, 1) => f.a_limit(),
                (1, 1) => f.c_limit(),
                (0, _) => f.b_limit(),
                _ => f.d_limit(),
            }
        }
        ExtensionMode::Periodic => {
            if w.runs().len() == 1 {
                let (sym, _) = w.first_run();
                return if sym == 0 { f.a_limit() } else { f.c_limit() };
            }
            // three copies always expose the first two runs of the periodic
            // completion of a non-constant window
            let tripled: Vec<u8> = bits.iter().chain(bits).chain(bits).copied().collect();
            f.f_on_word(&Word::from_bits(&tripled))
                .expect("non-constant window repeated three times has two runs")
        }
    }
}

struct IterationOutcome {
    log_vec: Vec<f64>,
    estimate: f64,
    width: f64,
    iterations: u64,
}

impl DepthKModel {
    pub fn new(f: &WaltersPotential, t: f64, k: u32) -> Result<DepthKModel> {
        DepthKModel::with_mode(f, t, k, ExtensionMode::RunTail)
    }

    pub fn with_mode(
        f: &WaltersPotential,
        t: f64,
        k: u32,
        mode: ExtensionMode,
    ) -> Result<DepthKModel> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("temperature parameter t = {t} must be positive")));
        }
        if !(2..=MAX_K).contains(&k) {
            return Err(Error::Domain(format!("depth k = {k} must lie in 2..={MAX_K}")));
        }
        let n: usize = 1 << k;
        let mut log_weights = vec![0.0; 2 * n];
        for u in 0..n as u64 {
            for y in 0..2u64 {
                let bits = window_bits((u << 1) | y, k + 1);
                log_weights[((u << 1) | y) as usize] = t * window_value(f, &bits, mode);
            }
        }
        Ok(DepthKModel { k, t, log_weights })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    fn states(&self) -> usize {
        1 << self.k
    }

    /// dst[u] = log sum_y exp(lw(u,y) + src[((u<<1)|y) & mask])
    fn apply_right(&self, src: &[f64], dst: &mut [f64]) {
        let mask = self.states() - 1;
        for u in 0..self.states() {
            let s0 = (u << 1) & mask;
            let s1 = s0 | 1;
            dst[u] = log_add(
                self.log_weights[u << 1] + src[s0],
                self.log_weights[(u << 1) | 1] + src[s1],
            );
        }
    }

    /// dst[v] = log sum over the two predecessors u with ((u<<1)|y)&mask = v;
    /// their weight indices collapse to v and v + 2^k.
    fn apply_left(&self, src: &[f64], dst: &mut [f64]) {
        let n = self.states();
        let high = n >> 1;
        for v in 0..n {
            let u0 = v >> 1;
            let u1 = u0 | high;
            dst[v] = log_add(
                src[u0] + self.log_weights[v],
                src[u1] + self.log_weights[v + n],
            );
        }
    }

    /// Power iteration in log scale. The estimate is the midpoint of the
    /// per-component growth-ratio bracket; `need_vector` switches the stop
    /// rule from estimate stabilization to bracket-width convergence.
    fn power_iterate(&self, transpose: bool, need_vector: bool) -> Result<IterationOutcome> {
        let n = self.states();
        let mut v = vec![0.0; n];
        let mut nv = vec![0.0; n];
        let mut window_rmax = f64::INFINITY;
        let mut iterations: u64 = 0;
        loop {
            iterations += 1;
            if transpose {
                self.apply_left(&v, &mut nv);
            } else {
                self.apply_right(&v, &mut nv);
            }
            let mut rmin = f64::INFINITY;
            let mut rmax = f64::NEG_INFINITY;
            for u in 0..n {
                let r = nv[u] - v[u];
                rmin = rmin.min(r);
                rmax = rmax.max(r);
            }
            let width = rmax - rmin;
            for u in 0..n {
                v[u] = nv[u] - rmax;
            }
            // rmax is the estimate: the bracket's lower edge can crawl for a
            // long time behind slowly equilibrating components, while the
            // upper edge decreases monotonically to log lambda
            let mut done = if need_vector { width < VECTOR_TOL } else { width < WIDTH_TOL };
            if !need_vector && iterations % FLAT_RUN == 0 {
                done |= window_rmax - rmax < FLAT_TOL * FLAT_RUN as f64;
                window_rmax = rmax;
            }
            if iterations >= MAX_ITERS {
                done = !need_vector && width < CAPPED_WIDTH_TOL;
                if !done {
                    return Err(Error::NonConvergence { iterations, residual: width });
                }
            }
            if done && iterations >= MIN_ITERS {
                return Ok(IterationOutcome { log_vec: v, estimate: rmax, width, iterations });
            }
        }
    }

    /// Log of the dominant eigenvalue.
    pub fn log_lambda(&self) -> Result<f64> {
        Ok(self.power_iterate(false, false)?.estimate)
    }

    /// Eigenvalue estimate with its growth-ratio bracket width and the
    /// iteration count; log lambda lies in [estimate - width, estimate].
    pub fn eigenvalue_bracket(&self) -> Result<(f64, f64, u64)> {
        let out = self.power_iterate(false, false)?;
        Ok((out.estimate, out.width, out.iterations))
    }

    /// Stationary measure of the normalized model from the converged left
    /// and right eigenvectors.
    pub fn stationary(&self) -> Result<StationaryMeasure> {
        let right = self.power_iterate(false, true)?;
        let left = self.power_iterate(true, true)?;
        let mut log_pi: Vec<f64> = (0..self.states())
            .map(|u| left.log_vec[u] + right.log_vec[u])
            .collect();
        let z = log_sum_exp(log_pi.iter().copied());
        for p in &mut log_pi {
            *p -= z;
        }
        Ok(StationaryMeasure {
            k: self.k,
            log_pi,
            bracket_width: right.width.max(left.width),
            iterations: right.iterations + left.iterations,
        })
    }
}

/// Stationary window distribution of a depth-k model.
pub struct StationaryMeasure {
    k: u32,
    /// log probabilities, normalized
    log_pi: Vec<f64>,
    pub bracket_width: f64,
    pub iterations: u64,
}

impl StationaryMeasure {
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Log probability of the cylinder [w], |w| <= k: the states whose
    /// leading bits spell w form one contiguous block.
    pub fn log_cylinder(&self, w: &Word) -> Result<f64> {
        let m = w.len() as u32;
        if m > self.k {
            return Err(Error::Domain(format!(
                "word length {m} exceeds model depth {}",
                self.k
            )));
        }
        let mut prefix: usize = 0;
        for i in 0..w.len() {
            prefix = (prefix << 1) | w.bit(i) as usize;
        }
        let block = 1usize << (self.k - m);
        let start = prefix * block;
        Ok(log_sum_exp(self.log_pi[start..start + block].iter().copied()))
    }
}

/// Log of the dominant depth-k eigenvalue, the finite-memory pressure
/// approximation.
pub fn oracle_pressure(f: &WaltersPotential, t: f64, k: u32) -> Result<f64> {
    DepthKModel::new(f, t, k)?.log_lambda()
}

/// Stationary probability of cylinder [w] in the depth-k model.
pub fn oracle_cylinder(f: &WaltersPotential, t: f64, k: u32, w: &Word) -> Result<f64> {
    Ok(DepthKModel::new(f, t, k)?.stationary()?.log_cylinder(w)?.exp())
}
