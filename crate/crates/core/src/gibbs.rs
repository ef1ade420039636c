//! Gibbs cylinder measures at the solved pressure.
//!
//! The two normalization sums `S_0`, `S_1` are weighted-over-unweighted
//! ratios of the renewal series; they give the top cylinders directly.
//! Longer cylinders reduce structurally:
//!   - marked runs `s^n sbar` and one-symbol reductions use the measure's
//!     quasi-invariance under the shift (exact closed forms, no subtraction),
//!   - pure runs `s^n` peel off one marked run per step,
//!   - `s sbar^k` words subtract two pure-run values (shift invariance).
//! Subtractions are clamped at zero; the accumulated linear deficit is kept
//! as a diagnostic.

use std::cell::{Cell, RefCell};
use std::collections::BTreeMap;

use crate::eigen::{h_values_at, EigenValues, DEFAULT_Q_MAX};
use crate::error::{Error, Result};
use crate::numerics::{
    log1mexp, log_add, log_sub, log_sum_exp, pattern_series_eps, settle_index, LogValue, Side,
};
use crate::potential::{WaltersPotential, Word};
use crate::pressure::{pressure, DEFAULT_TOL};

/// Linear deficit above which a clamped subtraction counts as a diagnostic
/// event rather than harmless round-off.
const DEFICIT_TOL: f64 = 1e-12;
/// Depth cap for the refinement fallback; the structural cases are total,
/// so reaching the cap indicates a defect.
const REFINE_CAP: u32 = 4;

/// Cylinder-measure table for one `(potential, t)`. Values are cached as
/// they are computed. Construction and use are single-threaded; build one
/// table per thread when fanning out over temperatures.
#[derive(Debug)]
pub struct GibbsTable {
    eigen: EigenValues,
    log_s0: f64,
    log_s1: f64,
    log_mu0: f64,
    log_mu1: f64,
    log_mu01: f64,
    cache: RefCell<BTreeMap<String, f64>>,
    deficit: Cell<f64>,
    deficit_events: Cell<u64>,
}

/// The normalization sums `(ln S_0, ln S_1)` at inverse temperature `t`.
pub fn s0_s1(f: &WaltersPotential, t: f64) -> Result<(LogValue, LogValue)> {
    let table = top_cylinders(f, t)?;
    Ok((LogValue(table.log_s0), LogValue(table.log_s1)))
}

/// `ln(mu([0]) / mu([1])) = ln S_0 - ln S_1`.
pub fn ratio_log(f: &WaltersPotential, t: f64) -> Result<f64> {
    let table = top_cylinders(f, t)?;
    Ok(table.ratio_log())
}

/// Build the measure table with default tolerance.
pub fn top_cylinders(f: &WaltersPotential, t: f64) -> Result<GibbsTable> {
    top_cylinders_with(f, t, DEFAULT_TOL)
}

pub fn top_cylinders_with(f: &WaltersPotential, t: f64, tol: f64) -> Result<GibbsTable> {
    let sol = pressure(f, t, tol)?;
    let eigen = h_values_at(f, &sol, DEFAULT_Q_MAX)?;
    let eps = sol.epsilon;
    let ud = pattern_series_eps(f, Side::D, 1, t, eps, false)?.log_value.0;
    let wd = pattern_series_eps(f, Side::D, 1, t, eps, true)?.log_value.0;
    let ub = pattern_series_eps(f, Side::B, 1, t, eps, false)?.log_value.0;
    let wb = pattern_series_eps(f, Side::B, 1, t, eps, true)?.log_value.0;
    let log_s0 = wd - ud;
    let log_s1 = wb - ub;
    let log_norm = log_add(log_s0, log_s1);
    // difference form keeps the dominant side's deficit representable when
    // the minority mass is below one ulp of log_norm
    let (log_mu0, log_mu1) = if log_s0 <= log_s1 {
        let gap = (log_s0 - log_s1).exp().ln_1p();
        (log_s0 - log_s1 - gap, -gap)
    } else {
        let gap = (log_s1 - log_s0).exp().ln_1p();
        (-gap, log_s1 - log_s0 - gap)
    };
    Ok(GibbsTable {
        eigen,
        log_s0,
        log_s1,
        log_mu0,
        log_mu1,
        log_mu01: -log_norm,
        cache: RefCell::new(BTreeMap::new()),
        deficit: Cell::new(0.0),
        deficit_events: Cell::new(0),
    })
}

impl GibbsTable {
    pub fn t(&self) -> f64 {
        self.eigen.t()
    }

    pub fn p(&self) -> f64 {
        self.eigen.p()
    }

    pub fn epsilon(&self) -> f64 {
        self.eigen.epsilon()
    }

    pub fn eigen(&self) -> &EigenValues {
        &self.eigen
    }

    pub fn log_s0(&self) -> f64 {
        self.log_s0
    }

    pub fn log_s1(&self) -> f64 {
        self.log_s1
    }

    pub fn log_mu0(&self) -> f64 {
        self.log_mu0
    }

    pub fn log_mu1(&self) -> f64 {
        self.log_mu1
    }

    /// `ln mu([01]) = ln mu([10])`.
    pub fn log_mu01(&self) -> f64 {
        self.log_mu01
    }

    /// `ln(mu([0]) / mu([1]))`.
    pub fn ratio_log(&self) -> f64 {
        self.log_s0 - self.log_s1
    }

    /// Total linear mass clamped away by subtractions so far.
    pub fn deficit(&self) -> f64 {
        self.deficit.get()
    }

    /// Clamped subtractions whose deficit exceeded the diagnostic tolerance.
    pub fn deficit_events(&self) -> u64 {
        self.deficit_events.get()
    }

    /// `ln mu([w])`.
    pub fn cylinder_measure(&self, w: &Word) -> Result<LogValue> {
        self.log_mu(w, 0).map(LogValue)
    }

    fn sub(&self, x: f64, y: f64) -> f64 {
        let (v, deficit) = log_sub(x, y);
        if deficit > 0.0 {
            self.deficit.set(self.deficit.get() + deficit);
            if deficit > DEFICIT_TOL {
                self.deficit_events.set(self.deficit_events.get() + 1);
            }
        }
        v
    }

    fn log_mu(&self, w: &Word, depth: u32) -> Result<f64> {
        if let Some(v) = self.cache.borrow().get(w.as_str()) {
            return Ok(*v);
        }
        let runs = w.runs().to_vec();
        let (sym, p) = runs[0];
        let v = if w.len() == 1 {
            if sym == 0 {
                self.log_mu0
            } else {
                self.log_mu1
            }
        } else if runs.len() == 2 && w.len() == 2 {
            self.log_mu01
        } else if runs.len() == 1 {
            // pure run s^n: mu([s^k+1]) = mu([s^k]) - mu([s^k sbar])
            let sbar = 1 - sym;
            let mut cur = if sym == 0 { self.log_mu0 } else { self.log_mu1 };
            let mut run = Word::from_bits(&[sym]);
            for _ in 1..p {
                let marked = run.append(sbar);
                let m = self.log_mu(&marked, depth)?;
                cur = self.sub(cur, m);
                run = run.append(sym);
                self.cache.borrow_mut().insert(run.as_str().to_string(), cur);
            }
            cur
        } else if p >= 2 || runs.len() >= 3 {
            // first run pinned: one-symbol reduction
            let fw = self
                .eigen
                .potential()
                .f_on_word(w)
                .expect("first run pinned implies a determined value");
            let hw = self
                .eigen
                .h_on_word(w)?
                .expect("alternation present implies a determined h value");
            let sw = w.shift().expect("length checked above");
            let hsw = self
                .eigen
                .h_on_word(&sw)?
                .expect("shifted word keeps an alternation");
            let base = self.log_mu(&sw, depth)?;
            base + self.t() * (fw - self.eigen.potential().pivot()) - self.epsilon() + hw.0
                - hsw.0
        } else if runs.len() == 2 && p == 1 {
            // w = s sbar^k, k >= 2: mu([w]) = mu([sbar^k]) - mu([sbar^{k+1}])
            let sbar = 1 - sym;
            let k = runs[1].1;
            let tail = Word::from_bits(&vec![sbar; k as usize]);
            let tail1 = Word::from_bits(&vec![sbar; k as usize + 1]);
            let a = self.log_mu(&tail, depth)?;
            let b = self.log_mu(&tail1, depth)?;
            self.sub(a, b)
        } else {
            // refinement fallback; the cases above are exhaustive, so this
            // only runs if the structural analysis is violated
            if depth >= REFINE_CAP {
                return Err(Error::ReductionFailure {
                    word: w.as_str().to_string(),
                    depth,
                });
            }
            let lo = self.log_mu(&w.append(0), depth + 1)?;
            let hi = self.log_mu(&w.append(1), depth + 1)?;
            log_add(lo, hi)
        };
        self.cache.borrow_mut().insert(w.as_str().to_string(), v);
        Ok(v)
    }
}

/// Cross-check route for the normalization sums through the eigenfunction
/// values: `S_0 = 1 + sum_{j >= 2} exp(-(j-1) P + t (a_2 + ... + a_j))
/// alpha_j / alpha_1`, and the mirror for `S_1`. Slower than the direct
/// ratio form; used to validate it.
pub fn s0_s1_via_eigenfunction(table: &GibbsTable) -> Result<(f64, f64)> {
    let f = table.eigen().potential().clone();
    let t = table.t();
    let eps = table.epsilon();
    let pivot = f.pivot();

    let one_side = |r_seq: &crate::potential::SequenceSpec,
                    s_seq: &crate::potential::SequenceSpec,
                    log_h: &dyn Fn(u32) -> Result<f64>|
     -> Result<f64> {
        let m = settle_index(s_seq, r_seq, 1, t).max(DEFAULT_Q_MAX as u64) as u32;
        let log_h1 = log_h(1)?;
        let mut terms = vec![0.0f64];
        let mut rtil = 0.0f64;
        let mut comp = 0.0f64;
        for j in 2..=m {
            let y = (r_seq.value_at(j) - pivot) - comp;
            let s = rtil + y;
            comp = (s - rtil) - y;
            rtil = s;
            terms.push(-((j - 1) as f64) * eps + t * rtil + log_h(j)? - log_h1);
        }
        // constant-tail model beyond the settle index
        let z = -eps + t * (r_seq.limit() - pivot);
        let log_h_inf = log_h(m + 1)?;
        let c = t * rtil - ((m - 1) as f64) * t * (r_seq.limit() - pivot) + log_h_inf - log_h1;
        let tail = c + (m as f64) * z - log1mexp(z);
        terms.push(tail);
        Ok(log_sum_exp(terms))
    };

    let s0 = one_side(f.a_seq(), f.d_seq(), &|q| table.eigen().log_alpha(q))?;
    let s1 = one_side(f.c_seq(), f.b_seq(), &|q| table.eigen().log_beta(q))?;
    Ok((s0, s1))
}
