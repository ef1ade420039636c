//! Renewal-type potentials on the binary shift.
//!
//! A potential is described by four real sequences with limits:
//! `a_p` (p >= 2) on points starting `0^p 1...`, `b_q` (q >= 1) on points
//! starting `0 1^q 0...`, `c_p` (p >= 2) on points starting `1^p 0...`,
//! `d_q` (q >= 1) on points starting `1 0^q 1...`, together with the limit
//! values `a = f(0^inf)`, `b = f(0 1^inf)`, `c = f(1^inf)`, `d = f(1 0^inf)`.

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};

/// Tail model for a sequence: constant at the limit, or a geometric
/// approach `s_n = limit + coeff * ratio^n` with `0 < |ratio| < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Tail {
    Constant { limit: f64 },
    Geometric { limit: f64, coeff: f64, ratio: f64 },
}

impl Tail {
    pub fn limit(&self) -> f64 {
        match *self {
            Tail::Constant { limit } => limit,
            Tail::Geometric { limit, .. } => limit,
        }
    }
}

/// One indexed sequence: explicit prefix values starting at `start_index`,
/// then a tail model for every later index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub start_index: u32,
    #[serde(default)]
    pub prefix: Vec<f64>,
    pub tail: Tail,
}

impl SequenceSpec {
    pub fn new(start_index: u32, prefix: Vec<f64>, tail: Tail) -> Result<SequenceSpec> {
        let s = SequenceSpec { start_index, prefix, tail };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.start_index == 0 {
            return Err(Error::InvalidSpec("start_index must be at least 1".into()));
        }
        for (i, v) in self.prefix.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "prefix value at index {} is not finite",
                    self.start_index as usize + i
                )));
            }
        }
        match self.tail {
            Tail::Constant { limit } => {
                if !limit.is_finite() {
                    return Err(Error::InvalidSpec("tail limit is not finite".into()));
                }
            }
            Tail::Geometric { limit, coeff, ratio } => {
                if !limit.is_finite() || !coeff.is_finite() || !ratio.is_finite() {
                    return Err(Error::InvalidSpec("tail parameters are not finite".into()));
                }
                if !(ratio.abs() < 1.0) || ratio == 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "geometric ratio must satisfy 0 < |ratio| < 1, got {ratio}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn limit(&self) -> f64 {
        self.tail.limit()
    }

    /// Last index covered by the explicit prefix; indices above this use the
    /// tail model. Equals `start_index - 1` when the prefix is empty.
    pub fn prefix_end(&self) -> u32 {
        self.start_index + self.prefix.len() as u32 - 1
    }

    /// Value `s_n`. Requires `n >= start_index`.
    pub fn value_at(&self, n: u32) -> f64 {
        self.value_at_dd(n).f64()
    }

    pub(crate) fn value_at_dd(&self, n: u32) -> Dd {
        assert!(
            n >= self.start_index,
            "sequence index {n} below start index {}",
            self.start_index
        );
        let k = (n - self.start_index) as usize;
        if k < self.prefix.len() {
            return Dd::new(self.prefix[k]);
        }
        match self.tail {
            Tail::Constant { limit } => Dd::new(limit),
            Tail::Geometric { limit, coeff, ratio } => {
                Dd::new(limit).add(Dd::new(coeff).mul(Dd::new(ratio).powi(n)))
            }
        }
    }

    /// Bound on `|s_n - limit|` valid for every index `>= n` in the tail
    /// region. Returns 0 for constant tails.
    pub(crate) fn tail_deviation(&self, n: u32) -> f64 {
        match self.tail {
            Tail::Constant { .. } => 0.0,
            Tail::Geometric { coeff, ratio, .. } => coeff.abs() * ratio.abs().powi(n as i32),
        }
    }

    /// Bound on `sum_{m >= n} |s_m - limit|` over the tail region.
    pub(crate) fn tail_deviation_sum(&self, n: u32) -> f64 {
        match self.tail {
            Tail::Constant { .. } => 0.0,
            Tail::Geometric { coeff, ratio, .. } => {
                coeff.abs() * ratio.abs().powi(n as i32) / (1.0 - ratio.abs())
            }
        }
    }

    /// Finite sum `s_{q+1} + ... + s_{q+j}`. Requires `q + 1 >= start_index`.
    pub fn partial_sum(&self, q: u32, j: u32) -> f64 {
        self.partial_sum_dd(q, j).f64()
    }

    pub(crate) fn partial_sum_dd(&self, q: u32, j: u32) -> Dd {
        assert!(
            q + 1 >= self.start_index,
            "partial sum from index {} below start index {}",
            q + 1,
            self.start_index
        );
        if j == 0 {
            return Dd::ZERO;
        }
        let lo = q + 1;
        let hi = q + j;
        let pe = self.prefix_end();
        let mut acc = Dd::ZERO;
        let mut n = lo;
        while n <= hi.min(pe) {
            acc = acc.add(Dd::new(self.prefix[(n - self.start_index) as usize]));
            n += 1;
        }
        if hi > pe {
            let m1 = lo.max(pe + 1);
            let count = (hi - m1 + 1) as f64;
            match self.tail {
                Tail::Constant { limit } => {
                    acc = acc.add(Dd::new(limit).mul(Dd::new(count)));
                }
                Tail::Geometric { limit, coeff, ratio } => {
                    let r = Dd::new(ratio);
                    let geo = r.powi(m1).sub(r.powi(hi + 1));
                    acc = acc
                        .add(Dd::new(limit).mul(Dd::new(count)))
                        .add(Dd::new(coeff).mul(geo).div(Dd::new(1.0).sub(r)));
                }
            }
        }
        acc
    }

    /// Convergent tail sum `sum_{j >= 1} (s_{q+j} - limit)` in closed form.
    pub fn tail_sum(&self, q: u32) -> f64 {
        self.tail_sum_dd(q).f64()
    }

    pub(crate) fn tail_sum_dd(&self, q: u32) -> Dd {
        assert!(
            q + 1 >= self.start_index,
            "tail sum from index {} below start index {}",
            q + 1,
            self.start_index
        );
        let lim = Dd::new(self.limit());
        let pe = self.prefix_end();
        let mut acc = Dd::ZERO;
        let mut n = q + 1;
        while n <= pe {
            acc = acc.add(Dd::new(self.prefix[(n - self.start_index) as usize]).sub(lim));
            n += 1;
        }
        if let Tail::Geometric { coeff, ratio, .. } = self.tail {
            let m = (q + 1).max(pe + 1);
            let r = Dd::new(ratio);
            acc = acc.add(Dd::new(coeff).mul(r.powi(m)).div(Dd::new(1.0).sub(r)));
        }
        acc
    }

    /// Supremum of the value set including the limit; exact scan of the
    /// prefix plus the first two tail values (the tail approach is monotone
    /// in magnitude, so the extreme lies there or at the limit).
    fn sup(&self) -> f64 {
        let mut m = self.limit();
        for &v in &self.prefix {
            m = m.max(v);
        }
        if let Tail::Geometric { limit, coeff, ratio } = self.tail {
            let n0 = self.prefix_end() + 1;
            m = m.max(limit + coeff * ratio.powi(n0 as i32));
            m = m.max(limit + coeff * ratio.powi(n0 as i32 + 1));
        }
        m
    }

    fn shifted(&self, kappa: f64) -> SequenceSpec {
        let tail = match self.tail {
            Tail::Constant { limit } => Tail::Constant { limit: limit + kappa },
            Tail::Geometric { limit, coeff, ratio } => {
                Tail::Geometric { limit: limit + kappa, coeff, ratio }
            }
        };
        SequenceSpec {
            start_index: self.start_index,
            prefix: self.prefix.iter().map(|v| v + kappa).collect(),
            tail,
        }
    }
}

/// Coordinates of a point where the potential takes a single value.
/// Run lengths follow the defining rules: `ZeroRun(p)`/`OneRun(p)` need
/// `p >= 2`, `ZeroOneRun(q)`/`OneZeroRun(q)` need `q >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternPoint {
    /// `0^inf`
    ZeroInf,
    /// `1^inf`
    OneInf,
    /// `0^p 1 z`
    ZeroRun(u32),
    /// `1^p 0 z`
    OneRun(u32),
    /// `0 1^q 0 z`
    ZeroOneRun(u32),
    /// `1 0^q 1 z`
    OneZeroRun(u32),
    /// `0 1^inf`
    ZeroOneInf,
    /// `1 0^inf`
    OneZeroInf,
}

/// A full potential: the four sequences with their limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaltersPotential {
    a: SequenceSpec,
    b: SequenceSpec,
    c: SequenceSpec,
    d: SequenceSpec,
}

impl WaltersPotential {
    pub fn new(
        a: SequenceSpec,
        b: SequenceSpec,
        c: SequenceSpec,
        d: SequenceSpec,
    ) -> Result<WaltersPotential> {
        for (name, seq, want) in
            [("a", &a, 2), ("b", &b, 1), ("c", &c, 2), ("d", &d, 1)]
        {
            seq.validate()
                .map_err(|e| Error::InvalidSpec(format!("sequence {name}: {e}")))?;
            if seq.start_index != want {
                return Err(Error::InvalidSpec(format!(
                    "sequence {name} must start at index {want}, got {}",
                    seq.start_index
                )));
            }
        }
        Ok(WaltersPotential { a, b, c, d })
    }

    pub fn from_json_str(s: &str) -> Result<WaltersPotential> {
        let raw: WaltersPotential = serde_json::from_str(s)?;
        WaltersPotential::new(raw.a, raw.b, raw.c, raw.d)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("potential serializes")
    }

    pub fn a_seq(&self) -> &SequenceSpec {
        &self.a
    }
    pub fn b_seq(&self) -> &SequenceSpec {
        &self.b
    }
    pub fn c_seq(&self) -> &SequenceSpec {
        &self.c
    }
    pub fn d_seq(&self) -> &SequenceSpec {
        &self.d
    }

    pub fn a_limit(&self) -> f64 {
        self.a.limit()
    }
    pub fn b_limit(&self) -> f64 {
        self.b.limit()
    }
    pub fn c_limit(&self) -> f64 {
        self.c.limit()
    }
    pub fn d_limit(&self) -> f64 {
        self.d.limit()
    }

    /// `max(a, c)`: the centering value for all series exponents.
    pub fn pivot(&self) -> f64 {
        self.a_limit().max(self.c_limit())
    }

    /// Supremum of the potential over the whole shift space.
    pub fn sup_f(&self) -> f64 {
        self.a
            .sup()
            .max(self.b.sup())
            .max(self.c.sup())
            .max(self.d.sup())
            .max(self.a_limit())
            .max(self.b_limit())
            .max(self.c_limit())
            .max(self.d_limit())
    }

    /// Value at a pattern point. Requires the run index to satisfy the
    /// variant's range rule.
    pub fn pattern_value(&self, p: PatternPoint) -> f64 {
        match p {
            PatternPoint::ZeroInf => self.a_limit(),
            PatternPoint::OneInf => self.c_limit(),
            PatternPoint::ZeroOneInf => self.b_limit(),
            PatternPoint::OneZeroInf => self.d_limit(),
            PatternPoint::ZeroRun(p) => {
                assert!(p >= 2, "ZeroRun needs run length >= 2, got {p}");
                self.a.value_at(p)
            }
            PatternPoint::OneRun(p) => {
                assert!(p >= 2, "OneRun needs run length >= 2, got {p}");
                self.c.value_at(p)
            }
            PatternPoint::ZeroOneRun(q) => {
                assert!(q >= 1, "ZeroOneRun needs run length >= 1, got {q}");
                self.b.value_at(q)
            }
            PatternPoint::OneZeroRun(q) => {
                assert!(q >= 1, "OneZeroRun needs run length >= 1, got {q}");
                self.d.value_at(q)
            }
        }
    }

    /// Value of the potential on the cylinder `[w]`, when `w` pins it down:
    /// a first run of length >= 2 must be followed by the opposite symbol,
    /// a first run of length 1 needs the second run to terminate inside `w`.
    /// Returns `None` when the cylinder meets several level sets.
    pub fn f_on_word(&self, w: &Word) -> Option<f64> {
        let runs = w.runs();
        let (sym, p) = runs[0];
        if p >= 2 {
            if runs.len() >= 2 {
                return Some(if sym == 0 { self.a.value_at(p) } else { self.c.value_at(p) });
            }
            return None;
        }
        if runs.len() >= 3 {
            let q = runs[1].1;
            return Some(if sym == 0 { self.b.value_at(q) } else { self.d.value_at(q) });
        }
        None
    }

    /// The potential shifted by a constant.
    pub fn shifted(&self, kappa: f64) -> WaltersPotential {
        WaltersPotential {
            a: self.a.shifted(kappa),
            b: self.b.shifted(kappa),
            c: self.c.shifted(kappa),
            d: self.d.shifted(kappa),
        }
    }
}

/// A finite binary word defining a cylinder set. Non-empty.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Word {
    s: String,
    runs: Vec<(u8, u32)>,
}

impl Word {
    pub fn parse(s: &str) -> Result<Word> {
        if s.is_empty() {
            return Err(Error::InvalidWord("word must be non-empty".into()));
        }
        let mut runs: Vec<(u8, u32)> = Vec::new();
        for ch in s.chars() {
            let b = match ch {
                '0' => 0u8,
                '1' => 1u8,
                _ => {
                    return Err(Error::InvalidWord(format!(
                        "word may contain only 0 and 1, got {ch:?} in {s:?}"
                    )))
                }
            };
            match runs.last_mut() {
                Some((sym, len)) if *sym == b => *len += 1,
                _ => runs.push((b, 1)),
            }
        }
        Ok(Word { s: s.to_string(), runs })
    }

    pub fn from_bits(bits: &[u8]) -> Word {
        let s: String = bits.iter().map(|b| if *b == 0 { '0' } else { '1' }).collect();
        Word::parse(&s).expect("bits form a valid word")
    }

    pub fn as_str(&self) -> &str {
        &self.s
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bit(&self, i: usize) -> u8 {
        (self.s.as_bytes()[i] - b'0') as u8
    }

    /// Run decomposition: (symbol, length) pairs in order.
    pub fn runs(&self) -> &[(u8, u32)] {
        &self.runs
    }

    pub fn first_run(&self) -> (u8, u32) {
        self.runs[0]
    }

    /// The word with its first symbol removed; `None` for length-1 words.
    pub fn shift(&self) -> Option<Word> {
        if self.s.len() <= 1 {
            None
        } else {
            Some(Word::parse(&self.s[1..]).expect("suffix is a valid word"))
        }
    }

    pub fn append(&self, b: u8) -> Word {
        let mut s = self.s.clone();
        s.push(if b == 0 { '0' } else { '1' });
        Word::parse(&s).expect("extension is a valid word")
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    #[test]
    fn value_at_matches_defining_sequences() {
        let f = builtin::example1(-1.0);
        assert_eq!(f.a_seq().value_at(2), -1.0);
        assert_eq!(f.a_seq().value_at(3), -0.5);
        assert_eq!(f.c_seq().value_at(2), -1.0);
        assert_eq!(f.b_seq().value_at(1), -1.0);
        assert_eq!(f.b_seq().value_at(2), -1.0);
        assert_eq!(f.d_seq().value_at(2), -1.0);
        assert!((f.c_seq().value_at(3) - (-1.0 / 3.0)).abs() < 1e-15);
        assert!((f.d_seq().value_at(3) - (-4.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn pattern_value_on_run_points() {
        let f = builtin::example1(-1.0);
        assert_eq!(f.pattern_value(PatternPoint::ZeroRun(2)), -1.0);
        assert_eq!(f.pattern_value(PatternPoint::OneZeroRun(2)), -1.0);
        assert_eq!(f.pattern_value(PatternPoint::ZeroInf), 0.0);
        assert_eq!(f.pattern_value(PatternPoint::OneInf), 0.0);
        assert_eq!(f.pattern_value(PatternPoint::ZeroOneInf), -2.0);
        assert_eq!(f.pattern_value(PatternPoint::OneZeroInf), -1.5);
    }

    #[test]
    #[should_panic(expected = "ZeroRun")]
    fn pattern_value_rejects_short_zero_run() {
        let f = builtin::example1(-1.0);
        f.pattern_value(PatternPoint::ZeroRun(1));
    }

    #[test]
    fn partial_sum_closed_form() {
        let f = builtin::example1(-1.0);
        // a_2 + a_3 = -1 - 1/2
        assert_eq!(f.a_seq().partial_sum(1, 2), -1.5);
        assert_eq!(f.a_seq().partial_sum(1, 0), 0.0);
        // a_3 + a_4 + a_5 = -1/2 - 1/4 - 1/8
        assert_eq!(f.a_seq().partial_sum(2, 3), -0.875);
    }

    #[test]
    fn partial_sum_telescopes() {
        let f = builtin::example1(-0.7);
        let s = f.d_seq();
        for q in 1..6u32 {
            for j in 0..8u32 {
                let lhs = s.partial_sum(q, j + 1);
                let rhs = s.partial_sum(q, j) + s.value_at(q + j + 1);
                assert!((lhs - rhs).abs() < 1e-14, "q={q} j={j}");
            }
        }
    }

    #[test]
    fn tail_sum_closed_forms() {
        let f = builtin::example1(-1.0);
        assert_eq!(f.a_seq().tail_sum(1), -2.0);
        assert_eq!(f.a_seq().tail_sum(2), -1.0);
        // sum of c_n from n = 2 is -3/2 up to the f64 encoding of ratio 1/3
        assert!((f.c_seq().tail_sum(1) - (-1.5)).abs() < 1e-15);
    }

    #[test]
    fn tail_sum_matches_truncation_with_remainder_bound() {
        let f = builtin::example1(-1.0);
        for q in 1..5u32 {
            for seq in [f.a_seq(), f.c_seq(), f.b_seq(), f.d_seq()] {
                let closed = seq.tail_sum(q);
                let mut partial = 0.0;
                for j in 1..=200u32 {
                    partial += seq.value_at(q + j) - seq.limit();
                }
                let remainder = seq.tail_deviation_sum(q + 201);
                assert!(
                    (closed - partial).abs() <= remainder + 1e-12,
                    "q={q} closed={closed} partial={partial}"
                );
            }
        }
    }

    #[test]
    fn sup_f_scans_prefix_and_tail() {
        let f = builtin::example1(-1.0);
        assert_eq!(f.sup_f(), 0.0);
        let g = f.shifted(0.25);
        assert_eq!(g.sup_f(), 0.25);
    }

    #[test]
    fn f_on_word_rules() {
        let f = builtin::example1(-1.0);
        // first run >= 2 with alternation: a_2
        assert_eq!(f.f_on_word(&Word::parse("001").unwrap()), Some(-1.0));
        // pure run: several level sets meet the cylinder
        assert_eq!(f.f_on_word(&Word::parse("000").unwrap()), None);
        // first run 1, second run closed: d_1
        assert_eq!(f.f_on_word(&Word::parse("101").unwrap()), Some(-1.0));
        // first run 1, second run still open
        assert_eq!(f.f_on_word(&Word::parse("10").unwrap()), None);
        assert_eq!(f.f_on_word(&Word::parse("100").unwrap()), None);
        // b_2 on 0110...
        assert_eq!(f.f_on_word(&Word::parse("0110").unwrap()), Some(-1.0));
    }

    #[test]
    fn zero_potential_pure_run_is_undetermined() {
        let f = builtin::zero();
        assert_eq!(f.f_on_word(&Word::parse("000").unwrap()), None);
    }

    #[test]
    fn word_runs_and_shift() {
        let w = Word::parse("0011101").unwrap();
        assert_eq!(w.runs(), &[(0, 2), (1, 3), (0, 1), (1, 1)]);
        assert_eq!(w.shift().unwrap().as_str(), "011101");
        assert_eq!(w.len(), 7);
        assert!(Word::parse("").is_err());
        assert!(Word::parse("012").is_err());
    }

    #[test]
    fn start_index_validation() {
        let a = SequenceSpec::new(2, vec![], Tail::Constant { limit: 0.0 }).unwrap();
        let b = SequenceSpec::new(1, vec![], Tail::Constant { limit: 0.0 }).unwrap();
        let bad = SequenceSpec::new(1, vec![], Tail::Constant { limit: 0.0 }).unwrap();
        assert!(WaltersPotential::new(bad, b.clone(), a.clone(), b.clone()).is_err());
        assert!(WaltersPotential::new(a.clone(), b.clone(), a.clone(), b.clone()).is_ok());
        assert!(
            SequenceSpec::new(2, vec![], Tail::Geometric { limit: 0.0, coeff: 1.0, ratio: 1.0 })
                .is_err()
        );
        assert!(
            SequenceSpec::new(2, vec![], Tail::Geometric { limit: 0.0, coeff: 1.0, ratio: 0.0 })
                .is_err()
        );
    }

    #[test]
    fn json_round_trip() {
        let f = builtin::thm2();
        let s = f.to_json_string();
        let g = WaltersPotential::from_json_str(&s).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn json_rejects_wrong_start() {
        let src = r#"{
            "a": {"start_index": 1, "prefix": [], "tail": {"type": "constant", "limit": 0.0}},
            "b": {"start_index": 1, "prefix": [], "tail": {"type": "constant", "limit": 0.0}},
            "c": {"start_index": 2, "prefix": [], "tail": {"type": "constant", "limit": 0.0}},
            "d": {"start_index": 1, "prefix": [], "tail": {"type": "constant", "limit": 0.0}}
        }"#;
        assert!(WaltersPotential::from_json_str(src).is_err());
    }
}
