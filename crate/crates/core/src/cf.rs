//! Partial-quotient sources, the convergent recurrence and rational brackets.
//!
//! A number is given by its simple continued fraction `[a0; a1, a2, ...]`.
//! Sources are described by a small text grammar:
//!
//! ```text
//! periodic:[a0;pre|period]   e.g. periodic:[1;|2] is sqrt(2)
//! explicit:[a0;a1,a2,...]    finite, reports exhaustion
//! rule:e                     e = [2;1,2,1,1,4,1,1,6,...]
//! rule:const:c               [c;c,c,c,...]
//! seeded:<seed>:<bound>      a0 = 0, a_m uniform in [1, bound] from ChaCha8
//! ```

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Name of the generator behind `seeded:` sources, recorded in trace headers.
pub const SEEDED_PRNG: &str = "chacha8";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    /// Euler's number: a_{3j+2} = 2(j+1), every other a_m = 1, a0 = 2.
    E,
    /// Every partial quotient (a0 included) equals `c`.
    Constant(BigInt),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum QuotientSource {
    /// `preperiod[0]` is a0; the period repeats forever after the preperiod.
    Periodic {
        preperiod: Vec<BigInt>,
        period: Vec<BigInt>,
    },
    /// `terms[0]` is a0.
    Explicit { terms: Vec<BigInt> },
    Rule(Rule),
    Seeded { seed: u64, bound: u64 },
}

impl QuotientSource {
    pub fn periodic(preperiod: &[i64], period: &[i64]) -> Result<Self> {
        let src = QuotientSource::Periodic {
            preperiod: preperiod.iter().map(|&a| BigInt::from(a)).collect(),
            period: period.iter().map(|&a| BigInt::from(a)).collect(),
        };
        src.validate()?;
        Ok(src)
    }

    pub fn periodic_big(preperiod: Vec<BigInt>, period: Vec<BigInt>) -> Result<Self> {
        let src = QuotientSource::Periodic { preperiod, period };
        src.validate()?;
        Ok(src)
    }

    pub fn explicit(terms: &[i64]) -> Result<Self> {
        let src = QuotientSource::Explicit {
            terms: terms.iter().map(|&a| BigInt::from(a)).collect(),
        };
        src.validate()?;
        Ok(src)
    }

    /// Golden ratio `[1; 1, 1, ...]`.
    pub fn golden() -> Self {
        QuotientSource::Periodic {
            preperiod: vec![BigInt::one()],
            period: vec![BigInt::one()],
        }
    }

    /// `sqrt(2) = [1; 2, 2, ...]`.
    pub fn sqrt2() -> Self {
        QuotientSource::Periodic {
            preperiod: vec![BigInt::one()],
            period: vec![BigInt::from(2)],
        }
    }

    pub fn e() -> Self {
        QuotientSource::Rule(Rule::E)
    }

    pub fn seeded(seed: u64, bound: u64) -> Result<Self> {
        let src = QuotientSource::Seeded { seed, bound };
        src.validate()?;
        Ok(src)
    }

    /// Number of partial quotients available, `None` for infinite sources.
    pub fn len(&self) -> Option<usize> {
        match self {
            QuotientSource::Explicit { terms } => Some(terms.len()),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    fn validate(&self) -> Result<()> {
        let check = |index: usize, value: &BigInt| -> Result<()> {
            if index >= 1 && value < &BigInt::one() {
                return Err(Error::InvalidQuotient {
                    index,
                    value: value.clone(),
                });
            }
            Ok(())
        };
        match self {
            QuotientSource::Periodic { preperiod, period } => {
                if preperiod.is_empty() {
                    return Err(self.parse_error("preperiod must contain a0"));
                }
                if period.is_empty() {
                    return Err(self.parse_error("period must be nonempty"));
                }
                for (i, a) in preperiod.iter().enumerate() {
                    check(i, a)?;
                }
                for (i, a) in period.iter().enumerate() {
                    check(preperiod.len() + i, a)?;
                }
            }
            QuotientSource::Explicit { terms } => {
                if terms.is_empty() {
                    return Err(self.parse_error("explicit source needs a0"));
                }
                for (i, a) in terms.iter().enumerate() {
                    check(i, a)?;
                }
            }
            QuotientSource::Rule(Rule::Constant(c)) => check(1, c)?,
            QuotientSource::Rule(Rule::E) => {}
            QuotientSource::Seeded { bound, .. } => {
                if *bound < 1 {
                    return Err(self.parse_error("quotient bound must be at least 1"));
                }
            }
        }
        Ok(())
    }

    fn parse_error(&self, reason: &str) -> Error {
        Error::ParseSource {
            spec: self.to_string(),
            reason: reason.to_string(),
        }
    }

    /// Term `a_m` for sources that can be indexed directly.
    fn direct_term(&self, m: usize) -> Option<BigInt> {
        match self {
            QuotientSource::Periodic { preperiod, period } => Some(if m < preperiod.len() {
                preperiod[m].clone()
            } else {
                period[(m - preperiod.len()) % period.len()].clone()
            }),
            QuotientSource::Explicit { terms } => terms.get(m).cloned(),
            QuotientSource::Rule(Rule::E) => Some(if m == 0 {
                BigInt::from(2)
            } else if m % 3 == 2 {
                BigInt::from(2 * (m / 3 + 1))
            } else {
                BigInt::one()
            }),
            QuotientSource::Rule(Rule::Constant(c)) => Some(c.clone()),
            QuotientSource::Seeded { .. } => None,
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, items: &[BigInt]) -> fmt::Result {
    for (i, a) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl fmt::Display for QuotientSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuotientSource::Periodic { preperiod, period } => {
                f.write_str("periodic:[")?;
                if let Some(a0) = preperiod.first() {
                    write!(f, "{a0}")?;
                }
                f.write_str(";")?;
                write_list(f, preperiod.get(1..).unwrap_or(&[]))?;
                f.write_str("|")?;
                write_list(f, period)?;
                f.write_str("]")
            }
            QuotientSource::Explicit { terms } => {
                f.write_str("explicit:[")?;
                if let Some(a0) = terms.first() {
                    write!(f, "{a0}")?;
                }
                if terms.len() > 1 {
                    f.write_str(";")?;
                    write_list(f, &terms[1..])?;
                }
                f.write_str("]")
            }
            QuotientSource::Rule(Rule::E) => f.write_str("rule:e"),
            QuotientSource::Rule(Rule::Constant(c)) => write!(f, "rule:const:{c}"),
            QuotientSource::Seeded { seed, bound } => write!(f, "seeded:{seed}:{bound}"),
        }
    }
}

fn parse_int_list(spec: &str, body: &str) -> Result<Vec<BigInt>> {
    let body = body.trim();
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|s| {
            s.trim().parse::<BigInt>().map_err(|_| Error::ParseSource {
                spec: spec.to_string(),
                reason: format!("`{}` is not an integer", s.trim()),
            })
        })
        .collect()
}

fn bracketed<'a>(spec: &str, body: &'a str) -> Result<&'a str> {
    body.trim()
        .strip_prefix('[')
        .and_then(|b| b.strip_suffix(']'))
        .ok_or_else(|| Error::ParseSource {
            spec: spec.to_string(),
            reason: "expected `[...]`".to_string(),
        })
}

impl FromStr for QuotientSource {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let err = |reason: &str| Error::ParseSource {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| err("missing `kind:` prefix"))?;
        let src = match kind {
            "periodic" => {
                let inner = bracketed(spec, rest)?;
                let (a0, tail) = inner.split_once(';').ok_or_else(|| err("missing `;`"))?;
                let (pre, period) = tail.split_once('|').ok_or_else(|| err("missing `|`"))?;
                let mut preperiod = parse_int_list(spec, a0)?;
                if preperiod.len() != 1 {
                    return Err(err("a0 must be a single integer"));
                }
                preperiod.extend(parse_int_list(spec, pre)?);
                QuotientSource::Periodic {
                    preperiod,
                    period: parse_int_list(spec, period)?,
                }
            }
            "explicit" => {
                let inner = bracketed(spec, rest)?;
                let mut terms;
                match inner.split_once(';') {
                    Some((a0, tail)) => {
                        terms = parse_int_list(spec, a0)?;
                        if terms.len() != 1 {
                            return Err(err("a0 must be a single integer"));
                        }
                        terms.extend(parse_int_list(spec, tail)?);
                    }
                    None => {
                        terms = parse_int_list(spec, inner)?;
                        if terms.len() != 1 {
                            return Err(err("a0 must be followed by `;`"));
                        }
                    }
                }
                QuotientSource::Explicit { terms }
            }
            "rule" => match rest.split_once(':') {
                None if rest == "e" => QuotientSource::Rule(Rule::E),
                Some(("const", c)) => QuotientSource::Rule(Rule::Constant(
                    c.trim().parse().map_err(|_| err("constant must be an integer"))?,
                )),
                _ => return Err(err("unknown rule (expected `e` or `const:<c>`)")),
            },
            "seeded" => {
                let (seed, bound) = rest
                    .split_once(':')
                    .ok_or_else(|| err("expected `seeded:<seed>:<bound>`"))?;
                QuotientSource::Seeded {
                    seed: seed.trim().parse().map_err(|_| err("bad seed"))?,
                    bound: bound.trim().parse().map_err(|_| err("bad bound"))?,
                }
            }
            _ => return Err(err("unknown source kind")),
        };
        src.validate()?;
        Ok(src)
    }
}

impl Serialize for QuotientSource {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QuotientSource {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Lazily materialized partial quotients of one source.
#[derive(Clone, Debug)]
pub struct Expansion {
    source: QuotientSource,
    terms: Vec<BigInt>,
    rng: Option<ChaCha8Rng>,
}

impl Expansion {
    pub fn new(source: QuotientSource) -> Self {
        let (terms, rng) = match &source {
            QuotientSource::Seeded { seed, .. } => {
                (vec![BigInt::zero()], Some(ChaCha8Rng::seed_from_u64(*seed)))
            }
            _ => (Vec::new(), None),
        };
        Expansion { source, terms, rng }
    }

    pub fn source(&self) -> &QuotientSource {
        &self.source
    }

    /// Materialize at least `count` terms.
    pub fn ensure(&mut self, count: usize) -> Result<()> {
        while self.terms.len() < count {
            let m = self.terms.len();
            let next = match (&self.source, self.rng.as_mut()) {
                (QuotientSource::Seeded { bound, .. }, Some(rng)) => {
                    BigInt::from(rng.gen_range(1..=*bound))
                }
                (src, _) => src.direct_term(m).ok_or(Error::SourceExhausted {
                    needed: count,
                    available: m,
                })?,
            };
            self.terms.push(next);
        }
        Ok(())
    }

    pub fn term(&mut self, m: usize) -> Result<&BigInt> {
        self.ensure(m + 1)?;
        Ok(&self.terms[m])
    }

    /// The first `count` terms.
    pub fn prefix(&mut self, count: usize) -> Result<&[BigInt]> {
        self.ensure(count)?;
        Ok(&self.terms[..count])
    }

    /// Bracket of the number from its first `depth` partial quotients.
    pub fn bracket(&mut self, depth: usize) -> Result<RationalBracket> {
        if depth < 2 {
            return Err(Error::DepthTooSmall(depth));
        }
        bracket_of_terms(self.prefix(depth)?)
    }

    /// Bracket of the tail `[a_m; a_{m+1}, ...]` from `depth` of its terms.
    pub fn tail_bracket(&mut self, m: usize, depth: usize) -> Result<RationalBracket> {
        if depth < 2 {
            return Err(Error::DepthTooSmall(depth));
        }
        self.ensure(m + depth)?;
        bracket_of_terms(&self.terms[m..m + depth])
    }
}

/// Rolling window of the convergent recurrence at index `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergentState {
    pub m: usize,
    pub p: BigInt,
    pub p_prev: BigInt,
    pub q: BigInt,
    pub q_prev: BigInt,
}

impl ConvergentState {
    /// State at m = 0: p_0 = a0, q_0 = 1, with p_{-1} = 1, q_{-1} = 0.
    pub fn initial(a0: BigInt) -> Self {
        ConvergentState {
            m: 0,
            p: a0,
            p_prev: BigInt::one(),
            q: BigInt::one(),
            q_prev: BigInt::zero(),
        }
    }

    /// `p_m q_{m-1} - p_{m-1} q_m`, which equals `(-1)^(m-1)`.
    pub fn determinant(&self) -> BigInt {
        &self.p * &self.q_prev - &self.p_prev * &self.q
    }

    pub fn expected_determinant(&self) -> BigInt {
        if self.m.is_multiple_of(2) {
            -BigInt::one()
        } else {
            BigInt::one()
        }
    }

    pub fn value(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }

    pub fn advance(&mut self, a: &BigInt) -> Result<()> {
        if a < &BigInt::one() {
            return Err(Error::InvalidQuotient {
                index: self.m + 1,
                value: a.clone(),
            });
        }
        let p = a * &self.p + &self.p_prev;
        let q = a * &self.q + &self.q_prev;
        self.p_prev = std::mem::replace(&mut self.p, p);
        self.q_prev = std::mem::replace(&mut self.q, q);
        self.m += 1;
        Ok(())
    }
}

/// One step of the convergent recurrence with partial quotient `a >= 1`.
pub fn next_convergent(state: &ConvergentState, a: &BigInt) -> Result<ConvergentState> {
    let mut next = state.clone();
    next.advance(a)?;
    Ok(next)
}

/// All convergent states for the given terms (`terms[0]` is a0).
pub fn convergents_of(terms: &[BigInt]) -> Result<Vec<ConvergentState>> {
    let Some(a0) = terms.first() else {
        return Ok(Vec::new());
    };
    let mut state = ConvergentState::initial(a0.clone());
    let mut out = Vec::with_capacity(terms.len());
    out.push(state.clone());
    for a in &terms[1..] {
        state.advance(a)?;
        out.push(state.clone());
    }
    Ok(out)
}

fn bracket_of_terms(terms: &[BigInt]) -> Result<RationalBracket> {
    let states = convergents_of(terms)?;
    let n = states.len();
    Ok(RationalBracket::new(
        states[n - 2].value(),
        states[n - 1].value(),
    ))
}

/// Closed interval `[lo, hi]` with exact rational ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalBracket {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RationalBracket {
    /// Builds the bracket with the two ends in either order.
    pub fn new(a: BigRational, b: BigRational) -> Self {
        if a <= b {
            RationalBracket { lo: a, hi: b }
        } else {
            RationalBracket { lo: b, hi: a }
        }
    }

    pub fn point(x: BigRational) -> Self {
        RationalBracket {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_bracket(&self, inner: &RationalBracket) -> bool {
        self.lo <= inner.lo && inner.hi <= self.hi
    }

    pub fn overlaps(&self, other: &RationalBracket) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Strict order of two disjoint brackets, `None` while they overlap.
    pub fn separation(&self, other: &RationalBracket) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if other.hi < self.lo {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigInt::from(2)
    }

    pub fn scale(&self, factor: &BigInt) -> RationalBracket {
        let f = BigRational::from_integer(factor.clone());
        RationalBracket::new(&self.lo * &f, &self.hi * &f)
    }

    /// Bracket of `||x||`, the distance to the nearest integer, for x in self.
    pub fn nearest_integer_distance(&self) -> RationalBracket {
        let dist = |x: &BigRational| {
            let frac = x - x.floor();
            let other = BigRational::one() - &frac;
            if frac <= other {
                frac
            } else {
                other
            }
        };
        let (dlo, dhi) = (dist(&self.lo), dist(&self.hi));
        let (small, large) = if dlo <= dhi { (dlo, dhi) } else { (dhi, dlo) };
        let floor_lo = self.lo.floor();
        if self.hi.floor() != floor_lo {
            // Straddles an integer: the distance can reach zero.
            let upper = if self.width() >= BigRational::one() {
                BigRational::new(BigInt::one(), BigInt::from(2))
            } else {
                large
            };
            return RationalBracket::new(BigRational::zero(), upper);
        }
        let half = &floor_lo + BigRational::new(BigInt::one(), BigInt::from(2));
        if self.lo < half && half < self.hi {
            RationalBracket::new(small, BigRational::new(BigInt::one(), BigInt::from(2)))
        } else {
            RationalBracket::new(small, large)
        }
    }

    pub fn to_f64_mid(&self) -> f64 {
        rational_to_f64(&self.midpoint())
    }
}

pub(crate) fn rational_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or_else(|| {
        if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            0.0
        }
    })
}

impl fmt::Display for RationalBracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Serialize for RationalBracket {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("RationalBracket", 2)?;
        st.serialize_field("lo", &self.lo.to_string())?;
        st.serialize_field("hi", &self.hi.to_string())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for RationalBracket {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            lo: String,
            hi: String,
        }
        let raw = Raw::deserialize(d)?;
        let lo = raw.lo.parse().map_err(serde::de::Error::custom)?;
        let hi = raw.hi.parse().map_err(serde::de::Error::custom)?;
        Ok(RationalBracket::new(lo, hi))
    }
}

/// Bracket of the number from its first `depth >= 2` partial quotients.
pub fn bracket(source: &QuotientSource, depth: usize) -> Result<RationalBracket> {
    Expansion::new(source.clone()).bracket(depth)
}

/// Bracket of the tail `[a_m; a_{m+1}, ...]` from `depth >= 2` terms.
pub fn tail_bracket(source: &QuotientSource, m: usize, depth: usize) -> Result<RationalBracket> {
    Expansion::new(source.clone()).tail_bracket(m, depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn q_values(src: QuotientSource, count: usize) -> Vec<i64> {
        let mut exp = Expansion::new(src);
        convergents_of(exp.prefix(count).unwrap())
            .unwrap()
            .iter()
            .map(|s| i64::try_from(&s.q).unwrap())
            .collect()
    }

    #[test]
    fn golden_denominators_are_fibonacci() {
        assert_eq!(q_values(QuotientSource::golden(), 7), vec![1, 1, 2, 3, 5, 8, 13]);
    }

    #[test]
    fn sqrt2_convergents() {
        let mut exp = Expansion::new(QuotientSource::sqrt2());
        let states = convergents_of(exp.prefix(4).unwrap()).unwrap();
        let values: Vec<_> = states.iter().map(|s| s.value()).collect();
        assert_eq!(values, vec![rat(1, 1), rat(3, 2), rat(7, 5), rat(17, 12)]);
        // 17*5 - 7*12 = 1
        assert_eq!(states[3].determinant(), BigInt::one());
        assert_eq!(states[3].determinant(), states[3].expected_determinant());
    }

    #[test]
    fn next_convergent_rejects_zero_quotient() {
        let s = ConvergentState::initial(BigInt::one());
        assert!(matches!(
            next_convergent(&s, &BigInt::zero()),
            Err(Error::InvalidQuotient { .. })
        ));
    }

    #[test]
    fn golden_bracket_depth_four() {
        let b = bracket(&QuotientSource::golden(), 4).unwrap();
        assert_eq!(b.lo, rat(3, 2));
        assert_eq!(b.hi, rat(5, 3));
    }

    #[test]
    fn sqrt2_bracket_depth_three() {
        let b = bracket(&QuotientSource::sqrt2(), 3).unwrap();
        assert_eq!(b.width(), rat(1, 10));
        assert!(b.contains(&rat(141_421, 100_000)));
    }

    #[test]
    fn depth_below_two_rejected() {
        assert!(matches!(
            bracket(&QuotientSource::golden(), 1),
            Err(Error::DepthTooSmall(1))
        ));
    }

    #[test]
    fn explicit_source_exhausts() {
        let src: QuotientSource = "explicit:[0;1,2,3]".parse().unwrap();
        assert!(bracket(&src, 4).is_ok());
        assert!(matches!(
            bracket(&src, 5),
            Err(Error::SourceExhausted { available: 4, .. })
        ));
    }

    #[test]
    fn tail_brackets_sit_in_unit_cells() {
        let one = rat(1, 1);
        let two = rat(2, 1);
        let three = rat(3, 1);
        for m in 0..6 {
            let b = tail_bracket(&QuotientSource::golden(), m, 8).unwrap();
            assert!(b.lo >= one && b.hi <= two);
        }
        for m in 1..6 {
            let b = tail_bracket(&QuotientSource::sqrt2(), m, 8).unwrap();
            assert!(b.lo >= two && b.hi <= three);
        }
        let b = tail_bracket(&QuotientSource::e(), 2, 8).unwrap();
        assert!(b.lo >= two && b.hi <= three);
    }

    #[test]
    fn e_rule_terms() {
        let mut exp = Expansion::new(QuotientSource::e());
        let terms: Vec<i64> = exp
            .prefix(9)
            .unwrap()
            .iter()
            .map(|a| i64::try_from(a).unwrap())
            .collect();
        assert_eq!(terms, vec![2, 1, 2, 1, 1, 4, 1, 1, 6]);
    }

    #[test]
    fn seeded_is_deterministic_and_bounded() {
        let mut a = Expansion::new(QuotientSource::seeded(7, 5).unwrap());
        let mut b = Expansion::new(QuotientSource::seeded(7, 5).unwrap());
        let ta = a.prefix(200).unwrap().to_vec();
        assert_eq!(ta, b.prefix(200).unwrap());
        assert!(ta[1..]
            .iter()
            .all(|x| *x >= BigInt::one() && *x <= BigInt::from(5)));
    }

    #[test]
    fn spec_strings_round_trip() {
        for spec in [
            "periodic:[1;|1]",
            "periodic:[1;|2]",
            "periodic:[0;3,4|1,2]",
            "explicit:[0;1,2,3]",
            "explicit:[5]",
            "rule:e",
            "rule:const:3",
            "seeded:42:9",
        ] {
            let src: QuotientSource = spec.parse().unwrap();
            assert_eq!(src.to_string(), spec);
        }
    }

    #[test]
    fn bad_specs_rejected() {
        for spec in [
            "periodic:[1;|]",
            "periodic:[1;0|1]",
            "explicit:[1;2,0]",
            "rule:pi",
            "seeded:1:0",
            "nonsense",
            "periodic:1;|1",
        ] {
            assert!(spec.parse::<QuotientSource>().is_err(), "{spec}");
        }
    }

    #[test]
    fn nearest_integer_distance_cases() {
        let b = RationalBracket::new(rat(13, 10), rat(14, 10));
        assert_eq!(b.nearest_integer_distance(), RationalBracket::new(rat(3, 10), rat(4, 10)));
        let b = RationalBracket::new(rat(17, 10), rat(18, 10));
        assert_eq!(b.nearest_integer_distance(), RationalBracket::new(rat(2, 10), rat(3, 10)));
        let b = RationalBracket::new(rat(4, 10), rat(6, 10));
        assert_eq!(b.nearest_integer_distance(), RationalBracket::new(rat(4, 10), rat(1, 2)));
        let b = RationalBracket::new(rat(9, 10), rat(11, 10));
        assert_eq!(b.nearest_integer_distance(), RationalBracket::new(rat(0, 1), rat(1, 10)));
    }
}
