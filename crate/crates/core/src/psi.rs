//! Exact evaluation of irrationality measure functions.
//!
//! `psi(t) = min_{1 <= q <= t} ||q alpha||` is a staircase: on `[q_m, q_{m+1})` it
//! equals `||q_m alpha||`. Values are carried as shrinking rational brackets and
//! comparisons between different staircases are decided by refining both sides
//! until the brackets separate.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cf::{ConvergentState, Expansion, QuotientSource, RationalBracket};
use crate::error::{Error, Result};
use crate::Label;

/// Default refinement budget, in extra partial quotients per side.
pub const DEFAULT_DEPTH_LIMIT: usize = 64;

/// Default cap for the brute-force oracle.
pub const DEFAULT_ORACLE_CAP: u64 = 100_000;

/// `2^-bits`.
pub fn width_for_bits(bits: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << bits as usize)
}

/// `2^-80`.
pub fn default_target_width() -> BigRational {
    width_for_bits(80)
}

/// Refinement depth the first bracket of a level is computed at.
const INITIAL_EXTRA: usize = 1;

/// Bracket for `psi` on one step of the staircase.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproximationError {
    pub label: Label,
    /// Convergent index of the step.
    pub m: usize,
    pub q_m: BigInt,
    pub bracket: RationalBracket,
    /// Partial quotients used beyond `a_{m+1}`.
    pub depth: usize,
}

/// Outcome of a certified strict comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrictOrder {
    Less,
    Greater,
}

impl From<StrictOrder> for Ordering {
    fn from(o: StrictOrder) -> Ordering {
        match o {
            StrictOrder::Less => Ordering::Less,
            StrictOrder::Greater => Ordering::Greater,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    /// `Less` means the first function is strictly smaller.
    pub ordering: StrictOrder,
    pub depth: usize,
}

/// One number's staircase with cached convergents and level brackets.
#[derive(Clone, Debug)]
pub struct PsiFunction {
    label: Label,
    expansion: Expansion,
    states: Vec<ConvergentState>,
    levels: HashMap<usize, (usize, RationalBracket)>,
}

impl PsiFunction {
    pub fn new(label: impl Into<Label>, source: QuotientSource) -> Self {
        PsiFunction {
            label: label.into(),
            expansion: Expansion::new(source),
            states: Vec::new(),
            levels: HashMap::new(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn source(&self) -> &QuotientSource {
        self.expansion.source()
    }

    fn ensure_states(&mut self, count: usize) -> Result<()> {
        if self.states.is_empty() {
            let a0 = self.expansion.term(0)?.clone();
            self.states.push(ConvergentState::initial(a0));
        }
        while self.states.len() < count {
            let m = self.states.len();
            let a = self.expansion.term(m)?.clone();
            let mut next = self.states[m - 1].clone();
            next.advance(&a)?;
            self.states.push(next);
        }
        Ok(())
    }

    pub fn convergent(&mut self, m: usize) -> Result<&ConvergentState> {
        self.ensure_states(m + 1)?;
        Ok(&self.states[m])
    }

    pub fn denominator(&mut self, m: usize) -> Result<&BigInt> {
        Ok(&self.convergent(m)?.q)
    }

    pub fn partial_quotient(&mut self, m: usize) -> Result<&BigInt> {
        self.expansion.term(m)
    }

    /// Extend convergents until some denominator exceeds `t`.
    fn cover(&mut self, t: &BigInt) -> Result<()> {
        self.ensure_states(1)?;
        while &self.states[self.states.len() - 1].q <= t {
            let len = self.states.len();
            self.ensure_states(len + 1)?;
        }
        Ok(())
    }

    /// Largest convergent index `m` with `q_m <= t`.
    pub fn level_at(&mut self, t: &BigInt) -> Result<usize> {
        if t < &BigInt::one() {
            return Err(Error::TimeOutOfRange { t: t.clone() });
        }
        self.cover(t)?;
        let idx = self.states.partition_point(|s| &s.q <= t);
        Ok(idx - 1)
    }

    /// Largest `m` with `q_m == t`, if `t` is a convergent denominator.
    pub fn denominator_index(&mut self, t: &BigInt) -> Result<Option<usize>> {
        let m = self.level_at(t)?;
        Ok((&self.states[m].q == t).then_some(m))
    }

    pub fn jumps_at(&mut self, t: &BigInt) -> Result<bool> {
        if t < &BigInt::one() {
            return Ok(false);
        }
        Ok(self.denominator_index(t)?.is_some())
    }

    /// Smallest denominator strictly greater than `t`.
    pub fn next_denominator_after(&mut self, t: &BigInt) -> Result<BigInt> {
        if t < &BigInt::one() {
            return Ok(BigInt::one());
        }
        let m = self.level_at(t)?;
        Ok(self.states[m + 1].q.clone())
    }

    /// Distinct denominators `<= horizon`, ascending.
    pub fn denominators_upto(&mut self, horizon: &BigInt) -> Result<Vec<BigInt>> {
        let mut out = Vec::new();
        if horizon < &BigInt::one() {
            return Ok(out);
        }
        self.cover(horizon)?;
        for s in &self.states {
            if &s.q > horizon {
                break;
            }
            if out.last() != Some(&s.q) {
                out.push(s.q.clone());
            }
        }
        Ok(out)
    }

    /// Bracket of `||q_m alpha||` from a bracket of alpha built on convergents
    /// `m + extra` and `m + 1 + extra`.
    pub fn level_bracket(&mut self, m: usize, extra: usize) -> Result<RationalBracket> {
        if let Some((cached, b)) = self.levels.get(&m) {
            if *cached >= extra {
                return Ok(b.clone());
            }
        }
        let top = m + 1 + extra.max(1);
        self.ensure_states(top + 1)?;
        let q_m = self.states[m].q.clone();
        let alpha = RationalBracket::new(self.states[top - 1].value(), self.states[top].value());
        let b = alpha.scale(&q_m).nearest_integer_distance();
        self.levels.insert(m, (extra, b.clone()));
        Ok(b)
    }

    fn cached_extra(&self, m: usize) -> usize {
        self.levels.get(&m).map_or(INITIAL_EXTRA, |(e, _)| *e)
    }

    /// Bracket for the step with convergent index `m`, narrowed to `target_width`.
    pub fn step_value(&mut self, m: usize, target_width: &BigRational) -> Result<ApproximationError> {
        let mut extra = self.cached_extra(m);
        let mut b = self.level_bracket(m, extra)?;
        while &b.width() > target_width {
            extra += 1;
            b = self.level_bracket(m, extra)?;
        }
        Ok(ApproximationError {
            label: self.label.clone(),
            m,
            q_m: self.states[m].q.clone(),
            bracket: b,
            depth: extra,
        })
    }

    /// Narrow an existing bracket by one more partial quotient.
    pub fn refine(&mut self, err: &mut ApproximationError) -> Result<()> {
        let extra = err.depth + 1;
        err.bracket = self.level_bracket(err.m, extra)?;
        err.depth = extra;
        Ok(())
    }

    /// `psi(t)` for integer `t >= 1`.
    pub fn psi_at(&mut self, t: &BigInt, target_width: &BigRational) -> Result<ApproximationError> {
        let m = self.level_at(t)?;
        self.step_value(m, target_width)
    }

    /// The step just before the jump at the denominator `t`, i.e. `psi(t - 1)`.
    pub fn psi_left_limit(
        &mut self,
        t: &BigInt,
        target_width: &BigRational,
    ) -> Result<ApproximationError> {
        if t < &BigInt::from(2) || self.denominator_index(t)?.is_none() {
            return Err(Error::NotAJumpPoint {
                label: self.label.clone(),
                t: t.clone(),
            });
        }
        let before = t - 1;
        self.psi_at(&before, target_width)
    }

    /// Perron's expression `1 / (q_m alpha_{m+1} + q_{m-1})` with the tail
    /// bracketed from `depth` of its partial quotients.
    pub fn xi_perron(&mut self, m: usize, depth: usize) -> Result<RationalBracket> {
        self.ensure_states(m + 1)?;
        let q = BigRational::from_integer(self.states[m].q.clone());
        let q_prev = BigRational::from_integer(self.states[m].q_prev.clone());
        let tail = self.expansion.tail_bracket(m + 1, depth)?;
        let one = BigRational::one();
        // Decreasing in the tail value.
        let lo = &one / (&q * &tail.hi + &q_prev);
        let hi = &one / (&q * &tail.lo + &q_prev);
        Ok(RationalBracket::new(lo, hi))
    }
}

/// Decide `f`'s step `mf` against `g`'s step `mg` by alternate refinement.
pub fn compare_steps(
    f: &mut PsiFunction,
    mf: usize,
    g: &mut PsiFunction,
    mg: usize,
    depth_limit: usize,
    t: &BigInt,
) -> Result<ComparisonVerdict> {
    let mut ef = f.cached_extra(mf);
    let mut eg = g.cached_extra(mg);
    loop {
        let bf = f.level_bracket(mf, ef)?;
        let bg = g.level_bracket(mg, eg)?;
        if let Some(ordering) = bf.separation(&bg) {
            return Ok(ComparisonVerdict {
                ordering: if ordering == Ordering::Less {
                    StrictOrder::Less
                } else {
                    StrictOrder::Greater
                },
                depth: ef.max(eg),
            });
        }
        if ef >= depth_limit && eg >= depth_limit {
            return Err(Error::ComparisonUndecided {
                left: f.label.clone(),
                right: g.label.clone(),
                t: t.clone(),
                depth: depth_limit,
            });
        }
        ef = (ef + 1).min(depth_limit.max(ef));
        eg = (eg + 1).min(depth_limit.max(eg));
    }
}

/// Strict comparison of `psi_f(t)` with `psi_g(t)`.
pub fn compare_psi(
    f: &mut PsiFunction,
    g: &mut PsiFunction,
    t: &BigInt,
    depth_limit: usize,
) -> Result<ComparisonVerdict> {
    let mf = f.level_at(t)?;
    let mg = g.level_at(t)?;
    compare_steps(f, mf, g, mg, depth_limit, t)
}

/// `psi(t)` of a source, narrowed to `target_width`.
pub fn psi_at(
    source: &QuotientSource,
    t: &BigInt,
    target_width: &BigRational,
) -> Result<ApproximationError> {
    PsiFunction::new(source.to_string(), source.clone()).psi_at(t, target_width)
}

pub fn psi_left_limit(
    source: &QuotientSource,
    t: &BigInt,
    target_width: &BigRational,
) -> Result<ApproximationError> {
    PsiFunction::new(source.to_string(), source.clone()).psi_left_limit(t, target_width)
}

pub fn xi_perron(source: &QuotientSource, m: usize, depth: usize) -> Result<RationalBracket> {
    PsiFunction::new(source.to_string(), source.clone()).xi_perron(m, depth)
}

/// Independent oracle: `min_{1<=q<=t} ||q alpha||` by direct enumeration.
pub fn brute_force_psi(
    source: &QuotientSource,
    t: u64,
    precision: &BigRational,
    cap: u64,
) -> Result<RationalBracket> {
    let mut all = brute_force_staircase(source, t, precision, cap)?;
    all.pop().ok_or(Error::TimeOutOfRange { t: BigInt::zero() })
}

/// Brute-force `psi(t)` for every `t` in `1..=t_max`; entry `i` is `psi(i + 1)`.
pub fn brute_force_staircase(
    source: &QuotientSource,
    t_max: u64,
    precision: &BigRational,
    cap: u64,
) -> Result<Vec<RationalBracket>> {
    if t_max > cap {
        return Err(Error::CapExceeded {
            t: BigInt::from(t_max),
            cap,
        });
    }
    if t_max == 0 {
        return Err(Error::TimeOutOfRange { t: BigInt::zero() });
    }
    let mut exp = Expansion::new(source.clone());
    let t_big = BigRational::from_integer(BigInt::from(t_max));
    let mut depth = 2;
    let alpha = loop {
        let b = exp.bracket(depth)?;
        if b.width() * &t_big <= *precision {
            break b;
        }
        depth += 1;
    };
    let mut out = Vec::with_capacity(t_max as usize);
    let mut best: Option<RationalBracket> = None;
    for q in 1..=t_max {
        let d = alpha.scale(&BigInt::from(q)).nearest_integer_distance();
        best = Some(match best {
            None => d,
            Some(b) => RationalBracket::new(
                if d.lo < b.lo { d.lo.clone() } else { b.lo },
                if d.hi < b.hi { d.hi } else { b.hi },
            ),
        });
        out.push(best.clone().expect("set above"));
    }
    Ok(out)
}
