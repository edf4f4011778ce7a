//! Build tuples whose convergent denominators coincide on a prescribed calendar.
//!
//! A function with denominators `(q_prev, q_cur)` reaches `Q` next exactly when
//! `Q = a*q_cur + q_prev` with `a >= 1`, i.e. `Q ≡ q_prev (mod q_cur)` and
//! `Q >= q_cur + q_prev`. Each event merges these congruences for its labels.
//! Functions only acquire denominators at their scheduled events; after the
//! calendar every function continues with its own constant tail.

use std::collections::{BTreeMap, HashSet};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cf::{convergents_of, QuotientSource};
use crate::dynamics::FunctionTuple;
use crate::error::{Error, Result};
use crate::serde_util::bigint_str;
use crate::triangle::canonical_order;
use crate::Label;

pub const DEFAULT_SEARCH_BOUND: usize = 1_000_000;
/// Candidates tried per event before backtracking further.
const BRANCH_LIMIT: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpSchedule {
    #[serde(default)]
    pub k: usize,
    /// Order of the synthesized tuple; defaults to first appearance in `events`.
    #[serde(default)]
    pub labels: Vec<Label>,
    pub events: Vec<Vec<Label>>,
    /// Leading quotients per label, a0 first; `[0]` when absent.
    #[serde(default)]
    pub prefixes: BTreeMap<Label, Vec<i64>>,
}

pub fn diagonal_label(i: usize, j: usize) -> Label {
    format!("psi_{i}_{j}")
}

/// Calendar where event `e` carries every pair `(i, j)` with `i` or `j` equal to `e mod k`.
pub fn extremal_schedule(k: usize, cycles: usize) -> Result<JumpSchedule> {
    if k < 2 {
        return Err(Error::InvalidK { k, min: 2 });
    }
    if cycles < 1 {
        return Err(Error::InvalidSchedule("cycles must be at least 1".into()));
    }
    let order = canonical_order(k);
    let labels = order.iter().map(|p| diagonal_label(p.j, p.l)).collect();
    let events = (1..=k * cycles)
        .map(|e| {
            let d = (e - 1) % k + 1;
            order
                .iter()
                .filter(|p| p.j == d || p.l == d)
                .map(|p| diagonal_label(p.j, p.l))
                .collect()
        })
        .collect();
    Ok(JumpSchedule {
        k,
        labels,
        events,
        prefixes: BTreeMap::new(),
    })
}

impl JumpSchedule {
    pub fn new(events: Vec<Vec<Label>>) -> Result<Self> {
        let mut s = JumpSchedule {
            k: 0,
            labels: Vec::new(),
            events,
            prefixes: BTreeMap::new(),
        };
        s.normalize()?;
        Ok(s)
    }

    /// Either a preset `extremal:k=<k>:cycles=<c>` or schedule JSON.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.starts_with("extremal:") {
            return text.parse();
        }
        let mut s: JumpSchedule = serde_json::from_str(text)?;
        s.normalize()?;
        Ok(s)
    }

    fn normalize(&mut self) -> Result<()> {
        if self.events.is_empty() {
            return Err(Error::InvalidSchedule("no events".into()));
        }
        let mut order: Vec<Label> = Vec::new();
        for (e, set) in self.events.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::InvalidSchedule(format!("event {} is empty", e + 1)));
            }
            let mut seen = HashSet::new();
            for label in set {
                if !seen.insert(label) {
                    return Err(Error::InvalidSchedule(format!(
                        "event {} lists {label} twice",
                        e + 1
                    )));
                }
                if !order.contains(label) {
                    order.push(label.clone());
                }
            }
        }
        if self.labels.is_empty() {
            self.labels = order;
        } else {
            let declared: HashSet<&Label> = self.labels.iter().collect();
            if declared.len() != self.labels.len() {
                return Err(Error::InvalidSchedule("labels repeat".into()));
            }
            for label in &self.labels {
                if !order.contains(label) {
                    return Err(Error::InvalidSchedule(format!("{label} is in no event")));
                }
            }
            for label in &order {
                if !declared.contains(label) {
                    return Err(Error::UnknownLabel(label.clone()));
                }
            }
        }
        for (label, prefix) in &self.prefixes {
            if !self.labels.contains(label) {
                return Err(Error::UnknownLabel(label.clone()));
            }
            if prefix.is_empty() {
                return Err(Error::InvalidSchedule(format!("prefix of {label} lacks a0")));
            }
            if let Some((i, &a)) = prefix.iter().enumerate().skip(1).find(|(_, &a)| a < 1) {
                return Err(Error::InvalidQuotient {
                    index: i,
                    value: BigInt::from(a),
                });
            }
        }
        Ok(())
    }
}

impl FromStr for JumpSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSchedule(format!("expected extremal:k=<k>:cycles=<c>, got `{s}`"));
        let rest = s.strip_prefix("extremal:").ok_or_else(bad)?;
        let (mut k, mut cycles) = (None, None);
        for part in rest.split(':') {
            let (key, value) = part.split_once('=').ok_or_else(bad)?;
            let value: usize = value.parse().map_err(|_| bad())?;
            match key {
                "k" => k = Some(value),
                "cycles" => cycles = Some(value),
                _ => return Err(bad()),
            }
        }
        extremal_schedule(k.ok_or_else(bad)?, cycles.ok_or_else(bad)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberStep {
    pub label: Label,
    /// Index of the convergent whose denominator is the event time.
    pub m: usize,
    #[serde(with = "bigint_str")]
    pub a: BigInt,
    #[serde(with = "bigint_str")]
    pub q_prev: BigInt,
    #[serde(with = "bigint_str")]
    pub q_cur: BigInt,
}

/// `q` solves `q ≡ residue (mod modulus)`, the merge of every member's congruence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCertificate {
    pub event: usize,
    #[serde(with = "bigint_str")]
    pub q: BigInt,
    #[serde(with = "bigint_str")]
    pub modulus: BigInt,
    #[serde(with = "bigint_str")]
    pub residue: BigInt,
    pub members: Vec<MemberStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub schedule: JumpSchedule,
    pub tuple: FunctionTuple,
    #[serde(with = "crate::serde_util::vec_bigint_str")]
    pub denominators: Vec<BigInt>,
    pub certificates: Vec<EventCertificate>,
    pub nodes: usize,
}

impl SynthesisResult {
    pub fn source(&self, label: &str) -> Result<&QuotientSource> {
        self.tuple
            .members()
            .iter()
            .find(|m| m.label == label)
            .map(|m| &m.source)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Recompute every certified coincidence from the emitted quotients.
    pub fn replay(&self) -> Result<()> {
        for cert in &self.certificates {
            for step in &cert.members {
                let QuotientSource::Periodic { preperiod, .. } = self.source(&step.label)? else {
                    return Err(Error::Format(format!("{} is not periodic", step.label)));
                };
                if step.m >= preperiod.len() {
                    return Err(Error::Format(format!("{} lacks quotient {}", step.label, step.m)));
                }
                let states = convergents_of(&preperiod[..=step.m])?;
                let q = &states[step.m].q;
                if q != &cert.q {
                    return Err(Error::PatternMismatch(format!(
                        "event {}: q_{} of {} is {q}, expected {}",
                        cert.event, step.m, step.label, cert.q
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Merge `x ≡ r1 (mod m1)` with `x ≡ r2 (mod m2)`.
pub fn crt_merge(r1: &BigInt, m1: &BigInt, r2: &BigInt, m2: &BigInt) -> Option<(BigInt, BigInt)> {
    let eg = m1.extended_gcd(m2);
    let g = eg.gcd;
    let diff = r2 - r1;
    if !(&diff % &g).is_zero() {
        return None;
    }
    let lcm = m1 / &g * m2;
    let x = r1 + m1 * (&diff / &g * &eg.x);
    Some((x.mod_floor(&lcm), lcm))
}

fn squarefree_part(mut n: u64) -> u64 {
    let mut out = 1;
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e % 2 == 1 {
            out *= p;
        }
        p += 1;
    }
    out * n
}

/// Constants `c >= 2` whose tails `[c; c, ...]` lie in pairwise distinct quadratic fields.
pub fn tail_constants(count: usize) -> Vec<u64> {
    let mut fields = HashSet::new();
    let mut out = Vec::with_capacity(count);
    let mut c = 2u64;
    while out.len() < count {
        if fields.insert(squarefree_part(c * c + 4)) {
            out.push(c);
        }
        c += 1;
    }
    out
}

#[derive(Clone, Debug)]
struct FnState {
    q_prev: BigInt,
    q_cur: BigInt,
    m: usize,
    quotients: Vec<BigInt>,
}

struct Search<'a> {
    schedule: &'a JumpSchedule,
    index: Vec<Vec<usize>>,
    nodes: usize,
    bound: usize,
    conflict: Option<String>,
}

impl Search<'_> {
    fn note(&mut self, e: usize, msg: String) {
        if self.conflict.is_none() {
            self.conflict = Some(format!("event {}: {msg}", e + 1));
        }
    }

    fn run(
        &mut self,
        e: usize,
        states: &[FnState],
        last_q: &BigInt,
        certs: &mut Vec<EventCertificate>,
    ) -> Result<Option<Vec<FnState>>> {
        if e == self.index.len() {
            return Ok(Some(states.to_vec()));
        }
        let members = self.index[e].clone();
        let mut residue = BigInt::zero();
        let mut modulus = BigInt::one();
        for &f in &members {
            let s = &states[f];
            match crt_merge(&residue, &modulus, &s.q_prev, &s.q_cur) {
                Some((r, m)) => {
                    residue = r;
                    modulus = m;
                }
                None => {
                    let msg = format!(
                        "{} needs Q ≡ {} mod {}, incompatible with the other members",
                        self.schedule.labels[f], s.q_prev, s.q_cur
                    );
                    self.note(e, msg);
                    return Ok(None);
                }
            }
        }
        let mut q_min = last_q + 1u32;
        for s in states {
            q_min = q_min.max(&s.q_cur + 1u32);
        }
        for &f in &members {
            q_min = q_min.max(&states[f].q_cur + &states[f].q_prev);
        }
        let mut q = &q_min + (&residue - &q_min).mod_floor(&modulus);
        for _ in 0..BRANCH_LIMIT {
            self.nodes += 1;
            if self.nodes > self.bound {
                return Err(Error::InfeasibleSchedule(format!(
                    "search bound {} exhausted{}",
                    self.bound,
                    self.conflict
                        .as_ref()
                        .map(|c| format!("; {c}"))
                        .unwrap_or_default()
                )));
            }
            let mut next = states.to_vec();
            let mut steps = Vec::with_capacity(members.len());
            for &f in &members {
                let s = &mut next[f];
                let a = (&q - &s.q_prev) / &s.q_cur;
                if a < BigInt::one() {
                    return Err(Error::QuotientUnderflow {
                        label: self.schedule.labels[f].clone(),
                    });
                }
                steps.push(MemberStep {
                    label: self.schedule.labels[f].clone(),
                    m: s.m + 1,
                    a: a.clone(),
                    q_prev: s.q_prev.clone(),
                    q_cur: s.q_cur.clone(),
                });
                s.q_prev = std::mem::replace(&mut s.q_cur, q.clone());
                s.m += 1;
                s.quotients.push(a);
            }
            certs.push(EventCertificate {
                event: e + 1,
                q: q.clone(),
                modulus: modulus.clone(),
                residue: residue.clone(),
                members: steps,
            });
            if let Some(done) = self.run(e + 1, &next, &q, certs)? {
                return Ok(Some(done));
            }
            certs.pop();
            q += &modulus;
        }
        Ok(None)
    }
}

/// Realize `schedule` with the smallest admissible event times, backtracking
/// over earlier choices when a later event has incompatible congruences.
pub fn synthesize(schedule: &JumpSchedule, search_bound: usize) -> Result<SynthesisResult> {
    if search_bound < 1 {
        return Err(Error::Config("search bound must be at least 1".into()));
    }
    let mut schedule = schedule.clone();
    schedule.normalize()?;
    let pos = |label: &Label| schedule.labels.iter().position(|l| l == label);
    let index: Vec<Vec<usize>> = schedule
        .events
        .iter()
        .map(|set| set.iter().map(|l| pos(l).expect("normalized")).collect())
        .collect();

    let mut states = Vec::with_capacity(schedule.labels.len());
    for label in &schedule.labels {
        let prefix: Vec<BigInt> = schedule
            .prefixes
            .get(label)
            .map_or_else(|| vec![BigInt::zero()], |p| p.iter().map(|&a| BigInt::from(a)).collect());
        let conv = convergents_of(&prefix)?;
        let last = conv.last().expect("prefix holds a0");
        let q_prev = if conv.len() >= 2 {
            conv[conv.len() - 2].q.clone()
        } else {
            BigInt::zero()
        };
        states.push(FnState {
            q_prev,
            q_cur: last.q.clone(),
            m: conv.len() - 1,
            quotients: prefix,
        });
    }

    let mut search = Search {
        schedule: &schedule,
        index,
        nodes: 0,
        bound: search_bound,
        conflict: None,
    };
    let mut certs = Vec::new();
    let done = search.run(0, &states, &BigInt::one(), &mut certs)?;
    let Some(finals) = done else {
        return Err(Error::InfeasibleSchedule(
            search.conflict.unwrap_or_else(|| "no candidate found".into()),
        ));
    };
    let tails = tail_constants(finals.len());
    let mut members = Vec::with_capacity(finals.len());
    for ((label, s), c) in schedule.labels.iter().zip(&finals).zip(tails) {
        let source = QuotientSource::periodic_big(s.quotients.clone(), vec![BigInt::from(c)])?;
        members.push((label.clone(), source));
    }
    let nodes = search.nodes;
    Ok(SynthesisResult {
        denominators: certs.iter().map(|c| c.q.clone()).collect(),
        certificates: certs,
        tuple: FunctionTuple::new(members)?,
        nodes,
        schedule,
    })
}

/// Schedule of the three-function coincidence pattern `{a,b},{a,c},{c,b}` twice.
pub fn triple_pattern_schedule(a: &str, b: &str, c: &str) -> JumpSchedule {
    let ev = |x: &str, y: &str| vec![x.to_string(), y.to_string()];
    JumpSchedule {
        k: 0,
        labels: vec![a.into(), b.into(), c.into()],
        events: vec![ev(a, b), ev(a, c), ev(c, b), ev(a, b), ev(a, c), ev(c, b)],
        prefixes: BTreeMap::new(),
    }
}

impl SynthesisResult {
    /// Index of `label`'s denominator at scheduled event `event` (1-based).
    pub fn index_at(&self, event: usize, label: &str) -> Option<usize> {
        self.certificates
            .get(event.checked_sub(1)?)?
            .members
            .iter()
            .find(|s| s.label == label)
            .map(|s| s.m)
    }
}
