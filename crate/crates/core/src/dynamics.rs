//! Jump events of a tuple, order vectors and moments of permutation change.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::cf::{QuotientSource, SEEDED_PRNG};
use crate::error::{Error, Result};
use crate::psi::{compare_steps, PsiFunction, StrictOrder, DEFAULT_DEPTH_LIMIT};
use crate::serde_util::{bigint_str, opt_bigint_str};
use crate::Label;

pub const TOOL_VERSION: &str = concat!("psi-order ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    pub label: Label,
    pub source: QuotientSource,
}

/// Ordered list of labelled sources.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Member>", into = "Vec<Member>")]
pub struct FunctionTuple {
    members: Vec<Member>,
}

impl FunctionTuple {
    pub fn new(members: Vec<(Label, QuotientSource)>) -> Result<Self> {
        Self::try_from(
            members
                .into_iter()
                .map(|(label, source)| Member { label, source })
                .collect::<Vec<_>>(),
        )
    }

    /// Labels `f1, f2, ...` in order.
    pub fn from_sources(sources: Vec<QuotientSource>) -> Result<Self> {
        Self::new(
            sources
                .into_iter()
                .enumerate()
                .map(|(i, s)| (format!("f{}", i + 1), s))
                .collect(),
        )
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn labels(&self) -> Vec<Label> {
        self.members.iter().map(|m| m.label.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl TryFrom<Vec<Member>> for FunctionTuple {
    type Error = Error;

    fn try_from(members: Vec<Member>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyTuple);
        }
        let mut seen = HashSet::new();
        for m in &members {
            if !seen.insert(m.label.as_str()) {
                return Err(Error::DuplicateLabel(m.label.clone()));
            }
        }
        Ok(FunctionTuple { members })
    }
}

impl From<FunctionTuple> for Vec<Member> {
    fn from(t: FunctionTuple) -> Self {
        t.members
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JumpEvent {
    #[serde(with = "bigint_str")]
    pub t: BigInt,
    pub jumping: Vec<Label>,
}

/// Labels listed by strictly decreasing `psi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrderVector(pub Vec<Label>);

impl OrderVector {
    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reversed(&self) -> OrderVector {
        OrderVector(self.0.iter().rev().cloned().collect())
    }
}

impl fmt::Display for OrderVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    #[serde(with = "bigint_str")]
    pub t: BigInt,
    pub v: OrderVector,
    pub jumping: Vec<Label>,
    /// Jumps strictly between the previous entry and this one that left the
    /// order vector unchanged.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quiet: Vec<JumpEvent>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub tool: String,
    pub members: FunctionTuple,
    #[serde(with = "bigint_str")]
    pub t0_requested: BigInt,
    #[serde(with = "bigint_str")]
    pub t0: BigInt,
    pub count: usize,
    pub depth_limit: usize,
    #[serde(default, with = "opt_bigint_str")]
    pub horizon: Option<BigInt>,
    #[serde(default)]
    pub max_events: Option<usize>,
    pub prng: String,
    #[serde(default)]
    pub seed: u64,
}

/// Moments of permutation change starting from `t0`; `events[0]` is `t0` itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeTrace {
    pub header: TraceHeader,
    pub events: Vec<TraceEntry>,
}

impl ChangeTrace {
    /// A trace from explicit entries, e.g. a hand-built mock.
    pub fn from_entries(labels: &[&str], entries: Vec<TraceEntry>) -> Result<Self> {
        let members = FunctionTuple::new(
            labels
                .iter()
                .map(|l| (l.to_string(), QuotientSource::golden()))
                .collect(),
        )?;
        let t0 = entries.first().map_or_else(BigInt::one, |e| e.t.clone());
        Ok(ChangeTrace {
            header: TraceHeader {
                tool: TOOL_VERSION.to_string(),
                members,
                t0_requested: t0.clone(),
                t0,
                count: entries.len().saturating_sub(1),
                depth_limit: DEFAULT_DEPTH_LIMIT,
                horizon: None,
                max_events: None,
                prng: SEEDED_PRNG.to_string(),
                seed: 0,
            },
            events: entries,
        })
    }

    pub fn n(&self) -> usize {
        self.header.members.len()
    }

    /// Number of change moments after `t0`.
    pub fn changes(&self) -> usize {
        self.events.len().saturating_sub(1)
    }

    pub fn last_t(&self) -> Option<&BigInt> {
        self.events.last().map(|e| &e.t)
    }
}

#[derive(Clone, Debug)]
pub struct TraceOptions {
    /// Stop after this many change moments.
    pub count: usize,
    pub depth_limit: usize,
    /// Ignore events beyond this time.
    pub horizon: Option<BigInt>,
    /// Stop after this many merged events past `t0`.
    pub max_events: Option<usize>,
    /// Recorded in the header.
    pub seed: u64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            count: 20,
            depth_limit: DEFAULT_DEPTH_LIMIT,
            horizon: None,
            max_events: None,
            seed: 0,
        }
    }
}

/// Distinct order vectors of a trace with their multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinctVectors {
    pub vectors: Vec<(OrderVector, usize)>,
}

impl DistinctVectors {
    /// Observed count; only a lower bound for the number of vectors that recur forever.
    pub fn k_lower_bound(&self) -> usize {
        self.vectors.len()
    }
}

fn pair_mut<T>(v: &mut [T], i: usize, j: usize) -> (&mut T, &mut T) {
    assert_ne!(i, j);
    if i < j {
        let (a, b) = v.split_at_mut(j);
        (&mut a[i], &mut b[0])
    } else {
        let (a, b) = v.split_at_mut(i);
        (&mut b[0], &mut a[j])
    }
}

/// Live evaluation state for a tuple.
#[derive(Clone, Debug)]
pub struct Dynamics {
    tuple: FunctionTuple,
    fns: Vec<PsiFunction>,
}

impl Dynamics {
    pub fn new(tuple: FunctionTuple) -> Self {
        let fns = tuple
            .members()
            .iter()
            .map(|m| PsiFunction::new(m.label.clone(), m.source.clone()))
            .collect();
        Dynamics { tuple, fns }
    }

    pub fn tuple(&self) -> &FunctionTuple {
        &self.tuple
    }

    pub fn function_mut(&mut self, label: &str) -> Result<&mut PsiFunction> {
        self.fns
            .iter_mut()
            .find(|f| f.label() == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn functions_mut(&mut self) -> &mut [PsiFunction] {
        &mut self.fns
    }

    /// Largest second denominator `q_2` over members.
    pub fn warmup_time(&mut self) -> Result<BigInt> {
        let mut best = BigInt::one();
        for f in &mut self.fns {
            let q2 = f.denominator(2)?;
            if q2 > &best {
                best = q2.clone();
            }
        }
        Ok(best)
    }

    /// Number of members with a convergent denominator equal to `t`.
    pub fn tau_at(&mut self, t: &BigInt) -> Result<usize> {
        let mut count = 0;
        for f in &mut self.fns {
            if f.jumps_at(t)? {
                count += 1;
            }
        }
        Ok(count)
    }

    pub fn jumping_at(&mut self, t: &BigInt) -> Result<Vec<Label>> {
        let mut out = Vec::new();
        for f in &mut self.fns {
            if f.jumps_at(t)? {
                out.push(f.label().to_string());
            }
        }
        Ok(out)
    }

    /// The first jump strictly after `t`.
    pub fn next_event_after(&mut self, t: &BigInt) -> Result<JumpEvent> {
        let mut best: Option<BigInt> = None;
        let mut jumping = Vec::new();
        for f in &mut self.fns {
            let next = f.next_denominator_after(t)?;
            match &best {
                Some(b) if &next > b => {}
                Some(b) if &next == b => jumping.push(f.label().to_string()),
                _ => {
                    best = Some(next);
                    jumping = vec![f.label().to_string()];
                }
            }
        }
        let t = best.ok_or(Error::EmptyTuple)?;
        Ok(JumpEvent { t, jumping })
    }

    /// Merged jump events up to `horizon`, coinciding denominators in one event.
    pub fn build_events(&mut self, horizon: &BigInt) -> Result<Vec<JumpEvent>> {
        let mut out = Vec::new();
        let mut t = BigInt::from(0);
        loop {
            let ev = self.next_event_after(&t)?;
            if &ev.t > horizon {
                return Ok(out);
            }
            t = ev.t.clone();
            out.push(ev);
        }
    }

    /// Labels ordered by strictly decreasing `psi(t)`, every comparison certified.
    pub fn order_vector_at(&mut self, t: &BigInt, depth_limit: usize) -> Result<OrderVector> {
        let mut steps = Vec::with_capacity(self.fns.len());
        for f in &mut self.fns {
            steps.push(f.level_at(t)?);
        }
        let mut sorted: Vec<usize> = Vec::with_capacity(self.fns.len());
        for idx in 0..self.fns.len() {
            // Binary insertion: `sorted` is decreasing in psi.
            let (mut lo, mut hi) = (0, sorted.len());
            while lo < hi {
                let mid = (lo + hi) / 2;
                let other = sorted[mid];
                let (f, g) = pair_mut(&mut self.fns, idx, other);
                let verdict = compare_steps(f, steps[idx], g, steps[other], depth_limit, t)?;
                if verdict.ordering == StrictOrder::Greater {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            sorted.insert(lo, idx);
        }
        Ok(OrderVector(
            sorted
                .into_iter()
                .map(|i| self.fns[i].label().to_string())
                .collect(),
        ))
    }

    /// Moments of permutation change from `t0` (clamped up to the warm-up time).
    pub fn change_trace(&mut self, t0: &BigInt, opts: &TraceOptions) -> Result<ChangeTrace> {
        let warmup = self.warmup_time()?;
        let start = if t0 < &warmup { warmup } else { t0.clone() };
        let mut entries = vec![TraceEntry {
            t: start.clone(),
            v: self.order_vector_at(&start, opts.depth_limit)?,
            jumping: self.jumping_at(&start)?,
            quiet: Vec::new(),
        }];
        let mut t = start.clone();
        let mut quiet = Vec::new();
        let mut seen = 0usize;
        while entries.len() - 1 < opts.count {
            if opts.max_events.is_some_and(|max| seen >= max) {
                break;
            }
            let ev = self.next_event_after(&t)?;
            if opts.horizon.as_ref().is_some_and(|h| &ev.t > h) {
                break;
            }
            seen += 1;
            let v = self.order_vector_at(&ev.t, opts.depth_limit)?;
            t = ev.t.clone();
            if v != entries[entries.len() - 1].v {
                entries.push(TraceEntry {
                    t: ev.t,
                    v,
                    jumping: ev.jumping,
                    quiet: std::mem::take(&mut quiet),
                });
            } else {
                quiet.push(ev);
            }
        }
        Ok(ChangeTrace {
            header: TraceHeader {
                tool: TOOL_VERSION.to_string(),
                members: self.tuple.clone(),
                t0_requested: t0.clone(),
                t0: start,
                count: opts.count,
                depth_limit: opts.depth_limit,
                horizon: opts.horizon.clone(),
                max_events: opts.max_events,
                prng: SEEDED_PRNG.to_string(),
                seed: opts.seed,
            },
            events: entries,
        })
    }
}

pub fn build_events(tuple: &FunctionTuple, horizon: &BigInt) -> Result<Vec<JumpEvent>> {
    Dynamics::new(tuple.clone()).build_events(horizon)
}

pub fn order_vector_at(tuple: &FunctionTuple, t: &BigInt, depth_limit: usize) -> Result<OrderVector> {
    Dynamics::new(tuple.clone()).order_vector_at(t, depth_limit)
}

pub fn change_trace(tuple: &FunctionTuple, t0: &BigInt, opts: &TraceOptions) -> Result<ChangeTrace> {
    Dynamics::new(tuple.clone()).change_trace(t0, opts)
}

pub fn tau_at(tuple: &FunctionTuple, t: &BigInt) -> Result<usize> {
    Dynamics::new(tuple.clone()).tau_at(t)
}

pub fn distinct_vectors(trace: &ChangeTrace) -> DistinctVectors {
    let mut vectors: Vec<(OrderVector, usize)> = Vec::new();
    for e in &trace.events {
        match vectors.iter_mut().find(|(v, _)| v == &e.v) {
            Some((_, c)) => *c += 1,
            None => vectors.push((e.v.clone(), 1)),
        }
    }
    DistinctVectors { vectors }
}
