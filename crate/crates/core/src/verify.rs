//! Projections onto sub-collections and finite-horizon checks of the
//! structural claims about change traces.
//!
//! A passing report only means "consistent up to the horizon".

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::cf::QuotientSource;
use crate::dynamics::{ChangeTrace, Dynamics, FunctionTuple, OrderVector, TraceOptions};
use crate::error::{Error, Result};
use crate::psi::{compare_psi, compare_steps, PsiFunction, StrictOrder};
use crate::serde_util::bigint_str;
use crate::triangle::{inverse_index, triangle_len, TrianglePermutation};
use crate::Label;

/// Entries of `v` that belong to `subset`, in the order they appear in `v`.
pub fn project<T: PartialEq + Clone + fmt::Display>(v: &[T], subset: &[T]) -> Result<Vec<T>> {
    for x in subset {
        if !v.contains(x) {
            return Err(Error::UnknownLabel(x.to_string()));
        }
    }
    Ok(v.iter().filter(|x| subset.contains(x)).cloned().collect())
}

/// Members of `vectors` whose projection onto `subset` equals `u`.
pub fn preimage<'a, T: PartialEq + Clone + fmt::Display>(
    u: &[T],
    vectors: &'a [Vec<T>],
    subset: &[T],
) -> Vec<&'a Vec<T>> {
    vectors
        .iter()
        .filter(|v| project(v, subset).is_ok_and(|p| p == u))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// Index into the trace.
    pub index: usize,
    #[serde(with = "bigint_str")]
    pub t: BigInt,
    pub vectors: Vec<OrderVector>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ItemStatus {
    Pass,
    Fail { witness: Witness },
    Inconclusive { reason: String },
}

impl ItemStatus {
    pub fn is_pass(&self) -> bool {
        matches!(self, ItemStatus::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, ItemStatus::Fail { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemReport {
    pub item: String,
    #[serde(flatten)]
    pub status: ItemStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationEntry {
    pub label: Label,
    pub j: usize,
    pub l: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub k: usize,
    pub n: usize,
    /// Last time covered by the trace.
    #[serde(with = "bigint_str")]
    pub horizon: BigInt,
    pub trace_len: usize,
    /// Trace index whose order vector was read as the canonical listing.
    pub offset: usize,
    pub enumeration: Vec<EnumerationEntry>,
    pub items: Vec<ItemReport>,
    pub warnings: Vec<String>,
}

pub const ITEM_NAMES: [&str; 6] = ["i", "ii", "iii", "iv", "v", "vi"];

impl VerificationReport {
    pub fn item(&self, name: &str) -> Option<&ItemStatus> {
        self.items.iter().find(|r| r.item == name).map(|r| &r.status)
    }

    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|r| r.status.is_pass())
    }

    pub fn failures(&self) -> usize {
        self.items.iter().filter(|r| r.status.is_fail()).count()
    }

    /// A pass of (vi) forces a pass of (ii) whenever `pi` has order `k`.
    pub fn is_consistent(&self) -> bool {
        !(self.item("vi").is_some_and(ItemStatus::is_pass)
            && self.item("ii").is_some_and(ItemStatus::is_fail))
    }

    fn undecided(k: usize, n: usize, reason: String) -> Self {
        VerificationReport {
            k,
            n,
            horizon: BigInt::one(),
            trace_len: 0,
            offset: 0,
            enumeration: Vec::new(),
            items: ITEM_NAMES
                .iter()
                .map(|name| ItemReport {
                    item: name.to_string(),
                    status: ItemStatus::Inconclusive {
                        reason: reason.clone(),
                    },
                })
                .collect(),
            warnings: Vec::new(),
        }
    }
}

struct Checker<'a> {
    trace: &'a ChangeTrace,
    k: usize,
    offset: usize,
    /// Label -> (j, l) read from `v(t_offset)`.
    roles: Option<HashMap<&'a str, (usize, usize)>>,
}

impl<'a> Checker<'a> {
    fn residue(&self, i: usize) -> usize {
        let r = (i + self.k - self.offset % self.k) % self.k;
        if r == 0 {
            self.k
        } else {
            r
        }
    }

    fn fail(&self, index: usize, from: usize, detail: String) -> ItemStatus {
        let e = &self.trace.events;
        ItemStatus::Fail {
            witness: Witness {
                index,
                t: e[index].t.clone(),
                vectors: e[from..=index].iter().map(|x| x.v.clone()).collect(),
                detail,
            },
        }
    }

    fn short(&self, need: usize) -> Option<ItemStatus> {
        (self.trace.events.len() < need).then(|| ItemStatus::Inconclusive {
            reason: format!("trace has {} entries, need {need}", self.trace.events.len()),
        })
    }

    fn no_roles() -> ItemStatus {
        ItemStatus::Inconclusive {
            reason: "enumeration unavailable: n != k(k+1)/2".into(),
        }
    }

    fn item_i(&self) -> ItemStatus {
        if let Some(s) = self.short(2) {
            return s;
        }
        for (i, e) in self.trace.events.iter().enumerate().skip(1) {
            if e.jumping.len() != self.k {
                return self.fail(i, i, format!("tau = {}", e.jumping.len()));
            }
        }
        ItemStatus::Pass
    }

    fn item_ii(&self) -> ItemStatus {
        if let Some(s) = self.short(self.k + 1) {
            return s;
        }
        let e = &self.trace.events;
        for i in self.k..e.len() {
            if e[i].v != e[i - self.k].v {
                return self.fail(i, i - self.k, format!("v(t_{i}) != v(t_{})", i - self.k));
            }
        }
        ItemStatus::Pass
    }

    /// Jumps at change moments follow the residues encoded in each label's pair.
    fn item_schedule(&self, diagonal: bool) -> ItemStatus {
        let Some(roles) = &self.roles else {
            return Self::no_roles();
        };
        if let Some(s) = self.short(2) {
            return s;
        }
        let mut labels: Vec<(&str, (usize, usize))> = roles
            .iter()
            .filter(|(_, &(j, l))| (j == l) == diagonal)
            .map(|(&lab, &jl)| (lab, jl))
            .collect();
        labels.sort();
        for (i, e) in self.trace.events.iter().enumerate().skip(1) {
            let d = self.residue(i);
            for &(lab, (a, b)) in &labels {
                let expected = a == d || b == d;
                let jumped = e.jumping.iter().any(|x| x == lab);
                if expected != jumped {
                    let what = if jumped { "jumped" } else { "did not jump" };
                    return self.fail(i, i, format!("{lab} (u_{{{a},{b}}}) {what}"));
                }
                if !diagonal {
                    if let Some(q) = e.quiet.iter().find(|q| q.jumping.iter().any(|x| x == lab)) {
                        return self.fail(i, i - 1, format!("{lab} jumped at {} between change moments", q.t));
                    }
                }
            }
        }
        ItemStatus::Pass
    }

    fn item_v(&self) -> ItemStatus {
        if let Some(s) = self.short(2) {
            return s;
        }
        let e = &self.trace.events;
        for i in 1..e.len() {
            let prev = e[i - 1].v.labels();
            let top: HashSet<&str> = prev.iter().take(self.k).map(String::as_str).collect();
            let jumping: HashSet<&str> = e[i].jumping.iter().map(String::as_str).collect();
            if top != jumping {
                return self.fail(i, i - 1, "jumping set differs from the k largest".into());
            }
            if let Some(roles) = &self.roles {
                let d = self.residue(i);
                let first = prev[0].as_str();
                if roles.get(first) != Some(&(d, d)) {
                    return self.fail(i, i - 1, format!("largest at t_{} is {first}, not u_{{{d},{d}}}", i - 1));
                }
            }
        }
        ItemStatus::Pass
    }

    fn item_vi(&self, pi: Option<&TrianglePermutation>) -> ItemStatus {
        let Some(pi) = pi else {
            return Self::no_roles();
        };
        if let Some(s) = self.short(2) {
            return s;
        }
        let e = &self.trace.events;
        for i in 1..e.len() {
            match pi.apply(e[i - 1].v.labels()) {
                Ok(next) if next == e[i].v.0 => {}
                _ => return self.fail(i, i - 1, format!("v(t_{i}) != pi(v(t_{}))", i - 1)),
            }
        }
        ItemStatus::Pass
    }

    fn run(&self, pi: Option<&TrianglePermutation>) -> Vec<ItemReport> {
        let statuses = [
            self.item_i(),
            self.item_ii(),
            self.item_schedule(true),
            self.item_schedule(false),
            self.item_v(),
            self.item_vi(pi),
        ];
        ITEM_NAMES
            .iter()
            .zip(statuses)
            .map(|(name, status)| ItemReport {
                item: name.to_string(),
                status,
            })
            .collect()
    }
}

/// Check items (i)-(vi) against `trace`, trying every cyclic offset for the
/// enumeration and keeping the one with the fewest failures.
pub fn verify_structure(trace: &ChangeTrace, k: usize) -> Result<VerificationReport> {
    if k < 2 {
        return Err(Error::InvalidK { k, min: 2 });
    }
    let first = trace
        .events
        .first()
        .ok_or_else(|| Error::EnumerationInferenceFailed("empty trace".into()))?;
    let n = first.v.len();
    let mut warnings = Vec::new();
    if trace.events.len() < 2 * k + 1 {
        warnings.push(format!(
            "trace has {} entries, fewer than 2k+1 = {}",
            trace.events.len(),
            2 * k + 1
        ));
    }
    let castable = n == triangle_len(k);
    if !castable {
        warnings.push(format!("n = {n} differs from k(k+1)/2 = {}", triangle_len(k)));
    }
    let pi = if castable {
        Some(TrianglePermutation::new(k)?)
    } else {
        None
    };

    let offsets = if castable { k.min(trace.events.len()) } else { 1 };
    let mut best: Option<(usize, Vec<ItemReport>, Vec<EnumerationEntry>)> = None;
    for offset in 0..offsets {
        let v = &trace.events[offset].v;
        if v.len() != n {
            return Err(Error::EnumerationInferenceFailed(format!(
                "order vector at index {offset} has length {}",
                v.len()
            )));
        }
        let (roles, enumeration) = if castable {
            let mut roles = HashMap::new();
            let mut enumeration = Vec::new();
            for (p, label) in v.labels().iter().enumerate() {
                let idx = inverse_index(k, p + 1)?;
                if roles.insert(label.as_str(), (idx.j, idx.l)).is_some() {
                    return Err(Error::EnumerationInferenceFailed(format!("label {label} repeats")));
                }
                enumeration.push(EnumerationEntry {
                    label: label.clone(),
                    j: idx.j,
                    l: idx.l,
                });
            }
            (Some(roles), enumeration)
        } else {
            (None, Vec::new())
        };
        let checker = Checker {
            trace,
            k,
            offset,
            roles,
        };
        let items = checker.run(pi.as_ref());
        let fails = items.iter().filter(|r| r.status.is_fail()).count();
        if best.as_ref().is_none_or(|(_, b, _)| fails < b.iter().filter(|r| r.status.is_fail()).count()) {
            best = Some((offset, items, enumeration));
        }
    }
    let (offset, items, enumeration) = best.expect("at least one offset");
    let report = VerificationReport {
        k,
        n,
        horizon: trace.last_t().cloned().unwrap_or_else(BigInt::one),
        trace_len: trace.events.len(),
        offset,
        enumeration,
        items,
        warnings,
    };
    debug_assert!(report.is_consistent());
    Ok(report)
}

/// Build the trace and verify it; an undecided comparison makes every item inconclusive.
pub fn verify_tuple(
    tuple: &FunctionTuple,
    k: usize,
    t0: &BigInt,
    opts: &TraceOptions,
) -> Result<(Option<ChangeTrace>, VerificationReport)> {
    match Dynamics::new(tuple.clone()).change_trace(t0, opts) {
        Ok(trace) => {
            let report = verify_structure(&trace, k)?;
            Ok((Some(trace), report))
        }
        Err(e @ Error::ComparisonUndecided { .. }) => {
            Ok((None, VerificationReport::undecided(k, tuple.len(), e.to_string())))
        }
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma2Instance {
    /// Which member plays the role whose denominators are `q`.
    pub alpha: Label,
    pub m: usize,
    #[serde(with = "bigint_str")]
    pub q_m: BigInt,
    #[serde(with = "bigint_str")]
    pub shared: BigInt,
    /// Whether `psi_alpha < psi_beta` just before the shared jump.
    pub premise: bool,
    /// Whether `psi_alpha > psi_beta` just before `q_m`; only meaningful with the premise.
    pub conclusion: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma2Report {
    pub instances: Vec<Lemma2Instance>,
    pub violations: usize,
}

impl Lemma2Report {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn applicable(&self) -> usize {
        self.instances.iter().filter(|i| i.premise).count()
    }
}

fn lemma2_roles(
    a: &mut PsiFunction,
    b: &mut PsiFunction,
    horizon: &BigInt,
    depth_limit: usize,
    out: &mut Vec<Lemma2Instance>,
) -> Result<()> {
    let two = BigInt::from(2);
    let mut m = 0;
    loop {
        let q_next = a.denominator(m + 1)?.clone();
        if &q_next > horizon {
            return Ok(());
        }
        let q_m = a.denominator(m)?.clone();
        if q_m >= two && q_next > q_m && b.jumps_at(&q_next)? {
            let before_shared = &q_next - 1;
            let premise =
                compare_psi(a, b, &before_shared, depth_limit)?.ordering == StrictOrder::Less;
            let conclusion = if premise {
                compare_psi(a, b, &(&q_m - 1), depth_limit)?.ordering == StrictOrder::Greater
            } else {
                false
            };
            out.push(Lemma2Instance {
                alpha: a.label().to_string(),
                m,
                q_m,
                shared: q_next,
                premise,
                conclusion,
            });
        }
        m += 1;
    }
}

/// Scan shared denominators up to `horizon` in both role orders.
pub fn check_lemma2(
    pair: (&QuotientSource, &QuotientSource),
    horizon: &BigInt,
    depth_limit: usize,
) -> Result<Lemma2Report> {
    let mut a = PsiFunction::new("alpha", pair.0.clone());
    let mut b = PsiFunction::new("beta", pair.1.clone());
    let mut instances = Vec::new();
    lemma2_roles(&mut a, &mut b, horizon, depth_limit, &mut instances)?;
    lemma2_roles(&mut b, &mut a, horizon, depth_limit, &mut instances)?;
    if instances.is_empty() {
        return Err(Error::HypothesisNotMet(format!(
            "no shared denominator past the first up to {horizon}"
        )));
    }
    let violations = instances.iter().filter(|i| i.premise && !i.conclusion).count();
    Ok(Lemma2Report {
        instances,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma3Report {
    pub m: usize,
    pub s: usize,
    pub l: usize,
    /// `h_{s+1}` and `h_{s+2}`: the interval on which the comparison is claimed.
    #[serde(with = "bigint_str")]
    pub from: BigInt,
    #[serde(with = "bigint_str")]
    pub until: BigInt,
    /// Whether `psi_beta > psi_alpha` there, certified.
    pub holds: bool,
    pub depth: usize,
}

fn coincidences(
    a: &mut PsiFunction,
    b: &mut PsiFunction,
    c: &mut PsiFunction,
    m: usize,
    s: usize,
    l: usize,
) -> Result<Vec<(String, BigInt, BigInt)>> {
    let mut pairs = Vec::new();
    let mut add = |name: &str, x: BigInt, y: BigInt| pairs.push((name.to_string(), x, y));
    add("q_m = h_s", a.denominator(m)?.clone(), b.denominator(s)?.clone());
    add("q_{m+1} = r_l", a.denominator(m + 1)?.clone(), c.denominator(l)?.clone());
    add("r_{l+1} = h_{s+1}", c.denominator(l + 1)?.clone(), b.denominator(s + 1)?.clone());
    add("q_{m+2} = h_{s+2}", a.denominator(m + 2)?.clone(), b.denominator(s + 2)?.clone());
    add("q_{m+3} = r_{l+2}", a.denominator(m + 3)?.clone(), c.denominator(l + 2)?.clone());
    add("r_{l+3} = h_{s+3}", c.denominator(l + 3)?.clone(), b.denominator(s + 3)?.clone());
    Ok(pairs)
}

/// Verify the six coincidences exactly, then certify `psi_beta > psi_alpha`
/// on `[h_{s+1}, h_{s+2})`.
pub fn check_lemma3(
    triple: (&QuotientSource, &QuotientSource, &QuotientSource),
    m: usize,
    s: usize,
    l: usize,
    depth_limit: usize,
) -> Result<Lemma3Report> {
    let mut a = PsiFunction::new("alpha", triple.0.clone());
    let mut b = PsiFunction::new("beta", triple.1.clone());
    let mut c = PsiFunction::new("gamma", triple.2.clone());
    for (name, x, y) in coincidences(&mut a, &mut b, &mut c, m, s, l)? {
        if x != y {
            return Err(Error::PatternMismatch(format!("{name} fails: {x} != {y}")));
        }
    }
    let from = b.denominator(s + 1)?.clone();
    let until = b.denominator(s + 2)?.clone();
    let verdict = compare_steps(&mut b, s + 1, &mut a, m + 1, depth_limit, &from)?;
    Ok(Lemma3Report {
        m,
        s,
        l,
        from,
        until,
        holds: verdict.ordering == StrictOrder::Greater,
        depth: verdict.depth,
    })
}

/// First index triple `(m, s, l)` with all six coincidences and `q_m <= horizon`.
pub fn find_lemma3_pattern(
    triple: (&QuotientSource, &QuotientSource, &QuotientSource),
    horizon: &BigInt,
) -> Result<Option<(usize, usize, usize)>> {
    let mut a = PsiFunction::new("alpha", triple.0.clone());
    let mut b = PsiFunction::new("beta", triple.1.clone());
    let mut c = PsiFunction::new("gamma", triple.2.clone());
    let mut m = 0;
    while a.denominator(m)? <= horizon {
        let q_m = a.denominator(m)?.clone();
        let q_m1 = a.denominator(m + 1)?.clone();
        let mut s = 0;
        while b.denominator(s)? <= &q_m {
            if b.denominator(s)? == &q_m {
                let mut l = 0;
                while c.denominator(l)? <= &q_m1 {
                    if c.denominator(l)? == &q_m1
                        && coincidences(&mut a, &mut b, &mut c, m, s, l)?
                            .iter()
                            .all(|(_, x, y)| x == y)
                    {
                        return Ok(Some((m, s, l)));
                    }
                    l += 1;
                }
            }
            s += 1;
        }
        m += 1;
    }
    Ok(None)
}

/// Certified sign reversals of `psi_alpha - psi_beta` at change moments up to `horizon`.
pub fn sign_changes(
    pair: (&QuotientSource, &QuotientSource),
    horizon: &BigInt,
    depth_limit: usize,
) -> Result<usize> {
    let tuple = FunctionTuple::new(vec![
        ("alpha".into(), pair.0.clone()),
        ("beta".into(), pair.1.clone()),
    ])?;
    let opts = TraceOptions {
        count: usize::MAX,
        depth_limit,
        horizon: Some(horizon.clone()),
        ..TraceOptions::default()
    };
    let trace = Dynamics::new(tuple).change_trace(&BigInt::one(), &opts)?;
    Ok(trace.changes())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub n: usize,
    pub k_lower: usize,
    pub capacity: usize,
    pub consistent: bool,
    pub message: String,
}

/// Compare `n` with `k(k+1)/2` for the observed lower bound on `k`.
pub fn bound_check(n: usize, k_lower: usize) -> BoundCheck {
    let capacity = triangle_len(k_lower);
    let consistent = n <= capacity;
    let message = if consistent {
        format!("consistent so far: n = {n} <= {capacity}")
    } else {
        format!("n = {n} > {capacity}: would violate the bound if k = {k_lower} were final")
    };
    BoundCheck {
        n,
        k_lower,
        capacity,
        consistent,
        message,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::TraceEntry;

    fn ov(v: &[&str]) -> OrderVector {
        OrderVector(v.iter().map(|s| s.to_string()).collect())
    }

    fn entry(t: i64, v: &[&str], jumping: &[&str]) -> TraceEntry {
        TraceEntry {
            t: BigInt::from(t),
            v: ov(v),
            jumping: jumping.iter().map(|s| s.to_string()).collect(),
            quiet: Vec::new(),
        }
    }

    fn k2_mock(cycles: usize) -> ChangeTrace {
        let mut entries = vec![entry(10, &["A", "B", "C"], &[])];
        for i in 1..=2 * cycles {
            let t = 10 + 10 * i as i64;
            if i % 2 == 1 {
                entries.push(entry(t, &["C", "B", "A"], &["A", "B"]));
            } else {
                entries.push(entry(t, &["A", "B", "C"], &["C", "B"]));
            }
        }
        ChangeTrace::from_entries(&["A", "B", "C"], entries).unwrap()
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project(&[1, 2, 3, 4], &[3, 4]).unwrap(), vec![3, 4]);
        assert_eq!(project(&[4, 1, 2, 3], &[3, 4]).unwrap(), vec![4, 3]);
        assert_eq!(project(&[4, 1, 2, 3], &[1, 2, 3, 4]).unwrap(), vec![4, 1, 2, 3]);
        assert!(matches!(project(&[1, 2], &[5]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn preimage_examples() {
        let vs = vec![vec![1, 2, 3, 4], vec![3, 2, 4, 1], vec![4, 1, 2, 3]];
        assert_eq!(preimage(&[3, 4], &vs, &[3, 4]), vec![&vs[0], &vs[1]]);
        assert_eq!(preimage(&[4, 3], &vs, &[3, 4]), vec![&vs[2]]);
        assert!(preimage(&[1, 9], &vs, &[1, 9]).is_empty());
    }

    #[test]
    fn k2_mock_passes_everything() {
        let report = verify_structure(&k2_mock(3), 2).unwrap();
        assert!(report.all_pass(), "{report:#?}");
        assert_eq!(report.offset, 0);
        assert!(report.warnings.is_empty());
        let roles: Vec<_> = report.enumeration.iter().map(|e| (e.label.as_str(), e.j, e.l)).collect();
        assert_eq!(roles, vec![("A", 1, 1), ("B", 1, 2), ("C", 2, 2)]);
    }

    #[test]
    fn mid_cycle_start_finds_offset() {
        let mut trace = k2_mock(3);
        trace.events.remove(0);
        let report = verify_structure(&trace, 2).unwrap();
        assert!(report.all_pass(), "{report:#?}");
    }

    #[test]
    fn wrong_tau_fails_item_i() {
        let mut trace = k2_mock(3);
        trace.events[3].jumping.push("A".into());
        let report = verify_structure(&trace, 2).unwrap();
        match report.item("i").unwrap() {
            ItemStatus::Fail { witness } => assert_eq!(witness.t, BigInt::from(40)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn periodic_without_pi_fails_vi_only_there() {
        // Period 2 but the swap is not pi.
        let mut entries = vec![entry(10, &["A", "B", "C"], &[])];
        for i in 1..=6 {
            let t = 10 + 10 * i as i64;
            if i % 2 == 1 {
                entries.push(entry(t, &["B", "A", "C"], &["A", "B"]));
            } else {
                entries.push(entry(t, &["A", "B", "C"], &["A", "B"]));
            }
        }
        let trace = ChangeTrace::from_entries(&["A", "B", "C"], entries).unwrap();
        let report = verify_structure(&trace, 2).unwrap();
        assert!(report.item("ii").unwrap().is_pass());
        assert!(report.item("vi").unwrap().is_fail());
        assert!(report.is_consistent());
    }

    #[test]
    fn quiet_jump_fails_item_iv() {
        let mut trace = k2_mock(3);
        trace.events[2].quiet.push(crate::dynamics::JumpEvent {
            t: BigInt::from(25),
            jumping: vec!["B".into()],
        });
        let report = verify_structure(&trace, 2).unwrap();
        assert!(report.item("iv").unwrap().is_fail());
        assert!(report.item("iii").unwrap().is_pass());
    }

    #[test]
    fn size_mismatch_warns_and_defers() {
        let entries = vec![entry(1, &["A", "B"], &[]), entry(2, &["B", "A"], &["A", "B"])];
        let trace = ChangeTrace::from_entries(&["A", "B"], entries).unwrap();
        let report = verify_structure(&trace, 2).unwrap();
        assert!(!report.warnings.is_empty());
        assert!(matches!(report.item("vi"), Some(ItemStatus::Inconclusive { .. })));
        assert!(report.item("i").unwrap().is_pass());
    }

    #[test]
    fn undecided_comparison_is_inconclusive() {
        let tuple = FunctionTuple::new(vec![
            ("a".into(), QuotientSource::golden()),
            ("b".into(), QuotientSource::golden()),
            ("c".into(), QuotientSource::sqrt2()),
        ])
        .unwrap();
        let opts = TraceOptions {
            count: 4,
            depth_limit: 8,
            ..TraceOptions::default()
        };
        let (trace, report) = verify_tuple(&tuple, 2, &BigInt::one(), &opts).unwrap();
        assert!(trace.is_none());
        assert!(report
            .items
            .iter()
            .all(|r| matches!(r.status, ItemStatus::Inconclusive { .. })));
    }

    #[test]
    fn lemma2_on_golden_and_sqrt2() {
        let r = check_lemma2(
            (&QuotientSource::golden(), &QuotientSource::sqrt2()),
            &BigInt::from(100_000),
            64,
        )
        .unwrap();
        assert!(!r.instances.is_empty());
        assert!(r.passed(), "{r:#?}");
    }

    #[test]
    fn lemma2_without_shared_denominators() {
        // Denominators 1, 3, 10, 33, ... and 1, 4, 17, 72, ...
        let a = QuotientSource::periodic(&[0], &[3]).unwrap();
        let b = QuotientSource::periodic(&[0], &[4]).unwrap();
        assert!(matches!(
            check_lemma2((&a, &b), &BigInt::from(1000), 64),
            Err(Error::HypothesisNotMet(_))
        ));
    }

    #[test]
    fn lemma3_rejects_random_triple() {
        let g = QuotientSource::golden();
        let s = QuotientSource::sqrt2();
        let e = QuotientSource::e();
        assert!(matches!(
            check_lemma3((&g, &s, &e), 3, 3, 3, 64),
            Err(Error::PatternMismatch(_))
        ));
        assert_eq!(find_lemma3_pattern((&g, &s, &e), &BigInt::from(10_000)).unwrap(), None);
    }

    #[test]
    fn sign_changes_monotone() {
        let g = QuotientSource::golden();
        let s = QuotientSource::sqrt2();
        let small = sign_changes((&g, &s), &BigInt::from(100), 64).unwrap();
        let large = sign_changes((&g, &s), &BigInt::from(10_000), 64).unwrap();
        assert!(large >= small);
        assert!(large >= 1);
    }

    #[test]
    fn bounds() {
        assert!(bound_check(6, 3).consistent);
        assert!(!bound_check(7, 3).consistent);
        assert!(bound_check(3, 2).consistent);
    }

    #[test]
    fn report_json_shape() {
        let report = verify_structure(&k2_mock(2), 2).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["items"][0]["item"], "i");
        assert_eq!(json["items"][0]["status"], "pass");
        let back: VerificationReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, report);
    }
}
