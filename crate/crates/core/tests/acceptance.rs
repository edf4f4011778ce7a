//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::HashSet;
use std::panic;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use psi_order_core::cf::{ConvergentState, Expansion, QuotientSource};
use psi_order_core::dynamics::{
    distinct_vectors, ChangeTrace, Dynamics, FunctionTuple, JumpEvent, OrderVector, TraceEntry,
    TraceOptions,
};
use psi_order_core::io::{write_trace, RunConfig};
use psi_order_core::psi::{brute_force_staircase, PsiFunction};
use psi_order_core::synth::{extremal_schedule, synthesize, triple_pattern_schedule, JumpSchedule};
use psi_order_core::triangle::{
    apply_pi, canonical_order, canonical_predecessor, cycle_decomposition, TriangularIndex,
};
use psi_order_core::verify::{
    check_lemma2, check_lemma3, find_lemma3_pattern, preimage, project, sign_changes,
    verify_structure, ItemStatus,
};
use psi_order_core::Error;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure!(took < limit, "{what} took {took:.2?}, limit {limit:?}");
    Ok(took)
}

fn pow_order(k: usize) -> Result<usize, String> {
    let start: Vec<usize> = (0..k * (k + 1) / 2).collect();
    let mut v = start.clone();
    for j in 1..=4 * k {
        v = apply_pi(k, &v).map_err(|e| e.to_string())?;
        if v == start {
            return Ok(j);
        }
    }
    Err(format!("no return to identity within {} steps for k = {k}", 4 * k))
}

fn c1_pi_structure() -> Outcome {
    let start = Instant::now();
    for k in 2..=16 {
        let order = pow_order(k)?;
        ensure!(order == k, "k = {k}: first return after {order} steps");
        let cycles = cycle_decomposition(k).map_err(|e| e.to_string())?.len();
        let want = if k % 2 == 1 { k.div_ceil(2) } else { k / 2 + 1 };
        ensure!(cycles == want, "k = {k}: {cycles} cycles, want {want}");
    }
    let took = within(start, Duration::from_secs(1), "pi checks")?;
    Ok(format!("k = 2..16 in {took:.2?}"))
}

fn pairs(v: &[(usize, usize)]) -> Vec<TriangularIndex> {
    v.iter().map(|&(j, l)| TriangularIndex::new(j, l)).collect()
}

fn c2_example_fidelity() -> Outcome {
    let listing = pairs(&[
        (1, 1), (1, 5), (1, 4), (1, 3), (1, 2), (2, 2), (2, 5), (2, 4),
        (2, 3), (3, 3), (3, 5), (3, 4), (4, 4), (4, 5), (5, 5),
    ]);
    ensure!(canonical_order(5) == listing, "k = 5 enumeration differs");
    let image = pairs(&[
        (2, 2), (1, 2), (2, 5), (2, 4), (2, 3), (3, 3), (1, 3), (3, 5),
        (3, 4), (4, 4), (1, 4), (4, 5), (5, 5), (1, 5), (1, 1),
    ]);
    let got = apply_pi(5, &listing).map_err(|e| e.to_string())?;
    ensure!(got == image, "pi(u) for k = 5 is {got:?}");
    for k in 3..=12 {
        let w = canonical_predecessor(k).map_err(|e| e.to_string())?;
        let pw = apply_pi(k, &w).map_err(|e| e.to_string())?;
        ensure!(pw == canonical_order(k), "k = {k}: pi(w) is not the canonical listing");
    }
    Ok("k = 5 mapping verbatim; predecessor for k = 3..12".into())
}

fn c3_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let t_max = 10_000u64;
    let width = BigRational::new(BigInt::one(), big(10).pow(12));
    let mut checked = 0;
    for source in [QuotientSource::golden(), QuotientSource::sqrt2(), QuotientSource::e()] {
        let oracle = brute_force_staircase(&source, t_max, &width, t_max).map_err(|e| e.to_string())?;
        let mut f = PsiFunction::new("f", source.clone());
        let q2 = f.denominator(2).map_err(|e| e.to_string())?.clone();
        let q2 = u64::try_from(&q2).map_err(|e| e.to_string())?;
        for t in q2..=t_max {
            let lib = f.psi_at(&BigInt::from(t), &width).map_err(|e| e.to_string())?;
            let orc = &oracle[(t - 1) as usize];
            ensure!(lib.bracket.width() <= width, "{source} t = {t}: library bracket too wide");
            ensure!(orc.width() <= width, "{source} t = {t}: oracle bracket too wide");
            ensure!(lib.bracket.overlaps(orc), "{source} t = {t}: {} vs {orc}", lib.bracket);
            checked += 1;
        }
    }
    let took = within(start, Duration::from_secs(30), "oracle comparison")?;
    Ok(format!("{checked} points in {took:.2?}"))
}

/// `[lo, hi]` around `alpha` from an independent run of the convergent recurrence.
fn alpha_bracket(source: &QuotientSource, depth: usize) -> (BigRational, BigRational) {
    let mut exp = Expansion::new(source.clone());
    let terms = exp.prefix(depth + 2).expect("infinite source").to_vec();
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (terms[0].clone(), BigInt::one());
    let mut prev = (p1.clone(), q1.clone());
    for a in &terms[1..] {
        prev = (p1.clone(), q1.clone());
        let p2 = a * &p1 + &p0;
        let q2 = a * &q1 + &q0;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    let x = BigRational::new(prev.0, prev.1);
    let y = BigRational::new(p1, q1);
    if x < y {
        (x, y)
    } else {
        (y, x)
    }
}

fn dist_bracket(lo: &BigRational, hi: &BigRational, t: u64) -> Option<(BigRational, BigRational)> {
    let t = BigRational::from_integer(BigInt::from(t));
    let (a, b) = (lo * &t, hi * &t);
    let n = a.floor();
    if b.floor() != n {
        return None;
    }
    let half = BigRational::new(BigInt::one(), big(2));
    let (fa, fb) = (&a - &n, &b - &n);
    if fb <= half {
        Some((fa, fb))
    } else if fa >= half {
        let one = BigRational::one();
        Some((&one - &fb, &one - &fa))
    } else {
        None
    }
}

fn c4_staircase_invariants() -> Outcome {
    let t_max = 5_000u64;
    let sources = [
        QuotientSource::golden(),
        QuotientSource::sqrt2(),
        QuotientSource::e(),
        QuotientSource::seeded(1, 10).map_err(|e| e.to_string())?,
        QuotientSource::seeded(2, 50).map_err(|e| e.to_string())?,
    ];
    let width = psi_order_core::psi::width_for_bits(60);
    for source in &sources {
        let (lo, hi) = alpha_bracket(source, 40);
        let mut f = PsiFunction::new("f", source.clone());
        let q2 = u64::try_from(f.denominator(2).map_err(|e| e.to_string())?).unwrap_or(u64::MAX);
        let mut min: Option<(BigRational, BigRational)> = None;
        let mut prev_lib = f.psi_at(&big(1), &width).map_err(|e| e.to_string())?.bracket;
        for t in 1..=t_max {
            let d = dist_bracket(&lo, &hi, t).ok_or(format!("{source} t = {t}: oracle bracket too coarse"))?;
            if let Some((mlo, mhi)) = &min {
                let down = d.1 < *mlo;
                let flat = d.0 > *mhi;
                ensure!(down || flat, "{source} t = {t}: oracle cannot separate");
                let tb = BigInt::from(t);
                if t >= q2 {
                    let jump = f.jumps_at(&tb).map_err(|e| e.to_string())?;
                    ensure!(down == jump, "{source} t = {t}: decrease {down}, denominator {jump}");
                }
                let lib = f.psi_at(&tb, &width).map_err(|e| e.to_string())?.bracket;
                ensure!(lib.lo <= prev_lib.hi, "{source} t = {t}: library staircase increases");
                if down && t >= q2 {
                    ensure!(lib.hi < prev_lib.lo, "{source} t = {t}: library misses a strict decrease");
                }
                prev_lib = lib;
                if down {
                    min = Some(d);
                }
            } else {
                min = Some(d);
            }
        }
        let mut exp = Expansion::new(source.clone());
        let mut state = ConvergentState::initial(exp.term(0).map_err(|e| e.to_string())?.clone());
        for m in 1..=500 {
            let a = exp.term(m).map_err(|e| e.to_string())?.clone();
            state.advance(&a).map_err(|e| e.to_string())?;
            let det = &state.p * &state.q_prev - &state.p_prev * &state.q;
            let want = if (m - 1) % 2 == 0 { big(1) } else { big(-1) };
            ensure!(det == want, "{source}: determinant at m = {m} is {det}");
        }
    }
    Ok(format!("{} sources to t = {t_max}; determinant to depth 500", sources.len()))
}

const PINNED_CHANGES: [u64; 22] = [
    8, 12, 21, 29, 55, 70, 89, 169, 233, 408, 610, 985, 1597, 2378, 4181, 5741, 10946, 13860,
    17711, 33461, 46368, 80782,
];

fn c5_pair_dynamics() -> Outcome {
    let (g, s) = (QuotientSource::golden(), QuotientSource::sqrt2());
    let tuple = FunctionTuple::from_sources(vec![g.clone(), s.clone()]).map_err(|e| e.to_string())?;
    let opts = TraceOptions {
        count: usize::MAX,
        max_events: Some(200),
        ..TraceOptions::default()
    };
    let trace = Dynamics::new(tuple).change_trace(&big(1), &opts).map_err(|e| e.to_string())?;
    let dv = distinct_vectors(&trace);
    ensure!(dv.vectors.len() == 2, "{} distinct vectors", dv.vectors.len());
    ensure!(dv.vectors[0].0.reversed() == dv.vectors[1].0, "vectors are not mutually reversed");
    for w in trace.events.windows(2) {
        ensure!(w[0].v != w[1].v, "no alternation at t = {}", w[1].t);
    }
    let early: Vec<u64> = trace.events[1..]
        .iter()
        .filter(|e| e.t <= big(100_000))
        .map(|e| u64::try_from(&e.t).expect("small"))
        .collect();
    ensure!(early == PINNED_CHANGES, "change moments up to 1e5: {early:?}");
    let horizon = trace.last_t().cloned().unwrap_or_else(BigInt::one);
    let flips = sign_changes((&g, &s), &horizon, 64).map_err(|e| e.to_string())?;
    ensure!(flips >= 1, "no sign change");
    Ok(format!("{} changes over 200 events, sign changes {flips}", trace.changes()))
}

fn horizon_after(a: &QuotientSource, b: &QuotientSource, events: usize) -> Result<BigInt, Error> {
    let mut d = Dynamics::new(FunctionTuple::from_sources(vec![a.clone(), b.clone()])?);
    let mut t = BigInt::zero();
    for _ in 0..events {
        t = d.next_event_after(&t)?.t;
    }
    Ok(t)
}

fn c6_lemma2_scan() -> Outcome {
    let (g, s) = (QuotientSource::golden(), QuotientSource::sqrt2());
    let h = horizon_after(&g, &s, 100).map_err(|e| e.to_string())?;
    let pair = check_lemma2((&g, &s), &h, 64).map_err(|e| e.to_string())?;
    ensure!(pair.violations == 0, "golden/sqrt2 violation: {pair:?}");
    let mut vacuous = 0;
    for i in 0..20u64 {
        let a = QuotientSource::seeded(2 * i + 1, 10).map_err(|e| e.to_string())?;
        let b = QuotientSource::seeded(2 * i + 2, 10).map_err(|e| e.to_string())?;
        let h = horizon_after(&a, &b, 100).map_err(|e| e.to_string())?;
        match check_lemma2((&a, &b), &h, 64) {
            Ok(r) => ensure!(r.violations == 0, "seeded pair {i}: {r:?}"),
            Err(Error::HypothesisNotMet(_)) => vacuous += 1,
            Err(e) => return Err(e.to_string()),
        }
    }
    let ev = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let schedule = JumpSchedule::new(vec![
        ev(&["a", "b"]), ev(&["a"]), ev(&["b"]), ev(&["a", "b"]), ev(&["b"]),
        ev(&["a"]), ev(&["a", "b"]), ev(&["a"]), ev(&["a", "b"]),
    ])
    .map_err(|e| e.to_string())?;
    let syn = synthesize(&schedule, 1_000_000).map_err(|e| e.to_string())?;
    let last = syn.denominators.last().expect("events");
    let r = check_lemma2((syn.source("a").unwrap(), syn.source("b").unwrap()), last, 64)
        .map_err(|e| e.to_string())?;
    ensure!(r.applicable() >= 1, "synthesized pair never meets the hypothesis");
    ensure!(r.violations == 0, "synthesized pair violation: {r:?}");
    Ok(format!(
        "golden/sqrt2 {} applicable; {vacuous}/20 seeded pairs share no denominator; synthesized pair {} applicable",
        pair.applicable(),
        r.applicable()
    ))
}

fn c7_lemma3_instances() -> Outcome {
    let start = Instant::now();
    let mut seen = HashSet::new();
    for i in 0..6i64 {
        let mut schedule = triple_pattern_schedule("a", "b", "c");
        schedule.prefixes.insert("a".into(), vec![0, 1 + i]);
        schedule.prefixes.insert("b".into(), vec![0, 2 + 2 * i]);
        schedule.prefixes.insert("c".into(), vec![0, 1, 1 + i]);
        let r = synthesize(&schedule, 1_000_000).map_err(|e| e.to_string())?;
        r.replay().map_err(|e| e.to_string())?;
        let (a, b, c) = (r.source("a").unwrap(), r.source("b").unwrap(), r.source("c").unwrap());
        let m = r.index_at(1, "a").expect("a at event 1");
        let s = r.index_at(1, "b").expect("b at event 1");
        let l = r.index_at(2, "c").expect("c at event 2");
        let found = find_lemma3_pattern((a, b, c), &r.certificates[0].q).map_err(|e| e.to_string())?;
        ensure!(found.is_some(), "instance {i}: pattern search missed it");
        let report = check_lemma3((a, b, c), m, s, l, 64).map_err(|e| e.to_string())?;
        ensure!(report.holds, "instance {i}: eta_(s+1) > xi_(m+1) not certified");
        seen.insert((a.to_string(), b.to_string(), c.to_string()));
    }
    ensure!(seen.len() >= 5, "only {} distinct triples", seen.len());
    let took = within(start, Duration::from_secs(10), "triple synthesis")?;
    Ok(format!("{} distinct triples certified in {took:.2?}", seen.len()))
}

fn c8_projection() -> Outcome {
    ensure!(project(&[1, 2, 3, 4], &[3, 4]).unwrap() == vec![3, 4], "pr(1,2,3,4)");
    ensure!(project(&[4, 1, 2, 3], &[3, 4]).unwrap() == vec![4, 3], "pr(4,1,2,3)");
    let vs = vec![vec![1, 2, 3, 4], vec![3, 2, 4, 1], vec![4, 1, 2, 3]];
    ensure!(preimage(&[3, 4], &vs, &[3, 4]) == vec![&vs[0], &vs[1]], "preimage of (3,4)");
    ensure!(preimage(&[4, 3], &vs, &[3, 4]) == vec![&vs[2]], "preimage of (4,3)");

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for inst in 0..1000 {
        let n = rng.gen_range(2..=6usize);
        let base: Vec<usize> = (1..=n).collect();
        let mut vset: Vec<Vec<usize>> = Vec::new();
        for _ in 0..rng.gen_range(1..=12) {
            let mut v = base.clone();
            v.shuffle(&mut rng);
            if !vset.contains(&v) {
                vset.push(v);
            }
        }
        let subset: Vec<usize> = base.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        let subset = if subset.is_empty() { vec![base[0]] } else { subset };
        let mut total = 0;
        for u in permutations(&subset) {
            let pre = preimage(&u, &vset, &subset);
            for v in &pre {
                ensure!(project(v, &subset).unwrap() == u, "instance {inst}: member projects elsewhere");
            }
            total += pre.len();
        }
        ensure!(total == vset.len(), "instance {inst}: preimages overlap or miss vectors");
    }
    Ok("worked example exact; 1000 random instances disjoint".into())
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

fn mock_entry(t: i64, v: [&str; 3], jumping: &[&str]) -> TraceEntry {
    TraceEntry {
        t: big(t),
        v: OrderVector(v.iter().map(|s| s.to_string()).collect()),
        jumping: jumping.iter().map(|s| s.to_string()).collect(),
        quiet: Vec::<JumpEvent>::new(),
    }
}

/// Labels A = psi_11, B = psi_12, C = psi_22 for the k = 2, n = 3 case.
fn k2_mock() -> ChangeTrace {
    let mut entries = vec![mock_entry(100, ["A", "B", "C"], &[])];
    for i in 1..=8i64 {
        let t = 100 + 37 * i;
        if i % 2 == 1 {
            entries.push(mock_entry(t, ["C", "B", "A"], &["A", "B"]));
        } else {
            entries.push(mock_entry(t, ["A", "B", "C"], &["C", "B"]));
        }
    }
    ChangeTrace::from_entries(&["A", "B", "C"], entries).expect("valid mock")
}

fn witnesses(trace: &ChangeTrace) -> Result<Vec<(String, usize, usize)>, String> {
    let report = verify_structure(trace, 2).map_err(|e| e.to_string())?;
    Ok(report
        .items
        .iter()
        .filter_map(|r| match &r.status {
            ItemStatus::Fail { witness } => Some((
                r.item.clone(),
                witness.index + 1 - witness.vectors.len(),
                witness.index,
            )),
            _ => None,
        })
        .collect())
}

fn c9_verifier_mocks() -> Outcome {
    let clean = k2_mock();
    let report = verify_structure(&clean, 2).map_err(|e| e.to_string())?;
    ensure!(report.all_pass(), "clean mock: {:?}", report.items);
    let mut cases = 0;
    for i in 0..clean.events.len() {
        let mut bad = clean.clone();
        bad.events[i].v.0.swap(0, 1);
        let fails = witnesses(&bad)?;
        ensure!(!fails.is_empty(), "vector corruption at {i} undetected");
        for (item, from, to) in &fails {
            ensure!(*from <= i && i <= *to, "vector corruption at {i}: item {item} points at {from}..={to}");
        }
        cases += 1;
    }
    for i in 1..clean.events.len() {
        for label in ["A", "B", "C"] {
            let mut bad = clean.clone();
            let j = &mut bad.events[i].jumping;
            match j.iter().position(|x| x == label) {
                Some(p) => {
                    j.remove(p);
                }
                None => j.push(label.to_string()),
            }
            let fails = witnesses(&bad)?;
            ensure!(!fails.is_empty(), "jump corruption {label} at {i} undetected");
            for (item, _, to) in &fails {
                ensure!(*to == i, "jump corruption {label} at {i}: item {item} points at {to}");
            }
            cases += 1;
        }
    }
    Ok(format!("clean mock passes; {cases} corruptions caught with matching witnesses"))
}

/// Denominators from the quotient list by the plain recurrence.
fn replay_denominators(quotients: &[BigInt]) -> Vec<BigInt> {
    let (mut q_prev, mut q) = (BigInt::zero(), BigInt::one());
    let mut out = vec![q.clone()];
    for a in &quotients[1..] {
        let next = a * &q + &q_prev;
        q_prev = std::mem::replace(&mut q, next);
        out.push(q.clone());
    }
    out
}

fn c10_synth_exactness() -> Outcome {
    let schedule = extremal_schedule(3, 4).map_err(|e| e.to_string())?;
    ensure!(schedule.events.iter().all(|e| e.len() == 3), "an event lacks 3 labels");
    let r = synthesize(&schedule, 1_000_000).map_err(|e| e.to_string())?;
    ensure!(r.tuple.len() == 6, "tuple has {} members", r.tuple.len());
    ensure!(r.denominators.len() == 12, "{} events realized", r.denominators.len());
    let mut checked = 0;
    for (q, labels) in r.denominators.iter().zip(&schedule.events) {
        for label in labels {
            let QuotientSource::Periodic { preperiod, period } = r.source(label).unwrap() else {
                return Err(format!("{label} is not periodic"));
            };
            ensure!(
                preperiod[1..].iter().chain(period).all(|a| a >= &BigInt::one()),
                "{label} has a quotient below 1"
            );
            let dens = replay_denominators(preperiod);
            ensure!(dens.contains(q), "{label} never reaches {q}");
            checked += 1;
        }
    }
    ensure!(r.denominators.windows(2).all(|w| w[0] < w[1]), "event times not increasing");
    ensure!(r.denominators.iter().all(|q| q.is_positive()), "nonpositive event");
    Ok(format!("{checked} coincidences replayed over 12 events"))
}

fn c11_reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let make = || RunConfig {
        sources: vec!["periodic:[1;|1]".into(), "rule:e".into()],
        random: 2,
        seed: 99,
        count: 12,
        ..RunConfig::default()
    };
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    write_trace(&a, &make().trace().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    write_trace(&b, &make().trace().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    ensure!(x == y, "trace files differ");
    Ok(format!("{} identical bytes", x.len()))
}

fn main() {
    let criteria: [(&str, Check); 11] = [
        ("pi order and cycle counts", c1_pi_structure),
        ("example fidelity", c2_example_fidelity),
        ("psi oracle equivalence", c3_oracle_equivalence),
        ("staircase invariants", c4_staircase_invariants),
        ("pair dynamics", c5_pair_dynamics),
        ("shared-jump scan", c6_lemma2_scan),
        ("three-function pattern", c7_lemma3_instances),
        ("projection fidelity", c8_projection),
        ("verifier on mocks", c9_verifier_mocks),
        ("synthesizer exactness", c10_synth_exactness),
        ("reproducibility", c11_reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(check).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
