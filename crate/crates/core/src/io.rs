//! Run configuration, trace files and staircase CSV.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize};

use crate::cf::QuotientSource;
use crate::dynamics::{ChangeTrace, Dynamics, FunctionTuple, TraceOptions};
use crate::error::{Error, Result};
use crate::psi::{width_for_bits, DEFAULT_DEPTH_LIMIT, DEFAULT_ORACLE_CAP};
use crate::serde_util::{bigint_str, opt_bigint_str};
use crate::synth::DEFAULT_SEARCH_BOUND;
use crate::Label;

/// Default directory for relative output paths.
pub const OUT_DIR_ENV: &str = "PSI_ORDER_OUT_DIR";

pub const CSV_HEADER: [&str; 5] = ["label", "t", "value_lo", "value_hi", "kind"];

/// Significant digits in CSV values.
pub const CSV_DIGITS: usize = 20;

fn int_or_string<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Str(String),
    }
    match Raw::deserialize(d)? {
        Raw::Int(i) => Ok(BigInt::from(i)),
        Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
    }
}

fn opt_int_or_string<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<BigInt>, D::Error> {
    int_or_string(d).map(Some)
}

fn default_t0() -> BigInt {
    BigInt::one()
}

fn default_count() -> usize {
    20
}

fn default_depth() -> usize {
    DEFAULT_DEPTH_LIMIT
}

fn default_cap() -> u64 {
    DEFAULT_ORACLE_CAP
}

fn default_bound() -> u64 {
    10
}

fn default_precision() -> u32 {
    80
}

fn default_search_bound() -> usize {
    DEFAULT_SEARCH_BOUND
}

/// Everything a run depends on. Loaded from a `key = value` file, then overridden by flags.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Source specs, optionally `label=spec`.
    #[serde(default)]
    pub sources: Vec<String>,
    /// Extra `seeded` sources drawn from `seed`.
    #[serde(default)]
    pub random: usize,
    #[serde(default = "default_bound")]
    pub bound: u64,
    #[serde(default = "default_t0", deserialize_with = "int_or_string", serialize_with = "bigint_str::serialize")]
    pub t0: BigInt,
    #[serde(default, deserialize_with = "opt_int_or_string", serialize_with = "opt_bigint_str::serialize")]
    pub horizon: Option<BigInt>,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub max_events: Option<usize>,
    #[serde(default = "default_depth")]
    pub depth_limit: usize,
    #[serde(default = "default_cap")]
    pub oracle_cap: u64,
    /// Bracket widths are at most `2^-precision`.
    #[serde(default = "default_precision")]
    pub precision: u32,
    #[serde(default = "default_search_bound")]
    pub search_bound: usize,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sources: Vec::new(),
            random: 0,
            bound: default_bound(),
            t0: default_t0(),
            horizon: None,
            count: default_count(),
            max_events: None,
            depth_limit: default_depth(),
            oracle_cap: default_cap(),
            precision: default_precision(),
            search_bound: default_search_bound(),
            k: None,
            out: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("depth_limit", self.depth_limit as u64),
            ("oracle_cap", self.oracle_cap),
            ("bound", self.bound),
            ("precision", u64::from(self.precision)),
            ("search_bound", self.search_bound as u64),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.t0 < BigInt::one() {
            return Err(Error::Config("t0 must be at least 1".into()));
        }
        if self.horizon.as_ref().is_some_and(|h| h < &BigInt::one()) {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.max_events == Some(0) {
            return Err(Error::Config("max_events must be positive".into()));
        }
        for spec in &self.sources {
            parse_member(spec)?;
        }
        Ok(())
    }

    pub fn target_width(&self) -> BigRational {
        width_for_bits(self.precision)
    }

    /// Members from `sources`, then `random` seeded sources `seeded:<seed+i>:<bound>`.
    pub fn tuple(&self) -> Result<FunctionTuple> {
        let mut members = Vec::new();
        for (i, spec) in self.sources.iter().enumerate() {
            let (label, source) = parse_member(spec)?;
            members.push((label.unwrap_or_else(|| format!("f{}", i + 1)), source));
        }
        for i in 0..self.random {
            let seed = self.seed.wrapping_add(i as u64);
            let label = format!("f{}", self.sources.len() + i + 1);
            members.push((label, QuotientSource::seeded(seed, self.bound)?));
        }
        FunctionTuple::new(members)
    }

    pub fn trace_options(&self) -> TraceOptions {
        TraceOptions {
            count: self.count,
            depth_limit: self.depth_limit,
            horizon: self.horizon.clone(),
            max_events: self.max_events,
            seed: self.seed,
        }
    }

    pub fn trace(&self) -> Result<ChangeTrace> {
        Dynamics::new(self.tuple()?).change_trace(&self.t0, &self.trace_options())
    }
}

/// `label=spec` or a bare spec.
pub fn parse_member(spec: &str) -> Result<(Option<Label>, QuotientSource)> {
    match spec.split_once('=') {
        Some((label, rest)) if !label.contains(':') => {
            let label = label.trim();
            if label.is_empty() {
                return Err(Error::ParseSource {
                    spec: spec.into(),
                    reason: "empty label".into(),
                });
            }
            Ok((Some(label.to_string()), rest.trim().parse()?))
        }
        _ => Ok((None, spec.trim().parse()?)),
    }
}

/// Resolve a relative output path against `$PSI_ORDER_OUT_DIR` when set.
pub fn output_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() && !dir.is_empty() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json_pretty(value)?.as_bytes())
}

pub fn write_trace(path: &Path, trace: &ChangeTrace) -> Result<()> {
    write_json(path, trace)
}

pub fn read_trace(path: &Path) -> Result<ChangeTrace> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Decimal scientific notation of `x`, rounded toward `+inf` when `up`, else toward `-inf`.
pub fn format_sci(x: &BigRational, digits: usize, up: bool) -> String {
    assert!(digits >= 1);
    if x.is_zero() {
        return "0".into();
    }
    if x.is_negative() {
        return format!("-{}", format_sci(&-x, digits, !up));
    }
    let ten = BigInt::from(10);
    let mut e = x.numer().to_string().len() as i64 - x.denom().to_string().len() as i64;
    let pow10 = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(Pow::pow(&ten, k as u64))
        } else {
            BigRational::new(BigInt::one(), Pow::pow(&ten, (-k) as u64))
        }
    };
    while &pow10(e) > x {
        e -= 1;
    }
    while &pow10(e + 1) <= x {
        e += 1;
    }
    let scaled = x * pow10(digits as i64 - 1 - e);
    let mut m = if up { scaled.ceil() } else { scaled.floor() }.to_integer();
    if m == Pow::pow(&ten, digits as u64) {
        m = Pow::pow(&ten, digits as u64 - 1);
        e += 1;
    }
    let s = m.to_string();
    let (head, tail) = s.split_at(1);
    let tail = tail.trim_end_matches('0');
    if tail.is_empty() {
        format!("{head}e{e}")
    } else {
        format!("{head}.{tail}e{e}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    /// The function jumps here.
    Jump,
    /// Another member jumps here.
    Event,
    /// A sample strictly between consecutive events.
    Interior,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaircaseRow {
    pub label: Label,
    #[serde(with = "bigint_str")]
    pub t: BigInt,
    pub value_lo: String,
    pub value_hi: String,
    pub kind: RowKind,
}

/// Rows for every member at every merged event up to `horizon`, plus one interior
/// sample per gap between consecutive events (and between the last event and `horizon`).
pub fn staircase_rows(
    tuple: &FunctionTuple,
    horizon: &BigInt,
    target_width: &BigRational,
) -> Result<Vec<StaircaseRow>> {
    let mut dyns = Dynamics::new(tuple.clone());
    let events = dyns.build_events(horizon)?;
    let mut times: Vec<(BigInt, Option<&[Label]>)> = Vec::new();
    for (i, ev) in events.iter().enumerate() {
        times.push((ev.t.clone(), Some(&ev.jumping)));
        let next = events.get(i + 1).map_or_else(|| horizon + 1u32, |n| n.t.clone());
        if &next - &ev.t >= BigInt::from(2) {
            times.push(((&ev.t + &next).div_floor(&BigInt::from(2)), None));
        }
    }
    let mut rows = Vec::new();
    for member in tuple.members() {
        let f = dyns.function_mut(&member.label)?;
        for (t, jumping) in &times {
            let v = f.psi_at(t, target_width)?;
            let kind = match jumping {
                Some(j) if j.contains(&member.label) => RowKind::Jump,
                Some(_) => RowKind::Event,
                None => RowKind::Interior,
            };
            rows.push(StaircaseRow {
                label: member.label.clone(),
                t: t.clone(),
                value_lo: format_sci(&v.bracket.lo, CSV_DIGITS, false),
                value_hi: format_sci(&v.bracket.hi, CSV_DIGITS, true),
                kind,
            });
        }
    }
    Ok(rows)
}

/// Staircase of the trace's members up to its last change moment.
pub fn trace_staircase_rows(trace: &ChangeTrace, target_width: &BigRational) -> Result<Vec<StaircaseRow>> {
    match trace.last_t() {
        Some(h) => staircase_rows(&trace.header.members, h, target_width),
        None => Ok(Vec::new()),
    }
}

pub fn write_staircase_csv<W: Write>(rows: &[StaircaseRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn staircase_csv_string(rows: &[StaircaseRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_staircase_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
}

pub fn read_staircase_csv<R: Read>(input: R) -> Result<Vec<StaircaseRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| Error::Format(e.to_string()))?;
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::Format(format!("unexpected CSV header {headers:?}")));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Format(e.to_string())))
        .collect()
}

/// Number of jump rows for `label`.
pub fn step_count(rows: &[StaircaseRow], label: &str) -> usize {
    rows.iter()
        .filter(|r| r.label == label && r.kind == RowKind::Jump)
        .count()
}
