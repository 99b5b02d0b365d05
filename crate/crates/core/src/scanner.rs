//! Empirical check of `q_n <= C p^{1/4} (log p)^{(n+1)/2}` over ranges of
//! primes.
//!
//! The range is cut into fixed-width shards. Shards are processed in parallel
//! but written and merged strictly in shard order, so the record stream and the
//! summary do not depend on the number of workers. A scan that writes to a file
//! can checkpoint after every batch of shards and resume later.

use std::cmp::Ordering;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::factorize;
use crate::character::{prime_nonresidues, DEFAULT_SEARCH_CAP};
use crate::constants::{bound_scale, corollary_validity, precise, BoundInput};
use crate::error::{Error, Result};
use crate::rounding::Interval;
use crate::sieve::PrimeRange;

pub const DEFAULT_SHARD_WIDTH: u64 = 10_000;
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum OrderPolicy {
    Quadratic,
    /// Every order `2 <= d <= D` dividing `p - 1`.
    AllDivisorsUpTo(u64),
    /// The listed orders that divide `p - 1`.
    FixedSet(Vec<u64>),
}

impl OrderPolicy {
    /// Orders to scan at `p`, ascending.
    pub fn orders(&self, p: u64) -> Result<Vec<u64>> {
        Ok(match self {
            OrderPolicy::Quadratic => vec![2],
            OrderPolicy::AllDivisorsUpTo(max) => {
                let mut ds = crate::arith::divisors(&factorize(p - 1)?);
                ds.retain(|&d| d >= 2 && d <= *max);
                ds.sort_unstable();
                ds
            }
            OrderPolicy::FixedSet(list) => {
                let mut ds: Vec<u64> = list.iter().copied().filter(|&d| (p - 1) % d == 0).collect();
                ds.sort_unstable();
                ds.dedup();
                ds
            }
        })
    }
}

/// The constant `C = g(n0, p0)` a scan is checked against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub n0: u32,
    pub p0: f64,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanTask {
    pub p_lo: u64,
    /// Inclusive.
    pub p_hi: u64,
    pub order_policy: OrderPolicy,
    pub n_max: u32,
    pub reference: Option<Reference>,
    pub search_cap: u64,
    pub shard_width: u64,
}

impl ScanTask {
    /// A quadratic scan with default cap and shard width and no reference.
    pub fn new(p_lo: u64, p_hi: u64, n_max: u32) -> Self {
        ScanTask {
            p_lo,
            p_hi,
            order_policy: OrderPolicy::Quadratic,
            n_max,
            reference: None,
            search_cap: DEFAULT_SEARCH_CAP,
            shard_width: DEFAULT_SHARD_WIDTH,
        }
    }

    pub fn with_reference(mut self, n0: u32, p0: f64, c: f64) -> Self {
        self.reference = Some(Reference { n0, p0, c });
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Precondition(msg));
        if self.p_lo > self.p_hi {
            return bad(format!("empty range: p_lo = {} > p_hi = {}", self.p_lo, self.p_hi));
        }
        if self.p_lo < 3 {
            return bad("p_lo must be at least 3".into());
        }
        if self.n_max == 0 {
            return bad("n_max must be at least 1".into());
        }
        if self.shard_width == 0 {
            return bad("shard width must be positive".into());
        }
        if self.search_cap < 2 {
            return bad("search cap must be at least 2".into());
        }
        match &self.order_policy {
            OrderPolicy::AllDivisorsUpTo(d) if *d < 2 => {
                return bad("largest order must be at least 2".into())
            }
            OrderPolicy::FixedSet(list) if list.is_empty() || list.iter().any(|&d| d < 2) => {
                return bad("fixed orders must be a nonempty list of values >= 2".into())
            }
            _ => {}
        }
        if let Some(r) = &self.reference {
            if !((self.p_lo as f64) >= r.p0) {
                return bad(format!("p_lo = {} is below p0 = {}", self.p_lo, r.p0));
            }
            if self.n_max > r.n0 {
                return bad(format!("n_max = {} exceeds n0 = {}", self.n_max, r.n0));
            }
            let validity = corollary_validity(r.n0, r.p0)?;
            if !validity.holds {
                let ids: Vec<&str> = validity.failed_conditions.iter().map(|c| c.id()).collect();
                return bad(format!("(n0, p0) = ({}, {}) is not valid: {}", r.n0, r.p0, ids.join(", ")));
            }
            let g = precise::g(r.n0, r.p0)
                .ok_or_else(|| Error::Domain(format!("g({}, {}) is undefined", r.n0, r.p0)))?;
            if !(*g.hi() <= r.c) {
                return bad(format!(
                    "C = {} is below g({}, {}) = {:.6}",
                    r.c,
                    r.n0,
                    r.p0,
                    g.midpoint()
                ));
            }
        }
        Ok(())
    }

    pub fn shard_count(&self) -> u64 {
        (self.p_hi - self.p_lo) / self.shard_width + 1
    }

    /// Inclusive bounds of shard `i`.
    pub fn shard_bounds(&self, i: u64) -> (u64, u64) {
        let lo = self.p_lo + i * self.shard_width;
        (lo, (lo + self.shard_width - 1).min(self.p_hi))
    }

    /// SHA-256 of the task's JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("task serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub p: u64,
    pub d: u64,
    /// `q_1 < q_2 < ...`; shorter than `n_max` when the search cap was hit.
    pub q: Vec<u64>,
    /// `q_n / (p^{1/4} (log p)^{(n+1)/2})`.
    pub ratio: Vec<f64>,
    /// Per found `q_n`; empty without a reference.
    pub bound_ok: Vec<bool>,
    pub cap_exhausted: bool,
}

impl ScanRecord {
    pub fn violations(&self) -> usize {
        self.bound_ok.iter().filter(|ok| !**ok).count()
    }
}

/// Computes the record for one `(p, d)`.
pub fn scan_one(p: u64, d: u64, task: &ScanTask, c: Option<&Interval>) -> Result<ScanRecord> {
    let (q, cap_exhausted) = match prime_nonresidues(p, d, task.n_max as usize, task.search_cap) {
        Ok(q) => (q, false),
        Err(Error::SearchCap { found, .. }) => (found, true),
        Err(e) => return Err(e),
    };
    let mut ratio = Vec::with_capacity(q.len());
    let mut bound_ok = Vec::new();
    for (i, &qn) in q.iter().enumerate() {
        let n = i as u32 + 1;
        ratio.push(qn as f64 / bound_scale(&BoundInput::new(n, p as f64)?));
        if let Some(c) = c {
            bound_ok.push(*precise::bound(n, p, c).hi() >= qn);
        }
    }
    Ok(ScanRecord {
        p,
        d,
        q,
        ratio,
        bound_ok,
        cap_exhausted,
    })
}

/// A value attained at `(p, d)`. Among equal values the smallest `(p, d)` wins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witnessed<T> {
    pub value: T,
    pub p: u64,
    pub d: u64,
}

fn better<T>(a: &Witnessed<T>, b: &Witnessed<T>, cmp: impl Fn(&T, &T) -> Ordering) -> bool {
    match cmp(&a.value, &b.value) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => (a.p, a.d) < (b.p, b.d),
    }
}

fn merge_max<T: Clone>(
    slot: &mut Option<Witnessed<T>>,
    other: &Option<Witnessed<T>>,
    cmp: impl Fn(&T, &T) -> Ordering,
) {
    if let Some(o) = other {
        if slot.as_ref().is_none_or(|s| better(o, s, cmp)) {
            *slot = Some(o.clone());
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerN {
    pub n: u32,
    pub max_q: Option<Witnessed<u64>>,
    pub max_ratio: Option<Witnessed<f64>>,
}

/// The first bound violation, by `(p, d, n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub p: u64,
    pub d: u64,
    pub n: u32,
    pub q: u64,
}

/// Extremal values over a set of records. Merging is associative and
/// commutative, so shards may be combined in any grouping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub records: u64,
    pub primes: u64,
    pub violations: u64,
    pub cap_exhausted: u64,
    pub first_violation: Option<Violation>,
    pub per_n: Vec<PerN>,
}

impl Aggregate {
    pub fn new(n_max: u32) -> Self {
        Aggregate {
            records: 0,
            primes: 0,
            violations: 0,
            cap_exhausted: 0,
            first_violation: None,
            per_n: (1..=n_max)
                .map(|n| PerN {
                    n,
                    ..PerN::default()
                })
                .collect(),
        }
    }

    /// Records for one prime; `primes` counts calls.
    pub fn add_prime(&mut self, records: &[ScanRecord]) {
        self.primes += 1;
        for r in records {
            self.add(r);
        }
    }

    fn add(&mut self, r: &ScanRecord) {
        let mut single = Aggregate::new(self.per_n.len() as u32);
        single.records = 1;
        single.cap_exhausted = r.cap_exhausted as u64;
        single.violations = r.violations() as u64;
        for (i, slot) in single.per_n.iter_mut().enumerate() {
            if let (Some(&q), Some(&ratio)) = (r.q.get(i), r.ratio.get(i)) {
                slot.max_q = Some(Witnessed { value: q, p: r.p, d: r.d });
                slot.max_ratio = Some(Witnessed { value: ratio, p: r.p, d: r.d });
            }
        }
        single.first_violation = r.bound_ok.iter().position(|ok| !ok).map(|i| Violation {
            p: r.p,
            d: r.d,
            n: i as u32 + 1,
            q: r.q[i],
        });
        self.merge(&single);
    }

    pub fn merge(&mut self, other: &Aggregate) {
        self.records += other.records;
        self.primes += other.primes;
        self.violations += other.violations;
        self.cap_exhausted += other.cap_exhausted;
        if let Some(v) = &other.first_violation {
            let earlier = self
                .first_violation
                .as_ref()
                .is_none_or(|s| (v.p, v.d, v.n) < (s.p, s.d, s.n));
            if earlier {
                self.first_violation = Some(v.clone());
            }
        }
        if self.per_n.len() < other.per_n.len() {
            let n0 = self.per_n.len() as u32;
            self.per_n.extend((n0 + 1..=other.per_n.len() as u32).map(|n| PerN {
                n,
                ..PerN::default()
            }));
        }
        for (mine, theirs) in self.per_n.iter_mut().zip(&other.per_n) {
            merge_max(&mut mine.max_q, &theirs.max_q, |a, b| a.cmp(b));
            merge_max(&mut mine.max_ratio, &theirs.max_ratio, |a, b| a.total_cmp(b));
        }
    }
}

/// The summary document written at the end of a scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSummary {
    pub task: ScanTask,
    pub task_hash: String,
    pub complete: bool,
    pub aggregate: Aggregate,
}

impl ScanSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes") + "\n"
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordFormat {
    Csv,
    Jsonl,
}

/// CSV header: `p,d,q_1..q_n,ratio_1..ratio_n,bound_ok`.
pub fn csv_header(n_max: u32) -> String {
    let mut cols = vec!["p".to_string(), "d".to_string()];
    cols.extend((1..=n_max).map(|n| format!("q_{n}")));
    cols.extend((1..=n_max).map(|n| format!("ratio_{n}")));
    cols.push("bound_ok".into());
    cols.join(",") + "\n"
}

/// One CSV row. Entries past a cap exhaustion are empty; `bound_ok` is the
/// conjunction over found `q_n`, empty without a reference.
pub fn csv_row(r: &ScanRecord, n_max: u32) -> String {
    let n = n_max as usize;
    let mut cols = vec![r.p.to_string(), r.d.to_string()];
    cols.extend((0..n).map(|i| r.q.get(i).map_or(String::new(), u64::to_string)));
    cols.extend((0..n).map(|i| r.ratio.get(i).map_or(String::new(), f64::to_string)));
    cols.push(if r.bound_ok.is_empty() {
        String::new()
    } else {
        r.bound_ok.iter().all(|&ok| ok).to_string()
    });
    cols.join(",") + "\n"
}

fn format_records(records: &[ScanRecord], format: RecordFormat, n_max: u32) -> String {
    let mut out = String::new();
    for r in records {
        match format {
            RecordFormat::Csv => out.push_str(&csv_row(r, n_max)),
            RecordFormat::Jsonl => {
                out.push_str(&serde_json::to_string(r).expect("record serializes"));
                out.push('\n');
            }
        }
    }
    out
}

struct ShardOutput {
    records: Vec<ScanRecord>,
    aggregate: Aggregate,
}

fn process_shard(task: &ScanTask, c: Option<&Interval>, index: u64) -> Result<ShardOutput> {
    let (lo, hi) = task.shard_bounds(index);
    let mut records = Vec::new();
    let mut aggregate = Aggregate::new(task.n_max);
    for p in PrimeRange::new(lo.max(3), hi) {
        let start = records.len();
        for d in task.order_policy.orders(p)? {
            records.push(scan_one(p, d, task, c)?);
        }
        aggregate.add_prime(&records[start..]);
    }
    Ok(ShardOutput { records, aggregate })
}

#[derive(Clone, Debug, Default)]
pub struct ScanOptions {
    /// Worker threads; 0 uses the global rayon pool.
    pub threads: usize,
    /// Checkpoint file, for [`run_scan_to_path`].
    pub checkpoint: Option<PathBuf>,
    /// Stop after this many shards in this invocation (for interruption).
    pub stop_after_shards: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Checkpoint {
    version: u32,
    task_hash: String,
    next_shard: u64,
    output_bytes: u64,
    aggregate: Aggregate,
}

fn read_checkpoint(path: &Path) -> Result<Option<Checkpoint>> {
    match fs::read(path) {
        Ok(bytes) => {
            let cp: Checkpoint = serde_json::from_slice(&bytes)
                .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
            if cp.version != CHECKPOINT_VERSION {
                return Err(Error::Checkpoint(format!(
                    "unsupported checkpoint version {}",
                    cp.version
                )));
            }
            Ok(Some(cp))
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn write_checkpoint(path: &Path, cp: &Checkpoint) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = File::create(&tmp)?;
        f.write_all(&serde_json::to_vec_pretty(cp)?)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn reference_interval(task: &ScanTask) -> Option<Interval> {
    task.reference.as_ref().map(|r| Interval::from_f64(r.c))
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

enum Step<'a> {
    Records(&'a [ScanRecord]),
    /// A batch is fully written; shards before the index are done.
    BatchDone(u64, &'a Aggregate),
}

/// Drives shards `next..` through `sink` in batches. Returns whether the
/// scan reached the last shard.
fn drive(
    task: &ScanTask,
    options: &ScanOptions,
    mut next: u64,
    aggregate: &mut Aggregate,
    sink: &mut dyn FnMut(Step) -> Result<()>,
) -> Result<bool> {
    let c = reference_interval(task);
    let total = task.shard_count();
    let batch = (options.threads.max(rayon::current_num_threads()) as u64 * 2).max(2);
    let mut budget = options.stop_after_shards.unwrap_or(u64::MAX);
    while next < total && budget > 0 {
        let end = (next + batch.min(budget)).min(total);
        let outputs: Vec<Result<ShardOutput>> = with_pool(options.threads, || {
            (next..end)
                .into_par_iter()
                .map(|i| process_shard(task, c.as_ref(), i))
                .collect()
        })?;
        for out in outputs {
            let out = out?;
            sink(Step::Records(&out.records))?;
            aggregate.merge(&out.aggregate);
        }
        budget -= end - next;
        next = end;
        sink(Step::BatchDone(next, aggregate))?;
    }
    Ok(next >= total)
}

/// Runs a scan, streaming records to `out`. No checkpointing.
pub fn run_scan(
    task: &ScanTask,
    options: &ScanOptions,
    format: RecordFormat,
    out: &mut dyn Write,
) -> Result<ScanSummary> {
    task.validate()?;
    if format == RecordFormat::Csv {
        out.write_all(csv_header(task.n_max).as_bytes())?;
    }
    let mut aggregate = Aggregate::new(task.n_max);
    let complete = drive(
        task,
        options,
        0,
        &mut aggregate,
        &mut |step| {
            if let Step::Records(records) = step {
                out.write_all(format_records(records, format, task.n_max).as_bytes())?;
            }
            Ok(())
        },
    )?;
    out.flush()?;
    Ok(ScanSummary {
        task: task.clone(),
        task_hash: task.hash(),
        complete,
        aggregate,
    })
}

/// Collects all records of a scan in memory.
pub fn scan_records(task: &ScanTask, options: &ScanOptions) -> Result<(Vec<ScanRecord>, ScanSummary)> {
    task.validate()?;
    let mut records = Vec::new();
    let mut aggregate = Aggregate::new(task.n_max);
    let complete = drive(
        task,
        options,
        0,
        &mut aggregate,
        &mut |step| {
            if let Step::Records(batch) = step {
                records.extend_from_slice(batch);
            }
            Ok(())
        },
    )?;
    let summary = ScanSummary {
        task: task.clone(),
        task_hash: task.hash(),
        complete,
        aggregate,
    };
    Ok((records, summary))
}

/// Runs a scan into the file at `output`, resuming from `options.checkpoint`
/// when it exists. The checkpoint must come from an identical task.
pub fn run_scan_to_path(
    task: &ScanTask,
    options: &ScanOptions,
    format: RecordFormat,
    output: &Path,
) -> Result<ScanSummary> {
    task.validate()?;
    let hash = task.hash();
    let resume = match &options.checkpoint {
        Some(path) => read_checkpoint(path)?,
        None => None,
    };
    let (next, mut aggregate, file) = match resume {
        Some(cp) => {
            if cp.task_hash != hash {
                return Err(Error::Checkpoint(
                    "checkpoint was written for a different task; refusing to resume".into(),
                ));
            }
            let file = OpenOptions::new().write(true).open(output)?;
            if file.metadata()?.len() < cp.output_bytes {
                return Err(Error::Checkpoint(format!(
                    "{} is shorter than the checkpoint records",
                    output.display()
                )));
            }
            file.set_len(cp.output_bytes)?;
            (cp.next_shard, cp.aggregate, file)
        }
        None => {
            let mut file = File::create(output)?;
            if format == RecordFormat::Csv {
                file.write_all(csv_header(task.n_max).as_bytes())?;
            }
            (0, Aggregate::new(task.n_max), file)
        }
    };
    let mut file = file;
    let mut written = file.seek(SeekFrom::End(0))?;
    let mut writer = BufWriter::new(file);
    let complete = drive(
        task,
        options,
        next,
        &mut aggregate,
        &mut |step| {
            let (next_shard, aggregate) = match step {
                Step::Records(records) => {
                    let text = format_records(records, format, task.n_max);
                    writer.write_all(text.as_bytes())?;
                    written += text.len() as u64;
                    return Ok(());
                }
                Step::BatchDone(next_shard, aggregate) => (next_shard, aggregate),
            };
            writer.flush()?;
            writer.get_ref().sync_data()?;
            if let Some(path) = &options.checkpoint {
                write_checkpoint(
                    path,
                    &Checkpoint {
                        version: CHECKPOINT_VERSION,
                        task_hash: hash.clone(),
                        next_shard,
                        output_bytes: written,
                        aggregate: aggregate.clone(),
                    },
                )?;
            }
            Ok(())
        },
    )?;
    writer.flush()?;
    Ok(ScanSummary {
        task: task.clone(),
        task_hash: hash,
        complete,
        aggregate,
    })
}
