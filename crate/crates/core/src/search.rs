//! Exhaustive minimum-complexity search over the orbit of one SDNB generator
//! under the orthogonal circulant group, by contiguous index ranges.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, multiplicative_order};
use crate::complexity::TraceKernel;
use crate::construct::SdnbCertificate;
use crate::error::{domain, internal, Error, Result};
use crate::field::{FieldCtx, FieldElement};
use crate::group_algebra::{FpLinear, GaElement};
use crate::orthogonal::{GroupKind, GroupSpec};

/// Flat coordinate budget for precomputed conjugate tables.
const MAX_TABLE_WORDS: usize = 1 << 26;

/// `i/k`: the `i`-th of `k` equal contiguous slices of the index space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shard {
    pub index: u64,
    pub count: u64,
}

impl Shard {
    pub fn new(index: u64, count: u64) -> Result<Self> {
        if count == 0 || index >= count {
            return domain(format!("invalid shard {index}/{count}"));
        }
        Ok(Shard { index, count })
    }

    /// `[i L / k, (i + 1) L / k)`.
    pub fn range(&self, len: u64) -> (u64, u64) {
        let at = |i: u64| ((i as u128 * len as u128) / self.count as u128) as u64;
        (at(self.index), at(self.index + 1))
    }
}

impl FromStr for Shard {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (i, k) = s.split_once('/').ok_or_else(|| Error::Domain(format!("shard '{s}' is not of the form i/k")))?;
        let parse = |t: &str| t.trim().parse::<u64>().map_err(|_| Error::Domain(format!("bad shard number '{t}'")));
        Shard::new(parse(i)?, parse(k)?)
    }
}

impl fmt::Display for Shard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.index, self.count)
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Index range `[start, end)`; the whole group when `None`.
    pub range: Option<(u64, u64)>,
    pub histogram: bool,
    pub witness_cap: usize,
    /// Full self-duality check on every index divisible by this.
    pub verify_every: u64,
    pub time_limit: Option<Duration>,
}

impl SearchOptions {
    pub fn for_degree(n: usize) -> Self {
        SearchOptions { range: None, histogram: n <= 15, witness_cap: 16, verify_every: 256, time_limit: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub index: u64,
    /// Coordinates of the generator over `F_p`.
    pub gamma: Vec<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchReport {
    pub q: u64,
    pub n: usize,
    pub group_cardinality: u64,
    pub visited: u64,
    pub min_complexity: Option<u64>,
    pub count_at_min: u64,
    /// `count_at_min / n` (even `q`) or `/ 2n` (odd `q`), set once coverage is full.
    pub multiplier: Option<u64>,
    /// Full coverage but `count_at_min` not divisible by the orbit factor.
    pub integrity_failure: bool,
    /// For even `q`: whether an optimal basis is not ruled out.
    pub optimal_possible: Option<bool>,
    pub witness_cap: usize,
    /// The smallest indices attaining the minimum.
    pub witnesses: Vec<Witness>,
    pub histogram: Option<BTreeMap<u64, u64>>,
    /// Disjoint sorted half-open index ranges.
    pub coverage: Vec<(u64, u64)>,
    pub complete: bool,
    pub elapsed_ms: u64,
}

/// Equality of results; `elapsed_ms` is ignored.
impl PartialEq for SearchReport {
    fn eq(&self, o: &Self) -> bool {
        (self.q, self.n, self.group_cardinality, self.visited, self.min_complexity, self.count_at_min)
            == (o.q, o.n, o.group_cardinality, o.visited, o.min_complexity, o.count_at_min)
            && (self.multiplier, self.integrity_failure, self.optimal_possible, self.witness_cap)
                == (o.multiplier, o.integrity_failure, o.optimal_possible, o.witness_cap)
            && self.witnesses == o.witnesses
            && self.histogram == o.histogram
            && self.coverage == o.coverage
            && self.complete == o.complete
    }
}

impl Eq for SearchReport {}

pub const CSV_HEADER: &str = "q,n,min_complexity,multiplier,group_cardinality,elapsed_ms";

impl SearchReport {
    /// A report covering nothing.
    pub fn empty(q: u64, n: usize, group_cardinality: u64, histogram: bool, witness_cap: usize) -> Self {
        let mut r = SearchReport {
            q,
            n,
            group_cardinality,
            visited: 0,
            min_complexity: None,
            count_at_min: 0,
            multiplier: None,
            integrity_failure: false,
            optimal_possible: optimality_precheck(q, n),
            witness_cap,
            witnesses: Vec::new(),
            histogram: histogram.then(BTreeMap::new),
            coverage: Vec::new(),
            complete: false,
            elapsed_ms: 0,
        };
        r.finalize();
        r
    }

    fn orbit_factor(&self) -> u64 {
        let n = self.n as u64;
        if self.q % 2 == 0 {
            n
        } else {
            2 * n
        }
    }

    fn covers_all(&self) -> bool {
        match self.coverage.as_slice() {
            [] => self.group_cardinality == 0,
            [(0, end)] => *end == self.group_cardinality,
            _ => false,
        }
    }

    fn finalize(&mut self) {
        self.complete = self.covers_all();
        self.multiplier = None;
        self.integrity_failure = false;
        if self.complete && self.count_at_min > 0 {
            let f = self.orbit_factor();
            if self.count_at_min % f == 0 {
                self.multiplier = Some(self.count_at_min / f);
            } else {
                self.integrity_failure = true;
            }
        }
    }

    fn record(&mut self, index: u64, c: u64, gamma: &FieldElement) {
        self.visited += 1;
        if let Some(h) = &mut self.histogram {
            *h.entry(c).or_insert(0) += 1;
        }
        match self.min_complexity {
            Some(m) if c > m => return,
            Some(m) if c == m => self.count_at_min += 1,
            _ => {
                self.min_complexity = Some(c);
                self.count_at_min = 1;
                self.witnesses.clear();
            }
        }
        if self.witnesses.len() < self.witness_cap {
            self.witnesses.push(Witness { index, gamma: gamma.coords.clone() });
        }
    }

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.q,
            self.n,
            opt(self.min_complexity),
            opt(self.multiplier),
            self.group_cardinality,
            self.elapsed_ms
        )
    }
}

fn add_coverage(cov: &mut Vec<(u64, u64)>, other: &[(u64, u64)]) -> Result<()> {
    let mut all: Vec<(u64, u64)> = cov.iter().chain(other).copied().filter(|(a, b)| a < b).collect();
    all.sort();
    let mut out: Vec<(u64, u64)> = Vec::with_capacity(all.len());
    for (a, b) in all {
        match out.last_mut() {
            Some(last) if a < last.1 => return domain(format!("shard ranges overlap at index {a}")),
            Some(last) if a == last.1 => last.1 = b,
            _ => out.push((a, b)),
        }
    }
    *cov = out;
    Ok(())
}

/// Combine reports over disjoint index ranges of the same search.
pub fn merge_reports(a: &SearchReport, b: &SearchReport) -> Result<SearchReport> {
    if (a.q, a.n, a.group_cardinality) != (b.q, b.n, b.group_cardinality) {
        return domain(format!("cannot merge reports for (q, n) = ({}, {}) and ({}, {})", a.q, a.n, b.q, b.n));
    }
    let mut out = a.clone();
    add_coverage(&mut out.coverage, &b.coverage)?;
    out.visited += b.visited;
    out.elapsed_ms += b.elapsed_ms;
    out.witness_cap = a.witness_cap.min(b.witness_cap);
    out.histogram = match (&a.histogram, &b.histogram) {
        (Some(x), Some(y)) => {
            let mut h = x.clone();
            for (k, v) in y {
                *h.entry(*k).or_insert(0) += v;
            }
            Some(h)
        }
        _ => None,
    };
    match (a.min_complexity, b.min_complexity) {
        (_, None) => {}
        (None, Some(_)) => {
            out.min_complexity = b.min_complexity;
            out.count_at_min = b.count_at_min;
            out.witnesses = b.witnesses.clone();
        }
        (Some(x), Some(y)) if y < x => {
            out.min_complexity = b.min_complexity;
            out.count_at_min = b.count_at_min;
            out.witnesses = b.witnesses.clone();
        }
        (Some(x), Some(y)) if y == x => {
            out.count_at_min += b.count_at_min;
            out.witnesses.extend(b.witnesses.iter().cloned());
        }
        _ => {}
    }
    out.witnesses.sort_by_key(|w| w.index);
    out.witnesses.truncate(out.witness_cap);
    out.finalize();
    Ok(out)
}

/// For even `q`: `2n + 1` prime and `2` of order `n` or `2n` modulo it.
/// `None` for odd `q`.
pub fn optimality_precheck(q: u64, n: usize) -> Option<bool> {
    if q % 2 == 1 {
        return None;
    }
    let m = 2 * n as u64 + 1;
    Some(is_prime(m) && matches!(multiplicative_order(2, m), Some(o) if o == n as u64 || o == 2 * n as u64))
}

/// `conj(v) o gamma = sum_k v_(n-k) gamma^(q^k)`, given the conjugates of `gamma`.
fn act_conj(big: &FieldCtx, gamma_conj: &[FieldElement], v: &GaElement) -> FieldElement {
    let n = gamma_conj.len();
    let mut acc = big.zero();
    for (k, g) in gamma_conj.iter().enumerate() {
        let c = &v.coeffs[(n - k) % n];
        if !c.is_zero() {
            acc = big.add(&acc, &big.mul(&big.embed_base(c), g));
        }
    }
    acc
}

/// Produces generators `conj(v) o gamma` together with their conjugates.
enum Source {
    /// Per-factor tables of flattened conjugates, summed by digit.
    Tables { tables: Vec<Vec<Vec<u64>>>, radices: Vec<u64> },
    Direct,
}

pub struct Searcher<'a> {
    cert: &'a SdnbCertificate,
    spec: GroupSpec,
    kernel: TraceKernel,
    /// `v -> ` flattened conjugates of `conj(v) o gamma`.
    to_conjugates: FpLinear,
    source: Source,
}

impl<'a> Searcher<'a> {
    pub fn new(cert: &'a SdnbCertificate) -> Result<Self> {
        let spec = GroupSpec::new(cert.q, cert.n)?;
        if spec.len().is_none() {
            return Err(Error::Unsupported(format!("group of order {} is too large to search", spec.cardinality)));
        }
        let kernel = TraceKernel::new(&cert.field)?;
        if !kernel.is_self_dual(&cert.gamma) {
            return domain("certificate generator is not self-dual");
        }
        let gamma_conj = kernel.conjugates(&cert.gamma);
        let to_conjugates = spec.algebra().linear_map(|v| {
            let g = act_conj(&cert.field, &gamma_conj, v);
            Ok(kernel.conjugates(&g).into_iter().flat_map(|c| c.coords).collect())
        })?;
        let mut s = Searcher { cert, spec, kernel, to_conjugates, source: Source::Direct };
        if s.spec.kind == GroupKind::Semisimple {
            let n = cert.n;
            let k = cert.field.degree();
            let words: usize = s.spec.factors().iter().map(|f| f.table.len() * n * k).sum();
            if words <= MAX_TABLE_WORDS {
                let tables = s
                    .spec
                    .factors()
                    .iter()
                    .map(|f| f.table.iter().map(|v| s.flat_conjugates(v)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                let radices = s.spec.factors().iter().map(|f| f.order).collect();
                s.source = Source::Tables { tables, radices };
            }
        }
        Ok(s)
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn len(&self) -> u64 {
        self.spec.len().expect("checked in new")
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn flat_conjugates(&self, v: &GaElement) -> Result<Vec<u64>> {
        Ok(self.to_conjugates.apply(&self.spec.algebra().flatten(v)))
    }

    /// Conjugates of the generator with index `idx`.
    fn conjugates_at(&self, idx: u64) -> Result<Vec<FieldElement>> {
        match &self.source {
            Source::Direct => {
                let flat = self.flat_conjugates(&self.spec.element(idx)?)?;
                let k = self.cert.field.degree();
                Ok(flat.chunks(k).map(|c| FieldElement { coords: c.to_vec() }).collect())
            }
            Source::Tables { tables, radices } => {
                let p = self.cert.field.characteristic();
                let mut rest = idx;
                let mut acc: Option<Vec<u64>> = None;
                for (t, &r) in tables.iter().zip(radices) {
                    let entry = &t[(rest % r) as usize];
                    rest /= r;
                    match &mut acc {
                        None => acc = Some(entry.clone()),
                        Some(a) => {
                            for (x, &y) in a.iter_mut().zip(entry) {
                                *x = crate::arith::add_mod(*x, y, p);
                            }
                        }
                    }
                }
                let flat = acc.ok_or_else(|| Error::Internal("no factors".into()))?;
                let k = self.cert.field.degree();
                Ok(flat.chunks(k).map(|c| FieldElement { coords: c.to_vec() }).collect())
            }
        }
    }

    /// The SDNB generator with index `idx`.
    pub fn generator(&self, idx: u64) -> Result<FieldElement> {
        Ok(self.conjugates_at(idx)?.swap_remove(0))
    }

    pub fn run(&self, opts: &SearchOptions) -> Result<SearchReport> {
        let len = self.len();
        let (start, end) = opts.range.unwrap_or((0, len));
        if start > end || end > len {
            return domain(format!("index range {start}..{end} outside 0..{len}"));
        }
        if opts.verify_every == 0 {
            return domain("verify_every must be positive");
        }
        let clock = Instant::now();
        let mut report = SearchReport::empty(self.cert.q, self.cert.n, len, opts.histogram, opts.witness_cap);
        let mut stop = end;
        for idx in start..end {
            if let Some(limit) = opts.time_limit {
                if (idx - start) % 64 == 0 && clock.elapsed() >= limit {
                    stop = idx;
                    break;
                }
            }
            let conj = self.conjugates_at(idx)?;
            if idx % opts.verify_every == 0 && !self.kernel.is_self_dual(&conj[0]) {
                return internal(format!("generator at index {idx} is not self-dual"));
            }
            let c = self.kernel.complexity_from_conjugates(&conj);
            report.record(idx, c, &conj[0]);
        }
        add_coverage(&mut report.coverage, &[(start, stop)])?;
        report.elapsed_ms = clock.elapsed().as_millis() as u64;
        report.finalize();
        Ok(report)
    }
}

/// Search `opts.range` (default: the whole group) for the minimum complexity.
pub fn search_min(cert: &SdnbCertificate, opts: &SearchOptions) -> Result<SearchReport> {
    Searcher::new(cert)?.run(opts)
}

/// Search one shard of the index space.
pub fn search_shard(cert: &SdnbCertificate, shard: Shard, opts: &SearchOptions) -> Result<SearchReport> {
    let s = Searcher::new(cert)?;
    let opts = SearchOptions { range: Some(shard.range(s.len())), ..opts.clone() };
    s.run(&opts)
}
