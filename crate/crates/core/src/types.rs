//! Arithmetic and set primitives shared by every other module: type
//! sequences, level partitions, finite sets of naturals and codes for the
//! countable ordinals below `ω·M`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Element of the base universe `[0, m_K)`.
pub type Elem = u32;

/// The clause of the type definition that a candidate sequence breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypeClause {
    BaseSize,
    RootBelowPrevious,
    WidthAboveLevel,
    Recurrence,
}

impl fmt::Display for TypeClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TypeClause::BaseSize => "m_0=1",
            TypeClause::RootBelowPrevious => "m_{k-1}>r_k",
            TypeClause::WidthAboveLevel => "n_k>k",
            TypeClause::Recurrence => "m_k=n_k(m_{k-1}-r_k)+r_k",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("type violation: {clause} fails at k={k}")]
    Violation { clause: TypeClause, k: usize },
    #[error("sequence lengths disagree: m has {m} entries, n has {n}, r has {r} (expected n, r of length len(m)-1)")]
    LengthMismatch { m: usize, n: usize, r: usize },
    #[error("malformed type text: {0}")]
    Parse(String),
}

/// The arithmetic skeleton `(m_k, n_k, r_k)` of a scheme, truncated at level `K`.
///
/// `n` and `r` are stored with a dummy entry at index 0 so that `n[k]`, `r[k]`
/// line up with the level index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeSequence {
    m: Vec<usize>,
    n: Vec<usize>,
    r: Vec<usize>,
}

impl TypeSequence {
    /// Validates `m = (m_0..m_K)` together with `n = (n_1..n_K)` and
    /// `r = (r_1..r_K)`, reporting the first failing clause.
    pub fn new(m: Vec<usize>, n: Vec<usize>, r: Vec<usize>) -> Result<Self, TypeError> {
        if m.is_empty() || n.len() + 1 != m.len() || r.len() + 1 != m.len() {
            return Err(TypeError::LengthMismatch { m: m.len(), n: n.len(), r: r.len() });
        }
        if m[0] != 1 {
            return Err(TypeError::Violation { clause: TypeClause::BaseSize, k: 0 });
        }
        let mut nn = Vec::with_capacity(m.len());
        let mut rr = Vec::with_capacity(m.len());
        nn.push(0);
        rr.push(0);
        nn.extend(n);
        rr.extend(r);
        for k in 1..m.len() {
            if m[k - 1] <= rr[k] {
                return Err(TypeError::Violation { clause: TypeClause::RootBelowPrevious, k });
            }
            if nn[k] <= k {
                return Err(TypeError::Violation { clause: TypeClause::WidthAboveLevel, k });
            }
            let expected = (m[k - 1] - rr[k])
                .checked_mul(nn[k])
                .and_then(|v| v.checked_add(rr[k]));
            if expected != Some(m[k]) {
                return Err(TypeError::Violation { clause: TypeClause::Recurrence, k });
            }
        }
        Ok(TypeSequence { m, n: nn, r: rr })
    }

    /// Top level `K`.
    pub fn top(&self) -> usize {
        self.m.len() - 1
    }

    pub fn m(&self, k: usize) -> usize {
        self.m[k]
    }

    /// Branching width at level `k ≥ 1`.
    pub fn n(&self, k: usize) -> usize {
        self.n[k]
    }

    /// Root size at level `k ≥ 1`.
    pub fn r(&self, k: usize) -> usize {
        self.r[k]
    }

    pub fn m_seq(&self) -> &[usize] {
        &self.m
    }

    pub fn n_seq(&self) -> &[usize] {
        &self.n[1..]
    }

    pub fn r_seq(&self) -> &[usize] {
        &self.r[1..]
    }

    /// The first `k+1` levels of this type.
    pub fn truncate(&self, k: usize) -> TypeSequence {
        TypeSequence {
            m: self.m[..=k].to_vec(),
            n: self.n[..=k].to_vec(),
            r: self.r[..=k].to_vec(),
        }
    }

    /// Least `K' ≤ K` such that every root size `< bound` occurs among
    /// `r_1..r_{K'}`, if any.
    pub fn fairness(&self, bound: usize) -> FairnessReport {
        fairness_over(bound, (1..=self.top()).map(|k| (k, self.r[k])))
    }

    /// Fairness restricted to the levels of block `block` of a partition.
    pub fn block_fairness(&self, bound: usize, parts: &PartitionSchedule, block: usize) -> FairnessReport {
        fairness_over(
            bound,
            (1..=self.top())
                .filter(|&k| parts.block_of(k) == Some(block))
                .map(|k| (k, self.r[k])),
        )
    }

    /// Canonical text: three comma separated rows `m`, `n`, `r`.
    pub fn to_text(&self) -> String {
        let row = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        format!("{}\n{}\n{}\n", row(&self.m), row(self.n_seq()), row(self.r_seq()))
    }

    /// Parses the three rows written by [`TypeSequence::to_text`].
    pub fn from_rows(m: &str, n: &str, r: &str) -> Result<Self, TypeError> {
        fn row(s: &str) -> Result<Vec<usize>, TypeError> {
            let s = s.trim();
            if s.is_empty() {
                return Ok(Vec::new());
            }
            s.split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|e| TypeError::Parse(format!("{t:?}: {e}"))))
                .collect()
        }
        TypeSequence::new(row(m)?, row(n)?, row(r)?)
    }
}

fn fairness_over(bound: usize, levels: impl Iterator<Item = (usize, usize)>) -> FairnessReport {
    let mut seen = vec![false; bound];
    let mut remaining = bound;
    let mut within = if bound == 0 { Some(0) } else { None };
    for (k, r) in levels {
        if r < bound && !seen[r] {
            seen[r] = true;
            remaining -= 1;
            if remaining == 0 {
                within = Some(k);
                break;
            }
        }
    }
    FairnessReport {
        bound,
        within,
        missing: seen.iter().enumerate().filter(|(_, s)| !**s).map(|(r, _)| r).collect(),
    }
}

/// How much of the "every root size recurs" requirement a finite prefix meets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub bound: usize,
    /// Least level by which every root size below `bound` has appeared.
    pub within: Option<usize>,
    pub missing: Vec<usize>,
}

impl FairnessReport {
    pub fn is_fair(&self) -> bool {
        self.within.is_some()
    }
}

/// Generator for the widths `n_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum WidthSchedule {
    /// `n_k = mul·k + add`.
    Affine { mul: usize, add: usize },
    /// Explicit `n_1, n_2, …`; the last entry repeats.
    List(Vec<usize>),
}

impl WidthSchedule {
    pub fn at(&self, k: usize) -> usize {
        match self {
            WidthSchedule::Affine { mul, add } => mul * k + add,
            WidthSchedule::List(v) => v.get(k - 1).or(v.last()).copied().unwrap_or(0),
        }
    }
}

impl FromStr for WidthSchedule {
    type Err = TypeError;

    /// Accepts `k+c`, `ck`, `ck+d` or a comma separated list.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.replace(' ', "");
        let bad = || TypeError::Parse(format!("width schedule {s:?}"));
        if let Some(pos) = s.find('k') {
            let mul = if pos == 0 { 1 } else { s[..pos].trim_end_matches('*').parse().map_err(|_| bad())? };
            let rest = &s[pos + 1..];
            let add = if rest.is_empty() {
                0
            } else {
                rest.strip_prefix('+').ok_or_else(bad)?.parse().map_err(|_| bad())?
            };
            return Ok(WidthSchedule::Affine { mul, add });
        }
        let v = s.split(',').map(|t| t.parse().map_err(|_| bad())).collect::<Result<Vec<usize>, _>>()?;
        if v.is_empty() {
            return Err(bad());
        }
        Ok(WidthSchedule::List(v))
    }
}

/// Generator for the requested root sizes `r_k` (clamped by [`generate_type`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootSchedule {
    Zero,
    /// `0,1, 0,1,2, 0,1,2,3, …`: every `r` recurs infinitely often.
    Diagonal,
    /// Repeats the given pattern.
    Cycle(Vec<usize>),
    /// Explicit `r_1, r_2, …`; zero after the end.
    List(Vec<usize>),
}

impl RootSchedule {
    pub fn at(&self, k: usize) -> usize {
        match self {
            RootSchedule::Zero => 0,
            RootSchedule::Diagonal => {
                // blocks of lengths 2, 3, 4, … listing 0..=t
                let mut i = k - 1;
                let mut len = 2;
                while i >= len {
                    i -= len;
                    len += 1;
                }
                i
            }
            RootSchedule::Cycle(v) if v.is_empty() => 0,
            RootSchedule::Cycle(v) => v[(k - 1) % v.len()],
            RootSchedule::List(v) => v.get(k - 1).copied().unwrap_or(0),
        }
    }
}

impl FromStr for RootSchedule {
    type Err = TypeError;

    /// Accepts `zero`, `diag`, `cycle:a,b,c` or a comma separated list.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.replace(' ', "");
        let list = |t: &str| {
            t.split(',')
                .map(|x| x.parse::<usize>().map_err(|_| TypeError::Parse(format!("root schedule {s:?}"))))
                .collect::<Result<Vec<_>, _>>()
        };
        match s.as_str() {
            "zero" | "0" => Ok(RootSchedule::Zero),
            "diag" | "diagonal" => Ok(RootSchedule::Diagonal),
            _ => match s.strip_prefix("cycle:") {
                Some(rest) => Ok(RootSchedule::Cycle(list(rest)?)),
                None => Ok(RootSchedule::List(list(&s)?)),
            },
        }
    }
}

/// Runs the recurrence `m_k = n_k(m_{k-1} - r_k) + r_k` for `K` levels.
///
/// A requested `r_k ≥ m_{k-1}` is clamped to `m_{k-1} - 1`. A width schedule
/// with `n_k ≤ k` is reported as a type violation.
pub fn generate_type(widths: &WidthSchedule, roots: &RootSchedule, top: usize) -> Result<TypeSequence, TypeError> {
    let mut m = vec![1usize];
    let mut n = Vec::with_capacity(top);
    let mut r = Vec::with_capacity(top);
    for k in 1..=top {
        let prev = m[k - 1];
        let nk = widths.at(k);
        let rk = roots.at(k).min(prev - 1);
        let mk = (prev - rk)
            .checked_mul(nk)
            .and_then(|v| v.checked_add(rk))
            .ok_or(TypeError::Violation { clause: TypeClause::Recurrence, k })?;
        m.push(mk);
        n.push(nk);
        r.push(rk);
    }
    TypeSequence::new(m, n, r)
}

/// Largest `K` with `m_K ≤ max_size` under the given schedules.
pub fn largest_top(widths: &WidthSchedule, roots: &RootSchedule, max_size: usize) -> Result<TypeSequence, TypeError> {
    let mut best = generate_type(widths, roots, 0)?;
    for k in 1.. {
        match generate_type(widths, roots, k) {
            Ok(t) if t.m(k) <= max_size => best = t,
            Ok(_) | Err(TypeError::Violation { clause: TypeClause::Recurrence, .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}

/// A partition of the levels `k ≥ 1` into `block_count` blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSchedule {
    /// `assign[k]` is the block of level `k`; index 0 is unused.
    assign: Vec<usize>,
    block_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("block {0} is never used on the represented levels")]
    EmptyBlock(usize),
    #[error("level {k} is assigned to block {block}, but only {count} blocks exist")]
    OutOfRange { k: usize, block: usize, count: usize },
}

impl PartitionSchedule {
    /// `assign` lists the blocks of levels `1..=assign.len()`.
    pub fn new(assign: Vec<usize>, block_count: usize) -> Result<Self, PartitionError> {
        let mut used = vec![false; block_count];
        for (i, &b) in assign.iter().enumerate() {
            if b >= block_count {
                return Err(PartitionError::OutOfRange { k: i + 1, block: b, count: block_count });
            }
            used[b] = true;
        }
        if let Some(b) = used.iter().position(|u| !u) {
            return Err(PartitionError::EmptyBlock(b));
        }
        let mut full = vec![0];
        full.extend(assign);
        Ok(PartitionSchedule { assign: full, block_count })
    }

    /// Level `k` goes to block `k mod blocks`, for `k = 1..=top`.
    pub fn modulo(blocks: usize, top: usize) -> Result<Self, PartitionError> {
        Self::new((1..=top).map(|k| k % blocks.max(1)).collect(), blocks)
    }

    pub fn block_of(&self, k: usize) -> Option<usize> {
        if k == 0 {
            return None;
        }
        self.assign.get(k).copied()
    }

    pub fn contains(&self, block: usize, k: usize) -> bool {
        self.block_of(k) == Some(block)
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn levels(&self) -> usize {
        self.assign.len() - 1
    }
}

/// A finite set of naturals, kept as a strictly increasing vector.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FinSet(Vec<Elem>);

impl FinSet {
    pub fn new(mut elems: Vec<Elem>) -> Self {
        elems.sort_unstable();
        elems.dedup();
        FinSet(elems)
    }

    /// Wraps an already strictly increasing vector.
    pub fn from_sorted(elems: Vec<Elem>) -> Self {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        FinSet(elems)
    }

    pub fn empty() -> Self {
        FinSet(Vec::new())
    }

    /// `[lo, hi)`.
    pub fn range(lo: Elem, hi: Elem) -> Self {
        FinSet((lo..hi).collect())
    }

    pub fn as_slice(&self) -> &[Elem] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Elem> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Elem> + '_ {
        self.0.iter().copied()
    }

    pub fn min_elem(&self) -> Option<Elem> {
        self.0.first().copied()
    }

    pub fn max_elem(&self) -> Option<Elem> {
        self.0.last().copied()
    }

    pub fn contains(&self, x: Elem) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    /// Position of `x` in increasing order.
    pub fn position(&self, x: Elem) -> Option<usize> {
        self.0.binary_search(&x).ok()
    }

    pub fn is_subset(&self, other: &FinSet) -> bool {
        sorted_subset(&self.0, &other.0)
    }

    pub fn intersection(&self, other: &FinSet) -> FinSet {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        FinSet(out)
    }

    pub fn union(&self, other: &FinSet) -> FinSet {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        FinSet::new(v)
    }

    pub fn difference(&self, other: &FinSet) -> FinSet {
        FinSet(self.0.iter().copied().filter(|x| !other.contains(*x)).collect())
    }

    /// Elements `< bound` (the set `self ∩ bound` with `bound` read as an ordinal).
    pub fn below(&self, bound: Elem) -> FinSet {
        FinSet(self.0.iter().copied().take_while(|&x| x < bound).collect())
    }

    /// Elements `≥ bound` (the set `self ∖ bound`).
    pub fn at_or_above(&self, bound: Elem) -> FinSet {
        FinSet(self.0.iter().copied().skip_while(|&x| x < bound).collect())
    }

    /// `self ⊑ other`: `self` is an initial segment of `other`.
    /// Like `Display`, but runs of three or more consecutive naturals print as `a..b`.
    pub fn compact(&self) -> String {
        let mut parts = Vec::new();
        let mut i = 0;
        while i < self.0.len() {
            let mut j = i;
            while j + 1 < self.0.len() && self.0[j + 1] == self.0[j] + 1 {
                j += 1;
            }
            if j >= i + 2 {
                parts.push(format!("{}..{}", self.0[i], self.0[j]));
            } else {
                parts.extend(self.0[i..=j].iter().map(|x| x.to_string()));
            }
            i = j + 1;
        }
        format!("{{{}}}", parts.join(","))
    }

    pub fn is_initial_segment_of(&self, other: &FinSet) -> bool {
        self.0.len() <= other.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    /// `self` is a contiguous run of `other` (the empty set counts).
    pub fn is_interval_of(&self, other: &FinSet) -> bool {
        match self.min_elem() {
            None => true,
            Some(lo) => match other.position(lo) {
                Some(p) => other.0.len() >= p + self.0.len() && other.0[p..p + self.0.len()] == self.0[..],
                None => false,
            },
        }
    }
}

impl From<Vec<Elem>> for FinSet {
    fn from(v: Vec<Elem>) -> Self {
        FinSet::new(v)
    }
}

impl<const N: usize> From<[Elem; N]> for FinSet {
    fn from(v: [Elem; N]) -> Self {
        FinSet::new(v.to_vec())
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl FromStr for FinSet {
    type Err = std::num::ParseIntError;

    /// Whitespace or comma separated naturals, optionally in braces.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().trim_start_matches('{').trim_end_matches('}');
        let v = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Elem>, _>>()?;
        Ok(FinSet::new(v))
    }
}

pub(crate) fn sorted_subset<T: Ord>(a: &[T], b: &[T]) -> bool {
    let mut j = 0;
    for x in a {
        loop {
            match b.get(j) {
                None => return false,
                Some(y) if y < x => j += 1,
                Some(y) if y == x => {
                    j += 1;
                    break;
                }
                Some(_) => return false,
            }
        }
    }
    true
}

/// The ordinal `ω·limb + off`, for ordinals below `ω·M`.
///
/// The derived order compares `limb` first, which is the ordinal order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OrdinalCode {
    pub limb: u32,
    pub off: u32,
}

impl OrdinalCode {
    pub const fn new(limb: u32, off: u32) -> Self {
        OrdinalCode { limb, off }
    }

    pub const fn natural(n: u32) -> Self {
        OrdinalCode { limb: 0, off: n }
    }

    /// `ω·limb`.
    pub const fn limit(limb: u32) -> Self {
        OrdinalCode { limb, off: 0 }
    }

    pub fn is_limit(&self) -> bool {
        self.off == 0 && self.limb >= 1
    }

    pub fn is_natural(&self) -> bool {
        self.limb == 0
    }

    /// `self + i`; `None` on offset overflow.
    pub fn add(self, i: u32) -> Option<Self> {
        self.off.checked_add(i).map(|off| OrdinalCode { limb: self.limb, off })
    }

    /// The limit part `ω·limb` (zero for naturals).
    pub fn limit_part(&self) -> OrdinalCode {
        OrdinalCode { limb: self.limb, off: 0 }
    }
}

pub fn ord_add(delta: OrdinalCode, i: u32) -> Option<OrdinalCode> {
    delta.add(i)
}

pub fn ord_cmp(x: &OrdinalCode, y: &OrdinalCode) -> Ordering {
    x.cmp(y)
}

impl fmt::Display for OrdinalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.limb == 0 {
            write!(f, "{}", self.off)
        } else {
            write!(f, "w*{}+{}", self.limb, self.off)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed ordinal {0:?} (expected `<n>`, `w*<l>` or `w*<l>+<n>`)")]
pub struct OrdinalParseError(pub String);

impl FromStr for OrdinalCode {
    type Err = OrdinalParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.replace(' ', "");
        let bad = || OrdinalParseError(s.to_string());
        if let Some(rest) = t.strip_prefix("w*").or_else(|| t.strip_prefix("ω*")).or_else(|| t.strip_prefix("ω·")) {
            let (limb, off) = match rest.split_once('+') {
                Some((l, o)) => (l, o),
                None => (rest, "0"),
            };
            Ok(OrdinalCode { limb: limb.parse().map_err(|_| bad())?, off: off.parse().map_err(|_| bad())? })
        } else if let Some(rest) = t.strip_prefix('w').or_else(|| t.strip_prefix('ω')) {
            let off = match rest.strip_prefix('+') {
                Some(o) => o.parse().map_err(|_| bad())?,
                None if rest.is_empty() => 0,
                None => return Err(bad()),
            };
            Ok(OrdinalCode { limb: 1, off })
        } else {
            Ok(OrdinalCode::natural(t.parse().map_err(|_| bad())?))
        }
    }
}
