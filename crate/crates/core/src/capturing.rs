//! Δ-systems and capture search.
//!
//! A family is an *increasing* Δ-system when all pairwise intersections
//! equal a common root `s` and `s < s_0∖s < s_1∖s < …`. A member `F` of
//! level `k` with canonical decomposition `F_0, …, F_{n_k-1}` captures
//! `s_{ξ_0}, …, s_{ξ_{n-1}}` when `s ⊆ R(F)`, each `s_{ξ_i}∖s ⊆ F_i∖R(F)`
//! and the increasing bijection `F_0 → F_i` carries `s_{ξ_0}` onto `s_{ξ_i}`.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::scheme::{MemberId, Scheme};
use crate::types::{FinSet, PartitionSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeltaViolation {
    RootMismatch,
    NotIncreasing,
}

impl fmt::Display for DeltaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeltaViolation::RootMismatch => "root-mismatch",
            DeltaViolation::NotIncreasing => "not-increasing",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaptureError {
    #[error("empty family")]
    Empty,
    #[error("not a Δ-system: members {0} and {1} ({2})")]
    NotADeltaSystem(usize, usize, DeltaViolation),
    #[error("no sub-family of size >= 2 forms an increasing Δ-system")]
    TooSmall,
    #[error("{0} is not a member of level >= 1")]
    NotAMember(FinSet),
    #[error("arity {n} exceeds the width n_k = {width}")]
    ArityTooLarge { n: usize, width: usize },
    #[error("bad index tuple: {0}")]
    BadIndices(String),
    #[error("arity must be at least 2, got {0}")]
    ArityTooSmall(usize),
    #[error("family line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A validated increasing Δ-system `(s_ξ)` with root `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeltaSystemFamily {
    root: FinSet,
    members: Vec<FinSet>,
}

impl DeltaSystemFamily {
    pub fn root(&self) -> &FinSet {
        &self.root
    }

    pub fn members(&self) -> &[FinSet] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The singleton family `({x} : x ∈ set)`.
    pub fn singletons(set: &FinSet) -> Self {
        DeltaSystemFamily { root: FinSet::empty(), members: set.iter().map(|x| FinSet::from_sorted(vec![x])).collect() }
    }
}

/// Validates a list as an increasing Δ-system. A one-member list has the empty root.
pub fn check_delta_system(family: Vec<FinSet>) -> Result<DeltaSystemFamily, CaptureError> {
    if family.is_empty() {
        return Err(CaptureError::Empty);
    }
    let root = if family.len() == 1 { FinSet::empty() } else { family[0].intersection(&family[1]) };
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            if family[i].intersection(&family[j]) != root {
                return Err(CaptureError::NotADeltaSystem(i, j, DeltaViolation::RootMismatch));
            }
        }
    }
    let mut prev = root.max_elem();
    for (i, s) in family.iter().enumerate() {
        let rest = s.difference(&root);
        match (rest.min_elem(), rest.max_elem()) {
            (Some(lo), Some(hi)) if prev.map_or(true, |p| lo > p) => prev = Some(hi),
            _ if family.len() == 1 => {}
            _ => return Err(CaptureError::NotADeltaSystem(i.max(1) - 1, i.max(1), DeltaViolation::NotIncreasing)),
        }
    }
    Ok(DeltaSystemFamily { root, members: family })
}

/// A largest sub-family forming an increasing Δ-system, with ties broken by
/// the lexicographically least index set. Returns the chosen indices too.
///
/// Candidate roots are the pairwise intersections. For a fixed root the
/// members containing it whose remainder sits above the root are intervals
/// `[min, max]` of their remainders, and an increasing Δ-system is exactly a
/// set of pairwise disjoint such intervals.
pub fn extract_delta_system(family: &[FinSet]) -> Result<(Vec<usize>, DeltaSystemFamily), CaptureError> {
    let mut roots: Vec<FinSet> = Vec::new();
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            roots.push(family[i].intersection(&family[j]));
        }
    }
    roots.sort();
    roots.dedup();
    let mut best: Option<Vec<usize>> = None;
    for root in &roots {
        let spans: Vec<(usize, u32, u32)> = family
            .iter()
            .enumerate()
            .filter(|(_, s)| root.is_subset(s))
            .filter_map(|(i, s)| {
                let rest = s.difference(root);
                let (lo, hi) = (rest.min_elem()?, rest.max_elem()?);
                root.max_elem().map_or(true, |r| lo > r).then_some((i, lo, hi))
            })
            .collect();
        let chosen = lex_least_max_disjoint(&spans);
        if chosen.len() >= 2 {
            let better = match &best {
                None => true,
                Some(b) => chosen.len() > b.len() || (chosen.len() == b.len() && chosen < *b),
            };
            if better {
                best = Some(chosen);
            }
        }
    }
    let idx = best.ok_or(CaptureError::TooSmall)?;
    let mut members: Vec<FinSet> = idx.iter().map(|&i| family[i].clone()).collect();
    members.sort_by_key(|s| s.iter().last());
    let mut order: Vec<usize> = idx.clone();
    order.sort_by_key(|&i| family[i].iter().last());
    let fam = check_delta_system(members)?;
    Ok((order, fam))
}

/// Maximum number of pairwise disjoint intervals, as the lexicographically least index set.
fn lex_least_max_disjoint(spans: &[(usize, u32, u32)]) -> Vec<usize> {
    fn greedy_count(spans: &[(usize, u32, u32)], chosen: &[(u32, u32)]) -> usize {
        let mut free: Vec<(u32, u32)> = spans
            .iter()
            .map(|&(_, lo, hi)| (lo, hi))
            .filter(|&(lo, hi)| chosen.iter().all(|&(a, b)| hi < a || b < lo))
            .collect();
        free.sort_by_key(|&(_, hi)| hi);
        let mut last: Option<u32> = None;
        let mut n = 0;
        for (lo, hi) in free {
            if last.map_or(true, |l| lo > l) {
                n += 1;
                last = Some(hi);
            }
        }
        n
    }
    let target = greedy_count(spans, &[]);
    let mut chosen: Vec<(u32, u32)> = Vec::new();
    let mut picked = Vec::new();
    for &(i, lo, hi) in spans {
        if picked.len() == target {
            break;
        }
        if chosen.iter().any(|&(a, b)| !(hi < a || b < lo)) {
            continue;
        }
        let mut with = chosen.clone();
        with.push((lo, hi));
        if with.len() + greedy_count(spans, &with) == target {
            chosen = with;
            picked.push(i);
        }
    }
    picked
}

/// Which capture clause a candidate failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaptureClause {
    RootInside,
    PieceContainment(usize),
    Transport(usize),
}

/// Evaluates the three capture clauses for sorted slices over any ordered type.
/// `pieces` are the chosen pieces in order; `members` the chosen family members.
pub fn capture_clauses<T: Ord + Clone>(root_f: &[T], pieces: &[&[T]], s: &[T], members: &[&[T]]) -> Result<(), CaptureClause> {
    use crate::types::sorted_subset;
    if !sorted_subset(s, root_f) {
        return Err(CaptureClause::RootInside);
    }
    for (i, (m, p)) in members.iter().zip(pieces).enumerate() {
        let rest: Vec<T> = m.iter().filter(|x| s.binary_search(x).is_err()).cloned().collect();
        let outside_root = rest.iter().all(|x| root_f.binary_search(x).is_err());
        if !outside_root || !sorted_subset(&rest, p) {
            return Err(CaptureClause::PieceContainment(i));
        }
    }
    let (Some(first), Some(p0)) = (members.first(), pieces.first()) else {
        return Ok(());
    };
    for (i, (m, p)) in members.iter().zip(pieces).enumerate().skip(1) {
        if p.len() != p0.len() {
            return Err(CaptureClause::Transport(i));
        }
        let image: Option<Vec<T>> = first
            .iter()
            .map(|x| p0.binary_search(x).ok().map(|pos| p[pos].clone()))
            .collect();
        if image.as_deref() != Some(*m) {
            return Err(CaptureClause::Transport(i));
        }
    }
    Ok(())
}

/// Whether `F` captures the members at `indices`, using the first `n` pieces of `F`.
pub fn captures(s: &Scheme, f: &FinSet, family: &DeltaSystemFamily, indices: &[usize]) -> Result<bool, CaptureError> {
    let n = indices.len();
    captures_with_pieces(s, f, family, indices, &(0..n).collect::<Vec<_>>())
}

/// As [`captures`], with an explicit increasing choice of pieces.
pub fn captures_with_pieces(
    s: &Scheme,
    f: &FinSet,
    family: &DeltaSystemFamily,
    indices: &[usize],
    pieces: &[usize],
) -> Result<bool, CaptureError> {
    let id = s.find(f).filter(|id| id.level >= 1).ok_or_else(|| CaptureError::NotAMember(f.clone()))?;
    let width = s.typ().n(id.level);
    if indices.len() > width {
        return Err(CaptureError::ArityTooLarge { n: indices.len(), width });
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) || indices.iter().any(|&i| i >= family.len()) {
        return Err(CaptureError::BadIndices(format!("{indices:?}")));
    }
    if pieces.len() != indices.len() || pieces.windows(2).any(|w| w[0] >= w[1]) || pieces.iter().any(|&p| p >= width) {
        return Err(CaptureError::BadIndices(format!("pieces {pieces:?}")));
    }
    Ok(capture_at(s, id, family, indices, pieces).is_ok())
}

fn capture_at(s: &Scheme, id: MemberId, family: &DeltaSystemFamily, indices: &[usize], pieces: &[usize]) -> Result<(), CaptureClause> {
    let root = s.root(id);
    let piece_sets: Vec<&FinSet> = pieces.iter().map(|&p| s.set(s.piece(id, p))).collect();
    let piece_slices: Vec<&[u32]> = piece_sets.iter().map(|p| p.as_slice()).collect();
    let members: Vec<&[u32]> = indices.iter().map(|&i| family.members()[i].as_slice()).collect();
    capture_clauses(root.as_slice(), &piece_slices, family.root().as_slice(), &members)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Arity {
    Fixed(usize),
    /// `n = n_k` of the witnessing level.
    Full,
}

/// Constraints on a capture witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaptureQuery {
    pub arity: Arity,
    /// Witness levels must satisfy `k > min_level`.
    pub min_level: usize,
    /// Restrict the witness level to one block of a partition.
    pub block: Option<(PartitionSchedule, usize)>,
    /// Allow any increasing choice of pieces instead of the first `n`.
    pub any_pieces: bool,
}

impl CaptureQuery {
    pub fn fixed(n: usize) -> Self {
        CaptureQuery { arity: Arity::Fixed(n), min_level: 0, block: None, any_pieces: false }
    }

    pub fn full() -> Self {
        CaptureQuery { arity: Arity::Full, min_level: 0, block: None, any_pieces: false }
    }

    pub fn min_level(mut self, k: usize) -> Self {
        self.min_level = k;
        self
    }

    pub fn in_block(mut self, parts: PartitionSchedule, block: usize) -> Self {
        self.block = Some((parts, block));
        self
    }

    pub fn validate(&self) -> Result<(), CaptureError> {
        match self.arity {
            Arity::Fixed(n) if n < 2 => Err(CaptureError::ArityTooSmall(n)),
            _ => Ok(()),
        }
    }

    /// Whether level `k` may hold a witness, and the arity there.
    pub fn arity_at(&self, s: &Scheme, k: usize) -> Option<usize> {
        if k == 0 || k <= self.min_level || k > s.top() {
            return None;
        }
        if let Some((parts, b)) = &self.block {
            if !parts.contains(*b, k) {
                return None;
            }
        }
        let width = s.typ().n(k);
        match self.arity {
            Arity::Fixed(n) if n <= width => Some(n),
            Arity::Fixed(_) => None,
            Arity::Full => Some(width),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaptureWitness {
    pub f: FinSet,
    pub member: MemberId,
    pub level: usize,
    pub indices: Vec<usize>,
    pub pieces: Vec<usize>,
    pub arity: usize,
}

impl fmt::Display for CaptureWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "level {}; F={}; indices={:?}", self.level, self.f, self.indices)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CaptureStats {
    pub levels_scanned: usize,
    pub members_scanned: usize,
    pub rejected_root: usize,
    pub rejected_piece: usize,
    pub rejected_transport: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaptureSearch {
    pub witness: Option<CaptureWitness>,
    pub stats: CaptureStats,
}

/// The least witness under (level, member order, index order) meeting `query`.
pub fn find_capture(s: &Scheme, family: &DeltaSystemFamily, query: &CaptureQuery) -> Result<CaptureSearch, CaptureError> {
    query.validate()?;
    let mut stats = CaptureStats::default();
    let position: HashMap<&FinSet, usize> = family.members().iter().enumerate().map(|(i, m)| (m, i)).collect();
    for k in 1..=s.top() {
        let Some(n) = query.arity_at(s, k) else { continue };
        stats.levels_scanned += 1;
        if n > family.len() {
            continue;
        }
        for id in s.level_ids(k) {
            stats.members_scanned += 1;
            let found = if query.any_pieces {
                search_any_pieces(s, id, family, n, &mut stats)
            } else {
                search_first_pieces(s, id, family, n, &position, &mut stats)
            };
            if let Some((indices, pieces)) = found {
                let witness = CaptureWitness { f: s.set(id).clone(), member: id, level: k, indices, pieces, arity: n };
                return Ok(CaptureSearch { witness: Some(witness), stats });
            }
        }
    }
    Ok(CaptureSearch { witness: None, stats })
}

fn search_first_pieces(
    s: &Scheme,
    id: MemberId,
    family: &DeltaSystemFamily,
    n: usize,
    position: &HashMap<&FinSet, usize>,
    stats: &mut CaptureStats,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let root = s.root(id);
    if !family.root().is_subset(&root) {
        stats.rejected_root += 1;
        return None;
    }
    let p0 = s.set(s.piece(id, 0));
    let p0_rest = p0.difference(&root);
    let targets: Vec<&FinSet> = (0..n).map(|i| s.set(s.piece(id, i))).collect();
    for (x0, m0) in family.members().iter().enumerate() {
        if !m0.difference(family.root()).is_subset(&p0_rest) {
            stats.rejected_piece += 1;
            continue;
        }
        let mut indices = vec![x0];
        for p in targets.iter().skip(1) {
            let image = FinSet::from_sorted(m0.iter().map(|x| p.as_slice()[p0.position(x).unwrap()]).collect());
            match position.get(&image) {
                Some(&j) if j > *indices.last().unwrap() => indices.push(j),
                _ => break,
            }
        }
        if indices.len() == n {
            return Some((indices, (0..n).collect()));
        }
        stats.rejected_transport += 1;
    }
    None
}

fn search_any_pieces(s: &Scheme, id: MemberId, family: &DeltaSystemFamily, n: usize, stats: &mut CaptureStats) -> Option<(Vec<usize>, Vec<usize>)> {
    let width = s.typ().n(id.level);
    let mut best: Option<(Vec<usize>, Vec<usize>)> = None;
    for pieces in combinations(width, n) {
        for indices in combinations(family.len(), n) {
            if best.as_ref().is_some_and(|(b, _)| indices >= *b) {
                break;
            }
            match capture_at(s, id, family, &indices, &pieces) {
                Ok(()) => {
                    best = Some((indices, pieces.clone()));
                    break;
                }
                Err(CaptureClause::RootInside) => {
                    stats.rejected_root += 1;
                    return None;
                }
                Err(CaptureClause::PieceContainment(_)) => stats.rejected_piece += 1,
                Err(CaptureClause::Transport(_)) => stats.rejected_transport += 1,
            }
        }
    }
    best
}

/// All increasing `n`-tuples from `0..len`, in lexicographic order.
pub fn combinations(len: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = if n <= len { Some((0..n).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let c = cur.as_mut().unwrap();
        let mut i = n;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if c[i] < len - n + i {
                c[i] += 1;
                for j in i + 1..n {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

/// One set per line, elements separated by whitespace.
pub fn parse_family(text: &str) -> Result<Vec<FinSet>, CaptureError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(no, l)| l.parse::<FinSet>().map_err(|e| CaptureError::Parse { line: no + 1, msg: e.to_string() }))
        .collect()
}
