//! Colorings from schemes, the (★)_m search, and the posets ℙ_n.
//!
//! [`build_colorings`] assigns each `α` a sequence `f_α` of length `K+1`
//! such that captured tuples share a prefix and split at the capture level.
//! ℙ_n is the set of finite `P` containing no captured `(n+1)`-tuple of
//! singletons; [`pn_standard_family`] and [`p1_amalgam_check`] exercise its
//! amalgamation steps on concrete fragments.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::capturing::{captures, check_delta_system, find_capture, CaptureQuery, CaptureWitness, DeltaSystemFamily};
use crate::report::{Check, Report};
use crate::scheme::{order_iso, MemberId, Scheme};
use crate::types::{Elem, FinSet};

/// `f[α]` is the sequence `f_α`; `bound[k]` is `N_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColoringTable {
    f: Vec<Vec<u32>>,
    bound: Vec<u32>,
    /// Relative colorings `f^F` for every member, by level then index, by position in `F`.
    #[serde(skip)]
    relative: Vec<Vec<Vec<Vec<u32>>>>,
}

impl ColoringTable {
    pub fn f(&self, alpha: Elem) -> &[u32] {
        &self.f[alpha as usize]
    }

    pub fn bounds(&self) -> &[u32] {
        &self.bound
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// `f^F_α` for `α` at position `pos` of member `id`.
    pub fn relative(&self, id: MemberId, pos: usize) -> &[u32] {
        &self.relative[id.level][id.idx][pos]
    }

    /// One line per `α`: `α: v0 v1 …`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (a, seq) in self.f.iter().enumerate() {
            out.push_str(&format!("{a}:"));
            for v in seq {
                out.push_str(&format!(" {v}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn build_colorings(s: &Scheme) -> ColoringTable {
    let mut bound = vec![1u32];
    let mut relative: Vec<Vec<Vec<Vec<u32>>>> = vec![s.level(0).iter().map(|_| vec![vec![0]]).collect()];
    for k in 1..=s.top() {
        let prev = bound[k - 1];
        bound.push(prev + s.typ().n(k) as u32 + 1);
        let level: Vec<Vec<Vec<u32>>> = s
            .level_ids(k)
            .map(|id| {
                let root = s.root(id);
                let pieces = s.pieces(id);
                s.set(id)
                    .iter()
                    .map(|a| {
                        let (i, value) = if root.contains(a) {
                            (0, prev)
                        } else {
                            let i = pieces.iter().position(|p| s.set(*p).contains(a)).expect("pieces cover F");
                            (i, prev + i as u32 + 1)
                        };
                        let p = pieces[i];
                        let mut seq = relative[k - 1][p.idx][s.set(p).position(a).unwrap()].clone();
                        seq.push(value);
                        seq
                    })
                    .collect()
            })
            .collect();
        relative.push(level);
    }
    let top = s.top();
    let f = if s.level(top).len() == 1 {
        relative[top][0].clone()
    } else {
        // a fragment without a single top member: use the first member containing α
        (0..s.universe())
            .map(|a| {
                let id = s.containing(top, a).next().expect("cofinal");
                relative[top][id.idx][s.set(id).position(a).unwrap()].clone()
            })
            .collect()
    };
    ColoringTable { f, bound, relative }
}

/// Transport, coherence, the `N` recursion and the range of every coordinate.
pub fn verify_colorings(s: &Scheme, t: &ColoringTable) -> Report {
    let mut report = Report::new("coloring invariants");
    let mut transport = Check::new("transport (same-level members agree by position)");
    for k in 0..=s.top() {
        let first = &t.relative[k][0];
        for (idx, rel) in t.relative[k].iter().enumerate() {
            transport.count(1);
            if rel != first {
                transport.fail(format!("level {k}: {} differs from {}", s.set(MemberId { level: k, idx }), s.set(MemberId { level: k, idx: 0 })));
            }
        }
    }
    report.push(transport);
    let mut coherence = Check::new("coherence (f_α restricted to l+1 equals f^E_α)");
    for id in s.ids() {
        for (pos, a) in s.set(id).iter().enumerate() {
            coherence.count(1);
            if t.f(a)[..=id.level] != *t.relative(id, pos) {
                coherence.fail(format!("α={a} in {} at level {}", s.set(id), id.level));
            }
        }
    }
    report.push(coherence);
    let mut rec = Check::new("N_k = N_{k-1} + n_k + 1, N_0 = 1");
    rec.count(t.bound.len() as u64);
    if t.bound.first() != Some(&1) {
        rec.fail("N_0 != 1");
    }
    for k in 1..t.bound.len() {
        if t.bound[k] != t.bound[k - 1] + s.typ().n(k) as u32 + 1 {
            rec.fail(format!("N_{k} = {}", t.bound[k]));
        }
    }
    report.push(rec);
    let mut range = Check::new("f_α(k) < N_k");
    for (a, seq) in t.f.iter().enumerate() {
        for (k, v) in seq.iter().enumerate() {
            range.count(1);
            if *v >= t.bound[k] {
                range.fail(format!("f_{a}({k}) = {v} >= N_{k} = {}", t.bound[k]));
            }
        }
    }
    report.push(range);
    report
}

/// Scans every singleton capture `(φ_i(α_0))_{i<n}` with `2 ≤ n ≤ max_arity`
/// and checks that the colors share the length-`k` prefix and split into `n`
/// values at coordinate `k`.
pub fn coloring_bridge(s: &Scheme, t: &ColoringTable, max_arity: usize) -> Report {
    let mut report = Report::new("coloring bridge");
    let mut c = Check::new("captured tuples share a prefix and split at the capture level");
    let mut witnessed = Check::new("scanned tuples re-validate as captures");
    for k in 1..=s.top() {
        let width = s.typ().n(k);
        for id in s.level_ids(k) {
            let root = s.root(id);
            let pieces: Vec<&FinSet> = s.pieces(id).into_iter().map(|p| s.set(p)).collect();
            for (pos, a0) in pieces[0].iter().enumerate() {
                if root.contains(a0) {
                    continue;
                }
                let tuple: Vec<Elem> = pieces.iter().map(|p| p.as_slice()[pos]).collect();
                for n in 2..=max_arity.min(width) {
                    let xs = &tuple[..n];
                    let fam = DeltaSystemFamily::singletons(&FinSet::from_sorted(xs.to_vec()));
                    let idx: Vec<usize> = (0..n).collect();
                    witnessed.count(1);
                    if !captures(s, s.set(id), &fam, &idx).unwrap_or(false) {
                        witnessed.fail(format!("{xs:?} in {}", s.set(id)));
                    }
                    c.count(1);
                    let prefix = &t.f(xs[0])[..k];
                    let mut values: Vec<u32> = xs.iter().map(|&x| t.f(x)[k]).collect();
                    values.sort();
                    values.dedup();
                    if xs.iter().any(|&x| &t.f(x)[..k] != prefix) || values.len() != n {
                        c.fail(format!("tuple {xs:?} captured at level {k} by {}", s.set(id)));
                    }
                }
            }
        }
    }
    report.push(witnessed);
    report.push(c);
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StarError {
    #[error("sequences {0} and {1} are equal")]
    Duplicate(usize, usize),
    #[error("sequence {0} has length {1}, expected {2}")]
    Ragged(usize, usize, usize),
    #[error("need at least m+1 = {0} sequences, got {1}")]
    TooFew(usize, usize),
    #[error("row {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A finite family of equal-length sequences and the arity `m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StarInstance {
    rows: Vec<Vec<u32>>,
    m: usize,
}

impl StarInstance {
    pub fn new(rows: Vec<Vec<u32>>, m: usize) -> Result<Self, StarError> {
        if rows.len() < m + 1 {
            return Err(StarError::TooFew(m + 1, rows.len()));
        }
        let len = rows[0].len();
        let mut seen: HashMap<&[u32], usize> = HashMap::new();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != len {
                return Err(StarError::Ragged(i, r.len(), len));
            }
            if let Some(j) = seen.insert(r, i) {
                return Err(StarError::Duplicate(j, i));
            }
        }
        Ok(StarInstance { rows, m })
    }

    /// Rows in the coloring export format; a leading `α:` label is ignored.
    pub fn parse(text: &str, m: usize) -> Result<Self, StarError> {
        let rows = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(no, l)| {
                let body = l.split_once(':').map_or(l, |(_, b)| b);
                body.split_whitespace()
                    .map(|t| t.parse::<u32>().map_err(|e| StarError::Parse { line: no + 1, msg: format!("{t:?}: {e}") }))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        StarInstance::new(rows, m)
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StarHit {
    pub k: usize,
    pub rows: Vec<usize>,
}

/// Least `k` at which `m+1` rows share the prefix `↾k` and take `m+1` distinct
/// values at `k`. Within a level, prefixes are tried in lexicographic order
/// and the earliest row for each value is used.
pub fn star_search(inst: &StarInstance) -> Option<StarHit> {
    let len = inst.rows.first().map_or(0, Vec::len);
    for k in 0..len {
        let mut groups: BTreeMap<&[u32], BTreeMap<u32, usize>> = BTreeMap::new();
        for (i, r) in inst.rows.iter().enumerate() {
            groups.entry(&r[..k]).or_default().entry(r[k]).or_insert(i);
        }
        for values in groups.values() {
            if values.len() > inst.m {
                let mut rows: Vec<usize> = values.values().copied().collect();
                rows.sort();
                rows.truncate(inst.m + 1);
                return Some(StarHit { k, rows });
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PnCounterexample {
    pub tuple: Vec<Elem>,
    pub witness: CaptureWitness,
}

impl fmt::Display for PnCounterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tuple {:?} captured at {}", self.tuple, self.witness)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PnError {
    #[error("the arity parameter must be at least 1")]
    ArityZero,
    #[error("{0}")]
    Captured(Box<PnCounterexample>),
    #[error("base is not a condition: {0}")]
    BaseNotCondition(Box<PnCounterexample>),
    #[error("no level-{level} member contains {set}")]
    NotInsideLevel { level: usize, set: FinSet },
    #[error("fewer than {wanted} Δ-positioned level-{level} members carry the base")]
    InsufficientWidth { level: usize, wanted: usize },
    #[error("copy {0} is not a condition: {1}")]
    CopyNotCondition(usize, Box<PnCounterexample>),
    #[error("bad scenario: {0}")]
    BadScenario(String),
}

/// A finite `P` with no captured `(n+1)`-tuple of singletons.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PnCondition {
    p: FinSet,
    n: usize,
}

impl PnCondition {
    pub fn new(s: &Scheme, p: FinSet, n: usize) -> Result<Self, PnError> {
        pn_is_condition(s, &p, n)?;
        Ok(PnCondition { p, n })
    }

    pub fn set(&self) -> &FinSet {
        &self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// `Ok` when no `ξ_0 < … < ξ_n` in `P` has its singleton family captured.
pub fn pn_is_condition(s: &Scheme, p: &FinSet, n: usize) -> Result<(), PnError> {
    if n == 0 {
        return Err(PnError::ArityZero);
    }
    if p.len() < n + 1 {
        return Ok(());
    }
    let fam = DeltaSystemFamily::singletons(p);
    let search = find_capture(s, &fam, &CaptureQuery::fixed(n + 1)).expect("arity >= 2");
    match search.witness {
        None => Ok(()),
        Some(w) => {
            let tuple = w.indices.iter().map(|&i| p.as_slice()[i]).collect();
            Err(PnError::Captured(Box::new(PnCounterexample { tuple, witness: w })))
        }
    }
}

/// `t` copies `P_i = φ_{D_0,D_i}(P)` of the base along level-`k` members
/// `D_0, …, D_{t-1}` forming an increasing Δ-system.
///
/// The `D_i` are images `φ_i(D_0)` under the pieces of a higher member `G`
/// with `D_0 ⊆ G_0` and `D_0 ⊄ R(G)`; the first such `(D_0, G)` in search
/// order is used.
pub fn pn_standard_family(s: &Scheme, base: &PnCondition, level: usize, t: usize) -> Result<Vec<PnCondition>, PnError> {
    let (dees, _) = standard_members(s, base, level, t)?;
    copies_along(s, base, &dees)
}

/// The members carrying the copies, with the higher member that produced them.
pub fn standard_members(s: &Scheme, base: &PnCondition, level: usize, t: usize) -> Result<(Vec<MemberId>, Option<MemberId>), PnError> {
    pn_is_condition(s, base.set(), base.n()).map_err(|e| match e {
        PnError::Captured(c) => PnError::BaseNotCondition(c),
        other => other,
    })?;
    if level > s.top() {
        return Err(PnError::NotInsideLevel { level, set: base.set().clone() });
    }
    let holders: Vec<MemberId> = s.level_ids(level).filter(|&id| base.set().is_subset(s.set(id))).collect();
    if holders.is_empty() {
        return Err(PnError::NotInsideLevel { level, set: base.set().clone() });
    }
    if t <= 1 {
        return Ok((vec![holders[0]], None));
    }
    for &d0 in &holders {
        let d = s.set(d0);
        for j in level + 1..=s.top() {
            if s.typ().n(j) < t {
                continue;
            }
            for g in s.level_ids(j) {
                let pieces = s.pieces(g);
                let g0 = s.set(pieces[0]);
                if !d.is_subset(g0) || d.is_subset(&s.root(g)) {
                    continue;
                }
                let images: Option<Vec<MemberId>> = pieces[..t]
                    .iter()
                    .map(|&p| order_iso(g0, s.set(p)).ok()?.image(d).and_then(|im| s.find_at(level, &im)))
                    .collect();
                if let Some(dees) = images {
                    let sets: Vec<FinSet> = dees.iter().map(|&x| s.set(x).clone()).collect();
                    if check_delta_system(sets).is_ok() {
                        return Ok((dees, Some(g)));
                    }
                }
            }
        }
    }
    Err(PnError::InsufficientWidth { level, wanted: t })
}

fn copies_along(s: &Scheme, base: &PnCondition, dees: &[MemberId]) -> Result<Vec<PnCondition>, PnError> {
    let d0 = s.set(dees[0]);
    dees.iter()
        .enumerate()
        .map(|(i, &d)| {
            let p = order_iso(d0, s.set(d)).expect("same level").image(base.set()).expect("P inside D_0");
            PnCondition::new(s, p, base.n()).map_err(|e| match e {
                PnError::Captured(c) => PnError::CopyNotCondition(i, c),
                other => other,
            })
        })
        .collect()
}

/// `Q = ⋃ P_i`, validated as a ℙ_n condition.
pub fn pn_union_check(s: &Scheme, conds: &[PnCondition], n: usize) -> Result<PnCondition, PnError> {
    let q = conds.iter().fold(FinSet::empty(), |acc, c| acc.union(c.set()));
    PnCondition::new(s, q, n)
}

/// Capture data for one amalgamation step: `F` captures `(D_α, D_β)`, each `D`
/// captures its pair of conditions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct P1Scenario {
    pub f: FinSet,
    pub d_alpha: FinSet,
    pub d_beta: FinSet,
    pub p_alpha: [FinSet; 2],
    pub p_beta: [FinSet; 2],
}

fn captures_pair(s: &Scheme, f: &FinSet, a: &FinSet, b: &FinSet) -> Result<(), String> {
    let fam = check_delta_system(vec![a.clone(), b.clone()]).map_err(|e| format!("({a}, {b}): {e}"))?;
    match captures(s, f, &fam, &[0, 1]) {
        Ok(true) => Ok(()),
        Ok(false) => Err(format!("{f} does not capture ({a}, {b})")),
        Err(e) => Err(e.to_string()),
    }
}

/// Re-validates the capture data (including that the four conditions form
/// one increasing Δ-system), then reports whether `P_{α'} ∪ P_{β''}` is a ℙ_1 condition.
pub fn p1_amalgam_check(s: &Scheme, sc: &P1Scenario) -> Result<bool, PnError> {
    captures_pair(s, &sc.f, &sc.d_alpha, &sc.d_beta).map_err(PnError::BadScenario)?;
    captures_pair(s, &sc.d_alpha, &sc.p_alpha[0], &sc.p_alpha[1]).map_err(PnError::BadScenario)?;
    captures_pair(s, &sc.d_beta, &sc.p_beta[0], &sc.p_beta[1]).map_err(PnError::BadScenario)?;
    let all: Vec<FinSet> = sc.p_alpha.iter().chain(&sc.p_beta).cloned().collect();
    check_delta_system(all).map_err(|e| PnError::BadScenario(format!("conditions: {e}")))?;
    for p in sc.p_alpha.iter().chain(&sc.p_beta) {
        if pn_is_condition(s, p, 1).is_err() {
            return Err(PnError::BadScenario(format!("{p} is not a ℙ_1 condition")));
        }
    }
    Ok(pn_is_condition(s, &sc.p_alpha[0].union(&sc.p_beta[1]), 1).is_ok())
}

/// Seeded scenarios: `F` of level `≥ 2` with `D_α = F_0`, `D_β = F_1`;
/// `P_{α'} = s ∪ t` with `s ⊆ R(D_α)` and non-empty `t ⊆ (D_α)_0 ∖ R(D_α)`,
/// `P_{α''}` its image in `(D_α)_1`, and the β pair transported to `D_β`.
/// `s` is drawn inside `R(F)` as well so that the four sets share one root.
/// Draws that are not a Δ-system of ℙ_1 conditions are discarded.
pub fn p1_scenarios(s: &Scheme, count: usize, seed: u64) -> Vec<P1Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<MemberId> = (2..=s.top()).flat_map(|k| s.level_ids(k)).collect();
    let mut out = Vec::new();
    if candidates.is_empty() {
        return out;
    }
    let mut attempts = 0;
    while out.len() < count && attempts < count * 200 {
        attempts += 1;
        let f = *candidates.choose(&mut rng).unwrap();
        let fp = s.pieces(f);
        let (da, db) = (fp[0], fp[1]);
        let dp = s.pieces(da);
        let (r, a0, a1) = (s.root(da), s.set(dp[0]), s.set(dp[1]));
        let shared = r.intersection(&s.root(f));
        let low: Vec<Elem> = shared.iter().filter(|_| rng.gen_bool(0.5)).collect();
        let free: Vec<Elem> = a0.difference(&r).iter().collect();
        let take = rng.gen_range(1..=free.len().min(3));
        let high: Vec<Elem> = free.choose_multiple(&mut rng, take).copied().collect();
        let pa0 = FinSet::new(low.into_iter().chain(high).collect());
        let pa1 = order_iso(a0, a1).unwrap().image(&pa0).unwrap();
        let to_beta = order_iso(s.set(da), s.set(db)).unwrap();
        let sc = P1Scenario {
            f: s.set(f).clone(),
            d_alpha: s.set(da).clone(),
            d_beta: s.set(db).clone(),
            p_beta: [to_beta.image(&pa0).unwrap(), to_beta.image(&pa1).unwrap()],
            p_alpha: [pa0, pa1],
        };
        let all: Vec<FinSet> = sc.p_alpha.iter().chain(&sc.p_beta).cloned().collect();
        let valid = check_delta_system(all).is_ok() && sc.p_alpha.iter().chain(&sc.p_beta).all(|p| pn_is_condition(s, p, 1).is_ok());
        if valid && !out.contains(&sc) {
            out.push(sc);
        }
    }
    out
}
