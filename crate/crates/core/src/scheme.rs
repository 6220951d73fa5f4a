//! Finite fragments of construction schemes on `[0, m_K)`.
//!
//! A [`Scheme`] stores every member level by level (each level sorted
//! lexicographically) together with its root size and canonical
//! decomposition. [`build_scheme`] produces the canonical fragment for a
//! type; [`Scheme::from_levels`] accepts an arbitrary family and derives the
//! decompositions from containment so the verifiers can judge it.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::{Check, Report};
use crate::types::{Elem, FinSet, TypeError, TypeSequence};

/// Position of a member: its level and its index in the lexicographic order of that level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MemberId {
    pub level: usize,
    pub idx: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Member {
    pub set: FinSet,
    pub root_len: usize,
    /// Indices into the level below, ordered as the canonical decomposition.
    pub pieces: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error("{0} is not a member of the scheme")]
    NotAMember(FinSet),
    #[error("order_iso needs equal sizes, got {0} and {1}")]
    SizeMismatch(usize, usize),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("canonical builder produced an invalid scheme: {0}")]
    ConstructionFailure(String),
    #[error("requested level {requested} but the type only has {available}")]
    TooDeep { requested: usize, available: usize },
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("scheme file line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone)]
pub struct Scheme {
    typ: TypeSequence,
    levels: Vec<Vec<Member>>,
    index: Vec<HashMap<FinSet, usize>>,
    /// For each level, member indices grouped by their least element.
    by_min: Vec<Vec<Vec<usize>>>,
    /// For each level, member indices grouped by each element they contain.
    by_elem: Vec<Vec<Vec<usize>>>,
    universe: Elem,
}

impl PartialEq for Scheme {
    fn eq(&self, other: &Self) -> bool {
        self.typ == other.typ && self.levels == other.levels && self.universe == other.universe
    }
}

/// Position lists of the canonical decomposition of the spine member `[0, m_k)`.
fn spine_pieces(typ: &TypeSequence, k: usize) -> Vec<Vec<usize>> {
    let (prev, r) = (typ.m(k - 1), typ.r(k));
    let step = prev - r;
    (0..typ.n(k))
        .map(|i| {
            if i == 0 {
                (0..prev).collect()
            } else {
                let lo = prev + (i - 1) * step;
                (0..r).chain(lo..lo + step).collect()
            }
        })
        .collect()
}

/// Builds the canonical fragment of type `typ` truncated at level `top`.
///
/// The top member is `[0, m_K)`; every level-`k` member is decomposed by
/// transporting the decomposition of the spine member `[0, m_k)` (root
/// `[0, r_k)`, piece 0 `[0, m_{k-1})`, piece `i` the root plus the `i`-th
/// block of length `m_{k-1} - r_k` above `m_{k-1}`).
pub fn build_scheme(typ: &TypeSequence, top: usize) -> Result<Scheme, SchemeError> {
    if top > typ.top() {
        return Err(SchemeError::TooDeep { requested: top, available: typ.top() });
    }
    let typ = typ.truncate(top);
    let universe = typ.m(top);
    let mut levels: Vec<Vec<Member>> = vec![Vec::new(); top + 1];
    levels[top].push(Member { set: FinSet::range(0, universe as Elem), root_len: if top == 0 { 0 } else { typ.r(top) }, pieces: Vec::new() });
    for k in (1..=top).rev() {
        let template = spine_pieces(&typ, k);
        let mut below: BTreeSet<FinSet> = BTreeSet::new();
        for f in &levels[k] {
            let s = f.set.as_slice();
            for piece in &template {
                below.insert(FinSet::from_sorted(piece.iter().map(|&j| s[j]).collect()));
            }
        }
        let below: Vec<FinSet> = below.into_iter().collect();
        let lookup: HashMap<&FinSet, usize> = below.iter().enumerate().map(|(i, s)| (s, i)).collect();
        for f in levels[k].iter_mut() {
            let s = f.set.as_slice();
            f.pieces = template
                .iter()
                .map(|piece| lookup[&FinSet::from_sorted(piece.iter().map(|&j| s[j]).collect())])
                .collect();
        }
        let rk = if k >= 2 { typ.r(k - 1) } else { 0 };
        levels[k - 1] = below.into_iter().map(|set| Member { set, root_len: rk, pieces: Vec::new() }).collect();
    }
    let scheme = Scheme::assemble(typ, levels, universe as Elem);
    let report = scheme.verify_axioms();
    if let Some(fail) = report.first_failure() {
        return Err(SchemeError::ConstructionFailure(fail.to_string()));
    }
    Ok(scheme)
}

impl Scheme {
    fn assemble(typ: TypeSequence, levels: Vec<Vec<Member>>, universe: Elem) -> Scheme {
        let index = levels
            .iter()
            .map(|lv| lv.iter().enumerate().map(|(i, m)| (m.set.clone(), i)).collect())
            .collect();
        let mut by_min = vec![vec![Vec::new(); universe as usize]; levels.len()];
        let mut by_elem = vec![vec![Vec::new(); universe as usize]; levels.len()];
        for (k, lv) in levels.iter().enumerate() {
            for (i, m) in lv.iter().enumerate() {
                if let Some(x) = m.set.min_elem() {
                    if x < universe {
                        by_min[k][x as usize].push(i);
                    }
                }
                for x in m.set.iter().filter(|&x| x < universe) {
                    by_elem[k][x as usize].push(i);
                }
            }
        }
        Scheme { typ, levels, index, by_min, by_elem, universe }
    }

    /// Accepts any leveled family with the stated root sizes; pieces are
    /// derived as the members of the level below contained in each set,
    /// ordered by the least element outside the root. Nothing is verified here.
    pub fn from_levels(typ: TypeSequence, levels: Vec<Vec<(FinSet, usize)>>) -> Result<Scheme, SchemeError> {
        if levels.len() != typ.top() + 1 {
            return Err(SchemeError::PreconditionFailed(format!(
                "{} levels given for a type with top level {}",
                levels.len(),
                typ.top()
            )));
        }
        let universe = typ.m(typ.top()) as Elem;
        let mut lv: Vec<Vec<Member>> = levels
            .into_iter()
            .map(|l| {
                let mut v: Vec<Member> = l.into_iter().map(|(set, root_len)| Member { set, root_len, pieces: Vec::new() }).collect();
                v.sort_by(|a, b| a.set.cmp(&b.set));
                v.dedup_by(|a, b| a.set == b.set);
                v
            })
            .collect();
        for k in 1..lv.len() {
            let (lower, upper) = lv.split_at_mut(k);
            let lower = &lower[k - 1];
            for f in upper[0].iter_mut() {
                let root_len = f.root_len.min(f.set.len());
                let root_max = f.set.as_slice()[..root_len].last().copied();
                let mut inside: Vec<(Option<Elem>, usize)> = lower
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.set.is_subset(&f.set))
                    .map(|(i, e)| (e.set.iter().find(|&x| root_max.map_or(true, |r| x > r)), i))
                    .collect();
                inside.sort();
                f.pieces = inside.into_iter().map(|(_, i)| i).collect();
            }
        }
        Ok(Scheme::assemble(typ, lv, universe))
    }

    pub fn typ(&self) -> &TypeSequence {
        &self.typ
    }

    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    /// Size of the universe `[0, m_K)`.
    pub fn universe(&self) -> Elem {
        self.universe
    }

    pub fn level(&self, k: usize) -> &[Member] {
        &self.levels[k]
    }

    pub fn member(&self, id: MemberId) -> &Member {
        &self.levels[id.level][id.idx]
    }

    pub fn set(&self, id: MemberId) -> &FinSet {
        &self.levels[id.level][id.idx].set
    }

    pub fn member_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn ids(&self) -> impl Iterator<Item = MemberId> + '_ {
        self.levels
            .iter()
            .enumerate()
            .flat_map(|(level, lv)| (0..lv.len()).map(move |idx| MemberId { level, idx }))
    }

    pub fn level_ids(&self, level: usize) -> impl Iterator<Item = MemberId> {
        (0..self.levels[level].len()).map(move |idx| MemberId { level, idx })
    }

    /// Members of `level` containing `x`, in lexicographic order.
    pub fn containing(&self, level: usize, x: Elem) -> impl Iterator<Item = MemberId> + '_ {
        self.by_elem[level]
            .get(x as usize)
            .into_iter()
            .flatten()
            .map(move |&idx| MemberId { level, idx })
    }

    /// Looks a set up by its size (which fixes the level) and contents.
    pub fn find(&self, set: &FinSet) -> Option<MemberId> {
        self.levels
            .iter()
            .enumerate()
            .find_map(|(level, _)| self.index[level].get(set).map(|&idx| MemberId { level, idx }))
    }

    pub fn find_at(&self, level: usize, set: &FinSet) -> Option<MemberId> {
        self.index.get(level)?.get(set).map(|&idx| MemberId { level, idx })
    }

    pub fn level_of(&self, set: &FinSet) -> Result<usize, SchemeError> {
        self.find(set).map(|id| id.level).ok_or_else(|| SchemeError::NotAMember(set.clone()))
    }

    pub fn root(&self, id: MemberId) -> FinSet {
        let m = self.member(id);
        FinSet::from_sorted(m.set.as_slice()[..m.root_len.min(m.set.len())].to_vec())
    }

    pub fn piece(&self, id: MemberId, i: usize) -> MemberId {
        MemberId { level: id.level - 1, idx: self.member(id).pieces[i] }
    }

    pub fn pieces(&self, id: MemberId) -> Vec<MemberId> {
        if id.level == 0 {
            return Vec::new();
        }
        self.member(id).pieces.iter().map(|&idx| MemberId { level: id.level - 1, idx }).collect()
    }

    /// Root and ordered pieces of a member of level `≥ 1`.
    pub fn decompose(&self, set: &FinSet) -> Result<(FinSet, Vec<FinSet>), SchemeError> {
        let id = self.find(set).ok_or_else(|| SchemeError::NotAMember(set.clone()))?;
        if id.level == 0 {
            return Err(SchemeError::PreconditionFailed(format!("{set} is a level-0 member and has no decomposition")));
        }
        Ok((self.root(id), self.pieces(id).into_iter().map(|p| self.set(p).clone()).collect()))
    }

    /// `𝒮↾F`: every member contained in `F`, grouped by level (lexicographic within a level).
    pub fn restrict(&self, id: MemberId) -> Vec<Vec<MemberId>> {
        let f = self.set(id);
        let mut mask = vec![false; self.universe as usize];
        for x in f.iter() {
            mask[x as usize] = true;
        }
        let fmax = f.max_elem().unwrap_or(0);
        (0..=id.level)
            .map(|l| {
                let mut out: Vec<MemberId> = f
                    .iter()
                    .flat_map(|x| self.by_min[l][x as usize].iter())
                    .filter(|&&i| {
                        let s = &self.levels[l][i].set;
                        s.max_elem().map_or(false, |mx| mx <= fmax) && s.iter().all(|y| mask[y as usize])
                    })
                    .map(|&idx| MemberId { level: l, idx })
                    .collect();
                out.sort();
                out
            })
            .collect()
    }

    pub fn restrict_set(&self, set: &FinSet) -> Result<Vec<Vec<FinSet>>, SchemeError> {
        let id = self.find(set).ok_or_else(|| SchemeError::NotAMember(set.clone()))?;
        Ok(self.restrict(id).into_iter().map(|l| l.into_iter().map(|m| self.set(m).clone()).collect()).collect())
    }

    /// Text form: the type's three rows, then `k: e_0 e_1 … ; root_size` per member.
    pub fn to_text(&self) -> String {
        let mut out = self.typ.to_text();
        for (k, lv) in self.levels.iter().enumerate() {
            for m in lv {
                out.push_str(&format!("{k}:"));
                for x in m.set.iter() {
                    out.push_str(&format!(" {x}"));
                }
                out.push_str(&format!(" ; {}\n", m.root_len));
            }
        }
        out
    }

    /// Parses the text form and re-derives decompositions. Axioms are not checked;
    /// see [`load_scheme`].
    pub fn parse(text: &str) -> Result<Scheme, SchemeError> {
        let mut lines = text.lines().enumerate();
        let mut row = |what: &str| {
            lines
                .next()
                .map(|(_, l)| l.to_string())
                .ok_or_else(|| SchemeError::Parse { line: 0, msg: format!("missing {what} row") })
        };
        let (m, n, r) = (row("m")?, row("n")?, row("r")?);
        let typ = TypeSequence::from_rows(&m, &n, &r)?;
        let mut levels: Vec<Vec<(FinSet, usize)>> = vec![Vec::new(); typ.top() + 1];
        for (no, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| SchemeError::Parse { line: no + 1, msg: msg.to_string() };
            let (k, rest) = line.split_once(':').ok_or_else(|| err("expected `k: elems ; root_size`"))?;
            let (elems, root) = rest.split_once(';').ok_or_else(|| err("missing `; root_size`"))?;
            let k: usize = k.trim().parse().map_err(|_| err("bad level"))?;
            if k >= levels.len() {
                return Err(err("level above the type's top"));
            }
            let set: FinSet = elems.parse().map_err(|_| err("bad element list"))?;
            let root: usize = root.trim().parse().map_err(|_| err("bad root size"))?;
            levels[k].push((set, root));
        }
        Scheme::from_levels(typ, levels)
    }

    pub fn verify_axioms(&self) -> Report {
        verify_axioms(self)
    }
}

/// Parses a scheme file and rejects it unless every axiom holds.
pub fn load_scheme(text: &str) -> Result<Scheme, SchemeError> {
    let s = Scheme::parse(text)?;
    if let Some(fail) = s.verify_axioms().first_failure() {
        return Err(SchemeError::PreconditionFailed(format!("loaded scheme fails {fail}")));
    }
    Ok(s)
}

pub fn level_of(s: &Scheme, set: &FinSet) -> Result<usize, SchemeError> {
    s.level_of(set)
}

pub fn decompose(s: &Scheme, set: &FinSet) -> Result<(FinSet, Vec<FinSet>), SchemeError> {
    s.decompose(set)
}

/// The unique increasing bijection between two equal-size finite sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoMap {
    source: FinSet,
    target: FinSet,
}

impl IsoMap {
    pub fn source(&self) -> &FinSet {
        &self.source
    }

    pub fn target(&self) -> &FinSet {
        &self.target
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Elem, Elem)> + '_ {
        self.source.iter().zip(self.target.iter())
    }

    pub fn apply(&self, x: Elem) -> Option<Elem> {
        self.source.position(x).map(|p| self.target.as_slice()[p])
    }

    /// Pointwise image; `None` if `set` leaves the domain.
    pub fn image(&self, set: &FinSet) -> Option<FinSet> {
        set.iter().map(|x| self.apply(x)).collect::<Option<Vec<_>>>().map(FinSet::from_sorted)
    }

    /// `f ∘ φ⁻¹` for a function given by its values on the source, in order.
    pub fn transport_values<'a, T: Clone>(&self, values: &'a [T]) -> Vec<(Elem, T)> {
        self.target.iter().zip(values.iter().cloned()).collect()
    }

    pub fn inverse(&self) -> IsoMap {
        IsoMap { source: self.target.clone(), target: self.source.clone() }
    }
}

pub fn order_iso(from: &FinSet, to: &FinSet) -> Result<IsoMap, SchemeError> {
    if from.len() != to.len() {
        return Err(SchemeError::SizeMismatch(from.len(), to.len()));
    }
    Ok(IsoMap { source: from.clone(), target: to.clone() })
}

pub fn transport(f: &IsoMap, set: &FinSet) -> Result<FinSet, SchemeError> {
    f.image(set)
        .ok_or_else(|| SchemeError::PreconditionFailed(format!("{set} is not inside {}", f.source())))
}

pub fn restrict(s: &Scheme, set: &FinSet) -> Result<Vec<Vec<FinSet>>, SchemeError> {
    s.restrict_set(set)
}

/// A copy `E*` of `E` inside `F` with `E* ∩ (μ+1) = E ∩ (μ+1)`, `E* ∖ μ` an
/// interval of `F` and `μ ∈ E*`, obtained by descending the decomposition of
/// `F` and pulling back into piece 0 whenever `μ` lies in the root.
pub fn copy_with_interval(s: &Scheme, f: MemberId, e: MemberId, mu: Elem) -> Result<MemberId, SchemeError> {
    let fs = s.set(f);
    let es = s.set(e);
    if e.level > f.level || !es.is_subset(fs) {
        return Err(SchemeError::PreconditionFailed(format!("{es} is not a lower member inside {fs}")));
    }
    if !es.contains(mu) {
        return Err(SchemeError::PreconditionFailed(format!("{mu} is not in {es}")));
    }
    let set = copy_rec(s, f, e, mu)?;
    s.find_at(e.level, &set)
        .ok_or_else(|| SchemeError::ConstructionFailure(format!("copy {set} of {es} is not a member")))
}

fn copy_rec(s: &Scheme, f: MemberId, e: MemberId, mu: Elem) -> Result<FinSet, SchemeError> {
    if f.level == e.level {
        return if f == e {
            Ok(s.set(e).clone())
        } else {
            Err(SchemeError::PreconditionFailed(format!("{} is not inside {}", s.set(e), s.set(f))))
        };
    }
    let es = s.set(e);
    let pieces = s.pieces(f);
    let (i, pi) = pieces
        .iter()
        .enumerate()
        .find(|(_, p)| es.is_subset(s.set(**p)))
        .ok_or_else(|| SchemeError::PreconditionFailed(format!("{es} lies in no piece of {}", s.set(f))))?;
    let inner = copy_rec(s, *pi, e, mu)?;
    if i == 0 || !s.root(f).contains(mu) {
        return Ok(inner);
    }
    let back = order_iso(s.set(*pi), s.set(pieces[0]))?;
    transport(&back, &inner)
}

/// First member (ascending level, then lexicographic) with a canonical
/// decomposition whose piece 0 contains `a_set` and whose root is `F_0 ∩ a`.
pub fn find_cover_with_root(s: &Scheme, a_set: &FinSet, a: Elem) -> Option<MemberId> {
    covers_with_root(s, a_set, a, |_| true).next()
}

/// Every qualifying member, in search order, restricted to levels accepted by `level_ok`.
pub fn covers_with_root<'a>(
    s: &'a Scheme,
    a_set: &'a FinSet,
    a: Elem,
    level_ok: impl Fn(usize) -> bool + 'a,
) -> impl Iterator<Item = MemberId> + 'a {
    (1..=s.top()).filter(move |&k| level_ok(k)).flat_map(move |k| {
        s.level_ids(k).filter(move |&id| {
            let p0 = s.set(s.piece(id, 0));
            a_set.is_subset(p0) && s.root(id) == p0.below(a)
        })
    })
}

/// Why no cover exists for `(A, a)` within the fragment.
pub fn cover_blocker(s: &Scheme, a_set: &FinSet, a: Elem) -> String {
    let roots: BTreeSet<usize> = (1..=s.top()).map(|k| s.typ().r(k)).collect();
    format!(
        "no level <= {} has a member F with {} inside F_0 and R(F) = F_0 ∩ {}; root sizes available: {:?}",
        s.top(),
        a_set.compact(),
        a,
        roots
    )
}

/// Verifies the four scheme axioms exhaustively.
pub fn verify_axioms(s: &Scheme) -> Report {
    let mut report = Report::new("scheme axioms");
    report.push(check_cofinal(s));
    report.push(check_sizes(s));
    report.push(check_same_level(s));
    report.push(check_decompositions(s));
    report
}

fn check_cofinal(s: &Scheme) -> Check {
    let universe = FinSet::range(0, s.universe());
    let mut c = Check::new("cofinal (every finite A lies in a member)");
    c.count(1);
    let covered = s.levels.iter().flatten().any(|m| m.set == universe);
    let outside = s.levels.iter().flatten().find(|m| m.set.max_elem().map_or(false, |x| x >= s.universe()));
    if let Some(m) = outside {
        c.fail(format!("member {} leaves the universe [0,{})", m.set, s.universe()));
    } else if !covered {
        c.fail(format!("no member equals the universe [0,{})", s.universe()));
    }
    c
}

fn check_sizes(s: &Scheme) -> Check {
    let mut c = Check::new("sizes |F|=m_k, |R(F)|=r_k");
    for (k, lv) in s.levels.iter().enumerate() {
        let rk = if k == 0 { 0 } else { s.typ.r(k) };
        for m in lv {
            c.count(1);
            if m.set.len() != s.typ.m(k) {
                c.fail(format!("level {k} member {} has size {} != {}", m.set, m.set.len(), s.typ.m(k)));
                return c;
            }
            if m.root_len != rk {
                c.fail(format!("level {k} member {} has root size {} != {}", m.set, m.root_len, rk));
                return c;
            }
        }
    }
    c
}

fn check_same_level(s: &Scheme) -> Check {
    let mut c = Check::new("same-level intersections are initial segments");
    for (k, lv) in s.levels.iter().enumerate() {
        let masks: Vec<Vec<u64>> = lv.iter().map(|m| bitmask(&m.set, s.universe)).collect();
        let found = (0..lv.len()).into_par_iter().find_map_first(|i| {
            for j in i + 1..lv.len() {
                let (e, f) = (&lv[i].set, &lv[j].set);
                if disjoint_spans(e, f) {
                    continue;
                }
                if !meets_as_initial(e, &masks[j]) || !meets_as_initial(f, &masks[i]) {
                    return Some(format!("level {k}: {e} ∩ {f} = {} is not an initial segment of both", e.intersection(f)));
                }
            }
            None
        });
        let n = lv.len() as u64;
        c.count(n * n.saturating_sub(1) / 2);
        if let Some(msg) = found {
            c.fail(msg);
            return c;
        }
    }
    c
}

fn check_decompositions(s: &Scheme) -> Check {
    let mut c = Check::new("canonical decomposition (increasing Δ-system of n_k pieces)");
    for k in 1..s.levels.len() {
        let found = s.levels[k].par_iter().find_map_first(|f| {
            let below = &s.levels[k - 1];
            let pieces: Vec<&FinSet> = f.pieces.iter().map(|&i| &below[i].set).collect();
            let root = FinSet::from_sorted(f.set.as_slice()[..f.root_len.min(f.set.len())].to_vec());
            let all_inside = below.iter().filter(|e| e.set.is_subset(&f.set)).count();
            if pieces.len() != s.typ.n(k) || all_inside != s.typ.n(k) {
                return Some(format!(
                    "{} has {} pieces ({} level-{} subsets), expected n_{k}={}",
                    f.set,
                    pieces.len(),
                    all_inside,
                    k - 1,
                    s.typ.n(k)
                ));
            }
            let union = pieces.iter().fold(FinSet::empty(), |acc, p| acc.union(p));
            if union != f.set {
                return Some(format!("pieces of {} do not cover it", f.set));
            }
            let slices: Vec<&[Elem]> = pieces.iter().map(|p| p.as_slice()).collect();
            if let Err(msg) = increasing_delta(root.as_slice(), &slices) {
                return Some(format!("{}: {msg}", f.set));
            }
            None
        });
        c.count(s.levels[k].len() as u64);
        if let Some(msg) = found {
            c.fail(msg);
            return c;
        }
    }
    c
}

/// `root < P_0∖root < P_1∖root < …` and pairwise intersections equal `root`.
pub(crate) fn increasing_delta<T: Ord>(root: &[T], pieces: &[&[T]]) -> Result<(), String> {
    let mut prev_max: Option<&T> = root.last();
    for (i, p) in pieces.iter().enumerate() {
        if !crate::types::sorted_subset(root, p) {
            return Err(format!("piece {i} does not contain the root"));
        }
        let rest: Vec<&T> = p.iter().filter(|x| root.binary_search(x).is_err()).collect();
        let (Some(lo), Some(hi)) = (rest.first(), rest.last()) else {
            return Err(format!("piece {i} equals the root"));
        };
        if let Some(pm) = prev_max {
            if *lo <= pm {
                return Err(format!("piece {i} is not above its predecessors"));
            }
        }
        prev_max = Some(hi);
    }
    Ok(())
}

fn bitmask(set: &FinSet, universe: Elem) -> Vec<u64> {
    let mut v = vec![0u64; (universe as usize).div_ceil(64).max(1)];
    for x in set.iter() {
        let x = x as usize;
        if x / 64 < v.len() {
            v[x / 64] |= 1 << (x % 64);
        }
    }
    v
}

fn in_mask(mask: &[u64], x: Elem) -> bool {
    let x = x as usize;
    mask.get(x / 64).map_or(false, |w| w >> (x % 64) & 1 == 1)
}

/// `e ∩ F ⊑ e`, with `F` given as a bitmask.
fn meets_as_initial(e: &FinSet, f_mask: &[u64]) -> bool {
    let mut outside = false;
    for x in e.iter() {
        if in_mask(f_mask, x) {
            if outside {
                return false;
            }
        } else {
            outside = true;
        }
    }
    true
}

fn disjoint_spans(a: &FinSet, b: &FinSet) -> bool {
    match (a.min_elem(), a.max_elem(), b.min_elem(), b.max_elem()) {
        (Some(a0), Some(a1), Some(b0), Some(b1)) => a1 < b0 || b1 < a0,
        _ => true,
    }
}

/// Verifies the structural lemmas: cross-level initial segments, piece
/// containment, transport of restrictions between same-level members, and
/// existence of interval copies.
pub fn verify_lemmas(s: &Scheme) -> Report {
    let mut report = Report::new("scheme lemmas");
    report.push(check_cross_level(s));
    let restricts: Vec<Vec<Vec<Vec<MemberId>>>> = (0..s.levels.len())
        .map(|k| s.level_ids(k).collect::<Vec<_>>().par_iter().map(|&id| s.restrict(id)).collect())
        .collect();
    report.push(check_piece_containment(s, &restricts));
    report.push(check_restrict_transport(s, &restricts));
    report.push(check_interval_copies(s, &restricts));
    report
}

fn check_cross_level(s: &Scheme) -> Check {
    let mut c = Check::new("E ∩ F ⊑ E for level(E) <= level(F)");
    for k in 0..s.levels.len() {
        let masks: Vec<Vec<u64>> = s.levels[k].iter().map(|m| bitmask(&m.set, s.universe)).collect();
        for l in 0..=k {
            let found = s.levels[l].par_iter().find_map_first(|e| {
                s.levels[k].iter().zip(&masks).find_map(|(f, mask)| {
                    if disjoint_spans(&e.set, &f.set) || meets_as_initial(&e.set, mask) {
                        None
                    } else {
                        Some(format!("{} ∩ {} is not an initial segment of {}", e.set, f.set, e.set))
                    }
                })
            });
            c.count((s.levels[l].len() * s.levels[k].len()) as u64);
            if let Some(msg) = found {
                c.fail(msg);
                return c;
            }
        }
    }
    c
}

fn check_piece_containment(s: &Scheme, restricts: &[Vec<Vec<Vec<MemberId>>>]) -> Check {
    let mut c = Check::new("lower members of F lie in a piece (equal one at level k-1)");
    for k in 1..s.levels.len() {
        let found = s.level_ids(k).collect::<Vec<_>>().par_iter().find_map_first(|&f| {
            let pieces: Vec<&FinSet> = s.pieces(f).into_iter().map(|p| s.set(p)).collect();
            for (l, inside) in restricts[k][f.idx].iter().enumerate().take(k) {
                for &e in inside {
                    let es = s.set(e);
                    let holders = pieces.iter().filter(|p| es.is_subset(p)).count();
                    if holders == 0 {
                        return Some(format!("{es} ⊂ {} lies in no piece", s.set(f)));
                    }
                    if l == k - 1 && !pieces.iter().any(|p| *p == es) {
                        return Some(format!("{es} ⊂ {} at level k-1 is not a piece", s.set(f)));
                    }
                }
            }
            None
        });
        c.count(restricts[k].iter().map(|r| r.iter().map(Vec::len).sum::<usize>() as u64).sum());
        if let Some(msg) = found {
            c.fail(msg);
            return c;
        }
    }
    c
}

/// Same-level isomorphism carries restrictions onto restrictions. Checking
/// every member against the first of its level covers all pairs, since the
/// isomorphisms compose.
fn check_restrict_transport(s: &Scheme, restricts: &[Vec<Vec<Vec<MemberId>>>]) -> Check {
    let mut c = Check::new("φ_{E,F}(𝒮↾E) = 𝒮↾F for same-level E, F");
    let labeled = |r: &Vec<Vec<MemberId>>| -> Vec<(usize, FinSet)> {
        let mut v: Vec<(usize, FinSet)> = r.iter().flatten().map(|&m| (m.level, s.set(m).clone())).collect();
        v.sort();
        v
    };
    for k in 0..s.levels.len() {
        if s.levels[k].is_empty() {
            continue;
        }
        let reference = MemberId { level: k, idx: 0 };
        let base = labeled(&restricts[k][0]);
        let found = s.level_ids(k).collect::<Vec<_>>().par_iter().find_map_first(|&f| {
            let iso = IsoMap { source: s.set(reference).clone(), target: s.set(f).clone() };
            let mut image: Vec<(usize, FinSet)> = base.iter().map(|(l, e)| (*l, iso.image(e).unwrap_or_default())).collect();
            image.sort();
            if image != labeled(&restricts[k][f.idx]) {
                Some(format!("transport from {} to {} does not match restrictions", s.set(reference), s.set(f)))
            } else {
                None
            }
        });
        c.count(s.levels[k].len() as u64);
        if let Some(msg) = found {
            c.fail(msg);
            return c;
        }
    }
    c
}

fn check_interval_copies(s: &Scheme, restricts: &[Vec<Vec<Vec<MemberId>>>]) -> Check {
    let mut c = Check::new("interval copies E* exist for every F ⊇ E, μ ∈ E");
    for k in 0..s.levels.len() {
        let results: Vec<(u64, Option<String>)> = s
            .level_ids(k)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&f| {
                let mut n = 0u64;
                for &e in restricts[k][f.idx].iter().flatten() {
                    for mu in s.set(e).iter() {
                        n += 1;
                        if let Err(msg) = interval_copy_ok(s, f, e, mu) {
                            return (n, Some(msg));
                        }
                    }
                }
                (n, None)
            })
            .collect();
        for (n, fail) in results {
            c.count(n);
            if let Some(msg) = fail {
                c.fail(msg);
                return c;
            }
        }
    }
    c
}

fn interval_copy_ok(s: &Scheme, f: MemberId, e: MemberId, mu: Elem) -> Result<(), String> {
    let (fs, es) = (s.set(f), s.set(e));
    let star = copy_with_interval(s, f, e, mu).map_err(|err| format!("F={fs}, E={es}, μ={mu}: {err}"))?;
    let ss = s.set(star);
    let ok = star.level == e.level
        && ss.is_subset(fs)
        && ss.contains(mu)
        && ss.below(mu + 1) == es.below(mu + 1)
        && ss.at_or_above(mu).is_interval_of(fs);
    if ok {
        Ok(())
    } else {
        Err(format!("F={fs}, E={es}, μ={mu}: copy {ss} misses a clause"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{generate_type, RootSchedule, WidthSchedule};

    pub(crate) fn small() -> Scheme {
        let t = TypeSequence::new(vec![1, 2, 4], vec![2, 3], vec![0, 1]).unwrap();
        build_scheme(&t, 2).unwrap()
    }

    fn sets(v: &[&[Elem]]) -> Vec<FinSet> {
        v.iter().map(|s| FinSet::new(s.to_vec())).collect()
    }

    #[test]
    fn builds_the_small_scheme() {
        let s = small();
        let lv = |k: usize| s.level(k).iter().map(|m| m.set.clone()).collect::<Vec<_>>();
        assert_eq!(lv(0), sets(&[&[0], &[1], &[2], &[3]]));
        assert_eq!(lv(1), sets(&[&[0, 1], &[0, 2], &[0, 3]]));
        assert_eq!(lv(2), sets(&[&[0, 1, 2, 3]]));
        let (root, pieces) = s.decompose(&FinSet::from([0, 1, 2, 3])).unwrap();
        assert_eq!(root, FinSet::from([0]));
        assert_eq!(pieces, sets(&[&[0, 1], &[0, 2], &[0, 3]]));
    }

    #[test]
    fn builds_one_level() {
        let t = TypeSequence::new(vec![1, 2], vec![2], vec![0]).unwrap();
        let s = build_scheme(&t, 1).unwrap();
        assert_eq!(s.level(0).len(), 2);
        assert_eq!(s.level(1)[0].set, FinSet::from([0, 1]));
        assert_eq!(s.root(MemberId { level: 1, idx: 0 }), FinSet::empty());
    }

    #[test]
    fn level_counts_match_enumeration() {
        let t = TypeSequence::new(vec![1, 2, 4, 16], vec![2, 3, 4], vec![0, 1, 0]).unwrap();
        let s = build_scheme(&t, 3).unwrap();
        let counts: Vec<usize> = (0..=3).map(|k| s.level(k).len()).collect();
        assert_eq!(counts, vec![16, 12, 4, 1]);
        // independent count: distinct images of each level's spine pieces under every member
        let mut seen: Vec<BTreeSet<FinSet>> = vec![BTreeSet::new(); 4];
        seen[3].insert(FinSet::range(0, 16));
        for k in (1..=3).rev() {
            let tpl = spine_pieces(&t, k);
            let upper: Vec<FinSet> = seen[k].iter().cloned().collect();
            for f in upper {
                for p in &tpl {
                    seen[k - 1].insert(FinSet::new(p.iter().map(|&j| f.as_slice()[j]).collect()));
                }
            }
        }
        assert_eq!(seen.iter().map(BTreeSet::len).collect::<Vec<_>>(), counts);
    }

    #[test]
    fn decompose_errors_and_small_cases() {
        let s = small();
        let (root, pieces) = s.decompose(&FinSet::from([0, 2])).unwrap();
        assert!(root.is_empty());
        assert_eq!(pieces, sets(&[&[0], &[2]]));
        assert_eq!(s.decompose(&FinSet::from([5])), Err(SchemeError::NotAMember(FinSet::from([5]))));
        assert_eq!(s.level_of(&FinSet::from([0, 3])), Ok(1));
    }

    #[test]
    fn order_iso_and_transport() {
        let f = order_iso(&FinSet::from([0, 2]), &FinSet::from([0, 3])).unwrap();
        assert_eq!(f.pairs().collect::<Vec<_>>(), vec![(0, 0), (2, 3)]);
        assert_eq!(transport(&f, &FinSet::from([2])).unwrap(), FinSet::from([3]));
        let id = order_iso(&FinSet::from([0, 1]), &FinSet::from([0, 1])).unwrap();
        assert!(id.pairs().all(|(a, b)| a == b));
        assert_eq!(order_iso(&FinSet::from([0]), &FinSet::from([0, 1])), Err(SchemeError::SizeMismatch(1, 2)));
        // functions move by composition with the inverse
        assert_eq!(f.transport_values(&["a", "b"]), vec![(0, "a"), (3, "b")]);
    }

    #[test]
    fn restrictions() {
        let s = small();
        let r = s.restrict_set(&FinSet::from([0, 2])).unwrap();
        assert_eq!(r, vec![sets(&[&[0], &[2]]), sets(&[&[0, 2]])]);
        let all = s.restrict_set(&FinSet::from([0, 1, 2, 3])).unwrap();
        assert_eq!(all.iter().map(Vec::len).sum::<usize>(), s.member_count());
        assert_eq!(s.restrict_set(&FinSet::from([0])).unwrap(), vec![sets(&[&[0]])]);
        // oracle: brute-force scan of all members
        for id in s.ids() {
            let brute: usize = s.ids().filter(|&e| s.set(e).is_subset(s.set(id))).count();
            assert_eq!(s.restrict(id).iter().map(Vec::len).sum::<usize>(), brute);
        }
    }

    fn copy_oracle(s: &Scheme, f: MemberId, e: MemberId, mu: Elem) -> Vec<FinSet> {
        let (fs, es) = (s.set(f), s.set(e));
        s.level_ids(e.level)
            .map(|c| s.set(c).clone())
            .filter(|c| {
                c.is_subset(fs) && c.contains(mu) && c.below(mu + 1) == es.below(mu + 1) && c.at_or_above(mu).is_interval_of(fs)
            })
            .collect()
    }

    #[test]
    fn interval_copies_match_examples() {
        let s = small();
        let top = s.find(&FinSet::from([0, 1, 2, 3])).unwrap();
        let e03 = s.find(&FinSet::from([0, 3])).unwrap();
        let e02 = s.find(&FinSet::from([0, 2])).unwrap();
        assert_eq!(s.set(copy_with_interval(&s, top, e03, 0).unwrap()), &FinSet::from([0, 1]));
        assert_eq!(copy_oracle(&s, top, e03, 0), vec![FinSet::from([0, 1])]);
        assert_eq!(s.set(copy_with_interval(&s, top, e02, 2).unwrap()), &FinSet::from([0, 2]));
        assert_eq!(copy_oracle(&s, top, e02, 2), vec![FinSet::from([0, 2])]);
        assert_eq!(copy_with_interval(&s, e02, e02, 0).unwrap(), e02);
        assert!(matches!(copy_with_interval(&s, e02, e03, 0), Err(SchemeError::PreconditionFailed(_))));
        assert!(matches!(copy_with_interval(&s, top, e03, 1), Err(SchemeError::PreconditionFailed(_))));
    }

    #[test]
    fn interval_copies_agree_with_search() {
        let t = generate_type(&WidthSchedule::Affine { mul: 1, add: 1 }, &RootSchedule::Diagonal, 4).unwrap();
        let s = build_scheme(&t, 4).unwrap();
        for f in s.ids().filter(|f| f.level >= 2).take(40) {
            for e in s.restrict(f).into_iter().flatten() {
                for mu in s.set(e).iter() {
                    let got = s.set(copy_with_interval(&s, f, e, mu).unwrap()).clone();
                    assert!(copy_oracle(&s, f, e, mu).contains(&got));
                }
            }
        }
    }

    #[test]
    fn cover_with_root_examples() {
        let s = small();
        let top = find_cover_with_root(&s, &FinSet::from([0, 1]), 1).unwrap();
        assert_eq!(s.set(top), &FinSet::from([0, 1, 2, 3]));
        let f = find_cover_with_root(&s, &FinSet::from([0]), 0).unwrap();
        assert_eq!(s.set(f), &FinSet::from([0, 1]));
        let f = find_cover_with_root(&s, &FinSet::empty(), 0).unwrap();
        assert_eq!(s.set(f), &FinSet::from([0, 1]));
        assert_eq!(find_cover_with_root(&s, &FinSet::from([3]), 0), None);
        assert!(cover_blocker(&s, &FinSet::from([3]), 0).contains("root sizes available"));
        // oracle: exhaustive scan of members and decompositions
        for a in 0..=4 {
            for bits in 0u32..16 {
                let aset = FinSet::new((0..4).filter(|i| bits >> i & 1 == 1).collect());
                let brute = s.ids().filter(|id| id.level >= 1).find(|&id| {
                    let (root, pieces) = s.decompose(s.set(id)).unwrap();
                    aset.is_subset(&pieces[0]) && root == pieces[0].below(a)
                });
                assert_eq!(find_cover_with_root(&s, &aset, a), brute);
            }
        }
    }

    #[test]
    fn canonical_schemes_pass_everything() {
        let t = TypeSequence::new(vec![1, 2, 4, 16], vec![2, 3, 4], vec![0, 1, 0]).unwrap();
        let s = build_scheme(&t, 3).unwrap();
        assert!(verify_axioms(&s).passed());
        let lemmas = verify_lemmas(&s);
        assert!(lemmas.passed(), "{}", lemmas.render_text());
    }

    #[test]
    fn mutated_member_breaks_initial_segments() {
        let s = small();
        let mut levels: Vec<Vec<(FinSet, usize)>> =
            (0..=2).map(|k| s.level(k).iter().map(|m| (m.set.clone(), m.root_len)).collect()).collect();
        levels[1][1].0 = FinSet::from([1, 2]);
        let bad = Scheme::from_levels(s.typ().clone(), levels).unwrap();
        let rep = verify_axioms(&bad);
        let fail = rep.checks().iter().find(|c| !c.passed()).unwrap();
        assert_eq!(fail.name(), "same-level intersections are initial segments");
        assert!(fail.counterexample().unwrap().contains("{0,1} ∩ {1,2}"));
    }

    #[test]
    fn level_zero_scheme() {
        let t = TypeSequence::new(vec![1], vec![], vec![]).unwrap();
        let s = build_scheme(&t, 0).unwrap();
        assert_eq!(s.level(0)[0].set, FinSet::from([0]));
        assert!(verify_axioms(&s).passed());
        assert!(verify_lemmas(&s).passed());
    }

    #[test]
    fn text_round_trip() {
        let t = TypeSequence::new(vec![1, 2, 4, 16], vec![2, 3, 4], vec![0, 1, 0]).unwrap();
        let s = build_scheme(&t, 3).unwrap();
        let back = load_scheme(&s.to_text()).unwrap();
        assert_eq!(back, s);
        assert!(matches!(Scheme::parse("1,2\n2\n0\n0: x ; 0\n"), Err(SchemeError::Parse { line: 4, .. })));
    }

    #[test]
    fn too_deep_is_rejected() {
        let t = TypeSequence::new(vec![1, 2], vec![2], vec![0]).unwrap();
        assert_eq!(build_scheme(&t, 2).unwrap_err(), SchemeError::TooDeep { requested: 2, available: 1 });
    }
}
