//! A desk-scale simulator of the finite-condition poset that transfers a base
//! scheme on `ω` to ordinals below `ω·M`.
//!
//! A condition assigns to finitely many limits `δ` a member `D_δ` of the base
//! scheme and an anchor `a_δ ∈ D_δ`, nested and with increasing anchors. Its
//! embedding `Φ^p` sends `D_n` (the top member) into the ordinals by shifting
//! each anchor block `[a_i, a_{i+1})` onto `δ_i + (x − a_i)`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::capturing::{capture_clauses, CaptureQuery};
use crate::report::{Check, Report};
use crate::scheme::{copy_with_interval, covers_with_root, increasing_delta, order_iso, MemberId, Scheme};
use crate::types::{sorted_subset, Elem, FinSet, OrdinalCode, PartitionSchedule};

/// Which clause of the condition definition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConditionClause {
    Limit,
    SupportOrder,
    Member,
    Nested,
    AnchorInMember,
    AnchorsIncreasing,
}

impl fmt::Display for ConditionClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionClause::Limit => "limit",
            ConditionClause::SupportOrder => "support-order",
            ConditionClause::Member => "member",
            ConditionClause::Nested => "nestedness",
            ConditionClause::AnchorInMember => "anchor-in-D",
            ConditionClause::AnchorsIncreasing => "anchors-increasing",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CohenError {
    #[error("condition violates {clause} at support point {index}")]
    Violation { clause: ConditionClause, index: usize },
    #[error("no cover with A = {} and root below {anchor} within the base scheme: {detail}", .set.compact())]
    DepthExhausted { set: FinSet, anchor: Elem, detail: String },
    #[error("{ordinal} exceeds the ordinal cap {cap}")]
    OverCap { ordinal: OrdinalCode, cap: OrdinalCode },
    #[error("family is not standardized: clause {0} ({1})")]
    NotStandardizable(u8, String),
    #[error("need {need} marked conditions, have {have}")]
    WidthExhausted { need: usize, have: usize },
    #[error("fuel exhausted at goal {0}")]
    FuelExhausted(usize),
    #[error("goal {index}: {source}")]
    Goal { index: usize, source: Box<CohenError> },
    #[error("bad goal: {0}")]
    BadGoal(String),
    #[error("condition line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Roots for the order and density sweeps, with widths `n_k = k+1` to level
/// [`ORDER_BASE_TOP`]: `E_2 = {0,1,2,3}`, roots 1..3 over wide `F_0`, root 0 on top.
pub const ORDER_BASE_ROOTS: &str = "0,1,0,1,2,3,0";
pub const ORDER_BASE_TOP: usize = 7;
/// Roots for long generic runs: past level 4 every root is `m_{k-1} - 2`, so
/// each level adds few elements and captures stay shallow.
pub const RUN_BASE_ROOTS: &str = "0,1,3,6,9,19,31,45,61,79,99,121,145,171,199,229";
pub const RUN_BASE_TOP: usize = 16;

/// One support point `δ ↦ (D, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Entry {
    pub delta: OrdinalCode,
    pub member: MemberId,
    pub anchor: Elem,
}

/// A validated condition; the empty condition is allowed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct CohenCondition {
    entries: Vec<Entry>,
}

impl CohenCondition {
    pub fn empty() -> Self {
        CohenCondition::default()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn support(&self) -> Vec<OrdinalCode> {
        self.entries.iter().map(|e| e.delta).collect()
    }

    pub fn get(&self, delta: OrdinalCode) -> Option<&Entry> {
        self.entries.iter().find(|e| e.delta == delta)
    }

    pub fn top(&self) -> Option<MemberId> {
        self.entries.last().map(|e| e.member)
    }

    pub fn top_set<'a>(&self, s: &'a Scheme) -> Option<&'a FinSet> {
        self.top().map(|id| s.set(id))
    }

    /// The piecewise map on all naturals; [`phi_total`] restricts it to `D_n`.
    pub fn phi(&self, x: Elem) -> OrdinalCode {
        match self.entries.iter().rev().find(|e| e.anchor <= x) {
            None => OrdinalCode::natural(x),
            Some(e) => phi_embed(e.anchor, e.delta, x),
        }
    }

    /// One line per support point: `<ordinal> : <elements> @ <anchor>`.
    pub fn to_text(&self, s: &Scheme) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let elems: Vec<String> = s.set(e.member).iter().map(|x| x.to_string()).collect();
            out.push_str(&format!("{} : {} @ {}\n", e.delta, elems.join(" "), e.anchor));
        }
        out
    }

    pub fn describe(&self, s: &Scheme) -> String {
        let parts: Vec<String> = self.entries.iter().map(|e| format!("{}: ({}, {})", e.delta, s.set(e.member), e.anchor)).collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// Checks the clauses in order: limits, strictly increasing support,
/// membership, nestedness, anchors inside `D`, increasing anchors.
pub fn validate_condition(s: &Scheme, raw: &[(OrdinalCode, FinSet, Elem)]) -> Result<CohenCondition, CohenError> {
    let v = |clause, index| CohenError::Violation { clause, index };
    for (i, (d, _, _)) in raw.iter().enumerate() {
        if !d.is_limit() {
            return Err(v(ConditionClause::Limit, i));
        }
    }
    for i in 1..raw.len() {
        if raw[i - 1].0 >= raw[i].0 {
            return Err(v(ConditionClause::SupportOrder, i));
        }
    }
    let mut entries = Vec::with_capacity(raw.len());
    for (i, (delta, set, anchor)) in raw.iter().enumerate() {
        let member = s.find(set).ok_or(v(ConditionClause::Member, i))?;
        entries.push(Entry { delta: *delta, member, anchor: *anchor });
    }
    check_entries(s, &entries)?;
    Ok(CohenCondition { entries })
}

fn check_entries(s: &Scheme, entries: &[Entry]) -> Result<(), CohenError> {
    let v = |clause, index| CohenError::Violation { clause, index };
    for (i, e) in entries.iter().enumerate() {
        if !e.delta.is_limit() {
            return Err(v(ConditionClause::Limit, i));
        }
        if i > 0 && entries[i - 1].delta >= e.delta {
            return Err(v(ConditionClause::SupportOrder, i));
        }
    }
    for i in 1..entries.len() {
        if !s.set(entries[i - 1].member).is_subset(s.set(entries[i].member)) {
            return Err(v(ConditionClause::Nested, i));
        }
    }
    for (i, e) in entries.iter().enumerate() {
        if !s.set(e.member).contains(e.anchor) {
            return Err(v(ConditionClause::AnchorInMember, i));
        }
        if i > 0 && entries[i - 1].anchor >= e.anchor {
            return Err(v(ConditionClause::AnchorsIncreasing, i));
        }
    }
    Ok(())
}

fn from_entries(s: &Scheme, entries: Vec<Entry>) -> Option<CohenCondition> {
    check_entries(s, &entries).ok()?;
    Some(CohenCondition { entries })
}

/// Parses the text form against a base scheme and validates it.
pub fn parse_condition(s: &Scheme, text: &str) -> Result<CohenCondition, CohenError> {
    let mut raw = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| CohenError::Parse { line: no + 1, msg };
        let (ord, rest) = line.split_once(':').ok_or_else(|| bad("missing ':'".into()))?;
        let (set, anchor) = rest.split_once('@').ok_or_else(|| bad("missing '@'".into()))?;
        let ord: OrdinalCode = ord.trim().parse().map_err(|e: crate::types::OrdinalParseError| bad(e.to_string()))?;
        let set: FinSet = set.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        let anchor: Elem = anchor.trim().parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        raw.push((ord, set, anchor));
    }
    validate_condition(s, &raw)
}

/// `x` below the anchor, `δ + (x − a)` from the anchor on.
pub fn phi_embed(a: Elem, delta: OrdinalCode, x: Elem) -> OrdinalCode {
    if x < a {
        OrdinalCode::natural(x)
    } else {
        OrdinalCode::new(delta.limb, delta.off + (x - a))
    }
}

/// A finite increasing map from naturals to ordinals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OrdMap {
    pairs: Vec<(Elem, OrdinalCode)>,
}

impl OrdMap {
    pub fn pairs(&self) -> &[(Elem, OrdinalCode)] {
        &self.pairs
    }

    pub fn apply(&self, x: Elem) -> Option<OrdinalCode> {
        self.pairs.binary_search_by_key(&x, |p| p.0).ok().map(|i| self.pairs[i].1)
    }

    pub fn image(&self, set: &FinSet) -> Option<Vec<OrdinalCode>> {
        set.iter().map(|x| self.apply(x)).collect()
    }

    pub fn preimage(&self, y: OrdinalCode) -> Option<Elem> {
        self.pairs.iter().find(|p| p.1 == y).map(|p| p.0)
    }

    pub fn is_increasing(&self) -> bool {
        self.pairs.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1)
    }
}

/// `Φ^p` on the top member `D_n`; empty for the empty condition.
pub fn phi_total(s: &Scheme, p: &CohenCondition) -> OrdMap {
    match p.top_set(s) {
        None => OrdMap::default(),
        Some(top) => OrdMap { pairs: top.iter().map(|x| (x, p.phi(x))).collect() },
    }
}

/// A member of an induced family: a set of ordinals and its level.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LabeledSet {
    pub level: usize,
    pub set: Vec<OrdinalCode>,
}

impl fmt::Display for LabeledSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.set.iter().map(|o| o.to_string()).collect();
        write!(f, "{}@{{{}}}", self.level, parts.join(","))
    }
}

/// `𝐅_p`: the image of every member inside `D_n` under `Φ^p`, sorted by level then set.
pub fn induced_family(s: &Scheme, p: &CohenCondition) -> Vec<LabeledSet> {
    let Some(top) = p.top() else { return Vec::new() };
    let map = phi_total(s, p);
    let mut out: Vec<LabeledSet> = s
        .restrict(top)
        .into_iter()
        .enumerate()
        .flat_map(|(level, ids)| {
            let map = &map;
            ids.into_iter().map(move |id| LabeledSet { level, set: map.image(s.set(id)).expect("inside D_n") })
        })
        .collect();
    out.sort();
    out
}

/// Per support point of the weaker condition, the member witnessing clause (ii).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtensionWitness {
    pub witnesses: Vec<(OrdinalCode, MemberId)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum LeqFailure {
    Support(OrdinalCode),
    ClauseI(OrdinalCode, OrdinalCode),
    ClauseII(OrdinalCode),
}

impl fmt::Display for LeqFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeqFailure::Support(d) => write!(f, "{d} is in supp(q) but not supp(p)"),
            LeqFailure::ClauseI(d, e) => write!(f, "clause (i) fails for {d} < {e}"),
            LeqFailure::ClauseII(d) => write!(f, "clause (ii): no witness at {d}"),
        }
    }
}

/// Whether `p ≤ q` (`p` the stronger condition), with witnesses for clause (ii).
///
/// Witnesses `W` range over every member of the level of `D^q_δ` containing
/// `a^p_δ`, in lexicographic order.
pub fn leq(s: &Scheme, p: &CohenCondition, q: &CohenCondition) -> Result<ExtensionWitness, LeqFailure> {
    let mut pe = Vec::with_capacity(q.len());
    for e in q.entries() {
        pe.push(*p.get(e.delta).ok_or(LeqFailure::Support(e.delta))?);
    }
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            let dp = pe[j].anchor as i64 - pe[i].anchor as i64;
            let dq = q.entries[j].anchor as i64 - q.entries[i].anchor as i64;
            if dp < dq {
                return Err(LeqFailure::ClauseI(q.entries[i].delta, q.entries[j].delta));
            }
        }
    }
    let mut witnesses = Vec::with_capacity(q.len());
    for (eq, ep) in q.entries().iter().zip(&pe) {
        let want = s.set(eq.member).below(eq.anchor).len();
        let dp = s.set(ep.member);
        let a = ep.anchor;
        let w = s
            .containing(eq.member.level, a)
            .find(|&w| {
                let ws = s.set(w);
                ws.is_subset(dp) && ws.below(a).len() == want && ws.at_or_above(a).is_interval_of(dp)
            })
            .ok_or(LeqFailure::ClauseII(eq.delta))?;
        witnesses.push((eq.delta, w));
    }
    Ok(ExtensionWitness { witnesses })
}

fn first_containing<'a>(s: &'a Scheme, set: &FinSet, min_level: usize) -> impl Iterator<Item = MemberId> + 'a {
    let set = set.clone();
    let lo = set.min_elem().unwrap_or(0);
    (min_level..=s.top()).flat_map(move |k| {
        let set = set.clone();
        s.containing(k, lo).filter(move |&id| set.is_subset(s.set(id)))
    })
}

fn covered(s: &Scheme, p: &CohenCondition, xi: OrdinalCode) -> Option<Elem> {
    phi_total(s, p).preimage(xi)
}

/// Accepts `q` only if it is a condition, `q ≤ p`, `x ∈ D^q_n` and `Φ^q(x) = ξ`.
fn accept(s: &Scheme, p: &CohenCondition, entries: Vec<Entry>, x: Elem, xi: OrdinalCode) -> Option<(CohenCondition, Elem)> {
    let q = from_entries(s, entries)?;
    let ok = q.top_set(s).is_some_and(|t| t.contains(x)) && q.phi(x) == xi && leq(s, &q, p).is_ok();
    ok.then_some((q, x))
}

const ANCHOR_SPAN: Elem = 64;
const CAPTURE_COVERS: usize = 8;

/// Finds `q ≤ p` and `x` with `Φ^q(x) = ξ`.
///
/// Tried in order: `ξ` already covered; enlarging `D_n` when the anchor block
/// of `ξ` has room; appending a new support point above `supp(p)`; otherwise
/// re-anchoring every point from some `δ_j` on inside a cover `F` of
/// `D_n ∪ {…}` with `R(F) = F_0 ∩ a_j`, moved to a later piece, possibly with
/// a new point inserted at `δ`. When `ξ = δ_j + ℓ` and the block after `a_j`
/// is too short, the points after `δ_j` are moved instead. Each candidate is
/// checked by [`leq`].
pub fn extend_to_cover(s: &Scheme, p: &CohenCondition, xi: OrdinalCode, cap: OrdinalCode) -> Result<(CohenCondition, Elem), CohenError> {
    if xi > cap {
        return Err(CohenError::OverCap { ordinal: xi, cap });
    }
    if let Some(x) = covered(s, p, xi) {
        return Ok((p.clone(), x));
    }
    let top = p.top_set(s).cloned().unwrap_or_default();
    let n = p.len();
    let ell = xi.off;
    if xi.is_natural() {
        let x = xi.off;
        if n == 0 {
            let delta = OrdinalCode::limit(1);
            if delta > cap {
                return Err(CohenError::OverCap { ordinal: delta, cap });
            }
            // a fresh point at ω whose anchor sits above x
            return append(s, p, &FinSet::from([x]), delta, 0, Some(x), xi);
        }
        if x < p.entries[0].anchor {
            if let Some(r) = enlarge(s, p, x, xi) {
                return Ok(r);
            }
        }
        let need = top.union(&FinSet::from([x]));
        return shift(s, p, 0, None, &need, |_, _| Some(x), xi);
    }
    let delta = xi.limit_part();
    match p.entries.iter().position(|e| e.delta >= delta) {
        None => append(s, p, &top, delta, ell, None, xi),
        Some(j) if p.entries[j].delta == delta => {
            let aj = p.entries[j].anchor;
            let x = aj + ell;
            let room = p.entries.get(j + 1).map_or(true, |e| x < e.anchor);
            if room {
                if let Some(r) = enlarge(s, p, x, xi) {
                    return Ok(r);
                }
            }
            let need = top.union(&FinSet::new((aj + 1..=aj + ell).collect()));
            let literal = shift(s, p, j, None, &need, |_, anchors: &[Elem]| Some(anchors[j] + ell), xi);
            if literal.is_ok() || j == n - 1 {
                return literal;
            }
            // keep a_j and move the later anchors away to open the block
            let need = top.union(&FinSet::new((aj..=aj + ell).collect()));
            shift(s, p, j + 1, None, &need, |_, _| Some(x), xi)
        }
        Some(j) => {
            let lo = top.max_elem().map_or(1, |m| m + 1);
            let mut last = None;
            for a in lo..lo + ANCHOR_SPAN {
                let need = top.union(&FinSet::new((a..=a + ell).collect()));
                match shift(s, p, j, Some((delta, a)), &need, |_, _| Some(a + ell), xi) {
                    Ok(r) => return Ok(r),
                    Err(e) => last = Some(e),
                }
            }
            Err(last.expect("at least one anchor tried"))
        }
    }
}

fn depth(set: &FinSet, anchor: Elem, detail: &str) -> CohenError {
    CohenError::DepthExhausted { set: set.clone(), anchor, detail: detail.to_string() }
}

/// Replaces `D_n` by a larger member containing `x`, anchors unchanged.
fn enlarge(s: &Scheme, p: &CohenCondition, x: Elem, xi: OrdinalCode) -> Option<(CohenCondition, Elem)> {
    let top = p.top_set(s)?;
    let need = top.union(&FinSet::from([x]));
    let lvl = p.top().unwrap().level;
    first_containing(s, &need, lvl).take(64).find_map(|f| {
        let mut entries = p.entries.clone();
        entries.last_mut().unwrap().member = f;
        accept(s, p, entries, x, xi)
    })
}

/// A new support point `δ > supp(p)` with the least anchor `a > max(base ∪ {0})`
/// for which some member holds `base ∪ {a, …, a+ℓ}`. The target is `a + ℓ`
/// unless `fixed` names it.
fn append(
    s: &Scheme,
    p: &CohenCondition,
    base: &FinSet,
    delta: OrdinalCode,
    ell: Elem,
    fixed: Option<Elem>,
    xi: OrdinalCode,
) -> Result<(CohenCondition, Elem), CohenError> {
    let lo = base.max_elem().unwrap_or(0) + 1;
    let min_level = p.top().map_or(0, |t| t.level);
    for a in lo..s.universe() {
        if a + ell >= s.universe() {
            break;
        }
        let need = base.union(&FinSet::new((a..=a + ell).collect()));
        for f in first_containing(s, &need, min_level).take(16) {
            let mut entries = p.entries.clone();
            entries.push(Entry { delta, member: f, anchor: a });
            if let Some(r) = accept(s, p, entries, fixed.unwrap_or(a + ell), xi) {
                return Ok(r);
            }
        }
    }
    Err(depth(base, lo, "no member holds D_n and the new anchor block"))
}

/// Re-anchors `δ_j, …, δ_n` inside a cover `F` with `R(F) = F_0 ∩ a_j`, moving
/// the anchors along `φ_i : F_0 → F_i`; `insert` adds `(δ, F, a)` before `δ_j`.
fn shift(
    s: &Scheme,
    p: &CohenCondition,
    j: usize,
    insert: Option<(OrdinalCode, Elem)>,
    need: &FinSet,
    target: impl Fn(MemberId, &[Elem]) -> Option<Elem>,
    xi: OrdinalCode,
) -> Result<(CohenCondition, Elem), CohenError> {
    let aj = p.entries[j].anchor;
    for f in covers_with_root(s, need, aj, |_| true) {
        let pieces = s.pieces(f);
        let f0 = s.set(pieces[0]);
        for &piece in &pieces[1..] {
            let phi = order_iso(f0, s.set(piece)).expect("same level");
            let mut anchors: Vec<Elem> = p.entries.iter().map(|e| e.anchor).collect();
            let mut entries: Vec<Entry> = p.entries[..j].to_vec();
            if let Some((delta, a)) = insert {
                entries.push(Entry { delta, member: f, anchor: a });
            }
            let mut moved = true;
            for (t, e) in p.entries.iter().enumerate().skip(j) {
                let Some(c) = phi.apply(e.anchor) else {
                    moved = false;
                    break;
                };
                anchors[t] = c;
                entries.push(Entry { delta: e.delta, member: f, anchor: c });
            }
            if !moved {
                continue;
            }
            let Some(x) = target(f, &anchors) else { continue };
            if let Some(r) = accept(s, p, entries, x, xi) {
                return Ok(r);
            }
        }
    }
    Err(depth(need, aj, &crate::scheme::cover_blocker(s, need, aj)))
}

/// `q ≤ p` whose induced family has a member containing every ordinal of `targets`.
pub fn extend_cover_set(s: &Scheme, p: &CohenCondition, targets: &[OrdinalCode], cap: OrdinalCode) -> Result<CohenCondition, CohenError> {
    if targets.is_empty() {
        return Ok(p.clone());
    }
    let mut q = p.clone();
    for _ in 0..=targets.len() + 1 {
        let map = phi_total(s, &q);
        let missing: Vec<OrdinalCode> = targets.iter().copied().filter(|t| map.preimage(*t).is_none()).collect();
        if missing.is_empty() {
            break;
        }
        for xi in missing {
            q = extend_to_cover(s, &q, xi, cap)?.0;
        }
    }
    let map = phi_total(s, &q);
    let b: Option<Vec<Elem>> = targets.iter().map(|t| map.preimage(*t)).collect();
    let Some(b) = b else {
        return Err(depth(&q.top_set(s).cloned().unwrap_or_default(), 0, "covering one target displaced another"));
    };
    // the enlargement step: every D_i replaced by one member holding B ∪ D_n
    let top = q.top_set(s).unwrap().union(&FinSet::new(b));
    if let Some(f) = first_containing(s, &top, 0).next() {
        let entries: Vec<Entry> = q.entries.iter().map(|e| Entry { member: f, ..*e }).collect();
        if let Some(q0) = from_entries(s, entries) {
            if leq(s, &q0, &q).is_ok() && targets.iter().all(|t| phi_total(s, &q0).preimage(*t).is_some()) {
                q = q0;
            }
        }
    }
    if leq(s, &q, p).is_err() {
        return Err(depth(&top, 0, "cover set extension is not below the input"));
    }
    Ok(q)
}

/// Conditions refined to the shape the capture construction needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StandardizedFamily {
    pub conds: Vec<CohenCondition>,
    pub targets: Vec<OrdinalCode>,
    /// Size of the common support root.
    pub r: usize,
    /// Common support size.
    pub d: usize,
    /// The shared `(D_i, a_i)`.
    pub data: Vec<(MemberId, Elem)>,
    /// The shared marked point `x` with `Φ^{p_α}(x) = α`.
    pub x: Elem,
    pub j0: usize,
}

/// Verifies the four refinement clauses: supports form an increasing
/// Δ-system whose root is their first `r` points; equal support sizes; equal
/// `(D_i, a_i)`; one marked `x ∈ D_{d-1}` with a common block index `j_0`.
pub fn standardize(s: &Scheme, conds: &[CohenCondition], targets: &[OrdinalCode]) -> Result<StandardizedFamily, CohenError> {
    let ns = |c: u8, m: String| CohenError::NotStandardizable(c, m);
    if conds.is_empty() || conds.len() != targets.len() {
        return Err(ns(1, format!("{} conditions for {} targets", conds.len(), targets.len())));
    }
    let d = conds[0].len();
    let mut r = 0;
    if conds.len() > 1 {
        let supports: Vec<Vec<OrdinalCode>> = conds.iter().map(CohenCondition::support).collect();
        let root: Vec<OrdinalCode> = supports[0].iter().copied().filter(|x| supports[1].contains(x)).collect();
        r = root.len();
        for (i, a) in supports.iter().enumerate() {
            for b in &supports[i + 1..] {
                let meet: Vec<OrdinalCode> = a.iter().copied().filter(|x| b.contains(x)).collect();
                if meet != root {
                    return Err(ns(1, "supports do not share one root".into()));
                }
            }
            if a[..r.min(a.len())] != root[..] {
                return Err(ns(1, "root is not an initial part of the support".into()));
            }
        }
        let slices: Vec<&[OrdinalCode]> = supports.iter().map(Vec::as_slice).collect();
        increasing_delta(&root, &slices).map_err(|m| ns(1, m))?;
    }
    if conds.iter().any(|c| c.len() != d) || d == 0 {
        return Err(ns(2, "support sizes differ".into()));
    }
    let data: Vec<(MemberId, Elem)> = conds[0].entries.iter().map(|e| (e.member, e.anchor)).collect();
    for c in conds {
        if c.entries.iter().zip(&data).any(|(e, (m, _))| e.member != *m) {
            return Err(ns(3, "members differ".into()));
        }
        if c.entries.iter().zip(&data).any(|(e, (_, a))| e.anchor != *a) {
            return Err(ns(3, "anchors differ".into()));
        }
    }
    let top = s.set(data[d - 1].0);
    let mut x = None;
    for (c, t) in conds.iter().zip(targets) {
        let here = top.iter().find(|&y| c.phi(y) == *t).ok_or_else(|| ns(4, format!("{t} is not in the image of D_{{d-1}}")))?;
        if x.is_some_and(|x0| x0 != here) {
            return Err(ns(4, "marked points differ".into()));
        }
        x = Some(here);
    }
    let x = x.unwrap();
    let anchors: Vec<Elem> = data.iter().map(|&(_, a)| a).collect();
    let j0 = anchors.iter().rposition(|&a| a <= x).ok_or_else(|| ns(4, format!("marked point {x} lies below every anchor")))?;
    if conds.len() > 1 && j0 < r {
        return Err(ns(4, "marked point lies in a root block".into()));
    }
    if targets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ns(4, "targets are not increasing".into()));
    }
    Ok(StandardizedFamily { conds: conds.to_vec(), targets: targets.to_vec(), r, d, data, x, j0 })
}

/// A forced capture: `q`, the base member `F*`, its image, and the verified witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ForcedCapture {
    pub q: CohenCondition,
    pub f_star: MemberId,
    pub image: Vec<OrdinalCode>,
    pub level: usize,
    pub arity: usize,
    pub targets: Vec<OrdinalCode>,
    pub marks: Vec<Elem>,
    pub extensions: Vec<ExtensionWitness>,
}

/// Builds `q` below `n` of the conditions whose `Φ^q(F*)` captures their targets.
///
/// `mode.arity` is `Fixed(n)` or `Full` (then `n = n_k` of the level of `F*`);
/// `mode.min_level` and `mode.block` filter the level of `F*`. Every output is
/// re-verified: `q` is a condition, `q ≤ p_i` with witnesses, `Φ^q(x_i) = α_i`,
/// and `Φ^q(F*)` captures the targets through its first `n` pieces.
pub fn force_capture(s: &Scheme, fam: &StandardizedFamily, mode: &CaptureQuery) -> Result<ForcedCapture, CohenError> {
    let (r, d, j0) = (fam.r, fam.d, fam.j0);
    let have = fam.conds.len();
    if let crate::capturing::Arity::Fixed(n) = mode.arity {
        if n > have {
            return Err(CohenError::WidthExhausted { need: n, have });
        }
    }
    let (d_top, _) = fam.data[d - 1];
    let a_r = fam.data[r.min(d - 1)].1;
    let a_set = s.set(d_top).clone();
    let level_ok = |k: usize| {
        k > d_top.level
            && k > mode.min_level
            && mode.block.as_ref().map_or(true, |(parts, b)| parts.contains(*b, k))
            && match mode.arity {
                crate::capturing::Arity::Fixed(n) => n <= s.typ().n(k),
                crate::capturing::Arity::Full => s.typ().n(k) <= have,
            }
    };
    for f_star in covers_with_root(s, &a_set, a_r, level_ok) {
        let n = match mode.arity {
            crate::capturing::Arity::Fixed(n) => n,
            crate::capturing::Arity::Full => s.typ().n(f_star.level),
        };
        if let Some(out) = build_forced(s, fam, f_star, n, r, d, j0) {
            return Ok(out);
        }
    }
    Err(depth(&a_set, a_r, &format!("no F* above level {} passes the construction ({})", d_top.level, crate::scheme::cover_blocker(s, &a_set, a_r))))
}

fn build_forced(s: &Scheme, fam: &StandardizedFamily, f_star: MemberId, n: usize, r: usize, d: usize, j0: usize) -> Option<ForcedCapture> {
    let pieces = s.pieces(f_star);
    let f0 = s.set(pieces[0]);
    let mut w0 = Vec::with_capacity(d);
    for j in 0..d {
        let (dj, aj) = fam.data[j];
        w0.push(if j < r { None } else { Some(copy_with_interval(s, pieces[0], dj, aj).ok()?) });
    }
    let mut entries: Vec<Entry> = (0..r).map(|j| Entry { delta: fam.conds[0].entries[j].delta, member: fam.data[j].0, anchor: fam.data[j].1 }).collect();
    let mut marks = Vec::with_capacity(n);
    for i in 0..n {
        let phi = order_iso(f0, s.set(pieces[i])).ok()?;
        for j in r..d {
            let (dj, aj) = fam.data[j];
            let wij = phi.image(s.set(w0[j]?))?;
            let aij = order_iso(s.set(dj), &wij).ok()?.apply(aj)?;
            entries.push(Entry { delta: fam.conds[i].entries[j].delta, member: f_star, anchor: aij });
            if j == j0 {
                marks.push(order_iso(s.set(dj), &wij).ok()?.apply(fam.x)?);
            }
        }
        if j0 < r {
            marks.push(fam.x);
        }
    }
    let q = from_entries(s, entries)?;
    let mut extensions = Vec::with_capacity(n);
    for i in 0..n {
        extensions.push(leq(s, &q, &fam.conds[i]).ok()?);
        if q.phi(marks[i]) != fam.targets[i] {
            return None;
        }
    }
    let map = phi_total(s, &q);
    let image = map.image(s.set(f_star))?;
    let root = map.image(&s.root(f_star))?;
    let imgs: Vec<Vec<OrdinalCode>> = pieces[..n].iter().map(|&p| map.image(s.set(p))).collect::<Option<_>>()?;
    let piece_slices: Vec<&[OrdinalCode]> = imgs.iter().map(Vec::as_slice).collect();
    let singles: Vec<[OrdinalCode; 1]> = fam.targets[..n].iter().map(|t| [*t]).collect();
    let members: Vec<&[OrdinalCode]> = singles.iter().map(|t| t.as_slice()).collect();
    if n >= 1 && capture_clauses(&root, &piece_slices, &[], &members).is_err() {
        return None;
    }
    Some(ForcedCapture { q, f_star, image, level: f_star.level, arity: n, targets: fam.targets[..n].to_vec(), marks, extensions })
}

/// A density goal for [`run_generic`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Goal {
    CoverOrdinal(OrdinalCode),
    CoverSet(Vec<OrdinalCode>),
    /// Capture the given limits, all above the current support, as new points.
    ForceCapture { targets: Vec<OrdinalCode>, mode: CaptureQuery },
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[OrdinalCode]| v.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Goal::CoverOrdinal(x) => write!(f, "cover {x}"),
            Goal::CoverSet(v) => write!(f, "cover-set {{{}}}", list(v)),
            Goal::ForceCapture { targets, .. } => write!(f, "capture ({})", list(targets)),
        }
    }
}

/// Parses a goal schedule, one goal per line:
///
/// ```text
/// cover w+1
/// cover-set 3,w*2+1
/// capture w*4,w*5,w*6 n=3 min=2
/// capture w*4,w*5 full blocks=1,0,0,0:1
/// ```
///
/// `blocks=<assignment of levels 1..>:<block>` restricts the capture level to a block.
pub fn parse_schedule(text: &str) -> Result<Vec<Goal>, CohenError> {
    let mut goals = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| CohenError::Parse { line: i + 1, msg };
        let mut words = line.split_whitespace();
        let head = words.next().unwrap_or("");
        let ords = |w: Option<&str>| -> Result<Vec<OrdinalCode>, CohenError> {
            let w = w.ok_or_else(|| err(format!("{head} needs ordinals")))?;
            w.split(',').map(|t| t.parse().map_err(|e| err(format!("{e}")))).collect()
        };
        let goal = match head {
            "cover" => {
                let v = ords(words.next())?;
                match v.as_slice() {
                    [x] => Goal::CoverOrdinal(*x),
                    _ => return Err(err("cover takes one ordinal".into())),
                }
            }
            "cover-set" => Goal::CoverSet(ords(words.next())?),
            "capture" => {
                let targets = ords(words.next())?;
                let mut mode = CaptureQuery::fixed(targets.len());
                for opt in words.by_ref() {
                    let num = |v: &str| v.parse::<usize>().map_err(|_| err(format!("bad number in {opt}")));
                    match opt.split_once('=') {
                        None if opt == "full" => mode.arity = crate::capturing::Arity::Full,
                        Some(("n", v)) => mode.arity = crate::capturing::Arity::Fixed(num(v)?),
                        Some(("min", v)) => mode.min_level = num(v)?,
                        Some(("blocks", v)) => {
                            let (assign, b) = v.rsplit_once(':').ok_or_else(|| err(format!("{opt}: expected <levels>:<block>")))?;
                            let assign = assign.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
                            let count = assign.iter().max().map_or(1, |m| m + 1);
                            let parts = PartitionSchedule::new(assign, count).map_err(|e| err(e.to_string()))?;
                            mode.block = Some((parts, num(b)?));
                        }
                        _ => return Err(err(format!("unknown capture option {opt}"))),
                    }
                }
                Goal::ForceCapture { targets, mode }
            }
            other => return Err(err(format!("unknown goal {other:?}"))),
        };
        if words.next().is_some() {
            return Err(err("trailing text".into()));
        }
        goals.push(goal);
    }
    Ok(goals)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoalStatus {
    pub goal: String,
    pub fuel_used: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericRun {
    pub chain: Vec<CohenCondition>,
    pub statuses: Vec<GoalStatus>,
    pub fragment: Vec<LabeledSet>,
    pub check: Report,
}

/// Meets the goals in order along a decreasing chain starting at the empty
/// condition. Each call to an extension operation costs one unit of fuel.
pub fn run_generic(s: &Scheme, schedule: &[Goal], fuel: usize, cap: OrdinalCode) -> Result<GenericRun, CohenError> {
    let mut chain = vec![CohenCondition::empty()];
    let mut statuses = Vec::new();
    let mut left = fuel;
    for (index, goal) in schedule.iter().enumerate() {
        let wrap = |e: CohenError| CohenError::Goal { index, source: Box::new(e) };
        let cost = match goal {
            Goal::CoverOrdinal(_) | Goal::ForceCapture { .. } => 1,
            Goal::CoverSet(v) => v.len().max(1),
        };
        if cost > left {
            return Err(CohenError::FuelExhausted(index));
        }
        left -= cost;
        let p = chain.last().unwrap().clone();
        let (q, detail) = match goal {
            Goal::CoverOrdinal(xi) => {
                let (q, x) = extend_to_cover(s, &p, *xi, cap).map_err(wrap)?;
                (q, format!("Φ({x}) = {xi}"))
            }
            Goal::CoverSet(v) => {
                let q = extend_cover_set(s, &p, v, cap).map_err(wrap)?;
                (q, format!("{} ordinals inside Φ(D_n)", v.len()))
            }
            Goal::ForceCapture { targets, mode } => {
                let forced = capture_goal(s, &p, targets, mode, cap).map_err(wrap)?;
                let img: Vec<String> = forced.image.iter().map(|o| o.to_string()).collect();
                (forced.q, format!("level {} member {{{}}} captures {} targets", forced.level, img.join(","), forced.arity))
            }
        };
        if q != p && leq(s, &q, &p).is_err() {
            return Err(wrap(CohenError::BadGoal(format!("{goal}: result is not below the previous condition"))));
        }
        statuses.push(GoalStatus { goal: goal.to_string(), fuel_used: fuel - left, detail });
        if q != p {
            chain.push(q);
        }
    }
    let fragment = induced_family(s, chain.last().unwrap());
    let check = verify_fragment(s, &fragment);
    Ok(GenericRun { chain, statuses, fragment, check })
}

fn capture_goal(s: &Scheme, p: &CohenCondition, targets: &[OrdinalCode], mode: &CaptureQuery, cap: OrdinalCode) -> Result<ForcedCapture, CohenError> {
    let max_supp = p.entries.last().map(|e| e.delta);
    if targets.is_empty() || targets.windows(2).any(|w| w[0] >= w[1]) || targets.iter().any(|t| !t.is_limit() || Some(*t) <= max_supp) {
        return Err(CohenError::BadGoal("capture targets must be increasing limits above the support".into()));
    }
    if let Some(t) = targets.iter().find(|t| **t > cap) {
        return Err(CohenError::OverCap { ordinal: *t, cap });
    }
    let top = p.top_set(s).cloned().unwrap_or_default();
    let lo = top.max_elem().map_or(1, |m| m + 1);
    let min_level = p.top().map_or(0, |t| t.level);
    let mut last = depth(&top, lo, "no member holds D_n and a fresh anchor");
    for f in first_containing(s, &top.union(&FinSet::from([lo])), min_level).take(CAPTURE_COVERS) {
        for a in s.set(f).at_or_above(lo).iter() {
            let conds: Option<Vec<CohenCondition>> = targets
                .iter()
                .map(|&t| {
                    let mut entries = p.entries.clone();
                    entries.push(Entry { delta: t, member: f, anchor: a });
                    from_entries(s, entries)
                })
                .collect();
            let Some(conds) = conds else { continue };
            let fam = standardize(s, &conds, targets)?;
            match force_capture(s, &fam, mode) {
                Ok(forced) if leq(s, &forced.q, p).is_ok() => return Ok(forced),
                Ok(_) => last = depth(&top, a, "forced condition is not below the current one"),
                Err(e @ CohenError::WidthExhausted { .. }) => return Err(e),
                Err(e) => last = e,
            }
        }
    }
    Err(last)
}

/// Restricted axiom re-check of an induced family: sizes, same-level `⊑`,
/// and decompositions derived by containment.
pub fn verify_fragment(s: &Scheme, fragment: &[LabeledSet]) -> Report {
    let mut report = Report::new("generic fragment");
    let top = s.top();
    let by_level: Vec<Vec<&LabeledSet>> = (0..=top).map(|k| fragment.iter().filter(|m| m.level == k).collect()).collect();
    let mut sizes = Check::new("sizes |F| = m_k");
    for m in fragment {
        sizes.count(1);
        if m.level > top || m.set.len() != s.typ().m(m.level) {
            sizes.fail(format!("{m}"));
        }
    }
    report.push(sizes);
    let mut pairs = Check::new("same-level intersections are initial segments");
    for lv in &by_level {
        for (i, e) in lv.iter().enumerate() {
            for f in &lv[i + 1..] {
                pairs.count(1);
                let meet: Vec<OrdinalCode> = e.set.iter().copied().filter(|x| f.set.binary_search(x).is_ok()).collect();
                if !e.set.starts_with(&meet) || !f.set.starts_with(&meet) {
                    pairs.fail(format!("{e} and {f}"));
                }
            }
        }
    }
    report.push(pairs);
    let mut dec = Check::new("decompositions by containment");
    for k in 1..=top {
        for f in &by_level[k] {
            dec.count(1);
            let mut pieces: Vec<&[OrdinalCode]> = by_level[k - 1].iter().filter(|e| sorted_subset(&e.set, &f.set)).map(|e| e.set.as_slice()).collect();
            if pieces.len() != s.typ().n(k) {
                dec.fail(format!("{f} holds {} level-{} members, expected {}", pieces.len(), k - 1, s.typ().n(k)));
                continue;
            }
            let root: Vec<OrdinalCode> = pieces.iter().skip(1).fold(pieces[0].to_vec(), |acc, p| acc.into_iter().filter(|x| p.binary_search(x).is_ok()).collect());
            pieces.sort_by_key(|p| p.iter().find(|x| root.binary_search(x).is_err()).copied());
            let mut union: Vec<OrdinalCode> = pieces.iter().flat_map(|p| p.iter().copied()).collect();
            union.sort();
            union.dedup();
            if union != f.set {
                dec.fail(format!("pieces of {f} do not cover it"));
            } else if root.len() != s.typ().r(k) {
                dec.fail(format!("root of {f} has size {}", root.len()));
            } else if let Err(m) = increasing_delta(&root, &pieces) {
                dec.fail(format!("{f}: {m}"));
            }
        }
    }
    report.push(dec);
    report
}

/// Every condition whose support has at most `max_supp` points from `limits`
/// and whose members come from `members`, including the empty condition.
pub fn enumerate_conditions(s: &Scheme, members: &[MemberId], limits: &[OrdinalCode], max_supp: usize) -> Vec<CohenCondition> {
    let mut out = vec![CohenCondition::empty()];
    let mut frontier = vec![CohenCondition::empty()];
    for _ in 0..max_supp {
        let mut next = Vec::new();
        for p in &frontier {
            let last = p.entries.last();
            for &delta in limits.iter().filter(|d| last.map_or(true, |e| **d > e.delta)) {
                for &m in members {
                    for a in s.set(m).iter() {
                        let mut entries = p.entries.clone();
                        entries.push(Entry { delta, member: m, anchor: a });
                        if let Some(q) = from_entries(s, entries) {
                            next.push(q);
                        }
                    }
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// All ordinals `ω·l + o` with `l ≤ max_limb` and `o ≤ max_off`.
pub fn ordinals_up_to(max_limb: u32, max_off: u32) -> Vec<OrdinalCode> {
    (0..=max_limb).flat_map(|l| (0..=max_off).map(move |o| OrdinalCode::new(l, o))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::build_scheme;
    use crate::types::TypeSequence;

    fn base() -> &'static Scheme {
        static BASE: std::sync::OnceLock<Scheme> = std::sync::OnceLock::new();
        BASE.get_or_init(|| {
            let t = crate::types::generate_type(&"k+1".parse().unwrap(), &ORDER_BASE_ROOTS.parse().unwrap(), ORDER_BASE_TOP).unwrap();
            build_scheme(&t, ORDER_BASE_TOP).unwrap()
        })
    }

    fn w(l: u32) -> OrdinalCode {
        OrdinalCode::limit(l)
    }

    fn cond(s: &Scheme, v: &[(OrdinalCode, &[u32], u32)]) -> Result<CohenCondition, CohenError> {
        let raw: Vec<_> = v.iter().map(|(d, set, a)| (*d, FinSet::new(set.to_vec()), *a)).collect();
        validate_condition(s, &raw)
    }

    #[test]
    fn validation_examples() {
        let s = base();
        assert!(cond(&s, &[(w(1), &[0, 1], 1)]).is_ok());
        assert_eq!(
            cond(&s, &[(w(1), &[0, 1, 2, 3], 1), (w(2), &[0, 1], 2)]),
            Err(CohenError::Violation { clause: ConditionClause::Nested, index: 1 })
        );
        assert_eq!(cond(&s, &[(OrdinalCode::new(1, 1), &[0, 1], 1)]), Err(CohenError::Violation { clause: ConditionClause::Limit, index: 0 }));
        assert!(cond(&s, &[]).unwrap().is_empty());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_embed(2, w(1), 1), OrdinalCode::natural(1));
        assert_eq!(phi_embed(2, w(1), 5), OrdinalCode::new(1, 3));
        let s = base();
        let p = cond(&s, &[(w(1), &[0, 1], 1)]).unwrap();
        assert_eq!(phi_total(&s, &p).pairs(), &[(0, OrdinalCode::natural(0)), (1, w(1))]);
        let p = cond(&s, &[(w(1), &[0, 1, 2, 3], 1)]).unwrap();
        assert_eq!(phi_total(&s, &p).pairs().iter().map(|p| p.1).collect::<Vec<_>>(), vec![OrdinalCode::natural(0), w(1), OrdinalCode::new(1, 1), OrdinalCode::new(1, 2)]);
        let p = cond(&s, &[(w(1), &[0, 1, 2, 3], 1), (w(2), &[0, 1, 2, 3], 2)]).unwrap();
        assert_eq!(phi_total(&s, &p).pairs().iter().map(|p| p.1).collect::<Vec<_>>(), vec![OrdinalCode::natural(0), w(1), w(2), OrdinalCode::new(2, 1)]);
        assert!(phi_total(&s, &CohenCondition::empty()).pairs().is_empty());
    }

    #[test]
    fn induced_family_example() {
        let s = base();
        let p = cond(&s, &[(w(1), &[0, 1], 1)]).unwrap();
        let fam: Vec<Vec<OrdinalCode>> = induced_family(&s, &p).into_iter().map(|m| m.set).collect();
        assert_eq!(fam, vec![vec![OrdinalCode::natural(0)], vec![w(1)], vec![OrdinalCode::natural(0), w(1)]]);
        assert!(induced_family(&s, &CohenCondition::empty()).is_empty());
    }

    #[test]
    fn leq_examples() {
        let s = base();
        let p = cond(&s, &[(w(1), &[0, 1, 2, 3], 1)]).unwrap();
        let q = cond(&s, &[(w(1), &[0, 1], 1)]).unwrap();
        let wit = leq(&s, &p, &q).unwrap();
        assert_eq!(s.set(wit.witnesses[0].1), &FinSet::from([0, 1]));
        let p0 = cond(&s, &[(w(1), &[0, 1, 2, 3], 0)]).unwrap();
        assert_eq!(leq(&s, &p0, &q), Err(LeqFailure::ClauseII(w(1))));
        assert!(leq(&s, &p, &p).is_ok());
        assert!(leq(&s, &p, &CohenCondition::empty()).is_ok());
        assert_eq!(leq(&s, &CohenCondition::empty(), &p), Err(LeqFailure::Support(w(1))));
    }

    #[test]
    fn extend_examples() {
        let s = base();
        let cap = OrdinalCode::new(3, 4);
        let (q, x) = extend_to_cover(&s, &CohenCondition::empty(), OrdinalCode::new(1, 1), cap).unwrap();
        assert_eq!(q, cond(&s, &[(w(1), &[0, 1, 2, 3], 1)]).unwrap());
        assert_eq!(x, 2);
        let p = cond(&s, &[(w(1), &[0, 1], 1)]).unwrap();
        assert_eq!(extend_to_cover(&s, &p, w(1), cap).unwrap(), (p.clone(), 1));
        let (q, x) = extend_to_cover(&s, &p, OrdinalCode::natural(5), cap).unwrap();
        assert_eq!((x, q.phi(x)), (5, OrdinalCode::natural(5)));
        assert!(leq(&s, &q, &p).is_ok());
        assert!(matches!(extend_to_cover(&s, &p, OrdinalCode::new(4, 0), cap), Err(CohenError::OverCap { .. })));
    }

    #[test]
    fn cover_set_examples() {
        let s = base();
        let cap = OrdinalCode::new(3, 4);
        let e = CohenCondition::empty();
        assert_eq!(extend_cover_set(&s, &e, &[], cap).unwrap(), e);
        for targets in [vec![OrdinalCode::natural(0), w(1)], vec![w(1), w(2)]] {
            let q = extend_cover_set(&s, &e, &targets, cap).unwrap();
            let fam = induced_family(&s, &q);
            assert!(fam.iter().any(|m| targets.iter().all(|t| m.set.contains(t))), "{}", q.describe(&s));
        }
        let q = extend_cover_set(&s, &e, &[OrdinalCode::natural(0), w(1)], cap).unwrap();
        assert!(induced_family(&s, &q).iter().any(|m| m.set == vec![OrdinalCode::natural(0), w(1)]));
    }

    fn three(s: &Scheme) -> (Vec<CohenCondition>, Vec<OrdinalCode>) {
        let conds = (1..=3).map(|t| cond(s, &[(w(t), &[0, 1], 1)]).unwrap()).collect();
        (conds, vec![w(1), w(2), w(3)])
    }

    #[test]
    fn standardize_examples() {
        let s = base();
        let (conds, targets) = three(&s);
        let fam = standardize(&s, &conds, &targets).unwrap();
        assert_eq!((fam.r, fam.d, fam.j0, fam.x), (0, 1, 0, 1));
        let mixed = vec![conds[0].clone(), cond(&s, &[(w(2), &[0, 1], 0)]).unwrap()];
        assert!(matches!(standardize(&s, &mixed, &targets[..2]), Err(CohenError::NotStandardizable(3, _))));
        assert!(standardize(&s, &conds[..1], &targets[..1]).is_ok());
    }

    #[test]
    fn force_capture_examples() {
        let s = base();
        let (conds, targets) = three(&s);
        let fam = standardize(&s, &conds, &targets).unwrap();
        let out = force_capture(&s, &fam, &CaptureQuery::fixed(3)).unwrap();
        assert_eq!(out.q.support(), vec![w(1), w(2), w(3)]);
        for (i, c) in conds.iter().enumerate() {
            assert!(leq(&s, &out.q, c).is_ok());
            assert_eq!(out.q.phi(out.marks[i]), targets[i]);
        }
        let one = standardize(&s, &conds[..1], &targets[..1]).unwrap();
        let out1 = force_capture(&s, &one, &CaptureQuery::fixed(1)).unwrap();
        assert!(leq(&s, &out1.q, &conds[0]).is_ok());
        let parts = crate::types::PartitionSchedule::new(vec![1, 0, 0, 0, 0, 0, 0, 0], 2).unwrap();
        assert!(matches!(force_capture(&s, &fam, &CaptureQuery::fixed(3).in_block(parts, 1)), Err(CohenError::DepthExhausted { .. })));
        assert!(matches!(force_capture(&s, &fam, &CaptureQuery::fixed(4)), Err(CohenError::WidthExhausted { need: 4, have: 3 })));
    }

    #[test]
    fn generic_examples() {
        let s = base();
        let cap = OrdinalCode::new(3, 4);
        let run = run_generic(&s, &[], 10, cap).unwrap();
        assert_eq!(run.chain, vec![CohenCondition::empty()]);
        assert!(run.fragment.is_empty());
        let goals = vec![Goal::CoverOrdinal(w(1)), Goal::CoverOrdinal(w(2)), Goal::CoverSet(vec![OrdinalCode::natural(0), OrdinalCode::new(1, 1)])];
        let run = run_generic(&s, &goals, 10, cap).unwrap();
        assert!(run.chain.len() <= 4);
        assert!(run.check.passed(), "{}", run.check.render_text());
        let err = run_generic(&s, &[Goal::CoverOrdinal(OrdinalCode::new(5, 0))], 10, cap).unwrap_err();
        assert!(matches!(err, CohenError::Goal { index: 0, .. }));
    }

    #[test]
    fn text_round_trip() {
        let s = base();
        let p = cond(&s, &[(w(1), &[0, 1, 2, 3], 1), (w(2), &[0, 1, 2, 3], 2)]).unwrap();
        assert_eq!(parse_condition(&s, &p.to_text(&s)).unwrap(), p);
        assert!(matches!(parse_condition(&s, "w : 0 1\n"), Err(CohenError::Parse { line: 1, .. })));
    }

    #[test]
    fn small_scheme_has_no_room() {
        let t = TypeSequence::new(vec![1, 2, 4], vec![2, 3], vec![0, 1]).unwrap();
        let s = build_scheme(&t, 2).unwrap();
        let p = cond(&s, &[(w(1), &[0, 1, 2, 3], 3)]).unwrap();
        assert!(matches!(extend_to_cover(&s, &p, OrdinalCode::new(1, 2), OrdinalCode::new(3, 4)), Err(CohenError::DepthExhausted { .. })));
    }
}
