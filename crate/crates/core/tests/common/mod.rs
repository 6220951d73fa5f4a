#![allow(dead_code)]

use capture_lab::capturing::{check_delta_system, DeltaSystemFamily};
use capture_lab::scheme::build_scheme;
use capture_lab::types::{largest_top, RootSchedule, WidthSchedule};
use capture_lab::{FinSet, Scheme};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn scheme_for(widths: &str, roots: &str, max_size: usize) -> Scheme {
    let w: WidthSchedule = widths.parse().unwrap();
    let r: RootSchedule = roots.parse().unwrap();
    let typ = largest_top(&w, &r, max_size).unwrap();
    build_scheme(&typ, typ.top()).unwrap()
}

/// A spread of small schemes: several widths crossed with several root schedules.
pub fn small_schemes(max_size: usize) -> Vec<(String, Scheme)> {
    let mut out = Vec::new();
    for w in ["k+1", "k+2", "2k", "k+3"] {
        for r in ["zero", "diag", "cycle:0,1,2", "cycle:1"] {
            let s = scheme_for(w, r, max_size);
            if s.top() >= 1 {
                out.push((format!("n={w} r={r}"), s));
            }
        }
    }
    out
}

pub fn small() -> Scheme {
    let typ = capture_lab::TypeSequence::new(vec![1, 2, 4], vec![2, 3], vec![0, 1]).unwrap();
    build_scheme(&typ, 2).unwrap()
}

/// Least capture witness by plain enumeration: every member sorted by
/// (level, set), every increasing index tuple, clauses checked set by set.
pub fn brute_capture(s: &Scheme, fam: &DeltaSystemFamily, arity: Option<usize>, min_level: usize) -> Option<(usize, FinSet, Vec<usize>)> {
    for k in (min_level + 1)..=s.top() {
        let n = arity.unwrap_or(s.typ().n(k));
        if n > s.typ().n(k) {
            continue;
        }
        let mut sets: Vec<FinSet> = s.level(k).iter().map(|m| m.set.clone()).collect();
        sets.sort();
        for f in sets {
            let (root, pieces) = s.decompose(&f).unwrap();
            for idx in tuples(fam.len(), n) {
                if brute_clauses(&root, &pieces, fam, &idx) {
                    return Some((k, f, idx));
                }
            }
        }
    }
    None
}

fn brute_clauses(root: &FinSet, pieces: &[FinSet], fam: &DeltaSystemFamily, idx: &[usize]) -> bool {
    if !fam.root().is_subset(root) {
        return false;
    }
    for (i, &x) in idx.iter().enumerate() {
        let rest = fam.members()[x].difference(fam.root());
        if !rest.is_subset(&pieces[i].difference(root)) {
            return false;
        }
    }
    let first = &fam.members()[idx[0]];
    for (i, &x) in idx.iter().enumerate() {
        let map: Vec<(u32, u32)> = pieces[0].iter().zip(pieces[i].iter()).collect();
        let image: Vec<u32> = first.iter().map(|a| map.iter().find(|(p, _)| *p == a).unwrap().1).collect();
        if FinSet::new(image) != fam.members()[x] {
            return false;
        }
    }
    true
}

fn tuples(len: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(start: usize, len: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..len {
            cur.push(i);
            go(i + 1, len, n, cur, out);
            cur.pop();
        }
    }
    go(0, len, n, &mut cur, &mut out);
    out
}

/// A random increasing Δ-system inside the universe, half of the time planted
/// inside a member so that a capture is likely.
pub fn random_family(s: &Scheme, rng: &mut impl Rng) -> DeltaSystemFamily {
    let u = s.universe();
    if rng.gen_bool(0.5) {
        let k = rng.gen_range(1..=s.top());
        let members = s.level(k);
        let id = capture_lab::MemberId { level: k, idx: rng.gen_range(0..members.len()) };
        let (root, pieces) = s.decompose(s.set(id)).unwrap();
        let sub: Vec<u32> = root.iter().filter(|_| rng.gen_bool(0.5)).collect();
        let rest: Vec<u32> = pieces[0].difference(&root).iter().filter(|_| rng.gen_bool(0.4)).collect();
        let rest = if rest.is_empty() { vec![pieces[0].difference(&root).max_elem().unwrap()] } else { rest };
        let base: Vec<u32> = sub.iter().chain(rest.iter()).copied().collect();
        let pos: Vec<usize> = base.iter().map(|&x| pieces[0].position(x).unwrap()).collect();
        let mut fam: Vec<FinSet> = pieces
            .iter()
            .map(|p| FinSet::new(pos.iter().map(|&i| p.as_slice()[i]).collect()))
            .collect();
        // perturb: drop some copies, occasionally add a stray set on top
        let keep = rng.gen_range(2..=fam.len().max(2)).min(fam.len());
        let mut idx: Vec<usize> = (0..fam.len()).collect();
        idx.shuffle(rng);
        idx.truncate(keep);
        idx.sort();
        fam = idx.into_iter().map(|i| fam[i].clone()).collect();
        if rng.gen_bool(0.3) {
            let top = fam.last().unwrap().max_elem().unwrap();
            if top + 1 < u {
                let x = rng.gen_range(top + 1..u);
                fam.push(FinSet::new(sub.iter().copied().chain([x]).collect()));
            }
        }
        if let Ok(f) = check_delta_system(fam) {
            return f;
        }
    }
    loop {
        let root_len = rng.gen_range(0..3usize);
        let mut next: u32 = 0;
        let mut root = Vec::new();
        for _ in 0..root_len {
            next += rng.gen_range(0..3);
            root.push(next);
            next += 1;
        }
        let count = rng.gen_range(2..6);
        let mut fam = Vec::new();
        for _ in 0..count {
            let size = rng.gen_range(1..3);
            let mut m = root.clone();
            for _ in 0..size {
                next += rng.gen_range(0..4);
                m.push(next);
                next += 1;
            }
            fam.push(FinSet::new(m));
        }
        if next <= u {
            if let Ok(f) = check_delta_system(fam) {
                return f;
            }
        }
    }
}

fn base_scheme(roots: &str, top: usize) -> Scheme {
    let typ = capture_lab::types::generate_type(&"k+1".parse().unwrap(), &roots.parse().unwrap(), top).unwrap();
    build_scheme(&typ, top).unwrap()
}

/// The base for order and density sweeps.
pub fn cohen_base() -> &'static Scheme {
    static BASE: std::sync::OnceLock<Scheme> = std::sync::OnceLock::new();
    BASE.get_or_init(|| base_scheme(capture_lab::cohen::ORDER_BASE_ROOTS, capture_lab::cohen::ORDER_BASE_TOP))
}

/// The shallow base for forcing and generic runs.
pub fn run_base() -> &'static Scheme {
    static BASE: std::sync::OnceLock<Scheme> = std::sync::OnceLock::new();
    BASE.get_or_init(|| base_scheme(capture_lab::cohen::RUN_BASE_ROOTS, capture_lab::cohen::RUN_BASE_TOP))
}

/// Every member inside `E_2` at levels `≤ 2`.
pub fn cohen_members(s: &Scheme) -> Vec<capture_lab::MemberId> {
    let e2 = s.find(&FinSet::range(0, 4)).expect("E_2 is a member");
    s.restrict(e2).into_iter().flatten().collect()
}
