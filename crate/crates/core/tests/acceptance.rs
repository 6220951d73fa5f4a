//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::time::{Duration, Instant};

use capture_lab::capturing::{captures, combinations, find_capture, CaptureQuery, DeltaSystemFamily};
use capture_lab::cohen::{
    enumerate_conditions, extend_to_cover, force_capture, induced_family, leq, ordinals_up_to, parse_condition, parse_schedule,
    run_generic, standardize, CohenCondition, LabeledSet,
};
use capture_lab::knaster::{
    build_colorings, coloring_bridge, p1_amalgam_check, p1_scenarios, pn_is_condition, pn_standard_family, pn_union_check,
    verify_colorings, PnCondition, PnError,
};
use capture_lab::scheme::{build_scheme, verify_axioms, verify_lemmas};
use capture_lab::types::{largest_top, PartitionSchedule};
use capture_lab::{FinSet, MemberId, OrdinalCode, Scheme};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const TYPE_MAX_SIZE: usize = 5000;
const TYPE_TIME_LIMIT: Duration = Duration::from_secs(60);
const ORACLE_MAX_SIZE: usize = 200;
const ORACLE_FAMILIES: usize = 1000;
const COLOR_MAX_SIZE: usize = 500;
const COLOR_MAX_ARITY: usize = 4;
const PN_MAX_SIZE: usize = 200;
const P1_SCENARIOS: usize = 100;
const DENSITY_TIME_LIMIT: Duration = Duration::from_secs(120);
const GENERIC_FUEL: usize = 50;

const SCHEDULE: &str = "\
cover w
cover w*2
capture w*3,w*4,w*5 n=3
cover 0
cover w*5+1
cover-set w*6,w*6+1
capture w*7,w*8 n=2
cover w*8+2
cover-set 0,w*9
cover w*10+3
capture w*11,w*12,w*13
cover-set w*13+1,w*14
";

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let mut lines = Vec::new();
    for (w, r) in [("k+1", "diag"), ("k+1", "cycle:0,1,2"), ("k+2", "diag")] {
        let t0 = Instant::now();
        let typ = largest_top(&w.parse().unwrap(), &r.parse().unwrap(), TYPE_MAX_SIZE).map_err(|e| e.to_string())?;
        let s = build_scheme(&typ, typ.top()).map_err(|e| format!("n={w} r={r}: {e}"))?;
        let ax = verify_axioms(&s);
        let lem = verify_lemmas(&s);
        let took = t0.elapsed();
        ensure(ax.passed(), || format!("n={w} r={r}: {}", ax.render_text()))?;
        ensure(lem.passed(), || format!("n={w} r={r}: {}", lem.render_text()))?;
        ensure(took <= TYPE_TIME_LIMIT, || format!("n={w} r={r}: {took:?}"))?;
        lines.push(format!("n={w} r={r} m[{}]={} in {:.1?}", s.top(), s.universe(), took));
    }
    Ok(lines.join("; "))
}

fn criterion_2() -> Outcome {
    let schemes = common::small_schemes(ORACLE_MAX_SIZE);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut found = 0;
    for trial in 0..ORACLE_FAMILIES {
        let (name, s) = &schemes[trial % schemes.len()];
        let fam = common::random_family(s, &mut rng);
        let arity = if rng.gen_bool(0.2) { None } else { Some(rng.gen_range(2..=4)) };
        let min_level = rng.gen_range(0..2usize);
        let query = arity.map_or_else(CaptureQuery::full, CaptureQuery::fixed).min_level(min_level);
        let got = find_capture(s, &fam, &query).map_err(|e| e.to_string())?.witness;
        let got = got.map(|w| (w.level, w.f, w.indices));
        let want = common::brute_capture(s, &fam, arity, min_level);
        ensure(got == want, || format!("{name}: family {:?}: search {got:?}, oracle {want:?}", fam.members()))?;
        found += got.is_some() as usize;
    }
    Ok(format!("{ORACLE_FAMILIES} families over {} schemes, {found} captures", schemes.len()))
}

fn criterion_3() -> Outcome {
    let schemes = common::small_schemes(COLOR_MAX_SIZE);
    for (name, s) in &schemes {
        let t = build_colorings(s);
        let inv = verify_colorings(s, &t);
        ensure(inv.passed(), || format!("{name}: {}", inv.render_text()))?;
        let bridge = coloring_bridge(s, &t, COLOR_MAX_ARITY);
        ensure(bridge.passed(), || format!("{name}: {}", bridge.render_text()))?;
    }
    let s = common::small();
    let t = build_colorings(&s);
    let got = (t.f(1).to_vec(), t.f(2).to_vec(), t.f(3).to_vec(), t.bounds().to_vec());
    let want = (vec![0, 3, 5], vec![0, 3, 6], vec![0, 3, 7], vec![1, 4, 8]);
    ensure(got == want, || format!("worked values {got:?}"))?;
    Ok(format!("{} schemes at arities 2..{COLOR_MAX_ARITY}; f_1=(0,3,5) f_2=(0,3,6) f_3=(0,3,7) N=(1,4,8)", schemes.len()))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut unions, mut failures, mut example) = (0, 0, None);
    for (name, s) in common::small_schemes(PN_MAX_SIZE) {
        for n in 1..=3usize {
            for _ in 0..20 {
                if s.top() < 2 {
                    continue;
                }
                let k = rng.gen_range(1..s.top());
                let d = MemberId { level: k, idx: rng.gen_range(0..s.level(k).len()) };
                let p = FinSet::new(s.set(d).iter().filter(|_| rng.gen_bool(0.5)).collect());
                if p.is_empty() || pn_is_condition(&s, &p, n).is_err() {
                    continue;
                }
                let base = PnCondition::new(&s, p, n).unwrap();
                let width = (k + 1..=s.top()).map(|j| s.typ().n(j)).max().unwrap();
                let Some(fam) = (2..=width).rev().find_map(|t| pn_standard_family(&s, &base, k, t).ok()) else { continue };
                for pick in combinations(fam.len(), n.min(fam.len())) {
                    let conds: Vec<PnCondition> = pick.iter().map(|&i| fam[i].clone()).collect();
                    pn_union_check(&s, &conds, n).map_err(|e| format!("{name}: base {} n={n} copies {pick:?}: {e}", base.set()))?;
                    unions += 1;
                }
                if fam.len() > n {
                    let failed = combinations(fam.len(), n + 1).find_map(|pick| {
                        let conds: Vec<PnCondition> = pick.iter().map(|&i| fam[i].clone()).collect();
                        match pn_union_check(&s, &conds, n) {
                            Err(PnError::Captured(c)) => Some(c),
                            _ => None,
                        }
                    });
                    if let Some(c) = failed {
                        ensure(c.tuple.len() == n + 1, || format!("captured tuple {:?} for n={n}", c.tuple))?;
                        failures += 1;
                        example.get_or_insert_with(|| format!("{name} n={n}: {c}"));
                    }
                }
            }
        }
    }
    ensure(failures > 0, || "no family wide enough for an (n+1)-union".into())?;
    Ok(format!("{unions} n-unions are conditions; {failures} families with a captured (n+1)-tuple, e.g. {}", example.unwrap()))
}

fn criterion_5() -> Outcome {
    let s = common::scheme_for("k+1", "diag", 500);
    let scenarios = p1_scenarios(&s, 150, 17);
    ensure(scenarios.len() >= P1_SCENARIOS, || format!("only {} scenarios", scenarios.len()))?;
    for sc in &scenarios {
        ensure(p1_amalgam_check(&s, sc) == Ok(true), || format!("{sc:?}"))?;
    }
    Ok(format!("{} seeded scenarios amalgamate", scenarios.len()))
}

fn space(s: &Scheme) -> Vec<CohenCondition> {
    let limits = [OrdinalCode::limit(1), OrdinalCode::limit(2), OrdinalCode::limit(3)];
    enumerate_conditions(s, &common::cohen_members(s), &limits, 2)
}

fn criterion_6() -> Outcome {
    let t0 = Instant::now();
    let s = common::cohen_base();
    let sp = space(s);
    let cap = OrdinalCode::new(3, 4);
    let xis = ordinals_up_to(3, 4);
    let fails: Vec<String> = sp
        .par_iter()
        .flat_map_iter(|p| {
            xis.iter().filter_map(move |&xi| match extend_to_cover(s, p, xi, cap) {
                Ok((q, x)) if q.phi(x) == xi && leq(s, &q, p).is_ok() => None,
                Ok(_) => Some(format!("{} / {xi}: output fails the check", p.describe(s))),
                Err(e) => Some(format!("{} / {xi}: {e}", p.describe(s))),
            })
        })
        .collect();
    let took = t0.elapsed();
    ensure(fails.is_empty(), || format!("{} of {} fail, first: {}", fails.len(), sp.len() * xis.len(), fails[0]))?;
    ensure(took <= DENSITY_TIME_LIMIT, || format!("{took:?}"))?;
    Ok(format!("{} conditions x {} ordinals up to {cap}, all extended, in {took:.1?}", sp.len(), xis.len()))
}

fn verify_forced(s: &Scheme, conds: &[CohenCondition], targets: &[OrdinalCode], query: &CaptureQuery) -> Result<(usize, usize), String> {
    let fam = standardize(s, conds, targets).map_err(|e| e.to_string())?;
    let out = force_capture(s, &fam, query).map_err(|e| e.to_string())?;
    for (i, w) in out.extensions.iter().enumerate() {
        ensure(leq(s, &out.q, &conds[i]).as_ref() == Ok(w), || format!("extension witness {i} does not re-verify"))?;
        ensure(out.q.phi(out.marks[i]) == targets[i], || format!("mark {i} is not sent to {}", targets[i]))?;
    }
    let marks = DeltaSystemFamily::singletons(&FinSet::new(out.marks.clone()));
    let idx: Vec<usize> = (0..out.arity).collect();
    let f = s.set(out.f_star);
    ensure(captures(s, f, &marks, &idx).map_err(|e| e.to_string())?, || format!("{f} does not capture the marks {:?}", out.marks))?;
    let w = find_capture(s, &marks, &CaptureQuery::fixed(out.arity)).map_err(|e| e.to_string())?.witness;
    ensure(w.is_some_and(|w| w.level <= out.level && captures(s, &w.f, &marks, &w.indices).unwrap_or(false)), || "no capture witness for the marks".into())?;
    Ok((out.level, out.arity))
}

fn criterion_7() -> Outcome {
    let s = common::cohen_base();
    let w = OrdinalCode::limit;
    let conds: Vec<CohenCondition> = (1..=5).map(|t| parse_condition(s, &format!("w*{t} : 0 1 @ 1")).unwrap()).collect();
    let targets: Vec<OrdinalCode> = (1..=5).map(w).collect();
    let (lw, _) = verify_forced(s, &conds[..3], &targets[..3], &CaptureQuery::fixed(3))?;
    let k_star = 2;
    let (lf, nf) = verify_forced(s, &conds, &targets, &CaptureQuery::full().min_level(k_star))?;
    ensure(nf == s.typ().n(lf) && lf > k_star, || format!("full mode arity {nf} at level {lf}"))?;
    let parts = PartitionSchedule::modulo(2, s.top()).map_err(|e| e.to_string())?;
    let q = CaptureQuery::fixed(3).min_level(k_star).in_block(parts.clone(), 0);
    let (lb, _) = verify_forced(s, &conds[..3], &targets[..3], &q)?;
    ensure(parts.contains(0, lb) && lb > k_star, || format!("block mode chose level {lb}"))?;
    Ok(format!("width 3 at level {lw}; full mode above {k_star} at level {lf} with n={nf}; even-level block above {k_star} at level {lb}"))
}

fn contains_all(big: &[LabeledSet], small: &[LabeledSet]) -> bool {
    small.iter().all(|l| big.binary_search(l).is_ok())
}

/// Reflexivity and transitivity must hold; monotonicity is reported as found.
fn criterion_8() -> (Outcome, bool) {
    let s = common::cohen_base();
    let sp = space(s);
    let n = sp.len();
    let rel: Vec<Vec<bool>> = sp.par_iter().map(|p| sp.iter().map(|q| leq(s, p, q).is_ok()).collect()).collect();
    if let Some(i) = (0..n).find(|&i| !rel[i][i]) {
        return (Err(format!("not reflexive at {}", sp[i].describe(s))), false);
    }
    let broken = (0..n).into_par_iter().find_map_any(|i| {
        for j in (0..n).filter(|&j| rel[i][j]) {
            if let Some(k) = (0..n).find(|&k| rel[j][k] && !rel[i][k]) {
                return Some((i, j, k));
            }
        }
        None
    });
    if let Some((i, j, k)) = broken {
        return (Err(format!("not transitive: {} <= {} <= {}", sp[i].describe(s), sp[j].describe(s), sp[k].describe(s))), false);
    }
    let fams: Vec<Vec<LabeledSet>> = sp.par_iter().map(|p| induced_family(s, p)).collect();
    let (mut pairs, mut bad, mut first) = (0, 0, None);
    for i in 0..n {
        for j in (0..n).filter(|&j| rel[i][j]) {
            pairs += 1;
            if !contains_all(&fams[i], &fams[j]) {
                bad += 1;
                first.get_or_insert((i, j));
            }
        }
    }
    let head = format!("reflexive and transitive on {n} conditions ({pairs} comparable pairs)");
    match first {
        None => (Ok(format!("{head}; induced families monotone")), true),
        Some((i, j)) => (
            Err(format!(
                "{head}; induced families not monotone on {bad} pairs, e.g. {} <= {}",
                sp[i].describe(s),
                sp[j].describe(s)
            )),
            true,
        ),
    }
}

fn criterion_9() -> Outcome {
    let s = common::run_base();
    let goals = parse_schedule(SCHEDULE).map_err(|e| e.to_string())?;
    ensure(goals.len() == 12, || format!("{} goals", goals.len()))?;
    let run = run_generic(s, &goals, GENERIC_FUEL, OrdinalCode::limit(16)).map_err(|e| e.to_string())?;
    let used = run.statuses.last().map_or(0, |st| st.fuel_used);
    ensure(run.statuses.len() == goals.len(), || format!("{} of {} goals met", run.statuses.len(), goals.len()))?;
    ensure(used <= GENERIC_FUEL, || format!("fuel {used}"))?;
    ensure(run.check.passed(), || run.check.render_text())?;
    Ok(format!("{} goals, fuel {used}/{GENERIC_FUEL}, chain {}, fragment {} labeled sets re-checked", goals.len(), run.chain.len(), run.fragment.len()))
}

fn main() {
    let t0 = Instant::now();
    let mut ok = true;
    let mut line = |n: usize, out: Outcome, tolerated: bool| {
        match out {
            Ok(m) => println!("PASS criterion {n}: {m}"),
            Err(m) => {
                println!("FAIL criterion {n}: {m}");
                ok &= tolerated;
            }
        }
    };
    line(1, criterion_1(), false);
    line(2, criterion_2(), false);
    line(3, criterion_3(), false);
    line(4, criterion_4(), false);
    line(5, criterion_5(), false);
    line(6, criterion_6(), false);
    line(7, criterion_7(), false);
    // the order itself must be a preorder; only the family inclusion is a known gap
    let (out, order_ok) = criterion_8();
    line(8, out, order_ok);
    line(9, criterion_9(), false);
    println!("acceptance finished in {:.1?}", t0.elapsed());
    if !ok {
        std::process::exit(1);
    }
}
