mod common;

use capture_lab::cohen::{enumerate_conditions, extend_to_cover, induced_family, leq, ordinals_up_to, parse_condition, CohenCondition};
use capture_lab::cohen::phi_embed;
use capture_lab::{OrdinalCode, Scheme};
use proptest::prelude::*;
use rayon::prelude::*;

fn space(s: &Scheme) -> Vec<CohenCondition> {
    let limits = [OrdinalCode::limit(1), OrdinalCode::limit(2), OrdinalCode::limit(3)];
    enumerate_conditions(s, &common::cohen_members(s), &limits, 2)
}

fn contains_all(big: &[capture_lab::cohen::LabeledSet], small: &[capture_lab::cohen::LabeledSet]) -> bool {
    small.iter().all(|l| big.binary_search(l).is_ok())
}

#[test]
fn density_over_space() {
    let s = common::cohen_base();
    let sp = space(s);
    let cap = OrdinalCode::new(3, 4);
    let xis = ordinals_up_to(3, 4);
    let (fails, mono): (Vec<String>, usize) = sp
        .par_iter()
        .map(|p| {
            let mut bad = Vec::new();
            let mut mono = 0;
            for &xi in &xis {
                match extend_to_cover(s, p, xi, cap) {
                    Ok((q, x)) if q.phi(x) == xi && leq(s, &q, p).is_ok() => {
                        if !contains_all(&induced_family(s, &q), &induced_family(s, p)) {
                            mono += 1;
                        }
                    }
                    Ok(_) => bad.push(format!("{} / {xi}: bad output", p.describe(s))),
                    Err(e) => bad.push(format!("{} / {xi}: {e}", p.describe(s))),
                }
            }
            (bad, mono)
        })
        .reduce(|| (Vec::new(), 0), |mut a, b| {
            a.0.extend(b.0);
            (a.0, a.1 + b.1)
        });
    eprintln!("{} conditions x {} ordinals, {} failures, {mono} outputs with a smaller family", sp.len(), xis.len(), fails.len());
    for f in fails.iter().take(10) {
        eprintln!("{f}");
    }
    assert!(fails.is_empty());
}

fn relation(s: &Scheme, sp: &[CohenCondition]) -> Vec<Vec<bool>> {
    sp.par_iter().map(|p| sp.iter().map(|q| leq(s, p, q).is_ok()).collect()).collect()
}

#[test]
fn order_is_reflexive_and_transitive() {
    let s = common::cohen_base();
    let sp = space(s);
    let rel = relation(s, &sp);
    let n = sp.len();
    for i in 0..n {
        assert!(rel[i][i], "not reflexive at {}", sp[i].describe(s));
    }
    for i in 0..n {
        for j in (0..n).filter(|&j| rel[i][j]) {
            for k in (0..n).filter(|&k| rel[j][k]) {
                assert!(rel[i][k], "{} <= {} <= {}", sp[i].describe(s), sp[j].describe(s), sp[k].describe(s));
            }
        }
    }
}

#[test]
fn comparable_pairs_can_have_unrelated_families() {
    let s = common::cohen_base();
    let p = parse_condition(s, "w : 0 1 @ 0").unwrap();
    let q = parse_condition(s, "w : 0 2 @ 0").unwrap();
    assert!(leq(s, &p, &q).is_ok());
    assert!(leq(s, &q, &p).is_ok());
    let (fp, fq) = (induced_family(s, &p), induced_family(s, &q));
    assert!(!contains_all(&fp, &fq));
    assert!(!contains_all(&fq, &fp));

    let sp = space(s);
    let rel = relation(s, &sp);
    let fams: Vec<_> = sp.iter().map(|p| induced_family(s, p)).collect();
    let mut pairs = 0;
    let mut bad = 0;
    for i in 0..sp.len() {
        for j in (0..sp.len()).filter(|&j| rel[i][j]) {
            pairs += 1;
            if !contains_all(&fams[i], &fams[j]) {
                bad += 1;
            }
        }
    }
    eprintln!("{pairs} comparable pairs, {bad} without family inclusion");
    assert!(bad > 0);
}

#[test]
fn composition_needs_a_translation() {
    let w = OrdinalCode::limit(1);
    assert_eq!(phi_embed(1, w, 2), OrdinalCode::new(1, 1));
    assert_eq!(phi_embed(2, w, 4), OrdinalCode::new(1, 2));
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn composition_with_translations(a in 0u32..20, shift in 0u32..20, x in 0u32..60, limb in 1u32..4) {
        let phi = |y: u32| if y < a { y } else { y + shift };
        let d = OrdinalCode::limit(limb);
        prop_assert_eq!(phi_embed(phi(a), d, phi(x)), phi_embed(a, d, x));
    }
}
