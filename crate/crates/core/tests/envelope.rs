use equipart::envelope::{
    ds_check, real_roots, sampled_disagreements, search_superlinear, upper_envelope, DsWord,
    EnvelopeProfile, Polynomial1D,
};
use proptest::prelude::*;

fn family(degree: usize, max_q: usize) -> impl Strategy<Value = Vec<Polynomial1D>> {
    prop::collection::vec(prop::collection::vec(-1.0..1.0f64, degree + 1), 2..=max_q)
        .prop_map(|cs| cs.into_iter().map(Polynomial1D::new).collect())
}

fn max_at(polys: &[Polynomial1D], x: f64) -> f64 {
    polys
        .iter()
        .map(|p| p.eval(x))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn check_breakpoints(
    polys: &[Polynomial1D],
    profile: &EnvelopeProfile,
) -> Result<(), TestCaseError> {
    let b = &profile.breakpoints;
    for (i, &x) in b.iter().enumerate() {
        let (l, r) = (&polys[profile.active[i]], &polys[profile.active[i + 1]]);
        prop_assert!((l.eval(x) - r.eval(x)).abs() <= 1e-8);
        let room = |j: Option<&f64>| j.is_none_or(|&y| (y - x).abs() > 2e-4);
        let inside = x - 1e-4 > profile.interval.0 && x + 1e-4 < profile.interval.1;
        if inside && room(i.checked_sub(1).and_then(|k| b.get(k))) && room(b.get(i + 1)) {
            prop_assert!(l.eval(x - 1e-4) > r.eval(x - 1e-4));
            prop_assert!(r.eval(x + 1e-4) > l.eval(x + 1e-4));
        }
    }
    prop_assert!(profile.active.windows(2).all(|w| w[0] != w[1]));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 1000,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn lines_switch_at_most_q_minus_one_times(polys in family(1, 8)) {
        let p = upper_envelope(&polys, -1.0, 1.0).unwrap();
        prop_assert!(p.switch_count() < polys.len());
        prop_assert!(ds_check(&p.word(), 1));
        check_breakpoints(&polys, &p)?;
    }

    #[test]
    fn quadratics_switch_at_most_twice_per_extra_member(polys in family(2, 8)) {
        let p = upper_envelope(&polys, -1.0, 1.0).unwrap();
        prop_assert!(p.switch_count() <= 2 * (polys.len() - 1));
        prop_assert!(ds_check(&p.word(), 2));
        check_breakpoints(&polys, &p)?;
    }

    #[test]
    fn cubic_words_are_ds3(polys in family(3, 7)) {
        let p = upper_envelope(&polys, -1.0, 1.0).unwrap();
        prop_assert!(ds_check(&p.word(), 3));
        check_breakpoints(&polys, &p)?;
    }

    #[test]
    fn envelope_dominates(polys in family(3, 6), xs in prop::collection::vec(-1.0..1.0f64, 1000)) {
        let p = upper_envelope(&polys, -1.0, 1.0).unwrap();
        for x in xs {
            let g = max_at(&polys, x);
            prop_assert!((polys[p.active_at(x)].eval(x) - g).abs() <= 1e-10);
        }
    }
}

#[test]
fn cubic_family_agrees_with_dense_argmax() {
    let polys = vec![
        Polynomial1D::new(vec![0.1, -0.3, 0.8, -0.6]),
        Polynomial1D::new(vec![-0.2, 0.9, 0.1, -0.9]),
        Polynomial1D::new(vec![0.05, 0.2, -0.7, 0.4]),
        Polynomial1D::new(vec![0.0, -0.8, 0.6, 0.9]),
    ];
    let p = upper_envelope(&polys, -1.0, 1.0).unwrap();
    assert_eq!(sampled_disagreements(&polys, &p, 10_000, 1e-6), 0);
}

#[test]
fn envelope_examples() {
    let x = Polynomial1D::new(vec![0.0, 1.0]);
    let minus_x = Polynomial1D::new(vec![0.0, -1.0]);
    let p = upper_envelope(&[x.clone(), minus_x], -1.0, 1.0).unwrap();
    assert_eq!(p.breakpoints.len(), 1);
    assert!(p.breakpoints[0].abs() < 1e-12);
    assert_eq!(p.active, vec![1, 0]);

    let parallel: Vec<Polynomial1D> = [0.1, 0.7, -0.2]
        .iter()
        .map(|&b| Polynomial1D::new(vec![b, 2.0]))
        .collect();
    let p = upper_envelope(&parallel, -1.0, 1.0).unwrap();
    assert_eq!(p.switch_count(), 0);
    assert_eq!(p.active, vec![1]);

    assert!(upper_envelope(&[x.clone(), x], 0.0, 1.0).is_err());
}

#[test]
fn ds_examples() {
    assert!(!ds_check(&DsWord::from_str_letters("abab"), 2));
    assert!(ds_check(&DsWord::from_str_letters("aba"), 2));
    for s in 1..5 {
        assert!(ds_check(&DsWord::from_str_letters("abc"), s));
    }
}

#[test]
fn root_examples() {
    let r = real_roots(&Polynomial1D::new(vec![-1.0, 0.0, 1.0]), -2.0, 2.0).unwrap();
    assert_eq!(r.xs().len(), 2);
    assert!((r.xs()[0] + 1.0).abs() < 1e-12 && (r.xs()[1] - 1.0).abs() < 1e-12);
    assert!(
        real_roots(&Polynomial1D::new(vec![1.0, 0.0, 1.0]), -5.0, 5.0)
            .unwrap()
            .roots
            .is_empty()
    );
    let expected: Vec<f64> = (1..=6).map(|k| k as f64 / 7.0).collect();
    let wilkinson = Polynomial1D::from_roots(&expected);
    let got = real_roots(&wilkinson, 0.0, 1.0).unwrap().xs();
    assert_eq!(got.len(), 6);
    for (g, e) in got.iter().zip(&expected) {
        assert!((g - e).abs() < 1e-10);
    }
    // A double root is reported once and does not cross.
    let double = Polynomial1D::from_roots(&[0.5, 0.5]);
    let r = real_roots(&double, 0.0, 1.0).unwrap();
    assert_eq!(r.roots.len(), 1);
    assert!(!r.roots[0].crossing);
}

#[test]
fn search_respects_the_low_degree_caps() {
    for q in 2..6 {
        let lines = search_superlinear(1, q, 300, 4).unwrap();
        assert!(lines.best_switches < q);
        assert!(!lines.exceeds_linear_bound);
        let quads = search_superlinear(2, q, 300, 4).unwrap();
        assert!(quads.best_switches <= 2 * (q - 1));
        let p = upper_envelope(&quads.best_family, 0.0, 1.0).unwrap();
        assert_eq!(p.switch_count(), quads.best_switches);
    }
}

#[test]
fn cubic_search_witness_is_consistent() {
    let out = search_superlinear(3, 4, 2000, 0).unwrap();
    let p = upper_envelope(&out.best_family, 0.0, 1.0).unwrap();
    assert_eq!(p.switch_count(), out.best_switches);
    assert_eq!(out.exceeds_linear_bound, out.best_switches > 9);
    assert_eq!(sampled_disagreements(&out.best_family, &p, 10_000, 1e-6), 0);
}
