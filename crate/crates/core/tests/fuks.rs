use std::collections::BTreeMap;

use equipart::fuks::{
    binomial, boundary_Yk, check_sign_multiplicativity, enumerate_cells, equivariant_coefficient,
    reference_test_map, shuffles, Permutation, PointConfiguration, DEFAULT_CELL_CAP,
};
use proptest::prelude::*;

fn choose(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let mut r = 1u64;
    for i in 0..k {
        r = r * (n - i) as u64 / (i + 1) as u64;
    }
    r
}

/// Cells by dimension from level sizes alone: a chain of vertex counts
/// `1 = n_{d+1} <= n_d <= ... <= n_1 = q` admits `binom(n_j - 1, n_{j+1} - 1)`
/// ways to hang level `j` below level `j + 1`, and the dimension is
/// `n_1 + ... + n_d`.
fn count_oracle(d: usize, q: usize) -> BTreeMap<usize, u64> {
    fn go(
        level: usize,
        above: usize,
        dim: usize,
        ways: u64,
        q: usize,
        out: &mut BTreeMap<usize, u64>,
    ) {
        if level == 0 {
            return;
        }
        let range = if level == 1 { q..=q } else { above..=q };
        for n in range {
            let w = ways * choose(n - 1, above - 1);
            if level == 1 {
                *out.entry(dim + n).or_insert(0) += w;
            } else {
                go(level - 1, n, dim + n, w, q, out);
            }
        }
    }
    let mut out = BTreeMap::new();
    go(d, 1, 0, 1, q, &mut out);
    out
}

#[test]
fn cell_counts_match_the_level_size_oracle() {
    for d in 1..=4 {
        for q in 1..=6 {
            let oracle = count_oracle(d, q);
            let cells = enumerate_cells(d, q, d * q, DEFAULT_CELL_CAP).unwrap();
            let mut counts = BTreeMap::new();
            for c in &cells {
                assert_eq!(c.dimension, c.tree.vertex_count() - 1);
                assert_eq!(c.tree.leaves(), q);
                assert_eq!(c.tree.height(), d);
                *counts.entry(c.dimension).or_insert(0u64) += 1;
            }
            assert_eq!(counts, oracle, "d = {d}, q = {q}");
        }
    }
}

#[test]
fn one_minimal_cell_below_everything_else() {
    for d in 1..=4 {
        for q in 1..=6 {
            let cells = enumerate_cells(d, q, d + q - 1, DEFAULT_CELL_CAP).unwrap();
            assert_eq!(cells.len(), 1);
            assert_eq!(cells[0].dimension, d + q - 1);
        }
    }
    // One dimension up there are q - 1 cells when d >= 2.
    let next: Vec<_> = enumerate_cells(3, 4, 7, DEFAULT_CELL_CAP)
        .unwrap()
        .into_iter()
        .filter(|c| c.dimension == 7)
        .collect();
    assert_eq!(next.len(), count_oracle(3, 4)[&7] as usize);
    assert_eq!(next.len(), 3);
}

fn inversions(p: &Permutation) -> usize {
    let v = &p.0;
    (0..v.len())
        .map(|i| (i + 1..v.len()).filter(|&j| v[i] > v[j]).count())
        .sum()
}

#[test]
fn boundary_terms_are_the_signed_shuffles() {
    for q in 2..=7 {
        for k in 1..q {
            let b = boundary_Yk(q, k).unwrap();
            let s = shuffles(k, q).unwrap();
            assert_eq!(s.len() as u128, binomial(q as u64, k as u64));
            assert_eq!(b.len(), s.len());
            for sigma in &s {
                let expected = if inversions(sigma) % 2 == 0 { 1 } else { -1 };
                assert_eq!(b.coefficient(sigma), expected);
            }
        }
    }
}

#[test]
fn coefficient_is_the_binomial() {
    for q in 2..=7 {
        for k in 1..q {
            assert_eq!(
                equivariant_coefficient(q, k).unwrap() as u128,
                binomial(q as u64, k as u64)
            );
        }
    }
}

#[test]
fn signs_multiply() {
    for q in 1..=5 {
        assert!(check_sign_multiplicativity(q));
        let n: usize = (1..=q).product();
        for a in 0..n {
            let t = Permutation::unrank(q, a);
            for b in 0..n {
                let s = Permutation::unrank(q, b);
                assert_eq!(
                    (inversions(&t) + inversions(&s)) % 2,
                    inversions(&t.compose(&s)) % 2
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 500,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn test_map_blocks_sum_to_zero(
        pts in prop::collection::vec(prop::collection::vec(-10.0..10.0f64, 3), 2..8),
    ) {
        if let Ok(cfg) = PointConfiguration::new(pts) {
            for block in reference_test_map(&cfg) {
                prop_assert!(block.sum().abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn test_map_vanishes_exactly_on_axis_lines(
        xs in prop::collection::vec(-10.0..10.0f64, 2..8),
        rest in prop::collection::vec(-10.0..10.0f64, 1..4),
        bump in (1e-6..1.0f64, 0usize..8, 0usize..4),
    ) {
        let line: Vec<Vec<f64>> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| std::iter::once(x + i as f64 * 20.0).chain(rest.iter().copied()).collect())
            .collect();
        let cfg = PointConfiguration::new(line.clone()).unwrap();
        prop_assert!(reference_test_map(&cfg).iter().all(|b| b.entries().iter().all(|&v| v == 0.0)));

        let mut off = line;
        let (i, j) = (bump.1 % off.len(), 1 + bump.2 % rest.len());
        off[i][j] += bump.0;
        let cfg = PointConfiguration::new(off).unwrap();
        prop_assert!(reference_test_map(&cfg).iter().any(|b| b.norm_inf() > 0.0));
    }
}
