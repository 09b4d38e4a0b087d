//! Fuks cells of configuration spaces of points as graded ordered trees,
//! and the equivariant boundary coefficient between the minimal cell orbit
//! and the cells one dimension up.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::residuals::ZeroSumVector;

/// Default largest `q` for which `q!` labeled cells are enumerated.
pub const DEFAULT_CHAIN_CAP: usize = 8;
/// Default limit on the number of enumerated trees.
pub const DEFAULT_CELL_CAP: usize = 1_000_000;

/// `q` pairwise distinct points of `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointConfiguration {
    points: Vec<Vec<f64>>,
}

impl PointConfiguration {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let d = points.first().map_or(0, Vec::len);
        if d == 0 {
            return Err(Error::InvalidInput(
                "need at least one point of dimension >= 1".into(),
            ));
        }
        if points
            .iter()
            .any(|p| p.len() != d || p.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::InvalidInput(
                "points must be finite and of equal dimension".into(),
            ));
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(Error::InvalidInput(format!("points {i} and {j} coincide")));
                }
            }
        }
        Ok(PointConfiguration { points })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

/// For each coordinate `j = 2..=d`, the centered vector of `x_j` over the
/// points. All blocks vanish exactly when the points lie on one line
/// parallel to the first axis.
pub fn reference_test_map(pts: &PointConfiguration) -> Vec<ZeroSumVector> {
    (1..pts.dim())
        .map(|j| {
            let xs: Vec<f64> = pts.points().iter().map(|p| p[j]).collect();
            ZeroSumVector::centered(&xs)
        })
        .collect()
}

/// Permutation of `0..q` in one-line notation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(q: usize) -> Self {
        Permutation((0..q).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `+1` for even, `-1` for odd permutations, from the cycle count.
    pub fn sign(&self) -> i64 {
        let q = self.0.len();
        let mut seen = vec![false; q];
        let mut cycles = 0;
        for s in 0..q {
            if !seen[s] {
                cycles += 1;
                let mut i = s;
                while !seen[i] {
                    seen[i] = true;
                    i = self.0[i];
                }
            }
        }
        if (q - cycles) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p] = i;
        }
        Permutation(inv)
    }

    /// Lexicographic rank among all permutations of the same length.
    pub fn rank(&self) -> usize {
        let q = self.0.len();
        let mut rank = 0;
        for i in 0..q {
            let smaller = self.0[i + 1..].iter().filter(|&&x| x < self.0[i]).count();
            rank = rank * (q - i) + smaller;
        }
        rank
    }

    pub fn unrank(q: usize, mut rank: usize) -> Permutation {
        let mut digits = vec![0; q];
        for i in (0..q).rev() {
            let base = q - i;
            digits[i] = rank % base;
            rank /= base;
        }
        let mut pool: Vec<usize> = (0..q).collect();
        Permutation(digits.into_iter().map(|d| pool.remove(d)).collect())
    }

    /// One-based values, for display and serialization.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|v| v + 1).collect()
    }
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// The `(k, q - k)` shuffles: `s(0) < .. < s(k - 1)` and `s(k) < .. < s(q - 1)`,
/// one per `k`-subset of positions for the first block.
pub fn shuffles(k: usize, q: usize) -> Result<Vec<Permutation>> {
    if k == 0 || k >= q {
        return Err(Error::InvalidInput(format!(
            "need 1 <= k <= q - 1, got k = {k}, q = {q}"
        )));
    }
    let mut out = Vec::new();
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let rest = (0..q).filter(|p| !subset.contains(p));
        out.push(Permutation(subset.iter().copied().chain(rest).collect()));
        // Next k-subset in lexicographic order.
        let Some(i) = (0..k).rev().find(|&i| subset[i] < q - k + i) else {
            break;
        };
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
    Ok(out)
}

/// Graded ordered tree of height `d`: the root sits on level `d + 1`, the
/// `q` leaves on level 1. `children[i][v]` is the number of children of the
/// `v`-th vertex (left to right) on level `d + 1 - i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FuksTree {
    pub children: Vec<Vec<usize>>,
}

impl FuksTree {
    pub fn new(children: Vec<Vec<usize>>) -> Result<Self> {
        if children.is_empty() || children[0].len() != 1 {
            return Err(Error::InvalidInput(
                "the top level must hold only the root".into(),
            ));
        }
        for i in 1..children.len() {
            let below: usize = children[i - 1].iter().sum();
            if children[i].len() != below {
                return Err(Error::InvalidInput(format!(
                    "level {} lists {} vertices, expected {below}",
                    children.len() - i + 1,
                    children[i].len()
                )));
            }
        }
        if children.iter().flatten().any(|&c| c == 0) {
            return Err(Error::InvalidInput(
                "every internal vertex needs a child".into(),
            ));
        }
        Ok(FuksTree { children })
    }

    /// The chain from the root to a single level-2 vertex carrying all leaves.
    pub fn minimal(d: usize, q: usize) -> Self {
        let mut children = vec![vec![1]; d - 1];
        children.push(vec![q]);
        FuksTree { children }
    }

    /// `Y_k`: the chain down to level 3, a binary branching there, and `k`
    /// and `q - k` leaves below the two level-2 vertices.
    pub fn y_tree(d: usize, q: usize, k: usize) -> Result<Self> {
        if d < 2 || k == 0 || k >= q {
            return Err(Error::InvalidInput(
                "Y_k needs d >= 2 and 1 <= k <= q - 1".into(),
            ));
        }
        let mut children = vec![vec![1]; d - 2];
        children.push(vec![2]);
        children.push(vec![k, q - k]);
        Ok(FuksTree { children })
    }

    pub fn height(&self) -> usize {
        self.children.len()
    }

    pub fn leaves(&self) -> usize {
        self.children.last().map_or(0, |l| l.iter().sum())
    }

    pub fn vertex_count(&self) -> usize {
        1 + self.children.iter().flatten().sum::<usize>()
    }

    pub fn dimension(&self) -> usize {
        self.vertex_count() - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuksCell {
    pub tree: FuksTree,
    pub dimension: usize,
}

/// All unlabeled cells of the configuration space of `q` points in `R^d`
/// with dimension at most `max_dim`, sorted by dimension then tree.
pub fn enumerate_cells(d: usize, q: usize, max_dim: usize, cap: usize) -> Result<Vec<FuksCell>> {
    if d == 0 || q == 0 {
        return Err(Error::InvalidInput("need d >= 1 and q >= 1".into()));
    }
    struct Walk {
        d: usize,
        q: usize,
        max_dim: usize,
        cap: usize,
        out: Vec<FuksCell>,
    }
    impl Walk {
        // `levels` holds the child counts chosen so far; `parents` is the
        // vertex count on the lowest level reached and `dim` the number of
        // non-root vertices placed.
        fn grow(&mut self, levels: &mut Vec<Vec<usize>>, parents: usize, dim: usize) -> Result<()> {
            let left = self.d - levels.len();
            if left == 0 {
                if self.out.len() >= self.cap {
                    return Err(Error::ResourceLimit(format!(
                        "more than {} cells",
                        self.cap
                    )));
                }
                self.out.push(FuksCell {
                    tree: FuksTree {
                        children: levels.clone(),
                    },
                    dimension: dim,
                });
                return Ok(());
            }
            // Vertex counts never shrink going down, so every remaining level
            // holds at least `n` vertices.
            let lo = if left == 1 { self.q } else { parents };
            for n in lo..=self.q {
                if dim + n * left > self.max_dim {
                    break;
                }
                for comp in compositions(n, parents) {
                    levels.push(comp);
                    self.grow(levels, n, dim + n)?;
                    levels.pop();
                }
            }
            Ok(())
        }
    }
    let mut walk = Walk {
        d,
        q,
        max_dim,
        cap,
        out: Vec::new(),
    };
    walk.grow(&mut Vec::with_capacity(d), 1, 0)?;
    let mut out = walk.out;
    out.sort_by(|a, b| {
        a.dimension
            .cmp(&b.dimension)
            .then_with(|| a.tree.cmp(&b.tree))
    });
    Ok(out)
}

/// Ordered ways of writing `n` as a sum of `parts` positive integers.
fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    if n < parts {
        return vec![];
    }
    let mut out = Vec::new();
    for first in 1..=n - (parts - 1) {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Integer combination of labeled minimal cells `rho Z`, keyed by `rho`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedChain {
    pub terms: BTreeMap<Permutation, i64>,
}

impl SignedChain {
    pub fn add(&mut self, cell: Permutation, coeff: i64) {
        let entry = self.terms.entry(cell.clone()).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.terms.remove(&cell);
        }
    }

    pub fn coefficient(&self, cell: &Permutation) -> i64 {
        self.terms.get(cell).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Boundary of `Y_k` on the face where its two level-2 vertices collide.
/// The merged vertex takes the children of both in every order that keeps
/// each group's internal order; a face is the cell `rho Z` where leaf `i`
/// ends up at position `rho(i)`, oriented by the sign of `rho`.
#[allow(non_snake_case)]
pub fn boundary_Yk(q: usize, k: usize) -> Result<SignedChain> {
    if k == 0 || k >= q {
        return Err(Error::InvalidInput(format!(
            "need 1 <= k <= q - 1, got k = {k}, q = {q}"
        )));
    }
    let left: Vec<usize> = (0..k).collect();
    let right: Vec<usize> = (k..q).collect();
    let mut chain = SignedChain::default();
    let mut merged = Vec::with_capacity(q);
    fn interleave(
        left: &[usize],
        right: &[usize],
        merged: &mut Vec<usize>,
        chain: &mut SignedChain,
    ) {
        if left.is_empty() && right.is_empty() {
            let mut position = vec![0; merged.len()];
            for (pos, &leaf) in merged.iter().enumerate() {
                position[leaf] = pos;
            }
            let rho = Permutation(position);
            let sign = rho.sign();
            chain.add(rho, sign);
            return;
        }
        if let Some((&first, rest)) = left.split_first() {
            merged.push(first);
            interleave(rest, right, merged, chain);
            merged.pop();
        }
        if let Some((&first, rest)) = right.split_first() {
            merged.push(first);
            interleave(left, rest, merged, chain);
            merged.pop();
        }
    }
    interleave(&left, &right, &mut merged, &mut chain);
    Ok(chain)
}

/// Coefficient `c` with `∂ Σ_τ sign(τ) τ Y_k = c Σ_ρ sign(ρ) ρ Z`, found by
/// expanding the left side over all of `Σ_q`.
pub fn equivariant_coefficient(q: usize, k: usize) -> Result<i64> {
    equivariant_coefficient_capped(q, k, DEFAULT_CHAIN_CAP)
}

pub fn equivariant_coefficient_capped(q: usize, k: usize, cap: usize) -> Result<i64> {
    if q > cap {
        return Err(Error::ResourceLimit(format!(
            "q = {q} exceeds the enumeration cap {cap} ({}! cells)",
            q
        )));
    }
    if q > DEFAULT_CHAIN_CAP {
        log::warn!("expanding over {q}! permutations");
    }
    let boundary: Vec<(Permutation, i64)> = boundary_Yk(q, k)?.terms.into_iter().collect();
    let n = factorial(q);
    let coeffs = (0..n)
        .into_par_iter()
        .fold(
            || vec![0i64; n],
            |mut acc, t| {
                let tau = Permutation::unrank(q, t);
                let s = tau.sign();
                for (sigma, c) in &boundary {
                    acc[tau.compose(sigma).rank()] += s * c;
                }
                acc
            },
        )
        .reduce(
            || vec![0i64; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let c = coeffs[0];
    for (r, &v) in coeffs.iter().enumerate() {
        let rho = Permutation::unrank(q, r);
        if v != c * rho.sign() {
            return Err(Error::InconsistentChain(format!(
                "coefficient {v} at {:?} is not {c} times its sign",
                rho.one_based()
            )));
        }
    }
    Ok(c)
}

/// `sign(τ) sign(σ) = sign(τ σ)` over all pairs in `Σ_q`.
pub fn check_sign_multiplicativity(q: usize) -> bool {
    let perms: Vec<Permutation> = (0..factorial(q))
        .map(|r| Permutation::unrank(q, r))
        .collect();
    perms.par_iter().all(|t| {
        perms
            .iter()
            .all(|s| t.sign() * s.sign() == t.compose(s).sign())
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimePower {
    pub prime: u64,
    pub exponent: u32,
}

pub fn prime_power(q: u64) -> Option<PrimePower> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|p| q % p == 0)?;
    let mut r = q;
    let mut exponent = 0;
    while r % p == 0 {
        r /= p;
        exponent += 1;
    }
    (r == 1).then_some(PrimePower { prime: p, exponent })
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisibilityRow {
    pub k: usize,
    pub binomial: u128,
    /// From the chain expansion; `None` above the enumeration cap.
    pub chain_coefficient: Option<i64>,
    pub divisible_by_p: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivisibilityReport {
    pub q: usize,
    pub prime_power: Option<PrimePower>,
    pub rows: Vec<DivisibilityRow>,
    /// gcd of `binom(q, k)` over `1 <= k <= q - 1`.
    pub gcd: u128,
    /// Chain coefficients equal the binomials and, for prime powers, all
    /// are divisible by the prime.
    pub passes: bool,
    pub note: String,
}

/// Coefficients `binom(q, k)` for all `k`, their chain-level derivation for
/// `q <= chain_cap`, and divisibility by the prime when `q` is a prime power.
pub fn check_lemma_divisibility(q: usize, chain_cap: usize) -> Result<DivisibilityReport> {
    if q < 2 {
        return Err(Error::InvalidInput(format!(
            "q must be at least 2, got {q}"
        )));
    }
    let pp = prime_power(q as u64);
    let mut rows = Vec::with_capacity(q - 1);
    let mut g = 0u128;
    let mut passes = true;
    for k in 1..q {
        let b = binomial(q as u64, k as u64);
        g = gcd(g, b);
        let chain = if q <= chain_cap {
            Some(equivariant_coefficient_capped(q, k, chain_cap)?)
        } else {
            None
        };
        if let Some(c) = chain {
            passes &= c as u128 == b;
        }
        let divisible = pp.map(|p| b % p.prime as u128 == 0);
        passes &= divisible.unwrap_or(true);
        rows.push(DivisibilityRow {
            k,
            binomial: b,
            chain_coefficient: chain,
            divisible_by_p: divisible,
        });
    }
    let note = match pp {
        Some(p) => format!("prime power {}^{}", p.prime, p.exponent),
        None => format!("not a prime power, gcd {g}"),
    };
    Ok(DivisibilityReport {
        q,
        prime_power: pp,
        rows,
        gcd: g,
        passes,
        note,
    })
}
