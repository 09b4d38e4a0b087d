//! Upper envelopes of polynomial families, their switch points and the
//! Davenport–Schinzel words they spell.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::poly::{real_roots, Polynomial1D, RealRoot, RootSet};

/// Breakpoints and the active member on every maximal interval between them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeProfile {
    pub interval: (f64, f64),
    pub breakpoints: Vec<f64>,
    pub active: Vec<usize>,
}

impl EnvelopeProfile {
    pub fn switch_count(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn word(&self) -> DsWord {
        DsWord(self.active.clone())
    }

    /// Maximal intervals `(lo, hi, active member)`.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        let (lo, hi) = self.interval;
        self.active.iter().enumerate().map(move |(i, &m)| {
            let a = if i == 0 { lo } else { self.breakpoints[i - 1] };
            let b = self.breakpoints.get(i).copied().unwrap_or(hi);
            (a, b, m)
        })
    }

    /// Active member at `x`; at a breakpoint the lower index wins.
    pub fn active_at(&self, x: f64) -> usize {
        let idx = self.breakpoints.partition_point(|&b| b < x);
        match self.breakpoints.get(idx) {
            Some(&b) if b == x => self.active[idx].min(self.active[idx + 1]),
            _ => self.active[idx],
        }
    }
}

pub fn switch_count(profile: &EnvelopeProfile) -> usize {
    profile.switch_count()
}

/// Index of the largest value; ties go to the lower index.
pub(crate) fn argmax_at(polys: &[Polynomial1D], x: f64) -> usize {
    let mut best = 0;
    let mut best_val = polys[0].eval(x);
    for (i, p) in polys.iter().enumerate().skip(1) {
        let v = p.eval(x);
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    best
}

/// Upper envelope of `polys` on `[lo, hi]`.
///
/// Candidate breakpoints are the sign-changing roots of all pairwise
/// differences; the maximizer is evaluated between consecutive candidates
/// and runs of the same maximizer are merged.
pub fn upper_envelope(polys: &[Polynomial1D], lo: f64, hi: f64) -> Result<EnvelopeProfile> {
    if polys.is_empty() {
        return Err(Error::InvalidInput("empty polynomial family".into()));
    }
    if !(lo < hi) {
        return Err(Error::InvalidInput(format!("empty interval [{lo}, {hi}]")));
    }
    let mut candidates = Vec::new();
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            let diff = polys[i].sub(&polys[j]);
            if diff.is_zero() {
                return Err(Error::DegenerateFamily {
                    first: i,
                    second: j,
                });
            }
            let roots = real_roots(&diff, lo, hi)?;
            candidates.extend(
                roots
                    .roots
                    .iter()
                    .filter(|r| r.crossing && r.x > lo && r.x < hi)
                    .map(|r| r.x),
            );
        }
    }
    candidates.sort_by(f64::total_cmp);
    let merge = 1e-13 * (hi - lo);
    candidates.dedup_by(|b, a| *b - *a <= merge);

    let mut breakpoints = Vec::new();
    let mut active = Vec::new();
    let mut left = lo;
    for k in 0..=candidates.len() {
        let right = candidates.get(k).copied().unwrap_or(hi);
        let m = argmax_at(polys, 0.5 * (left + right));
        match active.last() {
            Some(&prev) if prev == m => {}
            Some(_) => {
                breakpoints.push(left);
                active.push(m);
            }
            None => active.push(m),
        }
        left = right;
    }
    Ok(EnvelopeProfile {
        interval: (lo, hi),
        breakpoints,
        active,
    })
}

/// The sequence of active members of an envelope.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DsWord(pub Vec<usize>);

impl DsWord {
    pub fn from_str_letters(s: &str) -> Self {
        DsWord(s.bytes().map(|b| b as usize).collect())
    }

    pub fn has_immediate_repeat(&self) -> bool {
        self.0.windows(2).any(|w| w[0] == w[1])
    }

    /// Length of the longest alternating subsequence `a b a b ...` over all
    /// ordered pairs of distinct symbols.
    pub fn max_alternation(&self) -> usize {
        let mut symbols: Vec<usize> = self.0.clone();
        symbols.sort_unstable();
        symbols.dedup();
        let k = symbols.len();
        let index = |s: usize| symbols.binary_search(&s).unwrap();
        // alt[a][b]: greedy alternation length starting with a, over {a, b}.
        let mut alt = vec![vec![0usize; k]; k];
        for &s in &self.0 {
            let x = index(s);
            for y in 0..k {
                if y == x {
                    continue;
                }
                if alt[x][y] % 2 == 0 {
                    alt[x][y] += 1;
                }
                if alt[y][x] % 2 == 1 {
                    alt[y][x] += 1;
                }
            }
        }
        alt.iter().flatten().copied().max().unwrap_or(0)
    }
}

/// True iff the word has no alternating subsequence of length `s + 2`.
pub fn ds_check(word: &DsWord, s: usize) -> bool {
    word.max_alternation() < s + 2
}

/// Counts sample points where the profile's active member is not the
/// dense-evaluation argmax, skipping points within `guard` of a breakpoint.
pub fn sampled_disagreements(
    polys: &[Polynomial1D],
    profile: &EnvelopeProfile,
    samples: usize,
    guard: f64,
) -> usize {
    let (lo, hi) = profile.interval;
    (0..samples)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / samples as f64)
        .filter(|&x| profile.breakpoints.iter().all(|&b| (x - b).abs() > guard))
        .filter(|&x| argmax_at(polys, x) != profile.active_at(x))
        .count()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub degree: usize,
    pub members: usize,
    pub trials: usize,
    pub interval: (f64, f64),
    pub best_family: Vec<Polynomial1D>,
    pub best_switches: usize,
    /// `degree * (members - 1)`, the conjectured linear bound.
    pub linear_bound: usize,
    pub exceeds_linear_bound: bool,
}

/// Randomized hill-climbing search for families of `q` polynomials of degree
/// `<= n` on `[0, 1]` whose envelope switches as often as possible.
///
/// Families are parameterized by their values at `n + 1` Chebyshev nodes.
/// Even trials draw a fresh family; odd trials perturb one member of the
/// incumbent and keep the result if it does not lose switches.
pub fn search_superlinear(n: usize, q: usize, trials: usize, seed: u64) -> Result<SearchOutcome> {
    if n == 0 || q == 0 {
        return Err(Error::InvalidInput("search needs n >= 1 and q >= 1".into()));
    }
    let (lo, hi) = (0.0, 1.0);
    let nodes: Vec<f64> = (0..=n)
        .map(|k| {
            let t = ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * (n + 1)) as f64).cos();
            0.5 * (lo + hi) + 0.5 * (hi - lo) * t
        })
        .collect();
    let to_polys = |vals: &[Vec<f64>]| -> Vec<Polynomial1D> {
        vals.iter()
            .map(|v| Polynomial1D::interpolate(&nodes, v))
            .collect()
    };
    let switches = |vals: &[Vec<f64>]| -> usize {
        upper_envelope(&to_polys(vals), lo, hi)
            .map(|p| p.switch_count())
            .unwrap_or(0)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fresh = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
        (0..q)
            .map(|_| (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    };
    let mut incumbent = fresh(&mut rng);
    let mut incumbent_switches = switches(&incumbent);
    let mut best = incumbent.clone();
    let mut best_switches = incumbent_switches;

    for t in 1..trials {
        let candidate = if t % 2 == 0 {
            fresh(&mut rng)
        } else {
            let mut c = incumbent.clone();
            let member = rng.random_range(0..q);
            let sigma = [0.3, 0.1, 0.03][rng.random_range(0..3)];
            for v in &mut c[member] {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += sigma * z;
            }
            c
        };
        let s = switches(&candidate);
        if t % 2 == 0 {
            if s > incumbent_switches {
                incumbent = candidate.clone();
                incumbent_switches = s;
            }
        } else if s >= incumbent_switches {
            incumbent = candidate.clone();
            incumbent_switches = s;
        }
        if s > best_switches {
            best = candidate;
            best_switches = s;
        }
    }

    let linear_bound = n * q.saturating_sub(1);
    Ok(SearchOutcome {
        degree: n,
        members: q,
        trials,
        interval: (lo, hi),
        best_family: to_polys(&best),
        best_switches,
        linear_bound,
        exceeds_linear_bound: best_switches > linear_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(b: f64, a: f64) -> Polynomial1D {
        Polynomial1D::new(vec![b, a])
    }

    #[test]
    fn crossing_lines() {
        let profile = upper_envelope(&[line(0.0, 1.0), line(0.0, -1.0)], -1.0, 1.0).unwrap();
        assert_eq!(profile.breakpoints, vec![0.0]);
        assert_eq!(profile.active, vec![1, 0]);
        assert_eq!(switch_count(&profile), 1);
    }

    #[test]
    fn parallel_lines() {
        let polys = [line(0.1, 2.0), line(0.7, 2.0), line(-0.3, 2.0)];
        let profile = upper_envelope(&polys, 0.0, 1.0).unwrap();
        assert!(profile.breakpoints.is_empty());
        assert_eq!(profile.active, vec![1]);
    }

    #[test]
    fn identical_members_are_degenerate() {
        let err = upper_envelope(&[line(1.0, 1.0), line(1.0, 1.0)], 0.0, 1.0).unwrap_err();
        assert_eq!(
            err,
            Error::DegenerateFamily {
                first: 0,
                second: 1
            }
        );
    }

    #[test]
    fn tangency_is_not_a_switch() {
        // x^2 touches 0 at the origin without crossing it.
        let polys = [Polynomial1D::new(vec![0.0, 0.0, 1.0]), Polynomial1D::zero()];
        let profile = upper_envelope(&polys, -1.0, 1.0).unwrap();
        assert_eq!(profile.active, vec![0]);
    }

    #[test]
    fn ds_examples() {
        assert!(!ds_check(&DsWord::from_str_letters("abab"), 2));
        assert!(ds_check(&DsWord::from_str_letters("aba"), 2));
        for s in 1..5 {
            assert!(ds_check(&DsWord::from_str_letters("abc"), s));
        }
        assert_eq!(DsWord::from_str_letters("abcacbab").max_alternation(), 6);
    }

    #[test]
    fn search_respects_line_bound() {
        let out = search_superlinear(1, 5, 400, 3).unwrap();
        assert!(out.best_switches <= 4);
        assert!(!out.exceeds_linear_bound);
    }
}
