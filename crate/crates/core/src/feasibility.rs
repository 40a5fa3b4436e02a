//! Existence of joint distributions for ±1 variables: pairs, chains and
//! cycles with prescribed means and adjacent product expectations.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::model::{in_unit_range, CouplingPMF};
use crate::rational::{frac, to_fraction_string, Rational};
use crate::smax::{s0, s1};

/// Largest chain accepted by [`chain_joint`] (the pmf is stored densely).
pub const MAX_CHAIN_VARS: usize = 24;

fn check_mean(mean: &Rational, what: &str) -> Result<()> {
    if in_unit_range(mean) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{what} = {} outside [-1, 1]",
            to_fraction_string(mean)
        )))
    }
}

/// Admissible range of `⟨AB⟩` given `⟨A⟩` and `⟨B⟩`:
/// `[|⟨A⟩+⟨B⟩| - 1, 1 - |⟨A⟩-⟨B⟩|]`.
pub fn pair_bounds(mean_a: &Rational, mean_b: &Rational) -> Result<(Rational, Rational)> {
    check_mean(mean_a, "mean_a")?;
    check_mean(mean_b, "mean_b")?;
    Ok(pair_bounds_unchecked(mean_a, mean_b))
}

pub(crate) fn pair_bounds_unchecked(a: &Rational, b: &Rational) -> (Rational, Rational) {
    (
        (a + b).abs() - Rational::one(),
        Rational::one() - (a - b).abs(),
    )
}

fn pair_ok(a: &Rational, b: &Rational, corr: &Rational) -> bool {
    if !in_unit_range(a) || !in_unit_range(b) {
        return false;
    }
    let (lo, hi) = pair_bounds_unchecked(a, b);
    lo <= *corr && *corr <= hi
}

/// Probabilities of `(a, b)` ordered `(+,+), (-,+), (+,-), (-,-)`, i.e. by
/// atom mask with `A` at bit 0.
fn pair_probs(mean_a: &Rational, mean_b: &Rational, corr: &Rational) -> [Rational; 4] {
    let quarter = frac(1, 4);
    let mut out: [Rational; 4] = Default::default();
    for (atom, slot) in out.iter_mut().enumerate() {
        let sa = if atom & 1 == 0 {
            mean_a.clone()
        } else {
            -mean_a
        };
        let sb = if atom & 2 == 0 {
            mean_b.clone()
        } else {
            -mean_b
        };
        let sab = if (atom & 1) ^ ((atom >> 1) & 1) == 0 {
            corr.clone()
        } else {
            -corr
        };
        *slot = (Rational::one() + sa + sb + sab) * &quarter;
    }
    out
}

/// The unique pmf of two ±1 variables with the given moments,
/// `p(a, b) = (1 + a⟨A⟩ + b⟨B⟩ + ab⟨AB⟩) / 4`.
pub fn pair_pmf(mean_a: &Rational, mean_b: &Rational, corr: &Rational) -> Result<CouplingPMF> {
    let (lo, hi) = pair_bounds(mean_a, mean_b)?;
    if *corr < lo || *corr > hi {
        return Err(Error::Infeasible {
            index: None,
            reason: format!(
                "correlation {} outside [{}, {}]",
                to_fraction_string(corr),
                to_fraction_string(&lo),
                to_fraction_string(&hi)
            ),
        });
    }
    let probs = pair_probs(mean_a, mean_b, corr);
    CouplingPMF::new(2, probs.into_iter().enumerate().map(|(a, p)| (a as u64, p)))
}

/// Pair coupling with the largest `⟨AB⟩`, hence the smallest `Pr[A != B]`.
pub fn maximal_pair_coupling(mean_a: &Rational, mean_b: &Rational) -> Result<CouplingPMF> {
    let (_, hi) = pair_bounds(mean_a, mean_b)?;
    pair_pmf(mean_a, mean_b, &hi)
}

/// Markov-chain joint of `A_1, ..., A_n` reproducing every mean and every
/// adjacent product expectation `⟨A_i A_{i+1}⟩`.
///
/// Pairs are glued left to right through the conditional law of `A_{i+1}`
/// given `A_i`; a conditioning value of probability zero gets a uniform row.
pub fn chain_joint(means: &[Rational], corrs: &[Rational]) -> Result<CouplingPMF> {
    let n = means.len();
    if n < 2 || corrs.len() != n - 1 {
        return Err(Error::domain(format!(
            "a chain of {n} variables needs n >= 2 and n-1 correlations, got {}",
            corrs.len()
        )));
    }
    if n > MAX_CHAIN_VARS {
        return Err(Error::domain(format!(
            "chain of {n} variables exceeds {MAX_CHAIN_VARS}"
        )));
    }
    for (i, m) in means.iter().enumerate() {
        check_mean(m, &format!("mean[{i}]"))?;
    }
    for i in 0..n - 1 {
        if !pair_ok(&means[i], &means[i + 1], &corrs[i]) {
            return Err(Error::Infeasible {
                index: Some(i),
                reason: format!(
                    "edge {i}: correlation {} violates the pair bounds",
                    to_fraction_string(&corrs[i])
                ),
            });
        }
    }

    let half = frac(1, 2);
    let first = pair_probs(&means[0], &means[1], &corrs[0]);
    let mut joint: Vec<Rational> = first.to_vec();
    for i in 1..n - 1 {
        let pair = pair_probs(&means[i], &means[i + 1], &corrs[i]);
        // P(A_i = s) from its mean
        let marginal = |bit: usize| {
            let m = if bit == 0 {
                means[i].clone()
            } else {
                -&means[i]
            };
            (Rational::one() + m) * &half
        };
        let kernel: Vec<[Rational; 2]> = (0..2)
            .map(|s| {
                let ps = marginal(s);
                if ps.is_zero() {
                    [half.clone(), half.clone()]
                } else {
                    [&pair[s] / &ps, &pair[s | 2] / &ps]
                }
            })
            .collect();
        let mut next = vec![Rational::zero(); joint.len() * 2];
        for (atom, p) in joint.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let s = (atom >> i) & 1;
            next[atom] = p * &kernel[s][0];
            next[atom | (1 << (i + 1))] = p * &kernel[s][1];
        }
        joint = next;
    }
    CouplingPMF::new(n, joint.into_iter().enumerate().map(|(a, p)| (a as u64, p)))
}

/// Whether ±1 variables `A_1..A_n` can have the given means and cyclic
/// adjacent products `⟨A_1A_2⟩, ..., ⟨A_nA_1⟩`: every edge must meet the pair
/// bounds and `s1(corrs) <= n - 2`.
///
/// For `n = 2` the two edges join the same pair and the test reduces to
/// `corrs[0] == corrs[1]` within bounds.
pub fn cycle_feasible(means: &[Rational], corrs: &[Rational]) -> bool {
    let n = means.len();
    if n < 2 || corrs.len() != n {
        return false;
    }
    let edges_ok = (0..n).all(|i| pair_ok(&means[i], &means[(i + 1) % n], &corrs[i]));
    edges_ok && s1(corrs) <= Rational::from_integer((n as i64 - 2).into())
}

/// Range of the closing product `⟨A_nA_1⟩` that completes a feasible chain to
/// a feasible cycle, ignoring the pair bounds of `(A_n, A_1)`:
/// `[s0(corrs) - (n-2), (n-2) - s1(corrs)]`.
pub fn closing_range(means: &[Rational], corrs: &[Rational]) -> Result<(Rational, Rational)> {
    let n = means.len();
    if n < 3 || corrs.len() != n - 1 {
        return Err(Error::domain(format!(
            "closing range needs n >= 3 means and n-1 correlations, got {n} and {}",
            corrs.len()
        )));
    }
    for (i, m) in means.iter().enumerate() {
        check_mean(m, &format!("mean[{i}]"))?;
    }
    for i in 0..n - 1 {
        if !pair_ok(&means[i], &means[i + 1], &corrs[i]) {
            return Err(Error::Infeasible {
                index: Some(i),
                reason: format!("edge {i} violates the pair bounds"),
            });
        }
    }
    let slack = Rational::from_integer((n as i64 - 2).into());
    let lo = s0(corrs) - &slack;
    let hi = slack - s1(corrs);
    if lo > hi {
        return Err(Error::Internal(
            "empty closing range for a feasible chain".into(),
        ));
    }
    let (blo, bhi) = pair_bounds_unchecked(&means[n - 1], &means[0]);
    if intersect((&lo, &hi), (&blo, &bhi)).is_none() {
        return Err(Error::Internal(
            "closing range misses the pair bounds of the closing edge".into(),
        ));
    }
    Ok((lo, hi))
}

/// Intersection of two closed intervals.
pub fn intersect(
    a: (&Rational, &Rational),
    b: (&Rational, &Rational),
) -> Option<(Rational, Rational)> {
    let lo = a.0.max(b.0).clone();
    let hi = a.1.min(b.1).clone();
    (lo <= hi).then_some((lo, hi))
}
