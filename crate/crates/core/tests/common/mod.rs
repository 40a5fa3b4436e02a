//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls the closed forms under test: signed-sum maxima come
//! from enumerating all sign patterns, and everything downstream of them is
//! rebuilt from those.
#![allow(dead_code)]

use cyclic_cntx::rational::{frac, int};
use cyclic_cntx::sampling;
use cyclic_cntx::{Rational, SystemSpec};
use num_traits::Signed;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Maximum of `Σ m_i x_i` over sign vectors with `∏ m_i = parity`, by
/// enumeration of all `2^k` patterns.
pub fn brute_signed_max(xs: &[Rational], parity: i8) -> Rational {
    let k = xs.len();
    let mut best: Option<Rational> = None;
    for pattern in 0u32..(1 << k) {
        let odd = pattern.count_ones() % 2 == 1;
        if (parity < 0) != odd {
            continue;
        }
        let total: Rational = xs
            .iter()
            .enumerate()
            .map(|(i, x)| if pattern >> i & 1 == 1 { -x } else { x.clone() })
            .sum();
        if best.as_ref().is_none_or(|b| total > *b) {
            best = Some(total);
        }
    }
    best.expect("k >= 1")
}

pub fn brute_s1(xs: &[Rational]) -> Rational {
    brute_signed_max(xs, -1)
}

pub fn brute_s0(xs: &[Rational]) -> Rational {
    brute_signed_max(xs, 1)
}

pub fn gaps(spec: &SystemSpec) -> Vec<Rational> {
    (0..spec.n())
        .map(|i| (spec.v(i) - spec.w(i)).abs())
        .collect()
}

pub fn reference_delta0(spec: &SystemSpec) -> Rational {
    gaps(spec).iter().sum::<Rational>() * frac(1, 2)
}

/// `max{ s1(p) - (n-2), Σ g } / 2` with `s1` by enumeration.
pub fn reference_delta_min(spec: &SystemSpec) -> Rational {
    let n = spec.n() as i64;
    let a = brute_s1(&spec.products()) - int(n - 2);
    let b: Rational = gaps(spec).iter().sum();
    a.max(b) * frac(1, 2)
}

pub fn reference_cntx(spec: &SystemSpec) -> Rational {
    reference_delta_min(spec) - reference_delta0(spec)
}

/// `s1(products, 1 - g) > 2n - 2` with `s1` by enumeration.
pub fn reference_contextual(spec: &SystemSpec) -> bool {
    let n = spec.n() as i64;
    let mut xs = spec.products();
    xs.extend(gaps(spec).into_iter().map(|g| int(1) - g));
    brute_s1(&xs) > int(2 * n - 2)
}

/// Pair bounds recomputed from the four cell probabilities being
/// nonnegative: `(1 ± a ± b ± c) / 4 >= 0`.
pub fn reference_pair_ok(a: &Rational, b: &Rational, c: &Rational) -> bool {
    [(1, 1), (1, -1), (-1, 1), (-1, -1)]
        .iter()
        .all(|&(sa, sb)| {
            let cell = int(1) + a * int(sa) + b * int(sb) + c * int(sa * sb);
            !cell.is_negative()
        })
}

pub fn spec_from_seed(n: usize, seed: u64) -> SystemSpec {
    sampling::random_spec(&mut ChaCha8Rng::seed_from_u64(seed), n)
}

pub fn contextual_spec_from_seed(n: usize, seed: u64) -> SystemSpec {
    sampling::random_contextual_spec(&mut ChaCha8Rng::seed_from_u64(seed), n)
}

pub fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

/// Rationals with small numerators and denominators, any sign.
pub fn any_rational() -> impl Strategy<Value = Rational> {
    (-30i64..=30, 1i64..=12).prop_map(|(p, q)| frac(p, q))
}

/// Rationals in `[-1, 1]`.
pub fn unit_rational() -> impl Strategy<Value = Rational> {
    (1i64..=12).prop_flat_map(|q| (-q..=q).prop_map(move |p| frac(p, q)))
}

pub fn rational_vec(min: usize, max: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(any_rational(), min..=max)
}

pub fn unit_vec(min: usize, max: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(unit_rational(), min..=max)
}

/// Means on a cycle of `k` variables with adjacent correlations inside their
/// pair bounds (`corrs[i]` joins `i` and `i+1 mod k`).
pub fn bounded_cycle(k: usize) -> impl Strategy<Value = (Vec<Rational>, Vec<Rational>)> {
    let grid = 8i64;
    prop::collection::vec(-grid..=grid, k).prop_flat_map(move |ms| {
        let means: Vec<Rational> = ms.iter().map(|&m| frac(m, grid)).collect();
        let edges: Vec<_> = (0..k)
            .map(|i| {
                let (a, b) = (ms[i], ms[(i + 1) % k]);
                let lo = (a + b).abs() - grid;
                let hi = grid - (a - b).abs();
                (lo..=hi).prop_map(move |c| frac(c, grid))
            })
            .collect();
        (Just(means), edges)
    })
}
