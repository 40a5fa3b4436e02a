//! Random valid systems on the grid `{k/8 : -8 <= k <= 8}`.

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{validate_system, BunchStats, SystemSpec};
use crate::rational::{frac, Rational};

pub const GRID_DENOM: i64 = 8;

pub fn grid_value<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    frac(rng.gen_range(-GRID_DENOM..=GRID_DENOM), GRID_DENOM)
}

/// Uniform grid triple, redrawn until it satisfies the pair bounds.
pub fn random_bunch<R: Rng + ?Sized>(rng: &mut R) -> BunchStats {
    loop {
        let b = BunchStats::new(grid_value(rng), grid_value(rng), grid_value(rng));
        let lo = (&b.v_mean + &b.w_next_mean).abs() - frac(1, 1);
        let hi = frac(1, 1) - (&b.v_mean - &b.w_next_mean).abs();
        if lo <= b.product_mean && b.product_mean <= hi {
            return b;
        }
    }
}

pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SystemSpec {
    let spec =
        SystemSpec::new((0..n).map(|_| random_bunch(rng)).collect()).expect("n >= 2 required");
    debug_assert!(validate_system(&spec).is_empty());
    spec
}

/// `count` systems of size `n`, reproducible from `seed`.
pub fn random_specs(n: usize, count: usize, seed: u64) -> Vec<SystemSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_spec(&mut rng, n)).collect()
}

/// Grid bunch whose product sits at the bound matching `negative` most of the
/// time, so that products are as extreme as the marginals allow.
fn extreme_bunch<R: Rng + ?Sized>(rng: &mut R, negative: bool, spread: i64) -> BunchStats {
    let mean = |rng: &mut R| frac(rng.gen_range(-spread..=spread), GRID_DENOM);
    let v = mean(rng);
    let w = mean(rng);
    let lo = (&v + &w).abs() - frac(1, 1);
    let hi = frac(1, 1) - (&v - &w).abs();
    let product = if rng.gen_bool(0.75) {
        if negative {
            lo
        } else {
            hi
        }
    } else {
        // grid points inside [lo, hi]; both ends are on the grid
        let a = (&lo * frac(GRID_DENOM, 1)).to_integer();
        let b = (&hi * frac(GRID_DENOM, 1)).to_integer();
        let k: i64 = rng.gen_range(a.try_into().unwrap()..=b.try_into().unwrap());
        frac(k, GRID_DENOM)
    };
    BunchStats::new(v, w, product)
}

/// Bunches with `⟨W_{i+1}⟩ = ±⟨V_i⟩`, so each product can reach `±1`; the
/// connection maxima then carry all of the marginal mismatch.
fn aligned_bunches<R: Rng + ?Sized>(
    rng: &mut R,
    negative: &[bool],
    spread: i64,
) -> Vec<BunchStats> {
    negative
        .iter()
        .map(|&neg| {
            let v = frac(rng.gen_range(-spread..=spread), GRID_DENOM);
            let w = if neg { -v.clone() } else { v.clone() };
            let shrink = frac(rng.gen_range(0..=2), GRID_DENOM);
            // the far bound is 1 - 2|v|, which can undercut the shrink
            let room = frac(1, 1) - v.abs() * frac(2, 1);
            let product = if neg {
                (shrink - frac(1, 1)).min(room)
            } else {
                (frac(1, 1) - shrink).max(-room)
            };
            BunchStats::new(v, w, product)
        })
        .collect()
}

/// A contextual system of size `n`: products biased toward extremes with an
/// odd number of negative signs among products and connection maxima,
/// redrawn until the contextuality criterion holds.
pub fn random_contextual_spec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SystemSpec {
    loop {
        let spread = rng.gen_range(0..=GRID_DENOM);
        let aligned = rng.gen_bool(0.3);
        let mut negative: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
        // aligned systems may put the odd sign on a connection instead
        if !aligned && negative.iter().filter(|&&b| b).count() % 2 == 0 {
            let i = rng.gen_range(0..n);
            negative[i] = !negative[i];
        }
        let bunches = if aligned {
            aligned_bunches(rng, &negative, spread)
        } else {
            negative
                .iter()
                .map(|&neg| extreme_bunch(rng, neg, spread))
                .collect()
        };
        let spec = SystemSpec::new(bunches).expect("n >= 2 required");
        debug_assert!(validate_system(&spec).is_empty());
        if crate::criteria::criterion_main(&spec).expect("generated systems are valid") {
            return spec;
        }
    }
}

/// `count` contextual systems of size `n`, reproducible from `seed`.
pub fn random_contextual_specs(n: usize, count: usize, seed: u64) -> Vec<SystemSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_contextual_spec(&mut rng, n))
        .collect()
}
