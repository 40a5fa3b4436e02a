//! Parity-constrained maxima of signed sums.
//!
//! `s1(x)` is the largest `Σ m_i x_i` over sign vectors with `Π m_i = -1`,
//! `s0(x)` the same over `Π m_i = +1`. Both are evaluated in linear time:
//! take `m_i = sign(x_i)`, and if that pattern has the wrong parity flip the
//! sign of the entry with the smallest magnitude.

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignPattern {
    signs: Vec<i8>,
}

impl SignPattern {
    /// Panics if any entry is not `±1`.
    pub fn new(signs: Vec<i8>) -> Self {
        assert!(signs.iter().all(|&s| s == 1 || s == -1), "signs must be ±1");
        SignPattern { signs }
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn parity(&self) -> i8 {
        self.signs.iter().product()
    }

    /// `Σ signs[i] * xs[i]`.
    pub fn apply(&self, xs: &[Rational]) -> Rational {
        self.signs
            .iter()
            .zip(xs)
            .map(|(&m, x)| if m < 0 { -x.clone() } else { x.clone() })
            .sum()
    }
}

fn parity_max(xs: &[Rational], parity: i8) -> Result<(Rational, SignPattern)> {
    if xs.len() < 2 {
        return Err(Error::domain(format!(
            "s0/s1 need at least 2 arguments, got {}",
            xs.len()
        )));
    }
    let mut signs: Vec<i8> = xs
        .iter()
        .map(|x| if x.is_negative() { -1 } else { 1 })
        .collect();
    let mut value: Rational = xs.iter().map(|x| x.abs()).sum();
    if signs.iter().product::<i8>() != parity {
        // lowest index among the smallest magnitudes
        let k = (0..xs.len())
            .min_by(|&a, &b| xs[a].abs().cmp(&xs[b].abs()).then(a.cmp(&b)))
            .expect("non-empty");
        signs[k] = -signs[k];
        value -= xs[k].abs() * Rational::from_integer(2.into());
    }
    Ok((value, SignPattern { signs }))
}

/// Maximum of `Σ m_i x_i` over odd-parity sign patterns.
pub fn s_one(xs: &[Rational]) -> Result<(Rational, SignPattern)> {
    parity_max(xs, -1)
}

/// Maximum of `Σ m_i x_i` over even-parity sign patterns.
pub fn s_zero(xs: &[Rational]) -> Result<(Rational, SignPattern)> {
    parity_max(xs, 1)
}

/// Value-only shorthands for callers that already know `xs.len() >= 2`.
pub(crate) fn s1(xs: &[Rational]) -> Rational {
    s_one(xs).expect("s1 of fewer than two values").0
}

pub(crate) fn s0(xs: &[Rational]) -> Rational {
    s_zero(xs).expect("s0 of fewer than two values").0
}

/// Which of the two mutually exclusive index conditions a vector meets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexClass {
    /// `a_i >= |a_pivot|` for every `i != pivot`.
    Condition1 { pivot: usize },
    /// `a_j + a_k < 0` for the distinct indices `j < k`.
    Condition2 { j: usize, k: usize },
}

/// Classifies `xs` (0-based indices). The pivot is the lowest index meeting
/// condition 1; otherwise the lexicographically smallest pair with a negative
/// sum is returned.
pub fn classify_indices(xs: &[Rational]) -> Result<IndexClass> {
    if xs.len() < 2 {
        return Err(Error::domain("index classification needs n >= 2"));
    }
    for k in 0..xs.len() {
        let bound = xs[k].abs();
        if xs.iter().enumerate().all(|(i, a)| i == k || *a >= bound) {
            return Ok(IndexClass::Condition1 { pivot: k });
        }
    }
    for j in 0..xs.len() {
        for k in j + 1..xs.len() {
            if (&xs[j] + &xs[k]).is_negative() {
                return Ok(IndexClass::Condition2 { j, k });
            }
        }
    }
    Err(Error::Internal(
        "neither index condition holds; the dichotomy is broken".into(),
    ))
}

/// `s1(xs) = Σ_{i != k} a_i - a_k`, valid when `a_i >= a_k` and `a_i >= 0`
/// for all `i != k`.
pub fn expand_s1_pivot(xs: &[Rational], k: usize) -> Result<Rational> {
    if xs.len() < 2 || k >= xs.len() {
        return Err(Error::domain("pivot expansion needs n >= 2 and k < n"));
    }
    let ok = xs
        .iter()
        .enumerate()
        .all(|(i, a)| i == k || (*a >= xs[k] && !a.is_negative()));
    if !ok {
        return Err(Error::domain(format!(
            "index {k} is not a pivot: some other entry is negative or below it"
        )));
    }
    let rest: Rational = xs
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, a)| a)
        .sum();
    Ok(rest - &xs[k])
}

/// `s0(xs) = Σ_i a_i`, valid under condition 1 of [`classify_indices`].
pub fn expand_s0_pivot(xs: &[Rational]) -> Result<Rational> {
    match classify_indices(xs)? {
        IndexClass::Condition1 { .. } => Ok(xs.iter().sum()),
        IndexClass::Condition2 { j, k } => Err(Error::domain(format!(
            "condition 1 fails: entries {j} and {k} have a negative sum"
        ))),
    }
}
