//! Contextuality measure and criteria for cyclic systems.
//!
//! With `p_i = ⟨V_i W_{i+1}⟩` and `g_i = |⟨V_i⟩ - ⟨W_i⟩|`:
//!
//! * `Δ0 = Σ g_i / 2`, the smallest `Σ Pr[V_i != W_i]` allowed connection by
//!   connection;
//! * `Δmin = max{ s1(p) - (n-2), Σ g_i } / 2`, the smallest value over
//!   couplings of the whole system;
//! * `CNTX = Δmin - Δ0`, positive exactly for contextual systems.
//!
//! The two criteria `s1(p) > Σ g_i + (n-2)` and
//! `s1(p, 1-g) > 2n - 2` are evaluated independently and always agree.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::feasibility::{closing_range, cycle_feasible, intersect};
use crate::model::{next, AnalysisReport, Branch, ConnectionVector, SystemSpec};
use crate::rational::{frac, int, Rational};
use crate::smax::{classify_indices, s1, IndexClass};

fn count(k: usize) -> Rational {
    int(k as i64)
}

pub fn delta_zero(spec: &SystemSpec) -> Result<Rational> {
    spec.ensure_valid()?;
    Ok(spec.total_marginal_gap() * frac(1, 2))
}

/// Closed-form `Δmin`, with the branch of the maximum that attained it.
pub fn delta_min_formula(spec: &SystemSpec) -> Result<(Rational, Branch)> {
    spec.ensure_valid()?;
    let n = spec.n();
    let top = s1(&spec.products()) - count(n - 2);
    let bottom = spec.total_marginal_gap();
    let (value, branch) = match top.cmp(&bottom) {
        std::cmp::Ordering::Greater => (top, Branch::Products),
        std::cmp::Ordering::Less => (bottom, Branch::Marginals),
        std::cmp::Ordering::Equal => (top, Branch::Both),
    };
    Ok((value * frac(1, 2), branch))
}

/// `s1(p) > Σ g_i + (n - 2)`.
pub fn criterion_conjectured(spec: &SystemSpec) -> Result<bool> {
    spec.ensure_valid()?;
    let n = spec.n();
    Ok(s1(&spec.products()) > spec.total_marginal_gap() + count(n - 2))
}

/// `s1` over the `2n` values `⟨V_iW_{i+1}⟩` and `1 - |⟨V_i⟩ - ⟨W_i⟩|`.
pub fn main_criterion_lhs(spec: &SystemSpec) -> Result<Rational> {
    spec.ensure_valid()?;
    let mut xs = spec.products();
    xs.extend(spec.connection_maxima());
    Ok(s1(&xs))
}

/// `s1(p, 1 - g) > 2n - 2`.
pub fn criterion_main(spec: &SystemSpec) -> Result<bool> {
    Ok(main_criterion_lhs(spec)? > count(2 * spec.n() - 2))
}

/// Signs `m_i` such that the products of the transformed system
/// (`V_i -> m_i V_i`, `W_i -> m_i W_i`) are all nonnegative except possibly
/// the one of smallest magnitude.
///
/// Starting after the smallest-magnitude context `k` with `m_{k+1} = +1`,
/// each next sign is `+1` when `m_i ⟨V_i W_{i+1}⟩ >= 0` and `-1` otherwise.
pub fn canonicalize_signs(spec: &SystemSpec) -> (Vec<i8>, SystemSpec) {
    let n = spec.n();
    let k = (0..n)
        .min_by(|&a, &b| {
            spec.product(a)
                .abs()
                .cmp(&spec.product(b).abs())
                .then(a.cmp(&b))
        })
        .expect("n >= 2");
    let mut signs = vec![1i8; n];
    let mut i = next(k, n);
    signs[i] = 1;
    for _ in 1..n {
        let signed = if signs[i] < 0 {
            -spec.product(i)
        } else {
            spec.product(i).clone()
        };
        signs[next(i, n)] = if signed.is_negative() { -1 } else { 1 };
        i = next(i, n);
    }
    let transformed = spec.with_signs(&signs);
    (signs, transformed)
}

/// How [`optimal_connection_plan`] built its vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConnectionCase {
    /// Noncontextual system: every connection at its maximum.
    Maximal,
    /// Some `|⟨V_j⟩+⟨W_j⟩| - 1` exceeds the pivot magnitude.
    Case1,
    /// The pivot maximum is negative.
    Case2,
    /// The pivot maximum is nonnegative and below the smallest product.
    Case3,
    Case4,
}

impl ConnectionCase {
    pub fn as_str(self) -> &'static str {
        match self {
            ConnectionCase::Maximal => "maximal",
            ConnectionCase::Case1 => "case1",
            ConnectionCase::Case2 => "case2",
            ConnectionCase::Case3 => "case3",
            ConnectionCase::Case4 => "case4",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionPlan {
    pub vector: ConnectionVector,
    pub case: ConnectionCase,
    /// The case construction gave `S < M` and the vector was moved toward
    /// the maximal vector until `S = M`.
    pub refined: bool,
}

/// Means and adjacent products of the `2n`-cycle
/// `V_1, W_2, V_2, ..., V_n, W_1` with connection expectations `conns`.
/// Edge `2i` is the bunch product of context `i`; edge `2i+1` joins
/// `W_{i+1}` and `V_{i+1}`.
pub fn system_cycle(spec: &SystemSpec, conns: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let n = spec.n();
    let mut means = Vec::with_capacity(2 * n);
    let mut corrs = Vec::with_capacity(2 * n);
    for i in 0..n {
        let b = spec.bunch(i);
        means.push(b.v_mean.clone());
        means.push(b.w_next_mean.clone());
        corrs.push(b.product_mean.clone());
        corrs.push(conns[next(i, n)].clone());
    }
    (means, corrs)
}

/// Whether a coupling of `spec` with connection expectations `conns` exists,
/// decided in closed form on the `2n`-cycle.
pub fn connections_feasible(spec: &SystemSpec, conns: &ConnectionVector) -> bool {
    if conns.values.len() != spec.n() {
        return false;
    }
    let (means, corrs) = system_cycle(spec, &conns.values);
    cycle_feasible(&means, &corrs)
}

pub fn optimal_connection_vector(spec: &SystemSpec) -> Result<ConnectionVector> {
    Ok(optimal_connection_plan(spec)?.vector)
}

/// Connection vector of a coupling attaining `Δmin`, i.e. maximizing
/// `S = Σ ⟨V_iW_i⟩`, together with the construction that produced it.
pub fn optimal_connection_plan(spec: &SystemSpec) -> Result<ConnectionPlan> {
    spec.ensure_valid()?;
    let maxima = spec.connection_maxima();
    if !criterion_main(spec)? {
        return Ok(ConnectionPlan {
            vector: ConnectionVector::new(maxima),
            case: ConnectionCase::Maximal,
            refined: false,
        });
    }

    let n = spec.n();
    // Connection expectations are unchanged by the sign transformation
    // (m_i^2 = 1), so the vector built on the canonical system is the answer.
    let (_, canon) = canonicalize_signs(spec);
    let target = count(2 * n - 2) - s1(&canon.products());

    let k = match classify_indices(&maxima)? {
        IndexClass::Condition1 { pivot } => pivot,
        IndexClass::Condition2 { .. } => {
            return Err(Error::Internal(
                "contextual system whose connection maxima fail condition 1".into(),
            ))
        }
    };
    let big_k = match classify_indices(&canon.products())? {
        IndexClass::Condition1 { pivot } => pivot,
        IndexClass::Condition2 { .. } => {
            return Err(Error::Internal("sign canonicalization failed".into()))
        }
    };
    let pivot_max = maxima[k].clone();
    let pivot_abs = pivot_max.abs();
    let minima: Vec<Rational> = (0..n).map(|i| canon.connection_min(i)).collect();

    let (case, mut conns) = if let Some(j) = (0..n).find(|&j| minima[j] > pivot_abs) {
        let mut conns = maxima.clone();
        conns[j] = case1_value(&canon, &conns, j)?;
        (ConnectionCase::Case1, conns)
    } else if pivot_max.is_negative() {
        let j = if k == 0 { 1 } else { 0 };
        let mut conns = maxima.clone();
        conns[j] = -pivot_max.clone();
        (ConnectionCase::Case2, conns)
    } else if *canon.product(big_k) > pivot_max {
        (ConnectionCase::Case3, vec![pivot_max.clone(); n])
    } else {
        let mut conns = vec![pivot_max.clone(); n];
        let mut xs = canon.products();
        xs.extend((0..n).filter(|&i| i != k).map(|i| conns[i].clone()));
        let top = count(2 * n - 2) - s1(&xs);
        conns[k] = top.min(pivot_max.clone());
        (ConnectionCase::Case4, conns)
    };

    let sum: Rational = conns.iter().sum();
    let refined = match sum.cmp(&target) {
        std::cmp::Ordering::Equal => false,
        std::cmp::Ordering::Greater => {
            return Err(Error::Internal(format!(
                "{} construction overshoots the optimum",
                case.as_str()
            )))
        }
        std::cmp::Ordering::Less => {
            // S is affine along the segment toward the maximal vector, whose
            // sum exceeds the target for contextual systems.
            let max_sum: Rational = maxima.iter().sum();
            let t = (&target - &sum) / (max_sum - &sum);
            for (c, m) in conns.iter_mut().zip(&maxima) {
                *c = &*c + (m - &*c) * &t;
            }
            true
        }
    };

    let vector = ConnectionVector::new(conns);
    if vector.sum() != target || !connections_feasible(spec, &vector) {
        return Err(Error::Internal(format!(
            "{} construction produced an infeasible or suboptimal vector",
            case.as_str()
        )));
    }
    Ok(ConnectionPlan {
        vector,
        case,
        refined,
    })
}

/// A value for connection `j` that closes the `2n`-cycle whose other edges are
/// the bunch products and `conns[i]`, `i != j`: the midpoint of the
/// admissible closing range intersected with the pair bounds of `(W_j, V_j)`.
fn case1_value(spec: &SystemSpec, conns: &[Rational], j: usize) -> Result<Rational> {
    let n = spec.n();
    let (means, corrs) = system_cycle(spec, conns);
    // edge joining W_j (position 2j-1) and V_j (position 2j)
    let edge = (2 * j + 2 * n - 1) % (2 * n);
    let start = (edge + 1) % (2 * n);
    let rot_means: Vec<Rational> = (0..2 * n)
        .map(|p| means[(start + p) % (2 * n)].clone())
        .collect();
    let rot_corrs: Vec<Rational> = (0..2 * n - 1)
        .map(|p| corrs[(start + p) % (2 * n)].clone())
        .collect();
    let (lo, hi) = closing_range(&rot_means, &rot_corrs)?;
    let (blo, bhi) = (spec.connection_min(j), spec.connection_max(j));
    let (lo, hi) = intersect((&lo, &hi), (&blo, &bhi))
        .ok_or_else(|| Error::Internal("closing range and pair bounds do not intersect".into()))?;
    Ok((lo + hi) * frac(1, 2))
}

/// Full analysis: `Δ0`, `Δmin`, `CNTX`, both criteria's left-hand sides, the
/// canonical signs and an optimal connection vector.
pub fn cntx(spec: &SystemSpec) -> Result<AnalysisReport> {
    spec.ensure_valid()?;
    let n = spec.n();
    let delta0 = delta_zero(spec)?;
    let (delta_min, argmax_branch) = delta_min_formula(spec)?;
    let s1_bunches = s1(&spec.products());
    // max{ s1 - Σg - (n-2), 0 } / 2
    let excess = &s1_bunches - spec.total_marginal_gap() - count(n - 2);
    let value = if excess.is_positive() {
        excess * frac(1, 2)
    } else {
        Rational::zero()
    };
    if value != &delta_min - &delta0 {
        return Err(Error::Internal("CNTX differs from Δmin - Δ0".into()));
    }
    let (canonical_signs, _) = canonicalize_signs(spec);
    Ok(AnalysisReport {
        n,
        delta0,
        delta_min,
        contextual: value.is_positive(),
        cntx: value,
        s1_bunches,
        main_criterion_lhs: main_criterion_lhs(spec)?,
        argmax_branch,
        canonical_signs,
        optimal_connections: optimal_connection_vector(spec)?,
    })
}

/// `Σ ⟨V_iW_i⟩` of an optimal coupling:
/// `min{ 2n - 2 - s1(p), n - Σ g_i }`.
pub fn max_connection_sum(spec: &SystemSpec) -> Result<Rational> {
    spec.ensure_valid()?;
    let n = spec.n();
    let a = count(2 * n - 2) - s1(&spec.products());
    let b = count(n) - spec.total_marginal_gap();
    Ok(a.min(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BunchStats;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn pr_box() -> SystemSpec {
        SystemSpec::unbiased(&ints(&[1, 1, 1, -1])).unwrap()
    }

    fn classical() -> SystemSpec {
        SystemSpec::unbiased(&ints(&[1, 1, 1, 1])).unwrap()
    }

    #[test]
    fn delta_zero_examples() {
        assert_eq!(delta_zero(&classical()).unwrap(), int(0));
        // ⟨V⟩ = (1/5, 0, -2/5), ⟨W⟩ = (0, 1/5, 2/5); W_i sits in bunch i-1
        let spec = SystemSpec::new(vec![
            BunchStats::new(frac(1, 5), frac(1, 5), int(0)),
            BunchStats::new(int(0), frac(2, 5), int(0)),
            BunchStats::new(frac(-2, 5), int(0), int(0)),
        ])
        .unwrap();
        assert_eq!(delta_zero(&spec).unwrap(), frac(3, 5));
        // n = 2, ⟨V1⟩ = 1, ⟨W1⟩ = -1, ⟨V2⟩ = ⟨W2⟩ = 0
        let spec = SystemSpec::new(vec![
            BunchStats::new(int(1), int(0), int(0)),
            BunchStats::new(int(0), int(-1), int(0)),
        ])
        .unwrap();
        assert_eq!(delta_zero(&spec).unwrap(), int(1));
    }

    #[test]
    fn pr_box_values() {
        assert_eq!(
            delta_min_formula(&pr_box()).unwrap(),
            (int(1), Branch::Products)
        );
        let r = cntx(&pr_box()).unwrap();
        assert_eq!(r.cntx, int(1));
        assert!(r.contextual);
        assert!(criterion_conjectured(&pr_box()).unwrap());
        assert_eq!(main_criterion_lhs(&pr_box()).unwrap(), int(8));
        assert!(criterion_main(&pr_box()).unwrap());
        assert_eq!(r.optimal_connections.sum(), int(2));
    }

    #[test]
    fn tsirelson_stand_in() {
        let t = frac(7071, 10000);
        let spec = SystemSpec::unbiased(&[t.clone(), t.clone(), t.clone(), -t]).unwrap();
        assert_eq!(delta_min_formula(&spec).unwrap().0, frac(4142, 10000));
        assert_eq!(cntx(&spec).unwrap().cntx, frac(4142, 10000));
    }

    #[test]
    fn classical_values() {
        let spec = classical();
        assert_eq!(delta_min_formula(&spec).unwrap(), (int(0), Branch::Both));
        let r = cntx(&spec).unwrap();
        assert_eq!(r.cntx, int(0));
        assert!(!r.contextual);
        assert!(!criterion_conjectured(&spec).unwrap());
        assert_eq!(main_criterion_lhs(&spec).unwrap(), int(6));
        assert!(!criterion_main(&spec).unwrap());
        assert_eq!(r.optimal_connections.values, ints(&[1, 1, 1, 1]));
    }

    #[test]
    fn boundary_is_not_contextual() {
        // products (0, 1, 1) give s1 = 2; ⟨V_1⟩ = 1 makes Σ g = 1, so the
        // right side is 1 + (n - 2) = 2 as well.
        let spec = SystemSpec::new(vec![
            BunchStats::new(int(1), int(0), int(0)),
            BunchStats::new(int(0), int(0), int(1)),
            BunchStats::new(int(0), int(0), int(1)),
        ])
        .unwrap();
        assert_eq!(s1(&spec.products()), int(2));
        assert_eq!(spec.total_marginal_gap() + int(1), int(2));
        assert!(!criterion_conjectured(&spec).unwrap());
        assert_eq!(cntx(&spec).unwrap().cntx, int(0));
    }

    #[test]
    fn signaling_n2_is_noncontextual() {
        for c in [int(-1), frac(-1, 2), int(0), frac(1, 2), int(1)] {
            let spec = SystemSpec::new(vec![
                BunchStats::new(int(1), int(1), int(1)),
                BunchStats::new(int(0), int(0), c),
            ])
            .unwrap();
            assert_eq!(cntx(&spec).unwrap().cntx, int(0));
        }
    }

    #[test]
    fn canonical_signs_example() {
        let spec = SystemSpec::unbiased(&[frac(-9, 10), frac(7, 10), frac(-1, 5)]).unwrap();
        let (signs, t) = canonicalize_signs(&spec);
        assert_eq!(signs, vec![1, -1, -1]);
        assert_eq!(t.products(), vec![frac(9, 10), frac(7, 10), frac(1, 5)]);
        let (signs, t) = canonicalize_signs(&classical());
        assert_eq!(signs, vec![1; 4]);
        assert_eq!(t, classical());
    }

    #[test]
    fn invalid_spec_refused() {
        let spec = SystemSpec::new(vec![
            BunchStats::new(frac(1, 2), frac(-1, 2), frac(1, 2)),
            BunchStats::new(int(0), int(0), int(0)),
        ])
        .unwrap();
        assert!(matches!(cntx(&spec), Err(Error::InvalidSystem(_))));
        assert!(matches!(delta_zero(&spec), Err(Error::InvalidSystem(_))));
    }
}
