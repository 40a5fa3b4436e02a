mod common;

use common::*;
use cyclic_cntx::feasibility::{
    chain_joint, closing_range, cycle_feasible, intersect, maximal_pair_coupling, pair_bounds,
    pair_pmf,
};
use cyclic_cntx::lp_oracle::lp_cycle_feasible;
use cyclic_cntx::rational::{frac, int};
use num_traits::Signed;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn pair_bounds_match_cell_nonnegativity(a in unit_rational(), b in unit_rational(), c in unit_rational()) {
        let (lo, hi) = pair_bounds(&a, &b).unwrap();
        prop_assert_eq!(lo <= c && c <= hi, reference_pair_ok(&a, &b, &c));
    }

    #[test]
    fn pair_pmf_reproduces_moments((means, corrs) in bounded_cycle(2)) {
        let pmf = pair_pmf(&means[0], &means[1], &corrs[0]).unwrap();
        prop_assert_eq!(pmf.expectation(0b01), means[0].clone());
        prop_assert_eq!(pmf.expectation(0b10), means[1].clone());
        prop_assert_eq!(pmf.expectation(0b11), corrs[0].clone());
        // ⟨AB⟩ = 1 - 2 Pr[A != B]
        prop_assert_eq!(int(1) - pmf.disagreement(0, 1) * int(2), corrs[0].clone());
    }

    #[test]
    fn maximal_coupling_disagreement(a in unit_rational(), b in unit_rational()) {
        let pmf = maximal_pair_coupling(&a, &b).unwrap();
        prop_assert_eq!(pmf.disagreement(0, 1), (&a - &b).abs() * frac(1, 2));
        prop_assert_eq!(pmf.expectation(1), a);
        prop_assert_eq!(pmf.expectation(2), b);
    }

    #[test]
    fn chain_reproduces_inputs((means, corrs) in (2usize..=8).prop_flat_map(bounded_cycle)) {
        let k = means.len();
        let corrs = &corrs[..k - 1];
        let pmf = chain_joint(&means, corrs).unwrap();
        prop_assert_eq!(pmf.num_vars(), k);
        let total: cyclic_cntx::Rational = pmf.atoms().map(|(_, p)| p.clone()).sum();
        prop_assert_eq!(total, int(1));
        for (i, m) in means.iter().enumerate() {
            prop_assert_eq!(&pmf.expectation(1 << i), m);
        }
        for (i, c) in corrs.iter().enumerate() {
            prop_assert_eq!(&pmf.expectation(0b11 << i), c);
        }
    }

    #[test]
    fn cycle_test_agrees_with_lp((means, corrs) in (2usize..=6).prop_flat_map(bounded_cycle)) {
        prop_assert_eq!(cycle_feasible(&means, &corrs), lp_cycle_feasible(&means, &corrs).unwrap());
    }

    #[test]
    fn closing_range_is_tight((means, corrs) in (3usize..=5).prop_flat_map(bounded_cycle)) {
        let k = means.len();
        let chain = &corrs[..k - 1];
        let (lo, hi) = closing_range(&means, chain).unwrap();
        let (blo, bhi) = pair_bounds(&means[k - 1], &means[0]).unwrap();
        let (lo, hi) = intersect((&lo, &hi), (&blo, &bhi)).unwrap();
        let feasible = |c: cyclic_cntx::Rational| {
            let mut all = chain.to_vec();
            all.push(c);
            lp_cycle_feasible(&means, &all).unwrap()
        };
        prop_assert!(feasible(lo.clone()));
        prop_assert!(feasible(hi.clone()));
        prop_assert!(feasible((&lo + &hi) * frac(1, 2)));
        let eps = frac(1, 1000);
        prop_assert!(!feasible(&lo - &eps));
        prop_assert!(!feasible(&hi + &eps));
    }

    #[test]
    fn lemma9_inequalities(a in unit_rational(), b in unit_rational(), c in unit_rational(), d in unit_rational()) {
        let lhs = -(&d + &c).abs() + (&a - &c).abs() + (&d - &b).abs() - (&a - &b).abs();
        prop_assert!(lhs <= b.abs().max(d.abs()) * int(2));
        let lhs = -(&a - &b).abs() - (&d - &c).abs() + ((&a - &c).abs() - (&d - &b).abs()).abs();
        prop_assert!(lhs <= int(0));
    }

    #[test]
    fn cyclic_triangle(n in 2usize..=8, seed in any::<u64>()) {
        let spec = spec_from_seed(n, seed);
        let within: cyclic_cntx::Rational =
            (0..n).map(|i| (&spec.bunch(i).v_mean - &spec.bunch(i).w_next_mean).abs()).sum();
        let g = gaps(&spec);
        for k in 0..n {
            let others: cyclic_cntx::Rational =
                g.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, x)| x.clone()).sum();
            prop_assert!(g[k] <= &within + others);
        }
    }
}

#[test]
fn chain_rejects_out_of_bounds_edge() {
    let means = ints(&[1, 1, 0]);
    let corrs = vec![int(-1), int(0)];
    assert!(chain_joint(&means, &corrs).is_err());
}

#[test]
fn n2_cycle_needs_equal_parallel_edges() {
    let means = ints(&[0, 0]);
    assert!(cycle_feasible(&means, &[frac(1, 2), frac(1, 2)]));
    assert!(!cycle_feasible(&means, &[frac(1, 2), frac(1, 4)]));
}

#[test]
fn closing_range_documented() {
    // perfectly correlated chain of three unbiased variables forces ⟨A3A1⟩ = 1
    let (lo, hi) = closing_range(&ints(&[0, 0, 0]), &ints(&[1, 1])).unwrap();
    assert_eq!((lo, hi), (int(1), int(1)));
    assert!(closing_range(&ints(&[0, 0]), &ints(&[1])).is_err());
}
