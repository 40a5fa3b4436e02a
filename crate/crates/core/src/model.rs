//! Domain types for cyclic systems and their couplings.
//!
//! A cyclic system of `n` properties is observed in `n` contexts. Context
//! `i` yields the bunch `(V_i, W_{i+1})` (indices cyclic), so each property
//! `i` is measured twice: as `V_i` in context `i` and as `W_i` in context
//! `i-1`. Indices are 0-based in the API and 1-based in documents.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{int, to_fraction_string, Rational};

/// Observed statistics of one context: `⟨V_i⟩`, `⟨W_{i+1}⟩`, `⟨V_i W_{i+1}⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BunchStats {
    pub v_mean: Rational,
    pub w_next_mean: Rational,
    pub product_mean: Rational,
}

impl BunchStats {
    pub fn new(v_mean: Rational, w_next_mean: Rational, product_mean: Rational) -> Self {
        BunchStats {
            v_mean,
            w_next_mean,
            product_mean,
        }
    }

    /// Bunch with zero marginals and the given product expectation.
    pub fn unbiased(product_mean: Rational) -> Self {
        BunchStats::new(Rational::zero(), Rational::zero(), product_mean)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SystemSpec {
    bunches: Vec<BunchStats>,
}

impl SystemSpec {
    /// Builds a candidate system. Only the structure (`n >= 2`) is checked;
    /// use [`validate_system`] or [`SystemSpec::ensure_valid`] for bounds.
    pub fn new(bunches: Vec<BunchStats>) -> Result<Self> {
        if bunches.len() < 2 {
            return Err(Error::domain(format!(
                "a cyclic system needs n >= 2 contexts, got {}",
                bunches.len()
            )));
        }
        Ok(SystemSpec { bunches })
    }

    /// System with zero marginals everywhere.
    pub fn unbiased(products: &[Rational]) -> Result<Self> {
        Self::new(products.iter().cloned().map(BunchStats::unbiased).collect())
    }

    pub fn n(&self) -> usize {
        self.bunches.len()
    }

    pub fn bunches(&self) -> &[BunchStats] {
        &self.bunches
    }

    pub fn bunch(&self, i: usize) -> &BunchStats {
        &self.bunches[i]
    }

    /// `⟨V_i⟩`.
    pub fn v(&self, i: usize) -> &Rational {
        &self.bunches[i].v_mean
    }

    /// `⟨W_i⟩`, which lives in the previous context.
    pub fn w(&self, i: usize) -> &Rational {
        &self.bunches[prev(i, self.n())].w_next_mean
    }

    /// `⟨V_i W_{i+1}⟩`.
    pub fn product(&self, i: usize) -> &Rational {
        &self.bunches[i].product_mean
    }

    pub fn products(&self) -> Vec<Rational> {
        self.bunches
            .iter()
            .map(|b| b.product_mean.clone())
            .collect()
    }

    /// `|⟨V_i⟩ - ⟨W_i⟩|`.
    pub fn marginal_gap(&self, i: usize) -> Rational {
        (self.v(i) - self.w(i)).abs()
    }

    /// `Σ_i |⟨V_i⟩ - ⟨W_i⟩|`.
    pub fn total_marginal_gap(&self) -> Rational {
        (0..self.n()).map(|i| self.marginal_gap(i)).sum()
    }

    /// Largest admissible `⟨V_i W_i⟩`: `1 - |⟨V_i⟩ - ⟨W_i⟩|`.
    pub fn connection_max(&self, i: usize) -> Rational {
        Rational::one() - self.marginal_gap(i)
    }

    /// Smallest admissible `⟨V_i W_i⟩`: `|⟨V_i⟩ + ⟨W_i⟩| - 1`.
    pub fn connection_min(&self, i: usize) -> Rational {
        (self.v(i) + self.w(i)).abs() - Rational::one()
    }

    pub fn connection_maxima(&self) -> Vec<Rational> {
        (0..self.n()).map(|i| self.connection_max(i)).collect()
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let violations = validate_system(self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSystem(violations))
        }
    }

    /// Context list rotated so that context `shift` comes first.
    pub fn rotated(&self, shift: usize) -> SystemSpec {
        let n = self.n();
        let bunches = (0..n)
            .map(|i| self.bunches[(i + shift) % n].clone())
            .collect();
        SystemSpec { bunches }
    }

    /// The same system traversed in the opposite direction.
    ///
    /// Property `i` becomes property `n-1-i`; the bunch `(V_i, W_{i+1})`
    /// becomes `(V'_{n-2-i}, W'_{n-1-i})` with the roles of the two
    /// measurements of each property exchanged.
    pub fn reflected(&self) -> SystemSpec {
        let n = self.n();
        let bunches = (0..n)
            .map(|j| {
                // new context j joins new properties j and j+1, i.e. old
                // properties n-1-j and n-2-j: that is old bunch n-2-j.
                let old = &self.bunches[(2 * n - 2 - j) % n];
                BunchStats::new(
                    old.w_next_mean.clone(),
                    old.v_mean.clone(),
                    old.product_mean.clone(),
                )
            })
            .collect();
        SystemSpec { bunches }
    }

    /// Negates both measurements of every property `i` with `signs[i] = -1`.
    pub fn with_signs(&self, signs: &[i8]) -> SystemSpec {
        let n = self.n();
        assert_eq!(signs.len(), n);
        let bunches = (0..n)
            .map(|i| {
                let b = &self.bunches[i];
                let mi = int(signs[i] as i64);
                let mj = int(signs[next(i, n)] as i64);
                BunchStats::new(
                    &b.v_mean * &mi,
                    &b.w_next_mean * &mj,
                    &b.product_mean * mi * mj,
                )
            })
            .collect();
        SystemSpec { bunches }
    }
}

pub(crate) fn next(i: usize, n: usize) -> usize {
    (i + 1) % n
}

pub(crate) fn prev(i: usize, n: usize) -> usize {
    (i + n - 1) % n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    VMean,
    WNextMean,
    ProductMean,
}

impl Field {
    pub fn key(self) -> &'static str {
        match self {
            Field::VMean => "v_mean",
            Field::WNextMean => "w_next_mean",
            Field::ProductMean => "product_mean",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    OutOfRange { field: Field, value: Rational },
    ProductBelowBound { product: Rational, lower: Rational },
    ProductAboveBound { product: Rational, upper: Rational },
}

/// One bunch whose statistics no pair of ±1 variables can have.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// 0-based context index.
    pub context: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx = self.context + 1;
        match &self.kind {
            ViolationKind::OutOfRange { field, value } => write!(
                f,
                "context {ctx}: {} = {} outside [-1, 1]",
                field.key(),
                to_fraction_string(value)
            ),
            ViolationKind::ProductBelowBound { product, lower } => write!(
                f,
                "context {ctx}: product_mean = {} below the pair bound {}",
                to_fraction_string(product),
                to_fraction_string(lower)
            ),
            ViolationKind::ProductAboveBound { product, upper } => write!(
                f,
                "context {ctx}: product_mean = {} above the pair bound {}",
                to_fraction_string(product),
                to_fraction_string(upper)
            ),
        }
    }
}

pub(crate) fn in_unit_range(x: &Rational) -> bool {
    x.abs() <= Rational::one()
}

/// Checks every bunch against `[-1, 1]` and the pair bounds
/// `|⟨V⟩+⟨W⟩| - 1 <= ⟨VW⟩ <= 1 - |⟨V⟩-⟨W⟩|`.
///
/// Returns at most one violation per bunch, in context order.
pub fn validate_system(spec: &SystemSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    for (context, b) in spec.bunches.iter().enumerate() {
        let fields = [
            (Field::VMean, &b.v_mean),
            (Field::WNextMean, &b.w_next_mean),
            (Field::ProductMean, &b.product_mean),
        ];
        if let Some((field, value)) = fields.iter().find(|(_, v)| !in_unit_range(v)) {
            out.push(Violation {
                context,
                kind: ViolationKind::OutOfRange {
                    field: *field,
                    value: (*value).clone(),
                },
            });
            continue;
        }
        let lower = (&b.v_mean + &b.w_next_mean).abs() - Rational::one();
        let upper = Rational::one() - (&b.v_mean - &b.w_next_mean).abs();
        if b.product_mean < lower {
            out.push(Violation {
                context,
                kind: ViolationKind::ProductBelowBound {
                    product: b.product_mean.clone(),
                    lower,
                },
            });
        } else if b.product_mean > upper {
            out.push(Violation {
                context,
                kind: ViolationKind::ProductAboveBound {
                    product: b.product_mean.clone(),
                    upper,
                },
            });
        }
    }
    out
}

/// Hypothetical connection expectations `⟨V_i W_i⟩`, one per property.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConnectionVector {
    pub values: Vec<Rational>,
}

impl ConnectionVector {
    pub fn new(values: Vec<Rational>) -> Self {
        ConnectionVector { values }
    }

    pub fn sum(&self) -> Rational {
        self.values.iter().sum()
    }

    /// Indices (0-based) whose entry falls outside the pair bounds set by
    /// `⟨V_i⟩` and `⟨W_i⟩` of `spec`.
    pub fn out_of_bounds(&self, spec: &SystemSpec) -> Vec<usize> {
        (0..spec.n())
            .filter(|&i| match self.values.get(i) {
                Some(c) => *c < spec.connection_min(i) || *c > spec.connection_max(i),
                None => true,
            })
            .chain(spec.n()..self.values.len())
            .collect()
    }
}

/// Joint pmf over `num_vars` binary variables.
///
/// Atoms are bit masks: bit `p` set means variable `p` takes the value `-1`.
/// For a whole-system coupling the variable order is the cycle order
/// `V_1, W_2, V_2, W_3, ..., V_n, W_1`. Zero-probability atoms are not stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CouplingPMF {
    num_vars: usize,
    atoms: BTreeMap<u64, Rational>,
}

/// Upper bound on the variable count of any stored coupling.
pub const MAX_COUPLING_VARS: usize = 40;

impl CouplingPMF {
    pub fn new(num_vars: usize, atoms: impl IntoIterator<Item = (u64, Rational)>) -> Result<Self> {
        if num_vars == 0 || num_vars > MAX_COUPLING_VARS {
            return Err(Error::MalformedCoupling(format!(
                "variable count {num_vars} outside 1..={MAX_COUPLING_VARS}"
            )));
        }
        let mut map: BTreeMap<u64, Rational> = BTreeMap::new();
        for (atom, p) in atoms {
            if atom >> num_vars != 0 {
                return Err(Error::MalformedCoupling(format!(
                    "atom {atom:#b} has more than {num_vars} variables"
                )));
            }
            if p.is_negative() {
                return Err(Error::MalformedCoupling(format!(
                    "negative probability {} on atom {atom:#b}",
                    to_fraction_string(&p)
                )));
            }
            *map.entry(atom).or_insert_with(Rational::zero) += p;
        }
        map.retain(|_, p| !p.is_zero());
        let total: Rational = map.values().sum();
        if !total.is_one() {
            return Err(Error::MalformedCoupling(format!(
                "probabilities sum to {}, not 1",
                to_fraction_string(&total)
            )));
        }
        Ok(CouplingPMF {
            num_vars,
            atoms: map,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Number of properties when this is a whole-system coupling.
    pub fn system_n(&self) -> Option<usize> {
        (self.num_vars.is_multiple_of(2) && self.num_vars >= 4).then_some(self.num_vars / 2)
    }

    /// Nonzero atoms in ascending mask order.
    pub fn atoms(&self) -> impl Iterator<Item = (u64, &Rational)> {
        self.atoms.iter().map(|(a, p)| (*a, p))
    }

    pub fn probability(&self, atom: u64) -> Rational {
        self.atoms
            .get(&atom)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Expectation of the product of the variables selected by `mask`.
    pub fn expectation(&self, mask: u64) -> Rational {
        self.atoms
            .iter()
            .map(|(a, p)| {
                if (a & mask).count_ones().is_multiple_of(2) {
                    p.clone()
                } else {
                    -p.clone()
                }
            })
            .sum()
    }

    /// `Pr[X_a != X_b]` for variable positions `a` and `b`.
    pub fn disagreement(&self, a: usize, b: usize) -> Rational {
        self.atoms
            .iter()
            .filter(|(atom, _)| ((*atom >> a) ^ (*atom >> b)) & 1 == 1)
            .map(|(_, p)| p.clone())
            .sum()
    }

    /// Checks that every bunch marginal of `spec` is reproduced exactly.
    pub fn check_against(&self, spec: &SystemSpec) -> Result<()> {
        let n = spec.n();
        if self.num_vars != 2 * n {
            return Err(Error::MalformedCoupling(format!(
                "coupling has {} variables, system needs {}",
                self.num_vars,
                2 * n
            )));
        }
        for i in 0..n {
            let (v, w) = bunch_positions(i);
            let b = spec.bunch(i);
            if self.expectation(1 << v) != b.v_mean
                || self.expectation(1 << w) != b.w_next_mean
                || self.expectation((1 << v) | (1 << w)) != b.product_mean
            {
                return Err(Error::MalformedCoupling(format!(
                    "marginal of context {} does not match the system",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Achieved `⟨V_i W_i⟩` for each property of a whole-system coupling.
    pub fn connections(&self) -> Result<ConnectionVector> {
        let n = self.require_system()?;
        Ok(ConnectionVector::new(
            (0..n)
                .map(|i| {
                    let (v, w) = connection_positions(i, n);
                    self.expectation((1 << v) | (1 << w))
                })
                .collect(),
        ))
    }

    fn require_system(&self) -> Result<usize> {
        self.system_n().ok_or_else(|| {
            Error::MalformedCoupling(format!(
                "{} variables do not form a cyclic system coupling",
                self.num_vars
            ))
        })
    }
}

/// Bit positions of `(V_i, W_{i+1})` in the cycle order.
pub fn bunch_positions(i: usize) -> (usize, usize) {
    (2 * i, 2 * i + 1)
}

/// Bit positions of `(V_i, W_i)` in the cycle order.
pub fn connection_positions(i: usize, n: usize) -> (usize, usize) {
    (2 * i, 2 * prev(i, n) + 1)
}

/// Variable names in cycle order, 1-based: `V1, W2, ..., Vn, W1`.
pub fn variable_names(n: usize) -> Vec<String> {
    (0..n)
        .flat_map(|i| [format!("V{}", i + 1), format!("W{}", next(i, n) + 1)])
        .collect()
}

/// `Δ = Σ_i Pr[V_i != W_i]` of a whole-system coupling.
pub fn delta_of_coupling(pmf: &CouplingPMF) -> Result<Rational> {
    let n = pmf.require_system()?;
    Ok((0..n)
        .map(|i| {
            let (v, w) = connection_positions(i, n);
            pmf.disagreement(v, w)
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `s1(products) - (n - 2)` attained the maximum.
    Products,
    /// `Σ |⟨V_i⟩ - ⟨W_i⟩|` attained the maximum.
    Marginals,
    Both,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Products => "products",
            Branch::Marginals => "marginals",
            Branch::Both => "both",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "products" => Some(Branch::Products),
            "marginals" => Some(Branch::Marginals),
            "both" => Some(Branch::Both),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisReport {
    pub n: usize,
    pub delta0: Rational,
    pub delta_min: Rational,
    pub cntx: Rational,
    pub contextual: bool,
    /// `s1` of the bunch product expectations.
    pub s1_bunches: Rational,
    /// `s1` over products and connection maxima, compared against `2n - 2`.
    pub main_criterion_lhs: Rational,
    pub argmax_branch: Branch,
    pub canonical_signs: Vec<i8>,
    pub optimal_connections: ConnectionVector,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn bunch(v: Rational, w: Rational, p: Rational) -> BunchStats {
        BunchStats::new(v, w, p)
    }

    #[test]
    fn deterministic_bunch_is_valid() {
        let spec = SystemSpec::new(vec![
            bunch(int(1), int(1), int(1)),
            bunch(int(0), int(0), int(0)),
        ])
        .unwrap();
        assert!(validate_system(&spec).is_empty());
    }

    #[test]
    fn product_above_upper_bound() {
        let spec = SystemSpec::new(vec![
            bunch(frac(1, 2), frac(-1, 2), frac(1, 2)),
            bunch(int(0), int(0), int(0)),
        ])
        .unwrap();
        let v = validate_system(&spec);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].context, 0);
        assert_eq!(
            v[0].kind,
            ViolationKind::ProductAboveBound {
                product: frac(1, 2),
                upper: int(0)
            }
        );
    }

    #[test]
    fn zero_marginals_allow_full_range() {
        let spec = SystemSpec::unbiased(&[int(-1), int(1)]).unwrap();
        assert!(validate_system(&spec).is_empty());
    }

    #[test]
    fn out_of_range_reported_once_per_bunch() {
        let spec = SystemSpec::new(vec![
            bunch(int(2), int(3), int(0)),
            bunch(int(0), int(0), frac(-3, 2)),
        ])
        .unwrap();
        let v = validate_system(&spec);
        assert_eq!(v.len(), 2);
        assert!(matches!(
            v[0].kind,
            ViolationKind::OutOfRange {
                field: Field::VMean,
                ..
            }
        ));
        assert!(matches!(
            v[1].kind,
            ViolationKind::OutOfRange {
                field: Field::ProductMean,
                ..
            }
        ));
    }

    #[test]
    fn n_below_two_rejected() {
        assert!(SystemSpec::unbiased(&[int(1)]).is_err());
    }

    #[test]
    fn marginals_of_properties() {
        // n = 2: contexts (V1, W2) and (V2, W1)
        let spec = SystemSpec::new(vec![
            bunch(int(1), frac(1, 2), frac(1, 2)),
            bunch(int(0), frac(-1, 4), int(0)),
        ])
        .unwrap();
        assert_eq!(spec.v(0), &int(1));
        assert_eq!(spec.w(0), &frac(-1, 4));
        assert_eq!(spec.w(1), &frac(1, 2));
        assert_eq!(spec.marginal_gap(0), frac(5, 4));
        assert_eq!(spec.connection_max(0), frac(-1, 4));
        assert_eq!(spec.connection_min(0), frac(-1, 4));
    }

    #[test]
    fn perfect_agreement_has_zero_delta() {
        // n = 2, all four variables equal, fair
        let pmf = CouplingPMF::new(4, [(0b0000, frac(1, 2)), (0b1111, frac(1, 2))]).unwrap();
        assert_eq!(delta_of_coupling(&pmf).unwrap(), int(0));
    }

    #[test]
    fn independent_fair_coins_have_delta_one() {
        let pmf = CouplingPMF::new(4, (0..16).map(|a| (a, frac(1, 16)))).unwrap();
        assert_eq!(delta_of_coupling(&pmf).unwrap(), int(1));
    }

    #[test]
    fn malformed_pmf_rejected() {
        assert!(CouplingPMF::new(4, [(0, frac(1, 2))]).is_err());
        assert!(CouplingPMF::new(2, [(0, int(2)), (1, int(-1))]).is_err());
        assert!(CouplingPMF::new(2, [(4, int(1))]).is_err());
    }

    #[test]
    fn names_follow_cycle_order() {
        assert_eq!(variable_names(2), ["V1", "W2", "V2", "W1"]);
        assert_eq!(connection_positions(0, 2), (0, 3));
        assert_eq!(connection_positions(1, 2), (2, 1));
    }

    #[test]
    fn reflection_is_an_involution() {
        let spec = SystemSpec::new(vec![
            bunch(frac(1, 2), int(0), int(0)),
            bunch(frac(1, 4), frac(-1, 8), frac(1, 8)),
            bunch(int(0), frac(3, 8), frac(-1, 2)),
        ])
        .unwrap();
        assert_eq!(spec.reflected().reflected(), spec);
        let r = spec.reflected();
        // property i of the original is property n-1-i of the reflection,
        // with V and W exchanged.
        for i in 0..3 {
            assert_eq!(r.v(2 - i), spec.w(i));
            assert_eq!(r.w(2 - i), spec.v(i));
        }
    }
}
