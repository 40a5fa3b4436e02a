//! Brute-force oracle: exact linear programming over every coupling of a
//! cyclic system.
//!
//! The feasible set is the polytope of pmfs on the `2^(2n)` atoms of
//! `V_1, W_2, ..., V_n, W_1` whose bunch marginals match the system. The
//! oracle shares no code with the closed-form criteria beyond the model
//! types.

mod simplex;

pub use simplex::{AtomProgram, LpOutcome, LpSolution, MAX_PROGRAM_VARS};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{
    bunch_positions, connection_positions, ConnectionVector, CouplingPMF, SystemSpec,
};
use crate::rational::Rational;

/// Default cap on `n` (`2^14` atoms).
pub const DEFAULT_LIMIT: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Oracle {
    limit: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            limit: DEFAULT_LIMIT,
        }
    }
}

impl Oracle {
    /// `limit` is clamped to what an [`AtomProgram`] can hold.
    pub fn with_limit(limit: usize) -> Self {
        Oracle {
            limit: limit.min(MAX_PROGRAM_VARS / 2),
        }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// Bunch constraints of `spec`, plus `⟨V_iW_i⟩ = conns[i]` rows when given.
    pub fn system_program(
        &self,
        spec: &SystemSpec,
        conns: Option<&ConnectionVector>,
    ) -> Result<AtomProgram> {
        spec.ensure_valid()?;
        let n = spec.n();
        if n > self.limit {
            return Err(Error::Resource {
                n,
                limit: self.limit,
            });
        }
        let mut program = AtomProgram::new(2 * n)?;
        for i in 0..n {
            let (v, w) = bunch_positions(i);
            let b = spec.bunch(i);
            program
                .constrain(1 << v, b.v_mean.clone())
                .constrain(1 << w, b.w_next_mean.clone())
                .constrain((1 << v) | (1 << w), b.product_mean.clone());
        }
        if let Some(conns) = conns {
            if conns.values.len() != n {
                return Err(Error::domain(format!(
                    "{} connection values for n = {n}",
                    conns.values.len()
                )));
            }
            for (i, c) in conns.values.iter().enumerate() {
                let (v, w) = connection_positions(i, n);
                program.constrain((1 << v) | (1 << w), c.clone());
            }
        }
        Ok(program)
    }

    /// Exact `Δmin` with an optimal coupling.
    pub fn min_delta(&self, spec: &SystemSpec) -> Result<(Rational, CouplingPMF)> {
        let program = self.system_program(spec, None)?;
        let n = spec.n();
        let solution = program
            .minimize(&delta_costs(n))?
            .solution()
            .ok_or_else(|| Error::Internal("a valid system has no coupling".into()))?;
        let pmf = CouplingPMF::new(2 * n, solution.atoms)?;
        Ok((solution.objective, pmf))
    }

    /// Whether some coupling of `spec` has exactly the connection
    /// expectations `conns`, with such a coupling when it exists.
    pub fn feasible_with_connections(
        &self,
        spec: &SystemSpec,
        conns: &ConnectionVector,
    ) -> Result<(bool, Option<CouplingPMF>)> {
        let program = self.system_program(spec, Some(conns))?;
        match program.find_feasible()? {
            LpOutcome::Infeasible => Ok((false, None)),
            LpOutcome::Optimal(s) => Ok((true, Some(CouplingPMF::new(2 * spec.n(), s.atoms)?))),
        }
    }

    /// Vertices of the coupling polytope reached by minimizing `count` random
    /// integer objectives drawn from a ChaCha stream seeded with `seed`.
    pub fn enumerate_vertex_sample(
        &self,
        spec: &SystemSpec,
        count: usize,
        seed: u64,
    ) -> Result<Vec<CouplingPMF>> {
        let program = self.system_program(spec, None)?;
        vertex_sample(&program, count, seed)
    }
}

/// Random-objective vertices of an arbitrary atom program.
pub fn vertex_sample(program: &AtomProgram, count: usize, seed: u64) -> Result<Vec<CouplingPMF>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let costs: Vec<i64> = (0..program.num_atoms())
            .map(|_| rng.gen_range(-8..=8))
            .collect();
        let solution = program
            .minimize(&costs)?
            .solution()
            .ok_or_else(|| Error::Internal("vertex sampling on an empty polytope".into()))?;
        out.push(CouplingPMF::new(program.num_vars(), solution.atoms)?);
    }
    Ok(out)
}

/// Per-atom `Σ_i [V_i != W_i]` in the cycle-order bit convention.
pub fn delta_costs(n: usize) -> Vec<i64> {
    (0..1u64 << (2 * n))
        .map(|atom| {
            (0..n)
                .filter(|&i| {
                    let (v, w) = connection_positions(i, n);
                    ((atom >> v) ^ (atom >> w)) & 1 == 1
                })
                .count() as i64
        })
        .collect()
}

/// Atom program for `A_1..A_k` with the given means and cyclic adjacent
/// products (`corrs[i]` joins `A_i` and `A_{i+1 mod k}`).
pub fn cycle_program(means: &[Rational], corrs: &[Rational]) -> Result<AtomProgram> {
    let k = means.len();
    if k < 2 || corrs.len() != k {
        return Err(Error::domain(
            "cycle program needs k >= 2 means and k correlations",
        ));
    }
    let mut program = AtomProgram::new(k)?;
    for (i, m) in means.iter().enumerate() {
        program.constrain(1 << i, m.clone());
    }
    for (i, c) in corrs.iter().enumerate() {
        program.constrain((1 << i) | (1 << ((i + 1) % k)), c.clone());
    }
    Ok(program)
}

/// LP decision of cycle feasibility.
pub fn lp_cycle_feasible(means: &[Rational], corrs: &[Rational]) -> Result<bool> {
    Ok(matches!(
        cycle_program(means, corrs)?.find_feasible()?,
        LpOutcome::Optimal(_)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::delta_of_coupling;
    use crate::rational::{frac, int};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn pr_box_minimum() {
        let spec = SystemSpec::unbiased(&ints(&[1, 1, 1, -1])).unwrap();
        let (d, w) = Oracle::default().min_delta(&spec).unwrap();
        assert_eq!(d, int(1));
        assert_eq!(delta_of_coupling(&w).unwrap(), int(1));
        w.check_against(&spec).unwrap();
    }

    #[test]
    fn classical_minimum() {
        let spec = SystemSpec::unbiased(&ints(&[1, 1, 1, 1])).unwrap();
        let (d, w) = Oracle::default().min_delta(&spec).unwrap();
        assert_eq!(d, int(0));
        // all eight variables equal: two atoms of mass 1/2
        assert_eq!(
            w.atoms().map(|(a, p)| (a, p.clone())).collect::<Vec<_>>(),
            vec![(0, frac(1, 2)), (0xff, frac(1, 2))]
        );
    }

    #[test]
    fn pr_box_connections() {
        let spec = SystemSpec::unbiased(&ints(&[1, 1, 1, -1])).unwrap();
        let o = Oracle::default();
        let (ok, w) = o
            .feasible_with_connections(&spec, &ConnectionVector::new(ints(&[1, 1, 1, 1])))
            .unwrap();
        assert!(!ok && w.is_none());
        let (ok, w) = o
            .feasible_with_connections(&spec, &ConnectionVector::new(ints(&[1, 1, 1, -1])))
            .unwrap();
        assert!(ok);
        assert_eq!(delta_of_coupling(&w.unwrap()).unwrap(), int(1));
    }

    #[test]
    fn limit_enforced() {
        let spec = SystemSpec::unbiased(&vec![int(1); 8]).unwrap();
        assert!(matches!(
            Oracle::default().min_delta(&spec),
            Err(Error::Resource { n: 8, limit: 7 })
        ));
    }

    #[test]
    fn empty_sample() {
        let spec = SystemSpec::unbiased(&ints(&[1, 1, 1, -1])).unwrap();
        assert!(Oracle::default()
            .enumerate_vertex_sample(&spec, 0, 1)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn cycle_lp_matches_examples() {
        let z = vec![int(0); 3];
        assert!(!lp_cycle_feasible(&z, &ints(&[1, 1, -1])).unwrap());
        assert!(lp_cycle_feasible(&z, &ints(&[1, 1, 1])).unwrap());
        assert!(lp_cycle_feasible(&vec![int(0); 4], &vec![frac(1, 2); 4]).unwrap());
    }
}
