//! Exact two-phase revised simplex over atom programs.
//!
//! The variables are the probabilities of the `2^k` atoms of `k` binary
//! variables. Every constraint fixes the expectation of a product of
//! variables (a parity character), so each column entry is `±1` and is
//! computed on the fly from the atom and the row mask. The basis inverse is
//! kept fraction-free as an integer adjugate over a common determinant, which
//! also gives pricing integer duals. Entering and leaving variables follow Bland's rule,
//! which rules out cycling on these highly degenerate programs.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest variable count an atom program may have.
pub const MAX_PROGRAM_VARS: usize = 20;

/// Linear program over the atoms of `num_vars` binary variables.
///
/// Row `r` requires `Σ_atoms x_a χ_r(a) = rhs_r` with
/// `χ_r(a) = (-1)^{popcount(a & mask_r)}`. The normalization row
/// (mask 0, rhs 1) is always present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomProgram {
    num_vars: usize,
    rows: Vec<(u64, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    /// Nonzero atom probabilities of the optimal basic solution.
    pub atoms: Vec<(u64, Rational)>,
    pub objective: Rational,
    /// Dual values, one per row in insertion order.
    pub duals: Vec<Rational>,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Optimal(LpSolution),
}

impl LpOutcome {
    pub fn solution(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            LpOutcome::Infeasible => None,
        }
    }
}

impl AtomProgram {
    pub fn new(num_vars: usize) -> Result<Self> {
        if num_vars == 0 || num_vars > MAX_PROGRAM_VARS {
            return Err(Error::Resource {
                n: num_vars,
                limit: MAX_PROGRAM_VARS,
            });
        }
        Ok(AtomProgram {
            num_vars,
            rows: vec![(0, Rational::one())],
        })
    }

    /// Adds `E[Π_{p in mask} X_p] = rhs`.
    pub fn constrain(&mut self, mask: u64, rhs: Rational) -> &mut Self {
        debug_assert!(mask >> self.num_vars == 0);
        self.rows.push((mask, rhs));
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_atoms(&self) -> usize {
        1 << self.num_vars
    }

    pub fn rows(&self) -> &[(u64, Rational)] {
        &self.rows
    }

    pub fn coefficient(&self, row: usize, atom: u64) -> i8 {
        character(self.rows[row].0, atom)
    }

    /// Any feasible point, or infeasibility.
    pub fn find_feasible(&self) -> Result<LpOutcome> {
        self.minimize(&vec![0; self.num_atoms()])
    }

    /// Minimizes `Σ costs[a] x_a`.
    pub fn minimize(&self, costs: &[i64]) -> Result<LpOutcome> {
        if costs.len() != self.num_atoms() {
            return Err(Error::domain(format!(
                "{} costs for {} atoms",
                costs.len(),
                self.num_atoms()
            )));
        }
        Solver::new(self).run(costs)
    }
}

#[inline]
fn character(mask: u64, atom: u64) -> i8 {
    if (mask & atom).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

struct Solver<'a> {
    program: &'a AtomProgram,
    m: usize,
    n_atoms: usize,
    /// ±1 per row so that the working right-hand side is nonnegative.
    row_sign: Vec<i8>,
    masks: Vec<u64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    /// `B^{-1} = adj / det` with integer `adj` and `det > 0`. Every basis
    /// matrix has integer entries, so the fraction-free update below divides
    /// exactly.
    adj: Vec<Vec<BigInt>>,
    det: BigInt,
    xb: Vec<Rational>,
    pivots: usize,
}

enum Phase<'c> {
    One,
    Two(&'c [i64]),
}

impl Phase<'_> {
    fn cost(&self, column: usize, n_atoms: usize) -> i64 {
        match self {
            Phase::One => i64::from(column >= n_atoms),
            Phase::Two(c) => {
                if column < n_atoms {
                    c[column]
                } else {
                    0
                }
            }
        }
    }
}

impl<'a> Solver<'a> {
    fn new(program: &'a AtomProgram) -> Self {
        let m = program.rows.len();
        let n_atoms = program.num_atoms();
        let row_sign: Vec<i8> = program
            .rows
            .iter()
            .map(|(_, b)| if b.is_negative() { -1 } else { 1 })
            .collect();
        let xb = program.rows.iter().map(|(_, b)| b.abs()).collect();
        let adj = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        if i == j {
                            BigInt::one()
                        } else {
                            BigInt::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        let mut in_basis = vec![false; n_atoms + m];
        for r in 0..m {
            in_basis[n_atoms + r] = true;
        }
        Solver {
            program,
            m,
            n_atoms,
            row_sign,
            masks: program.rows.iter().map(|(mask, _)| *mask).collect(),
            basis: (n_atoms..n_atoms + m).collect(),
            in_basis,
            adj,
            det: BigInt::one(),
            xb,
            pivots: 0,
        }
    }

    /// Working-matrix entry of an atom column.
    #[inline]
    fn entry(&self, row: usize, atom: usize) -> i8 {
        self.row_sign[row] * character(self.masks[row], atom as u64)
    }

    fn run(mut self, costs: &[i64]) -> Result<LpOutcome> {
        self.optimize(&Phase::One)?;
        let infeasibility: Rational = self
            .basis
            .iter()
            .zip(&self.xb)
            .filter(|(&col, _)| col >= self.n_atoms)
            .map(|(_, x)| x.clone())
            .sum();
        if infeasibility.is_positive() {
            return Ok(LpOutcome::Infeasible);
        }
        self.drive_out_artificials();
        self.optimize(&Phase::Two(costs))?;
        self.finish(costs).map(LpOutcome::Optimal)
    }

    /// `c_B adj`, so that the duals are this vector over `det`
    /// (working row coordinates).
    fn scaled_duals(&self, phase: &Phase) -> Vec<BigInt> {
        let mut y = vec![BigInt::zero(); self.m];
        for (i, &col) in self.basis.iter().enumerate() {
            let c = phase.cost(col, self.n_atoms);
            if c == 0 {
                continue;
            }
            for (yr, a) in y.iter_mut().zip(&self.adj[i]) {
                if !a.is_zero() {
                    *yr += a * c;
                }
            }
        }
        y
    }

    /// First atom column (Bland) with negative reduced cost.
    fn entering(&self, phase: &Phase) -> Option<usize> {
        // reduced cost * det = c_j det - Σ_r y_r a_rj; fold the row signs in
        let scaled: Vec<BigInt> = self
            .scaled_duals(phase)
            .into_iter()
            .zip(&self.row_sign)
            .map(|(v, &s)| if s < 0 { -v } else { v })
            .collect();
        let cost = |j: usize| phase.cost(j, self.n_atoms);

        let small = self.det.to_i64().zip(
            scaled
                .iter()
                .map(|v| v.to_i64())
                .collect::<Option<Vec<i64>>>(),
        );
        if let Some((d, s)) = small {
            let rows: Vec<(u64, i128)> = self
                .masks
                .iter()
                .zip(&s)
                .filter(|(_, v)| **v != 0)
                .map(|(m, v)| (*m, *v as i128))
                .collect();
            let d = d as i128;
            return (0..self.n_atoms).find(|&j| {
                if self.in_basis[j] {
                    return false;
                }
                let mut acc = cost(j) as i128 * d;
                for &(mask, v) in &rows {
                    if character(mask, j as u64) > 0 {
                        acc -= v;
                    } else {
                        acc += v;
                    }
                }
                acc < 0
            });
        }
        (0..self.n_atoms).find(|&j| {
            if self.in_basis[j] {
                return false;
            }
            let mut acc = BigInt::from(cost(j)) * &self.det;
            for (r, v) in scaled.iter().enumerate() {
                if character(self.masks[r], j as u64) > 0 {
                    acc -= v;
                } else {
                    acc += v;
                }
            }
            acc.is_negative()
        })
    }

    /// `adj a_j`, i.e. `det * B^{-1} a_j`, for an atom column.
    fn column(&self, j: usize) -> Vec<BigInt> {
        let signs: Vec<i8> = (0..self.m).map(|r| self.entry(r, j)).collect();
        self.adj
            .iter()
            .map(|row| {
                let mut acc = BigInt::zero();
                for (a, &s) in row.iter().zip(&signs) {
                    if a.is_zero() {
                        continue;
                    }
                    if s > 0 {
                        acc += a;
                    } else {
                        acc -= a;
                    }
                }
                acc
            })
            .collect()
    }

    fn optimize(&mut self, phase: &Phase) -> Result<()> {
        while let Some(j) = self.entering(phase) {
            let u = self.column(j);
            // ratio xb_i / (u_i / det); det > 0 so compare xb_i / u_i
            let mut leave: Option<(usize, Rational)> = None;
            for (i, ui) in u.iter().enumerate() {
                if !ui.is_positive() {
                    continue;
                }
                let ratio = &self.xb[i] / Rational::from_integer(ui.clone());
                let better = match &leave {
                    None => true,
                    Some((l, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*l])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let (l, _) = leave.ok_or_else(|| {
                Error::Internal("unbounded direction in a bounded atom program".into())
            })?;
            self.pivot(l, j, &u);
        }
        Ok(())
    }

    fn pivot(&mut self, l: usize, j: usize, u: &[BigInt]) {
        let pivot = u[l].clone();
        debug_assert!(!pivot.is_zero());
        // x_l' = x_l det / u_l; x_i' = x_i - (u_i / det) x_l'
        let xl = &self.xb[l] * Rational::new(self.det.clone(), pivot.clone());
        for (i, (x, ui)) in self.xb.iter_mut().zip(u).enumerate() {
            if i != l && !ui.is_zero() {
                *x -= &xl * Rational::new(ui.clone(), self.det.clone());
            }
        }
        self.xb[l] = xl;

        let pivot_row = self.adj[l].clone();
        for (i, (row, ui)) in self.adj.iter_mut().zip(u).enumerate() {
            if i == l {
                continue;
            }
            for (a, pl) in row.iter_mut().zip(&pivot_row) {
                if a.is_zero() && (ui.is_zero() || pl.is_zero()) {
                    continue;
                }
                let num = &*a * &pivot - ui * pl;
                *a = num / &self.det;
            }
        }
        self.det = pivot;
        if self.det.is_negative() {
            self.det = -std::mem::take(&mut self.det);
            for row in self.adj.iter_mut() {
                for a in row.iter_mut() {
                    *a = -std::mem::take(a);
                }
            }
        }
        self.in_basis[self.basis[l]] = false;
        self.in_basis[j] = true;
        self.basis[l] = j;
        self.pivots += 1;
    }

    /// Replaces zero-level artificial basics by atom columns where possible;
    /// an artificial that cannot leave marks a redundant row and stays at 0.
    fn drive_out_artificials(&mut self) {
        for l in 0..self.m {
            if self.basis[l] < self.n_atoms {
                continue;
            }
            let found = (0..self.n_atoms).find(|&j| {
                if self.in_basis[j] {
                    return false;
                }
                let mut dot = BigInt::zero();
                for (r, a) in self.adj[l].iter().enumerate() {
                    if self.entry(r, j) > 0 {
                        dot += a;
                    } else {
                        dot -= a;
                    }
                }
                !dot.is_zero()
            });
            if let Some(j) = found {
                let u = self.column(j);
                self.pivot(l, j, &u);
            }
        }
    }

    fn finish(self, costs: &[i64]) -> Result<LpSolution> {
        let mut atoms: Vec<(u64, Rational)> = self
            .basis
            .iter()
            .zip(&self.xb)
            .filter(|(&col, x)| col < self.n_atoms && !x.is_zero())
            .map(|(&col, x)| (col as u64, x.clone()))
            .collect();
        atoms.sort_by_key(|(a, _)| *a);
        if self
            .basis
            .iter()
            .zip(&self.xb)
            .any(|(&col, x)| col >= self.n_atoms && !x.is_zero())
        {
            return Err(Error::Internal(
                "artificial variable left at a nonzero level".into(),
            ));
        }
        let objective: Rational = atoms
            .iter()
            .map(|(a, x)| x * Rational::from_integer(costs[*a as usize].into()))
            .sum();
        let duals: Vec<Rational> = self
            .scaled_duals(&Phase::Two(costs))
            .into_iter()
            .zip(&self.row_sign)
            .map(|(v, &s)| {
                let y = Rational::new(v, self.det.clone());
                if s < 0 {
                    -y
                } else {
                    y
                }
            })
            .collect();
        let dual_objective: Rational = duals
            .iter()
            .zip(&self.program.rows)
            .map(|(yv, (_, b))| yv * b)
            .sum();
        if dual_objective != objective {
            return Err(Error::Internal(
                "primal and dual objectives differ at termination".into(),
            ));
        }
        Ok(LpSolution {
            atoms,
            objective,
            duals,
            pivots: self.pivots,
        })
    }
}
