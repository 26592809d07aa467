//! Exact rational linear programming.
//!
//! A dense simplex solver with Bland's pivoting rule over `BigRational`
//! (deterministic, cycle-free) plus a Fourier-Motzkin eliminator that keeps
//! track of strict inequalities and can reconstruct witness points. The
//! simplex handles the larger feasibility systems; Fourier-Motzkin is used on
//! low-dimensional sign-chamber problems where strictness matters.

use crate::linalg::{dot, Rat};
use num::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Rat>,
    pub rel: Rel,
    pub rhs: Rat,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rat>, rel: Rel, rhs: Rat) -> Self {
        Constraint { coeffs, rel, rhs }
    }

    pub fn holds_at(&self, x: &[Rat]) -> bool {
        let lhs = dot(&self.coeffs, x);
        match self.rel {
            Rel::Le => lhs <= self.rhs,
            Rel::Ge => lhs >= self.rhs,
            Rel::Eq => lhs == self.rhs,
        }
    }
}

/// A linear program over free rational variables.
#[derive(Clone, Debug, Default)]
pub struct Lp {
    pub num_vars: usize,
    pub constraints: Vec<Constraint>,
}

impl Lp {
    pub fn new(num_vars: usize) -> Self {
        Lp { num_vars, constraints: Vec::new() }
    }

    pub fn push(&mut self, coeffs: Vec<Rat>, rel: Rel, rhs: Rat) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.constraints.push(Constraint::new(coeffs, rel, rhs));
    }

    pub fn is_feasible_point(&self, x: &[Rat]) -> bool {
        x.len() == self.num_vars && self.constraints.iter().all(|c| c.holds_at(x))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { x: Vec<Rat>, value: Rat },
}

/// Finds any feasible point of the program, or `None` if it is infeasible.
pub fn feasible_point(lp: &Lp) -> Option<Vec<Rat>> {
    match minimize(lp, &vec![Rat::zero(); lp.num_vars]) {
        LpOutcome::Optimal { x, .. } => Some(x),
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
}

/// Minimizes `objective . x` subject to the constraints of `lp`. All
/// variables are free; internally each is split into a difference of two
/// nonnegative variables and the tableau is solved by a two-phase simplex
/// with Bland's rule, making the returned basic solution deterministic.
pub fn minimize(lp: &Lp, objective: &[Rat]) -> LpOutcome {
    assert_eq!(objective.len(), lp.num_vars);
    standardize(lp, objective).solve()
}

struct Tableau {
    /// rows[i] = coefficients of structural + slack columns, then rhs.
    rows: Vec<Vec<Rat>>,
    /// Column index of the basic variable of each row.
    basis: Vec<usize>,
    ncols: usize,
}

/// Splits x_j = p_j - q_j with p, q >= 0 and adds one slack per inequality.
fn standardize(lp: &Lp, objective: &[Rat]) -> TableauProblem {
    let split = 2 * lp.num_vars;
    let nslack = lp.constraints.iter().filter(|c| c.rel != Rel::Eq).count();
    let ncols = split + nslack;
    let mut rows = Vec::with_capacity(lp.constraints.len());
    let mut slack_at = 0usize;
    for c in &lp.constraints {
        let mut row = vec![Rat::zero(); ncols + 1];
        for (j, a) in c.coeffs.iter().enumerate() {
            row[2 * j] = a.clone();
            row[2 * j + 1] = -a.clone();
        }
        match c.rel {
            Rel::Le => {
                row[split + slack_at] = Rat::one();
                slack_at += 1;
            }
            Rel::Ge => {
                row[split + slack_at] = -Rat::one();
                slack_at += 1;
            }
            Rel::Eq => {}
        }
        row[ncols] = c.rhs.clone();
        if row[ncols].is_negative() {
            for x in row.iter_mut() {
                *x = -x.clone();
            }
        }
        rows.push(row);
    }
    TableauProblem { rows, ncols, num_vars: lp.num_vars, objective: objective.to_vec() }
}

struct TableauProblem {
    rows: Vec<Vec<Rat>>,
    ncols: usize,
    num_vars: usize,
    objective: Vec<Rat>,
}

impl TableauProblem {
    fn solve(self) -> LpOutcome {
        let m = self.rows.len();
        let ncols = self.ncols;
        // Phase one: append one artificial variable per row.
        let rows: Vec<Vec<Rat>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = r[..ncols].to_vec();
                row.extend((0..m).map(|k| {
                    if k == i {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                }));
                row.push(r[ncols].clone());
                row
            })
            .collect();
        let total = ncols + m;
        let basis: Vec<usize> = (ncols..ncols + m).collect();
        let mut t = Tableau { rows, basis, ncols: total };

        // Phase-one objective: sum of artificials.
        let mut cost = vec![Rat::zero(); total];
        for c in cost.iter_mut().skip(ncols) {
            *c = Rat::one();
        }
        if t.run_simplex(&cost) == SimplexRun::Unbounded {
            unreachable!("phase one objective is bounded below by zero");
        }
        if !t.objective_value(&cost).is_zero() {
            return LpOutcome::Infeasible;
        }
        // Drive remaining artificials out of the basis or drop their rows.
        let mut i = 0;
        while i < t.basis.len() {
            if t.basis[i] >= ncols {
                if let Some(j) = (0..ncols).find(|&j| !t.rows[i][j].is_zero()) {
                    t.pivot(i, j);
                } else {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
        // Forbid artificial columns from re-entering.
        for row in t.rows.iter_mut() {
            for x in row.iter_mut().skip(ncols).take(total - ncols) {
                *x = Rat::zero();
            }
        }

        // Phase two on the real objective (in split coordinates).
        let mut cost2 = vec![Rat::zero(); total];
        for (j, c) in self.objective.iter().enumerate() {
            cost2[2 * j] = c.clone();
            cost2[2 * j + 1] = -c.clone();
        }
        match t.run_simplex(&cost2) {
            SimplexRun::Unbounded => LpOutcome::Unbounded,
            SimplexRun::Optimal => {
                let split = t.extract();
                let x: Vec<Rat> = (0..self.num_vars)
                    .map(|j| &split[2 * j] - &split[2 * j + 1])
                    .collect();
                let value = dot(&self.objective, &x);
                LpOutcome::Optimal { x, value }
            }
        }
    }
}

#[derive(PartialEq, Eq)]
enum SimplexRun {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rat {
        let n = self.ncols;
        &self.rows[i][n]
    }

    fn objective_value(&self, cost: &[Rat]) -> Rat {
        self.basis
            .iter()
            .enumerate()
            .map(|(i, &b)| &cost[b] * self.rhs(i))
            .sum()
    }

    fn reduced_cost(&self, cost: &[Rat], j: usize) -> Rat {
        let direct = cost[j].clone();
        let through_basis: Rat = self
            .basis
            .iter()
            .enumerate()
            .map(|(i, &b)| &cost[b] * &self.rows[i][j])
            .sum();
        direct - through_basis
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].clone();
        let width = self.ncols + 1;
        for x in self.rows[row].iter_mut() {
            *x = &*x / &inv;
        }
        for i in 0..self.rows.len() {
            if i != row && !self.rows[i][col].is_zero() {
                let f = self.rows[i][col].clone();
                for c in 0..width {
                    let sub = &f * &self.rows[row][c];
                    self.rows[i][c] = &self.rows[i][c] - sub;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Bland's rule: entering column is the lowest-index column with negative
    /// reduced cost; the leaving row breaks ratio ties by lowest basic column.
    fn run_simplex(&mut self, cost: &[Rat]) -> SimplexRun {
        loop {
            let entering = (0..self.ncols)
                .find(|&j| !self.basis.contains(&j) && self.reduced_cost(cost, j).is_negative());
            let Some(col) = entering else {
                return SimplexRun::Optimal;
            };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][col].is_positive() {
                    let ratio = self.rhs(i) / &self.rows[i][col];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return SimplexRun::Unbounded;
            };
            self.pivot(row, col);
        }
    }

    fn extract(&self) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); self.ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            x[b] = self.rhs(i).clone();
        }
        x
    }
}

/// `coeffs . x (< | <=) rhs`, with `strict` selecting the strict form.
#[derive(Clone, Debug)]
pub struct StrictIneq {
    pub coeffs: Vec<Rat>,
    pub rhs: Rat,
    pub strict: bool,
}

impl StrictIneq {
    pub fn le(coeffs: Vec<Rat>, rhs: Rat) -> Self {
        StrictIneq { coeffs, rhs, strict: false }
    }

    pub fn lt(coeffs: Vec<Rat>, rhs: Rat) -> Self {
        StrictIneq { coeffs, rhs, strict: true }
    }

    pub fn holds_at(&self, x: &[Rat]) -> bool {
        let lhs = dot(&self.coeffs, x);
        if self.strict {
            lhs < self.rhs
        } else {
            lhs <= self.rhs
        }
    }
}

/// Decides feasibility of a system of (possibly strict) linear inequalities
/// by Fourier-Motzkin elimination and returns a rational witness point when
/// the system is solvable.
pub fn fm_witness(ineqs: &[StrictIneq], num_vars: usize) -> Option<Vec<Rat>> {
    assert!(ineqs.iter().all(|c| c.coeffs.len() == num_vars));
    let mut levels: Vec<Vec<StrictIneq>> = vec![ineqs.to_vec()];
    for var in (0..num_vars).rev() {
        let current = levels.last().unwrap();
        let mut next = Vec::new();
        let mut lowers = Vec::new();
        let mut uppers = Vec::new();
        for c in current {
            let a = &c.coeffs[var];
            if a.is_zero() {
                next.push(StrictIneq {
                    coeffs: c.coeffs[..var].to_vec(),
                    rhs: c.rhs.clone(),
                    strict: c.strict,
                });
            } else if a.is_positive() {
                uppers.push(c.clone());
            } else {
                lowers.push(c.clone());
            }
        }
        for lo in &lowers {
            for up in &uppers {
                // (-a_l) and a_u are positive; combine to eliminate var.
                let al = -lo.coeffs[var].clone();
                let au = up.coeffs[var].clone();
                let coeffs: Vec<Rat> = (0..var)
                    .map(|j| &lo.coeffs[j] * &au + &up.coeffs[j] * &al)
                    .collect();
                let rhs = &lo.rhs * &au + &up.rhs * &al;
                next.push(StrictIneq { coeffs, rhs, strict: lo.strict || up.strict });
            }
        }
        levels.push(next);
    }
    // The innermost level has no variables: every row must hold at the origin.
    for c in levels.last().unwrap() {
        let ok = if c.strict {
            c.rhs.is_positive()
        } else {
            !c.rhs.is_negative()
        };
        if !ok {
            return None;
        }
    }
    // Back-substitute a witness from the inside out.
    let mut x: Vec<Rat> = Vec::new();
    for var in 0..num_vars {
        let level = &levels[num_vars - 1 - var];
        let mut lower: Option<(Rat, bool)> = None;
        let mut upper: Option<(Rat, bool)> = None;
        for c in level {
            let a = &c.coeffs[var];
            if a.is_zero() {
                continue;
            }
            let partial: Rat = (0..var).map(|j| &c.coeffs[j] * &x[j]).sum();
            let bound = (&c.rhs - partial) / a;
            if a.is_positive() {
                let tighter = upper
                    .as_ref()
                    .is_none_or(|(u, us)| bound < *u || (bound == *u && c.strict && !us));
                if tighter {
                    upper = Some((bound, c.strict));
                }
            } else {
                let tighter = lower
                    .as_ref()
                    .is_none_or(|(l, ls)| bound > *l || (bound == *l && c.strict && !ls));
                if tighter {
                    lower = Some((bound, c.strict));
                }
            }
        }
        let value = match (&lower, &upper) {
            (Some((l, _)), Some((u, _))) => (l + u) / crate::linalg::rint(2),
            (Some((l, ls)), None) => {
                if *ls {
                    l + Rat::one()
                } else {
                    l.clone()
                }
            }
            (None, Some((u, us))) => {
                if *us {
                    u - Rat::one()
                } else {
                    u.clone()
                }
            }
            (None, None) => Rat::zero(),
        };
        x.push(value);
    }
    debug_assert!(ineqs.iter().all(|c| c.holds_at(&x)));
    Some(x)
}
