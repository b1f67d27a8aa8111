//! Small dense linear-program solver.
//!
//! Programs are stated over bounded variables with `=`, `<=`, `>=`
//! constraints and solved by a two-phase tableau simplex. Every optimum is
//! checked against the original (untransformed) program before it is
//! returned; a point that fails the check is reported as
//! [`LpError::NumericBreakdown`], never as infeasibility.
//!
//! The solver is deterministic: the same program always produces the same
//! basis, status and objective.

use thiserror::Error;

/// Relative tolerance for constraint satisfaction of a returned optimum.
pub const EPS_LP: f64 = 1e-7;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const DEGENERATE_RUN_BEFORE_BLAND: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

/// Handle to a variable of one [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub terms: Vec<(Var, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    bounds: Vec<(f64, f64)>,
    constraints: Vec<Constraint>,
    direction: Direction,
    objective: Vec<(Var, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective at the optimum; `±inf` when unbounded, NaN when infeasible.
    pub objective: f64,
    /// Per-variable values; empty unless `status == Optimal`.
    pub values: Vec<f64>,
}

impl LpSolution {
    pub fn value(&self, v: Var) -> f64 {
        self.values[v.0]
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("variable #{0} is not declared in this program")]
    UnknownVariable(usize),
    #[error("variable #{var} has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { var: usize, lower: f64, upper: f64 },
    #[error("constraint #{0} has a non-finite coefficient or right-hand side")]
    NonFiniteConstraint(usize),
    #[error("objective has a non-finite coefficient")]
    NonFiniteObjective,
    #[error("simplex did not terminate within {0} pivots (cycling or ill-conditioning)")]
    IterationLimit(usize),
    #[error("numerical breakdown: {0}")]
    NumericBreakdown(String),
}

impl LinearProgram {
    pub fn new(direction: Direction) -> Self {
        LinearProgram {
            bounds: Vec::new(),
            constraints: Vec::new(),
            direction,
            objective: Vec::new(),
        }
    }

    /// Adds a variable with bounds in `ℝ ∪ {±∞}`.
    pub fn add_var(&mut self, lower: f64, upper: f64) -> Var {
        self.bounds.push((lower, upper));
        Var(self.bounds.len() - 1)
    }

    pub fn add_constraint(
        &mut self,
        terms: impl IntoIterator<Item = (Var, f64)>,
        relation: Relation,
        rhs: f64,
    ) {
        self.constraints.push(Constraint {
            terms: terms.into_iter().collect(),
            relation,
            rhs,
        });
    }

    pub fn set_objective(&mut self, terms: impl IntoIterator<Item = (Var, f64)>) {
        self.objective = terms.into_iter().collect();
    }

    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    fn validate(&self) -> Result<(), LpError> {
        for (var, &(lower, upper)) in self.bounds.iter().enumerate() {
            let bad = lower.is_nan()
                || upper.is_nan()
                || lower > upper
                || lower == f64::INFINITY
                || upper == f64::NEG_INFINITY;
            if bad {
                return Err(LpError::InvalidBounds { var, lower, upper });
            }
        }
        let n = self.bounds.len();
        for (ci, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(LpError::NonFiniteConstraint(ci));
            }
            for &(v, a) in &c.terms {
                if v.0 >= n {
                    return Err(LpError::UnknownVariable(v.0));
                }
                if !a.is_finite() {
                    return Err(LpError::NonFiniteConstraint(ci));
                }
            }
        }
        for &(v, a) in &self.objective {
            if v.0 >= n {
                return Err(LpError::UnknownVariable(v.0));
            }
            if !a.is_finite() {
                return Err(LpError::NonFiniteObjective);
            }
        }
        Ok(())
    }

    /// Value of the objective expression at `values`.
    pub fn objective_at(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Largest scaled violation over bounds and constraints at `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (&(lo, hi), &x) in self.bounds.iter().zip(values) {
            worst = worst.max((lo - x) / (1.0 + lo.abs()));
            worst = worst.max((x - hi) / (1.0 + hi.abs()));
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|&(v, a)| a * values[v.0]).sum();
            let excess = match c.relation {
                Relation::Eq => (lhs - c.rhs).abs(),
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
            };
            worst = worst.max(excess / (1.0 + c.rhs.abs()));
        }
        worst
    }
}

/// How an original variable is expressed over nonnegative standard columns.
#[derive(Debug, Clone, Copy)]
enum Substitution {
    /// x = offset + y
    Shifted { col: usize, offset: f64 },
    /// x = offset - y
    Mirrored { col: usize, offset: f64 },
    /// x = y⁺ - y⁻
    Free { pos: usize, neg: usize },
}

struct StandardRow {
    coeffs: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;

    let mut subs = Vec::with_capacity(lp.bounds.len());
    let mut cols = 0usize;
    let mut rows = Vec::new();
    for &(lo, hi) in &lp.bounds {
        let sub = if lo.is_finite() {
            let col = cols;
            cols += 1;
            if hi.is_finite() {
                rows.push(StandardRow {
                    coeffs: vec![(col, 1.0)],
                    relation: Relation::Le,
                    rhs: hi - lo,
                });
            }
            Substitution::Shifted { col, offset: lo }
        } else if hi.is_finite() {
            cols += 1;
            Substitution::Mirrored {
                col: cols - 1,
                offset: hi,
            }
        } else {
            cols += 2;
            Substitution::Free {
                pos: cols - 2,
                neg: cols - 1,
            }
        };
        subs.push(sub);
    }

    let expand = |terms: &[(Var, f64)]| -> (Vec<(usize, f64)>, f64) {
        let mut out = Vec::with_capacity(terms.len());
        let mut constant = 0.0;
        for &(v, a) in terms {
            match subs[v.0] {
                Substitution::Shifted { col, offset } => {
                    out.push((col, a));
                    constant += a * offset;
                }
                Substitution::Mirrored { col, offset } => {
                    out.push((col, -a));
                    constant += a * offset;
                }
                Substitution::Free { pos, neg } => {
                    out.push((pos, a));
                    out.push((neg, -a));
                }
            }
        }
        (out, constant)
    };

    for c in &lp.constraints {
        let (coeffs, constant) = expand(&c.terms);
        rows.push(StandardRow {
            coeffs,
            relation: c.relation,
            rhs: c.rhs - constant,
        });
    }

    let sign = match lp.direction {
        Direction::Maximize => 1.0,
        Direction::Minimize => -1.0,
    };
    let (obj_terms, _) = expand(&lp.objective);
    let mut cost = vec![0.0; cols];
    for (col, a) in obj_terms {
        cost[col] += sign * a;
    }

    let outcome = Simplex::build(cols, &rows).run(&cost)?;
    match outcome {
        Outcome::Infeasible => Ok(LpSolution {
            status: LpStatus::Infeasible,
            objective: f64::NAN,
            values: Vec::new(),
        }),
        Outcome::Unbounded => Ok(LpSolution {
            status: LpStatus::Unbounded,
            objective: sign * f64::INFINITY,
            values: Vec::new(),
        }),
        Outcome::Optimal(y) => {
            let values: Vec<f64> = subs
                .iter()
                .map(|s| match *s {
                    Substitution::Shifted { col, offset } => offset + y[col],
                    Substitution::Mirrored { col, offset } => offset - y[col],
                    Substitution::Free { pos, neg } => y[pos] - y[neg],
                })
                .collect();
            let violation = lp.max_violation(&values);
            if violation.is_nan() || violation > EPS_LP {
                return Err(LpError::NumericBreakdown(format!(
                    "optimum violates the program by {violation:.3e} (relative)"
                )));
            }
            Ok(LpSolution {
                status: LpStatus::Optimal,
                objective: lp.objective_at(&values),
                values,
            })
        }
    }
}

enum Outcome {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

/// Dense tableau. Row-major `m × width`, last column is the right-hand side.
struct Simplex {
    m: usize,
    width: usize,
    structural: usize,
    artificial_start: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
    /// Reduced costs `c_B B⁻¹ A - c`; last entry is the objective value.
    z: Vec<f64>,
    enterable: Vec<bool>,
    pivots: usize,
    pivot_limit: usize,
    scratch: Vec<(usize, f64)>,
}

impl Simplex {
    fn build(structural: usize, rows: &[StandardRow]) -> Self {
        let m = rows.len();
        let mut slacks = 0;
        let mut artificials = 0;
        for r in rows {
            let flip = r.rhs < 0.0;
            match (r.relation, flip) {
                (Relation::Eq, _) => artificials += 1,
                (Relation::Le, false) | (Relation::Ge, true) => slacks += 1,
                _ => {
                    slacks += 1;
                    artificials += 1;
                }
            }
        }
        let artificial_start = structural + slacks;
        let total = artificial_start + artificials;
        let width = total + 1;
        let mut data = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let mut next_slack = structural;
        let mut next_art = artificial_start;
        for (i, r) in rows.iter().enumerate() {
            let flip = r.rhs < 0.0;
            let s = if flip { -1.0 } else { 1.0 };
            let row = &mut data[i * width..(i + 1) * width];
            for &(c, a) in &r.coeffs {
                row[c] += s * a;
            }
            row[total] = s * r.rhs;
            let relation = match (r.relation, flip) {
                (Relation::Eq, _) => Relation::Eq,
                (Relation::Le, false) | (Relation::Ge, true) => Relation::Le,
                _ => Relation::Ge,
            };
            match relation {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
            }
        }
        Simplex {
            m,
            width,
            structural,
            artificial_start,
            data,
            basis,
            z: vec![0.0; width],
            enterable: vec![true; total],
            pivots: 0,
            pivot_limit: 50 * (m + width) + 10_000,
            scratch: Vec::with_capacity(width),
        }
    }

    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.width - 1]
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn run(mut self, cost: &[f64]) -> Result<Outcome, LpError> {
        let total = self.width - 1;
        if self.artificial_start < total {
            let mut phase1 = vec![0.0; total];
            for c in &mut phase1[self.artificial_start..] {
                *c = -1.0;
            }
            self.price(&phase1);
            self.iterate()?;
            let infeasibility = -self.z[total];
            let scale = 1.0
                + (0..self.m)
                    .map(|i| self.rhs(i).abs())
                    .fold(0.0f64, f64::max);
            if infeasibility > EPS_LP * scale {
                return Ok(Outcome::Infeasible);
            }
            self.expel_artificials();
        }
        let mut phase2 = vec![0.0; total];
        phase2[..self.structural].copy_from_slice(cost);
        self.price(&phase2);
        if !self.iterate()? {
            return Ok(Outcome::Unbounded);
        }
        let mut y = vec![0.0; self.structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.structural {
                y[b] = self.rhs(i).max(0.0);
            }
        }
        Ok(Outcome::Optimal(y))
    }

    /// Rebuilds the reduced-cost row for maximizing `cost · x`.
    fn price(&mut self, cost: &[f64]) {
        let w = self.width;
        for (j, zj) in self.z.iter_mut().enumerate() {
            *zj = if j < w - 1 { -cost[j] } else { 0.0 };
        }
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.data[i * w..(i + 1) * w];
            for (zj, &a) in self.z.iter_mut().zip(row) {
                *zj += cb * a;
            }
        }
    }

    /// Pivots to optimality. Returns `false` if the objective is unbounded.
    fn iterate(&mut self) -> Result<bool, LpError> {
        let total = self.width - 1;
        let mut degenerate_run = 0usize;
        loop {
            if self.pivots >= self.pivot_limit {
                return Err(LpError::IterationLimit(self.pivots));
            }
            let bland = degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND;
            let mut entering = None;
            let mut best = -COST_TOL;
            for j in 0..total {
                if !self.enterable[j] || self.z[j] >= best {
                    continue;
                }
                entering = Some(j);
                if bland {
                    break;
                }
                best = self.z[j];
            }
            let Some(col) = entering else {
                return Ok(true);
            };

            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, col);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                let better = match leave {
                    None => true,
                    Some((r, best_ratio, best_a)) => {
                        let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio);
                        if tie {
                            if bland {
                                self.basis[i] < self.basis[r]
                            } else {
                                a > best_a
                            }
                        } else {
                            ratio < best_ratio
                        }
                    }
                };
                if better {
                    leave = Some((i, ratio, a));
                }
            }
            let Some((row, ratio, _)) = leave else {
                return Ok(false);
            };
            if ratio <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(row, col);
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        self.pivots += 1;
        let p = self.data[r * w + c];
        self.scratch.clear();
        {
            let row = &mut self.data[r * w..(r + 1) * w];
            for (j, v) in row.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v /= p;
                    self.scratch.push((j, *v));
                }
            }
            row[c] = 1.0;
        }
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for &(j, v) in &self.scratch {
                row[j] -= f * v;
            }
            row[c] = 0.0;
        }
        let f = self.z[c];
        if f != 0.0 {
            for &(j, v) in &self.scratch {
                self.z[j] -= f * v;
            }
            self.z[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Removes artificial columns after phase one: pivots each basic
    /// artificial out where possible and drops rows that are redundant.
    fn expel_artificials(&mut self) {
        let w = self.width;
        let mut redundant = Vec::new();
        for i in 0..self.m {
            if self.basis[i] < self.artificial_start {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.artificial_start {
                let a = self.at(i, j).abs();
                if a > PIVOT_TOL && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            match best {
                Some((j, _)) => self.pivot(i, j),
                None => redundant.push(i),
            }
        }
        for e in &mut self.enterable[self.artificial_start..] {
            *e = false;
        }
        if redundant.is_empty() {
            return;
        }
        let mut keep = vec![true; self.m];
        for &i in &redundant {
            keep[i] = false;
        }
        let mut data = Vec::with_capacity((self.m - redundant.len()) * w);
        let mut basis = Vec::with_capacity(self.m - redundant.len());
        for i in 0..self.m {
            if keep[i] {
                data.extend_from_slice(&self.data[i * w..(i + 1) * w]);
                basis.push(self.basis[i]);
            }
        }
        self.data = data;
        self.basis = basis;
        self.m -= redundant.len();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bounded_maximum() {
        let mut lp = LinearProgram::new(Direction::Maximize);
        let x = lp.add_var(0.0, f64::INFINITY);
        lp.add_constraint([(x, 1.0)], Relation::Le, 3.0);
        lp.set_objective([(x, 1.0)]);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-12);
        assert!((sol.value(x) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_bounds_infeasible() {
        let mut lp = LinearProgram::new(Direction::Maximize);
        let x = lp.add_var(0.0, f64::INFINITY);
        lp.add_constraint([(x, 1.0)], Relation::Le, -1.0);
        lp.set_objective([(x, 1.0)]);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert!(sol.values.is_empty());
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new(Direction::Maximize);
        let x = lp.add_var(0.0, f64::INFINITY);
        let y = lp.add_var(0.0, f64::INFINITY);
        lp.add_constraint([(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
        lp.set_objective([(x, 1.0)]);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_mirrored_variables() {
        // min x + y, x free, y <= 4, x + y >= -3, x - y = 1
        let mut lp = LinearProgram::new(Direction::Minimize);
        let x = lp.add_var(f64::NEG_INFINITY, f64::INFINITY);
        let y = lp.add_var(f64::NEG_INFINITY, 4.0);
        lp.add_constraint([(x, 1.0), (y, 1.0)], Relation::Ge, -3.0);
        lp.add_constraint([(x, 1.0), (y, -1.0)], Relation::Eq, 1.0);
        lp.set_objective([(x, 1.0), (y, 1.0)]);
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + 3.0).abs() < 1e-9);
        assert!((sol.value(x) + 1.0).abs() < 1e-9);
        assert!((sol.value(y) + 2.0).abs() < 1e-9);
    }

    #[test]
    fn boxed_variable_with_negative_lower() {
        let mut lp = LinearProgram::new(Direction::Minimize);
        let x = lp.add_var(-2.5, 7.0);
        lp.set_objective([(x, 1.0)]);
        let sol = solve(&lp).unwrap();
        assert!((sol.value(x) + 2.5).abs() < 1e-12);
        let mut lp = LinearProgram::new(Direction::Maximize);
        let x = lp.add_var(-2.5, 7.0);
        lp.set_objective([(x, 2.0)]);
        assert!((solve(&lp).unwrap().objective - 14.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let mut lp = LinearProgram::new(Direction::Maximize);
        let x = lp.add_var(0.0, f64::INFINITY);
        let y = lp.add_var(0.0, f64::INFINITY);
        lp.add_constraint([(x, 1.0), (y, 1.0)], Relation::Eq, 2.0);
        lp.add_constraint([(x, 2.0), (y, 2.0)], Relation::Eq, 4.0);
        lp.add_constraint([(x, -1.0), (y, -1.0)], Relation::Eq, -2.0);
        lp.set_objective([(x, 3.0), (y, 1.0)]);
        let sol = solve(&lp).unwrap();
        assert!((sol.objective - 6.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_programs_rejected() {
        let mut lp = LinearProgram::new(Direction::Maximize);
        lp.add_var(1.0, 0.0);
        assert!(matches!(
            solve(&lp),
            Err(LpError::InvalidBounds { var: 0, .. })
        ));

        let mut lp = LinearProgram::new(Direction::Maximize);
        let x = lp.add_var(0.0, 1.0);
        lp.add_constraint([(x, 1.0), (Var(5), 1.0)], Relation::Le, 1.0);
        assert_eq!(solve(&lp).unwrap_err(), LpError::UnknownVariable(5));

        let mut lp = LinearProgram::new(Direction::Maximize);
        let x = lp.add_var(0.0, 1.0);
        lp.add_constraint([(x, f64::NAN)], Relation::Le, 1.0);
        assert_eq!(solve(&lp).unwrap_err(), LpError::NonFiniteConstraint(0));
    }

    /// Arc-pair max-flow on the diamond 0 -> {1,2} -> 3.
    #[test]
    fn diamond_max_flow() {
        let links = [(0, 1), (0, 2), (1, 3), (2, 3)];
        let mut lp = LinearProgram::new(Direction::Maximize);
        let arcs: Vec<(Var, Var)> = links
            .iter()
            .map(|_| {
                (
                    lp.add_var(0.0, f64::INFINITY),
                    lp.add_var(0.0, f64::INFINITY),
                )
            })
            .collect();
        let flow = lp.add_var(0.0, f64::INFINITY);
        for &(fw, bw) in &arcs {
            lp.add_constraint([(fw, 1.0), (bw, 1.0)], Relation::Le, 1.0);
        }
        let demand = [1.0, 0.0, 0.0, -1.0];
        for (node, &d) in demand.iter().enumerate() {
            let mut terms = vec![(flow, -d)];
            for (&(i, j), &(fw, bw)) in links.iter().zip(&arcs) {
                if i == node {
                    terms.push((fw, 1.0));
                    terms.push((bw, -1.0));
                } else if j == node {
                    terms.push((fw, -1.0));
                    terms.push((bw, 1.0));
                }
            }
            lp.add_constraint(terms, Relation::Eq, 0.0);
        }
        lp.set_objective([(flow, 1.0)]);
        let sol = solve(&lp).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-9);
        let again = solve(&lp).unwrap();
        assert_eq!(sol.objective.to_bits(), again.objective.to_bits());
        assert_eq!(sol.values, again.values);
    }

    /// Brute-force optimum of a 2-variable program by vertex enumeration.
    fn vertex_oracle(rows: &[(f64, f64, f64)], boxes: (f64, f64), obj: (f64, f64)) -> Option<f64> {
        let mut lines: Vec<(f64, f64, f64)> = rows.to_vec();
        lines.push((1.0, 0.0, boxes.0));
        lines.push((1.0, 0.0, boxes.1));
        lines.push((0.0, 1.0, boxes.0));
        lines.push((0.0, 1.0, boxes.1));
        let feasible = |x: f64, y: f64| {
            x >= boxes.0 - 1e-9
                && x <= boxes.1 + 1e-9
                && y >= boxes.0 - 1e-9
                && y <= boxes.1 + 1e-9
                && rows.iter().all(|&(a, b, c)| a * x + b * y <= c + 1e-9)
        };
        let mut best: Option<f64> = None;
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a1, b1, c1) = lines[i];
                let (a2, b2, c2) = lines[j];
                let det = a1 * b2 - a2 * b1;
                if det.abs() < 1e-9 {
                    continue;
                }
                let x = (c1 * b2 - c2 * b1) / det;
                let y = (a1 * c2 - a2 * c1) / det;
                if feasible(x, y) {
                    let v = obj.0 * x + obj.1 * y;
                    best = Some(best.map_or(v, |b: f64| b.max(v)));
                }
            }
        }
        best
    }

    proptest! {
        #[test]
        fn matches_vertex_enumeration(
            rows in proptest::collection::vec((-3i32..=3, -3i32..=3, -6i32..=6), 1..5),
            obj in (-3i32..=3, -3i32..=3),
        ) {
            let rows: Vec<(f64, f64, f64)> = rows
                .into_iter()
                .map(|(a, b, c)| (a as f64, b as f64, c as f64))
                .collect();
            let obj = (obj.0 as f64, obj.1 as f64);
            let mut lp = LinearProgram::new(Direction::Maximize);
            let x = lp.add_var(-5.0, 5.0);
            let y = lp.add_var(-5.0, 5.0);
            for &(a, b, c) in &rows {
                lp.add_constraint([(x, a), (y, b)], Relation::Le, c);
            }
            lp.set_objective([(x, obj.0), (y, obj.1)]);
            let sol = solve(&lp).unwrap();
            match vertex_oracle(&rows, (-5.0, 5.0), obj) {
                None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
                Some(best) => {
                    prop_assert_eq!(sol.status, LpStatus::Optimal);
                    prop_assert!((sol.objective - best).abs() <= 1e-7 * (1.0 + best.abs()));
                    prop_assert!(lp.max_violation(&sol.values) <= EPS_LP);
                }
            }
        }
    }
}
