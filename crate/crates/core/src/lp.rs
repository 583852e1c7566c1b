//! Dense two-phase simplex for small standard-form programs
//! `min c·x  s.t.  A x = b,  x ≥ 0`, with Bland's anti-cycling rule.

use crate::error::{Error, Result};

/// Ratios closer than this are ties, broken by lowest basic index.
const RATIO_TIE: f64 = 1e-14;

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    /// Smallest magnitude accepted as a pivot element.
    pub pivot_tolerance: f64,
    /// Reduced costs above `-optimality_tolerance` count as nonnegative.
    pub optimality_tolerance: f64,
    /// Phase-one objective at or below this is considered feasible.
    pub feasibility_tolerance: f64,
    pub max_pivots: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            pivot_tolerance: 1e-11,
            optimality_tolerance: 1e-12,
            feasibility_tolerance: 1e-9,
            max_pivots: 50_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        objective: f64,
    },
    /// Phase one ended with a positive sum of artificials.
    Infeasible {
        infeasibility: f64,
    },
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseOne {
    pub feasible: bool,
    /// Sum of the artificial variables at the phase-one optimum.
    pub infeasibility: f64,
    /// Values of the structural variables at the phase-one optimum.
    pub x: Vec<f64>,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// Reduced costs; last entry holds minus the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
    structural: usize,
    pivots: usize,
    opts: SimplexOptions,
}

impl Tableau {
    fn new(a: &[Vec<f64>], b: &[f64], opts: SimplexOptions) -> Result<Self> {
        let m = a.len();
        if b.len() != m {
            return Err(Error::InvalidInput(format!(
                "{m} constraint rows but {} right-hand sides",
                b.len()
            )));
        }
        let n = a.first().map_or(0, Vec::len);
        if a.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput("ragged constraint matrix".into()));
        }
        let width = n + m + 1;
        let mut rows = Vec::with_capacity(m);
        for (i, (row, &rhs)) in a.iter().zip(b).enumerate() {
            let flip = if rhs < 0.0 { -1.0 } else { 1.0 };
            let mut r = vec![0.0; width];
            for (dst, src) in r.iter_mut().zip(row) {
                *dst = flip * src;
            }
            r[n + i] = 1.0;
            r[width - 1] = flip * rhs;
            rows.push(r);
        }
        // Phase-one costs: 1 on each artificial, reduced against the artificial basis.
        let mut cost = vec![0.0; width];
        cost[n..n + m].fill(1.0);
        for r in &rows {
            for (c, v) in cost.iter_mut().zip(r) {
                *c -= v;
            }
        }
        Ok(Self {
            rows,
            cost,
            basis: (n..n + m).collect(),
            structural: n,
            pivots: 0,
            opts,
        })
    }

    fn width(&self) -> usize {
        self.cost.len()
    }

    fn pivot(&mut self, row: usize, col: usize) -> Result<()> {
        self.pivots += 1;
        if self.pivots > self.opts.max_pivots {
            return Err(Error::SolverIterationCap {
                iterations: self.opts.max_pivots,
            });
        }
        let p = self.rows[row][col];
        if p.abs() < self.opts.pivot_tolerance {
            return Err(Error::SolverNumerical(format!("pivot {p:e} too small")));
        }
        for v in self.rows[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[col] = 0.0;
        }
        self.basis[row] = col;
        Ok(())
    }

    /// Runs Bland's rule over columns `< allowed`; returns false if unbounded.
    fn iterate(&mut self, allowed: usize) -> Result<bool> {
        let rhs = self.width() - 1;
        loop {
            let Some(enter) =
                (0..allowed).find(|&j| self.cost[j] < -self.opts.optimality_tolerance)
            else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, r) in self.rows.iter().enumerate() {
                let a = r[enter];
                if a > self.opts.pivot_tolerance {
                    let ratio = r[rhs] / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - RATIO_TIE
                                || (ratio <= lr + RATIO_TIE && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, enter)?,
                None => return Ok(false),
            }
        }
    }

    fn structural_values(&self) -> Vec<f64> {
        let rhs = self.width() - 1;
        let mut x = vec![0.0; self.structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.structural {
                x[b] = self.rows[i][rhs].max(0.0);
            }
        }
        x
    }

    fn artificial_sum(&self) -> f64 {
        let rhs = self.width() - 1;
        self.basis
            .iter()
            .zip(&self.rows)
            .filter(|(b, _)| **b >= self.structural)
            .map(|(_, r)| r[rhs])
            .sum()
    }

    /// Pivots zero-level artificials out of the basis where possible.
    fn drive_out_artificials(&mut self) -> Result<()> {
        for i in 0..self.rows.len() {
            if self.basis[i] < self.structural {
                continue;
            }
            let col =
                (0..self.structural).find(|&j| self.rows[i][j].abs() > self.opts.pivot_tolerance);
            if let Some(col) = col {
                self.pivot(i, col)?;
            }
        }
        Ok(())
    }

    fn phase_one(&mut self) -> Result<PhaseOne> {
        let all = self.width() - 1;
        self.iterate(all)?;
        let infeasibility = self.artificial_sum().max(0.0);
        Ok(PhaseOne {
            feasible: infeasibility <= self.opts.feasibility_tolerance,
            infeasibility,
            x: self.structural_values(),
        })
    }

    fn install_costs(&mut self, c: &[f64]) {
        let width = self.width();
        let mut cost = vec![0.0; width];
        cost[..self.structural].copy_from_slice(c);
        for (r, &b) in self.rows.iter().zip(&self.basis) {
            let cb = if b < self.structural { c[b] } else { 0.0 };
            if cb != 0.0 {
                for (v, rv) in cost.iter_mut().zip(r) {
                    *v -= cb * rv;
                }
            }
        }
        for &b in &self.basis {
            cost[b] = 0.0;
        }
        self.cost = cost;
    }
}

/// Phase one only: finds `x ≥ 0` with `A x = b` or reports the least
/// achievable sum of (one-sided) constraint residuals.
pub fn phase_one(a: &[Vec<f64>], b: &[f64], opts: SimplexOptions) -> Result<PhaseOne> {
    Tableau::new(a, b, opts)?.phase_one()
}

/// Full two-phase solve of `min c·x  s.t.  A x = b, x ≥ 0`.
pub fn minimize(a: &[Vec<f64>], b: &[f64], c: &[f64], opts: SimplexOptions) -> Result<LpOutcome> {
    let mut t = Tableau::new(a, b, opts)?;
    if c.len() != t.structural {
        return Err(Error::InvalidInput(format!(
            "{} cost coefficients for {} variables",
            c.len(),
            t.structural
        )));
    }
    let p1 = t.phase_one()?;
    if !p1.feasible {
        return Ok(LpOutcome::Infeasible {
            infeasibility: p1.infeasibility,
        });
    }
    t.drive_out_artificials()?;
    t.install_costs(c);
    let structural = t.structural;
    if !t.iterate(structural)? {
        return Ok(LpOutcome::Unbounded);
    }
    let x = t.structural_values();
    let objective = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    Ok(LpOutcome::Optimal { x, objective })
}
