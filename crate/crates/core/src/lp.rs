//! Dense two-phase simplex over a [`Scalar`], with Bland's rule.
//!
//! Problems are in standard equality form: minimize `c·x` subject to
//! `A x = b`, `x ≥ 0`. Infeasibility is reported with a Farkas vector `y`
//! satisfying `yᵀA ≤ 0` and `yᵀb > 0`, read off the phase-one duals.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<S> {
    Optimal { x: Vec<S>, value: S },
    /// `yᵀA ≤ 0` componentwise and `yᵀb > 0`.
    Infeasible { farkas: Vec<S> },
    Unbounded,
}

impl<S> LpOutcome<S> {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
    cost: Vec<S>,
    value: S,
    n: usize,
}

impl<S: Scalar> Tableau<S> {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() / p.clone();
            }
        }
        self.rhs[r] = self.rhs[r].clone() / p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][col].clone();
            if f.is_zero() {
                continue;
            }
            for &j in &nz {
                let v = self.rows[i][j].clone() - f.clone() * pivot_row[j].clone();
                self.rows[i][j] = if S::EXACT || !v.is_negligible() { v } else { S::zero() };
            }
            self.rows[i][col] = S::zero();
            self.rhs[i] = self.rhs[i].clone() - f * pivot_rhs.clone();
        }
        let f = self.cost[col].clone();
        if !f.is_zero() {
            for &j in &nz {
                let v = self.cost[j].clone() - f.clone() * pivot_row[j].clone();
                self.cost[j] = if S::EXACT || !v.is_negligible() { v } else { S::zero() };
            }
            self.cost[col] = S::zero();
            self.value = self.value.clone() - f * pivot_rhs;
        }
        self.basis[r] = col;
    }

    /// Runs Bland iterations over the columns `< limit`. Returns false on
    /// unboundedness.
    fn run(&mut self, limit: usize) -> bool {
        loop {
            let entering = (0..limit).find(|&j| self.cost[j].is_negative());
            let Some(col) = entering else { return true };
            let mut best: Option<(usize, S)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs[i].clone() / a.clone();
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br && !ratio.approx_eq(br)
                            || ratio.approx_eq(br) && self.basis[i] < self.basis[*bi]
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }
}

/// Minimizes `c·x` subject to `A x = b`, `x ≥ 0`.
pub fn minimize<S: Scalar>(a: &[Vec<S>], b: &[S], c: &[S]) -> Result<LpOutcome<S>> {
    let m = a.len();
    if b.len() != m {
        return Err(Error::DimMismatch(m, b.len()));
    }
    let n = c.len();
    if let Some(row) = a.iter().find(|r| r.len() != n) {
        return Err(Error::DimMismatch(row.len(), n));
    }

    let mut sign = vec![false; m];
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative() || (!S::EXACT && b[i] < S::zero());
        sign[i] = flip;
        let mut row: Vec<S> = if flip { a[i].iter().map(|v| -v.clone()).collect() } else { a[i].clone() };
        row.extend((0..m).map(|k| if k == i { S::one() } else { S::zero() }));
        rows.push(row);
        rhs.push(if flip { -b[i].clone() } else { b[i].clone() });
    }
    let width = n + m;
    let mut cost = vec![S::zero(); width];
    let mut value = S::zero();
    for i in 0..m {
        for j in 0..n {
            if !rows[i][j].is_zero() {
                cost[j] = cost[j].clone() - rows[i][j].clone();
            }
        }
        value = value - rhs[i].clone();
    }
    let mut t = Tableau { rows, rhs, basis: (n..n + m).collect(), cost, value, n };
    t.run(width);

    // t.value holds minus the phase-one optimum.
    if t.value.is_negative() {
        let farkas = (0..m)
            .map(|i| {
                let y = S::one() - t.cost[n + i].clone();
                if sign[i] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        return Ok(LpOutcome::Infeasible { farkas });
    }

    // Drive basic artificials out; rows with no usable pivot are redundant.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_negligible()) {
                Some(col) => {
                    t.pivot(i, col);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.rhs.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    let mut cost: Vec<S> = c.to_vec();
    cost.extend((0..m).map(|_| S::zero()));
    let mut value = S::zero();
    for (r, &bj) in t.basis.iter().enumerate() {
        let cb = c[bj].clone();
        if cb.is_zero() {
            continue;
        }
        for j in 0..width {
            if !t.rows[r][j].is_zero() {
                cost[j] = cost[j].clone() - cb.clone() * t.rows[r][j].clone();
            }
        }
        value = value - cb * t.rhs[r].clone();
    }
    t.cost = cost;
    t.value = value;
    if !t.run(t.n) {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = vec![S::zero(); n];
    for (r, &bj) in t.basis.iter().enumerate() {
        if bj < n {
            x[bj] = t.rhs[r].clone();
        }
    }
    let value = -t.value;
    Ok(LpOutcome::Optimal { x, value })
}

pub fn maximize<S: Scalar>(a: &[Vec<S>], b: &[S], c: &[S]) -> Result<LpOutcome<S>> {
    let neg: Vec<S> = c.iter().map(|v| -v.clone()).collect();
    Ok(match minimize(a, b, &neg)? {
        LpOutcome::Optimal { x, value } => LpOutcome::Optimal { x, value: -value },
        other => other,
    })
}

/// Feasibility of `A x = b`, `x ≥ 0`.
pub fn feasible<S: Scalar>(a: &[Vec<S>], b: &[S]) -> Result<LpOutcome<S>> {
    let n = a.first().map_or(0, |r| r.len());
    minimize(a, b, &vec![S::zero(); n])
}

/// Feasibility of `G x ≤ h`, `x ≥ 0`. A Farkas vector `y ≥ 0` with
/// `yᵀG ≥ 0` and `yᵀh < 0` is returned on infeasibility.
pub fn feasible_inequalities<S: Scalar>(g: &[Vec<S>], h: &[S]) -> Result<LpOutcome<S>> {
    let m = g.len();
    let n = g.first().map_or(0, |r| r.len());
    let a: Vec<Vec<S>> = g
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..m).map(|k| if k == i { S::one() } else { S::zero() }));
            r
        })
        .collect();
    Ok(match feasible(&a, h)? {
        LpOutcome::Optimal { mut x, value } => {
            x.truncate(n);
            LpOutcome::Optimal { x, value }
        }
        LpOutcome::Infeasible { farkas } => LpOutcome::Infeasible { farkas: farkas.into_iter().map(|v| -v).collect() },
        LpOutcome::Unbounded => LpOutcome::Unbounded,
    })
}

/// Checks `x ≥ 0` and `A x = b` (up to tolerance in float mode).
pub fn verify_solution<S: Scalar>(a: &[Vec<S>], b: &[S], x: &[S]) -> bool {
    x.iter().all(|v| !v.is_negative())
        && a.iter().zip(b).all(|(row, bi)| {
            let lhs: S = row.iter().zip(x).map(|(p, q)| p.clone() * q.clone()).sum();
            lhs.approx_eq(bi)
        })
}

/// Checks `yᵀA ≤ 0` and `yᵀb > 0`.
pub fn verify_farkas<S: Scalar>(a: &[Vec<S>], b: &[S], y: &[S]) -> bool {
    let n = a.first().map_or(0, |r| r.len());
    let yb: S = y.iter().zip(b).map(|(p, q)| p.clone() * q.clone()).sum();
    yb.is_positive()
        && (0..n).all(|j| {
            let v: S = y.iter().zip(a).map(|(p, row)| p.clone() * row[j].clone()).sum();
            !v.is_positive()
        })
}
