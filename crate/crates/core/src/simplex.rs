//! Condensed-tableau simplex for `max c·x  s.t.  A x ≤ b, x ≥ 0` with `b ≥ 0`.
//!
//! The tableau keeps one row per constraint and one column per nonbasic
//! variable, so a pivot costs `rows × nvars` no matter how many rows exist.
//! Rows may be appended after a solve (with any sign of right-hand side); the
//! next [`Tableau::solve`] restores feasibility by dual simplex and then
//! re-optimizes with primal simplex. Pricing is Dantzig's rule, switching to
//! Bland's rule after a run of degenerate pivots.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-14;
const DEGENERATE_RUN: usize = 50;

/// A sparse row `Σ a_j x_j ≤ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Basic(usize),
    Nonbasic(usize),
}

/// Variables are numbered structurals first, then the slack of the row with
/// id `r` as `nvars + r`. Tableau row `i` reads `x_{basic[i]} + Σ_k t[i][k]·x_{nonbasic[k]} = rhs[i]`.
#[derive(Debug, Clone)]
pub struct Tableau {
    nvars: usize,
    c: Vec<f64>,
    /// Every row ever added, by id; removed rows are `None`.
    original: Vec<Option<Row>>,
    /// Row-major, `nvars` columns.
    t: Vec<f64>,
    rhs: Vec<f64>,
    /// Reduced costs of the nonbasic columns.
    obj: Vec<f64>,
    value: f64,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    slot: Vec<Slot>,
    pivots: usize,
}

impl Tableau {
    pub fn new(c: Vec<f64>) -> Self {
        let nvars = c.len();
        Tableau {
            nvars,
            obj: c.iter().map(|x| -x).collect(),
            c,
            original: Vec::new(),
            t: Vec::new(),
            rhs: Vec::new(),
            value: 0.0,
            basic: Vec::new(),
            nonbasic: (0..nvars).collect(),
            slot: (0..nvars).map(Slot::Nonbasic).collect(),
            pivots: 0,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn nrows(&self) -> usize {
        self.rhs.len()
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.t[i * self.nvars..(i + 1) * self.nvars]
    }

    /// Appends `row` with a fresh basic slack, expressed in the current basis.
    /// Returns the row's id.
    pub fn add_row(&mut self, row: Row) -> usize {
        let n = self.nvars;
        let mut dense = vec![0.0; n];
        let mut rhs = row.rhs;
        for &(j, a) in &row.coeffs {
            debug_assert!(j < n);
            match self.slot[j] {
                Slot::Nonbasic(k) => dense[k] += a,
                Slot::Basic(i) => {
                    rhs -= a * self.rhs[i];
                    for (d, &x) in dense.iter_mut().zip(self.row(i)) {
                        *d -= a * x;
                    }
                }
            }
        }
        for d in &mut dense {
            if d.abs() < DROP_TOL {
                *d = 0.0;
            }
        }
        let id = self.original.len();
        self.slot.push(Slot::Basic(self.nrows()));
        self.t.extend_from_slice(&dense);
        self.rhs.push(rhs);
        self.basic.push(n + id);
        self.original.push(Some(row));
        id
    }

    /// Slack of row `id` at the current basis (zero when nonbasic).
    pub fn slack(&self, id: usize) -> f64 {
        match self.slot[self.nvars + id] {
            Slot::Basic(i) => self.rhs[i],
            Slot::Nonbasic(_) => 0.0,
        }
    }

    /// Drops the rows in `ids` whose slack is basic; the current basis stays
    /// primal and dual feasible. Returns how many were dropped.
    pub fn remove_slack_rows(&mut self, ids: &[usize]) -> usize {
        let n = self.nvars;
        let mut gone = vec![false; self.nrows()];
        let mut count = 0;
        for &id in ids {
            if let Some(Slot::Basic(i)) = self.slot.get(n + id).copied() {
                if self.original[id].take().is_some() {
                    gone[i] = true;
                    count += 1;
                }
            }
        }
        if count == 0 {
            return 0;
        }
        let mut next = 0;
        for i in 0..self.nrows() {
            if gone[i] {
                continue;
            }
            if next != i {
                self.t.copy_within(i * n..(i + 1) * n, next * n);
                self.rhs[next] = self.rhs[i];
                self.basic[next] = self.basic[i];
            }
            self.slot[self.basic[next]] = Slot::Basic(next);
            next += 1;
        }
        self.t.truncate(next * n);
        self.rhs.truncate(next);
        self.basic.truncate(next);
        count
    }

    /// Optimizes from the current basis.
    pub fn solve(&mut self) -> Result<()> {
        let limit = 50 * (self.nvars + 2 * self.nrows()) + 10_000;
        let mut iters = 0;
        self.dual_phase(&mut iters, limit)?;
        self.primal_phase(&mut iters, limit)?;
        Ok(())
    }

    fn dual_phase(&mut self, iters: &mut usize, limit: usize) -> Result<()> {
        if self.rhs.iter().all(|&b| b >= -FEAS_TOL) {
            return Ok(());
        }
        if self.obj.iter().any(|&d| d < -OPT_TOL) {
            // Rows with negative rhs are only meant to be appended to an optimal tableau.
            return Err(Error::Numerical("infeasible start without dual feasibility".into()));
        }
        let mut degenerate = 0;
        loop {
            let bland = degenerate > DEGENERATE_RUN;
            let infeasible = (0..self.nrows()).filter(|&i| self.rhs[i] < -FEAS_TOL);
            let leave = if bland {
                infeasible.min_by_key(|&i| self.basic[i])
            } else {
                infeasible.min_by(|&a, &b| self.rhs[a].total_cmp(&self.rhs[b]))
            };
            let Some(r) = leave else { return Ok(()) };
            let row = self.row(r);
            let mut enter: Option<(usize, f64)> = None;
            for (k, &a) in row.iter().enumerate() {
                if a < -PIVOT_TOL {
                    let ratio = self.obj[k].max(0.0) / -a;
                    let better = match enter {
                        None => true,
                        Some((bk, best)) => {
                            ratio < best - 1e-12
                                || (ratio <= best + 1e-12
                                    && if bland {
                                        self.nonbasic[k] < self.nonbasic[bk]
                                    } else {
                                        a < row[bk]
                                    })
                        }
                    };
                    if better {
                        enter = Some((k, ratio));
                    }
                }
            }
            let Some((k, ratio)) = enter else {
                return Err(Error::Numerical(format!(
                    "row {r} cannot be made feasible (rhs {})",
                    self.rhs[r]
                )));
            };
            degenerate = if ratio <= 1e-12 { degenerate + 1 } else { 0 };
            self.pivot(r, k);
            *iters += 1;
            if *iters > limit {
                return Err(Error::Numerical(format!("dual simplex exceeded {limit} pivots")));
            }
        }
    }

    fn primal_phase(&mut self, iters: &mut usize, limit: usize) -> Result<()> {
        let n = self.nvars;
        let mut degenerate = 0;
        loop {
            let bland = degenerate > DEGENERATE_RUN;
            let candidates = (0..n).filter(|&k| self.obj[k] < -OPT_TOL);
            let enter = if bland {
                candidates.min_by_key(|&k| self.nonbasic[k])
            } else {
                candidates.min_by(|&a, &b| self.obj[a].total_cmp(&self.obj[b]))
            };
            let Some(k) = enter else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.nrows() {
                let a = self.t[i * n + k];
                if a > PIVOT_TOL {
                    let ratio = self.rhs[i].max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some((li, best)) => {
                            ratio < best - 1e-12
                                || (ratio <= best + 1e-12
                                    && if bland {
                                        self.basic[i] < self.basic[li]
                                    } else {
                                        a > self.t[li * n + k]
                                    })
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(Error::Unbounded);
            };
            degenerate = if ratio <= 1e-12 { degenerate + 1 } else { 0 };
            self.pivot(r, k);
            *iters += 1;
            if *iters > limit {
                return Err(Error::Numerical(format!("primal simplex exceeded {limit} pivots")));
            }
        }
    }

    /// Exchanges the basic variable of row `r` with the nonbasic one of column `s`.
    fn pivot(&mut self, r: usize, s: usize) {
        self.pivots += 1;
        let n = self.nvars;
        let inv = 1.0 / self.t[r * n + s];
        let mut prow = self.row(r).to_vec();
        for a in &mut prow {
            *a *= inv;
        }
        prow[s] = inv;
        let prhs = self.rhs[r] * inv;
        let nz: Vec<usize> = (0..n).filter(|&k| prow[k] != 0.0).collect();
        let dense = nz.len() * 3 > n;
        let update = |row: &mut [f64], f: f64| {
            row[s] = 0.0;
            if dense {
                for (x, &p) in row.iter_mut().zip(&prow) {
                    *x -= f * p;
                }
                for x in row.iter_mut() {
                    if x.abs() < DROP_TOL {
                        *x = 0.0;
                    }
                }
            } else {
                for &k in &nz {
                    let v = row[k] - f * prow[k];
                    row[k] = if v.abs() < DROP_TOL { 0.0 } else { v };
                }
            }
        };
        for (i, row) in self.t.chunks_exact_mut(n).enumerate() {
            if i == r {
                continue;
            }
            let f = row[s];
            if f == 0.0 {
                continue;
            }
            update(row, f);
            self.rhs[i] -= f * prhs;
        }
        let f = self.obj[s];
        if f != 0.0 {
            update(&mut self.obj, f);
            self.value -= f * prhs;
        }
        self.t[r * n..(r + 1) * n].copy_from_slice(&prow);
        self.rhs[r] = prhs;
        let (enter, leave) = (self.nonbasic[s], self.basic[r]);
        self.basic[r] = enter;
        self.nonbasic[s] = leave;
        self.slot[enter] = Slot::Basic(r);
        self.slot[leave] = Slot::Nonbasic(s);
    }

    /// Current structural values, with tiny negatives clamped to zero.
    pub fn solution(&self) -> Vec<f64> {
        (0..self.nvars)
            .map(|j| match self.slot[j] {
                Slot::Basic(i) => self.rhs[i].max(0.0),
                Slot::Nonbasic(_) => 0.0,
            })
            .collect()
    }

    /// `c·x` at the current solution.
    pub fn objective(&self) -> f64 {
        self.solution().iter().zip(&self.c).map(|(x, c)| x * c).sum()
    }

    /// Largest violation of any original row at the current solution.
    pub fn max_violation(&self) -> f64 {
        let x = self.solution();
        self.original
            .iter()
            .flatten()
            .map(|row| {
                let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
                lhs - row.rhs
            })
            .fold(0.0, f64::max)
    }

    /// Rebuilds the tableau from the original rows for the current basis,
    /// discarding accumulated rounding error.
    pub fn reinvert(&mut self) -> Result<()> {
        let target: Vec<usize> = self.basic.iter().copied().filter(|&j| j < self.nvars).collect();
        let mut in_target = vec![false; self.slot.len()];
        for &j in &self.basic {
            in_target[j] = true;
        }
        let mut fresh = Tableau::new(self.c.clone());
        // Keep row ids stable: removed rows are re-added and dropped at once.
        let mut dropped = Vec::new();
        for (id, row) in std::mem::take(&mut self.original).into_iter().enumerate() {
            match row {
                Some(row) => {
                    fresh.add_row(row);
                }
                None => {
                    fresh.add_row(Row { coeffs: Vec::new(), rhs: 0.0 });
                    dropped.push(id);
                }
            }
        }
        fresh.remove_slack_rows(&dropped);
        let n = self.nvars;
        for j in target {
            let Slot::Nonbasic(s) = fresh.slot[j] else {
                return Err(Error::Numerical(format!("column {j} entered twice")));
            };
            let r = (0..fresh.nrows())
                .filter(|&i| !in_target[fresh.basic[i]])
                .max_by(|&a, &b| fresh.t[a * n + s].abs().total_cmp(&fresh.t[b * n + s].abs()))
                .ok_or_else(|| Error::Numerical("basis larger than row count".into()))?;
            if fresh.t[r * n + s].abs() < 1e-12 {
                return Err(Error::Numerical(format!("singular basis at column {j}")));
            }
            fresh.pivot(r, s);
        }
        fresh.pivots = self.pivots;
        *self = fresh;
        Ok(())
    }

    /// Objective value tracked by the tableau (agrees with [`Tableau::objective`] up to rounding).
    pub fn tracked_value(&self) -> f64 {
        self.value
    }
}
