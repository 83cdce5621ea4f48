//! The revenue-optimal menu for a finite distribution, as a linear program.
//!
//! Variables are a lottery `x_i` and payment `p_i` per support point. Rows:
//!
//! * IC `(i, j)`: `v_i·x_i − p_i ≥ v_i·x_j − p_j` for `i ≠ j`;
//! * IR `i`: `v_i·x_i − p_i ≥ 0`;
//! * lottery `i`: `Σ_ℓ x_{i,ℓ} ≤ 1`;
//! * price bound `i`: `p_i ≤ Σ_ℓ v_{i,ℓ}`.
//!
//! The objective is `Σ w_i p_i`. The solver starts from IR, lottery and bound
//! rows and adds violated IC rows until none remain, then checks every row.

use std::fmt::Write as _;

use crate::distribution::ExplicitDistribution;
use crate::error::{Error, Result};
use crate::model::{dot, pick, Choice, Lottery, Menu, MenuEntry, Valuation};
use crate::simplex::{Row, Tableau};

/// Default solver tolerance.
pub const SOLVE_TOL: f64 = 1e-7;
/// Default tolerance for merging near-identical menu entries.
pub const DEDUP_TOL: f64 = 1e-7;

/// IC rows added per support point per separation round.
const CUTS_PER_POINT: usize = 1;
/// IC rows slack for this many consecutive rounds are dropped again.
const PURGE_AFTER: u32 = 2;
/// Rounds after which rows are no longer dropped, so the cut set only grows.
const PURGE_ROUNDS: usize = 200;

/// Which family a constraint row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    Ic { i: usize, j: usize },
    Ir { i: usize },
    Lottery { i: usize },
    PriceBound { i: usize },
}

/// The menu LP for one explicit distribution.
#[derive(Debug, Clone)]
pub struct MenuLp {
    n: usize,
    m: usize,
    values: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// Builds the LP; it is never materialized densely unless dumped.
pub fn build_lp(d: &ExplicitDistribution) -> MenuLp {
    MenuLp {
        n: d.len(),
        m: d.m(),
        values: d.support().iter().map(|v| v.values().to_vec()).collect(),
        weights: d.weights().to_vec(),
    }
}

impl MenuLp {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `n(m + 1)`.
    pub fn num_variables(&self) -> usize {
        self.n * (self.m + 1)
    }

    pub fn num_ic_rows(&self) -> usize {
        self.n * (self.n - 1)
    }

    pub fn num_ir_rows(&self) -> usize {
        self.n
    }

    /// Column of `x_{i,ℓ}`.
    pub fn x_var(&self, i: usize, l: usize) -> usize {
        i * (self.m + 1) + l
    }

    /// Column of `p_i`.
    pub fn p_var(&self, i: usize) -> usize {
        i * (self.m + 1) + self.m
    }

    pub fn objective(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.num_variables()];
        for i in 0..self.n {
            c[self.p_var(i)] = self.weights[i];
        }
        c
    }

    /// Row in `a·z ≤ b` form over the full variable layout.
    pub fn row(&self, kind: RowKind) -> Row {
        let mut coeffs = Vec::new();
        let rhs = match kind {
            RowKind::Ic { i, j } => {
                for l in 0..self.m {
                    let v = self.values[i][l];
                    coeffs.push((self.x_var(i, l), -v));
                    coeffs.push((self.x_var(j, l), v));
                }
                coeffs.push((self.p_var(i), 1.0));
                coeffs.push((self.p_var(j), -1.0));
                0.0
            }
            RowKind::Ir { i } => {
                for l in 0..self.m {
                    coeffs.push((self.x_var(i, l), -self.values[i][l]));
                }
                coeffs.push((self.p_var(i), 1.0));
                0.0
            }
            RowKind::Lottery { i } => {
                for l in 0..self.m {
                    coeffs.push((self.x_var(i, l), 1.0));
                }
                1.0
            }
            RowKind::PriceBound { i } => {
                coeffs.push((self.p_var(i), 1.0));
                self.values[i].iter().sum()
            }
        };
        Row { coeffs, rhs }
    }

    /// All rows: IC in `(i, j)` order, then IR, lottery and price-bound rows.
    pub fn row_kinds(&self) -> Vec<RowKind> {
        let mut kinds = Vec::with_capacity(self.n * (self.n + 2));
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    kinds.push(RowKind::Ic { i, j });
                }
            }
        }
        kinds.extend((0..self.n).map(|i| RowKind::Ir { i }));
        kinds.extend((0..self.n).map(|i| RowKind::Lottery { i }));
        kinds.extend((0..self.n).map(|i| RowKind::PriceBound { i }));
        kinds
    }

    /// Dense text dump: a header comment, the objective, then one line per
    /// row as `coefficients <= rhs`.
    pub fn to_dense_text(&self) -> String {
        let nv = self.num_variables();
        let kinds = self.row_kinds();
        let mut out = String::new();
        let _ = writeln!(out, "# n={} m={} vars={} rows={}", self.n, self.m, nv, kinds.len());
        let _ = writeln!(out, "# variables: x[i][1..m], p[i] for each support point i");
        let c: Vec<String> = self.objective().iter().map(|x| format!("{x:e}")).collect();
        let _ = writeln!(out, "max {}", c.join(" "));
        for kind in kinds {
            let row = self.row(kind);
            let mut dense = vec![0.0; nv];
            for (j, a) in row.coeffs {
                dense[j] += a;
            }
            let a: Vec<String> = dense.iter().map(|x| format!("{x:e}")).collect();
            let _ = writeln!(out, "{} <= {:e}", a.join(" "), row.rhs);
        }
        out
    }

    /// Largest violation of any row (including `z ≥ 0`) at the full variable vector `z`.
    pub fn max_violation(&self, z: &[f64]) -> f64 {
        let rows = self.row_kinds().into_iter().map(|k| {
            let row = self.row(k);
            row.coeffs.iter().map(|&(j, a)| a * z[j]).sum::<f64>() - row.rhs
        });
        let bounds = z.iter().map(|&x| -x);
        rows.chain(bounds).fold(0.0, f64::max)
    }
}

/// Solver outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
}

/// Per-point lotteries and payments at an optimal basic solution.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub m: usize,
    pub lotteries: Vec<Vec<f64>>,
    pub payments: Vec<f64>,
    pub objective: f64,
    pub status: LpStatus,
    /// Largest row violation across the full LP.
    pub max_violation: f64,
    /// IC rows that were materialized.
    pub ic_rows_used: usize,
    pub pivots: usize,
}

/// Solves `lp` to optimality; every row is verified to hold within `tol`.
pub fn solve_lp(lp: &MenuLp, tol: f64) -> Result<LpSolution> {
    // x_{i,ℓ} with v_{i,ℓ} = 0 is fixed at 0: it adds no value to its own
    // type and can only make other entries more attractive to others.
    let mut col_of = vec![usize::MAX; lp.num_variables()];
    let mut var_of = Vec::new();
    for i in 0..lp.n {
        for l in 0..lp.m {
            if lp.values[i][l] > 0.0 {
                col_of[lp.x_var(i, l)] = var_of.len();
                var_of.push(lp.x_var(i, l));
            }
        }
        col_of[lp.p_var(i)] = var_of.len();
        var_of.push(lp.p_var(i));
    }
    let full_c = lp.objective();
    let mut t = Tableau::new(var_of.iter().map(|&z| full_c[z]).collect());
    let reduce = |row: Row| Row {
        coeffs: row
            .coeffs
            .into_iter()
            .filter(|&(j, _)| col_of[j] != usize::MAX)
            .map(|(j, a)| (col_of[j], a))
            .collect(),
        rhs: row.rhs,
    };
    for i in 0..lp.n {
        t.add_row(reduce(lp.row(RowKind::Ir { i })));
        t.add_row(reduce(lp.row(RowKind::Lottery { i })));
        t.add_row(reduce(lp.row(RowKind::PriceBound { i })));
    }
    let mut ic_used = vec![vec![false; lp.n]; lp.n];
    let mut ic_rows_used = 0;
    // (row id, i, j, rounds slack)
    let mut live: Vec<(usize, usize, usize, u32)> = Vec::new();
    let mut refined = false;
    let mut round = 0;
    loop {
        t.solve()?;
        round += 1;
        if round <= PURGE_ROUNDS {
            let mut stale = Vec::new();
            live.retain_mut(|(id, i, j, idle)| {
                *idle = if t.slack(*id) > tol { *idle + 1 } else { 0 };
                if *idle >= PURGE_AFTER {
                    stale.push(*id);
                    ic_used[*i][*j] = false;
                    false
                } else {
                    true
                }
            });
            t.remove_slack_rows(&stale);
        }
        let z = expand(&t.solution(), &var_of, lp.num_variables());
        let cuts = separate(lp, &z, &ic_used, tol * 1e-2);
        if cuts.is_empty() {
            let violation = lp.max_violation(&z);
            if violation > tol {
                if refined {
                    return Err(Error::Numerical(format!(
                        "max row violation {violation:e} after refinement ({} rows, {} pivots)",
                        t.nrows(),
                        t.pivots()
                    )));
                }
                refined = true;
                t.reinvert()?;
                continue;
            }
            let (lotteries, payments) = split(lp, &z);
            let objective = payments.iter().zip(&lp.weights).map(|(p, w)| p * w).sum();
            return Ok(LpSolution {
                m: lp.m,
                lotteries,
                payments,
                objective,
                status: LpStatus::Optimal,
                max_violation: violation,
                ic_rows_used,
                pivots: t.pivots(),
            });
        }
        for (i, j) in cuts {
            ic_used[i][j] = true;
            ic_rows_used += 1;
            let id = t.add_row(reduce(lp.row(RowKind::Ic { i, j })));
            live.push((id, i, j, 0));
        }
    }
}

fn expand(x: &[f64], var_of: &[usize], nv: usize) -> Vec<f64> {
    let mut z = vec![0.0; nv];
    for (k, &v) in var_of.iter().enumerate() {
        z[v] = x[k];
    }
    z
}

fn split(lp: &MenuLp, z: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let lotteries = (0..lp.n)
        .map(|i| (0..lp.m).map(|l| z[lp.x_var(i, l)]).collect())
        .collect();
    let payments = (0..lp.n).map(|i| z[lp.p_var(i)]).collect();
    (lotteries, payments)
}

/// Missing IC rows violated by more than `tol`, worst first per point.
fn separate(lp: &MenuLp, z: &[f64], used: &[Vec<bool>], tol: f64) -> Vec<(usize, usize)> {
    let (lotteries, payments) = split(lp, z);
    let mut cuts = Vec::new();
    for i in 0..lp.n {
        let v = &lp.values[i];
        let own = dot(v, &lotteries[i]) - payments[i];
        let mut violated: Vec<(f64, usize)> = (0..lp.n)
            .filter(|&j| j != i && !used[i][j])
            .map(|j| (dot(v, &lotteries[j]) - payments[j] - own, j))
            .filter(|&(gap, _)| gap > tol)
            .collect();
        violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        cuts.extend(violated.into_iter().take(CUTS_PER_POINT).map(|(_, j)| (i, j)));
    }
    cuts
}

/// Turns the solution into a menu: entries within `dedup_tol` of each other
/// are merged, and entries priced at or below `dedup_tol` are dropped.
pub fn extract_menu(sol: &LpSolution, dedup_tol: f64) -> Result<Menu> {
    let mut menu = Menu::empty(sol.m);
    let mut kept: Vec<(Vec<f64>, f64)> = Vec::new();
    for (x, &p) in sol.lotteries.iter().zip(&sol.payments) {
        if p <= dedup_tol {
            continue;
        }
        let close = |(y, q): &(Vec<f64>, f64)| {
            (q - p).abs() <= dedup_tol && y.iter().zip(x).all(|(a, b)| (a - b).abs() <= dedup_tol)
        };
        if kept.iter().any(close) {
            continue;
        }
        kept.push((x.clone(), p));
        menu.push(MenuEntry::new(clean_lottery(x)?, p)?)?;
    }
    Ok(menu)
}

/// Clamps solver noise: negative entries to zero, excess mass scaled away.
fn clean_lottery(x: &[f64]) -> Result<Lottery> {
    let mut probs: Vec<f64> = x.iter().map(|&a| a.max(0.0)).collect();
    let mass: f64 = probs.iter().sum();
    if mass > 1.0 {
        for a in &mut probs {
            *a /= mass;
        }
    }
    Lottery::new(probs)
}

/// Solves and extracts with default tolerances.
pub fn optimal_menu(d: &ExplicitDistribution) -> Result<(Menu, LpSolution)> {
    let sol = solve_lp(&build_lp(d), SOLVE_TOL)?;
    Ok((extract_menu(&sol, DEDUP_TOL)?, sol))
}

/// Finite grids searched by [`brute_force_optimal`].
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceGrid {
    pub prices: Vec<f64>,
    /// Per-coordinate probability levels; lotteries are all level vectors with mass ≤ 1.
    pub levels: Vec<f64>,
    /// Largest number of menus to evaluate.
    pub budget: u128,
}

impl BruteForceGrid {
    /// `np` prices evenly spaced on `[lo, hi]` and `nl` levels evenly spaced on `[0, 1]`.
    pub fn even(lo: f64, hi: f64, np: usize, nl: usize) -> Self {
        let prices = (0..np)
            .map(|k| if np == 1 { hi } else { lo + (hi - lo) * k as f64 / (np - 1) as f64 })
            .collect();
        let levels = (0..nl)
            .map(|k| if nl == 1 { 1.0 } else { k as f64 / (nl - 1) as f64 })
            .collect();
        BruteForceGrid {
            prices,
            levels,
            budget: 5_000_000,
        }
    }

    /// Nonzero grid lotteries over `m` items, in lexicographic level order.
    pub fn lotteries(&self, m: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(m);
        fn rec(levels: &[f64], m: usize, cur: &mut Vec<f64>, mass: f64, out: &mut Vec<Vec<f64>>) {
            if cur.len() == m {
                if mass > 0.0 {
                    out.push(cur.clone());
                }
                return;
            }
            for &q in levels {
                if mass + q <= 1.0 + 1e-12 {
                    cur.push(q);
                    rec(levels, m, cur, mass + q, out);
                    cur.pop();
                }
            }
        }
        rec(&self.levels, m, &mut cur, 0.0, &mut out);
        out
    }
}

/// Best menu of at most `n` grid entries, each a (grid lottery, grid price)
/// pair, with the buyer's choice simulated by the usual tie rule.
///
/// Any assignment of grid entries to support points is a menu of at most
/// `n` distinct entries, so enumerating subsets covers every assignment.
pub fn brute_force_optimal(d: &ExplicitDistribution, grid: &BruteForceGrid) -> Result<(Menu, f64)> {
    brute_force_k_optimal(d, grid, d.len())
}

/// Best menu of at most `k` grid entries.
pub fn brute_force_k_optimal(d: &ExplicitDistribution, grid: &BruteForceGrid, k: usize) -> Result<(Menu, f64)> {
    let m = d.m();
    let n = k;
    let mut entries: Vec<(Vec<f64>, f64)> = Vec::new();
    for x in grid.lotteries(m) {
        for &p in &grid.prices {
            if p > 0.0 {
                entries.push((x.clone(), p));
            }
        }
    }
    let g = entries.len();
    let required: u128 = (0..=n.min(g)).map(|k| binomial(g as u128, k as u128)).sum();
    if required > grid.budget {
        return Err(Error::BudgetExceeded {
            required,
            budget: grid.budget,
        });
    }
    // utils[e][i]: utility of point i for entry e
    let utils: Vec<Vec<f64>> = entries
        .iter()
        .map(|(x, p)| d.support().iter().map(|v| dot(v.values(), x) - p).collect())
        .collect();
    let mut best = (0.0, Vec::new());
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    let mut scratch = vec![0.0; n];
    enumerate_subsets(g, n.min(g), 0, &mut chosen, &mut |subset| {
        let mut rev = 0.0;
        for (i, w) in d.weights().iter().enumerate() {
            for (k, &e) in subset.iter().enumerate() {
                scratch[k] = utils[e][i];
            }
            if let Choice::Entry(k) = pick(&scratch[..subset.len()], |k| entries[subset[k]].1) {
                rev += w * entries[subset[k]].1;
            }
        }
        if rev > best.0 {
            best = (rev, subset.to_vec());
        }
    });
    let mut menu = Menu::empty(m);
    for e in best.1 {
        let (x, p) = &entries[e];
        menu.push(MenuEntry::new(Lottery::new(x.clone())?, *p)?)?;
    }
    Ok((menu, best.0))
}

fn enumerate_subsets(g: usize, max: usize, start: usize, chosen: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    f(chosen);
    if chosen.len() == max {
        return;
    }
    for e in start..g {
        chosen.push(e);
        enumerate_subsets(g, max, e + 1, chosen, f);
        chosen.pop();
    }
}

pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Utility of `v` for each point's LP allocation; used by truthfulness checks.
pub fn allocation_utilities(sol: &LpSolution, v: &Valuation) -> Vec<f64> {
    sol.lotteries
        .iter()
        .zip(&sol.payments)
        .map(|(x, p)| dot(v.values(), x) - p)
        .collect()
}
