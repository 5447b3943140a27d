//! Dense two-phase simplex for small equality-constrained LPs.
//!
//! Pivoting follows Bland's rule (lowest-index entering column, ratio ties
//! broken by lowest basic index), so results are deterministic and the method
//! cannot cycle. Problem sizes here are a few hundred rows at most.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Feasibility and optimality tolerance.
pub const LP_TOL: f64 = 1e-9;
/// Least-squares residual above which `Ax = b` is declared inconsistent.
pub const SPAN_TOL: f64 = 1e-8;
/// Tableau entries at or below this are not eligible as pivots.
const PIVOT_TOL: f64 = 1e-7;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

/// Greedy two-pass modified Gram–Schmidt: the indices of the vectors kept
/// and an orthonormal basis of their span.
fn gram_schmidt(vectors: impl Iterator<Item = DVector<f64>>, scale: f64, rtol: f64) -> (Vec<usize>, Vec<DVector<f64>>) {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut keep = Vec::new();
    for (i, mut v) in vectors.enumerate() {
        // Two passes keep the orthogonalization stable.
        for _ in 0..2 {
            for q in &basis {
                let p = q.dot(&v);
                v.axpy(-p, q, 1.0);
            }
        }
        let n = v.norm();
        if n > rtol * scale {
            basis.push(v / n);
            keep.push(i);
        }
    }
    (keep, basis)
}

/// Indices of a maximal linearly independent subset of the rows of `a`,
/// chosen greedily in row order.
pub fn independent_rows(a: &DMatrix<f64>, rtol: f64) -> Vec<usize> {
    let scale = (0..a.nrows()).map(|i| a.row(i).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    gram_schmidt((0..a.nrows()).map(|i| a.row(i).transpose()), scale, rtol).0
}

/// Max-norm distance from `b` to the column space of `a`.
///
/// Projects onto an orthonormal basis rather than solving least squares, so
/// nearly dependent columns do not inflate the result.
pub fn span_residual(a: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    let scale = a.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let (_, basis) = gram_schmidt(a.column_iter().map(|c| c.into_owned()), scale, 1e-10);
    let mut r = b.clone();
    for _ in 0..2 {
        for q in &basis {
            let p = q.dot(&r);
            r.axpy(-p, q, 1.0);
        }
    }
    r.amax()
}

/// Pivots between reinversions of the basis from the original data.
const REINVERT_EVERY: usize = 64;

/// Simplex tableau stored transposed: column `i` of `t` is tableau row `i`,
/// so row operations touch contiguous memory.
struct Tableau {
    /// Original constraint matrix including the artificial identity block.
    a: DMatrix<f64>,
    b: DVector<f64>,
    t: DMatrix<f64>,
    rhs: DVector<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn new(a: DMatrix<f64>, b: DVector<f64>, basis: Vec<usize>) -> Result<Self> {
        let mut tab = Tableau { t: DMatrix::zeros(0, 0), rhs: b.clone(), a, b, basis, pivots: 0 };
        tab.reinvert()?;
        Ok(tab)
    }

    /// Phase II over columns `< allowed`, then reads the solution off a
    /// freshly inverted basis.
    fn finish(mut self, cost: &[f64], allowed: usize) -> Result<LpSolution> {
        self.optimize(cost, allowed)?;
        self.reinvert()?;
        let mut x = vec![0.0; allowed];
        for (i, &j) in self.basis.iter().enumerate() {
            if j < allowed {
                x[j] = self.rhs[i].max(0.0);
            }
        }
        let objective = x.iter().zip(cost).map(|(x, c)| x * c).sum();
        Ok(LpSolution { x, objective, pivots: self.pivots })
    }

    fn entry(&self, row: usize, col: usize) -> f64 {
        self.t[(col, row)]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.entry(row, col);
        self.t.column_mut(row).scale_mut(1.0 / p);
        self.rhs[row] /= p;
        let prow = self.t.column(row).clone_owned();
        let prhs = self.rhs[row];
        for i in 0..self.t.ncols() {
            if i == row {
                continue;
            }
            let f = self.t[(col, i)];
            if f != 0.0 {
                self.t.column_mut(i).axpy(-f, &prow, 1.0);
                self.rhs[i] -= f * prhs;
            }
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    /// Recomputes `B⁻¹A` and `B⁻¹b` from scratch, discarding pivoting error.
    fn reinvert(&mut self) -> Result<()> {
        let m = self.a.nrows();
        let mut bm = DMatrix::<f64>::zeros(m, m);
        for (k, &j) in self.basis.iter().enumerate() {
            bm.set_column(k, &self.a.column(j));
        }
        let lu = bm.lu();
        let (Some(t), Some(rhs)) = (lu.solve(&self.a), lu.solve(&self.b)) else {
            return Err(Error::SolverFailure("basis became singular".into()));
        };
        self.t = t.transpose();
        self.rhs = rhs;
        Ok(())
    }

    fn reduced_costs(&self, cost: &[f64], allowed: usize) -> Vec<f64> {
        let cb = DVector::from_iterator(self.basis.len(), self.basis.iter().map(|&j| cost[j]));
        (0..allowed).map(|j| cost[j] - self.t.row(j).transpose().dot(&cb)).collect()
    }

    /// Bland's leaving row for `enter`, or `None` if the column has no positive entry.
    fn leaving_row(&self, enter: usize) -> Option<usize> {
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..self.t.ncols() {
            let a = self.entry(i, enter);
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs[i].max(0.0) / a;
            leave = match leave {
                Some((r, best))
                    if !(ratio < best - LP_TOL || (ratio <= best + LP_TOL && self.basis[i] < self.basis[r])) =>
                {
                    Some((r, best))
                }
                _ => Some((i, ratio)),
            };
        }
        leave.map(|(r, _)| r)
    }

    /// Runs simplex iterations over columns `< allowed` until optimal.
    ///
    /// The objectives solved here are bounded below, so a column without a
    /// positive pivot after reinversion is numerical noise; it is skipped when
    /// its reduced cost is tiny and reported otherwise.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<()> {
        self.reinvert()?;
        let mut rc = self.reduced_costs(cost, allowed);
        let mut fresh = true;
        let mut skipped = vec![false; allowed];
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Err(Error::SolverFailure(format!("pivot limit {MAX_PIVOTS} reached")));
            }
            let enter = (0..allowed).find(|&j| !skipped[j] && rc[j] < -LP_TOL);
            let row = enter.and_then(|j| self.leaving_row(j));
            if row.is_none() && !fresh {
                // Confirm optimality or unboundedness on a freshly inverted basis.
                self.reinvert()?;
                rc = self.reduced_costs(cost, allowed);
                fresh = true;
                continue;
            }
            let Some(enter) = enter else {
                return Ok(());
            };
            let Some(row) = row else {
                if rc[enter] > -1e3 * LP_TOL {
                    skipped[enter] = true;
                    continue;
                }
                return Err(Error::SolverFailure("objective is unbounded below".into()));
            };
            let step = rc[enter];
            self.pivot(row, enter);
            skipped.iter_mut().for_each(|s| *s = false);
            fresh = false;
            if self.pivots % REINVERT_EVERY == 0 {
                self.reinvert()?;
                rc = self.reduced_costs(cost, allowed);
            } else {
                for (j, r) in rc.iter_mut().enumerate() {
                    *r -= step * self.t[(j, row)];
                }
            }
        }
    }
}

/// `min cᵀx` subject to `Ax = b`, `x ≥ 0`, by two-phase simplex.
///
/// Rows of `A` must be linearly independent; see [`independent_rows`].
pub fn solve_standard_form(a: &DMatrix<f64>, b: &DVector<f64>, c: &[f64]) -> Result<LpSolution> {
    let (m, n) = a.shape();
    if b.len() != m || c.len() != n {
        return Err(Error::InvalidInput(format!("LP shape mismatch: A {m}x{n}, b {}, c {}", b.len(), c.len())));
    }
    let mut a = a.clone();
    let mut b = b.clone();
    for i in 0..m {
        if b[i] < 0.0 {
            a.row_mut(i).neg_mut();
            b[i] = -b[i];
        }
    }

    // Phase I: artificial columns n..n+m start in the basis.
    let mut full = DMatrix::<f64>::zeros(m, n + m);
    full.view_mut((0, 0), (m, n)).copy_from(&a);
    for i in 0..m {
        full[(i, n + i)] = 1.0;
    }
    let mut tab = Tableau::new(full, b.clone(), (n..n + m).collect())?;
    let mut phase1 = vec![0.0; n + m];
    phase1[n..].iter_mut().for_each(|c| *c = 1.0);
    tab.optimize(&phase1, n + m)?;
    let infeas: f64 = (0..m).filter(|&i| tab.basis[i] >= n).map(|i| tab.rhs[i]).sum();
    if infeas > LP_TOL * (1.0 + b.amax()) * m as f64 {
        return Err(Error::SolverFailure(format!("phase I ended with infeasibility {infeas:.3e}")));
    }

    // Drive remaining artificials out of the basis.
    for i in 0..m {
        if tab.basis[i] < n {
            continue;
        }
        match (0..n).find(|&j| tab.entry(i, j).abs() > PIVOT_TOL) {
            Some(j) => tab.pivot(i, j),
            None => return Err(Error::SolverFailure("equality rows are linearly dependent".into())),
        }
    }

    let mut cost = c.to_vec();
    cost.resize(n + m, 0.0);
    tab.finish(&cost, n)
}

/// Phase II only, from a known feasible basis (one column index per row).
pub fn solve_from_basis(a: &DMatrix<f64>, b: &DVector<f64>, c: &[f64], basis: Vec<usize>) -> Result<LpSolution> {
    let (m, n) = a.shape();
    if b.len() != m || c.len() != n || basis.len() != m || basis.iter().any(|&j| j >= n) {
        return Err(Error::InvalidInput("LP shape mismatch".into()));
    }
    let tab = Tableau::new(a.clone(), b.clone(), basis)?;
    if tab.rhs.min() < -LP_TOL * (1.0 + b.amax()) {
        return Err(Error::InvalidInput("starting basis is infeasible".into()));
    }
    tab.finish(c, n)
}

/// `min ‖η‖₁` subject to `Aη = b`, via the split `η = η⁺ − η⁻`.
///
/// The starting basis comes from the first independent columns of the
/// reduced system: its basic solution `η_S` is feasible for the split problem
/// once each column is taken with the sign of `η_S`.
pub fn min_l1(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::InvalidInput(format!("A has {m} rows but b has {}", b.len())));
    }
    let residual = span_residual(a, b);
    if residual > SPAN_TOL {
        return Err(Error::TargetOutsideSpan { residual });
    }
    let rows = independent_rows(a, 1e-10);
    let r = rows.len();
    let mut ar = DMatrix::<f64>::zeros(r, 2 * n);
    let mut br = DVector::<f64>::zeros(r);
    for (k, &i) in rows.iter().enumerate() {
        for j in 0..n {
            ar[(k, j)] = a[(i, j)];
            ar[(k, n + j)] = -a[(i, j)];
        }
        br[k] = b[i];
    }
    let reduced = ar.columns(0, n).into_owned();
    let cols = independent_rows(&reduced.transpose(), 1e-10);
    if cols.len() != r {
        return Err(Error::SolverFailure("reduced system lost rank".into()));
    }
    let mut sub = DMatrix::<f64>::zeros(r, r);
    for (k, &j) in cols.iter().enumerate() {
        sub.set_column(k, &reduced.column(j));
    }
    let eta_s = sub.lu().solve(&br).ok_or_else(|| Error::SolverFailure("starting basis is singular".into()))?;
    let basis = cols.iter().zip(eta_s.iter()).map(|(&j, &e)| if e >= 0.0 { j } else { n + j }).collect();
    let sol = solve_from_basis(&ar, &br, &vec![1.0; 2 * n], basis)?;
    Ok((0..n).map(|j| sol.x[j] - sol.x[n + j]).collect())
}
