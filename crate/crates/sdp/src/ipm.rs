//! Infeasible-start primal-dual path following with the HKM search
//! direction and a Mehrotra predictor-corrector step.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{Mat, Side};

use crate::problem::BlockSdp;
use crate::{BlockSdpSolution, ConicSolver, SolveStatus, SolverError};

#[derive(Debug, Clone, Copy)]
pub struct IpmOptions {
    /// Target for relative gap and both relative infeasibilities.
    pub tol: f64,
    /// An iterate that stalls or hits `max_iter` is still accepted when its
    /// residuals are below this looser threshold.
    pub accept_tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self { tol: 1e-7, accept_tol: 1e-5, max_iter: 100, step_fraction: 0.98 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct InteriorPoint {
    pub options: IpmOptions,
}

impl InteriorPoint {
    pub fn new(options: IpmOptions) -> Self {
        Self { options }
    }

    pub fn with_tolerance(tol: f64) -> Self {
        Self::new(IpmOptions { tol, accept_tol: (tol * 100.0).max(1e-5), ..IpmOptions::default() })
    }
}

/// Entries of one variable restricted to one block.
struct BlockTerm {
    var: usize,
    entries: Vec<(usize, usize, f64)>,
}

type Blocks = Vec<Mat<f64>>;

fn identity_blocks(sizes: &[usize], scale: f64) -> Blocks {
    sizes
        .iter()
        .map(|&n| {
            let mut m = Mat::zeros(n, n);
            for i in 0..n {
                m[(i, i)] = scale;
            }
            m
        })
        .collect()
}

fn inner(a: &[Mat<f64>], b: &[Mat<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let mut acc = 0.0;
            for j in 0..x.ncols() {
                for i in 0..x.nrows() {
                    acc += x[(i, j)] * y[(i, j)];
                }
            }
            acc
        })
        .sum()
}

fn frobenius(a: &[Mat<f64>]) -> f64 {
    inner(a, a).sqrt()
}

fn symmetrize(m: &mut Mat<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..j {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Largest `alpha` with `m + alpha * dm` positive semidefinite, given `m`
/// positive definite. `None` when `m` fails to factor.
fn max_step(m: &[Mat<f64>], dm: &[Mat<f64>]) -> Option<f64> {
    let mut best = f64::INFINITY;
    for (mb, db) in m.iter().zip(dm) {
        if mb.nrows() == 0 {
            continue;
        }
        let llt = mb.llt(Side::Lower).ok()?;
        let l = llt.L();
        let mut w = db.clone();
        l.solve_lower_triangular_in_place(w.as_mut());
        let mut w = w.transpose().to_owned();
        l.solve_lower_triangular_in_place(w.as_mut());
        symmetrize(&mut w);
        let eig = w.self_adjoint_eigenvalues(Side::Lower).ok()?;
        let lo = eig.first().copied().unwrap_or(0.0);
        if lo < 0.0 {
            best = best.min(-1.0 / lo);
        }
    }
    Some(best)
}

struct Workspace<'a> {
    problem: &'a BlockSdp,
    by_block: Vec<Vec<BlockTerm>>,
}

impl<'a> Workspace<'a> {
    fn new(problem: &'a BlockSdp) -> Self {
        let mut by_block: Vec<Vec<BlockTerm>> = problem.block_sizes.iter().map(|_| Vec::new()).collect();
        for (k, a) in problem.coefficients.iter().enumerate() {
            for e in &a.entries {
                let list = &mut by_block[e.block];
                match list.last_mut() {
                    Some(t) if t.var == k => t.entries.push((e.row, e.col, e.value)),
                    _ => list.push(BlockTerm { var: k, entries: vec![(e.row, e.col, e.value)] }),
                }
            }
        }
        // Variables may list their entries out of block order.
        for list in &mut by_block {
            list.sort_by_key(|t| t.var);
            let mut merged: Vec<BlockTerm> = Vec::with_capacity(list.len());
            for t in list.drain(..) {
                match merged.last_mut() {
                    Some(last) if last.var == t.var => last.entries.extend(t.entries),
                    _ => merged.push(t),
                }
            }
            *list = merged;
        }
        Self { problem, by_block }
    }

    /// Schur complement `H_kl = tr(A_k X A_l S^{-1})`.
    fn schur(&self, x: &[Mat<f64>], sinv: &[Mat<f64>]) -> Mat<f64> {
        let m = self.problem.num_vars();
        let mut h = Mat::<f64>::zeros(m, m);
        for (b, terms) in self.by_block.iter().enumerate() {
            let n = self.problem.block_sizes[b];
            let (xb, sb) = (&x[b], &sinv[b]);
            let mut t = Mat::<f64>::zeros(n, n);
            let mut g = Mat::<f64>::zeros(n, n);
            let mut touched = vec![false; n];
            let mut rows = Vec::new();
            for (li, term) in terms.iter().enumerate() {
                // T = A_l S^{-1}, stored row-sparse.
                rows.clear();
                for &(r, c, v) in &term.entries {
                    let mirrored = (r != c).then_some((c, r));
                    for (dst, src) in std::iter::once((r, c)).chain(mirrored) {
                        if !touched[dst] {
                            touched[dst] = true;
                            rows.push(dst);
                        }
                        for j in 0..n {
                            t[(dst, j)] += v * sb[(src, j)];
                        }
                    }
                }
                // G = X T.
                g.fill(0.0);
                for &r in &rows {
                    for j in 0..n {
                        let trj = t[(r, j)];
                        if trj == 0.0 {
                            continue;
                        }
                        let xcol = xb.col(r);
                        let mut gcol = g.col_mut(j);
                        for i in 0..n {
                            gcol[i] += xcol[i] * trj;
                        }
                    }
                }
                for other in &terms[li..] {
                    let mut val = 0.0;
                    for &(r, c, v) in &other.entries {
                        val += if r == c { v * g[(r, r)] } else { v * (g[(r, c)] + g[(c, r)]) };
                    }
                    h[(other.var, term.var)] += val;
                }
                for &r in &rows {
                    touched[r] = false;
                    for j in 0..n {
                        t[(r, j)] = 0.0;
                    }
                }
            }
        }
        for j in 0..m {
            for i in 0..j {
                h[(i, j)] = h[(j, i)];
            }
        }
        h
    }

    fn apply(&self, dy: &[f64], out: &mut [Mat<f64>]) {
        for (a, &v) in self.problem.coefficients.iter().zip(dy) {
            a.add_to(v, out);
        }
    }
}

fn mul3(a: &Mat<f64>, b: &Mat<f64>, c: &Mat<f64>) -> Mat<f64> {
    a * b * c
}

struct Direction {
    dx: Blocks,
    dy: Vec<f64>,
    ds: Blocks,
}

impl ConicSolver for InteriorPoint {
    fn solve(&self, problem: &BlockSdp) -> Result<BlockSdpSolution, SolverError> {
        problem.validate()?;
        let opts = self.options;
        let ws = Workspace::new(problem);
        let m = problem.num_vars();
        let order: usize = problem.block_sizes.iter().sum();
        let sizes = &problem.block_sizes;
        let c = &problem.objective;
        let c_norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        let c0_norm = problem.constant.frobenius_sq().sqrt();

        let mut y = vec![0.0; m];
        let mut x = identity_blocks(sizes, 1.0);
        let mut s = problem.slack_at(&y);
        if s.iter().any(|b| b.nrows() > 0 && b.llt(Side::Lower).is_err()) {
            s = identity_blocks(sizes, 1.0 + c0_norm);
        }

        let mut status = SolveStatus::MaxIterations;
        let mut iterations = 0;
        let (mut rel_gap, mut pinf, mut dinf);
        loop {
            let rp: Vec<f64> = problem.coefficients.iter().zip(c).map(|(a, &ck)| ck + a.dot(&x)).collect();
            let mut rd = problem.slack_at(&y);
            for (r, sb) in rd.iter_mut().zip(&s) {
                *r -= sb;
            }
            let pobj = c.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
            let dobj = problem.constant.dot(&x);
            rel_gap = (dobj - pobj).abs() / (1.0 + pobj.abs() + dobj.abs());
            let xs = inner(&x, &s);
            rel_gap = rel_gap.max(xs.abs() / (1.0 + pobj.abs() + dobj.abs()));
            pinf = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + c_norm);
            dinf = frobenius(&rd) / (1.0 + c0_norm);
            log::trace!(
                "ipm iter {iterations}: obj {pobj:.10} bound {dobj:.10} gap {rel_gap:.2e} pinf {pinf:.2e} dinf {dinf:.2e}"
            );
            if rel_gap < opts.tol && pinf < opts.tol && dinf < opts.tol {
                status = SolveStatus::Optimal;
                break;
            }
            if iterations >= opts.max_iter {
                break;
            }
            iterations += 1;
            let mu = xs / order as f64;

            let mut sinv = Vec::with_capacity(s.len());
            for sb in &s {
                let llt = sb
                    .llt(Side::Lower)
                    .map_err(|_| SolverError::Numerical { stage: "slack factorization", iterations })?;
                sinv.push(llt.inverse());
            }
            let h = ws.schur(&x, &sinv);
            let factor = factor_schur(h).ok_or(SolverError::Numerical { stage: "schur factorization", iterations })?;

            let solve_dir = |rc_sinv: &Blocks| -> Direction {
                // Q = Rc S^{-1} - X Rd S^{-1}
                let mut rhs = Mat::<f64>::zeros(m, 1);
                let q: Blocks = rc_sinv
                    .iter()
                    .zip(&x)
                    .zip(&rd)
                    .zip(&sinv)
                    .map(|(((rcs, xb), rdb), sb)| rcs - mul3(xb, rdb, sb))
                    .collect();
                for (k, a) in problem.coefficients.iter().enumerate() {
                    rhs[(k, 0)] = rp[k] + a.dot(&q);
                }
                let sol = factor.solve(&rhs);
                let dy: Vec<f64> = (0..m).map(|k| sol[(k, 0)]).collect();
                let mut ds = rd.clone();
                ws.apply(&dy, &mut ds);
                let dx: Blocks = rc_sinv
                    .iter()
                    .zip(&x)
                    .zip(&ds)
                    .zip(&sinv)
                    .map(|(((rcs, xb), dsb), sb)| {
                        let mut d = rcs - mul3(xb, dsb, sb);
                        symmetrize(&mut d);
                        d
                    })
                    .collect();
                Direction { dx, dy, ds }
            };

            // Predictor: Rc = -XS, so Rc S^{-1} = -X.
            let neg_x: Blocks = x.iter().map(|b| -b).collect();
            let aff = solve_dir(&neg_x);
            let ap = step_length(&x, &aff.dx, 1.0, iterations)?;
            let ad = step_length(&s, &aff.ds, 1.0, iterations)?;
            let mut xa = x.clone();
            let mut sa = s.clone();
            for b in 0..sizes.len() {
                xa[b] += ap * &aff.dx[b];
                sa[b] += ad * &aff.ds[b];
            }
            let mu_aff = inner(&xa, &sa) / order as f64;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            // Corrector: Rc = sigma mu I - XS - dXa dSa.
            let rc_sinv: Blocks = (0..sizes.len())
                .map(|b| {
                    let mut r = sigma * mu * &sinv[b] - &x[b];
                    r -= mul3(&aff.dx[b], &aff.ds[b], &sinv[b]);
                    r
                })
                .collect();
            let dir = solve_dir(&rc_sinv);
            let ap = step_length(&x, &dir.dx, opts.step_fraction, iterations)?;
            let ad = step_length(&s, &dir.ds, opts.step_fraction, iterations)?;
            for b in 0..sizes.len() {
                x[b] += ap * &dir.dx[b];
                s[b] += ad * &dir.ds[b];
            }
            for (yk, dk) in y.iter_mut().zip(&dir.dy) {
                *yk += ad * dk;
            }
            if ap < 1e-10 && ad < 1e-10 {
                status = SolveStatus::Stalled;
                break;
            }
        }

        let worst = rel_gap.max(pinf).max(dinf);
        if status != SolveStatus::Optimal {
            if worst > opts.accept_tol {
                return Err(SolverError::NotConverged { status, gap: rel_gap, infeasibility: pinf.max(dinf) });
            }
            log::warn!("sdp solver stopped with {status:?}; residual {worst:.2e} accepted");
        }
        let objective = c.iter().zip(&y).map(|(a, b)| a * b).sum();
        let dual_objective = problem.constant.dot(&x);
        Ok(BlockSdpSolution {
            slack: problem.slack_at(&y),
            y,
            dual: x,
            objective,
            dual_objective,
            relative_gap: rel_gap,
            dual_infeasibility: pinf,
            iterations,
            status,
        })
    }
}

fn step_length(m: &[Mat<f64>], dm: &[Mat<f64>], fraction: f64, iterations: usize) -> Result<f64, SolverError> {
    let max = max_step(m, dm).ok_or(SolverError::Numerical { stage: "step length", iterations })?;
    Ok((fraction * max).min(1.0))
}

/// Cholesky of the Schur complement, retrying with a growing diagonal
/// shift when roundoff has made it numerically indefinite.
fn factor_schur(mut h: Mat<f64>) -> Option<faer::linalg::solvers::Llt<f64>> {
    if let Ok(f) = h.llt(Side::Lower) {
        return Some(f);
    }
    let n = h.nrows();
    let scale = (0..n).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut shift = 1e-14 * scale;
    for _ in 0..8 {
        for i in 0..n {
            h[(i, i)] += shift;
        }
        if let Ok(f) = h.llt(Side::Lower) {
            log::debug!("schur complement regularized by {shift:.1e}");
            return Some(f);
        }
        shift *= 100.0;
    }
    None
}
