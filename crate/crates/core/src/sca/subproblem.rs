//! The convex subproblem solved at each SCA step.
//!
//! Minimize `delta` subject to `Fbar_q <= delta` for every grid direction,
//! `||w_b|| <= vmax` for every block, and every block boundary inside the
//! movement box. Positions between boundaries are convex combinations of
//! them, so the boundary constraints cover all snapshots.
//!
//! Solved with a log-barrier interior-point method and damped Newton steps.
//! Variables are scaled to order one: block velocities by `vmax`, the start
//! point by the smallest box half-width and `delta` by its previous value.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3x2, Vector2, Vector3};

use super::blocks::{covariance_from_blocks, BlockTrajectory};
use crate::error::{Error, Result};
use crate::geometry::{AngleVector, MovementRegion};

/// Duality-gap target relative to the previous objective.
pub const SUBPROBLEM_GAP: f64 = 1e-6;
const BARRIER_MU: f64 = 10.0;
const NEWTON_TOL: f64 = 1e-10;
const MAX_NEWTON_PER_CENTER: usize = 200;
const START_SHRINK: f64 = 1.0 - 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// The duality gap reached the target.
    Converged,
    /// Newton iterations ran out; the returned point is feasible but not
    /// certified optimal.
    IterationLimit,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Converged => "converged",
            SolveStatus::IterationLimit => "iteration_limit",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub trajectory: BlockTrajectory,
    /// Largest surrogate value at the solution (geometry-factor units).
    pub delta: f64,
    pub status: SolveStatus,
    pub newton_steps: usize,
}

/// Everything the barrier needs about one SCA step.
pub struct Subproblem<'a> {
    /// Orthonormal directions the block velocities may use.
    pub basis: &'a [Vector3<f64>],
    pub directions: &'a [AngleVector],
    pub gram: &'a DMatrix<f64>,
    pub region: &'a MovementRegion,
    pub vmax: f64,
    pub prev: &'a BlockTrajectory,
}

struct Layout {
    d: usize,
    nb: usize,
    /// Whether the start point is a variable (bounded regions only).
    free_start: bool,
}

impl Layout {
    fn n_omega(&self) -> usize {
        self.d * self.nb
    }

    fn start_at(&self) -> usize {
        self.n_omega()
    }

    fn delta_at(&self) -> usize {
        self.n_omega() + if self.free_start { 3 } else { 0 }
    }

    fn len(&self) -> usize {
        self.delta_at() + 1
    }
}

struct DirectionData {
    /// `vmax Phi' s_b` per block.
    a: Vec<Vector2<f64>>,
    /// `Phi' e_k` per basis vector.
    p: Vec<Vector2<f64>>,
    /// `Phi' U_prev Phi`.
    m0: Matrix2<f64>,
}

struct Barrier<'a> {
    layout: Layout,
    dirs: Vec<DirectionData>,
    /// Rows of `u / h` for each box face pair, over `(omega, start)`.
    linear: Vec<DVector<f64>>,
    delta_scale: f64,
    problem: &'a Subproblem<'a>,
    start_scale: f64,
    fixed_start: Vector3<f64>,
}

struct Eval {
    value: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

impl<'a> Barrier<'a> {
    fn new(sp: &'a Subproblem<'a>) -> Result<Self> {
        let d = sp.basis.len();
        let nb = sp.prev.block_velocities().len();
        let free_start = sp.region.is_bounded();
        let layout = Layout { d, nb, free_start };
        let w_prev = sp.prev.block_velocities();
        let s: Vec<Vector3<f64>> = (0..nb)
            .map(|b| (0..nb).map(|c| w_prev[c] * sp.gram[(b, c)]).sum())
            .collect();
        let u_prev = covariance_from_blocks(w_prev, sp.gram);
        let dirs: Vec<DirectionData> = sp
            .directions
            .iter()
            .map(|chi| {
                let fr = chi.tangent_frame();
                let phi = Matrix3x2::from_columns(&[fr.f, fr.g]);
                DirectionData {
                    a: s.iter().map(|sb| phi.transpose() * sb * sp.vmax).collect(),
                    p: sp.basis.iter().map(|e| phi.transpose() * e).collect(),
                    m0: phi.transpose() * u_prev.matrix() * phi,
                }
            })
            .collect();
        let delta_scale = dirs
            .iter()
            .map(|dd| dd.m0.try_inverse().map_or(f64::INFINITY, |k| k.trace()))
            .fold(0.0, f64::max);
        if !(delta_scale.is_finite() && delta_scale > 0.0) {
            return Err(Error::InfeasibleStart(
                "previous iterate has an unidentifiable grid direction".into(),
            ));
        }
        let h = sp.region.half_extent();
        let start_scale = if free_start { h.min() } else { 1.0 };
        let mut linear = Vec::new();
        if free_start {
            let ts = sp.prev.sampling_period();
            let lens = sp.prev.partition().lens();
            for j in 0..=nb {
                for axis in 0..3 {
                    let mut row = DVector::zeros(layout.len());
                    for (b, &len) in lens.iter().enumerate().take(j) {
                        for (k, e) in sp.basis.iter().enumerate() {
                            row[b * d + k] = ts * sp.vmax * len as f64 * e[axis] / h[axis];
                        }
                    }
                    row[layout.start_at() + axis] = start_scale / h[axis];
                    linear.push(row);
                }
            }
        }
        Ok(Self {
            layout,
            dirs,
            linear,
            delta_scale,
            problem: sp,
            start_scale,
            fixed_start: sp.prev.start(),
        })
    }

    fn constraint_count(&self) -> usize {
        self.dirs.len() + self.layout.nb + 2 * self.linear.len()
    }

    fn omega<'x>(&self, x: &'x DVector<f64>, b: usize) -> &'x [f64] {
        let d = self.layout.d;
        &x.as_slice()[b * d..(b + 1) * d]
    }

    /// `M_q(x)`, scaled so that `Fbar_q = Tr(M^-1) / delta_scale`.
    fn m_matrix(&self, dd: &DirectionData, x: &DVector<f64>) -> Matrix2<f64> {
        let mut m = -dd.m0;
        for b in 0..self.layout.nb {
            let om = self.omega(x, b);
            let c: Vector2<f64> = dd.p.iter().zip(om).map(|(p, w)| p * *w).sum();
            m += dd.a[b] * c.transpose() + c * dd.a[b].transpose();
        }
        m
    }

    fn inverse_pd(m: &Matrix2<f64>) -> Option<Matrix2<f64>> {
        let det = m.determinant();
        if det > 0.0 && m.trace() > 0.0 {
            m.try_inverse()
        } else {
            None
        }
    }

    /// Surrogate values (normalized) at `x`, or `None` outside the cone.
    fn surrogates(&self, x: &DVector<f64>) -> Option<Vec<f64>> {
        self.dirs
            .iter()
            .map(|dd| Self::inverse_pd(&self.m_matrix(dd, x)).map(|k| k.trace() / self.delta_scale))
            .collect()
    }

    fn in_domain(&self, x: &DVector<f64>) -> bool {
        let delta = x[self.layout.delta_at()];
        let Some(f) = self.surrogates(x) else {
            return false;
        };
        if f.iter().any(|v| !(delta - v > 0.0)) {
            return false;
        }
        for b in 0..self.layout.nb {
            let n2: f64 = self.omega(x, b).iter().map(|v| v * v).sum();
            if !(n2 < 1.0) {
                return false;
            }
        }
        self.linear.iter().all(|row| row.dot(x).abs() < 1.0)
    }

    fn value(&self, x: &DVector<f64>, t: f64) -> f64 {
        if !self.in_domain(x) {
            return f64::INFINITY;
        }
        let delta = x[self.layout.delta_at()];
        let f = self.surrogates(x).expect("checked");
        let mut v = t * delta;
        v -= f.iter().map(|fq| (delta - fq).ln()).sum::<f64>();
        for b in 0..self.layout.nb {
            let n2: f64 = self.omega(x, b).iter().map(|w| w * w).sum();
            v -= (1.0 - n2).ln();
        }
        for row in &self.linear {
            let u = row.dot(x);
            v -= (1.0 - u).ln() + (1.0 + u).ln();
        }
        v
    }

    fn evaluate(&self, x: &DVector<f64>, t: f64) -> Eval {
        let n = self.layout.len();
        let no = self.layout.n_omega();
        let d = self.layout.d;
        let id = self.layout.delta_at();
        let delta = x[id];
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        let mut value = t * delta;
        grad[id] = t;

        // upper triangle of the omega-omega curvature, mirrored at the end
        let mut curv = DMatrix::<f64>::zeros(no, no);
        let mut y = vec![Matrix2::zeros(); no];
        let mut z = vec![Matrix2::zeros(); no];
        let mut gq = DVector::zeros(n);
        for dd in &self.dirs {
            let m = self.m_matrix(dd, x);
            let k = Self::inverse_pd(&m).expect("evaluate called inside the domain");
            let k2 = k * k;
            let fq = k.trace() / self.delta_scale;
            let slack = delta - fq;
            value -= slack.ln();
            gq.fill(0.0);
            for b in 0..self.layout.nb {
                for kk in 0..d {
                    let i = b * d + kk;
                    let mi = dd.a[b] * dd.p[kk].transpose() + dd.p[kk] * dd.a[b].transpose();
                    gq[i] = -(k2 * mi).trace() / self.delta_scale;
                    y[i] = mi * k;
                    z[i] = mi * k2;
                }
            }
            gq[id] = -1.0;
            // -log(delta - F): gradient (grad F - e_delta) / slack
            let inv = 1.0 / slack;
            grad.axpy(inv, &gq, 1.0);
            let scale_h = 2.0 * inv / self.delta_scale;
            for i in 0..no {
                for j in i..no {
                    let yz = y[i].component_mul(&z[j].transpose()).sum();
                    curv[(i, j)] += scale_h * yz;
                }
            }
            hess.ger(inv * inv, &gq, &gq, 1.0);
        }
        for b in 0..self.layout.nb {
            let om = self.omega(x, b).to_vec();
            let n2: f64 = om.iter().map(|v| v * v).sum();
            let s = 1.0 - n2;
            value -= s.ln();
            for (k, wk) in om.iter().enumerate() {
                let i = b * d + k;
                grad[i] += 2.0 * wk / s;
                curv[(i, i)] += 2.0 / s;
                for (l, wl) in om.iter().enumerate().skip(k) {
                    curv[(i, b * d + l)] += 4.0 * wk * wl / (s * s);
                }
            }
        }
        for row in &self.linear {
            let u = row.dot(x);
            let (sp, sm) = (1.0 - u, 1.0 + u);
            value -= sp.ln() + sm.ln();
            grad.axpy(1.0 / sp - 1.0 / sm, row, 1.0);
            hess.ger(1.0 / (sp * sp) + 1.0 / (sm * sm), row, row, 1.0);
        }
        for i in 0..no {
            for j in i..no {
                let c = curv[(i, j)];
                hess[(i, j)] += c;
                if j != i {
                    hess[(j, i)] += c;
                }
            }
        }
        Eval { value, grad, hess }
    }

    fn start_point(&self) -> Result<DVector<f64>> {
        let sp = self.problem;
        let mut x = DVector::zeros(self.layout.len());
        let w = sp.prev.block_velocities();
        for (b, wb) in w.iter().enumerate() {
            for (k, e) in sp.basis.iter().enumerate() {
                x[b * self.layout.d + k] = START_SHRINK * e.dot(wb) / sp.vmax;
            }
        }
        if self.layout.free_start {
            let ts = sp.prev.sampling_period();
            let mut p = Vector3::zeros();
            let (mut lo, mut hi) = (p, p);
            for (b, &len) in sp.prev.partition().lens().iter().enumerate() {
                let wb: Vector3<f64> = sp
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(k, e)| e * (x[b * self.layout.d + k] * sp.vmax))
                    .sum();
                p += wb * (len as f64 * ts);
                lo = lo.inf(&p);
                hi = hi.sup(&p);
            }
            let r1 = -(lo + hi) / 2.0;
            for a in 0..3 {
                x[self.layout.start_at() + a] = r1[a] / self.start_scale;
            }
        }
        let f = self
            .surrogates(&x)
            .ok_or_else(|| Error::InfeasibleStart("surrogate singular at the start point".into()))?;
        let fmax = f.iter().copied().fold(0.0, f64::max);
        x[self.layout.delta_at()] = 1.1 * fmax + 0.1;
        if !self.in_domain(&x) {
            return Err(Error::InfeasibleStart(
                "previous iterate violates the speed or region limits".into(),
            ));
        }
        Ok(x)
    }

    fn extract(&self, x: &DVector<f64>) -> Result<BlockTrajectory> {
        let sp = self.problem;
        let d = self.layout.d;
        let w = (0..self.layout.nb)
            .map(|b| {
                sp.basis
                    .iter()
                    .enumerate()
                    .map(|(k, e)| e * (x[b * d + k] * sp.vmax))
                    .sum()
            })
            .collect();
        let start = if self.layout.free_start {
            let at = self.layout.start_at();
            sp.region.center() + Vector3::new(x[at], x[at + 1], x[at + 2]) * self.start_scale
        } else {
            self.fixed_start
        };
        sp.prev.with_velocities(start, w)
    }
}

/// Solves the subproblem starting from `sp.prev`.
pub fn solve_subproblem(sp: &Subproblem<'_>) -> Result<SubproblemSolution> {
    let barrier = Barrier::new(sp)?;
    let mut x = barrier.start_point()?;
    let m = barrier.constraint_count() as f64;
    let mut t = 1.0;
    let mut steps = 0usize;
    let mut status = SolveStatus::Converged;
    loop {
        let mut centered = false;
        for _ in 0..MAX_NEWTON_PER_CENTER {
            let ev = barrier.evaluate(&x, t);
            let dx = newton_direction(&ev.hess, &ev.grad)?;
            steps += 1;
            let lambda2 = -ev.grad.dot(&dx);
            if lambda2 / 2.0 <= NEWTON_TOL {
                centered = true;
                break;
            }
            let mut alpha = 1.0;
            let slope = ev.grad.dot(&dx);
            let mut moved = false;
            while alpha > 1e-14 {
                let cand = &x + &dx * alpha;
                let v = barrier.value(&cand, t);
                if v.is_finite() && v <= ev.value + 0.01 * alpha * slope {
                    x = cand;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !moved {
                centered = true;
                break;
            }
        }
        if !centered {
            status = SolveStatus::IterationLimit;
        }
        if m / t <= SUBPROBLEM_GAP {
            break;
        }
        t *= BARRIER_MU;
    }
    let f = barrier.surrogates(&x).expect("iterates stay in the domain");
    let delta = f.iter().copied().fold(0.0, f64::max) * barrier.delta_scale;
    Ok(SubproblemSolution {
        trajectory: barrier.extract(&x)?,
        delta,
        status,
        newton_steps: steps,
    })
}

fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> Result<DVector<f64>> {
    let scale = h.diagonal().amax().max(1e-300);
    let mut reg = 0.0;
    for _ in 0..12 {
        let mut hr = h.clone();
        if reg > 0.0 {
            for i in 0..hr.nrows() {
                hr[(i, i)] += reg * scale;
            }
        }
        if let Some(ch) = hr.cholesky() {
            return Ok(-ch.solve(g));
        }
        reg = if reg == 0.0 { 1e-14 } else { reg * 100.0 };
    }
    Err(Error::Numerical("Newton system is not positive definite".into()))
}
