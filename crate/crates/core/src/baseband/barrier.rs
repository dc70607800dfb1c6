//! Log-barrier interior point for the epigraph form
//!
//! ```text
//! min_{w,t} t   s.t. δ‖Gw‖₂ − Re{h̄ᴴGw} ≤ t,  ‖w‖₂² ≤ Pₜ,  Im{h̄ᴴGw} = 0
//! ```
//!
//! in real variables `z = [Re w; Im w]`. The problem is normalized to
//! `Pₜ = 1`, `‖Gᴴh̄‖₂ = 1` before solving. `G` is used as a dense real
//! `2MN × 2M` matrix, so nothing here relies on its block structure.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{check_inputs, finish, SubproblemSolution};
use crate::channel::BlockResponse;
use crate::linalg::norm;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierOptions {
    /// Target duality gap on the normalized problem.
    pub gap_tolerance: f64,
    pub initial_weight: f64,
    pub weight_growth: f64,
    pub max_newton_steps: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self {
            gap_tolerance: 1e-10,
            initial_weight: 1.0,
            weight_growth: 10.0,
            max_newton_steps: 500,
        }
    }
}

/// Barrier parameter: second-order cone (2) plus the power ball (1).
const BARRIER_DEGREE: f64 = 3.0;

/// Half the squared Newton decrement at which a centering step stops.
const CENTERING_TOLERANCE: f64 = 1e-10;

struct Problem {
    n: usize,
    q: DMatrix<f64>,
    c: DVector<f64>,
    e: DVector<f64>,
    delta: f64,
}

struct Eval {
    value: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

impl Problem {
    /// Slacks `(s, q, b)`, or `None` outside the barrier domain.
    fn slacks(&self, y: &DVector<f64>) -> Option<(f64, f64, f64)> {
        let z = y.rows(0, self.n);
        let s = y[self.n] + self.c.dot(&z);
        let quad = (&self.q * z).dot(&z);
        let q = s * s - self.delta * self.delta * quad;
        let b = 1.0 - z.dot(&z);
        (s > 0.0 && q > 0.0 && b > 0.0).then_some((s, q, b))
    }

    fn value(&self, y: &DVector<f64>, weight: f64) -> Option<f64> {
        let (_, q, b) = self.slacks(y)?;
        Some(weight * y[self.n] - q.ln() - b.ln())
    }

    fn eval(&self, y: &DVector<f64>, weight: f64) -> Option<Eval> {
        let n = self.n;
        let (s, q, b) = self.slacks(y)?;
        let z = y.rows(0, n).into_owned();
        let mut ds = DVector::zeros(n + 1);
        ds.rows_mut(0, n).copy_from(&self.c);
        ds[n] = 1.0;
        let qz = &self.q * &z;
        let d2 = self.delta * self.delta;

        let mut dq = &ds * (2.0 * s);
        for i in 0..n {
            dq[i] -= 2.0 * d2 * qz[i];
        }
        let mut d2q = &ds * ds.transpose() * 2.0;
        for i in 0..n {
            for j in 0..n {
                d2q[(i, j)] -= 2.0 * d2 * self.q[(i, j)];
            }
        }

        let mut grad = -&dq / q;
        let mut hess = &dq * dq.transpose() / (q * q) - d2q / q;
        for i in 0..n {
            grad[i] += 2.0 * z[i] / b;
            for j in 0..n {
                hess[(i, j)] += 4.0 * z[i] * z[j] / (b * b);
            }
            hess[(i, i)] += 2.0 / b;
        }
        grad[n] += weight;
        Some(Eval {
            value: weight * y[n] - q.ln() - b.ln(),
            grad,
            hess,
        })
    }
}

pub fn solve_baseband_barrier(
    h: &[Complex64],
    g: &BlockResponse,
    delta: f64,
    power: f64,
    opts: BarrierOptions,
) -> Result<SubproblemSolution> {
    check_inputs(delta, power)?;
    let b = g.adjoint_apply(h);
    let nb = norm(&b);
    if !(nb > 0.0) {
        return Err(Error::DegenerateChannel("‖Gᴴh̄‖₂ = 0".into()));
    }
    let m = g.columns();
    let n = 2 * m;
    let dense = g.to_dense();
    let rows = g.rows();

    // Re/Im stacking of Gw for w = u + jv.
    let mut a = DMatrix::<f64>::zeros(2 * rows, n);
    for (col, entries) in dense.iter().enumerate() {
        for (k, z) in entries.iter().enumerate() {
            a[(k, col)] = z.re;
            a[(k, col + m)] = -z.im;
            a[(k + rows, col)] = z.im;
            a[(k + rows, col + m)] = z.re;
        }
    }
    // Re{bᴴw} = cᵀz, Im{bᴴw} = eᵀz.
    let mut c = DVector::zeros(n);
    let mut e = DVector::zeros(n);
    for (i, bi) in b.iter().enumerate() {
        c[i] = bi.re / nb;
        c[i + m] = bi.im / nb;
        e[i] = -bi.im / nb;
        e[i + m] = bi.re / nb;
    }
    let problem = Problem {
        n,
        q: a.transpose() * &a,
        c,
        e,
        delta: delta / nb,
    };

    let mut y = DVector::zeros(n + 1);
    y.rows_mut(0, n).copy_from(&(&problem.c * 0.5));
    {
        let z = y.rows(0, n);
        let cone = problem.delta * (&problem.q * z).dot(&z).sqrt();
        y[n] = cone - problem.c.dot(&z) + 1.0;
    }

    let mut kkt_e = DVector::zeros(n + 1);
    kkt_e.rows_mut(0, n).copy_from(&problem.e);

    let mut weight = opts.initial_weight;
    let mut steps = 0;
    loop {
        // Centering.
        loop {
            let ev = problem
                .eval(&y, weight)
                .ok_or(Error::SolverNonConvergence { iterations: steps, residual: f64::NAN })?;
            let mut kkt = DMatrix::zeros(n + 2, n + 2);
            kkt.view_mut((0, 0), (n + 1, n + 1)).copy_from(&ev.hess);
            kkt.view_mut((0, n + 1), (n + 1, 1)).copy_from(&kkt_e);
            kkt.view_mut((n + 1, 0), (1, n + 1)).copy_from(&kkt_e.transpose());
            let mut rhs = DVector::zeros(n + 2);
            rhs.rows_mut(0, n + 1).copy_from(&(-&ev.grad));
            let sol = kkt.lu().solve(&rhs).ok_or(Error::SolverNonConvergence {
                iterations: steps,
                residual: f64::NAN,
            })?;
            let step = sol.rows(0, n + 1).into_owned();
            let slope = ev.grad.dot(&step);
            let decrement = -slope;
            steps += 1;
            if decrement / 2.0 <= CENTERING_TOLERANCE {
                break;
            }
            if steps >= opts.max_newton_steps {
                return Err(Error::SolverNonConvergence {
                    iterations: steps,
                    residual: decrement,
                });
            }
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..80 {
                let trial = &y + &step * alpha;
                if let Some(v) = problem.value(&trial, weight) {
                    // Strict decrease guards against accepting rounding noise.
                    if v < ev.value && v <= ev.value + 0.25 * alpha * slope {
                        y = trial;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                // No progress possible at this weight; accept the centre.
                break;
            }
        }
        if BARRIER_DEGREE / weight < opts.gap_tolerance {
            break;
        }
        weight *= opts.weight_growth;
    }

    let scale = power.sqrt();
    let w: Vec<Complex64> = (0..m)
        .map(|i| Complex64::new(y[i], y[i + m]) * scale)
        .collect();
    let gap = BARRIER_DEGREE / weight * scale * nb;
    let positive = problem.c.dot(&y.rows(0, n)) * scale * nb - delta * g.product_norm(&w) > 0.0;
    Ok(finish(h, g, w, delta, power, f64::NAN, Some(gap), positive, steps))
}
