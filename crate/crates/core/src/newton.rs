//! Damped Newton minimization for the smooth convex objectives used by the
//! fitters.
//!
//! Every objective here is invariant under adding a constant to all ability
//! coordinates, so the Hessian is singular along `e = (1, .., 1, 0, ..)`.
//! The step solves `(H + e e^T) s = -g`; because `g` is orthogonal to `e`
//! the step is too, and the iterate is re-centered after each step.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub(crate) struct NewtonSpec {
    /// Leading coordinates forming the shift-invariant ability block.
    pub abilities: usize,
    /// Weights of the centering constraint `sum(w_a x_a) = 0`.
    pub center_weights: Vec<f64>,
    /// Coordinates held at their starting value.
    pub fixed: Vec<bool>,
    /// Coordinates constrained to be `>= 0`.
    pub nonneg: Vec<bool>,
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Abort when the spread of the ability coordinates exceeds the bound.
    pub divergence_bound: Option<f64>,
}

impl NewtonSpec {
    pub fn new(dim: usize, abilities: usize) -> Self {
        NewtonSpec {
            abilities,
            center_weights: vec![1.0; abilities],
            fixed: vec![false; dim],
            nonneg: vec![false; dim],
            max_iter: 200,
            grad_tol: 1e-8,
            divergence_bound: None,
        }
    }

    fn dim(&self) -> usize {
        self.fixed.len()
    }

    pub fn center(&self, x: &mut [f64]) {
        let total: f64 = self.center_weights.iter().sum();
        if total == 0.0 {
            return;
        }
        let shift = x[..self.abilities]
            .iter()
            .zip(&self.center_weights)
            .map(|(v, w)| v * w)
            .sum::<f64>()
            / total;
        x[..self.abilities].iter_mut().for_each(|v| *v -= shift);
    }
}

#[derive(Debug, Clone)]
pub(crate) struct NewtonResult {
    pub x: Vec<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub(crate) enum NewtonFailure {
    /// Highest ability coordinate when the spread crossed the bound.
    Diverged { coord: usize },
}

/// Minimizes `f`, which returns the objective value and adds the gradient
/// and Hessian into the buffers when they are supplied.
pub(crate) fn minimize<F>(spec: &NewtonSpec, x0: &[f64], mut f: F) -> Result<NewtonResult, NewtonFailure>
where
    F: FnMut(&[f64], Option<&mut [f64]>, Option<&mut DMatrix<f64>>) -> f64,
{
    let n = spec.dim();
    assert_eq!(x0.len(), n);
    let mut x = x0.to_vec();
    spec.center(&mut x);
    let mut g = vec![0.0; n];
    let mut h = DMatrix::<f64>::zeros(n, n);
    let mut trial = vec![0.0; n];
    let mut free = vec![true; n];

    let mut g_trial = vec![0.0; n];
    let mut h_trial = DMatrix::<f64>::zeros(n, n);

    let mut iterations = 0;
    g.iter_mut().for_each(|v| *v = 0.0);
    h.fill(0.0);
    let mut value = f(&x, Some(&mut g), Some(&mut h));
    loop {

        for ix in 0..n {
            free[ix] = !spec.fixed[ix] && !(spec.nonneg[ix] && x[ix] <= 0.0 && g[ix] > 0.0);
            if !free[ix] {
                g[ix] = 0.0;
            }
        }
        let grad_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if let Some(bound) = spec.divergence_bound {
            let ab = &x[..spec.abilities];
            let (lo, hi) = ab.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
            if hi - lo > bound {
                let coord = ab.iter().position(|&v| v == hi).unwrap_or(0);
                return Err(NewtonFailure::Diverged { coord });
            }
        }
        if grad_norm <= spec.grad_tol || !value.is_finite() {
            return Ok(NewtonResult {
                x,
                grad_norm,
                iterations,
                converged: value.is_finite(),
            });
        }
        if iterations >= spec.max_iter {
            return Ok(NewtonResult {
                x,
                grad_norm,
                iterations,
                converged: false,
            });
        }
        iterations += 1;

        let step = newton_step(spec, &h, &g, &free);
        let slope: f64 = step.iter().zip(&g).map(|(s, gi)| s * gi).sum();

        // Below this predicted decrease, changes in f are lost to rounding
        // and the line search cannot judge the step.
        let at_noise_floor = -slope <= 1e-13 * (1.0 + value.abs());

        // Armijo backtracking
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            for ix in 0..n {
                trial[ix] = x[ix] + t * step[ix];
                if spec.nonneg[ix] && trial[ix] < 0.0 {
                    trial[ix] = 0.0;
                }
            }
            spec.center(&mut trial);
            // derivatives come along with the trial value, since the first
            // trial is nearly always accepted
            g_trial.iter_mut().for_each(|v| *v = 0.0);
            h_trial.fill(0.0);
            let fv = f(&trial, Some(&mut g_trial), Some(&mut h_trial));
            if at_noise_floor || (fv.is_finite() && fv <= value + 1e-4 * t * slope) {
                accepted = true;
                value = fv;
                break;
            }
            t *= 0.5;
        }
        if !accepted || trial == x {
            // no representable progress left along the Newton direction
            let stalled = -slope <= 1e-20 * (1.0 + value.abs());
            return Ok(NewtonResult {
                x,
                grad_norm,
                iterations,
                converged: stalled || grad_norm <= spec.grad_tol * 1e3,
            });
        }
        x.copy_from_slice(&trial);
        std::mem::swap(&mut g, &mut g_trial);
        std::mem::swap(&mut h, &mut h_trial);
    }
}

fn newton_step(spec: &NewtonSpec, h: &DMatrix<f64>, g: &[f64], free: &[bool]) -> Vec<f64> {
    let n = g.len();
    let mut a = h.clone();
    for r in 0..n {
        if !free[r] {
            for c in 0..n {
                a[(r, c)] = 0.0;
                a[(c, r)] = 0.0;
            }
            a[(r, r)] = 1.0;
        }
    }
    for r in 0..spec.abilities {
        for c in 0..spec.abilities {
            if free[r] && free[c] {
                a[(r, c)] += 1.0;
            }
        }
    }
    let rhs = DVector::from_iterator(n, g.iter().map(|v| -v));
    let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max).max(1.0);
    let mut damping = 0.0;
    loop {
        let mut m = a.clone();
        if damping > 0.0 {
            for i in 0..n {
                m[(i, i)] += damping;
            }
        }
        if let Some(chol) = m.cholesky() {
            let s = chol.solve(&rhs);
            if s.iter().all(|v| v.is_finite()) {
                return s.iter().copied().collect();
            }
        }
        damping = if damping == 0.0 { 1e-10 * scale } else { damping * 10.0 };
        if damping > 1e12 * scale {
            // gradient descent as a last resort
            return rhs.iter().map(|v| v / scale).collect();
        }
    }
}

/// Covariance of the free coordinates under the centering constraint, from
/// the Hessian at the optimum. Fixed coordinates get zero rows and columns
/// and are reported through `None` standard errors by the caller.
pub(crate) fn constrained_covariance(spec: &NewtonSpec, h: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = spec.dim();
    let m = spec.abilities;
    // Reduced coordinates: all free coordinates except the last ability,
    // which is eliminated through the centering constraint.
    let free: Vec<usize> = (0..n).filter(|&i| !spec.fixed[i]).collect();
    let last = m.checked_sub(1)?;
    let reduced: Vec<usize> = free.iter().copied().filter(|&i| i != last).collect();
    let w_last = spec.center_weights[last];
    if w_last == 0.0 {
        return None;
    }
    let mut jac = DMatrix::<f64>::zeros(n, reduced.len());
    for (col, &i) in reduced.iter().enumerate() {
        jac[(i, col)] = 1.0;
        if i < m {
            jac[(last, col)] = -spec.center_weights[i] / w_last;
        }
    }
    let info = jac.transpose() * h * &jac;
    let inv = info.cholesky()?.inverse();
    Some(&jac * inv * jac.transpose())
}
