//! Augmented Lagrangian solver for the ranking lasso
//!
//! ```text
//! minimize  nll(mu, tau, delta1) + lambda * sum_{i<j} w_ij |mu_i - mu_j|
//! ```
//!
//! written with auxiliary pair differences `theta_ij = mu_i - mu_j`. Each
//! outer iteration minimizes the augmented objective
//!
//! ```text
//! nll + lambda * sum w |theta| + sum u (theta - d) + v/2 * sum (theta - d)^2
//! ```
//!
//! over `(mu, tau, delta1, theta)`, with `d_ij = mu_i - mu_j`, and then moves
//! the multipliers `u` along the constraint residual.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grouping::Grouping;
use crate::likelihood::Design;
use crate::mle::AdaptiveWeights;
use crate::model::{ModelParams, Tournament};
use crate::newton::{self, NewtonSpec};
use crate::pairs::{differences, PairIndex};

/// `sign(x) * max(|x| - t, 0)`.
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// How the minimization step of an outer iteration is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerScheme {
    /// Minimize jointly over `(mu, tau, delta1)` after substituting the
    /// closed-form `theta` (a Huber-type envelope of each pair difference),
    /// by semismooth Newton.
    #[default]
    Eliminated,
    /// Alternate `solve_mu_tau` and `solve_theta` until `theta` settles.
    Alternating,
}

/// Penalty levels of a regularization path.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaGrid {
    /// `size` log-spaced values from the smallest fully fused penalty down
    /// to `ratio` times it.
    Auto { size: usize, ratio: f64 },
    /// Explicit values, strictly decreasing.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoConfig {
    pub grid: LambdaGrid,
    pub inner_tol: f64,
    pub outer_tol: f64,
    pub max_inner: usize,
    pub max_outer: usize,
    pub v_init: f64,
    pub v_floor: f64,
    /// Upper clamp on the penalty coefficient.
    pub v_ceiling: f64,
    /// `|theta_ij|` at or below this puts `i` and `j` in one group.
    pub zero_tol: f64,
    pub scheme: InnerScheme,
}

impl Default for LassoConfig {
    fn default() -> Self {
        LassoConfig {
            grid: LambdaGrid::Auto { size: 100, ratio: 1e-4 },
            inner_tol: 1e-8,
            outer_tol: 1e-6,
            max_inner: 200,
            max_outer: 500,
            v_init: 1.0,
            v_floor: 1.0,
            v_ceiling: 1e6,
            zero_tol: 1e-10,
            scheme: InnerScheme::Eliminated,
        }
    }
}

impl LassoConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {x}")))
            }
        };
        positive("inner_tol", self.inner_tol)?;
        positive("outer_tol", self.outer_tol)?;
        positive("v_init", self.v_init)?;
        positive("v_floor", self.v_floor)?;
        positive("zero_tol", self.zero_tol)?;
        if self.v_ceiling.is_nan() || self.v_ceiling < self.v_floor {
            return Err(Error::InvalidArgument(format!(
                "v_ceiling {} is below v_floor {}",
                self.v_ceiling, self.v_floor
            )));
        }
        if self.max_inner == 0 || self.max_outer == 0 {
            return Err(Error::InvalidArgument("iteration limits must be at least 1".into()));
        }
        match &self.grid {
            LambdaGrid::Auto { size, ratio } => {
                if *size == 0 || !(*ratio > 0.0 && *ratio < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "automatic grid needs size >= 1 and ratio in (0, 1), got {size} and {ratio}"
                    )));
                }
            }
            LambdaGrid::Explicit(grid) => {
                if grid.is_empty() {
                    return Err(Error::InvalidArgument("lambda grid is empty".into()));
                }
                if grid.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
                    return Err(Error::InvalidArgument("lambda values must be finite and nonnegative".into()));
                }
                if grid.windows(2).any(|p| p[1] >= p[0]) {
                    return Err(Error::InvalidArgument("lambda grid must be strictly decreasing".into()));
                }
            }
        }
        Ok(())
    }
}

/// A converged ranking-lasso fit at one penalty level.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    /// Estimates, with abilities replaced by their group means.
    pub params: ModelParams,
    pub theta: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub v: f64,
    pub lambda: f64,
    pub grouping: Grouping,
    /// Negative log-likelihood at `params`.
    pub neg_loglik: f64,
    pub df: usize,
    pub aic: f64,
    pub bic: f64,
    /// `sum w_ij |mu_i - mu_j|` at the projected abilities, which agrees
    /// with `sum w_ij |theta_ij|` to the outer tolerance and vanishes
    /// exactly on a single group.
    pub penalty: f64,
    pub diagnostics: LassoDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LassoDiagnostics {
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    /// `max |theta_ij - (mu_i - mu_j)|` before the group-mean projection.
    pub max_residual: f64,
    /// Largest multiplier change in the last outer iteration.
    pub multiplier_change: f64,
    /// Pairs grouped together only through transitivity while their own
    /// `theta` is nonzero.
    pub nontransitive_pairs: usize,
}

fn check_inputs(t: &Tournament, w: &AdaptiveWeights, lambda: f64) -> Result<()> {
    if w.k() != t.k() {
        return Err(Error::DimensionMismatch {
            expected: t.k(),
            got: w.k(),
        });
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    Ok(())
}

/// Penalized negative log-likelihood `nll + lambda * sum w_ij |mu_i - mu_j|`.
pub fn penalized_objective(t: &Tournament, params: &ModelParams, lambda: f64, w: &AdaptiveWeights) -> Result<f64> {
    check_inputs(t, w, lambda)?;
    let nll = crate::model::neg_log_likelihood(params, t)?;
    let penalty: f64 = PairIndex::new(t.k())
        .iter()
        .map(|(p, i, j)| w.as_slice()[p] * (params.mu[i] - params.mu[j]).abs())
        .sum();
    Ok(nll + lambda * penalty)
}

/// `theta_ij = soft_threshold(mu_i - mu_j - u_ij / v, lambda * w_ij / v)`.
pub fn solve_theta(mu: &[f64], u: &[f64], v: f64, lambda: f64, w: &AdaptiveWeights) -> Vec<f64> {
    let idx = PairIndex::new(mu.len());
    assert_eq!(u.len(), idx.len());
    assert_eq!(w.k(), mu.len());
    idx.iter()
        .map(|(p, i, j)| soft_threshold(mu[i] - mu[j] - u[p] / v, lambda * w.as_slice()[p] / v))
        .collect()
}

/// `u + v (theta - d)`, and the next penalty coefficient
/// `clamp(max u_new^2, v_floor, v_ceiling)`.
pub fn update_multipliers(u: &[f64], theta: &[f64], mu: &[f64], v: f64, cfg: &LassoConfig) -> (Vec<f64>, f64) {
    let idx = PairIndex::new(mu.len());
    let u_new: Vec<f64> = idx
        .iter()
        .map(|(p, i, j)| u[p] + v * (theta[p] - (mu[i] - mu[j])))
        .collect();
    let peak = u_new.iter().fold(0.0f64, |m, x| m.max(x * x));
    (u_new, peak.clamp(cfg.v_floor, cfg.v_ceiling))
}

fn newton_spec(design: &Design<'_>, cfg: &LassoConfig) -> NewtonSpec {
    let t = design.tournament();
    let mut spec = NewtonSpec::new(design.dim(), t.k());
    spec.fixed[design.tau_index()] = !t.has_home_matches();
    if let Some(dx) = design.delta_index() {
        spec.nonneg[dx] = true;
    }
    spec.max_iter = cfg.max_inner;
    spec.grad_tol = cfg.inner_tol;
    spec
}

fn start_point(t: &Tournament, warm: &ModelParams) -> Result<Vec<f64>> {
    warm.check_for(t)?;
    let mut x = warm.to_vec();
    if !t.has_home_matches() {
        x[t.k()] = 0.0;
    }
    Ok(x)
}

/// Adds a pairwise term with slope `c[p]` in `d_p` and curvature `curv[p]`
/// to gradient and Hessian buffers over the ability block.
fn add_pair_terms(
    idx: PairIndex,
    slope: impl Fn(usize) -> f64,
    curvature: impl Fn(usize) -> f64,
    g: Option<&mut [f64]>,
    h: Option<&mut DMatrix<f64>>,
) {
    if let Some(g) = g {
        for (p, i, j) in idx.iter() {
            let c = slope(p);
            g[i] += c;
            g[j] -= c;
        }
    }
    if let Some(h) = h {
        for (p, i, j) in idx.iter() {
            let c = curvature(p);
            if c != 0.0 {
                h[(i, i)] += c;
                h[(j, j)] += c;
                h[(i, j)] -= c;
                h[(j, i)] -= c;
            }
        }
    }
}

/// Minimizes `nll + sum u (theta - d) + v/2 sum (theta - d)^2` over the
/// model parameters for fixed `theta`, starting from `warm`.
pub fn solve_mu_tau(
    t: &Tournament,
    theta: &[f64],
    u: &[f64],
    v: f64,
    warm: &ModelParams,
    cfg: &LassoConfig,
) -> Result<ModelParams> {
    let idx = PairIndex::new(t.k());
    if theta.len() != idx.len() || u.len() != idx.len() {
        return Err(Error::DimensionMismatch {
            expected: idx.len(),
            got: theta.len().min(u.len()),
        });
    }
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidArgument(format!("v must be positive, got {v}")));
    }
    let x0 = start_point(t, warm)?;
    let (x, _) = minimize_smooth_step(t, theta, u, v, &x0, cfg)?;
    Ok(ModelParams::from_slice(t.k(), t.ties_allowed(), &x))
}

fn minimize_smooth_step(
    t: &Tournament,
    theta: &[f64],
    u: &[f64],
    v: f64,
    x0: &[f64],
    cfg: &LassoConfig,
) -> Result<(Vec<f64>, usize)> {
    let design = Design::full(t);
    let spec = newton_spec(&design, cfg);
    let k = t.k();
    let idx = PairIndex::new(k);
    let mut d = vec![0.0; idx.len()];
    let res = newton::minimize(&spec, x0, |x, mut g: Option<&mut [f64]>, mut h: Option<&mut DMatrix<f64>>| {
        let mut value = design.eval(x, g.as_deref_mut(), h.as_deref_mut());
        differences(&x[..k], &mut d);
        for p in 0..d.len() {
            let r = theta[p] - d[p];
            value += u[p] * r + 0.5 * v * r * r;
        }
        let d = &d;
        add_pair_terms(idx, |p| -u[p] - v * (theta[p] - d[p]), |_| v, g, h);
        value
    })
    .map_err(|_| unreachable_divergence())?;
    if !res.converged {
        return Err(Error::NotConverged {
            what: "lasso smooth sub-problem",
            iterations: res.iterations,
            detail: format!("gradient norm {:.3e}", res.grad_norm),
        });
    }
    Ok((res.x, res.iterations))
}

fn unreachable_divergence() -> Error {
    // no divergence bound is set for the penalized sub-problems
    Error::InvalidArgument("unexpected divergence in a penalized sub-problem".into())
}

/// Minimizes the augmented objective with `theta` substituted by its
/// closed form, leaving a convex, once differentiable function of the pair
/// differences.
fn minimize_eliminated(
    t: &Tournament,
    u: &[f64],
    v: f64,
    thresholds: &[f64],
    x0: &[f64],
    cfg: &LassoConfig,
) -> Result<(Vec<f64>, usize)> {
    let design = Design::full(t);
    let spec = newton_spec(&design, cfg);
    let k = t.k();
    let idx = PairIndex::new(k);
    let np = idx.len();
    let mut d = vec![0.0; np];
    let mut th = vec![0.0; np];
    let res = newton::minimize(&spec, x0, |x, mut g: Option<&mut [f64]>, mut h: Option<&mut DMatrix<f64>>| {
        let mut value = design.eval(x, g.as_deref_mut(), h.as_deref_mut());
        differences(&x[..k], &mut d);
        for p in 0..np {
            let lw = thresholds[p];
            let z = d[p] - u[p] / v;
            th[p] = soft_threshold(z, lw / v);
            let r = th[p] - d[p];
            value += lw * th[p].abs() + u[p] * r + 0.5 * v * r * r;
        }
        let (d, th) = (&d, &th);
        add_pair_terms(
            idx,
            |p| v * (d[p] - th[p]) - u[p],
            |p| if th[p] == 0.0 { v } else { 0.0 },
            g,
            h,
        );
        value
    })
    .map_err(|_| unreachable_divergence())?;
    if !res.converged {
        return Err(Error::NotConverged {
            what: "lasso minimization step",
            iterations: res.iterations,
            detail: format!("gradient norm {:.3e}", res.grad_norm),
        });
    }
    Ok((res.x, res.iterations))
}

/// Fits the ranking lasso at one penalty level. `warm` supplies starting
/// estimates, multipliers and penalty coefficient, typically from the
/// neighboring point of a path.
pub fn fit_lasso(
    t: &Tournament,
    lambda: f64,
    w: &AdaptiveWeights,
    cfg: &LassoConfig,
    warm: Option<&LassoFit>,
) -> Result<LassoFit> {
    cfg.validate()?;
    check_inputs(t, w, lambda)?;
    let k = t.k();
    let idx = PairIndex::new(k);
    let np = idx.len();

    let mut x = match warm {
        Some(f) => start_point(t, &f.params)?,
        None => ModelParams::initial(k, t.ties_allowed()).to_vec(),
    };
    let (mut u, mut v) = match warm {
        Some(f) if f.multipliers.len() == np => (f.multipliers.clone(), f.v),
        _ => (vec![0.0; np], cfg.v_init),
    };
    let thresholds: Vec<f64> = w.as_slice().iter().map(|wp| lambda * wp).collect();
    let mut theta = vec![0.0; np];
    differences(&x[..k], &mut theta);

    let mut diag = LassoDiagnostics::default();
    let mut d = vec![0.0; np];
    let mut previous = f64::INFINITY;
    let mut converged = false;
    while diag.outer_iterations < cfg.max_outer {
        diag.outer_iterations += 1;
        match cfg.scheme {
            InnerScheme::Eliminated => {
                let (xn, iters) = minimize_eliminated(t, &u, v, &thresholds, &x, cfg)?;
                x = xn;
                diag.inner_iterations += iters;
            }
            InnerScheme::Alternating => {
                let mut settled = false;
                for _ in 0..cfg.max_inner {
                    let (xn, iters) = minimize_smooth_step(t, &theta, &u, v, &x, cfg)?;
                    x = xn;
                    diag.inner_iterations += iters;
                    let next = solve_theta(&x[..k], &u, v, lambda, w);
                    let change = next.iter().zip(&theta).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                    theta = next;
                    if change <= cfg.inner_tol {
                        settled = true;
                        break;
                    }
                }
                if !settled {
                    return Err(Error::NotConverged {
                        what: "lasso minimization step",
                        iterations: cfg.max_inner,
                        detail: "alternating updates did not settle".into(),
                    });
                }
            }
        }
        theta = solve_theta(&x[..k], &u, v, lambda, w);
        differences(&x[..k], &mut d);
        diag.max_residual = theta.iter().zip(&d).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

        let params = ModelParams::from_slice(k, t.ties_allowed(), &x);
        let nll = crate::model::neg_log_likelihood(&params, t)?;
        let objective = nll + thresholds.iter().zip(&theta).map(|(l, th)| l * th.abs()).sum::<f64>();

        let (u_new, v_new) = update_multipliers(&u, &theta, &x[..k], v, cfg);
        diag.multiplier_change = u_new.iter().zip(&u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        u = u_new;
        v = v_new;

        if diag.max_residual <= cfg.outer_tol && (objective - previous).abs() <= cfg.outer_tol {
            converged = true;
            break;
        }
        previous = objective;
    }
    if !converged {
        return Err(Error::NotConverged {
            what: "augmented Lagrangian outer loop",
            iterations: diag.outer_iterations,
            detail: format!("lambda {lambda:.4e}, max residual {:.3e}", diag.max_residual),
        });
    }

    let (grouping, nontransitive) = group_by_theta(&x[..k], &theta, cfg.zero_tol);
    diag.nontransitive_pairs = nontransitive;
    let mut params = ModelParams::from_slice(k, t.ties_allowed(), &x);
    params.mu = grouping.expand();
    let neg_loglik = crate::model::neg_log_likelihood(&params, t)?;
    let df = grouping.len();
    let penalty = idx
        .iter()
        .map(|(p, i, j)| w.as_slice()[p] * (params.mu[i] - params.mu[j]).abs())
        .sum();
    Ok(LassoFit {
        params,
        theta,
        multipliers: u,
        v,
        lambda,
        grouping,
        neg_loglik,
        df,
        aic: 2.0 * neg_loglik + 2.0 * df as f64,
        bic: 2.0 * neg_loglik + (t.n() as f64).ln() * df as f64,
        penalty,
        diagnostics: diag,
    })
}

/// Teams `i` and `j` share a group when `|theta_ij| <= zero_tol`, closed
/// transitively; group levels are the mean abilities of the members.
pub fn extract_grouping(fit: &LassoFit, zero_tol: f64) -> Grouping {
    group_by_theta(&fit.params.mu, &fit.theta, zero_tol).0
}

fn group_by_theta(mu: &[f64], theta: &[f64], zero_tol: f64) -> (Grouping, usize) {
    let k = mu.len();
    let idx = PairIndex::new(k);
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for (p, i, j) in idx.iter() {
        if theta[p].abs() <= zero_tol {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let labels: Vec<usize> = (0..k).map(|a| find(&mut parent, a)).collect();
    let nontransitive = idx
        .iter()
        .filter(|&(p, i, j)| labels[i] == labels[j] && theta[p].abs() > zero_tol)
        .count();
    let mut grouping = Grouping::from_labels(&labels, mu);
    grouping.recenter();
    (grouping, nontransitive)
}
