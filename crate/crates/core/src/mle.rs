//! Maximum likelihood fitting, optionally ridge-stabilized or with abilities
//! tied within groups, and the adaptive penalty weights derived from it.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grouping::Grouping;
use crate::likelihood::Design;
use crate::model::{ModelParams, Tournament};
use crate::newton::{self, NewtonFailure, NewtonSpec};
use crate::pairs::PairIndex;

/// Ridge coefficient used for the adaptive weights.
pub const ADAPTIVE_RIDGE: f64 = 1e-4;
/// Upper bound on an adaptive weight (reached when two estimates coincide).
pub const WEIGHT_CAP: f64 = 1e8;
/// Unpenalized fits whose ability spread exceeds this are reported as
/// divergent. An ability gap of 15 already means a win probability within
/// 3e-7 of certainty, while a separated fit drifts past 18 before its
/// gradient falls under the convergence tolerance.
pub const DIVERGENCE_BOUND: f64 = 15.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MleFit {
    pub params: ModelParams,
    /// Standard errors in the layout `[mu.., tau, delta1?]`; NaN for an
    /// unidentified home advantage.
    pub se: Vec<f64>,
    /// Negative log-likelihood at the estimate (without the ridge term).
    pub neg_loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    /// False when no match has a home team, in which case `tau` is fixed at 0.
    pub tau_identified: bool,
}

/// Minimizes the negative log-likelihood plus
/// `ridge_eps * sum_{i<j} (mu_i - mu_j)^2` under the sum-to-zero contrast.
pub fn fit_mle(t: &Tournament, ridge_eps: f64) -> Result<MleFit> {
    let labels: Vec<usize> = (0..t.k()).collect();
    fit_grouped(t, &labels, t.k(), ridge_eps, None)
}

/// Maximum likelihood with the abilities of teams in the same group tied.
pub fn constrained_mle(t: &Tournament, grouping: &Grouping) -> Result<MleFit> {
    constrained_mle_ridge(t, grouping, 0.0)
}

pub fn constrained_mle_ridge(t: &Tournament, grouping: &Grouping, ridge_eps: f64) -> Result<MleFit> {
    if grouping.teams() != t.k() {
        return Err(Error::DimensionMismatch {
            expected: t.k(),
            got: grouping.teams(),
        });
    }
    fit_grouped(t, grouping.assignment(), grouping.len(), ridge_eps, None)
}

/// Pure maximum likelihood, falling back to the ridge-stabilized fit when the
/// estimates diverge. The flag reports whether the fallback was used.
pub fn fit_mle_or_ridge(t: &Tournament) -> Result<(MleFit, bool)> {
    match fit_mle(t, 0.0) {
        Ok(fit) => Ok((fit, false)),
        Err(Error::Divergent { .. }) => Ok((fit_mle(t, ADAPTIVE_RIDGE)?, true)),
        Err(e) => Err(e),
    }
}

pub(crate) fn fit_grouped(
    t: &Tournament,
    assignment: &[usize],
    groups: usize,
    ridge_eps: f64,
    warm: Option<&[f64]>,
) -> Result<MleFit> {
    if ridge_eps < 0.0 || !ridge_eps.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ridge coefficient must be finite and nonnegative, got {ridge_eps}"
        )));
    }
    let design = Design::grouped(t, assignment, groups);
    let dim = design.dim();
    let sizes = design.coord_sizes();
    let k = t.k() as f64;

    let mut spec = NewtonSpec::new(dim, groups);
    spec.center_weights = sizes.clone();
    let tau_identified = t.has_home_matches();
    spec.fixed[design.tau_index()] = !tau_identified;
    if let Some(dx) = design.delta_index() {
        spec.nonneg[dx] = true;
    }
    if ridge_eps == 0.0 {
        spec.divergence_bound = Some(DIVERGENCE_BOUND);
    }

    let x0 = match warm {
        Some(w) => w.to_vec(),
        None => {
            let mut x = vec![0.0; dim];
            if let Some(dx) = design.delta_index() {
                x[dx] = ModelParams::initial(0, true).delta1.unwrap();
            }
            x
        }
    };

    let objective = |x: &[f64], g: Option<&mut [f64]>, h: Option<&mut DMatrix<f64>>| {
        objective_with_ridge(&design, &sizes, k, ridge_eps, x, g, h)
    };
    let res = newton::minimize(&spec, &x0, objective).map_err(|f| match f {
        NewtonFailure::Diverged { coord } => Error::Divergent {
            team: t.teams()[assignment.iter().position(|&a| a == coord).unwrap_or(0)].clone(),
            bound: DIVERGENCE_BOUND,
        },
    })?;
    if !res.converged {
        return Err(Error::NotConverged {
            what: "maximum likelihood fit",
            iterations: res.iterations,
            detail: format!("gradient norm {:.3e}", res.grad_norm),
        });
    }

    let mut h = DMatrix::zeros(dim, dim);
    let mut g = vec![0.0; dim];
    objective_with_ridge(&design, &sizes, k, ridge_eps, &res.x, Some(&mut g), Some(&mut h));
    let cov = newton::constrained_covariance(&spec, &h);
    let coord_se = |c: usize| match &cov {
        Some(cov) if !spec.fixed[c] => cov[(c, c)].max(0.0).sqrt(),
        _ => f64::NAN,
    };

    let mu = design.expand_abilities(&res.x);
    let mut se: Vec<f64> = assignment.iter().map(|&c| coord_se(c)).collect();
    se.push(coord_se(design.tau_index()));
    if let Some(dx) = design.delta_index() {
        se.push(coord_se(dx));
    }
    let params = ModelParams {
        mu,
        tau: res.x[design.tau_index()],
        delta1: design.delta_index().map(|dx| res.x[dx]),
    };
    let neg_loglik = design.eval(&res.x, None, None);
    Ok(MleFit {
        params,
        se,
        neg_loglik,
        converged: true,
        iterations: res.iterations,
        tau_identified,
    })
}

/// Likelihood plus `eps * sum_{i<j} (mu_i - mu_j)^2` expressed over ability
/// coordinates shared by `sizes[c]` teams.
fn objective_with_ridge(
    design: &Design<'_>,
    sizes: &[f64],
    k: f64,
    eps: f64,
    x: &[f64],
    mut g: Option<&mut [f64]>,
    mut h: Option<&mut DMatrix<f64>>,
) -> f64 {
    let mut value = design.eval(x, g.as_deref_mut(), h.as_deref_mut());
    if eps == 0.0 {
        return value;
    }
    let m = sizes.len();
    let total: f64 = (0..m).map(|c| sizes[c] * x[c]).sum();
    let sq: f64 = (0..m).map(|c| sizes[c] * x[c] * x[c]).sum();
    value += eps * (k * sq - total * total);
    if let Some(g) = g {
        for c in 0..m {
            g[c] += 2.0 * eps * sizes[c] * (k * x[c] - total);
        }
    }
    if let Some(h) = h {
        for r in 0..m {
            for c in 0..m {
                h[(r, c)] -= 2.0 * eps * sizes[r] * sizes[c];
            }
            h[(r, r)] += 2.0 * eps * k * sizes[r];
        }
    }
    value
}

/// Pairwise penalty weights `w_ij`, `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveWeights {
    k: usize,
    w: Vec<f64>,
}

impl AdaptiveWeights {
    /// `w_ij = min(1 / |mu_i - mu_j|, WEIGHT_CAP)`.
    pub fn from_abilities(mu: &[f64]) -> Self {
        let idx = PairIndex::new(mu.len());
        let w = idx
            .iter()
            .map(|(_, i, j)| {
                let gap = (mu[i] - mu[j]).abs();
                if gap > 0.0 {
                    (1.0 / gap).min(WEIGHT_CAP)
                } else {
                    WEIGHT_CAP
                }
            })
            .collect();
        AdaptiveWeights { k: mu.len(), w }
    }

    /// All weights equal to one (the non-adaptive penalty).
    pub fn uniform(k: usize) -> Self {
        AdaptiveWeights {
            k,
            w: vec![1.0; PairIndex::new(k).len()],
        }
    }

    pub fn from_pairs(k: usize, w: Vec<f64>) -> Result<Self> {
        if w.len() != PairIndex::new(k).len() {
            return Err(Error::DimensionMismatch {
                expected: PairIndex::new(k).len(),
                got: w.len(),
            });
        }
        if let Some(bad) = w.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "penalty weights must be finite and positive, got {bad}"
            )));
        }
        Ok(AdaptiveWeights { k, w })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.w[PairIndex::new(self.k).index(a, b)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }
}

/// Adaptive weights from the ridge-stabilized maximum likelihood fit.
pub fn adaptive_weights(t: &Tournament) -> Result<AdaptiveWeights> {
    let fit = fit_mle(t, ADAPTIVE_RIDGE)?;
    Ok(AdaptiveWeights::from_abilities(&fit.params.mu))
}
