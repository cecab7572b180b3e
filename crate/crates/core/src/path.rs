//! Regularization paths over a decreasing penalty grid and model selection
//! by AIC or BIC, optionally evaluated at the constrained refits.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::grouping::Grouping;
use crate::lasso::{fit_lasso, LambdaGrid, LassoConfig, LassoFit};
use crate::mle::{constrained_mle, constrained_mle_ridge, AdaptiveWeights, MleFit, ADAPTIVE_RIDGE};
use crate::model::Tournament;

/// Fits along a strictly decreasing penalty grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingPath {
    /// Converged fits, largest penalty first.
    pub points: Vec<LassoFit>,
    /// `s / max(s)` for each point, `s` being the weighted L1 norm of the
    /// pair differences.
    pub relative_bound: Vec<f64>,
    /// Grid values whose fit failed, with the reason.
    pub failures: Vec<(f64, String)>,
}

/// Smallest penalty at which every team is fused into one group, located by
/// doubling and then bisection to a relative precision of `1e-3`.
pub fn lambda_max(t: &Tournament, w: &AdaptiveWeights, cfg: &LassoConfig) -> Result<f64> {
    let mut hi = 1.0;
    let mut hi_fit = fit_lasso(t, hi, w, cfg, None)?;
    let mut lo = 0.0;
    let mut lo_fit = None;
    if hi_fit.df == 1 {
        // shrink until some team separates
        loop {
            let lambda = hi / 2.0;
            let fit = fit_lasso(t, lambda, w, cfg, Some(&hi_fit))?;
            if fit.df > 1 {
                lo = lambda;
                lo_fit = Some(fit);
                break;
            }
            hi = lambda;
            hi_fit = fit;
            if hi < 1e-12 {
                return Ok(hi);
            }
        }
    } else {
        for _ in 0..200 {
            let lambda = hi * 2.0;
            let fit = fit_lasso(t, lambda, w, cfg, Some(&hi_fit))?;
            lo = hi;
            lo_fit = Some(std::mem::replace(&mut hi_fit, fit));
            hi = lambda;
            if hi_fit.df == 1 {
                break;
            }
        }
        if hi_fit.df != 1 {
            return Err(Error::NotConverged {
                what: "search for the fully fused penalty",
                iterations: 200,
                detail: format!("still {} groups at lambda {hi:.3e}", hi_fit.df),
            });
        }
    }
    while hi - lo > 1e-3 * hi {
        let lambda = 0.5 * (lo + hi);
        let warm = lo_fit.as_ref().unwrap_or(&hi_fit);
        let fit = fit_lasso(t, lambda, w, cfg, Some(warm))?;
        if fit.df == 1 {
            hi = lambda;
            hi_fit = fit;
        } else {
            lo = lambda;
            lo_fit = Some(fit);
        }
    }
    Ok(hi)
}

/// The penalty values of `cfg.grid`, resolving an automatic grid against
/// the data.
pub fn lambda_grid(t: &Tournament, w: &AdaptiveWeights, cfg: &LassoConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    match &cfg.grid {
        LambdaGrid::Explicit(grid) => Ok(grid.clone()),
        LambdaGrid::Auto { size, ratio } => {
            let top = lambda_max(t, w, cfg)?;
            if *size == 1 {
                return Ok(vec![top]);
            }
            let step = ratio.ln() / (*size - 1) as f64;
            Ok((0..*size).map(|i| top * (step * i as f64).exp()).collect())
        }
    }
}

/// Fits every grid value, each warm-started from the previous solution.
/// Failed points are recorded and skipped.
pub fn compute_path(t: &Tournament, w: &AdaptiveWeights, cfg: &LassoConfig) -> Result<RankingPath> {
    let grid = lambda_grid(t, w, cfg)?;
    let mut points: Vec<LassoFit> = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    for &lambda in &grid {
        match fit_lasso(t, lambda, w, cfg, points.last()) {
            Ok(fit) => points.push(fit),
            Err(e) if e.is_numerical() => failures.push((lambda, e.to_string())),
            Err(e) => return Err(e),
        }
    }
    if points.is_empty() {
        return Err(Error::NotConverged {
            what: "regularization path",
            iterations: grid.len(),
            detail: failures.first().map(|f| f.1.clone()).unwrap_or_default(),
        });
    }
    let top = points.iter().map(|p| p.penalty).fold(0.0, f64::max);
    let relative_bound = points
        .iter()
        .map(|p| if top > 0.0 { p.penalty / top } else { 0.0 })
        .collect();
    Ok(RankingPath {
        points,
        relative_bound,
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Aic,
    Bic,
}

impl Criterion {
    /// `2 nll + c df` with `c = 2` or `log n`.
    pub fn score(self, neg_loglik: f64, df: usize, n: usize) -> f64 {
        let c = match self {
            Criterion::Aic => 2.0,
            Criterion::Bic => (n as f64).ln(),
        };
        2.0 * neg_loglik + c * df as f64
    }
}

/// A selected point of a path.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Position in `RankingPath::points`.
    pub index: usize,
    pub lasso: LassoFit,
    /// Constrained refit on the selected grouping, for hybrid selection.
    pub hybrid: Option<MleFit>,
    /// The refit diverged and was replaced by the ridge-stabilized fit.
    pub hybrid_ridge: bool,
    /// Criterion value of the selected point.
    pub score: f64,
}

/// Constrained refits keyed by partition, shared between selections on the
/// same path.
#[derive(Debug, Default)]
pub struct HybridCache {
    fits: HashMap<Vec<usize>, (MleFit, bool)>,
}

impl HybridCache {
    pub fn new() -> Self {
        HybridCache::default()
    }

    /// Constrained maximum likelihood on `grouping`; a divergent refit is
    /// replaced by the ridge-stabilized one, reported by the flag.
    pub fn refit(&mut self, t: &Tournament, grouping: &Grouping) -> Result<(&MleFit, bool)> {
        let key = grouping.partition_key();
        if !self.fits.contains_key(&key) {
            let entry = match constrained_mle(t, grouping) {
                Ok(f) => (f, false),
                Err(Error::Divergent { .. }) => (constrained_mle_ridge(t, grouping, ADAPTIVE_RIDGE)?, true),
                Err(e) => return Err(e),
            };
            self.fits.insert(key.clone(), entry);
        }
        let (fit, ridge) = &self.fits[&key];
        Ok((fit, *ridge))
    }
}

/// Picks the path point minimizing the criterion, computed at the lasso
/// estimates or, with `hybrid`, at the constrained refit of each point's
/// grouping. Ties go to the larger penalty.
pub fn select(path: &RankingPath, criterion: Criterion, hybrid: bool, t: &Tournament) -> Result<Selection> {
    select_with_cache(path, criterion, hybrid, t, &mut HybridCache::new())
}

pub fn select_with_cache(
    path: &RankingPath,
    criterion: Criterion,
    hybrid: bool,
    t: &Tournament,
    cache: &mut HybridCache,
) -> Result<Selection> {
    if path.points.is_empty() {
        return Err(Error::InvalidArgument("cannot select from an empty path".into()));
    }
    let mut best: Option<(usize, f64)> = None;
    for (ix, point) in path.points.iter().enumerate() {
        let nll = if hybrid {
            cache.refit(t, &point.grouping)?.0.neg_loglik
        } else {
            point.neg_loglik
        };
        let score = criterion.score(nll, point.df, t.n());
        // points run from large to small penalty, so strict improvement
        // keeps the sparser model on ties
        if best.is_none_or(|(_, s)| score < s) {
            best = Some((ix, score));
        }
    }
    let (index, score) = best.expect("nonempty path");
    let lasso = path.points[index].clone();
    let (hybrid_fit, hybrid_ridge) = if hybrid {
        let (fit, ridge) = cache.refit(t, &lasso.grouping)?;
        (Some(fit.clone()), ridge)
    } else {
        (None, false)
    };
    Ok(Selection {
        index,
        lasso,
        hybrid: hybrid_fit,
        hybrid_ridge,
        score,
    })
}
