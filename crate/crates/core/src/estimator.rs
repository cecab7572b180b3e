//! The five estimators compared throughout: maximum likelihood, and the
//! ranking lasso and its constrained refit under AIC or BIC selection.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grouping::Grouping;
use crate::lasso::LassoConfig;
use crate::mle::{adaptive_weights, fit_mle_or_ridge, AdaptiveWeights};
use crate::model::{ModelParams, Tournament};
use crate::path::{compute_path, select_with_cache, Criterion, HybridCache, RankingPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimator {
    Mle,
    LassoAic,
    LassoBic,
    HybridAic,
    HybridBic,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [
        Estimator::Mle,
        Estimator::LassoAic,
        Estimator::LassoBic,
        Estimator::HybridAic,
        Estimator::HybridBic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Mle => "mle",
            Estimator::LassoAic => "lasso-aic",
            Estimator::LassoBic => "lasso-bic",
            Estimator::HybridAic => "hybrid-aic",
            Estimator::HybridBic => "hybrid-bic",
        }
    }

    pub fn criterion(self) -> Option<Criterion> {
        match self {
            Estimator::Mle => None,
            Estimator::LassoAic | Estimator::HybridAic => Some(Criterion::Aic),
            Estimator::LassoBic | Estimator::HybridBic => Some(Criterion::Bic),
        }
    }

    pub fn is_hybrid(self) -> bool {
        matches!(self, Estimator::HybridAic | Estimator::HybridBic)
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown estimator {s:?} (expected mle, lasso-aic, lasso-bic, hybrid-aic or hybrid-bic)"
                ))
            })
    }
}

/// Penalty weights of the lasso estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Inverse gaps of the ridge-stabilized maximum likelihood fit.
    #[default]
    Adaptive,
    /// All weights one.
    Uniform,
}

/// Where AIC and BIC are evaluated when choosing the penalty of the lasso
/// estimators. The hybrid estimators always use the constrained refits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scoring {
    /// At the constrained refit of each grouping.
    #[default]
    Refit,
    /// At the lasso estimates themselves.
    Lasso,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineOptions {
    pub lasso: LassoConfig,
    pub weighting: Weighting,
    pub scoring: Scoring,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorFit {
    pub estimator: Estimator,
    pub params: ModelParams,
    /// Teams sharing an ability; singletons for maximum likelihood.
    pub grouping: Grouping,
    /// Selected penalty, for the lasso-based estimators.
    pub lambda: Option<f64>,
    /// A divergent maximum likelihood fit was replaced by the ridge fit.
    pub ridge_fallback: bool,
}

/// Everything fitted for a set of estimators on one tournament.
#[derive(Debug, Clone)]
pub struct PipelineFit {
    pub fits: Vec<EstimatorFit>,
    pub path: Option<RankingPath>,
    pub weights: Option<AdaptiveWeights>,
}

impl PipelineFit {
    pub fn get(&self, estimator: Estimator) -> Option<&EstimatorFit> {
        self.fits.iter().find(|f| f.estimator == estimator)
    }
}

/// Fits the requested estimators, computing the regularization path once
/// for all lasso-based ones.
pub fn fit_estimators(t: &Tournament, estimators: &[Estimator], opts: &PipelineOptions) -> Result<PipelineFit> {
    let mut fits = Vec::with_capacity(estimators.len());
    let needs_path = estimators.iter().any(|e| e.criterion().is_some());
    let (weights, path) = if needs_path {
        let w = match opts.weighting {
            Weighting::Adaptive => adaptive_weights(t)?,
            Weighting::Uniform => AdaptiveWeights::uniform(t.k()),
        };
        let path = compute_path(t, &w, &opts.lasso)?;
        (Some(w), Some(path))
    } else {
        (None, None)
    };
    let mut cache = HybridCache::new();
    for &estimator in estimators {
        let fit = match estimator.criterion() {
            None => {
                let (mle, ridge) = fit_mle_or_ridge(t)?;
                EstimatorFit {
                    estimator,
                    grouping: Grouping::singletons(&mle.params.mu),
                    params: mle.params,
                    lambda: None,
                    ridge_fallback: ridge,
                }
            }
            Some(criterion) => {
                let path = path.as_ref().expect("path computed for lasso estimators");
                let at_refit = estimator.is_hybrid() || opts.scoring == Scoring::Refit;
                let sel = select_with_cache(path, criterion, at_refit, t, &mut cache)?;
                let lambda = Some(sel.lasso.lambda);
                if estimator.is_hybrid() {
                    let refit = sel.hybrid.expect("hybrid selection carries its refit");
                    EstimatorFit {
                        estimator,
                        grouping: sel.lasso.grouping.clone(),
                        params: refit.params,
                        lambda,
                        ridge_fallback: sel.hybrid_ridge,
                    }
                } else {
                    EstimatorFit {
                        estimator,
                        grouping: sel.lasso.grouping.clone(),
                        params: sel.lasso.params,
                        lambda,
                        ridge_fallback: false,
                    }
                }
            }
        };
        fits.push(fit);
    }
    Ok(PipelineFit { fits, path, weights })
}
