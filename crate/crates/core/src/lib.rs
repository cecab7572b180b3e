//! Ranking contestants from paired-comparison data with an adaptive
//! fused-lasso penalty on all pairwise ability differences.

pub mod error;
pub mod estimator;
pub mod evaluation;
pub mod grouping;
pub mod inference;
pub mod io;
pub mod lasso;
mod likelihood;
pub mod mle;
pub mod model;
mod newton;
pub mod pairs;
pub mod path;

pub use error::{Error, Result};
pub use estimator::{fit_estimators, Estimator, EstimatorFit, PipelineOptions, Scoring, Weighting};
pub use grouping::Grouping;
pub use io::{load_tournament, read_tournament, save_tournament, write_tournament};
pub use lasso::{fit_lasso, InnerScheme, LambdaGrid, LassoConfig, LassoFit};
pub use mle::{adaptive_weights, constrained_mle, fit_mle, AdaptiveWeights, MleFit};
pub use path::{compute_path, select, Criterion, RankingPath, Selection};
pub use model::{
    gradient, neg_log_likelihood, outcome_probabilities, probability_matrix, MatchRecord, ModelParams, Outcome,
    OutcomeProbs, Record, TeamId, Tournament, Venue,
};
