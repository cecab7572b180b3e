//! Parametric bootstrap and Monte Carlo sampling studies.
//!
//! Replicate `r` draws from its own ChaCha stream `r` under the master seed,
//! so results do not depend on how replicates are spread over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimator::{fit_estimators, Estimator, PipelineOptions};
use crate::model::{outcome_probabilities, ModelParams, Outcome, TeamId, Tournament, Venue};

/// Generator for replicate `rep` of a run seeded with `seed`.
pub fn replicate_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Redraws every outcome of `schedule` from the model at `params`.
pub fn simulate_tournament(params: &ModelParams, schedule: &Tournament, seed: u64) -> Result<Tournament> {
    simulate_with(params, schedule, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn simulate_with<R: Rng + ?Sized>(params: &ModelParams, schedule: &Tournament, rng: &mut R) -> Result<Tournament> {
    params.check_for(schedule)?;
    let outcomes: Vec<Outcome> = schedule
        .matches()
        .iter()
        .map(|m| {
            let p = outcome_probabilities(params, m.i, m.j, m.venue);
            let x: f64 = rng.random();
            if x < p.win_i {
                Outcome::WinI
            } else if x < p.win_i + p.tie {
                Outcome::Tie
            } else {
                Outcome::WinJ
            }
        })
        .collect();
    schedule.with_outcomes(&outcomes)
}

/// A scalar function of the fitted parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity {
    Ability(usize),
    /// `mu_i - mu_j`.
    AbilityDifference(usize, usize),
    /// Probability that team `i` beats team `j` at the given venue.
    WinProbability { i: usize, j: usize, venue: Venue },
}

impl Quantity {
    pub fn evaluate(&self, params: &ModelParams) -> f64 {
        match *self {
            Quantity::Ability(i) => params.mu[i],
            Quantity::AbilityDifference(i, j) => params.mu[i] - params.mu[j],
            Quantity::WinProbability { i, j, venue } => {
                outcome_probabilities(params, TeamId(i), TeamId(j), venue).win_i
            }
        }
    }

    pub fn label(&self, t: &Tournament) -> String {
        let name = |i: usize| t.team_name(TeamId(i));
        match *self {
            Quantity::Ability(i) => format!("mu[{}]", name(i)),
            Quantity::AbilityDifference(i, j) => format!("mu[{}] - mu[{}]", name(i), name(j)),
            Quantity::WinProbability { i, j, venue } => {
                let at = match venue {
                    Venue::HomeI => format!(" at {}", name(i)),
                    Venue::HomeJ => format!(" at {}", name(j)),
                    Venue::Neutral => " (neutral)".into(),
                };
                format!("P({} beats {}{at})", name(i), name(j))
            }
        }
    }

    fn check(&self, k: usize) -> Result<()> {
        let ok = match *self {
            Quantity::Ability(i) => i < k,
            Quantity::AbilityDifference(i, j) | Quantity::WinProbability { i, j, .. } => i < k && j < k && i != j,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("quantity {self:?} does not fit {k} teams")))
        }
    }
}

/// Bias-corrected percentile interval. The quantile levels are
/// `Phi(2 z0 -+ z)` with `z0 = Phi^-1(share of replicates below point)`;
/// a share of 0 or 1 is pulled in to `1/(2B)` from the boundary.
pub fn bc_interval(replicates: &[f64], point: f64, level: f64) -> (f64, f64) {
    assert!(!replicates.is_empty(), "no replicates");
    assert!(level > 0.0 && level < 1.0, "level must lie in (0, 1)");
    let mut sorted = replicates.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return (point, point);
    }
    let b = sorted.len() as f64;
    let below = sorted.iter().filter(|&&x| x < point).count() as f64;
    let share = (below / b).clamp(0.5 / b, 1.0 - 0.5 / b);
    let normal = Normal::standard();
    let z0 = normal.inverse_cdf(share);
    let z = normal.inverse_cdf(0.5 + level / 2.0);
    (
        quantile_sorted(&sorted, normal.cdf(2.0 * z0 - z)),
        quantile_sorted(&sorted, normal.cdf(2.0 * z0 + z)),
    )
}

/// Linear-interpolation sample quantile (R type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapOptions {
    pub reps: usize,
    pub seed: u64,
    pub level: f64,
    /// Largest tolerated share of failed replicates.
    pub max_failure_rate: f64,
    pub pipeline: PipelineOptions,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions {
            reps: 1000,
            seed: 1,
            level: 0.9,
            max_failure_rate: 0.05,
            pipeline: PipelineOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapSummary {
    pub estimator: Estimator,
    pub quantities: Vec<Quantity>,
    /// Quantities at the fit to the observed data.
    pub point: Vec<f64>,
    /// One row per successful replicate, in replicate order.
    pub replicates: Vec<Vec<f64>>,
    pub intervals: Vec<(f64, f64)>,
    pub level: f64,
    pub seed: u64,
    pub failures: usize,
    /// Replicates whose maximum likelihood step fell back to the ridge fit.
    pub ridge_fallbacks: usize,
}

impl BootstrapSummary {
    /// Replicate values of quantity `q`.
    pub fn column(&self, q: usize) -> Vec<f64> {
        self.replicates.iter().map(|r| r[q]).collect()
    }
}

enum Replicate<T> {
    Ok(T, bool),
    Failed,
}

pub(crate) fn run_replicates<T: Send>(
    reps: usize,
    seed: u64,
    max_failure_rate: f64,
    f: impl Fn(&mut ChaCha8Rng) -> Result<(T, bool)> + Sync,
) -> Result<(Vec<T>, usize, usize)> {
    let results: Vec<Result<Replicate<T>>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r as u64);
            match f(&mut rng) {
                Ok((v, ridge)) => Ok(Replicate::Ok(v, ridge)),
                Err(e) if e.is_numerical() => Ok(Replicate::Failed),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut values = Vec::with_capacity(reps);
    let (mut failed, mut ridge) = (0, 0);
    for r in results {
        match r? {
            Replicate::Ok(v, used_ridge) => {
                values.push(v);
                ridge += usize::from(used_ridge);
            }
            Replicate::Failed => failed += 1,
        }
    }
    if failed as f64 > max_failure_rate * reps as f64 || values.is_empty() {
        return Err(Error::TooManyFailures { failed, total: reps });
    }
    Ok((values, failed, ridge))
}

/// Parametric bootstrap of `estimator`: fit it to `t`, simulate replicate
/// tournaments from that fit over the same schedule, refit the whole
/// estimator (adaptive weights and penalty selection included) on each.
pub fn bootstrap(
    estimator: Estimator,
    t: &Tournament,
    quantities: &[Quantity],
    opts: &BootstrapOptions,
) -> Result<BootstrapSummary> {
    if opts.reps < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 replicates, got {}", opts.reps)));
    }
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::InvalidArgument(format!("level must lie in (0, 1), got {}", opts.level)));
    }
    for q in quantities {
        q.check(t.k())?;
    }
    let fitted = fit_estimators(t, &[estimator], &opts.pipeline)?;
    let params = fitted.fits[0].params.clone();
    let point: Vec<f64> = quantities.iter().map(|q| q.evaluate(&params)).collect();

    let (replicates, failures, ridge_fallbacks) = run_replicates(opts.reps, opts.seed, opts.max_failure_rate, |rng| {
        let sim = simulate_with(&params, t, rng)?;
        let fit = fit_estimators(&sim, &[estimator], &opts.pipeline)?;
        let f = &fit.fits[0];
        Ok((quantities.iter().map(|q| q.evaluate(&f.params)).collect::<Vec<f64>>(), f.ridge_fallback))
    })?;

    let intervals = (0..quantities.len())
        .map(|q| {
            let col: Vec<f64> = replicates.iter().map(|r| r[q]).collect();
            bc_interval(&col, point[q], opts.level)
        })
        .collect();
    Ok(BootstrapSummary {
        estimator,
        quantities: quantities.to_vec(),
        point,
        replicates,
        intervals,
        level: opts.level,
        seed: opts.seed,
        failures,
        ridge_fallbacks,
    })
}

/// Five-number box plot summary with Tukey whiskers (most extreme values
/// within 1.5 IQR of the quartiles).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSummary {
    pub lower_whisker: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub upper_whisker: f64,
    pub mean: f64,
}

impl BoxSummary {
    pub fn of(values: &[f64]) -> BoxSummary {
        assert!(!values.is_empty());
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        let (q1, median, q3) = (quantile_sorted(&s, 0.25), quantile_sorted(&s, 0.5), quantile_sorted(&s, 0.75));
        let fence = 1.5 * (q3 - q1);
        let lower_whisker = *s.iter().find(|&&x| x >= q1 - fence).unwrap();
        let upper_whisker = *s.iter().rev().find(|&&x| x <= q3 + fence).unwrap();
        BoxSummary {
            lower_whisker,
            q1,
            median,
            q3,
            upper_whisker,
            mean: s.iter().sum::<f64>() / s.len() as f64,
        }
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Replicate distribution of every quantity under one estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingDistribution {
    pub estimator: Estimator,
    /// `values[q]` holds quantity `q` over the successful replicates.
    pub values: Vec<Vec<f64>>,
    pub summaries: Vec<BoxSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingStudy {
    pub quantities: Vec<Quantity>,
    /// Quantities at the true parameters.
    pub truth: Vec<f64>,
    pub distributions: Vec<SamplingDistribution>,
    pub failures: usize,
    pub ridge_fallbacks: usize,
}

/// Monte Carlo distribution of the estimators when data are simulated from
/// `truth` over `schedule`.
pub fn sampling_study(
    truth: &ModelParams,
    schedule: &Tournament,
    estimators: &[Estimator],
    quantities: &[Quantity],
    opts: &BootstrapOptions,
) -> Result<SamplingStudy> {
    truth.check_for(schedule)?;
    for q in quantities {
        q.check(schedule.k())?;
    }
    let (rows, failures, ridge_fallbacks) = run_replicates(opts.reps, opts.seed, opts.max_failure_rate, |rng| {
        let sim = simulate_with(truth, schedule, rng)?;
        let fit = fit_estimators(&sim, estimators, &opts.pipeline)?;
        let values: Vec<Vec<f64>> = fit
            .fits
            .iter()
            .map(|f| quantities.iter().map(|q| q.evaluate(&f.params)).collect())
            .collect();
        Ok((values, fit.fits.iter().any(|f| f.ridge_fallback)))
    })?;
    let distributions = estimators
        .iter()
        .enumerate()
        .map(|(e, &estimator)| {
            let values: Vec<Vec<f64>> = (0..quantities.len())
                .map(|q| rows.iter().map(|r| r[e][q]).collect())
                .collect();
            let summaries = values.iter().map(|v| BoxSummary::of(v)).collect();
            SamplingDistribution {
                estimator,
                values,
                summaries,
            }
        })
        .collect();
    Ok(SamplingStudy {
        quantities: quantities.to_vec(),
        truth: quantities.iter().map(|q| q.evaluate(truth)).collect(),
        distributions,
        failures,
        ridge_fallbacks,
    })
}
