//! Repeated random half-splits of the matches, scoring each estimator's
//! predictions on the held-out half.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::estimator::{fit_estimators, Estimator, PipelineOptions};
use crate::inference::{quantile_sorted, replicate_rng, run_replicates};
use crate::model::{match_neg_log_prob, ModelParams, Tournament};

#[derive(Debug, Clone, PartialEq)]
pub struct CvOptions {
    pub reps: usize,
    pub seed: u64,
    /// Largest tolerated share of failed repetitions.
    pub max_failure_rate: f64,
    pub pipeline: PipelineOptions,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            reps: 100,
            seed: 1,
            max_failure_rate: 0.05,
            pipeline: PipelineOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub estimators: Vec<Estimator>,
    /// Validation negative log-likelihood, one row per successful
    /// repetition and one column per estimator.
    pub per_rep_negloglik: Vec<Vec<f64>>,
    /// Share of validation matches whose realized outcome had predicted
    /// probability above one half, laid out like `per_rep_negloglik`.
    pub per_rep_coin: Vec<Vec<f64>>,
    /// Coin-beating share pooled over all validation matches.
    pub coin_fraction: Vec<f64>,
    pub seed: u64,
    pub failures: usize,
    pub ridge_fallbacks: usize,
}

impl CvResult {
    fn column(rows: &[Vec<f64>], e: usize) -> Vec<f64> {
        rows.iter().map(|r| r[e]).collect()
    }

    pub fn mean_negloglik(&self) -> Vec<f64> {
        (0..self.estimators.len())
            .map(|e| {
                let c = Self::column(&self.per_rep_negloglik, e);
                c.iter().sum::<f64>() / c.len() as f64
            })
            .collect()
    }

    pub fn median_negloglik(&self) -> Vec<f64> {
        (0..self.estimators.len())
            .map(|e| {
                let mut c = Self::column(&self.per_rep_negloglik, e);
                c.sort_by(f64::total_cmp);
                quantile_sorted(&c, 0.5)
            })
            .collect()
    }

    pub fn index_of(&self, estimator: Estimator) -> Option<usize> {
        self.estimators.iter().position(|&e| e == estimator)
    }
}

/// Training and validation match indices of repetition `rep`: a random
/// permutation cut into its first `n/2` and remaining entries.
pub fn split(n: usize, seed: u64, rep: u64) -> (Vec<usize>, Vec<usize>) {
    split_with(n, &mut replicate_rng(seed, rep))
}

fn split_with(n: usize, rng: &mut impl Rng) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let validation = order.split_off(n / 2);
    (order, validation)
}

/// Parameters of the full tournament from a fit to a sub-tournament; teams
/// that did not play in it get ability zero.
fn expand(sub: &ModelParams, map: &[Option<usize>]) -> ModelParams {
    ModelParams {
        mu: map.iter().map(|m| m.map_or(0.0, |ix| sub.mu[ix])).collect(),
        tau: sub.tau,
        delta1: sub.delta1,
    }
}

pub fn cross_validate(t: &Tournament, estimators: &[Estimator], opts: &CvOptions) -> Result<CvResult> {
    if t.n() < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 matches, got {}", t.n())));
    }
    if opts.reps == 0 || estimators.is_empty() {
        return Err(Error::InvalidArgument("need at least one repetition and one estimator".into()));
    }
    let (rows, failures, ridge_fallbacks) = run_replicates(opts.reps, opts.seed, opts.max_failure_rate, |rng| {
        let (training, validation) = split_with(t.n(), rng);
        let (train, map) = t.restrict(&training)?;
        let fit = fit_estimators(&train, estimators, &opts.pipeline)?;
        let mut row = Vec::with_capacity(estimators.len());
        for f in &fit.fits {
            let params = expand(&f.params, &map);
            let (mut nll, mut coin) = (0.0, 0usize);
            for &m in &validation {
                let loss = match_neg_log_prob(&params, &t.matches()[m]);
                nll += loss;
                // probability above one half, i.e. loss below log 2
                coin += usize::from(loss < std::f64::consts::LN_2);
            }
            row.push((nll, coin, validation.len()));
        }
        Ok((row, fit.fits.iter().any(|f| f.ridge_fallback)))
    })?;

    let ne = estimators.len();
    let mut coin_hits = vec![0usize; ne];
    let mut coin_total = vec![0usize; ne];
    let mut per_rep_negloglik = Vec::with_capacity(rows.len());
    let mut per_rep_coin = Vec::with_capacity(rows.len());
    for row in &rows {
        per_rep_negloglik.push(row.iter().map(|r| r.0).collect());
        per_rep_coin.push(row.iter().map(|r| r.1 as f64 / r.2 as f64).collect());
        for (e, r) in row.iter().enumerate() {
            coin_hits[e] += r.1;
            coin_total[e] += r.2;
        }
    }
    Ok(CvResult {
        estimators: estimators.to_vec(),
        per_rep_negloglik,
        per_rep_coin,
        coin_fraction: coin_hits.iter().zip(&coin_total).map(|(&h, &n)| h as f64 / n as f64).collect(),
        seed: opts.seed,
        failures,
        ridge_fallbacks,
    })
}
