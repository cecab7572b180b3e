//! Tournament data and the paired-comparison likelihood.
//!
//! The binary model is the Bradley–Terry logistic model with a common home
//! advantage: with linear predictor `eta = h * tau + mu_i - mu_j`,
//! `P(i beats j) = logistic(eta)`.
//!
//! The ties model is a cumulative-link extension with a single free cutpoint
//! `delta1 >= 0` and `delta0 = -delta1`. Writing the outcome as
//! `Y = 0` (j wins), `1` (tie), `2` (i wins):
//!
//! ```text
//! P(Y <= 0) = logistic(-delta1 - eta)
//! P(Y <= 1) = logistic( delta1 - eta)
//! ```
//!
//! so `P(i wins) = logistic(eta - delta1)` grows with `mu_i`, and at
//! `delta1 = 0` the tie category is empty and the binary model is recovered.

use crate::error::{Error, Result};
use crate::likelihood;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TeamId(pub usize);

impl TeamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Where a match was played, relative to the first-listed team.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Venue {
    HomeI,
    Neutral,
    HomeJ,
}

impl Venue {
    /// The home-field indicator `h`.
    pub fn indicator(self) -> i8 {
        match self {
            Venue::HomeI => 1,
            Venue::Neutral => 0,
            Venue::HomeJ => -1,
        }
    }

    pub fn from_indicator(h: i8) -> Option<Venue> {
        match h {
            1 => Some(Venue::HomeI),
            0 => Some(Venue::Neutral),
            -1 => Some(Venue::HomeJ),
            _ => None,
        }
    }

    pub fn mirrored(self) -> Venue {
        match self {
            Venue::HomeI => Venue::HomeJ,
            Venue::Neutral => Venue::Neutral,
            Venue::HomeJ => Venue::HomeI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    WinI,
    Tie,
    WinJ,
}

impl Outcome {
    pub fn mirrored(self) -> Outcome {
        match self {
            Outcome::WinI => Outcome::WinJ,
            Outcome::Tie => Outcome::Tie,
            Outcome::WinJ => Outcome::WinI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchRecord {
    pub i: TeamId,
    pub j: TeamId,
    pub venue: Venue,
    pub outcome: Outcome,
}

impl MatchRecord {
    pub fn new(i: usize, j: usize, venue: Venue, outcome: Outcome) -> Self {
        MatchRecord {
            i: TeamId(i),
            j: TeamId(j),
            venue,
            outcome,
        }
    }

    /// The same match described from the other team's side.
    pub fn mirrored(&self) -> MatchRecord {
        MatchRecord {
            i: self.j,
            j: self.i,
            venue: self.venue.mirrored(),
            outcome: self.outcome.mirrored(),
        }
    }
}

/// Win, tie and loss counts for one team.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Record {
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
}

impl Record {
    pub fn games(&self) -> usize {
        self.wins + self.ties + self.losses
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tournament {
    teams: Vec<String>,
    matches: Vec<MatchRecord>,
    ties_allowed: bool,
}

impl Tournament {
    /// Validates and builds a tournament. Team indices are positions in
    /// `teams`.
    pub fn new(teams: Vec<String>, matches: Vec<MatchRecord>, ties_allowed: bool) -> Result<Self> {
        if teams.len() < 2 {
            return Err(Error::InvalidTournament(format!(
                "need at least two teams, got {}",
                teams.len()
            )));
        }
        if matches.is_empty() {
            return Err(Error::InvalidTournament("no matches".into()));
        }
        let k = teams.len();
        for (index, m) in matches.iter().enumerate() {
            if m.i.0 >= k || m.j.0 >= k {
                return Err(Error::InvalidTournament(format!(
                    "match {index} references team outside 0..{k}"
                )));
            }
            if m.i == m.j {
                return Err(Error::InvalidTournament(format!(
                    "match {index} pairs team {} with itself",
                    teams[m.i.0]
                )));
            }
            if !ties_allowed && m.outcome == Outcome::Tie {
                return Err(Error::TieInBinaryTournament { index });
            }
        }
        Ok(Tournament {
            teams,
            matches,
            ties_allowed,
        })
    }

    pub fn k(&self) -> usize {
        self.teams.len()
    }

    pub fn n(&self) -> usize {
        self.matches.len()
    }

    pub fn teams(&self) -> &[String] {
        &self.teams
    }

    pub fn team_name(&self, id: TeamId) -> &str {
        &self.teams[id.0]
    }

    pub fn team_id(&self, name: &str) -> Option<TeamId> {
        self.teams.iter().position(|t| t == name).map(TeamId)
    }

    pub fn matches(&self) -> &[MatchRecord] {
        &self.matches
    }

    pub fn ties_allowed(&self) -> bool {
        self.ties_allowed
    }

    /// Whether any match carries a nonzero home indicator (otherwise the home
    /// advantage is not identified).
    pub fn has_home_matches(&self) -> bool {
        self.matches.iter().any(|m| m.venue != Venue::Neutral)
    }

    pub fn records(&self) -> Vec<Record> {
        let mut rec = vec![Record::default(); self.k()];
        for m in &self.matches {
            match m.outcome {
                Outcome::WinI => {
                    rec[m.i.0].wins += 1;
                    rec[m.j.0].losses += 1;
                }
                Outcome::WinJ => {
                    rec[m.j.0].wins += 1;
                    rec[m.i.0].losses += 1;
                }
                Outcome::Tie => {
                    rec[m.i.0].ties += 1;
                    rec[m.j.0].ties += 1;
                }
            }
        }
        rec
    }

    /// Same teams and schedule with different outcomes.
    pub fn with_outcomes(&self, outcomes: &[Outcome]) -> Result<Tournament> {
        if outcomes.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: outcomes.len(),
            });
        }
        let matches = self
            .matches
            .iter()
            .zip(outcomes)
            .map(|(m, &outcome)| MatchRecord { outcome, ..*m })
            .collect();
        Tournament::new(self.teams.clone(), matches, self.ties_allowed)
    }

    /// The sub-tournament formed by the given matches, keeping only the teams
    /// that appear in them. The second element maps every original team to
    /// its index in the sub-tournament.
    pub fn restrict(&self, match_indices: &[usize]) -> Result<(Tournament, Vec<Option<usize>>)> {
        let mut map = vec![None; self.k()];
        let mut teams = Vec::new();
        let mut matches = Vec::with_capacity(match_indices.len());
        for &idx in match_indices {
            let m = self.matches.get(idx).ok_or_else(|| {
                Error::InvalidArgument(format!("match index {idx} out of range"))
            })?;
            let mut local = |id: TeamId| {
                *map[id.0].get_or_insert_with(|| {
                    teams.push(self.teams[id.0].clone());
                    teams.len() - 1
                })
            };
            let i = local(m.i);
            let j = local(m.j);
            matches.push(MatchRecord::new(i, j, m.venue, m.outcome));
        }
        let sub = Tournament::new(teams, matches, self.ties_allowed)?;
        Ok((sub, map))
    }
}

/// Abilities (sum-to-zero), home advantage and, for the ties model, the tie
/// cutpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub mu: Vec<f64>,
    pub tau: f64,
    pub delta1: Option<f64>,
}

impl ModelParams {
    pub fn zeros(k: usize, ties: bool) -> Self {
        ModelParams {
            mu: vec![0.0; k],
            tau: 0.0,
            delta1: ties.then_some(0.0),
        }
    }

    /// Starting point for the fitters: abilities and home advantage at zero,
    /// tie cutpoint at 0.5.
    pub fn initial(k: usize, ties: bool) -> Self {
        ModelParams {
            delta1: ties.then_some(0.5),
            ..ModelParams::zeros(k, ties)
        }
    }

    pub fn k(&self) -> usize {
        self.mu.len()
    }

    /// Length of the flat layout `[mu.., tau, delta1?]`.
    pub fn dim(&self) -> usize {
        self.mu.len() + 1 + usize::from(self.delta1.is_some())
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend_from_slice(&self.mu);
        v.push(self.tau);
        if let Some(d) = self.delta1 {
            v.push(d);
        }
        v
    }

    pub fn from_slice(k: usize, ties: bool, x: &[f64]) -> Self {
        ModelParams {
            mu: x[..k].to_vec(),
            tau: x[k],
            delta1: ties.then(|| x[k + 1]),
        }
    }

    /// Subtracts the mean ability.
    pub fn center(&mut self) {
        if self.mu.is_empty() {
            return;
        }
        let mean = self.mu.iter().sum::<f64>() / self.mu.len() as f64;
        self.mu.iter_mut().for_each(|m| *m -= mean);
    }

    pub fn check_for(&self, t: &Tournament) -> Result<()> {
        if self.mu.len() != t.k() {
            return Err(Error::DimensionMismatch {
                expected: t.k(),
                got: self.mu.len(),
            });
        }
        if self.delta1.is_some() != t.ties_allowed() {
            return Err(Error::InvalidArgument(if t.ties_allowed() {
                "ties tournament needs a tie cutpoint".into()
            } else {
                "binary tournament takes no tie cutpoint".into()
            }));
        }
        if let Some(d) = self.delta1 {
            if d.is_nan() || d < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "tie cutpoint must be nonnegative, got {d}"
                )));
            }
        }
        Ok(())
    }
}

/// Probabilities of the three outcomes of one match.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeProbs {
    pub win_i: f64,
    pub tie: f64,
    pub win_j: f64,
}

impl OutcomeProbs {
    pub fn of(&self, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::WinI => self.win_i,
            Outcome::Tie => self.tie,
            Outcome::WinJ => self.win_j,
        }
    }
}

/// Negative log-likelihood of the tournament at `params`.
pub fn neg_log_likelihood(params: &ModelParams, t: &Tournament) -> Result<f64> {
    params.check_for(t)?;
    Ok(t.matches()
        .iter()
        .map(|m| match_neg_log_prob(params, m))
        .sum())
}

/// Analytic gradient of [`neg_log_likelihood`] in the layout
/// `[mu.., tau, delta1?]`. The ability block sums to zero.
pub fn gradient(params: &ModelParams, t: &Tournament) -> Result<Vec<f64>> {
    params.check_for(t)?;
    let design = likelihood::Design::full(t);
    let mut g = vec![0.0; design.dim()];
    design.eval(&params.to_vec(), Some(&mut g), None);
    Ok(g)
}

/// `-log P(observed outcome)` for a single match.
pub fn match_neg_log_prob(params: &ModelParams, m: &MatchRecord) -> f64 {
    let eta = linear_predictor(params, m.i, m.j, m.venue);
    likelihood::match_terms(eta, params.delta1, m.outcome, false).loss
}

fn linear_predictor(params: &ModelParams, i: TeamId, j: TeamId, venue: Venue) -> f64 {
    f64::from(venue.indicator()) * params.tau + params.mu[i.0] - params.mu[j.0]
}

pub fn outcome_probabilities(params: &ModelParams, i: TeamId, j: TeamId, venue: Venue) -> OutcomeProbs {
    let eta = linear_predictor(params, i, j, venue);
    probabilities_at(eta, params.delta1)
}

pub(crate) fn probabilities_at(eta: f64, delta1: Option<f64>) -> OutcomeProbs {
    use likelihood::sigmoid;
    match delta1 {
        None => OutcomeProbs {
            win_i: sigmoid(eta),
            tie: 0.0,
            win_j: sigmoid(-eta),
        },
        Some(d) => OutcomeProbs {
            win_i: sigmoid(eta - d),
            tie: sigmoid(d - eta) * sigmoid(d + eta) * -(-2.0 * d).exp_m1(),
            win_j: sigmoid(-eta - d),
        },
    }
}

/// `M[r][c]` is the probability that team `r` beats team `c` on a neutral
/// field.
pub fn probability_matrix(params: &ModelParams) -> Vec<Vec<f64>> {
    let k = params.k();
    (0..k)
        .map(|r| {
            (0..k)
                .map(|c| {
                    if r == c {
                        0.5
                    } else {
                        outcome_probabilities(params, TeamId(r), TeamId(c), Venue::Neutral).win_i
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_teams(outcomes: &[(Venue, Outcome)], ties: bool) -> Tournament {
        let matches = outcomes
            .iter()
            .map(|&(v, o)| MatchRecord::new(0, 1, v, o))
            .collect();
        Tournament::new(vec!["A".into(), "B".into()], matches, ties).unwrap()
    }

    #[test]
    fn even_teams_neutral_match_is_a_coin_flip() {
        let t = two_teams(&[(Venue::Neutral, Outcome::WinI)], false);
        let nll = neg_log_likelihood(&ModelParams::zeros(2, false), &t).unwrap();
        assert_abs_diff_eq!(nll, std::f64::consts::LN_2, epsilon = 1e-12);
    }

    #[test]
    fn unit_ability_gap() {
        let t = two_teams(&[(Venue::Neutral, Outcome::WinI)], false);
        let p = ModelParams {
            mu: vec![0.5, -0.5],
            tau: 0.0,
            delta1: None,
        };
        assert_abs_diff_eq!(neg_log_likelihood(&p, &t).unwrap(), 0.313262, epsilon = 1e-6);
    }

    #[test]
    fn symmetric_results_have_zero_ability_gradient() {
        let t = two_teams(
            &[(Venue::Neutral, Outcome::WinI), (Venue::Neutral, Outcome::WinJ)],
            false,
        );
        let g = gradient(&ModelParams::zeros(2, false), &t).unwrap();
        assert_abs_diff_eq!(g[0], 0.0);
        assert_abs_diff_eq!(g[1], 0.0);
    }

    #[test]
    fn home_advantage_score() {
        let t = two_teams(&[(Venue::HomeI, Outcome::WinI)], false);
        let p = ModelParams {
            mu: vec![0.2, -0.2],
            tau: 0.3,
            delta1: None,
        };
        let prob = likelihood::sigmoid(0.3 + 0.4);
        let g = gradient(&p, &t).unwrap();
        assert_abs_diff_eq!(g[2], -(1.0 - prob), epsilon = 1e-14);
    }

    #[test]
    fn ravens_at_home_against_falcons() {
        // abilities and home advantage as published for the 2010 NFL season
        let p = ModelParams {
            mu: vec![1.82, 1.75],
            tau: 0.322,
            delta1: None,
        };
        let probs = outcome_probabilities(&p, TeamId(0), TeamId(1), Venue::HomeJ);
        assert_eq!(format!("{:.2}", probs.win_j), "0.56");
    }

    #[test]
    fn equal_abilities_on_neutral_field_are_symmetric() {
        let p = ModelParams {
            mu: vec![0.4, 0.4, -0.8],
            tau: 1.3,
            delta1: Some(0.3),
        };
        let probs = outcome_probabilities(&p, TeamId(0), TeamId(1), Venue::Neutral);
        assert_abs_diff_eq!(probs.win_i, probs.win_j, epsilon = 1e-15);
        assert!(probs.tie > 0.0);
    }

    #[test]
    fn zero_cutpoint_has_no_ties() {
        let p = ModelParams {
            mu: vec![0.4, -0.4],
            tau: 0.1,
            delta1: Some(0.0),
        };
        let probs = outcome_probabilities(&p, TeamId(0), TeamId(1), Venue::HomeI);
        assert_eq!(probs.tie, 0.0);
    }

    #[test]
    fn extreme_gaps_stay_finite() {
        let p = ModelParams {
            mu: vec![40.0, -40.0],
            tau: 0.0,
            delta1: Some(0.2),
        };
        let t = two_teams(&[(Venue::Neutral, Outcome::WinJ)], true);
        let nll = neg_log_likelihood(&p, &t).unwrap();
        assert!(nll.is_finite() && nll > 79.0);
        let probs = outcome_probabilities(&p, TeamId(0), TeamId(1), Venue::Neutral);
        assert!((probs.win_i + probs.tie + probs.win_j - 1.0).abs() < 1e-12);
    }

    #[test]
    fn probability_matrix_is_complementary() {
        let p = ModelParams {
            mu: vec![1.0, 0.2, -0.5, -0.7],
            tau: 0.3,
            delta1: None,
        };
        let m = probability_matrix(&p);
        for (r, row) in m.iter().enumerate() {
            assert_eq!(row[r], 0.5);
            for (c, &x) in row.iter().enumerate() {
                assert_abs_diff_eq!(x + m[c][r], 1.0, epsilon = 1e-15);
            }
        }
        let flat = probability_matrix(&ModelParams::zeros(3, false));
        assert!(flat.iter().flatten().all(|&x| x == 0.5));
    }

    #[test]
    fn rejects_bad_input() {
        let t = two_teams(&[(Venue::Neutral, Outcome::WinI)], false);
        assert!(matches!(
            neg_log_likelihood(&ModelParams::zeros(3, false), &t),
            Err(Error::DimensionMismatch { .. })
        ));
        let ties = vec![MatchRecord::new(0, 1, Venue::Neutral, Outcome::Tie)];
        assert!(matches!(
            Tournament::new(vec!["A".into(), "B".into()], ties, false),
            Err(Error::TieInBinaryTournament { index: 0 })
        ));
        let selfplay = vec![MatchRecord::new(1, 1, Venue::Neutral, Outcome::WinI)];
        assert!(Tournament::new(vec!["A".into(), "B".into()], selfplay, false).is_err());
        assert!(Tournament::new(vec!["A".into(), "B".into()], vec![], false).is_err());
    }

    #[test]
    fn restrict_reindexes_teams() {
        let matches = vec![
            MatchRecord::new(0, 1, Venue::HomeI, Outcome::WinI),
            MatchRecord::new(2, 3, Venue::HomeJ, Outcome::WinJ),
            MatchRecord::new(3, 1, Venue::Neutral, Outcome::WinI),
        ];
        let names = ["A", "B", "C", "D"].map(String::from).to_vec();
        let t = Tournament::new(names, matches, false).unwrap();
        let (sub, map) = t.restrict(&[1, 2]).unwrap();
        assert_eq!(sub.teams(), &["C", "D", "B"]);
        assert_eq!(map, vec![None, Some(2), Some(0), Some(1)]);
        assert_eq!(sub.matches()[1], MatchRecord::new(1, 2, Venue::Neutral, Outcome::WinI));
    }
}
