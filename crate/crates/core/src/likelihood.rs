//! Per-match loss derivatives and likelihood assembly over a parameter
//! layout `[abilities.., tau, delta1?]`, where abilities may be per team or
//! per group of teams.

use nalgebra::DMatrix;

use crate::model::{Outcome, Tournament};

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(x))` without overflow.
pub(crate) fn log1pexp(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Loss `-log P(outcome)` of one match as a function of the linear predictor
/// `eta` and the tie cutpoint, with first and second derivatives.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct MatchTerms {
    pub loss: f64,
    pub d_eta: f64,
    pub d_delta: f64,
    pub h_eta_eta: f64,
    pub h_delta_delta: f64,
    pub h_eta_delta: f64,
}

pub(crate) fn match_terms(eta: f64, delta: Option<f64>, outcome: Outcome, derivs: bool) -> MatchTerms {
    let Some(d) = delta else {
        return binary_terms(eta, outcome, derivs);
    };
    match outcome {
        Outcome::WinI => {
            // -log sigmoid(eta - d)
            let s = sigmoid(d - eta);
            let c = s * (1.0 - s);
            MatchTerms {
                loss: log1pexp(d - eta),
                d_eta: -s,
                d_delta: s,
                h_eta_eta: c,
                h_delta_delta: c,
                h_eta_delta: -c,
            }
        }
        Outcome::WinJ => {
            // -log sigmoid(-eta - d)
            let s = sigmoid(d + eta);
            let c = s * (1.0 - s);
            MatchTerms {
                loss: log1pexp(d + eta),
                d_eta: s,
                d_delta: s,
                h_eta_eta: c,
                h_delta_delta: c,
                h_eta_delta: c,
            }
        }
        Outcome::Tie => tie_terms(eta, d, derivs),
    }
}

fn binary_terms(eta: f64, outcome: Outcome, derivs: bool) -> MatchTerms {
    let p = sigmoid(eta);
    let c = if derivs { p * (1.0 - p) } else { 0.0 };
    match outcome {
        Outcome::WinI => MatchTerms {
            loss: log1pexp(-eta),
            d_eta: -(1.0 - p),
            h_eta_eta: c,
            ..Default::default()
        },
        Outcome::WinJ => MatchTerms {
            loss: log1pexp(eta),
            d_eta: p,
            h_eta_eta: c,
            ..Default::default()
        },
        // only reachable through a malformed parameter/tournament pairing
        Outcome::Tie => MatchTerms {
            loss: f64::INFINITY,
            ..Default::default()
        },
    }
}

/// `P(tie) = sigmoid(a) - sigmoid(b)` with `a = d - eta`, `b = -d - eta`,
/// factored as `sigmoid(a) sigmoid(-b) (1 - exp(b - a))` for stability.
fn tie_terms(eta: f64, d: f64, derivs: bool) -> MatchTerms {
    let a = d - eta;
    let b = -d - eta;
    let r = -(-2.0 * d).exp_m1();
    let loss = log1pexp(-a) + log1pexp(b) - r.ln();
    if !derivs || r == 0.0 {
        return MatchTerms {
            loss,
            ..Default::default()
        };
    }
    let (sa, sb) = (sigmoid(a), sigmoid(b));
    // A = g(a) / P, B = g(b) / P with g the logistic density
    let big_a = sigmoid(-a) / (sigmoid(-b) * r);
    let big_b = sb / (sa * r);
    let l_a = -big_a;
    let l_b = big_b;
    let l_aa = -big_a * (1.0 - 2.0 * sa) + big_a * big_a;
    let l_bb = big_b * (1.0 - 2.0 * sb) + big_b * big_b;
    let l_ab = -big_a * big_b;
    MatchTerms {
        loss,
        d_eta: -l_a - l_b,
        d_delta: l_a - l_b,
        h_eta_eta: l_aa + 2.0 * l_ab + l_bb,
        h_delta_delta: l_aa - 2.0 * l_ab + l_bb,
        h_eta_delta: -l_aa + l_bb,
    }
}

/// Maps teams onto ability coordinates.
#[derive(Debug, Clone)]
pub(crate) struct Design<'a> {
    t: &'a Tournament,
    coord: Vec<usize>,
    m: usize,
}

impl<'a> Design<'a> {
    pub fn full(t: &'a Tournament) -> Self {
        Design {
            t,
            coord: (0..t.k()).collect(),
            m: t.k(),
        }
    }

    /// One ability coordinate per group; `assignment[team]` is its group.
    pub fn grouped(t: &'a Tournament, assignment: &[usize], groups: usize) -> Self {
        debug_assert_eq!(assignment.len(), t.k());
        Design {
            t,
            coord: assignment.to_vec(),
            m: groups,
        }
    }

    pub fn tournament(&self) -> &'a Tournament {
        self.t
    }

    pub fn ties(&self) -> bool {
        self.t.ties_allowed()
    }

    pub fn tau_index(&self) -> usize {
        self.m
    }

    pub fn delta_index(&self) -> Option<usize> {
        self.ties().then_some(self.m + 1)
    }

    pub fn dim(&self) -> usize {
        self.m + 1 + usize::from(self.ties())
    }

    /// Negative log-likelihood at `x`; adds its gradient and Hessian into
    /// the given buffers.
    pub fn eval(&self, x: &[f64], mut grad: Option<&mut [f64]>, mut hess: Option<&mut DMatrix<f64>>) -> f64 {
        let tau_ix = self.tau_index();
        let delta_ix = self.delta_index();
        let delta = delta_ix.map(|ix| x[ix]);
        let derivs = grad.is_some() || hess.is_some();
        let mut total = 0.0;
        for m in self.t.matches() {
            let a = self.coord[m.i.0];
            let b = self.coord[m.j.0];
            let h = f64::from(m.venue.indicator());
            let eta = h * x[tau_ix] + x[a] - x[b];
            let terms = match_terms(eta, delta, m.outcome, derivs);
            total += terms.loss;
            if !derivs {
                continue;
            }
            // gradient of eta, as sparse (index, coefficient) entries
            let mut d_eta = [(0usize, 0.0f64); 3];
            let mut len = 0;
            if a != b {
                d_eta[0] = (a, 1.0);
                d_eta[1] = (b, -1.0);
                len = 2;
            }
            if h != 0.0 {
                d_eta[len] = (tau_ix, h);
                len += 1;
            }
            let d_eta = &d_eta[..len];
            if let Some(g) = grad.as_deref_mut() {
                for &(ix, c) in d_eta {
                    g[ix] += terms.d_eta * c;
                }
                if let Some(dx) = delta_ix {
                    g[dx] += terms.d_delta;
                }
            }
            if let Some(hm) = hess.as_deref_mut() {
                for &(r, cr) in d_eta {
                    for &(c, cc) in d_eta {
                        hm[(r, c)] += terms.h_eta_eta * cr * cc;
                    }
                }
                if let Some(dx) = delta_ix {
                    for &(r, cr) in d_eta {
                        hm[(r, dx)] += terms.h_eta_delta * cr;
                        hm[(dx, r)] += terms.h_eta_delta * cr;
                    }
                    hm[(dx, dx)] += terms.h_delta_delta;
                }
            }
        }
        total
    }

    /// Expands coordinates back to per-team abilities.
    pub fn expand_abilities(&self, x: &[f64]) -> Vec<f64> {
        self.coord.iter().map(|&c| x[c]).collect()
    }

    /// Number of teams on each ability coordinate.
    pub fn coord_sizes(&self) -> Vec<f64> {
        let mut sizes = vec![0.0; self.m];
        for &c in &self.coord {
            sizes[c] += 1.0;
        }
        sizes
    }
}
