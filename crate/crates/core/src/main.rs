use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ranklasso::evaluation::{cross_validate, CvOptions};
use ranklasso::inference::{bootstrap, BootstrapOptions, Quantity};
use ranklasso::{
    adaptive_weights, compute_path, constrained_mle, fit_estimators, fit_lasso, fit_mle, load_tournament,
    probability_matrix, AdaptiveWeights, Criterion, Error, Estimator, Grouping, LassoConfig, ModelParams,
    PipelineOptions, Scoring, TeamId, Tournament, Venue, Weighting,
};

#[derive(Parser)]
#[command(name = "ranklasso", version, about = "Rank teams from match results with the adaptive ranking lasso")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Data {
    /// Match file with header team_i,team_j,venue,outcome[,date]
    csv: PathBuf,
    /// Fit the ties model
    #[arg(long)]
    ties: bool,
}

#[derive(Args)]
struct Penalty {
    /// Use unit penalty weights instead of adaptive ones
    #[arg(long)]
    nonadaptive: bool,
    /// Score AIC/BIC at the lasso estimates instead of the constrained refits
    #[arg(long)]
    score_at_lasso: bool,
}

impl Penalty {
    fn pipeline(&self) -> PipelineOptions {
        PipelineOptions {
            lasso: LassoConfig::default(),
            weighting: if self.nonadaptive { Weighting::Uniform } else { Weighting::Adaptive },
            scoring: if self.score_at_lasso { Scoring::Lasso } else { Scoring::Refit },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Aic,
    Bic,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Aic => Criterion::Aic,
            CriterionArg::Bic => Criterion::Bic,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Maximum likelihood ranking table
    FitMle {
        #[command(flatten)]
        data: Data,
        /// Ridge coefficient on all pairwise ability differences
        #[arg(long, default_value_t = 0.0)]
        ridge: f64,
    },
    /// Ranking lasso at one penalty, or along the whole path
    FitLasso {
        #[command(flatten)]
        data: Data,
        /// Penalty of a single fit
        #[arg(long, conflicts_with = "path", required_unless_present = "path")]
        lambda: Option<f64>,
        /// Print the regularization path as TSV
        #[arg(long)]
        path: bool,
        /// Select a path point and report it on stderr
        #[arg(long, value_enum, requires = "path")]
        criterion: Option<CriterionArg>,
        /// Report constrained refits on the lasso grouping
        #[arg(long)]
        hybrid: bool,
        #[command(flatten)]
        penalty: Penalty,
    },
    /// Neutral-field win probabilities of every pair of teams as TSV
    Probmatrix {
        #[command(flatten)]
        data: Data,
        /// mle, aic, bic or rel_bound=R
        #[arg(long)]
        at: String,
        /// With aic or bic, use the constrained refit
        #[arg(long)]
        hybrid: bool,
        #[command(flatten)]
        penalty: Penalty,
    },
    /// Parametric bootstrap with bias-corrected percentile intervals
    Bootstrap {
        #[command(flatten)]
        data: Data,
        /// mle, lasso-aic, lasso-bic, hybrid-aic or hybrid-bic
        #[arg(long)]
        estimator: String,
        /// Number of simulated tournaments
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Coverage of the intervals
        #[arg(long, default_value_t = 0.9)]
        level: f64,
        /// Match as TEAM_I,TEAM_J,H with H in 1, 0, -1 (home of TEAM_I,
        /// neutral, home of TEAM_J); teams by name or 1-based index
        #[arg(long = "match", value_name = "I,J,H")]
        matches: Vec<String>,
        /// Also write the replicate matrix to this TSV file
        #[arg(long)]
        replicates: Option<PathBuf>,
        #[command(flatten)]
        penalty: Penalty,
    },
    /// Repeated half-split cross-validation of all estimators
    Cv {
        #[command(flatten)]
        data: Data,
        /// Number of random half splits
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        penalty: Penalty,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    let mut out = String::new();
    let mut err = String::new();
    match command {
        Command::FitMle { data, ridge } => {
            let t = load(&data)?;
            let fit = fit_mle(&t, ridge)?;
            ranking_table(&mut out, &t, &fit.params.mu, Some(&fit.se), None);
            let k = t.k();
            let _ = writeln!(err, "home advantage\t{:.3}\tse {:.3}", fit.params.tau, fit.se[k]);
            if let Some(d) = fit.params.delta1 {
                let _ = writeln!(err, "tie threshold\t{d:.3}\tse {:.3}", fit.se[k + 1]);
            }
            let _ = writeln!(err, "negative log-likelihood\t{:.4}", fit.neg_loglik);
        }
        Command::FitLasso {
            data,
            lambda,
            path,
            criterion,
            hybrid,
            penalty,
        } => {
            let t = load(&data)?;
            let opts = penalty.pipeline();
            let w = weights(&t, &opts)?;
            if path {
                let p = compute_path(&t, &w, &opts.lasso)?;
                out.push_str("lambda\trel_bound\tdf\taic\tbic");
                for name in t.teams() {
                    let _ = write!(out, "\tmu_{name}");
                }
                out.push('\n');
                for (point, rel) in p.points.iter().zip(&p.relative_bound) {
                    let _ = write!(out, "{}\t{}\t{}\t{}\t{}", point.lambda, rel, point.df, point.aic, point.bic);
                    for mu in &point.params.mu {
                        let _ = write!(out, "\t{mu}");
                    }
                    out.push('\n');
                }
                for (lambda, reason) in &p.failures {
                    let _ = writeln!(err, "warning: no fit at lambda {lambda}: {reason}");
                }
                if let Some(c) = criterion {
                    let estimator = match (Criterion::from(c), hybrid) {
                        (Criterion::Aic, false) => Estimator::LassoAic,
                        (Criterion::Bic, false) => Estimator::LassoBic,
                        (Criterion::Aic, true) => Estimator::HybridAic,
                        (Criterion::Bic, true) => Estimator::HybridBic,
                    };
                    let fit = fit_estimators(&t, &[estimator], &opts)?;
                    let f = &fit.fits[0];
                    let lambda = f.lambda.expect("lasso-based estimator");
                    let index = p.points.iter().position(|q| q.lambda == lambda).unwrap_or(0);
                    let point = &p.points[index];
                    let _ = writeln!(err, "estimator\tindex\tlambda\trel_bound\tdf\taic\tbic");
                    let _ = writeln!(
                        err,
                        "{estimator}\t{index}\t{lambda}\t{}\t{}\t{}\t{}",
                        p.relative_bound[index], point.df, point.aic, point.bic
                    );
                    ranking_table(&mut err, &t, &f.params.mu, None, Some(&f.grouping));
                }
            } else {
                let lambda = lambda.expect("clap requires --lambda without --path");
                let fit = fit_lasso(&t, lambda, &w, &opts.lasso, None)?;
                let mu = if hybrid {
                    constrained_mle(&t, &fit.grouping)?.params.mu
                } else {
                    fit.params.mu.clone()
                };
                ranking_table(&mut out, &t, &mu, None, Some(&fit.grouping));
                let _ = writeln!(
                    err,
                    "lambda\t{lambda}\ndf\t{}\naic\t{}\nbic\t{}\nhome advantage\t{:.3}",
                    fit.df, fit.aic, fit.bic, fit.params.tau
                );
            }
        }
        Command::Probmatrix {
            data,
            at,
            hybrid,
            penalty,
        } => {
            let t = load(&data)?;
            let opts = penalty.pipeline();
            let params = params_at(&t, &at, hybrid, &opts)?;
            out.push_str("team");
            for name in t.teams() {
                let _ = write!(out, "\t{name}");
            }
            out.push('\n');
            for (name, row) in t.teams().iter().zip(probability_matrix(&params)) {
                out.push_str(name);
                for p in row {
                    let _ = write!(out, "\t{p}");
                }
                out.push('\n');
            }
        }
        Command::Bootstrap {
            data,
            estimator,
            reps,
            seed,
            level,
            matches,
            replicates,
            penalty,
        } => {
            let estimator: Estimator = estimator.parse()?;
            let t = load(&data)?;
            let mut quantities = Vec::new();
            for spec in &matches {
                let (i, j, venue) = parse_match(&t, spec)?;
                quantities.push(Quantity::WinProbability { i, j, venue });
                quantities.push(Quantity::AbilityDifference(i, j));
            }
            if quantities.is_empty() {
                quantities.extend((0..t.k()).map(Quantity::Ability));
            }
            let opts = BootstrapOptions {
                reps,
                seed,
                level,
                pipeline: penalty.pipeline(),
                ..BootstrapOptions::default()
            };
            let s = bootstrap(estimator, &t, &quantities, &opts)?;
            out.push_str("quantity\testimate\tlower\tupper\n");
            for (q, (point, (lo, hi))) in quantities.iter().zip(s.point.iter().zip(&s.intervals)) {
                let _ = writeln!(out, "{}\t{point}\t{lo}\t{hi}", q.label(&t));
            }
            let _ = writeln!(
                err,
                "estimator {estimator}, {} replicates, seed {seed}, level {level}, {} failed, {} with ridge fallback",
                reps, s.failures, s.ridge_fallbacks
            );
            if let Some(path) = replicates {
                let mut text = quantities.iter().map(|q| q.label(&t)).collect::<Vec<_>>().join("\t");
                text.push('\n');
                for row in &s.replicates {
                    let cells: Vec<String> = row.iter().map(f64::to_string).collect();
                    text.push_str(&cells.join("\t"));
                    text.push('\n');
                }
                std::fs::write(&path, text).map_err(|source| Error::Io { path, source })?;
            }
        }
        Command::Cv {
            data,
            reps,
            seed,
            penalty,
        } => {
            let t = load(&data)?;
            let opts = CvOptions {
                reps,
                seed,
                pipeline: penalty.pipeline(),
                ..CvOptions::default()
            };
            let cv = cross_validate(&t, &Estimator::ALL, &opts)?;
            out.push_str("rep");
            for e in &cv.estimators {
                let _ = write!(out, "\tnll_{e}");
            }
            for e in &cv.estimators {
                let _ = write!(out, "\tcoin_{e}");
            }
            out.push('\n');
            for (r, (nll, coin)) in cv.per_rep_negloglik.iter().zip(&cv.per_rep_coin).enumerate() {
                let _ = write!(out, "{r}");
                for v in nll.iter().chain(coin) {
                    let _ = write!(out, "\t{v}");
                }
                out.push('\n');
            }
            let names: Vec<&str> = cv.estimators.iter().map(|e| e.name()).collect();
            let _ = writeln!(err, "\t{}", names.join("\t"));
            for (label, row) in [
                ("mean", cv.mean_negloglik()),
                ("median", cv.median_negloglik()),
                ("coin", cv.coin_fraction.clone()),
            ] {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.2}")).collect();
                let _ = writeln!(err, "{label}\t{}", cells.join("\t"));
            }
            if cv.failures > 0 || cv.ridge_fallbacks > 0 {
                let _ = writeln!(
                    err,
                    "{} repetitions failed, {} used the ridge fallback",
                    cv.failures, cv.ridge_fallbacks
                );
            }
        }
    }
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    let _ = stdout.flush();
    eprint!("{err}");
    Ok(())
}

fn load(data: &Data) -> Result<Tournament, Error> {
    load_tournament(&data.csv, data.ties)
}

fn weights(t: &Tournament, opts: &PipelineOptions) -> Result<AdaptiveWeights, Error> {
    match opts.weighting {
        Weighting::Adaptive => adaptive_weights(t),
        Weighting::Uniform => Ok(AdaptiveWeights::uniform(t.k())),
    }
}

/// Ranking table sorted by ability: name, record, ability and either its
/// standard error or its group number.
fn ranking_table(out: &mut String, t: &Tournament, mu: &[f64], se: Option<&[f64]>, groups: Option<&Grouping>) {
    let records = t.records();
    let mut order: Vec<usize> = (0..t.k()).collect();
    order.sort_by(|&a, &b| mu[b].total_cmp(&mu[a]).then(a.cmp(&b)));
    let extra = if se.is_some() { "\tse" } else if groups.is_some() { "\tgroup" } else { "" };
    let _ = writeln!(out, "team\trecord\tmu{extra}");
    // groups are numbered from the top of the ranking
    let mut group_rank = Vec::new();
    for &i in &order {
        let r = records[i];
        let record = if t.ties_allowed() {
            format!("{}-{}-{}", r.wins, r.ties, r.losses)
        } else {
            format!("{}-{}", r.wins, r.losses)
        };
        let _ = write!(out, "{}\t{record}\t{:.2}", t.team_name(TeamId(i)), mu[i]);
        if let Some(se) = se {
            let _ = write!(out, "\t{:.2}", se[i]);
        } else if let Some(g) = groups {
            let id = g.group_of(i);
            let rank = match group_rank.iter().position(|&x| x == id) {
                Some(p) => p,
                None => {
                    group_rank.push(id);
                    group_rank.len() - 1
                }
            };
            let _ = write!(out, "\t{}", rank + 1);
        }
        out.push('\n');
    }
}

fn params_at(t: &Tournament, at: &str, hybrid: bool, opts: &PipelineOptions) -> Result<ModelParams, Error> {
    let estimator = match (at, hybrid) {
        ("mle", _) => Estimator::Mle,
        ("aic", false) => Estimator::LassoAic,
        ("bic", false) => Estimator::LassoBic,
        ("aic", true) => Estimator::HybridAic,
        ("bic", true) => Estimator::HybridBic,
        _ => {
            let r: f64 = at
                .strip_prefix("rel_bound=")
                .and_then(|r| r.parse().ok())
                .filter(|r: &f64| (0.0..=1.0).contains(r))
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("--at expects mle, aic, bic or rel_bound=R with R in [0, 1], got {at:?}"))
                })?;
            let w = weights(t, opts)?;
            let path = compute_path(t, &w, &opts.lasso)?;
            let nearest = (0..path.points.len())
                .min_by(|&a, &b| {
                    (path.relative_bound[a] - r)
                        .abs()
                        .total_cmp(&(path.relative_bound[b] - r).abs())
                })
                .expect("nonempty path");
            let point = &path.points[nearest];
            return if hybrid {
                Ok(constrained_mle(t, &point.grouping)?.params)
            } else {
                Ok(point.params.clone())
            };
        }
    };
    Ok(fit_estimators(t, &[estimator], opts)?.fits.remove(0).params)
}

fn parse_match(t: &Tournament, spec: &str) -> Result<(usize, usize, Venue), Error> {
    let bad = || Error::InvalidArgument(format!("--match expects TEAM_I,TEAM_J,H with H in 1, 0, -1, got {spec:?}"));
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let [a, b, h] = parts[..] else {
        return Err(bad());
    };
    let team = |s: &str| -> Result<usize, Error> {
        if let Some(id) = t.team_id(s) {
            return Ok(id.0);
        }
        match s.parse::<usize>() {
            Ok(ix) if (1..=t.k()).contains(&ix) => Ok(ix - 1),
            _ => Err(Error::InvalidArgument(format!("unknown team {s:?}"))),
        }
    };
    let venue = h.parse::<i8>().ok().and_then(Venue::from_indicator).ok_or_else(bad)?;
    let (i, j) = (team(a)?, team(b)?);
    if i == j {
        return Err(bad());
    }
    Ok((i, j, venue))
}
