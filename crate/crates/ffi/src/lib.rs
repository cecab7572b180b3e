//! C interface to `ranklasso`.
//!
//! Objects are exposed as opaque handles created by `rl_*_new`/`rl_*_load`/
//! `rl_fit` and released with the matching `*_free`. Every fallible function
//! returns an [`RlStatus`]; on failure the message is available from
//! [`rl_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ranklasso::inference::{bootstrap, BootstrapOptions, Quantity};
use ranklasso::{
    fit_estimators, load_tournament, outcome_probabilities, Error, Estimator, EstimatorFit, MatchRecord, Outcome,
    PipelineOptions, TeamId, Tournament, Venue,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidData = 3,
    Io = 4,
    Divergent = 5,
    NotConverged = 6,
    TooManyFailures = 7,
    /// The output buffer is too small; the required length was written.
    BufferTooSmall = 8,
    Internal = 9,
}

/// Which estimator `rl_fit` computes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlEstimator {
    Mle = 0,
    LassoAic = 1,
    LassoBic = 2,
    HybridAic = 3,
    HybridBic = 4,
}

impl From<RlEstimator> for Estimator {
    fn from(e: RlEstimator) -> Self {
        match e {
            RlEstimator::Mle => Estimator::Mle,
            RlEstimator::LassoAic => Estimator::LassoAic,
            RlEstimator::LassoBic => Estimator::LassoBic,
            RlEstimator::HybridAic => Estimator::HybridAic,
            RlEstimator::HybridBic => Estimator::HybridBic,
        }
    }
}

/// Match outcome codes for `rl_tournament_new`.
pub const RL_WIN_I: i32 = 1;
pub const RL_TIE: i32 = 0;
pub const RL_WIN_J: i32 = -1;

/// A set of teams and their matches.
pub struct RlTournament(Tournament);

/// One fitted estimator.
pub struct RlFit(EstimatorFit);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: RlStatus, msg: impl Into<String>) -> RlStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> RlStatus {
    match e {
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => RlStatus::InvalidArgument,
        Error::InvalidTournament(_) | Error::TieInBinaryTournament { .. } | Error::Parse { .. } => RlStatus::InvalidData,
        Error::Io { .. } => RlStatus::Io,
        Error::Divergent { .. } => RlStatus::Divergent,
        Error::NotConverged { .. } => RlStatus::NotConverged,
        Error::TooManyFailures { .. } => RlStatus::TooManyFailures,
    }
}

/// Runs `f`, mapping library errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), RlStatus>) -> RlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RlStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(RlStatus::Internal, "internal panic"),
    }
}

fn lib<T>(r: ranklasso::Result<T>) -> Result<T, RlStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), RlStatus> {
    if p.is_null() {
        Err(fail(RlStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn venue(h: i32) -> Result<Venue, RlStatus> {
    i8::try_from(h)
        .ok()
        .and_then(Venue::from_indicator)
        .ok_or_else(|| fail(RlStatus::InvalidArgument, format!("venue must be -1, 0 or 1, got {h}")))
}

fn team(t: &Tournament, i: usize) -> Result<usize, RlStatus> {
    if i < t.k() {
        Ok(i)
    } else {
        Err(fail(RlStatus::InvalidArgument, format!("team index {i} out of range for {} teams", t.k())))
    }
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Reads a match file (header `team_i,team_j,venue,outcome`).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_tournament_load(path: *const c_char, ties: bool, out: *mut *mut RlTournament) -> RlStatus {
    guard(|| {
        non_null(path, "path")?;
        non_null(out, "out")?;
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| fail(RlStatus::InvalidArgument, "path is not UTF-8"))?;
        let t = lib(load_tournament(path, ties))?;
        *out = Box::into_raw(Box::new(RlTournament(t)));
        Ok(())
    })
}

/// Builds a tournament from arrays of length `n`: team indices `i` and `j`
/// into `names` (length `k`), venues (+1 home team i, 0 neutral, -1 home
/// team j) and outcomes (`RL_WIN_I`, `RL_TIE`, `RL_WIN_J`).
///
/// # Safety
/// All arrays must hold the stated number of elements; each name must be a
/// NUL-terminated string.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn rl_tournament_new(
    k: usize,
    names: *const *const c_char,
    n: usize,
    team_i: *const usize,
    team_j: *const usize,
    venues: *const i32,
    outcomes: *const i32,
    ties: bool,
    out: *mut *mut RlTournament,
) -> RlStatus {
    guard(|| {
        for (p, what) in [
            (names.cast::<u8>(), "names"),
            (team_i.cast(), "team_i"),
            (team_j.cast(), "team_j"),
            (venues.cast(), "venues"),
            (outcomes.cast(), "outcomes"),
        ] {
            non_null(p, what)?;
        }
        non_null(out, "out")?;
        let mut teams = Vec::with_capacity(k);
        for &name in std::slice::from_raw_parts(names, k) {
            non_null(name, "team name")?;
            let s = CStr::from_ptr(name)
                .to_str()
                .map_err(|_| fail(RlStatus::InvalidArgument, "team name is not UTF-8"))?;
            teams.push(s.to_owned());
        }
        let (ti, tj) = (std::slice::from_raw_parts(team_i, n), std::slice::from_raw_parts(team_j, n));
        let (vs, os) = (std::slice::from_raw_parts(venues, n), std::slice::from_raw_parts(outcomes, n));
        let mut matches = Vec::with_capacity(n);
        for m in 0..n {
            if ti[m] >= k || tj[m] >= k {
                return Err(fail(RlStatus::InvalidArgument, format!("match {m} references a team outside 0..{k}")));
            }
            let outcome = match os[m] {
                RL_WIN_I => Outcome::WinI,
                RL_TIE => Outcome::Tie,
                RL_WIN_J => Outcome::WinJ,
                o => return Err(fail(RlStatus::InvalidArgument, format!("match {m}: unknown outcome {o}"))),
            };
            matches.push(MatchRecord::new(ti[m], tj[m], venue(vs[m])?, outcome));
        }
        let t = lib(Tournament::new(teams, matches, ties))?;
        *out = Box::into_raw(Box::new(RlTournament(t)));
        Ok(())
    })
}

/// # Safety
/// `t` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rl_tournament_free(t: *mut RlTournament) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of teams, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rl_tournament_team_count(t: *const RlTournament) -> usize {
    t.as_ref().map_or(0, |t| t.0.k())
}

/// Number of matches, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rl_tournament_match_count(t: *const RlTournament) -> usize {
    t.as_ref().map_or(0, |t| t.0.n())
}

/// Copies the name of team `index` into `buf` (NUL-terminated). `*len` holds
/// the buffer size on entry and the required size, terminator included, on
/// return.
///
/// # Safety
/// `t` must be a live handle, `len` valid and `buf` hold `*len` bytes (it may
/// be null when `*len` is 0).
#[no_mangle]
pub unsafe extern "C" fn rl_tournament_team_name(
    t: *const RlTournament,
    index: usize,
    buf: *mut c_char,
    len: *mut usize,
) -> RlStatus {
    guard(|| {
        non_null(t, "tournament")?;
        non_null(len, "len")?;
        let t = &(*t).0;
        let name = t.team_name(TeamId(team(t, index)?)).as_bytes();
        let need = name.len() + 1;
        let have = *len;
        *len = need;
        if have < need {
            return Err(fail(RlStatus::BufferTooSmall, format!("name needs {need} bytes")));
        }
        non_null(buf, "buf")?;
        ptr::copy_nonoverlapping(name.as_ptr(), buf.cast::<u8>(), name.len());
        *buf.add(name.len()) = 0;
        Ok(())
    })
}

/// Fits one estimator with default settings. Lasso-based estimators compute
/// the full regularization path.
///
/// # Safety
/// `t` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_fit(t: *const RlTournament, estimator: RlEstimator, out: *mut *mut RlFit) -> RlStatus {
    guard(|| {
        non_null(t, "tournament")?;
        non_null(out, "out")?;
        let fit = lib(fit_estimators(&(*t).0, &[estimator.into()], &PipelineOptions::default()))?;
        let f = fit.fits.into_iter().next().expect("one estimator requested");
        *out = Box::into_raw(Box::new(RlFit(f)));
        Ok(())
    })
}

/// # Safety
/// `fit` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_free(fit: *mut RlFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Copies the `len` team abilities (sum to zero) into `out`.
///
/// # Safety
/// `fit` must be a live handle and `out` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_abilities(fit: *const RlFit, out: *mut f64, len: usize) -> RlStatus {
    guard(|| {
        non_null(fit, "fit")?;
        non_null(out, "out")?;
        let mu = &(*fit).0.params.mu;
        if len != mu.len() {
            return Err(fail(RlStatus::InvalidArgument, format!("expected {} abilities, buffer holds {len}", mu.len())));
        }
        ptr::copy_nonoverlapping(mu.as_ptr(), out, len);
        Ok(())
    })
}

/// Home advantage on the log-odds scale.
///
/// # Safety
/// `fit` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_home_advantage(fit: *const RlFit, out: *mut f64) -> RlStatus {
    guard(|| {
        non_null(fit, "fit")?;
        non_null(out, "out")?;
        *out = (*fit).0.params.tau;
        Ok(())
    })
}

/// Tie threshold of the ties model; NaN for a binary tournament.
///
/// # Safety
/// `fit` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_tie_threshold(fit: *const RlFit, out: *mut f64) -> RlStatus {
    guard(|| {
        non_null(fit, "fit")?;
        non_null(out, "out")?;
        *out = (*fit).0.params.delta1.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Selected penalty; NaN for maximum likelihood.
///
/// # Safety
/// `fit` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_lambda(fit: *const RlFit, out: *mut f64) -> RlStatus {
    guard(|| {
        non_null(fit, "fit")?;
        non_null(out, "out")?;
        *out = (*fit).0.lambda.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Number of ability groups, or 0 for a null handle.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_group_count(fit: *const RlFit) -> usize {
    fit.as_ref().map_or(0, |f| f.0.grouping.len())
}

/// Group of each team (0 = strongest) into `out` of length `len`.
///
/// # Safety
/// `fit` must be a live handle and `out` hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_groups(fit: *const RlFit, out: *mut usize, len: usize) -> RlStatus {
    guard(|| {
        non_null(fit, "fit")?;
        non_null(out, "out")?;
        let a = (*fit).0.grouping.assignment();
        if len != a.len() {
            return Err(fail(RlStatus::InvalidArgument, format!("expected {} teams, buffer holds {len}", a.len())));
        }
        ptr::copy_nonoverlapping(a.as_ptr(), out, len);
        Ok(())
    })
}

/// Probability that team `i` beats team `j`; `venue` is +1 when `i` is at
/// home, 0 on neutral ground, -1 when `j` is at home.
///
/// # Safety
/// `fit` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rl_fit_win_probability(
    fit: *const RlFit,
    i: usize,
    j: usize,
    venue_code: i32,
    out: *mut f64,
) -> RlStatus {
    guard(|| {
        non_null(fit, "fit")?;
        non_null(out, "out")?;
        let p = &(*fit).0.params;
        if i >= p.k() || j >= p.k() || i == j {
            return Err(fail(RlStatus::InvalidArgument, format!("invalid team pair ({i}, {j})")));
        }
        *out = outcome_probabilities(p, TeamId(i), TeamId(j), venue(venue_code)?).win_i;
        Ok(())
    })
}

/// Parametric bootstrap of the probability that `i` beats `j` at the given
/// venue: writes the point estimate and the bias-corrected percentile
/// interval at `level`.
///
/// # Safety
/// `t` must be a live handle and the output pointers valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn rl_bootstrap_win_probability(
    t: *const RlTournament,
    estimator: RlEstimator,
    i: usize,
    j: usize,
    venue_code: i32,
    reps: usize,
    seed: u64,
    level: f64,
    point: *mut f64,
    lower: *mut f64,
    upper: *mut f64,
) -> RlStatus {
    guard(|| {
        non_null(t, "tournament")?;
        for (p, what) in [(point, "point"), (lower, "lower"), (upper, "upper")] {
            non_null(p, what)?;
        }
        let t = &(*t).0;
        let q = [Quantity::WinProbability {
            i: team(t, i)?,
            j: team(t, j)?,
            venue: venue(venue_code)?,
        }];
        let opts = BootstrapOptions {
            reps,
            seed,
            level,
            ..BootstrapOptions::default()
        };
        let s = lib(bootstrap(estimator.into(), t, &q, &opts))?;
        *point = s.point[0];
        (*lower, *upper) = s.intervals[0];
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn venue_codes() {
        assert_eq!(venue(1), Ok(Venue::HomeI));
        assert_eq!(venue(0), Ok(Venue::Neutral));
        assert_eq!(venue(-1), Ok(Venue::HomeJ));
        assert_eq!(venue(300), Err(RlStatus::InvalidArgument));
    }

    #[test]
    fn panics_become_internal_errors() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, RlStatus::Internal);
        let msg = unsafe { CStr::from_ptr(rl_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
    }

    #[test]
    fn library_errors_map_to_codes() {
        let e = Error::TooManyFailures { failed: 3, total: 10 };
        assert_eq!(status_of(&e), RlStatus::TooManyFailures);
        assert_eq!(lib::<()>(Err(e)), Err(RlStatus::TooManyFailures));
        let msg = unsafe { CStr::from_ptr(rl_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "3 of 10 replicates failed");
    }
}
