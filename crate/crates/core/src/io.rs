//! Match files: CSV with header `team_i,team_j,venue,outcome[,date]`.
//!
//! Venue tokens are `home_i`, `neutral`, `home_j`; outcome tokens are
//! `win_i`, `tie`, `win_j`. Teams are numbered by first appearance.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{MatchRecord, Outcome, Tournament, Venue};

const COLUMNS: [&str; 4] = ["team_i", "team_j", "venue", "outcome"];

pub fn load_tournament(path: impl AsRef<Path>, ties_allowed: bool) -> Result<Tournament> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_tournament(file, path, ties_allowed)
}

/// Parses match CSV from any reader; `source` labels error messages.
pub fn read_tournament<R: Read>(reader: R, source: impl AsRef<Path>, ties_allowed: bool) -> Result<Tournament> {
    let source = source.as_ref().to_path_buf();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: source.clone(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(parse_err(1, "empty file".into())),
        Some(r) => r.map_err(|e| csv_error(&source, e))?,
    };
    let names: Vec<&str> = header.iter().collect();
    let with_date = names.len() == 5 && names[4] == "date";
    if names[..names.len().min(4)] != COLUMNS || !(names.len() == 4 || with_date) {
        return Err(parse_err(
            1,
            format!("expected header team_i,team_j,venue,outcome[,date], found {}", names.join(",")),
        ));
    }

    let mut teams: Vec<String> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut matches = Vec::new();
    for row in records {
        let row = row.map_err(|e| csv_error(&source, e))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.iter().eq(header.iter()) {
            return Err(parse_err(line, "duplicate header".into()));
        }
        if row.len() != header.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", header.len(), row.len()),
            ));
        }
        let mut id = |name: &str| -> Result<usize> {
            if name.is_empty() {
                return Err(parse_err(line, "empty team name".into()));
            }
            Ok(*ids.entry(name.to_string()).or_insert_with(|| {
                teams.push(name.to_string());
                teams.len() - 1
            }))
        };
        let i = id(&row[0])?;
        let j = id(&row[1])?;
        if i == j {
            return Err(parse_err(line, format!("team {} plays itself", &row[0])));
        }
        let venue = match &row[2] {
            "home_i" => Venue::HomeI,
            "neutral" => Venue::Neutral,
            "home_j" => Venue::HomeJ,
            other => return Err(parse_err(line, format!("unknown venue {other:?}"))),
        };
        let outcome = match &row[3] {
            "win_i" => Outcome::WinI,
            "tie" => Outcome::Tie,
            "win_j" => Outcome::WinJ,
            other => return Err(parse_err(line, format!("unknown outcome {other:?}"))),
        };
        if outcome == Outcome::Tie && !ties_allowed {
            return Err(parse_err(line, "tie in a tournament without ties".into()));
        }
        matches.push(MatchRecord::new(i, j, venue, outcome));
    }
    if matches.is_empty() {
        return Err(parse_err(1, "no matches".into()));
    }
    Tournament::new(teams, matches, ties_allowed)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

pub fn write_tournament<W: Write>(t: &Tournament, writer: W) -> Result<()> {
    let io_err = |e: csv::Error| Error::Io {
        path: PathBuf::from("<output>"),
        source: e.into(),
    };
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(COLUMNS).map_err(io_err)?;
    for m in t.matches() {
        let venue = match m.venue {
            Venue::HomeI => "home_i",
            Venue::Neutral => "neutral",
            Venue::HomeJ => "home_j",
        };
        let outcome = match m.outcome {
            Outcome::WinI => "win_i",
            Outcome::Tie => "tie",
            Outcome::WinJ => "win_j",
        };
        wtr.write_record([t.team_name(m.i), t.team_name(m.j), venue, outcome])
            .map_err(io_err)?;
    }
    wtr.flush().map_err(|source| Error::Io {
        path: PathBuf::from("<output>"),
        source,
    })
}

pub fn save_tournament(t: &Tournament, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_tournament(t, file)
}
