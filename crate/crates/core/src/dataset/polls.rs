use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{DatasetError, ElectionYear, StateId, StateYear};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poll {
    pub state: StateId,
    pub year: ElectionYear,
    pub date: NaiveDate,
    pub dnc_pct: f64,
    pub gop_pct: f64,
}

/// Mean (DNC, GOP) support per state and cycle.
pub type PollAverages = BTreeMap<StateYear, (f64, f64)>;

/// Unweighted mean of each party's support over polls dated inside
/// `[window_start, window_end]`. Keys with no in-window poll are absent.
pub fn average_polls(
    polls: &[Poll],
    window_start: NaiveDate,
    window_end: NaiveDate,
) -> Result<PollAverages, DatasetError> {
    if window_start > window_end {
        return Err(DatasetError::EmptyWindow {
            start: window_start,
            end: window_end,
        });
    }
    let mut sums: BTreeMap<StateYear, (f64, f64, usize)> = BTreeMap::new();
    for p in polls
        .iter()
        .filter(|p| p.date >= window_start && p.date <= window_end)
    {
        let e = sums.entry((p.state, p.year)).or_insert((0.0, 0.0, 0));
        e.0 += p.dnc_pct;
        e.1 += p.gop_pct;
        e.2 += 1;
    }
    Ok(sums
        .into_iter()
        .map(|(k, (d, g, n))| (k, (d / n as f64, g / n as f64)))
        .collect())
}

/// Polling window of a cycle: August 1 through election day.
pub fn default_poll_window(year: ElectionYear) -> (NaiveDate, NaiveDate) {
    let start = NaiveDate::from_ymd_opt(year.get() as i32, 8, 1).expect("valid date");
    (start, year.election_day())
}

/// Averages each cycle's polls over that cycle's default window.
pub fn average_polls_by_cycle(polls: &[Poll]) -> PollAverages {
    let mut out = BTreeMap::new();
    for year in ElectionYear::ALL {
        let (start, end) = default_poll_window(year);
        let in_year: Vec<Poll> = polls.iter().filter(|p| p.year == year).cloned().collect();
        out.extend(average_polls(&in_year, start, end).expect("default window is ordered"));
    }
    out
}

pub fn load_polls(path: impl AsRef<Path>) -> Result<Vec<Poll>, DatasetError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| DatasetError::io(path, e))?;
    read_polls(file)
}

#[derive(Deserialize)]
struct PollRow {
    state: String,
    year: String,
    date: String,
    dnc_pct: String,
    gop_pct: String,
}

/// Reads `state,year,date,dnc_pct,gop_pct` with ISO-8601 dates.
pub fn read_polls<R: Read>(reader: R) -> Result<Vec<Poll>, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    for col in ["state", "year", "date", "dnc_pct", "gop_pct"] {
        if !headers.iter().any(|h| h == col) {
            return Err(DatasetError::MissingColumn(col.to_string()));
        }
    }
    let mut polls = Vec::new();
    for (i, row) in rdr.deserialize::<PollRow>().enumerate() {
        let row_no = i + 1;
        let row = row?;
        let cell_err = |column: &str| DatasetError::UnparseableCell {
            row: row_no,
            column: column.to_string(),
        };
        let pct = |raw: &str, column: &str| -> Result<f64, DatasetError> {
            raw.parse::<f64>()
                .ok()
                .filter(|v| (0.0..=100.0).contains(v))
                .ok_or_else(|| cell_err(column))
        };
        polls.push(Poll {
            state: StateId::parse(&row.state)?,
            year: row.year.parse()?,
            date: NaiveDate::parse_from_str(&row.date, "%Y-%m-%d").map_err(|_| cell_err("date"))?,
            dnc_pct: pct(&row.dnc_pct, "dnc_pct")?,
            gop_pct: pct(&row.gop_pct, "gop_pct")?,
        });
    }
    Ok(polls)
}

pub fn write_polls<W: std::io::Write>(writer: W, polls: &[Poll]) -> Result<(), DatasetError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["state", "year", "date", "dnc_pct", "gop_pct"])?;
    for p in polls {
        wtr.write_record([
            p.state.code().to_string(),
            p.year.to_string(),
            p.date.format("%Y-%m-%d").to_string(),
            p.dnc_pct.to_string(),
            p.gop_pct.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| DatasetError::Io(e.to_string()))?;
    Ok(())
}
