//! Source tables, the joined state-year dataset, and feature standardization.
//!
//! Four sources feed the dataset: census and economic tables (`state,year,<features>`),
//! raw polls averaged over a pre-election window, and per-party sentiment scores.
//! They are inner-joined on (state, year) against the outcome labels. Missing keys
//! are errors; nothing is imputed.

mod polls;
mod scaler;
mod schema;
mod table;
mod types;

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::FeatureMatrix;

pub use polls::{
    average_polls, average_polls_by_cycle, default_poll_window, load_polls, read_polls,
    write_polls, Poll, PollAverages,
};
pub use scaler::{fit_scaler, Scaler};
pub use schema::{
    fingerprint_of, FeatureDef, FeatureGroup, FeatureSchema, Unit, CENSUS_COLUMNS,
    ECONOMIC_COLUMNS, POLLING_COLUMNS, SENTIMENT_COLUMNS,
};
pub use table::{load_outcomes, load_table, read_outcomes, read_table, write_outcomes, RawTable};
pub use types::{ElectionYear, PartyLabel, StateId, StateYear, JURISDICTIONS};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("unparseable cell at data row {row}, column `{column}`")]
    UnparseableCell { row: usize, column: String },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown election year `{0}`")]
    UnknownYear(String),
    #[error("unknown party `{0}`")]
    UnknownParty(String),
    #[error("duplicate key ({0}, {1})")]
    DuplicateKey(StateId, ElectionYear),
    #[error("poll window is empty: {start} > {end}")]
    EmptyWindow {
        start: chrono::NaiveDate,
        end: chrono::NaiveDate,
    },
    #[error("key ({1}, {2}) is missing from the {0} source")]
    KeyMissingInSource(Source, StateId, ElectionYear),
    #[error("feature `{feature}` = {value} out of range for ({state}, {year})")]
    OutOfRange {
        state: StateId,
        year: ElectionYear,
        feature: String,
        value: f64,
    },
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("malformed dataset: {0}")]
    Malformed(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(String),
}

impl DatasetError {
    pub(crate) fn io(path: &Path, err: std::io::Error) -> Self {
        DatasetError::Io(format!("{}: {err}", path.display()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Census,
    Economy,
    Polls,
    Sentiment,
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Source::Census => "census",
            Source::Economy => "economy",
            Source::Polls => "polls",
            Source::Sentiment => "sentiment",
        })
    }
}

/// The four sentiment features of one (state, year).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentRow {
    pub ap_dnc: f64,
    pub an_dnc: f64,
    pub ap_gop: f64,
    pub an_gop: f64,
}

impl SentimentRow {
    fn get(&self, column: &str) -> Option<f64> {
        match column {
            "ap_dnc" => Some(self.ap_dnc),
            "an_dnc" => Some(self.an_dnc),
            "ap_gop" => Some(self.ap_gop),
            "an_gop" => Some(self.an_gop),
            _ => None,
        }
    }
}

pub type SentimentFeatures = BTreeMap<StateYear, SentimentRow>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateYearRecord {
    pub state: StateId,
    pub year: ElectionYear,
    pub features: Vec<f64>,
    pub label: PartyLabel,
}

/// Labeled rows sorted by (year, state), aligned to one schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    schema: FeatureSchema,
    rows: Vec<StateYearRecord>,
}

impl Dataset {
    pub fn new(
        schema: FeatureSchema,
        mut rows: Vec<StateYearRecord>,
    ) -> Result<Self, DatasetError> {
        let mut keys = BTreeSet::new();
        for r in &rows {
            if r.features.len() != schema.len() {
                return Err(DatasetError::Malformed(format!(
                    "row ({}, {}) has {} features, schema has {}",
                    r.state,
                    r.year,
                    r.features.len(),
                    schema.len()
                )));
            }
            if !keys.insert((r.state, r.year)) {
                return Err(DatasetError::DuplicateKey(r.state, r.year));
            }
            for (def, &v) in schema.features().iter().zip(&r.features) {
                if !def.unit.contains(v) {
                    return Err(DatasetError::OutOfRange {
                        state: r.state,
                        year: r.year,
                        feature: def.name.clone(),
                        value: v,
                    });
                }
            }
        }
        rows.sort_by_key(|r| (r.year, r.state));
        Ok(Dataset { schema, rows })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn rows(&self) -> &[StateYearRecord] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn matrix(&self) -> FeatureMatrix {
        let data = self
            .rows
            .iter()
            .flat_map(|r| r.features.iter().copied())
            .collect();
        FeatureMatrix::new(self.schema.names(), self.rows.len(), data)
    }

    pub fn labels(&self) -> Vec<PartyLabel> {
        self.rows.iter().map(|r| r.label).collect()
    }

    pub fn years(&self) -> BTreeSet<ElectionYear> {
        self.rows.iter().map(|r| r.year).collect()
    }

    pub fn filter_years(&self, years: &[ElectionYear]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: self
                .rows
                .iter()
                .filter(|r| years.contains(&r.year))
                .cloned()
                .collect(),
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        let mut rows: Vec<_> = idx.iter().map(|&i| self.rows[i].clone()).collect();
        rows.sort_by_key(|r| (r.year, r.state));
        Dataset {
            schema: self.schema.clone(),
            rows,
        }
    }

    /// Projects onto `schema`, whose columns must all exist here.
    pub fn project(&self, schema: &FeatureSchema) -> Result<Dataset, DatasetError> {
        let idx: Vec<usize> = schema
            .features()
            .iter()
            .map(|f| {
                self.schema
                    .index_of(&f.name)
                    .ok_or_else(|| DatasetError::MissingColumn(f.name.clone()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Dataset {
            schema: schema.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| StateYearRecord {
                    features: idx.iter().map(|&j| r.features[j]).collect(),
                    ..r.clone()
                })
                .collect(),
        })
    }

    /// Drops every column of `group` (the sentiment ablation).
    pub fn without_group(&self, group: FeatureGroup) -> Result<Dataset, DatasetError> {
        self.project(&self.schema.without_group(group)?)
    }

    /// Writes `features.csv`: `state,year,<schema columns...>,label`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DatasetError> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["state".to_string(), "year".to_string()];
        header.extend(self.schema.names());
        header.push("label".to_string());
        wtr.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.state.code().to_string(), r.year.to_string()];
            rec.extend(r.features.iter().map(|v| v.to_string()));
            rec.push(r.label.as_str().to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|e| DatasetError::Io(e.to_string()))?;
        Ok(())
    }

    /// Reads `features.csv` written against `schema`.
    pub fn read_csv<R: Read>(reader: R, schema: &FeatureSchema) -> Result<Dataset, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let label_idx = headers
            .iter()
            .position(|h| h == "label")
            .ok_or_else(|| DatasetError::MissingColumn("label".into()))?;
        let names = schema.names();
        let expected: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut labels = Vec::new();
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            labels.push(rec.get(label_idx).unwrap_or("").parse::<PartyLabel>()?);
            records.push(rec);
        }
        // Reuse the table parser for keys and numeric cells.
        let mut buf = Vec::new();
        {
            let mut wtr = csv::Writer::from_writer(&mut buf);
            wtr.write_record(&headers)?;
            for r in &records {
                wtr.write_record(r)?;
            }
            wtr.flush().map_err(|e| DatasetError::Io(e.to_string()))?;
        }
        let table = read_table(buf.as_slice(), &expected)?;
        let mut label_map = BTreeMap::new();
        for (r, label) in records.iter().zip(labels) {
            let key = (
                StateId::parse(r.get(0).unwrap_or(""))?,
                r.get(1).unwrap_or("").parse::<ElectionYear>()?,
            );
            label_map.insert(key, label);
        }
        let rows = table
            .rows
            .into_iter()
            .map(|((state, year), features)| StateYearRecord {
                state,
                year,
                features,
                label: label_map[&(state, year)],
            })
            .collect();
        Dataset::new(schema.clone(), rows)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| DatasetError::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Inner join of the four sources against `outcomes`.
///
/// A source is required only if `schema` draws columns from it. A key present
/// in `outcomes` but absent from a required source is an error. Rows come out
/// sorted by year, then state code.
pub fn join_sources(
    census: &RawTable,
    economy: &RawTable,
    polls: &PollAverages,
    sentiment: &SentimentFeatures,
    outcomes: &BTreeMap<StateYear, PartyLabel>,
    schema: &FeatureSchema,
) -> Result<Dataset, DatasetError> {
    for def in schema.features() {
        let table = match def.group {
            FeatureGroup::Census => census,
            FeatureGroup::Economic => economy,
            _ => continue,
        };
        if table.column_index(&def.name).is_none() {
            return Err(DatasetError::MissingColumn(def.name.clone()));
        }
    }

    let mut rows = Vec::with_capacity(outcomes.len());
    for (&(state, year), &label) in outcomes {
        let key = (state, year);
        let missing = |src| DatasetError::KeyMissingInSource(src, state, year);
        let mut features = Vec::with_capacity(schema.len());
        for def in schema.features() {
            let v = match def.group {
                FeatureGroup::Census => census
                    .get(&key, &def.name)
                    .ok_or_else(|| missing(Source::Census))?,
                FeatureGroup::Economic => economy
                    .get(&key, &def.name)
                    .ok_or_else(|| missing(Source::Economy))?,
                FeatureGroup::Polling => {
                    let (d, g) = polls.get(&key).ok_or_else(|| missing(Source::Polls))?;
                    if def.name == POLLING_COLUMNS[0] {
                        *d
                    } else {
                        *g
                    }
                }
                FeatureGroup::Sentiment => sentiment
                    .get(&key)
                    .ok_or_else(|| missing(Source::Sentiment))?
                    .get(&def.name)
                    .expect("schema guarantees sentiment column names"),
            };
            features.push(v);
        }
        rows.push(StateYearRecord {
            state,
            year,
            features,
            label,
        });
    }
    let ds = Dataset::new(schema.clone(), rows)?;
    log::info!("joined dataset: {} rows", ds.len());
    Ok(ds)
}
