//! Per-(state, party, year) sentiment scores from tweets.
//!
//! Each tweet arrives with an externally computed (pos, neu, neg) probability
//! triple. A tweet is kept if it falls inside its cycle's collection window,
//! mentions a party keyword and has a resolvable location; it then counts once
//! toward every party it mentions. AP and AN are the positive and negative
//! shares of a group; AT = 1 - AP - AN.

mod aggregate;
mod gazetteer;
mod keywords;
mod preprocess;

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::dataset::{ElectionYear, PartyLabel, SentimentFeatures, SentimentRow, StateId};

pub use aggregate::{
    aggregate, AggregationReport, GroupKey, LabelCounts, SentimentContext, SentimentTally,
    SkipReason, LOW_SUPPORT_FLOOR,
};
pub use gazetteer::{normalize_location, resolve_state, Gazetteer};
pub use keywords::{match_party, KeywordTable};
pub use preprocess::preprocess;

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("invalid sentiment distribution ({pos}, {neu}, {neg})")]
    InvalidDistribution { pos: f64, neu: f64, neg: f64 },
    #[error("no keywords configured for {0}")]
    UnknownYear(ElectionYear),
    #[error("invalid keyword table: {0}")]
    InvalidKeywords(String),
    #[error("bad record at line {line}: {detail}")]
    BadRecord { line: usize, detail: String },
    #[error("io: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Positive,
    Neutral,
    Negative,
}

/// Argmax of the triple; ties resolve neutral, then positive, then negative.
pub fn label_sentiment(pos: f64, neu: f64, neg: f64) -> Result<SentimentLabel, SentimentError> {
    let valid = [pos, neu, neg].iter().all(|p| (0.0..=1.0).contains(p))
        && (pos + neu + neg - 1.0).abs() <= 1e-6;
    if !valid {
        return Err(SentimentError::InvalidDistribution { pos, neu, neg });
    }
    Ok(if neu >= pos && neu >= neg {
        SentimentLabel::Neutral
    } else if pos >= neg {
        SentimentLabel::Positive
    } else {
        SentimentLabel::Negative
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: String,
    #[serde(serialize_with = "ser_timestamp", deserialize_with = "de_timestamp")]
    pub created_at: DateTime<Utc>,
    pub text: String,
    #[serde(default)]
    pub user_location: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neg: Option<f64>,
}

fn ser_timestamp<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&ts.format("%Y-%m-%dT%H:%M:%SZ").to_string())
}

fn de_timestamp<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
    let raw = String::deserialize(d)?;
    parse_timestamp(&raw).ok_or_else(|| serde::de::Error::custom(format!("bad timestamp `{raw}`")))
}

/// RFC 3339, `YYYY-MM-DD HH:MM:SS+HH:MM`, or a naive timestamp taken as UTC.
pub fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    let raw = raw.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Some(t.with_timezone(&Utc));
    }
    if let Ok(t) = DateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S%:z") {
        return Some(t.with_timezone(&Utc));
    }
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(raw, f).ok())
        .map(|t| t.and_utc())
}

/// Inclusive date range during which a cycle's tweets were collected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionWindow {
    pub year: ElectionYear,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl CollectionWindow {
    /// First debate through election day of each cycle.
    pub fn defaults() -> [CollectionWindow; 3] {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).expect("valid date");
        [
            CollectionWindow {
                year: ElectionYear::Y2012,
                start: d(2012, 10, 3),
                end: d(2012, 11, 6),
            },
            CollectionWindow {
                year: ElectionYear::Y2016,
                start: d(2016, 9, 26),
                end: d(2016, 11, 8),
            },
            CollectionWindow {
                year: ElectionYear::Y2020,
                start: d(2020, 9, 29),
                end: d(2020, 11, 3),
            },
        ]
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        date >= self.start && date <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentAggregate {
    pub state: StateId,
    pub party: PartyLabel,
    pub year: ElectionYear,
    pub ap_score: f64,
    pub an_score: f64,
    pub at_score: f64,
    pub n_tweets: usize,
    pub low_support: bool,
}

/// Pivots aggregates into per-(state, year) feature rows. A key needs both
/// parties; a one-sided key is left out (and will fail a strict join).
pub fn to_features(aggregates: &[SentimentAggregate]) -> SentimentFeatures {
    let mut by_key: BTreeMap<_, [Option<(f64, f64)>; 2]> = BTreeMap::new();
    for a in aggregates {
        let slot = match a.party {
            PartyLabel::Dnc => 0,
            PartyLabel::Gop => 1,
        };
        by_key.entry((a.state, a.year)).or_default()[slot] = Some((a.ap_score, a.an_score));
    }
    by_key
        .into_iter()
        .filter_map(|(k, [d, g])| {
            let ((ap_dnc, an_dnc), (ap_gop, an_gop)) = (d?, g?);
            Some((
                k,
                SentimentRow {
                    ap_dnc,
                    an_dnc,
                    ap_gop,
                    an_gop,
                },
            ))
        })
        .collect()
}

pub fn load_tweets(path: impl AsRef<Path>) -> Result<Vec<TweetRecord>, SentimentError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| SentimentError::Io(format!("{}: {e}", path.display())))?;
    read_tweets(std::io::BufReader::new(file))
}

/// One JSON object per line; blank lines are ignored.
pub fn read_tweets<R: BufRead>(reader: R) -> Result<Vec<TweetRecord>, SentimentError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| SentimentError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| SentimentError::BadRecord {
            line: i + 1,
            detail: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_tweets<W: Write>(mut writer: W, tweets: &[TweetRecord]) -> Result<(), SentimentError> {
    for t in tweets {
        let line = serde_json::to_string(t).map_err(|e| SentimentError::Io(e.to_string()))?;
        writeln!(writer, "{line}").map_err(|e| SentimentError::Io(e.to_string()))?;
    }
    Ok(())
}

const SENTIMENT_HEADER: [&str; 8] = [
    "state",
    "year",
    "party",
    "ap_score",
    "an_score",
    "at_score",
    "n_tweets",
    "low_support",
];

/// Writes `sentiment.csv`.
pub fn write_aggregates<W: Write>(
    writer: W,
    aggregates: &[SentimentAggregate],
) -> Result<(), SentimentError> {
    let io = |e: csv::Error| SentimentError::Io(e.to_string());
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(SENTIMENT_HEADER).map_err(io)?;
    for a in aggregates {
        wtr.write_record([
            a.state.code().to_string(),
            a.year.to_string(),
            a.party.as_str().to_string(),
            a.ap_score.to_string(),
            a.an_score.to_string(),
            a.at_score.to_string(),
            a.n_tweets.to_string(),
            a.low_support.to_string(),
        ])
        .map_err(io)?;
    }
    wtr.flush().map_err(|e| SentimentError::Io(e.to_string()))?;
    Ok(())
}

pub fn read_aggregates<R: Read>(reader: R) -> Result<Vec<SentimentAggregate>, SentimentError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let bad = |detail: String| SentimentError::BadRecord {
            line: i + 2,
            detail,
        };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |j: usize| rec.get(j).unwrap_or("");
        let num = |j: usize| field(j).parse::<f64>().map_err(|e| bad(e.to_string()));
        out.push(SentimentAggregate {
            state: StateId::parse(field(0)).map_err(|e| bad(e.to_string()))?,
            year: field(1)
                .parse()
                .map_err(|e: crate::dataset::DatasetError| bad(e.to_string()))?,
            party: field(2)
                .parse()
                .map_err(|e: crate::dataset::DatasetError| bad(e.to_string()))?,
            ap_score: num(3)?,
            an_score: num(4)?,
            at_score: num(5)?,
            n_tweets: field(6)
                .parse()
                .map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
            low_support: field(7)
                .parse()
                .map_err(|e: std::str::ParseBoolError| bad(e.to_string()))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_argmax() {
        assert_eq!(
            label_sentiment(0.7, 0.2, 0.1).unwrap(),
            SentimentLabel::Positive
        );
        assert_eq!(
            label_sentiment(0.2, 0.3, 0.5).unwrap(),
            SentimentLabel::Negative
        );
    }

    #[test]
    fn ties_prefer_neutral_then_positive() {
        assert_eq!(
            label_sentiment(0.4, 0.4, 0.2).unwrap(),
            SentimentLabel::Neutral
        );
        assert_eq!(
            label_sentiment(0.45, 0.1, 0.45).unwrap(),
            SentimentLabel::Positive
        );
        assert_eq!(
            label_sentiment(0.2, 0.4, 0.4).unwrap(),
            SentimentLabel::Neutral
        );
    }

    #[test]
    fn invalid_distributions() {
        assert!(label_sentiment(0.5, 0.5, 0.5).is_err());
        assert!(label_sentiment(1.2, -0.1, -0.1).is_err());
        assert!(label_sentiment(f64::NAN, 0.5, 0.5).is_err());
        assert!(label_sentiment(0.3333333, 0.3333333, 0.3333334).is_ok());
    }

    #[test]
    fn timestamps() {
        let a = parse_timestamp("2020-10-01T12:00:00Z").unwrap();
        assert_eq!(parse_timestamp("2020-10-01 12:00:00+00:00"), Some(a));
        assert_eq!(parse_timestamp("2020-10-01T08:00:00-04:00"), Some(a));
        assert_eq!(parse_timestamp("2020-10-01 12:00:00"), Some(a));
        assert_eq!(parse_timestamp("yesterday"), None);
    }

    #[test]
    fn jsonl_round_trip_and_missing_triple() {
        let src = r#"{"id":"1","created_at":"2020-10-01T12:00:00Z","text":"biden","user_location":"PA","pos":0.7,"neu":0.2,"neg":0.1}
{"id":"2","created_at":"2020-10-02T00:00:00Z","text":"trump","user_location":"GA"}
"#;
        let tweets = read_tweets(src.as_bytes()).unwrap();
        assert_eq!(tweets.len(), 2);
        assert_eq!(tweets[1].pos, None);
        let mut buf = Vec::new();
        write_tweets(&mut buf, &tweets).unwrap();
        assert_eq!(read_tweets(buf.as_slice()).unwrap(), tweets);
    }

    #[test]
    fn bad_json_line_reports_line_number() {
        let err = read_tweets("\n{not json}\n".as_bytes()).unwrap_err();
        assert!(matches!(err, SentimentError::BadRecord { line: 2, .. }));
    }

    #[test]
    fn aggregates_csv_round_trip_and_pivot() {
        let aggs = vec![
            SentimentAggregate {
                state: StateId::parse("PA").unwrap(),
                party: PartyLabel::Dnc,
                year: ElectionYear::Y2020,
                ap_score: 0.4,
                an_score: 0.3,
                at_score: 1.0 - (0.4 + 0.3),
                n_tweets: 10,
                low_support: true,
            },
            SentimentAggregate {
                state: StateId::parse("PA").unwrap(),
                party: PartyLabel::Gop,
                year: ElectionYear::Y2020,
                ap_score: 0.25,
                an_score: 0.5,
                at_score: 0.25,
                n_tweets: 40,
                low_support: false,
            },
            SentimentAggregate {
                state: StateId::parse("GA").unwrap(),
                party: PartyLabel::Gop,
                year: ElectionYear::Y2020,
                ap_score: 0.25,
                an_score: 0.5,
                at_score: 0.25,
                n_tweets: 40,
                low_support: false,
            },
        ];
        let mut buf = Vec::new();
        write_aggregates(&mut buf, &aggs).unwrap();
        assert!(String::from_utf8_lossy(&buf)
            .starts_with("state,year,party,ap_score,an_score,at_score,n_tweets,low_support\n"));
        assert_eq!(read_aggregates(buf.as_slice()).unwrap(), aggs);

        let f = to_features(&aggs);
        assert_eq!(f.len(), 1, "GA has only one party");
        let row = f.values().next().unwrap();
        assert_eq!((row.ap_dnc, row.an_gop), (0.4, 0.5));
    }
}
