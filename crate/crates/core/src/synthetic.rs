//! Synthetic three-cycle election: all five input files for 51 jurisdictions.
//!
//! Each (state, year) draws a polling margin P (GOP minus DNC, points) and
//! per-party tweet label counts. The sentiment margin S is computed from the
//! realized counts as 100·[(ap_gop − an_gop) − (ap_dnc − an_dnc)], and the
//! winner is GOP iff P + w·S + ε > 0 with ε ~ N(0, σ). Census and economic
//! columns are correlated with P but not with S.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use chrono::{Duration, NaiveDate, TimeZone, Utc};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{
    average_polls_by_cycle, default_poll_window, join_sources, write_outcomes, Dataset,
    DatasetError, ElectionYear, FeatureSchema, PartyLabel, Poll, RawTable, StateId, StateYear,
    Unit, CENSUS_COLUMNS, ECONOMIC_COLUMNS,
};
use crate::seed;
use crate::sentiment::{
    aggregate, to_features, write_tweets, CollectionWindow, SentimentContext, SentimentError,
    TweetRecord,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub seed: u64,
    /// Standard deviation of the polling margin, in points.
    pub poll_margin_sd: f64,
    pub sentiment_weight: f64,
    pub noise_sd: f64,
    /// Classified tweets per (state, year, party).
    pub tweets_per_group: usize,
    pub polls_per_state: usize,
    /// Positive and negative tweet shares are drawn uniformly from
    /// 0.3 ± this half-width, per party.
    pub share_half_width: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 2020,
            poll_margin_sd: 20.0,
            sentiment_weight: 0.3,
            noise_sd: 1.0,
            tweets_per_group: 50,
            polls_per_state: 3,
            share_half_width: 0.08,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Latent {
    pub poll_margin: f64,
    pub sentiment_margin: f64,
    pub noise: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticElection {
    pub census: RawTable,
    pub economy: RawTable,
    pub polls: Vec<Poll>,
    pub tweets: Vec<TweetRecord>,
    pub outcomes: BTreeMap<StateYear, PartyLabel>,
    pub latent: BTreeMap<StateYear, Latent>,
}

/// File names written by [`SyntheticElection::write_to`].
pub const CENSUS_FILE: &str = "census.csv";
pub const ECONOMY_FILE: &str = "economy.csv";
pub const POLLS_FILE: &str = "polls.csv";
pub const TWEETS_FILE: &str = "tweets.jsonl";
pub const OUTCOMES_FILE: &str = "outcomes.csv";

#[derive(Debug, thiserror::Error)]
pub enum SyntheticError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Sentiment(#[from] SentimentError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn party_keyword(year: ElectionYear, party: PartyLabel) -> &'static str {
    match (year.get(), party) {
        (2012, PartyLabel::Dnc) => "obama",
        (2012, PartyLabel::Gop) => "romney",
        (2016, PartyLabel::Dnc) => "clinton",
        (_, PartyLabel::Dnc) => "biden",
        (_, PartyLabel::Gop) => "trump",
    }
}

/// (center, spread, loading on the standardized polling margin) for each
/// census column, in schema order. Demographics lean partisan to varying
/// degrees, so they carry noisy information about the margin but none
/// about sentiment.
const CENSUS_PROFILE: [(f64, f64, f64); 18] = [
    (23.0, 3.0, -0.3),
    (33.0, 2.0, 0.1),
    (22.0, 3.0, 0.3),
    (70_000.0, 10_000.0, -0.6),
    (38.0, 5.0, -0.6),
    (17.0, 2.0, -0.2),
    (22.0, 2.0, -0.1),
    (10.0, 2.0, 0.5),
    (13.0, 3.0, 0.4),
    (1.0, 0.6, 0.5),
    (13.0, 3.0, 0.3),
    (62.0, 15.0, 0.7),
    (12.0, 8.0, -0.3),
    (12.0, 9.0, -0.3),
    (4.0, 3.0, -0.5),
    (6.0, 3.0, -0.1),
    (0.98, 0.02, 0.3),
    (5.5, 1.5, -0.2),
];

/// Standard normal draw with correlation `loading` to `z_margin`.
fn leaning<R: Rng>(z_margin: f64, loading: f64, rng: &mut R) -> f64 {
    let e: f64 = rng.sample(rand_distr::StandardNormal);
    loading * z_margin + (1.0 - loading * loading).sqrt() * e
}

/// Label counts (positive, negative, neutral) for `n` tweets.
fn draw_counts<R: Rng>(n: usize, half_width: f64, rng: &mut R) -> (usize, usize, usize) {
    let range = 0.3 - half_width..=0.3 + half_width;
    let pos = (rng.random_range(range.clone()) * n as f64).round() as usize;
    let neg = (rng.random_range(range) * n as f64).round() as usize;
    (pos, neg, n - pos - neg)
}

impl SyntheticElection {
    pub fn generate(config: &SyntheticConfig) -> Self {
        let mut rng = seed::rng(seed::derive(config.seed, &["synthetic"]));
        let margin = Normal::new(0.0, config.poll_margin_sd).expect("finite sd");
        let noise = Normal::new(0.0, config.noise_sd).expect("finite sd");
        let windows = CollectionWindow::defaults();

        let census_cols: Vec<String> = CENSUS_COLUMNS.iter().map(|(n, _)| n.to_string()).collect();
        let econ_cols: Vec<String> = ECONOMIC_COLUMNS.iter().map(|n| n.to_string()).collect();
        let mut census = RawTable {
            columns: census_cols,
            rows: BTreeMap::new(),
        };
        let mut economy = RawTable {
            columns: econ_cols,
            rows: BTreeMap::new(),
        };
        let mut polls = Vec::new();
        let mut tweets = Vec::new();
        let mut outcomes = BTreeMap::new();
        let mut latent = BTreeMap::new();

        for (year, window) in ElectionYear::ALL.into_iter().zip(windows) {
            let (poll_start, poll_end) = default_poll_window(year);
            let poll_days = (poll_end - poll_start).num_days();
            let tweet_days = (window.end - window.start).num_days();
            for state in StateId::all() {
                let key = (state, year);
                let p = margin.sample(&mut rng);
                let z = p / config.poll_margin_sd;
                census.rows.insert(
                    key,
                    CENSUS_COLUMNS
                        .iter()
                        .zip(CENSUS_PROFILE)
                        .map(|((_, unit), (center, spread, loading))| {
                            let v = center + spread * leaning(z, loading, &mut rng);
                            match unit {
                                Unit::Percent => v.clamp(0.05, 99.0),
                                _ => v,
                            }
                        })
                        .collect(),
                );
                let pi = 54_000.0 + 7_000.0 * leaning(z, -0.6, &mut rng);
                economy.rows.insert(
                    key,
                    vec![
                        10f64.powf(5.3 + 0.5 * leaning(z, -0.4, &mut rng)),
                        pi,
                        pi * rng.random_range(1.0..1.01),
                        pi * rng.random_range(1.005..1.02),
                    ],
                );

                // Polls: deviations around the target that cancel in the mean.
                let undecided: f64 = rng.random_range(2.0..6.0);
                let gop = 50.0 + p / 2.0 - undecided / 2.0;
                let dnc = 50.0 - p / 2.0 - undecided / 2.0;
                let k = config.polls_per_state.max(1);
                for i in 0..k {
                    let offset = if k == 1 {
                        0.0
                    } else {
                        (i as f64 - (k - 1) as f64 / 2.0) * 0.5
                    };
                    let day = rng.random_range(0..=poll_days);
                    polls.push(Poll {
                        state,
                        year,
                        date: poll_start + Duration::days(day),
                        dnc_pct: (dnc + offset).clamp(0.0, 100.0),
                        gop_pct: (gop - offset).clamp(0.0, 100.0),
                    });
                }
                // A stale poll from before the window, which averaging must ignore.
                polls.push(Poll {
                    state,
                    year,
                    date: poll_start - Duration::days(20),
                    dnc_pct: 90.0,
                    gop_pct: 5.0,
                });

                let mut net = [0.0; 2];
                for (pi, party) in PartyLabel::BOTH.into_iter().enumerate() {
                    let n = config.tweets_per_group;
                    let (pos, neg, neu) = draw_counts(n, config.share_half_width, &mut rng);
                    net[pi] = (pos as f64 - neg as f64) / n as f64;
                    let labels = std::iter::repeat_n((0.8, 0.15, 0.05), pos)
                        .chain(std::iter::repeat_n((0.05, 0.15, 0.8), neg))
                        .chain(std::iter::repeat_n((0.2, 0.7, 0.1), neu));
                    for (j, (ppos, pneu, pneg)) in labels.enumerate() {
                        let day = rng.random_range(0..=tweet_days);
                        let secs = rng.random_range(0..86_400);
                        let date = window.start + Duration::days(day);
                        tweets.push(TweetRecord {
                            id: format!("{}-{}-{}-{j}", year, state.code(), party.as_str()),
                            created_at: Utc
                                .from_utc_datetime(&date.and_hms_opt(0, 0, 0).expect("midnight"))
                                + Duration::seconds(secs),
                            text: format!(
                                "#{} rally in {} https://t.co/x{j}",
                                party_keyword(year, party),
                                state.name()
                            ),
                            user_location: state.name().to_string(),
                            pos: Some(ppos),
                            neu: Some(pneu),
                            neg: Some(pneg),
                        });
                    }
                }
                let s = 100.0 * (net[1] - net[0]);
                let e = noise.sample(&mut rng);
                let realized_p = gop - dnc;
                let label = if realized_p + config.sentiment_weight * s + e > 0.0 {
                    PartyLabel::Gop
                } else {
                    PartyLabel::Dnc
                };
                outcomes.insert(key, label);
                latent.insert(
                    key,
                    Latent {
                        poll_margin: realized_p,
                        sentiment_margin: s,
                        noise: e,
                    },
                );
            }
        }
        SyntheticElection {
            census,
            economy,
            polls,
            tweets,
            outcomes,
            latent,
        }
    }

    /// Runs poll averaging, tweet aggregation and the join in memory.
    pub fn dataset(&self, schema: &FeatureSchema) -> Result<Dataset, SyntheticError> {
        let polls = average_polls_by_cycle(&self.polls);
        let report = aggregate(&self.tweets, &SentimentContext::default());
        let sentiment = to_features(&report.aggregates);
        Ok(join_sources(
            &self.census,
            &self.economy,
            &polls,
            &sentiment,
            &self.outcomes,
            schema,
        )?)
    }

    /// Writes the five input files into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<(), SyntheticError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        write_raw_table(std::fs::File::create(dir.join(CENSUS_FILE))?, &self.census)?;
        write_raw_table(
            std::fs::File::create(dir.join(ECONOMY_FILE))?,
            &self.economy,
        )?;
        crate::dataset::write_polls(std::fs::File::create(dir.join(POLLS_FILE))?, &self.polls)?;
        write_tweets(
            std::io::BufWriter::new(std::fs::File::create(dir.join(TWEETS_FILE))?),
            &self.tweets,
        )?;
        write_outcomes(
            std::fs::File::create(dir.join(OUTCOMES_FILE))?,
            &self.outcomes,
        )?;
        Ok(())
    }
}

/// Writes a `state,year,<columns>` table.
pub fn write_raw_table<W: Write>(writer: W, table: &RawTable) -> Result<(), SyntheticError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["state".to_string(), "year".to_string()];
    header.extend(table.columns.iter().cloned());
    wtr.write_record(&header)?;
    for ((state, year), values) in &table.rows {
        let mut rec = vec![state.code().to_string(), year.to_string()];
        rec.extend(values.iter().map(|v| v.to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// First day of a cycle's tweet window, for building small fixtures.
pub fn window_start(year: ElectionYear) -> NaiveDate {
    CollectionWindow::defaults()
        .into_iter()
        .find(|w| w.year == year)
        .expect("every cycle has a window")
        .start
}
