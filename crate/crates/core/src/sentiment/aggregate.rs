use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    label_sentiment, preprocess, CollectionWindow, Gazetteer, KeywordTable, SentimentAggregate,
    SentimentLabel, TweetRecord,
};
use crate::dataset::{ElectionYear, PartyLabel, StateId};

/// Groups below this many tweets are emitted but flagged.
pub const LOW_SUPPORT_FLOOR: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkipReason {
    OutOfWindow,
    NoParty,
    NoState,
    MissingProbabilities,
    InvalidDistribution,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::OutOfWindow => "out-of-window",
            SkipReason::NoParty => "no-party",
            SkipReason::NoState => "no-state",
            SkipReason::MissingProbabilities => "missing-probabilities",
            SkipReason::InvalidDistribution => "invalid-distribution",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub positive: u64,
    pub neutral: u64,
    pub negative: u64,
}

impl LabelCounts {
    pub fn total(&self) -> u64 {
        self.positive + self.neutral + self.negative
    }

    pub fn add(&mut self, label: SentimentLabel) {
        match label {
            SentimentLabel::Positive => self.positive += 1,
            SentimentLabel::Neutral => self.neutral += 1,
            SentimentLabel::Negative => self.negative += 1,
        }
    }

    fn merge(&mut self, other: &LabelCounts) {
        self.positive += other.positive;
        self.neutral += other.neutral;
        self.negative += other.negative;
    }

    /// (ap, an, at) with at = 1 - (ap + an), which makes the three sum to
    /// exactly 1.0 in floating point. `None` for an empty group.
    pub fn scores(&self) -> Option<(f64, f64, f64)> {
        let n = self.total();
        if n == 0 {
            return None;
        }
        let ap = self.positive as f64 / n as f64;
        let an = self.negative as f64 / n as f64;
        Some((ap, an, 1.0 - (ap + an)))
    }
}

pub type GroupKey = (ElectionYear, StateId, PartyLabel);

/// Partial aggregation state. [`SentimentTally::merge`] is associative and
/// commutative, so a stream may be split and folded in any order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SentimentTally {
    pub counts: BTreeMap<GroupKey, LabelCounts>,
    pub skipped: BTreeMap<SkipReason, usize>,
    pub retained: usize,
}

impl SentimentTally {
    pub fn merge(&mut self, other: &SentimentTally) {
        for (k, c) in &other.counts {
            self.counts.entry(*k).or_default().merge(c);
        }
        for (r, n) in &other.skipped {
            *self.skipped.entry(*r).or_default() += n;
        }
        self.retained += other.retained;
    }

    fn skip(&mut self, reason: SkipReason) {
        *self.skipped.entry(reason).or_default() += 1;
    }

    pub fn aggregates(&self) -> Vec<SentimentAggregate> {
        self.counts
            .iter()
            .filter_map(|(&(year, state, party), c)| {
                let (ap, an, at) = c.scores()?;
                let n = c.total() as usize;
                Some(SentimentAggregate {
                    state,
                    party,
                    year,
                    ap_score: ap,
                    an_score: an,
                    at_score: at,
                    n_tweets: n,
                    low_support: n < LOW_SUPPORT_FLOOR,
                })
            })
            .collect()
    }
}

/// Read-only lookup tables for the per-tweet pipeline.
#[derive(Debug, Clone)]
pub struct SentimentContext {
    pub keywords: KeywordTable,
    pub windows: Vec<CollectionWindow>,
    pub gazetteer: Gazetteer,
}

impl Default for SentimentContext {
    fn default() -> Self {
        SentimentContext {
            keywords: KeywordTable::default(),
            windows: CollectionWindow::defaults().to_vec(),
            gazetteer: Gazetteer::default(),
        }
    }
}

impl SentimentContext {
    /// Runs one tweet through window → preprocess → party → state → label.
    pub fn absorb(&self, tally: &mut SentimentTally, tweet: &TweetRecord) {
        let date = tweet.created_at.date_naive();
        let Some(window) = self.windows.iter().find(|w| w.contains(date)) else {
            return tally.skip(SkipReason::OutOfWindow);
        };
        let text = preprocess(&tweet.text);
        let parties = match self.keywords.match_party(&text, window.year) {
            Ok(p) if !p.is_empty() => p,
            _ => return tally.skip(SkipReason::NoParty),
        };
        let Some(state) = self.gazetteer.resolve(&tweet.user_location) else {
            return tally.skip(SkipReason::NoState);
        };
        let (Some(pos), Some(neu), Some(neg)) = (tweet.pos, tweet.neu, tweet.neg) else {
            return tally.skip(SkipReason::MissingProbabilities);
        };
        let Ok(label) = label_sentiment(pos, neu, neg) else {
            return tally.skip(SkipReason::InvalidDistribution);
        };
        tally.retained += 1;
        for party in parties {
            tally
                .counts
                .entry((window.year, state, party))
                .or_default()
                .add(label);
        }
    }

    pub fn tally<'a>(&self, tweets: impl IntoIterator<Item = &'a TweetRecord>) -> SentimentTally {
        let mut t = SentimentTally::default();
        for tweet in tweets {
            self.absorb(&mut t, tweet);
        }
        t
    }
}

/// Full aggregation result: per-group scores plus skip counts by reason.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationReport {
    pub aggregates: Vec<SentimentAggregate>,
    pub skipped: BTreeMap<SkipReason, usize>,
    pub retained: usize,
}

pub fn aggregate<'a>(
    tweets: impl IntoIterator<Item = &'a TweetRecord>,
    context: &SentimentContext,
) -> AggregationReport {
    let tally = context.tally(tweets);
    AggregationReport {
        aggregates: tally.aggregates(),
        skipped: tally.skipped.clone(),
        retained: tally.retained,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    fn tweet(text: &str, loc: &str, day: u32, probs: (f64, f64, f64)) -> TweetRecord {
        TweetRecord {
            id: format!("{text}-{loc}-{day}"),
            created_at: Utc.with_ymd_and_hms(2020, 10, day, 12, 0, 0).unwrap(),
            text: text.to_string(),
            user_location: loc.to_string(),
            pos: Some(probs.0),
            neu: Some(probs.1),
            neg: Some(probs.2),
        }
    }

    const POS: (f64, f64, f64) = (0.8, 0.1, 0.1);
    const NEU: (f64, f64, f64) = (0.1, 0.8, 0.1);
    const NEG: (f64, f64, f64) = (0.1, 0.1, 0.8);

    fn agg_for(report: &AggregationReport, state: &str, party: PartyLabel) -> SentimentAggregate {
        report
            .aggregates
            .iter()
            .find(|a| a.state.code() == state && a.party == party)
            .cloned()
            .expect("aggregate present")
    }

    #[test]
    fn proportions_for_one_group() {
        let mut tweets = Vec::new();
        for (n, p) in [(4, POS), (3, NEG), (3, NEU)] {
            for i in 0..n {
                tweets.push(tweet("go trump", "Pittsburgh, PA", 1 + i, p));
            }
        }
        let r = aggregate(&tweets, &SentimentContext::default());
        let a = agg_for(&r, "PA", PartyLabel::Gop);
        assert_eq!((a.ap_score, a.an_score, a.n_tweets), (0.4, 0.3, 10));
        assert!((a.at_score - 0.3).abs() < 1e-15);
        assert_eq!(a.ap_score + a.an_score + a.at_score, 1.0);
        assert!(a.low_support);
    }

    #[test]
    fn all_positive_boundary() {
        let tweets: Vec<_> = (1..=5).map(|d| tweet("biden", "Ohio", d, POS)).collect();
        let a = agg_for(
            &aggregate(&tweets, &SentimentContext::default()),
            "OH",
            PartyLabel::Dnc,
        );
        assert_eq!((a.ap_score, a.an_score, a.at_score), (1.0, 0.0, 0.0));
    }

    #[test]
    fn dual_mention_counts_for_both_parties() {
        let tweets = vec![tweet("trump vs biden", "Texas", 5, NEG)];
        let r = aggregate(&tweets, &SentimentContext::default());
        assert_eq!(r.aggregates.len(), 2);
        assert_eq!(r.retained, 1);
        assert_eq!(agg_for(&r, "TX", PartyLabel::Dnc).an_score, 1.0);
        assert_eq!(agg_for(&r, "TX", PartyLabel::Gop).an_score, 1.0);
    }

    #[test]
    fn skip_reasons_are_counted() {
        let mut missing = tweet("biden", "Texas", 5, POS);
        missing.neg = None;
        let tweets = vec![
            TweetRecord {
                created_at: Utc.with_ymd_and_hms(2020, 7, 4, 0, 0, 0).unwrap(),
                ..tweet("biden", "Texas", 1, POS)
            },
            tweet("nice weather", "Texas", 5, POS),
            tweet("biden", "Narnia", 5, POS),
            missing,
            tweet("biden", "Texas", 5, (0.5, 0.5, 0.5)),
        ];
        let r = aggregate(&tweets, &SentimentContext::default());
        assert!(r.aggregates.is_empty());
        for reason in [
            SkipReason::OutOfWindow,
            SkipReason::NoParty,
            SkipReason::NoState,
            SkipReason::MissingProbabilities,
            SkipReason::InvalidDistribution,
        ] {
            assert_eq!(r.skipped[&reason], 1, "{reason:?}");
        }
    }

    #[test]
    fn keywords_follow_the_tweets_cycle() {
        // Romney is a 2012 keyword only.
        let t2012 = TweetRecord {
            created_at: Utc.with_ymd_and_hms(2012, 10, 10, 0, 0, 0).unwrap(),
            ..tweet("romney", "Utah", 1, POS)
        };
        let t2020 = tweet("romney", "Utah", 10, POS);
        let r = aggregate(&[t2012, t2020], &SentimentContext::default());
        assert_eq!(r.aggregates.len(), 1);
        assert_eq!(r.aggregates[0].year, ElectionYear::Y2012);
        assert_eq!(r.skipped[&SkipReason::NoParty], 1);
    }

    /// Brute force: filter the raw stream per group and count labels directly.
    fn recount(tweets: &[TweetRecord], state: &str, party: &str) -> (usize, usize, usize) {
        let keyword = if party == "DNC" { "biden" } else { "trump" };
        let mut c = (0, 0, 0);
        for t in tweets {
            let loc_ok = t.user_location == state;
            let party_ok = t.text.to_lowercase().split(' ').any(|w| w == keyword);
            if loc_ok && party_ok {
                let p = (t.pos.unwrap(), t.neu.unwrap(), t.neg.unwrap());
                if p.1 >= p.0 && p.1 >= p.2 {
                    c.1 += 1
                } else if p.0 >= p.2 {
                    c.0 += 1
                } else {
                    c.2 += 1
                }
            }
        }
        c
    }

    fn arb_stream() -> impl Strategy<Value = Vec<TweetRecord>> {
        let texts = prop_oneof![
            Just("trump"),
            Just("biden"),
            Just("trump biden"),
            Just("hello")
        ];
        let locs = prop_oneof![Just("PA"), Just("GA"), Just("Mars")];
        let probs = prop_oneof![Just(POS), Just(NEU), Just(NEG), Just((0.45, 0.45, 0.1))];
        proptest::collection::vec((texts, locs, 1u32..28, probs), 0..60).prop_map(|v| {
            v.into_iter()
                .map(|(t, l, d, p)| tweet(t, l, d, p))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force_recount(tweets in arb_stream()) {
            let r = aggregate(&tweets, &SentimentContext::default());
            for state in ["PA", "GA"] {
                for party in PartyLabel::BOTH {
                    let (p, u, n) = recount(&tweets, state, party.as_str());
                    let found = r.aggregates.iter().find(|a| a.state.code() == state && a.party == party);
                    match found {
                        None => prop_assert_eq!(p + u + n, 0),
                        Some(a) => {
                            let total = (p + u + n) as f64;
                            prop_assert_eq!(a.n_tweets, p + u + n);
                            prop_assert_eq!(a.ap_score, p as f64 / total);
                            prop_assert_eq!(a.an_score, n as f64 / total);
                            prop_assert_eq!(a.ap_score + a.an_score + a.at_score, 1.0);
                        }
                    }
                }
            }
        }

        #[test]
        fn permutation_and_duplication_invariance(tweets in arb_stream(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let ctx = SentimentContext::default();
            let base = aggregate(&tweets, &ctx).aggregates;
            let mut shuffled = tweets.clone();
            shuffled.shuffle(&mut crate::seed::rng(seed));
            prop_assert_eq!(&aggregate(&shuffled, &ctx).aggregates, &base);
            let doubled: Vec<_> = tweets.iter().chain(tweets.iter()).cloned().collect();
            let dup = aggregate(&doubled, &ctx).aggregates;
            prop_assert_eq!(dup.len(), base.len());
            for (d, b) in dup.iter().zip(&base) {
                prop_assert_eq!((d.ap_score, d.an_score, d.at_score), (b.ap_score, b.an_score, b.at_score));
                prop_assert_eq!(d.n_tweets, 2 * b.n_tweets);
            }
        }

        #[test]
        fn merge_is_associative_and_commutative(tweets in arb_stream(), cut1 in 0usize..60, cut2 in 0usize..60) {
            let ctx = SentimentContext::default();
            let (a, b) = (cut1.min(tweets.len()), cut2.min(tweets.len()));
            let (lo, hi) = (a.min(b), a.max(b));
            let parts: Vec<SentimentTally> = [&tweets[..lo], &tweets[lo..hi], &tweets[hi..]]
                .iter()
                .map(|s| ctx.tally(s.iter()))
                .collect();
            let mut left = parts[0].clone();
            left.merge(&parts[1]);
            left.merge(&parts[2]);
            let mut right = parts[2].clone();
            let mut inner = parts[1].clone();
            inner.merge(&parts[0]);
            right.merge(&inner);
            prop_assert_eq!(&left, &right);
            prop_assert_eq!(&left, &ctx.tally(tweets.iter()));
        }

        #[test]
        fn positive_tweet_monotonicity(pos in 0u64..50, neu in 0u64..50, neg in 0u64..50) {
            prop_assume!(pos + neu + neg > 0);
            let before = LabelCounts { positive: pos, neutral: neu, negative: neg };
            let mut after = before;
            after.add(SentimentLabel::Positive);
            let (ap0, _, _) = before.scores().unwrap();
            let (ap1, _, _) = after.scores().unwrap();
            prop_assert_eq!(ap1 > ap0, ap0 < 1.0);
        }
    }
}
