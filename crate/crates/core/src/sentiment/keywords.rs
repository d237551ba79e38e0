use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use super::preprocess::tokens;
use super::SentimentError;
use crate::dataset::{ElectionYear, PartyLabel};

/// Candidate and party keywords per cycle, verbatim from the collection setup
/// (including the `demoratic` spelling used for 2016 and 2020).
const DEFAULT_KEYWORDS: [(u16, PartyLabel, &[&str]); 6] = [
    (
        2012,
        PartyLabel::Dnc,
        &[
            "barackobama",
            "obama",
            "obama2012",
            "democratic",
            "democrat",
        ],
    ),
    (
        2012,
        PartyLabel::Gop,
        &["mittromney", "romney", "mitt2012", "republican", "gop"],
    ),
    (
        2016,
        PartyLabel::Dnc,
        &[
            "hillaryclinton",
            "clinton",
            "clinton2016",
            "demoratic",
            "democrat",
        ],
    ),
    (
        2016,
        PartyLabel::Gop,
        &[
            "realdonaldtrump",
            "donaldtrump",
            "trump",
            "trump2016",
            "maga",
            "republican",
            "gop",
        ],
    ),
    (
        2020,
        PartyLabel::Dnc,
        &["joebiden", "biden", "biden2020", "demoratic", "democrat"],
    ),
    (
        2020,
        PartyLabel::Gop,
        &[
            "realdonaldtrump",
            "donaldtrump",
            "trump",
            "trump2020",
            "maga",
            "republican",
            "gop",
        ],
    ),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordTable {
    entries: BTreeMap<(ElectionYear, PartyLabel), BTreeSet<String>>,
}

impl Default for KeywordTable {
    fn default() -> Self {
        let entries = DEFAULT_KEYWORDS
            .iter()
            .map(|(y, p, kws)| {
                (
                    (ElectionYear::new(*y).expect("valid year"), *p),
                    kws.iter().map(|k| k.to_string()).collect(),
                )
            })
            .collect();
        KeywordTable { entries }
    }
}

impl KeywordTable {
    /// Builds a table; every (year, party) present must have keywords.
    pub fn new(
        entries: BTreeMap<(ElectionYear, PartyLabel), BTreeSet<String>>,
    ) -> Result<Self, SentimentError> {
        for ((y, p), kws) in &entries {
            if kws.is_empty() {
                return Err(SentimentError::InvalidKeywords(format!(
                    "no keywords for ({y}, {p})"
                )));
            }
        }
        Ok(KeywordTable { entries })
    }

    pub fn keywords(&self, year: ElectionYear, party: PartyLabel) -> Option<&BTreeSet<String>> {
        self.entries.get(&(year, party))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SentimentError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| SentimentError::Io(format!("{}: {e}", path.display())))?;
        Self::read(file)
    }

    /// Reads `year,party,keyword`. The result replaces the defaults.
    pub fn read<R: Read>(reader: R) -> Result<Self, SentimentError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut entries: BTreeMap<_, BTreeSet<String>> = BTreeMap::new();
        for (i, rec) in rdr.deserialize::<(String, String, String)>().enumerate() {
            let (year, party, kw) = rec.map_err(|e| SentimentError::BadRecord {
                line: i + 2,
                detail: e.to_string(),
            })?;
            let bad = |detail: String| SentimentError::BadRecord {
                line: i + 2,
                detail,
            };
            let year: ElectionYear = year.parse().map_err(|e| bad(format!("{e}")))?;
            let party: PartyLabel = party.parse().map_err(|e| bad(format!("{e}")))?;
            let kw = kw.to_lowercase();
            if kw.is_empty() {
                return Err(bad("empty keyword".into()));
            }
            entries.entry((year, party)).or_default().insert(kw);
        }
        KeywordTable::new(entries)
    }

    /// Parties whose keyword list contains a whole token of `text`.
    pub fn match_party(
        &self,
        text: &str,
        year: ElectionYear,
    ) -> Result<BTreeSet<PartyLabel>, SentimentError> {
        let lists: Vec<(PartyLabel, &BTreeSet<String>)> = PartyLabel::BOTH
            .iter()
            .filter_map(|p| self.keywords(year, *p).map(|k| (*p, k)))
            .collect();
        if lists.is_empty() {
            return Err(SentimentError::UnknownYear(year));
        }
        let toks: BTreeSet<String> = tokens(text).collect();
        Ok(lists
            .into_iter()
            .filter(|(_, kws)| toks.iter().any(|t| kws.contains(t)))
            .map(|(p, _)| p)
            .collect())
    }
}

pub fn match_party(
    text: &str,
    table: &KeywordTable,
    year: ElectionYear,
) -> Result<BTreeSet<PartyLabel>, SentimentError> {
    table.match_party(text, year)
}
