//! Winner-take-all electoral-college tallies.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::{read_outcomes, DatasetError, ElectionYear, PartyLabel, StateId};

const BUNDLED_VOTES: &str = include_str!("../data/electoral_votes.csv");
const BUNDLED_VOTES_SHA256: &str =
    "e485db076c4fa814ec2a7a41c44ad8b7e42025cb7239d05225cc911f9bed7069";
const BUNDLED_OUTCOMES: &str = include_str!("../data/outcomes_actual.csv");

pub const TOTAL_ELECTORS: u32 = 538;

#[derive(Debug, Error)]
pub enum ElectoralError {
    #[error("predictions missing for {}", .0.iter().map(|s| s.code()).collect::<Vec<_>>().join(", "))]
    IncompletePredictions(Vec<StateId>),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("invalid electoral table: {0}")]
    InvalidTable(String),
    #[error("checksum mismatch: expected {expected}, found {found}")]
    Checksum { expected: String, found: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectoralTable {
    pub apportionment_year: u16,
    pub votes: BTreeMap<StateId, u32>,
}

#[derive(Deserialize)]
struct VoteRow {
    state: String,
    votes: u32,
}

impl ElectoralTable {
    /// The 2010-census apportionment used for the 2012, 2016 and 2020 cycles.
    pub fn bundled() -> Self {
        Self::from_csv_checked(BUNDLED_VOTES.as_bytes(), 2010, Some(BUNDLED_VOTES_SHA256))
            .expect("bundled electoral table is valid")
    }

    pub fn load(path: impl AsRef<Path>, apportionment_year: u16) -> Result<Self, ElectoralError> {
        let bytes = std::fs::read(path)?;
        Self::from_csv_checked(bytes.as_slice(), apportionment_year, None)
    }

    /// Parses `state,votes`, optionally verifying the SHA-256 of the raw bytes.
    pub fn from_csv_checked(
        bytes: &[u8],
        apportionment_year: u16,
        sha256: Option<&str>,
    ) -> Result<Self, ElectoralError> {
        if let Some(expected) = sha256 {
            let found = hex::encode(Sha256::digest(bytes));
            if found != expected {
                return Err(ElectoralError::Checksum {
                    expected: expected.to_string(),
                    found,
                });
            }
        }
        let mut votes = BTreeMap::new();
        for row in csv::Reader::from_reader(bytes).deserialize() {
            let row: VoteRow = row?;
            let state = StateId::parse(&row.state)
                .map_err(|_| ElectoralError::UnknownState(row.state.clone()))?;
            if votes.insert(state, row.votes).is_some() {
                return Err(ElectoralError::InvalidTable(format!(
                    "{state} listed twice"
                )));
            }
        }
        let table = ElectoralTable {
            apportionment_year,
            votes,
        };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<(), ElectoralError> {
        if self.votes.len() != 51 {
            return Err(ElectoralError::InvalidTable(format!(
                "{} entries, expected 51",
                self.votes.len()
            )));
        }
        if let Some((s, v)) = self.votes.iter().find(|(_, v)| **v < 3) {
            return Err(ElectoralError::InvalidTable(format!(
                "{s} has {v} electors"
            )));
        }
        let total = self.total();
        if total != TOTAL_ELECTORS {
            return Err(ElectoralError::InvalidTable(format!(
                "{total} electors, expected 538"
            )));
        }
        Ok(())
    }

    pub fn total(&self) -> u32 {
        self.votes.values().sum()
    }

    pub fn electors(&self, state: StateId) -> u32 {
        self.votes[&state]
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ElectoralError> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["state", "votes"])?;
        for (s, v) in &self.votes {
            wtr.write_record([s.code(), &v.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Actual state winners for 2012, 2016 and 2020 (`state,year,winner`).
pub fn actual_outcomes() -> BTreeMap<(StateId, ElectionYear), PartyLabel> {
    read_outcomes(BUNDLED_OUTCOMES.as_bytes()).expect("bundled outcomes are valid")
}

pub fn actual_winners(year: ElectionYear) -> BTreeMap<StateId, PartyLabel> {
    actual_outcomes()
        .into_iter()
        .filter(|((_, y), _)| *y == year)
        .map(|((s, _), w)| (s, w))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    #[serde(rename = "DNC")]
    Dnc,
    #[serde(rename = "GOP")]
    Gop,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectoralTally {
    pub dnc_votes: u32,
    pub gop_votes: u32,
    pub winner: Outcome,
    pub states: BTreeMap<StateId, PartyLabel>,
}

impl ElectoralTally {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tally serializes")
    }

    pub fn write_json<W: Write>(&self, mut writer: W) -> Result<(), ElectoralError> {
        writer.write_all(self.to_json().as_bytes())?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self, ElectoralError> {
        Ok(serde_json::from_reader(reader)?)
    }
}

/// Assigns each state's electors wholly to its predicted winner.
pub fn tally(
    predictions: &BTreeMap<StateId, PartyLabel>,
    table: &ElectoralTable,
) -> Result<ElectoralTally, ElectoralError> {
    if let Some(s) = predictions.keys().find(|s| !table.votes.contains_key(s)) {
        return Err(ElectoralError::UnknownState(s.code().to_string()));
    }
    let missing: Vec<StateId> = table
        .votes
        .keys()
        .filter(|s| !predictions.contains_key(s))
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(ElectoralError::IncompletePredictions(missing));
    }
    let (mut dnc_votes, mut gop_votes) = (0, 0);
    for (s, party) in predictions {
        match party {
            PartyLabel::Dnc => dnc_votes += table.electors(*s),
            PartyLabel::Gop => gop_votes += table.electors(*s),
        }
    }
    let half = table.total() / 2;
    let winner = if dnc_votes > half {
        Outcome::Dnc
    } else if gop_votes > half {
        Outcome::Gop
    } else {
        Outcome::Tie
    };
    Ok(ElectoralTally {
        dnc_votes,
        gop_votes,
        winner,
        states: predictions.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all(party: PartyLabel) -> BTreeMap<StateId, PartyLabel> {
        StateId::all().map(|s| (s, party)).collect()
    }

    #[test]
    fn bundled_table_is_valid() {
        let t = ElectoralTable::bundled();
        assert_eq!(t.total(), 538);
        assert_eq!(t.electors(StateId::parse("CA").unwrap()), 55);
        assert_eq!(t.electors(StateId::parse("DC").unwrap()), 3);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(buf, BUNDLED_VOTES.as_bytes());
    }

    #[test]
    fn checksum_mismatch_is_rejected() {
        let tampered = BUNDLED_VOTES.replace("CA,55", "CA,54");
        let r =
            ElectoralTable::from_csv_checked(tampered.as_bytes(), 2010, Some(BUNDLED_VOTES_SHA256));
        assert!(matches!(r, Err(ElectoralError::Checksum { .. })));
        let r = ElectoralTable::from_csv_checked(tampered.as_bytes(), 2010, None);
        assert!(matches!(r, Err(ElectoralError::InvalidTable(_))));
    }

    #[test]
    fn landslide_and_missing_states() {
        let t = ElectoralTable::bundled();
        let r = tally(&all(PartyLabel::Dnc), &t).unwrap();
        assert_eq!((r.dnc_votes, r.gop_votes, r.winner), (538, 0, Outcome::Dnc));
        let mut partial = all(PartyLabel::Gop);
        partial.remove(&StateId::parse("OH").unwrap());
        assert!(
            matches!(tally(&partial, &t), Err(ElectoralError::IncompletePredictions(m)) if m.len() == 1)
        );
    }

    #[test]
    fn historical_cycles() {
        let t = ElectoralTable::bundled();
        let r = tally(&actual_winners(ElectionYear::Y2012), &t).unwrap();
        assert_eq!((r.dnc_votes, r.gop_votes), (332, 206));
        let r = tally(&actual_winners(ElectionYear::Y2020), &t).unwrap();
        assert_eq!((r.dnc_votes, r.gop_votes), (306, 232));
    }

    #[test]
    fn exact_tie() {
        // Strip states from an all-GOP map until DNC holds exactly 269.
        let t = ElectoralTable::bundled();
        let mut p = all(PartyLabel::Gop);
        let mut dnc = 0;
        for code in [
            "CA", "TX", "FL", "NY", "IL", "PA", "OH", "GA", "MI", "NC", "NJ",
        ] {
            let s = StateId::parse(code).unwrap();
            p.insert(s, PartyLabel::Dnc);
            dnc += t.electors(s);
        }
        assert_eq!(dnc, 270);
        p.insert(StateId::parse("NJ").unwrap(), PartyLabel::Gop);
        p.insert(StateId::parse("VA").unwrap(), PartyLabel::Dnc);
        let r = tally(&p, &t).unwrap();
        assert_eq!(
            (r.dnc_votes, r.gop_votes, r.winner),
            (269, 269, Outcome::Tie)
        );
    }

    #[test]
    fn tally_json_round_trip() {
        let r = tally(
            &actual_winners(ElectionYear::Y2016),
            &ElectoralTable::bundled(),
        )
        .unwrap();
        let mut buf = Vec::new();
        r.write_json(&mut buf).unwrap();
        assert_eq!(ElectoralTally::read_json(buf.as_slice()).unwrap(), r);
    }

    proptest! {
        #[test]
        fn conservation_symmetry_and_monotonicity(bits in prop::collection::vec(any::<bool>(), 51), flip in 0usize..51) {
            let t = ElectoralTable::bundled();
            let states: Vec<StateId> = StateId::all().collect();
            let p: BTreeMap<_, _> = states.iter().zip(&bits)
                .map(|(s, b)| (*s, if *b { PartyLabel::Gop } else { PartyLabel::Dnc })).collect();
            let r = tally(&p, &t).unwrap();
            prop_assert_eq!(r.dnc_votes + r.gop_votes, 538);

            let mirror: BTreeMap<_, _> = p.iter().map(|(s, l)| (*s, l.other())).collect();
            let m = tally(&mirror, &t).unwrap();
            prop_assert_eq!((m.dnc_votes, m.gop_votes), (r.gop_votes, r.dnc_votes));

            let s = states[flip];
            if p[&s] == PartyLabel::Dnc {
                let mut q = p.clone();
                q.insert(s, PartyLabel::Gop);
                let f = tally(&q, &t).unwrap();
                prop_assert_eq!(f.gop_votes, r.gop_votes + t.electors(s));
            }
        }
    }
}
