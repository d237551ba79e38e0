use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::DatasetError;

/// USPS code and full name for the 50 states plus the District of Columbia,
/// sorted by code.
pub const JURISDICTIONS: [(&str, &str); 51] = [
    ("AK", "Alaska"),
    ("AL", "Alabama"),
    ("AR", "Arkansas"),
    ("AZ", "Arizona"),
    ("CA", "California"),
    ("CO", "Colorado"),
    ("CT", "Connecticut"),
    ("DC", "District of Columbia"),
    ("DE", "Delaware"),
    ("FL", "Florida"),
    ("GA", "Georgia"),
    ("HI", "Hawaii"),
    ("IA", "Iowa"),
    ("ID", "Idaho"),
    ("IL", "Illinois"),
    ("IN", "Indiana"),
    ("KS", "Kansas"),
    ("KY", "Kentucky"),
    ("LA", "Louisiana"),
    ("MA", "Massachusetts"),
    ("MD", "Maryland"),
    ("ME", "Maine"),
    ("MI", "Michigan"),
    ("MN", "Minnesota"),
    ("MO", "Missouri"),
    ("MS", "Mississippi"),
    ("MT", "Montana"),
    ("NC", "North Carolina"),
    ("ND", "North Dakota"),
    ("NE", "Nebraska"),
    ("NH", "New Hampshire"),
    ("NJ", "New Jersey"),
    ("NM", "New Mexico"),
    ("NV", "Nevada"),
    ("NY", "New York"),
    ("OH", "Ohio"),
    ("OK", "Oklahoma"),
    ("OR", "Oregon"),
    ("PA", "Pennsylvania"),
    ("RI", "Rhode Island"),
    ("SC", "South Carolina"),
    ("SD", "South Dakota"),
    ("TN", "Tennessee"),
    ("TX", "Texas"),
    ("UT", "Utah"),
    ("VA", "Virginia"),
    ("VT", "Vermont"),
    ("WA", "Washington"),
    ("WI", "Wisconsin"),
    ("WV", "West Virginia"),
    ("WY", "Wyoming"),
];

/// One of the 51 jurisdictions that appoint presidential electors.
///
/// Ordering follows the USPS code, so sorted collections of `StateId` are
/// alphabetical by code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(u8);

impl StateId {
    /// Accepts a USPS code or a full name, case-insensitively.
    pub fn parse(raw: &str) -> Result<Self, DatasetError> {
        let trimmed = raw.trim();
        let idx = JURISDICTIONS
            .iter()
            .position(|(code, name)| {
                code.eq_ignore_ascii_case(trimmed) || name.eq_ignore_ascii_case(trimmed)
            })
            .ok_or_else(|| DatasetError::UnknownState(raw.to_string()))?;
        Ok(StateId(idx as u8))
    }

    pub fn code(self) -> &'static str {
        JURISDICTIONS[self.0 as usize].0
    }

    pub fn name(self) -> &'static str {
        JURISDICTIONS[self.0 as usize].1
    }

    pub fn all() -> impl Iterator<Item = StateId> {
        (0..JURISDICTIONS.len() as u8).map(StateId)
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for StateId {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StateId::parse(s)
    }
}

impl Serialize for StateId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for StateId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        StateId::parse(&raw).map_err(serde::de::Error::custom)
    }
}

/// Winner label. GOP is the positive class throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PartyLabel {
    #[serde(rename = "DNC")]
    Dnc,
    #[serde(rename = "GOP")]
    Gop,
}

impl PartyLabel {
    pub const BOTH: [PartyLabel; 2] = [PartyLabel::Dnc, PartyLabel::Gop];

    pub fn as_str(self) -> &'static str {
        match self {
            PartyLabel::Dnc => "DNC",
            PartyLabel::Gop => "GOP",
        }
    }

    /// 1.0 for GOP, 0.0 for DNC.
    pub fn as_target(self) -> f64 {
        match self {
            PartyLabel::Dnc => 0.0,
            PartyLabel::Gop => 1.0,
        }
    }

    pub fn other(self) -> PartyLabel {
        match self {
            PartyLabel::Dnc => PartyLabel::Gop,
            PartyLabel::Gop => PartyLabel::Dnc,
        }
    }
}

impl fmt::Display for PartyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PartyLabel {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "DNC" => Ok(PartyLabel::Dnc),
            "GOP" => Ok(PartyLabel::Gop),
            _ => Err(DatasetError::UnknownParty(s.to_string())),
        }
    }
}

/// A presidential cycle covered by the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElectionYear(u16);

impl ElectionYear {
    pub const Y2012: ElectionYear = ElectionYear(2012);
    pub const Y2016: ElectionYear = ElectionYear(2016);
    pub const Y2020: ElectionYear = ElectionYear(2020);
    pub const ALL: [ElectionYear; 3] = [Self::Y2012, Self::Y2016, Self::Y2020];

    pub fn new(year: u16) -> Result<Self, DatasetError> {
        match year {
            2012 | 2016 | 2020 => Ok(ElectionYear(year)),
            _ => Err(DatasetError::UnknownYear(year.to_string())),
        }
    }

    pub fn get(self) -> u16 {
        self.0
    }

    /// Election day of the cycle.
    pub fn election_day(self) -> chrono::NaiveDate {
        let (m, d) = match self.0 {
            2012 => (11, 6),
            2016 => (11, 8),
            _ => (11, 3),
        };
        chrono::NaiveDate::from_ymd_opt(self.0 as i32, m, d).expect("valid calendar date")
    }
}

impl fmt::Display for ElectionYear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for ElectionYear {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let year: u16 = s
            .trim()
            .parse()
            .map_err(|_| DatasetError::UnknownYear(s.to_string()))?;
        ElectionYear::new(year)
    }
}

impl Serialize for ElectionYear {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u16(self.0)
    }
}

impl<'de> Deserialize<'de> for ElectionYear {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = u16::deserialize(deserializer)?;
        ElectionYear::new(raw).map_err(serde::de::Error::custom)
    }
}

/// Join key shared by every source table.
pub type StateYear = (StateId, ElectionYear);
