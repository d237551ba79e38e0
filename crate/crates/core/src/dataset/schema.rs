use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::DatasetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureGroup {
    Census,
    Economic,
    Polling,
    Sentiment,
}

/// Value domain used to validate joined rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    /// Share in [0, 100].
    Percent,
    /// Share in [0, 1].
    Proportion,
    /// Unbounded real (currency, ratios).
    Real,
}

impl Unit {
    pub fn contains(self, value: f64) -> bool {
        match self {
            Unit::Percent => (0.0..=100.0).contains(&value),
            Unit::Proportion => (0.0..=1.0).contains(&value),
            Unit::Real => value.is_finite(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    pub group: FeatureGroup,
    pub unit: Unit,
}

impl FeatureDef {
    pub fn new(name: &str, group: FeatureGroup, unit: Unit) -> Self {
        FeatureDef {
            name: name.to_string(),
            group,
            unit,
        }
    }
}

pub const POLLING_COLUMNS: [&str; 2] = ["polling_dnc_pct", "polling_gop_pct"];
pub const SENTIMENT_COLUMNS: [&str; 4] = ["ap_dnc", "an_dnc", "ap_gop", "an_gop"];

/// Names that may never appear as features: they are keys or outcome fields.
const RESERVED: [&str; 6] = ["state", "year", "label", "winner", "electors", "votes"];

/// Default census columns, in schema order.
pub const CENSUS_COLUMNS: [(&str, Unit); 18] = [
    ("age_18_34_pct", Unit::Percent),
    ("age_35_59_pct", Unit::Percent),
    ("age_60_plus_pct", Unit::Percent),
    ("median_family_income", Unit::Real),
    ("occ_management_business_science_arts_pct", Unit::Percent),
    ("occ_service_pct", Unit::Percent),
    ("occ_sales_office_pct", Unit::Percent),
    (
        "occ_natural_resources_construction_maintenance_pct",
        Unit::Percent,
    ),
    (
        "occ_production_transportation_material_moving_pct",
        Unit::Percent,
    ),
    ("occ_farming_fishing_forestry_pct", Unit::Percent),
    ("below_poverty_pct", Unit::Percent),
    ("race_white_pct", Unit::Percent),
    ("race_black_pct", Unit::Percent),
    ("race_hispanic_pct", Unit::Percent),
    ("race_asian_pct", Unit::Percent),
    ("race_other_pct", Unit::Percent),
    ("sex_ratio", Unit::Real),
    ("unemployment_rate_pct", Unit::Percent),
];

/// Default economic columns: state GDP (millions of chained dollars) and
/// per-capita personal income for the first three quarters of the cycle.
pub const ECONOMIC_COLUMNS: [&str; 4] = ["gdp_millions", "pi_q1", "pi_q2", "pi_q3"];

/// Ordered feature list; the order is the column order of every matrix.
///
/// The polling group is always exactly [`POLLING_COLUMNS`]. The sentiment
/// group is either exactly [`SENTIMENT_COLUMNS`] or absent (ablated schema).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    features: Vec<FeatureDef>,
}

impl FeatureSchema {
    pub fn new(features: Vec<FeatureDef>) -> Result<Self, DatasetError> {
        let mut seen = BTreeSet::new();
        for f in &features {
            if RESERVED.contains(&f.name.as_str()) {
                return Err(DatasetError::InvalidSchema(format!(
                    "`{}` is a reserved key/label column",
                    f.name
                )));
            }
            if !seen.insert(f.name.as_str()) {
                return Err(DatasetError::InvalidSchema(format!(
                    "duplicate feature `{}`",
                    f.name
                )));
            }
        }
        let group_names = |g: FeatureGroup| -> BTreeSet<&str> {
            features
                .iter()
                .filter(|f| f.group == g)
                .map(|f| f.name.as_str())
                .collect()
        };
        let polling = group_names(FeatureGroup::Polling);
        if polling != POLLING_COLUMNS.into_iter().collect() {
            return Err(DatasetError::InvalidSchema(format!(
                "polling group must be exactly {POLLING_COLUMNS:?}, got {polling:?}"
            )));
        }
        let sentiment = group_names(FeatureGroup::Sentiment);
        if !sentiment.is_empty() && sentiment != SENTIMENT_COLUMNS.into_iter().collect() {
            return Err(DatasetError::InvalidSchema(format!(
                "sentiment group must be exactly {SENTIMENT_COLUMNS:?} or empty, got {sentiment:?}"
            )));
        }
        Ok(FeatureSchema { features })
    }

    /// The full 28-column schema: census, economic, polling, sentiment.
    pub fn standard() -> Self {
        let mut features: Vec<FeatureDef> = CENSUS_COLUMNS
            .iter()
            .map(|(n, u)| FeatureDef::new(n, FeatureGroup::Census, *u))
            .collect();
        features.extend(
            ECONOMIC_COLUMNS
                .iter()
                .map(|n| FeatureDef::new(n, FeatureGroup::Economic, Unit::Real)),
        );
        features.extend(
            POLLING_COLUMNS
                .iter()
                .map(|n| FeatureDef::new(n, FeatureGroup::Polling, Unit::Percent)),
        );
        features.extend(
            SENTIMENT_COLUMNS
                .iter()
                .map(|n| FeatureDef::new(n, FeatureGroup::Sentiment, Unit::Proportion)),
        );
        FeatureSchema::new(features).expect("standard schema is valid")
    }

    /// Restricts the standard schema to the named census/economic columns.
    /// Polling and sentiment columns are always kept.
    pub fn standard_subset(names: &[String]) -> Result<Self, DatasetError> {
        let standard = Self::standard();
        for n in names {
            if standard.index_of(n).is_none() {
                return Err(DatasetError::InvalidSchema(format!(
                    "unknown feature `{n}`"
                )));
            }
        }
        let features = standard
            .features
            .into_iter()
            .filter(|f| {
                matches!(f.group, FeatureGroup::Polling | FeatureGroup::Sentiment)
                    || names.iter().any(|n| n == &f.name)
            })
            .collect();
        FeatureSchema::new(features)
    }

    pub fn without_group(&self, group: FeatureGroup) -> Result<Self, DatasetError> {
        FeatureSchema::new(
            self.features
                .iter()
                .filter(|f| f.group != group)
                .cloned()
                .collect(),
        )
    }

    pub fn features(&self) -> &[FeatureDef] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn has_group(&self, group: FeatureGroup) -> bool {
        self.features.iter().any(|f| f.group == group)
    }

    pub fn group_columns(&self, group: FeatureGroup) -> Vec<&str> {
        self.features
            .iter()
            .filter(|f| f.group == group)
            .map(|f| f.name.as_str())
            .collect()
    }

    pub fn fingerprint(&self) -> String {
        fingerprint_of(self.features.iter().map(|f| f.name.as_str()))
    }
}

/// Hex digest identifying an ordered list of column names.
pub fn fingerprint_of<'a>(names: impl IntoIterator<Item = &'a str>) -> String {
    let mut hasher = Sha256::new();
    for n in names {
        hasher.update(n.as_bytes());
        hasher.update([0u8]);
    }
    hex::encode(&hasher.finalize()[..8])
}
