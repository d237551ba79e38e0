use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use electoral_forge::dataset::{FeatureGroup, FeatureSchema};
use electoral_forge::learners::{DecisionPolicy, ModelKind, ModelSpec};
use electoral_forge::seed;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const SEED_ENV: &str = "ELECTORAL_FORGE_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub census: PathBuf,
    pub economy: PathBuf,
    pub polls: PathBuf,
    pub tweets: PathBuf,
    pub outcomes: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvSettings {
    #[serde(default = "default_k")]
    pub k: usize,
    /// Root seed of every random draw in the run.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
}

impl Default for CvSettings {
    fn default() -> Self {
        CvSettings {
            k: default_k(),
            seed: 0,
            repeats: default_repeats(),
        }
    }
}

fn default_k() -> usize {
    10
}

fn default_repeats() -> usize {
    10
}

fn default_threshold() -> f64 {
    0.5
}

fn default_models() -> Vec<ModelKind> {
    ModelKind::ALL.to_vec()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Inputs,
    /// Census and economic columns to keep; all of them when absent.
    #[serde(default)]
    pub features: Option<Vec<String>>,
    #[serde(default = "default_models")]
    pub models: Vec<ModelKind>,
    /// Per-kind overrides; they also apply to voting members of that kind.
    #[serde(default)]
    pub hyperparameters: BTreeMap<ModelKind, BTreeMap<String, f64>>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub cv: CvSettings,
    /// Drop the four sentiment columns.
    #[serde(default)]
    pub ablation: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub keywords: Option<PathBuf>,
    #[serde(default)]
    pub gazetteer: Option<PathBuf>,
    #[serde(default)]
    pub electoral_votes: Option<PathBuf>,
}

impl RunConfig {
    /// Config with defaults for everything but the five inputs.
    pub fn with_inputs(inputs: Inputs) -> Self {
        serde_json::from_value(serde_json::json!({ "inputs": inputs }))
            .expect("inputs alone form a valid config")
    }

    pub fn policy(&self) -> DecisionPolicy {
        DecisionPolicy::new(self.threshold).expect("validated threshold")
    }

    pub fn schema(&self) -> Result<FeatureSchema, CliError> {
        let schema = match &self.features {
            Some(names) => FeatureSchema::standard_subset(names),
            None => Ok(FeatureSchema::standard()),
        };
        let schema = schema.map_err(|e| CliError::ConfigInvalid(e.to_string()))?;
        if self.ablation {
            return schema
                .without_group(FeatureGroup::Sentiment)
                .map_err(|e| CliError::ConfigInvalid(e.to_string()));
        }
        Ok(schema)
    }

    /// Spec for `kind`, seeded from the root seed and the model name.
    pub fn model_spec(&self, kind: ModelKind) -> Result<ModelSpec, CliError> {
        let mut spec = ModelSpec::new(kind, seed::derive(self.cv.seed, &[kind.as_str()]));
        self.apply_overrides(&mut spec);
        for m in &mut spec.members {
            self.apply_overrides(m);
        }
        spec.validate()
            .map_err(|e| CliError::ConfigInvalid(e.to_string()))?;
        Ok(spec)
    }

    fn apply_overrides(&self, spec: &mut ModelSpec) {
        if let Some(over) = self.hyperparameters.get(&spec.kind) {
            spec.hyperparameters
                .extend(over.iter().map(|(k, v)| (k.clone(), *v)));
        }
    }

    pub fn fold_seed(&self) -> u64 {
        seed::derive(self.cv.seed, &["folds"])
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.inputs.census);
        fix(&mut self.inputs.economy);
        fix(&mut self.inputs.polls);
        fix(&mut self.inputs.tweets);
        fix(&mut self.inputs.outcomes);
        fix(&mut self.output_dir);
        for p in [
            &mut self.keywords,
            &mut self.gazetteer,
            &mut self.electoral_votes,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |m: String| Err(CliError::ConfigInvalid(m));
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return invalid("threshold out of range".into());
        }
        if self.cv.k < 2 {
            return invalid(format!("k must be at least 2, got {}", self.cv.k));
        }
        if self.cv.repeats == 0 {
            return invalid("repeats must be at least 1".into());
        }
        if self.models.is_empty() {
            return invalid("no models configured".into());
        }
        let mut seen = Vec::new();
        for m in &self.models {
            if seen.contains(m) {
                return invalid(format!("model `{m}` listed twice"));
            }
            seen.push(*m);
        }
        let inputs = [
            ("census", &self.inputs.census),
            ("economy", &self.inputs.economy),
            ("polls", &self.inputs.polls),
            ("tweets", &self.inputs.tweets),
            ("outcomes", &self.inputs.outcomes),
        ];
        let optional = [
            ("keywords", &self.keywords),
            ("gazetteer", &self.gazetteer),
            ("electoral_votes", &self.electoral_votes),
        ];
        let paths = inputs.into_iter().chain(
            optional
                .into_iter()
                .filter_map(|(n, p)| p.as_ref().map(|p| (n, p))),
        );
        for (name, path) in paths {
            if !path.is_file() {
                return invalid(format!("{name} file not found: {}", path.display()));
            }
        }
        self.schema()?;
        for kind in ModelKind::ALL {
            self.model_spec(kind)?;
        }
        Ok(())
    }
}

/// Reads and validates a config file with defaults applied.
pub fn validate_config(path: impl AsRef<Path>) -> Result<RunConfig, CliError> {
    resolve_config(path, &[], None)
}

/// Like [`validate_config`], after applying dotted `key=value` overrides and
/// an optional root-seed override.
pub fn resolve_config(
    path: impl AsRef<Path>,
    overrides: &[String],
    seed_override: Option<&str>,
) -> Result<RunConfig, CliError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::ConfigInvalid(format!("{}: {e}", path.display())))?;
    let mut doc: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::ConfigInvalid(format!("not valid JSON: {e}")))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    if let Some(raw) = seed_override {
        let seed: u64 = raw
            .trim()
            .parse()
            .map_err(|_| CliError::ConfigInvalid(format!("{SEED_ENV} is not a u64: {raw:?}")))?;
        apply_override(&mut doc, &format!("cv.seed={seed}"))?;
    }
    let mut cfg: RunConfig =
        serde_json::from_value(doc).map_err(|e| CliError::ConfigInvalid(e.to_string()))?;
    cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
    cfg.validate()?;
    Ok(cfg)
}

/// Sets `a.b.c=value`; the value is read as JSON, or as a string otherwise.
fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| {
        CliError::ConfigInvalid(format!("override needs key=value: {assignment}"))
    })?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| {
            CliError::ConfigInvalid(format!("override `{key}` crosses a non-object"))
        })?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Err(CliError::ConfigInvalid(format!(
        "empty override key in {assignment}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_create_nested_keys() {
        let mut doc = serde_json::json!({"threshold": 0.5});
        apply_override(&mut doc, "cv.k=5").unwrap();
        apply_override(&mut doc, "threshold=0.9").unwrap();
        apply_override(&mut doc, "output_dir=runs/a").unwrap();
        assert_eq!(
            doc,
            serde_json::json!({"threshold": 0.9, "cv": {"k": 5}, "output_dir": "runs/a"})
        );
        assert!(apply_override(&mut doc, "threshold").is_err());
        assert!(apply_override(&mut doc, "threshold.x=1").is_err());
    }
}
