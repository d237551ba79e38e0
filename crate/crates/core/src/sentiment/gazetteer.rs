use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use super::SentimentError;
use crate::dataset::StateId;

const CITY_ALIASES: &str = include_str!("../../data/gazetteer.csv");

/// Lowercases, turns punctuation into spaces and collapses whitespace.
pub fn normalize_location(raw: &str) -> String {
    raw.chars()
        .map(|c| {
            if c.is_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                ' '
            }
        })
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Alias → state lookup over normalized, whitespace-tokenized aliases.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    aliases: HashMap<String, StateId>,
    max_tokens: usize,
}

impl Gazetteer {
    /// Full state names and USPS codes only.
    pub fn names_and_codes() -> Self {
        let mut g = Gazetteer {
            aliases: HashMap::new(),
            max_tokens: 0,
        };
        for s in StateId::all() {
            g.insert(s.code(), s);
            g.insert(s.name(), s);
        }
        g
    }

    pub fn insert(&mut self, alias: &str, state: StateId) {
        let norm = normalize_location(alias);
        if norm.is_empty() {
            return;
        }
        self.max_tokens = self.max_tokens.max(norm.split(' ').count());
        self.aliases.insert(norm, state);
    }

    /// Adds `alias,state` rows on top of the current aliases.
    pub fn extend_from_csv<R: Read>(&mut self, reader: R) -> Result<(), SentimentError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        for (i, rec) in rdr.deserialize::<(String, String)>().enumerate() {
            let bad = |detail: String| SentimentError::BadRecord {
                line: i + 2,
                detail,
            };
            let (alias, state) = rec.map_err(|e| bad(e.to_string()))?;
            let state = StateId::parse(&state).map_err(|e| bad(e.to_string()))?;
            self.insert(&alias, state);
        }
        Ok(())
    }

    /// Built-in names, codes and bundled city aliases, plus a user file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SentimentError> {
        let path = path.as_ref();
        let mut g = Self::default();
        let file = std::fs::File::open(path)
            .map_err(|e| SentimentError::Io(format!("{}: {e}", path.display())))?;
        g.extend_from_csv(file)?;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.aliases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aliases.is_empty()
    }

    /// Longest matching alias (by token count, then characters) wins;
    /// equal-length matches resolve to the leftmost.
    pub fn resolve(&self, user_location: &str) -> Option<StateId> {
        let norm = normalize_location(user_location);
        let toks: Vec<&str> = norm.split(' ').filter(|t| !t.is_empty()).collect();
        let mut best: Option<((usize, usize), StateId)> = None;
        for start in 0..toks.len() {
            for len in 1..=self.max_tokens.min(toks.len() - start) {
                let candidate = toks[start..start + len].join(" ");
                if let Some(&state) = self.aliases.get(&candidate) {
                    let rank = (len, candidate.len());
                    if best.is_none_or(|(r, _)| rank > r) {
                        best = Some((rank, state));
                    }
                }
            }
        }
        best.map(|(_, s)| s)
    }
}

impl Default for Gazetteer {
    fn default() -> Self {
        let mut g = Self::names_and_codes();
        g.extend_from_csv(CITY_ALIASES.as_bytes())
            .expect("bundled gazetteer is well-formed");
        g
    }
}

pub fn resolve_state(user_location: &str, gazetteer: &Gazetteer) -> Option<StateId> {
    gazetteer.resolve(user_location)
}
