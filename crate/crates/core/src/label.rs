use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Number of token classes in the task.
pub const NUM_CLASSES: usize = 4;

/// Class id of a whitespace token: 0 human-written, 1 synonym-replaced, and
/// by default 2 machine-generated, 3 summarized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelId(u8);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("label {0} is outside the label map (expected 0..{NUM_CLASSES})")]
pub struct UnknownLabel(pub i64);

impl LabelId {
    pub const HUMAN: LabelId = LabelId(0);
    pub const SYNONYM_REPLACED: LabelId = LabelId(1);

    pub fn new(value: i64) -> Result<Self, UnknownLabel> {
        if (0..NUM_CLASSES as i64).contains(&value) {
            Ok(LabelId(value as u8))
        } else {
            Err(UnknownLabel(value))
        }
    }

    /// Panics if `index >= NUM_CLASSES`.
    pub fn from_index(index: usize) -> Self {
        assert!(index < NUM_CLASSES, "class index {index} out of range");
        LabelId(index as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = LabelId> {
        (0..NUM_CLASSES).map(LabelId::from_index)
    }
}

impl fmt::Display for LabelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<i64> for LabelId {
    type Error = UnknownLabel;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        LabelId::new(value)
    }
}

impl Serialize for LabelId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u8(self.0)
    }
}

impl<'de> Deserialize<'de> for LabelId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = i64::deserialize(deserializer)?;
        LabelId::new(raw).map_err(serde::de::Error::custom)
    }
}

/// Human-readable class names.
///
/// Only 0 (human) and 1 (synonym replacement) are fixed by the task data; the
/// names of 2 and 3 come from configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    names: [String; NUM_CLASSES],
}

#[derive(Debug, thiserror::Error)]
pub enum LabelMapError {
    #[error("label map is missing class {0}")]
    MissingClass(usize),
    #[error("label map key {0:?} is not a class id in 0..{NUM_CLASSES}")]
    BadKey(String),
    #[error("label map JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Default for LabelMap {
    fn default() -> Self {
        LabelMap {
            names: [
                "human".to_string(),
                "synonym-replaced".to_string(),
                "machine-generated".to_string(),
                "summarized".to_string(),
            ],
        }
    }
}

impl LabelMap {
    pub fn name(&self, label: LabelId) -> &str {
        &self.names[label.index()]
    }

    /// Builds a map from `{"0": "...", "1": "...", ...}` entries.
    pub fn from_entries(entries: &BTreeMap<String, String>) -> Result<Self, LabelMapError> {
        let mut names: [Option<String>; NUM_CLASSES] = Default::default();
        for (key, name) in entries {
            let id = key
                .trim()
                .parse::<i64>()
                .ok()
                .and_then(|v| LabelId::new(v).ok())
                .ok_or_else(|| LabelMapError::BadKey(key.clone()))?;
            names[id.index()] = Some(name.clone());
        }
        let mut out = LabelMap::default();
        for (i, name) in names.into_iter().enumerate() {
            out.names[i] = name.ok_or(LabelMapError::MissingClass(i))?;
        }
        Ok(out)
    }

    pub fn from_json(json: &str) -> Result<Self, LabelMapError> {
        let entries: BTreeMap<String, String> = serde_json::from_str(json)?;
        Self::from_entries(&entries)
    }

    pub fn to_entries(&self) -> BTreeMap<String, String> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (i.to_string(), n.clone()))
            .collect()
    }
}
