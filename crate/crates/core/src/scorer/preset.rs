use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Chunk lengths explored in the ablation grid.
pub const INPUT_LENGTHS: [usize; 4] = [256, 512, 1024, 2048];

/// Frozen bottom-layer counts explored in the ablation grid.
pub const FROZEN_LAYERS: [usize; 4] = [0, 6, 12, 18];

/// Encoder sizes of the model family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelPreset {
    Xsmall,
    Small,
    Base,
    Large,
}

impl ModelPreset {
    pub const ALL: [ModelPreset; 4] = [ModelPreset::Xsmall, ModelPreset::Small, ModelPreset::Base, ModelPreset::Large];

    pub fn name(self) -> &'static str {
        match self {
            ModelPreset::Xsmall => "Xsmall",
            ModelPreset::Small => "Small",
            ModelPreset::Base => "Base",
            ModelPreset::Large => "Large",
        }
    }

    pub fn params_millions(self) -> u32 {
        match self {
            ModelPreset::Xsmall => 22,
            ModelPreset::Small => 44,
            ModelPreset::Base => 86,
            ModelPreset::Large => 304,
        }
    }

    pub fn hidden_size(self) -> usize {
        match self {
            ModelPreset::Xsmall => 384,
            ModelPreset::Small | ModelPreset::Base => 768,
            ModelPreset::Large => 1024,
        }
    }

    pub fn layers(self) -> usize {
        match self {
            ModelPreset::Xsmall | ModelPreset::Base => 12,
            ModelPreset::Small => 6,
            ModelPreset::Large => 24,
        }
    }

    /// Frozen-layer settings of the grid that this preset can take.
    pub fn frozen_options(self) -> impl Iterator<Item = usize> {
        FROZEN_LAYERS.into_iter().filter(move |&k| k <= self.layers())
    }
}

impl fmt::Display for ModelPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelPreset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown model preset {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn architecture_table() {
        let rows: Vec<_> = ModelPreset::ALL
            .iter()
            .map(|p| (p.name(), p.params_millions(), p.hidden_size(), p.layers()))
            .collect();
        assert_eq!(
            rows,
            [("Xsmall", 22, 384, 12), ("Small", 44, 768, 6), ("Base", 86, 768, 12), ("Large", 304, 1024, 24)]
        );
    }

    #[test]
    fn frozen_options_respect_depth() {
        assert_eq!(ModelPreset::Small.frozen_options().collect::<Vec<_>>(), [0, 6]);
        assert_eq!(ModelPreset::Xsmall.frozen_options().collect::<Vec<_>>(), [0, 6, 12]);
        assert_eq!(ModelPreset::Large.frozen_options().collect::<Vec<_>>(), [0, 6, 12, 18]);
        assert_eq!("large".parse::<ModelPreset>(), Ok(ModelPreset::Large));
        assert!("huge".parse::<ModelPreset>().is_err());
    }
}
