use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::motion::{HeadPosture, MotionState};
use crate::phoneme::DeformationCategory;

/// Articulation part of a template key. `Static` sorts before every category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KeyCategory {
    Static,
    Phoneme(DeformationCategory),
}

impl KeyCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            KeyCategory::Static => "STATIC",
            KeyCategory::Phoneme(c) => c.code(),
        }
    }
}

impl fmt::Display for KeyCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KeyCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "STATIC" {
            Ok(KeyCategory::Static)
        } else {
            s.parse().map(KeyCategory::Phoneme)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TemplateKey {
    pub category: KeyCategory,
    pub posture: HeadPosture,
}

impl TemplateKey {
    pub fn new(category: KeyCategory, posture: HeadPosture) -> Self {
        Self { category, posture }
    }

    pub fn phoneme(category: DeformationCategory, posture: HeadPosture) -> Self {
        Self::new(KeyCategory::Phoneme(category), posture)
    }

    pub fn static_key(posture: HeadPosture) -> Self {
        Self::new(KeyCategory::Static, posture)
    }
}

impl fmt::Display for TemplateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.category, self.posture)
    }
}

/// Template choice for one window: speech selects the category key, silence
/// the static key; the posture always comes from the motion state.
pub fn select_template_key(
    state: MotionState,
    has_speech: bool,
    category: Option<DeformationCategory>,
) -> Result<TemplateKey> {
    match (has_speech, category) {
        (true, Some(c)) => Ok(TemplateKey::phoneme(c, state.posture)),
        (false, None) => Ok(TemplateKey::static_key(state.posture)),
        (true, None) => Err(Error::Contract("speech window without a category".into())),
        (false, Some(c)) => Err(Error::Contract(format!(
            "category {c} given for a window without speech"
        ))),
    }
}
