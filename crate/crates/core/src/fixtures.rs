//! Canonical demo scenarios, embedded from the repository `fixtures/`
//! directory so library consumers and tests run exactly the files shipped
//! for the command-line tools.

use crate::specfile::{SentenceScenario, SequenceScenario};

pub const GREEK_VIRUS_JSON: &str = include_str!("../../../fixtures/greek-virus.json");
pub const SENTENCES_JSON: &str = include_str!("../../../fixtures/sentences.json");

/// The memorized 24-letter sequence with the virus-variant judgment layer.
pub fn greek_virus() -> SequenceScenario {
    serde_json::from_str(GREEK_VIRUS_JSON).expect("embedded scenario is valid")
}

/// The fixed-template sentence grammar with its judgment layer and corpus.
pub fn sentences() -> SentenceScenario {
    serde_json::from_str(SENTENCES_JSON).expect("embedded scenario is valid")
}
