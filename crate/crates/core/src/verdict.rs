use serde::Serialize;
use serde_json::{Map, Value};

/// Outcome of one axiom check together with everything needed to re-derive it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub axiom: String,
    pub passed: bool,
    pub evidence: Map<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn new(axiom: impl Into<String>, passed: bool) -> Self {
        Self {
            axiom: axiom.into(),
            passed,
            evidence: Map::new(),
            notes: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.evidence.insert(
            key.to_string(),
            serde_json::to_value(value).expect("evidence is serializable"),
        );
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}
