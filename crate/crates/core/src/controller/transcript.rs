//! JSONL audit log of controller responses and offline replay of it.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{AssessRequest, ControllerError, TrafficController};

/// One line of a transcript: exactly one of `response` / `error` is set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptRecord {
    pub index: usize,
    pub scenario_id: String,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TranscriptRecord {
    pub fn new(index: usize, scenario_id: &str, model: &str, result: &Result<String, ControllerError>) -> Self {
        let (response, error) = match result {
            Ok(text) => (Some(text.clone()), None),
            Err(e) => (None, Some(e.to_string())),
        };
        TranscriptRecord { index, scenario_id: scenario_id.to_owned(), model: model.to_owned(), response, error }
    }
}

pub fn to_transcript(records: &[TranscriptRecord]) -> String {
    records
        .iter()
        .map(|r| serde_json::to_string(r).expect("transcript record serializes") + "\n")
        .collect()
}

pub fn parse_transcript(text: &str) -> Result<Vec<TranscriptRecord>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let r: TranscriptRecord = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
            if r.response.is_some() == r.error.is_some() {
                return Err(format!("line {}: exactly one of response/error must be present", i + 1));
            }
            Ok(r)
        })
        .collect()
}

/// Serves responses from a transcript, keyed by scenario id, without network access.
#[derive(Debug, Clone)]
pub struct ReplayController {
    model: String,
    entries: HashMap<String, Result<String, String>>,
}

impl ReplayController {
    /// Records for a scenario may appear only once.
    pub fn new(records: Vec<TranscriptRecord>) -> Result<ReplayController, ControllerError> {
        let model = records.first().map(|r| r.model.clone()).unwrap_or_default();
        let mut entries = HashMap::with_capacity(records.len());
        for r in records {
            let value = match (r.response, r.error) {
                (Some(text), None) => Ok(text),
                (None, Some(err)) => Err(err),
                _ => return Err(ControllerError::Config(format!("transcript entry {} is malformed", r.scenario_id))),
            };
            if entries.insert(r.scenario_id.clone(), value).is_some() {
                return Err(ControllerError::Config(format!("transcript repeats scenario {}", r.scenario_id)));
            }
        }
        Ok(ReplayController { model, entries })
    }

    pub fn from_text(text: &str) -> Result<ReplayController, ControllerError> {
        Self::new(parse_transcript(text).map_err(ControllerError::Config)?)
    }

    pub fn model(&self) -> &str {
        &self.model
    }
}

impl TrafficController for ReplayController {
    /// Stands in for the remote run it replays, so summaries compare equal.
    fn name(&self) -> &str {
        "remote"
    }

    fn assess(&self, request: &AssessRequest<'_>) -> Result<String, ControllerError> {
        match self.entries.get(request.scenario_id) {
            Some(Ok(text)) => Ok(text.clone()),
            Some(Err(message)) => {
                Err(ControllerError::Recorded { scenario_id: request.scenario_id.to_owned(), message: message.clone() })
            }
            None => Err(ControllerError::MissingTranscript { scenario_id: request.scenario_id.to_owned() }),
        }
    }
}
