//! Traffic controllers: anything that turns a prompt into report text.

mod remote;
mod report;
mod transcript;

pub use remote::{RemoteConfig, RemoteController, DEFAULT_API_KEY_ENV};
pub use report::{find_section, normalize_header, parse_report, split_sections, ControllerReport, Section, Verdict};
pub use transcript::{parse_transcript, to_transcript, ReplayController, TranscriptRecord};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{analyze, render_report, OracleConfig};
use crate::promptkit::PromptBundle;
use crate::scenario::Scenario;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControllerError {
    #[error("scenario {scenario_id}: transport failure after {attempts} attempt(s): {message}")]
    Transport { scenario_id: String, attempts: u32, message: String },
    #[error("scenario {scenario_id}: endpoint rejected request with status {status}: {message}")]
    Rejected { scenario_id: String, status: u16, message: String },
    #[error("scenario {scenario_id}: malformed completion response: {message}")]
    MalformedResponse { scenario_id: String, message: String },
    /// A failure read back from a transcript, reported with its original wording.
    #[error("{message}")]
    Recorded { scenario_id: String, message: String },
    #[error("scenario {scenario_id}: no transcript entry")]
    MissingTranscript { scenario_id: String },
    #[error("controller configuration: {0}")]
    Config(String),
}

/// One scenario handed to a controller.
#[derive(Debug, Clone, Copy)]
pub struct AssessRequest<'a> {
    /// Position in the evaluated corpus.
    pub index: usize,
    pub scenario_id: &'a str,
    pub scenario: &'a Scenario,
    pub bundle: &'a PromptBundle,
}

pub trait TrafficController: Send + Sync {
    fn name(&self) -> &str;

    fn assess(&self, request: &AssessRequest<'_>) -> Result<String, ControllerError>;

    /// Results come back in request order regardless of how they were produced.
    fn assess_batch(&self, requests: &[AssessRequest<'_>]) -> Vec<Result<String, ControllerError>> {
        requests.iter().map(|r| self.assess(r)).collect()
    }
}

/// Answers with the oracle's own rendered report.
#[derive(Debug, Clone, Default)]
pub struct ReferenceController {
    pub oracle: OracleConfig,
}

impl TrafficController for ReferenceController {
    fn name(&self) -> &str {
        "reference"
    }

    fn assess(&self, request: &AssessRequest<'_>) -> Result<String, ControllerError> {
        Ok(render_report(&analyze(request.scenario, &self.oracle)))
    }
}

/// Replays a fixed script, cycling by request index.
#[derive(Debug, Clone)]
pub struct MockController {
    script: Vec<String>,
}

impl MockController {
    pub fn new(script: Vec<String>) -> Result<MockController, ControllerError> {
        if script.is_empty() {
            return Err(ControllerError::Config("mock script is empty".into()));
        }
        Ok(MockController { script })
    }

    pub fn constant(text: impl Into<String>) -> MockController {
        MockController { script: vec![text.into()] }
    }
}

impl TrafficController for MockController {
    fn name(&self) -> &str {
        "mock"
    }

    fn assess(&self, request: &AssessRequest<'_>) -> Result<String, ControllerError> {
        Ok(self.script[request.index % self.script.len()].clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

/// What to do with a response whose verdict cannot be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnparseablePolicy {
    #[default]
    Negative,
    Exclude,
}

/// `None` means the report is excluded from classification metrics.
pub fn verdict_label(report: &ControllerReport, policy: UnparseablePolicy) -> Option<Label> {
    match (report.verdict, policy) {
        (Verdict::Yes, _) => Some(Label::Positive),
        (Verdict::No, _) => Some(Label::Negative),
        (Verdict::Unparseable, UnparseablePolicy::Negative) => Some(Label::Negative),
        (Verdict::Unparseable, UnparseablePolicy::Exclude) => None,
    }
}
