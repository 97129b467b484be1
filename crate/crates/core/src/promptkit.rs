//! Chain-of-thought prompts and fine-tuning dataset export.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fsutil::{self, FileError};
use crate::layout::{Direction, Egress, IntersectionLayout};
use crate::oracle::{analyze, render_report, OracleConfig};
use crate::scenario::{describe_scenario, LabeledScenario, Scenario};

const SYSTEM_TEMPLATE: &str = include_str!("../assets/system_prompt.txt");

/// "F", "F and H", "E, D, and C".
fn join_letters(letters: &[Egress]) -> String {
    let s: Vec<String> = letters.iter().map(ToString::to_string).collect();
    match s.as_slice() {
        [] => String::new(),
        [one] => one.clone(),
        [a, b] => format!("{a} and {b}"),
        [init @ .., last] => format!("{}, and {last}", init.join(", ")),
    }
}

pub fn build_system_prompt(layout: &IntersectionLayout) -> String {
    let mut text = SYSTEM_TEMPLATE.to_owned();
    for direction in Direction::ALL {
        let lanes: Vec<_> = layout.lanes_for(direction).collect();
        for (slot, lane) in ["a", "b"].iter().zip(&lanes) {
            let key = format!("{{{direction}_{slot}}}");
            let to_key = format!("{{{direction}_{slot}_to}}");
            text = text
                .replace(&to_key, &join_letters(layout.destinations(*lane)))
                .replace(&key, &lane.to_string());
        }
    }
    text
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system_text: String,
    pub user_text: String,
    pub expected_text: String,
}

pub fn build_bundle(scenario: &Scenario, layout: &IntersectionLayout, cfg: &OracleConfig) -> PromptBundle {
    PromptBundle {
        system_text: build_system_prompt(layout),
        user_text: describe_scenario(scenario),
        expected_text: render_report(&analyze(scenario, cfg)),
    }
}

/// Bundle for a stored dataset item; the target is its recorded analysis.
pub fn labeled_bundle(item: &LabeledScenario, layout: &IntersectionLayout) -> PromptBundle {
    PromptBundle {
        system_text: build_system_prompt(layout),
        user_text: describe_scenario(&item.scenario),
        expected_text: render_report(&item.analysis),
    }
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("split ratios {0:?} must be positive and sum to 1")]
    BadRatios((f64, f64, f64)),
    #[error(transparent)]
    File(#[from] FileError),
    #[error("{path} line {line}: {message}")]
    Record { path: String, line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit<T> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
    pub seed: u64,
}

/// Part sizes for `n` items: validation and test get `round(n * ratio)`,
/// train takes the remainder.
pub fn split_sizes(n: usize, ratios: (f64, f64, f64)) -> Result<(usize, usize, usize), PromptError> {
    let (tr, va, te) = ratios;
    let ok = [tr, va, te].iter().all(|r| r.is_finite() && *r > 0.0) && ((tr + va + te) - 1.0).abs() <= 1e-9;
    if !ok {
        return Err(PromptError::BadRatios(ratios));
    }
    let val = ((n as f64 * va).round() as usize).min(n);
    let test = ((n as f64 * te).round() as usize).min(n - val);
    Ok((n - val - test, val, test))
}

/// Seeded shuffle, then contiguous train / validation / test slices.
pub fn split_dataset<T>(items: Vec<T>, ratios: (f64, f64, f64), seed: u64) -> Result<DatasetSplit<T>, PromptError> {
    let (n_train, n_val, _) = split_sizes(items.len(), ratios)?;
    let mut items = items;
    items.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut rest = items.split_off(n_train);
    let test = rest.split_off(n_val);
    Ok(DatasetSplit { train: items, validation: rest, test, seed })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatRecord {
    pub messages: Vec<ChatMessage>,
}

impl From<&PromptBundle> for ChatRecord {
    fn from(b: &PromptBundle) -> Self {
        let msg = |role: &str, content: &str| ChatMessage { role: role.into(), content: content.into() };
        ChatRecord {
            messages: vec![
                msg("system", &b.system_text),
                msg("user", &b.user_text),
                msg("assistant", &b.expected_text),
            ],
        }
    }
}

impl TryFrom<ChatRecord> for PromptBundle {
    type Error = String;

    fn try_from(r: ChatRecord) -> Result<Self, Self::Error> {
        match <[ChatMessage; 3]>::try_from(r.messages) {
            Ok([s, u, a]) if s.role == "system" && u.role == "user" && a.role == "assistant" => {
                Ok(PromptBundle { system_text: s.content, user_text: u.content, expected_text: a.content })
            }
            _ => Err("expected exactly system, user and assistant messages".into()),
        }
    }
}

pub fn to_jsonl(bundles: &[PromptBundle]) -> String {
    let mut out = String::new();
    for b in bundles {
        out.push_str(&serde_json::to_string(&ChatRecord::from(b)).expect("chat record serializes"));
        out.push('\n');
    }
    out
}

pub fn from_jsonl(text: &str, origin: &str) -> Result<Vec<PromptBundle>, PromptError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let err = |message: String| PromptError::Record { path: origin.to_owned(), line: i + 1, message };
            let record: ChatRecord = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
            PromptBundle::try_from(record).map_err(err)
        })
        .collect()
}

pub fn export_jsonl(bundles: &[PromptBundle], path: &Path) -> Result<(), PromptError> {
    fsutil::write_atomic(path, to_jsonl(bundles).as_bytes())?;
    Ok(())
}

pub fn import_jsonl(path: &Path) -> Result<Vec<PromptBundle>, PromptError> {
    let text = fsutil::read_to_string(path)?;
    from_jsonl(&text, &path.display().to_string())
}
