//! Scoring controller output against the oracle: verdict classification
//! metrics plus ROUGE-L on each report section.

mod metrics;
mod rouge;

pub use metrics::{confusion, metrics, ConfusionMatrix, Metrics, MetricsError};
pub use rouge::{lcs_length, rouge_l, rouge_l_tokens, tokenize, RougeScore};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{
    find_section, parse_report, split_sections, verdict_label, AssessRequest, ControllerError, Label,
    TrafficController, TranscriptRecord, UnparseablePolicy, Verdict,
};
use crate::layout::IntersectionLayout;
use crate::oracle::{render_report, OracleConfig};
use crate::promptkit::{labeled_bundle, PromptBundle};
use crate::scenario::LabeledScenario;

/// The four scored sections, by normalized header.
pub const SCORED_SECTIONS: [&str; 4] =
    ["conflicts overview", "actions & decisions", "priority assignment", "vehicle waiting times"];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SectionScores {
    pub conflicts_overview: RougeScore,
    pub actions_decisions: RougeScore,
    pub priority_assignment: RougeScore,
    pub vehicle_waiting_times: RougeScore,
}

impl SectionScores {
    pub fn as_array(&self) -> [RougeScore; 4] {
        [self.conflicts_overview, self.actions_decisions, self.priority_assignment, self.vehicle_waiting_times]
    }
}

/// ROUGE-L per section, sections matched by header. A section missing from
/// the candidate scores zero.
pub fn section_scores(candidate: &str, truth: &str) -> SectionScores {
    let cand = split_sections(candidate);
    let reference = split_sections(truth);
    let score = |name: &str| match (find_section(&cand, name), find_section(&reference, name)) {
        (Some(c), Some(r)) => rouge_l(c, r),
        _ => RougeScore::default(),
    };
    SectionScores {
        conflicts_overview: score(SCORED_SECTIONS[0]),
        actions_decisions: score(SCORED_SECTIONS[1]),
        priority_assignment: score(SCORED_SECTIONS[2]),
        vehicle_waiting_times: score(SCORED_SECTIONS[3]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SectionMeans {
    pub conflicts_overview: f64,
    pub actions_decisions: f64,
    pub priority_assignment: f64,
    pub vehicle_waiting_times: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub unparseable: usize,
    pub transport_errors: usize,
    /// Items left out of the confusion matrix (transport errors, and
    /// unparseable responses under the exclude policy).
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub controller: String,
    pub corpus_size: usize,
    pub scored: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    /// Mean F-measure per section over responses that arrived.
    pub section_rouge_l: SectionMeans,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub scenario_id: String,
    pub truth: Label,
    pub prediction: Option<Label>,
    pub verdict: Option<Verdict>,
    pub conflicts_overview_f: Option<f64>,
    pub actions_decisions_f: Option<f64>,
    pub priority_assignment_f: Option<f64>,
    pub vehicle_waiting_times_f: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRun {
    pub summary: EvalSummary,
    pub rows: Vec<ScenarioRow>,
    pub transcript: Vec<TranscriptRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalConfig {
    pub oracle: OracleConfig,
    pub unparseable: UnparseablePolicy,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("evaluation corpus is empty")]
    EmptyCorpus,
    #[error("all {count} controller calls failed; first error: {first}")]
    AllFailed { count: usize, first: ControllerError },
    #[error("no responses left to score after exclusions")]
    NothingScored,
}

fn label_of(positive: bool) -> Label {
    if positive {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// Runs the controller over every scenario and aggregates the scores.
/// `model` is only used to tag transcript records.
pub fn evaluate_corpus(
    controller: &dyn TrafficController,
    corpus: &[LabeledScenario],
    layout: &IntersectionLayout,
    cfg: &EvalConfig,
    model: &str,
) -> Result<EvalRun, EvalError> {
    if corpus.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let bundles: Vec<PromptBundle> = corpus.iter().map(|item| labeled_bundle(item, layout)).collect();
    let requests: Vec<AssessRequest<'_>> = corpus
        .iter()
        .zip(&bundles)
        .enumerate()
        .map(|(index, (item, bundle))| AssessRequest { index, scenario_id: &item.id, scenario: &item.scenario, bundle })
        .collect();
    let results = controller.assess_batch(&requests);

    let mut cm = ConfusionMatrix::default();
    let mut diagnostics = Diagnostics::default();
    let mut sums = [0.0f64; 4];
    let mut answered = 0usize;
    let mut rows = Vec::with_capacity(corpus.len());
    let mut transcript = Vec::with_capacity(corpus.len());
    let mut first_error = None;

    for (index, (item, result)) in corpus.iter().zip(results).enumerate() {
        transcript.push(TranscriptRecord::new(index, &item.id, model, &result));
        let truth = label_of(item.analysis.has_conflict());
        let text = match result {
            Ok(text) => text,
            Err(e) => {
                diagnostics.transport_errors += 1;
                diagnostics.excluded += 1;
                rows.push(ScenarioRow {
                    scenario_id: item.id.clone(),
                    truth,
                    prediction: None,
                    verdict: None,
                    conflicts_overview_f: None,
                    actions_decisions_f: None,
                    priority_assignment_f: None,
                    vehicle_waiting_times_f: None,
                    error: Some(e.to_string()),
                });
                first_error.get_or_insert(e);
                continue;
            }
        };
        answered += 1;
        let report = parse_report(&text);
        if report.verdict == Verdict::Unparseable {
            diagnostics.unparseable += 1;
        }
        let prediction = verdict_label(&report, cfg.unparseable);
        match prediction {
            Some(p) => cm.record(p, truth),
            None => diagnostics.excluded += 1,
        }
        let scores = section_scores(&text, &render_report(&item.analysis)).as_array();
        for (sum, s) in sums.iter_mut().zip(&scores) {
            *sum += s.f_measure;
        }
        rows.push(ScenarioRow {
            scenario_id: item.id.clone(),
            truth,
            prediction,
            verdict: Some(report.verdict),
            conflicts_overview_f: Some(scores[0].f_measure),
            actions_decisions_f: Some(scores[1].f_measure),
            priority_assignment_f: Some(scores[2].f_measure),
            vehicle_waiting_times_f: Some(scores[3].f_measure),
            error: None,
        });
    }

    if answered == 0 {
        return Err(EvalError::AllFailed { count: corpus.len(), first: first_error.expect("a failure was recorded") });
    }
    let metrics = metrics(&cm).map_err(|_| EvalError::NothingScored)?;
    let mean = |k: usize| sums[k] / answered as f64;
    let summary = EvalSummary {
        controller: controller.name().to_owned(),
        corpus_size: corpus.len(),
        scored: cm.total() as usize,
        confusion: cm,
        metrics,
        section_rouge_l: SectionMeans {
            conflicts_overview: mean(0),
            actions_decisions: mean(1),
            priority_assignment: mean(2),
            vehicle_waiting_times: mean(3),
        },
        diagnostics,
    };
    Ok(EvalRun { summary, rows, transcript })
}

pub fn summary_json(summary: &EvalSummary) -> String {
    serde_json::to_string_pretty(summary).expect("summary serializes")
}

pub fn summary_table(s: &EvalSummary) -> String {
    let mut out = String::new();
    let m = &s.metrics;
    let c = &s.confusion;
    let r = &s.section_rouge_l;
    let d = &s.diagnostics;
    writeln!(out, "controller             {}", s.controller).unwrap();
    writeln!(out, "corpus / scored        {} / {}", s.corpus_size, s.scored).unwrap();
    writeln!(out, "confusion (tp fp fn tn) {} {} {} {}", c.tp, c.fp, c.fn_, c.tn).unwrap();
    writeln!(out, "accuracy               {:.4}", m.accuracy).unwrap();
    writeln!(out, "precision              {:.4}", m.precision).unwrap();
    writeln!(out, "recall                 {:.4}", m.recall).unwrap();
    writeln!(out, "f1                     {:.4}{}", m.f1, if m.degenerate { "  (degenerate)" } else { "" }).unwrap();
    writeln!(out, "rouge-l overview       {:.4}", r.conflicts_overview).unwrap();
    writeln!(out, "rouge-l decisions      {:.4}", r.actions_decisions).unwrap();
    writeln!(out, "rouge-l priority       {:.4}", r.priority_assignment).unwrap();
    writeln!(out, "rouge-l waiting times  {:.4}", r.vehicle_waiting_times).unwrap();
    writeln!(out, "unparseable            {}", d.unparseable).unwrap();
    writeln!(out, "transport errors       {}", d.transport_errors).unwrap();
    writeln!(out, "excluded               {}", d.excluded).unwrap();
    out
}

pub fn rows_csv(rows: &[ScenarioRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "scenario_id",
        "truth",
        "prediction",
        "conflicts_overview_f",
        "actions_decisions_f",
        "priority_assignment_f",
        "vehicle_waiting_times_f",
        "error",
    ])
    .expect("in-memory csv");
    let label = |l: Option<Label>| match l {
        Some(Label::Positive) => "positive".to_owned(),
        Some(Label::Negative) => "negative".to_owned(),
        None => String::new(),
    };
    let num = |f: Option<f64>| f.map(|v| format!("{v:.6}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.scenario_id.clone(),
            label(Some(r.truth)),
            label(r.prediction),
            num(r.conflicts_overview_f),
            num(r.actions_decisions_f),
            num(r.priority_assignment_f),
            num(r.vehicle_waiting_times_f),
            r.error.clone().unwrap_or_default(),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}
