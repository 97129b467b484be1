//! Tolerant parser from free-form controller output to a structured report.
//!
//! Models drift from the requested skeleton (extra sections, "Yes" instead
//! of "Conflict detected.", lowercase ids), so sections are located by their
//! bold headers wherever they appear and each field is pulled out by its own
//! pattern. Nothing here fails: text without a status header is simply
//! `Verdict::Unparseable`.

use indexmap::IndexMap;
use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

static HEADER: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"\*{2,}\s*([A-Za-z][A-Za-z &/\-]*?)\s*\*{2,}[ \t]*:?").unwrap());
static VERDICT_NO: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?i)^\W*(no|none|false)\b|\bno\s+conflicts?\b|\bnot\s+detected\b").unwrap());
static VERDICT_YES: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\b(yes|true|detected|conflicts?)\b").unwrap());
static PAIR: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)\bvehicles?\s+(V\d+)(?:\s*\([^)]*\))?\s+and\s+(?:vehicle\s+)?(V\d+)").unwrap()
});
static PRIORITY: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)\bvehicle\s+(V\d+)\s*:\s*priority\s+(\d+)").unwrap());
static WAIT: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?i)\bvehicle\s+(V\d+)\s*:\s*(\d+(?:\.\d+)?)\s*seconds?\b").unwrap());
static SENTENCE_END: Lazy<Regex> = Lazy::new(|| Regex::new(r"[.!?](?:\s+|$)").unwrap());
static DECISIONS_PREFIX: Lazy<Regex> = Lazy::new(|| Regex::new(r"(?i)^\s*decisions?\s*:\s*").unwrap());

/// A header-delimited block of a report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section<'a> {
    /// Header text, lowercased, whitespace collapsed.
    pub name: String,
    pub body: &'a str,
}

pub fn normalize_header(h: &str) -> String {
    h.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Splits `text` at every `**Header**:` marker. Text before the first
/// header is dropped.
pub fn split_sections(text: &str) -> Vec<Section<'_>> {
    let marks: Vec<_> = HEADER.captures_iter(text).collect();
    marks
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let whole = c.get(0).unwrap();
            let end = marks.get(k + 1).map_or(text.len(), |n| n.get(0).unwrap().start());
            Section { name: normalize_header(&c[1]), body: text[whole.end()..end].trim() }
        })
        .collect()
}

/// First section with the given (normalized) name.
pub fn find_section<'a>(sections: &[Section<'a>], name: &str) -> Option<&'a str> {
    sections.iter().find(|s| s.name == name).map(|s| s.body)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unparseable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerReport {
    pub verdict: Verdict,
    pub pairs: Vec<(String, String)>,
    pub decisions: Vec<String>,
    pub priorities: IndexMap<String, u32>,
    pub waits: IndexMap<String, f64>,
    pub raw_text: String,
}

fn parse_verdict(body: &str) -> Verdict {
    if VERDICT_NO.is_match(body) {
        Verdict::No
    } else if VERDICT_YES.is_match(body) {
        Verdict::Yes
    } else {
        Verdict::Unparseable
    }
}

fn split_decisions(body: &str) -> Vec<String> {
    let body = DECISIONS_PREFIX.replace(body, "");
    let body = body.trim();
    if body.is_empty() || body.eq_ignore_ascii_case("none") || body.eq_ignore_ascii_case("none.") {
        return Vec::new();
    }
    const MARK: &str = "Potential conflict:";
    let pieces: Vec<&str> = if body.contains(MARK) {
        let starts: Vec<usize> = body.match_indices(MARK).map(|(i, _)| i).collect();
        starts
            .iter()
            .enumerate()
            .map(|(k, &s)| &body[s..starts.get(k + 1).copied().unwrap_or(body.len())])
            .collect()
    } else {
        let mut out = Vec::new();
        let mut last = 0;
        for m in SENTENCE_END.find_iter(body) {
            out.push(&body[last..m.start() + 1]);
            last = m.end();
        }
        out.push(&body[last..]);
        out
    };
    pieces
        .into_iter()
        .map(|p| p.trim().trim_end_matches(',').trim())
        .filter(|p| !p.is_empty())
        .map(str::to_owned)
        .collect()
}

const DECISION_SECTIONS: [&str; 4] = ["actions & decisions", "decisions", "recommendations", "actions"];

pub fn parse_report(text: &str) -> ControllerReport {
    let sections = split_sections(text);
    let unparseable = || ControllerReport {
        verdict: Verdict::Unparseable,
        pairs: Vec::new(),
        decisions: Vec::new(),
        priorities: IndexMap::new(),
        waits: IndexMap::new(),
        raw_text: text.to_owned(),
    };
    let Some(status) = find_section(&sections, "conflict status") else {
        return unparseable();
    };
    let verdict = parse_verdict(status);
    if verdict == Verdict::Unparseable {
        return unparseable();
    }

    let pair_source = find_section(&sections, "conflicts overview").unwrap_or(text);
    let mut pairs: Vec<(String, String)> = Vec::new();
    for c in PAIR.captures_iter(pair_source) {
        let (a, b) = (c[1].to_uppercase(), c[2].to_uppercase());
        if a != b && !pairs.iter().any(|(x, y)| (x == &a && y == &b) || (x == &b && y == &a)) {
            pairs.push((a, b));
        }
    }

    let decisions = sections
        .iter()
        .filter(|s| DECISION_SECTIONS.contains(&s.name.as_str()))
        .flat_map(|s| split_decisions(s.body))
        .collect();

    let mut priorities = IndexMap::new();
    for c in PRIORITY.captures_iter(text) {
        if let Ok(r) = c[2].parse::<u32>() {
            priorities.entry(c[1].to_uppercase()).or_insert(r);
        }
    }
    let mut waits = IndexMap::new();
    for c in WAIT.captures_iter(text) {
        if let Ok(w) = c[2].parse::<f64>() {
            waits.entry(c[1].to_uppercase()).or_insert(w);
        }
    }

    ControllerReport { verdict, pairs, decisions, priorities, waits, raw_text: text.to_owned() }
}
