//! Rule-based ground truth: which vehicle pairs conflict, who yields, the
//! overall priority ranking and the resulting stop-line waits.

use std::cmp::Ordering;
use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::{Direction, Movement};
use crate::scenario::{Scenario, Vehicle};

pub const CONFLICT_PLACE: &str = "intersection";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Two arrivals closer than this (seconds) can conflict.
    pub time_window_s: f64,
    /// Arrivals closer than this (seconds) count as simultaneous for priority.
    pub tie_epsilon_s: f64,
    /// Time a conflicting lower-priority vehicle keeps behind the one it yields to.
    pub clearance_gap_s: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { time_window_s: 5.0, tie_epsilon_s: 0.5, clearance_gap_s: 3.0 }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid oracle config: {0}")]
pub struct OracleConfigError(String);

impl OracleConfig {
    pub fn validate(&self) -> Result<(), OracleConfigError> {
        if !(self.time_window_s.is_finite() && self.time_window_s > 0.0) {
            return Err(OracleConfigError(format!("time window must be > 0, got {}", self.time_window_s)));
        }
        if !(self.tie_epsilon_s.is_finite() && self.tie_epsilon_s >= 0.0) {
            return Err(OracleConfigError(format!("tie epsilon must be >= 0, got {}", self.tie_epsilon_s)));
        }
        if !(self.clearance_gap_s.is_finite() && self.clearance_gap_s >= 0.0) {
            return Err(OracleConfigError(format!("clearance gap must be >= 0, got {}", self.clearance_gap_s)));
        }
        Ok(())
    }
}

/// Whether the two paths can cross at all, ignoring timing.
pub fn geometric_potential(a: &Vehicle, b: &Vehicle) -> bool {
    let (da, db) = (a.direction(), b.direction());
    if da == db {
        false
    } else if da.opposite() == db {
        a.movement() == Movement::Left || b.movement() == Movement::Left
    } else {
        true
    }
}

pub fn pairwise_conflict(a: &Vehicle, b: &Vehicle, cfg: &OracleConfig) -> bool {
    geometric_potential(a, b) && (a.arrival_time() - b.arrival_time()).abs() <= cfg.time_window_s
}

fn movement_rank(m: Movement) -> u8 {
    match m {
        Movement::Through => 0,
        Movement::Right => 1,
        Movement::Left => 2,
    }
}

/// `a` approaches from `b`'s right.
fn from_right_of(a: Direction, b: Direction) -> bool {
    a == b.rotate_ccw()
}

/// Pairwise right of way. `Less` means `a` goes before `b`.
///
/// Earlier arrival wins outside the tie window; inside it, through beats
/// right beats left, then the vehicle approaching from the other's right
/// wins, then the smaller id. The relation is antisymmetric and total but
/// not transitive: tie windows chain and the right-hand rule cycles around
/// a four-way arrival. [`rank_vehicles`] turns it into a ranking.
pub fn priority_compare(a: &Vehicle, b: &Vehicle, cfg: &OracleConfig) -> Ordering {
    let (ta, tb) = (a.arrival_time(), b.arrival_time());
    if (ta - tb).abs() > cfg.tie_epsilon_s {
        return ta.total_cmp(&tb);
    }
    let by_movement = movement_rank(a.movement()).cmp(&movement_rank(b.movement()));
    if by_movement != Ordering::Equal {
        return by_movement;
    }
    if from_right_of(a.direction(), b.direction()) {
        return Ordering::Less;
    }
    if from_right_of(b.direction(), a.direction()) {
        return Ordering::Greater;
    }
    a.id().cmp(b.id())
}

/// Vehicle indices from highest to lowest priority.
///
/// Vehicles are ordered by how many others they beat under
/// [`priority_compare`], then by arrival time and id. Whenever the pairwise
/// relation is transitive over the scenario this is exactly its sort order.
pub fn rank_vehicles(vehicles: &[Vehicle], cfg: &OracleConfig) -> Vec<usize> {
    let wins: Vec<usize> = vehicles
        .iter()
        .map(|a| vehicles.iter().filter(|b| priority_compare(a, b, cfg) == Ordering::Less).count())
        .collect();
    let mut order: Vec<usize> = (0..vehicles.len()).collect();
    order.sort_by(|&i, &j| {
        wins[j]
            .cmp(&wins[i])
            .then_with(|| vehicles[i].arrival_time().total_cmp(&vehicles[j].arrival_time()))
            .then_with(|| vehicles[i].id().cmp(vehicles[j].id()))
    });
    order
}

/// All conflicting index pairs `(i, j)` with `i < j`, in input order.
pub fn conflict_pairs(scenario: &Scenario, cfg: &OracleConfig) -> Vec<(usize, usize)> {
    let v = scenario.vehicles();
    let mut out = Vec::new();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if pairwise_conflict(&v[i], &v[j], cfg) {
                out.push((i, j));
            }
        }
    }
    out
}

fn round_half_up(x: f64) -> u64 {
    (x + 0.5).floor().max(0.0) as u64
}

/// Whole-second waits, indexed like the scenario's vehicles.
///
/// Vehicles enter in rank order; each one enters no earlier than its own
/// arrival and no earlier than `clearance_gap_s` after every higher-ranked
/// vehicle it conflicts with.
pub fn schedule_waits(
    scenario: &Scenario,
    conflicts: &[(usize, usize)],
    ranks: &[usize],
    cfg: &OracleConfig,
) -> Vec<u64> {
    let v = scenario.vehicles();
    let n = v.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| ranks[i]);
    let mut entry: Vec<Option<f64>> = vec![None; n];
    let mut waits = vec![0; n];
    for &i in &order {
        let arrival = v[i].arrival_time();
        let mut e = arrival;
        for &(a, b) in conflicts {
            let other = if a == i {
                b
            } else if b == i {
                a
            } else {
                continue;
            };
            if ranks[other] < ranks[i] {
                let cleared = entry[other].expect("higher rank scheduled first") + cfg.clearance_gap_s;
                e = e.max(cleared);
            }
        }
        entry[i] = Some(e);
        waits[i] = round_half_up(e - arrival);
    }
    waits
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YesNo {
    Yes,
    No,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConflictPair {
    /// The yielding vehicle.
    pub vehicle1_id: String,
    /// The vehicle with right of way.
    pub vehicle2_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConflictAnalysis {
    pub is_conflict: YesNo,
    pub number_of_conflicts: usize,
    pub places_of_conflicts: Vec<String>,
    pub conflict_vehicles: Vec<ConflictPair>,
    pub decisions: Vec<String>,
    /// Rank per vehicle, listed best first.
    pub priority_order: IndexMap<String, usize>,
    /// Seconds per vehicle, listed in rank order.
    pub waiting_times: IndexMap<String, u64>,
}

impl ConflictAnalysis {
    pub fn has_conflict(&self) -> bool {
        self.is_conflict == YesNo::Yes
    }
}

pub fn decision_sentence(loser: &str, winner: &str) -> String {
    format!("Potential conflict: Vehicle {loser} must yield to Vehicle {winner}")
}

pub fn analyze(scenario: &Scenario, cfg: &OracleConfig) -> ConflictAnalysis {
    let v = scenario.vehicles();
    let order = rank_vehicles(v, cfg);
    let mut ranks = vec![0; v.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    let pairs = conflict_pairs(scenario, cfg);
    let waits = schedule_waits(scenario, &pairs, &ranks, cfg);

    let mut conflict_vehicles = Vec::with_capacity(pairs.len());
    let mut decisions = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        let (loser, winner) = if ranks[i] > ranks[j] { (i, j) } else { (j, i) };
        let (loser, winner) = (v[loser].id().as_str(), v[winner].id().as_str());
        decisions.push(decision_sentence(loser, winner));
        conflict_vehicles.push(ConflictPair { vehicle1_id: loser.to_owned(), vehicle2_id: winner.to_owned() });
    }

    ConflictAnalysis {
        is_conflict: if pairs.is_empty() { YesNo::No } else { YesNo::Yes },
        number_of_conflicts: pairs.len(),
        places_of_conflicts: vec![CONFLICT_PLACE.to_owned(); pairs.len()],
        conflict_vehicles,
        decisions,
        priority_order: order.iter().map(|&i| (v[i].id().to_string(), ranks[i])).collect(),
        waiting_times: order.iter().map(|&i| (v[i].id().to_string(), waits[i])).collect(),
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("malformed analysis document at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("inconsistent analysis: {0}")]
    Inconsistent(String),
}

pub fn parse_analysis(text: &str) -> Result<ConflictAnalysis, AnalysisError> {
    let a: ConflictAnalysis = serde_json::from_str(text).map_err(|e| AnalysisError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    check_analysis(&a)?;
    Ok(a)
}

/// Structural invariants every analysis document must satisfy.
pub fn check_analysis(a: &ConflictAnalysis) -> Result<(), AnalysisError> {
    let bad = |m: String| Err(AnalysisError::Inconsistent(m));
    let k = a.number_of_conflicts;
    if (a.is_conflict == YesNo::Yes) != (k >= 1) {
        return bad(format!("is_conflict {:?} with {k} conflicts", a.is_conflict));
    }
    if a.conflict_vehicles.len() != k || a.decisions.len() != k || a.places_of_conflicts.len() != k {
        return bad(format!("number_of_conflicts {k} disagrees with list lengths"));
    }
    let n = a.priority_order.len();
    if n == 0 {
        return bad("priority_order is empty".into());
    }
    let mut seen = vec![false; n];
    for (id, &rank) in &a.priority_order {
        if rank == 0 || rank > n || std::mem::replace(&mut seen[rank - 1], true) {
            return bad(format!("rank {rank} of {id} breaks the 1..{n} permutation"));
        }
    }
    if a.waiting_times.len() != n || a.waiting_times.keys().any(|id| !a.priority_order.contains_key(id)) {
        return bad("waiting_times must cover exactly the ranked vehicles".into());
    }
    for p in &a.conflict_vehicles {
        let (Some(l), Some(w)) = (a.priority_order.get(&p.vehicle1_id), a.priority_order.get(&p.vehicle2_id)) else {
            return bad(format!("pair {}/{} names an unranked vehicle", p.vehicle1_id, p.vehicle2_id));
        };
        if l <= w {
            return bad(format!("{} yields to {} but does not rank below it", p.vehicle1_id, p.vehicle2_id));
        }
    }
    if let Some((id, _)) = a.priority_order.iter().find(|(_, &r)| r == 1) {
        if a.waiting_times[id] != 0 {
            return bad(format!("top-ranked {id} has a nonzero wait"));
        }
    }
    Ok(())
}

pub fn emit_analysis(a: &ConflictAnalysis) -> String {
    serde_json::to_string_pretty(a).expect("analysis serializes")
}

pub const STATUS_HEADER: &str = "**Conflict Status**";
pub const OVERVIEW_HEADER: &str = "**Conflicts Overview**";
pub const DECISIONS_HEADER: &str = "**Actions & Decisions**";
pub const PRIORITY_HEADER: &str = "**Priority Assignment**";
pub const WAITS_HEADER: &str = "**Vehicle Waiting Times**";

/// The five-section plain-text report.
pub fn render_report(a: &ConflictAnalysis) -> String {
    let mut out = String::new();
    let status = if a.has_conflict() { "Conflict detected." } else { "No conflict detected." };
    writeln!(out, "{STATUS_HEADER}: {status}").unwrap();

    let involved = if a.conflict_vehicles.is_empty() {
        "None".to_owned()
    } else {
        a.conflict_vehicles
            .iter()
            .map(|p| format!("Vehicle {} and Vehicle {}", p.vehicle1_id, p.vehicle2_id))
            .collect::<Vec<_>>()
            .join(", ")
    };
    writeln!(out, "{OVERVIEW_HEADER}: Number of conflicts: {}. Involved vehicles: {involved}.", a.number_of_conflicts)
        .unwrap();

    let decisions = if a.decisions.is_empty() { "None".to_owned() } else { a.decisions.join(", ") };
    writeln!(out, "{DECISIONS_HEADER}: Decisions: {decisions}").unwrap();

    let priorities = a
        .priority_order
        .iter()
        .map(|(id, r)| format!("Vehicle {id}: Priority {r}"))
        .collect::<Vec<_>>()
        .join(", ");
    writeln!(out, "{PRIORITY_HEADER}: {priorities}.").unwrap();

    write!(out, "{WAITS_HEADER}:").unwrap();
    for (id, w) in &a.waiting_times {
        write!(out, "\n- Vehicle {id}: {w} seconds").unwrap();
    }
    out.push('\n');
    out
}
