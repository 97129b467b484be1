//! Vehicle records, scenario documents, seeded generation and textual descriptions.

use std::collections::HashSet;
use std::fmt;

use once_cell::sync::Lazy;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::{Direction, Egress, IntersectionLayout, LaneId, Movement};
use crate::oracle::{analyze, check_analysis, ConflictAnalysis, OracleConfig};

/// Upper bound on vehicles in one scenario.
pub const MAX_VEHICLES: usize = 256;

const KMH_PER_MS: f64 = 3.6;

static VEHICLE_ID: Lazy<Regex> = Lazy::new(|| Regex::new(r"^V[0-9]{1,6}$").unwrap());

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VehicleId(String);

impl VehicleId {
    pub fn parse(s: &str) -> Option<VehicleId> {
        VEHICLE_ID.is_match(s).then(|| VehicleId(s.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VehicleError {
    #[error("vehicle_id {0:?} does not match V followed by 1-6 digits")]
    BadId(String),
    #[error("{id}: speed must be a positive finite number of km/h, got {value}")]
    NonPositiveSpeed { id: String, value: f64 },
    #[error("{id}: distance_to_intersection must be a positive finite number of meters, got {value}")]
    NonPositiveDistance { id: String, value: f64 },
    #[error("{id}: lane {lane:?} is not a lane number 1-8")]
    UnknownLane { id: String, lane: String },
    #[error("{id}: direction {direction:?} is not north, east, south or west")]
    UnknownDirection { id: String, direction: String },
    #[error("{id}: destination {destination:?} is not an egress letter A-H")]
    UnknownDestination { id: String, destination: String },
    #[error("{id}: lane {lane} carries {bound} traffic, not {direction}")]
    LaneDirectionMismatch { id: String, lane: LaneId, bound: Direction, direction: Direction },
    #[error("{id}: lane {lane} does not lead to destination {destination}")]
    DestinationNotPermitted { id: String, lane: LaneId, destination: Egress },
}

/// Lane number as it appears on the wire: Table-style documents quote it,
/// hand-written ones often don't.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LaneField {
    Text(String),
    Number(i64),
}

impl fmt::Display for LaneField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LaneField::Text(s) => f.write_str(s),
            LaneField::Number(n) => write!(f, "{n}"),
        }
    }
}

/// One unvalidated entry of a scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleRecord {
    pub vehicle_id: String,
    pub lane: LaneField,
    pub speed: f64,
    pub distance_to_intersection: f64,
    pub direction: String,
    pub destination: String,
}

/// A validated vehicle. The movement class is resolved against the layout
/// the vehicle was validated with.
#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    id: VehicleId,
    lane: LaneId,
    speed_kmh: f64,
    distance_m: f64,
    direction: Direction,
    destination: Egress,
    movement: Movement,
}

impl Vehicle {
    pub fn id(&self) -> &VehicleId {
        &self.id
    }
    pub fn lane(&self) -> LaneId {
        self.lane
    }
    pub fn speed_kmh(&self) -> f64 {
        self.speed_kmh
    }
    pub fn distance_m(&self) -> f64 {
        self.distance_m
    }
    pub fn direction(&self) -> Direction {
        self.direction
    }
    pub fn destination(&self) -> Egress {
        self.destination
    }
    pub fn movement(&self) -> Movement {
        self.movement
    }

    /// Seconds until the vehicle reaches the stop line at constant speed.
    pub fn arrival_time(&self) -> f64 {
        self.distance_m / (self.speed_kmh / KMH_PER_MS)
    }

    pub fn to_record(&self) -> VehicleRecord {
        VehicleRecord {
            vehicle_id: self.id.0.clone(),
            lane: LaneField::Text(self.lane.to_string()),
            speed: self.speed_kmh,
            distance_to_intersection: self.distance_m,
            direction: self.direction.to_string(),
            destination: self.destination.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalEstimate<'a> {
    pub vehicle_id: &'a VehicleId,
    pub arrival_time_s: f64,
}

pub fn arrival_time(vehicle: &Vehicle) -> ArrivalEstimate<'_> {
    ArrivalEstimate { vehicle_id: &vehicle.id, arrival_time_s: vehicle.arrival_time() }
}

pub fn validate_vehicle(raw: &VehicleRecord, layout: &IntersectionLayout) -> Result<Vehicle, VehicleError> {
    let id = VehicleId::parse(&raw.vehicle_id).ok_or_else(|| VehicleError::BadId(raw.vehicle_id.clone()))?;
    let name = || raw.vehicle_id.clone();
    if !(raw.speed.is_finite() && raw.speed > 0.0) {
        return Err(VehicleError::NonPositiveSpeed { id: name(), value: raw.speed });
    }
    if !(raw.distance_to_intersection.is_finite() && raw.distance_to_intersection > 0.0) {
        return Err(VehicleError::NonPositiveDistance { id: name(), value: raw.distance_to_intersection });
    }
    let lane = match &raw.lane {
        LaneField::Text(s) => s.trim().parse::<u8>().ok(),
        LaneField::Number(n) => u8::try_from(*n).ok(),
    }
    .and_then(LaneId::new)
    .ok_or_else(|| VehicleError::UnknownLane { id: name(), lane: raw.lane.to_string() })?;
    let direction: Direction = raw
        .direction
        .parse()
        .map_err(|_| VehicleError::UnknownDirection { id: name(), direction: raw.direction.clone() })?;
    let destination: Egress = raw
        .destination
        .parse()
        .map_err(|_| VehicleError::UnknownDestination { id: name(), destination: raw.destination.clone() })?;

    let bound = layout.lane_direction(lane);
    if bound != direction {
        return Err(VehicleError::LaneDirectionMismatch { id: name(), lane, bound, direction });
    }
    if !layout.lane_permits(lane, destination) {
        return Err(VehicleError::DestinationNotPermitted { id: name(), lane, destination });
    }
    // Layout validation guarantees every permitted destination classifies.
    let movement = layout
        .classify_movement(direction, destination)
        .expect("permitted destination has a movement class");

    Ok(Vehicle {
        id,
        lane,
        speed_kmh: raw.speed,
        distance_m: raw.distance_to_intersection,
        direction,
        destination,
        movement,
    })
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("malformed scenario document at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("vehicle #{index}: {source}")]
    Vehicle { index: usize, source: VehicleError },
    #[error("duplicate vehicle_id {0}")]
    DuplicateId(VehicleId),
    #[error("scenario has no vehicles")]
    Empty,
    #[error("scenario has {0} vehicles, more than the maximum of {MAX_VEHICLES}")]
    TooMany(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    vehicles: Vec<Vehicle>,
}

impl Scenario {
    pub fn new(vehicles: Vec<Vehicle>) -> Result<Scenario, ScenarioError> {
        if vehicles.is_empty() {
            return Err(ScenarioError::Empty);
        }
        if vehicles.len() > MAX_VEHICLES {
            return Err(ScenarioError::TooMany(vehicles.len()));
        }
        let mut seen = HashSet::with_capacity(vehicles.len());
        for v in &vehicles {
            if !seen.insert(&v.id) {
                return Err(ScenarioError::DuplicateId(v.id.clone()));
            }
        }
        Ok(Scenario { vehicles })
    }

    pub fn from_records(records: &[VehicleRecord], layout: &IntersectionLayout) -> Result<Scenario, ScenarioError> {
        let vehicles = records
            .iter()
            .enumerate()
            .map(|(index, r)| validate_vehicle(r, layout).map_err(|source| ScenarioError::Vehicle { index, source }))
            .collect::<Result<Vec<_>, _>>()?;
        Scenario::new(vehicles)
    }

    pub fn vehicles(&self) -> &[Vehicle] {
        &self.vehicles
    }

    pub fn len(&self) -> usize {
        self.vehicles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vehicles.is_empty()
    }

    pub fn to_document(&self) -> ScenarioDocument {
        ScenarioDocument { vehicles_scenario: self.vehicles.iter().map(Vehicle::to_record).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDocument {
    pub vehicles_scenario: Vec<VehicleRecord>,
}

pub fn parse_scenario(text: &str, layout: &IntersectionLayout) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDocument = serde_json::from_str(text).map_err(|e| ScenarioError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Scenario::from_records(&doc.vehicles_scenario, layout)
}

pub fn emit_scenario(scenario: &Scenario) -> String {
    serde_json::to_string_pretty(&scenario.to_document()).expect("scenario document serializes")
}

pub fn describe_vehicle(v: &Vehicle) -> String {
    format!(
        "Vehicle {} is in lane {}, moving {} at a speed of {:.2} km/h, and is {:.2} meters away from the intersection, heading towards {}.",
        v.id, v.lane, v.direction, v.speed_kmh, v.distance_m, v.destination
    )
}

pub fn describe_scenario(scenario: &Scenario) -> String {
    scenario.vehicles.iter().map(describe_vehicle).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerationError {
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error("conflict balance {target} unattainable within {attempts} draws: reached {achieved:.4} over {accepted} accepted scenarios")]
    BalanceUnattainable { target: f64, attempts: u64, accepted: usize, achieved: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub vehicle_count: (usize, usize),
    pub speed_kmh: (f64, f64),
    pub distance_m: (f64, f64),
    pub conflict_balance: Option<f64>,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            vehicle_count: (2, 8),
            speed_kmh: (20.0, 80.0),
            distance_m: (50.0, 450.0),
            conflict_balance: None,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenerationError> {
        let bad = |msg: String| Err(GenerationError::InvalidParams(msg));
        let (lo, hi) = self.vehicle_count;
        if lo < 1 || lo > hi {
            return bad(format!("vehicle count range {lo}..{hi} is empty or starts below 1"));
        }
        if hi > MAX_VEHICLES {
            return bad(format!("vehicle count {hi} exceeds maximum {MAX_VEHICLES}"));
        }
        for (name, (lo, hi)) in [("speed", self.speed_kmh), ("distance", self.distance_m)] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
                return bad(format!("{name} range [{lo}, {hi}] must be positive with lo < hi"));
            }
        }
        if let Some(b) = self.conflict_balance {
            if !(0.0..=1.0).contains(&b) {
                return bad(format!("conflict balance {b} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Draws one scenario. Ids are `V` plus four digits, unique within the scenario.
pub fn generate_scenario<R: Rng + ?Sized>(
    params: &GenParams,
    layout: &IntersectionLayout,
    rng: &mut R,
) -> Result<Scenario, GenerationError> {
    params.validate()?;
    let count = rng.random_range(params.vehicle_count.0..=params.vehicle_count.1);
    let mut used = HashSet::with_capacity(count);
    let mut vehicles = Vec::with_capacity(count);
    for _ in 0..count {
        let id = loop {
            let n: u32 = rng.random_range(1000..=9999);
            if used.insert(n) {
                break VehicleId(format!("V{n}"));
            }
        };
        let direction = *Direction::ALL.choose(rng).expect("four directions");
        let lanes: Vec<LaneId> = layout.lanes_for(direction).collect();
        let lane = *lanes.choose(rng).ok_or_else(|| {
            GenerationError::InvalidParams(format!("layout has no lane for {direction} traffic"))
        })?;
        let destination = *layout.destinations(lane).choose(rng).expect("lanes have destinations");
        let speed_kmh = rng.random_range(params.speed_kmh.0..params.speed_kmh.1);
        let distance_m = rng.random_range(params.distance_m.0..params.distance_m.1);
        let movement = layout.classify_movement(direction, destination).expect("validated layout");
        vehicles.push(Vehicle { id, lane, speed_kmh, distance_m, direction, destination, movement });
    }
    Ok(Scenario::new(vehicles).expect("generator keeps ids unique and count in range"))
}

/// Per-draw generator; draw `k` of a dataset uses seed `seed + k`.
pub fn draw_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScenario {
    pub id: String,
    pub scenario: Scenario,
    pub analysis: ConflictAnalysis,
}

/// Rejection budget per requested scenario when a balance is set.
pub const BALANCE_BUDGET_FACTOR: u64 = 100;

/// Generates `n` labeled scenarios. With a conflict balance, draws are
/// accepted only while their class still has quota left, so the positive
/// count is exactly `round(n * balance)`.
pub fn generate_dataset(
    params: &GenParams,
    n: usize,
    layout: &IntersectionLayout,
    oracle: &OracleConfig,
) -> Result<Vec<LabeledScenario>, GenerationError> {
    params.validate()?;
    if n == 0 {
        return Err(GenerationError::InvalidParams("dataset size must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(n);
    let label = |k: u64| -> Result<(Scenario, ConflictAnalysis), GenerationError> {
        let scenario = generate_scenario(params, layout, &mut draw_rng(params.seed, k))?;
        let analysis = analyze(&scenario, oracle);
        Ok((scenario, analysis))
    };

    match params.conflict_balance {
        None => {
            for k in 0..n as u64 {
                let (scenario, analysis) = label(k)?;
                out.push(LabeledScenario { id: dataset_item_id(out.len()), scenario, analysis });
            }
        }
        Some(balance) => {
            let mut want_pos = (n as f64 * balance).round() as usize;
            let mut want_neg = n - want_pos;
            let budget = BALANCE_BUDGET_FACTOR * n as u64;
            let mut positives = 0usize;
            let mut k = 0u64;
            while want_pos + want_neg > 0 {
                if k >= budget {
                    let accepted = out.len();
                    return Err(GenerationError::BalanceUnattainable {
                        target: balance,
                        attempts: budget,
                        accepted,
                        achieved: if accepted == 0 { 0.0 } else { positives as f64 / accepted as f64 },
                    });
                }
                let (scenario, analysis) = label(k)?;
                k += 1;
                let slot = if analysis.has_conflict() { &mut want_pos } else { &mut want_neg };
                if *slot == 0 {
                    continue;
                }
                *slot -= 1;
                positives += usize::from(analysis.has_conflict());
                out.push(LabeledScenario { id: dataset_item_id(out.len()), scenario, analysis });
            }
        }
    }
    Ok(out)
}

fn dataset_item_id(index: usize) -> String {
    format!("S{index:06}")
}

/// One line of a labeled dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetLine {
    id: String,
    scenario: ScenarioDocument,
    analysis: ConflictAnalysis,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("dataset line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("dataset repeats item id {0}")]
    DuplicateId(String),
    #[error("dataset has no items")]
    Empty,
}

/// One compact JSON object per item, newline-terminated.
pub fn dataset_to_jsonl(items: &[LabeledScenario]) -> String {
    let mut out = String::new();
    for item in items {
        let line = DatasetLine { id: item.id.clone(), scenario: item.scenario.to_document(), analysis: item.analysis.clone() };
        out.push_str(&serde_json::to_string(&line).expect("dataset line serializes"));
        out.push('\n');
    }
    out
}

/// Reads a labeled dataset. Each analysis must be internally consistent and
/// rank exactly the vehicles of its scenario; it is not re-derived, so files
/// labeled under a non-default oracle config load unchanged.
pub fn parse_dataset(text: &str, layout: &IntersectionLayout) -> Result<Vec<LabeledScenario>, DatasetError> {
    let mut seen = HashSet::new();
    let mut items = Vec::new();
    for (i, raw) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |message: String| DatasetError::Line { line: i + 1, message };
        let line: DatasetLine = serde_json::from_str(raw).map_err(|e| bad(e.to_string()))?;
        let scenario = Scenario::from_records(&line.scenario.vehicles_scenario, layout).map_err(|e| bad(e.to_string()))?;
        check_analysis(&line.analysis).map_err(|e| bad(e.to_string()))?;
        let ranked = &line.analysis.priority_order;
        if ranked.len() != scenario.len() || scenario.vehicles().iter().any(|v| !ranked.contains_key(v.id().as_str())) {
            return Err(bad("analysis does not rank exactly the scenario's vehicles".into()));
        }
        if !seen.insert(line.id.clone()) {
            return Err(DatasetError::DuplicateId(line.id));
        }
        items.push(LabeledScenario { id: line.id, scenario, analysis: line.analysis });
    }
    if items.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(items)
}
