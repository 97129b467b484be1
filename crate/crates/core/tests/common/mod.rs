//! Fixtures and independent re-derivations shared by the integration tests.
//!
//! Nothing here calls into the library's geometry or kinematics: the lane
//! table, movement classes and arrival times are written out by hand so the
//! tests compare two implementations rather than one with itself.

#![allow(dead_code)]

use junction_core::scenario::{LaneField, VehicleRecord};
use proptest::prelude::*;

pub const FOUR_VEHICLE_SCENARIO: &str = include_str!("../data/four_vehicle_scenario.json");
pub const RAW_GENERATOR_OUTPUT: &str = include_str!("../data/raw_generator_output.json");
pub const MODEL_OUTPUTS: [&str; 3] = [
    include_str!("../data/model_output_1.txt"),
    include_str!("../data/model_output_2.txt"),
    include_str!("../data/model_output_3.txt"),
];

pub const DIRECTIONS: [&str; 4] = ["north", "east", "south", "west"];

/// (lane, heading, destinations) for the stock intersection.
pub const LANE_TABLE: [(u8, &str, &[&str]); 8] = [
    (1, "north", &["F", "H"]),
    (2, "north", &["E", "D", "C"]),
    (3, "east", &["H", "B"]),
    (4, "east", &["G", "E", "F"]),
    (5, "south", &["B", "D"]),
    (6, "south", &["A", "G", "H"]),
    (7, "west", &["D", "F"]),
    (8, "west", &["B", "C", "A"]),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Turn {
    Through,
    Left,
    Right,
}

/// Compass index of the leg an exit letter leaves by (0 = north, clockwise).
fn exit_leg(dest: &str) -> usize {
    match dest {
        "E" | "F" => 0,
        "G" | "H" => 1,
        "A" | "B" => 2,
        "C" | "D" => 3,
        other => panic!("unknown exit {other}"),
    }
}

fn heading_index(dir: &str) -> usize {
    DIRECTIONS.iter().position(|d| *d == dir).expect("known heading")
}

/// Movement derived from compass arithmetic.
pub fn turn_of(dir: &str, dest: &str) -> Option<Turn> {
    match (exit_leg(dest) + 4 - heading_index(dir)) % 4 {
        0 => Some(Turn::Through),
        1 => Some(Turn::Right),
        3 => Some(Turn::Left),
        _ => None,
    }
}

pub fn arrival_s(speed_kmh: f64, distance_m: f64) -> f64 {
    distance_m * 3.6 / speed_kmh
}

/// Hand-rolled conflict predicate with the default 5 s window.
pub fn expected_conflict(a: &VehicleRecord, b: &VehicleRecord, window: f64) -> bool {
    let (ha, hb) = (heading_index(&a.direction), heading_index(&b.direction));
    let ta = arrival_s(a.speed, a.distance_to_intersection);
    let tb = arrival_s(b.speed, b.distance_to_intersection);
    let crossing = if ha == hb {
        false
    } else if (ha + 2) % 4 == hb {
        turn_of(&a.direction, &a.destination) == Some(Turn::Left)
            || turn_of(&b.direction, &b.destination) == Some(Turn::Left)
    } else {
        true
    };
    crossing && (ta - tb).abs() <= window
}

pub fn record(id: &str, lane: u8, speed: f64, dist: f64, dir: &str, dest: &str) -> VehicleRecord {
    VehicleRecord {
        vehicle_id: id.into(),
        lane: LaneField::Text(lane.to_string()),
        speed,
        distance_to_intersection: dist,
        direction: dir.into(),
        destination: dest.into(),
    }
}

/// A valid vehicle record for the stock layout; `id` is filled in by the caller.
pub fn arb_record() -> impl Strategy<Value = VehicleRecord> {
    (0usize..8, any::<prop::sample::Index>(), 5.0f64..120.0, 1.0f64..600.0).prop_map(|(lane_ix, dest_ix, speed, dist)| {
        let (lane, dir, dests) = LANE_TABLE[lane_ix];
        let dest = dests[dest_ix.index(dests.len())];
        record("V0", lane, speed, dist, dir, dest)
    })
}

/// 1..=max records with distinct ids.
pub fn arb_records(max: usize) -> impl Strategy<Value = Vec<VehicleRecord>> {
    prop::collection::vec(arb_record(), 1..=max).prop_map(|mut rs| {
        for (i, r) in rs.iter_mut().enumerate() {
            r.vehicle_id = format!("V{}", 1000 + i * 7);
        }
        rs
    })
}
