//! Four-leg intersection topology.
//!
//! A [`Direction`] is the compass heading of travel: a northbound vehicle
//! enters from the south leg and, going straight, leaves on the north leg.
//! Egress lanes `A..H` each sit on one leg; the leg a vehicle leaves on,
//! relative to its heading, decides whether the movement is a through
//! movement, a left turn or a right turn.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::North, Direction::East, Direction::South, Direction::West];

    pub fn opposite(self) -> Direction {
        self.rotate_cw().rotate_cw()
    }

    /// Quarter turn clockwise: north → east → south → west → north.
    pub fn rotate_cw(self) -> Direction {
        match self {
            Direction::North => Direction::East,
            Direction::East => Direction::South,
            Direction::South => Direction::West,
            Direction::West => Direction::North,
        }
    }

    /// Quarter turn counter-clockwise: north → west → south → east → north.
    pub fn rotate_ccw(self) -> Direction {
        self.opposite().rotate_cw()
    }

    pub fn is_perpendicular(self, other: Direction) -> bool {
        other == self.rotate_cw() || other == self.rotate_ccw()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::North => "north",
            Direction::East => "east",
            Direction::South => "south",
            Direction::West => "west",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "north" => Ok(Direction::North),
            "east" => Ok(Direction::East),
            "south" => Ok(Direction::South),
            "west" => Ok(Direction::West),
            other => Err(format!("unknown direction {other:?}")),
        }
    }
}

/// Approach lane number, 1 through 8.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LaneId(u8);

impl LaneId {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 8;

    pub fn new(id: u8) -> Option<LaneId> {
        (Self::MIN..=Self::MAX).contains(&id).then_some(LaneId(id))
    }

    pub fn all() -> impl Iterator<Item = LaneId> {
        (Self::MIN..=Self::MAX).map(LaneId)
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Lanes 1–2 carry northbound traffic, 3–4 eastbound, 5–6 southbound, 7–8 westbound.
    pub fn bound_direction(self) -> Direction {
        Direction::ALL[usize::from((self.0 - 1) / 2)]
    }

    /// Odd lanes allow through and right; even lanes allow through and left.
    pub fn permits(self, movement: Movement) -> bool {
        match movement {
            Movement::Through => true,
            Movement::Right => self.0 % 2 == 1,
            Movement::Left => self.0 % 2 == 0,
        }
    }
}

impl fmt::Display for LaneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Egress {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
}

impl Egress {
    pub const ALL: [Egress; 8] = [
        Egress::A,
        Egress::B,
        Egress::C,
        Egress::D,
        Egress::E,
        Egress::F,
        Egress::G,
        Egress::H,
    ];

    pub fn as_char(self) -> char {
        (b'A' + self as u8) as char
    }

    /// Leg assignment of the canonical intersection.
    pub fn default_leg(self) -> Direction {
        match self {
            Egress::E | Egress::F => Direction::North,
            Egress::G | Egress::H => Direction::East,
            Egress::A | Egress::B => Direction::South,
            Egress::C | Egress::D => Direction::West,
        }
    }
}

impl fmt::Display for Egress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for Egress {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c @ 'A'..='H'), None) => Ok(Egress::ALL[(c as u8 - b'A') as usize]),
            _ => Err(format!("unknown egress {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Movement {
    Through,
    Left,
    Right,
}

impl Movement {
    pub fn as_str(self) -> &'static str {
        match self {
            Movement::Through => "through",
            Movement::Left => "left",
            Movement::Right => "right",
        }
    }
}

impl fmt::Display for Movement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LayoutError {
    #[error("malformed layout document at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("lane id {0} is outside 1..8")]
    LaneOutOfRange(i64),
    #[error("lane {0} is listed more than once")]
    DuplicateLane(LaneId),
    #[error("lane {0} is missing from the layout")]
    MissingLane(LaneId),
    #[error("lane {lane} must carry {expected} traffic, found {found}")]
    DirectionMismatch { lane: LaneId, expected: Direction, found: Direction },
    #[error("lane {0} has no destinations")]
    EmptyDestinations(LaneId),
    #[error("lane {lane}: unknown destination {letter:?}")]
    UnknownDestination { lane: LaneId, letter: String },
    #[error("lane {lane}: destination {egress} listed twice")]
    DuplicateDestination { lane: LaneId, egress: Egress },
    #[error("lane {lane}: destination {egress} is on its own entry leg (u-turn)")]
    OwnLegDestination { lane: LaneId, egress: Egress },
    #[error("lane {lane}: {movement} movement to {egress} is not allowed on this lane")]
    MovementNotPermitted { lane: LaneId, egress: Egress, movement: Movement },
    #[error("egress map: {0}")]
    EgressMap(String),
    #[error("unknown lane {0}")]
    UnknownLane(u8),
    #[error("unreachable movement: {direction} traffic cannot exit at {egress}")]
    UnreachableMovement { direction: Direction, egress: Egress },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct LaneSpec {
    direction: Direction,
    destinations: Vec<Egress>,
}

/// Lane bindings, per-lane reachable egress lists and the egress→leg map.
///
/// Immutable once built; every constructor validates the topology invariants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionLayout {
    lanes: [LaneSpec; 8],
    egress_legs: [Direction; 8],
}

const DEFAULT_LANES: [&[Egress]; 8] = {
    use Egress::*;
    [&[F, H], &[E, D, C], &[H, B], &[G, E, F], &[B, D], &[A, G, H], &[D, F], &[B, C, A]]
};

pub fn default_layout() -> IntersectionLayout {
    IntersectionLayout::default()
}

impl Default for IntersectionLayout {
    fn default() -> Self {
        let lanes = std::array::from_fn(|i| LaneSpec {
            direction: LaneId(i as u8 + 1).bound_direction(),
            destinations: DEFAULT_LANES[i].to_vec(),
        });
        IntersectionLayout { lanes, egress_legs: Egress::ALL.map(Egress::default_leg) }
    }
}

impl IntersectionLayout {
    /// Builds a layout from per-lane destination lists using the canonical leg map.
    pub fn from_lanes(lanes: [Vec<Egress>; 8]) -> Result<IntersectionLayout, LayoutError> {
        Self::build(lanes, Egress::ALL.map(Egress::default_leg))
    }

    fn build(lanes: [Vec<Egress>; 8], egress_legs: [Direction; 8]) -> Result<IntersectionLayout, LayoutError> {
        let mut i = 0;
        let lanes = lanes.map(|destinations| {
            i += 1;
            LaneSpec { direction: LaneId(i).bound_direction(), destinations }
        });
        let layout = IntersectionLayout { lanes, egress_legs };
        layout.validate()?;
        Ok(layout)
    }

    fn validate(&self) -> Result<(), LayoutError> {
        for lane in LaneId::all() {
            let spec = self.spec(lane);
            if spec.direction != lane.bound_direction() {
                return Err(LayoutError::DirectionMismatch {
                    lane,
                    expected: lane.bound_direction(),
                    found: spec.direction,
                });
            }
            if spec.destinations.is_empty() {
                return Err(LayoutError::EmptyDestinations(lane));
            }
            for (k, &egress) in spec.destinations.iter().enumerate() {
                if spec.destinations[..k].contains(&egress) {
                    return Err(LayoutError::DuplicateDestination { lane, egress });
                }
                match self.classify_movement(spec.direction, egress) {
                    Err(_) => return Err(LayoutError::OwnLegDestination { lane, egress }),
                    Ok(movement) if !lane.permits(movement) => {
                        return Err(LayoutError::MovementNotPermitted { lane, egress, movement })
                    }
                    Ok(_) => {}
                }
            }
        }
        Ok(())
    }

    fn spec(&self, lane: LaneId) -> &LaneSpec {
        &self.lanes[usize::from(lane.0 - 1)]
    }

    pub fn lane_direction(&self, lane: LaneId) -> Direction {
        self.spec(lane).direction
    }

    /// Reachable egress lanes, in configured order.
    pub fn destinations(&self, lane: LaneId) -> &[Egress] {
        &self.spec(lane).destinations
    }

    pub fn destinations_for(&self, lane: u8) -> Result<&[Egress], LayoutError> {
        let lane = LaneId::new(lane).ok_or(LayoutError::UnknownLane(lane))?;
        Ok(self.destinations(lane))
    }

    pub fn lane_permits(&self, lane: LaneId, destination: Egress) -> bool {
        self.destinations(lane).contains(&destination)
    }

    /// Lanes bound to `direction`, ascending.
    pub fn lanes_for(&self, direction: Direction) -> impl Iterator<Item = LaneId> + '_ {
        LaneId::all().filter(move |&l| self.lane_direction(l) == direction)
    }

    pub fn egress_leg(&self, egress: Egress) -> Direction {
        self.egress_legs[egress as usize]
    }

    pub fn classify_movement(&self, direction: Direction, destination: Egress) -> Result<Movement, LayoutError> {
        let leg = self.egress_leg(destination);
        if leg == direction {
            Ok(Movement::Through)
        } else if leg == direction.rotate_ccw() {
            Ok(Movement::Left)
        } else if leg == direction.rotate_cw() {
            Ok(Movement::Right)
        } else {
            Err(LayoutError::UnreachableMovement { direction, egress: destination })
        }
    }

    pub fn to_document(&self) -> LayoutDocument {
        let lanes = LaneId::all()
            .map(|lane| LaneRecord {
                id: i64::from(lane.0),
                direction: self.lane_direction(lane),
                destinations: self.destinations(lane).iter().map(|e| e.to_string()).collect(),
            })
            .collect();
        let default_legs = Egress::ALL.map(Egress::default_leg);
        let egress = (self.egress_legs != default_legs)
            .then(|| Egress::ALL.iter().map(|&e| (e.to_string(), self.egress_leg(e))).collect());
        LayoutDocument { lanes, egress }
    }

    pub fn from_document(doc: LayoutDocument) -> Result<IntersectionLayout, LayoutError> {
        let egress_legs = match doc.egress {
            None => Egress::ALL.map(Egress::default_leg),
            Some(map) => {
                let mut legs: [Option<Direction>; 8] = [None; 8];
                for (letter, leg) in map {
                    let e: Egress = letter.parse().map_err(LayoutError::EgressMap)?;
                    legs[e as usize] = Some(leg);
                }
                let mut out = [Direction::North; 8];
                for e in Egress::ALL {
                    out[e as usize] =
                        legs[e as usize].ok_or_else(|| LayoutError::EgressMap(format!("no leg given for {e}")))?;
                }
                out
            }
        };

        let mut slots: [Option<LaneSpec>; 8] = Default::default();
        for record in doc.lanes {
            let lane = u8::try_from(record.id)
                .ok()
                .and_then(LaneId::new)
                .ok_or(LayoutError::LaneOutOfRange(record.id))?;
            let slot = &mut slots[usize::from(lane.0 - 1)];
            if slot.is_some() {
                return Err(LayoutError::DuplicateLane(lane));
            }
            let destinations = record
                .destinations
                .iter()
                .map(|letter| {
                    letter
                        .parse::<Egress>()
                        .map_err(|_| LayoutError::UnknownDestination { lane, letter: letter.clone() })
                })
                .collect::<Result<Vec<_>, _>>()?;
            *slot = Some(LaneSpec { direction: record.direction, destinations });
        }

        let mut lanes: [LaneSpec; 8] =
            std::array::from_fn(|_| LaneSpec { direction: Direction::North, destinations: Vec::new() });
        for lane in LaneId::all() {
            lanes[usize::from(lane.0 - 1)] = slots[usize::from(lane.0 - 1)].take().ok_or(LayoutError::MissingLane(lane))?;
        }
        let layout = IntersectionLayout { lanes, egress_legs };
        layout.validate()?;
        Ok(layout)
    }
}

/// Wire shape of a layout file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutDocument {
    pub lanes: Vec<LaneRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub egress: Option<BTreeMap<String, Direction>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaneRecord {
    pub id: i64,
    pub direction: Direction,
    pub destinations: Vec<String>,
}

pub fn parse_layout(text: &str) -> Result<IntersectionLayout, LayoutError> {
    let doc: LayoutDocument = serde_json::from_str(text).map_err(|e| LayoutError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    IntersectionLayout::from_document(doc)
}

pub fn emit_layout(layout: &IntersectionLayout) -> String {
    serde_json::to_string_pretty(&layout.to_document()).expect("layout document serializes")
}
