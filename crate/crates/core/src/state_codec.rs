//! Discretization of the nearest opponent's relative motion, facing and range
//! into one of 37 x 8 x 4 = 1184 table states.
//!
//! Velocity buckets: bucket 0 is stationary; buckets 1..=36 encode a
//! forward/backward component and a left/right component, each at one of
//! three speed levels:
//!
//! ```text
//! bucket = 1 + longitudinal * 6 + lateral
//! longitudinal = {F: 0, B: 1} * 3 + (level - 1)
//! lateral      = {L: 0, R: 1} * 3 + (level - 1)
//! ```

use thiserror::Error;

pub const VELOCITY_BUCKETS: usize = 37;
pub const ROTATION_SECTORS: usize = 8;
pub const DISTANCE_BANDS: usize = 4;
pub const NUM_STATES: usize = VELOCITY_BUCKETS * ROTATION_SECTORS * DISTANCE_BANDS;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("facing angle {0} outside (-180, 180]")]
    AngleOutOfRange(f64),
    #[error("negative distance {0}")]
    NegativeDistance(f64),
    #[error("{what} component {value} out of range")]
    ComponentOutOfRange { what: &'static str, value: usize },
}

/// The opponent as seen from the learner, in the learner's view frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeObservation {
    /// Speed along the learner's facing axis, UU/s (positive = away from the learner).
    pub vel_forward: f64,
    /// Speed across the learner's facing axis, UU/s (positive = to the learner's right).
    pub vel_lateral: f64,
    /// Opponent facing relative to the learner's heading, degrees in (-180, 180].
    pub facing_angle: f64,
    /// Straight-line range, UU.
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Longitudinal {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lateral {
    Left,
    Right,
}

/// Speed level 1..=3 of a single motion axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpeedLevel(u8);

impl SpeedLevel {
    pub fn new(level: u8) -> Option<Self> {
        (1..=3).contains(&level).then_some(Self(level))
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VelocityBucket(u8);

impl VelocityBucket {
    pub const STATIONARY: VelocityBucket = VelocityBucket(0);

    pub fn moving(
        longitudinal: Longitudinal,
        long_level: SpeedLevel,
        lateral: Lateral,
        lat_level: SpeedLevel,
    ) -> Self {
        let l = match longitudinal {
            Longitudinal::Forward => 0,
            Longitudinal::Backward => 3,
        } + long_level.0
            - 1;
        let r = match lateral {
            Lateral::Left => 0,
            Lateral::Right => 3,
        } + lat_level.0
            - 1;
        VelocityBucket(1 + l * 6 + r)
    }

    pub fn from_index(index: usize) -> Result<Self, CodecError> {
        if index < VELOCITY_BUCKETS {
            Ok(VelocityBucket(index as u8))
        } else {
            Err(CodecError::ComponentOutOfRange { what: "velocity", value: index })
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// `None` for the stationary bucket.
    pub fn components(self) -> Option<(Longitudinal, SpeedLevel, Lateral, SpeedLevel)> {
        if self.0 == 0 {
            return None;
        }
        let k = self.0 - 1;
        let (l, r) = (k / 6, k % 6);
        let long = if l < 3 { Longitudinal::Forward } else { Longitudinal::Backward };
        let lat = if r < 3 { Lateral::Left } else { Lateral::Right };
        Some((long, SpeedLevel(l % 3 + 1), lat, SpeedLevel(r % 3 + 1)))
    }

    /// Short label such as `F2/R1`, or `S` for stationary.
    pub fn label(self) -> String {
        match self.components() {
            None => "S".to_string(),
            Some((long, ll, lat, rl)) => {
                let f = if long == Longitudinal::Forward { 'F' } else { 'B' };
                let s = if lat == Lateral::Left { 'L' } else { 'R' };
                format!("{f}{}/{s}{}", ll.0, rl.0)
            }
        }
    }
}

/// Facing sectors, ordered left to right around the learner's view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RotationSector {
    BackLeft = 0,
    FrontLeft3 = 1,
    FrontLeft2 = 2,
    FrontLeft1 = 3,
    FrontRight1 = 4,
    FrontRight2 = 5,
    FrontRight3 = 6,
    BackRight = 7,
}

impl RotationSector {
    pub const ALL: [RotationSector; ROTATION_SECTORS] = [
        RotationSector::BackLeft,
        RotationSector::FrontLeft3,
        RotationSector::FrontLeft2,
        RotationSector::FrontLeft1,
        RotationSector::FrontRight1,
        RotationSector::FrontRight2,
        RotationSector::FrontRight3,
        RotationSector::BackRight,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DistanceBand {
    Close = 0,
    Regular = 1,
    Medium = 2,
    Far = 3,
}

impl DistanceBand {
    pub const ALL: [DistanceBand; DISTANCE_BANDS] =
        [DistanceBand::Close, DistanceBand::Regular, DistanceBand::Medium, DistanceBand::Far];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// A flat state index in `[0, 1184)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateKey(u16);

impl StateKey {
    pub fn from_index(index: usize) -> Result<Self, CodecError> {
        if index < NUM_STATES {
            Ok(StateKey(index as u16))
        } else {
            Err(CodecError::ComponentOutOfRange { what: "state", value: index })
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn velocity_bucket(self) -> VelocityBucket {
        VelocityBucket((self.index() / (ROTATION_SECTORS * DISTANCE_BANDS)) as u8)
    }

    pub fn rotation_sector(self) -> RotationSector {
        RotationSector::ALL[(self.index() / DISTANCE_BANDS) % ROTATION_SECTORS]
    }

    pub fn distance_band(self) -> DistanceBand {
        DistanceBand::ALL[self.index() % DISTANCE_BANDS]
    }

    pub fn decompose(self) -> (usize, usize, usize) {
        (
            self.velocity_bucket().index(),
            self.rotation_sector().index(),
            self.distance_band().index(),
        )
    }
}

/// Builds a state from raw component ordinals.
pub fn compose_state(
    velocity_bucket: usize,
    rotation_sector: usize,
    distance_band: usize,
) -> Result<StateKey, CodecError> {
    if velocity_bucket >= VELOCITY_BUCKETS {
        return Err(CodecError::ComponentOutOfRange { what: "velocity", value: velocity_bucket });
    }
    if rotation_sector >= ROTATION_SECTORS {
        return Err(CodecError::ComponentOutOfRange { what: "rotation", value: rotation_sector });
    }
    if distance_band >= DISTANCE_BANDS {
        return Err(CodecError::ComponentOutOfRange { what: "distance", value: distance_band });
    }
    let index = (velocity_bucket * ROTATION_SECTORS + rotation_sector) * DISTANCE_BANDS + distance_band;
    Ok(StateKey(index as u16))
}

/// Discretization thresholds. Defaults follow the Training Day calibration;
/// distance edges may be overridden per map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateEncoder {
    /// Below this max-axis speed (UU/s) the opponent counts as stationary.
    pub stationary_threshold: f64,
    /// Upper edges of speed levels 1 and 2, UU/s.
    pub speed_edges: [f64; 2],
    /// Upper edges of the Close, Regular and Medium bands, UU.
    pub distance_edges: [f64; 3],
}

impl Default for StateEncoder {
    fn default() -> Self {
        Self {
            stationary_threshold: 10.0,
            speed_edges: [150.0, 300.0],
            distance_edges: [500.0, 1000.0, 1500.0],
        }
    }
}

impl StateEncoder {
    fn speed_level(&self, speed: f64) -> SpeedLevel {
        let s = speed.abs();
        if s < self.speed_edges[0] {
            SpeedLevel(1)
        } else if s < self.speed_edges[1] {
            SpeedLevel(2)
        } else {
            SpeedLevel(3)
        }
    }

    pub fn encode_velocity(&self, vel_forward: f64, vel_lateral: f64) -> Result<VelocityBucket, CodecError> {
        if !vel_forward.is_finite() || !vel_lateral.is_finite() {
            return Err(CodecError::NonFinite("velocity"));
        }
        if vel_forward.abs().max(vel_lateral.abs()) < self.stationary_threshold {
            return Ok(VelocityBucket::STATIONARY);
        }
        let long = if vel_forward >= 0.0 { Longitudinal::Forward } else { Longitudinal::Backward };
        let lat = if vel_lateral >= 0.0 { Lateral::Right } else { Lateral::Left };
        Ok(VelocityBucket::moving(
            long,
            self.speed_level(vel_forward),
            lat,
            self.speed_level(vel_lateral),
        ))
    }

    pub fn encode_rotation(&self, facing_angle: f64) -> Result<RotationSector, CodecError> {
        if !facing_angle.is_finite() {
            return Err(CodecError::NonFinite("facing angle"));
        }
        if facing_angle <= -180.0 || facing_angle > 180.0 {
            return Err(CodecError::AngleOutOfRange(facing_angle));
        }
        use RotationSector::*;
        let sector = match facing_angle {
            a if a < -90.0 => BackLeft,
            a if a < -60.0 => FrontLeft3,
            a if a < -30.0 => FrontLeft2,
            a if a < 0.0 => FrontLeft1,
            a if a < 30.0 => FrontRight1,
            a if a < 60.0 => FrontRight2,
            a if a < 90.0 => FrontRight3,
            _ => BackRight,
        };
        Ok(sector)
    }

    pub fn encode_distance(&self, distance: f64) -> Result<DistanceBand, CodecError> {
        if distance.is_nan() {
            return Err(CodecError::NonFinite("distance"));
        }
        if distance < 0.0 {
            return Err(CodecError::NegativeDistance(distance));
        }
        let [close, regular, medium] = self.distance_edges;
        Ok(if distance < close {
            DistanceBand::Close
        } else if distance < regular {
            DistanceBand::Regular
        } else if distance < medium {
            DistanceBand::Medium
        } else {
            DistanceBand::Far
        })
    }

    pub fn encode(&self, obs: &RelativeObservation) -> Result<StateKey, CodecError> {
        let v = self.encode_velocity(obs.vel_forward, obs.vel_lateral)?;
        let r = self.encode_rotation(obs.facing_angle)?;
        let d = self.encode_distance(obs.distance)?;
        compose_state(v.index(), r.index(), d.index())
    }
}
