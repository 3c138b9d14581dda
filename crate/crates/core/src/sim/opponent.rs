//! Scripted fixed-strategy opponent: strafes between ring waypoints at a
//! speed drawn from the three observable speed bands, and returns fire with
//! a skill- and range-dependent probability.

use crate::geometry::Vec3;
use rand::Rng;

/// Per-tick return-fire hit chance at 500 UU or closer, indexed by level 1..=5.
pub const BASE_HIT_CHANCE: [f64; 5] = [0.05, 0.10, 0.15, 0.20, 0.25];

pub fn valid_level(level: u8) -> bool {
    (1..=5).contains(&level)
}

/// Chance that a level-`level` opponent damages the learner this tick.
pub fn return_fire_probability(level: u8, distance: f64) -> f64 {
    let base = BASE_HIT_CHANCE[(level.clamp(1, 5) - 1) as usize];
    base * (500.0 / distance).clamp(0.2, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpponentBrain {
    level: u8,
    waypoints: Vec<Vec3>,
    speeds: [f64; 3],
    target: usize,
    speed: f64,
}

impl OpponentBrain {
    pub fn new(level: u8, waypoints: Vec<Vec3>, speeds: [f64; 3]) -> Self {
        assert!(!waypoints.is_empty());
        Self { level, waypoints, speeds, target: 0, speed: speeds[0] }
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn target(&self) -> Vec3 {
        self.waypoints[self.target]
    }

    /// After a respawn: head for the closest waypoint.
    pub fn on_spawn<R: Rng + ?Sized>(&mut self, at: Vec3, rng: &mut R) {
        self.target = self
            .waypoints
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.distance(at).total_cmp(&b.1.distance(at)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.speed = self.speeds[rng.random_range(0..3)];
    }

    fn next_leg<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        // Hop one or two ring slots either way.
        let n = self.waypoints.len();
        let hop = [1, 2][rng.random_range(0..2)];
        self.target = if rng.random_bool(0.5) { (self.target + hop) % n } else { (self.target + n - hop % n) % n };
        self.speed = self.speeds[rng.random_range(0..3)];
    }

    /// Moves `position` for `dt` seconds and returns the resulting velocity.
    pub fn step<R: Rng + ?Sized>(&mut self, position: &mut Vec3, dt: f64, rng: &mut R) -> Vec3 {
        let start = *position;
        let mut budget = self.speed * dt;
        // At most two waypoint arrivals per sub-step.
        for _ in 0..3 {
            let to = self.target() - *position;
            let d = to.length();
            if d <= budget {
                *position = self.target();
                budget -= d;
                self.next_leg(rng);
                if budget <= 0.0 {
                    break;
                }
            } else {
                *position += to * (budget / d);
                break;
            }
        }
        (*position - start) * (1.0 / dt)
    }

    /// Rolls this tick's return fire.
    pub fn fires<R: Rng + ?Sized>(&self, distance: f64, rng: &mut R) -> bool {
        rng.random::<f64>() < return_fire_probability(self.level, distance)
    }
}
