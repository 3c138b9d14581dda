use super::opponent::{valid_level, OpponentBrain};
use super::raycast::{hit_test, Aabb, Bounds, Hitbox};
use super::weapon::WeaponModel;
use crate::action_grid::{ActionGrid, AimAction};
use crate::geometry::{heading_of, normalize_angle, Vec3};
use crate::state_codec::RelativeObservation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;
use thiserror::Error;

pub const TICK_SECONDS: f64 = 0.25;
pub const PHYSICS_SUBSTEPS: u32 = 4;
pub const SUBSTEP_SECONDS: f64 = TICK_SECONDS / PHYSICS_SUBSTEPS as f64;
pub const EYE_HEIGHT: f64 = 50.0;

/// RNG stream reserved for the world; learners use other streams.
pub const WORLD_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("action id {0} out of range")]
    InvalidAction(usize),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("{0:?} is alive and cannot respawn")]
    RespawnLiving(AvatarId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AvatarId {
    Learner = 0,
    Opponent = 1,
}

impl AvatarId {
    pub fn code(self) -> u32 {
        self as u32
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(AvatarId::Learner),
            1 => Some(AvatarId::Opponent),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Avatar {
    /// Body center, UU.
    pub position: Vec3,
    pub velocity: Vec3,
    /// Compass heading, degrees.
    pub facing: f64,
    pub health: u32,
    pub half_width: f64,
    pub half_height: f64,
    pub max_speed: f64,
    /// Incremented on every respawn.
    pub life: u32,
}

impl Avatar {
    pub fn new(position: Vec3, health: u32) -> Self {
        Self {
            position,
            velocity: Vec3::ZERO,
            facing: 0.0,
            health,
            half_width: 25.0,
            half_height: 50.0,
            max_speed: 440.0,
            life: 0,
        }
    }

    pub fn alive(&self) -> bool {
        self.health > 0
    }

    pub fn hitbox(&self) -> Hitbox {
        Hitbox { center: self.position, half_width: self.half_width, half_height: self.half_height }
    }
}

/// A square map with a central pillar that blocks sight, four spawn points
/// on an inner ring and eight patrol waypoints on an outer ring.
#[derive(Debug, Clone, PartialEq)]
pub struct Arena {
    pub bounds: Bounds,
    pub spawn_points: Vec<Vec3>,
    pub waypoints: Vec<Vec3>,
    pub pillars: Vec<Aabb>,
}

impl Arena {
    pub fn center(&self) -> Vec3 {
        Vec3::new(
            0.5 * (self.bounds.min_x + self.bounds.max_x),
            0.5 * (self.bounds.min_y + self.bounds.max_y),
            EYE_HEIGHT,
        )
    }

    pub fn line_of_sight(&self, a: Vec3, b: Vec3) -> bool {
        !self.pillars.iter().any(|p| p.blocks_segment(a, b))
    }

    fn ring(center: Vec3, radius: f64, count: usize, offset_deg: f64) -> Vec<Vec3> {
        (0..count)
            .map(|i| {
                let a = (offset_deg + i as f64 * 360.0 / count as f64).to_radians();
                center + Vec3::new(radius * a.sin(), radius * a.cos(), 0.0)
            })
            .collect()
    }
}

impl Default for Arena {
    fn default() -> Self {
        let bounds = Bounds { min_x: 0.0, min_y: 0.0, max_x: 2000.0, max_y: 2000.0 };
        let c = Vec3::new(1000.0, 1000.0, EYE_HEIGHT);
        Self {
            bounds,
            spawn_points: Arena::ring(c, 450.0, 4, 45.0),
            waypoints: Arena::ring(c, 800.0, 8, 0.0),
            pillars: vec![Aabb::new(Vec3::new(800.0, 800.0, 0.0), Vec3::new(1200.0, 1200.0, 300.0))],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub opponent_level: u8,
    pub weapon: WeaponModel,
    pub arena: Arena,
    pub grid: ActionGrid,
    pub max_health: u32,
    /// Damage dealt to the learner by one successful return-fire tick.
    pub opponent_damage: u32,
    pub return_fire: bool,
    /// Leg speeds, one per observable speed level, UU/s.
    pub opponent_speeds: [f64; 3],
    /// Learner strafe speed around its orbit, UU/s.
    pub learner_speed: f64,
    /// The learner reverses its strafe direction every this many ticks.
    pub learner_reverse_ticks: u64,
    /// Respawns avoid spawn points closer than this to the other avatar.
    pub min_spawn_separation: f64,
    /// Closer than this (horizontally) the opponent cannot be targeted.
    pub min_target_distance: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            opponent_level: 3,
            weapon: WeaponModel::default(),
            arena: Arena::default(),
            grid: ActionGrid::default(),
            max_health: 100,
            opponent_damage: 20,
            return_fire: true,
            opponent_speeds: [100.0, 220.0, 400.0],
            learner_speed: 120.0,
            learner_reverse_ticks: 24,
            min_spawn_separation: 300.0,
            min_target_distance: 50.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.to_string()));
        if !valid_level(self.opponent_level) {
            return bad("opponent level must be 1..=5");
        }
        self.weapon.validate().map_err(SimError::InvalidConfig)?;
        if self.max_health == 0 {
            return bad("max_health must be positive");
        }
        if self.arena.spawn_points.is_empty() || self.arena.waypoints.is_empty() {
            return bad("arena needs spawn points and waypoints");
        }
        if !self.arena.spawn_points.iter().all(|p| self.arena.bounds.contains(*p)) {
            return bad("spawn point outside arena bounds");
        }
        if self.opponent_speeds.iter().any(|&s| !(0.0..=440.0).contains(&s)) {
            return bad("opponent speeds must be within [0, 440]");
        }
        if !(0.0..=440.0).contains(&self.learner_speed) {
            return bad("learner speed must be within [0, 440]");
        }
        Ok(())
    }
}

/// Damage from one tick's burst, observable at `registered_tick`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DamageEvent {
    pub fired_tick: u64,
    pub registered_tick: u64,
    pub victim: AvatarId,
    pub bullets: u32,
    pub amount: u32,
    victim_life: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorldEvent {
    Damage(DamageEvent),
    Kill { victim: AvatarId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LearnerCommand {
    pub shoot: bool,
    pub action: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub tick: u64,
    pub visible: bool,
    pub relative: RelativeObservation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickReport {
    pub tick: u64,
    /// Whether the learner's weapon actually fired.
    pub fired: bool,
    pub bullets_hit: u32,
    pub events: Vec<WorldEvent>,
    /// Observation at the start of the following tick.
    pub observation: Observation,
}

/// Kill/death bookkeeping from the learner's side.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tallies {
    pub kills: u64,
    pub deaths: u64,
    pub streak: u64,
    pub max_streak: u64,
    pub firing_ticks: u64,
}

#[derive(Debug, Clone, PartialEq)]
struct Orbit {
    radius: f64,
    angle: f64,
    clockwise: bool,
}

#[derive(Debug, Clone)]
pub struct World {
    cfg: SimConfig,
    rng: ChaCha8Rng,
    tick: u64,
    learner: Avatar,
    opponent: Avatar,
    brain: OpponentBrain,
    orbit: Orbit,
    pending: VecDeque<DamageEvent>,
    consecutive_fire: u32,
    tallies: Tallies,
}

impl World {
    pub fn new(cfg: SimConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(WORLD_STREAM);
        let spawns = &cfg.arena.spawn_points;
        let l = spawns[rng.random_range(0..spawns.len())];
        let far: Vec<Vec3> =
            spawns.iter().copied().filter(|p| p.distance(l) >= cfg.min_spawn_separation).collect();
        let o = if far.is_empty() { l } else { far[rng.random_range(0..far.len())] };
        let mut w = Self::assemble(cfg, rng, l, o);
        w.brain.on_spawn(o, &mut w.rng);
        Ok(w)
    }

    /// A world with both avatars placed by hand, for scripted scenarios.
    pub fn from_positions(cfg: SimConfig, learner: Vec3, opponent: Vec3) -> Result<Self, SimError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(WORLD_STREAM);
        let mut w = Self::assemble(cfg, rng, learner, opponent);
        w.brain.on_spawn(opponent, &mut w.rng);
        Ok(w)
    }

    fn assemble(cfg: SimConfig, rng: ChaCha8Rng, l: Vec3, o: Vec3) -> Self {
        let brain = OpponentBrain::new(cfg.opponent_level, cfg.arena.waypoints.clone(), cfg.opponent_speeds);
        let orbit = Self::orbit_from(&cfg.arena, l);
        Self {
            learner: Avatar::new(l, cfg.max_health),
            opponent: Avatar::new(o, cfg.max_health),
            cfg,
            rng,
            tick: 0,
            brain,
            orbit,
            pending: VecDeque::new(),
            consecutive_fire: 0,
            tallies: Tallies::default(),
        }
    }

    fn orbit_from(arena: &Arena, p: Vec3) -> Orbit {
        let rel = p - arena.center();
        Orbit { radius: rel.horizontal().length(), angle: heading_of(rel), clockwise: true }
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn tick_index(&self) -> u64 {
        self.tick
    }

    pub fn learner(&self) -> &Avatar {
        &self.learner
    }

    pub fn opponent(&self) -> &Avatar {
        &self.opponent
    }

    pub fn tallies(&self) -> Tallies {
        self.tallies
    }

    pub fn pending_events(&self) -> usize {
        self.pending.len()
    }

    /// Simulated seconds elapsed.
    pub fn clock(&self) -> f64 {
        self.tick as f64 * TICK_SECONDS
    }

    fn targetable(&self) -> bool {
        self.learner.alive()
            && self.opponent.alive()
            && (self.opponent.position - self.learner.position).horizontal().length() >= self.cfg.min_target_distance
            && self.cfg.arena.line_of_sight(self.learner.position, self.opponent.position)
    }

    pub fn observe(&self) -> Observation {
        if !self.targetable() {
            return Observation {
                tick: self.tick,
                visible: false,
                relative: RelativeObservation { vel_forward: 0.0, vel_lateral: 0.0, facing_angle: 0.0, distance: 0.0 },
            };
        }
        let to = self.opponent.position - self.learner.position;
        let forward = to.horizontal().normalized().expect("targetable implies separation");
        let right = forward.right_of();
        let v = self.opponent.velocity - self.learner.velocity;
        Observation {
            tick: self.tick,
            visible: true,
            relative: RelativeObservation {
                vel_forward: v.dot(forward),
                vel_lateral: v.dot(right),
                facing_angle: normalize_angle(self.opponent.facing - heading_of(forward)),
                distance: to.length(),
            },
        }
    }

    fn move_learner(&mut self, dt: f64) {
        let speed = self.cfg.learner_speed;
        if self.orbit.radius < 1.0 || speed == 0.0 {
            self.learner.velocity = Vec3::ZERO;
            return;
        }
        let sign = if self.orbit.clockwise { 1.0 } else { -1.0 };
        let omega = sign * speed / self.orbit.radius;
        self.orbit.angle += (omega * dt).to_degrees();
        let a = self.orbit.angle.to_radians();
        let c = self.cfg.arena.center();
        let before = self.learner.position;
        self.learner.position =
            Vec3::new(c.x + self.orbit.radius * a.sin(), c.y + self.orbit.radius * a.cos(), self.learner.position.z);
        self.learner.velocity = (self.learner.position - before) * (1.0 / dt);
        if let Some(dir) = self.learner.velocity.horizontal().normalized() {
            self.learner.facing = heading_of(dir);
        }
    }

    fn move_opponent(&mut self, dt: f64, track: Vec3) {
        if !self.opponent.alive() {
            self.opponent.velocity = Vec3::ZERO;
            return;
        }
        self.opponent.velocity = self.brain.step(&mut self.opponent.position, dt, &mut self.rng);
        debug_assert!(self.opponent.velocity.length() <= self.opponent.max_speed + 1e-9);
        let sees = self.cfg.arena.line_of_sight(self.opponent.position, track);
        let dir = if sees { (track - self.opponent.position).horizontal() } else { self.opponent.velocity };
        if let Some(d) = dir.horizontal().normalized() {
            self.opponent.facing = heading_of(d);
        }
    }

    /// Advances one logic tick.
    pub fn tick(&mut self, cmd: LearnerCommand) -> Result<TickReport, SimError> {
        let action = AimAction::new(cmd.action).map_err(|_| SimError::InvalidAction(cmd.action))?;
        let t = self.tick;
        let targetable = self.targetable();
        let shooting = cmd.shoot && targetable;

        let aim = if shooting {
            let p = self
                .cfg
                .grid
                .aim_point(self.opponent.position, self.learner.position, action)
                .expect("targetable implies separation");
            Some(p)
        } else {
            None
        };
        let recoil = if shooting { self.cfg.weapon.recoil_after(self.consecutive_fire) } else { 0.0 };
        if shooting {
            self.consecutive_fire += 1;
            self.tallies.firing_ticks += 1;
        } else {
            self.consecutive_fire = 0;
        }

        let opponent_fires = self.cfg.return_fire
            && targetable
            && self.brain.fires(self.learner.position.distance(self.opponent.position), &mut self.rng);

        // The view direction is fixed for the tick; bullets leave at the
        // start of each sub-step while both avatars keep moving.
        let mut bullets_hit = 0;
        let view = aim.map(|p| p - self.learner.position);
        for k in 0..PHYSICS_SUBSTEPS {
            if let Some(dir) = view {
                if k < self.cfg.weapon.bullets_per_tick {
                    let mut s = self.cfg.weapon.sample_spread(&mut self.rng);
                    s.pitch += recoil;
                    let origin = self.learner.position;
                    if hit_test(origin, origin + dir, s, &self.opponent.hitbox(), &self.cfg.arena.bounds) {
                        bullets_hit += 1;
                    }
                }
            }
            let track = self.learner.position;
            self.move_opponent(SUBSTEP_SECONDS, track);
            self.move_learner(SUBSTEP_SECONDS);
        }
        // Any bullets beyond one per sub-step leave with the last one.
        if let Some(dir) = view {
            for _ in PHYSICS_SUBSTEPS..self.cfg.weapon.bullets_per_tick {
                let mut s = self.cfg.weapon.sample_spread(&mut self.rng);
                s.pitch += recoil;
                let origin = self.learner.position;
                if hit_test(origin, origin + dir, s, &self.opponent.hitbox(), &self.cfg.arena.bounds) {
                    bullets_hit += 1;
                }
            }
        }

        if bullets_hit > 0 {
            self.pending.push_back(DamageEvent {
                fired_tick: t,
                registered_tick: t + self.cfg.weapon.registration_delay,
                victim: AvatarId::Opponent,
                bullets: bullets_hit,
                amount: bullets_hit * self.cfg.weapon.damage_per_bullet,
                victim_life: self.opponent.life,
            });
        }

        let mut events = Vec::new();
        while self.pending.front().is_some_and(|e| e.registered_tick <= t) {
            let ev = self.pending.pop_front().expect("front checked");
            if ev.victim_life != self.opponent.life || !self.opponent.alive() {
                continue;
            }
            self.opponent.health = self.opponent.health.saturating_sub(ev.amount);
            events.push(WorldEvent::Damage(ev));
            if !self.opponent.alive() {
                events.push(WorldEvent::Kill { victim: AvatarId::Opponent });
                self.respawn(AvatarId::Opponent)?;
            }
        }

        if opponent_fires && self.learner.alive() {
            let amount = self.cfg.opponent_damage;
            self.learner.health = self.learner.health.saturating_sub(amount);
            events.push(WorldEvent::Damage(DamageEvent {
                fired_tick: t,
                registered_tick: t,
                victim: AvatarId::Learner,
                bullets: 1,
                amount,
                victim_life: self.learner.life,
            }));
            if !self.learner.alive() {
                events.push(WorldEvent::Kill { victim: AvatarId::Learner });
                self.respawn(AvatarId::Learner)?;
            }
        }

        self.tick += 1;
        if self.cfg.learner_reverse_ticks > 0 && self.tick.is_multiple_of(self.cfg.learner_reverse_ticks) {
            self.orbit.clockwise = !self.orbit.clockwise;
        }
        Ok(TickReport { tick: t, fired: shooting, bullets_hit, events, observation: self.observe() })
    }

    /// Revives a dead avatar at a random spawn point away from the other one
    /// and updates the kill/death tallies.
    pub fn respawn(&mut self, who: AvatarId) -> Result<(), SimError> {
        let (me, other) = match who {
            AvatarId::Learner => (&self.learner, &self.opponent),
            AvatarId::Opponent => (&self.opponent, &self.learner),
        };
        if me.alive() {
            return Err(SimError::RespawnLiving(who));
        }
        let other_pos = other.position;
        let spawns = &self.cfg.arena.spawn_points;
        let far: Vec<Vec3> =
            spawns.iter().copied().filter(|p| p.distance(other_pos) >= self.cfg.min_spawn_separation).collect();
        let pool = if far.is_empty() { spawns.clone() } else { far };
        let at = pool[self.rng.random_range(0..pool.len())];

        let max_health = self.cfg.max_health;
        let revive = |a: &mut Avatar| {
            a.position = at;
            a.velocity = Vec3::ZERO;
            a.health = max_health;
            a.life += 1;
        };
        match who {
            AvatarId::Learner => {
                revive(&mut self.learner);
                self.orbit = Self::orbit_from(&self.cfg.arena, at);
                self.consecutive_fire = 0;
                self.tallies.deaths += 1;
                self.tallies.streak = 0;
            }
            AvatarId::Opponent => {
                revive(&mut self.opponent);
                self.brain.on_spawn(at, &mut self.rng);
                self.tallies.kills += 1;
                self.tallies.streak += 1;
                self.tallies.max_streak = self.tallies.max_streak.max(self.tallies.streak);
            }
        }
        Ok(())
    }

    /// Test hook: sets an avatar's health directly.
    pub fn set_health(&mut self, who: AvatarId, health: u32) {
        match who {
            AvatarId::Learner => self.learner.health = health,
            AvatarId::Opponent => self.opponent.health = health,
        }
    }
}
