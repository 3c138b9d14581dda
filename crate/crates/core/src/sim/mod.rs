//! Deterministic headless duel: the learner bot against one scripted
//! opponent, stepped in 0.25 s logic ticks of four physics sub-steps.

pub mod opponent;
pub mod raycast;
pub mod weapon;
pub mod world;

pub use opponent::{return_fire_probability, OpponentBrain};
pub use raycast::{hit_test, Aabb, Bounds, Hitbox, SpreadSample};
pub use weapon::WeaponModel;
pub use world::{
    Arena, Avatar, AvatarId, DamageEvent, LearnerCommand, Observation, SimConfig, SimError, Tallies, TickReport,
    World, WorldEvent, TICK_SECONDS,
};
