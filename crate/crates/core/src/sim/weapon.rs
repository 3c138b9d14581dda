use super::raycast::SpreadSample;
use rand::Rng;
use rand_distr::StandardNormal;

/// The assault rifle's primary fire.
#[derive(Debug, Clone, PartialEq)]
pub struct WeaponModel {
    /// Bullets fired per logic tick, one per physics sub-step.
    pub bullets_per_tick: u32,
    /// Standard deviation of yaw and pitch spread, degrees.
    pub spread_stddev: f64,
    /// Upward drift added per consecutive firing tick, degrees.
    pub recoil_drift: f64,
    pub recoil_cap: f64,
    pub damage_per_bullet: u32,
    /// Logic ticks between a damaging shot and its damage event.
    pub registration_delay: u64,
}

impl Default for WeaponModel {
    fn default() -> Self {
        Self {
            bullets_per_tick: 4,
            spread_stddev: 1.5,
            recoil_drift: 0.3,
            recoil_cap: 3.0,
            damage_per_bullet: 8,
            registration_delay: 1,
        }
    }
}

impl WeaponModel {
    pub fn validate(&self) -> Result<(), String> {
        if self.bullets_per_tick == 0 {
            return Err("bullets_per_tick must be at least 1".into());
        }
        for (name, v) in [
            ("spread_stddev", self.spread_stddev),
            ("recoil_drift", self.recoil_drift),
            ("recoil_cap", self.recoil_cap),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{name} must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// Recoil pitch after `consecutive` uninterrupted firing ticks.
    pub fn recoil_after(&self, consecutive: u32) -> f64 {
        (self.recoil_drift * consecutive as f64).min(self.recoil_cap)
    }

    /// Draws two standard normals (yaw first) regardless of the spread width.
    pub fn sample_spread<R: Rng + ?Sized>(&self, rng: &mut R) -> SpreadSample {
        let yaw: f64 = rng.sample(StandardNormal);
        let pitch: f64 = rng.sample(StandardNormal);
        SpreadSample { yaw: yaw * self.spread_stddev, pitch: pitch * self.spread_stddev }
    }
}
