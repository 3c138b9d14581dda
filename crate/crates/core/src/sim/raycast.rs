//! Hitscan rays against avatar hitboxes, and sight lines against pillars.

use crate::geometry::{heading_of, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    pub fn centered(center: Vec3, half: Vec3) -> Self {
        Self { min: center - half, max: center + half }
    }

    /// Slab test: parametric entry distance along `dir` within `[t_lo, t_hi]`.
    pub fn ray_entry(&self, origin: Vec3, dir: Vec3, t_lo: f64, t_hi: f64) -> Option<f64> {
        let mut t0 = t_lo;
        let mut t1 = t_hi;
        for (o, d, lo, hi) in [
            (origin.x, dir.x, self.min.x, self.max.x),
            (origin.y, dir.y, self.min.y, self.max.y),
            (origin.z, dir.z, self.min.z, self.max.z),
        ] {
            if d.abs() < 1e-15 {
                if o < lo || o > hi {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / d;
            let (mut a, mut b) = ((lo - o) * inv, (hi - o) * inv);
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }

    /// Whether the segment `a -> b` passes through the box.
    pub fn blocks_segment(&self, a: Vec3, b: Vec3) -> bool {
        self.ray_entry(a, b - a, 0.0, 1.0).is_some()
    }
}

/// Horizontal playing field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Bounds {
    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    /// Distance along `dir` at which a ray from an inside `origin` leaves the field.
    pub fn exit_distance(&self, origin: Vec3, dir: Vec3) -> f64 {
        let mut t = f64::INFINITY;
        for (o, d, lo, hi) in [
            (origin.x, dir.x, self.min_x, self.max_x),
            (origin.y, dir.y, self.min_y, self.max_y),
        ] {
            if d > 0.0 {
                t = t.min((hi - o) / d);
            } else if d < 0.0 {
                t = t.min((lo - o) / d);
            }
        }
        t
    }
}

/// Angular perturbation of one bullet, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpreadSample {
    /// Clockwise (rightward) yaw offset.
    pub yaw: f64,
    /// Upward pitch offset.
    pub pitch: f64,
}

/// Unit direction for a compass heading and an elevation, both in degrees.
pub fn direction_from_angles(heading_deg: f64, pitch_deg: f64) -> Vec3 {
    let (h, p) = (heading_deg.to_radians(), pitch_deg.to_radians());
    Vec3::new(p.cos() * h.sin(), p.cos() * h.cos(), p.sin())
}

/// An avatar's target area: a 50 x 100 rectangle through the body center,
/// squared up to the shooter's horizontal line of sight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hitbox {
    pub center: Vec3,
    pub half_width: f64,
    pub half_height: f64,
}

impl Hitbox {
    /// Distance along unit `dir` at which the ray crosses the rectangle, if it does.
    pub fn ray_entry(&self, origin: Vec3, dir: Vec3) -> Option<f64> {
        let normal = (self.center - origin).horizontal().normalized()?;
        let denom = dir.dot(normal);
        if denom <= 0.0 {
            return None;
        }
        let t = (self.center - origin).dot(normal) / denom;
        let p = origin + dir * t - self.center;
        let lateral = p.dot(normal.right_of());
        (lateral.abs() <= self.half_width && p.z.abs() <= self.half_height).then_some(t)
    }
}

/// Fires one ray from `origin` toward `aim_point` perturbed by `spread`.
/// Hits when it crosses `target` before leaving `bounds`.
pub fn hit_test(origin: Vec3, aim_point: Vec3, spread: SpreadSample, target: &Hitbox, bounds: &Bounds) -> bool {
    let to_aim = aim_point - origin;
    let flat = to_aim.horizontal().length();
    if flat == 0.0 && to_aim.z == 0.0 {
        return false;
    }
    let heading = heading_of(to_aim);
    let pitch = to_aim.z.atan2(flat).to_degrees();
    let dir = direction_from_angles(heading + spread.yaw, pitch + spread.pitch);
    let limit = bounds.exit_distance(origin, dir);
    target.ray_entry(origin, dir).is_some_and(|t| t <= limit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arena() -> Bounds {
        Bounds { min_x: -5000.0, min_y: -5000.0, max_x: 5000.0, max_y: 5000.0 }
    }

    fn avatar_box(c: Vec3) -> Hitbox {
        Hitbox { center: c, half_width: 25.0, half_height: 50.0 }
    }

    #[test]
    fn center_aim_hits_at_any_range() {
        let origin = Vec3::new(0.0, 0.0, 50.0);
        for d in [30.0, 100.0, 500.0, 1000.0, 4000.0] {
            let c = Vec3::new(0.0, d, 50.0);
            assert!(hit_test(origin, c, SpreadSample::default(), &avatar_box(c), &arena()), "{d}");
        }
    }

    #[test]
    fn lateral_offset_past_half_width_misses() {
        let origin = Vec3::new(0.0, 0.0, 50.0);
        let c = Vec3::new(0.0, 500.0, 50.0);
        let miss = Vec3::new(26.0, 500.0, 50.0);
        assert!(!hit_test(origin, miss, SpreadSample::default(), &avatar_box(c), &arena()));
        let graze = Vec3::new(24.0, 500.0, 50.0);
        assert!(hit_test(origin, graze, SpreadSample::default(), &avatar_box(c), &arena()));
        let wide = Vec3::new(200.0, 500.0, 50.0);
        assert!(!hit_test(origin, wide, SpreadSample::default(), &avatar_box(c), &arena()));
    }

    #[test]
    fn target_beyond_bounds_is_not_hit() {
        let origin = Vec3::new(0.0, 0.0, 50.0);
        let c = Vec3::new(0.0, 900.0, 50.0);
        let small = Bounds { min_x: -100.0, min_y: -100.0, max_x: 100.0, max_y: 800.0 };
        assert!(!hit_test(origin, c, SpreadSample::default(), &avatar_box(c), &small));
    }

    #[test]
    fn spread_rotates_the_ray() {
        let origin = Vec3::new(0.0, 0.0, 50.0);
        let c = Vec3::new(0.0, 1000.0, 50.0);
        // atan(25/1000) is about 1.432 degrees.
        let s = SpreadSample { yaw: 1.4, pitch: 0.0 };
        assert!(hit_test(origin, c, s, &avatar_box(c), &arena()));
        let s = SpreadSample { yaw: 1.45, pitch: 0.0 };
        assert!(!hit_test(origin, c, s, &avatar_box(c), &arena()));
        let s = SpreadSample { yaw: 0.0, pitch: -3.0 };
        assert!(!hit_test(origin, c, s, &avatar_box(c), &arena()));
    }

    #[test]
    fn hitbox_faces_the_shooter_from_any_bearing() {
        let c = Vec3::new(0.0, 0.0, 50.0);
        for bearing in [0.0, 30.0, 45.0, 133.0, 270.0] {
            let origin = c - crate::geometry::direction_of(bearing) * 600.0;
            let side = crate::geometry::direction_of(bearing).right_of();
            assert!(hit_test(origin, c + side * 24.0, SpreadSample::default(), &avatar_box(c), &arena()));
            assert!(!hit_test(origin, c + side * 26.0, SpreadSample::default(), &avatar_box(c), &arena()));
        }
    }

    #[test]
    fn segment_blocking() {
        let pillar = Aabb::new(Vec3::new(-10.0, -10.0, 0.0), Vec3::new(10.0, 10.0, 300.0));
        assert!(pillar.blocks_segment(Vec3::new(-50.0, 0.0, 50.0), Vec3::new(50.0, 0.0, 50.0)));
        assert!(!pillar.blocks_segment(Vec3::new(-50.0, 20.0, 50.0), Vec3::new(50.0, 20.0, 50.0)));
        assert!(!pillar.blocks_segment(Vec3::new(-50.0, 0.0, 50.0), Vec3::new(-20.0, 0.0, 50.0)));
    }
}
