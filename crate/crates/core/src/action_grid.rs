//! The 44 aim offsets: 11 lateral skews by 4 vertical skews around the
//! opponent's center.

use crate::geometry::Vec3;
use thiserror::Error;

pub const LATERAL_STEPS: usize = 11;
pub const VERTICAL_STEPS: usize = 4;
pub const NUM_ACTIONS: usize = LATERAL_STEPS * VERTICAL_STEPS;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActionError {
    #[error("action id {0} out of range 0..44")]
    InvalidId(usize),
    #[error("grid index ({x}, {z}) out of range")]
    InvalidGrid { x: usize, z: usize },
    #[error("bot and opponent share a horizontal position")]
    CoincidentPositions,
}

/// One aim action; `id = z_index * 11 + x_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AimAction(u8);

impl AimAction {
    /// Dead-center aim.
    pub const CENTER: AimAction = AimAction(5);

    pub fn new(id: usize) -> Result<Self, ActionError> {
        if id < NUM_ACTIONS {
            Ok(AimAction(id as u8))
        } else {
            Err(ActionError::InvalidId(id))
        }
    }

    pub fn from_grid(x_index: usize, z_index: usize) -> Result<Self, ActionError> {
        if x_index < LATERAL_STEPS && z_index < VERTICAL_STEPS {
            Ok(AimAction((z_index * LATERAL_STEPS + x_index) as u8))
        } else {
            Err(ActionError::InvalidGrid { x: x_index, z: z_index })
        }
    }

    pub fn id(self) -> usize {
        self.0 as usize
    }

    pub fn x_index(self) -> usize {
        self.id() % LATERAL_STEPS
    }

    pub fn z_index(self) -> usize {
        self.id() / LATERAL_STEPS
    }

    pub fn all() -> impl Iterator<Item = AimAction> {
        (0..NUM_ACTIONS as u8).map(AimAction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AimOffset {
    /// Lateral skew, UU; positive is to the opponent's right as the bot sees it.
    pub dx: f64,
    /// Vertical skew above the opponent's center, UU.
    pub dz: f64,
}

/// Offset magnitudes for each grid column and row.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionGrid {
    pub lateral: [f64; LATERAL_STEPS],
    pub vertical: [f64; VERTICAL_STEPS],
}

impl Default for ActionGrid {
    fn default() -> Self {
        let mut lateral = [0.0; LATERAL_STEPS];
        for (i, v) in lateral.iter_mut().enumerate() {
            *v = -200.0 + 40.0 * i as f64;
        }
        Self { lateral, vertical: [0.0, 20.0, 40.0, 55.0] }
    }
}

impl ActionGrid {
    pub fn offset(&self, action: AimAction) -> AimOffset {
        AimOffset { dx: self.lateral[action.x_index()], dz: self.vertical[action.z_index()] }
    }

    /// World-space point to shoot at: the opponent center shifted by `dz`
    /// upward and by `dx` along the horizontal perpendicular of the bot's
    /// line of sight.
    pub fn aim_point(
        &self,
        opponent_center: Vec3,
        bot_position: Vec3,
        action: AimAction,
    ) -> Result<Vec3, ActionError> {
        let forward = (opponent_center - bot_position)
            .horizontal()
            .normalized()
            .ok_or(ActionError::CoincidentPositions)?;
        let off = self.offset(action);
        Ok(opponent_center + forward.right_of() * off.dx + Vec3::new(0.0, 0.0, off.dz))
    }
}
