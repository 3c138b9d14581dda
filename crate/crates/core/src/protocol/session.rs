//! Server side of one lock-step session.
//!
//! The client opens with `CFG`, answered by `OBS t=0`. Each `ACT t=n` must
//! echo the tick of the last `OBS`; the reply is zero or more `EVT` lines
//! followed by `OBS t=n+1`. `END` returns the final tallies and closes the
//! session. Anything else is answered with `ERR` and leaves the session as
//! it was.

use super::message::{parse, quantize, serialize, EventKind, Message};
use crate::sim::{LearnerCommand, Observation, SimConfig, World, WorldEvent};

#[derive(Debug)]
enum Phase {
    AwaitCfg,
    Running(Box<World>),
    Closed,
}

#[derive(Debug)]
pub struct SimSession {
    base: SimConfig,
    phase: Phase,
}

/// The `OBS` line for an observation, rounded to wire precision.
pub fn observation_message(obs: &Observation) -> Message {
    let r = obs.relative;
    Message::Obs {
        tick: obs.tick,
        visible: obs.visible,
        vf: quantize(r.vel_forward),
        vl: quantize(r.vel_lateral),
        rot: quantize(r.facing_angle),
        dist: quantize(r.distance),
    }
}

fn event_message(tick: u64, ev: &WorldEvent) -> Message {
    match ev {
        WorldEvent::Damage(d) => Message::Evt {
            tick,
            kind: EventKind::Dmg,
            victim: d.victim.code(),
            fired: Some(d.fired_tick),
            bullets: Some(d.bullets),
        },
        WorldEvent::Kill { victim } => {
            Message::Evt { tick, kind: EventKind::Kill, victim: victim.code(), fired: None, bullets: None }
        }
    }
}

impl SimSession {
    /// A session whose `CFG` overrides seed, level and delay of `base`.
    pub fn new(base: SimConfig) -> Self {
        Self { base, phase: Phase::AwaitCfg }
    }

    pub fn world(&self) -> Option<&World> {
        match &self.phase {
            Phase::Running(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.phase, Phase::Closed)
    }

    fn current_tick(&self) -> u64 {
        self.world().map_or(0, |w| w.tick_index())
    }

    fn err(&self, reason: &str) -> Vec<Message> {
        vec![Message::Err { tick: self.current_tick(), reason: reason.to_string() }]
    }

    /// Handles one raw line and returns the serialized replies.
    pub fn handle_line(&mut self, line: &str) -> Vec<String> {
        let replies = match parse(line) {
            Ok(m) => self.handle(&m),
            Err(e) => self.err(e.slug()),
        };
        replies.iter().map(serialize).collect()
    }

    pub fn handle(&mut self, msg: &Message) -> Vec<Message> {
        match (&mut self.phase, msg) {
            (Phase::Closed, _) => self.err("session_closed"),
            (Phase::AwaitCfg, Message::Cfg { seed, level, delay, .. }) => {
                let mut cfg = self.base.clone();
                cfg.seed = *seed;
                cfg.opponent_level = *level;
                cfg.weapon.registration_delay = *delay;
                match World::new(cfg) {
                    Ok(w) => {
                        let obs = observation_message(&w.observe());
                        self.phase = Phase::Running(Box::new(w));
                        vec![obs]
                    }
                    Err(_) => self.err("invalid_config"),
                }
            }
            (Phase::Running(_), Message::Cfg { .. }) => self.err("already_configured"),
            (Phase::AwaitCfg, Message::Act { .. }) => self.err("not_configured"),
            (Phase::Running(w), Message::Act { tick, shoot, aid }) => {
                if *tick != w.tick_index() {
                    return self.err("tick_mismatch");
                }
                match w.tick(LearnerCommand { shoot: *shoot, action: *aid as usize }) {
                    Ok(report) => {
                        let mut out: Vec<Message> = report.events.iter().map(|e| event_message(report.tick, e)).collect();
                        out.push(observation_message(&report.observation));
                        out
                    }
                    Err(_) => self.err("invalid_action"),
                }
            }
            (_, Message::End { .. }) => {
                let (tick, tallies) = match &self.phase {
                    Phase::Running(w) => (w.tick_index(), w.tallies()),
                    _ => (0, Default::default()),
                };
                self.phase = Phase::Closed;
                vec![Message::End { tick, tallies: Some((tallies.kills, tallies.deaths)) }]
            }
            _ => self.err("unexpected_kind"),
        }
    }
}
