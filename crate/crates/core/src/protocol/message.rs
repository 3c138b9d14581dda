//! Newline-framed text messages.
//!
//! ```text
//! line  := KIND " t=" INT ( " " KEY "=" VALUE )* "\n"
//! KIND  := OBS | ACT | EVT | CFG | END | ERR
//! ```
//!
//! Keys are emitted in a fixed order per kind; floats always carry six
//! decimal places. Parsing accepts keys in any order but rejects unknown,
//! duplicate or missing keys.
//!
//! | kind | keys                                   |
//! |------|----------------------------------------|
//! | CFG  | `seed level delay`                     |
//! | OBS  | `vis vf vl rot dist`                   |
//! | ACT  | `shoot aid`                            |
//! | EVT  | `kind victim [fired] [bullets]`        |
//! | END  | `[kills deaths]`                       |
//! | ERR  | `reason`                               |

use std::fmt::{self, Write as _};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty line")]
    EmptyLine,
    #[error("unknown message kind `{0}`")]
    UnknownKind(String),
    #[error("missing tick")]
    MissingTick,
    #[error("missing tick value")]
    MissingTickValue,
    #[error("malformed field `{0}`")]
    MalformedField(String),
    #[error("non-numeric value `{token}` for `{key}`")]
    NonNumeric { key: String, token: String },
    #[error("invalid value `{token}` for `{key}`")]
    InvalidValue { key: String, token: String },
    #[error("unknown key `{key}` for {kind}")]
    UnknownKey { kind: &'static str, key: String },
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
}

impl ParseError {
    /// Single-token slug used in ERR replies.
    pub fn slug(&self) -> &'static str {
        match self {
            ParseError::EmptyLine => "empty_line",
            ParseError::UnknownKind(_) => "unknown_kind",
            ParseError::MissingTick => "missing_tick",
            ParseError::MissingTickValue => "missing_tick_value",
            ParseError::MalformedField(_) => "malformed_field",
            ParseError::NonNumeric { .. } => "non_numeric_value",
            ParseError::InvalidValue { .. } => "invalid_value",
            ParseError::UnknownKey { .. } => "unknown_key",
            ParseError::DuplicateKey(_) => "duplicate_key",
            ParseError::MissingKey(_) => "missing_key",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Dmg,
    Kill,
}

impl EventKind {
    fn as_str(self) -> &'static str {
        match self {
            EventKind::Dmg => "DMG",
            EventKind::Kill => "KILL",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Cfg { tick: u64, seed: u64, level: u8, delay: u64 },
    Obs { tick: u64, visible: bool, vf: f64, vl: f64, rot: f64, dist: f64 },
    Act { tick: u64, shoot: bool, aid: u32 },
    Evt { tick: u64, kind: EventKind, victim: u32, fired: Option<u64>, bullets: Option<u32> },
    End { tick: u64, tallies: Option<(u64, u64)> },
    Err { tick: u64, reason: String },
}

impl Message {
    pub fn kind(&self) -> &'static str {
        match self {
            Message::Cfg { .. } => "CFG",
            Message::Obs { .. } => "OBS",
            Message::Act { .. } => "ACT",
            Message::Evt { .. } => "EVT",
            Message::End { .. } => "END",
            Message::Err { .. } => "ERR",
        }
    }

    pub fn tick(&self) -> u64 {
        match *self {
            Message::Cfg { tick, .. }
            | Message::Obs { tick, .. }
            | Message::Act { tick, .. }
            | Message::Evt { tick, .. }
            | Message::End { tick, .. }
            | Message::Err { tick, .. } => tick,
        }
    }

    /// The line without its trailing newline.
    pub fn to_line(&self) -> String {
        let mut s = format!("{} t={}", self.kind(), self.tick());
        match self {
            Message::Cfg { seed, level, delay, .. } => {
                let _ = write!(s, " seed={seed} level={level} delay={delay}");
            }
            Message::Obs { visible, vf, vl, rot, dist, .. } => {
                let _ = write!(s, " vis={} vf={vf:.6} vl={vl:.6} rot={rot:.6} dist={dist:.6}", *visible as u8);
            }
            Message::Act { shoot, aid, .. } => {
                let _ = write!(s, " shoot={} aid={aid}", *shoot as u8);
            }
            Message::Evt { kind, victim, fired, bullets, .. } => {
                let _ = write!(s, " kind={} victim={victim}", kind.as_str());
                if let Some(f) = fired {
                    let _ = write!(s, " fired={f}");
                }
                if let Some(b) = bullets {
                    let _ = write!(s, " bullets={b}");
                }
            }
            Message::End { tallies, .. } => {
                if let Some((k, d)) = tallies {
                    let _ = write!(s, " kills={k} deaths={d}");
                }
            }
            Message::Err { reason, .. } => {
                let _ = write!(s, " reason={reason}");
            }
        }
        s
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// Renders one newline-terminated line.
pub fn serialize(msg: &Message) -> String {
    let mut s = msg.to_line();
    s.push('\n');
    s
}

/// Rounds to the six-decimal wire precision.
pub fn quantize(v: f64) -> f64 {
    format!("{v:.6}").parse().expect("formatted float parses")
}

fn is_int_token(t: &str) -> bool {
    !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit())
}

fn is_decimal_token(t: &str) -> bool {
    let t = t.strip_prefix('-').unwrap_or(t);
    match t.split_once('.') {
        Some((i, f)) => is_int_token(i) && is_int_token(f),
        None => is_int_token(t),
    }
}

struct Fields<'a> {
    kind: &'static str,
    pairs: Vec<(&'a str, &'a str)>,
    used: Vec<bool>,
}

impl<'a> Fields<'a> {
    fn take(&mut self, key: &'static str) -> Option<&'a str> {
        let i = self.pairs.iter().position(|(k, _)| *k == key)?;
        self.used[i] = true;
        Some(self.pairs[i].1)
    }

    fn req(&mut self, key: &'static str) -> Result<&'a str, ParseError> {
        self.take(key).ok_or(ParseError::MissingKey(key))
    }

    fn finish(self) -> Result<(), ParseError> {
        match self.pairs.iter().zip(&self.used).find(|(_, u)| !**u) {
            Some(((k, _), _)) => Err(ParseError::UnknownKey { kind: self.kind, key: k.to_string() }),
            None => Ok(()),
        }
    }
}

fn int<T: std::str::FromStr>(key: &str, token: &str) -> Result<T, ParseError> {
    if !is_int_token(token) {
        return Err(ParseError::NonNumeric { key: key.to_string(), token: token.to_string() });
    }
    token.parse().map_err(|_| ParseError::InvalidValue { key: key.to_string(), token: token.to_string() })
}

fn float(key: &str, token: &str) -> Result<f64, ParseError> {
    if !is_decimal_token(token) {
        return Err(ParseError::NonNumeric { key: key.to_string(), token: token.to_string() });
    }
    token.parse().map_err(|_| ParseError::NonNumeric { key: key.to_string(), token: token.to_string() })
}

fn flag(key: &str, token: &str) -> Result<bool, ParseError> {
    match int::<u8>(key, token)? {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err(ParseError::InvalidValue { key: key.to_string(), token: token.to_string() }),
    }
}

/// Parses one line, with or without its trailing newline.
pub fn parse(line: &str) -> Result<Message, ParseError> {
    let line = line.strip_suffix('\n').unwrap_or(line);
    if line.is_empty() {
        return Err(ParseError::EmptyLine);
    }
    let mut tokens = line.split(' ');
    let kind_tok = tokens.next().unwrap_or_default();
    let kind: &'static str = match kind_tok {
        "CFG" => "CFG",
        "OBS" => "OBS",
        "ACT" => "ACT",
        "EVT" => "EVT",
        "END" => "END",
        "ERR" => "ERR",
        other => return Err(ParseError::UnknownKind(other.to_string())),
    };
    let tick = match tokens.next() {
        None => return Err(ParseError::MissingTick),
        Some(t) => match t.strip_prefix("t=") {
            None => return Err(ParseError::MissingTick),
            Some("") => return Err(ParseError::MissingTickValue),
            Some(v) => int::<u64>("t", v)?,
        },
    };
    let mut pairs = Vec::new();
    for tok in tokens {
        let (k, v) = tok.split_once('=').ok_or_else(|| ParseError::MalformedField(tok.to_string()))?;
        if k.is_empty() || v.is_empty() {
            return Err(ParseError::MalformedField(tok.to_string()));
        }
        if pairs.iter().any(|(pk, _)| *pk == k) {
            return Err(ParseError::DuplicateKey(k.to_string()));
        }
        pairs.push((k, v));
    }
    let used = vec![false; pairs.len()];
    let mut f = Fields { kind, pairs, used };
    let msg = match kind {
        "CFG" => Message::Cfg {
            tick,
            seed: int("seed", f.req("seed")?)?,
            level: int("level", f.req("level")?)?,
            delay: int("delay", f.req("delay")?)?,
        },
        "OBS" => Message::Obs {
            tick,
            visible: flag("vis", f.req("vis")?)?,
            vf: float("vf", f.req("vf")?)?,
            vl: float("vl", f.req("vl")?)?,
            rot: float("rot", f.req("rot")?)?,
            dist: float("dist", f.req("dist")?)?,
        },
        "ACT" => Message::Act { tick, shoot: flag("shoot", f.req("shoot")?)?, aid: int("aid", f.req("aid")?)? },
        "EVT" => {
            let kind = match f.req("kind")? {
                "DMG" => EventKind::Dmg,
                "KILL" => EventKind::Kill,
                other => {
                    return Err(ParseError::InvalidValue { key: "kind".into(), token: other.to_string() });
                }
            };
            let victim = int("victim", f.req("victim")?)?;
            let fired = f.take("fired").map(|v| int("fired", v)).transpose()?;
            let bullets = f.take("bullets").map(|v| int("bullets", v)).transpose()?;
            Message::Evt { tick, kind, victim, fired, bullets }
        }
        "END" => {
            let kills = f.take("kills").map(|v| int::<u64>("kills", v)).transpose()?;
            let deaths = f.take("deaths").map(|v| int::<u64>("deaths", v)).transpose()?;
            let tallies = match (kills, deaths) {
                (Some(k), Some(d)) => Some((k, d)),
                (None, None) => None,
                (Some(_), None) => return Err(ParseError::MissingKey("deaths")),
                (None, Some(_)) => return Err(ParseError::MissingKey("kills")),
            };
            Message::End { tick, tallies }
        }
        _ => {
            let reason = f.req("reason")?;
            if !reason.bytes().all(|b| b.is_ascii_graphic()) {
                return Err(ParseError::InvalidValue { key: "reason".into(), token: reason.to_string() });
            }
            Message::Err { tick, reason: reason.to_string() }
        }
    };
    f.finish()?;
    Ok(msg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn obs_example() {
        let m = Message::Obs { tick: 12, visible: true, vf: 200.0, vl: 100.0, rot: 15.0, dist: 750.0 };
        assert_eq!(
            serialize(&m),
            "OBS t=12 vis=1 vf=200.000000 vl=100.000000 rot=15.000000 dist=750.000000\n"
        );
        assert_eq!(parse(&serialize(&m)).unwrap(), m);
    }

    #[test]
    fn act_example() {
        let m = Message::Act { tick: 12, shoot: true, aid: 17 };
        assert_eq!(m.to_line(), "ACT t=12 shoot=1 aid=17");
        assert_eq!(parse("ACT t=12 shoot=1 aid=17").unwrap(), m);
    }

    #[test]
    fn evt_example() {
        let m = parse("EVT t=40 kind=DMG victim=1").unwrap();
        assert_eq!(m, Message::Evt { tick: 40, kind: EventKind::Dmg, victim: 1, fired: None, bullets: None });
        let full = "EVT t=41 kind=DMG victim=1 fired=40 bullets=3\n";
        assert_eq!(serialize(&parse(full).unwrap()), full);
    }

    #[test]
    fn end_and_cfg() {
        let m = parse("END t=900 kills=12 deaths=10").unwrap();
        assert_eq!(m, Message::End { tick: 900, tallies: Some((12, 10)) });
        assert_eq!(parse("END t=3").unwrap(), Message::End { tick: 3, tallies: None });
        let c = "CFG t=0 seed=42 level=3 delay=1\n";
        assert_eq!(serialize(&parse(c).unwrap()), c);
    }

    #[test]
    fn keys_may_arrive_in_any_order() {
        let m = parse("ACT t=1 aid=3 shoot=0").unwrap();
        assert_eq!(m.to_line(), "ACT t=1 shoot=0 aid=3");
    }

    #[test]
    fn malformed_lines_name_the_problem() {
        let cases: &[(&str, ParseError)] = &[
            ("OBS t=", ParseError::MissingTickValue),
            ("", ParseError::EmptyLine),
            ("FOO t=1", ParseError::UnknownKind("FOO".into())),
            ("obs t=1", ParseError::UnknownKind("obs".into())),
            ("ACT", ParseError::MissingTick),
            ("ACT shoot=1 aid=2", ParseError::MissingTick),
            ("ACT t=x shoot=1 aid=2", ParseError::NonNumeric { key: "t".into(), token: "x".into() }),
            ("ACT t=-1 shoot=1 aid=2", ParseError::NonNumeric { key: "t".into(), token: "-1".into() }),
            ("ACT t=1 shoot=1", ParseError::MissingKey("aid")),
            ("ACT t=1 shoot=2 aid=0", ParseError::InvalidValue { key: "shoot".into(), token: "2".into() }),
            ("ACT t=1 shoot=1 aid=0 aid=1", ParseError::DuplicateKey("aid".into())),
            ("ACT t=1 shoot=1 aid=0 x=1", ParseError::UnknownKey { kind: "ACT", key: "x".into() }),
            ("ACT t=1 shoot=1  aid=0", ParseError::MalformedField("".into())),
            ("ACT t=1 shoot", ParseError::MalformedField("shoot".into())),
            ("OBS t=1 vis=1 vf=NaN vl=0 rot=0 dist=0", ParseError::NonNumeric { key: "vf".into(), token: "NaN".into() }),
            ("OBS t=1 vis=1 vf=1e3 vl=0 rot=0 dist=0", ParseError::NonNumeric { key: "vf".into(), token: "1e3".into() }),
            ("EVT t=1 kind=BOOM victim=1", ParseError::InvalidValue { key: "kind".into(), token: "BOOM".into() }),
            ("END t=1 kills=3", ParseError::MissingKey("deaths")),
            ("CFG t=0 seed=1 level=300 delay=1", ParseError::InvalidValue { key: "level".into(), token: "300".into() }),
        ];
        for (line, want) in cases {
            assert_eq!(parse(line).as_ref(), Err(want), "line {line:?}");
        }
        assert_eq!(ParseError::MissingTickValue.to_string(), "missing tick value");
    }

    #[test]
    fn quantize_matches_wire_precision() {
        assert_eq!(quantize(1.23456789), 1.234568);
        assert_eq!(quantize(-0.0000001).to_bits(), (-0.0f64).to_bits());
    }
}
