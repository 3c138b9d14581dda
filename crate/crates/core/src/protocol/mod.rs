//! Line-oriented text protocol between a learner and the simulator.

mod message;
mod session;
mod transport;

pub use message::{parse, quantize, serialize, EventKind, Message, ParseError};
pub use session::{observation_message, SimSession};
pub use transport::{serve, spawn_server, InProcess, Tcp, Transport, TransportError};
