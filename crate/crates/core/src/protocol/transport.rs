//! Client transports and the TCP server loop.

use super::message::{parse, serialize, Message, ParseError};
use super::session::SimSession;
use crate::sim::SimConfig;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::thread::{self, JoinHandle};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("bad reply: {0}")]
    Parse(#[from] ParseError),
    #[error("connection closed by peer")]
    Closed,
}

/// One request, all of its replies.
pub trait Transport {
    fn exchange(&mut self, msg: &Message) -> Result<Vec<Message>, TransportError>;
}

fn ends_reply(m: &Message) -> bool {
    matches!(m, Message::Obs { .. } | Message::End { .. } | Message::Err { .. })
}

/// Drives a session in the same process, still going through the text
/// encoding so that both transports see identical bytes.
#[derive(Debug)]
pub struct InProcess {
    session: SimSession,
}

impl InProcess {
    pub fn new(base: SimConfig) -> Self {
        Self { session: SimSession::new(base) }
    }

    pub fn session(&self) -> &SimSession {
        &self.session
    }
}

impl Transport for InProcess {
    fn exchange(&mut self, msg: &Message) -> Result<Vec<Message>, TransportError> {
        let replies = self.session.handle_line(&serialize(msg));
        replies.iter().map(|l| parse(l).map_err(TransportError::from)).collect()
    }
}

pub struct Tcp {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    line: String,
}

impl Tcp {
    pub fn connect<A: ToSocketAddrs>(addr: A) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(Self { reader: BufReader::new(stream.try_clone()?), writer: stream, line: String::new() })
    }
}

impl Transport for Tcp {
    fn exchange(&mut self, msg: &Message) -> Result<Vec<Message>, TransportError> {
        self.writer.write_all(serialize(msg).as_bytes())?;
        self.writer.flush()?;
        let mut out = Vec::new();
        loop {
            self.line.clear();
            if self.reader.read_line(&mut self.line)? == 0 {
                return Err(TransportError::Closed);
            }
            let m = parse(&self.line)?;
            let done = ends_reply(&m);
            out.push(m);
            if done {
                return Ok(out);
            }
        }
    }
}

fn serve_connection(stream: TcpStream, base: SimConfig) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let mut writer = stream.try_clone()?;
    let mut reader = BufReader::new(stream);
    let mut session = SimSession::new(base);
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Ok(());
        }
        for reply in session.handle_line(&line) {
            writer.write_all(reply.as_bytes())?;
        }
        writer.flush()?;
        if session.is_closed() {
            return Ok(());
        }
    }
}

/// Accepts connections forever, one thread and one session per connection.
pub fn serve(listener: TcpListener, base: SimConfig) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let base = base.clone();
        thread::spawn(move || {
            let _ = serve_connection(stream, base);
        });
    }
    Ok(())
}

/// Binds `addr` and serves in a background thread.
pub fn spawn_server<A: ToSocketAddrs>(addr: A, base: SimConfig) -> io::Result<(SocketAddr, JoinHandle<io::Result<()>>)> {
    let listener = TcpListener::bind(addr)?;
    let local = listener.local_addr()?;
    Ok((local, thread::spawn(move || serve(listener, base))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn script() -> Vec<Message> {
        let mut v = vec![Message::Cfg { tick: 0, seed: 9, level: 3, delay: 1 }];
        for t in 0..60 {
            v.push(Message::Act { tick: t, shoot: t % 5 != 0, aid: (t % 44) as u32 });
        }
        v.push(Message::Act { tick: 3, shoot: true, aid: 0 });
        v.push(Message::End { tick: 60, tallies: None });
        v
    }

    #[test]
    fn tcp_matches_in_process() {
        let (addr, _h) = spawn_server("127.0.0.1:0", SimConfig::default()).unwrap();
        let mut tcp = Tcp::connect(addr).unwrap();
        let mut local = InProcess::new(SimConfig::default());
        for m in script() {
            assert_eq!(tcp.exchange(&m).unwrap(), local.exchange(&m).unwrap());
        }
    }
}
