//! Q-table snapshot files.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! offset  size        field
//! 0       4           magic "QTAB"
//! 4       4           u32 format version (1)
//! 8       4           u32 state count (1184)
//! 12      4           u32 action count (44)
//! 16      8 * 52096   f64 values, row-major by state
//! ```

use crate::action_grid::NUM_ACTIONS;
use crate::sarsa::{QTable, TABLE_LEN};
use crate::state_codec::NUM_STATES;
use std::io::{self, Read, Write};
use std::path::Path;
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"QTAB";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;
pub const FILE_LEN: usize = HEADER_LEN + 8 * TABLE_LEN;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("table dimensions {0}x{1}, expected 1184x44")]
    BadDimensions(u32, u32),
    #[error("non-finite value at entry {0}")]
    NonFinite(usize),
    #[error("trailing bytes after table")]
    TrailingBytes,
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn encode(q: &QTable) -> Vec<u8> {
    let mut out = Vec::with_capacity(FILE_LEN);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(NUM_STATES as u32).to_le_bytes());
    out.extend_from_slice(&(NUM_ACTIONS as u32).to_le_bytes());
    for v in q.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_to<W: Write>(q: &QTable, w: &mut W) -> io::Result<()> {
    w.write_all(&encode(q))
}

pub fn read_from<R: Read>(r: &mut R) -> Result<QTable, SnapshotError> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let magic: [u8; 4] = header[0..4].try_into().unwrap();
    if &magic != MAGIC {
        return Err(SnapshotError::BadMagic(magic));
    }
    if word(4) != FORMAT_VERSION {
        return Err(SnapshotError::UnsupportedVersion(word(4)));
    }
    let (states, actions) = (word(8), word(12));
    if states as usize != NUM_STATES || actions as usize != NUM_ACTIONS {
        return Err(SnapshotError::BadDimensions(states, actions));
    }
    let mut body = vec![0u8; 8 * TABLE_LEN];
    r.read_exact(&mut body)?;
    let mut values = Vec::with_capacity(TABLE_LEN);
    for (i, chunk) in body.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(SnapshotError::NonFinite(i));
        }
        values.push(v);
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(SnapshotError::TrailingBytes);
    }
    Ok(QTable::from_values(values).expect("length checked"))
}

pub fn save(q: &QTable, path: &Path) -> io::Result<()> {
    std::fs::write(path, encode(q))
}

pub fn load(path: &Path) -> Result<QTable, SnapshotError> {
    let mut f = io::BufReader::new(std::fs::File::open(path)?);
    read_from(&mut f)
}

/// CSV export with columns `state_index,action_id,q_value`.
pub fn export_csv<W: Write>(q: &QTable, w: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["state_index", "action_id", "q_value"])?;
    for (i, v) in q.values().iter().enumerate() {
        wtr.write_record(&[
            (i / NUM_ACTIONS).to_string(),
            (i % NUM_ACTIONS).to_string(),
            v.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action_grid::AimAction;
    use crate::state_codec::StateKey;

    fn sample() -> QTable {
        let mut q = QTable::new();
        q.set(StateKey::from_index(0).unwrap(), AimAction::new(0).unwrap(), 175.0);
        q.set(StateKey::from_index(1183).unwrap(), AimAction::new(43).unwrap(), -0.7);
        q
    }

    #[test]
    fn header_layout() {
        let bytes = encode(&sample());
        assert_eq!(bytes.len(), FILE_LEN);
        assert_eq!(&bytes[0..4], b"QTAB");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[8..12], &1184u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &44u32.to_le_bytes());
        assert_eq!(&bytes[16..24], &175.0f64.to_le_bytes());
    }

    #[test]
    fn decode_inverts_encode() {
        let q = sample();
        let back = read_from(&mut encode(&q).as_slice()).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn rejects_corrupt_files() {
        let mut bytes = encode(&sample());
        bytes[0] = b'X';
        assert!(matches!(read_from(&mut bytes.as_slice()), Err(SnapshotError::BadMagic(_))));

        let mut bytes = encode(&sample());
        bytes[8] = 5;
        assert!(matches!(read_from(&mut bytes.as_slice()), Err(SnapshotError::BadDimensions(..))));

        let mut bytes = encode(&sample());
        bytes.push(0);
        assert!(matches!(read_from(&mut bytes.as_slice()), Err(SnapshotError::TrailingBytes)));

        let bytes = encode(&sample());
        assert!(matches!(read_from(&mut &bytes[..100]), Err(SnapshotError::Io(_))));
    }

    #[test]
    fn csv_export_has_one_row_per_entry() {
        let mut buf = Vec::new();
        export_csv(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), TABLE_LEN + 1);
        assert_eq!(lines[1], "0,0,175");
        assert_eq!(lines[TABLE_LEN], "1183,43,-0.7");
    }
}
