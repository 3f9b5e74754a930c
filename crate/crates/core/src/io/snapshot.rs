//! Binary snapshot layout, all little-endian:
//!
//! | offset | size | content            |
//! |--------|------|--------------------|
//! | 0      | 4    | magic `TFLM`       |
//! | 4      | 4    | format version, u32 = 1 |
//! | 8      | 4    | nx, u32            |
//! | 12     | 4    | ny, u32            |
//! | 16     | 8    | h, f64             |
//! | 24     | 8    | t, f64             |
//! | 32     | 8    | n exponent, f64    |
//! | 40     | 8·nx·ny | values, f64, row-major |

use super::IoError;
use crate::grid::{Field, Grid};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"TFLM";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: Field,
    pub n_exponent: f64,
}

pub fn encode_snapshot(f: &Field, n_exponent: f64) -> Vec<u8> {
    let g = f.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(g.nx() as u32).to_le_bytes());
    out.extend_from_slice(&(g.ny() as u32).to_le_bytes());
    out.extend_from_slice(&g.h().to_le_bytes());
    out.extend_from_slice(&f.time().to_le_bytes());
    out.extend_from_slice(&n_exponent.to_le_bytes());
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<Snapshot, IoError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(IoError::BadMagic { found: bytes[..bytes.len().min(4)].to_vec() });
    }
    if bytes.len() < HEADER_LEN {
        return Err(IoError::TruncatedPayload { expected: HEADER_LEN, actual: bytes.len() });
    }
    let version = u32_at(bytes, 4);
    if version != FORMAT_VERSION {
        return Err(IoError::VersionUnsupported(version));
    }
    let (nx, ny) = (u32_at(bytes, 8) as usize, u32_at(bytes, 12) as usize);
    let (h, t, n_exponent) = (f64_at(bytes, 16), f64_at(bytes, 24), f64_at(bytes, 32));
    let expected = HEADER_LEN + 8 * nx * ny;
    if bytes.len() < expected {
        return Err(IoError::TruncatedPayload { expected, actual: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(IoError::TrailingBytes { extra: bytes.len() - expected });
    }
    let grid = Grid::with_spacing(nx, ny, h).map_err(|e| IoError::SchemaMismatch(e.to_string()))?;
    let values = bytes[HEADER_LEN..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let field = Field::new(grid, values, t).map_err(|e| IoError::SchemaMismatch(e.to_string()))?;
    Ok(Snapshot { field, n_exponent })
}

pub fn write_snapshot(f: &Field, n_exponent: f64, path: &Path) -> Result<(), IoError> {
    std::fs::write(path, encode_snapshot(f, n_exponent)).map_err(|e| IoError::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, IoError> {
    let bytes = std::fs::read(path).map_err(|e| IoError::io(path, e))?;
    decode_snapshot(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Field {
        let g = Grid::square(8, 1.3).unwrap();
        Field::from_fn(g, |x, y| (3.0 * x).sin() * y.exp() - 1e-300).with_time(0.25)
    }

    #[test]
    fn header_layout() {
        let b = encode_snapshot(&sample(), 2.0);
        assert_eq!(&b[..4], b"TFLM");
        assert_eq!(u32_at(&b, 4), 1);
        assert_eq!((u32_at(&b, 8), u32_at(&b, 12)), (8, 8));
        assert_eq!(f64_at(&b, 16), 1.3 / 8.0);
        assert_eq!(f64_at(&b, 24), 0.25);
        assert_eq!(b.len(), 40 + 64 * 8);
    }

    #[test]
    fn bad_inputs() {
        let mut b = encode_snapshot(&sample(), 2.0);
        assert!(matches!(decode_snapshot(&b[..100]), Err(IoError::TruncatedPayload { expected: 552, actual: 100 })));
        b.push(0);
        assert!(matches!(decode_snapshot(&b), Err(IoError::TrailingBytes { extra: 1 })));
        b[4] = 2;
        assert!(matches!(decode_snapshot(&b), Err(IoError::VersionUnsupported(2))));
        b[..4].copy_from_slice(b"XXXX");
        assert!(matches!(decode_snapshot(&b), Err(IoError::BadMagic { .. })));
    }
}
