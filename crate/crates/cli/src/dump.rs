//! Binary field dumps: little-endian header
//! `{magic "MPL1", dim: u32, shape per axis: u32, h: f64, s: f64, t: f64}`
//! followed by row-major f64 node values.

use std::io;
use std::path::Path;

use movplane_core::Field;

use crate::report::write_atomic;

pub fn encode_field(field: &Field, s: f64, t: f64) -> Vec<u8> {
    let grid = &field.grid;
    let dim = grid.dim();
    let mut bytes = Vec::with_capacity(32 + 8 * field.values.len());
    bytes.extend_from_slice(b"MPL1");
    bytes.extend_from_slice(&(dim as u32).to_le_bytes());
    for _ in 0..dim {
        bytes.extend_from_slice(&(grid.n_per_axis() as u32).to_le_bytes());
    }
    bytes.extend_from_slice(&grid.h().to_le_bytes());
    bytes.extend_from_slice(&s.to_le_bytes());
    bytes.extend_from_slice(&t.to_le_bytes());
    for v in &field.values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes
}

pub fn write_field(path: &Path, field: &Field, s: f64, t: f64) -> io::Result<()> {
    write_atomic(path, &encode_field(field, s, t))
}
