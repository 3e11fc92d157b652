//! Binary dump formats for increment tables and trajectories.
//!
//! Both formats share a 24-byte header: an 8-byte ASCII magic, then two
//! little-endian `u64` dimensions, followed by the payload as row-major
//! little-endian `f64`. Increment tables use magic `SPDEWINC` with dimensions
//! `(modes, steps)`; trajectories use `SPDETRAJ` with dimensions
//! `(time nodes, state dimension)`.

use crate::error::{Result, SpdeError};
use crate::grid::TimeGrid;
use crate::noise::IncrementTable;
use std::io::{Read, Write};
use std::path::Path;

pub const INCREMENT_MAGIC: &[u8; 8] = b"SPDEWINC";
pub const TRAJECTORY_MAGIC: &[u8; 8] = b"SPDETRAJ";

fn write_matrix<W: Write>(
    w: &mut W,
    magic: &[u8; 8],
    rows: u64,
    cols: u64,
    data: &[f64],
) -> std::io::Result<()> {
    debug_assert_eq!(data.len() as u64, rows * cols);
    w.write_all(magic)?;
    w.write_all(&rows.to_le_bytes())?;
    w.write_all(&cols.to_le_bytes())?;
    for v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_matrix<R: Read>(r: &mut R, magic: &[u8; 8]) -> Result<(u64, u64, Vec<f64>)> {
    let mut head = [0u8; 24];
    r.read_exact(&mut head)
        .map_err(|e| SpdeError::Format(format!("short header: {e}")))?;
    if &head[0..8] != magic {
        return Err(SpdeError::Format(format!(
            "bad magic {:?}, expected {:?}",
            &head[0..8],
            magic
        )));
    }
    let rows = u64::from_le_bytes(head[8..16].try_into().unwrap());
    let cols = u64::from_le_bytes(head[16..24].try_into().unwrap());
    let count = rows
        .checked_mul(cols)
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| SpdeError::Format("dimension overflow".into()))?;
    let mut data = vec![0.0; count];
    let mut buf = [0u8; 8];
    for slot in data.iter_mut() {
        r.read_exact(&mut buf)
            .map_err(|e| SpdeError::Format(format!("short payload: {e}")))?;
        *slot = f64::from_le_bytes(buf);
    }
    Ok((rows, cols, data))
}

/// Write an increment table (`SPDEWINC`) to `path`.
pub fn write_increments(path: &Path, table: &IncrementTable) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| SpdeError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_matrix(
        &mut w,
        INCREMENT_MAGIC,
        table.modes() as u64,
        table.grid().steps() as u64,
        table.raw(),
    )
    .map_err(|e| SpdeError::io(path, e))
}

/// Read an increment table dumped by [`write_increments`]. The horizon is not
/// stored in the file and must be supplied.
pub fn read_increments(path: &Path, horizon: f64, path_index: u64) -> Result<IncrementTable> {
    let file = std::fs::File::open(path).map_err(|e| SpdeError::io(path, e))?;
    let mut r = std::io::BufReader::new(file);
    let (modes, steps, data) = read_matrix(&mut r, INCREMENT_MAGIC)?;
    let grid = TimeGrid::new(horizon, steps as usize)?;
    Ok(IncrementTable::from_parts(
        modes as usize,
        grid,
        path_index,
        data,
    ))
}

/// Write a trajectory (`SPDETRAJ`): one row per time node, one column per
/// state coefficient.
pub fn write_trajectory(path: &Path, states: &[Vec<f64>]) -> Result<()> {
    let rows = states.len() as u64;
    let cols = states.first().map_or(0, |s| s.len()) as u64;
    if states.iter().any(|s| s.len() as u64 != cols) {
        return Err(SpdeError::invalid("trajectory rows must have equal length"));
    }
    let file = std::fs::File::create(path).map_err(|e| SpdeError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    w.write_all(TRAJECTORY_MAGIC)
        .map_err(|e| SpdeError::io(path, e))?;
    w.write_all(&rows.to_le_bytes())
        .map_err(|e| SpdeError::io(path, e))?;
    w.write_all(&cols.to_le_bytes())
        .map_err(|e| SpdeError::io(path, e))?;
    for row in states {
        for v in row {
            w.write_all(&v.to_le_bytes())
                .map_err(|e| SpdeError::io(path, e))?;
        }
    }
    Ok(())
}

pub fn read_trajectory(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = std::fs::File::open(path).map_err(|e| SpdeError::io(path, e))?;
    let mut r = std::io::BufReader::new(file);
    let (rows, cols, data) = read_matrix(&mut r, TRAJECTORY_MAGIC)?;
    let cols = cols as usize;
    Ok(data
        .chunks(cols.max(1))
        .take(rows as usize)
        .map(|c| c.to_vec())
        .collect())
}
