//! Bit-exact binary checkpoints.
//!
//! Layout (all little-endian):
//!
//! ```text
//! magic   4 bytes  "KTRB"
//! version u32      1
//! mode    u32      1 = Channel1D, 2 = Channel2D
//! nx      u64
//! ny      u64
//! dx      f64
//! dy      f64
//! t       f64
//! fields  raw f64 blocks in fixed order:
//!   1D: u[ny], b[ny], omega[ny]
//!   2D: u[nx*ny], v[nx*(ny+1)], b[nx*ny], omega[nx*ny], p[nx*ny]
//! ```
//!
//! Round-trip is bit-exact: every f64 is stored verbatim, so reloading a
//! checkpoint and continuing a run reproduces the identical trajectory.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::field::Array2;
use super::state::{SimState, State1, State2};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"KTRB";
const VERSION: u32 = 1;

fn write_f64s(w: &mut impl Write, data: &[f64]) -> Result<()> {
    for v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64s(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)
        .map_err(|e| Error::CheckpointFormat(format!("truncated field block: {e}")))?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn checkpoint_save(state: &SimState, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    match state {
        SimState::One(s) => {
            w.write_all(&1u32.to_le_bytes())?;
            w.write_all(&1u64.to_le_bytes())?;
            w.write_all(&(s.u.len() as u64).to_le_bytes())?;
            w.write_all(&0f64.to_le_bytes())?;
            w.write_all(&0f64.to_le_bytes())?; // dx, dy unused by the loader
            w.write_all(&s.t.to_le_bytes())?;
            write_f64s(&mut w, &s.u)?;
            write_f64s(&mut w, &s.b)?;
            write_f64s(&mut w, &s.omega)?;
        }
        SimState::Two(s) => {
            w.write_all(&2u32.to_le_bytes())?;
            w.write_all(&(s.u.nx as u64).to_le_bytes())?;
            w.write_all(&(s.u.ny as u64).to_le_bytes())?;
            w.write_all(&0f64.to_le_bytes())?;
            w.write_all(&0f64.to_le_bytes())?;
            w.write_all(&s.t.to_le_bytes())?;
            write_f64s(&mut w, &s.u.data)?;
            write_f64s(&mut w, &s.v.data)?;
            write_f64s(&mut w, &s.b.data)?;
            write_f64s(&mut w, &s.omega.data)?;
            write_f64s(&mut w, &s.p.data)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn checkpoint_load(path: &Path) -> Result<SimState> {
    let mut r = BufReader::new(File::open(path)?);
    let mut head = [0u8; 4];
    r.read_exact(&mut head)
        .map_err(|e| Error::CheckpointFormat(format!("missing header: {e}")))?;
    if &head != MAGIC {
        return Err(Error::CheckpointFormat(format!(
            "bad magic {head:?}, expected {MAGIC:?}"
        )));
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)
        .map_err(|e| Error::CheckpointFormat(format!("missing version: {e}")))?;
    let version = u32::from_le_bytes(u32buf);
    if version != VERSION {
        return Err(Error::CheckpointFormat(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    r.read_exact(&mut u32buf)
        .map_err(|e| Error::CheckpointFormat(format!("missing mode: {e}")))?;
    let mode = u32::from_le_bytes(u32buf);
    let mut u64buf = [0u8; 8];
    r.read_exact(&mut u64buf)
        .map_err(|e| Error::CheckpointFormat(format!("missing nx: {e}")))?;
    let nx = u64::from_le_bytes(u64buf) as usize;
    r.read_exact(&mut u64buf)
        .map_err(|e| Error::CheckpointFormat(format!("missing ny: {e}")))?;
    let ny = u64::from_le_bytes(u64buf) as usize;
    let _dx = read_f64s(&mut r, 1)?[0];
    let _dy = read_f64s(&mut r, 1)?[0];
    let t = read_f64s(&mut r, 1)?[0];
    if nx == 0 || ny == 0 || nx.saturating_mul(ny) > (1 << 28) {
        return Err(Error::CheckpointFormat(format!(
            "implausible grid shape {nx} x {ny}"
        )));
    }
    let state = match mode {
        1 => SimState::One(State1 {
            t,
            u: read_f64s(&mut r, ny)?,
            b: read_f64s(&mut r, ny)?,
            omega: read_f64s(&mut r, ny)?,
        }),
        2 => {
            let cells = nx * ny;
            let u = read_f64s(&mut r, cells)?;
            let v = read_f64s(&mut r, nx * (ny + 1))?;
            let b = read_f64s(&mut r, cells)?;
            let omega = read_f64s(&mut r, cells)?;
            let p = read_f64s(&mut r, cells)?;
            SimState::Two(State2 {
                t,
                u: Array2 { nx, ny, data: u },
                v: Array2 {
                    nx,
                    ny: ny + 1,
                    data: v,
                },
                b: Array2 { nx, ny, data: b },
                omega: Array2 {
                    nx,
                    ny,
                    data: omega,
                },
                p: Array2 { nx, ny, data: p },
            })
        }
        other => {
            return Err(Error::CheckpointFormat(format!("unknown mode {other}")));
        }
    };
    // Reject trailing garbage so corrupt files cannot masquerade as valid.
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::CheckpointFormat("trailing bytes after fields".into()));
    }
    Ok(state)
}
