//! Trajectory CSV: `n,t,x,y,z,vx,vy,vz`, one row per snapshot.
//!
//! `n` is 1-based and the velocity cells of the last row are empty. Floats are
//! written with 17 significant digits so a read-back is bit-exact.

use std::io::{Read, Write};

use nalgebra::Vector3;

use super::trajectory::{Positions, Trajectory};
use crate::error::{Error, Result};

pub const TRAJECTORY_HEADER: [&str; 8] = ["n", "t", "x", "y", "z", "vx", "vy", "vz"];

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    let ts = traj.sampling_period();
    let vel = traj.velocities();
    for (i, p) in traj.positions().iter().enumerate() {
        let mut row = vec![(i + 1).to_string(), fmt_f64(ts * i as f64)];
        row.extend(p.iter().map(|c| fmt_f64(*c)));
        match vel.get(i) {
            Some(v) => row.extend(v.iter().map(|c| fmt_f64(*c))),
            None => row.extend(std::iter::repeat_n(String::new(), 3)),
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trajectory back. The start point and velocities are authoritative;
/// the remaining position columns are only checked for shape.
pub fn read_trajectory_csv<R: Read>(input: R) -> Result<Trajectory> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(TRAJECTORY_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected trajectory header {header:?}")));
    }
    let mut start = None;
    let mut times = Vec::new();
    let mut velocities = Vec::new();
    let mut last_seen = false;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if last_seen {
            return Err(Error::Parse(format!("row {} follows the final row", i + 1)));
        }
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {} column {}: {e}", i + 1, TRAJECTORY_HEADER[k])))
        };
        times.push(num(1)?);
        let p = Vector3::new(num(2)?, num(3)?, num(4)?);
        if start.is_none() {
            start = Some(p);
        }
        if rec[5].trim().is_empty() {
            last_seen = true;
        } else {
            velocities.push(Vector3::new(num(5)?, num(6)?, num(7)?));
        }
    }
    let start = start.ok_or_else(|| Error::Parse("empty trajectory file".into()))?;
    if !last_seen {
        return Err(Error::Parse("final row must have empty velocities".into()));
    }
    let ts = if times.len() >= 2 { times[1] - times[0] } else { 0.0 };
    Trajectory::from_velocities(start, velocities, ts)
}

/// Plain `x,y,z` dump for static sample sets.
pub fn write_positions_csv<W: Write, P: Positions + ?Sized>(samples: &P, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "z"])?;
    for p in samples.positions() {
        w.write_record(p.iter().map(|c| fmt_f64(*c)))?;
    }
    w.flush()?;
    Ok(())
}
