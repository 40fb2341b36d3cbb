use std::f64::consts::PI;

use super::{Geometry, RoomSpec, SPEED_OF_SOUND};
use crate::error::{Error, Result};
use crate::sh::Direction;

/// One mirror source as seen from the listener.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageSource {
    /// Propagation delay in seconds.
    pub delay: f64,
    /// `R^reflection_count / (4π·distance)`.
    pub gain: f64,
    /// Arrival direction in the listener frame.
    pub direction: Direction,
    pub reflection_count: u32,
    pub distance: f64,
}

/// Lattice index range `n` with `|offset + 2·n·len - target| <= radius`.
fn lattice_range(offset: f64, len: f64, target: f64, radius: f64) -> std::ops::RangeInclusive<i64> {
    let lo = ((target - radius - offset) / (2.0 * len)).ceil() as i64;
    let hi = ((target + radius - offset) / (2.0 * len)).floor() as i64;
    lo..=hi
}

/// All image sources with `delay <= max_time`, sorted by delay.
pub fn enumerate_images(room: &RoomSpec, geom: &Geometry, max_time: f64) -> Result<Vec<ImageSource>> {
    room.validate()?;
    geom.validate(room)?;
    let direct_delay = geom.distance() / SPEED_OF_SOUND;
    if !(max_time > direct_delay) {
        return Err(Error::InvalidDuration(format!(
            "max time {max_time} s does not exceed the direct-path delay {direct_delay} s"
        )));
    }
    let radius = max_time * SPEED_OF_SOUND;
    let r = room.reflection_coefficient;
    let [lx, ly, lz] = room.dimensions;
    let [sx, sy, sz] = geom.source;
    let [px, py, pz] = geom.listener;

    let mut out = Vec::new();
    for qx in 0..2i64 {
        let ox = (1 - 2 * qx) as f64 * sx;
        for nx in lattice_range(ox, lx, px, radius) {
            let dx = ox + 2.0 * nx as f64 * lx - px;
            let ry2 = radius * radius - dx * dx;
            if ry2 < 0.0 {
                continue;
            }
            let ry = ry2.sqrt();
            for qy in 0..2i64 {
                let oy = (1 - 2 * qy) as f64 * sy;
                for ny in lattice_range(oy, ly, py, ry) {
                    let dy = oy + 2.0 * ny as f64 * ly - py;
                    let rz2 = ry2 - dy * dy;
                    if rz2 < 0.0 {
                        continue;
                    }
                    let rz = rz2.sqrt();
                    for qz in 0..2i64 {
                        let oz = (1 - 2 * qz) as f64 * sz;
                        for nz in lattice_range(oz, lz, pz, rz) {
                            let dz = oz + 2.0 * nz as f64 * lz - pz;
                            let distance = (dx * dx + dy * dy + dz * dz).sqrt();
                            if distance > radius {
                                continue;
                            }
                            let count = ((nx - qx).abs() + nx.abs() + (ny - qy).abs() + ny.abs()
                                + (nz - qz).abs()
                                + nz.abs()) as u32;
                            if count > 0 && r == 0.0 {
                                continue;
                            }
                            out.push(ImageSource {
                                delay: distance / SPEED_OF_SOUND,
                                gain: r.powi(count as i32) / (4.0 * PI * distance),
                                direction: Direction::from_vector(dx, dy, dz).rotated(-geom.facing),
                                reflection_count: count,
                                distance,
                            });
                        }
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.delay
            .total_cmp(&b.delay)
            .then(a.reflection_count.cmp(&b.reflection_count))
    });
    Ok(out)
}
