//! Spherical-harmonics primitives: directions, coefficient vectors, basis
//! evaluation, quadrature grids and the spherical Fourier transform pair.

mod basis;
mod grid;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

pub use basis::{sh_all, sh_basis};
pub(crate) use basis::{normalized_legendre, sh_all_into};
pub use grid::{isft, make_grid, sft, QuadratureGrid};

use crate::error::{Error, Result};

/// Arrival direction. Elevation is the polar angle in `[0, π]` measured
/// down from +z; azimuth lies in `[-π, π)`, counter-clockwise from +x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    elevation: f64,
    azimuth: f64,
}

impl Direction {
    pub fn new(elevation: f64, azimuth: f64) -> Result<Self> {
        if !elevation.is_finite() || !azimuth.is_finite() {
            return Err(Error::InvalidDirection(format!(
                "non-finite angle ({elevation}, {azimuth})"
            )));
        }
        if !(0.0..=PI).contains(&elevation) {
            return Err(Error::InvalidDirection(format!(
                "elevation {elevation} outside [0, π]"
            )));
        }
        Ok(Self {
            elevation,
            azimuth: wrap_azimuth(azimuth),
        })
    }

    /// Direction of the vector `(x, y, z)`; the zero vector maps to the zenith.
    pub fn from_vector(x: f64, y: f64, z: f64) -> Self {
        let r = (x * x + y * y + z * z).sqrt();
        let elevation = if r > 0.0 {
            (z / r).clamp(-1.0, 1.0).acos()
        } else {
            0.0
        };
        Self {
            elevation,
            azimuth: wrap_azimuth(y.atan2(x)),
        }
    }

    pub fn elevation(&self) -> f64 {
        self.elevation
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.elevation.sin_cos();
        let (sp, cp) = self.azimuth.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Same elevation, azimuth shifted by `delta`.
    pub fn rotated(&self, delta: f64) -> Self {
        Self {
            elevation: self.elevation,
            azimuth: wrap_azimuth(self.azimuth + delta),
        }
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn wrap_azimuth(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(TAU) - PI;
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// ACN channel index `n² + n + m`.
pub fn flat_index(n: i64, m: i64) -> Result<usize> {
    basis::check_degree(n, m)?;
    Ok((n * n + n + m) as usize)
}

/// Inverse of [`flat_index`].
pub fn degree_of(index: usize) -> (usize, i64) {
    let n = (index as f64).sqrt() as usize;
    // guard against sqrt rounding at perfect squares
    let n = if (n + 1) * (n + 1) <= index {
        n + 1
    } else if n * n > index {
        n - 1
    } else {
        n
    };
    (n, index as i64 - (n * n + n) as i64)
}

/// Number of coefficients up to and including `order`.
pub fn num_coeffs(order: usize) -> usize {
    (order + 1) * (order + 1)
}

/// SH coefficient vector in ACN order.
#[derive(Debug, Clone, PartialEq)]
pub struct ShCoefficients {
    order: usize,
    data: Vec<Complex64>,
}

impl ShCoefficients {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            data: vec![Complex64::new(0.0, 0.0); num_coeffs(order)],
        }
    }

    pub fn from_vec(order: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != num_coeffs(order) {
            return Err(Error::LengthMismatch {
                expected: num_coeffs(order),
                got: data.len(),
            });
        }
        Ok(Self { order, data })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, n: i64, m: i64) -> Result<Complex64> {
        let i = flat_index(n, m)?;
        self.data.get(i).copied().ok_or(Error::OrderMismatch {
            requested: n as usize,
            available: self.order,
        })
    }

    /// `Σ_m |c_nm|²` for each order `n`.
    pub fn energy_per_order(&self) -> Vec<f64> {
        (0..=self.order)
            .map(|n| {
                self.data[n * n..(n + 1) * (n + 1)]
                    .iter()
                    .map(|c| c.norm_sqr())
                    .sum()
            })
            .collect()
    }

    /// Keeps orders `0..=new_order`.
    pub fn truncate(&self, new_order: usize) -> Result<Self> {
        if new_order > self.order {
            return Err(Error::InvalidTruncation {
                from: self.order,
                to: new_order,
            });
        }
        Ok(Self {
            order: new_order,
            data: self.data[..num_coeffs(new_order)].to_vec(),
        })
    }

    /// Rotates the encoded field about the vertical axis so that content at
    /// azimuth `φ` moves to `φ + delta`.
    pub fn rotate_azimuth(&self, delta: f64) -> Self {
        let mut out = self.clone();
        rotate_in_place(&mut out.data, self.order, delta);
        out
    }
}

/// Phase factor applied to degree `m` by an azimuthal rotation of `delta`.
pub(crate) fn rotation_phase(m: i64, delta: f64) -> Complex64 {
    Complex64::from_polar(1.0, -(m as f64) * delta)
}

pub(crate) fn rotate_in_place(data: &mut [Complex64], order: usize, delta: f64) {
    for m in -(order as i64)..=(order as i64) {
        let phase = rotation_phase(m, delta);
        for n in m.unsigned_abs() as usize..=order {
            data[((n * n + n) as i64 + m) as usize] *= phase;
        }
    }
}

/// Coefficients `A · conj(Y_n^m(dir))` of a plane wave arriving from `dir`.
pub fn encode_plane_wave(amplitude: Complex64, dir: Direction, order: usize) -> ShCoefficients {
    let mut data = sh_all(order, dir);
    for c in &mut data {
        *c = amplitude * c.conj();
    }
    ShCoefficients { order, data }
}
