//! Complex orthonormal spherical harmonics with Condon–Shortley phase.
//!
//! `Y_n^m(θ, φ) = N_nm · P_n^m(cos θ) · e^{imφ}` where `P_n^m` carries the
//! `(-1)^m` phase and `N_nm = sqrt((2n+1)/(4π) · (n-m)!/(n+m)!)`. Negative
//! degrees follow from `Y_n^{-m} = (-1)^m · conj(Y_n^m)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{flat_index, num_coeffs, Direction};
use crate::error::{Error, Result};

/// Fully normalized associated Legendre values `N_nm · P_n^m(cos θ)` for
/// `0 <= m <= n <= order`, stored at `n(n+1)/2 + m`.
pub(crate) fn normalized_legendre(order: usize, elevation: f64) -> Vec<f64> {
    let (s, x) = elevation.sin_cos();
    let mut p = vec![0.0; (order + 1) * (order + 2) / 2];
    let idx = |n: usize, m: usize| n * (n + 1) / 2 + m;

    p[0] = 0.5 / PI.sqrt();
    for m in 1..=order {
        let mf = m as f64;
        p[idx(m, m)] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[idx(m - 1, m - 1)];
    }
    for m in 0..order {
        p[idx(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * x * p[idx(m, m)];
    }
    for m in 0..=order {
        let mf = m as f64;
        for n in (m + 2)..=order {
            let nf = n as f64;
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b = (((nf - 1.0) * (nf - 1.0) - mf * mf) / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0)).sqrt();
            p[idx(n, m)] = a * (x * p[idx(n - 1, m)] - b * p[idx(n - 2, m)]);
        }
    }
    p
}

/// All `(order+1)²` harmonics at `dir`, in ACN order.
pub fn sh_all(order: usize, dir: Direction) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); num_coeffs(order)];
    sh_all_into(order, dir, &mut out);
    out
}

pub(crate) fn sh_all_into(order: usize, dir: Direction, out: &mut [Complex64]) {
    debug_assert_eq!(out.len(), num_coeffs(order));
    let p = normalized_legendre(order, dir.elevation());
    let phi = dir.azimuth();
    for m in 0..=order {
        let phase = Complex64::from_polar(1.0, m as f64 * phi);
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        for n in m..=order {
            let y = phase * p[n * (n + 1) / 2 + m];
            out[n * n + n + m] = y;
            if m > 0 {
                out[n * n + n - m] = y.conj() * sign;
            }
        }
    }
}

/// Single harmonic `Y_n^m(dir)`.
pub fn sh_basis(n: i64, m: i64, dir: Direction) -> Result<Complex64> {
    flat_index(n, m)?;
    let order = n as usize;
    let am = m.unsigned_abs() as usize;
    let p = normalized_legendre(order, dir.elevation());
    let y = Complex64::from_polar(p[order * (order + 1) / 2 + am], am as f64 * dir.azimuth());
    if m >= 0 {
        Ok(y)
    } else if am % 2 == 0 {
        Ok(y.conj())
    } else {
        Ok(-y.conj())
    }
}

pub(crate) fn check_degree(n: i64, m: i64) -> Result<()> {
    if n < 0 || m.abs() > n {
        return Err(Error::InvalidDegree { n, m });
    }
    Ok(())
}
