use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::{num_coeffs, sh_all, sh_all_into, Direction, ShCoefficients};
use crate::error::{Error, Result};

/// Sampling of the sphere with quadrature weights.
///
/// `max_exact_order` is the largest `N` for which products of two functions
/// band-limited to `N` integrate exactly.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    directions: Vec<Direction>,
    weights: Vec<f64>,
    max_exact_order: usize,
}

impl QuadratureGrid {
    pub fn new(directions: Vec<Direction>, weights: Vec<f64>, max_exact_order: usize) -> Result<Self> {
        if directions.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: directions.len(),
                got: weights.len(),
            });
        }
        Ok(Self {
            directions,
            weights,
            max_exact_order,
        })
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn max_exact_order(&self) -> usize {
        self.max_exact_order
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let nf = count as f64;
    for i in 0..count.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_count.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(count, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(count, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        nodes[count - 1 - i] = -x;
        weights[i] = w;
        weights[count - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre (elevation) × equiangular (azimuth) grid with
/// `order+1` rings of `2·order+2` points.
pub fn make_grid(order: usize) -> QuadratureGrid {
    let (nodes, gl_weights) = gauss_legendre(order + 1);
    let n_az = 2 * order + 2;
    let dphi = TAU / n_az as f64;
    let mut directions = Vec::with_capacity(nodes.len() * n_az);
    let mut weights = Vec::with_capacity(nodes.len() * n_az);
    for (x, w) in nodes.iter().zip(&gl_weights) {
        let elevation = x.clamp(-1.0, 1.0).acos();
        for k in 0..n_az {
            let dir = Direction::new(elevation, -PI + k as f64 * dphi)
                .expect("grid angles are in range");
            directions.push(dir);
            weights.push(w * dphi);
        }
    }
    QuadratureGrid {
        directions,
        weights,
        max_exact_order: order,
    }
}

/// Forward transform `c_nm = Σ_j w_j f(d_j) conj(Y_n^m(d_j))`.
pub fn sft(values: &[Complex64], grid: &QuadratureGrid, order: usize) -> Result<ShCoefficients> {
    if order > grid.max_exact_order {
        return Err(Error::AliasingRisk {
            requested: order,
            exact: grid.max_exact_order,
        });
    }
    if values.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); num_coeffs(order)];
    let mut y = vec![Complex64::new(0.0, 0.0); num_coeffs(order)];
    for ((dir, w), f) in grid.directions.iter().zip(&grid.weights).zip(values) {
        sh_all_into(order, *dir, &mut y);
        let wf = f * *w;
        for (c, yv) in coeffs.iter_mut().zip(&y) {
            *c += wf * yv.conj();
        }
    }
    ShCoefficients::from_vec(order, coeffs)
}

/// Inverse transform `f(d) = Σ_nm c_nm Y_n^m(d)` at each direction.
pub fn isft(coeffs: &ShCoefficients, dirs: &[Direction]) -> Vec<Complex64> {
    dirs.iter()
        .map(|dir| {
            sh_all(coeffs.order(), *dir)
                .iter()
                .zip(coeffs.as_slice())
                .map(|(y, c)| c * y)
                .sum()
        })
        .collect()
}
