//! Head-related impulse responses: direction-indexed sets, their SH
//! representation, and a seeded synthetic generator.
//!
//! HRTF container layout:
//!
//! ```text
//! AMBIMIX-HRTF 1
//! directions <D>
//! ir_length <L>
//! sample_rate <Hz>
//! <elevation> <azimuth>      (D lines, radians)
//! end
//! ```
//! followed by `2·D·L` little-endian f32 values: all left IRs (direction
//! order), then all right IRs.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::container::{push_f32, read_f32s, read_header, write_header};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::sh::{degree_of, num_coeffs, sh_all, Direction, QuadratureGrid, ShCoefficients};

const MAGIC: &str = "AMBIMIX-HRTF";

/// Highest SH order accepted for HRTF representations.
pub const MAX_ORDER: usize = 30;

pub const SUPPORTED_SAMPLE_RATES: [u32; 4] = [44_100, 48_000, 88_200, 96_000];

/// Default relative Tikhonov weight for [`encode_hrtf_sh`].
pub const DEFAULT_REGULARIZATION: f64 = 1e-6;

/// Energy of the synthetic HRIR tail relative to the first arrival.
pub const TAIL_LEVEL_DB: f64 = -6.0;

/// IR length produced by [`synthetic_hrtf`].
pub const SYNTHETIC_IR_LENGTH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ear {
    Left,
    Right,
}

impl Ear {
    pub const BOTH: [Ear; 2] = [Ear::Left, Ear::Right];
}

/// Measured (or synthesized) HRIRs on a set of directions.
#[derive(Debug, Clone, PartialEq)]
pub struct HrtfSet {
    directions: Vec<Direction>,
    left: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
    sample_rate: u32,
    ir_length: usize,
}

impl HrtfSet {
    pub fn new(
        directions: Vec<Direction>,
        left: Vec<Vec<f64>>,
        right: Vec<Vec<f64>>,
        sample_rate: u32,
    ) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::UnsupportedSampleRate(0));
        }
        for irs in [&left, &right] {
            if irs.len() != directions.len() {
                return Err(Error::LengthMismatch {
                    expected: directions.len(),
                    got: irs.len(),
                });
            }
        }
        let ir_length = left.first().map_or(0, Vec::len);
        if let Some(bad) = left.iter().chain(&right).find(|ir| ir.len() != ir_length) {
            return Err(Error::LengthMismatch {
                expected: ir_length,
                got: bad.len(),
            });
        }
        Ok(Self {
            directions,
            left,
            right,
            sample_rate,
            ir_length,
        })
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn ir_length(&self) -> usize {
        self.ir_length
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn irs(&self, ear: Ear) -> &[Vec<f64>] {
        match ear {
            Ear::Left => &self.left,
            Ear::Right => &self.right,
        }
    }

    pub fn ir(&self, ear: Ear, index: usize) -> &[f64] {
        &self.irs(ear)[index]
    }
}

pub fn encode_hrtf_set(set: &HrtfSet) -> Vec<u8> {
    let mut out = Vec::new();
    write_header(
        &mut out,
        MAGIC,
        &[
            ("directions", set.len().to_string()),
            ("ir_length", set.ir_length.to_string()),
            ("sample_rate", set.sample_rate.to_string()),
        ],
    );
    // the `end` line is last; splice the direction table in front of it
    out.truncate(out.len() - 4);
    for d in &set.directions {
        out.extend_from_slice(format!("{:?} {:?}\n", d.elevation(), d.azimuth()).as_bytes());
    }
    out.extend_from_slice(b"end\n");
    for ir in set.left.iter().chain(&set.right) {
        for v in ir {
            push_f32(&mut out, *v as f32);
        }
    }
    out
}

pub fn decode_hrtf_set(bytes: &[u8]) -> Result<HrtfSet> {
    let mut directions = Vec::new();
    let header = read_header(bytes, MAGIC, |line, offset| {
        let bad = |message: String| Error::Parse { offset, message };
        let mut parts = line.split_ascii_whitespace();
        let (Some(el), Some(az), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad(format!("expected `elevation azimuth`, found `{line}`")));
        };
        let el: f64 = el.parse().map_err(|_| bad(format!("invalid elevation `{el}`")))?;
        let az: f64 = az.parse().map_err(|_| bad(format!("invalid azimuth `{az}`")))?;
        let dir = Direction::new(el, az).map_err(|e| bad(e.to_string()))?;
        directions.push(dir);
        Ok(())
    })?;
    let count: usize = header.parse("directions")?;
    let ir_length: usize = header.parse("ir_length")?;
    let sample_rate: u32 = header.parse("sample_rate")?;
    if !SUPPORTED_SAMPLE_RATES.contains(&sample_rate) {
        return Err(Error::UnsupportedSampleRate(sample_rate));
    }
    if directions.len() != count {
        return Err(Error::Parse {
            offset: header.payload_offset,
            message: format!(
                "header declares {count} directions, table lists {}",
                directions.len()
            ),
        });
    }
    let values = read_f32s(bytes, header.payload_offset, 2 * count * ir_length)?;
    let mut irs = values
        .chunks_exact(ir_length.max(1))
        .map(|c| c.iter().map(|v| *v as f64).collect::<Vec<f64>>());
    let left: Vec<Vec<f64>> = (0..count)
        .map(|_| irs.next().unwrap_or_default())
        .collect();
    let right: Vec<Vec<f64>> = (0..count)
        .map(|_| irs.next().unwrap_or_default())
        .collect();
    HrtfSet::new(directions, left, right, sample_rate)
}

pub fn load_hrtf_set(path: &Path) -> Result<HrtfSet> {
    decode_hrtf_set(&fs::read(path)?)
}

pub fn save_hrtf_set(path: &Path, set: &HrtfSet) -> Result<()> {
    fs::write(path, encode_hrtf_set(set))?;
    Ok(())
}

/// SH coefficients of both ears, one complex sequence per ACN channel.
#[derive(Debug, Clone, PartialEq)]
pub struct HrtfSh {
    order: usize,
    sample_rate: u32,
    ir_length: usize,
    left: Vec<Vec<Complex64>>,
    right: Vec<Vec<Complex64>>,
    residual: [Vec<f64>; 2],
}

impl HrtfSh {
    /// Channels are indexed by ACN, each holding `ir_length` samples.
    pub fn from_channels(
        order: usize,
        sample_rate: u32,
        left: Vec<Vec<Complex64>>,
        right: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::OrderMismatch {
                requested: order,
                available: MAX_ORDER,
            });
        }
        let ir_length = left.first().map_or(0, Vec::len);
        for ch in [&left, &right] {
            if ch.len() != num_coeffs(order) {
                return Err(Error::LengthMismatch {
                    expected: num_coeffs(order),
                    got: ch.len(),
                });
            }
            if let Some(bad) = ch.iter().find(|c| c.len() != ir_length) {
                return Err(Error::LengthMismatch {
                    expected: ir_length,
                    got: bad.len(),
                });
            }
        }
        Ok(Self {
            order,
            sample_rate,
            ir_length,
            left,
            right,
            residual: [vec![0.0; ir_length], vec![0.0; ir_length]],
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn ir_length(&self) -> usize {
        self.ir_length
    }

    pub fn channels(&self, ear: Ear) -> &[Vec<Complex64>] {
        match ear {
            Ear::Left => &self.left,
            Ear::Right => &self.right,
        }
    }

    pub fn channel(&self, ear: Ear, index: usize) -> &[Complex64] {
        &self.channels(ear)[index]
    }

    /// Coefficients of one ear at time sample `t`.
    pub fn coefficients_at(&self, ear: Ear, t: usize) -> ShCoefficients {
        let data = self.channels(ear).iter().map(|c| c[t]).collect();
        ShCoefficients::from_vec(self.order, data).expect("channel count matches order")
    }

    /// Relative fit residual `‖Ax − b‖ / ‖b‖` per time sample; zero when
    /// the coefficients were given rather than fitted.
    pub fn residual(&self, ear: Ear) -> &[f64] {
        match ear {
            Ear::Left => &self.residual[0],
            Ear::Right => &self.residual[1],
        }
    }

    pub fn truncate(&self, order: usize) -> Result<Self> {
        if order > self.order {
            return Err(Error::InvalidTruncation {
                from: self.order,
                to: order,
            });
        }
        let keep = num_coeffs(order);
        Ok(Self {
            order,
            sample_rate: self.sample_rate,
            ir_length: self.ir_length,
            left: self.left[..keep].to_vec(),
            right: self.right[..keep].to_vec(),
            residual: self.residual.clone(),
        })
    }

    /// Reconstructed HRIR at `dir`.
    pub fn evaluate(&self, ear: Ear, dir: Direction) -> Vec<f64> {
        let y = sh_all(self.order, dir);
        let mut out = vec![0.0; self.ir_length];
        for (ch, y) in self.channels(ear).iter().zip(&y) {
            for (o, h) in out.iter_mut().zip(ch) {
                *o += (h * y).re;
            }
        }
        out
    }

    /// Evaluates both ears on `dirs`.
    pub fn to_set(&self, dirs: &[Direction]) -> Result<HrtfSet> {
        let left = dirs.iter().map(|d| self.evaluate(Ear::Left, *d)).collect();
        let right = dirs.iter().map(|d| self.evaluate(Ear::Right, *d)).collect();
        HrtfSet::new(dirs.to_vec(), left, right, self.sample_rate)
    }
}

/// Least-squares SH fit of both ears, solved independently per time sample.
///
/// Minimizes `‖A·h − b‖² + λ‖h‖²` with `λ = regularization · tr(AᴴA) / C`,
/// where `C = (order+1)²`. Pass 0 for an unregularized fit.
pub fn encode_hrtf_sh(set: &HrtfSet, order: usize, regularization: f64) -> Result<HrtfSh> {
    if order > MAX_ORDER {
        return Err(Error::OrderMismatch {
            requested: order,
            available: MAX_ORDER,
        });
    }
    let c = num_coeffs(order);
    let d = set.len();
    if d < c {
        return Err(Error::InsufficientDirections { needed: c, got: d });
    }
    let l = set.ir_length;

    let mut a = DMatrix::<Complex64>::zeros(d, c);
    for (row, dir) in set.directions.iter().enumerate() {
        for (col, y) in sh_all(order, *dir).into_iter().enumerate() {
            a[(row, col)] = y;
        }
    }
    // columns: left samples, then right samples
    let b = DMatrix::<Complex64>::from_fn(d, 2 * l, |row, col| {
        let v = if col < l {
            set.left[row][col]
        } else {
            set.right[row][col - l]
        };
        Complex64::new(v, 0.0)
    });

    let ah = a.adjoint();
    let mut gram = &ah * &a;
    let trace: f64 = (0..c).map(|i| gram[(i, i)].re).sum();
    let lambda = regularization * trace / c as f64;
    for i in 0..c {
        gram[(i, i)] += lambda;
    }
    let chol = gram.cholesky().ok_or(Error::Singular)?;
    let x = chol.solve(&(&ah * &b));
    let fitted = &a * &x;

    let mut residual = [vec![0.0; l], vec![0.0; l]];
    for col in 0..2 * l {
        let (mut err, mut norm) = (0.0, 0.0);
        for row in 0..d {
            err += (fitted[(row, col)] - b[(row, col)]).norm_sqr();
            norm += b[(row, col)].norm_sqr();
        }
        let r = if norm > 0.0 { (err / norm).sqrt() } else { err.sqrt() };
        residual[col / l][col % l] = r;
    }

    let channels = |offset: usize| -> Vec<Vec<Complex64>> {
        (0..c)
            .map(|ch| (0..l).map(|t| x[(ch, offset + t)]).collect())
            .collect()
    };
    let mut out = HrtfSh::from_channels(order, set.sample_rate, channels(0), channels(l))?;
    out.residual = residual;
    Ok(out)
}

/// Right-ear coefficients of a left/right symmetric head:
/// `h^r_{n,m} = (-1)^m h^l_{n,-m}`.
pub fn mirror_channels(left: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    (0..left.len())
        .map(|i| {
            let (n, m) = degree_of(i);
            let src = (n * n + n) as i64 - m;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            left[src as usize].iter().map(|v| v * sign).collect()
        })
        .collect()
}

/// Seeded band-limited HRTF coefficients of a symmetric head.
///
/// Order `n` gets standard deviation `1/(n+1)` and is high-passed by
/// `n / 10` first differences, so spatial detail grows with frequency as
/// in measured HRTFs. An exponential envelope shapes the IR. Negative
/// degrees follow from `h_{n,-m} = (-1)^m conj(h_{n,m})`, which keeps the
/// HRIRs real.
pub fn synthetic_hrtf_sh(order: usize, seed: u64, ir_length: usize, sample_rate: u32) -> Result<HrtfSh> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let c = num_coeffs(order);
    let mut left = vec![vec![Complex64::new(0.0, 0.0); ir_length]; c];
    let decay = (ir_length as f64 / 8.0).max(1.0);
    // tail energy `tail_gain²·decay/2` relative to a unit first arrival
    let tail_gain = (10f64.powf(TAIL_LEVEL_DB / 10.0) * 2.0 / decay).sqrt();
    for n in 0..=order {
        let diffs = n / 10;
        let norm = 1.0 / (binomial(2 * diffs, diffs).sqrt() * (n + 1) as f64);
        for m in 0..=n as i64 {
            let idx = (n * n + n) as i64;
            let mut draw = || -> Complex64 {
                let re: f64 = StandardNormal.sample(&mut rng);
                if m == 0 {
                    Complex64::new(re, 0.0)
                } else {
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im) / 2f64.sqrt()
                }
            };
            // first arrival, then an exponentially decaying tail
            let mut seq: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); ir_length + diffs];
            for (t, v) in seq.iter_mut().enumerate() {
                *v = draw() * tail_gain * (-(t as f64) / decay).exp();
            }
            if let Some(first) = seq.first_mut() {
                *first = draw();
            }
            for _ in 0..diffs {
                seq = seq.windows(2).map(|w| w[1] - w[0]).collect();
            }
            for (t, v) in seq.into_iter().enumerate() {
                let h = v * norm;
                left[(idx + m) as usize][t] = h;
                if m > 0 {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    left[(idx - m) as usize][t] = h.conj() * sign;
                }
            }
        }
    }
    let right = mirror_channels(&left);
    HrtfSh::from_channels(order, sample_rate, left, right)
}

/// Synthetic HRTF set sampled on `grid`, together with its exact coefficients.
pub fn synthetic_hrtf(order: usize, grid: &QuadratureGrid, seed: u64) -> Result<(HrtfSet, HrtfSh)> {
    synthetic_hrtf_with_length(order, grid, seed, SYNTHETIC_IR_LENGTH)
}

pub fn synthetic_hrtf_with_length(
    order: usize,
    grid: &QuadratureGrid,
    seed: u64,
    ir_length: usize,
) -> Result<(HrtfSet, HrtfSh)> {
    if grid.max_exact_order() < order {
        return Err(Error::AliasingRisk {
            requested: order,
            exact: grid.max_exact_order(),
        });
    }
    let coeffs = synthetic_hrtf_sh(order, seed, ir_length, crate::DEFAULT_SAMPLE_RATE)?;
    let set = coeffs.to_set(grid.directions())?;
    Ok((set, coeffs))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
