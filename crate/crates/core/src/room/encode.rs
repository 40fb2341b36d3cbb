use std::f64::consts::PI;

use num_complex::Complex64;

use super::ImageSource;
use crate::error::{Error, Result};
use crate::sh::{normalized_legendre, num_coeffs, rotate_in_place, ShCoefficients};

/// Length of the band-limited fractional-delay pulse.
pub const PULSE_TAPS: usize = 64;

/// Time-domain SH signal: one complex sequence per ACN channel.
///
/// Only the window `[start, start + window_len)` is stored; samples outside
/// it are zero. `len` is the full signal length.
#[derive(Debug, Clone, PartialEq)]
pub struct ShSignal {
    order: usize,
    sample_rate: u32,
    len: usize,
    start: usize,
    channels: Vec<Vec<Complex64>>,
}

impl ShSignal {
    /// All-zero signal with an empty window.
    pub fn zeros(order: usize, sample_rate: u32, len: usize) -> Self {
        Self {
            order,
            sample_rate,
            len,
            start: 0,
            channels: vec![Vec::new(); num_coeffs(order)],
        }
    }

    pub fn from_channels(
        order: usize,
        sample_rate: u32,
        len: usize,
        start: usize,
        channels: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if channels.len() != num_coeffs(order) {
            return Err(Error::LengthMismatch {
                expected: num_coeffs(order),
                got: channels.len(),
            });
        }
        let window = channels[0].len();
        if let Some(bad) = channels.iter().find(|c| c.len() != window) {
            return Err(Error::LengthMismatch {
                expected: window,
                got: bad.len(),
            });
        }
        if start + window > len {
            return Err(Error::LengthMismatch {
                expected: len,
                got: start + window,
            });
        }
        Ok(Self {
            order,
            sample_rate,
            len,
            start,
            channels,
        })
    }

    /// Builds a signal from per-sample coefficient frames starting at `start`.
    pub fn from_frames(sample_rate: u32, len: usize, start: usize, frames: &[ShCoefficients]) -> Result<Self> {
        let order = frames.first().map_or(0, |f| f.order());
        let mut channels = vec![Vec::with_capacity(frames.len()); num_coeffs(order)];
        for f in frames {
            if f.order() != order {
                return Err(Error::OrderMismatch {
                    requested: f.order(),
                    available: order,
                });
            }
            for (ch, v) in channels.iter_mut().zip(f.as_slice()) {
                ch.push(*v);
            }
        }
        Self::from_channels(order, sample_rate, len, start, channels)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn window_len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Stored window of channel `index`.
    pub fn channel(&self, index: usize) -> &[Complex64] {
        &self.channels[index]
    }

    /// Channel `index` over the full length.
    pub fn channel_full(&self, index: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len];
        out[self.start..self.start + self.window_len()].copy_from_slice(&self.channels[index]);
        out
    }

    pub fn channel_energy(&self, index: usize) -> f64 {
        self.channels[index].iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn total_energy(&self) -> f64 {
        (0..self.channels.len()).map(|i| self.channel_energy(i)).sum()
    }

    /// Coefficients at sample `t`.
    pub fn frame(&self, t: usize) -> ShCoefficients {
        let data = if t >= self.start && t < self.start + self.window_len() {
            self.channels.iter().map(|c| c[t - self.start]).collect()
        } else {
            vec![Complex64::new(0.0, 0.0); self.channels.len()]
        };
        ShCoefficients::from_vec(self.order, data).expect("channel count matches order")
    }

    pub fn truncate(&self, order: usize) -> Result<Self> {
        if order > self.order {
            return Err(Error::InvalidTruncation {
                from: self.order,
                to: order,
            });
        }
        Ok(Self {
            order,
            sample_rate: self.sample_rate,
            len: self.len,
            start: self.start,
            channels: self.channels[..num_coeffs(order)].to_vec(),
        })
    }

    /// See [`ShCoefficients::rotate_azimuth`].
    pub fn rotate_azimuth(&self, delta: f64) -> Self {
        let mut out = self.clone();
        let window = self.window_len();
        let mut frame = vec![Complex64::new(0.0, 0.0); self.channels.len()];
        for t in 0..window {
            for (f, ch) in frame.iter_mut().zip(&out.channels) {
                *f = ch[t];
            }
            rotate_in_place(&mut frame, self.order, delta);
            for (f, ch) in frame.iter().zip(out.channels.iter_mut()) {
                ch[t] = *f;
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for ch in &mut out.channels {
            for v in ch {
                *v *= factor;
            }
        }
        out
    }

    /// Sample-wise sum; the window grows to cover both operands.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.order != other.order {
            return Err(Error::OrderMismatch {
                requested: other.order,
                available: self.order,
            });
        }
        if self.sample_rate != other.sample_rate {
            return Err(Error::SampleRateMismatch(self.sample_rate, other.sample_rate));
        }
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                got: other.len,
            });
        }
        let (a_lo, a_hi) = (self.start, self.start + self.window_len());
        let (b_lo, b_hi) = (other.start, other.start + other.window_len());
        let (lo, hi) = match (a_hi > a_lo, b_hi > b_lo) {
            (false, false) => return Ok(Self::zeros(self.order, self.sample_rate, self.len)),
            (true, false) => return Ok(self.clone()),
            (false, true) => return Ok(other.clone()),
            (true, true) => (a_lo.min(b_lo), a_hi.max(b_hi)),
        };
        let mut channels = vec![vec![Complex64::new(0.0, 0.0); hi - lo]; self.channels.len()];
        for (i, out) in channels.iter_mut().enumerate() {
            for (k, v) in self.channels[i].iter().enumerate() {
                out[a_lo - lo + k] = *v;
            }
            for (k, v) in other.channels[i].iter().enumerate() {
                out[b_lo - lo + k] += v;
            }
        }
        Self::from_channels(self.order, self.sample_rate, self.len, lo, channels)
    }
}

/// SH room impulse response split into the direct path and everything else.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitShRir {
    direct: ShSignal,
    reverberant: ShSignal,
}

impl SplitShRir {
    pub fn new(direct: ShSignal, reverberant: ShSignal) -> Result<Self> {
        if direct.order != reverberant.order {
            return Err(Error::OrderMismatch {
                requested: reverberant.order,
                available: direct.order,
            });
        }
        if direct.sample_rate != reverberant.sample_rate {
            return Err(Error::SampleRateMismatch(direct.sample_rate, reverberant.sample_rate));
        }
        if direct.len != reverberant.len {
            return Err(Error::LengthMismatch {
                expected: direct.len,
                got: reverberant.len,
            });
        }
        Ok(Self { direct, reverberant })
    }

    pub fn direct(&self) -> &ShSignal {
        &self.direct
    }

    pub fn reverberant(&self) -> &ShSignal {
        &self.reverberant
    }

    pub fn order(&self) -> usize {
        self.direct.order
    }

    pub fn sample_rate(&self) -> u32 {
        self.direct.sample_rate
    }

    pub fn len(&self) -> usize {
        self.direct.len
    }

    pub fn is_empty(&self) -> bool {
        self.direct.len == 0
    }

    /// Full response `direct + reverberant`.
    pub fn total(&self) -> ShSignal {
        self.direct.add(&self.reverberant).expect("components share shape")
    }

    /// Pressure at the listener position, `sqrt(4π)·a_00(t)`.
    pub fn omni(&self) -> Vec<f64> {
        let scale = (4.0 * PI).sqrt();
        let mut out = vec![0.0; self.len()];
        for sig in [&self.direct, &self.reverberant] {
            for (k, v) in sig.channels[0].iter().enumerate() {
                out[sig.start + k] += v.re * scale;
            }
        }
        out
    }

    pub fn direct_only(&self) -> Self {
        Self {
            direct: self.direct.clone(),
            reverberant: ShSignal::zeros(self.order(), self.sample_rate(), self.len()),
        }
    }

    pub fn reverberant_only(&self) -> Self {
        Self {
            direct: ShSignal::zeros(self.order(), self.sample_rate(), self.len()),
            reverberant: self.reverberant.clone(),
        }
    }

    pub fn truncate(&self, order: usize) -> Result<Self> {
        Ok(Self {
            direct: self.direct.truncate(order)?,
            reverberant: self.reverberant.truncate(order)?,
        })
    }

    pub fn rotate_azimuth(&self, delta: f64) -> Self {
        Self {
            direct: self.direct.rotate_azimuth(delta),
            reverberant: self.reverberant.rotate_azimuth(delta),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            direct: self.direct.scale(factor),
            reverberant: self.reverberant.scale(factor),
        }
    }
}

/// Unit-energy Hann-windowed sinc centred on `center` (in samples).
/// Returns the index of the first tap and the taps.
pub fn fractional_delay_pulse(center: f64) -> (i64, [f64; PULSE_TAPS]) {
    let half = (PULSE_TAPS / 2) as f64;
    let first = center.floor() as i64 - (PULSE_TAPS as i64 / 2 - 1);
    let mut taps = [0.0; PULSE_TAPS];
    for (k, tap) in taps.iter_mut().enumerate() {
        let x = (first + k as i64) as f64 - center;
        let sinc = if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
        let window = if x.abs() < half {
            0.5 * (1.0 + (PI * x / half).cos())
        } else {
            0.0
        };
        *tap = sinc * window;
    }
    let norm = taps.iter().map(|v| v * v).sum::<f64>().sqrt();
    for tap in &mut taps {
        *tap /= norm;
    }
    (first, taps)
}

struct Placed {
    first: usize,
    taps: [f64; PULSE_TAPS],
}

fn place(image: &ImageSource, sample_rate: u32, n_samples: usize, length: f64) -> Result<Placed> {
    let (first, taps) = fractional_delay_pulse(image.delay * sample_rate as f64);
    if first < 0 || first as usize + PULSE_TAPS > n_samples {
        return Err(Error::Truncation {
            delay: image.delay,
            length,
        });
    }
    Ok(Placed {
        first: first as usize,
        taps,
    })
}

/// Accumulates `gain · pulse · conj(Y_n^m)` of every image into `channels`,
/// computing `m >= 0` and completing `m < 0` by conjugate symmetry (the
/// encoded field is real in the time domain).
fn accumulate(
    images: &[(&ImageSource, Placed)],
    order: usize,
    start: usize,
    window: usize,
) -> Vec<Vec<Complex64>> {
    let mut channels = vec![vec![Complex64::new(0.0, 0.0); window]; num_coeffs(order)];
    for (image, placed) in images {
        let legendre = normalized_legendre(order, image.direction.elevation());
        let offset = placed.first - start;
        for m in 0..=order {
            let rot = Complex64::from_polar(image.gain, -(m as f64) * image.direction.azimuth());
            for n in m..=order {
                let coef = rot * legendre[n * (n + 1) / 2 + m];
                let ch = &mut channels[n * n + n + m][offset..offset + PULSE_TAPS];
                for (v, p) in ch.iter_mut().zip(&placed.taps) {
                    v.re += coef.re * p;
                    v.im += coef.im * p;
                }
            }
        }
    }
    for n in 1..=order {
        for m in 1..=n {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let (lo, hi) = channels.split_at_mut(n * n + n);
            let neg = &mut lo[n * n + n - m];
            for (dst, src) in neg.iter_mut().zip(&hi[m]) {
                *dst = src.conj() * sign;
            }
        }
    }
    channels
}

fn component(
    images: Vec<(&ImageSource, Placed)>,
    order: usize,
    sample_rate: u32,
    n_samples: usize,
) -> ShSignal {
    if images.is_empty() {
        return ShSignal::zeros(order, sample_rate, n_samples);
    }
    let start = images.iter().map(|(_, p)| p.first).min().unwrap_or(0);
    let end = images
        .iter()
        .map(|(_, p)| p.first + PULSE_TAPS)
        .max()
        .unwrap_or(start);
    let channels = accumulate(&images, order, start, end - start);
    ShSignal {
        order,
        sample_rate,
        len: n_samples,
        start,
        channels,
    }
}

/// Encodes image sources into a split SH impulse response of `length` seconds.
/// The zero-reflection image forms the direct part.
pub fn encode_sh_rir(images: &[ImageSource], order: usize, sample_rate: u32, length: f64) -> Result<SplitShRir> {
    let n_samples = (length * sample_rate as f64).round() as usize;
    let mut direct = Vec::new();
    let mut reverberant = Vec::new();
    for image in images {
        let placed = place(image, sample_rate, n_samples, length)?;
        if image.reflection_count == 0 {
            direct.push((image, placed));
        } else {
            reverberant.push((image, placed));
        }
    }
    SplitShRir::new(
        component(direct, order, sample_rate, n_samples),
        component(reverberant, order, sample_rate, n_samples),
    )
}
