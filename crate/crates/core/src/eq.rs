//! Spectral equalization of order-truncated binaural signals to a reference.
//!
//! The gain curve is the ratio of fractional-octave smoothed magnitudes
//! (RMS across ears), clipped, held constant outside `[HOLD_LOW, HOLD_HIGH]`
//! and turned into a minimum-phase FIR with the real-cepstrum method. One
//! filter serves both ears, so interaural differences are untouched.
//!
//! Filter file layout:
//!
//! ```text
//! AMBIMIX-EQ 1
//! taps <N>
//! sample_rate <Hz>
//! smoothing_fraction <octaves>
//! gain_limit_db <dB>
//! end
//! ```
//! followed by `N` little-endian f32 taps.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::audio::Stereo;
use crate::container::{push_f32, read_f32s, read_header, write_header};
use crate::error::{Error, Result};
use crate::fft;

const MAGIC: &str = "AMBIMIX-EQ";

pub const DEFAULT_TAPS: usize = 16_384;
pub const DEFAULT_SMOOTHING: f64 = 1.0 / 3.0;
pub const DEFAULT_GAIN_LIMIT_DB: f64 = 20.0;

/// Below this frequency the gain is held at its value here.
pub const HOLD_LOW: f64 = 50.0;
/// Above this frequency the gain is held at its value here.
pub const HOLD_HIGH: f64 = 18_000.0;

/// FFT size of the design grid (minimum-phase construction).
pub const DESIGN_FFT: usize = 32_768;

#[derive(Debug, Clone, PartialEq)]
pub struct EqFilter {
    pub taps: Vec<f64>,
    pub sample_rate: u32,
    /// Smoothing bandwidth in octaves.
    pub smoothing_fraction: f64,
    pub gain_limit_db: f64,
}

impl EqFilter {
    /// Unit impulse.
    pub fn identity(sample_rate: u32) -> Self {
        Self {
            taps: vec![1.0],
            sample_rate,
            smoothing_fraction: DEFAULT_SMOOTHING,
            gain_limit_db: DEFAULT_GAIN_LIMIT_DB,
        }
    }

    /// Magnitude response on `n_fft` bins (0..=n_fft/2).
    pub fn magnitude(&self, n_fft: usize) -> Vec<f64> {
        let spec = fft::spectrum(&self.taps, n_fft.max(self.taps.len()));
        spec[..spec.len() / 2 + 1].iter().map(|v| v.norm()).collect()
    }
}

/// Power average over `[f·2^(-fraction/2), f·2^(fraction/2)]` at every
/// bin; returns magnitudes. Bin `k` is taken as frequency `k`.
pub fn fractional_octave_smooth(magnitude: &[f64], fraction: f64) -> Vec<f64> {
    let n = magnitude.len();
    let mut prefix = vec![0.0; n + 1];
    for (i, m) in magnitude.iter().enumerate() {
        prefix[i + 1] = prefix[i] + m * m;
    }
    let half = 2f64.powf(fraction / 2.0);
    (0..n)
        .map(|k| {
            let kf = k as f64;
            let lo = ((kf / half).ceil() as usize).min(k);
            let hi = ((kf * half).floor() as usize).clamp(k, n - 1);
            ((prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64).sqrt()
        })
        .collect()
}

/// Per-bin power averaged over both ears, `n_fft/2 + 1` bins.
fn ear_power(x: &Stereo, n_fft: usize) -> Vec<f64> {
    let l = fft::spectrum(x.left(), n_fft);
    let r = fft::spectrum(x.right(), n_fft);
    (0..=n_fft / 2)
        .map(|k| 0.5 * (l[k].norm_sqr() + r[k].norm_sqr()))
        .collect()
}

/// Linear gain curve on the `DESIGN_FFT` grid (`DESIGN_FFT/2 + 1` bins).
pub fn eq_gain_curve(truncated: &Stereo, reference: &Stereo, smoothing_fraction: f64, gain_limit_db: f64) -> Result<Vec<f64>> {
    if truncated.sample_rate() != reference.sample_rate() {
        return Err(Error::SampleRateMismatch(truncated.sample_rate(), reference.sample_rate()));
    }
    if truncated.energy() == 0.0 {
        return Err(Error::ZeroEnergy("truncated signal".into()));
    }
    let fs = reference.sample_rate() as f64;
    let n_fft = fft::next_pow2(truncated.len().max(reference.len())).max(DESIGN_FFT);
    let smooth = |x: &Stereo| {
        let mag: Vec<f64> = ear_power(x, n_fft).into_iter().map(f64::sqrt).collect();
        fractional_octave_smooth(&mag, smoothing_fraction)
    };
    let reference_mag = smooth(reference);
    let truncated_mag = smooth(truncated);
    let limit = 10f64.powf(gain_limit_db / 20.0);
    let raw: Vec<f64> = reference_mag
        .iter()
        .zip(&truncated_mag)
        .map(|(r, t)| {
            let g = r / t;
            if g.is_nan() {
                1.0
            } else {
                g.clamp(1.0 / limit, limit)
            }
        })
        .collect();

    // resample to the design grid and hold the band edges
    let step = fs / n_fft as f64;
    let design_step = fs / DESIGN_FFT as f64;
    let at = |f: f64| -> f64 {
        let pos = f / step;
        let i = (pos.floor() as usize).min(raw.len() - 2);
        let frac = pos - i as f64;
        raw[i] * (1.0 - frac) + raw[i + 1] * frac
    };
    let low = at(HOLD_LOW);
    let high = at(HOLD_HIGH.min(fs / 2.0));
    Ok((0..=DESIGN_FFT / 2)
        .map(|k| {
            let f = k as f64 * design_step;
            if f < HOLD_LOW {
                low
            } else if f > HOLD_HIGH {
                high
            } else {
                at(f)
            }
        })
        .collect())
}

/// Minimum-phase impulse response of `taps` samples whose magnitude on the
/// design grid is `gain` (`n/2 + 1` bins).
pub fn minimum_phase(gain: &[f64], taps: usize) -> Vec<f64> {
    let n = 2 * (gain.len() - 1);
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| {
            let g = gain[k.min(n - k)];
            Complex64::new(g.max(1e-300).ln(), 0.0)
        })
        .collect();
    fft::inverse(&mut buf);
    // fold the real cepstrum onto positive quefrencies
    for (q, c) in buf.iter_mut().enumerate() {
        let w = match q {
            0 => 1.0,
            q if q < n / 2 => 2.0,
            q if q == n / 2 => 1.0,
            _ => 0.0,
        };
        *c = Complex64::new(c.re * w, 0.0);
    }
    fft::forward(&mut buf);
    for v in buf.iter_mut() {
        *v = v.exp();
    }
    fft::inverse(&mut buf);
    buf.iter().take(taps).map(|v| v.re).collect()
}

pub fn design_eq(
    truncated: &Stereo,
    reference: &Stereo,
    smoothing_fraction: f64,
    gain_limit_db: f64,
) -> Result<EqFilter> {
    let gain = eq_gain_curve(truncated, reference, smoothing_fraction, gain_limit_db)?;
    Ok(EqFilter {
        taps: minimum_phase(&gain, DEFAULT_TAPS),
        sample_rate: reference.sample_rate(),
        smoothing_fraction,
        gain_limit_db,
    })
}

/// Convolves both channels with the filter taps.
pub fn apply_eq(signal: &Stereo, filter: &EqFilter) -> Result<Stereo> {
    if signal.sample_rate() != filter.sample_rate {
        return Err(Error::SampleRateMismatch(signal.sample_rate(), filter.sample_rate));
    }
    Stereo::new(
        fft::convolve_real(signal.left(), &filter.taps),
        fft::convolve_real(signal.right(), &filter.taps),
        signal.sample_rate(),
    )
}

/// Energy of one fractional-octave band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandEnergy {
    pub center: f64,
    pub energy: f64,
}

/// Band energies (both ears summed) of bands centred on
/// `1000·2^(k·fraction)` whose centres fall in `[f_lo, f_hi]`.
pub fn band_energies(x: &Stereo, fraction: f64, f_lo: f64, f_hi: f64) -> Vec<BandEnergy> {
    let n_fft = fft::next_pow2(x.len());
    let power = ear_power(x, n_fft);
    let step = x.sample_rate() as f64 / n_fft as f64;
    let k_lo = ((f_lo / 1000.0).log2() / fraction).ceil() as i64;
    let k_hi = ((f_hi / 1000.0).log2() / fraction).floor() as i64;
    (k_lo..=k_hi)
        .map(|k| {
            let center = 1000.0 * 2f64.powf(k as f64 * fraction);
            let lo = center * 2f64.powf(-fraction / 2.0);
            let hi = center * 2f64.powf(fraction / 2.0);
            let energy = power
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    let f = *i as f64 * step;
                    f >= lo && f < hi
                })
                .map(|(_, p)| 2.0 * p)
                .sum::<f64>()
                / n_fft as f64;
            BandEnergy { center, energy }
        })
        .collect()
}

pub fn encode_eq_filter(filter: &EqFilter) -> Vec<u8> {
    let mut out = Vec::new();
    write_header(
        &mut out,
        MAGIC,
        &[
            ("taps", filter.taps.len().to_string()),
            ("sample_rate", filter.sample_rate.to_string()),
            ("smoothing_fraction", format!("{:?}", filter.smoothing_fraction)),
            ("gain_limit_db", format!("{:?}", filter.gain_limit_db)),
        ],
    );
    for v in &filter.taps {
        push_f32(&mut out, *v as f32);
    }
    out
}

pub fn decode_eq_filter(bytes: &[u8]) -> Result<EqFilter> {
    let header = read_header(bytes, MAGIC, |line, offset| {
        Err(Error::Parse {
            offset,
            message: format!("unexpected header line `{line}`"),
        })
    })?;
    let n: usize = header.parse("taps")?;
    let taps = read_f32s(bytes, header.payload_offset, n)?;
    Ok(EqFilter {
        taps: taps.into_iter().map(f64::from).collect(),
        sample_rate: header.parse("sample_rate")?,
        smoothing_fraction: header.parse("smoothing_fraction")?,
        gain_limit_db: header.parse("gain_limit_db")?,
    })
}

pub fn write_eq_filter(path: &Path, filter: &EqFilter) -> Result<()> {
    fs::write(path, encode_eq_filter(filter))?;
    Ok(())
}

pub fn read_eq_filter(path: &Path) -> Result<EqFilter> {
    decode_eq_filter(&fs::read(path)?)
}
