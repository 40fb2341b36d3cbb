//! Source signals, stereo buffers, pink-noise bursts and WAV files.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fft;
use crate::hrtf::Ear;
use crate::rng::SplitMix64;

/// Peak level of generated noise before fading.
const NOISE_PEAK: f64 = 0.9;

/// Mono source signal `s(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSignal {
    samples: Vec<f64>,
    sample_rate: u32,
    label: String,
}

impl SourceSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32, label: impl Into<String>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::UnsupportedSampleRate(0));
        }
        if let Some(i) = samples.iter().position(|v| !(v.abs() <= 1.0)) {
            return Err(Error::InvalidSignal(format!(
                "sample {i} = {} outside [-1, 1]",
                samples[i]
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
            label: label.into(),
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Two-channel buffer, used for binaural impulse responses and rendered
/// signals alike.
#[derive(Debug, Clone, PartialEq)]
pub struct Stereo {
    left: Vec<f64>,
    right: Vec<f64>,
    sample_rate: u32,
}

impl Stereo {
    pub fn new(left: Vec<f64>, right: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::LengthMismatch {
                expected: left.len(),
                got: right.len(),
            });
        }
        if left.iter().chain(&right).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal("non-finite sample".into()));
        }
        Ok(Self {
            left,
            right,
            sample_rate,
        })
    }

    pub fn silent(len: usize, sample_rate: u32) -> Self {
        Self {
            left: vec![0.0; len],
            right: vec![0.0; len],
            sample_rate,
        }
    }

    pub fn left(&self) -> &[f64] {
        &self.left
    }

    pub fn right(&self) -> &[f64] {
        &self.right
    }

    pub fn channel(&self, ear: Ear) -> &[f64] {
        match ear {
            Ear::Left => &self.left,
            Ear::Right => &self.right,
        }
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.left, self.right)
    }

    /// Sum of squares over both channels.
    pub fn energy(&self) -> f64 {
        self.left.iter().chain(&self.right).map(|v| v * v).sum()
    }

    /// RMS over both channels.
    pub fn rms(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        (self.energy() / (2 * self.len()) as f64).sqrt()
    }

    pub fn peak(&self) -> f64 {
        self.left
            .iter()
            .chain(&self.right)
            .fold(0.0, |p, v| p.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            left: self.left.iter().map(|v| v * factor).collect(),
            right: self.right.iter().map(|v| v * factor).collect(),
            sample_rate: self.sample_rate,
        }
    }

    /// Energy of `self − other`, zero-extending the shorter buffer.
    pub fn difference_energy(&self, other: &Self) -> f64 {
        let diff = |a: &[f64], b: &[f64]| -> f64 {
            (0..a.len().max(b.len()))
                .map(|i| {
                    let d = a.get(i).unwrap_or(&0.0) - b.get(i).unwrap_or(&0.0);
                    d * d
                })
                .sum()
        };
        diff(&self.left, &other.left) + diff(&self.right, &other.right)
    }
}

/// Rising half of a raised-cosine window, `len` samples, excluding the
/// endpoints 0 and 1.
pub fn raised_cosine_fade(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| 0.5 * (1.0 - (PI * (i as f64 + 0.5) / len as f64).cos()))
        .collect()
}

/// Seeded `1/f`-power Gaussian noise of `len` samples, peak-normalized.
pub fn pink_noise(len: usize, seed: u64) -> Vec<f64> {
    if len == 0 {
        return Vec::new();
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut buf: Vec<Complex64> = (0..len)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), 0.0))
        .collect();
    fft::forward(&mut buf);
    buf[0] = Complex64::new(0.0, 0.0);
    for (k, v) in buf.iter_mut().enumerate().skip(1) {
        // bin frequency index, folded for the upper half
        let f = k.min(len - k) as f64;
        *v /= f.sqrt();
    }
    fft::inverse(&mut buf);
    let peak = buf.iter().fold(0.0f64, |p, v| p.max(v.re.abs()));
    buf.iter().map(|v| v.re * NOISE_PEAK / peak).collect()
}

/// Repeating pink-noise burst: one burst with raised-cosine fade-in/out,
/// repeated `repetitions` times with silent pauses in between.
pub fn pink_burst(
    burst_len: f64,
    fade_len: f64,
    pause_len: f64,
    repetitions: usize,
    seed: u64,
    sample_rate: u32,
) -> Result<SourceSignal> {
    let fs = sample_rate as f64;
    let valid = |v: f64| v.is_finite() && v >= 0.0;
    if !(valid(burst_len) && valid(fade_len) && valid(pause_len)) || burst_len == 0.0 {
        return Err(Error::InvalidDuration(format!(
            "burst {burst_len} s, fade {fade_len} s, pause {pause_len} s"
        )));
    }
    if 2.0 * fade_len > burst_len {
        return Err(Error::InvalidDuration(format!(
            "two fades of {fade_len} s exceed the {burst_len} s burst"
        )));
    }
    if repetitions == 0 {
        return Err(Error::InvalidDuration("zero repetitions".into()));
    }
    if sample_rate == 0 {
        return Err(Error::UnsupportedSampleRate(0));
    }
    let burst_n = (burst_len * fs).round() as usize;
    let fade_n = (fade_len * fs).round() as usize;
    let pause_n = (pause_len * fs).round() as usize;

    let mut burst = pink_noise(burst_n, seed);
    let fade = raised_cosine_fade(fade_n);
    for (i, g) in fade.iter().enumerate() {
        burst[i] *= g;
        burst[burst_n - 1 - i] *= g;
    }
    let mut samples = Vec::with_capacity(repetitions * burst_n + (repetitions - 1) * pause_n);
    for r in 0..repetitions {
        if r > 0 {
            samples.resize(samples.len() + pause_n, 0.0);
        }
        samples.extend_from_slice(&burst);
    }
    SourceSignal::new(samples, sample_rate, format!("pink-{seed}"))
}

/// Scales each signal by one scalar so all share the RMS of the first.
pub fn rms_normalize(signals: &[Stereo]) -> Result<Vec<Stereo>> {
    let Some(first) = signals.first() else {
        return Ok(Vec::new());
    };
    let target = first.rms();
    signals
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let rms = s.rms();
            if rms == 0.0 {
                return Err(Error::ZeroEnergy(format!("signal {i}")));
            }
            Ok(s.scaled(target / rms))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Pcm16,
    Pcm24,
    Float32,
}

impl SampleFormat {
    fn bits(&self) -> u16 {
        match self {
            Self::Pcm16 => 16,
            Self::Pcm24 => 24,
            Self::Float32 => 32,
        }
    }

    fn tag(&self) -> u16 {
        match self {
            Self::Float32 => 3,
            _ => 1,
        }
    }
}

/// Decoded WAV contents, one vector per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct WavData {
    pub channels: Vec<Vec<f64>>,
    pub sample_rate: u32,
    pub format: SampleFormat,
}

impl WavData {
    pub fn into_mono(self, label: impl Into<String>) -> Result<SourceSignal> {
        if self.channels.len() != 1 {
            return Err(Error::UnsupportedFormat(format!(
                "expected a mono file, found {} channels",
                self.channels.len()
            )));
        }
        let samples = self.channels.into_iter().next().unwrap_or_default();
        SourceSignal::new(samples, self.sample_rate, label)
    }

    pub fn into_stereo(self) -> Result<Stereo> {
        if self.channels.len() != 2 {
            return Err(Error::UnsupportedFormat(format!(
                "expected a stereo file, found {} channels",
                self.channels.len()
            )));
        }
        let mut it = self.channels.into_iter();
        let left = it.next().unwrap_or_default();
        let right = it.next().unwrap_or_default();
        Stereo::new(left, right, self.sample_rate)
    }
}

fn quantize(v: f64, bits: u16) -> i32 {
    let full = (1i64 << (bits - 1)) as f64;
    (v * full).round().clamp(-full, full - 1.0) as i32
}

pub fn encode_wav(channels: &[&[f64]], sample_rate: u32, format: SampleFormat) -> Result<Vec<u8>> {
    if channels.is_empty() || channels.len() > 2 {
        return Err(Error::UnsupportedFormat(format!(
            "channel count {} (1 or 2 supported)",
            channels.len()
        )));
    }
    let frames = channels[0].len();
    if let Some(c) = channels.iter().find(|c| c.len() != frames) {
        return Err(Error::LengthMismatch {
            expected: frames,
            got: c.len(),
        });
    }
    let n_ch = channels.len() as u16;
    let bytes_per = format.bits() / 8;
    let block = n_ch * bytes_per;
    let data_len = frames * block as usize;

    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&format.tag().to_le_bytes());
    out.extend_from_slice(&n_ch.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * block as u32).to_le_bytes());
    out.extend_from_slice(&block.to_le_bytes());
    out.extend_from_slice(&format.bits().to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for t in 0..frames {
        for ch in channels {
            let v = ch[t];
            match format {
                SampleFormat::Float32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
                SampleFormat::Pcm16 => out.extend_from_slice(&(quantize(v, 16) as i16).to_le_bytes()),
                SampleFormat::Pcm24 => out.extend_from_slice(&quantize(v, 24).to_le_bytes()[..3]),
            }
        }
    }
    Ok(out)
}

pub fn decode_wav(bytes: &[u8]) -> Result<WavData> {
    let parse = |offset: usize, message: &str| Error::Parse {
        offset,
        message: message.to_string(),
    };
    let u16_at = |o: usize| u16::from_le_bytes([bytes[o], bytes[o + 1]]);
    let u32_at = |o: usize| u32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]]);

    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" {
        return Err(parse(0, "missing RIFF tag"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(parse(8, "missing WAVE tag"));
    }
    let mut pos = 12;
    let mut fmt: Option<(SampleFormat, u16, u32)> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(pos + 4) as usize;
        let body = pos + 8;
        if body + size > bytes.len() {
            return Err(parse(pos + 4, "chunk extends past end of file"));
        }
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(parse(pos + 4, "fmt chunk shorter than 16 bytes"));
                }
                let mut tag = u16_at(body);
                let channels = u16_at(body + 2);
                let rate = u32_at(body + 4);
                let bits = u16_at(body + 14);
                if tag == 0xFFFE && size >= 40 {
                    // WAVE_FORMAT_EXTENSIBLE: sub-format GUID starts with the tag
                    tag = u16_at(body + 24);
                }
                let format = match (tag, bits) {
                    (1, 16) => SampleFormat::Pcm16,
                    (1, 24) => SampleFormat::Pcm24,
                    (3, 32) => SampleFormat::Float32,
                    _ => {
                        return Err(Error::UnsupportedFormat(format!(
                            "fmt chunk at byte {pos}: format tag {tag} with {bits} bits per sample"
                        )))
                    }
                };
                if !(1..=2).contains(&channels) {
                    return Err(Error::UnsupportedFormat(format!(
                        "fmt chunk at byte {pos}: {channels} channels"
                    )));
                }
                if rate == 0 {
                    return Err(parse(body + 4, "zero sample rate"));
                }
                fmt = Some((format, channels, rate));
            }
            b"data" => {
                let Some((format, n_ch, rate)) = fmt else {
                    return Err(parse(pos, "data chunk before fmt chunk"));
                };
                let width = (format.bits() / 8) as usize;
                let block = width * n_ch as usize;
                if size % block != 0 {
                    return Err(parse(pos + 4, "data size is not a whole number of frames"));
                }
                let mut channels = vec![Vec::with_capacity(size / block); n_ch as usize];
                for frame in bytes[body..body + size].chunks_exact(block) {
                    for (ch, s) in channels.iter_mut().zip(frame.chunks_exact(width)) {
                        let v = match format {
                            SampleFormat::Float32 => f32::from_le_bytes([s[0], s[1], s[2], s[3]]) as f64,
                            SampleFormat::Pcm16 => i16::from_le_bytes([s[0], s[1]]) as f64 / 32768.0,
                            SampleFormat::Pcm24 => {
                                (i32::from_le_bytes([0, s[0], s[1], s[2]]) >> 8) as f64 / 8_388_608.0
                            }
                        };
                        ch.push(v);
                    }
                }
                return Ok(WavData {
                    channels,
                    sample_rate: rate,
                    format,
                });
            }
            _ => {}
        }
        // chunks are word aligned
        pos = body + size + (size & 1);
    }
    Err(parse(bytes.len(), "no data chunk"))
}

pub fn read_wav(path: &Path) -> Result<WavData> {
    decode_wav(&fs::read(path)?)
}

pub fn write_wav(path: &Path, channels: &[&[f64]], sample_rate: u32, format: SampleFormat) -> Result<()> {
    fs::write(path, encode_wav(channels, sample_rate, format)?)?;
    Ok(())
}

pub fn write_stereo(path: &Path, signal: &Stereo, format: SampleFormat) -> Result<()> {
    write_wav(path, &[signal.left(), signal.right()], signal.sample_rate(), format)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fade_shape() {
        let f = raised_cosine_fade(960);
        assert!(f.windows(2).all(|w| w[1] > w[0]));
        assert!((f[479] + f[480] - 1.0).abs() < 1e-12);
        assert!(f[0] > 0.0 && f[959] < 1.0);
    }

    #[test]
    fn pink_noise_is_bounded() {
        let x = pink_noise(4800, 1);
        let peak = x.iter().fold(0.0f64, |p, v| p.max(v.abs()));
        assert!((peak - NOISE_PEAK).abs() < 1e-12);
    }

    #[test]
    fn burst_rejects_bad_durations() {
        assert!(pink_burst(1.0, 0.6, 0.3, 3, 1, 48_000).is_err());
        assert!(pink_burst(-1.0, 0.0, 0.3, 3, 1, 48_000).is_err());
        assert!(pink_burst(1.0, 0.02, 0.3, 0, 1, 48_000).is_err());
        assert!(pink_burst(1.0, 0.02, f64::NAN, 1, 1, 48_000).is_err());
    }

    #[test]
    fn source_signal_range() {
        assert!(SourceSignal::new(vec![0.5, 1.2], 48_000, "x").is_err());
        assert!(SourceSignal::new(vec![0.5, f64::NAN], 48_000, "x").is_err());
        assert!(SourceSignal::new(vec![-1.0, 1.0], 48_000, "x").is_ok());
    }

    #[test]
    fn quantize_bounds() {
        assert_eq!(quantize(1.0, 16), 32767);
        assert_eq!(quantize(-1.0, 16), -32768);
        assert_eq!(quantize(0.5, 24), 4_194_304);
    }
}
