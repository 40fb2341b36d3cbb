//! SH impulse-response container.
//!
//! ```text
//! AMBIMIX-SHRIR 1
//! order <N>
//! sample_rate <Hz>
//! channels <(N+1)²>
//! frames <samples>
//! component direct|reverberant|total
//! end
//! ```
//! followed by `frames × channels × 2` little-endian f32 values, frame-major,
//! each channel stored as `(re, im)`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use super::ShSignal;
use crate::container::{push_f32, read_f32s, read_header, write_header};
use crate::error::{Error, Result};
use crate::sh::num_coeffs;

const MAGIC: &str = "AMBIMIX-SHRIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Direct,
    Reverberant,
    Total,
}

impl Component {
    fn as_str(&self) -> &'static str {
        match self {
            Self::Direct => "direct",
            Self::Reverberant => "reverberant",
            Self::Total => "total",
        }
    }
}

pub fn encode_sh_signal(signal: &ShSignal, component: Component) -> Vec<u8> {
    let channels = signal.num_channels();
    let mut out = Vec::with_capacity(128 + signal.len() * channels * 8);
    write_header(
        &mut out,
        MAGIC,
        &[
            ("order", signal.order().to_string()),
            ("sample_rate", signal.sample_rate().to_string()),
            ("channels", channels.to_string()),
            ("frames", signal.len().to_string()),
            ("component", component.as_str().to_string()),
        ],
    );
    let lo = signal.start();
    let hi = lo + signal.window_len();
    for t in 0..signal.len() {
        for c in 0..channels {
            let v = if (lo..hi).contains(&t) {
                signal.channel(c)[t - lo]
            } else {
                Complex64::new(0.0, 0.0)
            };
            push_f32(&mut out, v.re as f32);
            push_f32(&mut out, v.im as f32);
        }
    }
    out
}

pub fn write_sh_signal(path: &Path, signal: &ShSignal, component: Component) -> Result<()> {
    fs::write(path, encode_sh_signal(signal, component))?;
    Ok(())
}

pub fn decode_sh_signal(bytes: &[u8]) -> Result<(ShSignal, Component)> {
    let header = read_header(bytes, MAGIC, |line, offset| {
        Err(Error::Parse {
            offset,
            message: format!("unexpected header line `{line}`"),
        })
    })?;
    let order: usize = header.parse("order")?;
    let sample_rate: u32 = header.parse("sample_rate")?;
    let channels: usize = header.parse("channels")?;
    let frames: usize = header.parse("frames")?;
    if channels != num_coeffs(order) {
        return Err(Error::Parse {
            offset: header.payload_offset,
            message: format!("{channels} channels do not match order {order}"),
        });
    }
    let component = match header.text("component")? {
        "direct" => Component::Direct,
        "reverberant" => Component::Reverberant,
        "total" => Component::Total,
        other => {
            return Err(Error::Parse {
                offset: header.payload_offset,
                message: format!("unknown component `{other}`"),
            })
        }
    };
    let values = read_f32s(bytes, header.payload_offset, frames * channels * 2)?;
    let mut data = vec![Vec::with_capacity(frames); channels];
    for frame in values.chunks_exact(channels * 2) {
        for (ch, v) in data.iter_mut().zip(frame.chunks_exact(2)) {
            ch.push(Complex64::new(v[0] as f64, v[1] as f64));
        }
    }
    if frames == 0 {
        return Ok((ShSignal::zeros(order, sample_rate, 0), component));
    }
    Ok((ShSignal::from_channels(order, sample_rate, frames, 0, data)?, component))
}

pub fn read_sh_signal(path: &Path) -> Result<(ShSignal, Component)> {
    decode_sh_signal(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ShSignal {
        let ch: Vec<Vec<Complex64>> = (0..4)
            .map(|c| (0..3).map(|t| Complex64::new(c as f64 + 0.5, -(t as f64))).collect())
            .collect();
        ShSignal::from_channels(1, 48_000, 6, 2, ch).unwrap()
    }

    #[test]
    fn roundtrip_preserves_f32_values() {
        let sig = sample();
        let bytes = encode_sh_signal(&sig, Component::Direct);
        let (back, comp) = decode_sh_signal(&bytes).unwrap();
        assert_eq!(comp, Component::Direct);
        assert_eq!(back.len(), 6);
        for c in 0..4 {
            assert_eq!(back.channel_full(c), sig.channel_full(c));
        }
    }

    #[test]
    fn rejects_bad_payload_and_header() {
        let bytes = encode_sh_signal(&sample(), Component::Total);
        let err = decode_sh_signal(&bytes[..bytes.len() - 3]).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
        let text = String::from_utf8_lossy(&bytes).replace("channels 4", "channels 5");
        assert!(decode_sh_signal(text.as_bytes()).is_err());
        assert!(matches!(
            decode_sh_signal(b"NOPE 1\nend\n"),
            Err(Error::Parse { offset: 0, .. })
        ));
    }
}
