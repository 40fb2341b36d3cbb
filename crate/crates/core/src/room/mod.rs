//! Shoebox room simulation with the image method, SH encoding of the
//! resulting impulse response, and room-acoustic analysis.

mod encode;
mod format;
mod images;

pub use encode::{encode_sh_rir, fractional_delay_pulse, ShSignal, SplitShRir, PULSE_TAPS};
pub use format::{decode_sh_signal, encode_sh_signal, read_sh_signal, write_sh_signal, Component};
pub use images::{enumerate_images, ImageSource};

use crate::error::{Error, Result};

/// Speed of sound in m/s.
pub const SPEED_OF_SOUND: f64 = 343.0;

/// Critical distance of the reference room in metres.
pub const REFERENCE_CRITICAL_DISTANCE: f64 = 2.21;

/// Default listener facing (azimuth of the look direction in room
/// coordinates). The nearest feasible facing to +x that keeps the far source
/// inside the reference room.
pub const DEFAULT_FACING_DEG: f64 = -8.0;

/// Source azimuth relative to the listener's facing.
pub const SOURCE_AZIMUTH_DEG: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoomSpec {
    pub dimensions: [f64; 3],
    /// Pressure reflection factor applied once per wall bounce.
    pub reflection_coefficient: f64,
    /// Informational; sets the default response length.
    pub target_t60: f64,
}

impl RoomSpec {
    pub fn new(dimensions: [f64; 3], reflection_coefficient: f64, target_t60: f64) -> Result<Self> {
        let room = Self {
            dimensions,
            reflection_coefficient,
            target_t60,
        };
        room.validate()?;
        Ok(room)
    }

    /// 15.5 × 9.8 × 7.5 m, R = 0.8, T60 = 0.75 s.
    pub fn reference() -> Self {
        Self {
            dimensions: [15.5, 9.8, 7.5],
            reflection_coefficient: 0.8,
            target_t60: 0.75,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimensions.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidRoom(format!(
                "dimensions must be positive, got {:?}",
                self.dimensions
            )));
        }
        if !(0.0..1.0).contains(&self.reflection_coefficient) {
            return Err(Error::InvalidRoom(format!(
                "reflection coefficient {} outside [0, 1)",
                self.reflection_coefficient
            )));
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.dimensions.iter().product()
    }

    pub fn surface(&self) -> f64 {
        let [x, y, z] = self.dimensions;
        2.0 * (x * y + y * z + x * z)
    }

    /// Response length used by default: 1.5 × target T60.
    pub fn default_length(&self) -> f64 {
        1.5 * self.target_t60
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub listener: [f64; 3],
    /// Azimuth (radians, room frame) the listener faces.
    pub facing: f64,
    pub source: [f64; 3],
}

impl Geometry {
    /// Source placed at `distance` and `azimuth` (relative to facing), same height.
    pub fn polar(listener: [f64; 3], facing: f64, azimuth: f64, distance: f64) -> Self {
        let a = facing + azimuth;
        Self {
            listener,
            facing,
            source: [
                listener[0] + distance * a.cos(),
                listener[1] + distance * a.sin(),
                listener[2],
            ],
        }
    }

    pub fn distance(&self) -> f64 {
        self.listener
            .iter()
            .zip(&self.source)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn validate(&self, room: &RoomSpec) -> Result<()> {
        let inside = |p: &[f64; 3]| {
            p.iter()
                .zip(&room.dimensions)
                .all(|(c, d)| c.is_finite() && *c > 0.0 && c < d)
        };
        if !inside(&self.listener) {
            return Err(Error::InvalidGeometry(format!(
                "listener {:?} outside room {:?}",
                self.listener, room.dimensions
            )));
        }
        if !inside(&self.source) {
            return Err(Error::InvalidGeometry(format!(
                "source {:?} outside room {:?}",
                self.source, room.dimensions
            )));
        }
        if self.distance() == 0.0 {
            return Err(Error::InvalidGeometry("source coincides with listener".into()));
        }
        Ok(())
    }
}

/// The two reference scenes: source at 1.5 and 3 critical distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Environment {
    One,
    Two,
}

impl Environment {
    pub fn from_id(id: u32) -> Option<Self> {
        match id {
            1 => Some(Self::One),
            2 => Some(Self::Two),
            _ => None,
        }
    }

    pub fn id(&self) -> u32 {
        match self {
            Self::One => 1,
            Self::Two => 2,
        }
    }

    pub fn source_distance(&self) -> f64 {
        match self {
            Self::One => 3.315,
            Self::Two => 6.63,
        }
    }
}

pub const REFERENCE_LISTENER: [f64; 3] = [9.0, 7.0, 1.7];

pub fn build_environment(env: Environment) -> (RoomSpec, Geometry) {
    build_environment_facing(env, DEFAULT_FACING_DEG.to_radians())
}

pub fn build_environment_facing(env: Environment, facing: f64) -> (RoomSpec, Geometry) {
    let geometry = Geometry::polar(
        REFERENCE_LISTENER,
        facing,
        SOURCE_AZIMUTH_DEG.to_radians(),
        env.source_distance(),
    );
    (RoomSpec::reference(), geometry)
}

/// `10·log10(E_direct / E_reverberant)` on the omnidirectional channel.
pub fn analyze_drr(rir: &SplitShRir) -> Result<f64> {
    let direct = rir.direct().channel_energy(0);
    let reverberant = rir.reverberant().channel_energy(0);
    if reverberant == 0.0 {
        return Err(Error::UndefinedDrr);
    }
    Ok(10.0 * (direct / reverberant).log10())
}

/// Schroeder energy-decay curve in dB, normalized to 0 dB at t = 0.
pub fn energy_decay_curve(ir: &[f64]) -> Vec<f64> {
    let mut edc = vec![0.0; ir.len()];
    let mut acc = 0.0;
    for (e, v) in edc.iter_mut().zip(ir).rev() {
        acc += v * v;
        *e = acc;
    }
    let total = acc;
    edc.iter().map(|e| 10.0 * (e / total).log10()).collect()
}

/// T60 from a least-squares fit of the decay curve between -5 and -25 dB.
pub fn analyze_t60(ir: &[f64], sample_rate: u32) -> Result<f64> {
    if ir.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroEnergy("impulse response".into()));
    }
    let edc = energy_decay_curve(ir);
    let start = edc.iter().position(|e| *e <= -5.0);
    let stop = edc.iter().position(|e| *e <= -25.0);
    let (Some(start), Some(stop)) = (start, stop) else {
        return Err(Error::InsufficientLength(
            "energy decay does not reach -25 dB".into(),
        ));
    };
    if stop <= start + 1 {
        return Err(Error::InsufficientLength("decay range spans < 2 samples".into()));
    }
    let fs = sample_rate as f64;
    let n = (stop - start + 1) as f64;
    let (mut st, mut se, mut stt, mut ste) = (0.0, 0.0, 0.0, 0.0);
    for (i, e) in edc.iter().enumerate().take(stop + 1).skip(start) {
        let t = i as f64 / fs;
        st += t;
        se += e;
        stt += t * t;
        ste += t * e;
    }
    let slope = (n * ste - st * se) / (n * stt - st * st);
    Ok(-60.0 / slope)
}

/// `0.057 · sqrt(V / T60)`.
pub fn critical_distance(room: &RoomSpec, t60: f64) -> f64 {
    0.057 * (room.volume() / t60).sqrt()
}

/// Sabine estimate with absorption `1 - R²`.
pub fn sabine_t60(room: &RoomSpec) -> f64 {
    let alpha = 1.0 - room.reflection_coefficient.powi(2);
    0.161 * room.volume() / (alpha * room.surface())
}

/// Diffuse-field DRR `20·log10(r_d / r)`.
pub fn diffuse_drr(critical_distance: f64, distance: f64) -> f64 {
    20.0 * (critical_distance / distance).log10()
}
