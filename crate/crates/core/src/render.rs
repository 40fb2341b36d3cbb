//! Binaural rendering of SH sound fields against SH HRTFs.
//!
//! Each ear's signal is `p = Σ_nm (-1)^m a_nm ⊛ h_{n,-m}`, which reproduces
//! `A·h(d)` for a plane wave `a_nm = A·conj(Y_nm(d))`. For real fields and
//! HRTFs this equals `Σ a_nm ⊛ conj(h_nm)`.

use num_complex::Complex64;

use crate::audio::{SourceSignal, Stereo};
use crate::error::{Error, Result};
use crate::fft;
use crate::hrtf::{Ear, HrtfSh};
use crate::room::{ShSignal, SplitShRir};
use crate::sh::{degree_of, num_coeffs, wrap_azimuth, QuadratureGrid};

/// Binaural impulse response; the same two-channel buffer as a rendered signal.
pub type BinauralIr = Stereo;

/// SH orders for the direct and reverberant parts of a rendering.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RenderCondition {
    pub name: String,
    pub direct_order: usize,
    pub reverb_order: usize,
}

impl RenderCondition {
    pub fn new(name: impl Into<String>, direct_order: usize, reverb_order: usize) -> Self {
        Self {
            name: name.into(),
            direct_order,
            reverb_order,
        }
    }

    pub fn mixed() -> Self {
        Self::new("mixed", 30, 1)
    }

    pub fn reference() -> Self {
        Self::new("reference", 30, 30)
    }

    pub fn third() -> Self {
        Self::new("third", 3, 3)
    }

    pub fn anchor() -> Self {
        Self::new("anchor", 1, 1)
    }

    /// The four listening-test conditions.
    pub fn listening_test_conditions() -> Vec<Self> {
        vec![Self::mixed(), Self::reference(), Self::third(), Self::anchor()]
    }

    pub fn max_order(&self) -> usize {
        self.direct_order.max(self.reverb_order)
    }
}

fn check_inputs(rir: &SplitShRir, hrtf: &HrtfSh, order: usize) -> Result<()> {
    let available = rir.order().min(hrtf.order());
    if order > available {
        return Err(Error::OrderMismatch {
            requested: order,
            available,
        });
    }
    if rir.sample_rate() != hrtf.sample_rate() {
        return Err(Error::SampleRateMismatch(rir.sample_rate(), hrtf.sample_rate()));
    }
    Ok(())
}

/// Index of `(n, -m)` for ACN index `i`, with the sign `(-1)^m`.
fn mirror_index(i: usize) -> (usize, f64) {
    let (n, m) = degree_of(i);
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    (((n * n + n) as i64 - m) as usize, sign)
}

fn hrtf_spectrum(hrtf: &HrtfSh, ear: Ear, channel: usize, n_fft: usize) -> Vec<Complex64> {
    let (src, sign) = mirror_index(channel);
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    for (b, v) in buf.iter_mut().zip(hrtf.channel(ear, src)) {
        *b = v * sign;
    }
    fft::forward(&mut buf);
    buf
}

fn field_spectrum(signal: &ShSignal, channel: usize, n_fft: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    buf[..signal.window_len()].copy_from_slice(signal.channel(channel));
    fft::forward(&mut buf);
    buf
}

/// Renders one SH signal at `order`, both ears, full length
/// `signal.len() + hrir_len - 1`. Channels are accumulated in ascending
/// ACN order.
fn render_component(signal: &ShSignal, hrtf: &HrtfSh, order: usize) -> [Vec<f64>; 2] {
    let out_len = signal.len() + hrtf.ir_length() - 1;
    let mut out = [vec![0.0; out_len], vec![0.0; out_len]];
    let window = signal.window_len();
    if window == 0 || hrtf.ir_length() == 0 {
        return out;
    }
    let n_fft = fft::next_pow2(window + hrtf.ir_length() - 1);
    let mut acc = [
        vec![Complex64::new(0.0, 0.0); n_fft],
        vec![Complex64::new(0.0, 0.0); n_fft],
    ];
    for c in 0..num_coeffs(order) {
        let a = field_spectrum(signal, c, n_fft);
        for (e, ear) in Ear::BOTH.into_iter().enumerate() {
            let h = hrtf_spectrum(hrtf, ear, c, n_fft);
            for ((o, x), y) in acc[e].iter_mut().zip(&a).zip(&h) {
                *o += x * y;
            }
        }
    }
    let conv_len = window + hrtf.ir_length() - 1;
    for (e, spec) in acc.iter_mut().enumerate() {
        fft::inverse(spec);
        let start = signal.start();
        for (o, v) in out[e][start..start + conv_len].iter_mut().zip(spec.iter()) {
            *o = v.re;
        }
    }
    out
}

fn combine(direct: [Vec<f64>; 2], reverberant: [Vec<f64>; 2], sample_rate: u32) -> Result<BinauralIr> {
    let [mut l, mut r] = direct;
    for (o, v) in l.iter_mut().zip(&reverberant[0]) {
        *o += v;
    }
    for (o, v) in r.iter_mut().zip(&reverberant[1]) {
        *o += v;
    }
    Stereo::new(l, r, sample_rate)
}

/// Renders direct and reverberant parts at a common `order`.
pub fn render_uniform(rir: &SplitShRir, hrtf: &HrtfSh, order: usize) -> Result<BinauralIr> {
    render_mixed(rir, hrtf, &RenderCondition::new("uniform", order, order))
}

/// Direct part at `direct_order` plus reverberant part at `reverb_order`.
///
/// The two parts are rendered separately and summed per ear, so a uniform
/// rendering is the special case with equal orders.
pub fn render_mixed(rir: &SplitShRir, hrtf: &HrtfSh, cond: &RenderCondition) -> Result<BinauralIr> {
    check_inputs(rir, hrtf, cond.max_order())?;
    let d = render_component(rir.direct(), hrtf, cond.direct_order);
    let r = render_component(rir.reverberant(), hrtf, cond.reverb_order);
    combine(d, r, rir.sample_rate())
}

/// Per-degree partial spectra `S_m = Σ_n (-1)^m A_nm H_{n,-m}` of one
/// component, indexed by `m + order`.
struct DegreeSpectra {
    order: usize,
    n_fft: usize,
    start: usize,
    conv_len: usize,
    spectra: [Vec<Vec<Complex64>>; 2],
}

impl DegreeSpectra {
    fn new(signal: &ShSignal, hrtf: &HrtfSh, order: usize) -> Self {
        let window = signal.window_len();
        if window == 0 || hrtf.ir_length() == 0 {
            return Self {
                order,
                n_fft: 0,
                start: 0,
                conv_len: 0,
                spectra: [Vec::new(), Vec::new()],
            };
        }
        let conv_len = window + hrtf.ir_length() - 1;
        let n_fft = fft::next_pow2(conv_len);
        let zero = vec![vec![Complex64::new(0.0, 0.0); n_fft]; 2 * order + 1];
        let mut spectra = [zero.clone(), zero];
        for c in 0..num_coeffs(order) {
            let (_, m) = degree_of(c);
            let a = field_spectrum(signal, c, n_fft);
            for (e, ear) in Ear::BOTH.into_iter().enumerate() {
                let h = hrtf_spectrum(hrtf, ear, c, n_fft);
                let slot = &mut spectra[e][(m + order as i64) as usize];
                for ((o, x), y) in slot.iter_mut().zip(&a).zip(&h) {
                    *o += x * y;
                }
            }
        }
        Self {
            order,
            n_fft,
            start: signal.start(),
            conv_len,
            spectra,
        }
    }

    /// Adds the rendering of the field rotated by `psi` into `out`.
    fn render_into(&self, psi: f64, out: &mut [Vec<f64>; 2]) {
        if self.n_fft == 0 {
            return;
        }
        let phases: Vec<Complex64> = (0..=2 * self.order)
            .map(|i| Complex64::from_polar(1.0, (i as i64 - self.order as i64) as f64 * psi))
            .collect();
        for (e, per_m) in self.spectra.iter().enumerate() {
            let mut buf = vec![Complex64::new(0.0, 0.0); self.n_fft];
            for (s, ph) in per_m.iter().zip(&phases) {
                for (b, v) in buf.iter_mut().zip(s) {
                    *b += v * ph;
                }
            }
            fft::inverse(&mut buf);
            for (o, v) in out[e][self.start..self.start + self.conv_len].iter_mut().zip(&buf) {
                *o += v.re;
            }
        }
    }
}

/// Renders the scene for each head azimuth `psi` (radians, positive to the
/// left), i.e. `render_mixed(rir.rotate_azimuth(-psi), ...)`.
///
/// Azimuth rotation only multiplies degree `m` by `e^{imψ}`, so per-degree
/// partial spectra are computed once and each orientation costs one inverse
/// FFT per ear and component. `psi ≡ 0` returns `render_mixed` exactly.
pub fn render_orientations(
    rir: &SplitShRir,
    hrtf: &HrtfSh,
    cond: &RenderCondition,
    azimuths: &[f64],
) -> Result<Vec<BinauralIr>> {
    check_inputs(rir, hrtf, cond.max_order())?;
    let direct = DegreeSpectra::new(rir.direct(), hrtf, cond.direct_order);
    let reverberant = DegreeSpectra::new(rir.reverberant(), hrtf, cond.reverb_order);
    let out_len = rir.len() + hrtf.ir_length() - 1;
    azimuths
        .iter()
        .map(|&psi| {
            if wrap_azimuth(psi) == 0.0 {
                return render_mixed(rir, hrtf, cond);
            }
            let mut d = [vec![0.0; out_len], vec![0.0; out_len]];
            let mut r = [vec![0.0; out_len], vec![0.0; out_len]];
            direct.render_into(psi, &mut d);
            reverberant.render_into(psi, &mut r);
            combine(d, r, rir.sample_rate())
        })
        .collect()
}

/// `count` head azimuths evenly covering the horizontal plane, from 0.
pub fn orientation_grid(resolution_deg: f64) -> Result<Vec<f64>> {
    let count = 360.0 / resolution_deg;
    if !(resolution_deg > 0.0) || (count - count.round()).abs() > 1e-9 {
        return Err(Error::InvalidDuration(format!(
            "resolution {resolution_deg}° does not divide 360°"
        )));
    }
    Ok((0..count.round() as usize)
        .map(|i| (i as f64 * resolution_deg).to_radians())
        .collect())
}

/// Spectra sampled on quadrature nodes: `values[node][bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpectra {
    pub values: Vec<Vec<Complex64>>,
    /// SH order the sampled function is band-limited to.
    pub band_limit: usize,
}

fn check_grid_spectra(s: &GridSpectra, grid: &QuadratureGrid, bins: usize) -> Result<()> {
    if s.values.len() != grid.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            got: s.values.len(),
        });
    }
    if let Some(bad) = s.values.iter().find(|v| v.len() != bins) {
        return Err(Error::LengthMismatch {
            expected: bins,
            got: bad.len(),
        });
    }
    Ok(())
}

/// Spherical integral `p(k) = ∫ a(k, Ω) h(k, Ω) dΩ` evaluated by quadrature
/// on each FFT bin, then returned to the time domain.
///
/// The integrand has band limit `field + hrtf`, so the grid must integrate
/// that order exactly: `field + hrtf <= 2·max_exact_order`.
pub fn quadrature_render_oracle(
    field: &GridSpectra,
    left: &GridSpectra,
    right: &GridSpectra,
    grid: &QuadratureGrid,
    sample_rate: u32,
) -> Result<BinauralIr> {
    let needed = field.band_limit + left.band_limit.max(right.band_limit);
    if needed > 2 * grid.max_exact_order() {
        return Err(Error::AliasingRisk {
            requested: needed,
            exact: 2 * grid.max_exact_order(),
        });
    }
    let bins = field.values.first().map_or(0, Vec::len);
    for s in [field, left, right] {
        check_grid_spectra(s, grid, bins)?;
    }
    let mut ears = Vec::with_capacity(2);
    for h in [left, right] {
        let mut p = vec![Complex64::new(0.0, 0.0); bins];
        for ((a, hv), w) in field.values.iter().zip(&h.values).zip(grid.weights()) {
            for ((o, x), y) in p.iter_mut().zip(a).zip(hv) {
                *o += x * y * w;
            }
        }
        fft::inverse(&mut p);
        ears.push(p.into_iter().map(|v| v.re).collect::<Vec<f64>>());
    }
    let right = ears.pop().unwrap_or_default();
    let left = ears.pop().unwrap_or_default();
    Stereo::new(left, right, sample_rate)
}

/// Evaluates an SH signal on grid nodes per FFT bin (`n_fft` bins).
pub fn field_on_grid(signal: &ShSignal, order: usize, grid: &QuadratureGrid, n_fft: usize) -> Result<GridSpectra> {
    if order > signal.order() {
        return Err(Error::OrderMismatch {
            requested: order,
            available: signal.order(),
        });
    }
    if signal.start() + signal.window_len() > n_fft {
        return Err(Error::LengthMismatch {
            expected: n_fft,
            got: signal.start() + signal.window_len(),
        });
    }
    let spectra: Vec<Vec<Complex64>> = (0..num_coeffs(order))
        .map(|c| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
            let s = signal.start();
            buf[s..s + signal.window_len()].copy_from_slice(signal.channel(c));
            fft::forward(&mut buf);
            buf
        })
        .collect();
    Ok(GridSpectra {
        values: synthesize_on_grid(&spectra, order, grid),
        band_limit: order,
    })
}

/// Evaluates one ear of an SH HRTF on grid nodes per FFT bin.
pub fn hrtf_on_grid(hrtf: &HrtfSh, ear: Ear, grid: &QuadratureGrid, n_fft: usize) -> Result<GridSpectra> {
    if hrtf.ir_length() > n_fft {
        return Err(Error::LengthMismatch {
            expected: n_fft,
            got: hrtf.ir_length(),
        });
    }
    let spectra: Vec<Vec<Complex64>> = hrtf
        .channels(ear)
        .iter()
        .map(|ch| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
            buf[..ch.len()].copy_from_slice(ch);
            fft::forward(&mut buf);
            buf
        })
        .collect();
    Ok(GridSpectra {
        values: synthesize_on_grid(&spectra, hrtf.order(), grid),
        band_limit: hrtf.order(),
    })
}

fn synthesize_on_grid(spectra: &[Vec<Complex64>], order: usize, grid: &QuadratureGrid) -> Vec<Vec<Complex64>> {
    let bins = spectra.first().map_or(0, Vec::len);
    grid.directions()
        .iter()
        .map(|d| {
            let y = crate::sh::sh_all(order, *d);
            let mut out = vec![Complex64::new(0.0, 0.0); bins];
            for (s, yv) in spectra.iter().zip(&y) {
                for (o, v) in out.iter_mut().zip(s) {
                    *o += v * yv;
                }
            }
            out
        })
        .collect()
}

/// Full linear convolution of a mono signal with both ears of `ir`.
pub fn convolve(signal: &SourceSignal, ir: &BinauralIr) -> Result<Stereo> {
    if signal.sample_rate() != ir.sample_rate() {
        return Err(Error::SampleRateMismatch(signal.sample_rate(), ir.sample_rate()));
    }
    let left = fft::convolve_real(signal.samples(), ir.left());
    let right = fft::convolve_real(signal.samples(), ir.right());
    Stereo::new(left, right, ir.sample_rate())
}
