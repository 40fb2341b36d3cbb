use std::f64::consts::PI;

use ambimix_core::audio::{SourceSignal, Stereo};
use ambimix_core::hrtf::{synthetic_hrtf_sh, Ear, HrtfSh};
use ambimix_core::render::{
    convolve, field_on_grid, hrtf_on_grid, quadrature_render_oracle, render_mixed, render_orientations,
    render_uniform, BinauralIr, RenderCondition,
};
use ambimix_core::room::{
    build_environment, encode_sh_rir, enumerate_images, Environment, ImageSource, ShSignal, SplitShRir,
};
use ambimix_core::rng::SplitMix64;
use ambimix_core::sh::{encode_plane_wave, make_grid, Direction};
use ambimix_core::Error;
use num_complex::Complex64;

const FS: u32 = 48_000;

fn plane_wave_rir(dir: Direction, order: usize) -> SplitShRir {
    let frame = encode_plane_wave(Complex64::new(1.0, 0.0), dir, order);
    let direct = ShSignal::from_frames(FS, 1, 0, &[frame]).unwrap();
    SplitShRir::new(direct, ShSignal::zeros(order, FS, 1)).unwrap()
}

fn scene(env: Environment, order: usize, length: f64) -> SplitShRir {
    let (room, geom) = build_environment(env);
    let images = enumerate_images(&room, &geom, length - 0.002).unwrap();
    encode_sh_rir(&images, order, FS, length).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn assert_close(a: &BinauralIr, b: &BinauralIr, tol: f64) {
    let d = max_diff(a.left(), b.left()).max(max_diff(a.right(), b.right()));
    assert!(d < tol, "max difference {d}");
}

#[test]
fn plane_wave_identity() {
    let mut rng = SplitMix64::new(2024);
    for order in [1, 3, 10] {
        let hrtf = synthetic_hrtf_sh(order, order as u64, 64, FS).unwrap();
        for _ in 0..50 {
            let dir = Direction::new((2.0 * rng.next_f64() - 1.0).acos(), 2.0 * PI * rng.next_f64()).unwrap();
            let out = render_uniform(&plane_wave_rir(dir, order), &hrtf, order).unwrap();
            assert_eq!(out.len(), 64);
            for ear in Ear::BOTH {
                let expected = hrtf.evaluate(ear, dir);
                assert!(max_diff(out.channel(ear), &expected) < 1e-9);
            }
        }
    }
}

#[test]
fn silent_field_renders_silence() {
    let hrtf = synthetic_hrtf_sh(3, 1, 32, FS).unwrap();
    let rir = SplitShRir::new(ShSignal::zeros(3, FS, 100), ShSignal::zeros(3, FS, 100)).unwrap();
    let out = render_uniform(&rir, &hrtf, 3).unwrap();
    assert_eq!(out.len(), 131);
    assert_eq!(out.energy(), 0.0);
}

#[test]
fn quadrature_oracle_matches_sh_rendering() {
    let order = 10;
    let rir = scene(Environment::One, order, 0.04);
    let hrtf = synthetic_hrtf_sh(order, 77, 128, FS).unwrap();
    let grid = make_grid(order);
    let n_fft = (rir.len() + hrtf.ir_length() - 1).next_power_of_two();

    let field = field_on_grid(&rir.total(), order, &grid, n_fft).unwrap();
    let left = hrtf_on_grid(&hrtf, Ear::Left, &grid, n_fft).unwrap();
    let right = hrtf_on_grid(&hrtf, Ear::Right, &grid, n_fft).unwrap();
    let oracle = quadrature_render_oracle(&field, &left, &right, &grid, FS).unwrap();
    let sh = render_uniform(&rir, &hrtf, order).unwrap();

    let err = sh.difference_energy(&oracle) / sh.energy();
    assert!(err < 1e-6, "relative energy error {err}");
    // beyond the linear convolution length the oracle is zero
    assert!(oracle.left()[sh.len()..].iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn quadrature_oracle_surface_area_and_aliasing() {
    let grid = make_grid(2);
    let ones = ambimix_core::render::GridSpectra {
        values: vec![vec![Complex64::new(1.0, 0.0); 4]; grid.len()],
        band_limit: 0,
    };
    let p = quadrature_render_oracle(&ones, &ones, &ones, &grid, FS).unwrap();
    // p(k) = 4π on every bin, i.e. 4π·δ[t]
    assert!((p.left()[0] - 4.0 * PI).abs() < 1e-12);
    assert!(p.left()[1..].iter().all(|v| v.abs() < 1e-12));

    let coarse = ambimix_core::render::GridSpectra { band_limit: 3, ..ones.clone() };
    assert!(matches!(
        quadrature_render_oracle(&coarse, &coarse, &coarse, &grid, FS),
        Err(Error::AliasingRisk { .. })
    ));
}

#[test]
fn mixed_with_equal_orders_is_uniform() {
    let rir = scene(Environment::One, 4, 0.1);
    let hrtf = synthetic_hrtf_sh(4, 3, 64, FS).unwrap();
    for n in [1, 3, 4] {
        let mixed = render_mixed(&rir, &hrtf, &RenderCondition::new("m", n, n)).unwrap();
        assert_eq!(mixed, render_uniform(&rir, &hrtf, n).unwrap());
    }
}

#[test]
fn mixed_is_sum_of_parts() {
    let rir = scene(Environment::One, 6, 0.1);
    let hrtf = synthetic_hrtf_sh(6, 4, 64, FS).unwrap();
    let mixed = render_mixed(&rir, &hrtf, &RenderCondition::new("m", 6, 1)).unwrap();
    let direct = render_uniform(&rir.direct_only(), &hrtf, 6).unwrap();
    let reverb = render_uniform(&rir.reverberant_only(), &hrtf, 1).unwrap();
    for ear in Ear::BOTH {
        for ((m, d), r) in mixed.channel(ear).iter().zip(direct.channel(ear)).zip(reverb.channel(ear)) {
            assert_eq!(*m, d + r);
        }
    }
}

#[test]
fn rendering_is_linear() {
    let a = scene(Environment::One, 3, 0.06);
    let b = scene(Environment::Two, 3, 0.06);
    let (alpha, beta) = (0.7, -1.3);
    let combo = SplitShRir::new(
        a.direct().scale(alpha).add(&b.direct().scale(beta)).unwrap(),
        a.reverberant().scale(alpha).add(&b.reverberant().scale(beta)).unwrap(),
    )
    .unwrap();
    let hrtf = synthetic_hrtf_sh(3, 8, 64, FS).unwrap();
    let ra = render_uniform(&a, &hrtf, 3).unwrap();
    let rb = render_uniform(&b, &hrtf, 3).unwrap();
    let rc = render_uniform(&combo, &hrtf, 3).unwrap();
    let expect = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(u, v)| alpha * u + beta * v).collect() };
    assert!(max_diff(rc.left(), &expect(ra.left(), rb.left())) < 1e-10);
    assert!(max_diff(rc.right(), &expect(ra.right(), rb.right())) < 1e-10);
}

#[test]
fn truncation_error_shrinks_with_order() {
    let rir = scene(Environment::One, 30, 0.25);
    let hrtf = synthetic_hrtf_sh(30, 5, 128, FS).unwrap();
    let full = render_uniform(&rir, &hrtf, 30).unwrap();
    let mut last = f64::INFINITY;
    for n in [1, 3, 10, 20, 30] {
        let e = render_uniform(&rir, &hrtf, n).unwrap().difference_energy(&full);
        assert!(e <= last, "order {n}: {e} > {last}");
        last = e;
    }
    assert_eq!(last, 0.0);
}

#[test]
fn order_and_rate_checks() {
    let rir = scene(Environment::One, 3, 0.05);
    let hrtf = synthetic_hrtf_sh(2, 1, 16, FS).unwrap();
    assert!(matches!(render_uniform(&rir, &hrtf, 3), Err(Error::OrderMismatch { .. })));
    assert!(matches!(
        render_mixed(&rir, &hrtf, &RenderCondition::new("x", 4, 1)),
        Err(Error::OrderMismatch { .. })
    ));
    let other_rate = synthetic_hrtf_sh(3, 1, 16, 44_100).unwrap();
    assert!(matches!(render_uniform(&rir, &other_rate, 1), Err(Error::SampleRateMismatch(..))));
}

#[test]
fn orientations_match_rotated_rendering() {
    let rir = scene(Environment::Two, 5, 0.08);
    let hrtf = synthetic_hrtf_sh(5, 6, 64, FS).unwrap();
    let cond = RenderCondition::new("m", 5, 2);
    let psis = [0.0, 0.3, -1.2, 2.0 * PI, 3.0];
    let outs = render_orientations(&rir, &hrtf, &cond, &psis).unwrap();
    assert_eq!(outs.len(), psis.len());
    assert_eq!(outs[0], render_mixed(&rir, &hrtf, &cond).unwrap());
    assert_eq!(outs[3], outs[0]);
    for (psi, out) in psis.iter().zip(&outs).skip(1) {
        let naive = render_mixed(&rir.rotate_azimuth(-psi), &hrtf, &cond).unwrap();
        assert_close(out, &naive, 1e-9);
    }
}

#[test]
fn head_rotation_toward_source_in_free_field() {
    let order = 8;
    let hrtf = synthetic_hrtf_sh(order, 12, 64, FS).unwrap();
    let image = |azimuth_deg: f64| ImageSource {
        delay: 3.315 / 343.0,
        gain: 1.0 / (4.0 * PI * 3.315),
        direction: Direction::new(PI / 2.0, azimuth_deg.to_radians()).unwrap(),
        reflection_count: 0,
        distance: 3.315,
    };
    let at_30 = encode_sh_rir(&[image(30.0)], order, FS, 0.02).unwrap();
    let at_0 = encode_sh_rir(&[image(0.0)], order, FS, 0.02).unwrap();
    let cond = RenderCondition::new("u", order, order);
    let turned = render_orientations(&at_30, &hrtf, &cond, &[30f64.to_radians()]).unwrap();
    let straight = render_mixed(&at_0, &hrtf, &cond).unwrap();
    assert_close(&turned[0], &straight, 1e-9);
}

#[test]
fn full_circle_of_orientations() {
    let rir = scene(Environment::One, 1, 0.03);
    let hrtf = synthetic_hrtf_sh(1, 2, 16, FS).unwrap();
    let psis = ambimix_core::render::orientation_grid(1.0).unwrap();
    let outs = render_orientations(&rir, &hrtf, &RenderCondition::anchor(), &psis).unwrap();
    assert_eq!(outs.len(), 360);
}

fn naive_convolution(x: &[f64], h: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len() + h.len() - 1];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in h.iter().enumerate() {
            y[i + j] += a * b;
        }
    }
    y
}

#[test]
fn convolution() {
    let ir = Stereo::new(vec![0.5, -0.25, 0.1, 0.05], vec![0.0, 1.0, 0.0, -1.0], FS).unwrap();

    let impulse = SourceSignal::new(vec![1.0], FS, "impulse").unwrap();
    let out = convolve(&impulse, &ir).unwrap();
    assert!(max_diff(out.left(), ir.left()) < 1e-15);
    assert!(max_diff(out.right(), ir.right()) < 1e-15);

    let delayed = SourceSignal::new(vec![0.0, 0.0, 0.0, 1.0], FS, "delayed").unwrap();
    let out = convolve(&delayed, &ir).unwrap();
    assert_eq!(out.len(), 7);
    assert!(out.left()[..3].iter().all(|v| v.abs() < 1e-15));
    assert!(max_diff(&out.left()[3..], ir.left()) < 1e-15);

    let mut rng = SplitMix64::new(4);
    let x: Vec<f64> = (0..300).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
    let h: Vec<f64> = (0..77).map(|_| rng.next_f64() - 0.5).collect();
    let ir = Stereo::new(h.clone(), h.iter().map(|v| -v).collect(), FS).unwrap();
    let out = convolve(&SourceSignal::new(x.clone(), FS, "x").unwrap(), &ir).unwrap();
    let oracle = naive_convolution(&x, &h);
    assert_eq!(out.len(), 376);
    assert!(max_diff(out.left(), &oracle) < 1e-9);

    let wrong_rate = SourceSignal::new(x, 44_100, "x").unwrap();
    assert!(matches!(convolve(&wrong_rate, &ir), Err(Error::SampleRateMismatch(..))));
}

#[test]
fn hrtf_sh_type_is_usable_directly() {
    // from explicit channels: only the omni channel set
    let order = 1;
    let mut left = vec![vec![Complex64::new(0.0, 0.0); 4]; 4];
    left[0][0] = Complex64::new((4.0 * PI).sqrt(), 0.0);
    let right = left.clone();
    let hrtf = HrtfSh::from_channels(order, FS, left, right).unwrap();
    let dir = Direction::new(1.0, 2.0).unwrap();
    let out = render_uniform(&plane_wave_rir(dir, order), &hrtf, order).unwrap();
    assert!((out.left()[0] - 1.0).abs() < 1e-12);
}
