use std::f64::consts::PI;

use ambimix_core::hrtf::{
    decode_hrtf_set, encode_hrtf_sh, encode_hrtf_set, load_hrtf_set, save_hrtf_set, synthetic_hrtf,
    synthetic_hrtf_sh, synthetic_hrtf_with_length, Ear, HrtfSet, DEFAULT_REGULARIZATION,
};
use ambimix_core::sh::{make_grid, num_coeffs, Direction};
use ambimix_core::Error;

/// Fibonacci lattice: near-uniform directions with no quadrature structure.
fn fibonacci(count: usize) -> Vec<Direction> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            Direction::new(z.acos(), i as f64 * golden).unwrap()
        })
        .collect()
}

fn max_coeff_error(a: &ambimix_core::hrtf::HrtfSh, b: &ambimix_core::hrtf::HrtfSh) -> f64 {
    let mut worst: f64 = 0.0;
    for ear in Ear::BOTH {
        for (x, y) in a.channels(ear).iter().zip(b.channels(ear)) {
            for (u, v) in x.iter().zip(y) {
                worst = worst.max((u - v).norm());
            }
        }
    }
    worst
}

#[test]
fn recovers_order_four_from_200_directions() {
    let truth = synthetic_hrtf_sh(4, 11, 64, 48_000).unwrap();
    let set = truth.to_set(&fibonacci(200)).unwrap();
    let fit = encode_hrtf_sh(&set, 4, 0.0).unwrap();
    assert!(max_coeff_error(&fit, &truth) < 1e-8);
    for ear in Ear::BOTH {
        assert!(fit.residual(ear).iter().all(|r| *r < 1e-8));
    }
}

#[test]
fn round_trip_through_synthetic_grid() {
    for order in [1, 3, 10] {
        let (set, truth) = synthetic_hrtf(order, &make_grid(order), 42).unwrap();
        let fit = encode_hrtf_sh(&set, order, 0.0).unwrap();
        let err = max_coeff_error(&fit, &truth);
        assert!(err < 1e-9, "order {order}: {err}");
    }
}

#[test]
fn default_regularization_stays_close() {
    let (set, truth) = synthetic_hrtf(6, &make_grid(6), 8).unwrap();
    let fit = encode_hrtf_sh(&set, 6, DEFAULT_REGULARIZATION).unwrap();
    assert!(max_coeff_error(&fit, &truth) < 1e-5);
}

#[test]
fn too_few_directions() {
    let set = synthetic_hrtf_sh(2, 1, 4, 48_000)
        .unwrap()
        .to_set(&fibonacci(900))
        .unwrap();
    match encode_hrtf_sh(&set, 30, 0.0) {
        Err(Error::InsufficientDirections { needed, got }) => {
            assert_eq!(needed, 961);
            assert_eq!(got, 900);
        }
        other => panic!("expected insufficient directions, got {other:?}"),
    }
    assert_eq!(num_coeffs(30), 961);
}

#[test]
fn constant_set_has_only_order_zero() {
    let dirs = fibonacci(60);
    let ir = vec![0.3, -0.1, 0.05, 0.0];
    let set = HrtfSet::new(dirs.clone(), vec![ir.clone(); 60], vec![ir; 60], 48_000).unwrap();
    let fit = encode_hrtf_sh(&set, 5, 0.0).unwrap();
    for ear in Ear::BOTH {
        for (i, ch) in fit.channels(ear).iter().enumerate() {
            if i == 0 {
                // h_00 = √(4π)·value
                assert!((ch[0].re - 0.3 * (4.0 * PI).sqrt()).abs() < 1e-10);
                continue;
            }
            assert!(ch.iter().all(|v| v.norm() < 1e-10), "channel {i}");
        }
    }
}

#[test]
fn truncation_leaves_measurable_residual() {
    let (set, _) = synthetic_hrtf(5, &make_grid(5), 17).unwrap();
    let exact = encode_hrtf_sh(&set, 5, 0.0).unwrap();
    let under = encode_hrtf_sh(&set, 4, 0.0).unwrap();
    for ear in Ear::BOTH {
        assert!(exact.residual(ear).iter().all(|r| *r < 1e-8));
        let rms: f64 = under.residual(ear).iter().map(|r| r * r).sum::<f64>().sqrt();
        assert!(rms > 1e-3, "{rms}");
        assert!(under.residual(ear).iter().all(|r| *r > 0.0));
    }
}

#[test]
fn encoding_is_linear() {
    let dirs = fibonacci(120);
    let a = synthetic_hrtf_sh(6, 1, 32, 48_000).unwrap().to_set(&dirs).unwrap();
    let b = synthetic_hrtf_sh(6, 2, 32, 48_000).unwrap().to_set(&dirs).unwrap();
    let sum = |ear| -> Vec<Vec<f64>> {
        a.irs(ear)
            .iter()
            .zip(b.irs(ear))
            .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + v).collect())
            .collect()
    };
    let ab = HrtfSet::new(dirs.clone(), sum(Ear::Left), sum(Ear::Right), 48_000).unwrap();
    let fa = encode_hrtf_sh(&a, 6, DEFAULT_REGULARIZATION).unwrap();
    let fb = encode_hrtf_sh(&b, 6, DEFAULT_REGULARIZATION).unwrap();
    let fab = encode_hrtf_sh(&ab, 6, DEFAULT_REGULARIZATION).unwrap();
    for ear in Ear::BOTH {
        for c in 0..num_coeffs(6) {
            for t in 0..32 {
                let lhs = fab.channel(ear, c)[t];
                let rhs = fa.channel(ear, c)[t] + fb.channel(ear, c)[t];
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn symmetric_head_stays_symmetric_after_fit() {
    let (set, _) = synthetic_hrtf(4, &make_grid(4), 23).unwrap();
    let fit = encode_hrtf_sh(&set, 4, 0.0).unwrap();
    for c in 0..num_coeffs(4) {
        let (n, m) = ambimix_core::sh::degree_of(c);
        let mirror = (n * n + n) as i64 - m;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        for t in 0..set.ir_length() {
            let l = fit.channel(Ear::Left, mirror as usize)[t] * sign;
            let r = fit.channel(Ear::Right, c)[t];
            assert!((l - r).norm() < 1e-9);
        }
    }
}

#[test]
fn synthetic_is_deterministic() {
    let grid = make_grid(3);
    let (a, ca) = synthetic_hrtf(3, &grid, 99).unwrap();
    let (b, cb) = synthetic_hrtf(3, &grid, 99).unwrap();
    assert_eq!(a, b);
    assert_eq!(ca, cb);
    let (c, _) = synthetic_hrtf(3, &grid, 100).unwrap();
    assert_ne!(a, c);
}

#[test]
fn container_round_trip_is_bit_exact() {
    let (set, _) = synthetic_hrtf_with_length(3, &make_grid(3), 4, 32).unwrap();
    let bytes = encode_hrtf_set(&set);
    let back = decode_hrtf_set(&bytes).unwrap();
    assert_eq!(back.directions(), set.directions());
    for ear in Ear::BOTH {
        for (x, y) in back.irs(ear).iter().zip(set.irs(ear)) {
            for (u, v) in x.iter().zip(y) {
                assert_eq!(*u, *v as f32 as f64);
            }
        }
    }
    assert_eq!(encode_hrtf_set(&back), bytes);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("set.hrtf");
    save_hrtf_set(&path, &back).unwrap();
    assert_eq!(load_hrtf_set(&path).unwrap(), back);
}

#[test]
fn container_toy_file() {
    let mut bytes = b"AMBIMIX-HRTF 1\ndirections 2\nir_length 2\nsample_rate 48000\n0.5 0.25\n1.5 -1\nend\n".to_vec();
    for v in [1.0f32, 0.5, 0.25, 0.125, -1.0, -0.5, -0.25, -0.125] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let set = decode_hrtf_set(&bytes).unwrap();
    assert_eq!(set.len(), 2);
    assert_eq!(set.ir(Ear::Left, 1), &[0.25, 0.125]);
    assert_eq!(set.ir(Ear::Right, 0), &[-1.0, -0.5]);
    assert!((set.directions()[1].azimuth() + 1.0).abs() < 1e-15);
}

#[test]
fn container_errors() {
    let (set, _) = synthetic_hrtf_with_length(1, &make_grid(1), 4, 8).unwrap();
    let bytes = encode_hrtf_set(&set);
    let text = |b: &[u8]| String::from_utf8_lossy(b).into_owned();

    // declared count disagrees with the direction table
    let header_end = bytes.windows(4).position(|w| w == b"end\n").unwrap();
    let tampered = text(&bytes[..header_end]).replace("directions 8", "directions 9");
    let mut bad = tampered.into_bytes();
    bad.extend_from_slice(&bytes[header_end..]);
    assert!(matches!(decode_hrtf_set(&bad), Err(Error::Parse { .. })));

    // truncated payload
    let err = decode_hrtf_set(&bytes[..bytes.len() - 4]).unwrap_err();
    let Error::Parse { offset, .. } = err else { panic!("{err}") };
    assert!(offset > header_end);

    // sample rate
    let mut odd = text(&bytes[..header_end]).replace("sample_rate 48000", "sample_rate 22050").into_bytes();
    odd.extend_from_slice(&bytes[header_end..]);
    assert!(matches!(decode_hrtf_set(&odd), Err(Error::UnsupportedSampleRate(22050))));

    // malformed direction line carries its byte offset
    let toy = b"AMBIMIX-HRTF 1\ndirections 1\nir_length 1\nsample_rate 48000\n0.5 x\nend\n";
    match decode_hrtf_set(toy) {
        Err(Error::Parse { offset, .. }) => assert_eq!(offset, 58),
        other => panic!("{other:?}"),
    }
}
