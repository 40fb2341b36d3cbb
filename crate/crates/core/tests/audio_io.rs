use ambimix_core::audio::{
    decode_wav, encode_wav, pink_burst, raised_cosine_fade, read_wav, rms_normalize, write_stereo,
    SampleFormat, Stereo,
};
use ambimix_core::Error;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Welch PSD with Hann-windowed, half-overlapping segments; returns
/// `(frequency, power)` for the positive bins.
fn welch(x: &[f64], seg: usize, fs: f64) -> Vec<(f64, f64)> {
    let fft = FftPlanner::new().plan_fft_forward(seg);
    let win: Vec<f64> = (0..seg)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / seg as f64).cos())
        .collect();
    let mut acc = vec![0.0; seg / 2];
    let mut count = 0;
    let mut start = 0;
    while start + seg <= x.len() {
        let mut buf: Vec<Complex64> = x[start..start + seg]
            .iter()
            .zip(&win)
            .map(|(v, w)| Complex64::new(v * w, 0.0))
            .collect();
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += seg / 2;
    }
    acc.iter()
        .enumerate()
        .skip(1)
        .map(|(k, p)| (k as f64 * fs / seg as f64, p / count as f64))
        .collect()
}

/// Least-squares slope of `10·log10(P)` against `log10(f)`, in dB/decade.
/// Bins are first averaged into 1/6-octave bands so each frequency region
/// weighs equally.
fn slope_db_per_decade(psd: &[(f64, f64)], lo: f64, hi: f64) -> f64 {
    let mut bands: Vec<(f64, f64)> = Vec::new();
    let mut f = lo;
    while f * 2f64.powf(1.0 / 6.0) <= hi {
        let top = f * 2f64.powf(1.0 / 6.0);
        let sel: Vec<f64> = psd
            .iter()
            .filter(|(fr, _)| *fr >= f && *fr < top)
            .map(|(_, p)| *p)
            .collect();
        if !sel.is_empty() {
            let mean = sel.iter().sum::<f64>() / sel.len() as f64;
            bands.push(((f * top).sqrt().log10(), 10.0 * mean.log10()));
        }
        f = top;
    }
    let n = bands.len() as f64;
    let mx = bands.iter().map(|b| b.0).sum::<f64>() / n;
    let my = bands.iter().map(|b| b.1).sum::<f64>() / n;
    let sxy: f64 = bands.iter().map(|b| (b.0 - mx) * (b.1 - my)).sum();
    let sxx: f64 = bands.iter().map(|b| (b.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn default_burst_length() {
    let s = pink_burst(1.0, 0.02, 0.3, 3, 7, 48_000).unwrap();
    assert_eq!(s.len(), 172_800);
    assert_eq!(s.sample_rate(), 48_000);
    assert!(s.samples().iter().all(|v| v.abs() <= 1.0));
    // pauses are silent
    assert!(s.samples()[48_000..62_400].iter().all(|v| *v == 0.0));
}

#[test]
fn pink_slope_over_twenty_seeds() {
    let mut slopes = Vec::new();
    for seed in 0..20 {
        let s = pink_burst(1.0, 0.02, 0.3, 3, seed, 48_000).unwrap();
        let psd = welch(s.samples(), 8192, 48_000.0);
        slopes.push(slope_db_per_decade(&psd, 50.0, 10_000.0));
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    assert!((mean + 10.0).abs() < 1.0, "slope {mean} dB/decade");
}

#[test]
fn burst_is_deterministic() {
    let a = pink_burst(0.5, 0.02, 0.1, 2, 5, 48_000).unwrap();
    let b = pink_burst(0.5, 0.02, 0.1, 2, 5, 48_000).unwrap();
    assert_eq!(a, b);
    let c = pink_burst(0.5, 0.02, 0.1, 2, 6, 48_000).unwrap();
    assert_ne!(a.samples(), c.samples());
}

#[test]
fn fades_follow_raised_cosine() {
    let faded = pink_burst(1.0, 0.02, 0.3, 1, 3, 48_000).unwrap();
    let raw = pink_burst(1.0, 0.0, 0.3, 1, 3, 48_000).unwrap();
    let n = 960;
    let env: Vec<f64> = (0..n)
        .map(|i| faded.samples()[i] / raw.samples()[i])
        .collect();
    let expected = raised_cosine_fade(n);
    for (e, x) in env.iter().zip(&expected) {
        if e.is_finite() {
            assert!((e - x).abs() < 1e-12);
        }
    }
    assert!(expected.windows(2).all(|w| w[1] > w[0]));
    assert!((expected[n / 2] - 0.5).abs() < 0.005);
    // fade-out mirrors the fade-in
    let last = faded.len() - 1;
    for i in 0..n {
        let g = faded.samples()[last - i] / raw.samples()[last - i];
        if g.is_finite() {
            assert!((g - expected[i]).abs() < 1e-12);
        }
    }
    // interior untouched
    assert_eq!(faded.samples()[24_000], raw.samples()[24_000]);
}

#[test]
fn float_round_trip_is_exact() {
    let left: Vec<f64> = (0..100).map(|i| ((i as f64) * 0.37).sin() as f32 as f64).collect();
    let right: Vec<f64> = left.iter().map(|v| -v * 0.5).collect();
    let bytes = encode_wav(&[&left, &right], 48_000, SampleFormat::Float32).unwrap();
    let wav = decode_wav(&bytes).unwrap();
    assert_eq!(wav.sample_rate, 48_000);
    assert_eq!(wav.format, SampleFormat::Float32);
    assert_eq!(wav.channels, vec![left, right]);
}

#[test]
fn integer_round_trips_within_one_step() {
    let x: Vec<f64> = (0..2000).map(|i| -1.0 + i as f64 / 1000.0).collect();
    for (format, step) in [(SampleFormat::Pcm16, 1.0 / 32768.0), (SampleFormat::Pcm24, 1.0 / 8_388_608.0)] {
        let bytes = encode_wav(&[&x], 44_100, format).unwrap();
        let back = decode_wav(&bytes).unwrap();
        assert_eq!(back.format, format);
        for (a, b) in x.iter().zip(&back.channels[0]) {
            assert!((a - b).abs() <= step, "{format:?}: {a} vs {b}");
        }
    }
}

#[test]
fn stereo_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.wav");
    let s = Stereo::new(vec![0.25, -0.5, 0.0], vec![0.125, 0.0, 1.0], 48_000).unwrap();
    write_stereo(&path, &s, SampleFormat::Float32).unwrap();
    assert_eq!(read_wav(&path).unwrap().into_stereo().unwrap(), s);
    assert!(read_wav(&path).unwrap().into_mono("m").is_err());
}

#[test]
fn malformed_wav_reports_offsets() {
    let x = [0.0, 0.5];
    let good = encode_wav(&[&x], 48_000, SampleFormat::Pcm16).unwrap();

    assert!(matches!(decode_wav(b"RIFX0000WAVE"), Err(Error::Parse { offset: 0, .. })));
    let mut not_wave = good.clone();
    not_wave[8..12].copy_from_slice(b"AVI ");
    assert!(matches!(decode_wav(&not_wave), Err(Error::Parse { offset: 8, .. })));

    // data chunk claims more bytes than present
    let mut long = good.clone();
    long[40..44].copy_from_slice(&1000u32.to_le_bytes());
    assert!(matches!(decode_wav(&long), Err(Error::Parse { offset: 40, .. })));

    // 8-bit PCM is not supported; the error names the field
    let mut eight = good.clone();
    eight[34..36].copy_from_slice(&8u16.to_le_bytes());
    match decode_wav(&eight) {
        Err(Error::UnsupportedFormat(msg)) => assert!(msg.contains("bits per sample"), "{msg}"),
        other => panic!("{other:?}"),
    }
    let mut alaw = good;
    alaw[20..22].copy_from_slice(&6u16.to_le_bytes());
    assert!(matches!(decode_wav(&alaw), Err(Error::UnsupportedFormat(_))));
}

#[test]
fn rms_normalization() {
    let a = Stereo::new(vec![0.1, -0.2, 0.3], vec![0.0, 0.1, 0.0], 48_000).unwrap();
    let same = rms_normalize(&[a.clone(), a.clone()]).unwrap();
    assert_eq!(same[1], a);

    let doubled = a.scaled(2.0);
    let out = rms_normalize(&[a.clone(), doubled.clone()]).unwrap();
    for (x, y) in out[1].left().iter().zip(doubled.left()) {
        assert!((x - 0.5 * y).abs() < 1e-15);
    }

    let c = Stereo::new(vec![0.7, 0.01, -0.3], vec![0.2, 0.2, 0.9], 48_000).unwrap();
    let set = rms_normalize(&[a.clone(), c, doubled]).unwrap();
    let levels: Vec<f64> = set.iter().map(|s| 20.0 * s.rms().log10()).collect();
    let spread = levels.iter().cloned().fold(f64::MIN, f64::max) - levels.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 0.01);

    let silent = Stereo::silent(3, 48_000);
    assert!(matches!(rms_normalize(&[a, silent]), Err(Error::ZeroEnergy(_))));
}
