#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::Path;

use ambimix::config::{ConditionConfig, EnvironmentConfig, SceneSpec, SignalConfig};
use ambimix_core::audio::{write_wav, SampleFormat};
use ambimix_core::rng::SplitMix64;

/// Speech-like test signal: voiced syllables (gliding f0, three moving
/// formants) separated by short high-passed noise fricatives.
pub fn speech_like(seconds: f64, fs: u32, seed: u64) -> Vec<f64> {
    let fsf = fs as f64;
    let n = (seconds * fsf).round() as usize;
    let mut rng = SplitMix64::new(seed);
    let mut out = vec![0.0; n];
    let syllable = 0.25;
    let count = (seconds / syllable).floor() as usize;
    let mut prev = 0.0;
    for s in 0..count {
        let start = (s as f64 * syllable * fsf) as usize;
        let voiced = (0.17 * fsf) as usize;
        let f0 = 100.0 + 80.0 * rng.next_f64();
        let glide = 0.8 + 0.4 * rng.next_f64();
        let formants = [
            300.0 + 500.0 * rng.next_f64(),
            900.0 + 1400.0 * rng.next_f64(),
            2300.0 + 900.0 * rng.next_f64(),
        ];
        let mut phase = 0.0;
        for i in 0..voiced.min(n - start) {
            let t = i as f64 / voiced as f64;
            let f = f0 * (1.0 + (glide - 1.0) * t);
            phase += 2.0 * PI * f / fsf;
            let env = (PI * t).sin().powi(2);
            let mut v = 0.0;
            let mut k = 1.0;
            while k * f < 8000.0 {
                let fk = k * f;
                let amp: f64 = formants
                    .iter()
                    .map(|fm| (-((fk - fm) / (0.15 * fm)).powi(2)).exp())
                    .sum::<f64>()
                    + 0.05;
                v += amp / k.sqrt() * (k * phase).sin();
                k += 1.0;
            }
            out[start + i] += env * v;
        }
        let fric = (0.06 * fsf) as usize;
        let f_start = start + voiced + (0.01 * fsf) as usize;
        for i in 0..fric {
            if f_start + i >= n {
                break;
            }
            let w = 2.0 * rng.next_f64() - 1.0;
            let t = i as f64 / fric as f64;
            out[f_start + i] += 0.6 * (PI * t).sin() * (w - prev);
            prev = w;
        }
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    out.iter().map(|v| 0.7 * v / peak).collect()
}

pub fn write_speech(path: &Path, seconds: f64, fs: u32) {
    let s = speech_like(seconds, fs, 11);
    write_wav(path, &[&s], fs, SampleFormat::Float32).unwrap();
}

/// Low-order, short scene that runs in well under a second.
pub fn small_scene(dir: &Path) -> SceneSpec {
    let speech = dir.join("speech.wav");
    write_speech(&speech, 0.5, 48_000);
    let mut spec = SceneSpec::default();
    spec.output = dir.join("out");
    spec.sh_order = 3;
    spec.room.length = Some(0.4);
    spec.hrtf.synthetic_order = Some(3);
    spec.conditions = vec![
        ConditionConfig { name: "mixed".into(), direct_order: 3, reverb_order: 1 },
        ConditionConfig { name: "reference".into(), direct_order: 3, reverb_order: 3 },
        ConditionConfig { name: "anchor".into(), direct_order: 1, reverb_order: 1 },
    ];
    spec.signals = vec![
        SignalConfig::Pink {
            name: "noise".into(),
            burst: 0.2,
            fade: 0.02,
            pause: 0.05,
            repetitions: 2,
        },
        SignalConfig::File { name: "speech".into(), path: speech },
    ];
    spec
}

pub fn single_environment(spec: &mut SceneSpec) {
    spec.environments = vec![EnvironmentConfig {
        id: 1,
        source_distance: 3.315,
        source_azimuth_deg: 30.0,
    }];
}
