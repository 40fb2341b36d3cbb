//! Scene simulation, rendering, equalization and stimulus export.
//!
//! Output layout under `spec.output`:
//!
//! ```text
//! rirs/env<E>_{direct,reverberant}.shrir   SH room responses
//! brirs/env<E>_<condition>.wav             unequalized binaural responses
//! filters/env<E>_<condition>.eq            equalizers (identity for the reference)
//! stimuli/env<E>_<signal>_<condition>.wav  equalized, normalized stimuli
//! orientations/env<E>_<condition>/az<deg>.wav
//! manifest.tsv, analysis.tsv
//! ```

use std::fmt::{self, Display};
use std::fs;
use std::path::{Path, PathBuf};

use ambimix_core::audio::{pink_burst, read_wav, write_stereo, SampleFormat, SourceSignal, Stereo};
use ambimix_core::eq::{apply_eq, band_energies, design_eq, write_eq_filter, EqFilter};
use ambimix_core::hrtf::{encode_hrtf_sh, load_hrtf_set, synthetic_hrtf_sh, HrtfSh, DEFAULT_REGULARIZATION, SYNTHETIC_IR_LENGTH};
use ambimix_core::render::{convolve, orientation_grid, render_mixed, render_orientations, BinauralIr, RenderCondition};
use ambimix_core::room::{
    analyze_drr, analyze_t60, critical_distance, diffuse_drr, encode_sh_rir, enumerate_images, sabine_t60,
    write_sh_signal, Component, SplitShRir, PULSE_TAPS,
};
use ambimix_core::sh::num_coeffs;

use crate::config::{EnvironmentConfig, SceneSpec, SignalConfig};
use crate::PipelineError;

trait Stage<T> {
    fn stage(self, stage: &'static str, scene: impl Display) -> Result<T, PipelineError>;
}

impl<T> Stage<T> for ambimix_core::Result<T> {
    fn stage(self, stage: &'static str, scene: impl Display) -> Result<T, PipelineError> {
        self.map_err(|source| PipelineError::Stage {
            stage,
            scene: scene.to_string(),
            source,
        })
    }
}

fn io_stage<T>(r: std::io::Result<T>, path: &Path) -> Result<T, PipelineError> {
    r.map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn create_dir(path: &Path) -> Result<(), PipelineError> {
    io_stage(fs::create_dir_all(path), path)
}

/// Simulated room response of one environment and its acoustic parameters.
pub struct Simulation {
    pub environment: u32,
    pub source_distance: f64,
    pub rir: SplitShRir,
    pub drr_db: f64,
    pub t60: f64,
    pub sabine_t60: f64,
    pub critical_distance: f64,
}

pub fn simulate(spec: &SceneSpec, env: &EnvironmentConfig) -> Result<Simulation, PipelineError> {
    let scene = format!("environment {}", env.id);
    let room = spec.room_spec()?;
    let geometry = spec.geometry(env);
    let length = spec.response_length();
    // leave room for the tail of the last fractional-delay pulse
    let max_time = length - PULSE_TAPS as f64 / spec.sample_rate as f64;
    let images = enumerate_images(&room, &geometry, max_time).stage("image enumeration", &scene)?;
    let rir = encode_sh_rir(&images, spec.sh_order, spec.sample_rate, length).stage("SH encoding", &scene)?;
    let drr_db = analyze_drr(&rir).stage("DRR analysis", &scene)?;
    let t60 = analyze_t60(&rir.omni(), spec.sample_rate).stage("T60 analysis", &scene)?;
    Ok(Simulation {
        environment: env.id,
        source_distance: env.source_distance,
        drr_db,
        t60,
        sabine_t60: sabine_t60(&room),
        critical_distance: critical_distance(&room, t60),
        rir,
    })
}

/// Writes the direct and reverberant parts, truncated to `order`.
pub fn write_rirs(dir: &Path, sim: &Simulation, order: usize) -> Result<[PathBuf; 2], PipelineError> {
    let scene = format!("environment {}", sim.environment);
    create_dir(dir)?;
    let rir = sim.rir.truncate(order).stage("RIR export", &scene)?;
    let direct = dir.join(format!("env{}_direct.shrir", sim.environment));
    let reverberant = dir.join(format!("env{}_reverberant.shrir", sim.environment));
    write_sh_signal(&direct, rir.direct(), Component::Direct).stage("RIR export", &scene)?;
    write_sh_signal(&reverberant, rir.reverberant(), Component::Reverberant).stage("RIR export", &scene)?;
    Ok([direct, reverberant])
}

pub fn load_hrtf(spec: &SceneSpec) -> Result<HrtfSh, PipelineError> {
    match &spec.hrtf.path {
        Some(path) => {
            let scene = path.display().to_string();
            let set = load_hrtf_set(path).stage("HRTF load", &scene)?;
            if set.sample_rate() != spec.sample_rate {
                return Err(PipelineError::Stage {
                    stage: "HRTF load",
                    scene,
                    source: ambimix_core::Error::SampleRateMismatch(set.sample_rate(), spec.sample_rate),
                });
            }
            encode_hrtf_sh(&set, spec.hrtf_order(), DEFAULT_REGULARIZATION).stage("HRTF fit", &scene)
        }
        None => synthetic_hrtf_sh(spec.hrtf_order(), spec.hrtf_seed(), SYNTHETIC_IR_LENGTH, spec.sample_rate)
            .stage("synthetic HRTF", format!("order {}", spec.hrtf_order())),
    }
}

/// One rendered condition with its equalizer.
pub struct RenderedCondition {
    pub condition: RenderCondition,
    pub brir: BinauralIr,
    pub filter: EqFilter,
    pub equalized: BinauralIr,
}

/// Renders every condition and equalizes each to the reference condition.
pub fn render_environment(spec: &SceneSpec, sim: &Simulation, hrtf: &HrtfSh) -> Result<Vec<RenderedCondition>, PipelineError> {
    let conditions = spec.render_conditions();
    let mut brirs = Vec::with_capacity(conditions.len());
    for c in &conditions {
        let scene = format!("environment {}, condition {}", sim.environment, c.name);
        brirs.push(render_mixed(&sim.rir, hrtf, c).stage("rendering", scene)?);
    }
    let reference = conditions
        .iter()
        .position(|c| c.name == spec.reference)
        .ok_or_else(|| PipelineError::Config(format!("unknown reference `{}`", spec.reference)))?;
    let mut out = Vec::with_capacity(conditions.len());
    for (c, brir) in conditions.into_iter().zip(&brirs) {
        let scene = format!("environment {}, condition {}", sim.environment, c.name);
        let filter = if c.name == spec.reference {
            EqFilter {
                smoothing_fraction: spec.eq.smoothing_octaves,
                gain_limit_db: spec.eq.gain_limit_db,
                ..EqFilter::identity(spec.sample_rate)
            }
        } else {
            design_eq(brir, &brirs[reference], spec.eq.smoothing_octaves, spec.eq.gain_limit_db)
                .stage("EQ design", &scene)?
        };
        let equalized = apply_eq(brir, &filter).stage("EQ", &scene)?;
        out.push(RenderedCondition {
            condition: c,
            brir: brir.clone(),
            filter,
            equalized,
        });
    }
    Ok(out)
}

pub fn write_brirs(dir: &Path, environment: u32, rendered: &[RenderedCondition]) -> Result<(), PipelineError> {
    let brirs = dir.join("brirs");
    let filters = dir.join("filters");
    create_dir(&brirs)?;
    create_dir(&filters)?;
    for r in rendered {
        let scene = format!("environment {environment}, condition {}", r.condition.name);
        let name = format!("env{environment}_{}", r.condition.name);
        write_stereo(&brirs.join(format!("{name}.wav")), &r.brir, SampleFormat::Float32).stage("BRIR export", &scene)?;
        write_eq_filter(&filters.join(format!("{name}.eq")), &r.filter).stage("filter export", &scene)?;
    }
    Ok(())
}

pub fn load_signal(spec: &SceneSpec, signal: &SignalConfig) -> Result<SourceSignal, PipelineError> {
    match signal {
        SignalConfig::Pink {
            name,
            burst,
            fade,
            pause,
            repetitions,
        } => {
            let s = pink_burst(*burst, *fade, *pause, *repetitions, spec.seed, spec.sample_rate)
                .stage("signal generation", name)?;
            SourceSignal::new(s.samples().to_vec(), s.sample_rate(), name.clone()).stage("signal generation", name)
        }
        SignalConfig::File { name, path } => {
            let wav = read_wav(path).stage("signal load", path.display())?;
            if wav.sample_rate != spec.sample_rate {
                return Err(PipelineError::Stage {
                    stage: "signal load",
                    scene: path.display().to_string(),
                    source: ambimix_core::Error::SampleRateMismatch(wav.sample_rate, spec.sample_rate),
                });
            }
            wav.into_mono(name.clone()).stage("signal load", path.display())
        }
    }
}

/// Convolves `signal` with every equalized response and applies one gain to
/// the whole set so the reference peaks at `spec.peak_dbfs`.
pub fn make_stimuli(
    spec: &SceneSpec,
    environment: u32,
    rendered: &[RenderedCondition],
    signal: &SourceSignal,
) -> Result<Vec<Stereo>, PipelineError> {
    let scene = format!("environment {environment}, signal {}", signal.label());
    let stimuli = rendered
        .iter()
        .map(|r| convolve(signal, &r.equalized))
        .collect::<ambimix_core::Result<Vec<_>>>()
        .stage("convolution", &scene)?;
    let reference = rendered
        .iter()
        .position(|r| r.condition.name == spec.reference)
        .ok_or_else(|| PipelineError::Config(format!("unknown reference `{}`", spec.reference)))?;
    let peak = stimuli[reference].peak();
    if peak == 0.0 {
        return Err(PipelineError::Stage {
            stage: "normalization",
            scene,
            source: ambimix_core::Error::ZeroEnergy("reference stimulus".into()),
        });
    }
    let gain = 10f64.powf(spec.peak_dbfs / 20.0) / peak;
    Ok(stimuli.iter().map(|s| s.scaled(gain)).collect())
}

fn db(x: f64) -> f64 {
    20.0 * x.log10()
}

/// One stimulus file and the metrics of the scene that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    /// Path relative to the output directory.
    pub file: String,
    pub environment: u32,
    pub signal: String,
    pub condition: String,
    pub direct_order: usize,
    pub reverb_order: usize,
    pub drr_db: f64,
    pub t60: f64,
    pub peak_dbfs: f64,
    pub rms_dbfs: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

const MANIFEST_COLUMNS: [&str; 10] = [
    "file",
    "environment",
    "signal",
    "condition",
    "direct_order",
    "reverb_order",
    "drr_db",
    "t60_s",
    "peak_dbfs",
    "rms_dbfs",
];

impl Manifest {
    pub fn to_tsv(&self) -> String {
        let mut out = MANIFEST_COLUMNS.join("\t");
        out.push('\n');
        for e in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\n",
                e.file,
                e.environment,
                e.signal,
                e.condition,
                e.direct_order,
                e.reverb_order,
                e.drr_db,
                e.t60,
                e.peak_dbfs,
                e.rms_dbfs
            ));
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<Self, PipelineError> {
        let mut lines = text.lines();
        let bad = |line: usize, m: &str| PipelineError::Config(format!("manifest line {line}: {m}"));
        if lines.next().map(|h| h.split('\t').eq(MANIFEST_COLUMNS)) != Some(true) {
            return Err(bad(1, "unexpected header"));
        }
        let mut entries = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != MANIFEST_COLUMNS.len() {
                return Err(bad(i + 2, "wrong column count"));
            }
            let num = |k: usize| f[k].parse::<f64>().map_err(|_| bad(i + 2, MANIFEST_COLUMNS[k]));
            let int = |k: usize| f[k].parse::<usize>().map_err(|_| bad(i + 2, MANIFEST_COLUMNS[k]));
            entries.push(ManifestEntry {
                file: f[0].into(),
                environment: int(1)? as u32,
                signal: f[2].into(),
                condition: f[3].into(),
                direct_order: int(4)?,
                reverb_order: int(5)?,
                drr_db: num(6)?,
                t60: num(7)?,
                peak_dbfs: num(8)?,
                rms_dbfs: num(9)?,
            });
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self, PipelineError> {
        Self::from_tsv(&io_stage(fs::read_to_string(path), path)?)
    }
}

/// Long-format analysis table: one value per row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub environment: u32,
    pub metric: String,
    pub condition: String,
    pub parameter: String,
    pub value: f64,
}

impl Report {
    fn push(&mut self, environment: u32, metric: &str, condition: &str, parameter: impl Into<String>, value: f64) {
        self.rows.push(ReportRow {
            environment,
            metric: metric.into(),
            condition: condition.into(),
            parameter: parameter.into(),
            value,
        });
    }

    pub fn value(&self, environment: u32, metric: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.environment == environment && r.metric == metric)
            .map(|r| r.value)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("environment\tmetric\tcondition\tparameter\tvalue\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{:.6}\n",
                r.environment, r.metric, r.condition, r.parameter, r.value
            ));
        }
        out
    }

    /// Room parameters of a simulation.
    pub fn add_simulation(&mut self, sim: &Simulation) {
        let e = sim.environment;
        self.push(e, "source_distance_m", "", "", sim.source_distance);
        self.push(e, "drr_db", "", "", sim.drr_db);
        self.push(e, "t60_s", "", "", sim.t60);
        self.push(e, "sabine_t60_s", "", "", sim.sabine_t60);
        self.push(e, "critical_distance_m", "", "", sim.critical_distance);
        self.push(e, "diffuse_drr_db", "", "", diffuse_drr(sim.critical_distance, sim.source_distance));
        for (metric, part) in [("sh_energy_direct", sim.rir.direct()), ("sh_energy_reverberant", sim.rir.reverberant())] {
            for n in 0..=sim.rir.order() {
                let energy: f64 = (n * n..num_coeffs(n)).map(|i| part.channel_energy(i)).sum();
                self.push(e, metric, "", format!("n={n}"), energy);
            }
        }
    }

    /// Third-octave band levels of each condition, before and after EQ.
    pub fn add_spectra(&mut self, environment: u32, rendered: &[RenderedCondition], fraction: f64) {
        for r in rendered {
            for (metric, x) in [("band_db", &r.brir), ("band_db_eq", &r.equalized)] {
                for b in band_energies(x, fraction, 100.0, 16_000.0) {
                    self.push(environment, metric, &r.condition.name, format!("{:.0}", b.center), 10.0 * b.energy.log10());
                }
            }
        }
    }
}

/// Simulates every environment, writes the SH responses truncated to
/// `export_order`, and returns the room analysis.
pub fn simulate_cmd(spec: &SceneSpec, export_order: usize) -> Result<Report, PipelineError> {
    spec.validate()?;
    let mut report = Report::default();
    for env in &spec.environments {
        let sim = simulate(spec, env)?;
        write_rirs(&spec.output.join("rirs"), &sim, export_order.min(spec.sh_order))?;
        report.add_simulation(&sim);
    }
    write_report(&spec.output, &report)?;
    Ok(report)
}

/// Writes unequalized BRIRs and equalizers for every environment.
pub fn render_cmd(spec: &SceneSpec) -> Result<(), PipelineError> {
    spec.validate()?;
    let hrtf = load_hrtf(spec)?;
    for env in &spec.environments {
        let sim = simulate(spec, env)?;
        let rendered = render_environment(spec, &sim, &hrtf)?;
        write_brirs(&spec.output, env.id, &rendered)?;
    }
    Ok(())
}

/// Room analysis plus per-condition spectra; writes `analysis.tsv`.
pub fn analyze_cmd(spec: &SceneSpec) -> Result<Report, PipelineError> {
    spec.validate()?;
    let hrtf = load_hrtf(spec)?;
    let mut report = Report::default();
    for env in &spec.environments {
        let sim = simulate(spec, env)?;
        report.add_simulation(&sim);
        let rendered = render_environment(spec, &sim, &hrtf)?;
        report.add_spectra(env.id, &rendered, spec.eq.smoothing_octaves);
    }
    write_report(&spec.output, &report)?;
    Ok(report)
}

fn write_report(dir: &Path, report: &Report) -> Result<(), PipelineError> {
    create_dir(dir)?;
    let path = dir.join("analysis.tsv");
    io_stage(fs::write(&path, report.to_tsv()), &path)
}

fn azimuth_label(deg: f64) -> String {
    if deg.fract() == 0.0 {
        format!("az{deg:03.0}")
    } else {
        format!("az{deg:07.3}")
    }
}

/// Writes one unequalized BRIR per head azimuth for `condition`, for every
/// environment. Returns the written paths.
pub fn orientations_cmd(spec: &SceneSpec, condition: &str, resolution_deg: f64) -> Result<Vec<PathBuf>, PipelineError> {
    spec.validate()?;
    let cond = spec
        .condition(condition)
        .ok_or_else(|| PipelineError::Config(format!("unknown condition `{condition}`")))?;
    let azimuths = orientation_grid(resolution_deg).stage("orientation grid", format!("{resolution_deg}°"))?;
    let hrtf = load_hrtf(spec)?;
    let mut written = Vec::with_capacity(azimuths.len() * spec.environments.len());
    for env in &spec.environments {
        let scene = format!("environment {}, condition {condition}", env.id);
        let sim = simulate(spec, env)?;
        let bank = render_orientations(&sim.rir, &hrtf, &cond, &azimuths).stage("orientation rendering", &scene)?;
        let dir = spec.output.join("orientations").join(format!("env{}_{condition}", env.id));
        create_dir(&dir)?;
        for (i, brir) in bank.iter().enumerate() {
            let path = dir.join(format!("{}.wav", azimuth_label(i as f64 * resolution_deg)));
            write_stereo(&path, brir, SampleFormat::Float32).stage("orientation export", &scene)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// The full reproduction: responses, BRIRs, equalizers, stimuli, manifest
/// and analysis for every environment × signal.
pub fn run_pipeline(spec: &SceneSpec) -> Result<Manifest, PipelineError> {
    spec.validate()?;
    let signals = spec
        .signals
        .iter()
        .map(|s| load_signal(spec, s))
        .collect::<Result<Vec<_>, _>>()?;
    let hrtf = load_hrtf(spec)?;
    let stimuli_dir = spec.output.join("stimuli");
    create_dir(&stimuli_dir)?;

    let mut manifest = Manifest::default();
    let mut report = Report::default();
    for env in &spec.environments {
        let sim = simulate(spec, env)?;
        write_rirs(&spec.output.join("rirs"), &sim, 0)?;
        report.add_simulation(&sim);
        let rendered = render_environment(spec, &sim, &hrtf)?;
        let (drr_db, t60) = (sim.drr_db, sim.t60);
        drop(sim);
        write_brirs(&spec.output, env.id, &rendered)?;
        report.add_spectra(env.id, &rendered, spec.eq.smoothing_octaves);

        for signal in &signals {
            let stimuli = make_stimuli(spec, env.id, &rendered, signal)?;
            for (r, s) in rendered.iter().zip(&stimuli) {
                let file = format!("stimuli/env{}_{}_{}.wav", env.id, signal.label(), r.condition.name);
                let scene = format!("environment {}, signal {}, condition {}", env.id, signal.label(), r.condition.name);
                write_stereo(&spec.output.join(&file), s, SampleFormat::Float32).stage("stimulus export", scene)?;
                manifest.entries.push(ManifestEntry {
                    file,
                    environment: env.id,
                    signal: signal.label().into(),
                    condition: r.condition.name.clone(),
                    direct_order: r.condition.direct_order,
                    reverb_order: r.condition.reverb_order,
                    drr_db,
                    t60,
                    peak_dbfs: db(s.peak()),
                    rms_dbfs: db(s.rms()),
                });
            }
        }
    }
    let path = spec.output.join("manifest.tsv");
    io_stage(fs::write(&path, manifest.to_tsv()), &path)?;
    write_report(&spec.output, &report)?;
    Ok(manifest)
}

impl Display for ManifestEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: DRR {:.2} dB, T60 {:.3} s, peak {:.2} dBFS",
            self.file, self.drr_db, self.t60, self.peak_dbfs
        )
    }
}
