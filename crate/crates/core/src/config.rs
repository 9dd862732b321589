//! Experiment configuration files.
//!
//! Files are TOML with every table closed to unknown keys. Angles are given in
//! degrees, rates in deg/s, gyro biases in deg/h and accelerometer biases in
//! micro-g; [`ExperimentConfig::from_toml`] converts everything to SI radians.

use crate::attitude::{EulerAngles, Vec3};
use crate::earth::{EarthError, EarthParams, STANDARD_GRAVITY};
use crate::ekf::{CovarianceReset, EkfSettings};
use crate::imu::NoiseModel;
use crate::scenario::{AxisFrame, Motion, Scenario, ScenarioError, Segment, SinusoidRate};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::path::Path;
use thiserror::Error;

const DEG_H: f64 = std::f64::consts::PI / 180.0 / 3600.0;
const MICRO_G: f64 = 1e-6 * STANDARD_GRAVITY;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Earth(#[from] EarthError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObserverKind {
    IdealNcr,
    IdealNfvr,
    MultiAxis,
    Multiposition,
    Ekf,
}

impl ObserverKind {
    pub fn name(self) -> &'static str {
        match self {
            ObserverKind::IdealNcr => "ideal_ncr",
            ObserverKind::IdealNfvr => "ideal_nfvr",
            ObserverKind::MultiAxis => "multi_axis",
            ObserverKind::Multiposition => "multiposition",
            ObserverKind::Ekf => "ekf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// How the filter is started.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EkfStart {
    /// Coarse alignment from the first static interval, then a seeded perturbation.
    #[default]
    Coarse,
    /// Exact initial state from the scenario truth.
    Truth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarlo {
    pub runs: usize,
    pub base_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    pub directory: String,
    pub formats: BTreeSet<OutputFormat>,
}

/// A validated experiment, all quantities SI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub description: String,
    pub scenario: Scenario,
    pub noise: Option<NoiseModel>,
    pub observers: BTreeSet<ObserverKind>,
    pub ekf: EkfSettings,
    pub ekf_start: EkfStart,
    /// Seed of the coarse-alignment perturbation for single runs.
    pub seed: u64,
    pub monte_carlo: Option<MonteCarlo>,
    pub output: OutputSpec,
}

// ---- file schema (deg, deg/h, micro-g) ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    name: Option<String>,
    #[serde(default)]
    description: String,
    #[serde(default = "default_seed")]
    seed: u64,
    observers: Vec<ObserverKind>,
    #[serde(default)]
    scenario: FileScenario,
    #[serde(default)]
    ekf: FileEkf,
    monte_carlo: Option<FileMonteCarlo>,
    #[serde(default)]
    output: FileOutput,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FileScenario {
    latitude_deg: f64,
    altitude_m: f64,
    sample_rate_hz: f64,
    duration_s: f64,
    /// roll, yaw, pitch
    initial_euler_deg: [f64; 3],
    gyro_bias_deg_h: [f64; 3],
    accel_bias_ug: [f64; 3],
    noise: Option<FileNoise>,
    segments: Vec<FileSegment>,
}

impl Default for FileScenario {
    fn default() -> Self {
        Self {
            latitude_deg: 28.2204,
            altitude_m: 60.0,
            sample_rate_hz: 100.0,
            duration_s: 300.0,
            initial_euler_deg: [0.0; 3],
            gyro_bias_deg_h: [0.01; 3],
            accel_bias_ug: [50.0; 3],
            noise: None,
            segments: Vec::new(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileNoise {
    /// Angle random walk [deg/sqrt(h)].
    gyro_arw_deg_sqrt_h: f64,
    /// Accelerometer white noise density [micro-g/sqrt(Hz)].
    accel_ug_sqrt_hz: f64,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
enum FileSegment {
    Static {
        start_s: f64,
        end_s: f64,
    },
    ConstRotation {
        axis: [f64; 3],
        #[serde(default)]
        frame: AxisFrame,
        rate_deg_s: f64,
        start_s: f64,
        end_s: f64,
    },
    /// rate = bias + amplitude sin(angular_frequency (t - start) + phase)
    VaryingRotation {
        axis: [f64; 3],
        #[serde(default)]
        frame: AxisFrame,
        bias_deg_s: f64,
        amplitude_deg_s: f64,
        angular_frequency_rad_s: f64,
        #[serde(default)]
        phase_deg: f64,
        start_s: f64,
        end_s: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FileEkf {
    start: EkfStart,
    coarse_duration_s: f64,
    init_attitude_sigma_deg: f64,
    velocity_sigma_m_s: f64,
    gyro_bias_sigma_deg_h: f64,
    accel_bias_sigma_ug: f64,
    /// attitude [rad^2/s], velocity [m^2/s^3], gyro bias [rad^2/s^3], accel bias [m^2/s^5]
    process_noise: [f64; 12],
    measurement_sigma_m_s: f64,
    measurement_rate_hz: f64,
    initial_gyro_bias_deg_h: [f64; 3],
    initial_accel_bias_ug: Option<[f64; 3]>,
    initial_accel_bias_m_s2: Option<[f64; 3]>,
    reset: FileReset,
}

impl Default for FileEkf {
    fn default() -> Self {
        let s = EkfSettings::default();
        Self {
            start: EkfStart::Coarse,
            coarse_duration_s: s.coarse_duration,
            init_attitude_sigma_deg: s.init_attitude_sigma.to_degrees(),
            velocity_sigma_m_s: s.velocity_sigma,
            gyro_bias_sigma_deg_h: s.gyro_bias_sigma / DEG_H,
            accel_bias_sigma_ug: s.accel_bias_sigma / MICRO_G,
            process_noise: s.process_noise,
            measurement_sigma_m_s: s.measurement_sigma,
            measurement_rate_hz: s.measurement_rate,
            initial_gyro_bias_deg_h: [0.0; 3],
            initial_accel_bias_ug: None,
            initial_accel_bias_m_s2: None,
            reset: FileReset::default(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FileReset {
    enabled: bool,
    nis_threshold: f64,
    attitude_sigma_deg: f64,
    gyro_bias_sigma_deg_h: f64,
    accel_bias_sigma_m_s2: f64,
}

impl Default for FileReset {
    fn default() -> Self {
        let r = CovarianceReset::default();
        Self {
            enabled: true,
            nis_threshold: r.nis_threshold,
            attitude_sigma_deg: r.attitude_sigma.to_degrees(),
            gyro_bias_sigma_deg_h: r.gyro_bias_sigma / DEG_H,
            accel_bias_sigma_m_s2: r.accel_bias_sigma,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileMonteCarlo {
    runs: usize,
    #[serde(default = "default_seed")]
    base_seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FileOutput {
    directory: Option<String>,
    formats: Vec<OutputFormat>,
}

impl Default for FileOutput {
    fn default() -> Self {
        Self { directory: None, formats: vec![OutputFormat::Csv, OutputFormat::Json] }
    }
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn unit_axis(a: [f64; 3], index: usize) -> Result<Vec3, ConfigError> {
    let v = vec3(a);
    let n = v.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(ConfigError::Validation(format!("segment {index}: rotation axis must be non-zero")));
    }
    Ok(v / n)
}

impl FileSegment {
    fn to_segment(&self, index: usize) -> Result<Segment, ConfigError> {
        Ok(match *self {
            FileSegment::Static { start_s, end_s } => {
                Segment { motion: Motion::Static, axis_frame: AxisFrame::Body, t_start: start_s, t_end: end_s }
            }
            FileSegment::ConstRotation { axis, frame, rate_deg_s, start_s, end_s } => Segment {
                motion: Motion::ConstRotation { axis: unit_axis(axis, index)?, rate: rate_deg_s.to_radians() },
                axis_frame: frame,
                t_start: start_s,
                t_end: end_s,
            },
            FileSegment::VaryingRotation {
                axis,
                frame,
                bias_deg_s,
                amplitude_deg_s,
                angular_frequency_rad_s,
                phase_deg,
                start_s,
                end_s,
            } => Segment {
                motion: Motion::VaryingRotation {
                    axis: unit_axis(axis, index)?,
                    profile: SinusoidRate {
                        bias: bias_deg_s.to_radians(),
                        amplitude: amplitude_deg_s.to_radians(),
                        angular_frequency: angular_frequency_rad_s,
                        phase: phase_deg.to_radians(),
                    },
                },
                axis_frame: frame,
                t_start: start_s,
                t_end: end_s,
            },
        })
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Self::from_toml(&text, &stem)
    }

    /// Parses and validates a configuration; `default_name` is used when the
    /// file has no `name` key.
    pub fn from_toml(text: &str, default_name: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::parse(text)
            .map_err(|e| ConfigError::Schema { path: ".".into(), message: e.message().to_string() })?;
        let file: FileConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema {
            path: e.path().to_string(),
            message: e.inner().message().to_string(),
        })?;
        file.into_config(default_name)
    }

    /// Directory for exported files, honouring the `INS_ALIGN_OUTPUT_DIR` override.
    pub fn output_dir(&self) -> std::path::PathBuf {
        match std::env::var_os("INS_ALIGN_OUTPUT_DIR") {
            Some(dir) if !dir.is_empty() => Path::new(&dir).join(&self.name),
            _ => self.output.directory.clone().into(),
        }
    }

    pub fn wants(&self, format: OutputFormat) -> bool {
        self.output.formats.contains(&format)
    }
}

impl FileConfig {
    fn into_config(self, default_name: &str) -> Result<ExperimentConfig, ConfigError> {
        let invalid = |m: String| ConfigError::Validation(m);
        let name = self.name.unwrap_or_else(|| default_name.to_string());
        if name.is_empty() {
            return Err(invalid("name must not be empty".into()));
        }

        let s = &self.scenario;
        let earth = EarthParams::from_degrees(s.latitude_deg, s.altitude_m)?;
        let [roll, yaw, pitch] = s.initial_euler_deg;
        let mut scenario = Scenario::new(earth, EulerAngles::from_degrees(roll, yaw, pitch), s.duration_s)
            .with_biases(vec3(s.gyro_bias_deg_h) * DEG_H, vec3(s.accel_bias_ug) * MICRO_G);
        scenario.sample_rate = s.sample_rate_hz;
        for (i, seg) in s.segments.iter().enumerate() {
            scenario = scenario.with_segment(seg.to_segment(i)?);
        }
        scenario.validate()?;
        let noise = match &s.noise {
            Some(n) => {
                if !(n.gyro_arw_deg_sqrt_h >= 0.0 && n.accel_ug_sqrt_hz >= 0.0) {
                    return Err(invalid("noise densities must be non-negative".into()));
                }
                Some(NoiseModel {
                    sigma_g: n.gyro_arw_deg_sqrt_h.to_radians() / 60.0,
                    sigma_a: n.accel_ug_sqrt_hz * MICRO_G,
                    seed: n.seed,
                })
            }
            None => None,
        };

        let e = &self.ekf;
        let initial_ba = match (e.initial_accel_bias_ug, e.initial_accel_bias_m_s2) {
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "give only one of ekf.initial_accel_bias_ug and ekf.initial_accel_bias_m_s2".into(),
                ))
            }
            (Some(ug), None) => vec3(ug) * MICRO_G,
            (None, Some(si)) => vec3(si),
            (None, None) => Vec3::zeros(),
        };
        let reset = e.reset.enabled.then(|| CovarianceReset {
            nis_threshold: e.reset.nis_threshold,
            attitude_sigma: e.reset.attitude_sigma_deg.to_radians(),
            gyro_bias_sigma: e.reset.gyro_bias_sigma_deg_h * DEG_H,
            accel_bias_sigma: e.reset.accel_bias_sigma_m_s2,
        });
        let ekf = EkfSettings {
            coarse_duration: e.coarse_duration_s,
            init_attitude_sigma: e.init_attitude_sigma_deg.to_radians(),
            velocity_sigma: e.velocity_sigma_m_s,
            gyro_bias_sigma: e.gyro_bias_sigma_deg_h * DEG_H,
            accel_bias_sigma: e.accel_bias_sigma_ug * MICRO_G,
            process_noise: e.process_noise,
            measurement_sigma: e.measurement_sigma_m_s,
            measurement_rate: e.measurement_rate_hz,
            initial_bg: vec3(e.initial_gyro_bias_deg_h) * DEG_H,
            initial_ba,
            feedback: Default::default(),
            reset,
        };
        ekf.validate().map_err(|err| invalid(format!("ekf: {err}")))?;

        let observers: BTreeSet<ObserverKind> = self.observers.into_iter().collect();
        if observers.is_empty() {
            return Err(invalid("at least one observer is required".into()));
        }
        check_observers(&observers, &scenario)?;
        let first_motion =
            scenario.segments.iter().find(|s| s.motion.is_rotation()).map_or(f64::INFINITY, |s| s.t_start);
        if observers.contains(&ObserverKind::Ekf) && e.start == EkfStart::Coarse && first_motion < ekf.coarse_duration {
            return Err(invalid(format!(
                "the coarse interval ({} s) must end before the first rotation at {first_motion} s",
                ekf.coarse_duration
            )));
        }

        let monte_carlo = match self.monte_carlo {
            Some(m) => {
                if m.runs == 0 {
                    return Err(invalid("monte_carlo.runs must be positive".into()));
                }
                if !observers.contains(&ObserverKind::Ekf) {
                    return Err(invalid("monte_carlo needs the ekf observer".into()));
                }
                Some(MonteCarlo { runs: m.runs, base_seed: m.base_seed })
            }
            None => None,
        };
        if self.output.formats.is_empty() {
            return Err(invalid("output.formats must name at least one of csv, json".into()));
        }
        let output = OutputSpec {
            directory: self.output.directory.unwrap_or_else(|| format!("out/{name}")),
            formats: self.output.formats.into_iter().collect(),
        };
        Ok(ExperimentConfig {
            name,
            description: self.description,
            scenario,
            noise,
            observers,
            ekf,
            ekf_start: e.start,
            seed: self.seed,
            monte_carlo,
            output,
        })
    }
}

/// Rejects observers the scenario cannot feed.
fn check_observers(observers: &BTreeSet<ObserverKind>, scenario: &Scenario) -> Result<(), ConfigError> {
    let count = |f: fn(&Motion) -> bool| scenario.segments.iter().filter(|s| f(&s.motion)).count();
    let n_const = count(|m| matches!(m, Motion::ConstRotation { .. }));
    let n_varying = count(|m| matches!(m, Motion::VaryingRotation { .. }));
    let n_rot = n_const + n_varying;
    let need = |ok: bool, kind: ObserverKind, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(ConfigError::Validation(format!("observer {} requires {what}", kind.name())))
        }
    };
    for &kind in observers {
        match kind {
            ObserverKind::IdealNcr => need(n_const >= 1, kind, "at least one const_rotation segment")?,
            ObserverKind::IdealNfvr => need(n_varying >= 1, kind, "at least one varying_rotation segment")?,
            ObserverKind::MultiAxis => need(n_rot >= 2, kind, "at least two rotation segments")?,
            ObserverKind::Multiposition => need(
                static_postures(scenario).len() >= 4,
                kind,
                "at least four still intervals separated by rotations",
            )?,
            ObserverKind::Ekf => {}
        }
    }
    Ok(())
}

/// Still intervals `[t0, t1)` between rotations, in order.
pub fn static_postures(scenario: &Scenario) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut t = 0.0;
    for s in scenario.segments.iter().filter(|s| s.motion.is_rotation()) {
        if s.t_start > t {
            out.push((t, s.t_start));
        }
        t = s.t_end;
    }
    if scenario.duration > t {
        out.push((t, scenario.duration));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_static_config_gets_defaults() {
        let cfg = ExperimentConfig::from_toml("observers = [\"ekf\"]\n", "static").unwrap();
        assert!((cfg.scenario.earth.latitude.to_degrees() - 28.2204).abs() < 1e-12);
        assert_eq!(cfg.scenario.earth.altitude, 60.0);
        assert_eq!(cfg.scenario.sample_rate, 100.0);
        assert_eq!(cfg.ekf.coarse_duration, 20.0);
        assert!((cfg.scenario.true_bg.x / DEG_H - 0.01).abs() < 1e-15);
        assert!((cfg.scenario.true_ba.y / MICRO_G - 50.0).abs() < 1e-9);
        assert_eq!(cfg.output.directory, "out/static");
    }

    #[test]
    fn unknown_key_names_its_path() {
        let err = ExperimentConfig::from_toml("observers = [\"ekf\"]\n[scenario]\nlatitude = 3.0\n", "x").unwrap_err();
        match err {
            ConfigError::Schema { path, message } => {
                assert!(path.contains("scenario"), "{path}");
                assert!(message.contains("latitude"), "{message}");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn overlapping_segments_are_rejected() {
        let text = r#"
observers = ["ideal_ncr"]
[scenario]
duration_s = 600
[[scenario.segments]]
kind = "const_rotation"
axis = [0, 1, 0]
rate_deg_s = 10
start_s = 100
end_s = 300
[[scenario.segments]]
kind = "const_rotation"
axis = [1, 0, 0]
rate_deg_s = 10
start_s = 200
end_s = 400
"#;
        let err = ExperimentConfig::from_toml(text, "x").unwrap_err();
        assert!(matches!(err, ConfigError::Scenario(ScenarioError::Overlap(0, 1))), "{err}");
    }

    #[test]
    fn observer_needs_matching_segment() {
        let err = ExperimentConfig::from_toml("observers = [\"ideal_ncr\"]\n", "x").unwrap_err();
        assert!(matches!(err, ConfigError::Validation(_)), "{err}");
    }

    #[test]
    fn units_are_converted() {
        let text = r#"
observers = ["ideal_nfvr", "ekf"]
[scenario]
duration_s = 600
[[scenario.segments]]
kind = "varying_rotation"
axis = [0, 2, 0]
bias_deg_s = 6
amplitude_deg_s = 4
angular_frequency_rad_s = 0.12566370614359174
start_s = 100
end_s = 500
[ekf]
initial_accel_bias_m_s2 = [0, 18, 0]
"#;
        let cfg = ExperimentConfig::from_toml(text, "x").unwrap();
        match cfg.scenario.segments[0].motion {
            Motion::VaryingRotation { axis, profile } => {
                assert_eq!(axis, Vec3::y());
                assert!((profile.bias - 6f64.to_radians()).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(cfg.ekf.initial_ba, Vec3::new(0.0, 18.0, 0.0));
    }
}
