//! Experiment orchestration: simulate, run the requested observers, export.

use crate::attitude::{Dcm, Vec3};
use crate::config::{static_postures, ConfigError, EkfStart, ExperimentConfig, ObserverKind, OutputFormat};
use crate::earth::{EarthParams, STANDARD_GRAVITY};
use crate::ekf::{ekf_run, write_history_csv, EkfError, EkfInit, EkfRun, NavState};
use crate::imu::{add_noise, finite_diff_derivatives, ImuError, ImuRecord};
use crate::observers::{
    io_ncr_omega, io_nfvr_omega, multi_axis_solve, multiposition_solve, rotation_samples, run_rotation_observer,
    static_constraint_residuals, ObserverError, ObserverReport, ObserverTolerances, RotationObserver, RotationSample,
    StaticPosture,
};
use crate::scenario::{Motion, Phase, ScenarioError, Simulator};
use rayon::prelude::*;
use serde::Serialize;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

const RAD_S_TO_DEG_H: f64 = 180.0 / std::f64::consts::PI * 3600.0;
const TO_UG: f64 = 1e6 / STANDARD_GRAVITY;
// finite-difference half-width used when noise is added
const STENCIL: usize = 3;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{observer}: {source}")]
    Observer { observer: &'static str, source: ObserverError },
    #[error("ekf: {0}")]
    Ekf(#[from] EkfError),
    #[error("imu: {0}")]
    Imu(#[from] ImuError),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
}

impl From<ScenarioError> for RunError {
    fn from(e: ScenarioError) -> Self {
        RunError::Config(e.into())
    }
}

impl RunError {
    /// Process exit code: 2 configuration, 3 solver degeneracy, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(ConfigError::Read { .. }) | RunError::Io { .. } => 4,
            RunError::Config(_) | RunError::Ekf(EkfError::Settings(_)) => 2,
            RunError::Observer { .. } | RunError::Ekf(_) | RunError::Imu(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "degenerate",
            _ => "io",
        }
    }
}

fn observer_err(kind: ObserverKind) -> impl Fn(ObserverError) -> RunError {
    move |source| RunError::Observer { observer: kind.name(), source }
}

#[derive(Debug, Clone, Serialize)]
pub struct TruthSummary {
    pub bg_deg_h: Vec3,
    pub ba_ug: Vec3,
    /// roll, yaw, pitch at t = 0 [deg]
    pub initial_euler_deg: [f64; 3],
    pub final_euler_deg: [f64; 3],
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentReport {
    pub segment: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Feasible pair closest to the true biases.
    pub true_pair: Option<usize>,
    pub true_pair_bg_error_deg_h: f64,
    pub true_pair_ba_error_m_s2: f64,
    /// Angle between that pair's initial attitude and the truth [rad].
    pub true_pair_attitude_error: f64,
    pub report: ObserverReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionSummary {
    pub bg_deg_h: Vec3,
    pub ba_ug: Vec3,
    pub euler_deg: [f64; 3],
    pub bg_error_deg_h: f64,
    pub ba_error_m_s2: f64,
    pub attitude_error: f64,
    /// Rotation axes in body axes (multi-axis solutions only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EkfSummary {
    pub seed: u64,
    pub start: EkfStart,
    pub coarse_euler_deg: Option<[f64; 3]>,
    pub final_euler_deg: [f64; 3],
    pub final_bg_deg_h: Vec3,
    pub final_ba_ug: Vec3,
    /// Estimate minus truth.
    pub bg_error_deg_h: Vec3,
    pub ba_error_m_s2: Vec3,
    pub attitude_error: f64,
    /// Relative gyro-sphere, accelerometer-sphere and dot-product residuals of
    /// the final estimates against the last record, when it was taken still.
    pub static_residuals: Option<[f64; 3]>,
    pub max_innovation: f64,
    pub covariance_resets: usize,
    pub final_p_diag: [f64; 12],
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    pub source: String,
    pub quantity: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub name: String,
    pub description: String,
    pub seed: u64,
    pub truth: TruthSummary,
    pub ideal_ncr: Vec<SegmentReport>,
    pub ideal_nfvr: Vec<SegmentReport>,
    pub multi_axis: Option<SolutionSummary>,
    pub multiposition: Option<SolutionSummary>,
    pub ekf: Option<EkfSummary>,
    pub residuals: Vec<ResidualRow>,
    /// Not exported, so that summaries stay byte-identical between runs.
    #[serde(skip)]
    pub wall_time_s: f64,
    #[serde(skip)]
    pub ekf_run: Option<EkfRun>,
}

/// Simulated streams of one configuration.
pub struct Experiment {
    pub cfg: ExperimentConfig,
    pub sim: Simulator,
    pub records: Vec<ImuRecord>,
}

impl Experiment {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self, RunError> {
        let sim = cfg.scenario.simulator()?;
        let mut records = sim.imu_range(0..sim.len());
        if let Some(noise) = &cfg.noise {
            records = add_noise(&records, 0, cfg.scenario.sample_rate, noise);
        }
        Ok(Self { cfg: cfg.clone(), sim, records })
    }

    fn earth(&self) -> &EarthParams {
        self.sim.earth()
    }

    /// Records of a rotation phase with output derivatives.
    pub fn rotation_records(&self, phase: &Phase) -> Result<Vec<ImuRecord>, RunError> {
        match &self.cfg.noise {
            None => Ok(self.sim.imu_range_with_derivatives(phase.k_start..phase.k_end)?),
            Some(_) => {
                let raw = &self.records[phase.k_start..phase.k_end];
                let with_d = finite_diff_derivatives(raw, STENCIL, self.sim.dt())?;
                Ok(with_d.into_iter().filter(|r| r.derivs.is_some()).collect())
            }
        }
    }

    fn rotation_phases(&self) -> Vec<(usize, Phase)> {
        self.sim.phases().iter().filter(|p| p.is_rotation()).filter_map(|p| p.segment.map(|i| (i, *p))).collect()
    }

    fn bias_errors(&self, bg: &Vec3, ba: &Vec3) -> (f64, f64) {
        let sc = &self.cfg.scenario;
        ((bg - sc.true_bg).norm() * RAD_S_TO_DEG_H, (ba - sc.true_ba).norm())
    }

    fn rotation_reports(&self, kind: ObserverKind) -> Result<Vec<SegmentReport>, RunError> {
        let (observer, wanted): (RotationObserver, fn(&Motion) -> bool) = match kind {
            ObserverKind::IdealNcr => (RotationObserver::Ncr, |m| matches!(m, Motion::ConstRotation { .. })),
            _ => (RotationObserver::Nfvr, |m| matches!(m, Motion::VaryingRotation { .. })),
        };
        let tol = ObserverTolerances::default();
        let breaks = self.sim.break_times();
        let still = |k: usize| !self.sim.truth(k).rotating;
        let mut out = Vec::new();
        for (segment, phase) in self.rotation_phases().into_iter().filter(|(_, p)| wanted(&p.motion)) {
            let rot = self.rotation_records(&phase)?;
            let report = run_rotation_observer(observer, &rot, &self.records, &breaks, &still, self.earth(), &tol)
                .map_err(observer_err(kind))?;
            let truth0 = self.sim.truth(0).c_bn;
            let best = report
                .attitude_solutions
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let (eg, ea) = self.bias_errors(&s.bg, &s.ba);
                    (i, eg, ea, s.c_bn0.angle_to(&truth0))
                })
                .min_by(|a, b| (a.1 / 3600.0 + a.2).total_cmp(&(b.1 / 3600.0 + b.2)));
            let (true_pair, eg, ea, att) = match best {
                Some((i, eg, ea, att)) => (Some(i), eg, ea, att),
                None => (None, f64::NAN, f64::NAN, f64::NAN),
            };
            out.push(SegmentReport {
                segment,
                t_start: self.sim.time(phase.k_start),
                t_end: self.sim.time(phase.k_end - 1),
                true_pair,
                true_pair_bg_error_deg_h: eg,
                true_pair_ba_error_m_s2: ea,
                true_pair_attitude_error: att,
                report,
            });
        }
        Ok(out)
    }

    fn solution(&self, bg: Vec3, ba: Vec3, c_bn0: &Dcm, axes: Vec<Vec3>) -> SolutionSummary {
        let (eg, ea) = self.bias_errors(&bg, &ba);
        SolutionSummary {
            bg_deg_h: bg * RAD_S_TO_DEG_H,
            ba_ug: ba * TO_UG,
            euler_deg: c_bn0.to_euler().to_degrees(),
            bg_error_deg_h: eg,
            ba_error_m_s2: ea,
            attitude_error: c_bn0.angle_to(&self.sim.truth(0).c_bn),
            axes,
        }
    }

    pub fn multi_axis(&self) -> Result<SolutionSummary, RunError> {
        let kind = ObserverKind::MultiAxis;
        let tol = ObserverTolerances::default();
        let mut segments: Vec<Vec<RotationSample>> = Vec::new();
        for (_, phase) in self.rotation_phases() {
            let rot = self.rotation_records(&phase)?;
            let samples = match phase.motion {
                Motion::VaryingRotation { .. } => io_nfvr_omega(&rot, self.earth().g, &tol),
                _ => io_ncr_omega(&rot, &tol).and_then(|w| rotation_samples(&rot, w)),
            }
            .map_err(observer_err(kind))?;
            segments.push(samples);
        }
        let sol = multi_axis_solve(&segments, &self.records, &self.sim.break_times(), self.earth(), &tol)
            .map_err(observer_err(kind))?;
        Ok(self.solution(sol.bg, sol.ba, &sol.c_bn0, sol.axes))
    }

    pub fn postures(&self) -> Vec<StaticPosture> {
        let rate = self.cfg.scenario.sample_rate;
        let n = self.records.len();
        static_postures(&self.cfg.scenario)
            .into_iter()
            .filter_map(|(t0, t1)| {
                let k0 = ((t0 * rate).round() as usize).min(n);
                let k1 = ((t1 * rate).round() as usize).min(n);
                StaticPosture::average(&self.records[k0..k1])
            })
            .collect()
    }

    pub fn multiposition(&self) -> Result<SolutionSummary, RunError> {
        let sol =
            multiposition_solve(&self.postures(), self.earth()).map_err(observer_err(ObserverKind::Multiposition))?;
        Ok(self.solution(sol.bg, sol.ba, &sol.c_bn0, Vec::new()))
    }

    /// One filter run; `seed` drives the coarse-alignment perturbation.
    pub fn ekf(&self, seed: u64) -> Result<(EkfSummary, EkfRun), RunError> {
        let sc = &self.cfg.scenario;
        let init = match self.cfg.ekf_start {
            EkfStart::Coarse => EkfInit::Coarse { seed },
            EkfStart::Truth => EkfInit::Given(NavState {
                c_bn: self.sim.truth(0).c_bn,
                v_n: Vec3::zeros(),
                bg: sc.true_bg,
                ba: sc.true_ba,
            }),
        };
        let run = ekf_run(&self.records, &self.sim.break_times(), self.earth(), &self.cfg.ekf, init)?;
        let s = &run.final_state;
        let last = self.records.len() - 1;
        let static_residuals = (!self.sim.truth(last).rotating).then(|| {
            static_constraint_residuals(&self.records[last], &s.bg, &s.ba, self.earth()).relative(self.earth())
        });
        let summary = EkfSummary {
            seed,
            start: self.cfg.ekf_start,
            coarse_euler_deg: run.coarse_attitude.map(|c| c.to_euler().to_degrees()),
            final_euler_deg: s.c_bn.to_euler().to_degrees(),
            final_bg_deg_h: s.bg * RAD_S_TO_DEG_H,
            final_ba_ug: s.ba * TO_UG,
            bg_error_deg_h: (s.bg - sc.true_bg) * RAD_S_TO_DEG_H,
            ba_error_m_s2: s.ba - sc.true_ba,
            attitude_error: s.c_bn.angle_to(&self.sim.truth(last).c_bn),
            static_residuals,
            max_innovation: run.max_innovation,
            covariance_resets: run.resets,
            final_p_diag: run.final_p_diag,
        };
        Ok((summary, run))
    }
}

/// Runs every requested observer on the simulated scenario.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    let exp = Experiment::new(cfg)?;
    let last = exp.records.len() - 1;
    let truth = TruthSummary {
        bg_deg_h: cfg.scenario.true_bg * RAD_S_TO_DEG_H,
        ba_ug: cfg.scenario.true_ba * TO_UG,
        initial_euler_deg: exp.sim.truth(0).c_bn.to_euler().to_degrees(),
        final_euler_deg: exp.sim.truth(last).c_bn.to_euler().to_degrees(),
    };
    let mut summary = RunSummary {
        schema_version: SCHEMA_VERSION,
        name: cfg.name.clone(),
        description: cfg.description.clone(),
        seed: cfg.seed,
        truth,
        ideal_ncr: Vec::new(),
        ideal_nfvr: Vec::new(),
        multi_axis: None,
        multiposition: None,
        ekf: None,
        residuals: Vec::new(),
        wall_time_s: 0.0,
        ekf_run: None,
    };
    for &kind in &cfg.observers {
        match kind {
            ObserverKind::IdealNcr => summary.ideal_ncr = exp.rotation_reports(kind)?,
            ObserverKind::IdealNfvr => summary.ideal_nfvr = exp.rotation_reports(kind)?,
            ObserverKind::MultiAxis => summary.multi_axis = Some(exp.multi_axis()?),
            ObserverKind::Multiposition => summary.multiposition = Some(exp.multiposition()?),
            ObserverKind::Ekf => {
                let (s, run) = exp.ekf(cfg.seed)?;
                summary.ekf = Some(s);
                summary.ekf_run = Some(run);
            }
        }
    }
    summary.residuals = residual_table(&summary);
    summary.wall_time_s = start.elapsed().as_secs_f64();
    Ok(summary)
}

fn residual_table(s: &RunSummary) -> Vec<ResidualRow> {
    let mut rows = Vec::new();
    let mut push = |source: String, quantity: &str, value: f64| {
        rows.push(ResidualRow { source, quantity: quantity.to_string(), value })
    };
    for (name, reports) in [("ideal_ncr", &s.ideal_ncr), ("ideal_nfvr", &s.ideal_nfvr)] {
        for r in reports {
            let source = format!("{name}[{}]", r.segment);
            push(source.clone(), "separation_g_deg_h", r.report.separation_g_deg_h);
            push(source.clone(), "separation_a_m_s2", r.report.separation_a_m_s2);
            push(source.clone(), "feasible_pairs", r.report.candidates.feasible_pairs.len() as f64);
            for (k, v) in &r.report.diagnostics {
                push(source.clone(), k, *v);
            }
            push(source.clone(), "true_pair_bg_error_deg_h", r.true_pair_bg_error_deg_h);
            push(source.clone(), "true_pair_ba_error_m_s2", r.true_pair_ba_error_m_s2);
            push(source, "true_pair_attitude_error_rad", r.true_pair_attitude_error);
        }
    }
    for (name, sol) in [("multi_axis", &s.multi_axis), ("multiposition", &s.multiposition)] {
        if let Some(sol) = sol {
            push(name.into(), "bg_error_deg_h", sol.bg_error_deg_h);
            push(name.into(), "ba_error_m_s2", sol.ba_error_m_s2);
            push(name.into(), "attitude_error_rad", sol.attitude_error);
        }
    }
    if let Some(e) = &s.ekf {
        push("ekf".into(), "bg_error_deg_h", e.bg_error_deg_h.norm());
        push("ekf".into(), "ba_error_m_s2", e.ba_error_m_s2.norm());
        push("ekf".into(), "attitude_error_rad", e.attitude_error);
        push("ekf".into(), "max_innovation_m_s", e.max_innovation);
        if let Some([g, a, d]) = e.static_residuals {
            push("ekf".into(), "gyro_norm", g);
            push("ekf".into(), "accel_norm", a);
            push("ekf".into(), "dot_product", d);
        }
    }
    rows
}

#[derive(Debug, Clone, Serialize)]
pub struct Percentiles {
    pub p50: f64,
    pub p95: f64,
    pub max: f64,
}

impl Percentiles {
    /// Nearest-rank percentiles of `|x|`; `None` for an empty slice.
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut v: Vec<f64> = values.iter().map(|x| x.abs()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let rank = |p: f64| v[((p * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1];
        Some(Self { p50: rank(0.5), p95: rank(0.95), max: v[v.len() - 1] })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloRun {
    pub index: usize,
    pub seed: u64,
    pub result: Result<EkfSummary, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloReport {
    pub schema_version: u32,
    pub name: String,
    pub runs: usize,
    pub base_seed: u64,
    pub failed: usize,
    /// Relative residuals of the terminal estimates against the last record.
    pub gyro_norm: Option<Percentiles>,
    pub accel_norm: Option<Percentiles>,
    pub dot_product: Option<Percentiles>,
    #[serde(skip)]
    pub per_run: Vec<MonteCarloRun>,
    #[serde(skip)]
    pub wall_time_s: f64,
}

/// Independent filter runs with seeds `base_seed + i`. Runs execute in
/// parallel; the report is assembled in index order.
pub fn monte_carlo(cfg: &ExperimentConfig) -> Result<MonteCarloReport, RunError> {
    let start = Instant::now();
    let mc = cfg.monte_carlo.ok_or_else(|| ConfigError::Validation("configuration has no monte_carlo table".into()))?;
    let exp = Experiment::new(cfg)?;
    let per_run: Vec<MonteCarloRun> = (0..mc.runs)
        .into_par_iter()
        .map(|index| {
            let seed = mc.base_seed.wrapping_add(index as u64);
            let result = exp.ekf(seed).map(|(s, _)| s).map_err(|e| e.to_string());
            MonteCarloRun { index, seed, result }
        })
        .collect();
    let residuals: Vec<[f64; 3]> =
        per_run.iter().filter_map(|r| r.result.as_ref().ok().and_then(|s| s.static_residuals)).collect();
    let column = |j: usize| Percentiles::of(&residuals.iter().map(|r| r[j]).collect::<Vec<_>>());
    Ok(MonteCarloReport {
        schema_version: SCHEMA_VERSION,
        name: cfg.name.clone(),
        runs: mc.runs,
        base_seed: mc.base_seed,
        failed: per_run.iter().filter(|r| r.result.is_err()).count(),
        gyro_norm: column(0),
        accel_norm: column(1),
        dot_product: column(2),
        per_run,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

// ---- export ----

fn create(path: &Path) -> Result<BufWriter<fs::File>, RunError> {
    let io_err = |source| RunError::Io { path: path.display().to_string(), source };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    fs::File::create(path).map(BufWriter::new).map_err(io_err)
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> Result<(), RunError> {
    let mut w = create(path)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|source| RunError::Io { path: path.display().to_string(), source })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    write_with(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
        writeln!(w)
    })
}

fn v3(v: &Vec3) -> String {
    format!("{:e},{:e},{:e}", v.x, v.y, v.z)
}

/// Writes `summary.json`, `observers.csv`, `residuals.csv` and
/// `ekf_history.csv` as configured; returns the paths written.
pub fn export_run(cfg: &ExperimentConfig, summary: &RunSummary, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let mut written = Vec::new();
    if cfg.wants(OutputFormat::Json) {
        let p = dir.join("summary.json");
        write_json(&p, summary)?;
        written.push(p);
    }
    if cfg.wants(OutputFormat::Csv) {
        let p = dir.join("residuals.csv");
        write_with(&p, |w| {
            writeln!(w, "source,quantity,value")?;
            for r in &summary.residuals {
                writeln!(w, "{},{},{:e}", r.source, r.quantity, r.value)?;
            }
            Ok(())
        })?;
        written.push(p);

        let p = dir.join("observers.csv");
        write_with(&p, |w| {
            writeln!(w, "observer,segment,pair,sign_a,sign_g,bgx_deg_h,bgy_deg_h,bgz_deg_h,bax_ug,bay_ug,baz_ug,roll_deg,yaw_deg,pitch_deg")?;
            for (name, reports) in [("ideal_ncr", &summary.ideal_ncr), ("ideal_nfvr", &summary.ideal_nfvr)] {
                for r in reports {
                    let pairs = r.report.candidates.feasible_pairs.iter();
                    for (i, (pair, sol)) in pairs.zip(&r.report.attitude_solutions).enumerate() {
                        let [a, b, c] = sol.euler_deg;
                        writeln!(
                            w,
                            "{name},{},{i},{},{},{},{},{a:e},{b:e},{c:e}",
                            r.segment,
                            pair.sign_a,
                            pair.sign_g,
                            v3(&sol.bg_deg_h),
                            v3(&sol.ba_ug)
                        )?;
                    }
                }
            }
            for (name, sol) in [("multi_axis", &summary.multi_axis), ("multiposition", &summary.multiposition)] {
                if let Some(s) = sol {
                    let [a, b, c] = s.euler_deg;
                    writeln!(w, "{name},,0,,,{},{},{a:e},{b:e},{c:e}", v3(&s.bg_deg_h), v3(&s.ba_ug))?;
                }
            }
            Ok(())
        })?;
        written.push(p);

        if let Some(run) = &summary.ekf_run {
            let p = dir.join("ekf_history.csv");
            write_with(&p, |w| write_history_csv(w, &run.history))?;
            written.push(p);
        }
    }
    Ok(written)
}

/// Writes `montecarlo.json` and `montecarlo_runs.csv` as configured.
pub fn export_monte_carlo(
    cfg: &ExperimentConfig,
    report: &MonteCarloReport,
    dir: &Path,
) -> Result<Vec<PathBuf>, RunError> {
    let mut written = Vec::new();
    if cfg.wants(OutputFormat::Json) {
        let p = dir.join("montecarlo.json");
        write_json(&p, report)?;
        written.push(p);
    }
    if cfg.wants(OutputFormat::Csv) {
        let p = dir.join("montecarlo_runs.csv");
        write_with(&p, |w| {
            writeln!(
                w,
                "run,seed,ok,bgx_deg_h,bgy_deg_h,bgz_deg_h,bax_ug,bay_ug,baz_ug,gyro_norm,accel_norm,dot_product,error"
            )?;
            for r in &report.per_run {
                match &r.result {
                    Ok(s) => {
                        let [g, a, d] = s.static_residuals.unwrap_or([f64::NAN; 3]);
                        writeln!(
                            w,
                            "{},{},1,{},{},{g:e},{a:e},{d:e},",
                            r.index,
                            r.seed,
                            v3(&s.final_bg_deg_h),
                            v3(&s.final_ba_ug)
                        )?;
                    }
                    Err(e) => writeln!(w, "{},{},0,,,,,,,,,,\"{}\"", r.index, r.seed, e.replace('"', "'"))?,
                }
            }
            Ok(())
        })?;
        written.push(p);
    }
    Ok(written)
}

/// Machine-readable error record for the command line.
pub fn error_record(err: &RunError) -> String {
    serde_json::json!({ "error": err.kind(), "exit_code": err.exit_code(), "message": err.to_string() }).to_string()
}
