//! Experiment configuration, orchestration and result files.

mod config;

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{
    CocycleSpec, ContinuitySection, Direction, ExperimentConfig, ExperimentKind, PotentialKind,
};

use crate::arithmetic::{diophantine_scan, k0_for_scale_with, DiophantineReport};
use crate::cocycle::{pointwise_profile, Cocycle, Frequency};
use crate::error::Error;
use crate::fourier::FourierSeries;
use crate::ldt::{
    additive_family, continuity_experiment, fmt_float, ldt_sweep, potential_family, write_ldt_csv,
    ContinuityRecord, LdtConfig,
};
use crate::sampling::{max_of, pairwise_mean};
use crate::scheme::{default_strip_samples, scheme_audit, SchemeAudit, SchemeParams, StripAudit};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(String),

    #[error("invalid config field `{field}`: {reason}")]
    Field { field: String, reason: String },

    #[error("cannot read {}: {reason}", path.display())]
    Io { path: PathBuf, reason: String },

    #[error("cannot build cocycle: {0}")]
    Cocycle(Error),
}

impl ConfigError {
    pub(crate) fn field(field: &str, reason: impl Into<String>) -> Self {
        Self::Field {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Numerical(#[from] Error),

    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: std::io::Error },
}

/// 3 for numerical failures, 2 for everything a user can fix in the input.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::NonFinite { .. }
        | Error::NotUnimodular { .. }
        | Error::NoFiniteConstant { .. }
        | Error::EmptySeries => 3,
        _ => 2,
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(ConfigError::Cocycle(e)) | Self::Numerical(e) => error_exit_code(e),
            Self::Config(_) | Self::Output { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputFile {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub experiment: ExperimentKind,
    pub config_hash: String,
    pub version: String,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<OutputFile>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// SHA-256 of the config as canonical JSON (sorted keys, output directory
/// excluded).
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(canonical_json(cfg).as_bytes()))
}

fn canonical_json(cfg: &ExperimentConfig) -> String {
    let value = serde_json::to_value(cfg).expect("config serializes");
    serde_json::to_string(&value).expect("JSON value serializes")
}

struct Writer {
    dir: PathBuf,
    outputs: Vec<OutputFile>,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|source| RunError::Output {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|source| RunError::Output { path, source })?;
        self.outputs.push(OutputFile {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).expect("results serialize");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Two-column plot data with an axis-naming header.
    fn plot(&mut self, name: &str, axes: (&str, &str), points: &[(f64, f64)]) -> Result<(), RunError> {
        let mut text = format!("{},{}\n", axes.0, axes.1);
        for (x, y) in points {
            text.push_str(&format!("{},{}\n", fmt_float(*x), fmt_float(*y)));
        }
        self.write(name, text.as_bytes())
    }
}

/// Finite-scale exponent statistics at one `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovRecord {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "mean_LN")]
    pub mean_ln: f64,
    #[serde(rename = "min_LN")]
    pub min_ln: f64,
    #[serde(rename = "max_LN")]
    pub max_ln: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeAuditRecord {
    pub params: SchemeParams,
    pub audit: SchemeAudit,
    pub strip: StripAudit,
}

/// Validates `cfg`, runs the experiment and writes all outputs plus the
/// manifest into `cfg.output_dir`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunManifest, RunError> {
    let started_at = chrono::Utc::now().to_rfc3339();
    cfg.validate()?;
    let a = cfg.build_cocycle()?;
    let omega = cfg.frequency()?;
    let mut out = Writer::new(&cfg.output_dir)?;
    out.write("config.json", format!("{}\n", canonical_json(cfg)).as_bytes())?;

    match cfg.experiment {
        ExperimentKind::Lyapunov => run_lyapunov(cfg, &a, &omega, &mut out)?,
        ExperimentKind::Diophantine => run_diophantine(cfg, &omega, &mut out)?,
        ExperimentKind::SchemeAudit => run_scheme_audit(cfg, &a, &omega, &mut out)?,
        ExperimentKind::LdtSweep => run_ldt(cfg, &a, &omega, &mut out)?,
        ExperimentKind::Continuity => run_continuity(cfg, &a, &omega, &mut out)?,
    }

    let manifest = RunManifest {
        experiment: cfg.experiment,
        config_hash: config_hash(cfg),
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        outputs: out.outputs.clone(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    let path = cfg.output_dir.join(MANIFEST_FILE);
    fs::write(&path, text).map_err(|source| RunError::Output { path, source })?;
    Ok(manifest)
}

fn run_lyapunov(
    cfg: &ExperimentConfig,
    a: &Cocycle,
    omega: &Frequency,
    out: &mut Writer,
) -> Result<(), RunError> {
    let points = cfg.sampler.points(a.dim())?;
    let mut records = Vec::with_capacity(cfg.n.len());
    for &n in &cfg.n {
        let profile = pointwise_profile(a, omega, n as usize, &points)?;
        records.push(LyapunovRecord {
            n,
            mean_ln: pairwise_mean(&profile),
            min_ln: -max_of(profile.iter().map(|v| -v)),
            max_ln: max_of(profile.iter().copied()),
            points: profile.len(),
        });
    }
    out.json("lyapunov.json", &records)?;
    let mut csv = String::from("N,mean_LN,min_LN,max_LN,points\n");
    for r in &records {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            fmt_float(r.mean_ln),
            fmt_float(r.min_ln),
            fmt_float(r.max_ln),
            r.points
        ));
    }
    out.write("lyapunov.csv", csv.as_bytes())?;
    let pts: Vec<_> = records.iter().map(|r| (r.n as f64, r.mean_ln)).collect();
    out.plot("plot_lyapunov.csv", ("N", "mean_LN"), &pts)
}

fn run_diophantine(cfg: &ExperimentConfig, omega: &Frequency, out: &mut Writer) -> Result<(), RunError> {
    let radii = match &cfg.k0 {
        Some(k0) => k0.clone(),
        None => cfg
            .n
            .iter()
            .map(|&n| k0_for_scale_with(n, cfg.b, cfg.k0_scale))
            .collect::<Result<_, _>>()?,
    };
    let reports: Vec<DiophantineReport> = radii
        .iter()
        .map(|&k0| diophantine_scan(omega, k0, Some(cfg.kappa), cfg.b))
        .collect::<Result<_, _>>()?;
    out.json("diophantine.json", &reports)?;
    let pts: Vec<_> = reports.iter().map(|r| (r.k0 as f64, r.kappa)).collect();
    out.plot("plot_diophantine.csv", ("K0", "kappa_tightest"), &pts)
}

fn run_scheme_audit(
    cfg: &ExperimentConfig,
    a: &Cocycle,
    omega: &Frequency,
    out: &mut Writer,
) -> Result<(), RunError> {
    let c = cfg.ldt_c()?;
    let samples = cfg.strip_samples.unwrap_or(default_strip_samples(a.dim()));
    let mut records = Vec::with_capacity(cfg.n.len());
    for &n in &cfg.n {
        let params = SchemeParams::for_cocycle(a, n, cfg.b, c, cfg.kappa, cfg.k0_scale)?;
        let (audit, strip) = scheme_audit(a, omega, &params, &cfg.sampler, samples)?;
        records.push(SchemeAuditRecord { params, audit, strip });
    }
    out.json("scheme_audit.json", &records)?;
    let tele: Vec<_> = records
        .iter()
        .map(|r| (r.params.n as f64, r.audit.telescope_lhs))
        .collect();
    out.plot("plot_telescope.csv", ("N", "telescope_lhs"), &tele)?;
    for r in &records {
        let mut pts: Vec<_> = r.strip.profile.iter().map(|p| (p.imag, p.u)).collect();
        pts.sort_by(|x, y| x.0.total_cmp(&y.0));
        out.plot(
            &format!("plot_strip_N{}.csv", r.params.n),
            ("imag_z", "u_m"),
            &pts,
        )?;
    }
    Ok(())
}

fn run_ldt(cfg: &ExperimentConfig, a: &Cocycle, omega: &Frequency, out: &mut Writer) -> Result<(), RunError> {
    let ldt = LdtConfig {
        b: cfg.b,
        c: cfg.ldt_c()?,
        kappa: cfg.kappa,
        sampler: cfg.sampler,
        strip_samples: cfg.strip_samples.unwrap_or(default_strip_samples(a.dim())),
        k0_scale: cfg.k0_scale,
    };
    let records = ldt_sweep(a, omega, &cfg.n, &ldt)?;
    let mut csv = Vec::new();
    write_ldt_csv(&mut csv, &records).map_err(|source| RunError::Output {
        path: cfg.output_dir.join("ldt.csv"),
        source,
    })?;
    out.write("ldt.csv", &csv)?;
    out.json("ldt.json", &records)?;
    let measure: Vec<_> = records
        .iter()
        .map(|r| (r.n as f64, r.empirical_measure))
        .collect();
    out.plot("plot_ldt_measure.csv", ("N", "empirical_measure"), &measure)?;
    let bound: Vec<_> = records
        .iter()
        .map(|r| (r.n as f64, r.theoretical_bound))
        .collect();
    out.plot("plot_ldt_bound.csv", ("N", "theoretical_bound"), &bound)
}

fn run_continuity(
    cfg: &ExperimentConfig,
    a: &Cocycle,
    omega: &Frequency,
    out: &mut Writer,
) -> Result<(), RunError> {
    let deltas = &cfg.continuity.deltas;
    let mut records: Vec<ContinuityRecord> = Vec::new();
    for &n in &cfg.n {
        let n = n as usize;
        let batch = match cfg.continuity.direction {
            Direction::Identity => {
                let d = a.dim();
                let one = FourierSeries::constant(d, Complex64::new(1.0, 0.0));
                let direction = [
                    [one.clone(), FourierSeries::zero(d)],
                    [FourierSeries::zero(d), one],
                ];
                let family = additive_family(a.clone(), direction)?;
                continuity_experiment(a, family, deltas, omega, n, &cfg.sampler)?
            }
            dir => {
                let v = cfg.potential()?.ok_or_else(|| {
                    ConfigError::field("continuity.direction", "needs a Schrödinger cocycle")
                })?;
                let w = match dir {
                    Direction::Potential => v.clone(),
                    _ => config::cosine(a.dim()),
                };
                let family = potential_family(v, w, cfg.energy(), a.s());
                continuity_experiment(a, family, deltas, omega, n, &cfg.sampler)?
            }
        };
        records.extend(batch);
    }
    out.json("continuity.json", &records)?;
    let mut csv = String::from("delta,distance,le_gap,N\n");
    for r in &records {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_float(r.delta),
            fmt_float(r.distance),
            fmt_float(r.le_gap),
            r.n
        ));
    }
    out.write("continuity.csv", csv.as_bytes())?;
    for &n in &cfg.n {
        let pts: Vec<_> = records
            .iter()
            .filter(|r| r.n == n)
            .map(|r| (r.delta, r.le_gap))
            .collect();
        out.plot(&format!("plot_continuity_N{n}.csv"), ("delta", "le_gap"), &pts)?;
    }
    Ok(())
}
