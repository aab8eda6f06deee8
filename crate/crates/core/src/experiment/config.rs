use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cocycle::{Cocycle, Frequency};
use crate::fourier::{FourierSeries, LatticeVector, MAX_DIM};
use crate::ldt::default_c;
use crate::linalg::Mat2;
use crate::sampling::SamplerSpec;

use super::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Lyapunov,
    Diophantine,
    SchemeAudit,
    LdtSweep,
    Continuity,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Lyapunov => "lyapunov",
            Self::Diophantine => "diophantine",
            Self::SchemeAudit => "scheme-audit",
            Self::LdtSweep => "ldt-sweep",
            Self::Continuity => "continuity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Zero,
    /// `2λ Σ_i cos(2π x_i)`.
    Cosine,
    /// Random-phase potential with `|v̂(k)| = λ exp(-C^{-1/s} |k|^{1/s})`.
    Gevrey,
}

fn default_dim() -> usize {
    1
}

fn default_coupling() -> f64 {
    3.0
}

fn default_decay() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CocycleSpec {
    Schrodinger {
        potential: PotentialKind,
        #[serde(default = "default_coupling")]
        coupling: f64,
        #[serde(default = "default_decay")]
        decay: f64,
        #[serde(default)]
        energy: f64,
        #[serde(default)]
        energy_im: f64,
        #[serde(default = "default_dim")]
        dim: usize,
    },
    /// Real constant matrix `[[a, b], [c, d]]`.
    Constant {
        matrix: [[f64; 2]; 2],
        #[serde(default = "default_dim")]
        dim: usize,
    },
    /// JSON cocycle file (`s`, `a11`, …, `a22`).
    File { path: PathBuf },
}

impl Default for CocycleSpec {
    fn default() -> Self {
        Self::Schrodinger {
            potential: PotentialKind::Gevrey,
            coupling: default_coupling(),
            decay: default_decay(),
            energy: 0.0,
            energy_im: 0.0,
            dim: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// The potential itself (a coupling perturbation).
    Potential,
    /// `2 Σ cos(2π x_i)` added to the potential.
    Cosine,
    /// `A + δ I`, renormalized to unit determinant.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuitySection {
    pub deltas: Vec<f64>,
    pub direction: Direction,
}

impl Default for ContinuitySection {
    fn default() -> Self {
        Self {
            deltas: vec![1e-1, 1e-2, 1e-3, 1e-4],
            direction: Direction::Potential,
        }
    }
}

fn default_b() -> f64 {
    1.0
}

fn default_kappa() -> f64 {
    0.3
}

fn default_n() -> Vec<u64> {
    vec![64, 128, 256, 512]
}

fn default_sampler() -> SamplerSpec {
    SamplerSpec::grid(4096)
}

fn default_seed() -> u64 {
    1
}

fn default_k0_scale() -> f64 {
    1.0
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("gevrey-lab-out")
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub cocycle: CocycleSpec,
    /// Frequency vector; golden mean when absent (`d = 1`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<f64>>,
    /// Gevrey exponent. Defaults to the file's value, otherwise 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default = "default_b")]
    pub b: f64,
    /// LDT exponent, default 1 for `d = 1` and 1/2 otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_n")]
    pub n: Vec<u64>,
    /// Explicit scan radii for `diophantine`; derived from `n` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<Vec<u64>>,
    #[serde(default = "default_k0_scale")]
    pub k0_scale: f64,
    #[serde(default = "default_sampler")]
    pub sampler: SamplerSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strip_samples: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Where results go; not part of the experiment's identity, so it is
    /// left out of the serialized (and hashed) config.
    #[serde(default = "default_output_dir", skip_serializing)]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub continuity: ContinuitySection,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            cocycle: CocycleSpec::default(),
            omega: None,
            s: None,
            b: default_b(),
            c: None,
            kappa: default_kappa(),
            n: default_n(),
            k0: None,
            k0_scale: default_k0_scale(),
            sampler: default_sampler(),
            strip_samples: None,
            seed: default_seed(),
            output_dir: default_output_dir(),
            continuity: ContinuitySection::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Reads a config file; a relative cocycle file path is taken relative
    /// to the config's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let mut cfg = Self::from_toml(&text)?;
        if let CocycleSpec::File { path: p } = &mut cfg.cocycle {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn dim(&self) -> Result<usize, ConfigError> {
        match &self.cocycle {
            CocycleSpec::Schrodinger { dim, .. } | CocycleSpec::Constant { dim, .. } => Ok(*dim),
            CocycleSpec::File { .. } => Ok(self.build_cocycle()?.dim()),
        }
    }

    /// Field-level checks; the first failure is reported.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |field: &str, reason: String| Err(ConfigError::field(field, reason));
        if let Some(s) = self.s {
            if !(s >= 1.0) || !s.is_finite() {
                return bad(
                    "s",
                    format!("Gevrey exponent must be a finite number >= 1, got {s}"),
                );
            }
        }
        if !(self.b > 0.0) || !self.b.is_finite() {
            return bad("b", format!("must be > 0, got {}", self.b));
        }
        if let Some(c) = self.c {
            if !(c > 0.0 && c <= 1.0) {
                return bad("c", format!("must lie in (0, 1], got {c}"));
            }
        }
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return bad("kappa", format!("must be > 0, got {}", self.kappa));
        }
        if !(self.k0_scale > 0.0) || !self.k0_scale.is_finite() {
            return bad("k0_scale", format!("must be > 0, got {}", self.k0_scale));
        }
        if self.n.is_empty() {
            return bad("n", "at least one scale is required".into());
        }
        if self.n.contains(&0) {
            return bad("n", "scales must be >= 1".into());
        }
        if let Some(k0) = &self.k0 {
            if k0.is_empty() || k0.contains(&0) {
                return bad("k0", "scan radii must be a nonempty list of integers >= 1".into());
            }
        }
        if self.strip_samples == Some(0) {
            return bad("strip_samples", "must be >= 1".into());
        }
        match &self.cocycle {
            CocycleSpec::Schrodinger {
                coupling,
                decay,
                energy,
                energy_im,
                dim,
                potential,
            } => {
                if *dim == 0 || *dim > MAX_DIM {
                    return bad("cocycle.dim", format!("must lie in 1..={MAX_DIM}, got {dim}"));
                }
                if !coupling.is_finite() || (*potential == PotentialKind::Gevrey && !(*coupling > 0.0)) {
                    return bad(
                        "cocycle.coupling",
                        format!("must be finite (and > 0 for a Gevrey potential), got {coupling}"),
                    );
                }
                if !(*decay > 0.0) || !decay.is_finite() {
                    return bad("cocycle.decay", format!("must be > 0, got {decay}"));
                }
                if !energy.is_finite() || !energy_im.is_finite() {
                    return bad("cocycle.energy", "must be finite".into());
                }
            }
            CocycleSpec::Constant { matrix, dim } => {
                if *dim == 0 || *dim > MAX_DIM {
                    return bad("cocycle.dim", format!("must lie in 1..={MAX_DIM}, got {dim}"));
                }
                if matrix.iter().flatten().any(|v| !v.is_finite()) {
                    return bad("cocycle.matrix", "entries must be finite".into());
                }
            }
            CocycleSpec::File { path } => {
                if !path.is_file() {
                    return bad("cocycle.path", format!("file not found: {}", path.display()));
                }
            }
        }
        let d = self.dim()?;
        if let Some(w) = &self.omega {
            if w.len() != d {
                return bad("omega", format!("expected {d} components, got {}", w.len()));
            }
            if w.iter().any(|v| !v.is_finite()) {
                return bad("omega", "components must be finite".into());
            }
        } else if d != 1 {
            return bad("omega", format!("required for a cocycle on T^{d}"));
        }
        if let Err(e) = self.sampler.point_count(d) {
            return bad("sampler.resolution", e.to_string());
        }
        if self.experiment == ExperimentKind::Continuity {
            let cont = &self.continuity;
            if cont.deltas.is_empty() || cont.deltas.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                return bad(
                    "continuity.deltas",
                    "must be a nonempty list of finite values >= 0".into(),
                );
            }
            let schrodinger = matches!(self.cocycle, CocycleSpec::Schrodinger { .. });
            if cont.direction != Direction::Identity && !schrodinger {
                return bad(
                    "continuity.direction",
                    "potential directions need a Schrödinger cocycle".into(),
                );
            }
        }
        Ok(())
    }

    pub fn frequency(&self) -> Result<Frequency, ConfigError> {
        match &self.omega {
            Some(w) => Frequency::new(w.clone()).map_err(|e| ConfigError::field("omega", e.to_string())),
            None => Ok(Frequency::golden()),
        }
    }

    /// Resolved LDT exponent.
    pub fn ldt_c(&self) -> Result<f64, ConfigError> {
        Ok(self.c.unwrap_or(default_c(self.dim()?)))
    }

    pub(crate) fn exponent(&self) -> f64 {
        self.s.unwrap_or(1.0)
    }

    /// Potential of a Schrödinger builder, `None` otherwise.
    pub fn potential(&self) -> Result<Option<FourierSeries>, ConfigError> {
        let CocycleSpec::Schrodinger {
            potential,
            coupling,
            decay,
            dim,
            ..
        } = &self.cocycle
        else {
            return Ok(None);
        };
        let v = match potential {
            PotentialKind::Zero => FourierSeries::zero(*dim),
            PotentialKind::Cosine => cosine(*dim).scale(Complex64::new(*coupling, 0.0)),
            PotentialKind::Gevrey => {
                FourierSeries::gevrey_random_phase(*dim, self.exponent(), *decay, *coupling, self.seed)
                    .map_err(|e| ConfigError::field("cocycle", e.to_string()))?
            }
        };
        Ok(Some(v))
    }

    pub fn energy(&self) -> Complex64 {
        match &self.cocycle {
            CocycleSpec::Schrodinger {
                energy, energy_im, ..
            } => Complex64::new(*energy, *energy_im),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn build_cocycle(&self) -> Result<Cocycle, ConfigError> {
        let wrap = |e: crate::Error| ConfigError::Cocycle(e);
        match &self.cocycle {
            CocycleSpec::Schrodinger { .. } => {
                let v = self.potential()?.expect("Schrödinger builder has a potential");
                Cocycle::schrodinger(&v, self.energy())
                    .and_then(|a| a.with_exponent(self.exponent()))
                    .map_err(wrap)
            }
            CocycleSpec::Constant { matrix, dim } => {
                let [[a, b], [c, d]] = *matrix;
                Cocycle::constant(Mat2::from_real(a, b, c, d), *dim)
                    .and_then(|a| a.with_exponent(self.exponent()))
                    .map_err(wrap)
            }
            CocycleSpec::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
                    path: path.clone(),
                    reason: e.to_string(),
                })?;
                let a = Cocycle::from_json(&text).map_err(|e| match e {
                    crate::Error::InvalidParameter { reason, .. } => {
                        ConfigError::field("cocycle.path", format!("{}: {reason}", path.display()))
                    }
                    other => ConfigError::Cocycle(other),
                })?;
                match self.s {
                    Some(s) => a.with_exponent(s).map_err(wrap),
                    None => Ok(a),
                }
            }
        }
    }
}

/// `2 Σ_i cos(2π x_i)`.
pub(crate) fn cosine(d: usize) -> FourierSeries {
    let mut terms = Vec::with_capacity(2 * d);
    for i in 0..d {
        for sign in [1, -1] {
            let mut k = vec![0i64; d];
            k[i] = sign;
            terms.push((LatticeVector::new(k), Complex64::new(1.0, 0.0)));
        }
    }
    FourierSeries::from_terms(d, terms).expect("unit cosine terms are valid")
}
