use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sources::SourceSpec;
use crate::{inverse, rom};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Fem,
    Rom,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Fem => "fem",
            Engine::Rom => "rom",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fem" => Ok(Engine::Fem),
            "rom" => Ok(Engine::Rom),
            other => Err(Error::Config(format!("unknown engine `{other}` (expected fem or rom)"))),
        }
    }
}

/// Every parameter of a forward, inversion or benchmark run.
///
/// Read from a flat JSON document whose keys are the field names; anything
/// omitted takes the default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lx: f64,
    pub ly: f64,
    pub h: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub engine: Engine,
    pub ell: usize,
    pub rom_tol: f64,
    pub lambda_n: f64,
    pub cg_tol: f64,
    pub max_iter: usize,
    pub sigma: f64,
    pub seed: u64,
    pub source: SourceSpec,
    pub initial_guess: SourceSpec,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lx: 1.0,
            ly: 1.0,
            h: 1.0 / 256.0,
            dt: 1.0 / 256.0,
            t_final: 1.0,
            engine: Engine::Rom,
            ell: rom::DEFAULT_ELL,
            rom_tol: rom::DEFAULT_TOL,
            lambda_n: inverse::DEFAULT_LAMBDA,
            cg_tol: inverse::DEFAULT_CG_TOL,
            max_iter: inverse::DEFAULT_MAX_ITER,
            sigma: 1e-3,
            seed: 20240601,
            source: SourceSpec::analytic("sin_2pi_x_sin_pi_y"),
            initial_guess: SourceSpec::analytic("sin_pi_x_sin_pi_y"),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file; relative image paths are resolved against the
    /// file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(dir) = path.parent() {
            for spec in [&mut cfg.source, &mut cfg.initial_guess] {
                if let SourceSpec::Image { path: img, .. } = spec {
                    if img.is_relative() {
                        *img = dir.join(&*img);
                    }
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lx", self.lx),
            ("ly", self.ly),
            ("h", self.h),
            ("dt", self.dt),
            ("T", self.t_final),
            ("rom_tol", self.rom_tol),
            ("lambda_n", self.lambda_n),
            ("cg_tol", self.cg_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("field `{name}` must be positive, got {v}")));
            }
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::Config(format!("field `sigma` must be non-negative, got {}", self.sigma)));
        }
        if self.ell == 0 {
            return Err(Error::Config("field `ell` must be at least 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("field `max_iter` must be at least 1".into()));
        }
        Ok(())
    }
}
