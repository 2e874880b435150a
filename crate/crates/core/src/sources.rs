//! True sources and initial guesses: analytic trigonometric profiles and
//! indicator functions rasterized from grayscale bitmaps.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{Mesh, NodalFunction};
use crate::pgm::{load_pgm, GrayscaleImage};

pub const DEFAULT_THRESHOLD: u8 = 128;

/// Registered analytic source names.
pub const ANALYTIC_SOURCES: &[&str] = &[
    "sin_pi_x_sin_pi_y",
    "sin_2pi_x_sin_pi_y",
    "sin_mode",
    "constant",
    "zero",
];

/// Where a source comes from: `{"type": "analytic", "name": ...}` or
/// `{"type": "image", "path": ..., "threshold": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    Analytic {
        name: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        params: Vec<f64>,
        #[serde(default, skip_serializing_if = "String::is_empty")]
        description: String,
    },
    Image {
        path: PathBuf,
        #[serde(default = "default_threshold")]
        threshold: u8,
        #[serde(default, skip_serializing_if = "String::is_empty")]
        description: String,
    },
}

fn default_threshold() -> u8 {
    DEFAULT_THRESHOLD
}

impl SourceSpec {
    pub fn analytic(name: &str) -> Self {
        SourceSpec::Analytic {
            name: name.to_string(),
            params: Vec::new(),
            description: String::new(),
        }
    }

    pub fn image(path: impl Into<PathBuf>, threshold: u8) -> Self {
        SourceSpec::Image {
            path: path.into(),
            threshold,
            description: String::new(),
        }
    }

    pub fn description(&self) -> &str {
        match self {
            SourceSpec::Analytic { description, .. } | SourceSpec::Image { description, .. } => description,
        }
    }

    pub fn evaluate(&self, mesh: &Mesh) -> Result<NodalFunction> {
        match self {
            SourceSpec::Analytic { name, params, .. } => analytic_source_with(name, params, mesh),
            SourceSpec::Image { path, threshold, .. } => {
                let img = load_pgm(path)?;
                Ok(rasterize_image_source(&img, mesh, *threshold))
            }
        }
    }
}

/// Pointwise analytic profile by name.
pub fn analytic_fn(name: &str, params: &[f64], lx: f64, ly: f64) -> Result<Box<dyn Fn(f64, f64) -> f64>> {
    let param = |k: usize| {
        params
            .get(k)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("source `{name}` needs {} parameter(s)", k + 1)))
    };
    Ok(match name {
        "sin_pi_x_sin_pi_y" => Box::new(|x, y| (PI * x).sin() * (PI * y).sin()),
        "sin_2pi_x_sin_pi_y" => Box::new(|x, y| (2.0 * PI * x).sin() * (PI * y).sin()),
        "sin_mode" => {
            let (kx, ky) = (param(0)?, param(1)?);
            Box::new(move |x, y| (kx * PI * x / lx).sin() * (ky * PI * y / ly).sin())
        }
        "constant" => {
            let c = param(0)?;
            Box::new(move |_, _| c)
        }
        "zero" => Box::new(|_, _| 0.0),
        other => return Err(Error::UnknownSource(other.to_string())),
    })
}

pub fn analytic_source_with(name: &str, params: &[f64], mesh: &Mesh) -> Result<NodalFunction> {
    let f = analytic_fn(name, params, mesh.lx(), mesh.ly())?;
    Ok(NodalFunction::interpolate(mesh, f))
}

pub fn analytic_source(name: &str, mesh: &Mesh) -> Result<NodalFunction> {
    analytic_source_with(name, &[], mesh)
}

/// Pixel `(row, col)` sampled for the point `(x, y)`; row 0 is the top of the domain.
pub fn pixel_for(x: f64, y: f64, lx: f64, ly: f64, width: usize, height: usize) -> (usize, usize) {
    let col = ((x / lx) * width as f64).floor().max(0.0) as usize;
    let row = ((1.0 - y / ly) * height as f64).floor().max(0.0) as usize;
    (row.min(height - 1), col.min(width - 1))
}

/// Indicator of dark pixels (`intensity < threshold`) sampled at the
/// interior nodes by nearest pixel.
pub fn rasterize_image_source(image: &GrayscaleImage, mesh: &Mesh, threshold: u8) -> NodalFunction {
    NodalFunction::new(
        mesh.dof_coords_iter()
            .map(|(x, y)| {
                let (row, col) = pixel_for(x, y, mesh.lx(), mesh.ly(), image.width(), image.height());
                if image.get(row, col) < threshold {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
    )
}
