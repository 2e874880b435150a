//! CSV and PGM output formats.

use std::fmt::Write as _;

use crate::error::Result;
use crate::fem::Mesh;
use crate::pgm::GrayscaleImage;

pub const FIELD_HEADER: &str = "x,y,value";
pub const BENCH_HEADER: &str =
    "h,dt,fem_time_s,rom_time_s,gain,fem_ite,rom_ite,fem_rel_err,rom_rel_err";
pub const RESIDUAL_HEADER: &str = "iteration,p_norm_m,r_norm_m";

/// Every mesh node with its value, boundary nodes included as zeros.
pub fn field_csv(mesh: &Mesh, interior: &[f64]) -> Result<String> {
    let full = mesh.full_field(interior)?;
    let mut out = String::with_capacity(full.len() * 32);
    out.push_str(FIELD_HEADER);
    out.push('\n');
    for (&(x, y), v) in mesh.node_coords().iter().zip(&full) {
        writeln!(out, "{x},{y},{v}").unwrap();
    }
    Ok(out)
}

/// Linear heatmap over the full node grid, `min → 0` and `max → 255`.
///
/// The image is `(nx+1) × (ny+1)` pixels, one per node, so rasterizing it back
/// onto the same mesh reads each node's own pixel. A constant field maps to
/// all zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub image: GrayscaleImage,
    pub min: f64,
    pub max: f64,
}

pub fn heatmap(mesh: &Mesh, interior: &[f64]) -> Result<Heatmap> {
    let full = mesh.full_field(interior)?;
    let min = full.iter().copied().fold(f64::INFINITY, f64::min);
    let max = full.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (w, h) = (mesh.nx() + 1, mesh.ny() + 1);
    let span = max - min;
    let mut pixels = vec![0u8; w * h];
    for row in 0..h {
        let j = mesh.ny() - row;
        for col in 0..w {
            let v = full[j * w + col];
            pixels[row * w + col] = if span > 0.0 {
                ((v - min) / span * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            };
        }
    }
    Ok(Heatmap {
        image: GrayscaleImage::new(w, h, pixels)?,
        min,
        max,
    })
}

pub fn residual_csv(p_norms: &[f64], r_norms: &[f64]) -> String {
    let mut out = String::from(RESIDUAL_HEADER);
    out.push('\n');
    for (k, (p, r)) in p_norms.iter().zip(r_norms).enumerate() {
        writeln!(out, "{k},{p},{r}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_mesh;

    #[test]
    fn field_csv_has_header_and_every_node() {
        let mesh = build_mesh(1.0, 1.0, 0.5).unwrap();
        let csv = field_csv(&mesh, &[2.5]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,y,value");
        assert_eq!(lines.len(), 10);
        assert!(lines.contains(&"0.5,0.5,2.5"));
        assert_eq!(lines[1], "0,0,0");
    }

    #[test]
    fn heatmap_peak_at_centre() {
        let mesh = build_mesh(1.0, 1.0, 0.25).unwrap();
        let vals: Vec<f64> = mesh
            .dof_coords_iter()
            .map(|(x, y)| (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin())
            .collect();
        let hm = heatmap(&mesh, &vals).unwrap();
        assert_eq!(hm.image.get(2, 2), 255);
        assert_eq!(hm.image.get(0, 0), 0);
        assert_eq!(hm.max, 1.0);
    }

    #[test]
    fn constant_field_is_black() {
        let mesh = build_mesh(1.0, 1.0, 0.25).unwrap();
        let hm = heatmap(&mesh, &vec![0.0; mesh.n_dofs()]).unwrap();
        assert!(hm.image.pixels().iter().all(|&p| p == 0));
    }
}
