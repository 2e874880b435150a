//! End-to-end runs: forward simulation, inversion, and the FEM-versus-ROM
//! benchmark. Each run returns its results in memory; `write_to` persists them.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::artifacts::{field_csv, heatmap, residual_csv, BENCH_HEADER};
use crate::config::{Engine, RunConfig};
use crate::error::Result;
use crate::fem::{assemble, build_mesh, FemSystem, Mesh, NodalFunction};
use crate::forward::{FemForward, ForwardOperator, TimeGrid};
use crate::inverse::{cg_reconstruct, InverseConfig, ReconstructionReport};
use crate::measure::{empirical_norm, simulate_measurements, MeasurementSet};
use crate::rom::{rom_forward_solve_with_stats, RomForward};

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ForwardSummary {
    pub engine: Engine,
    pub n_dofs: usize,
    pub n_steps: usize,
    pub rom_rank: Option<usize>,
    pub krylov_vectors: Option<usize>,
    pub heatmap_min: f64,
    pub heatmap_max: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ForwardTimings {
    pub assembly_s: f64,
    pub solve_s: f64,
}

#[derive(Debug)]
pub struct ForwardRun {
    pub config: RunConfig,
    pub mesh: Mesh,
    pub u_t: NodalFunction,
    pub summary: ForwardSummary,
    pub timings: ForwardTimings,
}

pub fn run_forward(cfg: &RunConfig) -> Result<ForwardRun> {
    cfg.validate()?;
    let t0 = Instant::now();
    let mesh = build_mesh(cfg.lx, cfg.ly, cfg.h)?;
    let sys = assemble(&mesh)?;
    let grid = TimeGrid::new(cfg.t_final, cfg.dt)?;
    let assembly_s = t0.elapsed().as_secs_f64();

    let source = cfg.source.evaluate(&mesh)?;
    let t1 = Instant::now();
    let (u_t, rank, krylov) = match cfg.engine {
        Engine::Fem => (FemForward::new(&sys, grid)?.solve(&source)?, None, None),
        Engine::Rom if source.values().iter().all(|&v| v == 0.0) => {
            (NodalFunction::zeros(sys.n_dofs()), Some(0), Some(0))
        }
        Engine::Rom => {
            let (u, stats) = rom_forward_solve_with_stats(&sys, &source, grid, cfg.ell, cfg.rom_tol)?;
            (u, Some(stats.rank), Some(stats.krylov_vectors))
        }
    };
    let solve_s = t1.elapsed().as_secs_f64();
    let hm = heatmap(&mesh, u_t.values())?;

    Ok(ForwardRun {
        config: cfg.clone(),
        summary: ForwardSummary {
            engine: cfg.engine,
            n_dofs: sys.n_dofs(),
            n_steps: grid.n_steps(),
            rom_rank: rank,
            krylov_vectors: krylov,
            heatmap_min: hm.min,
            heatmap_max: hm.max,
        },
        mesh,
        u_t,
        timings: ForwardTimings { assembly_s, solve_s },
    })
}

impl ForwardRun {
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("field.csv"), field_csv(&self.mesh, self.u_t.values())?)?;
        fs::write(dir.join("field.pgm"), heatmap(&self.mesh, self.u_t.values())?.image.to_p5())?;
        fs::write(dir.join("summary.json"), to_json(&self.summary))?;
        fs::write(dir.join("timings.json"), to_json(&self.timings))?;
        fs::write(dir.join("config.json"), self.config.to_json())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct InvertMetrics {
    pub engine: Engine,
    pub n_dofs: usize,
    pub n_steps: usize,
    pub iterations: usize,
    pub converged: bool,
    pub forward_solve_count: usize,
    pub relative_error_m: f64,
    pub data_misfit_n: f64,
    pub sigma: f64,
    pub realized_noise_level: f64,
    pub support_jaccard: f64,
    pub final_p_norm_m: f64,
    pub heatmap_min: f64,
    pub heatmap_max: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct InvertTimings {
    pub assembly_s: f64,
    pub data_generation_s: f64,
    pub reconstruction_s: f64,
}

#[derive(Debug)]
pub struct InvertRun {
    pub config: RunConfig,
    pub mesh: Mesh,
    pub truth: NodalFunction,
    pub observation: MeasurementSet,
    pub report: ReconstructionReport,
    pub metrics: InvertMetrics,
    pub timings: InvertTimings,
}

/// Shared state for inversions on one mesh: assembled system, true source,
/// and simulated data.
pub struct InversionSetup {
    pub sys: FemSystem,
    pub grid: TimeGrid,
    pub truth: NodalFunction,
    pub clean: NodalFunction,
    pub observation: MeasurementSet,
    pub f0: NodalFunction,
    pub assembly_s: f64,
    pub data_generation_s: f64,
}

impl InversionSetup {
    /// Data always comes from the full-order model.
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let t0 = Instant::now();
        let mesh = build_mesh(cfg.lx, cfg.ly, cfg.h)?;
        let sys = assemble(&mesh)?;
        let grid = TimeGrid::new(cfg.t_final, cfg.dt)?;
        let assembly_s = t0.elapsed().as_secs_f64();

        let truth = cfg.source.evaluate(&mesh)?;
        let f0 = cfg.initial_guess.evaluate(&mesh)?;
        let t1 = Instant::now();
        let clean = FemForward::new(&sys, grid)?.solve(&truth)?;
        let observation = simulate_measurements(&clean, cfg.sigma, cfg.seed)?;
        let data_generation_s = t1.elapsed().as_secs_f64();

        Ok(Self {
            sys,
            grid,
            truth,
            clean,
            observation,
            f0,
            assembly_s,
            data_generation_s,
        })
    }

    /// Runs CG with the chosen engine; the returned time covers building the
    /// engine's operator and the whole CG loop.
    pub fn reconstruct(&self, cfg: &RunConfig, engine: Engine) -> Result<(ReconstructionReport, f64)> {
        let inv = InverseConfig {
            lambda_n: cfg.lambda_n,
            cg_tol: cfg.cg_tol,
            max_iter: cfg.max_iter,
            f0: self.f0.clone(),
        };
        let t = Instant::now();
        let report = match engine {
            Engine::Fem => {
                let op = FemForward::new(&self.sys, self.grid)?;
                cg_reconstruct(&op, &self.observation.values, &inv, &self.sys)?
            }
            Engine::Rom => {
                let op = RomForward::new(&self.sys, self.grid, cfg.ell, cfg.rom_tol)?;
                cg_reconstruct(&op, &self.observation.values, &inv, &self.sys)?
            }
        };
        Ok((report, t.elapsed().as_secs_f64()))
    }

    pub fn relative_error(&self, f: &[f64]) -> Result<f64> {
        let diff: Vec<f64> = f.iter().zip(self.truth.values()).map(|(a, b)| a - b).collect();
        Ok(self.sys.m_norm(&diff)? / self.sys.m_norm(self.truth.values())?)
    }

    /// `‖S f − m‖_n` evaluated with the full-order operator.
    pub fn data_misfit(&self, f: &[f64]) -> Result<f64> {
        let sf = FemForward::new(&self.sys, self.grid)?.apply(f)?;
        let diff: Vec<f64> = sf.iter().zip(&self.observation.values).map(|(a, b)| a - b).collect();
        empirical_norm(&diff)
    }
}

/// Jaccard index of `{truth ≥ level}` and `{rec ≥ level}`; 1 when both are empty.
pub fn support_jaccard(truth: &[f64], rec: &[f64], level: f64) -> f64 {
    let (mut inter, mut union) = (0usize, 0usize);
    for (&t, &r) in truth.iter().zip(rec) {
        let (a, b) = (t >= level, r >= level);
        inter += (a && b) as usize;
        union += (a || b) as usize;
    }
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

pub fn run_invert(cfg: &RunConfig) -> Result<InvertRun> {
    let setup = InversionSetup::new(cfg)?;
    let (report, reconstruction_s) = setup.reconstruct(cfg, cfg.engine)?;
    let mesh = setup.sys.mesh().clone();
    let f = report.f_rec.values();
    let hm = heatmap(&mesh, f)?;
    let metrics = InvertMetrics {
        engine: cfg.engine,
        n_dofs: setup.sys.n_dofs(),
        n_steps: setup.grid.n_steps(),
        iterations: report.iterations,
        converged: report.converged,
        forward_solve_count: report.forward_solve_count,
        relative_error_m: setup.relative_error(f)?,
        data_misfit_n: setup.data_misfit(f)?,
        sigma: cfg.sigma,
        realized_noise_level: setup.observation.relative_noise_level(setup.clean.values())?,
        support_jaccard: support_jaccard(setup.truth.values(), f, 0.5),
        final_p_norm_m: *report.residual_history.last().unwrap(),
        heatmap_min: hm.min,
        heatmap_max: hm.max,
    };
    Ok(InvertRun {
        config: cfg.clone(),
        mesh,
        truth: setup.truth,
        observation: setup.observation,
        report,
        metrics,
        timings: InvertTimings {
            assembly_s: setup.assembly_s,
            data_generation_s: setup.data_generation_s,
            reconstruction_s,
        },
    })
}

impl InvertRun {
    pub fn reconstruction_csv(&self) -> Result<String> {
        field_csv(&self.mesh, self.report.f_rec.values())
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let f = self.report.f_rec.values();
        fs::write(dir.join("reconstruction.csv"), self.reconstruction_csv()?)?;
        fs::write(dir.join("reconstruction.pgm"), heatmap(&self.mesh, f)?.image.to_p5())?;
        fs::write(dir.join("truth.pgm"), heatmap(&self.mesh, self.truth.values())?.image.to_p5())?;
        fs::write(
            dir.join("observation.pgm"),
            heatmap(&self.mesh, &self.observation.values)?.image.to_p5(),
        )?;
        fs::write(
            dir.join("residuals.csv"),
            residual_csv(&self.report.residual_history, &self.report.gradient_history),
        )?;
        fs::write(dir.join("metrics.json"), to_json(&self.metrics))?;
        fs::write(dir.join("timings.json"), to_json(&self.timings))?;
        fs::write(dir.join("config.json"), self.config.to_json())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BenchRow {
    pub h: f64,
    pub dt: f64,
    pub fem_time_s: f64,
    pub rom_time_s: f64,
    pub gain: f64,
    pub fem_iterations: usize,
    pub rom_iterations: usize,
    pub fem_rel_error: f64,
    pub rom_rel_error: f64,
}

impl BenchRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.h,
            self.dt,
            self.fem_time_s,
            self.rom_time_s,
            self.gain,
            self.fem_iterations,
            self.rom_iterations,
            self.fem_rel_error,
            self.rom_rel_error
        )
    }
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BENCH_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

/// One benchmark row: both pipelines on the same noisy data at `h = dt`,
/// reconstruction times averaged over `repeat` runs.
pub fn bench_row(base: &RunConfig, h: f64, repeat: usize) -> Result<BenchRow> {
    let cfg = RunConfig {
        h,
        dt: h,
        ..base.clone()
    };
    let setup = InversionSetup::new(&cfg)?;
    let repeat = repeat.max(1);
    let (mut fem_time, mut rom_time) = (0.0, 0.0);
    let mut fem_report = None;
    let mut rom_report = None;
    for _ in 0..repeat {
        let (rep, t) = setup.reconstruct(&cfg, Engine::Fem)?;
        fem_time += t;
        fem_report = Some(rep);
        let (rep, t) = setup.reconstruct(&cfg, Engine::Rom)?;
        rom_time += t;
        rom_report = Some(rep);
    }
    let (fem, rom) = (fem_report.unwrap(), rom_report.unwrap());
    let fem_time_s = fem_time / repeat as f64;
    let rom_time_s = rom_time / repeat as f64;
    Ok(BenchRow {
        h,
        dt: h,
        fem_time_s,
        rom_time_s,
        gain: fem_time_s / rom_time_s,
        fem_iterations: fem.iterations,
        rom_iterations: rom.iterations,
        fem_rel_error: setup.relative_error(fem.f_rec.values())?,
        rom_rel_error: setup.relative_error(rom.f_rec.values())?,
    })
}

pub fn run_bench(base: &RunConfig, mesh_sizes: &[f64], repeat: usize, parallel: bool) -> Result<Vec<BenchRow>> {
    if mesh_sizes.is_empty() {
        return Err(crate::Error::InvalidParameter("bench needs at least one mesh size".into()));
    }
    if !parallel {
        return mesh_sizes.iter().map(|&h| bench_row(base, h, repeat)).collect();
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = mesh_sizes
            .iter()
            .map(|&h| s.spawn(move || bench_row(base, h, repeat)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("bench thread panicked"))
            .collect()
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}
