//! Closed-form reference values. Nothing here touches the numerical modules.

use std::f64::consts::PI;

/// Final-time amplitude of `u` for the source `sin(kx π x/lx) sin(ky π y/ly)`:
/// `(1 − e^{−μT})/μ` with `μ = π²((kx/lx)² + (ky/ly)²)`.
pub fn spectral_forward(kx: u32, ky: u32, lx: f64, ly: f64, t_final: f64) -> f64 {
    let mu = eigenvalue(kx, ky, lx, ly);
    -(-mu * t_final).exp_m1() / mu
}

/// Dirichlet Laplacian eigenvalue of the mode `(kx, ky)` on `[0,lx]×[0,ly]`.
pub fn eigenvalue(kx: u32, ky: u32, lx: f64, ly: f64) -> f64 {
    let a = kx as f64 / lx;
    let b = ky as f64 / ly;
    PI * PI * (a * a + b * b)
}

/// Recovered modal amplitude `s² / (s² + λ)` of Tikhonov-regularized least
/// squares on noiseless data for a unit true amplitude.
pub fn spectral_tikhonov_filter(modal_amplitude_s: f64, lambda_n: f64) -> f64 {
    let s2 = modal_amplitude_s * modal_amplitude_s;
    s2 / (s2 + lambda_n)
}

/// Evaluates the mode `sin(kx π x/lx) sin(ky π y/ly)`.
pub fn mode(kx: u32, ky: u32, lx: f64, ly: f64) -> impl Fn(f64, f64) -> f64 {
    move |x, y| (kx as f64 * PI * x / lx).sin() * (ky as f64 * PI * y / ly).sin()
}
