//! Sensor measurements at the interior mesh nodes with i.i.d. Gaussian noise.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::fem::NodalFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub values: Vec<f64>,
    pub sigma: f64,
    pub seed: u64,
    pub n_sensors: usize,
}

impl MeasurementSet {
    /// `‖m − clean‖_n / ‖clean‖_n`.
    pub fn relative_noise_level(&self, clean: &[f64]) -> Result<f64> {
        let noise: Vec<f64> = self.values.iter().zip(clean).map(|(m, u)| m - u).collect();
        let denom = empirical_norm(clean)?;
        Ok(if denom == 0.0 {
            0.0
        } else {
            empirical_norm(&noise)? / denom
        })
    }
}

/// Standard normal deviates by the Box–Muller transform over xoshiro256++.
///
/// Both deviates of each pair are used, so the stream for a given seed is a
/// fixed function of the seed alone.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: Xoshiro256PlusPlus,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on (0, 1], 53-bit resolution.
    fn uniform_open0(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform_open0();
        let u2 = self.uniform_open0();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

pub fn simulate_measurements(u_t: &NodalFunction, sigma: f64, seed: u64) -> Result<MeasurementSet> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma {sigma} must be non-negative")));
    }
    let mut values = u_t.values().to_vec();
    if sigma > 0.0 {
        let mut g = GaussianStream::new(seed);
        for v in &mut values {
            *v += sigma * g.next_standard();
        }
    }
    Ok(MeasurementSet {
        n_sensors: values.len(),
        values,
        sigma,
        seed,
    })
}

/// `‖v‖_n = (Σ v_i² / n)^{1/2}`.
pub fn empirical_norm(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::InvalidParameter("empirical norm of an empty vector".into()));
    }
    Ok((v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn noiseless_is_exact() {
        let u = NodalFunction::new(vec![0.1, -0.2, 0.3]);
        let m = simulate_measurements(&u, 0.0, 7).unwrap();
        assert_eq!(m.values, u.values());
        assert_eq!(m.n_sensors, 3);
    }

    #[test]
    fn seeded_runs_match() {
        let u = NodalFunction::new(vec![0.0; 50]);
        let a = simulate_measurements(&u, 1e-3, 42).unwrap();
        let b = simulate_measurements(&u, 1e-3, 42).unwrap();
        let c = simulate_measurements(&u, 1e-3, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn sample_std_within_bounds() {
        // n = 961: the sample std lies in [0.9σ, 1.1σ] with probability > 0.99
        let u = NodalFunction::new(vec![0.5; 961]);
        for seed in 0..5 {
            let m = simulate_measurements(&u, 1e-3, seed).unwrap();
            let e: Vec<f64> = m.values.iter().map(|v| v - 0.5).collect();
            let mean = e.iter().sum::<f64>() / e.len() as f64;
            let var = e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (e.len() - 1) as f64;
            let sd = var.sqrt();
            assert!((0.9e-3..=1.1e-3).contains(&sd), "seed {seed}: {sd}");
        }
    }

    #[test]
    fn negative_sigma() {
        assert!(simulate_measurements(&NodalFunction::new(vec![1.0]), -1.0, 0).is_err());
    }

    #[test]
    fn empirical_norm_cases() {
        assert_eq!(empirical_norm(&[0.0; 4]).unwrap(), 0.0);
        assert_eq!(empirical_norm(&[1.0; 17]).unwrap(), 1.0);
        assert!((empirical_norm(&[3.0, 4.0]).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
        assert!(empirical_norm(&[]).is_err());
    }

    proptest! {
        #[test]
        fn empirical_norm_is_homogeneous(
            v in proptest::collection::vec(-1e3f64..1e3, 1..40),
            c in -1e3f64..1e3,
        ) {
            let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
            let lhs = empirical_norm(&scaled).unwrap();
            let rhs = c.abs() * empirical_norm(&v).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }
    }
}
