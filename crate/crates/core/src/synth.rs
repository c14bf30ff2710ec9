//! Seeded generator of irregular multivariate series with known truth.
//!
//! Each visit draws its own event count, irregular event times and latent
//! phases. Latent signals are sinusoids `z_d(t) = sin(omega_d t + phi_d)` with
//! `omega_d = sqrt(alpha*_d)` (t in hours); observed features are `A z + noise`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::{Dataset, Event, FeatureKind, FeatureSpec, Visit};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_visits: usize,
    pub n_features: usize,
    /// Inclusive range of events per visit.
    pub events_per_visit: (usize, usize),
    /// Inclusive range of minutes between consecutive events.
    pub gap_minutes: (u64, u64),
    /// Temporal smoothness per feature; larger means faster oscillation.
    pub smoothness: Vec<f64>,
    /// Row-major `D x D` mixing matrix.
    pub mixing: Vec<f64>,
    pub noise_scale: f64,
    pub native_missing_rate: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// Log-spaced smoothness and a non-diagonal mixing matrix.
    pub fn new(n_visits: usize, n_features: usize, seed: u64) -> Self {
        Self {
            n_visits,
            n_features,
            events_per_visit: (10, 40),
            gap_minutes: (30, 180),
            smoothness: log_spaced_smoothness(n_features),
            mixing: mixing_matrix(n_features, 0.5, seed),
            noise_scale: 0.05,
            native_missing_rate: 0.0,
            seed,
        }
    }

    pub fn check(&self) -> Result<()> {
        let d = self.n_features;
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_visits == 0 || d == 0 {
            return bad("synthetic data needs at least one visit and one feature");
        }
        let (lo, hi) = self.events_per_visit;
        if lo < 2 || hi < lo {
            return bad("events per visit must satisfy 2 <= min <= max");
        }
        let (glo, ghi) = self.gap_minutes;
        if glo == 0 || ghi < glo {
            return bad("event gaps must satisfy 1 <= min <= max");
        }
        if self.smoothness.len() != d || self.smoothness.iter().any(|a| !(*a > 0.0)) {
            return bad("smoothness needs one positive value per feature");
        }
        if self.mixing.len() != d * d || self.mixing.iter().any(|x| !x.is_finite()) {
            return bad("mixing matrix must be D x D and finite");
        }
        if !(self.noise_scale >= 0.0) {
            return bad("noise scale must be non-negative");
        }
        if !(0.0..1.0).contains(&self.native_missing_rate) {
            return bad("native missing rate must be in [0, 1)");
        }
        Ok(())
    }
}

/// Angular frequencies log-spaced from 0.05 to 0.6 rad/hour, squared.
pub fn log_spaced_smoothness(d: usize) -> Vec<f64> {
    let (lo, hi) = (0.05f64.ln(), 0.6f64.ln());
    (0..d)
        .map(|i| {
            let t = if d == 1 { 0.0 } else { i as f64 / (d - 1) as f64 };
            (lo + t * (hi - lo)).exp().powi(2)
        })
        .collect()
}

pub fn identity_mixing(d: usize) -> Vec<f64> {
    (0..d * d).map(|i| if i / d == i % d { 1.0 } else { 0.0 }).collect()
}

/// `(1 - strength) I + strength U` with uniform positive `U`, rows scaled to sum to 1.
pub fn mixing_matrix(d: usize, strength: f64, seed: u64) -> Vec<f64> {
    let mut rng = seed::rng(seed, &[seed::TAG_SYNTH, u64::MAX]);
    let mut a = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let u: f64 = rng.random();
            a[i * d + j] = strength * u + if i == j { 1.0 - strength } else { 0.0 };
        }
        let s: f64 = a[i * d..(i + 1) * d].iter().sum();
        for x in &mut a[i * d..(i + 1) * d] {
            *x /= s;
        }
    }
    a
}

/// Returns the dataset with native missingness and the complete truth.
pub fn generate(config: &SynthConfig) -> (Dataset, Dataset) {
    config.check().expect("invalid synthetic config");
    let d = config.n_features;
    let features: Vec<FeatureSpec> = (0..d)
        .map(|i| {
            let kind = if i % 2 == 0 {
                FeatureKind::Vital
            } else {
                FeatureKind::Lab
            };
            FeatureSpec::new(i, format!("f{i}"), kind)
        })
        .collect();
    let omega: Vec<f64> = config.smoothness.iter().map(|a| a.sqrt()).collect();
    let mut observed_visits = Vec::with_capacity(config.n_visits);
    let mut truth_visits = Vec::with_capacity(config.n_visits);
    for v in 0..config.n_visits {
        let mut rng = seed::rng(config.seed, &[seed::TAG_SYNTH, v as u64]);
        let (lo, hi) = config.events_per_visit;
        let t_i = rng.random_range(lo..=hi);
        let phase: Vec<f64> = (0..d)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        let mut time = 0u64;
        let mut truth_events = Vec::with_capacity(t_i);
        let mut obs_events = Vec::with_capacity(t_i);
        for e in 0..t_i {
            if e > 0 {
                time += rng.random_range(config.gap_minutes.0..=config.gap_minutes.1);
            }
            let hours = time as f64 / 60.0;
            let z: Vec<f64> = (0..d).map(|k| (omega[k] * hours + phase[k]).sin()).collect();
            let values: Vec<f64> = (0..d)
                .map(|i| {
                    let mixed: f64 = (0..d).map(|k| config.mixing[i * d + k] * z[k]).sum();
                    let noise: f64 = rng.sample(StandardNormal);
                    mixed + config.noise_scale * noise
                })
                .collect();
            let mut observed: Vec<Option<f64>> = values
                .iter()
                .map(|&x| (rng.random::<f64>() >= config.native_missing_rate).then_some(x))
                .collect();
            if observed.iter().all(Option::is_none) {
                let keep = rng.random_range(0..d);
                observed[keep] = Some(values[keep]);
            }
            truth_events.push(Event::new(time, values.into_iter().map(Some).collect()));
            obs_events.push(Event::new(time, observed));
        }
        let id = format!("visit{v:05}");
        truth_visits.push(Visit::new(id.clone(), truth_events));
        observed_visits.push(Visit::new(id, obs_events));
    }
    (
        Dataset::new(features.clone(), observed_visits),
        Dataset::new(features, truth_visits),
    )
}
