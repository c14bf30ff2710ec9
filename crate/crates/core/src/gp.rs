//! Single-task Gaussian-process regression over the time axis of one visit.
//!
//! The model is `y(t) = mu + z(t)` with `Cov(z(a), z(b)) = sigma_z^2 * exp(-alpha (a - b)^2)`.
//! `mu` and `sigma_z^2` are concentrated out of the likelihood, leaving the
//! one-dimensional profile objective
//!
//! ```text
//! log|R| + n * log[(y - 1 mu(alpha))' R^-1 (y - 1 mu(alpha))]
//! ```
//!
//! which is minimized over `log10(alpha)` in a fixed box. `R` always carries a
//! small nugget on its diagonal so it can be factorized.

use crate::data::Visit;
use crate::error::{Error, Result};
use crate::linalg::{dot, Cholesky};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpSettings {
    /// Base nugget is `nugget_factor * n`.
    pub nugget_factor: f64,
    /// Largest nugget tried when factorization keeps failing.
    pub nugget_max: f64,
    pub log10_alpha_lo: f64,
    pub log10_alpha_hi: f64,
    /// Relative tolerance on alpha for the golden-section search.
    pub alpha_rel_tol: f64,
    /// Points in the bracketing scan that precedes the golden-section search.
    pub scan_points: usize,
    pub residual_floor: f64,
}

impl Default for GpSettings {
    fn default() -> Self {
        Self {
            nugget_factor: 1e-8,
            nugget_max: 1e-2,
            log10_alpha_lo: -6.0,
            log10_alpha_hi: 4.0,
            alpha_rel_tol: 1e-3,
            scan_points: 21,
            residual_floor: 1e-24,
        }
    }
}

impl GpSettings {
    pub fn check(&self) -> Result<()> {
        if !(self.nugget_factor > 0.0) || !(self.nugget_max >= self.nugget_factor) {
            return Err(Error::Config("gp nugget must be positive and <= nugget_max".into()));
        }
        if !(self.log10_alpha_lo < self.log10_alpha_hi) {
            return Err(Error::Config("gp alpha search box is empty".into()));
        }
        if !(self.alpha_rel_tol > 0.0) {
            return Err(Error::Config("gp alpha tolerance must be positive".into()));
        }
        if self.scan_points < 3 {
            return Err(Error::Config("gp scan needs at least 3 points".into()));
        }
        Ok(())
    }
}

/// Gaussian correlation between two time points.
pub fn corr(alpha: f64, a: f64, b: f64) -> f64 {
    let d = a - b;
    (-alpha * d * d).exp()
}

pub fn correlation_matrix(alpha: f64, times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut r = vec![0.0; n * n];
    for i in 0..n {
        r[i * n + i] = 1.0;
        for j in 0..i {
            let c = corr(alpha, times[i], times[j]);
            r[i * n + j] = c;
            r[j * n + i] = c;
        }
    }
    r
}

/// Everything the profile objective computes at one alpha.
#[derive(Debug, Clone)]
struct Profile {
    chol: Cholesky,
    nugget: f64,
    mu_hat: f64,
    quad: f64,
    weights: Vec<f64>,
    rinv_one: Vec<f64>,
    one_rinv_one: f64,
    objective: f64,
}

fn factorize(alpha: f64, times: &[f64], settings: &GpSettings) -> Result<(Cholesky, f64)> {
    let n = times.len();
    let base = correlation_matrix(alpha, times);
    let mut nugget = settings.nugget_factor * n as f64;
    loop {
        let mut r = base.clone();
        for i in 0..n {
            r[i * n + i] += nugget;
        }
        if let Some(chol) = Cholesky::new(&r, n) {
            return Ok((chol, nugget));
        }
        nugget *= 2.0;
        if nugget > settings.nugget_max {
            return Err(Error::IllConditionedCorrelation { n, alpha });
        }
    }
}

fn profile(alpha: f64, times: &[f64], values: &[f64], settings: &GpSettings) -> Result<Profile> {
    let n = times.len();
    let (chol, nugget) = factorize(alpha, times, settings)?;
    let rinv_one = chol.solve(&vec![1.0; n]);
    let one_rinv_one: f64 = rinv_one.iter().sum();
    let mu_hat = dot(&rinv_one, values) / one_rinv_one;
    let resid: Vec<f64> = values.iter().map(|y| y - mu_hat).collect();
    let weights = chol.solve(&resid);
    let quad = dot(&resid, &weights).max(0.0);
    let objective = chol.log_det() + n as f64 * (quad + settings.residual_floor).ln();
    Ok(Profile {
        chol,
        nugget,
        mu_hat,
        quad,
        weights,
        rinv_one,
        one_rinv_one,
        objective,
    })
}

fn check_inputs(times: &[f64], values: &[f64]) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::InvalidInput("times and values differ in length".into()));
    }
    if times.len() < 2 {
        return Err(Error::InvalidInput("gp fit needs at least 2 observations".into()));
    }
    for (i, t) in times.iter().enumerate() {
        if !t.is_finite() || !values[i].is_finite() {
            return Err(Error::InvalidInput("non-finite gp input".into()));
        }
        if times[..i].contains(t) {
            return Err(Error::InvalidInput(format!("duplicate gp time {t}")));
        }
    }
    Ok(())
}

/// Negative profile log-likelihood (up to constants) at `alpha`.
pub fn profile_neg_log_likelihood(
    alpha: f64,
    times: &[f64],
    values: &[f64],
    settings: &GpSettings,
) -> Result<f64> {
    check_inputs(times, values)?;
    Ok(profile(alpha, times, values, settings)?.objective)
}

/// Profiled mean estimate at `alpha`.
pub fn profile_mean(alpha: f64, times: &[f64], values: &[f64], settings: &GpSettings) -> Result<f64> {
    check_inputs(times, values)?;
    Ok(profile(alpha, times, values, settings)?.mu_hat)
}

#[derive(Debug, Clone)]
pub struct GpModel {
    pub alpha: f64,
    pub mu_hat: f64,
    pub sigma2_hat: f64,
    pub nugget: f64,
    pub train_times: Vec<f64>,
    pub train_values: Vec<f64>,
    pub objective: f64,
    chol: Cholesky,
    weights: Vec<f64>,
    rinv_one: Vec<f64>,
    one_rinv_one: f64,
}

impl GpModel {
    /// Model at a fixed alpha, without searching.
    pub fn at_alpha(alpha: f64, times: &[f64], values: &[f64], settings: &GpSettings) -> Result<Self> {
        check_inputs(times, values)?;
        let p = profile(alpha, times, values, settings)?;
        Ok(Self::from_profile(alpha, times, values, p))
    }

    fn from_profile(alpha: f64, times: &[f64], values: &[f64], p: Profile) -> Self {
        Self {
            alpha,
            mu_hat: p.mu_hat,
            sigma2_hat: p.quad / times.len() as f64,
            nugget: p.nugget,
            train_times: times.to_vec(),
            train_values: values.to_vec(),
            objective: p.objective,
            chol: p.chol,
            weights: p.weights,
            rinv_one: p.rinv_one,
            one_rinv_one: p.one_rinv_one,
        }
    }

    /// Lower Cholesky factor of `R + nugget * I`, row-major.
    pub fn chol_factor(&self) -> &[f64] {
        self.chol.factor()
    }

    pub fn predict(&self, query: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut means = Vec::with_capacity(query.len());
        let mut stds = Vec::with_capacity(query.len());
        let mut r = vec![0.0; self.train_times.len()];
        for &t in query {
            for (ri, &ti) in r.iter_mut().zip(&self.train_times) {
                *ri = corr(self.alpha, t, ti);
            }
            means.push(self.mu_hat + dot(&r, &self.weights));
            let rinv_r = self.chol.solve(&r);
            let r_rinv_r = dot(&r, &rinv_r);
            let one_rinv_r = dot(&self.rinv_one, &r);
            let shrink = 1.0 - r_rinv_r + (1.0 - one_rinv_r).powi(2) / self.one_rinv_one;
            stds.push((self.sigma2_hat * shrink.max(0.0)).sqrt());
        }
        (means, stds)
    }
}

pub fn gp_predict(model: &GpModel, query: &[f64]) -> (Vec<f64>, Vec<f64>) {
    model.predict(query)
}

fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Fits alpha by minimizing the profile objective over `log10(alpha)`.
///
/// A coarse scan of the box picks the basin and golden-section search refines
/// inside the bracket around the best scan point. The search is deterministic.
pub fn fit_gp(times: &[f64], values: &[f64], settings: &GpSettings) -> Result<GpModel> {
    check_inputs(times, values)?;
    let objective = |log10_alpha: f64| {
        profile(10f64.powf(log10_alpha), times, values, settings)
            .map(|p| p.objective)
            .unwrap_or(f64::INFINITY)
    };
    let (lo, hi) = (settings.log10_alpha_lo, settings.log10_alpha_hi);
    let g = settings.scan_points;
    let step = (hi - lo) / (g - 1) as f64;
    let scan: Vec<(f64, f64)> = (0..g)
        .map(|i| {
            let x = if i == g - 1 { hi } else { lo + step * i as f64 };
            (x, objective(x))
        })
        .collect();
    let best = (0..g)
        .min_by(|&a, &b| scan[a].1.total_cmp(&scan[b].1))
        .expect("scan is non-empty");
    if !scan[best].1.is_finite() {
        return Err(Error::IllConditionedCorrelation {
            n: times.len(),
            alpha: 10f64.powf(scan[best].0),
        });
    }
    let a = scan[best.saturating_sub(1)].0;
    let b = scan[(best + 1).min(g - 1)].0;
    let tol = (1.0 + settings.alpha_rel_tol).log10();
    let (x, fx) = golden_section(objective, a, b, tol);
    let log10_alpha = if fx <= scan[best].1 { x } else { scan[best].0 };
    let alpha = 10f64.powf(log10_alpha);
    let p = profile(alpha, times, values, settings)?;
    Ok(GpModel::from_profile(alpha, times, values, p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpFill {
    pub event: usize,
    pub feature: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GpVisitResult {
    pub fills: Vec<GpFill>,
    /// Features with fewer than two observations in the visit.
    pub skipped_features: Vec<usize>,
    /// Features whose fit failed, with the reason.
    pub failed_features: Vec<(usize, String)>,
}

impl GpVisitResult {
    /// Mean predictive std over the fills, if there are any.
    pub fn mean_std(&self) -> Option<f64> {
        if self.fills.is_empty() {
            None
        } else {
            Some(self.fills.iter().map(|f| f.std).sum::<f64>() / self.fills.len() as f64)
        }
    }
}

/// Fits one GP per feature of a visit and predicts its missing times.
///
/// Times are shifted to the visit start and divided by the visit's time span
/// before fitting, so alpha is in units of (visit span)^-2.
pub fn gp_impute_visit(visit: &Visit, settings: &GpSettings) -> GpVisitResult {
    let mut out = GpVisitResult::default();
    let Some(first) = visit.events.first() else {
        return out;
    };
    let t0 = first.time as f64;
    let span = visit.events.last().map_or(0.0, |e| e.time as f64 - t0);
    let scale = if span > 0.0 { span } else { 1.0 };
    let times: Vec<f64> = visit.events.iter().map(|e| (e.time as f64 - t0) / scale).collect();
    let d = first.values.len();
    for feature in 0..d {
        let mut obs_t = Vec::new();
        let mut obs_y = Vec::new();
        let mut missing = Vec::new();
        for (e, event) in visit.events.iter().enumerate() {
            match event.values[feature] {
                Some(y) => {
                    obs_t.push(times[e]);
                    obs_y.push(y);
                }
                None => missing.push(e),
            }
        }
        if missing.is_empty() {
            continue;
        }
        if obs_t.len() < 2 {
            out.skipped_features.push(feature);
            continue;
        }
        match fit_gp(&obs_t, &obs_y, settings) {
            Ok(model) => {
                let query: Vec<f64> = missing.iter().map(|&e| times[e]).collect();
                let (means, stds) = model.predict(&query);
                for ((&event, mean), std) in missing.iter().zip(means).zip(stds) {
                    out.fills.push(GpFill {
                        event,
                        feature,
                        mean,
                        std,
                    });
                }
            }
            Err(err) => {
                log::debug!("visit {}: gp fit for feature {feature} failed: {err}", visit.visit_id);
                out.failed_features.push((feature, err.to_string()));
            }
        }
    }
    out
}
