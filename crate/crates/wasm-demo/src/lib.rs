//! Browser bindings for the interactive demo page.
//!
//! Three operations back the page's panels: the `C(gamma*, tau)` slice
//! explorer, the bound-versus-flux scaling explorer, and a single-trajectory
//! phase-tracking run. Curves come back as flat `Float64Array`s of
//! interleaved coordinates so the page needs no JSON glue.

use wasm_bindgen::prelude::*;

use phasecrb_core::asymptotic::{c_value, starred_fisher, StarredParams};
use phasecrb_core::bound::{crb_mse, heisenberg_lower_bound};
use phasecrb_core::spectra::{PhaseNoiseModel, Spectrum};
use phasecrb_core::tracking::{tracked_trajectory, FeedbackMode, TrackingConfig};

fn c_at(gamma_star: f64, tau: f64) -> f64 {
    StarredParams::new(gamma_star, tau)
        .and_then(|p| c_value(&p))
        .map(|r| r.value)
        .unwrap_or(f64::NAN)
}

/// `[gamma, C(gamma, tau), ...]` along gamma* in (0, gamma_max].
#[wasm_bindgen]
pub fn c_slice(tau: f64, gamma_max: f64, points: usize) -> Vec<f64> {
    let points = points.clamp(2, 2048);
    let mut out = Vec::with_capacity(2 * points);
    for i in 0..points {
        let gamma = gamma_max * (i + 1) as f64 / points as f64;
        out.push(gamma);
        out.push(c_at(gamma, tau));
    }
    out
}

/// `[gamma_opt, C_min]` for the slice at fixed tau (golden-section refine
/// after a coarse scan).
#[wasm_bindgen]
pub fn c_slice_minimum(tau: f64, gamma_max: f64) -> Vec<f64> {
    let coarse = 64;
    let mut best = (gamma_max / 2.0, f64::INFINITY);
    for i in 0..coarse {
        let gamma = gamma_max * (i + 1) as f64 / coarse as f64;
        let c = c_at(gamma, tau);
        if c < best.1 {
            best = (gamma, c);
        }
    }
    let step = gamma_max / coarse as f64;
    let (mut lo, mut hi) = ((best.0 - step).max(step * 0.1), best.0 + step);
    for _ in 0..40 {
        let m1 = lo + (hi - lo) * 0.381966;
        let m2 = hi - (hi - lo) * 0.381966;
        if c_at(m1, tau) < c_at(m2, tau) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let gamma = 0.5 * (lo + hi);
    vec![gamma, c_at(gamma, tau)]
}

/// Rescaled information spectrum `[omega*, F*~(omega*), ...]`.
#[wasm_bindgen]
pub fn starred_fisher_curve(gamma_star: f64, tau: f64, omega_max: f64, points: usize) -> Vec<f64> {
    let points = points.clamp(2, 4096);
    match StarredParams::new(gamma_star, tau) {
        Ok(params) => {
            let mut out = Vec::with_capacity(2 * points);
            for i in 0..points {
                let omega = omega_max * i as f64 / (points - 1) as f64;
                out.push(omega);
                out.push(starred_fisher(&params, omega));
            }
            out
        }
        Err(_) => Vec::new(),
    }
}

/// `[log10 N, log10 bound, ...]` for a coherent beam (`heisenberg = false`)
/// or the analytic stochastic-Heisenberg lower bound (`true`).
#[wasm_bindgen]
pub fn scaling_curve(
    p: f64,
    kappa: f64,
    heisenberg: bool,
    log10_n_min: f64,
    log10_n_max: f64,
    points: usize,
) -> Vec<f64> {
    let points = points.clamp(2, 512);
    let fc = match PhaseNoiseModel::power_law(p, kappa) {
        Ok(m) => m.classical_fisher_spectrum(),
        Err(_) => return Vec::new(),
    };
    let mut out = Vec::with_capacity(2 * points);
    for i in 0..points {
        let log_n = log10_n_min + (log10_n_max - log10_n_min) * i as f64 / (points - 1) as f64;
        let n = 10f64.powf(log_n);
        let bound = if heisenberg {
            heisenberg_lower_bound(p, kappa, n).map(|r| r.value)
        } else {
            crb_mse(&fc, &Spectrum::constant(4.0 * n)).map(|r| r.value)
        };
        out.push(log_n);
        out.push(bound.map(f64::log10).unwrap_or(f64::NAN));
    }
    out
}

/// One tracked trajectory, decimated to at most `max_points` samples:
/// `[t, phi, filtered, smoothed, ...]` in blocks of four.
#[wasm_bindgen]
pub fn tracking_demo(
    seed: u64,
    alpha: f64,
    kappa: f64,
    lambda: f64,
    duration: f64,
    adaptive: bool,
    max_points: usize,
) -> Vec<f64> {
    let phase = if lambda > 0.0 {
        PhaseNoiseModel::ornstein_uhlenbeck(kappa, lambda)
    } else {
        PhaseNoiseModel::wiener(kappa)
    };
    let Ok(phase) = phase else { return Vec::new() };
    let fastest = lambda.max(4.0 * alpha * alpha).max(kappa);
    let dt = 1e-2 / fastest / 1.5;
    let feedback = if adaptive {
        FeedbackMode::AdaptiveNonlinear
    } else {
        FeedbackMode::Linearized
    };
    let Ok(config) = TrackingConfig::new(phase, alpha, dt, duration, 0.0, 1, seed, feedback)
    else {
        return Vec::new();
    };
    let tracked = tracked_trajectory(&config, 0);
    let n = tracked.phi.len();
    let stride = (n / max_points.clamp(16, 20_000)).max(1);
    let mut out = Vec::with_capacity(4 * (n / stride + 1));
    for k in (0..n).step_by(stride) {
        out.push(k as f64 * tracked.dt);
        out.push(tracked.phi[k]);
        out.push(tracked.filtered[k]);
        out.push(tracked.smoothed[k]);
    }
    out
}
