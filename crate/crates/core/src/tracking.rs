//! Phase-tracking simulator.
//!
//! Verifies attainability of the bounds for the linear-Gaussian mean-field
//! scheme: Euler-Maruyama phase trajectories, a homodyne record
//! `dy = 2 alpha m(phi - Phi) dt + dV`, a discrete Kalman filter built on
//! the exactly discretized state transition, and a two-filter
//! (forward/backward information) fixed-interval smoother. The squeezed
//! (colored measurement noise) case is covered in the frequency domain by
//! [`wiener_smoother_mse`].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::bound::crb_mse;
use crate::error::{Error, Result};
use crate::spectra::{OpoSqueezed, PhaseNoiseModel, Spectrum, Tail};

/// Local-oscillator feedback law used when generating the record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FeedbackMode {
    /// `m(u) = u`: the record measures the phase directly.
    Linearized,
    /// `m(u) = sin(u)` with the LO steered to the running filter estimate.
    AdaptiveNonlinear,
}

/// Validated Monte Carlo configuration.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrackingConfig {
    phase: PhaseNoiseModel,
    alpha: f64,
    dt: f64,
    duration: f64,
    burn_in: f64,
    trajectories: usize,
    seed: u64,
    feedback: FeedbackMode,
}

impl TrackingConfig {
    /// Requires an OU or Wiener phase, `dt * max(lambda, 4 alpha^2, kappa)
    /// <= 1e-2`, and an interior left over after dropping the burn-in at
    /// both ends. MSE estimation additionally demands a burn-in of ten
    /// error correlation times; see [`monte_carlo_mse`].
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        phase: PhaseNoiseModel,
        alpha: f64,
        dt: f64,
        duration: f64,
        burn_in: f64,
        trajectories: usize,
        seed: u64,
        feedback: FeedbackMode,
    ) -> Result<Self> {
        match phase {
            PhaseNoiseModel::OrnsteinUhlenbeck { .. } | PhaseNoiseModel::Wiener { .. } => {}
            PhaseNoiseModel::PowerLaw { .. } => {
                return Err(Error::invalid(
                    "phase",
                    "tracking simulates OU or Wiener phases only",
                ));
            }
        }
        if !(alpha > 0.0) {
            return Err(Error::invalid("alpha", "must be positive"));
        }
        let kappa = phase.kappa();
        let lambda = phase.lambda();
        let fastest = lambda.max(4.0 * alpha * alpha).max(kappa);
        if !(dt > 0.0) || dt * fastest > 1e-2 {
            return Err(Error::invalid(
                "dt",
                format!(
                    "dt * max(lambda, 4 alpha^2, kappa) = {:.3e} must be <= 1e-2",
                    dt * fastest
                ),
            ));
        }
        if !(burn_in >= 0.0) || !(duration > 2.0 * burn_in) {
            return Err(Error::invalid(
                "duration",
                "must leave a nonempty interior after dropping burn-in at both ends",
            ));
        }
        if trajectories == 0 {
            return Err(Error::invalid("trajectories", "must be nonzero"));
        }
        Ok(TrackingConfig {
            phase,
            alpha,
            dt,
            duration,
            burn_in,
            trajectories,
            seed,
            feedback,
        })
    }

    pub fn phase(&self) -> PhaseNoiseModel {
        self.phase
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn trajectories(&self) -> usize {
        self.trajectories
    }

    fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    fn burn_steps(&self) -> usize {
        (self.burn_in / self.dt).ceil() as usize
    }
}

/// `1 / sqrt(lambda^2 + 4 alpha^2 kappa)`: relaxation time of the filter
/// error process.
pub fn error_correlation_time(alpha: f64, kappa: f64, lambda: f64) -> f64 {
    1.0 / (lambda * lambda + 4.0 * alpha * alpha * kappa).sqrt()
}

/// Positive root of `4 alpha^2 P^2 + 2 lambda P - kappa = 0`: the
/// continuous-time steady-state filtering MSE of the linearized scheme.
pub fn riccati_steady_state(alpha: f64, kappa: f64, lambda: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", "Riccati gain needs alpha > 0"));
    }
    if !(kappa > 0.0) || lambda < 0.0 {
        return Err(Error::invalid("kappa", "kappa > 0 and lambda >= 0 required"));
    }
    Ok((-lambda + (lambda * lambda + 4.0 * alpha * alpha * kappa).sqrt())
        / (4.0 * alpha * alpha))
}

/// One simulated trajectory: the true phase, the measurement increments,
/// and the LO phase used at each step.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub dt: f64,
    pub phi: Vec<f64>,
    pub increments: Vec<f64>,
    pub lo_phase: Vec<f64>,
}

/// Per-step forward results kept for the smoother.
struct ForwardPass {
    record: TrajectoryRecord,
    estimate: Vec<f64>,
    variance: Vec<f64>,
}

/// Exact discretization of the OU transition over one step.
#[derive(Clone, Copy)]
struct DiscreteModel {
    a: f64,
    q: f64,
    h: f64, // measurement gain 2 alpha dt
    r: f64, // measurement noise variance dt
}

impl DiscreteModel {
    fn from_config(c: &TrackingConfig) -> Self {
        let kappa = c.phase.kappa();
        let lambda = c.phase.lambda();
        let a = (-lambda * c.dt).exp();
        let q = if lambda > 0.0 {
            kappa * (1.0 - (-2.0 * lambda * c.dt).exp()) / (2.0 * lambda)
        } else {
            kappa * c.dt
        };
        DiscreteModel {
            a,
            q,
            h: 2.0 * c.alpha * c.dt,
            r: c.dt,
        }
    }
}

fn trajectory_rng(seed: u64, trajectory: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(bytes);
    rng.set_stream(trajectory);
    rng
}

/// Simulates one measurement record, reproducible from `(seed, trajectory)`
/// alone. In adaptive mode the running Kalman estimate steers the LO.
pub fn simulate_record(config: &TrackingConfig, trajectory: u64) -> TrajectoryRecord {
    forward_pass(config, trajectory).record
}

fn forward_pass(config: &TrackingConfig, trajectory: u64) -> ForwardPass {
    let steps = config.steps();
    let model = DiscreteModel::from_config(config);
    let kappa = config.phase.kappa();
    let lambda = config.phase.lambda();
    let dt = config.dt;
    let alpha = config.alpha;
    let mut rng = trajectory_rng(config.seed, trajectory);

    let mut phi_series = Vec::with_capacity(steps);
    let mut increments = Vec::with_capacity(steps);
    let mut lo_series = Vec::with_capacity(steps);
    let mut estimate = Vec::with_capacity(steps);
    let mut variance = Vec::with_capacity(steps);

    // Stationary start for OU; a known phase (zero) for Wiener, where the
    // stationary variance does not exist.
    let (mut phi, mut x, mut p) = if lambda > 0.0 {
        let sigma = (kappa / (2.0 * lambda)).sqrt();
        let draw: f64 = rng.sample(StandardNormal);
        (sigma * draw, 0.0, kappa / (2.0 * lambda))
    } else {
        (0.0, 0.0, 0.0)
    };

    for _ in 0..steps {
        // LO phase: the causal (predicted) estimate.
        let lo = match config.feedback {
            FeedbackMode::Linearized => 0.0,
            FeedbackMode::AdaptiveNonlinear => x,
        };
        let signal = match config.feedback {
            FeedbackMode::Linearized => phi,
            FeedbackMode::AdaptiveNonlinear => (phi - lo).sin(),
        };
        let shot: f64 = rng.sample(StandardNormal);
        let dy = 2.0 * alpha * signal * dt + dt.sqrt() * shot;

        phi_series.push(phi);
        lo_series.push(lo);
        increments.push(dy);

        // Measurement update at the left endpoint. The innovation is taken
        // against the linearization point, which is the estimate itself in
        // adaptive mode.
        let predicted_signal = match config.feedback {
            FeedbackMode::Linearized => x,
            FeedbackMode::AdaptiveNonlinear => 0.0, // sin(x - lo) with lo = x
        };
        let innovation = dy - 2.0 * alpha * predicted_signal * dt;
        let s = model.h * model.h * p + model.r;
        let gain = p * model.h / s;
        x += gain * innovation;
        p *= model.r / s;

        estimate.push(x);
        variance.push(p);

        // Exact transition for the filter state, Euler-Maruyama for truth.
        let noise: f64 = rng.sample(StandardNormal);
        phi += -lambda * phi * dt + (kappa * dt).sqrt() * noise;
        x *= model.a;
        p = model.a * model.a * p + model.q;
    }

    ForwardPass {
        record: TrajectoryRecord {
            dt,
            phi: phi_series,
            increments,
            lo_phase: lo_series,
        },
        estimate,
        variance,
    }
}

fn wrap_angle(e: f64) -> f64 {
    e - 2.0 * std::f64::consts::PI * (e / (2.0 * std::f64::consts::PI)).round()
}

struct TrajectoryStats {
    mean_sq_filtered: f64,
    mean_sq_smoothed: f64,
    cycle_slips: u64,
}

/// Backward pure-likelihood information recursion: visits every step in
/// descending order with `(k, filtered, smoothed)`. The backward state is
/// `p(z_{k+1..} | phi_k)` in information form, so combining with the
/// forward posterior never double-counts the prior.
fn backward_walk(
    config: &TrackingConfig,
    fwd: &ForwardPass,
    mut visit: impl FnMut(usize, f64, f64),
) {
    let model = DiscreteModel::from_config(config);
    let steps = fwd.record.phi.len();
    let alpha = config.alpha;
    let dt = config.dt;

    let mut info = 0.0f64;
    let mut info_mean = 0.0f64;
    for k in (0..steps).rev() {
        // Smoothed state at k: forward posterior (includes z_k) combined
        // with backward information from z_{k+1..}.
        let pf = fwd.variance[k].max(1e-300);
        let xf = fwd.estimate[k];
        let i_s = 1.0 / pf + info;
        let x_s = (xf / pf + info_mean) / i_s;
        visit(k, xf, x_s);

        // Absorb measurement z_k (it is in the future of step k-1). The
        // linearized observation of phi_k is dy + 2 alpha Phi_k dt.
        let z_lin = fwd.record.increments[k] + 2.0 * alpha * fwd.record.lo_phase[k] * dt;
        info += model.h * model.h / model.r;
        info_mean += model.h * z_lin / model.r;

        // Predict the likelihood back through the transition.
        let denom = 1.0 + info * model.q;
        info = model.a * model.a * info / denom;
        info_mean = model.a * info_mean / denom;
    }
}

/// Forward filter plus backward information pass; interior MSE averages.
fn smooth_trajectory(config: &TrackingConfig, trajectory: u64) -> TrajectoryStats {
    let fwd = forward_pass(config, trajectory);
    let steps = fwd.record.phi.len();
    let burn = config.burn_steps();
    let nonlinear = config.feedback == FeedbackMode::AdaptiveNonlinear;

    let mut sum_f = 0.0;
    let mut sum_s = 0.0;
    let mut count = 0usize;
    let mut slips = 0u64;
    let mut prev_branch: Option<f64> = None;
    let phi = &fwd.record.phi;

    backward_walk(config, &fwd, |k, xf, x_s| {
        if k >= burn && k + burn < steps {
            let truth = phi[k];
            let e_f_raw = xf - truth;
            let e_s_raw = x_s - truth;
            let (e_f, e_s) = if nonlinear {
                (wrap_angle(e_f_raw), wrap_angle(e_s_raw))
            } else {
                (e_f_raw, e_s_raw)
            };
            sum_f += e_f * e_f;
            sum_s += e_s * e_s;
            count += 1;
            if nonlinear {
                let branch = (e_f_raw / (2.0 * std::f64::consts::PI)).round();
                if let Some(prev) = prev_branch {
                    slips += (branch - prev).abs() as u64;
                }
                prev_branch = Some(branch);
            }
        }
    });

    TrajectoryStats {
        mean_sq_filtered: sum_f / count as f64,
        mean_sq_smoothed: sum_s / count as f64,
        cycle_slips: slips,
    }
}

/// Per-step results of one tracked trajectory.
#[derive(Debug, Clone)]
pub struct TrackedTrajectory {
    pub dt: f64,
    pub phi: Vec<f64>,
    pub filtered: Vec<f64>,
    pub smoothed: Vec<f64>,
}

/// Runs filter and smoother on one trajectory and returns the full time
/// series (for trajectory dumps and plots).
pub fn tracked_trajectory(config: &TrackingConfig, trajectory: u64) -> TrackedTrajectory {
    let fwd = forward_pass(config, trajectory);
    let steps = fwd.record.phi.len();
    let mut filtered = vec![0.0; steps];
    let mut smoothed = vec![0.0; steps];
    backward_walk(config, &fwd, |k, xf, x_s| {
        filtered[k] = xf;
        smoothed[k] = x_s;
    });
    TrackedTrajectory {
        dt: fwd.record.dt,
        phi: fwd.record.phi,
        filtered,
        smoothed,
    }
}

/// Monte Carlo estimates with standard errors and the analytic anchors.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrackingResult {
    pub mse_filtered: f64,
    pub stderr_filtered: f64,
    pub mse_smoothed: f64,
    pub stderr_smoothed: f64,
    /// Continuous-time Riccati prediction for the filtered MSE.
    pub riccati_filtered: f64,
    /// `kappa / (2 sqrt(4 alpha^2 kappa + lambda^2))`: the smoothed-MSE floor.
    pub crb: f64,
    pub ratio_filter_smoother: f64,
    pub stderr_ratio: f64,
    /// Cycle slips observed in adaptive mode (always 0 when linearized).
    pub cycle_slips: u64,
    pub trajectories: usize,
}

/// Order-independent pairwise summation.
fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// Runs all trajectories (in parallel, reproducibly) and averages the
/// interior squared errors of filter and smoother.
///
/// Requires the burn-in to cover at least ten correlation times of the
/// steady-state error process, so only stationary samples enter the MSE.
pub fn monte_carlo_mse(config: &TrackingConfig) -> Result<TrackingResult> {
    let tau = error_correlation_time(
        config.alpha,
        config.phase.kappa(),
        config.phase.lambda(),
    );
    if !(config.burn_in >= 10.0 * tau) {
        return Err(Error::invalid(
            "burn_in",
            format!(
                "MSE estimation needs burn_in >= 10 error correlation times ({:.3e} s)",
                10.0 * tau
            ),
        ));
    }
    let stats: Vec<TrajectoryStats> = (0..config.trajectories as u64)
        .into_par_iter()
        .map(|t| smooth_trajectory(config, t))
        .collect();

    let n = stats.len();
    let f_means: Vec<f64> = stats.iter().map(|s| s.mean_sq_filtered).collect();
    let s_means: Vec<f64> = stats.iter().map(|s| s.mean_sq_smoothed).collect();
    let mse_filtered = pairwise_sum(&f_means) / n as f64;
    let mse_smoothed = pairwise_sum(&s_means) / n as f64;
    let var_f: Vec<f64> = f_means.iter().map(|m| (m - mse_filtered).powi(2)).collect();
    let var_s: Vec<f64> = s_means.iter().map(|m| (m - mse_smoothed).powi(2)).collect();
    let stderr_filtered = if n > 1 {
        (pairwise_sum(&var_f) / ((n - 1) as f64 * n as f64)).sqrt()
    } else {
        f64::NAN
    };
    let stderr_smoothed = if n > 1 {
        (pairwise_sum(&var_s) / ((n - 1) as f64 * n as f64)).sqrt()
    } else {
        f64::NAN
    };

    let kappa = config.phase.kappa();
    let lambda = config.phase.lambda();
    let riccati = riccati_steady_state(config.alpha, kappa, lambda)?;
    let crb = kappa
        / (2.0 * (4.0 * config.alpha * config.alpha * kappa + lambda * lambda).sqrt());

    if mse_filtered > 10.0 * riccati {
        return Err(Error::TrackingDivergence {
            empirical: mse_filtered,
            limit: 10.0 * riccati,
        });
    }

    let ratio = mse_filtered / mse_smoothed;
    let stderr_ratio = ratio
        * ((stderr_filtered / mse_filtered).powi(2) + (stderr_smoothed / mse_smoothed).powi(2))
            .sqrt();

    Ok(TrackingResult {
        mse_filtered,
        stderr_filtered,
        mse_smoothed,
        stderr_smoothed,
        riccati_filtered: riccati,
        crb,
        ratio_filter_smoother: ratio,
        stderr_ratio,
        cycle_slips: stats.iter().map(|s| s.cycle_slips).sum(),
        trajectories: n,
    })
}

/// Homodyne noise spectrum of the squeezed quadrature, `S_Y = 1 + T~-`.
pub fn homodyne_noise_spectrum(beam: &OpoSqueezed) -> Spectrum {
    let (_, w_minus) = beam.half_widths();
    Spectrum::lorentzian(beam.r_minus() - 1.0, w_minus).with_floor(1.0)
}

/// Stationary smoothing MSE of the linear-Gaussian mean-field model with
/// colored measurement noise:
/// `(1/2pi) Int dw [Sigma~^-1(w) + 4 alpha^2 / S_Y(w)]^-1`.
pub fn wiener_smoother_mse(
    phase: &PhaseNoiseModel,
    alpha: f64,
    s_y: &Spectrum,
) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", "must be positive"));
    }
    let floor = s_y.floor();
    if !(floor > 0.0) {
        return Err(Error::invalid("s_y", "noise floor must be positive"));
    }
    // Positivity scan over the spectrum's own scales and cutoff.
    let cutoff = s_y.cutoff();
    let mut probe = 0.0f64;
    loop {
        if s_y.eval(probe) <= 0.0 {
            return Err(Error::Domain(format!(
                "homodyne noise spectrum nonpositive at omega = {probe:.6e}"
            )));
        }
        if probe >= cutoff {
            break;
        }
        probe = if probe == 0.0 {
            (cutoff / 4096.0).max(f64::MIN_POSITIVE)
        } else {
            probe * 1.5
        };
    }

    let a2 = 4.0 * alpha * alpha;
    let effective_floor = a2 / floor;
    let s_y_tail = s_y.tail();
    let fq = Spectrum::from_fn(
        {
            let s_y = s_y.clone();
            move |w| a2 / s_y.eval(w) - effective_floor
        },
        s_y.cutoff(),
        Tail {
            coeff: -a2 * s_y_tail.coeff / (floor * floor),
            power: s_y_tail.power,
        },
        s_y.scales().to_vec(),
    )
    .with_floor(effective_floor);
    let fc = phase.classical_fisher_spectrum();
    Ok(crb_mse(&fc, &fq)?.value)
}
