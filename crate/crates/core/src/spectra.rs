//! Phase-noise priors, beam models, and their spectra.
//!
//! All spectra are even real functions of the angular frequency `omega`
//! (rad/s). The Fourier convention is fixed artifact-wide:
//!
//! ```text
//! g~(w) = Int g(t) exp(-i w t) dt,     g(t) = (1/2pi) Int g~(w) exp(i w t) dw
//! ```
//!
//! so a constant `c` in the time domain carries a delta spike of weight
//! `2 pi c` at `omega = 0`, and a correlation `A exp(-a|t|)` transforms to the
//! Lorentzian `A * 2a / (a^2 + w^2)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad;

/// Prior model for the fluctuating phase.
///
/// The three variants overlap by construction: `Wiener{kappa}` equals
/// `OrnsteinUhlenbeck{kappa, lambda: 0}` equals `PowerLaw{p: 2, kappa}` at
/// every `omega != 0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseNoiseModel {
    /// Prior spectrum `kappa^(p-1) / |omega|^p`, `p > 1`.
    PowerLaw { p: f64, kappa: f64 },
    /// Prior spectrum `kappa / (lambda^2 + omega^2)`.
    OrnsteinUhlenbeck { kappa: f64, lambda: f64 },
    /// Brownian-motion phase, spectrum `kappa / omega^2`.
    Wiener { kappa: f64 },
}

impl PhaseNoiseModel {
    pub fn power_law(p: f64, kappa: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::invalid("p", format!("must be > 1, got {p}")));
        }
        check_positive("kappa", kappa)?;
        Ok(PhaseNoiseModel::PowerLaw { p, kappa })
    }

    pub fn ornstein_uhlenbeck(kappa: f64, lambda: f64) -> Result<Self> {
        check_positive("kappa", kappa)?;
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::invalid("lambda", format!("must be >= 0, got {lambda}")));
        }
        Ok(PhaseNoiseModel::OrnsteinUhlenbeck { kappa, lambda })
    }

    pub fn wiener(kappa: f64) -> Result<Self> {
        check_positive("kappa", kappa)?;
        Ok(PhaseNoiseModel::Wiener { kappa })
    }

    pub fn kappa(&self) -> f64 {
        match *self {
            PhaseNoiseModel::PowerLaw { kappa, .. }
            | PhaseNoiseModel::OrnsteinUhlenbeck { kappa, .. }
            | PhaseNoiseModel::Wiener { kappa } => kappa,
        }
    }

    /// High-frequency power-law exponent of the prior spectrum.
    pub fn tail_exponent(&self) -> f64 {
        match *self {
            PhaseNoiseModel::PowerLaw { p, .. } => p,
            _ => 2.0,
        }
    }

    /// Damping rate; zero for the pure power-law models.
    pub fn lambda(&self) -> f64 {
        match *self {
            PhaseNoiseModel::OrnsteinUhlenbeck { lambda, .. } => lambda,
            _ => 0.0,
        }
    }

    /// Prior phase spectrum `Sigma~(omega)` in rad^2 s.
    ///
    /// Power-law priors are singular at dc; evaluating one at `omega = 0`
    /// is a domain error.
    pub fn prior_spectrum(&self, omega: f64) -> Result<f64> {
        match *self {
            PhaseNoiseModel::PowerLaw { p, kappa } => {
                if omega == 0.0 {
                    return Err(Error::Domain(
                        "power-law prior spectrum diverges at omega = 0".into(),
                    ));
                }
                Ok(kappa.powf(p - 1.0) / omega.abs().powf(p))
            }
            PhaseNoiseModel::OrnsteinUhlenbeck { kappa, lambda } => {
                Ok(kappa / (lambda * lambda + omega * omega))
            }
            PhaseNoiseModel::Wiener { kappa } => Ok(kappa / (omega * omega)),
        }
    }

    /// Classical Fisher information density `1 / Sigma~(omega)`.
    ///
    /// Exact everywhere, including `omega = 0` where unbounded prior
    /// variance means zero information density.
    pub fn classical_fisher(&self, omega: f64) -> f64 {
        match *self {
            PhaseNoiseModel::PowerLaw { p, kappa } => omega.abs().powf(p) / kappa.powf(p - 1.0),
            PhaseNoiseModel::OrnsteinUhlenbeck { kappa, lambda } => {
                (lambda * lambda + omega * omega) / kappa
            }
            PhaseNoiseModel::Wiener { kappa } => omega * omega / kappa,
        }
    }

    /// The classical Fisher spectrum as a [`Spectrum`] (growing tail
    /// `|omega|^p / kappa^(p-1)`).
    pub fn classical_fisher_spectrum(&self) -> Spectrum {
        let model = *self;
        let p = self.tail_exponent();
        let kappa = self.kappa();
        let lambda = self.lambda();
        let mut scales = Vec::new();
        if lambda > 0.0 {
            scales.push(lambda);
        }
        Spectrum {
            floor: 0.0,
            continuous: Continuous::Analytic {
                f: Arc::new(move |w| model.classical_fisher(w)),
                cutoff: f64::INFINITY,
            },
            spikes: Vec::new(),
            tail: Tail {
                coeff: kappa.powf(1.0 - p),
                power: p,
            },
            scales,
        }
    }
}

/// Declared asymptotic behavior of a spectrum's continuous part:
/// `continuous(omega) ~ coeff * |omega|^power` beyond the cutoff.
/// Negative `power` declares decay, positive declares growth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tail {
    pub coeff: f64,
    pub power: f64,
}

impl Tail {
    pub const ZERO: Tail = Tail {
        coeff: 0.0,
        power: 0.0,
    };

    pub fn eval(&self, omega: f64) -> f64 {
        if self.coeff == 0.0 {
            0.0
        } else {
            self.coeff * omega.abs().powf(self.power)
        }
    }

    /// `Int_c^inf coeff * w^power dw`, finite only for `power < -1`.
    fn integral_beyond(&self, cutoff: f64) -> f64 {
        if self.coeff == 0.0 {
            return 0.0;
        }
        debug_assert!(self.power < -1.0);
        self.coeff * cutoff.powf(self.power + 1.0) / (-self.power - 1.0)
    }
}

/// A delta spike at `+-omega` of the given weight per side (a spike at
/// `omega = 0` is unpaired).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spike {
    pub omega: f64,
    pub weight: f64,
}

#[derive(Clone)]
enum Continuous {
    Zero,
    Analytic {
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        cutoff: f64,
    },
    Grid {
        step: f64,
        values: Arc<Vec<f64>>,
    },
}

impl fmt::Debug for Continuous {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Continuous::Zero => write!(f, "Zero"),
            Continuous::Analytic { cutoff, .. } => write!(f, "Analytic {{ cutoff: {cutoff} }}"),
            Continuous::Grid { step, values } => {
                write!(f, "Grid {{ step: {step}, points: {} }}", values.len())
            }
        }
    }
}

/// Even real spectrum: a continuous part plus delta spikes, with an
/// additive constant floor kept symbolically so it never suffers grid
/// truncation.
#[derive(Debug, Clone)]
pub struct Spectrum {
    floor: f64,
    continuous: Continuous,
    spikes: Vec<Spike>,
    tail: Tail,
    scales: Vec<f64>,
}

impl Spectrum {
    pub fn zero() -> Self {
        Spectrum {
            floor: 0.0,
            continuous: Continuous::Zero,
            spikes: Vec::new(),
            tail: Tail::ZERO,
            scales: Vec::new(),
        }
    }

    /// Pure white level (constant at every `omega`).
    pub fn constant(level: f64) -> Self {
        Spectrum {
            floor: level,
            ..Spectrum::zero()
        }
    }

    /// Lorentzian `peak * w^2 / (w^2 + omega^2)` with half-width `w`.
    pub fn lorentzian(peak: f64, half_width: f64) -> Self {
        assert!(half_width > 0.0, "half_width must be positive");
        let w2 = half_width * half_width;
        Spectrum {
            floor: 0.0,
            continuous: Continuous::Analytic {
                f: Arc::new(move |omega| peak * w2 / (w2 + omega * omega)),
                cutoff: half_width * CUTOFF_WIDTHS,
            },
            spikes: Vec::new(),
            tail: Tail {
                coeff: peak * w2,
                power: -2.0,
            },
            scales: vec![half_width],
        }
    }

    /// Spectrum from a closed-form even function of `omega`.
    pub fn from_fn<F>(f: F, cutoff: f64, tail: Tail, scales: Vec<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Spectrum {
            floor: 0.0,
            continuous: Continuous::Analytic {
                f: Arc::new(f),
                cutoff,
            },
            spikes: Vec::new(),
            tail,
            scales,
        }
    }

    /// Spectrum sampled on the uniform grid `omega_k = k * step`,
    /// `k = 0..values.len()`. Beyond the last sample the declared power-law
    /// tail takes over, with its coefficient matched at the cutoff.
    pub fn from_grid(step: f64, values: Vec<f64>, tail_power: f64, scales: Vec<f64>) -> Self {
        let cutoff = step * (values.len() - 1) as f64;
        let coeff = values.last().unwrap() * cutoff.powf(-tail_power);
        Spectrum::from_grid_with_tail(
            step,
            values,
            Tail {
                coeff,
                power: tail_power,
            },
            scales,
        )
    }

    /// Grid spectrum with an explicitly known asymptotic tail (more accurate
    /// than matching the coefficient at the cutoff when the tail is known
    /// analytically).
    pub fn from_grid_with_tail(step: f64, values: Vec<f64>, tail: Tail, scales: Vec<f64>) -> Self {
        assert!(step > 0.0 && values.len() >= 2);
        debug_assert!(tail.power < -1.0 || tail.coeff == 0.0);
        Spectrum {
            floor: 0.0,
            continuous: Continuous::Grid {
                step,
                values: Arc::new(values),
            },
            spikes: Vec::new(),
            tail,
            scales,
        }
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn with_spike(mut self, omega: f64, weight: f64) -> Self {
        assert!(omega >= 0.0, "spikes are stored at omega >= 0");
        self.spikes.push(Spike { omega, weight });
        self
    }

    pub fn with_scales(mut self, scales: Vec<f64>) -> Self {
        self.scales = scales;
        self
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn spikes(&self) -> &[Spike] {
        &self.spikes
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// Characteristic frequency scales (Lorentzian widths, knees) used to
    /// seed adaptive quadrature.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Where the declared tail takes over (infinite for globally valid
    /// closed forms).
    pub fn cutoff(&self) -> f64 {
        match &self.continuous {
            Continuous::Zero => 0.0,
            Continuous::Analytic { cutoff, .. } => *cutoff,
            Continuous::Grid { step, values } => step * (values.len() - 1) as f64,
        }
    }

    /// Sample spacing for grid-backed spectra.
    pub fn grid_step(&self) -> Option<f64> {
        match &self.continuous {
            Continuous::Grid { step, .. } => Some(*step),
            _ => None,
        }
    }

    /// Pointwise value `floor + continuous(|omega|)`; spikes are not
    /// included.
    pub fn eval(&self, omega: f64) -> f64 {
        self.floor + self.continuous_at(omega)
    }

    /// The continuous part alone.
    pub fn continuous_at(&self, omega: f64) -> f64 {
        let w = omega.abs();
        match &self.continuous {
            Continuous::Zero => 0.0,
            Continuous::Analytic { f, .. } => f(w),
            Continuous::Grid { step, values } => {
                let pos = w / step;
                let idx = pos.floor() as usize;
                if idx + 1 >= values.len() {
                    self.tail.eval(w)
                } else {
                    let frac = pos - idx as f64;
                    values[idx] * (1.0 - frac) + values[idx + 1] * frac
                }
            }
        }
    }

    /// Total spike weight counting both sides of every paired spike.
    pub fn spike_weight_total(&self) -> f64 {
        self.spikes
            .iter()
            .map(|s| if s.omega == 0.0 { s.weight } else { 2.0 * s.weight })
            .sum()
    }

    /// `Int_-inf^inf` of continuous part plus spikes. Requires a zero floor
    /// (a white level has no finite integral); the declared tail supplies
    /// the analytic remainder beyond the cutoff.
    pub fn integral(&self) -> Result<f64> {
        if self.floor != 0.0 {
            return Err(Error::Domain(
                "spectrum with a nonzero white floor has no finite integral".into(),
            ));
        }
        let continuous = match &self.continuous {
            Continuous::Zero => 0.0,
            Continuous::Analytic { f, cutoff } => {
                if self.tail.coeff != 0.0 && !(self.tail.power < -1.0) {
                    return Err(Error::Domain(
                        "spectrum tail is not integrable".into(),
                    ));
                }
                let seeds = quad::log_seeds(&self.scales, 0.0, *cutoff);
                let r = quad::integrate_adaptive(&|w| f(w), 0.0, *cutoff, &seeds, 1e-10, 0.0)?;
                2.0 * (r.value + self.tail.integral_beyond(*cutoff))
            }
            Continuous::Grid { step, values } => {
                let mut sum = 0.5 * (values[0] + values[values.len() - 1]);
                for v in &values[1..values.len() - 1] {
                    sum += v;
                }
                2.0 * (sum * step + self.tail.integral_beyond(self.cutoff()))
            }
        };
        Ok(continuous + self.spike_weight_total())
    }

    /// Inverse transform at `t = 0`: `(1/2pi) Int g~(omega) d omega`.
    pub fn time_domain_at_zero(&self) -> Result<f64> {
        Ok(self.integral()? / (2.0 * std::f64::consts::PI))
    }
}

/// Default ratio of a closed-form spectrum's nominal cutoff to its widest
/// feature: the Lorentzian tail at `1e4` widths is `1e-8` of its peak.
pub(crate) const CUTOFF_WIDTHS: f64 = 1e4;

/// OPO beam: coherent amplitude `alpha` added to squeezed cavity output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpoSqueezed {
    alpha: f64,
    r_plus: f64,
    r_minus: f64,
    gamma: f64,
    x: f64,
}

impl OpoSqueezed {
    /// Validates: `r_plus >= 1`, `r_minus` in (0, 1], `r_plus * r_minus >= 1`
    /// (equality for pure states), `gamma > 0`, `x` in [0, 1).
    pub fn new(alpha: f64, r_plus: f64, r_minus: f64, gamma: f64, x: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::invalid("alpha", "must be finite"));
        }
        if !(r_plus >= 1.0) {
            return Err(Error::invalid(
                "r_plus",
                format!("antisqueezing level must be >= 1, got {r_plus}"),
            ));
        }
        if !(r_minus > 0.0 && r_minus <= 1.0) {
            return Err(Error::invalid(
                "r_minus",
                format!("squeezing level must be in (0, 1], got {r_minus}"),
            ));
        }
        // Rounding slack so pure states built as r_plus = 1/r_minus pass.
        if r_plus * r_minus < 1.0 - 1e-9 {
            return Err(Error::invalid(
                "r_minus",
                format!(
                    "r_plus * r_minus = {} < 1 is nonphysical",
                    r_plus * r_minus
                ),
            ));
        }
        check_positive("gamma", gamma)?;
        if !(0.0..1.0).contains(&x) {
            return Err(Error::invalid("x", format!("pump must be in [0, 1), got {x}")));
        }
        Ok(OpoSqueezed {
            alpha,
            r_plus,
            r_minus,
            gamma,
            x,
        })
    }

    /// Pure squeezed state with levels `r_plus = 1/r_minus` and the pump
    /// amplitude fixed by `sqrt(r_plus) = (1+x)/(1-x)`.
    pub fn pure(alpha: f64, r_minus: f64, gamma: f64) -> Result<Self> {
        let r_plus = 1.0 / r_minus;
        let x = pure_pump_from_antisqueezing(r_plus);
        OpoSqueezed::new(alpha, r_plus, r_minus, gamma, x)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn r_plus(&self) -> f64 {
        self.r_plus
    }
    pub fn r_minus(&self) -> f64 {
        self.r_minus
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn x(&self) -> f64 {
        self.x
    }

    /// Half-widths of the antisqueezing (`+`) and squeezing (`-`)
    /// Lorentzians: `(1 -+ x) gamma / 2`.
    pub fn half_widths(&self) -> (f64, f64) {
        (
            (1.0 - self.x) * self.gamma / 2.0,
            (1.0 + self.x) * self.gamma / 2.0,
        )
    }

    /// Normally ordered quadrature correlations
    /// `T+-(t) = (R+- - 1)(1 -+ x) gamma / 4 * exp(-(1 -+ x) gamma |t| / 2)`.
    pub fn correlations(&self, t: f64) -> (f64, f64) {
        let (w_plus, w_minus) = self.half_widths();
        let t_plus = (self.r_plus - 1.0) * w_plus / 2.0 * (-w_plus * t.abs()).exp();
        let t_minus = (self.r_minus - 1.0) * w_minus / 2.0 * (-w_minus * t.abs()).exp();
        (t_plus, t_minus)
    }

    /// Fourier transforms of the correlations: Lorentzians peaking at
    /// `R+- - 1` with the half-widths above.
    pub fn quadrature_spectra(&self) -> (Spectrum, Spectrum) {
        let (w_plus, w_minus) = self.half_widths();
        (
            Spectrum::lorentzian(self.r_plus - 1.0, w_plus),
            Spectrum::lorentzian(self.r_minus - 1.0, w_minus),
        )
    }

    /// Total photon flux
    /// `N = alpha^2 + (gamma/16) [(R+ - 1)(1-x) + (R- - 1)(1+x)]`.
    pub fn photon_flux(&self) -> Result<f64> {
        let squeezing = self.gamma / 16.0
            * ((self.r_plus - 1.0) * (1.0 - self.x) + (self.r_minus - 1.0) * (1.0 + self.x));
        let flux = self.alpha * self.alpha + squeezing;
        if flux <= 0.0 {
            return Err(Error::Domain(format!(
                "computed photon flux {flux} <= 0: invalid mixed parameters"
            )));
        }
        Ok(flux)
    }

    /// Splits a mixed squeezed beam into a pure squeezed beam and the
    /// leftover classical amplitude-noise spectrum `S_XX - S_XX^Q`
    /// (pointwise nonnegative for physical inputs).
    pub fn mixed_to_pure(&self) -> Result<(OpoSqueezed, Spectrum)> {
        let r_plus_q = 1.0 / self.r_minus;
        let x_q = pure_pump_from_antisqueezing(r_plus_q);
        // gamma^Q (1 + x^Q) = gamma (1 + x) holds exactly, so the squeezed
        // quadrature spectrum is untouched by the decomposition.
        let gamma_q = self.gamma * (1.0 + self.x) / (1.0 + x_q);
        let pure = OpoSqueezed::new(self.alpha, r_plus_q, self.r_minus, gamma_q, x_q)?;

        let mixed = *self;
        let (w_mixed, _) = self.half_widths();
        let (w_pure, _) = pure.half_widths();
        let classical = Spectrum::from_fn(
            move |omega| {
                let (t_plus_mixed, _) = lorentzian_pair(&mixed, omega);
                let (t_plus_pure, _) = lorentzian_pair(&pure, omega);
                t_plus_mixed - t_plus_pure
            },
            w_mixed.max(w_pure) * CUTOFF_WIDTHS,
            Tail {
                coeff: (self.r_plus - 1.0) * w_mixed * w_mixed
                    - (r_plus_q - 1.0) * w_pure * w_pure,
                power: -2.0,
            },
            vec![w_mixed, w_pure],
        );

        // Physicality beyond the carrier: the decomposition must not demand
        // negative classical noise at any frequency.
        let wideband_margin = (self.r_plus - 1.0) * w_mixed * w_mixed
            - (r_plus_q - 1.0) * w_pure * w_pure;
        if wideband_margin < -1e-12 * (self.r_plus - 1.0).max(1.0) * w_mixed * w_mixed {
            return Err(Error::Domain(format!(
                "mixed beam is narrower than its pure part: classical noise would be \
                 negative at large omega (margin {wideband_margin:.3e})"
            )));
        }
        Ok((pure, classical))
    }

    /// Repackages the beam as a [`GeneralBeam`] with means
    /// `<X> = 2 alpha`, `<Y> = 0` and the Lorentzian correlation spectra.
    pub fn to_general(&self) -> GeneralBeam {
        let (h_x, h_y) = self.quadrature_spectra();
        GeneralBeam {
            mean_x: 2.0 * self.alpha,
            mean_y: 0.0,
            h_x,
            h_y,
            h_xy: Spectrum::zero(),
        }
    }
}

fn lorentzian_pair(beam: &OpoSqueezed, omega: f64) -> (f64, f64) {
    let (w_plus, w_minus) = beam.half_widths();
    let lp = (beam.r_plus - 1.0) * w_plus * w_plus / (w_plus * w_plus + omega * omega);
    let lm = (beam.r_minus - 1.0) * w_minus * w_minus / (w_minus * w_minus + omega * omega);
    (lp, lm)
}

/// `x = (sqrt(R+) - 1) / (sqrt(R+) + 1)`, the pump consistent with a pure
/// state of antisqueezing level `R+`.
pub fn pure_pump_from_antisqueezing(r_plus: f64) -> f64 {
    let s = r_plus.sqrt();
    (s - 1.0) / (s + 1.0)
}

/// Stationary Gaussian beam described by quadrature means and normally
/// ordered fluctuation spectra (means excluded from the spectra).
#[derive(Debug, Clone)]
pub struct GeneralBeam {
    pub mean_x: f64,
    pub mean_y: f64,
    pub h_x: Spectrum,
    pub h_y: Spectrum,
    pub h_xy: Spectrum,
}

impl GeneralBeam {
    /// `N = [h_X(0) + h_Y(0) + <X>^2 + <Y>^2] / 4` with the time-domain
    /// values obtained by inverse transform at `t = 0`.
    pub fn photon_flux(&self) -> Result<f64> {
        let hx0 = self.h_x.time_domain_at_zero()?;
        let hy0 = self.h_y.time_domain_at_zero()?;
        let flux = (hx0 + hy0 + self.mean_x * self.mean_x + self.mean_y * self.mean_y) / 4.0;
        if flux <= 0.0 {
            return Err(Error::Domain(format!(
                "computed photon flux {flux} <= 0: invalid beam spectra"
            )));
        }
        Ok(flux)
    }
}

/// Beam description: coherent, OPO-squeezed, or raw stationary spectra.
// Variant sizes are lopsided (General carries three spectra), but beams are
// built once per run, not stored in bulk.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum BeamModel {
    Coherent { alpha: f64 },
    Opo(OpoSqueezed),
    General(GeneralBeam),
}

impl BeamModel {
    pub fn coherent(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha == 0.0 {
            return Err(Error::invalid("alpha", "must be finite and nonzero"));
        }
        Ok(BeamModel::Coherent { alpha })
    }

    pub fn photon_flux(&self) -> Result<f64> {
        match self {
            BeamModel::Coherent { alpha } => Ok(alpha * alpha),
            BeamModel::Opo(beam) => beam.photon_flux(),
            BeamModel::General(beam) => beam.photon_flux(),
        }
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::invalid(name, format!("must be positive, got {value}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_prior_direct_evaluation() {
        let m = PhaseNoiseModel::power_law(2.0, 1.0).unwrap();
        assert!((m.prior_spectrum(3.0).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!(m.prior_spectrum(0.0).is_err());
        assert!(PhaseNoiseModel::power_law(1.0, 1.0).is_err());
        assert!(PhaseNoiseModel::power_law(0.5, 1.0).is_err());
    }

    #[test]
    fn wiener_equals_ou_lambda0_equals_power_law_p2() {
        let wiener = PhaseNoiseModel::wiener(1.3).unwrap();
        let ou = PhaseNoiseModel::ornstein_uhlenbeck(1.3, 0.0).unwrap();
        let pl = PhaseNoiseModel::power_law(2.0, 1.3).unwrap();
        for &w in &[1e-3, 0.1, 1.0, 3.0, 17.0, 1e4] {
            let a = wiener.prior_spectrum(w).unwrap();
            let b = ou.prior_spectrum(w).unwrap();
            let c = pl.prior_spectrum(w).unwrap();
            assert_eq!(a, b);
            assert!((a - c).abs() <= 1e-15 * a.abs());
        }
    }

    #[test]
    fn ou_prior_and_fisher_values() {
        let m = PhaseNoiseModel::ornstein_uhlenbeck(2.0, 1.0).unwrap();
        assert!((m.prior_spectrum(0.0).unwrap() - 2.0).abs() < 1e-15);
        let m = PhaseNoiseModel::ornstein_uhlenbeck(1.0, 1.0).unwrap();
        assert!((m.classical_fisher(0.0) - 1.0).abs() < 1e-15);
        let m = PhaseNoiseModel::power_law(2.0, 1.0).unwrap();
        assert!((m.classical_fisher(3.0) - 9.0).abs() < 1e-15);
        let m = PhaseNoiseModel::ornstein_uhlenbeck(1.0, 0.0).unwrap();
        assert_eq!(m.classical_fisher(0.0), 0.0);
    }

    #[test]
    fn prior_spectrum_positive_and_even() {
        let models = [
            PhaseNoiseModel::power_law(1.7, 0.8).unwrap(),
            PhaseNoiseModel::ornstein_uhlenbeck(2.0, 0.3).unwrap(),
            PhaseNoiseModel::wiener(1.1).unwrap(),
        ];
        for m in &models {
            for &w in &[0.01, 0.5, 2.0, 40.0] {
                let plus = m.prior_spectrum(w).unwrap();
                let minus = m.prior_spectrum(-w).unwrap();
                assert!(plus > 0.0);
                assert_eq!(plus, minus);
            }
        }
    }

    #[test]
    fn opo_correlations_match_closed_form() {
        // Coherent beam: zero correlations.
        let coherent = OpoSqueezed::new(1.0, 1.0, 1.0, 4.0, 0.3).unwrap();
        for &t in &[0.0, 0.2, 1.0] {
            let (tp, tm) = coherent.correlations(t);
            assert_eq!(tp, 0.0);
            assert_eq!(tm, 0.0);
        }

        // T-(0) = (R- - 1)(1 + x) gamma / 4.
        let beam = OpoSqueezed::new(0.0, 2.5, 0.5, 4.0, 0.5).unwrap();
        let (_, tm0) = beam.correlations(0.0);
        assert!((tm0 - (-0.75)).abs() < 1e-15);

        // Even in t, exponential decay law.
        let (tp_pos, _) = beam.correlations(0.25);
        let (tp_neg, _) = beam.correlations(-0.25);
        assert_eq!(tp_pos, tp_neg);
        let (tp0, _) = beam.correlations(0.0);
        let (tp1, _) = beam.correlations(1.0 / beam.gamma());
        assert!((tp1 / tp0 - (-(1.0 - beam.x()) / 2.0).exp()).abs() < 1e-14);
    }

    #[test]
    fn quadrature_spectra_match_correlation_transform() {
        // T~(0) = R - 1 for both quadratures.
        let beam = OpoSqueezed::new(1.0, 3.0, 0.5, 2.0, 0.25).unwrap();
        let (sp, sm) = beam.quadrature_spectra();
        assert!((sp.eval(0.0) - (beam.r_plus() - 1.0)).abs() < 1e-14);
        assert!((sm.eval(0.0) - (beam.r_minus() - 1.0)).abs() < 1e-14);

        // Integral identity: (1/2pi) Int T~ = T(0).
        let (tp0, tm0) = beam.correlations(0.0);
        assert!((sp.time_domain_at_zero().unwrap() - tp0).abs() < 1e-8 * tp0.abs());
        assert!((sm.time_domain_at_zero().unwrap() - tm0).abs() < 1e-8 * tm0.abs());
    }

    #[test]
    fn photon_flux_values() {
        assert_eq!(
            BeamModel::coherent(2.0).unwrap().photon_flux().unwrap(),
            4.0
        );
        let beam = OpoSqueezed::new(0.0, 2.0, 1.0, 16.0, 0.0).unwrap();
        assert!((beam.photon_flux().unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pure_beam_flux_dominates_mean_field() {
        // For pure beams N >= alpha^2, equality only without squeezing.
        for &r_minus in &[0.2, 0.5, 0.9] {
            let beam = OpoSqueezed::pure(1.5, r_minus, 3.0).unwrap();
            assert!(beam.photon_flux().unwrap() > 1.5 * 1.5);
        }
        let none = OpoSqueezed::pure(1.5, 1.0, 3.0).unwrap();
        assert!((none.photon_flux().unwrap() - 2.25).abs() < 1e-15);
    }

    #[test]
    fn general_flux_matches_opo_flux() {
        let beam = OpoSqueezed::new(1.2, 4.0, 0.3, 5.0, 0.35).unwrap();
        let general = beam.to_general();
        let n_opo = beam.photon_flux().unwrap();
        let n_general = general.photon_flux().unwrap();
        assert!(
            (n_opo - n_general).abs() < 1e-6 * n_opo,
            "opo {n_opo} vs general {n_general}"
        );
    }

    #[test]
    fn rejects_nonphysical_parameters() {
        assert!(OpoSqueezed::new(0.0, 1.5, 0.5, 1.0, 0.0).is_err()); // R+ R- < 1
        assert!(OpoSqueezed::new(0.0, 0.9, 1.0, 1.0, 0.0).is_err()); // R+ < 1
        assert!(OpoSqueezed::new(0.0, 2.0, 1.5, 1.0, 0.0).is_err()); // R- > 1
        assert!(OpoSqueezed::new(0.0, 2.0, 0.5, -1.0, 0.0).is_err()); // gamma < 0
        assert!(OpoSqueezed::new(0.0, 2.0, 0.5, 1.0, 1.0).is_err()); // x = 1
    }

    #[test]
    fn mixed_to_pure_is_idempotent_on_pure_beams() {
        let pure = OpoSqueezed::pure(0.7, 0.5, 2.0).unwrap();
        let (again, classical) = pure.mixed_to_pure().unwrap();
        assert!((again.r_plus() - pure.r_plus()).abs() < 1e-14);
        assert!((again.gamma() - pure.gamma()).abs() < 1e-14);
        assert!((again.x() - pure.x()).abs() < 1e-14);
        for &w in &[0.0, 0.5, 2.0, 10.0] {
            assert!(classical.eval(w).abs() < 1e-13);
        }
    }

    #[test]
    fn mixed_to_pure_relations() {
        // R+ = 4, R- = 0.5 -> R+^Q = 2, x^Q = (sqrt 2 - 1)/(sqrt 2 + 1).
        let beam = OpoSqueezed::new(0.0, 4.0, 0.5, 2.0, 0.2).unwrap();
        let (pure, classical) = beam.mixed_to_pure().unwrap();
        assert!((pure.r_plus() - 2.0).abs() < 1e-14);
        let expected_x = (2f64.sqrt() - 1.0) / (2f64.sqrt() + 1.0);
        assert!((pure.x() - expected_x).abs() < 1e-14);

        // gamma (1 + x) is preserved exactly.
        assert!(
            (pure.gamma() * (1.0 + pure.x()) - beam.gamma() * (1.0 + beam.x())).abs() < 1e-14
        );

        // Classical noise is pointwise nonnegative.
        for k in 0..400 {
            let w = 0.05 * k as f64;
            assert!(
                classical.eval(w) >= -1e-12,
                "negative classical noise at {w}"
            );
        }

        // The squeezed spectrum is untouched: T~-^Q == T~-.
        let (_, sm) = beam.quadrature_spectra();
        let (_, sm_q) = pure.quadrature_spectra();
        for &w in &[0.0, 1.0, 3.0, 8.0] {
            assert!((sm.eval(w) - sm_q.eval(w)).abs() < 1e-13);
        }
    }

    #[test]
    fn mixed_to_pure_rejects_narrow_mixed_beams() {
        // Wideband physicality fails when the pump is too strong for the
        // declared antisqueezing.
        let beam = OpoSqueezed::new(0.0, 1.2, 0.9, 2.0, 0.8).unwrap();
        assert!(beam.mixed_to_pure().is_err());
    }

    #[test]
    fn spectrum_grid_interpolation_and_tail() {
        let values: Vec<f64> = (0..101).map(|k| 1.0 / (1.0 + (0.1 * k as f64).powi(2))).collect();
        let s = Spectrum::from_grid(0.1, values, -2.0, vec![1.0]);
        // Interior: linear interpolation between samples.
        let mid = s.eval(0.05);
        assert!((mid - 0.5 * (1.0 + 1.0 / 1.01)).abs() < 1e-12);
        // Beyond cutoff: matched power-law tail, continuous at the cutoff.
        let at_cut = s.eval(10.0);
        let beyond = s.eval(20.0);
        assert!((beyond - at_cut * (10.0 / 20.0) * (10.0 / 20.0)).abs() < 1e-12);
        // Evenness by construction.
        assert_eq!(s.eval(-3.3), s.eval(3.3));
    }

    #[test]
    fn lorentzian_integral() {
        // Int peak w^2/(w^2+omega^2) over R = pi peak w.
        let s = Spectrum::lorentzian(2.0, 3.0);
        let expected = std::f64::consts::PI * 2.0 * 3.0;
        assert!((s.integral().unwrap() - expected).abs() < 1e-7 * expected);
    }

    #[test]
    fn constant_spectrum_has_no_integral() {
        assert!(Spectrum::constant(4.0).integral().is_err());
    }
}
