//! Quantum Fisher information spectra of stationary Gaussian beams.
//!
//! For OPO beams the spectrum has a Lorentzian closed form; for general
//! beams it is assembled from the quadrature correlation spectra by
//! self-convolution (FFT-based, with mean-induced delta spikes handled
//! analytically):
//!
//! ```text
//! Fq~(w) = 4 N + f~(w) - g~(w)
//! f~ = (1/4pi) (H~ * H~),            H~ = hX~ + hY~ + 2pi M^2 delta
//! g~ = (1/2pi) [hX~ * hY~ - hXY~ * hXY~] + mean cross terms + pi M^4 delta
//! ```
//!
//! where `M^2 = <X>^2 + <Y>^2`. The white floor `4N` is kept symbolic so
//! bound integrals never lose it to grid truncation.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft;
use crate::spectra::{BeamModel, GeneralBeam, OpoSqueezed, PhaseNoiseModel, Spectrum, Tail};

/// Classical and quantum Fisher spectra for a phase/beam pair.
#[derive(Debug, Clone)]
pub struct FisherSpectra {
    /// Classical contribution `1/Sigma~(omega)` from the prior.
    pub fc: Spectrum,
    /// Quantum contribution `Fq~(omega)` from the beam.
    pub fq: Spectrum,
    /// Photon flux in photons/s.
    pub flux: f64,
}

impl FisherSpectra {
    pub fn build(phase: &PhaseNoiseModel, beam: &BeamModel) -> Result<Self> {
        let fc = phase.classical_fisher_spectrum();
        let (fq, flux) = match beam {
            BeamModel::Coherent { alpha } => {
                (Spectrum::constant(4.0 * alpha * alpha), alpha * alpha)
            }
            BeamModel::Opo(opo) => (opo_quantum_fisher_spectrum(opo)?, opo.photon_flux()?),
            BeamModel::General(general) => {
                let parts = general_fisher_parts(general, &GridSpec::default())?;
                let flux = parts.flux;
                (parts.fq, flux)
            }
        };
        Ok(FisherSpectra { fc, fq, flux })
    }
}

/// Closed-form quantum Fisher spectrum of an OPO beam:
///
/// `4N + 4 a^2 (R+ - 1) w+^2/(w+^2 + w^2)
///     + (R+ - 1)^2 w+^3 / 2 / (4 w+^2 + w^2)
///     + (R- - 1)^2 w-^3 / 2 / (4 w-^2 + w^2)`
///
/// with `w+- = (1 -+ x) gamma / 2` the quadrature Lorentzian half-widths.
pub fn opo_quantum_fisher_spectrum(beam: &OpoSqueezed) -> Result<Spectrum> {
    let flux = beam.photon_flux()?;
    let (w_plus, w_minus) = beam.half_widths();
    let mean_peak = 4.0 * beam.alpha() * beam.alpha() * (beam.r_plus() - 1.0);
    let conv_plus = (beam.r_plus() - 1.0).powi(2) * w_plus.powi(3) / 2.0;
    let conv_minus = (beam.r_minus() - 1.0).powi(2) * w_minus.powi(3) / 2.0;

    let tail_coeff =
        mean_peak * w_plus * w_plus + conv_plus + conv_minus;
    let scales = vec![w_plus, w_minus, 2.0 * w_plus, 2.0 * w_minus];
    let spectrum = Spectrum::from_fn(
        move |omega| {
            let o2 = omega * omega;
            mean_peak * w_plus * w_plus / (w_plus * w_plus + o2)
                + conv_plus / (4.0 * w_plus * w_plus + o2)
                + conv_minus / (4.0 * w_minus * w_minus + o2)
        },
        2.0 * w_plus.max(w_minus) * crate::spectra::CUTOFF_WIDTHS,
        crate::spectra::Tail {
            coeff: tail_coeff,
            power: -2.0,
        },
        scales,
    );
    Ok(spectrum.with_floor(4.0 * flux))
}

/// The alpha^2-proportional terms only: information carried by the mean
/// field, `4 a^2 [1 + (R+ - 1) g^2 / (g^2 + w^2)]` with `g = (1-x) gamma/2`.
pub fn mean_field_fisher_spectrum(beam: &OpoSqueezed) -> Spectrum {
    mean_field_spectrum_from_params(beam.alpha(), beam.r_plus(), beam.x(), beam.gamma())
}

/// Mean-field spectrum from raw parameters (no squeezing level needed).
pub fn mean_field_spectrum_from_params(alpha: f64, r_plus: f64, x: f64, gamma: f64) -> Spectrum {
    let a2 = alpha * alpha;
    let g = (1.0 - x) * gamma / 2.0;
    if r_plus == 1.0 {
        Spectrum::constant(4.0 * a2).with_scales(vec![g])
    } else {
        Spectrum::lorentzian(4.0 * a2 * (r_plus - 1.0), g).with_floor(4.0 * a2)
    }
}

/// Grid policy for the convolution pipeline. The default resolves the
/// narrowest Lorentzian half-width by 32 points and extends to 4096 times
/// the widest (the declared tail there is below 1e-7 of the peak);
/// `refined(r)` divides the spacing by `r` and stretches the cutoff by
/// `sqrt(r)`, so truncation error falls strictly with `r`.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    refinement: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { refinement: 1 }
    }
}

impl GridSpec {
    pub fn refined(refinement: u32) -> Self {
        assert!(refinement >= 1);
        GridSpec { refinement }
    }

    fn build(&self, spectra: &[&Spectrum]) -> Result<ConvGrid> {
        let mut min_scale = f64::INFINITY;
        let mut max_scale = 0.0f64;
        for s in spectra {
            for &w in s.scales() {
                if w > 0.0 && w.is_finite() {
                    min_scale = min_scale.min(w);
                    max_scale = max_scale.max(w);
                }
            }
        }
        if !(max_scale > 0.0) || !min_scale.is_finite() {
            return Err(Error::Domain(
                "beam spectra carry no frequency scale to build a grid from".into(),
            ));
        }
        let r = self.refinement as f64;
        let step = min_scale / (32.0 * r);
        let cutoff = 4096.0 * max_scale * r.sqrt();
        let n = (cutoff / step).ceil() as usize + 1;
        if n > (1 << 24) {
            return Err(Error::Domain(format!(
                "grid of {n} points exceeds the supported size; \
                 scale ratio {:.1} too large",
                max_scale / min_scale
            )));
        }
        Ok(ConvGrid { step, n })
    }
}

#[derive(Debug, Clone, Copy)]
struct ConvGrid {
    step: f64,
    n: usize,
}

impl ConvGrid {
    fn sample(&self, s: &Spectrum) -> Result<Vec<f64>> {
        if s.floor() != 0.0 {
            return Err(Error::Domain(
                "beam correlation spectra must not carry a white floor".into(),
            ));
        }
        Ok((0..self.n)
            .map(|k| s.continuous_at(k as f64 * self.step))
            .collect())
    }
}

/// Frequency-domain data of one symmetrized sequence, ready for pairwise
/// convolution.
struct SpectrumFft {
    re: Vec<f64>,
    im: Vec<f64>,
}

struct ConvPlan {
    n: usize,
    len: usize,
    step: f64,
}

impl ConvPlan {
    fn new(grid: &ConvGrid) -> Self {
        let m = 2 * grid.n - 1; // symmetric extension length
        ConvPlan {
            n: grid.n,
            len: fft::next_pow2(2 * m),
            step: grid.step,
        }
    }

    fn forward(&self, half: &[f64]) -> SpectrumFft {
        let mut re = vec![0.0; self.len];
        let mut im = vec![0.0; self.len];
        // Even extension: buf[i] = a[|i - (n-1)|] for i in [0, 2n-2].
        for i in 0..(2 * self.n - 1) {
            re[i] = half[(i as isize - (self.n as isize - 1)).unsigned_abs()];
        }
        fft::fft_inplace(&mut re, &mut im, false);
        SpectrumFft { re, im }
    }

    /// `(1/2pi) (a~ * b~)(k step)` for `k in [0, n)`: product of transforms,
    /// inverse FFT, Riemann weight `step`, centered at index `2(n-1)`.
    fn convolve(&self, a: &SpectrumFft, b: &SpectrumFft) -> Vec<f64> {
        let mut re = vec![0.0; self.len];
        let mut im = vec![0.0; self.len];
        for i in 0..self.len {
            re[i] = a.re[i] * b.re[i] - a.im[i] * b.im[i];
            im[i] = a.re[i] * b.im[i] + a.im[i] * b.re[i];
        }
        fft::fft_inplace(&mut re, &mut im, true);
        let center = 2 * (self.n - 1);
        let scale = self.step / (2.0 * PI);
        (0..self.n).map(|k| re[center + k] * scale).collect()
    }
}

/// Raw pipeline products on the convolution grid, shared by the Fisher
/// assembly and the physicality checks.
struct RawParts {
    grid: ConvGrid,
    hx: Vec<f64>,
    hy: Vec<f64>,
    hxy: Vec<f64>,
    f_cont: Vec<f64>,
    g_cont: Vec<f64>,
    f_tail: Tail,
    g_tail: Tail,
    /// `(hX(0) + hY(0) + M^2) / 4`, sign-unchecked.
    raw_flux: f64,
    mean_sq: f64,
    scales: Vec<f64>,
}

fn convolved_parts(beam: &GeneralBeam, grid_spec: &GridSpec) -> Result<RawParts> {
    let grid = grid_spec.build(&[&beam.h_x, &beam.h_y, &beam.h_xy])?;
    let hx = grid.sample(&beam.h_x)?;
    let hy = grid.sample(&beam.h_y)?;
    let hxy = grid.sample(&beam.h_xy)?;
    let has_xy = hxy.iter().any(|v| *v != 0.0);

    let plan = ConvPlan::new(&grid);
    let fx = plan.forward(&hx);
    let fy = plan.forward(&hy);
    let conv_xx = plan.convolve(&fx, &fx);
    let conv_yy = plan.convolve(&fy, &fy);
    let conv_xy = plan.convolve(&fx, &fy);
    let conv_qq = if has_xy {
        let fq = plan.forward(&hxy);
        Some(plan.convolve(&fq, &fq))
    } else {
        None
    };

    let mx = beam.mean_x;
    let my = beam.mean_y;
    let mean_sq = mx * mx + my * my;

    let mut f_cont = Vec::with_capacity(grid.n);
    let mut g_cont = Vec::with_capacity(grid.n);
    for k in 0..grid.n {
        let h_sum = hx[k] + hy[k];
        // f~ = (1/4pi)(H * H): expand the square of hX + hY and the means.
        let conv_hh = conv_xx[k] + conv_yy[k] + 2.0 * conv_xy[k];
        f_cont.push(0.5 * conv_hh + mean_sq * h_sum);
        // g~ = (1/2pi)[hX * hY - hXY * hXY] + mean cross terms.
        let qq = conv_qq.as_ref().map_or(0.0, |c| c[k]);
        g_cont.push(conv_xy[k] - qq + mx * mx * hy[k] + my * my * hx[k] - 2.0 * mx * my * hxy[k]);
    }

    // Asymptotic tails from the inputs: the tail of (1/2pi)(a~ * b~) is
    // (1/2pi)(c_a Int b~ + c_b Int a~) / w^2, exact for Lorentzian inputs.
    let ix = beam.h_x.integral()?;
    let iy = beam.h_y.integral()?;
    let iq = beam.h_xy.integral()?;
    let cx = beam.h_x.tail().coeff;
    let cy = beam.h_y.tail().coeff;
    let cq = beam.h_xy.tail().coeff;
    let f_tail = Tail {
        coeff: (cx + cy) * ((ix + iy) / (2.0 * PI) + mean_sq),
        power: -2.0,
    };
    let g_tail = Tail {
        coeff: (cx * iy + cy * ix - 2.0 * cq * iq) / (2.0 * PI) + mx * mx * cy + my * my * cx
            - 2.0 * mx * my * cq,
        power: -2.0,
    };
    let raw_flux = ((ix + iy) / (2.0 * PI) + mean_sq) / 4.0;

    let scales: Vec<f64> = beam
        .h_x
        .scales()
        .iter()
        .chain(beam.h_y.scales())
        .chain(beam.h_xy.scales())
        .copied()
        .collect();

    Ok(RawParts {
        grid,
        hx,
        hy,
        hxy,
        f_cont,
        g_cont,
        f_tail,
        g_tail,
        raw_flux,
        mean_sq,
        scales,
    })
}

/// Intermediate products of the general-beam pipeline, exposed so the
/// spectral checks and the `Int f~ = 16 pi N^2` identity can reuse them.
#[derive(Debug, Clone)]
pub struct GeneralFisherParts {
    pub f_tilde: Spectrum,
    pub g_tilde: Spectrum,
    pub fq: Spectrum,
    pub flux: f64,
    /// `Int f~ dw` over the whole line, spike and tail included.
    pub f_integral: f64,
}

/// Builds `f~`, `g~`, and the quantum Fisher spectrum of a general beam on
/// the convolution grid.
pub fn general_fisher_parts(beam: &GeneralBeam, grid_spec: &GridSpec) -> Result<GeneralFisherParts> {
    let parts = convolved_parts(beam, grid_spec)?;
    let flux = beam.photon_flux()?;
    let fq_cont: Vec<f64> = parts
        .f_cont
        .iter()
        .zip(&parts.g_cont)
        .map(|(f, g)| f - g)
        .collect();

    // Bochner positivity of the resulting spectrum (the pi M^4 spikes of f~
    // and g~ cancel exactly, so the continuous part carries everything).
    let floor = 4.0 * flux;
    let max_abs = fq_cont
        .iter()
        .map(|c| (floor + c).abs())
        .fold(0.0f64, f64::max);
    let tolerance = 1e-8 * max_abs;
    let (argmin, min) = fq_cont
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, v)| (k as f64 * parts.grid.step, *v))
        .unwrap();
    if min < -tolerance {
        return Err(Error::BochnerViolation {
            min,
            at_omega: argmin,
            tolerance,
        });
    }

    let spike = PI * parts.mean_sq * parts.mean_sq;
    let f_tilde = Spectrum::from_grid_with_tail(
        parts.grid.step,
        parts.f_cont,
        parts.f_tail,
        parts.scales.clone(),
    )
    .with_spike(0.0, spike);
    let g_tilde = Spectrum::from_grid_with_tail(
        parts.grid.step,
        parts.g_cont,
        parts.g_tail,
        parts.scales.clone(),
    )
    .with_spike(0.0, spike);
    let f_integral = f_tilde.integral()?;
    let fq_tail = Tail {
        coeff: parts.f_tail.coeff - parts.g_tail.coeff,
        power: -2.0,
    };
    let fq = Spectrum::from_grid_with_tail(parts.grid.step, fq_cont, fq_tail, parts.scales)
        .with_floor(floor);

    Ok(GeneralFisherParts {
        f_tilde,
        g_tilde,
        fq,
        flux,
        f_integral,
    })
}

/// Quantum Fisher spectrum `4N + f~ - g~` of a general beam.
pub fn general_quantum_fisher_spectrum(beam: &GeneralBeam, grid_spec: &GridSpec) -> Result<Spectrum> {
    Ok(general_fisher_parts(beam, grid_spec)?.fq)
}

/// One physicality check with its worst margin over the grid.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationCheck {
    pub name: String,
    pub min_margin: f64,
    pub argmin_omega: f64,
}

/// Outcome of the spectral physicality checks; failures are carried in the
/// report rather than raised as errors.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&ValidationCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Validates a general beam against the spectral uncertainty principle and
/// its consequences: per-omega margins for
///
/// 1. `1 + hX~ >= 0` and `1 + hY~ >= 0` (variances not below vacuum),
/// 2. `[1 + hX~][1 + hY~] - hXY~^2 - 1 >= 0` (uncertainty inequality),
/// 3. `f~ >= 0` and `4N + g~ >= 0` (derived nonnegativity; the latter is
///    tight at dc for a pure squeezed vacuum).
///
/// Passing requires every margin above `-1e-9` times the check's scale.
/// Failures are reported, never raised.
pub fn validate_beam_spectrum(beam: &GeneralBeam, grid_spec: &GridSpec) -> Result<ValidationReport> {
    let parts = convolved_parts(beam, grid_spec)?;
    let n = parts.grid.n;
    let step = parts.grid.step;

    let margin_of = |values: Vec<f64>| -> (f64, f64) {
        values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, v)| (*v, k as f64 * step))
            .unwrap()
    };

    let (x_floor, x_at) = margin_of(parts.hx.iter().map(|h| 1.0 + h).collect());
    let (y_floor, y_at) = margin_of(parts.hy.iter().map(|h| 1.0 + h).collect());
    let (uncert, uncert_at) = margin_of(
        (0..n)
            .map(|k| {
                (1.0 + parts.hx[k]) * (1.0 + parts.hy[k]) - parts.hxy[k] * parts.hxy[k] - 1.0
            })
            .collect(),
    );
    let (f_min, f_at) = margin_of(parts.f_cont.clone());
    let (g_min, g_at) = margin_of(
        parts
            .g_cont
            .iter()
            .map(|g| 4.0 * parts.raw_flux + g)
            .collect(),
    );

    let scale_x = parts.hx.iter().fold(1.0f64, |m, h| m.max(h.abs()));
    let scale_y = parts.hy.iter().fold(1.0f64, |m, h| m.max(h.abs()));
    let scale_u = scale_x.max(scale_y).powi(2).max(1.0);
    let scale_f = parts.f_cont.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let scale_g = parts
        .g_cont
        .iter()
        .fold((4.0 * parts.raw_flux).abs().max(1.0), |m, v| m.max(v.abs()));
    let tol = 1e-9;

    let checks = vec![
        ValidationCheck {
            name: "x_variance_floor".into(),
            min_margin: x_floor,
            argmin_omega: x_at,
        },
        ValidationCheck {
            name: "y_variance_floor".into(),
            min_margin: y_floor,
            argmin_omega: y_at,
        },
        ValidationCheck {
            name: "spectral_uncertainty".into(),
            min_margin: uncert,
            argmin_omega: uncert_at,
        },
        ValidationCheck {
            name: "f_nonnegative".into(),
            min_margin: f_min,
            argmin_omega: f_at,
        },
        ValidationCheck {
            name: "g_above_flux_floor".into(),
            min_margin: g_min,
            argmin_omega: g_at,
        },
    ];

    let pass = x_floor >= -tol * scale_x.max(1.0)
        && y_floor >= -tol * scale_y.max(1.0)
        && uncert >= -tol * scale_u
        && f_min >= -tol * scale_f
        && g_min >= -tol * scale_g;

    Ok(ValidationReport { pass, checks })
}

/// Closed form for `(1/2pi)(L1~ * L2~)` of two Lorentzians given as
/// (peak, half-width): another Lorentzian with width `w1 + w2` and peak
/// `p1 p2 w1 w2 / (2 (w1 + w2))`. Serves as the convolution oracle.
pub fn lorentzian_convolution(peak1: f64, w1: f64, peak2: f64, w2: f64, omega: f64) -> f64 {
    let w = w1 + w2;
    let peak = peak1 * peak2 * w1 * w2 / (2.0 * w);
    peak * w * w / (w * w + omega * omega)
}
