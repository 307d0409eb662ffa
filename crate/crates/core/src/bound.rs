//! Mean-square-error lower bounds.
//!
//! The central quantity is `F^-1(0) = (1/2pi) Int dw / (Fc~(w) + Fq~(w))`:
//! the stationary Cramér-Rao floor on the MSE of any unbiased estimate of
//! the phase waveform. It is evaluated by adaptive quadrature with an
//! analytic power-law tail correction, alongside closed forms and the
//! analytic stochastic-Heisenberg lower-bound construction.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad;
use crate::spectra::{Spectrum, Tail};

/// Information-spectrum level multiplier in the analytic lower bound.
pub const ZETA: f64 = 17.0 / 4.0;

/// Result of the quadrature bound evaluation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundResult {
    /// The MSE lower bound `F^-1(0)` in rad^2.
    pub value: f64,
    /// Bound on quadrature plus tail-truncation error.
    pub abs_error_estimate: f64,
    /// Analytic contribution of the integrand tail beyond the cutoff.
    pub tail_correction: f64,
    /// Frequency where quadrature stopped and the tail took over.
    pub cutoff: f64,
    /// Number of integrand evaluations.
    pub evaluations: usize,
}

/// `F^-1(0)` for the combined classical + quantum Fisher spectrum.
///
/// `fc + fq` must be strictly positive away from dc and grow at least like
/// `|omega|^p`, `p > 1`, so the integrand tail is integrable. Delta spikes
/// in the inputs carry no weight here (they suppress the integrand on a
/// measure-zero set only).
pub fn crb_mse(fc: &Spectrum, fq: &Spectrum) -> Result<BoundResult> {
    crb_mse_with_min_cutoff(fc, fq, 0.0)
}

/// Same as [`crb_mse`] but never stops the quadrature before `min_cutoff`;
/// used to verify cutoff-independence of the result.
pub fn crb_mse_with_min_cutoff(fc: &Spectrum, fq: &Spectrum, min_cutoff: f64) -> Result<BoundResult> {
    // Leading growth of the denominator.
    let lead = dominant_tail(fc.tail(), fq.tail())?;

    let nonpositive_at = Cell::new(None::<f64>);
    let integrand = |w: f64| {
        let den = fc.eval(w) + fq.eval(w);
        if den <= 0.0 && w != 0.0 && nonpositive_at.get().is_none() {
            nonpositive_at.set(Some(w));
        }
        1.0 / den
    };

    // Scales: spectral features plus the knee where the growing tail
    // overtakes the dc level of the denominator.
    let mut scales: Vec<f64> = fc
        .scales()
        .iter()
        .chain(fq.scales())
        .copied()
        .filter(|s| *s > 0.0)
        .collect();
    let dc_level = fc.eval(0.0) + fq.eval(0.0);
    if dc_level > 0.0 {
        scales.push((dc_level / lead.coeff).powf(1.0 / lead.power));
    }
    let scale_max = scales.iter().copied().fold(0.0f64, f64::max);
    if !(scale_max > 0.0) {
        return Err(Error::Domain(
            "denominator vanishes at dc and carries no frequency scale; \
             the bound integral diverges"
                .into(),
        ));
    }

    let mut cutoff = (16.0 * scale_max).max(min_cutoff);
    let seeds = quad::log_seeds(&scales, 0.0, cutoff);
    let first = quad::integrate_adaptive(&integrand, 0.0, cutoff, &seeds, 1e-10, 0.0)?;
    let mut half_line = first.value;
    let mut quad_err = first.abs_err;
    let mut evaluations = first.evaluations;

    // Extend until the analytic tail estimate is negligible relative to the
    // accumulated value.
    let tail_leading = |omega: f64| omega.powf(1.0 - lead.power) / (lead.coeff * (lead.power - 1.0));
    for _ in 0..200 {
        let tail = tail_leading(cutoff);
        if tail <= 1e-8 * (half_line + tail) {
            break;
        }
        let next = (cutoff * 4.0).min(f64::MAX / 8.0);
        let seg = quad::integrate_adaptive(&integrand, cutoff, next, &[], 1e-10, 0.0)?;
        half_line += seg.value;
        quad_err += seg.abs_err;
        evaluations += seg.evaluations;
        cutoff = next;
    }

    if let Some(w) = nonpositive_at.get() {
        return Err(Error::Domain(format!(
            "combined Fisher spectrum is not strictly positive at omega = {w:.6e}"
        )));
    }

    // Analytic tail with a second-order denominator correction:
    // 1/(C w^p + B) ~ (1/C) w^-p - (B/C^2) w^-2p.
    let b_eff = fc.eval(cutoff) + fq.eval(cutoff) - lead.coeff * cutoff.powf(lead.power);
    let p = lead.power;
    let c = lead.coeff;
    let tail_first = tail_leading(cutoff);
    let tail_second = b_eff / (c * c) * cutoff.powf(1.0 - 2.0 * p) / (2.0 * p - 1.0);
    let tail_correction = (tail_first - tail_second).max(0.0) / PI;

    // Error budget for the truncated expansion: the next order, plus the
    // decaying (non-constant) remnant of fq treated as if it were constant.
    let decay_remnant = (fq.eval(cutoff) - fq.floor()).abs();
    let tail_err = (b_eff * b_eff / (c * c * c) * cutoff.powf(1.0 - 3.0 * p) / (3.0 * p - 1.0))
        .abs()
        / PI
        + (decay_remnant / (c * c) * cutoff.powf(1.0 - 2.0 * p) / (2.0 * p - 1.0)).abs() / PI;

    let value = half_line / PI + tail_correction;
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::Domain(format!("bound evaluated to {value}")));
    }
    Ok(BoundResult {
        value,
        abs_error_estimate: quad_err / PI + tail_err,
        tail_correction,
        cutoff,
        evaluations,
    })
}

fn dominant_tail(a: Tail, b: Tail) -> Result<Tail> {
    let lead = match (a.coeff != 0.0, b.coeff != 0.0) {
        (true, true) => {
            if a.power >= b.power {
                a
            } else {
                b
            }
        }
        (true, false) => a,
        (false, true) => b,
        (false, false) => Tail::ZERO,
    };
    if !(lead.power > 1.0) || !(lead.coeff > 0.0) {
        return Err(Error::Domain(format!(
            "combined spectrum grows like {:.3e} * w^{}; need a positive power > 1 \
             for an integrable bound tail",
            lead.coeff, lead.power
        )));
    }
    Ok(lead)
}

/// Closed form for `(1/pi) Int_0^inf kappa^(p-1) dw / (w^p + b)`:
/// `kappa^(p-1) * b^(1/p - 1) / (p sin(pi/p))`.
pub fn powerlaw_constant_integral(p: f64, b: f64, kappa: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::invalid("p", format!("must be > 1, got {p}")));
    }
    if !(b > 0.0) {
        return Err(Error::invalid("b", format!("must be positive, got {b}")));
    }
    Ok(kappa.powf(p - 1.0) * b.powf(1.0 / p - 1.0) / (p * (PI / p).sin()))
}

/// Parameters of the mean-field bound closed form.
#[derive(Debug, Clone, Copy)]
pub struct MeanFieldParams {
    pub alpha: f64,
    pub r_plus: f64,
    pub x: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanFieldBound {
    pub value: f64,
    /// Set when the discriminant went negative and the value came from
    /// quadrature over the mean-field spectrum instead of the closed form.
    pub fallback: bool,
    pub discriminant: f64,
}

/// Closed form for the MSE bound retaining mean-field information only.
///
/// Falls back to quadrature when the root discriminant is negative
/// (strong-squeezing regime where the quartic roots form a complex pair);
/// the result is flagged, not extrapolated.
pub fn mean_field_bound_closed_form(params: MeanFieldParams) -> Result<MeanFieldBound> {
    let MeanFieldParams {
        alpha,
        r_plus,
        x,
        gamma,
        kappa,
        lambda,
    } = params;
    if !(r_plus >= 1.0) {
        return Err(Error::invalid("r_plus", "must be >= 1"));
    }
    if !(kappa > 0.0) || !(gamma > 0.0) || !(lambda >= 0.0) || !(0.0..1.0).contains(&x) {
        return Err(Error::invalid("params", "kappa, gamma > 0; lambda >= 0; x in [0, 1)"));
    }
    let g = (1.0 - x) * gamma / 2.0;
    let a = 4.0 * alpha * alpha * kappa + lambda * lambda;
    let d = 4.0 * kappa * alpha * alpha * (r_plus - 1.0) * g * g;
    let discriminant = (a - g * g) * (a - g * g) - 4.0 * d;

    if discriminant >= 0.0 {
        // Larger root from the sum, smaller from the product Xi+ Xi- =
        // a g^2 + d, which stays accurate when the roots are far apart.
        let xi_plus = 0.5 * (a + g * g + discriminant.sqrt());
        let xi_minus = (a * g * g + d) / xi_plus;
        let value = (kappa / 2.0) * (1.0 + g * g / (xi_plus * xi_minus).sqrt())
            / (xi_plus.sqrt() + xi_minus.sqrt());
        Ok(MeanFieldBound {
            value,
            fallback: false,
            discriminant,
        })
    } else {
        let fc = crate::spectra::PhaseNoiseModel::ornstein_uhlenbeck(kappa, lambda)?
            .classical_fisher_spectrum();
        let fq = crate::fisher::mean_field_spectrum_from_params(alpha, r_plus, x, gamma);
        let value = crb_mse(&fc, &fq)?.value;
        Ok(MeanFieldBound {
            value,
            fallback: true,
            discriminant,
        })
    }
}

/// Analytic stochastic-Heisenberg lower bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HlbResult {
    /// The bound value in rad^2.
    pub value: f64,
    /// Information-spectrum level solving the balance equation.
    pub mu: f64,
    /// Relative residual of the balance equation at `mu`.
    pub residual: f64,
    pub zeta: f64,
    /// `16 pi N^2`, the integral of the self-convolution spectrum.
    pub cal_i: f64,
}

/// Solves `(I/mu)^p = kappa^(p-1) (zeta N + mu)` for the unique positive
/// root (left side strictly decreasing, right side strictly increasing)
/// and evaluates `kappa^(p-1) / (2 pi [kappa^(p-1) (zeta N + mu)]^(1-1/p))`.
pub fn heisenberg_lower_bound(p: f64, kappa: f64, flux: f64) -> Result<HlbResult> {
    if !(p > 1.0) {
        return Err(Error::invalid("p", format!("must be > 1, got {p}")));
    }
    if !(kappa > 0.0) || !(flux > 0.0) {
        return Err(Error::invalid("flux", "kappa and N must be positive"));
    }
    let cal_i = 16.0 * PI * flux * flux;
    let ln_kp = (p - 1.0) * kappa.ln();

    // Signed log-residual, strictly decreasing in ln(mu).
    let balance = |ln_mu: f64| -> f64 {
        let mu = ln_mu.exp();
        p * (cal_i.ln() - ln_mu) - (ln_kp + (ZETA * flux + mu).ln())
    };

    // Bracket around the Theta-estimate mu0 = N (N/kappa)^((p-1)/(p+1)).
    let mu0 = flux * (flux / kappa).powf((p - 1.0) / (p + 1.0));
    let mut lo = mu0.ln() - 3.0 * std::f64::consts::LN_10;
    let mut hi = mu0.ln() + 3.0 * std::f64::consts::LN_10;
    let mut expand = 0;
    while balance(lo) < 0.0 {
        lo -= 7.0;
        expand += 1;
        if expand > 100 {
            return Err(Error::RootFinding("cannot bracket mu from below".into()));
        }
    }
    while balance(hi) > 0.0 {
        hi += 7.0;
        expand += 1;
        if expand > 200 {
            return Err(Error::RootFinding("cannot bracket mu from above".into()));
        }
    }

    let mut mu = mu0;
    let mut residual = f64::INFINITY;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if balance(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        mu = (0.5 * (lo + hi)).exp();
        let lhs = (cal_i / mu).powf(p);
        let rhs = kappa.powf(p - 1.0) * (ZETA * flux + mu);
        residual = (lhs - rhs).abs() / rhs;
        if residual <= 1e-12 {
            break;
        }
    }
    if !(residual <= 1e-10) {
        return Err(Error::RootFinding(format!(
            "mu residual {residual:.3e} above tolerance"
        )));
    }

    let denom = kappa.powf(p - 1.0) * (ZETA * flux + mu);
    let value = kappa.powf(p - 1.0) / (2.0 * PI * denom.powf(1.0 - 1.0 / p));
    Ok(HlbResult {
        value,
        mu,
        residual,
        zeta: ZETA,
        cal_i,
    })
}

/// Ordinary least-squares fit of `log bound` against `log N`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Whether the lowest decade was dropped for excess curvature.
    pub excluded_low_decade: bool,
}

/// Fits the scaling exponent of `bound_fn` over a geometric grid of flux
/// values spanning at least four decades with at least five points.
pub fn scaling_exponent_fit<F>(
    bound_fn: F,
    n_min: f64,
    n_max: f64,
    points: usize,
) -> Result<ScalingFit>
where
    F: Fn(f64) -> Result<f64>,
{
    if points < 5 {
        return Err(Error::invalid("points", "need at least 5 points"));
    }
    if !(n_min > 0.0) || !(n_max / n_min >= 1e4) {
        return Err(Error::invalid(
            "n_range",
            "grid must be positive and span at least four decades",
        ));
    }
    let ratio = (n_max / n_min).powf(1.0 / (points - 1) as f64);
    let mut data = Vec::with_capacity(points);
    for i in 0..points {
        let n = n_min * ratio.powi(i as i32);
        let b = bound_fn(n)?;
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Domain(format!("bound at N = {n} is {b}")));
        }
        data.push((n.ln(), b.ln()));
    }

    let (fit, curvature) = ols_with_curvature(&data);
    if curvature.abs() > 1e-2 {
        let cut = (n_min * 10.0).ln();
        let trimmed: Vec<(f64, f64)> = data.iter().copied().filter(|(x, _)| *x >= cut).collect();
        if trimmed.len() >= 5 {
            let (fit2, _) = ols_with_curvature(&trimmed);
            return Ok(ScalingFit {
                excluded_low_decade: true,
                ..fit2
            });
        }
    }
    Ok(fit)
}

/// Returns the line fit plus the quadratic coefficient of a parabola fit
/// (as `d^2 log B / d log N^2`), used to detect non-asymptotic curvature.
fn ols_with_curvature(data: &[(f64, f64)]) -> (ScalingFit, f64) {
    let n = data.len() as f64;
    let mean_x = data.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = data.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in data {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = data
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };

    // Quadratic fit in centered coordinates for the curvature measure.
    let (mut s2, mut s3, mut s4, mut sy, mut sy1, mut sy2) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y) in data {
        let z = x - mean_x;
        let yc = y - mean_y;
        s2 += z * z;
        s3 += z * z * z;
        s4 += z * z * z * z;
        sy += yc;
        sy1 += z * yc;
        sy2 += z * z * yc;
    }
    // Normal equations for yc = a + b z + c z^2.
    let m = [[n, 0.0, s2], [0.0, s2, s3], [s2, s3, s4]];
    let rhs = [sy, sy1, sy2];
    let c2 = solve3(m, rhs).map(|sol| sol[2]).unwrap_or(0.0);

    (
        ScalingFit {
            slope,
            intercept,
            r_squared,
            excluded_low_decade: false,
        },
        2.0 * c2,
    )
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (entry, pivot) in m[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *entry -= f * pivot;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in (row + 1)..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}
