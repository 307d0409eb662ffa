//! Dimensionless `p = 2` rescaling and the universal constant `C`.
//!
//! With flux measured by `N* = N / kappa` and starred parameters
//! `gamma = gamma* kappa N*^(5/6)`, `R+ = R* N*^(1/3)`,
//! `alpha^2 = alpha*^2 kappa N*`, `omega = omega* kappa N*^(2/3)`, the
//! `N* -> inf` limit of the rescaled bound `N*^(2/3) F^-1(0)` is
//!
//! ```text
//! C = (1/2pi) Int d omega* / (omega*^2 + Fq*~(omega*))
//! ```
//!
//! a function of `(gamma*, tau)` alone, where `tau = gamma* sqrt(R*) / 8`
//! fixes the split of flux between mean field (`alpha*^2 = 1 - tau`) and
//! squeezing. Its minimum over the admissible box is the constant `C0`.

use rayon::prelude::*;
use serde::Serialize;

use crate::bound::{crb_mse, BoundResult};
use crate::error::{Error, Result};
use crate::fisher::opo_quantum_fisher_spectrum;
use crate::spectra::{OpoSqueezed, PhaseNoiseModel, Spectrum, Tail};

/// Dimensionless parameters of the `p = 2` asymptotic family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarredParams {
    gamma_star: f64,
    tau: f64,
}

impl StarredParams {
    /// `gamma_star > 0`, `tau` in `[0, 1]`. `tau = 1` is squeezed vacuum,
    /// `tau = 0` the coherent slice.
    pub fn new(gamma_star: f64, tau: f64) -> Result<Self> {
        if !(gamma_star > 0.0) || !gamma_star.is_finite() {
            return Err(Error::invalid("gamma_star", "must be positive"));
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::invalid("tau", format!("must be in [0, 1], got {tau}")));
        }
        Ok(StarredParams { gamma_star, tau })
    }

    /// Equivalent parameterization through the antisqueezing scale `R*`,
    /// with `tau = gamma* sqrt(R*) / 8`.
    pub fn from_r_star(gamma_star: f64, r_star: f64) -> Result<Self> {
        if !(r_star >= 0.0) {
            return Err(Error::invalid("r_star", "must be nonnegative"));
        }
        StarredParams::new(gamma_star, gamma_star * r_star.sqrt() / 8.0)
    }

    pub fn gamma_star(&self) -> f64 {
        self.gamma_star
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `R* = (8 tau / gamma*)^2`, so that `gamma* sqrt(R*)/8 = tau` exactly.
    pub fn r_star(&self) -> f64 {
        let s = 8.0 * self.tau / self.gamma_star;
        s * s
    }

    /// Mean-field share of the flux, `alpha*^2 = 1 - tau`.
    pub fn alpha_star_sq(&self) -> f64 {
        1.0 - self.tau
    }
}

/// Rescaled quantum Fisher spectrum
/// `4 g*^2 a*^2 / (g*^2/R* + w*^2) + (g*^3 sqrt(R*)/2) / (4 g*^2/R* + w*^2)`.
///
/// At `tau = 0` the squeezing scale vanishes (`R* -> 0` widens the first
/// Lorentzian without bound while its weight vanishes); the slice is taken
/// as the coherent constant `4 alpha*^2` instead, which keeps the surface
/// finite at that edge and reproduces the coherent constant `1/4`.
pub fn starred_fisher(params: &StarredParams, omega_star: f64) -> f64 {
    let g = params.gamma_star;
    if params.tau == 0.0 {
        return 4.0 * params.alpha_star_sq();
    }
    let r_star = params.r_star();
    let o2 = omega_star * omega_star;
    let w1sq = g * g / r_star;
    let w2sq = 4.0 * g * g / r_star;
    4.0 * g * g * params.alpha_star_sq() / (w1sq + o2)
        + g.powi(3) * r_star.sqrt() / 2.0 / (w2sq + o2)
}

/// The spectrum object wrapping [`starred_fisher`].
pub fn starred_spectrum(params: &StarredParams) -> Spectrum {
    let p = *params;
    if p.tau == 0.0 {
        return Spectrum::constant(4.0 * p.alpha_star_sq()).with_scales(vec![p.gamma_star]);
    }
    let g = p.gamma_star;
    let r_star = p.r_star();
    let w1 = g / r_star.sqrt();
    let w2 = 2.0 * g / r_star.sqrt();
    let tail_coeff = 4.0 * g * g * p.alpha_star_sq() + g.powi(3) * r_star.sqrt() / 2.0;
    Spectrum::from_fn(
        move |w| starred_fisher(&p, w),
        w2 * crate::spectra::CUTOFF_WIDTHS,
        Tail {
            coeff: tail_coeff,
            power: -2.0,
        },
        vec![w1, w2],
    )
}

/// `C(gamma*, tau) = (1/2pi) Int d w* / (w*^2 + Fq*~)`, evaluated by the
/// bound quadrature engine with the `p = 2` tail.
pub fn c_value(params: &StarredParams) -> Result<BoundResult> {
    let fc = PhaseNoiseModel::power_law(2.0, 1.0)
        .expect("p = 2, kappa = 1 is valid")
        .classical_fisher_spectrum();
    crb_mse(&fc, &starred_spectrum(params))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OptimizeOutcome {
    pub gamma_star: f64,
    pub tau: f64,
    pub c_min: f64,
    /// Set when the minimizer sits on a search boundary other than tau = 1.
    pub boundary_hit: bool,
}

/// Minimizes `C` over the box by a coarse 64x32 scan followed by
/// Nelder-Mead refinement (tolerance 1e-6 in C).
pub fn optimize_c(gamma_range: (f64, f64), tau_range: (f64, f64)) -> Result<OptimizeOutcome> {
    let (g_lo, g_hi) = gamma_range;
    let (t_lo, t_hi) = tau_range;
    if !(g_hi > g_lo) && g_hi != g_lo {
        return Err(Error::invalid("gamma_range", "must be ordered"));
    }
    if !(g_hi > 0.0) || g_lo < 0.0 || t_lo < 0.0 || t_hi > 1.0 || t_hi < t_lo {
        return Err(Error::invalid(
            "ranges",
            "need gamma in (0, inf), tau within [0, 1]",
        ));
    }

    let eval = |g: f64, t: f64| -> f64 {
        match StarredParams::new(g, t).and_then(|p| c_value(&p)) {
            Ok(r) => r.value,
            Err(_) => f64::INFINITY,
        }
    };

    // Coarse scan; the gamma grid stays strictly inside (g_lo, g_hi] so a
    // zero lower edge is never evaluated.
    const G_CELLS: usize = 64;
    const T_CELLS: usize = 32;
    let cells: Vec<(f64, f64)> = (0..G_CELLS)
        .flat_map(|i| {
            let g = g_lo + (g_hi - g_lo) * (i + 1) as f64 / G_CELLS as f64;
            (0..T_CELLS).map(move |j| {
                let t = if T_CELLS == 1 {
                    t_lo
                } else {
                    t_lo + (t_hi - t_lo) * j as f64 / (T_CELLS - 1) as f64
                };
                (g, t)
            })
        })
        .collect();
    let scanned: Vec<f64> = cells.par_iter().map(|&(g, t)| eval(g, t)).collect();
    let (best_idx, &best_c) = scanned
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("scan grid nonempty");
    if !best_c.is_finite() {
        return Err(Error::Domain("every scan cell failed to evaluate".into()));
    }
    let (g0, t0) = cells[best_idx];

    // Nelder-Mead in the box; degenerate dimensions collapse the simplex
    // onto the admissible segment and stay there.
    let clamp = |p: [f64; 2]| -> [f64; 2] {
        [
            p[0].clamp(g_lo.max(1e-12 * g_hi.max(1.0)), g_hi),
            p[1].clamp(t_lo, t_hi),
        ]
    };
    let f = |p: [f64; 2]| eval(p[0], p[1]);
    let dg = ((g_hi - g_lo) / G_CELLS as f64).max(1e-9);
    let dt = if t_hi > t_lo {
        ((t_hi - t_lo) / T_CELLS as f64).max(1e-9)
    } else {
        0.0
    };
    let mut simplex = [
        clamp([g0, t0]),
        clamp([g0 + dg, t0]),
        clamp([g0, if t0 + dt <= t_hi { t0 + dt } else { t0 - dt }]),
    ];
    let mut values = [f(simplex[0]), f(simplex[1]), f(simplex[2])];

    for _ in 0..500 {
        // Order best -> worst.
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (bi, mi, wi) = (order[0], order[1], order[2]);
        if (values[wi] - values[bi]).abs() < 1e-6 {
            break;
        }
        let centroid = [
            0.5 * (simplex[bi][0] + simplex[mi][0]),
            0.5 * (simplex[bi][1] + simplex[mi][1]),
        ];
        let reflect = clamp([
            centroid[0] + (centroid[0] - simplex[wi][0]),
            centroid[1] + (centroid[1] - simplex[wi][1]),
        ]);
        let fr = f(reflect);
        if fr < values[bi] {
            let expand = clamp([
                centroid[0] + 2.0 * (centroid[0] - simplex[wi][0]),
                centroid[1] + 2.0 * (centroid[1] - simplex[wi][1]),
            ]);
            let fe = f(expand);
            if fe < fr {
                simplex[wi] = expand;
                values[wi] = fe;
            } else {
                simplex[wi] = reflect;
                values[wi] = fr;
            }
        } else if fr < values[mi] {
            simplex[wi] = reflect;
            values[wi] = fr;
        } else {
            let contract = clamp([
                centroid[0] + 0.5 * (simplex[wi][0] - centroid[0]),
                centroid[1] + 0.5 * (simplex[wi][1] - centroid[1]),
            ]);
            let fc = f(contract);
            if fc < values[wi] {
                simplex[wi] = contract;
                values[wi] = fc;
            } else {
                for k in 0..3 {
                    if k != bi {
                        simplex[k] = clamp([
                            0.5 * (simplex[k][0] + simplex[bi][0]),
                            0.5 * (simplex[k][1] + simplex[bi][1]),
                        ]);
                        values[k] = f(simplex[k]);
                    }
                }
            }
        }
    }

    let best = (0..3).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    let [gamma_star, tau] = simplex[best];
    let c_min = values[best];
    let g_tol = 1e-4 * (g_hi - g_lo).max(g_hi);
    let t_tol = 1e-4;
    let boundary_hit = (gamma_star - g_lo).abs() < g_tol
        || (g_hi - gamma_star).abs() < g_tol
        || ((tau - t_lo).abs() < t_tol && t_lo > 0.0)
        || ((t_hi - tau).abs() < t_tol && (t_hi - 1.0).abs() > 1e-12);
    Ok(OptimizeOutcome {
        gamma_star,
        tau,
        c_min,
        boundary_hit,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SurfaceCell {
    pub gamma_star: f64,
    pub tau: f64,
    /// `None` records a per-cell evaluation failure.
    pub c: Option<f64>,
}

/// Evaluates `C` on the product grid, cells independent and emitted in
/// row-major (gamma outer) order.
pub fn surface(gamma_grid: &[f64], tau_grid: &[f64]) -> Result<Vec<SurfaceCell>> {
    if gamma_grid.iter().any(|g| !(*g > 0.0) || !g.is_finite())
        || tau_grid.iter().any(|t| !t.is_finite())
    {
        return Err(Error::invalid("grid", "gamma entries must be positive and finite"));
    }
    let cells: Vec<(f64, f64)> = gamma_grid
        .iter()
        .flat_map(|&g| tau_grid.iter().map(move |&t| (g, t)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|&(gamma_star, tau)| SurfaceCell {
            gamma_star,
            tau,
            c: StarredParams::new(gamma_star, tau)
                .and_then(|p| c_value(&p))
                .ok()
                .map(|r| r.value),
        })
        .collect())
}

/// Un-starred bound at finite flux, rescaled by `N*^(2/3)`.
///
/// The beam is built from the starred parameters by the leading-order
/// pure-beam mapping `R- = 1/R+`, `x = 1 - 2/sqrt(R+)`, which is what the
/// `N* -> inf` limit linearizes; `kappa` drops out exactly.
pub fn rescaled_finite_flux_bound(
    params: &StarredParams,
    n_star: f64,
    kappa: f64,
) -> Result<f64> {
    if !(n_star > 0.0) {
        return Err(Error::invalid("n_star", "must be positive"));
    }
    let fc = PhaseNoiseModel::power_law(2.0, kappa)?.classical_fisher_spectrum();
    let bound = if params.tau == 0.0 {
        let flux = kappa * n_star;
        crb_mse(&fc, &Spectrum::constant(4.0 * flux))?
    } else {
        let r_plus = params.r_star() * n_star.cbrt();
        if r_plus <= 4.0 {
            return Err(Error::Domain(format!(
                "N* = {n_star} too small for the pure-beam mapping (R+ = {r_plus:.3} <= 4)"
            )));
        }
        let x = 1.0 - 2.0 / r_plus.sqrt();
        let alpha = (params.alpha_star_sq() * kappa * n_star).sqrt();
        let gamma = params.gamma_star * kappa * n_star.powf(5.0 / 6.0);
        let beam = OpoSqueezed::new(alpha, r_plus, 1.0 / r_plus, gamma, x)?;
        let fq = opo_quantum_fisher_spectrum(&beam)?;
        crb_mse(&fc, &fq)?
    };
    Ok(n_star.powf(2.0 / 3.0) * bound.value)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvergenceRow {
    pub n_star: f64,
    pub rescaled: f64,
    pub deviation: f64,
}

/// Relative deviation of the finite-flux rescaled bound from `C` for each
/// `N*`; deviations must shrink toward zero as `N*` grows.
pub fn convergence_check(params: &StarredParams, n_star_list: &[f64]) -> Result<Vec<ConvergenceRow>> {
    let c = c_value(params)?.value;
    let mut rows = Vec::with_capacity(n_star_list.len());
    for &n_star in n_star_list {
        let rescaled = rescaled_finite_flux_bound(params, n_star, 1.0)?;
        rows.push(ConvergenceRow {
            n_star,
            rescaled,
            deviation: (rescaled - c).abs() / c,
        });
    }
    Ok(rows)
}
