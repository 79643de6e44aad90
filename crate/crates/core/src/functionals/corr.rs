//! The non-local correction term
//! `Corr = (3/8π) ∬ (ρ(x)−ρ(y)) (Ψ(|x−y|/R(x)) − Ψ(|x−y|/R(y))) / |x−y|⁴`
//! for radial densities, and the numerical certificate of its lower bounds.
//!
//! For radial `ρ` the angular integral is done in closed form: with `d` the
//! distance between points at radii `a` and `b`,
//! `∬ g(|x−y|) dx dy = 8π² ∫∫ ab ∫_{|a−b|}^{a+b} g(d) d dd da db`, and
//! `∫ k(d/R)/d³ dd = R⁻² κ(d/R)` with `κ(t) = ∫_0^t k(u)/u³ du`.

use std::cell::Cell;
use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::FunctionalValues;
use crate::density::{DensityField, RadialDensity};
use crate::error::{Error, Result};
use crate::functionals::bound::BoundConstants;
use crate::kernel::{ball_radius_unit_volume, derive_corr1_coefficient, psi_raw, r_star};
use crate::quadrature::{integrate_with_breaks, GaussLegendre, QuadConfig};
use crate::reduce::{pairwise_sum, par_map};

/// Which screened kernel enters the correction term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrKernel {
    Psi,
    Psi1,
    Psi2,
}

fn kappa_psi(t: f64) -> f64 {
    if t >= 1.0 {
        0.375
    } else {
        t * (1.0 - 0.75 * t + 0.125 * t * t * t)
    }
}

fn kappa_psi1(t: f64) -> f64 {
    let rs = r_star();
    if t <= rs {
        kappa_psi(t)
    } else {
        kappa_psi(rs) + psi_raw(rs) * (0.5 / (rs * rs) - 0.5 / (t * t))
    }
}

impl CorrKernel {
    /// `κ(t) = ∫_0^t k(u)/u³ du`.
    pub fn antiderivative(self, t: f64) -> f64 {
        match self {
            CorrKernel::Psi => kappa_psi(t),
            CorrKernel::Psi1 => kappa_psi1(t),
            CorrKernel::Psi2 => {
                if t <= r_star() {
                    0.0
                } else {
                    kappa_psi1(t) - kappa_psi(t)
                }
            }
        }
    }

    /// `∫_{t1}^{t2} k(u)/u³ du`, written in differenced form so that nearby
    /// or large arguments do not cancel.
    pub fn integral_between(self, t1: f64, t2: f64) -> f64 {
        if t2 <= t1 {
            return 0.0;
        }
        let rs = r_star();
        // ∫ Ψ(u)/u³ on [t1, t2] ∩ [0, 1]
        let poly = |lo: f64, hi: f64| {
            let (lo, hi) = (lo.max(0.0), hi.min(1.0));
            if hi <= lo {
                return 0.0;
            }
            let s = lo + hi;
            (hi - lo) * (1.0 - 0.75 * s + 0.125 * s * (lo * lo + hi * hi))
        };
        // ∫ Ψ(r*)/u³ on [t1, t2] ∩ [r*, ∞)
        let plateau = |lo: f64, hi: f64| {
            let lo = lo.max(rs);
            if hi <= lo {
                return 0.0;
            }
            0.5 * psi_raw(rs) * (hi - lo) * (hi + lo) / (lo * lo * hi * hi)
        };
        match self {
            CorrKernel::Psi => poly(t1, t2),
            CorrKernel::Psi1 => poly(t1, t2.min(rs)) + plateau(t1, t2),
            CorrKernel::Psi2 => plateau(t1, t2) - poly(t1.max(rs), t2),
        }
    }

    /// `∫_lo^hi k(d/R)/d³ dd`.
    fn shell_between(self, big_r: f64, lo: f64, hi: f64) -> f64 {
        if !big_r.is_finite() {
            return 0.0;
        }
        self.integral_between(lo / big_r, hi / big_r) / (big_r * big_r)
    }
}

/// Restriction on `|x−y|` relative to `θ·min(R(x), R(y))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DistanceWindow {
    All,
    /// `|x−y| > θ min(R)`: the short-range part bounded by `∫ρ^{4/3}`.
    Beyond(f64),
    /// `|x−y| ≤ θ min(R)`: the part bounded by the gradient terms.
    Within(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrQuadrature {
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for CorrQuadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrResult {
    pub value: f64,
    /// Outer estimated error plus the worst inner error times the range.
    pub error_budget: f64,
}

fn local_radius(v: f64) -> f64 {
    if v > 0.0 {
        ball_radius_unit_volume() / v.cbrt()
    } else {
        f64::INFINITY
    }
}

const REGIME_SCAN_POINTS: usize = 256;

/// Which side of each kink of the pair integrand `b` lies on: the kernel
/// knots `r*`, 1 and the window ratio θ against both distance limits, for
/// both local radii, plus the order of `ρ(a)` and `ρ(b)`.
fn regime_signature(rho: &RadialDensity, a: f64, big_ra: f64, ra: f64, ratios: &[f64], b: f64) -> u64 {
    let rb = rho.value(b);
    let big_rb = local_radius(rb);
    let mut bits = u64::from(rb > ra);
    let mut k = 1;
    for &q in ratios {
        for big_r in [big_ra, big_rb] {
            for d in [(a - b).abs(), a + b] {
                bits |= u64::from(q * big_r > d) << k;
                k += 1;
            }
        }
    }
    bits
}

/// Points in `(0, upto)` where the pair integrand at outer radius `a`
/// changes regime; a narrow active band between two of them is otherwise
/// easy for the inner quadrature to step over.
fn regime_changes(rho: &RadialDensity, a: f64, ra: f64, window: DistanceWindow, upto: f64) -> Vec<f64> {
    let mut ratios = vec![r_star(), 1.0];
    if let DistanceWindow::Beyond(t) | DistanceWindow::Within(t) = window {
        ratios.push(t);
    }
    let big_ra = local_radius(ra);
    let sig = |b: f64| regime_signature(rho, a, big_ra, ra, &ratios, b);
    let h = upto / REGIME_SCAN_POINTS as f64;
    let mut out = Vec::new();
    let mut prev = sig(0.0);
    for i in 1..=REGIME_SCAN_POINTS {
        let b = i as f64 * h;
        let cur = sig(b);
        let mut diff = prev ^ cur;
        while diff != 0 {
            let bit = diff & diff.wrapping_neg();
            diff ^= bit;
            let side = |x: f64| sig(x) & bit;
            let start = prev & bit;
            let (mut lo, mut hi) = (b - h, b);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if side(mid) == start {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(0.5 * (lo + hi));
        }
        prev = cur;
    }
    out
}

/// `(3/8π) ∬ (ρ(x)−ρ(y)) (k(|x−y|/R(x)) − k(|x−y|/R(y))) / |x−y|⁴` over the
/// pairs selected by `window`.
pub fn corr_term(
    rho: &RadialDensity,
    kernel: CorrKernel,
    window: DistanceWindow,
    quad: &CorrQuadrature,
) -> Result<CorrResult> {
    let bps = rho.breakpoints();
    let end = *bps.last().expect("breakpoints are non-empty");
    // scale for absolute tolerances: ρ_max^{4/3} L³
    let scale = rho.max_value().powf(4.0 / 3.0) * end.powi(3);
    let inner_cfg = QuadConfig {
        rel_tol: quad.rel_tol,
        abs_tol: 1e-14 * scale / end,
        max_intervals: quad.max_intervals,
    };
    let outer_cfg = QuadConfig {
        rel_tol: quad.rel_tol,
        abs_tol: 1e-14 * scale,
        max_intervals: quad.max_intervals,
    };
    let pair = |a: f64, b: f64, ra: f64, rb: f64, big_ra: f64, big_rb: f64| -> f64 {
        let (mut lo, mut hi) = ((a - b).abs(), a + b);
        match window {
            DistanceWindow::All => {}
            DistanceWindow::Beyond(theta) => lo = lo.max(theta * big_ra.min(big_rb)),
            DistanceWindow::Within(theta) => hi = hi.min(theta * big_ra.min(big_rb)),
        }
        if hi <= lo {
            return 0.0;
        }
        let g = kernel.shell_between(big_ra, lo, hi) - kernel.shell_between(big_rb, lo, hi);
        a * b * (ra - rb) * g
    };
    let failure = Cell::new(None::<Error>);
    let inner = |a: f64| -> (f64, f64) {
        if a == 0.0 {
            return (0.0, 0.0);
        }
        let ra = rho.value(a);
        let big_ra = local_radius(ra);
        let mut pts: Vec<f64> = bps.iter().copied().filter(|p| *p < a).collect();
        pts.push(a);
        pts.extend(regime_changes(rho, a, ra, window, a.min(end)));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        match integrate_with_breaks(
            &|b: f64| {
                let rb = rho.value(b);
                pair(a, b, ra, rb, big_ra, local_radius(rb))
            },
            &pts,
            &inner_cfg,
        ) {
            Ok(q) => (q.value, q.abs_error),
            Err(e) => {
                failure.set(Some(e));
                (0.0, 0.0)
            }
        }
    };
    let worst_core = Cell::new(0.0f64);
    let core = integrate_with_breaks(
        &|a: f64| {
            let (v, e) = inner(a);
            worst_core.set(worst_core.get().max(e));
            v
        },
        &bps,
        &outer_cfg,
    )?;
    // Kernels that stay non-zero past the unit radius (Ψ₁, Ψ₂) couple the
    // core to arbitrarily distant points; the a-range beyond the cutoff is
    // mapped to u = end/a in (0, 1].
    let worst_tail = Cell::new(0.0f64);
    let tail = integrate_with_breaks(
        &|u: f64| {
            let a = end / u;
            let jac = end / (u * u);
            let (v, e) = inner(a);
            worst_tail.set(worst_tail.get().max(e * jac));
            v * jac
        },
        &[0.0, 1.0],
        &outer_cfg,
    )?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    // symmetric integrand: twice the b < a half, times 3π
    let factor = 6.0 * PI;
    Ok(CorrResult {
        value: factor * (core.value + tail.value),
        error_budget: factor
            * (core.abs_error + tail.abs_error + end * worst_core.get() + worst_tail.get()),
    })
}

/// `Corr` for an analytic radial density.
pub fn corr_exact(rho: &DensityField, quad: &CorrQuadrature) -> Result<CorrResult> {
    match rho {
        DensityField::AnalyticRadial(r) => corr_term(r, CorrKernel::Psi, DistanceWindow::All, quad),
        DensityField::CartesianGrid(_) => Err(Error::Unsupported(
            "the exact correction term is implemented for radial densities".into(),
        )),
    }
}

/// `Corr` per unit volume of a 1-periodic density, from the unsymmetrized
/// form `(3/4π) ∫_cell dx ∫_{|u|≤R(x)} (ρ(x)−ρ(x+u)) Ψ(|u|/R(x)) / |u|⁴ du`.
pub fn corr_periodic_cell<F>(rho: F, cell_points: usize, radial_order: usize, angular_order: usize) -> f64
where
    F: Fn([f64; 3]) -> f64 + Sync,
{
    let gl_s = GaussLegendre::new(radial_order);
    let gl_mu = GaussLegendre::new(angular_order);
    let n_phi = 2 * angular_order;
    let h = 1.0 / cell_points as f64;
    let xs: Vec<[f64; 3]> = (0..cell_points.pow(3))
        .map(|idx| {
            let (i, j, k) = (
                idx / (cell_points * cell_points),
                (idx / cell_points) % cell_points,
                idx % cell_points,
            );
            [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h, (k as f64 + 0.5) * h]
        })
        .collect();
    let per_point = par_map(&xs, |&x| {
        let rx = rho(x);
        let big_r = local_radius(rx);
        if !big_r.is_finite() {
            return 0.0;
        }
        let mut acc = Vec::new();
        for (su, sw) in gl_s.unit_interval() {
            let s = su * big_r;
            let radial = psi_raw(s / big_r) / (s * s) * sw * big_r;
            for (&mu, &wmu) in gl_mu.nodes.iter().zip(&gl_mu.weights) {
                let st = (1.0 - mu * mu).max(0.0).sqrt();
                for k in 0..n_phi {
                    let phi = 2.0 * PI * (k as f64 + 0.5) / n_phi as f64;
                    let y = [
                        x[0] + s * st * phi.cos(),
                        x[1] + s * st * phi.sin(),
                        x[2] + s * mu,
                    ];
                    acc.push((rx - rho(y)) * radial * wmu * 2.0 * PI / n_phi as f64);
                }
            }
        }
        pairwise_sum(&acc)
    });
    3.0 / (4.0 * PI) * pairwise_sum(&per_point) * h * h * h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRow {
    pub alpha: f64,
    /// Split parameter `θ = 3Ψ(r*)/(cα)`.
    pub theta: f64,
    /// `−α∫ρ^{4/3} − k₁α⁻³∫|∇ρ|`
    pub rhs_l1: f64,
    /// `−α∫ρ^{4/3} − k₂α⁻²∫|∇ρ^{1/3}|²`; `None` when divergent.
    pub rhs_l13: Option<f64>,
    pub holds_l1: bool,
    pub holds_l13: Option<bool>,
    /// Short-range part of the `Ψ₂` term and its bound `−α∫ρ^{4/3}`.
    pub corr1: f64,
    /// Long-range part of the `Ψ₂` term.
    pub corr2: f64,
    pub corr_split_error: f64,
    /// `corr1 ≥ −α∫ρ^{4/3}`, `corr2 ≥ −k₁α⁻³∫|∇ρ|` and, when finite,
    /// `corr2 ≥ −k₂α⁻²∫|∇ρ^{1/3}|²`.
    pub intermediate_hold: bool,
    pub skip_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub density: String,
    pub corr: f64,
    pub corr_error: f64,
    /// `−(3/8π)∬ … Ψ₂ …`, the lower bound on `Corr` from dropping `Ψ₁`.
    pub psi2_lower: f64,
    pub psi2_error: f64,
    pub psi2_step_holds: bool,
    pub functionals: FunctionalValues,
    pub rows: Vec<ChainRow>,
    pub all_hold: bool,
}

impl ChainReport {
    pub fn csv_header() -> &'static str {
        "density,alpha,inequality,lhs,rhs,margin,error_budget,holds"
    }

    /// One line per checked inequality.
    pub fn csv_rows(&self) -> String {
        let mut s = String::new();
        let mut line = |alpha: Option<f64>, name: &str, lhs: f64, rhs: Option<f64>, err: f64, holds: Option<bool>| {
            let a = alpha.map(|a| format!("{a}")).unwrap_or_default();
            match (rhs, holds) {
                (Some(r), Some(h)) => {
                    let _ = writeln!(
                        s,
                        "\"{}\",{a},{name},{lhs:.12e},{r:.12e},{:.12e},{err:.3e},{h}",
                        self.density,
                        lhs - r
                    );
                }
                _ => {
                    let _ = writeln!(s, "\"{}\",{a},{name},{lhs:.12e},,,{err:.3e},skipped", self.density);
                }
            }
        };
        line(None, "corr>=psi2_term", self.corr, Some(self.psi2_lower), self.corr_error + self.psi2_error, Some(self.psi2_step_holds));
        for r in &self.rows {
            line(Some(r.alpha), "corr>=grad_l1_rhs", self.corr, Some(r.rhs_l1), self.corr_error, Some(r.holds_l1));
            line(Some(r.alpha), "corr>=grad13_l2_rhs", self.corr, r.rhs_l13, self.corr_error, r.holds_l13);
        }
        s
    }
}

/// Checks `Corr ≥ −α∫ρ^{4/3} − k₁α⁻³∫|∇ρ|` and
/// `Corr ≥ −α∫ρ^{4/3} − k₂α⁻²∫|∇ρ^{1/3}|²` for each α, together with the
/// intermediate steps, every comparison padded by the quadrature budgets.
pub fn verify_chain(
    rho: &DensityField,
    alphas: &[f64],
    constants: &BoundConstants,
    quad: &CorrQuadrature,
) -> Result<ChainReport> {
    let r = match rho {
        DensityField::AnalyticRadial(r) => r,
        DensityField::CartesianGrid(_) => {
            return Err(Error::Unsupported("chain certificate needs a radial density".into()))
        }
    };
    let values = FunctionalValues::compute(rho)?;
    let corr = corr_term(r, CorrKernel::Psi, DistanceWindow::All, quad)?;
    let psi2 = corr_term(r, CorrKernel::Psi2, DistanceWindow::All, quad)?;
    let psi2_lower = -psi2.value;
    let psi2_step_holds = corr.value + corr.error_budget + psi2.error_budget >= psi2_lower;
    let coeff = derive_corr1_coefficient();
    let rows: Vec<ChainRow> = par_map(alphas, |&alpha| -> Result<ChainRow> {
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!("α must be positive, got {alpha}")));
        }
        let theta = coeff / alpha;
        let rhs_l1 = -alpha * values.f_rho43
            - constants.grad_l1_coefficient * alpha.powi(-3) * values.f_grad_l1;
        let rhs_l13 = values
            .f_grad13_l2
            .map(|g| -alpha * values.f_rho43 - constants.grad13_l2_coefficient * alpha.powi(-2) * g);
        let budget = corr.error_budget;
        let holds_l1 = corr.value + budget >= rhs_l1;
        let holds_l13 = rhs_l13.map(|rhs| corr.value + budget >= rhs);
        let skip_reason = if values.f_grad13_l2.is_none() {
            Some("∫|∇ρ^(1/3)|² diverges (step edge); gradient-cube-root inequality skipped".into())
        } else {
            None
        };
        if theta <= r_star() {
            return Ok(ChainRow {
                alpha,
                theta,
                rhs_l1,
                rhs_l13,
                holds_l1,
                holds_l13,
                corr1: f64::NAN,
                corr2: f64::NAN,
                corr_split_error: f64::NAN,
                intermediate_hold: true,
                skip_reason: Some(format!("α = {alpha} exceeds the validity cap; split not formed")),
            });
        }
        let c1 = corr_term(r, CorrKernel::Psi2, DistanceWindow::Beyond(theta), quad)?;
        let c2 = corr_term(r, CorrKernel::Psi2, DistanceWindow::Within(theta), quad)?;
        let (corr1, corr2) = (-c1.value, -c2.value);
        let mut ok = corr1 + c1.error_budget >= -alpha * values.f_rho43;
        ok &= corr2 + c2.error_budget
            >= -constants.grad_l1_coefficient * alpha.powi(-3) * values.f_grad_l1;
        if let Some(g) = values.f_grad13_l2 {
            ok &= corr2 + c2.error_budget >= -constants.grad13_l2_coefficient * alpha.powi(-2) * g;
        }
        Ok(ChainRow {
            alpha,
            theta,
            rhs_l1,
            rhs_l13,
            holds_l1,
            holds_l13,
            corr1,
            corr2,
            corr_split_error: c1.error_budget + c2.error_budget,
            intermediate_hold: ok,
            skip_reason,
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let all_hold = psi2_step_holds
        && rows
            .iter()
            .all(|r| r.holds_l1 && r.holds_l13.unwrap_or(true) && r.intermediate_hold);
    Ok(ChainReport {
        density: rho.describe(),
        corr: corr.value,
        corr_error: corr.error_budget,
        psi2_lower,
        psi2_error: psi2.error_budget,
        psi2_step_holds,
        functionals: values,
        rows,
        all_hold,
    })
}

/// Radial densities used by the certificate: Gaussians, a Thomas-Fermi
/// scaled Gaussian, an exponential, and two smoothed balls.
pub fn default_chain_corpus() -> Vec<RadialDensity> {
    let g = RadialDensity::gaussian(1.0, 1.0).expect("static");
    vec![
        g,
        RadialDensity::gaussian(0.5, 2.0).expect("static"),
        g.tf_scaled(8.0).expect("static"),
        RadialDensity::exponential(1.0, 1.0).expect("static"),
        RadialDensity::smoothed_ball(2.0, 0.3, 4.0).expect("static"),
        RadialDensity::smoothed_ball(1.0, 0.05, 1.0).expect("static"),
    ]
}

/// Chain α values used by default.
pub const DEFAULT_CHAIN_ALPHAS: [f64; 4] = [0.05, 0.1, 0.2, 0.3];
