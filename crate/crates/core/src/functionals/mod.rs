//! Density functionals `∫ρ^{4/3}`, `∫|∇ρ|`, `∫|∇ρ^{1/3}|²`, `D(ρ,ρ)` and
//! their Thomas-Fermi scaling.

pub mod bound;
pub mod corr;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{DensityField, GridDensity, RadialDensity};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadConfig};
use crate::reduce::pairwise_sum;

pub use bound::{assemble_bound, evaluate_bound, BoundConstants, BoundReport, BoundVariant};
pub use corr::{corr_exact, corr_periodic_cell, verify_chain, ChainReport, CorrKernel, CorrResult};

/// Grid cells below `GRAD13_FLOOR · max ρ` are left out of `∫|∇ρ^{1/3}|²`.
pub const GRAD13_FLOOR: f64 = 1e-14;
/// Fine/coarse ratio of `∫|∇ρ^{1/3}|²` above which a grid field is flagged
/// divergent; a step edge doubles the value when the spacing halves.
pub const GRAD13_DIVERGENCE_RATIO: f64 = 1.5;

fn radial_cfg() -> QuadConfig {
    QuadConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-300,
        max_intervals: 4000,
    }
}

fn radial_integral(rho: &RadialDensity, g: &dyn Fn(f64) -> f64) -> Result<f64> {
    Ok(integrate_with_breaks(g, &rho.breakpoints(), &radial_cfg())?.value)
}

/// `∫ ρ^{4/3}`.
pub fn f_rho43(rho: &DensityField) -> Result<f64> {
    match rho {
        DensityField::AnalyticRadial(r) => {
            radial_integral(r, &|t| 4.0 * PI * t * t * r.value(t).powf(4.0 / 3.0))
        }
        DensityField::CartesianGrid(g) => {
            Ok(par_pairwise(&g.values, |v| v.powf(4.0 / 3.0)) * g.cell_volume())
        }
    }
}

/// `∫ |∇ρ|`, including the surface term `4πR²|Δρ|` at radial jumps.
pub fn f_grad_l1(rho: &DensityField) -> Result<f64> {
    match rho {
        DensityField::AnalyticRadial(r) => {
            let bulk = radial_integral(r, &|t| 4.0 * PI * t * t * r.derivative(t).abs())?;
            let surface: f64 = r.jumps().iter().map(|(rj, j)| 4.0 * PI * rj * rj * j).sum();
            Ok(bulk + surface)
        }
        DensityField::CartesianGrid(g) => {
            let vals = grid_map(g, |g, i, j, k| {
                let d = gradient(g, &g.values, i, j, k);
                (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
            });
            Ok(pairwise_sum(&vals) * g.cell_volume())
        }
    }
}

/// `∫ |∇ρ^{1/3}|²`; hard edges are reported as [`Error::Divergent`].
pub fn f_grad13_l2(rho: &DensityField) -> Result<f64> {
    match rho {
        DensityField::AnalyticRadial(r) => {
            if !r.shape.is_smooth() {
                return Err(Error::Divergent(format!(
                    "{} has a step edge; ∫|∇ρ^(1/3)|² is infinite",
                    r.describe()
                )));
            }
            radial_integral(r, &|t| {
                let v = r.value(t);
                if v == 0.0 {
                    return 0.0;
                }
                let lg = r.derivative(t) / v;
                4.0 * PI * t * t * lg * lg * v.powf(2.0 / 3.0) / 9.0
            })
        }
        DensityField::CartesianGrid(g) => {
            let fine = grid_grad13(g);
            if g.dims.iter().all(|&d| d >= 8) {
                let coarse = grid_grad13(&g.coarsened()?);
                if coarse > 0.0 && fine / coarse > GRAD13_DIVERGENCE_RATIO {
                    return Err(Error::Divergent(format!(
                        "∫|∇ρ^(1/3)|² grows by {:.3} when the spacing halves",
                        fine / coarse
                    )));
                }
            }
            Ok(fine)
        }
    }
}

fn grid_grad13(g: &GridDensity) -> f64 {
    let floor = GRAD13_FLOOR * g.max_value();
    let cube_root: Vec<f64> = g.values.iter().map(|v| v.cbrt()).collect();
    let vals = grid_map(g, |g, i, j, k| {
        if g.values[g.index(i, j, k)] < floor {
            return 0.0;
        }
        let d = gradient(g, &cube_root, i, j, k);
        d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
    });
    pairwise_sum(&vals) * g.cell_volume()
}

/// `D(ρ,ρ) = ½∬ρ(x)ρ(y)/|x−y|`; for radial `ρ` by the shell theorem,
/// `(4π)² ∫ r ρ(r) ∫_0^r s² ρ(s) ds dr`.
pub fn direct_coulomb(rho: &DensityField) -> Result<f64> {
    let r = match rho {
        DensityField::AnalyticRadial(r) => r,
        DensityField::CartesianGrid(_) => {
            return Err(Error::Unsupported(
                "direct Coulomb energy is implemented for radial densities only".into(),
            ))
        }
    };
    let bps = r.breakpoints();
    let inner_cfg = QuadConfig {
        rel_tol: 1e-13,
        abs_tol: 1e-300,
        max_intervals: 1000,
    };
    let enclosed = |t: f64| -> f64 {
        let mut pts: Vec<f64> = bps.iter().copied().filter(|p| *p < t).collect();
        pts.push(t);
        if pts.len() < 2 {
            return 0.0;
        }
        integrate_with_breaks(&|s: f64| s * s * r.value(s), &pts, &inner_cfg)
            .map(|q| q.value)
            .unwrap_or(f64::NAN)
    };
    let outer = integrate_with_breaks(
        &|t: f64| t * r.value(t) * enclosed(t),
        &bps,
        &QuadConfig {
            rel_tol: 1e-11,
            abs_tol: 1e-300,
            max_intervals: 1000,
        },
    )?;
    let d = (4.0 * PI).powi(2) * outer.value;
    if !d.is_finite() {
        return Err(Error::Quadrature {
            achieved: f64::NAN,
            requested: 1e-11,
        });
    }
    Ok(d)
}

/// The three local functionals of a density; divergent entries are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValues {
    pub f_rho43: f64,
    pub f_grad_l1: f64,
    pub f_grad13_l2: Option<f64>,
}

impl FunctionalValues {
    pub fn compute(rho: &DensityField) -> Result<Self> {
        let f_grad13_l2 = match f_grad13_l2(rho) {
            Ok(v) => Some(v),
            Err(Error::Divergent(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            f_rho43: f_rho43(rho)?,
            f_grad_l1: f_grad_l1(rho)?,
            f_grad13_l2,
        })
    }
}

fn par_pairwise(values: &[f64], f: impl Fn(f64) -> f64 + Sync) -> f64 {
    let mapped: Vec<f64> = values.par_iter().map(|&v| f(v)).collect();
    pairwise_sum(&mapped)
}

fn grid_map<F>(g: &GridDensity, f: F) -> Vec<f64>
where
    F: Fn(&GridDensity, usize, usize, usize) -> f64 + Sync,
{
    let [nx, ny, nz] = g.dims;
    (0..nx)
        .into_par_iter()
        .flat_map_iter(|i| {
            let f = &f;
            (0..ny).flat_map(move |j| (0..nz).map(move |k| f(g, i, j, k)))
        })
        .collect()
}

/// Second-order finite-difference gradient of `field` (laid out like `g`).
fn gradient(g: &GridDensity, field: &[f64], i: usize, j: usize, k: usize) -> [f64; 3] {
    let idx = [i, j, k];
    let mut out = [0.0; 3];
    for axis in 0..3 {
        let n = g.dims[axis];
        let h = g.spacing[axis];
        if n < 3 {
            continue;
        }
        let at = |m: usize| {
            let mut p = idx;
            p[axis] = m;
            field[g.index(p[0], p[1], p[2])]
        };
        let m = idx[axis];
        out[axis] = if g.periodic {
            (at((m + 1) % n) - at((m + n - 1) % n)) / (2.0 * h)
        } else if m == 0 {
            (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
        } else if m == n - 1 {
            (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
        } else {
            (at(m + 1) - at(m - 1)) / (2.0 * h)
        };
    }
    out
}

/// Exponents expected under `ρ → Z²ρ(Z^{1/3}·)`.
pub const TF_EXPONENTS: [f64; 3] = [5.0 / 3.0, 4.0 / 3.0, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfRow {
    pub z: f64,
    pub f_rho43: f64,
    pub f_grad_l1: f64,
    pub f_grad13_l2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfScalingReport {
    pub rows: Vec<TfRow>,
    /// Fitted log-log slopes for (ρ^{4/3}, |∇ρ|, |∇ρ^{1/3}|²).
    pub slopes: [Option<f64>; 3],
    pub expected: [f64; 3],
    pub max_deviation: f64,
    /// For grid fields: largest relative change of a functional between the
    /// grid and its 2h coarsening.
    pub discretization_error: Option<f64>,
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Log-log regression of the three local functionals over `z_values`.
pub fn tf_scaling_check(rho: &DensityField, z_values: &[f64]) -> Result<TfScalingReport> {
    if z_values.iter().any(|z| !(*z > 0.0)) {
        return Err(Error::Domain("Z values must be positive".into()));
    }
    let rows: Vec<TfRow> = z_values
        .iter()
        .map(|&z| {
            let v = FunctionalValues::compute(&rho.tf_scaled(z)?)?;
            Ok(TfRow {
                z,
                f_rho43: v.f_rho43,
                f_grad_l1: v.f_grad_l1,
                f_grad13_l2: v.f_grad13_l2,
            })
        })
        .collect::<Result<_>>()?;
    let distinct = {
        let mut zs: Vec<f64> = z_values.to_vec();
        zs.sort_by(f64::total_cmp);
        zs.dedup();
        zs.len()
    };
    let lx: Vec<f64> = rows.iter().map(|r| r.z.ln()).collect();
    let mut slopes = [None; 3];
    if distinct >= 2 {
        slopes[0] = Some(fit_slope(&lx, &rows.iter().map(|r| r.f_rho43.ln()).collect::<Vec<_>>()));
        slopes[1] = Some(fit_slope(&lx, &rows.iter().map(|r| r.f_grad_l1.ln()).collect::<Vec<_>>()));
        if rows.iter().all(|r| r.f_grad13_l2.is_some()) {
            slopes[2] = Some(fit_slope(
                &lx,
                &rows
                    .iter()
                    .map(|r| r.f_grad13_l2.unwrap().ln())
                    .collect::<Vec<_>>(),
            ));
        }
    }
    let max_deviation = slopes
        .iter()
        .zip(TF_EXPONENTS)
        .filter_map(|(s, e)| s.map(|s| (s - e).abs()))
        .fold(0.0, f64::max);
    let discretization_error = match rho {
        DensityField::CartesianGrid(g) => {
            let fine = FunctionalValues::compute(rho)?;
            let coarse = FunctionalValues::compute(&DensityField::CartesianGrid(g.coarsened()?))?;
            let mut e = ((fine.f_rho43 - coarse.f_rho43) / fine.f_rho43).abs();
            e = e.max(((fine.f_grad_l1 - coarse.f_grad_l1) / fine.f_grad_l1).abs());
            if let (Some(a), Some(b)) = (fine.f_grad13_l2, coarse.f_grad13_l2) {
                e = e.max(((a - b) / a).abs());
            }
            Some(e)
        }
        DensityField::AnalyticRadial(_) => None,
    };
    Ok(TfScalingReport {
        rows,
        slopes,
        expected: TF_EXPONENTS,
        max_deviation,
        discretization_error,
    })
}
