//! Jellium energy per particle as a direct lattice sum of the screened
//! potential, the indirect energy of the shifted-lattice state, and the
//! Fourier-side checks of the shift.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::cell::WignerSeitzCell;
use super::lattice::{BravaisLattice, LatticeKind, V3};
use super::potential::{cell_self_potential, screened_potential_raw};
use crate::error::{domain, Result};
use crate::reduce::{pairwise_sum, par_map};

pub const MIN_SHELL_CUTOFF: u32 = 5;
pub const DEFAULT_SHELL_CUTOFF: u32 = 20;
/// A lattice sum whose tail bound exceeds this is flagged as not converged.
pub const TAIL_TOLERANCE: f64 = 1e-3;
/// Default wavevector magnitudes for the Fourier-limit check.
pub const DEFAULT_K_VALUES: [f64; 4] = [1.2, 0.8, 0.4, 0.2];
/// Quadrature order for `∫_Q cos(k·x)` on each tetrahedron.
const FOURIER_ORDER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSumResult {
    pub value: f64,
    /// Radius (in unit-density lengths) of the ball of summed lattice points.
    pub shell_cutoff: u32,
    /// Bound on the neglected part of the sum from an `|x|⁻⁴` envelope.
    pub tail_estimate: f64,
    pub converged: bool,
}

/// `½ Σ_{0<|x|≤L} W(x)` with its tail bound `2π C / L`, where
/// `C = max |W(x)||x|⁴` over the outer half of the summed ball.
pub fn screened_lattice_sum(
    lattice: &BravaisLattice,
    cell: &WignerSeitzCell,
    shell_cutoff: u32,
) -> Result<LatticeSumResult> {
    if shell_cutoff < MIN_SHELL_CUTOFF {
        return domain(format!("shell cutoff must be at least {MIN_SHELL_CUTOFF}"));
    }
    let radius = shell_cutoff as f64;
    let points: Vec<V3> = lattice
        .points_within(radius)
        .into_iter()
        .skip(1)
        .map(|(_, x)| x)
        .collect();
    let w = par_map(&points, |x| screened_potential_raw(cell, *x));
    let envelope = points
        .iter()
        .zip(&w)
        .filter(|(x, _)| x.norm() >= 0.5 * radius)
        .map(|(x, w)| w.abs() * x.norm().powi(4))
        .fold(0.0, f64::max);
    let tail_estimate = 2.0 * PI * envelope / radius;
    Ok(LatticeSumResult {
        value: 0.5 * pairwise_sum(&w),
        shell_cutoff,
        tail_estimate,
        converged: tail_estimate.is_finite() && tail_estimate <= TAIL_TOLERANCE,
    })
}

/// `e_Jel = ½Σ_{x≠0} W(x) − ½∫_Q dy/|y| − ½∫_{ℝ³} W`, the last integral
/// being the cell's shift.
pub fn jellium_energy(lattice: &BravaisLattice, shell_cutoff: u32) -> Result<LatticeSumResult> {
    let cell = WignerSeitzCell::build(lattice)?;
    let sum = screened_lattice_sum(lattice, &cell, shell_cutoff)?;
    Ok(LatticeSumResult {
        value: sum.value - 0.5 * cell_self_potential(&cell) - 0.5 * cell.shift(),
        ..sum
    })
}

/// Indirect energy per particle of the lattice state with one cell of
/// background per point: `e_Jel + shift`.
pub fn indirect_energy(lattice: &BravaisLattice, shell_cutoff: u32) -> Result<f64> {
    let cell = WignerSeitzCell::build(lattice)?;
    Ok(jellium_energy(lattice, shell_cutoff)?.value + cell.shift())
}

/// `∫_Q (1 − cos(k·x)) dx`, written with `2sin²` to avoid cancellation.
fn cell_cosine_deficit(cell: &WignerSeitzCell, k: V3) -> f64 {
    cell.integrate(
        &|x| {
            let s = (0.5 * k.dot(&x)).sin();
            2.0 * s * s
        },
        FOURIER_ORDER,
    )
}

/// `4π|k|⁻²(1 − ∫_Q e^{−ik·x})` at a single wavevector (the cell is
/// inversion symmetric, so the transform is real).
pub fn fourier_shift_estimate(cell: &WignerSeitzCell, k: V3) -> f64 {
    4.0 * PI / k.norm_squared() * cell_cosine_deficit(cell, k)
}

/// Value at zero of the polynomial in `h` through `(h_i, y_i)`.
fn extrapolate_to_zero(h: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = h.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i]);
        }
    }
    p[0]
}

/// Directions along which the Fourier limits are taken: the three cubic
/// axes classes (edge, face diagonal, body diagonal).
pub fn probe_directions() -> [V3; 3] {
    [
        V3::new(1.0, 0.0, 0.0),
        V3::new(1.0, 1.0, 0.0).normalize(),
        V3::new(1.0, 1.0, 1.0).normalize(),
    ]
}

fn check_k_values(k_values: &[f64]) -> Result<()> {
    if k_values.len() < 2 {
        return domain("at least two wavevector magnitudes are needed");
    }
    if !k_values.iter().all(|k| k.is_finite() && *k > 0.0)
        || k_values.windows(2).any(|w| w[1] >= w[0])
    {
        return domain("wavevector magnitudes must be positive and strictly decreasing");
    }
    Ok(())
}

/// Limit `k → 0` of the Fourier estimate along one direction, by
/// polynomial extrapolation in `|k|²`.
pub fn fourier_shift_limit(cell: &WignerSeitzCell, direction: V3, k_values: &[f64]) -> Result<f64> {
    check_k_values(k_values)?;
    let d = direction.normalize();
    let h: Vec<f64> = k_values.iter().map(|k| k * k).collect();
    let y: Vec<f64> = k_values.iter().map(|&k| fourier_shift_estimate(cell, d * k)).collect();
    Ok(extrapolate_to_zero(&h, &y))
}

/// Mean over [`probe_directions`] of the extrapolated Fourier limit; it
/// reproduces the shift independently of the moment formula.
pub fn shift_fourier_check(lattice: &BravaisLattice, k_values: &[f64]) -> Result<f64> {
    let cell = WignerSeitzCell::build(lattice)?;
    let limits = probe_directions()
        .iter()
        .map(|d| fourier_shift_limit(&cell, *d, k_values))
        .collect::<Result<Vec<_>>>()?;
    Ok(limits.iter().sum::<f64>() / limits.len() as f64)
}

/// `∫_{ℝ³}` of the Yukawa-screened potential: the Fourier expression with
/// `|k|⁻²` replaced by `(ν² + |k|²)⁻¹`, which is regular at `k = 0` and
/// there equals `4π ν⁻² (1 − ∫_Q dx)`. It is zero for every `ν > 0`.
pub fn yukawa_shift(lattice: &BravaisLattice, nu: f64) -> Result<f64> {
    if !(nu.is_finite() && nu > 0.0) {
        return domain("the Yukawa screening must be positive");
    }
    let cell = WignerSeitzCell::build(lattice)?;
    let charge = cell.integrate(&|_| 1.0, FOURIER_ORDER);
    Ok(4.0 * PI / (nu * nu) * (1.0 - charge))
}

/// The two orders of limits for the screened integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitOrder {
    /// `k → 0` of the Coulomb expression: the shift.
    pub coulomb: f64,
    /// `ν → 0` after `k → 0` of the Yukawa expression.
    pub yukawa_first: f64,
    /// `coulomb − yukawa_first`.
    pub discrepancy: f64,
}

/// Taking `ν → 0` after the thermodynamic limit misses the shift entirely.
pub fn limit_order_discrepancy(
    lattice: &BravaisLattice,
    nus: &[f64],
    k_values: &[f64],
) -> Result<LimitOrder> {
    if nus.len() < 2 {
        return domain("at least two screening values are needed");
    }
    let coulomb = shift_fourier_check(lattice, k_values)?;
    let y = nus
        .iter()
        .map(|&nu| yukawa_shift(lattice, nu))
        .collect::<Result<Vec<_>>>()?;
    let h: Vec<f64> = nus.iter().map(|nu| nu * nu).collect();
    let yukawa_first = extrapolate_to_zero(&h, &y);
    Ok(LimitOrder {
        coulomb,
        yukawa_first,
        discrepancy: coulomb - yukawa_first,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JelliumReport {
    pub lattice: LatticeKind,
    pub e_jel: f64,
    pub shift: f64,
    pub indirect: f64,
    pub shell_cutoff: u32,
    pub tail_estimate: f64,
    pub converged: bool,
}

impl JelliumReport {
    pub fn compute(lattice: &BravaisLattice, shell_cutoff: u32) -> Result<Self> {
        let cell = WignerSeitzCell::build(lattice)?;
        let sum = screened_lattice_sum(lattice, &cell, shell_cutoff)?;
        let shift = cell.shift();
        let e_jel = sum.value - 0.5 * cell_self_potential(&cell) - 0.5 * shift;
        Ok(Self {
            lattice: lattice.kind,
            e_jel,
            shift,
            indirect: e_jel + shift,
            shell_cutoff,
            tail_estimate: sum.tail_estimate,
            converged: sum.converged,
        })
    }

    pub fn csv_header() -> &'static str {
        "lattice,e_jel,shift,indirect,shell_cutoff,tail_estimate,converged"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.10},{:.10},{:.10},{},{:.3e},{}",
            self.lattice,
            self.e_jel,
            self.shift,
            self.indirect,
            self.shell_cutoff,
            self.tail_estimate,
            self.converged
        )
    }
}

/// Reports for SC, FCC and BCC.
pub fn jellium_table(shell_cutoff: u32) -> Result<Vec<JelliumReport>> {
    LatticeKind::CUBIC
        .iter()
        .map(|k| JelliumReport::compute(&BravaisLattice::of_kind(*k)?, shell_cutoff))
        .collect()
}
