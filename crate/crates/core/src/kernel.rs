//! The screened point-charge kernel and the scalar constants derived from it.
//!
//! `Ψ(r) = r⁴ (r²/2 + 1/r − 3/2)` on `[0, 1]` is the Coulomb potential of a
//! point charge screened by a uniform unit ball, multiplied by `−r⁴`. It rises
//! on `[0, r*]` and falls on `[r*, 1]` with `r* = (√5 − 1)/2`, which gives the
//! monotone split `Ψ = Ψ₁ − Ψ₂` and the profile `χ(r) = Ψ₂′(r) / r`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::optimize::bisect;
use crate::quadrature::{integrate, QuadConfig, QuadResult};

/// Relative tolerance for every one-dimensional constant integral.
pub const CONSTANT_QUAD_REL_TOL: f64 = 1e-8;

/// Classic Lieb-Oxford constant.
pub const LIEB_OXFORD_CONSTANT: f64 = 1.68;
/// Chan-Handy improvement of the classic constant.
pub const CHAN_HANDY_CONSTANT: f64 = 1.64;

/// `r* = (√5 − 1)/2`, the interior critical point of `Ψ`.
pub fn r_star() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// `c = (3/4π)^{1/3}`, radius of the unit-volume ball.
pub fn ball_radius_unit_volume() -> f64 {
    (3.0 / (4.0 * PI)).cbrt()
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_nan() || r < 0.0 {
        return domain(format!("radius must be non-negative, got {r}"));
    }
    Ok(())
}

pub(crate) fn psi_raw(r: f64) -> f64 {
    if r <= 0.0 || r > 1.0 {
        return 0.0;
    }
    let r3 = r * r * r;
    r3 * (0.5 * r3 + 1.0 - 1.5 * r)
}

pub(crate) fn psi_derivative_raw(r: f64) -> f64 {
    if r <= 0.0 || r >= 1.0 {
        return 0.0;
    }
    3.0 * r * r * (r - 1.0) * (r * r + r - 1.0)
}

pub(crate) fn psi1_raw(r: f64) -> f64 {
    psi_raw(r.min(r_star()))
}

pub(crate) fn psi2_raw(r: f64) -> f64 {
    let rs = r_star();
    if r <= rs {
        0.0
    } else {
        psi_raw(rs) - psi_raw(r)
    }
}

pub(crate) fn chi_raw(r: f64) -> f64 {
    if r < r_star() || r > 1.0 {
        return 0.0;
    }
    (3.0 * r * (1.0 - r) * (r * r + r - 1.0)).max(0.0)
}

pub(crate) fn chi_derivative_raw(r: f64) -> f64 {
    if r < r_star() || r > 1.0 {
        return 0.0;
    }
    3.0 * (-4.0 * r * r * r + 4.0 * r - 1.0)
}

/// `Ψ(r)`; zero at `r = 0` and for `r > 1`.
pub fn psi(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(psi_raw(r))
}

/// `Ψ′(r) = 3r²(r − 1)(r² + r − 1)` on `(0, 1)`.
pub fn psi_derivative(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(psi_derivative_raw(r))
}

/// `(Ψ₁(r), Ψ₂(r))`: integrals of the positive and negative parts of `Ψ′`.
pub fn psi_split(r: f64) -> Result<(f64, f64)> {
    check_radius(r)?;
    Ok((psi1_raw(r), psi2_raw(r)))
}

/// `χ(r) = 3r(1 − r)(r² + r − 1)` on `[r*, 1]`, zero elsewhere.
pub fn chi(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(chi_raw(r))
}

/// `χ′(r) = 3(−4r³ + 4r − 1)` on `[r*, 1]`.
pub fn chi_derivative(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(chi_derivative_raw(r))
}

/// Potential of a unit point charge screened by the uniform unit ball,
/// `r²/2 + 1/r − 3/2` on `(0, 1]`, zero outside.
pub fn screened_ball_potential(r: f64) -> Result<f64> {
    if r.is_nan() || r <= 0.0 {
        return domain(format!("screened potential needs r > 0, got {r}"));
    }
    if r > 1.0 {
        return Ok(0.0);
    }
    Ok(0.5 * r * r + 1.0 / r - 1.5)
}

#[derive(Clone)]
enum ProfileKind {
    Psi,
    Psi1,
    Psi2,
    Chi,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A real function of the radius with a declared closed support.
#[derive(Clone)]
pub struct RadialProfile {
    label: String,
    support: (f64, f64),
    kind: ProfileKind,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("label", &self.label)
            .field("support", &self.support)
            .finish()
    }
}

impl RadialProfile {
    pub fn psi() -> Self {
        Self {
            label: "psi".into(),
            support: (0.0, 1.0),
            kind: ProfileKind::Psi,
        }
    }

    pub fn psi1() -> Self {
        Self {
            label: "psi1".into(),
            support: (0.0, f64::INFINITY),
            kind: ProfileKind::Psi1,
        }
    }

    pub fn psi2() -> Self {
        Self {
            label: "psi2".into(),
            support: (r_star(), f64::INFINITY),
            kind: ProfileKind::Psi2,
        }
    }

    pub fn chi() -> Self {
        Self {
            label: "chi".into(),
            support: (r_star(), 1.0),
            kind: ProfileKind::Chi,
        }
    }

    pub fn custom<F>(label: impl Into<String>, support: (f64, f64), f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            support,
            kind: ProfileKind::Custom(Arc::new(f)),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Value at `r`; zero outside the support.
    pub fn eval(&self, r: f64) -> f64 {
        if r < self.support.0 || r > self.support.1 {
            return 0.0;
        }
        match &self.kind {
            ProfileKind::Psi => psi_raw(r),
            ProfileKind::Psi1 => psi1_raw(r),
            ProfileKind::Psi2 => psi2_raw(r),
            ProfileKind::Chi => chi_raw(r),
            ProfileKind::Custom(f) => f(r),
        }
    }
}

/// Critical points of `Ψ` and `χ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoints {
    pub r_star: f64,
    /// argmax of `χ` on `[r*, 1]`, root of `χ′`.
    pub s_star: f64,
    pub psi_at_r_star: f64,
}

impl CriticalPoints {
    pub fn compute() -> Result<Self> {
        let rs = r_star();
        let s_star = bisect(chi_derivative_raw, rs, 1.0, 1e-10)?;
        Ok(Self {
            r_star: rs,
            s_star,
            psi_at_r_star: psi_raw(rs),
        })
    }
}

fn constant_quad(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<QuadResult> {
    integrate(
        f,
        a,
        b,
        &QuadConfig {
            rel_tol: CONSTANT_QUAD_REL_TOL,
            abs_tol: 1e-15,
            max_intervals: 1000,
        },
    )
}

/// `3Ψ(r*)/c`: the product `α·θ` fixed by the bound on the short-range part.
pub fn derive_corr1_coefficient() -> f64 {
    3.0 * psi_raw(r_star()) / ball_radius_unit_volume()
}

/// Largest admissible `α` (the split parameter `θ` must exceed `r*`).
pub fn alpha_max() -> f64 {
    derive_corr1_coefficient() / r_star()
}

/// `∫_{r*}^1 Ψ₂′(t)/t dt`.
pub fn corr2_inner_integral() -> Result<QuadResult> {
    constant_quad(&|t| -psi_derivative_raw(t).min(0.0) / t, r_star(), 1.0)
}

/// Gradient-L1 coefficient for an arbitrary integrand in place of `Ψ₂′(t)/t`.
pub fn grad_l1_coefficient_with(integrand: &dyn Fn(f64) -> f64) -> Result<f64> {
    let inner = constant_quad(integrand, r_star(), 1.0)?;
    let rs = r_star();
    Ok(18.0 * PI * psi_raw(rs).powi(3) / rs.powi(3) * inner.value)
}

/// `18π Ψ(r*)³ r*⁻³ ∫_{r*}^1 Ψ₂′(t)/t dt`, the coefficient of `α⁻³∫|∇ρ|`.
pub fn derive_grad_l1_coefficient() -> Result<f64> {
    grad_l1_coefficient_with(&|t| -psi_derivative_raw(t).min(0.0) / t)
}

/// `27 Ψ(r*)² c² / (2 r*²) · K`, the coefficient of `α⁻²∫|∇ρ^{1/3}|²`
/// for a maximal-function norm constant `K`.
pub fn derive_grad13_l2_coefficient(maximal_constant: f64) -> Result<f64> {
    if !(maximal_constant > 0.0) || !maximal_constant.is_finite() {
        return domain(format!(
            "maximal-function constant must be positive, got {maximal_constant}"
        ));
    }
    let rs = r_star();
    let c = ball_radius_unit_volume();
    Ok(27.0 * psi_raw(rs).powi(2) * c * c / (2.0 * rs * rs) * maximal_constant)
}

/// Exponent of `α` in the gradient term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradPower {
    /// `α⁻³ ∫|∇ρ|`
    Cubic,
    /// `α⁻² ∫|∇ρ^{1/3}|²`
    Quadratic,
}

impl GradPower {
    pub fn exponent(self) -> i32 {
        match self {
            GradPower::Cubic => 3,
            GradPower::Quadratic => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaOptimum {
    pub alpha: f64,
    /// Minimal value of `α·A + k α^{-p} B`.
    pub correction: f64,
    /// Density-independent factor `P` in `correction = P · B^{1/(p+1)} A^{p/(p+1)}`.
    pub prefactor: f64,
}

/// `(4/3)(3k)^{1/4}` for `p = 3` and `3·2^{−2/3} k^{1/3}` for `p = 2`.
pub fn optimized_prefactor(coefficient: f64, power: GradPower) -> f64 {
    let p = power.exponent() as f64;
    // (1 + 1/p) (p k)^{1/(p+1)}
    (1.0 + 1.0 / p) * (p * coefficient).powf(1.0 / (p + 1.0))
}

/// Minimises `g(α) = α·f_rho43 + coefficient·α^{-p}·f_grad` over `α > 0`.
///
/// `f_grad = 0` returns `α = 0` with zero correction; `f_rho43 = 0` with a
/// non-zero gradient term is rejected.
pub fn optimize_alpha(
    coefficient: f64,
    power: GradPower,
    f_rho43: f64,
    f_grad: f64,
) -> Result<AlphaOptimum> {
    for (name, v) in [("coefficient", coefficient), ("f_rho43", f_rho43), ("f_grad", f_grad)] {
        if !v.is_finite() || v < 0.0 {
            return domain(format!("{name} must be finite and non-negative, got {v}"));
        }
    }
    if coefficient == 0.0 {
        return domain("coefficient must be positive");
    }
    let prefactor = optimized_prefactor(coefficient, power);
    if f_grad == 0.0 {
        return Ok(AlphaOptimum {
            alpha: 0.0,
            correction: 0.0,
            prefactor,
        });
    }
    if f_rho43 == 0.0 {
        return Err(Error::InvalidDensity(
            "zero ∫ρ^{4/3} with a non-zero gradient term".into(),
        ));
    }
    let p = power.exponent() as f64;
    let alpha = (p * coefficient * f_grad / f_rho43).powf(1.0 / (p + 1.0));
    let correction = alpha * f_rho43 + coefficient * alpha.powf(-p) * f_grad;
    Ok(AlphaOptimum {
        alpha,
        correction,
        prefactor,
    })
}

/// Constants of the two derived single-gradient bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConstants {
    /// Coefficient of `(∫|∇ρ^{1/3}|²)^{1/8}(∫ρ^{4/3})^{7/8}`.
    pub c_eighth: f64,
    /// Coefficient of `(∫|∇ρ^{1/3}|²)^{1/4}(∫ρ^{4/3})^{3/4}`.
    pub c_quarter: f64,
}

/// Chain constants from the two optimized prefactors.
///
/// Cauchy-Schwarz on `|∇ρ| = 3ρ^{2/3}|∇ρ^{1/3}|` turns the L1 prefactor into
/// `P₁·3^{1/4}`; the geometric interpolation with weights `3/5, 2/5` of the
/// two resulting bounds gives the second constant.
pub fn chain_constants(prefactor_l1: f64, prefactor_l2: f64) -> ChainConstants {
    let c_eighth = prefactor_l1 * 3f64.powf(0.25);
    let c_quarter = prefactor_l2.powf(0.6) * c_eighth.powf(0.4);
    ChainConstants {
        c_eighth,
        c_quarter,
    }
}

/// Chain constants from freshly derived prefactors.
pub fn derive_chain_constants(maximal_constant: f64) -> Result<ChainConstants> {
    let p1 = optimized_prefactor(derive_grad_l1_coefficient()?, GradPower::Cubic);
    let p2 = optimized_prefactor(
        derive_grad13_l2_coefficient(maximal_constant)?,
        GradPower::Quadratic,
    );
    Ok(chain_constants(p1, p2))
}

/// Magnitude of the local constant `2πc²/5 + 3/(5c)` as a function of the
/// screening-ball parameter `c`.
pub fn onsager_objective(c: f64) -> f64 {
    2.0 * PI * c * c / 5.0 + 3.0 / (5.0 * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaConstant {
    pub value: f64,
    pub optimal_c: f64,
}

/// Minimises [`onsager_objective`] over `c > 0` by locating the zero of its
/// derivative; returns the optimal `c` and the constant `(3/5)(9π/2)^{1/3}`.
pub fn derive_lda_constant() -> Result<LdaConstant> {
    let derivative = |c: f64| 4.0 * PI * c / 5.0 - 3.0 / (5.0 * c * c);
    let c = bisect(derivative, 0.1, 2.0, 1e-15)?;
    Ok(LdaConstant {
        value: onsager_objective(c),
        optimal_c: c,
    })
}

/// `D(μ, μ)` for the normalized uniform measure of the unit ball, from the
/// nested radial integral `|B|⁻²(4π)² ∫_0^1 r ∫_0^r s² ds dr`.
pub fn ball_measure_self_energy() -> Result<f64> {
    let cfg = QuadConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-16,
        max_intervals: 500,
    };
    let inner = |r: f64| {
        integrate(&|s: f64| s * s, 0.0, r, &cfg)
            .map(|q| q.value)
            .unwrap_or(f64::NAN)
    };
    let outer = integrate(&|r: f64| r * inner(r), 0.0, 1.0, &cfg)?;
    if !outer.value.is_finite() {
        return Err(Error::Quadrature {
            achieved: f64::NAN,
            requested: cfg.rel_tol,
        });
    }
    let vol = 4.0 * PI / 3.0;
    Ok((4.0 * PI).powi(2) * outer.value / (vol * vol))
}
