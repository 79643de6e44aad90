//! Assembly of the six lower bounds on the indirect Coulomb energy.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::FunctionalValues;
use crate::density::DensityField;
use crate::error::{Error, Result};
use crate::kernel::{
    alpha_max, chain_constants, derive_grad13_l2_coefficient, derive_grad_l1_coefficient,
    derive_lda_constant, optimize_alpha, optimized_prefactor, GradPower, CHAN_HANDY_CONSTANT,
    LIEB_OXFORD_CONSTANT,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// `−1.68 ∫ρ^{4/3}`
    #[serde(rename = "classic_168")]
    Classic168,
    /// `−1.64 ∫ρ^{4/3}`
    #[serde(rename = "classic_164")]
    Classic164,
    /// `−(C_LDA + α)∫ρ^{4/3} − k₁α⁻³∫|∇ρ|`
    GradL1,
    /// `−(C_LDA + α)∫ρ^{4/3} − k₂α⁻²∫|∇ρ^{1/3}|²`
    Grad13L2,
    /// `−C_LDA∫ρ^{4/3} − c(∫|∇ρ^{1/3}|²)^{1/8}(∫ρ^{4/3})^{7/8}`
    ChainL18,
    /// `−C_LDA∫ρ^{4/3} − c(∫|∇ρ^{1/3}|²)^{1/4}(∫ρ^{4/3})^{3/4}`
    ChainL14,
}

impl BoundVariant {
    pub const ALL: [BoundVariant; 6] = [
        BoundVariant::Classic168,
        BoundVariant::Classic164,
        BoundVariant::GradL1,
        BoundVariant::Grad13L2,
        BoundVariant::ChainL18,
        BoundVariant::ChainL14,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundVariant::Classic168 => "classic_168",
            BoundVariant::Classic164 => "classic_164",
            BoundVariant::GradL1 => "grad_l1",
            BoundVariant::Grad13L2 => "grad13_l2",
            BoundVariant::ChainL18 => "chain_l18",
            BoundVariant::ChainL14 => "chain_l14",
        }
    }

    fn needs_grad13(self) -> bool {
        matches!(
            self,
            BoundVariant::Grad13L2 | BoundVariant::ChainL18 | BoundVariant::ChainL14
        )
    }
}

impl fmt::Display for BoundVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoundVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown bound variant '{s}'")))
    }
}

/// Constants entering the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub source: ConstantSource,
    pub lda: f64,
    pub alpha_max: f64,
    pub grad_l1_coefficient: f64,
    pub grad13_l2_coefficient: f64,
    pub prefactor_l1: f64,
    pub prefactor_l2: f64,
    pub chain_eighth: f64,
    pub chain_quarter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantSource {
    /// The rounded constants of the published theorem.
    Published,
    /// Re-derived in double precision.
    Derived,
}

impl BoundConstants {
    /// The theorem's rounded constants.
    pub fn published() -> Self {
        Self {
            source: ConstantSource::Published,
            lda: 1.45079,
            alpha_max: 0.3528,
            grad_l1_coefficient: 0.001206,
            grad13_l2_coefficient: 0.2097,
            prefactor_l1: 0.3270,
            prefactor_l2: 1.1227,
            chain_eighth: 0.4304,
            chain_quarter: 0.7651,
        }
    }

    /// Re-derives every constant; `maximal_constant` is the norm constant
    /// of the screened maximal function.
    pub fn derived(maximal_constant: f64) -> Result<Self> {
        let k1 = derive_grad_l1_coefficient()?;
        let k2 = derive_grad13_l2_coefficient(maximal_constant)?;
        let p1 = optimized_prefactor(k1, GradPower::Cubic);
        let p2 = optimized_prefactor(k2, GradPower::Quadratic);
        let chain = chain_constants(p1, p2);
        Ok(Self {
            source: ConstantSource::Derived,
            lda: derive_lda_constant()?.value,
            alpha_max: alpha_max(),
            grad_l1_coefficient: k1,
            grad13_l2_coefficient: k2,
            prefactor_l1: p1,
            prefactor_l2: p2,
            chain_eighth: chain.c_eighth,
            chain_quarter: chain.c_quarter,
        })
    }
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self::published()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub density: String,
    pub f_rho43: f64,
    pub f_grad_l1: f64,
    /// `None` when the functional diverges.
    pub f_grad13_l2: Option<f64>,
    pub variant: BoundVariant,
    pub alpha: Option<f64>,
    /// Coefficient multiplying the variant's defining term.
    pub constant_used: f64,
    pub bound_value: f64,
    /// The α-validity cap was exceeded; the classic 1.68 bound is reported.
    pub clamped: bool,
    pub constants: ConstantSource,
}

/// Evaluates one variant from precomputed functional values.
pub fn assemble_bound(
    values: &FunctionalValues,
    variant: BoundVariant,
    alpha: Option<f64>,
    constants: &BoundConstants,
    density: &str,
) -> Result<BoundReport> {
    let f43 = values.f_rho43;
    if !(f43.is_finite() && f43 >= 0.0) {
        return Err(Error::InvalidDensity(format!("∫ρ^(4/3) = {f43}")));
    }
    let grad13 = || {
        values.f_grad13_l2.ok_or_else(|| {
            Error::Divergent(format!("{variant} needs ∫|∇ρ^(1/3)|², which diverges"))
        })
    };
    if variant.needs_grad13() {
        grad13()?;
    }
    if let Some(a) = alpha {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("α must be positive, got {a}")));
        }
    }
    let base = |constant_used, bound_value, alpha, clamped| BoundReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        density: density.to_string(),
        f_rho43: f43,
        f_grad_l1: values.f_grad_l1,
        f_grad13_l2: values.f_grad13_l2,
        variant,
        alpha,
        constant_used,
        bound_value,
        clamped,
        constants: constants.source,
    };
    let report = match variant {
        BoundVariant::Classic168 => base(LIEB_OXFORD_CONSTANT, -LIEB_OXFORD_CONSTANT * f43, None, false),
        BoundVariant::Classic164 => base(CHAN_HANDY_CONSTANT, -CHAN_HANDY_CONSTANT * f43, None, false),
        BoundVariant::GradL1 | BoundVariant::Grad13L2 => {
            let (k, power, fg) = if variant == BoundVariant::GradL1 {
                (constants.grad_l1_coefficient, GradPower::Cubic, values.f_grad_l1)
            } else {
                (constants.grad13_l2_coefficient, GradPower::Quadratic, grad13()?)
            };
            let (a, correction) = match alpha {
                Some(a) => (a, a * f43 + k * a.powi(-power.exponent()) * fg),
                None => {
                    let o = optimize_alpha(k, power, f43, fg)?;
                    (o.alpha, o.correction)
                }
            };
            if fg == 0.0 && alpha.is_none() {
                base(k, -constants.lda * f43, None, false)
            } else if a > constants.alpha_max {
                base(LIEB_OXFORD_CONSTANT, -LIEB_OXFORD_CONSTANT * f43, Some(a), true)
            } else {
                base(k, -constants.lda * f43 - correction, Some(a), false)
            }
        }
        BoundVariant::ChainL18 => {
            let g = grad13()?;
            let c = constants.chain_eighth;
            base(c, -constants.lda * f43 - c * g.powf(0.125) * f43.powf(0.875), None, false)
        }
        BoundVariant::ChainL14 => {
            let g = grad13()?;
            let c = constants.chain_quarter;
            base(c, -constants.lda * f43 - c * g.powf(0.25) * f43.powf(0.75), None, false)
        }
    };
    Ok(report)
}

/// Computes the functionals of `rho` and assembles `variant`.
pub fn evaluate_bound(
    rho: &DensityField,
    variant: BoundVariant,
    alpha: Option<f64>,
    constants: &BoundConstants,
) -> Result<BoundReport> {
    let values = FunctionalValues::compute(rho)?;
    assemble_bound(&values, variant, alpha, constants, &rho.describe())
}
