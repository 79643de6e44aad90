//! Electron densities: analytic radial models and uniform Cartesian grids.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadConfig};

/// Density-independent shape of a radial model, at unit length scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum RadialShape {
    /// `e^{−π r²}`
    Gaussian,
    /// `e^{−r}`
    Exponential,
    /// indicator of `r ≤ 1`
    UniformBall,
    /// Fermi profile `1 / (1 + e^{(r−1)/σ})`
    SmoothedBall { sigma: f64 },
}

impl RadialShape {
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            RadialShape::Gaussian => (-PI * r * r).exp(),
            RadialShape::Exponential => (-r).exp(),
            RadialShape::UniformBall => {
                if r <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            RadialShape::SmoothedBall { sigma } => fermi((r - 1.0) / sigma),
        }
    }

    /// Derivative away from jump points.
    pub fn derivative(&self, r: f64) -> f64 {
        match *self {
            RadialShape::Gaussian => -2.0 * PI * r * (-PI * r * r).exp(),
            RadialShape::Exponential => -(-r).exp(),
            RadialShape::UniformBall => 0.0,
            RadialShape::SmoothedBall { sigma } => {
                let u = (r - 1.0) / sigma;
                let f = fermi(u);
                // f' = −f(1−f)/σ, with 1 − f = fermi(−u) to avoid cancellation
                -f * fermi(-u) / sigma
            }
        }
    }

    /// Jump discontinuities `(radius, |jump|)`.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        match self {
            RadialShape::UniformBall => vec![(1.0, 1.0)],
            _ => Vec::new(),
        }
    }

    /// Outer radius of the support (infinite for non-compact shapes).
    pub fn support_end(&self) -> f64 {
        match self {
            RadialShape::UniformBall => 1.0,
            _ => f64::INFINITY,
        }
    }

    /// Radius past which the shape is below `1e-30` of its maximum.
    pub fn negligible_radius(&self) -> f64 {
        match *self {
            RadialShape::Gaussian => (30.0 * 10f64.ln() / PI).sqrt(),
            RadialShape::Exponential => 30.0 * 10f64.ln(),
            RadialShape::UniformBall => 1.0,
            RadialShape::SmoothedBall { sigma } => 1.0 + sigma * 30.0 * 10f64.ln(),
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.jumps().is_empty()
    }

    pub fn name(&self) -> &'static str {
        match self {
            RadialShape::Gaussian => "gaussian",
            RadialShape::Exponential => "exponential",
            RadialShape::UniformBall => "uniform_ball",
            RadialShape::SmoothedBall { .. } => "smoothed_ball",
        }
    }

    /// `∫ 4π r² shape(r) dr`.
    pub fn mass(&self) -> Result<f64> {
        match *self {
            RadialShape::Gaussian => Ok(1.0),
            RadialShape::Exponential => Ok(8.0 * PI),
            RadialShape::UniformBall => Ok(4.0 * PI / 3.0),
            RadialShape::SmoothedBall { .. } => {
                let end = self.negligible_radius();
                let q = integrate_with_breaks(
                    &|r: f64| 4.0 * PI * r * r * self.value(r),
                    &[0.0, 1.0, end],
                    &QuadConfig::with_rel_tol(1e-13),
                )?;
                Ok(q.value)
            }
        }
    }
}

fn fermi(u: f64) -> f64 {
    if u > 0.0 {
        let e = (-u).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + u.exp())
    }
}

/// Analytic radial density `ρ(x) = amplitude · shape(dilation · |x|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialDensity {
    pub shape: RadialShape,
    pub amplitude: f64,
    pub dilation: f64,
}

impl RadialDensity {
    pub fn new(shape: RadialShape, amplitude: f64, dilation: f64) -> Result<Self> {
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidDensity(format!("amplitude {amplitude}")));
        }
        if !(dilation > 0.0 && dilation.is_finite()) {
            return Err(Error::InvalidDensity(format!("dilation {dilation}")));
        }
        if let RadialShape::SmoothedBall { sigma } = shape {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::InvalidDensity(format!("softness {sigma}")));
            }
        }
        Ok(Self {
            shape,
            amplitude,
            dilation,
        })
    }

    /// `N w⁻³ e^{−π r²/w²}`.
    pub fn gaussian(width: f64, n: f64) -> Result<Self> {
        positive("width", width)?;
        Self::new(RadialShape::Gaussian, n / width.powi(3), 1.0 / width)
    }

    /// `N e^{−r/a} / (8π a³)`.
    pub fn exponential(decay: f64, n: f64) -> Result<Self> {
        positive("decay length", decay)?;
        Self::new(
            RadialShape::Exponential,
            n / (8.0 * PI * decay.powi(3)),
            1.0 / decay,
        )
    }

    /// `N` spread uniformly over the ball of radius `R`.
    pub fn uniform_ball(radius: f64, n: f64) -> Result<Self> {
        positive("radius", radius)?;
        Self::new(
            RadialShape::UniformBall,
            3.0 * n / (4.0 * PI * radius.powi(3)),
            1.0 / radius,
        )
    }

    /// Fermi-smoothed ball of radius `R` and edge width `softness`, normalized to `N`.
    pub fn smoothed_ball(radius: f64, softness: f64, n: f64) -> Result<Self> {
        positive("radius", radius)?;
        positive("softness", softness)?;
        let shape = RadialShape::SmoothedBall {
            sigma: softness / radius,
        };
        let mass = shape.mass()?;
        Self::new(shape, n / (radius.powi(3) * mass), 1.0 / radius)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.amplitude * self.shape.value(self.dilation * r)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.amplitude * self.dilation * self.shape.derivative(self.dilation * r)
    }

    pub fn max_value(&self) -> f64 {
        self.value(0.0)
    }

    /// Jumps in physical radius.
    pub fn jumps(&self) -> Vec<(f64, f64)> {
        self.shape
            .jumps()
            .into_iter()
            .map(|(r, j)| (r / self.dilation, j * self.amplitude))
            .collect()
    }

    /// Sorted radial breakpoints for quadrature, ending at the cutoff radius.
    pub fn breakpoints(&self) -> Vec<f64> {
        let end = self.cutoff_radius();
        let mut pts = vec![0.0, end];
        if let RadialShape::SmoothedBall { .. } = self.shape {
            pts.push(1.0 / self.dilation);
        }
        for (r, _) in self.jumps() {
            pts.push(r);
        }
        pts.retain(|p| *p <= end);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Radius beyond which `ρ` is negligible (or zero).
    pub fn cutoff_radius(&self) -> f64 {
        self.shape.negligible_radius() / self.dilation
    }

    pub fn particle_number(&self) -> Result<f64> {
        Ok(self.amplitude * self.shape.mass()? / self.dilation.powi(3))
    }

    /// `∫ρ` by quadrature, independent of the closed-form mass.
    pub fn integrated_number(&self) -> Result<f64> {
        Ok(integrate_with_breaks(
            &|r: f64| 4.0 * PI * r * r * self.value(r),
            &self.breakpoints(),
            &QuadConfig::with_rel_tol(1e-12),
        )?
        .value)
    }

    /// `Z² ρ(Z^{1/3} x)`.
    pub fn tf_scaled(&self, z: f64) -> Result<Self> {
        positive("Z", z)?;
        Self::new(self.shape, self.amplitude * z * z, self.dilation * z.cbrt())
    }

    /// `λ³ ρ(λ x)`: mass-preserving dilation.
    pub fn dilated(&self, lambda: f64) -> Result<Self> {
        positive("λ", lambda)?;
        Self::new(self.shape, self.amplitude * lambda.powi(3), self.dilation * lambda)
    }

    /// `c ρ`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.shape, self.amplitude * c, self.dilation)
    }

    pub fn describe(&self) -> String {
        format!(
            "{}(amplitude={:.6e}, dilation={:.6e})",
            self.shape.name(),
            self.amplitude,
            self.dilation
        )
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidDensity(format!("{name} must be positive, got {v}")))
    }
}

/// Density sampled on a uniform Cartesian grid; the value array is indexed
/// with `z` fastest, then `y`, then `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub values: Vec<f64>,
    /// Wrap-around neighbours in finite differences.
    pub periodic: bool,
}

impl GridDensity {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3], values: Vec<f64>) -> Result<Self> {
        let n = dims[0] * dims[1] * dims[2];
        if values.len() != n {
            return Err(Error::InvalidDensity(format!(
                "grid declares {n} points but holds {} values",
                values.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidDensity("empty grid axis".into()));
        }
        for (i, h) in spacing.iter().enumerate() {
            if !(*h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidDensity(format!("axis {i} spacing {h}")));
            }
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidDensity(format!(
                "value {v} at flat index {i} is negative or not finite"
            )));
        }
        Ok(Self {
            dims,
            spacing,
            origin,
            values,
            periodic: false,
        })
    }

    pub fn with_periodic(mut self, periodic: bool) -> Self {
        self.periodic = periodic;
        self
    }

    /// Samples `f` at grid nodes `origin + (i, j, k) · spacing`.
    pub fn sample<F: Fn([f64; 3]) -> f64>(
        dims: [usize; 3],
        spacing: [f64; 3],
        origin: [f64; 3],
        f: F,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    values.push(f([
                        origin[0] + i as f64 * spacing[0],
                        origin[1] + j as f64 * spacing[1],
                        origin[2] + k as f64 * spacing[2],
                    ]));
                }
            }
        }
        Self::new(dims, spacing, origin, values)
    }

    /// Samples a radial density on the cube `[−L, L]³` with `n` points per
    /// axis (cell-centred, so the origin is avoided for even `n`).
    pub fn sample_radial(rho: &RadialDensity, half_width: f64, n: usize) -> Result<Self> {
        let h = 2.0 * half_width / n as f64;
        let o = -half_width + 0.5 * h;
        Self::sample([n; 3], [h; 3], [o; 3], |x| {
            rho.value((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt())
        })
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn particle_number(&self) -> f64 {
        crate::reduce::pairwise_sum(&self.values) * self.cell_volume()
    }

    /// Every other node along each axis (spacing doubled).
    pub fn coarsened(&self) -> Result<Self> {
        let dims = self.dims.map(|d| d.div_ceil(2));
        let mut values = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    values.push(self.values[self.index(2 * i, 2 * j, 2 * k)]);
                }
            }
        }
        Ok(Self {
            dims,
            spacing: self.spacing.map(|h| 2.0 * h),
            origin: self.origin,
            values,
            periodic: self.periodic,
        })
    }

    /// `Z² ρ(Z^{1/3} x)` on the correspondingly contracted grid.
    pub fn tf_scaled(&self, z: f64) -> Result<Self> {
        positive("Z", z)?;
        let s = z.cbrt();
        Ok(Self {
            dims: self.dims,
            spacing: self.spacing.map(|h| h / s),
            origin: self.origin.map(|o| o / s),
            values: self.values.iter().map(|v| v * z * z).collect(),
            periodic: self.periodic,
        })
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::InvalidDensity(format!("scale factor {c}")));
        }
        Ok(Self {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        })
    }
}

/// A non-negative density on ℝ³.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensityField {
    AnalyticRadial(RadialDensity),
    CartesianGrid(GridDensity),
}

impl DensityField {
    pub fn particle_number(&self) -> Result<f64> {
        match self {
            DensityField::AnalyticRadial(r) => r.particle_number(),
            DensityField::CartesianGrid(g) => Ok(g.particle_number()),
        }
    }

    pub fn tf_scaled(&self, z: f64) -> Result<Self> {
        Ok(match self {
            DensityField::AnalyticRadial(r) => DensityField::AnalyticRadial(r.tf_scaled(z)?),
            DensityField::CartesianGrid(g) => DensityField::CartesianGrid(g.tf_scaled(z)?),
        })
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Ok(match self {
            DensityField::AnalyticRadial(r) => DensityField::AnalyticRadial(r.scaled(c)?),
            DensityField::CartesianGrid(g) => DensityField::CartesianGrid(g.scaled(c)?),
        })
    }

    pub fn describe(&self) -> String {
        match self {
            DensityField::AnalyticRadial(r) => r.describe(),
            DensityField::CartesianGrid(g) => format!(
                "grid {}x{}x{} spacing ({:.4e}, {:.4e}, {:.4e})",
                g.dims[0], g.dims[1], g.dims[2], g.spacing[0], g.spacing[1], g.spacing[2]
            ),
        }
    }
}

/// Structured analytic density description, `{type, parameters, N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AnalyticSpec {
    Gaussian { width: f64, n: f64 },
    Exponential { decay: f64, n: f64 },
    UniformBall { radius: f64, n: f64 },
    SmoothedBall { radius: f64, softness: f64, n: f64 },
}

impl AnalyticSpec {
    pub fn build(&self) -> Result<RadialDensity> {
        match *self {
            AnalyticSpec::Gaussian { width, n } => RadialDensity::gaussian(width, n),
            AnalyticSpec::Exponential { decay, n } => RadialDensity::exponential(decay, n),
            AnalyticSpec::UniformBall { radius, n } => RadialDensity::uniform_ball(radius, n),
            AnalyticSpec::SmoothedBall {
                radius,
                softness,
                n,
            } => RadialDensity::smoothed_ball(radius, softness, n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_masses_match_quadrature() {
        for rho in [
            RadialDensity::gaussian(1.0, 1.0).unwrap(),
            RadialDensity::gaussian(0.4, 3.0).unwrap(),
            RadialDensity::exponential(0.7, 2.0).unwrap(),
            RadialDensity::uniform_ball(1.3, 5.0).unwrap(),
            RadialDensity::smoothed_ball(2.0, 0.2, 4.0).unwrap(),
        ] {
            let n = rho.particle_number().unwrap();
            let q = rho.integrated_number().unwrap();
            assert!(((n - q) / n).abs() < 1e-6, "{}: {n} vs {q}", rho.describe());
        }
    }

    #[test]
    fn unit_gaussian_is_exp_minus_pi_r2() {
        let g = RadialDensity::gaussian(1.0, 1.0).unwrap();
        assert_eq!(g.value(0.7), (-PI * 0.49f64).exp());
    }

    #[test]
    fn smoothed_derivative_matches_finite_difference() {
        let rho = RadialDensity::smoothed_ball(1.5, 0.1, 1.0).unwrap();
        let h = 1e-6;
        for r in [0.5, 1.4, 1.5, 1.7, 3.0] {
            let fd = (rho.value(r + h) - rho.value(r - h)) / (2.0 * h);
            assert!((fd - rho.derivative(r)).abs() < 1e-6 * rho.max_value().max(1.0));
        }
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(GridDensity::new([2, 2, 2], [1.0; 3], [0.0; 3], vec![0.0; 7]).is_err());
        let mut v = vec![1.0; 8];
        v[3] = -1e-3;
        assert!(matches!(
            GridDensity::new([2, 2, 2], [1.0; 3], [0.0; 3], v),
            Err(Error::InvalidDensity(_))
        ));
        assert!(GridDensity::new([2, 2, 2], [0.0, 1.0, 1.0], [0.0; 3], vec![0.0; 8]).is_err());
    }

    #[test]
    fn grid_indexing_is_z_fastest() {
        let g = GridDensity::sample([2, 3, 4], [1.0; 3], [0.0; 3], |x| {
            100.0 * x[0] + 10.0 * x[1] + x[2]
        })
        .unwrap();
        assert_eq!(g.values[1], 1.0);
        assert_eq!(g.values[4], 10.0);
        assert_eq!(g.values[12], 100.0);
        assert_eq!(g.values[g.index(1, 2, 3)], 123.0);
    }

    #[test]
    fn grid_number_for_gaussian() {
        let rho = RadialDensity::gaussian(1.0, 1.0).unwrap();
        let g = GridDensity::sample_radial(&rho, 4.0, 40).unwrap();
        assert!((g.particle_number() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn spec_round_trips_through_json() {
        let s: AnalyticSpec =
            serde_json::from_str(r#"{"type":"smoothed_ball","radius":2.0,"softness":0.1,"n":3.0}"#)
                .unwrap();
        let rho = s.build().unwrap();
        assert!((rho.particle_number().unwrap() - 3.0).abs() < 1e-12);
    }
}
