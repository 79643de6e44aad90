use std::f64::consts::PI;

/// Gaussian tail `∫_a^∞ e^{-s²} ds = (√π / 2) erfc(a)`.
pub fn gaussian_tail(a: f64) -> f64 {
    0.5 * PI.sqrt() * libm::erfc(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadConfig};

    #[test]
    fn tail_matches_direct_quadrature() {
        let cfg = QuadConfig {
            rel_tol: 1e-13,
            abs_tol: 0.0,
            max_intervals: 4000,
        };
        for &a in &[0.0, 0.3, 1.0, 2.5, 5.0] {
            let q = integrate(&|s: f64| (-s * s).exp(), a, f64::INFINITY, &cfg).unwrap();
            let t = gaussian_tail(a);
            assert!(((t - q.value) / q.value).abs() < 1e-12, "a = {a}: {t} vs {}", q.value);
        }
        assert!((gaussian_tail(0.0) - PI.sqrt() / 2.0).abs() < 1e-15);
    }
}
