//! One-dimensional adaptive Gauss-Kronrod integration and fixed product rules
//! on triangles and tetrahedra.

// Node tables are kept at the precision they are published with.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights at the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_intervals: 2000,
        }
    }
}

impl QuadConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Single 15-point Kronrod panel; returns (K15 estimate, |K15 - G7|).
pub fn gauss_kronrod_15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// Non-finite `b` maps the half line through `x = a + t / (1 - t)`.
pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    if b.is_infinite() && b > 0.0 {
        let mapped = |t: f64| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let v = f(a + t / s);
            if v == 0.0 {
                0.0
            } else {
                v / (s * s)
            }
        };
        return integrate_finite(&mapped, 0.0, 1.0, cfg);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("unsupported interval [{a}, {b}]")));
    }
    integrate_finite(f, a, b, cfg)
}

/// Integrates over consecutive sub-intervals split at `points` (sorted,
/// the first and last entries are the outer limits; the last may be +inf).
pub fn integrate_with_breaks<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    points: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let mut total = QuadResult {
        value: 0.0,
        abs_error: 0.0,
        evaluations: 0,
    };
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let r = integrate(f, w[0], w[1], cfg)?;
        total.value += r.value;
        total.abs_error += r.abs_error;
        total.evaluations += r.evaluations;
    }
    Ok(total)
}

fn integrate_finite<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let (v, e) = gauss_kronrod_15(f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value: v,
        error: e,
    });
    let mut value = v;
    let mut error = e;
    loop {
        let target = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        if error <= target {
            break;
        }
        if heap.len() >= cfg.max_intervals {
            return Err(Error::Quadrature {
                achieved: error,
                requested: target,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine precision
            heap.push(Segment { error: 0.0, ..worst });
            error -= worst.error;
            if heap.iter().all(|s| s.error == 0.0) {
                break;
            }
            continue;
        }
        let (v1, e1) = gauss_kronrod_15(f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_15(f, mid, worst.b);
        evaluations += 30;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // re-sum to shed drift from the running updates
    let mut parts: Vec<(f64, f64, f64)> = heap.iter().map(|s| (s.a, s.value, s.error)).collect();
    parts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let vals: Vec<f64> = parts.iter().map(|p| p.1).collect();
    let errs: Vec<f64> = parts.iter().map(|p| p.2).collect();
    Ok(QuadResult {
        value: crate::reduce::pairwise_sum(&vals),
        abs_error: crate::reduce::pairwise_sum(&errs),
        evaluations,
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Applies the rule on `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(&self, f: &F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(c + h * x);
        }
        acc * h
    }

    /// Nodes and weights mapped to `[0, 1]`.
    pub fn unit_interval(&self) -> Vec<(f64, f64)> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Collapsed (Duffy) product rule on the reference triangle
/// `{(u, v): u, v >= 0, u + v <= 1}`; weights sum to 1/2.
pub fn triangle_rule(n: usize) -> Vec<([f64; 2], f64)> {
    let gl = GaussLegendre::new(n).unit_interval();
    let mut out = Vec::with_capacity(n * n);
    for &(s, ws) in &gl {
        for &(t, wt) in &gl {
            let u = s;
            let v = t * (1.0 - s);
            out.push(([u, v], ws * wt * (1.0 - s)));
        }
    }
    out
}

/// Collapsed product rule on the reference tetrahedron; weights sum to 1/6.
pub fn tetrahedron_rule(n: usize) -> Vec<([f64; 3], f64)> {
    let gl = GaussLegendre::new(n).unit_interval();
    let mut out = Vec::with_capacity(n * n * n);
    for &(s, ws) in &gl {
        for &(t, wt) in &gl {
            for &(r, wr) in &gl {
                let u = s;
                let v = t * (1.0 - s);
                let w = r * (1.0 - s) * (1.0 - t);
                let jac = (1.0 - s) * (1.0 - s) * (1.0 - t);
                out.push(([u, v, w], ws * wt * wr * jac));
            }
        }
    }
    out
}

/// Four-point symmetric tetrahedron rule, exact for quadratics; weights sum to 1/6.
pub fn tetrahedron_rule_degree2() -> Vec<([f64; 3], f64)> {
    let a = 0.585_410_196_624_968_5;
    let b = 0.138_196_601_125_010_5;
    let w = 1.0 / 24.0;
    vec![([a, b, b], w), ([b, a, b], w), ([b, b, a], w), ([b, b, b], w)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let k: f64 = WGK[7] + 2.0 * WGK[..7].iter().sum::<f64>();
        let g: f64 = WG[3] + 2.0 * WG[..3].iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_panel_exact_for_polynomials() {
        let (v, e) = gauss_kronrod_15(&|x: f64| x.powi(12) - 3.0 * x.powi(5), 0.0, 1.0);
        assert!((v - (1.0 / 13.0 - 0.5)).abs() < 1e-15);
        assert!(e < 1e-14);
    }

    #[test]
    fn adaptive_handles_kinks_and_half_lines() {
        let cfg = QuadConfig::with_rel_tol(1e-10);
        let r = integrate(&|x: f64| (x - 0.3).abs(), 0.0, 1.0, &cfg).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-10);
        let r = integrate(&|x: f64| (-x * x).exp(), 0.0, f64::INFINITY, &cfg).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-10);
        let r = integrate(&|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &cfg).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let cfg = QuadConfig {
            rel_tol: 1e-14,
            abs_tol: 0.0,
            max_intervals: 4,
        };
        let err = integrate(&|x: f64| (50.0 * x).sin() / x.max(1e-300).sqrt(), 0.0, 10.0, &cfg);
        assert!(matches!(err, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
        let gl = GaussLegendre::new(6);
        let v = gl.integrate(&|x: f64| x.powi(11) + x.powi(10), -1.0, 1.0);
        assert!((v - 2.0 / 11.0).abs() < 1e-14);
        let gl = GaussLegendre::new(1);
        assert_eq!(gl.nodes, vec![0.0]);
    }

    #[test]
    fn simplex_rules_integrate_monomials() {
        // int_T u^2 v = 2! 1! / 5! = 1/60
        let tri: f64 = triangle_rule(4).iter().map(|(p, w)| w * p[0] * p[0] * p[1]).sum();
        assert!((tri - 1.0 / 60.0).abs() < 1e-15);
        // int_T u v w = 1/720
        let tet: f64 = tetrahedron_rule(3).iter().map(|(p, w)| w * p[0] * p[1] * p[2]).sum();
        assert!((tet - 1.0 / 720.0).abs() < 1e-15);
        // int_T u^2 = 2/120
        let q: f64 = tetrahedron_rule_degree2().iter().map(|(p, w)| w * p[0] * p[0]).sum();
        assert!((q - 1.0 / 60.0).abs() < 1e-15);
    }
}
