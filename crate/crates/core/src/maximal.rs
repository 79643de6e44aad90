//! The screened maximal function
//! `M_f(z) = sup_{r>0} r⁻³ ∫ χ(|u|/r) |f(z+u)| du`
//! and the two derivations of its `L² → L²` norm constant.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernel::{chi_derivative_raw, chi_raw, r_star, CriticalPoints, RadialProfile};
use crate::optimize::{golden_min, grid_then_golden_max};
use crate::quadrature::{integrate, integrate_with_breaks, GaussLegendre, QuadConfig};
use crate::reduce::{pairwise_sum, par_map};
use crate::special::gaussian_tail;

/// Slack allowed on the lemma ratio for grid discretization.
pub const LEMMA_GRID_SLACK: f64 = 0.01;
/// Published heat-kernel norm constant used as the verification threshold.
pub const LEMMA_CONSTANT: f64 = 7.5831;
/// Samples of `[r*, 1]` in the supremum defining `K(T)`.
pub const K_SUP_SAMPLES: usize = 10_000;
/// Bracket for the minimization of `K(T)`.
pub const K_MIN_BRACKET: (f64, f64) = (1e-3, 10.0);

/// Dilation radii scanned for the supremum, plus refinement settings.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalGrid {
    pub radii: Vec<f64>,
    /// Golden-section tolerance, relative to the bracketing radius.
    pub refine_rel_tol: f64,
    pub quad: QuadConfig,
}

impl MaximalGrid {
    /// `points_per_decade` log-spaced radii on `[lo, hi]`.
    pub fn log_spaced(lo: f64, hi: f64, points_per_decade: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) || points_per_decade == 0 {
            return domain(format!("bad dilation range [{lo}, {hi}]"));
        }
        let decades = (hi / lo).log10();
        let n = (decades * points_per_decade as f64).ceil() as usize + 1;
        let radii = (0..n)
            .map(|i| lo * 10f64.powf(decades * i as f64 / (n - 1) as f64))
            .collect();
        Ok(Self {
            radii,
            refine_rel_tol: 1e-9,
            quad: QuadConfig {
                rel_tol: 1e-9,
                abs_tol: 1e-300,
                max_intervals: 400,
            },
        })
    }
}

impl Default for MaximalGrid {
    fn default() -> Self {
        Self::log_spaced(1e-3, 1e3, 25).expect("static range")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalValue {
    pub value: f64,
    /// Dilation radius attaining the supremum.
    pub radius: f64,
}

/// Supremum over the grid, golden refinement, and the vanishing-dilation
/// limit (the Lebesgue-point value, attained only as `r → 0`).
fn sup_over_grid<F: Fn(f64) -> f64>(g: F, grid: &MaximalGrid) -> MaximalValue {
    let (mut radius, mut value) = grid_then_golden_max(
        &g,
        &grid.radii,
        grid.refine_rel_tol * grid.radii[grid.radii.len() / 2],
    );
    let tiny = 1e-6 * grid.radii[0];
    let v0 = g(tiny);
    if v0 > value {
        (radius, value) = (tiny, v0);
    }
    if value <= 0.0 {
        return MaximalValue { value: 0.0, radius };
    }
    MaximalValue { value, radius }
}

/// Maximal function of a radial `f` (profile in `|x|`), evaluated at points
/// at distance `d` from the centre of symmetry.
///
/// The sphere average of a radial function about a point at distance `d` is
/// one-dimensional: `∫_{S²} |f(z + sω)| dω = (2π / ds) ∫_{|d−s|}^{d+s} |f(t)| t dt`.
#[derive(Debug, Clone)]
pub struct RadialMaximal {
    f: RadialProfile,
    grid: MaximalGrid,
    l2_norm: f64,
    extent: f64,
    table: CumulativeTable,
}

impl RadialMaximal {
    pub fn new(f: RadialProfile, grid: MaximalGrid) -> Result<Self> {
        let (l2_norm, extent) = radial_l2_norm_and_extent(&f)?;
        let table = CumulativeTable::build(&f)?;
        Ok(Self {
            f,
            grid,
            l2_norm,
            extent,
            table,
        })
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.f
    }

    /// `‖f‖₂` over ℝ³.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    /// Radius beyond which `f` carries a negligible share of `‖f‖₂²`.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    fn breakpoints(&self, a: f64, b: f64, d: f64, extra: &[f64]) -> Vec<f64> {
        let (lo, hi) = self.f.support();
        let mut pts = vec![a, b];
        for e in [lo, hi] {
            if e.is_finite() {
                pts.extend([(d - e).abs(), d + e]);
            }
        }
        pts.extend_from_slice(extra);
        pts.retain(|p| p.is_finite() && *p >= a && *p <= b);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * b.abs().max(1.0));
        pts
    }

    /// `∫_{S²} |f(z + sω)| dω` for `|z| = d`.
    pub fn sphere_integral(&self, d: f64, s: f64) -> f64 {
        if s <= 0.0 {
            return 4.0 * PI * self.f.eval(d).abs();
        }
        if d <= 1e-12 * s {
            return 4.0 * PI * self.f.eval(s).abs();
        }
        let (a, b) = ((d - s).abs(), d + s);
        let (lo, hi) = self.f.support();
        let (a, b) = (a.max(lo), b.min(hi));
        if b <= a {
            return 0.0;
        }
        let q = if b - a < 4.0 * self.table.min_cell {
            // short window: direct rule avoids cancellation in F(b) − F(a)
            self.table.gl.integrate(&|t: f64| self.f.eval(t).abs() * t, a, b)
        } else {
            self.table.eval(&self.f, b) - self.table.eval(&self.f, a)
        };
        2.0 * PI / (d * s) * q
    }

    /// `r⁻³ ∫ χ(|u|/r) |f(z+u)| du` at one dilation radius.
    pub fn dilation_average(&self, d: f64, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let (a, b) = (r * r_star(), r);
        let pts = self.breakpoints(a, b, d, &[d]);
        let g = |s: f64| s * s * chi_raw(s / r) * self.sphere_integral(d, s);
        let v = integrate_with_breaks(&g, &pts, &self.grid.quad)
            .map(|q| q.value)
            .unwrap_or_else(|_| {
                pts.windows(2)
                    .map(|w| adaptive_fallback(&g, w[0], w[1]))
                    .sum()
            });
        v / (r * r * r)
    }

    /// `M_f` at distance `d` from the centre.
    pub fn eval(&self, d: f64) -> Result<MaximalValue> {
        if d.is_nan() || d < 0.0 {
            return domain(format!("distance must be non-negative, got {d}"));
        }
        Ok(sup_over_grid(|r| self.dilation_average(d, r), &self.grid))
    }

    /// `‖M_f‖₂` by composite Gauss-Legendre in `|z|` on `[0, 4·extent]`
    /// with a `|z|⁻³` tail beyond.
    pub fn maximal_l2_norm(&self) -> Result<MaximalNorm> {
        if self.l2_norm == 0.0 {
            return Ok(MaximalNorm {
                value: 0.0,
                tail_share: 0.0,
            });
        }
        let outer = 4.0 * self.extent;
        let panels = 24;
        let gl = GaussLegendre::new(8);
        let mut edges: Vec<f64> = (0..=panels).map(|i| outer * i as f64 / panels as f64).collect();
        let (lo, hi) = self.f.support();
        for e in [lo, hi] {
            if e > 0.0 && e < outer {
                edges.push(e);
            }
        }
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        let mut nodes = Vec::new();
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            for (x, wt) in gl.unit_interval() {
                nodes.push((a + (b - a) * x, (b - a) * wt));
            }
        }
        let vals = par_map(&nodes, |&(d, w)| {
            self.eval(d).map(|m| 4.0 * PI * d * d * m.value * m.value * w)
        });
        let vals: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
        let body = pairwise_sum(&vals);
        let m_out = self.eval(outer)?.value;
        let tail = 4.0 * PI * m_out * m_out * outer.powi(3) / 3.0;
        let total = body + tail;
        Ok(MaximalNorm {
            value: total.sqrt(),
            tail_share: tail / total,
        })
    }
}

/// `F(t) = ∫_0^t |f(τ)| τ dτ` tabulated on a uniform mesh (plus support
/// edges) and interpolated by cubic Hermite with the exact slope `t|f(t)|`.
#[derive(Debug, Clone)]
struct CumulativeTable {
    nodes: Vec<f64>,
    values: Vec<f64>,
    min_cell: f64,
    gl: GaussLegendre,
}

const TABLE_CELLS: usize = 20_000;

impl CumulativeTable {
    fn build(f: &RadialProfile) -> Result<Self> {
        let (lo, hi) = f.support();
        let g = |t: f64| f.eval(t).abs() * t;
        let end = if hi.is_finite() {
            hi
        } else {
            // where the first moment tail drops below 1e-15 of the total
            let cfg = QuadConfig {
                rel_tol: 1e-10,
                abs_tol: 1e-300,
                max_intervals: 2000,
            };
            let total = integrate(&g, lo, f64::INFINITY, &cfg)
                .map_err(|e| Error::Domain(format!("profile '{}' has no first moment: {e}", f.label())))?
                .value;
            let mut r = lo.max(1e-6);
            let mut found = None;
            for _ in 0..400 {
                let tail = integrate(&g, r, f64::INFINITY, &cfg).map(|q| q.value).unwrap_or(0.0);
                if tail <= 1e-15 * total {
                    found = Some(r);
                    break;
                }
                r *= 1.1;
            }
            found.ok_or_else(|| Error::Domain(format!("profile '{}' decays too slowly", f.label())))?
        };
        let mut nodes: Vec<f64> = (0..=TABLE_CELLS)
            .map(|i| end * i as f64 / TABLE_CELLS as f64)
            .collect();
        if lo > 0.0 && lo < end {
            nodes.push(lo);
        }
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let gl = GaussLegendre::new(8);
        let mut values = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        values.push(0.0);
        for w in nodes.windows(2) {
            acc += gl.integrate(&g, w[0], w[1]);
            values.push(acc);
        }
        Ok(Self {
            nodes,
            values,
            min_cell: end / TABLE_CELLS as f64,
            gl,
        })
    }

    fn eval(&self, f: &RadialProfile, t: f64) -> f64 {
        let n = self.nodes.len();
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.nodes[n - 1] {
            return self.values[n - 1];
        }
        let i = self.nodes.partition_point(|&x| x <= t).saturating_sub(1).min(n - 2);
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let h = x1 - x0;
        let u = (t - x0) / h;
        // one-sided slopes so a jump of f at a node stays outside the cell
        let m0 = f.eval(x0 + 1e-12 * h).abs() * x0;
        let m1 = f.eval(x1 - 1e-12 * h).abs() * x1;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * h * m0
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * h * m1
    }
}

fn adaptive_fallback(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let gl = GaussLegendre::new(48);
    let n = 16;
    (0..n)
        .map(|i| {
            let x0 = a + (b - a) * i as f64 / n as f64;
            let x1 = a + (b - a) * (i + 1) as f64 / n as f64;
            gl.integrate(f, x0, x1)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalNorm {
    pub value: f64,
    /// Fraction of `‖M_f‖₂²` from the extrapolated tail.
    pub tail_share: f64,
}

/// `‖f‖₂` of a radial profile and the radius holding all but `1e-12` of it.
fn radial_l2_norm_and_extent(f: &RadialProfile) -> Result<(f64, f64)> {
    let cfg = QuadConfig {
        rel_tol: 1e-10,
        abs_tol: 1e-300,
        max_intervals: 2000,
    };
    let (lo, hi) = f.support();
    let g = |t: f64| 4.0 * PI * t * t * f.eval(t).powi(2);
    let total = integrate(&g, lo, hi, &cfg).map_err(|e| {
        Error::Domain(format!("profile '{}' is not square-integrable: {e}", f.label()))
    })?;
    if !total.value.is_finite() {
        return domain(format!("profile '{}' is not square-integrable", f.label()));
    }
    if total.value == 0.0 {
        return Ok((0.0, 1.0));
    }
    if hi.is_finite() {
        return Ok((total.value.sqrt(), hi));
    }
    let mut r = lo.max(1e-3);
    for _ in 0..200 {
        let tail = integrate(&g, r, f64::INFINITY, &cfg).map(|q| q.value).unwrap_or(0.0);
        if tail <= 1e-12 * total.value {
            return Ok((total.value.sqrt(), r));
        }
        r *= 1.25;
    }
    domain(format!("profile '{}' decays too slowly", f.label()))
}

/// Maximal function of an arbitrary `f` on ℝ³ by product quadrature:
/// Gauss-Legendre in the shell radius and in `cos θ`, trapezoid in `φ`.
pub struct GenericMaximal<F: Fn([f64; 3]) -> f64 + Sync> {
    f: F,
    grid: MaximalGrid,
    radial: GaussLegendre,
    polar: GaussLegendre,
    azimuthal: usize,
}

impl<F: Fn([f64; 3]) -> f64 + Sync> GenericMaximal<F> {
    pub fn new(f: F, grid: MaximalGrid, radial_order: usize, angular_order: usize) -> Self {
        Self {
            f,
            grid,
            radial: GaussLegendre::new(radial_order),
            polar: GaussLegendre::new(angular_order),
            azimuthal: 2 * angular_order,
        }
    }

    fn sphere_integral(&self, z: [f64; 3], s: f64) -> f64 {
        let mut acc = Vec::with_capacity(self.polar.nodes.len() * self.azimuthal);
        let dphi = 2.0 * PI / self.azimuthal as f64;
        for (&mu, &wmu) in self.polar.nodes.iter().zip(&self.polar.weights) {
            let st = (1.0 - mu * mu).max(0.0).sqrt();
            for k in 0..self.azimuthal {
                let phi = (k as f64 + 0.5) * dphi;
                let p = [
                    z[0] + s * st * phi.cos(),
                    z[1] + s * st * phi.sin(),
                    z[2] + s * mu,
                ];
                acc.push((self.f)(p).abs() * wmu * dphi);
            }
        }
        pairwise_sum(&acc)
    }

    pub fn dilation_average(&self, z: [f64; 3], r: f64) -> f64 {
        let g = |s: f64| s * s * chi_raw(s / r) * self.sphere_integral(z, s);
        self.radial.integrate(&g, r * r_star(), r) / (r * r * r)
    }

    pub fn eval(&self, z: [f64; 3]) -> MaximalValue {
        sup_over_grid(|r| self.dilation_average(z, r), &self.grid)
    }
}

/// `C_χ = 4π ∫ s² χ(s) ds`, the value of `M` for a ball indicator inside the
/// ball (small dilations).
pub fn c_chi() -> Result<f64> {
    let q = integrate(
        &|s: f64| 4.0 * PI * s * s * chi_raw(s),
        r_star(),
        1.0,
        &QuadConfig::with_rel_tol(1e-12),
    )?;
    Ok(q.value)
}

/// `∫_{s*}^1 s³ |χ′(s)| ds` for an arbitrary derivative profile.
pub fn hl_simple_inner_with(chi_prime: &dyn Fn(f64) -> f64) -> Result<f64> {
    let cp = CriticalPoints::compute()?;
    let q = integrate(
        &|s: f64| s.powi(3) * chi_prime(s).abs(),
        cp.s_star,
        1.0,
        &QuadConfig::with_rel_tol(1e-8),
    )?;
    Ok(q.value)
}

/// `8π√3 ∫_{s*}^1 s³|χ′(s)| ds`, the norm constant from the standard
/// Hardy-Littlewood maximal inequality.
pub fn hl_constant_simple() -> Result<f64> {
    Ok(8.0 * PI * 3f64.sqrt() * hl_simple_inner_with(&chi_derivative_raw)?)
}

fn k_ratio(r: f64, t: f64) -> f64 {
    let tail = gaussian_tail(r / (2.0 * t.sqrt()));
    if tail <= 0.0 {
        return f64::INFINITY;
    }
    r * chi_raw(r) / tail
}

/// `K(T) = 2π^{3/2} T sup_{r*≤r≤1} rχ(r) / ∫_{r/2√T}^∞ e^{−s²} ds`.
pub fn k_of_t(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("K(T) needs T > 0, got {t}"));
    }
    let rs = r_star();
    let grid: Vec<f64> = (0..K_SUP_SAMPLES)
        .map(|i| rs + (1.0 - rs) * i as f64 / (K_SUP_SAMPLES - 1) as f64)
        .collect();
    let (_, sup) = grid_then_golden_max(|r| k_ratio(r, t), &grid, 1e-13);
    Ok(2.0 * PI.powf(1.5) * t * sup)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KPoint {
    pub t: f64,
    pub k: f64,
}

/// Samples of `K` on `n` log-spaced points of `[lo, hi]`.
pub fn k_curve(lo: f64, hi: f64, n: usize) -> Result<Vec<KPoint>> {
    if !(lo > 0.0 && hi > lo) || n < 2 {
        return domain("K curve needs 0 < lo < hi and n ≥ 2");
    }
    let ts: Vec<f64> = (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect();
    par_map(&ts, |&t| k_of_t(t).map(|k| KPoint { t, k }))
        .into_iter()
        .collect()
}

/// `(T*, min K)` over [`K_MIN_BRACKET`], golden section in `log T`.
pub fn minimize_k() -> Result<KPoint> {
    let (lo, hi) = K_MIN_BRACKET;
    let f = |u: f64| k_of_t(u.exp()).unwrap_or(f64::INFINITY);
    let (u, k) = golden_min(f, lo.ln(), hi.ln(), 1e-10);
    if !k.is_finite() {
        return Err(Error::Optimizer("K(T) minimization diverged".into()));
    }
    let t = u.exp();
    if (t - lo).abs() < 1e-6 * lo || (hi - t).abs() < 1e-6 * hi {
        return Err(Error::Optimizer(format!("K(T) minimum at bracket edge T = {t}")));
    }
    Ok(KPoint { t, k })
}

/// `2√2 · min_T K(T)`: the norm constant through the time-averaged heat kernel.
pub fn hl_constant_heat() -> Result<f64> {
    Ok(2.0 * 2f64.sqrt() * minimize_k()?.k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatEstimateCheck {
    pub t: f64,
    pub k: f64,
    pub samples: usize,
    /// `min_r (rhs − χ(r))`; non-negative when the estimate holds.
    pub min_slack: f64,
    pub holds: bool,
}

/// Checks `χ(r) ≤ K(T) ∫_{r/2√T}^∞ e^{−s²} ds / (2π^{3/2} r T)` on `samples`
/// points of `[r*, 1]`.
pub fn check_heat_estimate(t: f64, samples: usize) -> Result<HeatEstimateCheck> {
    let k = k_of_t(t)?;
    let rs = r_star();
    let mut min_slack = f64::INFINITY;
    let mut holds = true;
    for i in 0..samples.max(2) {
        let r = rs + (1.0 - rs) * i as f64 / (samples.max(2) - 1) as f64;
        let rhs = k * gaussian_tail(r / (2.0 * t.sqrt())) / (2.0 * PI.powf(1.5) * r * t);
        let lhs = chi_raw(r);
        let slack = rhs - lhs;
        min_slack = min_slack.min(slack);
        // equality is attained at the sup; allow rounding
        if slack < -1e-12 * rhs.abs().max(1e-300) {
            holds = false;
        }
    }
    Ok(HeatEstimateCheck {
        t,
        k,
        samples,
        min_slack,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaRow {
    pub function_id: String,
    pub l2_norm: f64,
    pub maximal_l2_norm: f64,
    pub ratio: f64,
    pub tail_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub rows: Vec<LemmaRow>,
    pub threshold: f64,
    pub max_ratio: f64,
    pub witness: String,
    pub holds: bool,
}

impl LemmaReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("function_id,l2_norm,maximal_l2_norm,ratio\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:.12e},{:.12e},{:.12e}",
                r.function_id, r.l2_norm, r.maximal_l2_norm, r.ratio
            );
        }
        s
    }
}

/// Ratio `‖M_f‖₂ / ‖f‖₂` for each radial test function; zero functions get
/// ratio 0.
pub fn verify_lemma(corpus: &[RadialProfile], grid: &MaximalGrid) -> Result<LemmaReport> {
    if corpus.is_empty() {
        return domain("lemma corpus is empty");
    }
    let rows: Vec<LemmaRow> = par_map(corpus, |f| {
        let op = RadialMaximal::new(f.clone(), grid.clone())?;
        let m = op.maximal_l2_norm()?;
        let ratio = if op.l2_norm() == 0.0 {
            0.0
        } else {
            m.value / op.l2_norm()
        };
        Ok(LemmaRow {
            function_id: f.label().to_string(),
            l2_norm: op.l2_norm(),
            maximal_l2_norm: m.value,
            ratio,
            tail_share: m.tail_share,
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let threshold = LEMMA_CONSTANT * (1.0 + LEMMA_GRID_SLACK);
    let (max_ratio, witness) = rows
        .iter()
        .map(|r| (r.ratio, r.function_id.clone()))
        .fold((0.0, String::new()), |acc, x| if x.0 > acc.0 { x } else { acc });
    Ok(LemmaReport {
        holds: max_ratio <= threshold,
        rows,
        threshold,
        max_ratio,
        witness,
    })
}

/// Radial test functions: three Gaussian widths, two ball indicators, an
/// exponential and a smooth shell.
pub fn default_lemma_corpus() -> Vec<RadialProfile> {
    let mut v = Vec::new();
    for w in [0.5, 1.0, 3.0] {
        v.push(RadialProfile::custom(
            format!("gaussian_w{w}"),
            (0.0, f64::INFINITY),
            move |r| (-PI * (r / w).powi(2)).exp(),
        ));
    }
    for radius in [1.0, 2.5] {
        v.push(RadialProfile::custom(
            format!("ball_indicator_r{radius}"),
            (0.0, radius),
            |_| 1.0,
        ));
    }
    v.push(RadialProfile::custom(
        "exponential",
        (0.0, f64::INFINITY),
        |r| (-r).exp(),
    ));
    v.push(RadialProfile::custom(
        "gaussian_shell",
        (0.0, f64::INFINITY),
        |r| (-4.0 * (r - 2.0).powi(2)).exp(),
    ));
    v
}
