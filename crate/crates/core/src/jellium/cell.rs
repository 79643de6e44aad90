//! Wigner-Seitz cells as convex polyhedra with a tetrahedral fan from the
//! origin.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::lattice::{BravaisLattice, V3};
use crate::error::{Error, Result};
use crate::quadrature::tetrahedron_rule;

/// Lattice points with coefficients in `[−2, 2]` supply the bisector planes.
const NEIGHBOUR_RANGE: i64 = 2;
const GEOM_TOL: f64 = 1e-9;

/// `{x : normal·x ≤ offset}` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: [f64; 3],
    pub offset: f64,
}

/// A planar convex face with vertices ordered counter-clockwise about the
/// outward normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub normal: V3,
    pub offset: f64,
    pub vertices: Vec<V3>,
}

impl Face {
    pub fn centroid(&self) -> V3 {
        self.vertices.iter().sum::<V3>() / self.vertices.len() as f64
    }

    pub fn area(&self) -> f64 {
        let c = self.centroid();
        let n = self.vertices.len();
        (0..n)
            .map(|i| 0.5 * (self.vertices[i] - c).cross(&(self.vertices[(i + 1) % n] - c)).norm())
            .sum()
    }
}

/// Tetrahedron with its first vertex at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tetrahedron {
    pub vertices: [V3; 4],
}

impl Tetrahedron {
    pub fn signed_volume(&self) -> f64 {
        let [a, b, c, d] = self.vertices;
        (b - a).dot(&(c - a).cross(&(d - a))) / 6.0
    }

    pub fn map(&self, bary: [f64; 3]) -> V3 {
        let [a, b, c, d] = self.vertices;
        a + (b - a) * bary[0] + (c - a) * bary[1] + (d - a) * bary[2]
    }

    /// The eight children of one midpoint refinement.
    pub fn subdivide(&self) -> [Tetrahedron; 8] {
        let [a, b, c, d] = self.vertices;
        let m = |p: V3, q: V3| (p + q) * 0.5;
        let (ab, ac, ad, bc, bd, cd) = (m(a, b), m(a, c), m(a, d), m(b, c), m(b, d), m(c, d));
        let t = |p, q, r, s| Tetrahedron {
            vertices: [p, q, r, s],
        };
        [
            t(a, ab, ac, ad),
            t(ab, b, bc, bd),
            t(ac, bc, c, cd),
            t(ad, bd, cd, d),
            t(ab, ac, ad, bd),
            t(ab, ac, bc, bd),
            t(ac, ad, bd, cd),
            t(ac, bc, bd, cd),
        ]
    }

    /// `∫ f` with a collapsed Gauss rule of `order` points per direction.
    pub fn integrate(&self, f: &dyn Fn(V3) -> f64, rule: &[([f64; 3], f64)]) -> f64 {
        let jac = 6.0 * self.signed_volume().abs();
        rule.iter().map(|(p, w)| w * f(self.map(*p))).sum::<f64>() * jac
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerSeitzCell {
    pub half_spaces: Vec<HalfSpace>,
    pub faces: Vec<Face>,
    pub tetrahedra: Vec<Tetrahedron>,
    pub volume: f64,
}

impl WignerSeitzCell {
    /// Intersection of the bisector half-spaces of nearby lattice points.
    pub fn build(lattice: &BravaisLattice) -> Result<Self> {
        let mut planes: Vec<(V3, f64)> = Vec::new();
        let r = NEIGHBOUR_RANGE;
        for i in -r..=r {
            for j in -r..=r {
                for k in -r..=r {
                    if (i, j, k) == (0, 0, 0) {
                        continue;
                    }
                    let p = lattice.point([i, j, k]);
                    let len = p.norm();
                    planes.push((p / len, 0.5 * len));
                }
            }
        }
        let inside = |x: &V3| planes.iter().all(|(n, o)| n.dot(x) <= o + GEOM_TOL);
        let mut vertices: Vec<V3> = Vec::new();
        for a in 0..planes.len() {
            for b in a + 1..planes.len() {
                for c in b + 1..planes.len() {
                    let m = nalgebra::Matrix3::from_rows(&[
                        planes[a].0.transpose(),
                        planes[b].0.transpose(),
                        planes[c].0.transpose(),
                    ]);
                    if m.determinant().abs() < 1e-10 {
                        continue;
                    }
                    let Some(x) = m.lu().solve(&V3::new(planes[a].1, planes[b].1, planes[c].1))
                    else {
                        continue;
                    };
                    if inside(&x) && !vertices.iter().any(|v| (v - x).norm() < 1e-7) {
                        vertices.push(x);
                    }
                }
            }
        }
        let mut faces = Vec::new();
        let mut half_spaces = Vec::new();
        for (n, o) in &planes {
            let on: Vec<V3> = vertices
                .iter()
                .copied()
                .filter(|v| (n.dot(v) - o).abs() < 1e-7)
                .collect();
            if on.len() < 3 {
                continue;
            }
            half_spaces.push(HalfSpace {
                normal: [n.x, n.y, n.z],
                offset: *o,
            });
            let c = on.iter().sum::<V3>() / on.len() as f64;
            let e1 = (on[0] - c).normalize();
            let e2 = n.cross(&e1);
            let mut ordered = on.clone();
            ordered.sort_by(|p, q| {
                let ap = (p - c).dot(&e2).atan2((p - c).dot(&e1));
                let aq = (q - c).dot(&e2).atan2((q - c).dot(&e1));
                ap.total_cmp(&aq)
            });
            faces.push(Face {
                normal: *n,
                offset: *o,
                vertices: ordered,
            });
        }
        if faces.len() < 4 {
            return Err(Error::Lattice("degenerate Wigner-Seitz cell".into()));
        }
        let mut tetrahedra = Vec::new();
        for f in &faces {
            let c = f.centroid();
            let n = f.vertices.len();
            for i in 0..n {
                tetrahedra.push(Tetrahedron {
                    vertices: [V3::zeros(), c, f.vertices[i], f.vertices[(i + 1) % n]],
                });
            }
        }
        let volume = tetrahedra.iter().map(|t| t.signed_volume()).sum();
        let cell = Self {
            half_spaces,
            faces,
            tetrahedra,
            volume,
        };
        if (cell.volume - lattice.determinant().abs()).abs() > 1e-8 {
            return Err(Error::Lattice(format!(
                "cell volume {} does not match the primitive volume; the bisector range is too small for this basis",
                cell.volume
            )));
        }
        Ok(cell)
    }

    pub fn contains(&self, x: V3) -> bool {
        self.half_spaces
            .iter()
            .all(|h| V3::from(h.normal).dot(&x) <= h.offset + GEOM_TOL)
    }

    pub fn circumradius(&self) -> f64 {
        self.faces
            .iter()
            .flat_map(|f| f.vertices.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// `∫_Q f` with a collapsed Gauss rule on every tetrahedron.
    pub fn integrate(&self, f: &dyn Fn(V3) -> f64, order: usize) -> f64 {
        let rule = tetrahedron_rule(order);
        let parts: Vec<f64> = self.tetrahedra.iter().map(|t| t.integrate(f, &rule)).collect();
        crate::reduce::pairwise_sum(&parts)
    }

    /// `∫_Q f` at two refinement levels: `(fine, |fine − coarse|)`.
    pub fn integrate_refined(&self, f: &(dyn Fn(V3) -> f64 + Sync), order: usize) -> (f64, f64) {
        let rule = tetrahedron_rule(order);
        let coarse: Vec<f64> = self.tetrahedra.iter().map(|t| t.integrate(f, &rule)).collect();
        let fine: Vec<f64> = crate::reduce::par_map(&self.tetrahedra, |t| {
            t.subdivide().iter().map(|c| c.integrate(f, &rule)).sum::<f64>()
        });
        let (c, fi) = (crate::reduce::pairwise_sum(&coarse), crate::reduce::pairwise_sum(&fine));
        (fi, (fi - c).abs())
    }

    /// `∫_Q x dx`, exact.
    pub fn first_moment(&self) -> V3 {
        self.tetrahedra
            .iter()
            .map(|t| t.vertices.iter().sum::<V3>() * (t.signed_volume() / 4.0))
            .sum()
    }

    /// `∫_Q x xᵀ dx`, exact (`V/20 (Σ vvᵀ + s sᵀ)` per tetrahedron).
    pub fn second_moment_tensor(&self) -> nalgebra::Matrix3<f64> {
        let mut m = nalgebra::Matrix3::zeros();
        for t in &self.tetrahedra {
            let s: V3 = t.vertices.iter().sum();
            let mut acc = s * s.transpose();
            for v in &t.vertices {
                acc += v * v.transpose();
            }
            m += acc * (t.signed_volume() / 20.0);
        }
        m
    }

    /// `∫_Q |x|² dx`.
    pub fn second_moment(&self) -> f64 {
        self.second_moment_tensor().trace()
    }

    /// `(2π/3)∫_Q |x|² dx`, the integral of the screened potential over space.
    pub fn shift(&self) -> f64 {
        2.0 * PI / 3.0 * self.second_moment()
    }

    /// Scaled copy `λQ` (not a lattice cell unless `λ = 1`).
    pub fn dilated(&self, lambda: f64) -> Self {
        let scale_face = |f: &Face| Face {
            normal: f.normal,
            offset: f.offset * lambda,
            vertices: f.vertices.iter().map(|v| v * lambda).collect(),
        };
        Self {
            half_spaces: self
                .half_spaces
                .iter()
                .map(|h| HalfSpace {
                    normal: h.normal,
                    offset: h.offset * lambda,
                })
                .collect(),
            faces: self.faces.iter().map(scale_face).collect(),
            tetrahedra: self
                .tetrahedra
                .iter()
                .map(|t| Tetrahedron {
                    vertices: t.vertices.map(|v| v * lambda),
                })
                .collect(),
            volume: self.volume * lambda.powi(3),
        }
    }
}

/// `(3/10)(4π/3)^{1/3}`: the value of the shift for a unit-volume ball, which
/// no cell of unit volume can undercut.
pub fn ball_moment_lower_bound() -> f64 {
    0.3 * (4.0 * PI / 3.0).cbrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jellium::lattice::LatticeKind;
    use crate::quadrature::{integrate, tetrahedron_rule_degree2, QuadConfig};

    fn cell(kind: LatticeKind) -> WignerSeitzCell {
        WignerSeitzCell::build(&BravaisLattice::of_kind(kind).unwrap()).unwrap()
    }

    #[test]
    fn face_counts_and_volume() {
        for (kind, faces) in [(LatticeKind::Sc, 6), (LatticeKind::Bcc, 14), (LatticeKind::Fcc, 12)] {
            let c = cell(kind);
            assert_eq!(c.faces.len(), faces, "{kind}");
            assert!((c.volume - 1.0).abs() < 1e-10, "{kind}");
            let area_sum: f64 = c.faces.iter().map(|f| f.area() * f.offset / 3.0).sum();
            assert!((area_sum - 1.0).abs() < 1e-10, "{kind}");
        }
    }

    #[test]
    fn truncated_octahedron_has_square_and_hexagonal_faces() {
        let c = cell(LatticeKind::Bcc);
        let mut sizes: Vec<usize> = c.faces.iter().map(|f| f.vertices.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, [vec![4; 6], vec![6; 8]].concat());
    }

    #[test]
    fn no_dipole_isotropic_quadrupole() {
        for kind in LatticeKind::CUBIC {
            let c = cell(kind);
            assert!(c.first_moment().norm() < 1e-10, "{kind}");
            let m = c.second_moment_tensor();
            let mean = m.trace() / 3.0;
            for i in 0..3 {
                for j in 0..3 {
                    let expect = if i == j { mean } else { 0.0 };
                    assert!((m[(i, j)] - expect).abs() < 1e-10, "{kind} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn inversion_symmetric() {
        let c = cell(LatticeKind::Fcc);
        for f in &c.faces {
            for v in &f.vertices {
                assert!(c.contains(-*v));
                assert!(c.contains(*v * 0.999));
                assert!(!c.contains(*v * 1.001));
            }
        }
    }

    #[test]
    fn shifts() {
        assert!((cell(LatticeKind::Sc).shift() - PI / 6.0).abs() < 1e-10);
        assert!((cell(LatticeKind::Fcc).shift() - 0.4948).abs() < 5e-4);
        assert!((cell(LatticeKind::Bcc).shift() - 0.4935).abs() < 5e-4);
        for kind in LatticeKind::CUBIC {
            assert!(cell(kind).shift() >= ball_moment_lower_bound());
        }
    }

    #[test]
    fn moment_formula_matches_quadratic_rule() {
        let c = cell(LatticeKind::Bcc);
        let rule = tetrahedron_rule_degree2();
        let q: f64 = c.tetrahedra.iter().map(|t| t.integrate(&|x| x.norm_squared(), &rule)).sum();
        assert!((q - c.second_moment()).abs() < 1e-13);
    }

    #[test]
    fn ball_bound_matches_radial_quadrature() {
        let r = (3.0 / (4.0 * PI)).cbrt();
        let q = integrate(&|s: f64| 4.0 * PI * s.powi(4), 0.0, r, &QuadConfig::with_rel_tol(1e-13)).unwrap();
        assert!((2.0 * PI / 3.0 * q.value - ball_moment_lower_bound()).abs() < 1e-13);
        assert!((ball_moment_lower_bound() - 0.4836).abs() < 1e-4);
    }

    #[test]
    fn subdivision_preserves_volume() {
        let t = cell(LatticeKind::Bcc).tetrahedra[3];
        let v: f64 = t.subdivide().iter().map(|c| c.signed_volume().abs()).sum();
        assert!((v - t.signed_volume().abs()).abs() < 1e-15);
    }

    #[test]
    fn sheared_basis_gives_unit_cell() {
        let l = BravaisLattice::custom([[1.0, 0.0, 0.0], [0.4, 1.0, 0.0], [0.2, 0.3, 1.0]]).unwrap();
        let c = WignerSeitzCell::build(&l).unwrap();
        assert!((c.volume - 1.0).abs() < 1e-10);
        assert!(c.first_moment().norm() < 1e-10);
    }
}
