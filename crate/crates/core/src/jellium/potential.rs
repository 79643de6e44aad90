//! Coulomb potential of the uniformly charged cell and the screened
//! potential `W(x) = 1/|x| − ∫_Q dy/|x−y|`.
//!
//! By the divergence theorem, `∫_Q dy/|x−y| = ½ Σ_faces h_F(x) ∫_F dA/|p−x|`
//! with `h_F` the signed distance from `x` to the face plane; the face
//! integrals have a closed form in terms of the polygon edges.

use std::f64::consts::PI;

use super::cell::{Face, WignerSeitzCell};
use super::lattice::V3;
use crate::error::{domain, Result};
use crate::quadrature::triangle_rule;

/// `∫_F dA/|p − x|` for a planar convex polygon, summed edge by edge.
pub fn face_inverse_distance(face: &Face, x: V3) -> f64 {
    let n = face.normal;
    let h = n.dot(&(face.vertices[0] - x));
    let foot = x + n * h;
    let ah = h.abs();
    let m = face.vertices.len();
    let mut total = 0.0;
    for i in 0..m {
        let a = face.vertices[i];
        let b = face.vertices[(i + 1) % m];
        let len = (b - a).norm();
        let l_hat = (b - a) / len;
        let u_hat = l_hat.cross(&n);
        let p0 = (a - foot).dot(&u_hat);
        let l_minus = (a - foot).dot(&l_hat);
        let l_plus = (b - foot).dot(&l_hat);
        let r0_sq = p0 * p0 + h * h;
        if r0_sq == 0.0 {
            continue;
        }
        let r_plus = (r0_sq + l_plus * l_plus).sqrt();
        let r_minus = (r0_sq + l_minus * l_minus).sqrt();
        // ln(R + l) without cancellation when l < 0
        let log_rl = |r: f64, l: f64| {
            if l >= 0.0 {
                (r + l).ln()
            } else {
                r0_sq.ln() - (r - l).ln()
            }
        };
        if p0 != 0.0 {
            total += p0 * (log_rl(r_plus, l_plus) - log_rl(r_minus, l_minus));
        }
        if ah > 0.0 {
            total -= ah
                * ((p0 * l_plus / (r0_sq + ah * r_plus)).atan()
                    - (p0 * l_minus / (r0_sq + ah * r_minus)).atan());
        }
    }
    total
}

/// The same face integral by a collapsed Gauss rule on the centroid fan;
/// accurate only when `x` is well away from the face.
pub fn face_inverse_distance_quadrature(face: &Face, x: V3, order: usize) -> f64 {
    let rule = triangle_rule(order);
    let c = face.centroid();
    let m = face.vertices.len();
    let mut total = 0.0;
    for i in 0..m {
        let a = face.vertices[i];
        let b = face.vertices[(i + 1) % m];
        let jac = (a - c).cross(&(b - c)).norm();
        for (p, w) in &rule {
            let y = c + (a - c) * p[0] + (b - c) * p[1];
            total += w * jac / (y - x).norm();
        }
    }
    total
}

/// `Φ_Q(x) = ∫_Q dy/|x − y|`, valid for every `x`.
pub fn cell_potential(cell: &WignerSeitzCell, x: V3) -> f64 {
    let parts: Vec<f64> = cell
        .faces
        .iter()
        .map(|f| {
            let h = f.offset - f.normal.dot(&x);
            if h == 0.0 {
                0.0
            } else {
                0.5 * h * face_inverse_distance(f, x)
            }
        })
        .collect();
    crate::reduce::pairwise_sum(&parts)
}

/// `∫_Q dy/|y|`.
pub fn cell_self_potential(cell: &WignerSeitzCell) -> f64 {
    cell_potential(cell, V3::zeros())
}

/// `∫_Q dy/|y|` through the Duffy map `y = s p` of each origin-apex
/// tetrahedron, which cancels the singularity and leaves
/// `½ h ∫_T dA/|p|` on each fan triangle `T`.
pub fn cell_self_potential_duffy(cell: &WignerSeitzCell, order: usize) -> f64 {
    let rule = triangle_rule(order);
    cell.tetrahedra
        .iter()
        .map(|t| {
            let [_, a, b, c] = t.vertices;
            let n = (b - a).cross(&(c - a));
            let area2 = n.norm();
            let h = a.dot(&n).abs() / area2;
            let tri: f64 = rule
                .iter()
                .map(|(p, w)| w * area2 / (a + (b - a) * p[0] + (c - a) * p[1]).norm())
                .sum();
            0.5 * h * tri
        })
        .sum()
}

/// `∫_B dy/|y|` for the unit-volume ball: `(3/2)(4π/3)^{1/3}`.
pub fn ball_self_potential() -> f64 {
    1.5 * (4.0 * PI / 3.0).cbrt()
}

/// `W(x) = 1/|x| − Φ_Q(x)`.
pub fn screened_potential(cell: &WignerSeitzCell, x: V3) -> Result<f64> {
    let r = x.norm();
    if r == 0.0 {
        return domain("the screened potential is singular at the origin");
    }
    Ok(1.0 / r - cell_potential(cell, x))
}

/// Unchecked `W` for points known to be away from the origin.
pub(crate) fn screened_potential_raw(cell: &WignerSeitzCell, x: V3) -> f64 {
    1.0 / x.norm() - cell_potential(cell, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jellium::lattice::{BravaisLattice, LatticeKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cell(kind: LatticeKind) -> WignerSeitzCell {
        WignerSeitzCell::build(&BravaisLattice::of_kind(kind).unwrap()).unwrap()
    }

    #[test]
    fn face_formula_matches_quadrature_away_from_face() {
        let c = cell(LatticeKind::Bcc);
        let f = &c.faces[0];
        for x in [V3::new(0.3, -0.2, 0.1), V3::new(2.0, 1.0, -3.0), f.centroid() * 1.7] {
            let a = face_inverse_distance(f, x);
            let q = face_inverse_distance_quadrature(f, x, 40);
            assert!((a - q).abs() < 1e-9 * a, "{a} vs {q}");
        }
    }

    #[test]
    fn potential_is_newtonian_far_away() {
        let c = cell(LatticeKind::Sc);
        let x = V3::new(30.0, 7.0, -11.0);
        assert!((cell_potential(&c, x) * x.norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cube_self_potential() {
        let c = cell(LatticeKind::Sc);
        let v = cell_self_potential(&c);
        assert!((v - 2.38008).abs() < 1e-4, "{v}");
        let d = cell_self_potential_duffy(&c, 24);
        assert!((v - d).abs() < 1e-8, "{v} vs {d}");
    }

    #[test]
    fn cube_self_potential_monte_carlo() {
        let c = cell(LatticeKind::Sc);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 2_000_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let y = V3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let v = 1.0 / y.norm();
            s1 += v;
            s2 += v * v;
        }
        let mean = s1 / n as f64;
        let sd = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - cell_self_potential(&c)).abs() < 4.0 * sd, "{mean} ± {sd}");
    }

    #[test]
    fn self_potential_is_degree_two_under_dilation() {
        let c = cell(LatticeKind::Bcc);
        let base = cell_self_potential(&c);
        let big = cell_self_potential(&c.dilated(2.0));
        assert!((big - 4.0 * base).abs() < 1e-12);
    }

    #[test]
    fn ball_closed_form_against_radial_integral() {
        let r = (3.0 / (4.0 * PI)).cbrt();
        // ∫_0^r 4π s ds
        assert!((ball_self_potential() - 2.0 * PI * r * r).abs() < 1e-14);
        // every unit-volume cell has a smaller self potential than the ball
        for kind in LatticeKind::CUBIC {
            assert!(cell_self_potential(&cell(kind)) < ball_self_potential());
        }
    }

    #[test]
    fn potential_satisfies_poisson_inside_and_laplace_outside() {
        let c = cell(LatticeKind::Fcc);
        let h = 1e-3;
        let lap = |x: V3| {
            let mut s = -6.0 * cell_potential(&c, x);
            for e in [V3::x(), V3::y(), V3::z()] {
                s += cell_potential(&c, x + e * h) + cell_potential(&c, x - e * h);
            }
            s / (h * h)
        };
        assert!((lap(V3::new(0.1, 0.05, -0.08)) + 4.0 * PI).abs() < 1e-3);
        assert!(lap(V3::new(1.5, 0.7, 0.2)).abs() < 1e-3);
    }

    #[test]
    fn screened_potential_symmetry_and_decay() {
        let c = cell(LatticeKind::Bcc);
        let x = V3::new(2.3, -1.1, 0.7);
        let w = screened_potential(&c, x).unwrap();
        assert!((w - screened_potential(&c, -x).unwrap()).abs() < 1e-14);
        assert!(screened_potential(&c, V3::zeros()).is_err());
        // log-log slope of |W| along a generic ray over [5, 20]
        let dir = V3::new(1.0, 0.37, 0.21).normalize();
        let w5 = screened_potential(&c, dir * 5.0).unwrap().abs();
        let w20 = screened_potential(&c, dir * 20.0).unwrap().abs();
        let slope = (w20 / w5).ln() / 4f64.ln();
        assert!(slope <= -4.0, "slope {slope}");
        assert!(w20 <= 1e-3 * 20f64.powi(-4) * 1e3);
    }
}
