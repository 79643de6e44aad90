//! Bravais lattices normalized to one point per unit volume.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type V3 = Vector3<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    Sc,
    Fcc,
    Bcc,
    Custom,
}

impl LatticeKind {
    pub const CUBIC: [LatticeKind; 3] = [LatticeKind::Sc, LatticeKind::Fcc, LatticeKind::Bcc];

    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::Sc => "sc",
            LatticeKind::Fcc => "fcc",
            LatticeKind::Bcc => "bcc",
            LatticeKind::Custom => "custom",
        }
    }

    /// Whether the point group contains the full cubic group, so that
    /// lattice functions depend only on sorted absolute coordinates.
    pub fn has_cubic_symmetry(self) -> bool {
        !matches!(self, LatticeKind::Custom)
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LatticeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sc" | "cubic" | "simple_cubic" => Ok(LatticeKind::Sc),
            "fcc" => Ok(LatticeKind::Fcc),
            "bcc" => Ok(LatticeKind::Bcc),
            other => Err(Error::Lattice(format!(
                "unknown lattice '{other}' (expected sc, fcc or bcc)"
            ))),
        }
    }
}

/// Three basis vectors (columns) with `|det| = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BravaisLattice {
    pub kind: LatticeKind,
    basis: Matrix3<f64>,
    inverse: Matrix3<f64>,
}

impl BravaisLattice {
    pub fn sc() -> Self {
        Self::cubic_kind(LatticeKind::Sc, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], 1.0)
    }

    /// Conventional cube edge `a` with `a³/4 = 1`.
    pub fn fcc() -> Self {
        let a = 4f64.cbrt();
        Self::cubic_kind(LatticeKind::Fcc, [[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]], a)
    }

    /// Conventional cube edge `a` with `a³/2 = 1`.
    pub fn bcc() -> Self {
        let a = 2f64.cbrt();
        Self::cubic_kind(
            LatticeKind::Bcc,
            [[-0.5, 0.5, 0.5], [0.5, -0.5, 0.5], [0.5, 0.5, -0.5]],
            a,
        )
    }

    pub fn of_kind(kind: LatticeKind) -> Result<Self> {
        match kind {
            LatticeKind::Sc => Ok(Self::sc()),
            LatticeKind::Fcc => Ok(Self::fcc()),
            LatticeKind::Bcc => Ok(Self::bcc()),
            LatticeKind::Custom => Err(Error::Lattice(
                "a custom lattice needs explicit basis vectors".into(),
            )),
        }
    }

    fn cubic_kind(kind: LatticeKind, vecs: [[f64; 3]; 3], scale: f64) -> Self {
        let basis = Matrix3::from_columns(&vecs.map(|v| V3::from(v) * scale));
        let inverse = basis.try_inverse().expect("cubic bases are regular");
        Self {
            kind,
            basis,
            inverse,
        }
    }

    /// A lattice from explicit basis vectors whose cell volume is 1.
    pub fn custom(vecs: [[f64; 3]; 3]) -> Result<Self> {
        let basis = Matrix3::from_columns(&vecs.map(V3::from));
        if !basis.iter().all(|x| x.is_finite()) {
            return Err(Error::Lattice("basis vectors must be finite".into()));
        }
        let det = basis.determinant();
        if (det.abs() - 1.0).abs() > 1e-12 {
            return Err(Error::Lattice(format!(
                "primitive cell volume must be 1 (unit density), got {det}"
            )));
        }
        let inverse = basis
            .try_inverse()
            .ok_or_else(|| Error::Lattice("degenerate basis".into()))?;
        Ok(Self {
            kind: LatticeKind::Custom,
            basis,
            inverse,
        })
    }

    pub fn basis(&self) -> &Matrix3<f64> {
        &self.basis
    }

    pub fn determinant(&self) -> f64 {
        self.basis.determinant()
    }

    pub fn point(&self, n: [i64; 3]) -> V3 {
        self.basis * V3::new(n[0] as f64, n[1] as f64, n[2] as f64)
    }

    /// Integer coordinates of every lattice point with `|x| ≤ radius`,
    /// ordered by distance and then lexicographically.
    pub fn points_within(&self, radius: f64) -> Vec<([i64; 3], V3)> {
        let bounds: [i64; 3] =
            std::array::from_fn(|i| (radius * self.inverse.row(i).norm()).ceil() as i64);
        let mut out = Vec::new();
        for i in -bounds[0]..=bounds[0] {
            for j in -bounds[1]..=bounds[1] {
                for k in -bounds[2]..=bounds[2] {
                    let x = self.point([i, j, k]);
                    if x.norm() <= radius {
                        out.push(([i, j, k], x));
                    }
                }
            }
        }
        out.sort_by(|a, b| a.1.norm().total_cmp(&b.1.norm()).then(a.0.cmp(&b.0)));
        out
    }

    /// Key under which lattice functions with the lattice's symmetry agree.
    pub fn symmetry_key(&self, n: [i64; 3]) -> [i64; 3] {
        if !self.kind.has_cubic_symmetry() {
            return n;
        }
        // Cartesian coordinates of the cubic lattices are multiples of a/2
        let half = match self.kind {
            LatticeKind::Sc => 1.0,
            LatticeKind::Fcc => 4f64.cbrt() / 2.0,
            LatticeKind::Bcc => 2f64.cbrt() / 2.0,
            LatticeKind::Custom => unreachable!(),
        };
        let x = self.point(n);
        let mut k = [0i64; 3];
        for i in 0..3 {
            k[i] = (x[i] / half).round().abs() as i64;
        }
        k.sort_unstable();
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_volume() {
        for kind in LatticeKind::CUBIC {
            let l = BravaisLattice::of_kind(kind).unwrap();
            assert!((l.determinant().abs() - 1.0).abs() < 1e-12, "{kind}");
        }
    }

    #[test]
    fn nearest_neighbour_counts() {
        for (kind, count) in [(LatticeKind::Sc, 6), (LatticeKind::Fcc, 12), (LatticeKind::Bcc, 8)] {
            let l = BravaisLattice::of_kind(kind).unwrap();
            let pts = l.points_within(3.0);
            let nn = pts[1].1.norm();
            let shell = pts.iter().filter(|p| (p.1.norm() - nn).abs() < 1e-9).count();
            assert_eq!(shell, count, "{kind}");
        }
    }

    #[test]
    fn point_counts_approach_ball_volume() {
        let l = BravaisLattice::bcc();
        let n = l.points_within(20.0).len() as f64;
        let v = 4.0 / 3.0 * std::f64::consts::PI * 8000.0;
        assert!((n / v - 1.0).abs() < 0.02, "{}", n / v);
    }

    #[test]
    fn custom_requires_unit_volume() {
        assert!(BravaisLattice::custom([[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
        assert!(BravaisLattice::custom([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
        let l = BravaisLattice::custom([[1.0, 0.0, 0.0], [0.3, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(l.kind, LatticeKind::Custom);
    }

    #[test]
    fn symmetry_key_merges_cubic_images() {
        let l = BravaisLattice::fcc();
        let a = l.symmetry_key([1, 0, 0]);
        let b = l.symmetry_key([-1, 0, 0]);
        let c = l.symmetry_key([0, 1, 0]);
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_ne!(a, l.symmetry_key([1, 1, 0]));
    }

    #[test]
    fn parses_names() {
        assert_eq!("BCC".parse::<LatticeKind>().unwrap(), LatticeKind::Bcc);
        assert!("hcp".parse::<LatticeKind>().is_err());
    }
}
