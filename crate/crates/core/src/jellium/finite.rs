//! Indirect energy of `N` lattice points in the background `Ω` formed by
//! their cells, with its Coulomb / interaction / direct decomposition.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::cell::WignerSeitzCell;
use super::lattice::{BravaisLattice, LatticeKind, V3};
use super::potential::{cell_potential, cell_self_potential};
use crate::error::{domain, Result};
use crate::reduce::{pairwise_sum, par_map};

pub const MAX_POINTS: usize = 1000;
/// Beyond this separation the cell-cell interaction is taken from the
/// harmonic far-field identity instead of quadrature.
pub const NEAR_FIELD_RADIUS: f64 = 3.0;
/// Per-tetrahedron Gauss order for cell-cell integrals.
const CELL_CELL_ORDER: usize = 5;

/// Shape of the region from which the `N` points are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Carving {
    Cube,
    Sphere,
}

impl std::str::FromStr for Carving {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cube" => Ok(Carving::Cube),
            "sphere" | "ball" => Ok(Carving::Sphere),
            other => domain(format!("unknown carving '{other}' (expected cube or sphere)")),
        }
    }
}

/// The `n` lattice points nearest (in the max norm for a cube, the
/// Euclidean norm for a sphere) to the centre of an `n^{1/3}`-sided box
/// whose corner is the origin. For SC and `n = m³` this is exactly the
/// `m × m × m` block.
pub fn carve(lattice: &BravaisLattice, n: usize, carving: Carving) -> Result<Vec<[i64; 3]>> {
    if n == 0 || n > MAX_POINTS {
        return domain(format!("number of points must be in 1..={MAX_POINTS}"));
    }
    let side = (n as f64).cbrt();
    let centre = V3::repeat(0.5 * (side - 1.0));
    let dist = |x: &V3| match carving {
        Carving::Cube => (x - centre).amax(),
        Carving::Sphere => (x - centre).norm(),
    };
    let mut pts = lattice.points_within(centre.norm() + side + 2.0);
    pts.sort_by(|a, b| {
        dist(&a.1)
            .total_cmp(&dist(&b.1))
            .then((a.1 - centre).norm().total_cmp(&(b.1 - centre).norm()))
            .then(a.0.cmp(&b.0))
    });
    Ok(pts.into_iter().take(n).map(|(i, _)| i).collect())
}

/// Interaction `∫_Q∫_Q dudv/|z + u − v|` of two cells whose centres differ
/// by `z`, with a refinement error estimate.
pub fn cell_cell_interaction(cell: &WignerSeitzCell, z: V3) -> (f64, f64) {
    if z.norm() > NEAR_FIELD_RADIUS {
        // ∫_Q f(z+u)du = f(z) up to fourth derivatives for harmonic f, since
        // the cell has no dipole and an isotropic quadrupole; with
        // f = W this gives Φ_Q(z) − W(z).
        return (2.0 * cell_potential(cell, z) - 1.0 / z.norm(), 0.0);
    }
    cell.integrate_refined(&|u| cell_potential(cell, z + u), CELL_CELL_ORDER)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteReport {
    pub lattice: LatticeKind,
    pub carving: Carving,
    pub n: usize,
    /// `Σ_{x≠y} 1/|x−y|`.
    pub coulomb: f64,
    /// `Σ_{x,y} ∫_Q dy'/|x − y − y'|`, points against every cell.
    pub interaction: f64,
    /// `∬_{Ω×Ω} 1/|x−y|`, cells against cells.
    pub direct: f64,
    /// `(U − I)/2N`.
    pub coulomb_minus_interaction: f64,
    /// `(I − D)/2N`.
    pub interaction_minus_direct: f64,
    /// `(U − D)/2N`, summed independently of the two parts above.
    pub indirect_per_particle: f64,
    /// `(U − 2I + D)/2N`.
    pub jellium_per_particle: f64,
    /// Accumulated quadrature error bound on the per-particle values.
    pub quadrature_error: f64,
}

impl FiniteReport {
    /// `(U−I)/2N + (I−D)/2N` against the separately summed indirect energy,
    /// and the Jellium energy plus twice `(I−D)/2N`, both relative.
    pub fn identity_residual(&self) -> f64 {
        let scale = self.indirect_per_particle.abs().max(1.0);
        let a = self.coulomb_minus_interaction + self.interaction_minus_direct
            - self.indirect_per_particle;
        let b = self.jellium_per_particle + 2.0 * self.interaction_minus_direct
            - self.indirect_per_particle;
        a.abs().max(b.abs()) / scale
    }
}

/// `U`, `I` and `D` for the carved configuration. Pair terms are grouped by
/// displacement and the cell-cell integrals cached by symmetry class.
pub fn decomposition_check(lattice: &BravaisLattice, n: usize, carving: Carving) -> Result<FiniteReport> {
    let cell = WignerSeitzCell::build(lattice)?;
    let pts = carve(lattice, n, carving)?;
    let mut mult: BTreeMap<[i64; 3], usize> = BTreeMap::new();
    for a in &pts {
        for b in &pts {
            if a != b {
                *mult.entry([a[0] - b[0], a[1] - b[1], a[2] - b[2]]).or_default() += 1;
            }
        }
    }
    let mut classes: BTreeMap<[i64; 3], [i64; 3]> = BTreeMap::new();
    for d in mult.keys() {
        classes.entry(lattice.symmetry_key(*d)).or_insert(*d);
    }
    let reps: Vec<([i64; 3], [i64; 3])> = classes.into_iter().collect();
    let evaluated = par_map(&reps, |(key, d)| {
        (*key, cell_cell_interaction(&cell, lattice.point(*d)))
    });
    let cache: HashMap<[i64; 3], (f64, f64)> = evaluated.into_iter().collect();

    let self_potential = cell_self_potential(&cell);
    let (self_direct, self_err) = cell_cell_interaction(&cell, V3::zeros());
    let nf = n as f64;
    let (mut u, mut i_pair, mut d_pair) = (Vec::new(), Vec::new(), Vec::new());
    let (mut w_terms, mut id_terms, mut ud_terms) = (Vec::new(), Vec::new(), Vec::new());
    let mut err = self_err * nf;
    for (d, m) in &mult {
        let z = lattice.point(*d);
        let m = *m as f64;
        let coulomb = 1.0 / z.norm();
        let phi = cell_potential(&cell, z);
        let (c, e) = cache[&lattice.symmetry_key(*d)];
        u.push(m * coulomb);
        i_pair.push(m * phi);
        d_pair.push(m * c);
        w_terms.push(m * (coulomb - phi));
        id_terms.push(m * (phi - c));
        ud_terms.push(m * (coulomb - c));
        err += m * e;
    }
    let coulomb = pairwise_sum(&u);
    let interaction = nf * self_potential + pairwise_sum(&i_pair);
    let direct = nf * self_direct + pairwise_sum(&d_pair);
    let two_n = 2.0 * nf;
    let cmi = (pairwise_sum(&w_terms) - nf * self_potential) / two_n;
    let imd = (pairwise_sum(&id_terms) + nf * (self_potential - self_direct)) / two_n;
    Ok(FiniteReport {
        lattice: lattice.kind,
        carving,
        n,
        coulomb,
        interaction,
        direct,
        coulomb_minus_interaction: cmi,
        interaction_minus_direct: imd,
        indirect_per_particle: (pairwise_sum(&ud_terms) - nf * self_direct) / two_n,
        jellium_per_particle: cmi - imd,
        quadrature_error: err / two_n,
    })
}

/// `½Σ_{x≠y}1/|x−y| − ½∬_{Ω×Ω}1/|x−y|` for `n` carved points (total, not
/// per particle).
pub fn finite_n_indirect(lattice: &BravaisLattice, n: usize, carving: Carving) -> Result<f64> {
    Ok(decomposition_check(lattice, n, carving)?.indirect_per_particle * n as f64)
}

/// Least-squares fit of `value ≈ a + b·N^{−1/3}`, returning `(a, b)`.
pub fn fit_surface_scaling(samples: &[(usize, f64)]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return domain("the surface fit needs at least two sizes");
    }
    let xs: Vec<f64> = samples.iter().map(|(n, _)| (*n as f64).cbrt().recip()).collect();
    let ys: Vec<f64> = samples.iter().map(|(_, v)| *v).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return domain("the surface fit needs distinct sizes");
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    Ok((my - b * mx, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_cube_sample(rng: &mut ChaCha8Rng) -> V3 {
        V3::new(rng.gen(), rng.gen(), rng.gen())
    }

    /// Mean and standard error of `1/|x−y|` for `x` in the unit cube and `y`
    /// in the unit cube translated by `offset`.
    fn monte_carlo_pair(offset: V3, samples: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..samples {
            let v = 1.0 / (unit_cube_sample(&mut rng) - unit_cube_sample(&mut rng) - offset).norm();
            s1 += v;
            s2 += v * v;
        }
        let m = s1 / samples as f64;
        (m, ((s2 / samples as f64 - m * m) / samples as f64).sqrt())
    }

    #[test]
    fn sc_cube_carving_is_a_block() {
        let pts = carve(&BravaisLattice::sc(), 27, Carving::Cube).unwrap();
        assert_eq!(pts.len(), 27);
        assert!(pts.iter().all(|p| p.iter().all(|c| (0..3).contains(c))));
        assert!(carve(&BravaisLattice::sc(), 0, Carving::Cube).is_err());
        assert!(carve(&BravaisLattice::sc(), 1001, Carving::Cube).is_err());
    }

    #[test]
    fn cube_self_interaction_against_monte_carlo() {
        let cell = WignerSeitzCell::build(&BravaisLattice::sc()).unwrap();
        let (c0, err) = cell_cell_interaction(&cell, V3::zeros());
        assert!((c0 - 1.88231).abs() < 1e-4, "{c0}");
        assert!(err < 1e-5);
        let (m, sd) = monte_carlo_pair(V3::zeros(), 2_000_000, 11);
        assert!((m - c0).abs() < 4.0 * sd, "{m} ± {sd} vs {c0}");
    }

    #[test]
    fn far_field_matches_quadrature() {
        let cell = WignerSeitzCell::build(&BravaisLattice::bcc()).unwrap();
        let z = V3::new(2.3, -1.7, 1.3);
        assert!(z.norm() > NEAR_FIELD_RADIUS);
        let (quad, err) = cell.integrate_refined(&|u| cell_potential(&cell, z + u), CELL_CELL_ORDER);
        let (far, _) = cell_cell_interaction(&cell, z);
        assert!((quad - far).abs() < 1e-6 + err, "{quad} vs {far}");
    }

    #[test]
    fn single_point_is_minus_half_self_interaction() {
        let l = BravaisLattice::sc();
        let cell = WignerSeitzCell::build(&l).unwrap();
        let v = finite_n_indirect(&l, 1, Carving::Cube).unwrap();
        assert!((v + 0.5 * cell_cell_interaction(&cell, V3::zeros()).0).abs() < 1e-14);
    }

    #[test]
    fn two_adjacent_cubes_against_monte_carlo() {
        let l = BravaisLattice::sc();
        let v = finite_n_indirect(&l, 2, Carving::Cube).unwrap();
        // Ω is a 2×1×1 box: ½·2·1 − ½·(2 self + 2 neighbour) cube-cube terms
        let (m0, s0) = monte_carlo_pair(V3::zeros(), 2_000_000, 3);
        let (m1, s1) = monte_carlo_pair(V3::new(1.0, 0.0, 0.0), 2_000_000, 5);
        let mc = 1.0 - m0 - m1;
        let sd = (s0 * s0 + s1 * s1).sqrt();
        assert!((v - mc).abs() < 4.0 * sd, "{v} vs {mc} ± {sd}");
    }

    #[test]
    fn identities_hold_at_each_size() {
        for n in [1, 8, 27] {
            let r = decomposition_check(&BravaisLattice::sc(), n, Carving::Cube).unwrap();
            assert!(r.identity_residual() < 1e-12, "{n}: {r:?}");
            let per = (r.coulomb - r.direct) / (2.0 * n as f64);
            assert!((per - r.indirect_per_particle).abs() < 1e-9);
        }
    }

    #[test]
    fn surface_fit_recovers_line() {
        let s: Vec<(usize, f64)> = [64, 216, 512]
            .iter()
            .map(|&n| (n, -0.9 + 0.4 / (n as f64).cbrt()))
            .collect();
        let (a, b) = fit_surface_scaling(&s).unwrap();
        assert!((a + 0.9).abs() < 1e-12 && (b - 0.4).abs() < 1e-12);
    }
}

#[cfg(test)]
mod invariants {
    use super::*;
    use crate::jellium::lattice::LatticeKind;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn decomposition_identities_hold(
            kind in prop_oneof![Just(LatticeKind::Sc), Just(LatticeKind::Fcc), Just(LatticeKind::Bcc)],
            sphere in prop::bool::ANY,
            n in 1usize..20,
        ) {
            let carving = if sphere { Carving::Sphere } else { Carving::Cube };
            let r = decomposition_check(&BravaisLattice::of_kind(kind).unwrap(), n, carving).unwrap();
            prop_assert!(r.identity_residual() < 1e-12, "{r:?}");
            prop_assert!(r.direct > 0.0 && r.interaction > 0.0);
        }
    }
}
