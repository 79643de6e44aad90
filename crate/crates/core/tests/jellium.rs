use lobound::jellium::finite::fit_surface_scaling;
use lobound::jellium::{finite_n_indirect, jellium_energy, BravaisLattice, Carving, LatticeKind};

#[test]
fn lattice_sums_do_not_depend_on_the_cutoff() {
    for kind in [LatticeKind::Sc, LatticeKind::Fcc, LatticeKind::Bcc] {
        let l = BravaisLattice::of_kind(kind).unwrap();
        let a = jellium_energy(&l, 15).unwrap();
        let b = jellium_energy(&l, 25).unwrap();
        assert!(a.converged && b.converged);
        assert!((a.value - b.value).abs() <= 5e-4, "{kind:?}: {} vs {}", a.value, b.value);
        assert!(b.tail_estimate < a.tail_estimate);
    }
}

#[test]
fn cube_and_sphere_carvings_extrapolate_to_the_same_limit() {
    let sc = BravaisLattice::sc();
    let fit = |carving| {
        let samples: Vec<(usize, f64)> = [64usize, 216, 512]
            .iter()
            .map(|&n| (n, finite_n_indirect(&sc, n, carving).unwrap() / n as f64))
            .collect();
        fit_surface_scaling(&samples).unwrap().0
    };
    let (cube, sphere) = (fit(Carving::Cube), fit(Carving::Sphere));
    assert!((cube - sphere).abs() < 1e-2, "{cube} vs {sphere}");
}
