use adlv_core::adlv::{random_g, GNormalized};
use adlv_core::chars::Cyclotomic;
use adlv_core::tower::{Tower, TowerParams};
use adlv_core::traces_geo::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tower(f: u8, d: i64, n: i64) -> Tower {
    Tower::build(&TowerParams::new(f, d, n)).unwrap()
}

#[test]
fn formula_matches_orbits_small() {
    let tw = tower(1, 1, 1);
    let model = GeoModel::build(&tw).unwrap();
    assert_eq!(model.dimension() as i64, expected_dimension(&tw));
    let chis = model.grp.generic_characters(&tw, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..40 {
        let g = random_g(&tw, &mut rng).unwrap();
        let fc = formula_counts(&tw, &model.grp, &g).unwrap();
        assert!(divisible_for_all(&tw, &model.grp, &fc));
        for (_, chi) in &chis {
            let a = model.trace_formula(&tw, &g, chi).unwrap();
            let b = model.trace_oracle(&tw, &g, chi).unwrap();
            assert_eq!(a, b, "g = {:?} chi = {chi}", g.recompose(&tw));
        }
    }
}

#[test]
fn unipotent_values_small() {
    let tw = tower(1, 1, 1);
    let model = GeoModel::build(&tw).unwrap();
    let (_, chi) = model.grp.generic_characters(&tw, 1).unwrap().remove(0);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for row in unipotent_trace_table(&tw, &model, &chi, &mut rng).unwrap() {
        let e = Cyclotomic::from_int(chi.order, row.expected);
        assert_eq!(row.formula, e, "ord {}", row.ord);
        assert_eq!(row.oracle, e, "ord {}", row.ord);
    }
}

#[test]
fn spectrum_depth_irreducible_small() {
    let tw = tower(1, 1, 1);
    let model = GeoModel::build(&tw).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for (_, chi) in model.grp.generic_characters(&tw, 1).unwrap() {
        let sp = n1_spectrum(&tw, &model.grp, &chi).unwrap();
        assert!(sp.matches(), "{:?}", sp.multiplicities);
        let dr = depth_and_minimality(&tw, &model.grp, std::slice::from_ref(&chi), 20, &mut rng)
            .unwrap()
            .remove(0);
        assert_eq!(dr.j0, dr.expected_j0, "{dr:?}");
        assert!(dr.trivial_on_top && dr.twist_minimal, "{dr:?}");
        let ip = borel_inner_product(&tw, &model.grp, &chi).unwrap();
        assert_eq!(ip, Cyclotomic::one(chi.order));
    }
    let _ = GNormalized::identity(&tw);
}

#[test]
fn formula_matches_orbits_all_configs() {
    for tw in [tower(2, 1, 1), tower(1, 3, 2), tower(1, 1, 2)] {
        let model = GeoModel::build(&tw).unwrap();
        assert_eq!(model.dimension() as i64, expected_dimension(&tw));
        let chis = model.grp.generic_characters(&tw, 1).unwrap();
        assert!(!chis.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..12 {
            let g = random_g(&tw, &mut rng).unwrap();
            for (_, chi) in chis.iter().take(4) {
                let a = model.trace_formula(&tw, &g, chi).unwrap();
                let b = model.trace_oracle(&tw, &g, chi).unwrap();
                assert_eq!(a, b, "{:?}", tw.params());
            }
        }
        let (_, chi) = &chis[0];
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for row in unipotent_trace_table(&tw, &model, chi, &mut rng).unwrap() {
            assert_eq!(
                row.oracle,
                Cyclotomic::from_int(chi.order, row.expected),
                "{:?} ord {}",
                tw.params(),
                row.ord
            );
            assert_eq!(row.formula, row.oracle);
        }
    }
}
