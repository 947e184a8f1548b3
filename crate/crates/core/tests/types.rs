use adlv_core::adlv::GNormalized;
use adlv_core::chars::{Cyclotomic, TorsionGroup};
use adlv_core::gl2::{iota_pi, Mat2};
use adlv_core::tower::{Tower, TowerParams};
use adlv_core::traces_geo::expected_dimension;
use adlv_core::types_bh::*;
use std::collections::HashSet;

fn tower(f: u8, d: i64, n: i64) -> Tower {
    Tower::build(&TowerParams::new(f, d, n)).unwrap()
}

#[test]
fn extraction_and_theorem_small() {
    let tw = tower(1, 1, 1);
    let grp = TorsionGroup::build(&tw).unwrap();
    let thetas = grp.generic_thetas(&tw, 1).unwrap();
    assert_eq!(thetas.len(), 2);
    let samples = exhaustive_samples(&tw, &[1, 0]).unwrap();
    for theta in &thetas {
        let lifts = grp.lift_characters(theta, &tw).unwrap();
        assert_eq!(lifts.len() as u64, tw.q.pow(tw.d as u32));
        let mut keys = HashSet::new();
        for chi in &lifts {
            let lam = extract_theta_psi_alpha(&tw, &grp, chi).unwrap();
            assert!(compatibility_holds(&tw, &lam).unwrap());
            assert!(beta_dual_round_trip(&tw, &grp, chi, &lam).unwrap());
            assert!(diagram_commutes(&tw, &lam.alpha).unwrap());
            keys.insert(lam.alpha.key(&tw).unwrap());
            let one = lambda_eval(&tw, &lam, &Mat2::identity(&tw)).unwrap();
            assert_eq!(one, Cyclotomic::one(chi.order));
            let ip = lambda_eval(&tw, &lam, &iota_pi(&tw)).unwrap();
            assert_eq!(ip, lam.theta.eval(&tw.pi_pow(1)).unwrap());
            let id = mackey_trace(&tw, &GNormalized::identity(&tw), &lam).unwrap();
            assert_eq!(id, Cyclotomic::from_int(chi.order, expected_dimension(&tw)));
            let rep =
                main_theorem_check(&tw, &grp, &[(chi.clone(), lam.clone())], &samples).unwrap();
            assert!(
                rep.mismatches.is_empty(),
                "{:?}",
                &rep.mismatches[..rep.mismatches.len().min(3)]
            );
        }
        assert_eq!(keys.len(), lifts.len());
    }
}

#[test]
fn coset_reps_are_distinct() {
    for tw in [tower(1, 1, 1), tower(2, 1, 1), tower(1, 1, 2)] {
        let reps = coset_reps(&tw);
        assert_eq!(reps.len() as i64, expected_dimension(&tw));
        for (i, a) in reps.iter().enumerate() {
            for b in &reps[..i] {
                assert!(!same_right_coset(&tw, &a.2, &b.2).unwrap());
            }
        }
    }
}

#[test]
fn pairings_perfect() {
    for tw in [
        tower(1, 1, 1),
        tower(2, 1, 1),
        tower(1, 3, 2),
        tower(1, 1, 2),
    ] {
        let r = dual_pairing_ranks(&tw).unwrap();
        assert!(r.all_perfect(), "{r:?}");
    }
}
