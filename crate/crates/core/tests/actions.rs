use adlv_core::adlv::*;
use adlv_core::gl2::{e_minus, iota, Mat2};
use adlv_core::groups::{enumerate_gamma, GammaElem};
use adlv_core::tower::{Tower, TowerParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tower(f: u8, d: i64, n: i64) -> Tower {
    Tower::build(&TowerParams::new(f, d, n)).unwrap()
}

fn configs() -> Vec<Tower> {
    vec![
        tower(1, 1, 1),
        tower(2, 1, 1),
        tower(1, 3, 2),
        tower(1, 1, 2),
    ]
}

#[test]
fn right_action_matches_matrices() {
    for tw in configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts = enumerate_points(&tw);
        let gam = enumerate_gamma(&tw);
        for _ in 0..60 {
            let p = &pts[rng.gen_range(0..pts.len())];
            let g = &gam[rng.gen_range(0..gam.len())];
            let by_formula = act_right(&tw, g, p).unwrap();
            let by_matrix = act_right_matrix(&tw, g, p).unwrap();
            assert_eq!(
                by_formula,
                by_matrix,
                "config {:?} point {p:?} gamma {g:?}",
                tw.params()
            );
        }
    }
}

#[test]
fn right_action_law() {
    for tw in configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pts = enumerate_points(&tw);
        let gam = enumerate_gamma(&tw);
        for _ in 0..40 {
            let p = &pts[rng.gen_range(0..pts.len())];
            let g = &gam[rng.gen_range(0..gam.len())];
            let h = &gam[rng.gen_range(0..gam.len())];
            let gh: GammaElem = g.mul(h, &tw).unwrap();
            let lhs = act_right(&tw, &gh, p).unwrap();
            let rhs = act_right(&tw, h, &act_right(&tw, g, p).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn left_action_matches_matrices_and_commutes() {
    for tw in configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let pts = enumerate_points(&tw);
        let gam = enumerate_gamma(&tw);
        for _ in 0..40 {
            let p = &pts[rng.gen_range(0..pts.len())];
            let g = random_iwahori_f(&tw, &mut rng, 0, tw.work());
            let a = act_left(&tw, &g, p).unwrap();
            assert_eq!(a, act_left_matrix(&tw, &g, p).unwrap());
            assert!(verify_point(&tw, &a).unwrap());
            let gm = &gam[rng.gen_range(0..gam.len())];
            let lr = act_left(&tw, &g, &act_right(&tw, gm, p).unwrap()).unwrap();
            let rl = act_right(&tw, gm, &a).unwrap();
            assert_eq!(lr, rl);
        }
    }
}

#[test]
fn unipotent_left_action() {
    let tw = tower(1, 1, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for p in enumerate_points(&tw) {
        let u = tw.random_f_ideal(&mut rng, 1, tw.work() / 2);
        let q = act_left(&tw, &e_minus(&tw, &u), &p).unwrap();
        assert_eq!(q.c, p.c);
        assert!(q
            .a
            .rep()
            .eq_mod(&p.a.rep().add(&u), tw.n + tw.d + tw.m + 1)
            .unwrap());
    }
}

#[test]
fn beta_matches_matrices() {
    for tw in configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let pts = enumerate_points(&tw);
        for _ in 0..40 {
            let p = &pts[rng.gen_range(0..pts.len())];
            let g = random_g(&tw, &mut rng).unwrap();
            let f = act_beta(&tw, &g, p).unwrap();
            assert_eq!(f, act_beta_matrix(&tw, &g, p).unwrap(), "{:?}", tw.params());
            assert_eq!(f, act_beta_raw(&tw, &g.recompose(&tw), p).unwrap());
            assert!(verify_point(&tw, &f).unwrap());
        }
    }
}

#[test]
fn beta_of_iota_pi_closed_form() {
    let tw = tower(1, 1, 1);
    let g = GNormalized::new(&tw, &iota(&tw, &tw.pi_pow(1)).unwrap()).unwrap();
    assert_eq!(g.pi_parity, 1);
    for p in enumerate_points(&tw) {
        let a = p.a_lift(&tw);
        let s = a.shift(-1).add(&tw.one()).add(&tw.eps);
        let expect = tw.eps.shift(1).div(&s).unwrap();
        let q = act_beta(&tw, &g, &p).unwrap();
        assert!(q.a.rep().eq_mod(&expect, tw.n + tw.d + tw.m + 1).unwrap());
    }
    let _ = Mat2::identity(&tw);
}
