use adlv_core::algebra::{Fq, Series, Uniformizer};
use adlv_core::chars::Cyclotomic;
use adlv_core::groups::{beta_iso, enumerate_pi_torsion, enumerate_torsion, GammaBarElem, PiElem};
use adlv_core::tower::{Tower, TowerParams};
use adlv_core::types_bh::{psi_e_alpha, AlphaSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn tower_b() -> &'static Tower {
    static T: OnceLock<Tower> = OnceLock::new();
    T.get_or_init(|| Tower::build(&TowerParams::new(2, 1, 1)).unwrap())
}

fn tower_c() -> &'static Tower {
    static T: OnceLock<Tower> = OnceLock::new();
    T.get_or_init(|| Tower::build(&TowerParams::new(1, 3, 2)).unwrap())
}

fn torsion_c() -> &'static (Vec<GammaBarElem>, Vec<PiElem>) {
    static G: OnceLock<(Vec<GammaBarElem>, Vec<PiElem>)> = OnceLock::new();
    G.get_or_init(|| {
        (
            enumerate_torsion(tower_c()),
            enumerate_pi_torsion(tower_c()),
        )
    })
}

fn series(tw: &Tower, lo: i64, bits: &[u8]) -> Series {
    Series::from_bits(tw.f, Uniformizer::Pi, lo, bits, tw.work())
}

fn bits_strategy(len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(any::<u8>(), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fq_is_a_field(f in 1u8..=4, a in any::<u8>(), b in any::<u8>(), c in any::<u8>()) {
        let (a, b, c) = (Fq::new(f, a), Fq::new(f, b), Fq::new(f, c));
        prop_assert_eq!(a.mul(b).mul(c), a.mul(b.mul(c)));
        prop_assert_eq!(a.mul(b.add(c)), a.mul(b).add(a.mul(c)));
        prop_assert_eq!(a.add(a), Fq::zero(f));
        if a != Fq::zero(f) {
            prop_assert_eq!(a.mul(a.inv().unwrap()), Fq::one(f));
        }
    }

    #[test]
    fn series_ring_laws(x in bits_strategy(8), y in bits_strategy(8), z in bits_strategy(8), lo in -2i64..2) {
        let tw = tower_b();
        let (a, b, c) = (series(tw, lo, &x), series(tw, 0, &y), series(tw, 1, &z));
        let w = tw.work() - 8;
        prop_assert!(a.mul(&b.add(&c)).eq_mod(&a.mul(&b).add(&a.mul(&c)), w).unwrap());
        prop_assert!(a.mul(&b).mul(&c).eq_mod(&a.mul(&b.mul(&c)), w).unwrap());
        let u = tw.one().add(&c);
        prop_assert!(u.mul(&u.inv().unwrap()).eq_mod(&tw.one(), w).unwrap());
    }

    #[test]
    fn galois_action_is_a_ring_involution(seed in any::<u64>()) {
        let tw = tower_c();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = tw.work();
        let a = tw.random_in_ideal(&mut rng, -2, w);
        let b = tw.random_in_ideal(&mut rng, 0, w);
        let wc = w - 12;
        prop_assert!(tw.tau(&a.mul(&b)).eq_mod(&tw.tau(&a).mul(&tw.tau(&b)), wc).unwrap());
        prop_assert!(tw.tau(&a.add(&b)).eq_mod(&tw.tau(&a).add(&tw.tau(&b)), wc).unwrap());
        prop_assert!(tw.tau(&tw.tau(&a)).eq_mod(&a, wc).unwrap());
        prop_assert!(tw.norm(&a.mul(&b)).eq_mod(&tw.norm(&a).mul(&tw.norm(&b)), wc).unwrap());
    }

    #[test]
    fn additive_character_is_additive(seed in any::<u64>()) {
        let tw = tower_b();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = tw.random_in_ideal(&mut rng, -2, tw.work());
        let b = tw.random_in_ideal(&mut rng, -2, tw.work());
        let (ta, tb) = (tw.trace(&a), tw.trace(&b));
        prop_assert_eq!(tw.psi_bit(&ta.add(&tb)).unwrap(), tw.psi_bit(&ta).unwrap() ^ tw.psi_bit(&tb).unwrap());
    }

    #[test]
    fn psi_e_alpha_is_biadditive(seed in any::<u64>()) {
        let tw = tower_c();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a1 = AlphaSpec::random(tw, &mut rng).unwrap();
        let a2 = AlphaSpec::random(tw, &mut rng).unwrap();
        let z1 = tw.random_in_ideal(&mut rng, tw.n, tw.m + 1);
        let z2 = tw.random_in_ideal(&mut rng, tw.n, tw.m + 1);
        let p = |a: &AlphaSpec, z: &Series| psi_e_alpha(tw, a, z).unwrap();
        prop_assert_eq!(p(&a1, &z1.add(&z2)), p(&a1, &z1) ^ p(&a1, &z2));
        let a12 = AlphaSpec::new(tw, &a1.alpha.add(&a2.alpha)).unwrap();
        prop_assert_eq!(p(&a12, &z1), p(&a1, &z1) ^ p(&a2, &z1));
    }

    #[test]
    fn cyclotomic_roots_multiply(m in prop::sample::select(vec![1u64, 2, 4, 8, 12, 16, 24]), a in -50i64..50, b in -50i64..50) {
        let za = Cyclotomic::zeta_pow(m, a);
        let zb = Cyclotomic::zeta_pow(m, b);
        prop_assert_eq!(za.mul(&zb), Cyclotomic::zeta_pow(m, a + b));
        prop_assert_eq!(za.conj(), Cyclotomic::zeta_pow(m, -a));
        prop_assert_eq!(za.mul(&za.conj()), Cyclotomic::one(m));
    }

    #[test]
    fn abelianized_torsion_is_abelian(i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>(), k in any::<prop::sample::Index>()) {
        let tw = tower_c();
        let (tors, _) = torsion_c();
        let (a, b, c) = (i.get(tors), j.get(tors), k.get(tors));
        prop_assert_eq!(a.mul(b, tw), b.mul(a, tw));
        prop_assert_eq!(a.mul(b, tw).mul(c, tw), a.mul(&b.mul(c, tw), tw));
        prop_assert_eq!(a.mul(&a.inv(tw), tw), GammaBarElem::identity(tw));
    }

    #[test]
    fn beta_is_multiplicative(i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let tw = tower_c();
        let (_, pis) = torsion_c();
        let (a, b) = (i.get(pis), j.get(pis));
        prop_assert_eq!(beta_iso(tw, &a.mul(b, tw)), beta_iso(tw, a).mul(&beta_iso(tw, b), tw));
    }
}
