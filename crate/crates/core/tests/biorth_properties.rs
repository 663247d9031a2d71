use proptest::prelude::*;
use zp_core::biorth::perturbation_chain_check;
use zp_core::synth::{chain_instance, synth_system, SynthConfig};
use zp_core::{
    distortion_bound, distortion_lower_bound, lift_system, renorm, validate_biorth, Families,
    PExponent, SeqVector, TwistedVector,
};

fn p(v: f64) -> PExponent {
    PExponent::new(v).unwrap()
}

fn functionals(seed: u64, q: PExponent) -> Vec<SeqVector> {
    let cfg = SynthConfig::new(q, 0.2, seed);
    match synth_system(&cfg).unwrap().families() {
        Families::Ellp(f) => f[0].a_star.clone(),
        Families::Zp(_) => unreachable!(),
    }
}

fn vec_strategy() -> impl Strategy<Value = SeqVector> {
    prop::collection::btree_map(1usize..16, -3.0f64..3.0, 1..8)
        .prop_map(|m| SeqVector::from_entries(m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn renorm_is_a_norm_on_ellp(
        x in vec_strategy(), y in vec_strategy(), lambda in -10.0f64..10.0,
        seed in 0u64..1000, eps in 0.01f64..1.0, q in 1.2f64..4.0,
    ) {
        let q = p(q);
        let fs = functionals(seed, q);
        let n = |v: &SeqVector| renorm(v, eps, &fs, q).unwrap();
        prop_assert!((n(&x.scale(lambda)) - lambda.abs() * n(&x)).abs() <= 1e-10 * (1.0 + lambda.abs() * n(&x)));
        prop_assert!(n(&x.add(&y)) <= n(&x) + n(&y) + 1e-10);
    }

    #[test]
    fn renorm_grows_with_the_functional_set(x in vec_strategy(), seed in 0u64..1000, eps in 0.01f64..1.0) {
        let q = p(2.0);
        let fs = functionals(seed, q);
        let mut previous = 0.0;
        for k in 1..=fs.len() {
            let value = renorm(&x, eps, &fs[..k], q).unwrap();
            prop_assert!(value >= previous);
            previous = value;
        }
    }
}

#[test]
fn lifted_systems_keep_margins_and_ratio() {
    for seed in 0..20u64 {
        for q in [1.5, 2.0, 3.0] {
            let delta = [0.05, 0.1, 0.2, 0.4][seed as usize % 4];
            let sys = synth_system(&SynthConfig::new(p(q), delta, seed)).unwrap();
            let lifted = lift_system(&sys).unwrap();
            let (before, after) = (validate_biorth(&sys), validate_biorth(&lifted));
            for (r0, r1) in before.margins.iter().zip(&after.margins) {
                for (m0, m1) in r0.iter().zip(r1) {
                    assert!((m0 - m1).abs() <= 1e-12);
                }
            }
            assert!(after.passes());
            let Families::Zp(families) = lifted.families() else {
                unreachable!()
            };
            let Families::Ellp(original) = sys.families() else {
                unreachable!()
            };
            for (fz, fl) in families.iter().zip(original) {
                for (z, x) in fz.a.iter().zip(&fl.a) {
                    assert!((z.quasi_norm() - x.lp_norm(p(q))).abs() <= 1e-12);
                }
                for (z, b) in fz.a_star.iter().zip(&fl.a_star) {
                    assert!((z.quasi_norm() - b.lp_norm(p(q).dual())).abs() <= 1e-12);
                }
            }
            for eps in [0.01, 0.05, 0.1, 0.5] {
                let r = distortion_lower_bound(&lifted, eps).unwrap();
                assert!(r.ratio >= distortion_bound(delta, eps) - 1e-9, "{r:?}");
            }
        }
    }
}

#[test]
fn lifted_functionals_reproduce_pairings() {
    let q = p(3.0);
    let x: SeqVector = "1:0.5;2:-1;4:2".parse().unwrap();
    let b: SeqVector = "1:1;3:2;4:-0.25".parse().unwrap();
    let f = TwistedVector::lifted(b.clone(), q.dual());
    let z = TwistedVector::first(x.clone(), q);
    assert_eq!(zp_core::twisted_pairing(&z, &f), x.pairing(&b));
}

#[test]
fn perturbation_chain_on_random_instances() {
    let mut chain_failures = 0;
    for seed in 0..200u64 {
        let q = [1.5, 2.0, 3.0][seed as usize % 3];
        let eps = [0.05, 0.1, 0.3][seed as usize % 3];
        let inst = chain_instance(p(q), 2 + seed as usize % 6, 3, eps, seed).unwrap();
        let r =
            perturbation_chain_check(&inst.w, &inst.u, &inst.a, &inst.coeffs, inst.eps).unwrap();
        assert!(r.applicable, "{r:?}");
        assert!(r.holds, "seed {seed}: {r:?}");
        if !r.chain_holds {
            chain_failures += 1;
        }
    }
    eprintln!("intermediate bound exceeded in {chain_failures}/200 instances");
}
