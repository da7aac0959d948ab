use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vlam_core::quantum::{
    bloch, c, diamond_distance_iso, diamond_distance_stinespring, kron, phase, projector, pure_distance, trace_norm, unit_vector,
    CMatrix, CVector, DiamondOpts,
};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
    (&a + a.adjoint()).scale(0.5)
}

fn unitary(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CMatrix {
    CMatrix::from_fn(n, k, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).qr().q()
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    let angles: Vec<f64> = (0..2 * n - 2).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    unit_vector(&angles, n)
}

fn opts() -> DiamondOpts {
    DiamondOpts { starts: 8, seed: 1, tol: 1e-9 }
}

proptest! {
    #![proptest_config(config(500))]

    #[test]
    fn trace_norm_is_a_norm(seed in any::<u64>(), n in 1usize..6, lambda in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (hermitian(&mut rng, n), hermitian(&mut rng, n));
        let na = trace_norm(&a).unwrap();
        let nb = trace_norm(&b).unwrap();
        prop_assert!(na >= 0.0);
        prop_assert!(trace_norm(&(&a + &b)).unwrap() <= na + nb + 1e-10);
        prop_assert!((trace_norm(&a.scale(lambda)).unwrap() - lambda.abs() * na).abs() <= 1e-10 * (1.0 + na));
        prop_assert!(trace_norm(&(&a - &a)).unwrap() == 0.0);
        // unitarily invariant
        let u = unitary(&mut rng, n, n);
        prop_assert!((trace_norm(&(&u * &a * u.adjoint())).unwrap() - na).abs() <= 1e-10 * (1.0 + na));
    }

    /// Distance between pure qubit states equals the euclidean distance of
    /// their Bloch vectors.
    #[test]
    fn bloch_identity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_state(&mut rng, 2), random_state(&mut rng, 2));
        let (ra, rb) = (bloch(&a).unwrap(), bloch(&b).unwrap());
        let euclid = ra.iter().zip(&rb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        let tn = trace_norm(&(projector(&a) - projector(&b))).unwrap();
        prop_assert!((tn - euclid).abs() <= 1e-9, "{tn} vs {euclid}");
        prop_assert!((pure_distance(&a, &b) - euclid).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(config(60))]

    #[test]
    fn diamond_is_a_pseudometric(seed in any::<u64>(), n in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = n + rng.gen_range(0..2);
        let (t, s, r) = (unitary(&mut rng, m, n), unitary(&mut rng, m, n), unitary(&mut rng, m, n));
        let d = |x: &CMatrix, y: &CMatrix| diamond_distance_iso(x, y, opts()).unwrap();
        let (ts, st) = (d(&t, &s), d(&s, &t));
        prop_assert!((ts - st).abs() <= 1e-6, "{ts} vs {st}");
        prop_assert!(d(&t, &t) <= 1e-12);
        // a global phase is invisible to the channel
        prop_assert!(d(&t, &t.map(|z| z * c(0.0, 1.0))) <= 1e-7);
        prop_assert!(d(&t, &r) <= ts + d(&s, &r) + 1e-6);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&ts));
    }

    /// Post-processing by a channel never increases the distance.
    #[test]
    fn diamond_contracts_under_postprocessing(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t, s) = (unitary(&mut rng, 2, 2), unitary(&mut rng, 2, 2));
        let before = diamond_distance_iso(&t, &s, opts()).unwrap();
        // G : 2 -> 2 with a qubit of environment
        let g = unitary(&mut rng, 4, 2);
        let after = diamond_distance_stinespring(&(&g * &t), 2, &(&g * &s), 2, opts()).unwrap();
        prop_assert!(after <= before + 1e-6, "{after} > {before}");
        // an isometry leaves it unchanged
        let w = unitary(&mut rng, 3, 2);
        let iso = diamond_distance_iso(&(&w * &t), &(&w * &s), opts()).unwrap();
        prop_assert!((iso - before).abs() <= 1e-6);
        // so does tensoring with an identity
        let id = CMatrix::identity(2, 2);
        let wide = diamond_distance_iso(&kron(&t, &id), &kron(&s, &id), opts()).unwrap();
        prop_assert!((wide - before).abs() <= 1e-6);
    }
}

#[test]
fn phase_distance_is_monotone_and_vanishes() {
    let id = CMatrix::identity(2, 2);
    let eps: Vec<f64> = (0..=40).map(|k| 3.0 * k as f64 / 40.0).collect();
    let ds: Vec<f64> = eps.iter().map(|&e| diamond_distance_iso(&phase(e), &id, opts()).unwrap()).collect();
    for w in ds.windows(2) {
        assert!(w[0] <= w[1] + 1e-9, "{ds:?}");
    }
    for (e, d) in eps.iter().zip(&ds) {
        assert!((d - 2.0 * (e / 2.0).sin()).abs() <= 1e-6, "at {e}: {d}");
    }
    let small = diamond_distance_iso(&phase(1e-6), &id, opts()).unwrap();
    assert!(small <= 1.01e-6);
}
