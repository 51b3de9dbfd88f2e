use minieg::linalg::DenseMatrix;
use minieg::problems::{
    AffineProblem, CsProblem, LogRegProblem, SyntheticCsSpec, SyntheticLogRegSpec,
};
use minieg::rng::SplitMix64;
use minieg::{
    l2_norm, weighted_norm, CostLedger, EvaluationSession, LipschitzSampler, Mapping, Point,
    Projection,
};
use proptest::prelude::*;

fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, n)
}

fn projections() -> Vec<Projection> {
    vec![
        Projection::Identity,
        Projection::NonnegativeOrthant,
        Projection::boxed(vec![-1.0, 0.0, -5.0, 2.0], vec![1.0, 0.5, 5.0, 2.0]).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projection_is_nonexpansive(x in vec_strategy(4), y in vec_strategy(4)) {
        for p in projections() {
            let px = p.project(&Point::new(x.clone()).unwrap()).unwrap();
            let py = p.project(&Point::new(y.clone()).unwrap()).unwrap();
            let d: Vec<f64> = px.iter().zip(py.iter()).map(|(a, b)| a - b).collect();
            let d0: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            prop_assert!(l2_norm(&d) <= l2_norm(&d0) + 1e-12);
        }
    }

    #[test]
    fn projection_is_idempotent(x in vec_strategy(4)) {
        for p in projections() {
            let once = p.project(&Point::new(x.clone()).unwrap()).unwrap();
            let twice = p.project(&once).unwrap();
            prop_assert_eq!(once, twice);
        }
    }

    #[test]
    fn weighted_norm_gamma_zero_is_l2(
        x in vec_strategy(6),
        l in prop::collection::vec(1e-3f64..1e3, 6),
    ) {
        let w = weighted_norm(&x, &l, 0.0).unwrap();
        let e = l2_norm(&x);
        prop_assert!((w - e).abs() <= 1e-14 * e.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn ledger_matches_rational_count(
        n in 1usize..5000,
        calls in prop::collection::vec(any::<bool>(), 0..400),
    ) {
        let mut ledger = CostLedger::new(n);
        let mut prev = 0.0;
        for full in calls {
            if full { ledger.charge_full() } else { ledger.charge_component() }
            prop_assert!(ledger.nf() >= prev);
            prev = ledger.nf();
        }
        let (num, den) = ledger.nf_exact();
        prop_assert_eq!(
            num,
            ledger.full_evals() as u128 * n as u128 + ledger.component_evals() as u128
        );
        prop_assert_eq!(den, n as u128);
        prop_assert!((ledger.nf() - num as f64 / den as f64).abs() <= 1e-12 * ledger.nf().max(1.0));
    }

    #[test]
    fn sampler_stays_in_range(
        l in prop::collection::vec(1e-6f64..1e6, 1..40),
        gamma in 0.0f64..8.0,
        seed in any::<u64>(),
    ) {
        let mut s = LipschitzSampler::new(&l, gamma, seed).unwrap();
        for _ in 0..50 {
            prop_assert!(s.sample() < l.len());
        }
    }
}

fn small_logreg(seed: u64) -> LogRegProblem {
    LogRegProblem::synthetic(&SyntheticLogRegSpec {
        n_features: 30,
        n_samples: 20,
        tau: 0.1,
        seed,
    })
    .unwrap()
}

fn small_cs(seed: u64) -> CsProblem {
    CsProblem::synthetic(&SyntheticCsSpec::new(16, 8, 3, seed))
        .unwrap()
        .0
}

fn gaussian(rng: &mut SplitMix64, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.next_gaussian()).collect()
}

fn lipschitz_probes<M: Mapping>(m: &M, seed: u64, probes: usize) {
    let n = m.dim();
    let l = m.componentwise_lipschitz();
    let mut rng = SplitMix64::new(seed);
    let mut f0 = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    for _ in 0..probes {
        let scale = [0.1, 1.0, 10.0][rng.next_below(3)];
        let mut x = gaussian(&mut rng, n, scale);
        let i = rng.next_below(n);
        let t = scale * rng.next_gaussian();
        m.eval_full(&x, &mut f0);
        x[i] += t;
        m.eval_full(&x, &mut f1);
        let gap = (f1[i] - f0[i]).abs();
        assert!(
            gap <= l[i] * t.abs() + 1e-9,
            "coordinate {i}: |ΔF_i| = {gap} exceeds l_i|t| = {}",
            l[i] * t.abs()
        );
    }
}

fn monotonicity_probes<M: Mapping>(m: &M, seed: u64, pairs: usize) {
    let n = m.dim();
    let mut rng = SplitMix64::new(seed);
    let mut fx = vec![0.0; n];
    let mut fy = vec![0.0; n];
    for _ in 0..pairs {
        let scale = [0.1, 1.0, 10.0][rng.next_below(3)];
        let x = gaussian(&mut rng, n, scale);
        let y = gaussian(&mut rng, n, scale);
        m.eval_full(&x, &mut fx);
        m.eval_full(&y, &mut fy);
        let ip: f64 = (0..n).map(|i| (fx[i] - fy[i]) * (x[i] - y[i])).sum();
        assert!(ip >= -1e-9, "monotonicity violated: {ip}");
    }
}

#[test]
fn componentwise_lipschitz_logreg() {
    lipschitz_probes(&small_logreg(1), 11, 10_000);
}

#[test]
fn componentwise_lipschitz_cs() {
    lipschitz_probes(&small_cs(2), 12, 10_000);
}

#[test]
fn componentwise_lipschitz_affine() {
    lipschitz_probes(&AffineProblem::random_monotone(8, 3).unwrap(), 13, 10_000);
    lipschitz_probes(&AffineProblem::skew_2d(), 14, 10_000);
}

#[test]
fn monotone_logreg() {
    monotonicity_probes(&small_logreg(4), 21, 10_000);
}

#[test]
fn monotone_affine() {
    monotonicity_probes(&AffineProblem::random_monotone(8, 5).unwrap(), 22, 10_000);
    monotonicity_probes(&AffineProblem::skew_2d(), 23, 10_000);
}

// The componentwise minimum of a monotone affine map is not monotone in
// general; the solvers do not rely on it.
#[test]
fn cs_residual_map_is_not_globally_monotone() {
    let p = small_cs(6);
    let n = p.dim();
    let mut rng = SplitMix64::new(24);
    let (mut fx, mut fy) = (vec![0.0; n], vec![0.0; n]);
    let found = (0..10_000).any(|_| {
        let x = gaussian(&mut rng, n, 10.0);
        let y = gaussian(&mut rng, n, 10.0);
        p.eval_full(&x, &mut fx);
        p.eval_full(&y, &mut fy);
        (0..n).map(|i| (fx[i] - fy[i]) * (x[i] - y[i])).sum::<f64>() < 0.0
    });
    assert!(found);
}

fn session_consistency<M: Mapping>(m: &M, seed: u64) {
    let n = m.dim();
    let mut rng = SplitMix64::new(seed);
    let x0 = gaussian(&mut rng, n, 1.0);
    let mut s = EvaluationSession::new(m, &x0).unwrap();
    let mut full = vec![0.0; n];
    for round in 0..200 {
        if round % 37 == 36 {
            let x = gaussian(&mut rng, n, 1.0);
            s.set_point(&x);
        } else {
            let j = rng.next_below(n);
            s.shift_coordinate(j, rng.next_gaussian());
        }
        m.eval_full(s.point(), &mut full);
        for _ in 0..32 {
            let i = rng.next_below(n);
            let c = s.eval_component(i);
            assert!(
                (c - full[i]).abs() <= 1e-10 * full[i].abs().max(1.0),
                "round {round}, component {i}: {c} vs {}",
                full[i]
            );
        }
    }
}

#[test]
fn sessions_track_shifts_and_resets() {
    session_consistency(&small_logreg(7), 31);
    session_consistency(&small_cs(8), 32);
    session_consistency(&AffineProblem::random_monotone(10, 9).unwrap(), 33);
}

fn shift_round_trip<M: Mapping>(m: &M, seed: u64) {
    let n = m.dim();
    let mut rng = SplitMix64::new(seed);
    let x0 = gaussian(&mut rng, n, 1.0);
    let mut s = EvaluationSession::new(m, &x0).unwrap();
    let before: Vec<f64> = (0..n).map(|i| s.eval_component(i)).collect();
    let moves: Vec<(usize, f64)> = (0..50)
        .map(|_| (rng.next_below(n), 3.0 * rng.next_gaussian()))
        .collect();
    for &(j, d) in &moves {
        s.shift_coordinate(j, d);
    }
    for &(j, d) in moves.iter().rev() {
        s.shift_coordinate(j, -d);
    }
    for (i, b) in before.iter().enumerate() {
        let a = s.eval_component(i);
        assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
    }
}

#[test]
fn inverse_shift_restores_components() {
    shift_round_trip(&small_logreg(10), 41);
    shift_round_trip(&small_cs(11), 42);
    shift_round_trip(&AffineProblem::random_spd(7, 0.1, 12).unwrap(), 43);
}

#[test]
fn logreg_components_match_full_evaluation() {
    let p = small_logreg(13);
    let n = p.dim();
    let mut rng = SplitMix64::new(51);
    let mut full = vec![0.0; n];
    for _ in 0..1000 {
        let x = gaussian(&mut rng, n, 2.0);
        let i = rng.next_below(n);
        p.eval_full(&x, &mut full);
        let mut s = EvaluationSession::new(&p, &x).unwrap();
        let c = s.eval_component(i);
        assert!((c - full[i]).abs() <= 1e-12 * full[i].abs().max(1e-300));
    }
}

#[test]
fn logreg_shift_updates_other_components() {
    let p = small_logreg(14);
    let n = p.dim();
    let mut rng = SplitMix64::new(52);
    let x = gaussian(&mut rng, n, 1.0);
    let mut s = EvaluationSession::new(&p, &x).unwrap();
    let (j, i) = (3, 17);
    s.shift_coordinate(j, 0.75);
    let mut moved = x.clone();
    moved[j] += 0.75;
    let mut full = vec![0.0; n];
    p.eval_full(&moved, &mut full);
    assert!((s.eval_component(i) - full[i]).abs() <= 1e-12 * full[i].abs().max(1.0));
}

#[test]
fn cs_components_match_full_evaluation() {
    let p = small_cs(15);
    let n = p.dim();
    let mut rng = SplitMix64::new(53);
    let mut full = vec![0.0; n];
    for _ in 0..1000 {
        let z = gaussian(&mut rng, n, 1.0);
        let i = rng.next_below(n);
        p.eval_full(&z, &mut full);
        let mut s = EvaluationSession::new(&p, &z).unwrap();
        assert_eq!(s.eval_component(i), full[i]);
    }
}

#[test]
fn coupling_factor_in_range() {
    use minieg::linalg::PowerIterationOptions;
    use minieg::problems::coupling_factor;
    for seed in 0..10 {
        let a = AffineProblem::random_monotone(12, seed).unwrap();
        let k = coupling_factor(a.global_lipschitz().unwrap(), a.componentwise_lipschitz());
        assert!((1.0 - 1e-12..=12.0).contains(&k), "affine κ = {k}");

        let (lr, _) = small_logreg(seed).with_global_lipschitz(PowerIterationOptions::default());
        let k = coupling_factor(lr.global_lipschitz().unwrap(), lr.componentwise_lipschitz());
        assert!(k >= 1.0 && k <= lr.dim() as f64, "logreg κ = {k}");

        // The CS constant carries a √(2n) factor from the min-residual bound,
        // so only its lower end is guaranteed; the Lipschitz bound of the
        // inner affine map max(λ₁(H), 1) satisfies both ends.
        let (cs, est) = small_cs(seed).with_global_lipschitz(PowerIterationOptions::default());
        let l = cs.componentwise_lipschitz();
        let k = coupling_factor(cs.global_lipschitz().unwrap(), l);
        assert!(k >= 1.0, "cs κ = {k}");
        let inner = (2.0 * 1.01 * est.value).max(1.0);
        let k = coupling_factor(inner, l);
        assert!(k >= 1.0 && k <= cs.dim() as f64, "cs inner κ = {k}");
    }
}

#[test]
fn affine_identity_shift_is_exact() {
    let p = AffineProblem::new(DenseMatrix::identity(3), vec![1.0, 2.0, 3.0]).unwrap();
    let mut s = EvaluationSession::new(&p, &[0.0; 3]).unwrap();
    s.shift_coordinate(1, 0.5);
    assert_eq!(s.eval_component(1), 2.5);
    assert_eq!(s.eval_component(0), 1.0);
}
