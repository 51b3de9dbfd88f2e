use minieg::linalg::{DenseMatrix, PowerIterationOptions};
use minieg::problems::{AffineProblem, CsProblem, SyntheticCsSpec};
use minieg::rng::SplitMix64;
use minieg::{
    beta_full, descent_product, greedy_index, inf_norm, mini_step, run_solver, ContractError,
    CoordinateSampler, Mapping, Method, Point, Projection, RunStatus, SolverConfig, SolverError,
    StepOutcome, Stepper, TraceLevel,
};

fn diag(d: &[f64]) -> DenseMatrix {
    let n = d.len();
    DenseMatrix::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 })
}

fn cfg(seed: u64) -> SolverConfig {
    SolverConfig {
        seed,
        ..Default::default()
    }
}

#[test]
fn eg_single_step_on_identity() {
    let p = AffineProblem::new(DenseMatrix::identity(2), vec![0.0, 0.0]).unwrap();
    let proj = Projection::Identity;
    let mut st = Stepper::new(&p, &proj, 0.5, &[1.0, 0.0]).unwrap();
    let StepOutcome::Advanced(rec) = st.eg_step().unwrap() else {
        panic!("expected a step")
    };
    assert_eq!(st.last_y(), &[0.5, 0.0]);
    assert!((rec.beta - 1.0).abs() < 1e-15);
    assert!((st.point()[0] - 0.5).abs() < 1e-15 && st.point()[1] == 0.0);
    assert_eq!(st.ledger().full_evals(), 2);
}

#[test]
fn greedy_single_step_on_diagonal() {
    let p = AffineProblem::new(diag(&[2.0, 1.0]), vec![0.0, 0.0]).unwrap();
    let proj = Projection::Identity;
    let mut st = Stepper::new(&p, &proj, 0.5, &[1.0, 0.0]).unwrap();
    let StepOutcome::Advanced(rec) = st.gmini_step().unwrap() else {
        panic!("expected a step")
    };
    assert_eq!(rec.selected_index, Some(0));
    assert_eq!(rec.beta, 0.5);
    assert_eq!(st.last_y(), &[0.5, 0.0]);
    assert_eq!(st.point(), &[0.5, 0.0]);
}

#[test]
fn prediction_moves_one_coordinate() {
    let p = AffineProblem::random_monotone(6, 1).unwrap();
    let proj = Projection::Identity;
    let mut st = Stepper::new(&p, &proj, 0.9, &[1.0, -2.0, 0.5, 3.0, 0.0, 1.0]).unwrap();
    for _ in 0..20 {
        let x = st.point().to_vec();
        st.gmini_step().unwrap();
        let moved = x.iter().zip(st.last_y()).filter(|(a, b)| a != b).count();
        assert!(moved <= 1);
    }
}

#[test]
fn root_start_stops_before_stepping() {
    let shifted = AffineProblem::new(DenseMatrix::identity(3), vec![-1.0, 2.0, 0.5]).unwrap();
    let root = Point::new(vec![1.0, -2.0, -0.5]).unwrap();
    for m in [Method::Eg, Method::GreedyMini, Method::WatchdogMax] {
        let r = run_solver(&shifted, &Projection::Identity, m, &cfg(0), &root).unwrap();
        assert_eq!((r.status, r.iterations), (RunStatus::Converged, 0));
        assert_eq!(r.final_point, root);
    }
    let zero = AffineProblem::new(DenseMatrix::identity(3), vec![0.0; 3]).unwrap();
    for m in [Method::Eg, Method::GreedyMini, Method::WatchdogMax] {
        let r = run_solver(&zero, &Projection::Identity, m, &cfg(0), &Point::zeros(3)).unwrap();
        assert_eq!((r.status, r.iterations), (RunStatus::Converged, 0));
        assert_eq!(r.final_point.as_slice(), &[0.0; 3]);
    }
}

#[test]
fn eg_converges_on_shifted_identity() {
    let b = [1.0, -2.0, 3.0, 0.25];
    let p = AffineProblem::new(DenseMatrix::identity(4), b.iter().map(|v| -v).collect()).unwrap();
    for rho in [0.1, 0.5, 0.999] {
        let c = SolverConfig {
            rho,
            ..Default::default()
        };
        let r = run_solver(&p, &Projection::Identity, Method::Eg, &c, &Point::zeros(4)).unwrap();
        assert_eq!(r.status, RunStatus::Converged);
        assert!(r.final_residual <= 1e-8);
    }
}

#[test]
fn eg_needs_global_constant() {
    let (p, _) = CsProblem::synthetic(&SyntheticCsSpec::new(8, 4, 2, 0)).unwrap();
    let err = run_solver(
        &p,
        &Projection::NonnegativeOrthant,
        Method::Eg,
        &cfg(0),
        &Point::zeros(16),
    )
    .unwrap_err();
    assert_eq!(err, SolverError::MissingGlobalLipschitz);
    assert!(err.to_string().contains("power iteration"));
}

#[test]
fn boundary_rho_is_rejected() {
    let p = AffineProblem::skew_2d();
    for rho in [0.0, 1.0, -0.5, f64::NAN] {
        let c = SolverConfig {
            rho,
            ..Default::default()
        };
        let r = run_solver(&p, &Projection::Identity, Method::Eg, &c, &Point::zeros(2));
        assert!(matches!(r, Err(SolverError::Config(_))));
    }
    let c = SolverConfig {
        max_iterations: 0,
        ..Default::default()
    };
    assert!(run_solver(&p, &Projection::Identity, Method::Eg, &c, &Point::zeros(2)).is_err());
}

#[test]
fn skew_eg_step_contracts() {
    let p = AffineProblem::skew_2d();
    let proj = Projection::Identity;
    let x0 = [1.0, 2.0];
    let mut st = Stepper::new(&p, &proj, 0.9, &x0).unwrap();
    st.eg_step().unwrap();
    let d1 = st.point().iter().map(|v| v * v).sum::<f64>();
    assert!(d1 <= 5.0);
}

/// Wraps an affine map and reports deliberately shrunken componentwise
/// constants.
struct Underestimated {
    inner: AffineProblem,
    l: Vec<f64>,
}

impl Mapping for Underestimated {
    type Cache = Vec<f64>;
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn componentwise_lipschitz(&self) -> &[f64] {
        &self.l
    }
    fn global_lipschitz(&self) -> Option<f64> {
        self.inner.global_lipschitz()
    }
    fn eval_full(&self, x: &[f64], out: &mut [f64]) {
        self.inner.eval_full(x, out)
    }
    fn new_cache(&self) -> Vec<f64> {
        self.inner.new_cache()
    }
    fn refresh_cache(&self, x: &[f64], cache: &mut Vec<f64>) {
        self.inner.refresh_cache(x, cache)
    }
    fn component_from_cache(&self, x: &[f64], cache: &Vec<f64>, i: usize) -> f64 {
        self.inner.component_from_cache(x, cache, i)
    }
    fn shift_cache(&self, cache: &mut Vec<f64>, j: usize, delta: f64) {
        self.inner.shift_cache(cache, j, delta)
    }
}

#[test]
fn bad_componentwise_constant_reports_stepsize_failure() {
    let p = Underestimated {
        inner: AffineProblem::new(diag(&[2.0, 1.0]), vec![0.0, 0.0]).unwrap(),
        l: vec![0.2, 1.0],
    };
    let c = SolverConfig {
        rho: 0.5,
        ..Default::default()
    };
    let r = run_solver(
        &p,
        &Projection::Identity,
        Method::GreedyMini,
        &c,
        &Point::new(vec![1.0, 0.0]).unwrap(),
    )
    .unwrap();
    assert_eq!(r.status, RunStatus::StepsizeFailure);
    let f = r.failure.unwrap();
    assert_eq!(f.coordinate, Some(0));
    assert!(f.beta < 0.0);
    assert!(f.to_string().contains("coordinate 0"));
}

#[test]
fn zero_component_degenerates_to_projection() {
    let p = AffineProblem::new(diag(&[1.0, 1.0]), vec![0.0, 0.0]).unwrap();
    let proj = Projection::Identity;
    let mut st = Stepper::new(&p, &proj, 0.5, &[0.0, 1.0]).unwrap();
    let StepOutcome::Advanced(rec) = st.mini_step_at(0).unwrap() else {
        panic!("expected a step")
    };
    assert_eq!(rec.beta, 0.0);
    assert_eq!(st.point(), &[0.0, 1.0]);
}

#[test]
fn component_stepsize_equals_full_formula() {
    let p = AffineProblem::random_monotone(8, 3).unwrap();
    let mut rng = SplitMix64::new(4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let x: Vec<f64> = (0..8).map(|_| rng.next_gaussian()).collect();
        let i = rng.next_below(8);
        let rho = 0.05 + 0.9 * rng.next_f64();
        let s = mini_step(&p, &Projection::Identity, &x, i, rho).unwrap();
        let bc = s.beta.unwrap();
        let bf = beta_full(&s.fy, &x, &s.y).unwrap();
        worst = worst.max((bc - bf).abs() / bf.abs().max(1e-300));
    }
    assert!(worst < 1e-12, "worst relative gap {worst}");
}

#[test]
fn mini_steps_have_positive_descent_product() {
    let p = AffineProblem::random_monotone(10, 5).unwrap();
    let l = p.componentwise_lipschitz().to_vec();
    let proj = Projection::Identity;
    let rho = 0.7;
    let x0: Vec<f64> = (0..10).map(|i| i as f64 - 4.0).collect();
    let mut st = Stepper::new(&p, &proj, rho, &x0).unwrap();
    let mut fx = vec![0.0; 10];
    for _ in 0..300 {
        let x = st.point().to_vec();
        p.eval_full(&x, &mut fx);
        let StepOutcome::Advanced(rec) = st.gmini_step().unwrap() else {
            break;
        };
        let i = rec.selected_index.unwrap();
        let lhs = descent_product(st.last_fy(), &x, st.last_y());
        let rhs = rho * (1.0 - rho) / l[i] * fx[i] * fx[i];
        assert!(lhs >= rhs - 1e-10, "{lhs} < {rhs}");
    }
}

struct ArgmaxSampler<'a, M: Mapping>(&'a M, Vec<f64>);

impl<M: Mapping> CoordinateSampler for ArgmaxSampler<'_, M> {
    fn draw(&mut self, x: &[f64]) -> usize {
        self.0.eval_full(x, &mut self.1);
        greedy_index(&self.1).unwrap()
    }
}

struct Fixed(usize);

impl CoordinateSampler for Fixed {
    fn draw(&mut self, _x: &[f64]) -> usize {
        self.0
    }
}

#[test]
fn random_with_argmax_sampler_equals_greedy() {
    let p = AffineProblem::random_monotone(7, 6).unwrap();
    let proj = Projection::Identity;
    let c = SolverConfig {
        trace_level: TraceLevel::Full,
        max_iterations: 400,
        ..Default::default()
    };
    let x0 = Point::new((0..7).map(|i| (i as f64).sin()).collect()).unwrap();
    let runner = minieg::Runner::new(&p, &proj, &c);
    let g = runner.run(Method::GreedyMini, &x0).unwrap();
    let mut s = ArgmaxSampler(&p, vec![0.0; 7]);
    let r = runner
        .run_with_sampler(Method::RandomMini, &x0, &mut s)
        .unwrap();
    assert_eq!(g.final_point, r.final_point);
    assert_eq!(g.trace.len(), r.trace.len());
    for (a, b) in g.trace.iter().zip(&r.trace) {
        assert_eq!(a.selected_index, b.selected_index);
        assert_eq!(a.residual_y, b.residual_y);
        assert_eq!(a.beta, b.beta);
    }
}

#[test]
fn watchdog_with_reference_sampler_never_resets() {
    let p = AffineProblem::random_spd(6, 0.2, 7).unwrap();
    let proj = Projection::Identity;
    let x0 = Point::new(vec![3.0, -1.0, 0.5, 2.0, -2.0, 1.0]).unwrap();
    let mut f0 = vec![0.0; 6];
    p.eval_full(&x0, &mut f0);
    let i0 = greedy_index(&f0).unwrap();
    let c = SolverConfig {
        trace_level: TraceLevel::Full,
        max_iterations: 300,
        ..Default::default()
    };
    let r = minieg::Runner::new(&p, &proj, &c)
        .run_with_sampler(Method::WatchdogMax, &x0, &mut Fixed(i0))
        .unwrap();
    assert!(r
        .trace
        .iter()
        .all(|t| !t.window_reset && t.selected_index == Some(i0)));

    let mut st = Stepper::new(&p, &proj, c.rho, &x0).unwrap();
    for _ in 0..r.iterations {
        st.mini_step_at(i0).unwrap();
    }
    assert_eq!(st.last_y(), r.final_point.as_slice());
}

#[test]
fn watchdog_selection_dominates_both_candidates() {
    let p = AffineProblem::random_monotone(12, 8).unwrap();
    let proj = Projection::Identity;
    let x0: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).cos()).collect();
    let mut st = Stepper::new(&p, &proj, 0.999, &x0).unwrap();
    st.watchdog_init().unwrap();
    let mut sampler = minieg::LipschitzSampler::new(p.componentwise_lipschitz(), 0.0, 9).unwrap();
    let mut resets = 0;
    for _ in 0..2000 {
        match st.watchdog_step(&mut sampler).unwrap() {
            StepOutcome::Advanced(rec) => {
                let s = st.last_selection().unwrap();
                assert!(s.selected_value.abs() >= s.challenger_value.abs());
                assert!(s.selected_value.abs() >= s.reference_value.abs());
                assert_eq!(rec.window_reset, s.selected_index != s.reference_index);
                resets += rec.window_reset as usize;
            }
            _ => break,
        }
    }
    assert!(resets > 0);
}

fn nf_identity(r: &minieg::RunResult, n: u128) {
    let (num, den) = r.ledger.nf_exact();
    assert_eq!(den, n);
    let k = r.iterations as u128;
    let expected = match r.method {
        Method::Eg | Method::GreedyMini => 2 * k * n,
        Method::RandomMini => k * (n + 1),
        Method::WatchdogMax => n + k * (n + 2),
    };
    assert_eq!(num, expected, "{} after {k} iterations", r.method);
}

#[test]
fn nf_accounting_identities() {
    let a = AffineProblem::random_monotone(9, 10).unwrap();
    let (cs, _) = CsProblem::synthetic(&SyntheticCsSpec::new(20, 10, 3, 11)).unwrap();
    let (cs, _) = cs.with_global_lipschitz(PowerIterationOptions::default());
    for cap in [1, 7, 250] {
        let c = SolverConfig {
            max_iterations: cap,
            ..Default::default()
        };
        for m in Method::ALL {
            let r = run_solver(&a, &Projection::Identity, m, &c, &Point::zeros(9)).unwrap();
            nf_identity(&r, 9);
            assert_eq!(r.nf, r.ledger.nf());
            let r = run_solver(
                &cs,
                &Projection::NonnegativeOrthant,
                m,
                &c,
                &Point::zeros(40),
            )
            .unwrap();
            nf_identity(&r, 40);
        }
    }
}

#[test]
fn identical_inputs_give_identical_traces() {
    let (cs, _) = CsProblem::synthetic(&SyntheticCsSpec::new(24, 12, 3, 12)).unwrap();
    let (cs, _) = cs.with_global_lipschitz(PowerIterationOptions::default());
    let c = SolverConfig {
        seed: 42,
        trace_level: TraceLevel::Full,
        max_iterations: 3000,
        ..Default::default()
    };
    for m in Method::ALL {
        let a = run_solver(
            &cs,
            &Projection::NonnegativeOrthant,
            m,
            &c,
            &Point::zeros(48),
        )
        .unwrap();
        let b = run_solver(
            &cs,
            &Projection::NonnegativeOrthant,
            m,
            &c,
            &Point::zeros(48),
        )
        .unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.final_point, b.final_point);
    }
}

#[test]
fn trace_levels() {
    let p = AffineProblem::random_spd(5, 0.5, 13).unwrap();
    let mut c = SolverConfig {
        max_iterations: 50,
        ..Default::default()
    };
    let none = run_solver(
        &p,
        &Projection::Identity,
        Method::GreedyMini,
        &c,
        &Point::zeros(5),
    )
    .unwrap();
    assert!(none.trace.is_empty());
    c.trace_level = TraceLevel::Summary;
    let last = run_solver(
        &p,
        &Projection::Identity,
        Method::GreedyMini,
        &c,
        &Point::zeros(5),
    )
    .unwrap();
    assert_eq!(last.trace.len(), 1);
    assert_eq!(last.trace[0].k + 1, last.iterations);
    c.trace_level = TraceLevel::Full;
    let full = run_solver(
        &p,
        &Projection::Identity,
        Method::GreedyMini,
        &c,
        &Point::zeros(5),
    )
    .unwrap();
    assert_eq!(full.trace.len() as u64, full.iterations);
    assert_eq!(full.trace.last(), last.trace.last());
    assert!(full.trace.iter().all(|t| t.selected_rank.is_none()));
}

#[test]
fn diagnostics_are_uncharged() {
    let p = AffineProblem::random_monotone(10, 14).unwrap();
    let mut c = SolverConfig {
        max_iterations: 200,
        trace_level: TraceLevel::Full,
        ..Default::default()
    };
    let plain = run_solver(
        &p,
        &Projection::Identity,
        Method::WatchdogMax,
        &c,
        &Point::zeros(10),
    );
    c.diagnostics = true;
    let diag = run_solver(
        &p,
        &Projection::Identity,
        Method::WatchdogMax,
        &c,
        &Point::zeros(10),
    );
    let (plain, diag) = (plain.unwrap(), diag.unwrap());
    assert_eq!(plain.nf, diag.nf);
    assert_eq!(plain.final_point, diag.final_point);
    let dl = diag.diagnostic_ledger.unwrap();
    assert_eq!(dl.full_evals(), diag.iterations);
    for t in &diag.trace {
        let r = t.selected_rank.unwrap();
        assert!((1..=10).contains(&r));
    }
    let mut g = c.clone();
    g.max_iterations = 50;
    let greedy = run_solver(
        &p,
        &Projection::Identity,
        Method::GreedyMini,
        &g,
        &Point::zeros(10),
    )
    .unwrap();
    assert!(greedy.trace.iter().all(|t| t.selected_rank == Some(1)));
}

#[test]
fn converged_status_matches_residual() {
    let p = AffineProblem::random_spd(6, 1.0, 15).unwrap();
    for m in Method::ALL {
        let r = run_solver(&p, &Projection::Identity, m, &cfg(3), &Point::zeros(6)).unwrap();
        assert_eq!(r.status, RunStatus::Converged, "{m}");
        assert!(r.final_residual <= 1e-8);
        let mut f = vec![0.0; 6];
        p.eval_full(&r.final_point, &mut f);
        assert!((minieg::l2_norm(&f) - r.final_residual).abs() <= 1e-12);
        let root = p.known_root().unwrap();
        let gap: Vec<f64> = r
            .final_point
            .iter()
            .zip(root.iter())
            .map(|(a, b)| a - b)
            .collect();
        assert!(inf_norm(&gap).unwrap() < 1e-6);
    }
}

#[test]
fn iteration_cap_is_reported() {
    let p = AffineProblem::skew_2d();
    let c = SolverConfig {
        max_iterations: 3,
        ..Default::default()
    };
    let r = run_solver(
        &p,
        &Projection::Identity,
        Method::GreedyMini,
        &c,
        &Point::new(vec![1.0, 1.0]).unwrap(),
    )
    .unwrap();
    assert_eq!(r.status, RunStatus::IterationCapReached);
    assert_eq!(r.iterations, 3);
    assert!(r.final_residual > c.tolerance);
}

#[test]
fn cs_iterates_stay_nonnegative() {
    let (cs, _) = CsProblem::synthetic(&SyntheticCsSpec::new(16, 8, 2, 16)).unwrap();
    let proj = Projection::NonnegativeOrthant;
    let mut st = Stepper::new(&cs, &proj, 0.999, &[-1.0; 32]).unwrap();
    assert!(st.point().iter().all(|v| *v == 0.0));
    st.watchdog_init().unwrap();
    let mut s = minieg::LipschitzSampler::new(cs.componentwise_lipschitz(), 1.0, 0).unwrap();
    for _ in 0..500 {
        st.watchdog_step(&mut s).unwrap();
        assert!(st.point().iter().all(|v| *v >= 0.0));
    }
}

#[test]
fn greedy_agrees_with_eg_on_desk_cs() {
    let (cs, _) = CsProblem::synthetic(&SyntheticCsSpec::desk(0)).unwrap();
    let (cs, _) = cs.with_global_lipschitz(PowerIterationOptions::default());
    let proj = Projection::NonnegativeOrthant;
    let x0 = Point::zeros(512);
    let eg = run_solver(&cs, &proj, Method::Eg, &cfg(0), &x0).unwrap();
    let gm = run_solver(&cs, &proj, Method::GreedyMini, &cfg(0), &x0).unwrap();
    assert_eq!(eg.status, RunStatus::Converged);
    assert_eq!(gm.status, RunStatus::Converged);
    let gap: Vec<f64> = eg
        .final_point
        .iter()
        .zip(gm.final_point.iter())
        .map(|(a, b)| a - b)
        .collect();
    assert!(inf_norm(&gap).unwrap() <= 1e-5);
}

#[test]
fn greedy_index_errors() {
    assert_eq!(greedy_index(&[0.0, 0.0]), Err(ContractError::AllZero));
    assert_eq!(greedy_index(&[]), Err(ContractError::Empty));
}
