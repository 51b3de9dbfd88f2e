use alloc::vec;
use alloc::vec::Vec;

use crate::error::StepsizeFailure;
use crate::norms::{dot, l2_norm_sq};
use crate::{
    ContractError, CoordinateSampler, CostLedger, EvaluationSession, Mapping, Projection,
    SolverError,
};

/// Two-time-scale extragradient stepsize `F(y)ᵀ(x − y) / ‖F(y)‖²`.
///
/// Returns `None` when `F(y) = 0`: `y` is then an exact root and the caller
/// should stop there instead of dividing by zero.
pub fn beta_full(fy: &[f64], x: &[f64], y: &[f64]) -> Option<f64> {
    let denom = l2_norm_sq(fy);
    if denom == 0.0 {
        return None;
    }
    let num: f64 = fy
        .iter()
        .zip(x.iter().zip(y))
        .map(|(f, (xi, yi))| f * (xi - yi))
        .sum();
    Some(num / denom)
}

/// The same stepsize specialised to a mini-extragradient displacement
/// `x − y = (ρ/l_i) F_i(x) e_i`, which needs no vector products:
/// `ρ F_i(y) F_i(x) / (l_i ‖F(y)‖²)`.
///
/// Returns `None` if the result is negative, which cannot happen when `l_i`
/// is a valid componentwise Lipschitz constant. A zero result (from
/// `F_i(x) = 0` or `F_i(y) = 0`) is returned as is; the update then reduces
/// to `x_{k+1} = P(x_k)`.
pub fn beta_component(fy_norm_sq: f64, fi_y: f64, fi_x: f64, l_i: f64, rho: f64) -> Option<f64> {
    debug_assert!(fy_norm_sq > 0.0 && l_i > 0.0);
    let beta = rho * fi_y * fi_x / (l_i * fy_norm_sq);
    if beta < 0.0 {
        None
    } else {
        Some(beta)
    }
}

/// `argmax_i |F_i(x)|`, ties to the smallest index.
pub fn greedy_index(fx: &[f64]) -> Result<usize, ContractError> {
    let mut best = 0;
    let mut best_abs = 0.0;
    for (i, v) in fx.iter().enumerate() {
        if v.abs() > best_abs {
            best = i;
            best_abs = v.abs();
        }
    }
    if best_abs == 0.0 {
        if fx.is_empty() {
            return Err(ContractError::Empty);
        }
        return Err(ContractError::AllZero);
    }
    Ok(best)
}

/// Reference coordinate tracked by Watchdog-Max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WatchdogState {
    /// `i_{k-1}`.
    pub reference_index: usize,
    /// `|F_{i_{k-1}}(x_k)|` as last evaluated.
    pub reference_value: f64,
}

/// One entry of a run trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub k: u64,
    pub selected_index: Option<usize>,
    /// `‖F(y_k)‖`.
    pub residual_y: f64,
    pub beta: f64,
    pub nf_so_far: f64,
    /// Rank of `|F_{i_k}(x_k)|` among all `|F_j(x_k)|` (1 = largest).
    /// Only filled when diagnostics are enabled.
    pub selected_rank: Option<usize>,
    /// Watchdog-Max switched its reference coordinate in this iteration.
    pub window_reset: bool,
}

/// The pair compared by the last Watchdog-Max selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WatchdogSelection {
    pub reference_index: usize,
    pub reference_value: f64,
    pub challenger_index: usize,
    pub challenger_value: f64,
    pub selected_index: usize,
    pub selected_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    /// `x_{k+1}` has been computed.
    Advanced(IterationRecord),
    /// `F(y_k) = 0` exactly; `y_k` is a root.
    RootAtY(IterationRecord),
    /// A full evaluation showed `F(x_k) = 0` before any step was taken.
    RootAtX,
}

/// Iteration state shared by all four methods.
///
/// The embedded session always sits at `x_k` between steps.
#[derive(Clone)]
pub struct Stepper<'a, M: Mapping> {
    mapping: &'a M,
    projection: &'a Projection,
    lipschitz: &'a [f64],
    rho: f64,
    session: EvaluationSession<'a, M>,
    x: Vec<f64>,
    y: Vec<f64>,
    fx: Vec<f64>,
    fy: Vec<f64>,
    k: u64,
    last_residual: f64,
    watchdog: Option<WatchdogState>,
    last_selection: Option<WatchdogSelection>,
    diagnostics: Option<(CostLedger, Vec<f64>)>,
}

impl<'a, M: Mapping> Stepper<'a, M> {
    /// Starts at `P_Ω(x0)`.
    pub fn new(
        mapping: &'a M,
        projection: &'a Projection,
        rho: f64,
        x0: &[f64],
    ) -> Result<Self, SolverError> {
        mapping.check_contract()?;
        let n = mapping.dim();
        projection.check_dim(n)?;
        if x0.len() != n {
            return Err(ContractError::DimensionMismatch {
                expected: n,
                got: x0.len(),
            }
            .into());
        }
        if let Some(index) = x0.iter().position(|v| !v.is_finite()) {
            return Err(ContractError::NonFinite { index }.into());
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(SolverError::Config(alloc::format!(
                "rho must lie strictly inside (0, 1), got {rho}"
            )));
        }
        let mut x = x0.to_vec();
        projection.project_in_place(&mut x);
        let session = EvaluationSession::new(mapping, &x)?;
        Ok(Stepper {
            mapping,
            projection,
            lipschitz: mapping.componentwise_lipschitz(),
            rho,
            session,
            y: x.clone(),
            x,
            fx: vec![0.0; n],
            fy: vec![0.0; n],
            k: 0,
            last_residual: f64::NAN,
            watchdog: None,
            last_selection: None,
            diagnostics: None,
        })
    }

    /// Records the rank of each selected component. Costs one uncharged full
    /// evaluation per iteration, accounted on a separate ledger.
    pub fn enable_diagnostics(&mut self) {
        let n = self.mapping.dim();
        self.diagnostics = Some((CostLedger::new(n), vec![0.0; n]));
    }

    /// `x_k`.
    pub fn point(&self) -> &[f64] {
        &self.x
    }

    /// `y_{k-1}`, the last prediction point.
    pub fn last_y(&self) -> &[f64] {
        &self.y
    }

    /// `F(y_{k-1})`.
    pub fn last_fy(&self) -> &[f64] {
        &self.fy
    }

    /// `‖F(y_{k-1})‖`, NaN before the first step.
    pub fn last_residual(&self) -> f64 {
        self.last_residual
    }

    pub fn iterations(&self) -> u64 {
        self.k
    }

    pub fn ledger(&self) -> &CostLedger {
        self.session.ledger()
    }

    pub fn diagnostic_ledger(&self) -> Option<&CostLedger> {
        self.diagnostics.as_ref().map(|(l, _)| l)
    }

    pub fn watchdog_state(&self) -> Option<WatchdogState> {
        self.watchdog
    }

    pub fn last_selection(&self) -> Option<WatchdogSelection> {
        self.last_selection
    }

    /// EG: `y = x − (ρ/L) F(x)`, `x⁺ = P(x − β F(y))`. Two full evaluations.
    pub fn eg_step(&mut self) -> Result<StepOutcome, SolverError> {
        let l = self
            .mapping
            .global_lipschitz()
            .ok_or(SolverError::MissingGlobalLipschitz)?;
        let alpha = self.rho / l;
        self.session.eval_full(&mut self.fx);
        if self.fx.iter().all(|v| *v == 0.0) {
            return Ok(StepOutcome::RootAtX);
        }
        for ((y, x), f) in self.y.iter_mut().zip(&self.x).zip(&self.fx) {
            *y = x - alpha * f;
        }
        self.session.set_point(&self.y);
        self.session.eval_full(&mut self.fy);
        let fy_sq = l2_norm_sq(&self.fy);
        self.last_residual = libm::sqrt(fy_sq);
        let Some(beta) = beta_full(&self.fy, &self.x, &self.y) else {
            let rec = self.record(None, 0.0, None, false);
            self.k += 1;
            return Ok(StepOutcome::RootAtY(rec));
        };
        if beta < 0.0 {
            return Err(SolverError::Stepsize(StepsizeFailure {
                iteration: self.k,
                coordinate: None,
                beta,
                lipschitz: l,
            }));
        }
        self.update_x(beta);
        let rec = self.record(None, beta, None, false);
        self.k += 1;
        Ok(StepOutcome::Advanced(rec))
    }

    /// G-Mini-EG: full `F(x)` to find the dominant coordinate, then a
    /// mini-extragradient step along it. Two full evaluations.
    pub fn gmini_step(&mut self) -> Result<StepOutcome, SolverError> {
        self.session.eval_full(&mut self.fx);
        let i = match greedy_index(&self.fx) {
            Ok(i) => i,
            Err(ContractError::AllZero) => return Ok(StepOutcome::RootAtX),
            Err(e) => return Err(e.into()),
        };
        let rank = self.diagnostics.as_ref().map(|_| rank_of(&self.fx, i));
        let fi = self.fx[i];
        self.mini_update(i, fi, rank, false)
    }

    /// R-Mini-EG: sampled coordinate. One component plus one full evaluation.
    pub fn rmini_step(
        &mut self,
        sampler: &mut dyn CoordinateSampler,
    ) -> Result<StepOutcome, SolverError> {
        let i = sampler.draw(&self.x);
        self.mini_step_at(i)
    }

    /// A mini-extragradient step along a caller-chosen coordinate.
    pub fn mini_step_at(&mut self, i: usize) -> Result<StepOutcome, SolverError> {
        let n = self.mapping.dim();
        if i >= n {
            return Err(ContractError::DimensionMismatch {
                expected: n,
                got: i,
            }
            .into());
        }
        let fi = self.session.eval_component(i);
        let rank = self.diagnostic_rank(i);
        self.mini_update(i, fi, rank, false)
    }

    /// Watchdog-Max initialisation: one full evaluation at `x_0` picks the
    /// first reference coordinate. Returns `RootAtX` if `F(x_0) = 0`.
    pub fn watchdog_init(&mut self) -> Result<Option<StepOutcome>, SolverError> {
        self.session.eval_full(&mut self.fx);
        match greedy_index(&self.fx) {
            Ok(i) => {
                self.watchdog = Some(WatchdogState {
                    reference_index: i,
                    reference_value: self.fx[i].abs(),
                });
                Ok(None)
            }
            Err(ContractError::AllZero) => Ok(Some(StepOutcome::RootAtX)),
            Err(e) => Err(e.into()),
        }
    }

    /// Watchdog-Max: compare the reference coordinate with one sampled
    /// challenger (two component evaluations), step along the larger, and
    /// keep it as the new reference. Ties keep the reference.
    pub fn watchdog_step(
        &mut self,
        sampler: &mut dyn CoordinateSampler,
    ) -> Result<StepOutcome, SolverError> {
        let state = self.watchdog.ok_or_else(|| {
            SolverError::Config("watchdog_init must run before watchdog_step".into())
        })?;
        let challenger = sampler.draw(&self.x);
        let reference = state.reference_index;
        let f_ref = self.session.eval_component(reference);
        let f_ch = self.session.eval_component(challenger);
        let (i, fi, reset) = if f_ref.abs() < f_ch.abs() {
            (challenger, f_ch, true)
        } else {
            (reference, f_ref, false)
        };
        self.watchdog = Some(WatchdogState {
            reference_index: i,
            reference_value: fi.abs(),
        });
        self.last_selection = Some(WatchdogSelection {
            reference_index: reference,
            reference_value: f_ref,
            challenger_index: challenger,
            challenger_value: f_ch,
            selected_index: i,
            selected_value: fi,
        });
        let rank = self.diagnostic_rank(i);
        self.mini_update(i, fi, rank, reset)
    }

    fn diagnostic_rank(&mut self, i: usize) -> Option<usize> {
        let (ledger, buf) = self.diagnostics.as_mut()?;
        ledger.charge_full();
        self.mapping.eval_full(&self.x, buf);
        Some(rank_of(buf, i))
    }

    fn mini_update(
        &mut self,
        i: usize,
        fi_x: f64,
        rank: Option<usize>,
        reset: bool,
    ) -> Result<StepOutcome, SolverError> {
        let l_i = self.lipschitz[i];
        let delta = -(self.rho / l_i) * fi_x;
        self.session.shift_coordinate(i, delta);
        self.y.copy_from_slice(self.session.point());
        self.session.eval_full(&mut self.fy);
        let fy_sq = l2_norm_sq(&self.fy);
        self.last_residual = libm::sqrt(fy_sq);
        if fy_sq == 0.0 {
            let rec = self.record(Some(i), 0.0, rank, reset);
            self.k += 1;
            return Ok(StepOutcome::RootAtY(rec));
        }
        let Some(beta) = beta_component(fy_sq, self.fy[i], fi_x, l_i, self.rho) else {
            return Err(SolverError::Stepsize(StepsizeFailure {
                iteration: self.k,
                coordinate: Some(i),
                beta: self.rho * self.fy[i] * fi_x / (l_i * fy_sq),
                lipschitz: l_i,
            }));
        };
        self.update_x(beta);
        let rec = self.record(Some(i), beta, rank, reset);
        self.k += 1;
        Ok(StepOutcome::Advanced(rec))
    }

    fn update_x(&mut self, beta: f64) {
        for (x, f) in self.x.iter_mut().zip(&self.fy) {
            *x -= beta * f;
        }
        self.projection.project_in_place(&mut self.x);
        self.session.set_point(&self.x);
    }

    fn record(
        &self,
        selected_index: Option<usize>,
        beta: f64,
        selected_rank: Option<usize>,
        window_reset: bool,
    ) -> IterationRecord {
        IterationRecord {
            k: self.k,
            selected_index,
            residual_y: self.last_residual,
            beta,
            nf_so_far: self.session.ledger().nf(),
            selected_rank,
            window_reset,
        }
    }
}

// 1 + number of components strictly larger in magnitude.
fn rank_of(f: &[f64], i: usize) -> usize {
    let v = f[i].abs();
    1 + f.iter().filter(|g| g.abs() > v).count()
}

/// Result of a single mini-extragradient step from a given point.
#[derive(Debug, Clone, PartialEq)]
pub struct MiniStep {
    pub fi_x: f64,
    pub y: Vec<f64>,
    pub fy: Vec<f64>,
    /// `None` when `F(y) = 0`.
    pub beta: Option<f64>,
    /// `x⁺ = P(x − β F(y))`, or `y` itself when `F(y) = 0`.
    pub next: Vec<f64>,
}

/// One mini-extragradient step from `x` along coordinate `i`.
pub fn mini_step<M: Mapping>(
    mapping: &M,
    projection: &Projection,
    x: &[f64],
    i: usize,
    rho: f64,
) -> Result<MiniStep, SolverError> {
    let mut st = Stepper::new(mapping, projection, rho, x)?;
    let fi_x = st.session.clone().eval_component(i);
    let outcome = st.mini_step_at(i)?;
    let (beta, next) = match outcome {
        StepOutcome::Advanced(rec) => (Some(rec.beta), st.x.clone()),
        _ => (None, st.y.clone()),
    };
    Ok(MiniStep {
        fi_x,
        y: st.y,
        fy: st.fy,
        beta,
        next,
    })
}

/// `F(y)ᵀ(x − y)`, the quantity that the stepsize analysis bounds from below.
pub fn descent_product(fy: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    dot(fy, &d)
}
