//! Repeated-measurement experiments with closed-form oracles and Monte
//! Carlo ensembles.
//!
//! Four procedures are implemented:
//!
//! - [`amplitude_drag`] — ask a coherent state N successive yes/no questions
//!   with targets |α₀+Δ⟩, |α₀+2Δ⟩, …, |α₀+NΔ⟩. Post-selected on an all-yes
//!   record the state climbs to |α₀+NΔ⟩ with probability e^{-N|Δ|²}, far
//!   above the single-shot overlap e^{-N²|Δ|²}.
//! - [`laskey_protocol`] — the measurement basis sweeps cyclically as
//!   |α₀+γ·sin θ⟩ over a phase window; observing during a quarter cycle
//!   drags the state to |α₀+γ⟩, with success probability approaching one as
//!   the window is split ever finer.
//! - [`zeno_survival`] — a resonantly driven two-level system is projected
//!   back onto its initial state N times during a drive that would otherwise
//!   invert it; survival (cos²(ΩT/2N))^N grows toward one with N.
//! - [`von_neumann_chain`] — entangle a two-outcome system with a pointer
//!   register and verify that the reduced system state is diagonal in the
//!   pointer basis with the Born weights on the diagonal.
//!
//! Every closed-form value reported here is an exact overlap product, never
//! a small-Δ approximation; the quadratic approximations agree to O(NΔ⁴)
//! and tests pin that bound.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dynamics::{evolve_rabi, premeasurement_unitary, RabiHamiltonian};
use crate::error::{Error, Result};
use crate::fock::{
    coherent_state, default_dim, density_of, partial_trace, DensityMatrix, HilbertSpec,
    StateVector,
};
use crate::measure::{
    binary_measure, born_probability, rng_stream, BinaryOutcome, DecisionPolicy,
};
use crate::tol;

/// What a sampled trajectory does when a measurement answers no.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnNo {
    /// Record the failing step and stop; the trajectory counts as a failure.
    RecordAndStop,
    /// Drop the trajectory from ensemble statistics entirely.
    Abort,
}

/// How a protocol run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disposition {
    /// Every step answered yes.
    Completed,
    /// A no (or a forced yes with vanishing probability) ended the run.
    Stopped,
    /// A no ended the run under [`OnNo::Abort`].
    Discarded,
}

/// Amplitude-drag configuration: N questions with targets α₀+kΔ, k = 1..N.
#[derive(Debug, Clone)]
pub struct DragConfig {
    pub alpha0: C64,
    pub delta: C64,
    pub steps: u32,
    /// Fock cutoff; `None` applies the default rule to the largest target.
    pub dim: Option<usize>,
    pub policy: DecisionPolicy,
    pub on_no: OnNo,
}

impl DragConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidConfig("drag needs at least one step".into()));
        }
        require_finite(&[self.alpha0, self.delta], "drag amplitudes")?;
        Ok(())
    }

    /// The drag picture assumes |Δ| small against |α₀|; callers may want to
    /// warn when that fails.
    pub fn delta_dominates_alpha(&self) -> bool {
        self.delta.norm() >= self.alpha0.norm()
    }

    /// Fock cutoff the run will use: the explicit `dim`, or the default
    /// rule applied to the largest amplitude in play.
    pub fn resolved_dim(&self) -> usize {
        self.dim.unwrap_or_else(|| {
            let max = (0..=self.steps)
                .map(|k| (self.alpha0 + C64::from(k as f64) * self.delta).norm())
                .fold(0.0, f64::max);
            default_dim(max)
        })
    }
}

/// Swept-basis configuration: targets α₀ + γ·sin θ on an equally spaced
/// phase grid over `[theta_start, theta_end]`, θ = ωt.
///
/// The grid is meant to start where the sweep passes through the prepared
/// state, i.e. at a phase with sin θ_start = 0 (the default window is
/// [0, π/2]); the first question then asks for a jump of γ·sin θ_1 from α₀.
#[derive(Debug, Clone)]
pub struct LaskeyConfig {
    pub alpha0: C64,
    pub gamma: C64,
    /// Sweep frequency in rad/time; converts recorded phases to times.
    pub omega: f64,
    pub theta_start: f64,
    pub theta_end: f64,
    pub substeps: u32,
    /// When false no measurement occurs and the state is untouched.
    pub observe: bool,
    pub dim: Option<usize>,
    pub policy: DecisionPolicy,
    pub on_no: OnNo,
}

impl LaskeyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.substeps == 0 {
            return Err(Error::InvalidConfig("laskey needs at least one substep".into()));
        }
        if !(self.theta_start.is_finite() && self.theta_end.is_finite())
            || self.theta_start >= self.theta_end
        {
            return Err(Error::InvalidConfig(format!(
                "phase window [{}, {}] must be finite and increasing",
                self.theta_start, self.theta_end
            )));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sweep frequency must be positive and finite, got {}",
                self.omega
            )));
        }
        require_finite(&[self.alpha0, self.gamma], "laskey amplitudes")?;
        Ok(())
    }

    /// Fock cutoff the run will use: the explicit `dim`, or the default
    /// rule applied to the largest amplitude on the sweep grid.
    pub fn resolved_dim(&self) -> usize {
        self.dim.unwrap_or_else(|| {
            let width = self.theta_end - self.theta_start;
            let nominal = self.alpha0 + self.gamma * self.theta_end.sin();
            let max = (1..=self.substeps)
                .map(|k| {
                    let theta = self.theta_start + width * k as f64 / self.substeps as f64;
                    (self.alpha0 + self.gamma * theta.sin()).norm()
                })
                .fold(self.alpha0.norm().max(nominal.norm()), f64::max);
            default_dim(max)
        })
    }
}

/// Decay-freeze configuration: N equally spaced projections onto the
/// initial state during a Rabi drive of total duration T.
#[derive(Debug, Clone)]
pub struct ZenoConfig {
    pub rabi_frequency: f64,
    pub total_time: f64,
    pub measurements: u32,
}

impl ZenoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.measurements == 0 {
            return Err(Error::InvalidConfig("zeno needs at least one measurement".into()));
        }
        if !(self.rabi_frequency.is_finite() && self.total_time.is_finite())
            || self.rabi_frequency * self.total_time <= 0.0
        {
            return Err(Error::InvalidConfig(format!(
                "Ω·T must be positive and finite, got Ω = {}, T = {}",
                self.rabi_frequency, self.total_time
            )));
        }
        Ok(())
    }
}

/// Two-outcome superposition fed into the pointer-entangling chain.
#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub c1: C64,
    pub c2: C64,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        require_finite(&[self.c1, self.c2], "chain coefficients")?;
        let total = self.c1.norm_sqr() + self.c2.norm_sqr();
        if (total - 1.0).abs() > tol::NORM {
            return Err(Error::InvalidConfig(format!(
                "|c1|² + |c2|² = {total}, expected 1"
            )));
        }
        Ok(())
    }
}

/// One measurement step of a protocol run.
#[derive(Debug, Clone)]
pub struct StepRecord {
    /// 1-based step index.
    pub step: u32,
    /// Step index for drag, phase θ_k for the swept basis, time t_k for the
    /// decay freeze.
    pub phase_or_time: f64,
    /// Coherent amplitude of the step's target; zero for the two-level
    /// decay freeze, whose target is the basis state |0⟩.
    pub target_amplitude: C64,
    pub probability_yes: f64,
    /// Product of `probability_yes` over all steps up to and including this
    /// one: the probability of an all-yes record so far.
    pub cumulative: f64,
    pub outcome: BinaryOutcome,
}

/// Full record of one protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolReport {
    pub steps: Vec<StepRecord>,
    /// Product of per-step yes probabilities over the recorded steps.
    pub cumulative: f64,
    /// Exact closed-form probability of an all-yes record.
    pub closed_form: f64,
    /// Drag only: the single-shot overlap |⟨α₀|α₀+NΔ⟩|² that a one-question
    /// strategy would achieve.
    pub single_shot: Option<f64>,
    /// Swept-basis and decay-freeze runs: the closed form at twice the step
    /// count, showing the refinement trend toward probability one.
    pub refined_closed_form: Option<f64>,
    pub final_state: StateVector,
    /// Fidelity of the final state against the nominal all-yes terminal
    /// state.
    pub final_fidelity: f64,
    /// Smallest pre-renormalization norm² among all coherent states built
    /// for the run; 1 when no Fock truncation is involved.
    pub min_truncation_fidelity: f64,
    pub disposition: Disposition,
}

/// Aggregate of independent sampled trajectories.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleStats {
    pub n_traj: u32,
    /// Trajectories whose every step answered yes.
    pub n_success: u32,
    /// Trajectories stopped by a no and counted as failures.
    pub n_failed: u32,
    /// Trajectories dropped under [`OnNo::Abort`].
    pub n_discarded: u32,
    /// `n_success / n_traj`.
    pub success_frequency: f64,
    /// Mean final cumulative probability over non-discarded trajectories.
    pub mean_cumulative: f64,
    pub closed_form: f64,
}

/// A protocol that can be run as a sampled ensemble.
#[derive(Debug, Clone)]
pub enum EnsembleProtocol {
    Drag(DragConfig),
    Laskey(LaskeyConfig),
    Zeno(ZenoConfig),
}

/// Exact all-yes probability of an N-step drag: e^{-N|Δ|²}. The quadratic
/// approximation (1-Δ²)^N agrees to within N·Δ⁴ for real Δ ≤ 0.3.
pub fn drag_success_closed_form(delta: C64, steps: u32) -> Result<f64> {
    if steps == 0 {
        return Err(Error::InvalidConfig("drag needs at least one step".into()));
    }
    Ok((-(steps as f64) * delta.norm_sqr()).exp())
}

/// Exact all-yes probability of sweeping the target through the phase list:
/// exp(-Σ_k |γ|²·(sin θ_k - sin θ_{k-1})²). Converges to one under
/// refinement of a fixed window.
pub fn laskey_success_closed_form(gamma: C64, thetas: &[f64]) -> Result<f64> {
    if thetas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidConfig("phases must be strictly increasing".into()));
    }
    let sum: f64 = thetas
        .windows(2)
        .map(|w| {
            let jump = w[1].sin() - w[0].sin();
            gamma.norm_sqr() * jump * jump
        })
        .sum();
    Ok((-sum).exp())
}

/// Survival probability of N projections during a drive of angle ΩT:
/// (cos²(ΩT/2N))^N.
pub fn zeno_survival_closed_form(rabi_frequency: f64, total_time: f64, measurements: u32) -> f64 {
    let half_angle = rabi_frequency * total_time / (2.0 * measurements as f64);
    half_angle.cos().powi(2).powi(measurements as i32)
}

/// Run the N-question amplitude drag described by `cfg`.
///
/// Post-selected on yes (the `ForceYes` policy) every step has the same
/// probability e^{-|Δ|²}: collapse resets the state to the previous target,
/// so each question asks for the same jump Δ.
pub fn amplitude_drag(cfg: DragConfig) -> Result<ProtocolReport> {
    cfg.validate()?;
    let plan = plan_drag(&cfg)?;
    run_plan(&plan, cfg.policy, cfg.on_no)
}

/// Run the swept-basis protocol described by `cfg`.
pub fn laskey_protocol(cfg: LaskeyConfig) -> Result<ProtocolReport> {
    cfg.validate()?;
    let plan = plan_laskey(&cfg)?;
    run_plan(&plan, cfg.policy, cfg.on_no)
}

/// Run the decay freeze: starting from |0⟩, alternate a Rabi drive over
/// T/N with a projection back onto |0⟩, post-selected on yes.
pub fn zeno_survival(cfg: ZenoConfig) -> Result<ProtocolReport> {
    cfg.validate()?;
    run_zeno(&cfg, DecisionPolicy::ForceYes)
}

/// Entangle (c₁|0⟩ + c₂|1⟩) with a fresh two-state pointer and reduce.
pub fn von_neumann_chain(cfg: &ChainConfig) -> Result<ChainReport> {
    cfg.validate()?;
    let system = StateVector::new(HilbertSpec::single(2), vec![cfg.c1, cfg.c2])?;
    let composite = premeasurement_unitary(&system, 2)?;
    let rho = density_of(&composite);
    let reduced_system = partial_trace(&rho, 0)?;
    let reduced_pointer = partial_trace(&rho, 1)?;
    let pointer_probabilities = [
        reduced_pointer.entry(0, 0).re,
        reduced_pointer.entry(1, 1).re,
    ];
    let reduced_off_diagonal_max = reduced_system.max_off_diagonal();
    Ok(ChainReport {
        expected_weights: [cfg.c1.norm_sqr(), cfg.c2.norm_sqr()],
        composite,
        reduced_system,
        pointer_probabilities,
        reduced_off_diagonal_max,
    })
}

/// Output of [`von_neumann_chain`].
#[derive(Debug, Clone)]
pub struct ChainReport {
    /// Entangled state on the system ⊗ pointer space, spec [2, 2].
    pub composite: StateVector,
    /// System state after tracing out the pointer; diagonal in the pointer
    /// basis.
    pub reduced_system: DensityMatrix,
    /// Born probabilities of the two pointer readings.
    pub pointer_probabilities: [f64; 2],
    /// Largest residual coherence |ρ_01| of the reduced system state.
    pub reduced_off_diagonal_max: f64,
    /// The input weights (|c₁|², |c₂|²) the reductions must reproduce.
    pub expected_weights: [f64; 2],
}

/// Run `n_traj` independent sampled trajectories of a protocol.
///
/// Trajectory `i` draws from the stream `(master_seed, i)`, so the result
/// depends only on the configuration and seed, never on scheduling; the
/// embedded policy of drag and laskey configurations is ignored in favor of
/// those per-trajectory streams. Trajectories run in parallel and are
/// reduced in index order.
pub fn run_ensemble(
    protocol: &EnsembleProtocol,
    n_traj: u32,
    master_seed: u64,
) -> Result<EnsembleStats> {
    if n_traj == 0 {
        return Err(Error::InvalidConfig("ensemble needs at least one trajectory".into()));
    }
    let run_one: Box<dyn Fn(u64) -> Result<(Disposition, f64)> + Sync> = match protocol {
        EnsembleProtocol::Drag(cfg) => {
            cfg.validate()?;
            let plan = plan_drag(cfg)?;
            let on_no = cfg.on_no;
            Box::new(move |traj| {
                let policy = DecisionPolicy::Sample(rng_stream(master_seed, traj));
                run_plan(&plan, policy, on_no).map(|r| (r.disposition, r.cumulative))
            })
        }
        EnsembleProtocol::Laskey(cfg) => {
            cfg.validate()?;
            let plan = plan_laskey(cfg)?;
            let on_no = cfg.on_no;
            Box::new(move |traj| {
                let policy = DecisionPolicy::Sample(rng_stream(master_seed, traj));
                run_plan(&plan, policy, on_no).map(|r| (r.disposition, r.cumulative))
            })
        }
        EnsembleProtocol::Zeno(cfg) => {
            cfg.validate()?;
            let cfg = cfg.clone();
            Box::new(move |traj| {
                let policy = DecisionPolicy::Sample(rng_stream(master_seed, traj));
                run_zeno(&cfg, policy).map(|r| (r.disposition, r.cumulative))
            })
        }
    };

    let outcomes: Vec<Result<(Disposition, f64)>> = (0..n_traj as u64)
        .into_par_iter()
        .map(|traj| run_one(traj))
        .collect();

    let closed_form = match protocol {
        EnsembleProtocol::Drag(cfg) => drag_success_closed_form(cfg.delta, cfg.steps)?,
        EnsembleProtocol::Laskey(cfg) => plan_laskey(cfg)?.closed_form,
        EnsembleProtocol::Zeno(cfg) => {
            zeno_survival_closed_form(cfg.rabi_frequency, cfg.total_time, cfg.measurements)
        }
    };

    let (mut n_success, mut n_failed, mut n_discarded) = (0u32, 0u32, 0u32);
    let mut cumulative_sum = 0.0;
    for outcome in outcomes {
        match outcome? {
            (Disposition::Completed, cumulative) => {
                n_success += 1;
                cumulative_sum += cumulative;
            }
            (Disposition::Stopped, cumulative) => {
                n_failed += 1;
                cumulative_sum += cumulative;
            }
            (Disposition::Discarded, _) => n_discarded += 1,
        }
    }
    let kept = n_success + n_failed;
    Ok(EnsembleStats {
        n_traj,
        n_success,
        n_failed,
        n_discarded,
        success_frequency: n_success as f64 / n_traj as f64,
        mean_cumulative: if kept > 0 {
            cumulative_sum / kept as f64
        } else {
            0.0
        },
        closed_form,
    })
}

/// Precomputed target sequence shared by every trajectory of a run.
struct MeasurePlan {
    initial: StateVector,
    steps: Vec<PlannedStep>,
    closed_form: f64,
    single_shot: Option<f64>,
    refined_closed_form: Option<f64>,
    nominal_final: StateVector,
    min_truncation_fidelity: f64,
}

struct PlannedStep {
    phase_or_time: f64,
    amplitude: C64,
    target: StateVector,
}

fn plan_drag(cfg: &DragConfig) -> Result<MeasurePlan> {
    let amplitudes: Vec<C64> = (1..=cfg.steps)
        .map(|k| cfg.alpha0 + C64::from(k as f64) * cfg.delta)
        .collect();
    let dim = cfg.resolved_dim();

    let mut min_fidelity = f64::INFINITY;
    let mut build = |alpha: C64| -> Result<StateVector> {
        let c = coherent_state(alpha, dim)?;
        min_fidelity = min_fidelity.min(c.truncation_fidelity);
        Ok(c.state)
    };
    let initial = build(cfg.alpha0)?;
    let steps = amplitudes
        .iter()
        .enumerate()
        .map(|(k, &amplitude)| {
            Ok(PlannedStep {
                phase_or_time: (k + 1) as f64,
                amplitude,
                target: build(amplitude)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let nominal_final = steps.last().map(|s| s.target.clone()).unwrap_or_else(|| initial.clone());
    let n = cfg.steps as f64;
    Ok(MeasurePlan {
        initial,
        steps,
        closed_form: drag_success_closed_form(cfg.delta, cfg.steps)?,
        single_shot: Some((-n * n * cfg.delta.norm_sqr()).exp()),
        refined_closed_form: None,
        nominal_final,
        min_truncation_fidelity: min_fidelity,
    })
}

fn plan_laskey(cfg: &LaskeyConfig) -> Result<MeasurePlan> {
    let sweep_amplitudes = |substeps: u32| -> Vec<(f64, C64)> {
        let width = cfg.theta_end - cfg.theta_start;
        (1..=substeps)
            .map(|k| {
                let theta = cfg.theta_start + width * k as f64 / substeps as f64;
                (theta, cfg.alpha0 + cfg.gamma * theta.sin())
            })
            .collect()
    };
    // All-yes probability of the realized jump sequence starting from α₀.
    let closed_form_for = |amplitudes: &[(f64, C64)]| -> f64 {
        let mut previous = cfg.alpha0;
        let mut sum = 0.0;
        for &(_, amplitude) in amplitudes {
            sum += (amplitude - previous).norm_sqr();
            previous = amplitude;
        }
        (-sum).exp()
    };

    let amplitudes = if cfg.observe { sweep_amplitudes(cfg.substeps) } else { Vec::new() };
    let dim = cfg.resolved_dim();

    let mut min_fidelity = f64::INFINITY;
    let mut build = |alpha: C64| -> Result<StateVector> {
        let c = coherent_state(alpha, dim)?;
        min_fidelity = min_fidelity.min(c.truncation_fidelity);
        Ok(c.state)
    };
    let initial = build(cfg.alpha0)?;
    let steps = amplitudes
        .iter()
        .map(|&(theta, amplitude)| {
            Ok(PlannedStep {
                phase_or_time: theta,
                amplitude,
                target: build(amplitude)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (closed_form, refined, nominal_final) = if cfg.observe {
        let refined = closed_form_for(&sweep_amplitudes(cfg.substeps * 2));
        let nominal = build(cfg.alpha0 + cfg.gamma * cfg.theta_end.sin())?;
        (closed_form_for(&amplitudes), Some(refined), nominal)
    } else {
        // No observation, no change: the nominal end state is the start.
        (1.0, None, initial.clone())
    };

    Ok(MeasurePlan {
        initial,
        steps,
        closed_form,
        single_shot: None,
        refined_closed_form: refined,
        nominal_final,
        min_truncation_fidelity: min_fidelity,
    })
}

/// Drive a planned target sequence under `policy`.
fn run_plan(plan: &MeasurePlan, mut policy: DecisionPolicy, on_no: OnNo) -> Result<ProtocolReport> {
    let mut state = plan.initial.clone();
    let mut cumulative = 1.0;
    let mut steps = Vec::with_capacity(plan.steps.len());
    let mut disposition = Disposition::Completed;

    for (index, planned) in plan.steps.iter().enumerate() {
        let step = (index + 1) as u32;
        if matches!(policy, DecisionPolicy::ForceYes) {
            // A forced yes on a vanishing branch has no post-state; record
            // the step as failed and stop instead of erroring out.
            let p = born_probability(&state, &planned.target)?;
            if p < tol::DEGENERATE_BRANCH {
                cumulative *= p;
                steps.push(StepRecord {
                    step,
                    phase_or_time: planned.phase_or_time,
                    target_amplitude: planned.amplitude,
                    probability_yes: p,
                    cumulative,
                    outcome: BinaryOutcome::No,
                });
                disposition = Disposition::Stopped;
                break;
            }
        }
        let result = binary_measure(&state, &planned.target, &mut policy)?;
        cumulative *= result.probability_yes;
        steps.push(StepRecord {
            step,
            phase_or_time: planned.phase_or_time,
            target_amplitude: planned.amplitude,
            probability_yes: result.probability_yes,
            cumulative,
            outcome: result.outcome,
        });
        match result.outcome {
            BinaryOutcome::Yes => state = result.post_state,
            BinaryOutcome::No => {
                disposition = match on_no {
                    OnNo::RecordAndStop => Disposition::Stopped,
                    OnNo::Abort => Disposition::Discarded,
                };
                break;
            }
        }
    }

    // An untouched state is its own nominal end state, fidelity exactly 1;
    // computing the dot product would only add rounding.
    let final_fidelity = if plan.steps.is_empty() {
        1.0
    } else {
        born_probability(&state, &plan.nominal_final)?
    };

    Ok(ProtocolReport {
        steps,
        cumulative,
        closed_form: plan.closed_form,
        single_shot: plan.single_shot,
        refined_closed_form: plan.refined_closed_form,
        final_state: state,
        final_fidelity,
        min_truncation_fidelity: plan.min_truncation_fidelity,
        disposition,
    })
}

pub(crate) fn run_zeno(cfg: &ZenoConfig, mut policy: DecisionPolicy) -> Result<ProtocolReport> {
    let spec = HilbertSpec::single(2);
    let survival_target = StateVector::basis(spec.clone(), 0);
    let drive = RabiHamiltonian::new(cfg.rabi_frequency)?;
    let dt = cfg.total_time / cfg.measurements as f64;

    let mut state = survival_target.clone();
    let mut cumulative = 1.0;
    let mut steps = Vec::with_capacity(cfg.measurements as usize);
    let mut disposition = Disposition::Completed;

    for k in 1..=cfg.measurements {
        state = evolve_rabi(&state, &drive, dt)?;
        let p = born_probability(&state, &survival_target)?;
        if matches!(policy, DecisionPolicy::ForceYes) && p < tol::DEGENERATE_BRANCH {
            cumulative *= p;
            steps.push(StepRecord {
                step: k,
                phase_or_time: k as f64 * dt,
                target_amplitude: C64::ZERO,
                probability_yes: p,
                cumulative,
                outcome: BinaryOutcome::No,
            });
            disposition = Disposition::Stopped;
            break;
        }
        let result = binary_measure(&state, &survival_target, &mut policy)?;
        cumulative *= result.probability_yes;
        steps.push(StepRecord {
            step: k,
            phase_or_time: k as f64 * dt,
            target_amplitude: C64::ZERO,
            probability_yes: result.probability_yes,
            cumulative,
            outcome: result.outcome,
        });
        match result.outcome {
            BinaryOutcome::Yes => state = result.post_state,
            BinaryOutcome::No => {
                disposition = Disposition::Stopped;
                break;
            }
        }
    }

    let final_fidelity = born_probability(&state, &survival_target)?;
    Ok(ProtocolReport {
        steps,
        cumulative,
        closed_form: zeno_survival_closed_form(cfg.rabi_frequency, cfg.total_time, cfg.measurements),
        single_shot: None,
        refined_closed_form: Some(zeno_survival_closed_form(
            cfg.rabi_frequency,
            cfg.total_time,
            cfg.measurements * 2,
        )),
        final_state: state,
        final_fidelity,
        min_truncation_fidelity: 1.0,
        disposition,
    })
}

fn require_finite(values: &[C64], what: &str) -> Result<()> {
    if values
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::InvalidConfig(format!("{what} must be finite")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn drag_cfg(alpha0: f64, delta: f64, steps: u32) -> DragConfig {
        DragConfig {
            alpha0: c(alpha0, 0.0),
            delta: c(delta, 0.0),
            steps,
            dim: None,
            policy: DecisionPolicy::ForceYes,
            on_no: OnNo::RecordAndStop,
        }
    }

    fn laskey_cfg(gamma: f64, substeps: u32) -> LaskeyConfig {
        LaskeyConfig {
            alpha0: c(10.0, 0.0),
            gamma: c(gamma, 0.0),
            omega: 1.0,
            theta_start: 0.0,
            theta_end: FRAC_PI_2,
            substeps,
            observe: true,
            dim: None,
            policy: DecisionPolicy::ForceYes,
            on_no: OnNo::RecordAndStop,
        }
    }

    fn assert_report_invariants(report: &ProtocolReport) {
        let mut product = 1.0;
        let mut previous = f64::INFINITY;
        for step in &report.steps {
            product *= step.probability_yes;
            assert!(
                (step.cumulative - product).abs() <= 1e-12 * product.max(1e-300),
                "cumulative {} vs product {}",
                step.cumulative,
                product
            );
            assert!(step.cumulative <= previous + 1e-15);
            previous = step.cumulative;
        }
        if let Some(last) = report.steps.last() {
            assert_eq!(report.cumulative, last.cumulative);
        }
    }

    #[test]
    fn drag_single_step_reduces_to_plain_overlap() {
        let report = amplitude_drag(drag_cfg(10.0, 0.1, 1)).unwrap();
        assert!((report.cumulative - 0.9900498337491681).abs() < 1e-8);
        assert!((report.closed_form - 0.9900498337491681).abs() < 1e-15);
        assert_report_invariants(&report);
    }

    #[test]
    fn drag_ten_steps_matches_frozen_closed_forms() {
        let report = amplitude_drag(drag_cfg(10.0, 0.1, 10)).unwrap();
        assert_eq!(report.disposition, Disposition::Completed);
        assert!((report.cumulative - 0.9048374180359596).abs() < 1e-8);
        assert!((report.closed_form - 0.9048374180359596).abs() < 1e-15);
        assert!((report.single_shot.unwrap() - 0.36787944117144233).abs() < 1e-15);
        assert!(report.final_fidelity >= 1.0 - 1e-10);
        assert!(report.min_truncation_fidelity >= 1.0 - 1e-6);
        assert_report_invariants(&report);
    }

    #[test]
    fn drag_with_zero_delta_changes_nothing() {
        let report = amplitude_drag(drag_cfg(3.0, 0.0, 5)).unwrap();
        assert!((report.cumulative - 1.0).abs() < 1e-12);
        assert!(report.final_fidelity >= 1.0 - 1e-12);
        assert_report_invariants(&report);
    }

    #[test]
    fn drag_rejects_zero_steps() {
        assert!(amplitude_drag(drag_cfg(10.0, 0.1, 0)).is_err());
        assert!(drag_success_closed_form(c(0.1, 0.0), 0).is_err());
        assert_eq!(drag_success_closed_form(C64::ZERO, 1).unwrap(), 1.0);
    }

    #[test]
    fn drag_closed_form_tracks_quadratic_approximation() {
        assert!((drag_success_closed_form(c(0.1, 0.0), 10).unwrap() - 0.9048374180359596).abs() < 1e-15);
        // |e^{-NΔ²} - (1-Δ²)^N| ≤ N·Δ⁴ over the swept grid.
        for n in 1..=100u32 {
            for i in 1..=30 {
                let delta = i as f64 / 100.0;
                let exact = drag_success_closed_form(c(delta, 0.0), n).unwrap();
                let approx = (1.0 - delta * delta).powi(n as i32);
                assert!(
                    (exact - approx).abs() <= n as f64 * delta.powi(4),
                    "bound broken at Δ={delta}, N={n}"
                );
            }
        }
    }

    #[test]
    fn invariant_drag_steps_share_one_probability_under_forced_yes() {
        let report = amplitude_drag(drag_cfg(5.0, 0.07, 20)).unwrap();
        let expect = (-c(0.07, 0.0).norm_sqr()).exp();
        for step in &report.steps {
            assert!(
                (step.probability_yes - expect).abs() < 1e-8,
                "step {} probability {}",
                step.step,
                step.probability_yes
            );
        }
    }

    #[test]
    fn invariant_sequential_beats_single_shot() {
        for steps in 2..=12u32 {
            let sequential = drag_success_closed_form(c(0.1, 0.0), steps).unwrap();
            let n = steps as f64;
            let single = (-n * n * 0.01).exp();
            assert!(sequential > single);
        }
        let report = amplitude_drag(drag_cfg(10.0, 0.1, 10)).unwrap();
        assert!(report.cumulative > report.single_shot.unwrap());
    }

    #[test]
    fn laskey_zero_gamma_changes_nothing() {
        let report = laskey_protocol(laskey_cfg(0.0, 8)).unwrap();
        assert!((report.cumulative - 1.0).abs() < 1e-12);
        assert!(report.final_fidelity >= 1.0 - 1e-12);
        assert_report_invariants(&report);
    }

    #[test]
    fn laskey_single_substep_is_one_full_jump() {
        let report = laskey_protocol(laskey_cfg(1.0, 1)).unwrap();
        assert_eq!(report.steps.len(), 1);
        assert!((report.cumulative - 0.36787944117144233).abs() < 1e-8);
        assert!((report.closed_form - 0.36787944117144233).abs() < 1e-15);
        assert_report_invariants(&report);
    }

    #[test]
    fn laskey_fine_sweep_matches_overlap_product_oracle() {
        let report = laskey_protocol(laskey_cfg(1.0, 1000)).unwrap();
        // Brute-force oracle: product of the squared pairwise coherent
        // overlaps along the target sequence, from the closed form.
        let mut product = 1.0;
        let mut previous = c(10.0, 0.0);
        for k in 1..=1000u32 {
            let theta = FRAC_PI_2 * k as f64 / 1000.0;
            let amplitude = c(10.0 + theta.sin(), 0.0);
            product *= crate::fock::coherent_overlap_closed_form(previous, amplitude).norm_sqr();
            previous = amplitude;
        }
        assert!((report.cumulative - product).abs() < 1e-10);
        assert!((report.cumulative - 0.9987670603988885).abs() < 1e-8);
        assert!(report.final_fidelity >= 1.0 - 1e-10);
        assert_report_invariants(&report);
    }

    #[test]
    fn laskey_without_observation_is_exactly_idle() {
        let mut cfg = laskey_cfg(1.0, 100);
        cfg.observe = false;
        let report = laskey_protocol(cfg).unwrap();
        assert!(report.steps.is_empty());
        assert_eq!(report.cumulative, 1.0);
        assert_eq!(report.final_fidelity, 1.0);
        assert_eq!(report.closed_form, 1.0);
    }

    #[test]
    fn invariant_laskey_refinement_is_monotone() {
        let mut previous = 0.0;
        for doublings in 0..=7 {
            let substeps = 1u32 << doublings;
            let report = laskey_protocol(laskey_cfg(1.0, substeps)).unwrap();
            assert!(
                report.cumulative >= previous - 1e-12,
                "success fell from {previous} at M={substeps}"
            );
            previous = report.cumulative;
        }
    }

    #[test]
    fn laskey_closed_form_basics() {
        let single = laskey_success_closed_form(c(1.3, 0.2), &[0.0, FRAC_PI_2]).unwrap();
        assert!((single - (-c(1.3, 0.2).norm_sqr()).exp()).abs() < 1e-15);
        assert_eq!(laskey_success_closed_form(C64::ZERO, &[0.0, 0.3, 1.0]).unwrap(), 1.0);
        assert!(laskey_success_closed_form(C64::ONE, &[0.0, 0.0]).is_err());

        // Refinement can only help: value at 2M steps ≥ value at M steps.
        for exponent in 0..=6 {
            let grid = |m: u32| -> Vec<f64> {
                (0..=m).map(|k| FRAC_PI_2 * k as f64 / m as f64).collect()
            };
            let m = 1u32 << exponent;
            let coarse = laskey_success_closed_form(C64::ONE, &grid(m)).unwrap();
            let fine = laskey_success_closed_form(C64::ONE, &grid(2 * m)).unwrap();
            assert!(fine >= coarse - 1e-15);
        }
    }

    #[test]
    fn zeno_pinned_survivals() {
        let run = |n: u32| {
            zeno_survival(ZenoConfig {
                rabi_frequency: 1.0,
                total_time: std::f64::consts::PI,
                measurements: n,
            })
            .unwrap()
        };
        // One measurement after a full flip: survival vanishes.
        let single = run(1);
        assert!(single.cumulative <= 1e-30);
        assert_eq!(single.disposition, Disposition::Stopped);

        let double = run(2);
        assert!((double.cumulative - 0.25).abs() < 1e-12);
        assert_eq!(double.disposition, Disposition::Completed);

        let hundred = run(100);
        assert!((hundred.cumulative - 0.9756269141439002).abs() < 1e-10);
        assert!(hundred.final_fidelity >= 1.0 - 1e-12);
        assert_report_invariants(&hundred);

        // Closed form against the simulated product.
        for n in [2u32, 5, 10, 100] {
            let report = run(n);
            assert!(
                (report.cumulative - report.closed_form).abs() < 1e-10,
                "N={n}: simulated {} vs closed {}",
                report.cumulative,
                report.closed_form
            );
        }
    }

    #[test]
    fn invariant_zeno_survival_grows_with_measurement_rate() {
        let mut previous = -1.0;
        for k in 0..=7u32 {
            let survival = zeno_survival_closed_form(1.0, std::f64::consts::PI, 1 << k);
            assert!(survival > previous, "survival not increasing at N = 2^{k}");
            previous = survival;
        }
        assert!(zeno_survival(ZenoConfig {
            rabi_frequency: 0.0,
            total_time: 1.0,
            measurements: 1,
        })
        .is_err());
    }

    #[test]
    fn chain_pure_input_stays_pure() {
        let report = von_neumann_chain(&ChainConfig { c1: C64::ONE, c2: C64::ZERO }).unwrap();
        assert!((report.reduced_system.entry(0, 0).re - 1.0).abs() < 1e-14);
        assert!(report.reduced_off_diagonal_max < 1e-14);
        assert!((report.pointer_probabilities[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn chain_balanced_superposition_decoheres_fully() {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let report = von_neumann_chain(&ChainConfig { c1: c(inv, 0.0), c2: c(inv, 0.0) }).unwrap();
        // Orthogonal pointer states force the coherences to exact zero.
        assert_eq!(report.reduced_off_diagonal_max, 0.0);
        assert!((report.reduced_system.entry(0, 0).re - 0.5).abs() < 1e-14);
        assert!((report.reduced_system.entry(1, 1).re - 0.5).abs() < 1e-14);
        assert_eq!(report.composite.amps()[0], c(inv, 0.0));
        assert_eq!(report.composite.amps()[3], c(inv, 0.0));
        report.reduced_system.validate().unwrap();
    }

    #[test]
    fn chain_pointer_readings_follow_born_weights() {
        let report = von_neumann_chain(&ChainConfig {
            c1: c(0.3f64.sqrt(), 0.0),
            c2: c(0.7f64.sqrt(), 0.0),
        })
        .unwrap();
        assert!((report.pointer_probabilities[0] - 0.3).abs() < 1e-12);
        assert!((report.pointer_probabilities[1] - 0.7).abs() < 1e-12);
        assert!(von_neumann_chain(&ChainConfig { c1: C64::ONE, c2: C64::ONE }).is_err());
    }

    #[test]
    fn ensemble_with_certain_steps_always_succeeds() {
        let cfg = drag_cfg(2.0, 0.0, 3);
        let stats = run_ensemble(&EnsembleProtocol::Drag(cfg), 1, 9).unwrap();
        assert_eq!(stats.n_success, 1);
        assert_eq!(stats.success_frequency, 1.0);
    }

    #[test]
    fn ensemble_is_deterministic_for_fixed_seed() {
        let cfg = drag_cfg(2.0, 0.3, 6);
        let a = run_ensemble(&EnsembleProtocol::Drag(cfg.clone()), 500, 1234).unwrap();
        let b = run_ensemble(&EnsembleProtocol::Drag(cfg), 500, 1234).unwrap();
        assert_eq!(a.n_success, b.n_success);
        assert_eq!(a.success_frequency, b.success_frequency);
        assert_eq!(a.mean_cumulative, b.mean_cumulative);
    }

    #[test]
    fn ensemble_frequency_tracks_closed_form() {
        let cfg = drag_cfg(2.0, 0.2, 5);
        let n = 4000u32;
        let stats = run_ensemble(&EnsembleProtocol::Drag(cfg), n, 99).unwrap();
        let p = stats.closed_form;
        let band = 3.0 * (p * (1.0 - p) / n as f64).sqrt();
        assert!(
            (stats.success_frequency - p).abs() < band,
            "frequency {} vs p {p}, band {band}",
            stats.success_frequency
        );
    }

    #[test]
    fn ensemble_abort_discards_failed_trajectories() {
        let mut cfg = drag_cfg(2.0, 0.4, 4);
        cfg.on_no = OnNo::Abort;
        let stats = run_ensemble(&EnsembleProtocol::Drag(cfg), 2000, 7).unwrap();
        assert_eq!(stats.n_failed, 0);
        assert_eq!(stats.n_success + stats.n_discarded, 2000);
        assert!(stats.n_discarded > 0);
        // Every kept trajectory ran the full plan, so the mean cumulative is
        // the all-yes probability.
        assert!((stats.mean_cumulative - stats.closed_form).abs() < 1e-8);
    }

    #[test]
    fn ensemble_zeno_matches_binomial_band() {
        let cfg = ZenoConfig {
            rabi_frequency: 1.0,
            total_time: std::f64::consts::PI,
            measurements: 4,
        };
        let n = 4000u32;
        let stats = run_ensemble(&EnsembleProtocol::Zeno(cfg), n, 31).unwrap();
        let p = stats.closed_form;
        let band = 3.0 * (p * (1.0 - p) / n as f64).sqrt();
        assert!((stats.success_frequency - p).abs() < band);
    }

    #[test]
    fn ensemble_rejects_zero_trajectories() {
        let cfg = drag_cfg(2.0, 0.1, 2);
        assert!(run_ensemble(&EnsembleProtocol::Drag(cfg), 0, 1).is_err());
    }
}
