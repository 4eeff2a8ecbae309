//! C ABI for the zenolab simulator.
//!
//! Conventions:
//!
//! - Every fallible function returns a [`ZenolabStatus`]; `ZENOLAB_STATUS_OK`
//!   is zero. On failure a thread-local message is set, readable through
//!   [`zenolab_last_error_message`].
//! - States and protocol reports are opaque handles created and destroyed by
//!   this library (`zenolab_*_free`). Passing a handle after freeing it, or a
//!   handle created by a different allocator, is undefined behavior; null
//!   handles are caught and reported.
//! - Complex scalars travel as `(re, im)` pairs of doubles.
//! - A `dim` parameter of 0 asks for the default Fock cutoff rule
//!   `ceil(|α|² + 8|α| + 20)` applied to the largest amplitude in play.
//!
//! The matching header is generated into `include/zenolab.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, UnwindSafe};

use zenolab::fock::{coherent_overlap_closed_form, coherent_state, default_dim, StateVector};
use zenolab::measure::{born_probability, DecisionPolicy};
use zenolab::protocol::{
    amplitude_drag, drag_success_closed_form, laskey_protocol, laskey_success_closed_form,
    run_ensemble, von_neumann_chain, zeno_survival, zeno_survival_closed_form, ChainConfig,
    Disposition, DragConfig, EnsembleProtocol, LaskeyConfig, OnNo, ProtocolReport, ZenoConfig,
};
use zenolab::Complex64 as C64;

/// Status code of every fallible call; zero means success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZenolabStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Two states or operators live on different spaces.
    DimensionMismatch = 2,
    /// The Fock cutoff is too small for the requested amplitude.
    Truncation = 3,
    /// Attempted to normalize a vector of vanishing norm.
    ZeroNorm = 4,
    /// A partial trace addressed a missing tensor factor.
    InvalidFactor = 5,
    /// The pointer register cannot label every system state.
    ApparatusTooSmall = 6,
    /// The selected measurement branch has vanishing probability.
    DegenerateBranch = 7,
    /// A configuration violates one of its invariants.
    InvalidConfig = 8,
    /// An index was out of range.
    OutOfRange = 9,
    /// An internal panic was caught at the boundary.
    Panic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL bytes were stripped");
    });
}

fn status_of(err: &zenolab::Error) -> ZenolabStatus {
    match err {
        zenolab::Error::DimensionMismatch { .. } => ZenolabStatus::DimensionMismatch,
        zenolab::Error::Truncation { .. } => ZenolabStatus::Truncation,
        zenolab::Error::ZeroNorm { .. } => ZenolabStatus::ZeroNorm,
        zenolab::Error::InvalidFactor { .. } => ZenolabStatus::InvalidFactor,
        zenolab::Error::ApparatusTooSmall { .. } => ZenolabStatus::ApparatusTooSmall,
        zenolab::Error::DegenerateBranch { .. } => ZenolabStatus::DegenerateBranch,
        zenolab::Error::InvalidConfig(_) => ZenolabStatus::InvalidConfig,
    }
}

fn fail(err: zenolab::Error) -> ZenolabStatus {
    set_error(&err.to_string());
    status_of(&err)
}

fn guard(body: impl FnOnce() -> ZenolabStatus + UnwindSafe) -> ZenolabStatus {
    catch_unwind(body).unwrap_or_else(|_| {
        set_error("internal panic at the FFI boundary");
        ZenolabStatus::Panic
    })
}

fn null_argument() -> ZenolabStatus {
    set_error("required pointer argument was null");
    ZenolabStatus::NullArgument
}

/// Opaque state-vector handle.
pub struct ZenolabState {
    inner: StateVector,
}

/// Opaque protocol-report handle.
pub struct ZenolabReport {
    inner: ProtocolReport,
}

/// One per-step record of a protocol report.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ZenolabStep {
    pub step: u32,
    pub phase_or_time: f64,
    pub target_re: f64,
    pub target_im: f64,
    pub probability_yes: f64,
    pub cumulative_prob: f64,
    pub outcome_yes: bool,
}

/// How a protocol run ended.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZenolabDisposition {
    Completed = 0,
    Stopped = 1,
    Discarded = 2,
}

/// Scalar summary of a protocol report. Optional fields carry a paired
/// `has_*` flag.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ZenolabReportSummary {
    pub cumulative: f64,
    pub closed_form: f64,
    pub has_single_shot: bool,
    pub single_shot: f64,
    pub has_refined_closed_form: bool,
    pub refined_closed_form: f64,
    pub final_fidelity: f64,
    pub min_truncation_fidelity: f64,
    pub disposition: ZenolabDisposition,
}

/// Aggregate of a sampled Monte Carlo ensemble.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ZenolabEnsembleStats {
    pub n_traj: u32,
    pub n_success: u32,
    pub n_failed: u32,
    pub n_discarded: u32,
    pub success_frequency: f64,
    pub mean_cumulative: f64,
    pub closed_form: f64,
}

/// Result of the system-pointer entangling chain.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ZenolabChainSummary {
    pub pointer_prob_0: f64,
    pub pointer_prob_1: f64,
    pub reduced_diag_0: f64,
    pub reduced_diag_1: f64,
    pub reduced_off_diagonal_max: f64,
}

/// Copy the last error message (NUL-terminated) into `buffer` and return the
/// full length in bytes including the NUL; the message is truncated when
/// `capacity` is too small. A zero-capacity call just queries the length.
#[no_mangle]
pub extern "C" fn zenolab_last_error_message(buffer: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes_with_nul();
        if !buffer.is_null() && capacity > 0 {
            let copy_len = bytes.len().min(capacity);
            // The caller promises `capacity` writable bytes.
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buffer, copy_len);
                *buffer.add(copy_len - 1) = 0;
            }
        }
        bytes.len()
    })
}

/// Static version string of the underlying library.
#[no_mangle]
pub extern "C" fn zenolab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default Fock cutoff for amplitudes up to `alpha_max` in magnitude.
#[no_mangle]
pub extern "C" fn zenolab_default_dim(alpha_max: f64) -> usize {
    default_dim(alpha_max)
}

/// Build the truncated coherent state |α⟩; writes the new handle and the
/// pre-renormalization norm² kept by the cutoff.
#[no_mangle]
pub extern "C" fn zenolab_coherent_state(
    alpha_re: f64,
    alpha_im: f64,
    dim: usize,
    out_state: *mut *mut ZenolabState,
    out_truncation_fidelity: *mut f64,
) -> ZenolabStatus {
    guard(|| {
        if out_state.is_null() {
            return null_argument();
        }
        let alpha = C64::new(alpha_re, alpha_im);
        let dim = if dim == 0 { default_dim(alpha.norm()) } else { dim };
        match coherent_state(alpha, dim) {
            Ok(built) => {
                if !out_truncation_fidelity.is_null() {
                    unsafe { *out_truncation_fidelity = built.truncation_fidelity };
                }
                let handle = Box::into_raw(Box::new(ZenolabState { inner: built.state }));
                unsafe { *out_state = handle };
                ZenolabStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Release a state handle; null is a no-op.
#[no_mangle]
pub extern "C" fn zenolab_state_free(state: *mut ZenolabState) {
    if !state.is_null() {
        drop(unsafe { Box::from_raw(state) });
    }
}

/// Total dimension of a state.
#[no_mangle]
pub extern "C" fn zenolab_state_dim(
    state: *const ZenolabState,
    out_dim: *mut usize,
) -> ZenolabStatus {
    guard(|| {
        let Some(state) = (unsafe { state.as_ref() }) else {
            return null_argument();
        };
        if out_dim.is_null() {
            return null_argument();
        }
        unsafe { *out_dim = state.inner.dim() };
        ZenolabStatus::Ok
    })
}

/// Read one amplitude of a state.
#[no_mangle]
pub extern "C" fn zenolab_state_amplitude(
    state: *const ZenolabState,
    index: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> ZenolabStatus {
    guard(|| {
        let Some(state) = (unsafe { state.as_ref() }) else {
            return null_argument();
        };
        if out_re.is_null() || out_im.is_null() {
            return null_argument();
        }
        let Some(amp) = state.inner.amps().get(index) else {
            set_error("amplitude index out of range");
            return ZenolabStatus::OutOfRange;
        };
        unsafe {
            *out_re = amp.re;
            *out_im = amp.im;
        }
        ZenolabStatus::Ok
    })
}

/// Inner product ⟨a|b⟩ with the first argument conjugated.
#[no_mangle]
pub extern "C" fn zenolab_inner_product(
    a: *const ZenolabState,
    b: *const ZenolabState,
    out_re: *mut f64,
    out_im: *mut f64,
) -> ZenolabStatus {
    guard(|| {
        let (Some(a), Some(b)) = (unsafe { a.as_ref() }, unsafe { b.as_ref() }) else {
            return null_argument();
        };
        if out_re.is_null() || out_im.is_null() {
            return null_argument();
        }
        match zenolab::fock::inner_product(&a.inner, &b.inner) {
            Ok(ip) => {
                unsafe {
                    *out_re = ip.re;
                    *out_im = ip.im;
                }
                ZenolabStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Born probability |⟨target|s⟩|².
#[no_mangle]
pub extern "C" fn zenolab_born_probability(
    s: *const ZenolabState,
    target: *const ZenolabState,
    out_probability: *mut f64,
) -> ZenolabStatus {
    guard(|| {
        let (Some(s), Some(target)) = (unsafe { s.as_ref() }, unsafe { target.as_ref() }) else {
            return null_argument();
        };
        if out_probability.is_null() {
            return null_argument();
        }
        match born_probability(&s.inner, &target.inner) {
            Ok(p) => {
                unsafe { *out_probability = p };
                ZenolabStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Closed-form coherent overlap ⟨α|β⟩ = exp(-|α|²/2 - |β|²/2 + ᾱβ).
#[no_mangle]
pub extern "C" fn zenolab_coherent_overlap(
    alpha_re: f64,
    alpha_im: f64,
    beta_re: f64,
    beta_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> ZenolabStatus {
    guard(|| {
        if out_re.is_null() || out_im.is_null() {
            return null_argument();
        }
        let overlap =
            coherent_overlap_closed_form(C64::new(alpha_re, alpha_im), C64::new(beta_re, beta_im));
        unsafe {
            *out_re = overlap.re;
            *out_im = overlap.im;
        }
        ZenolabStatus::Ok
    })
}

/// Exact all-yes probability e^{-N|Δ|²} of an N-step drag.
#[no_mangle]
pub extern "C" fn zenolab_drag_closed_form(
    delta_re: f64,
    delta_im: f64,
    steps: u32,
    out_probability: *mut f64,
) -> ZenolabStatus {
    guard(|| {
        if out_probability.is_null() {
            return null_argument();
        }
        match drag_success_closed_form(C64::new(delta_re, delta_im), steps) {
            Ok(p) => {
                unsafe { *out_probability = p };
                ZenolabStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Exact all-yes probability of sweeping through `thetas` (strictly
/// increasing, `len` entries).
#[no_mangle]
pub extern "C" fn zenolab_laskey_closed_form(
    gamma_re: f64,
    gamma_im: f64,
    thetas: *const f64,
    len: usize,
    out_probability: *mut f64,
) -> ZenolabStatus {
    guard(|| {
        if out_probability.is_null() || (thetas.is_null() && len > 0) {
            return null_argument();
        }
        let thetas = if len == 0 {
            &[][..]
        } else {
            unsafe { std::slice::from_raw_parts(thetas, len) }
        };
        match laskey_success_closed_form(C64::new(gamma_re, gamma_im), thetas) {
            Ok(p) => {
                unsafe { *out_probability = p };
                ZenolabStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Survival probability (cos²(ΩT/2N))^N of N projections during a drive.
#[no_mangle]
pub extern "C" fn zenolab_zeno_closed_form(
    rabi_frequency: f64,
    total_time: f64,
    measurements: u32,
    out_probability: *mut f64,
) -> ZenolabStatus {
    guard(|| {
        if out_probability.is_null() {
            return null_argument();
        }
        if measurements == 0 {
            set_error("zeno needs at least one measurement");
            return ZenolabStatus::InvalidConfig;
        }
        unsafe {
            *out_probability = zeno_survival_closed_form(rabi_frequency, total_time, measurements)
        };
        ZenolabStatus::Ok
    })
}

fn drag_config(
    alpha0: C64,
    delta: C64,
    steps: u32,
    dim: usize,
    record_and_stop: bool,
) -> DragConfig {
    DragConfig {
        alpha0,
        delta,
        steps,
        dim: (dim > 0).then_some(dim),
        policy: DecisionPolicy::ForceYes,
        on_no: if record_and_stop { OnNo::RecordAndStop } else { OnNo::Abort },
    }
}

#[allow(clippy::too_many_arguments)]
fn laskey_config(
    alpha0: C64,
    gamma: C64,
    theta_start: f64,
    theta_end: f64,
    substeps: u32,
    observe: bool,
    dim: usize,
    record_and_stop: bool,
) -> LaskeyConfig {
    LaskeyConfig {
        alpha0,
        gamma,
        omega: 1.0,
        theta_start,
        theta_end,
        substeps,
        observe,
        dim: (dim > 0).then_some(dim),
        policy: DecisionPolicy::ForceYes,
        on_no: if record_and_stop { OnNo::RecordAndStop } else { OnNo::Abort },
    }
}

fn report_out(
    result: zenolab::Result<ProtocolReport>,
    out_report: *mut *mut ZenolabReport,
) -> ZenolabStatus {
    match result {
        Ok(report) => {
            let handle = Box::into_raw(Box::new(ZenolabReport { inner: report }));
            unsafe { *out_report = handle };
            ZenolabStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Run the forced-yes amplitude drag; `dim` 0 selects the default cutoff.
#[no_mangle]
pub extern "C" fn zenolab_drag_run(
    alpha0_re: f64,
    alpha0_im: f64,
    delta_re: f64,
    delta_im: f64,
    steps: u32,
    dim: usize,
    out_report: *mut *mut ZenolabReport,
) -> ZenolabStatus {
    guard(|| {
        if out_report.is_null() {
            return null_argument();
        }
        let cfg = drag_config(
            C64::new(alpha0_re, alpha0_im),
            C64::new(delta_re, delta_im),
            steps,
            dim,
            true,
        );
        report_out(amplitude_drag(cfg), out_report)
    })
}

/// Run the forced-yes swept-basis protocol; `dim` 0 selects the default
/// cutoff.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub extern "C" fn zenolab_laskey_run(
    alpha0_re: f64,
    alpha0_im: f64,
    gamma_re: f64,
    gamma_im: f64,
    theta_start: f64,
    theta_end: f64,
    substeps: u32,
    observe: bool,
    dim: usize,
    out_report: *mut *mut ZenolabReport,
) -> ZenolabStatus {
    guard(|| {
        if out_report.is_null() {
            return null_argument();
        }
        let cfg = laskey_config(
            C64::new(alpha0_re, alpha0_im),
            C64::new(gamma_re, gamma_im),
            theta_start,
            theta_end,
            substeps,
            observe,
            dim,
            true,
        );
        report_out(laskey_protocol(cfg), out_report)
    })
}

/// Run the forced-yes decay freeze.
#[no_mangle]
pub extern "C" fn zenolab_zeno_run(
    rabi_frequency: f64,
    total_time: f64,
    measurements: u32,
    out_report: *mut *mut ZenolabReport,
) -> ZenolabStatus {
    guard(|| {
        if out_report.is_null() {
            return null_argument();
        }
        let cfg = ZenoConfig {
            rabi_frequency,
            total_time,
            measurements,
        };
        report_out(zeno_survival(cfg), out_report)
    })
}

/// Release a report handle; null is a no-op.
#[no_mangle]
pub extern "C" fn zenolab_report_free(report: *mut ZenolabReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

/// Number of recorded steps in a report.
#[no_mangle]
pub extern "C" fn zenolab_report_len(
    report: *const ZenolabReport,
    out_len: *mut usize,
) -> ZenolabStatus {
    guard(|| {
        let Some(report) = (unsafe { report.as_ref() }) else {
            return null_argument();
        };
        if out_len.is_null() {
            return null_argument();
        }
        unsafe { *out_len = report.inner.steps.len() };
        ZenolabStatus::Ok
    })
}

/// Copy one step record out of a report.
#[no_mangle]
pub extern "C" fn zenolab_report_step(
    report: *const ZenolabReport,
    index: usize,
    out_step: *mut ZenolabStep,
) -> ZenolabStatus {
    guard(|| {
        let Some(report) = (unsafe { report.as_ref() }) else {
            return null_argument();
        };
        if out_step.is_null() {
            return null_argument();
        }
        let Some(step) = report.inner.steps.get(index) else {
            set_error("step index out of range");
            return ZenolabStatus::OutOfRange;
        };
        unsafe {
            *out_step = ZenolabStep {
                step: step.step,
                phase_or_time: step.phase_or_time,
                target_re: step.target_amplitude.re,
                target_im: step.target_amplitude.im,
                probability_yes: step.probability_yes,
                cumulative_prob: step.cumulative,
                outcome_yes: step.outcome.is_yes(),
            };
        }
        ZenolabStatus::Ok
    })
}

/// Copy the scalar summary out of a report.
#[no_mangle]
pub extern "C" fn zenolab_report_summary(
    report: *const ZenolabReport,
    out_summary: *mut ZenolabReportSummary,
) -> ZenolabStatus {
    guard(|| {
        let Some(report) = (unsafe { report.as_ref() }) else {
            return null_argument();
        };
        if out_summary.is_null() {
            return null_argument();
        }
        let inner = &report.inner;
        unsafe {
            *out_summary = ZenolabReportSummary {
                cumulative: inner.cumulative,
                closed_form: inner.closed_form,
                has_single_shot: inner.single_shot.is_some(),
                single_shot: inner.single_shot.unwrap_or(0.0),
                has_refined_closed_form: inner.refined_closed_form.is_some(),
                refined_closed_form: inner.refined_closed_form.unwrap_or(0.0),
                final_fidelity: inner.final_fidelity,
                min_truncation_fidelity: inner.min_truncation_fidelity,
                disposition: match inner.disposition {
                    Disposition::Completed => ZenolabDisposition::Completed,
                    Disposition::Stopped => ZenolabDisposition::Stopped,
                    Disposition::Discarded => ZenolabDisposition::Discarded,
                },
            };
        }
        ZenolabStatus::Ok
    })
}

fn ensemble_out(
    protocol: EnsembleProtocol,
    n_traj: u32,
    master_seed: u64,
    out_stats: *mut ZenolabEnsembleStats,
) -> ZenolabStatus {
    match run_ensemble(&protocol, n_traj, master_seed) {
        Ok(stats) => {
            unsafe {
                *out_stats = ZenolabEnsembleStats {
                    n_traj: stats.n_traj,
                    n_success: stats.n_success,
                    n_failed: stats.n_failed,
                    n_discarded: stats.n_discarded,
                    success_frequency: stats.success_frequency,
                    mean_cumulative: stats.mean_cumulative,
                    closed_form: stats.closed_form,
                };
            }
            ZenolabStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Sampled drag ensemble; trajectory i draws from stream (master_seed, i).
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub extern "C" fn zenolab_drag_ensemble(
    alpha0_re: f64,
    alpha0_im: f64,
    delta_re: f64,
    delta_im: f64,
    steps: u32,
    dim: usize,
    record_and_stop: bool,
    n_traj: u32,
    master_seed: u64,
    out_stats: *mut ZenolabEnsembleStats,
) -> ZenolabStatus {
    guard(|| {
        if out_stats.is_null() {
            return null_argument();
        }
        let cfg = drag_config(
            C64::new(alpha0_re, alpha0_im),
            C64::new(delta_re, delta_im),
            steps,
            dim,
            record_and_stop,
        );
        ensemble_out(EnsembleProtocol::Drag(cfg), n_traj, master_seed, out_stats)
    })
}

/// Sampled swept-basis ensemble (always observing).
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub extern "C" fn zenolab_laskey_ensemble(
    alpha0_re: f64,
    alpha0_im: f64,
    gamma_re: f64,
    gamma_im: f64,
    theta_start: f64,
    theta_end: f64,
    substeps: u32,
    dim: usize,
    record_and_stop: bool,
    n_traj: u32,
    master_seed: u64,
    out_stats: *mut ZenolabEnsembleStats,
) -> ZenolabStatus {
    guard(|| {
        if out_stats.is_null() {
            return null_argument();
        }
        let cfg = laskey_config(
            C64::new(alpha0_re, alpha0_im),
            C64::new(gamma_re, gamma_im),
            theta_start,
            theta_end,
            substeps,
            true,
            dim,
            record_and_stop,
        );
        ensemble_out(EnsembleProtocol::Laskey(cfg), n_traj, master_seed, out_stats)
    })
}

/// Sampled decay-freeze ensemble.
#[no_mangle]
pub extern "C" fn zenolab_zeno_ensemble(
    rabi_frequency: f64,
    total_time: f64,
    measurements: u32,
    n_traj: u32,
    master_seed: u64,
    out_stats: *mut ZenolabEnsembleStats,
) -> ZenolabStatus {
    guard(|| {
        if out_stats.is_null() {
            return null_argument();
        }
        let cfg = ZenoConfig {
            rabi_frequency,
            total_time,
            measurements,
        };
        ensemble_out(EnsembleProtocol::Zeno(cfg), n_traj, master_seed, out_stats)
    })
}

/// Entangle (c₁|0⟩ + c₂|1⟩) with a two-state pointer and report the
/// reductions.
#[no_mangle]
pub extern "C" fn zenolab_chain_run(
    c1_re: f64,
    c1_im: f64,
    c2_re: f64,
    c2_im: f64,
    out_summary: *mut ZenolabChainSummary,
) -> ZenolabStatus {
    guard(|| {
        if out_summary.is_null() {
            return null_argument();
        }
        let cfg = ChainConfig {
            c1: C64::new(c1_re, c1_im),
            c2: C64::new(c2_re, c2_im),
        };
        match von_neumann_chain(&cfg) {
            Ok(report) => {
                unsafe {
                    *out_summary = ZenolabChainSummary {
                        pointer_prob_0: report.pointer_probabilities[0],
                        pointer_prob_1: report.pointer_probabilities[1],
                        reduced_diag_0: report.reduced_system.entry(0, 0).re,
                        reduced_diag_1: report.reduced_system.entry(1, 1).re,
                        reduced_off_diagonal_max: report.reduced_off_diagonal_max,
                    };
                }
                ZenolabStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}
