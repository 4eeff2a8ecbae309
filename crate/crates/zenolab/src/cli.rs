//! Batch experiment runner behind the `zenolab` binary: parse a TOML run
//! configuration, execute one protocol, and write per-step CSV records plus
//! a TOML summary.
//!
//! The configuration format is strict: unknown keys are fatal, exactly one
//! protocol block may be present, and every numeric field must be finite.
//! Complex amplitudes are written either as a plain float (real) or as a
//! two-element array `[re, im]`.
//!
//! Outputs are byte-deterministic in the configuration and seed: floats are
//! printed with 18 significant digits (`{:.17e}`), which round-trips f64
//! exactly, and ensembles reduce in trajectory order.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use num_complex::Complex64 as C64;
use serde::Deserialize;
use thiserror::Error;

use crate::fock::{coherent_overlap_closed_form, coherent_state, default_dim};
use crate::measure::{born_probability, DecisionPolicy};
use crate::protocol::{
    amplitude_drag, laskey_protocol, run_ensemble, von_neumann_chain, zeno_survival, ChainConfig,
    ChainReport, Disposition, DragConfig, EnsembleProtocol, EnsembleStats, LaskeyConfig, OnNo,
    ProtocolReport, ZenoConfig,
};

/// Per-step records file written into the output directory.
pub const STEPS_FILE: &str = "steps.csv";
/// Summary document written into the output directory.
pub const SUMMARY_FILE: &str = "summary.toml";

/// Runner errors, one exit code per class.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed document: syntax, unknown keys, wrong types. Exit 1.
    #[error("parse error: {0}")]
    Parse(String),
    /// Well-formed document violating a run invariant. Exit 2.
    #[error("invalid run configuration: {0}")]
    Validation(String),
    /// Numeric failure while running the protocol. Exit 3.
    #[error("numeric failure: {0}")]
    Numeric(crate::Error),
    /// Filesystem failure. Exit 4.
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(err: crate::Error) -> Self {
        match err {
            crate::Error::InvalidConfig(msg) => CliError::Validation(msg),
            other => CliError::Numeric(other),
        }
    }
}

/// A validated run: one protocol, a master seed, a trajectory count, and an
/// output directory.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    /// 0 runs the deterministic forced-yes analysis only; positive values
    /// add a sampled Monte Carlo ensemble of this size.
    pub n_traj: u32,
    pub out: PathBuf,
    pub protocol: ProtocolSpec,
}

/// Protocol selection with its parameter block.
#[derive(Debug, Clone)]
pub enum ProtocolSpec {
    Drag {
        alpha0: C64,
        delta: C64,
        steps: u32,
        dim: Option<usize>,
        on_no: OnNo,
    },
    Laskey {
        alpha0: C64,
        gamma: C64,
        omega: f64,
        theta_start: f64,
        theta_end: f64,
        substeps: u32,
        observe: bool,
        dim: Option<usize>,
        on_no: OnNo,
    },
    Zeno {
        rabi_frequency: f64,
        total_time: f64,
        measurements: u32,
    },
    Chain {
        c1: C64,
        c2: C64,
    },
    OverlapTable {
        alpha0: C64,
        delta_start: f64,
        delta_stop: f64,
        count: u32,
        dim: Option<usize>,
    },
}

impl ProtocolSpec {
    /// Name as used for CLI subcommands and the summary document.
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolSpec::Drag { .. } => "drag",
            ProtocolSpec::Laskey { .. } => "laskey",
            ProtocolSpec::Zeno { .. } => "zeno",
            ProtocolSpec::Chain { .. } => "chain",
            ProtocolSpec::OverlapTable { .. } => "overlap-table",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    n_traj: Option<u32>,
    out: Option<PathBuf>,
    drag: Option<RawDrag>,
    laskey: Option<RawLaskey>,
    zeno: Option<RawZeno>,
    chain: Option<RawChain>,
    overlap_table: Option<RawOverlapTable>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrag {
    alpha0: ComplexSpec,
    delta: ComplexSpec,
    steps: u32,
    dim: Option<usize>,
    on_no: Option<OnNoSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLaskey {
    alpha0: ComplexSpec,
    gamma: ComplexSpec,
    omega: Option<f64>,
    theta_start: Option<f64>,
    theta_end: Option<f64>,
    substeps: u32,
    observe: Option<bool>,
    dim: Option<usize>,
    on_no: Option<OnNoSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawZeno {
    omega: f64,
    total_time: f64,
    measurements: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    c1: ComplexSpec,
    c2: ComplexSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOverlapTable {
    alpha0: ComplexSpec,
    delta_start: f64,
    delta_stop: f64,
    count: u32,
    dim: Option<usize>,
}

/// A complex amplitude in config files: a bare float or `[re, im]`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ComplexSpec {
    Real(f64),
    Parts([f64; 2]),
}

impl ComplexSpec {
    fn resolve(&self, field: &str) -> Result<C64, CliError> {
        let value = match self {
            ComplexSpec::Real(re) => C64::new(*re, 0.0),
            ComplexSpec::Parts([re, im]) => C64::new(*re, *im),
        };
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(CliError::Validation(format!("{field} must be finite, got {value}")));
        }
        Ok(value)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum OnNoSpec {
    RecordAndStop,
    Abort,
}

impl From<Option<OnNoSpec>> for OnNo {
    fn from(raw: Option<OnNoSpec>) -> Self {
        match raw.unwrap_or(OnNoSpec::RecordAndStop) {
            OnNoSpec::RecordAndStop => OnNo::RecordAndStop,
            OnNoSpec::Abort => OnNo::Abort,
        }
    }
}

/// Parse and validate a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;

    let mut present: Vec<&str> = Vec::new();
    if raw.drag.is_some() {
        present.push("drag");
    }
    if raw.laskey.is_some() {
        present.push("laskey");
    }
    if raw.zeno.is_some() {
        present.push("zeno");
    }
    if raw.chain.is_some() {
        present.push("chain");
    }
    if raw.overlap_table.is_some() {
        present.push("overlap_table");
    }
    if present.len() != 1 {
        return Err(CliError::Validation(format!(
            "config must contain exactly one protocol block, found {}: [{}]",
            present.len(),
            present.join(", ")
        )));
    }

    let n_traj = raw.n_traj.unwrap_or(0);
    let protocol = if let Some(block) = raw.drag {
        ProtocolSpec::Drag {
            alpha0: block.alpha0.resolve("drag.alpha0")?,
            delta: block.delta.resolve("drag.delta")?,
            steps: block.steps,
            dim: block.dim,
            on_no: block.on_no.into(),
        }
    } else if let Some(block) = raw.laskey {
        ProtocolSpec::Laskey {
            alpha0: block.alpha0.resolve("laskey.alpha0")?,
            gamma: block.gamma.resolve("laskey.gamma")?,
            omega: block.omega.unwrap_or(1.0),
            theta_start: block.theta_start.unwrap_or(0.0),
            theta_end: block.theta_end.unwrap_or(std::f64::consts::FRAC_PI_2),
            substeps: block.substeps,
            observe: block.observe.unwrap_or(true),
            dim: block.dim,
            on_no: block.on_no.into(),
        }
    } else if let Some(block) = raw.zeno {
        ProtocolSpec::Zeno {
            rabi_frequency: block.omega,
            total_time: block.total_time,
            measurements: block.measurements,
        }
    } else if let Some(block) = raw.chain {
        ProtocolSpec::Chain {
            c1: block.c1.resolve("chain.c1")?,
            c2: block.c2.resolve("chain.c2")?,
        }
    } else {
        let block = raw.overlap_table.expect("exactly one block is present");
        ProtocolSpec::OverlapTable {
            alpha0: block.alpha0.resolve("overlap_table.alpha0")?,
            delta_start: block.delta_start,
            delta_stop: block.delta_stop,
            count: block.count,
            dim: block.dim,
        }
    };

    let config = RunConfig {
        seed: raw.seed.unwrap_or(0),
        n_traj,
        out: raw.out.unwrap_or_else(|| PathBuf::from("zenolab_out")),
        protocol,
    };
    validate(&config)?;
    Ok(config)
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    match &cfg.protocol {
        ProtocolSpec::Drag { .. } => {
            drag_config(cfg).validate()?;
        }
        ProtocolSpec::Laskey { .. } => {
            laskey_config(cfg).validate()?;
        }
        ProtocolSpec::Zeno { rabi_frequency, total_time, measurements } => {
            ZenoConfig {
                rabi_frequency: *rabi_frequency,
                total_time: *total_time,
                measurements: *measurements,
            }
            .validate()?;
        }
        ProtocolSpec::Chain { c1, c2 } => {
            ChainConfig { c1: *c1, c2: *c2 }.validate()?;
            if cfg.n_traj > 0 {
                return Err(CliError::Validation(
                    "chain is deterministic; n_traj must be 0".into(),
                ));
            }
        }
        ProtocolSpec::OverlapTable { delta_start, delta_stop, count, .. } => {
            if *count == 0 {
                return Err(CliError::Validation("overlap_table.count must be at least 1".into()));
            }
            if !(delta_start.is_finite() && delta_stop.is_finite()) || delta_start > delta_stop {
                return Err(CliError::Validation(format!(
                    "overlap_table sweep [{delta_start}, {delta_stop}] must be finite and ordered"
                )));
            }
            if cfg.n_traj > 0 {
                return Err(CliError::Validation(
                    "overlap-table is deterministic; n_traj must be 0".into(),
                ));
            }
        }
    }
    Ok(())
}

fn drag_config(cfg: &RunConfig) -> DragConfig {
    let ProtocolSpec::Drag { alpha0, delta, steps, dim, on_no } = &cfg.protocol else {
        unreachable!("caller checked the variant");
    };
    DragConfig {
        alpha0: *alpha0,
        delta: *delta,
        steps: *steps,
        dim: *dim,
        policy: DecisionPolicy::ForceYes,
        on_no: *on_no,
    }
}

fn laskey_config(cfg: &RunConfig) -> LaskeyConfig {
    let ProtocolSpec::Laskey {
        alpha0,
        gamma,
        omega,
        theta_start,
        theta_end,
        substeps,
        observe,
        dim,
        on_no,
    } = &cfg.protocol
    else {
        unreachable!("caller checked the variant");
    };
    LaskeyConfig {
        alpha0: *alpha0,
        gamma: *gamma,
        omega: *omega,
        theta_start: *theta_start,
        theta_end: *theta_end,
        substeps: *substeps,
        observe: *observe,
        dim: *dim,
        policy: DecisionPolicy::ForceYes,
        on_no: *on_no,
    }
}

/// Paths and rendered text produced by [`run`].
#[derive(Debug)]
pub struct RunOutputs {
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    /// The summary document text, for echoing to stdout.
    pub summary: String,
    pub warnings: Vec<String>,
}

/// Execute a validated run and write `steps.csv` and `summary.toml` into the
/// output directory, creating it if needed.
pub fn run(cfg: &RunConfig) -> Result<RunOutputs, CliError> {
    let mut warnings = Vec::new();
    let (csv, summary) = match &cfg.protocol {
        ProtocolSpec::Drag { .. } => {
            let lib = drag_config(cfg);
            if lib.delta_dominates_alpha() {
                warnings.push(format!(
                    "|delta| = {} is not small against |alpha0| = {}; the drag picture assumes a small step",
                    lib.delta.norm(),
                    lib.alpha0.norm()
                ));
            }
            let report = amplitude_drag(lib.clone())?;
            let stats = if cfg.n_traj > 0 {
                Some(run_ensemble(&EnsembleProtocol::Drag(lib.clone()), cfg.n_traj, cfg.seed)?)
            } else {
                None
            };
            (step_csv(&report), drag_summary(cfg, &lib, &report, stats.as_ref()))
        }
        ProtocolSpec::Laskey { .. } => {
            let lib = laskey_config(cfg);
            let report = laskey_protocol(lib.clone())?;
            let stats = if cfg.n_traj > 0 {
                Some(run_ensemble(&EnsembleProtocol::Laskey(lib.clone()), cfg.n_traj, cfg.seed)?)
            } else {
                None
            };
            (step_csv(&report), laskey_summary(cfg, &lib, &report, stats.as_ref()))
        }
        ProtocolSpec::Zeno { rabi_frequency, total_time, measurements } => {
            let lib = ZenoConfig {
                rabi_frequency: *rabi_frequency,
                total_time: *total_time,
                measurements: *measurements,
            };
            let report = zeno_survival(lib.clone())?;
            let stats = if cfg.n_traj > 0 {
                Some(run_ensemble(&EnsembleProtocol::Zeno(lib.clone()), cfg.n_traj, cfg.seed)?)
            } else {
                None
            };
            (step_csv(&report), zeno_summary(cfg, &lib, &report, stats.as_ref()))
        }
        ProtocolSpec::Chain { c1, c2 } => {
            let report = von_neumann_chain(&ChainConfig { c1: *c1, c2: *c2 })?;
            (chain_csv(&report), chain_summary(cfg, &report))
        }
        ProtocolSpec::OverlapTable { alpha0, delta_start, delta_stop, count, dim } => {
            overlap_table(cfg, *alpha0, *delta_start, *delta_stop, *count, *dim)?
        }
    };

    fs::create_dir_all(&cfg.out)?;
    let csv_path = cfg.out.join(STEPS_FILE);
    let summary_path = cfg.out.join(SUMMARY_FILE);
    fs::write(&csv_path, csv)?;
    fs::write(&summary_path, &summary)?;
    Ok(RunOutputs {
        csv_path,
        summary_path,
        summary,
        warnings,
    })
}

/// 18 significant digits: round-trips any f64 and is valid TOML.
fn fmt_f64(x: f64) -> String {
    format!("{x:.17e}")
}

fn step_csv(report: &ProtocolReport) -> String {
    let mut out =
        String::from("step,phase_or_time,target_re,target_im,prob_yes,cumulative_prob,outcome\n");
    for s in &report.steps {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.step,
            fmt_f64(s.phase_or_time),
            fmt_f64(s.target_amplitude.re),
            fmt_f64(s.target_amplitude.im),
            fmt_f64(s.probability_yes),
            fmt_f64(s.cumulative),
            s.outcome.label()
        )
        .expect("writing to a String cannot fail");
    }
    out
}

fn chain_csv(report: &ChainReport) -> String {
    let mut out = String::from("outcome,coeff_re,coeff_im,born_prob,reduced_diag\n");
    for i in 0..2 {
        let coeff = report.composite.amps()[i * 2 + i];
        writeln!(
            out,
            "{},{},{},{},{}",
            i,
            fmt_f64(coeff.re),
            fmt_f64(coeff.im),
            fmt_f64(report.pointer_probabilities[i]),
            fmt_f64(report.reduced_system.entry(i, i).re)
        )
        .expect("writing to a String cannot fail");
    }
    out
}

fn disposition_label(d: Disposition) -> &'static str {
    match d {
        Disposition::Completed => "completed",
        Disposition::Stopped => "stopped",
        Disposition::Discarded => "discarded",
    }
}

struct Summary(String);

impl Summary {
    fn new(cfg: &RunConfig) -> Self {
        let mut s = Summary(String::new());
        s.str("protocol", cfg.protocol.name());
        s.int("seed", cfg.seed as i128);
        s.int("n_traj", cfg.n_traj as i128);
        s
    }

    fn str(&mut self, key: &str, value: &str) {
        writeln!(self.0, "{key} = \"{value}\"").expect("writing to a String cannot fail");
    }

    fn int(&mut self, key: &str, value: i128) {
        writeln!(self.0, "{key} = {value}").expect("writing to a String cannot fail");
    }

    fn float(&mut self, key: &str, value: f64) {
        writeln!(self.0, "{key} = {}", fmt_f64(value)).expect("writing to a String cannot fail");
    }

    fn boolean(&mut self, key: &str, value: bool) {
        writeln!(self.0, "{key} = {value}").expect("writing to a String cannot fail");
    }

    fn complex(&mut self, key: &str, value: C64) {
        self.float(&format!("{key}_re"), value.re);
        self.float(&format!("{key}_im"), value.im);
    }

    fn report(&mut self, report: &ProtocolReport) {
        self.float("closed_form", report.closed_form);
        self.float("numeric_cumulative", report.cumulative);
        if let Some(single_shot) = report.single_shot {
            self.float("single_shot_closed_form", single_shot);
        }
        if let Some(refined) = report.refined_closed_form {
            self.float("refined_closed_form", refined);
        }
        self.float("final_fidelity", report.final_fidelity);
        self.float("min_truncation_fidelity", report.min_truncation_fidelity);
        self.str("disposition", disposition_label(report.disposition));
    }

    fn ensemble(&mut self, stats: Option<&EnsembleStats>) {
        if let Some(stats) = stats {
            self.float("mc_frequency", stats.success_frequency);
            self.float("mc_mean_cumulative", stats.mean_cumulative);
            self.int("mc_n_success", stats.n_success as i128);
            self.int("mc_n_failed", stats.n_failed as i128);
            self.int("mc_n_discarded", stats.n_discarded as i128);
        }
    }

    fn finish(self) -> String {
        self.0
    }
}

fn drag_summary(
    cfg: &RunConfig,
    lib: &DragConfig,
    report: &ProtocolReport,
    stats: Option<&EnsembleStats>,
) -> String {
    let mut s = Summary::new(cfg);
    s.complex("alpha0", lib.alpha0);
    s.complex("delta", lib.delta);
    s.int("steps", lib.steps as i128);
    s.int("dim", lib.resolved_dim() as i128);
    s.report(report);
    s.ensemble(stats);
    s.finish()
}

fn laskey_summary(
    cfg: &RunConfig,
    lib: &LaskeyConfig,
    report: &ProtocolReport,
    stats: Option<&EnsembleStats>,
) -> String {
    let mut s = Summary::new(cfg);
    s.complex("alpha0", lib.alpha0);
    s.complex("gamma", lib.gamma);
    s.float("omega", lib.omega);
    s.float("theta_start", lib.theta_start);
    s.float("theta_end", lib.theta_end);
    s.int("substeps", lib.substeps as i128);
    s.boolean("observe", lib.observe);
    s.int("dim", lib.resolved_dim() as i128);
    s.report(report);
    s.ensemble(stats);
    s.finish()
}

fn zeno_summary(
    cfg: &RunConfig,
    lib: &ZenoConfig,
    report: &ProtocolReport,
    stats: Option<&EnsembleStats>,
) -> String {
    let mut s = Summary::new(cfg);
    s.float("rabi_frequency", lib.rabi_frequency);
    s.float("total_time", lib.total_time);
    s.int("measurements", lib.measurements as i128);
    s.report(report);
    s.ensemble(stats);
    s.finish()
}

fn chain_summary(cfg: &RunConfig, report: &ChainReport) -> String {
    let mut s = Summary::new(cfg);
    s.float("expected_weight_0", report.expected_weights[0]);
    s.float("expected_weight_1", report.expected_weights[1]);
    s.float("pointer_prob_0", report.pointer_probabilities[0]);
    s.float("pointer_prob_1", report.pointer_probabilities[1]);
    s.float("reduced_diag_0", report.reduced_system.entry(0, 0).re);
    s.float("reduced_diag_1", report.reduced_system.entry(1, 1).re);
    s.float("reduced_off_diagonal_max", report.reduced_off_diagonal_max);
    s.finish()
}

fn overlap_table(
    cfg: &RunConfig,
    alpha0: C64,
    delta_start: f64,
    delta_stop: f64,
    count: u32,
    dim: Option<usize>,
) -> Result<(String, String), CliError> {
    let deltas: Vec<f64> = (0..count)
        .map(|i| {
            if count == 1 {
                delta_start
            } else {
                delta_start + (delta_stop - delta_start) * i as f64 / (count - 1) as f64
            }
        })
        .collect();
    let dim = dim.unwrap_or_else(|| {
        let max = deltas
            .iter()
            .map(|d| (alpha0 + C64::from(*d)).norm())
            .fold(alpha0.norm(), f64::max);
        default_dim(max)
    });

    let base = coherent_state(alpha0, dim)?;
    let mut min_fidelity = base.truncation_fidelity;
    let mut csv = String::from("delta,prob_numeric,prob_closed_form,quadratic_approx\n");
    let mut max_abs_error = 0.0f64;
    for &delta in &deltas {
        let shifted = coherent_state(alpha0 + C64::from(delta), dim)?;
        min_fidelity = min_fidelity.min(shifted.truncation_fidelity);
        let numeric = born_probability(&base.state, &shifted.state)?;
        let closed = coherent_overlap_closed_form(alpha0, alpha0 + C64::from(delta)).norm_sqr();
        max_abs_error = max_abs_error.max((numeric - closed).abs());
        writeln!(
            csv,
            "{},{},{},{}",
            fmt_f64(delta),
            fmt_f64(numeric),
            fmt_f64(closed),
            fmt_f64(1.0 - delta * delta)
        )
        .expect("writing to a String cannot fail");
    }

    let mut s = Summary::new(cfg);
    s.complex("alpha0", alpha0);
    s.float("delta_start", delta_start);
    s.float("delta_stop", delta_stop);
    s.int("count", count as i128);
    s.int("dim", dim as i128);
    s.float("max_abs_error", max_abs_error);
    s.float("min_truncation_fidelity", min_fidelity);
    Ok((csv, s.finish()))
}
