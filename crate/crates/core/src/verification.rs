//! Named self-checks over a configured system, each reporting its residual.

use std::fmt;
use std::str::FromStr;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::analysis::{cptp_report, process_fidelity, ProtocolSet};
use crate::effective_coupling::{
    double_commutator_channel, flip_flop, off_flip_flop_residual, refocusing_residual,
    split_parallel_cross,
};
use crate::error::{Error, Result};
use crate::liouville::{channel_superop, single_spin_dissipator, unitary_superop};
use crate::numerics::{
    embed_many, expm, identity, max_abs, pauli, unvec, vec, zeros, Operator, PauliAxis, ONE,
};
use crate::sequences::bch_scaling_ratios;
use crate::spin_system::{NoiseParams, SystemSpec};

pub const OFF_PATTERN_TOL: f64 = 1e-12;
pub const CLOSED_FORM_TOL: f64 = 1e-12;
pub const BCH_RATIO_MAX: f64 = 1.0 / 14.0;
pub const BCH_START: f64 = 0.05;
pub const BCH_HALVINGS: usize = 3;
pub const REFOCUS_TOL: f64 = 1e-12;
pub const DECAY_TOL: f64 = 1e-8;
pub const SWAP_INFIDELITY_TOL: f64 = 1e-10;
pub const CPTP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    DoubleCommutator,
    BchScaling,
    Refocusing,
    DissipatorDecay,
    SerialSwap,
    Cptp,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::DoubleCommutator,
        Check::BchScaling,
        Check::Refocusing,
        Check::DissipatorDecay,
        Check::SerialSwap,
        Check::Cptp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::DoubleCommutator => "double-commutator",
            Check::BchScaling => "bch-scaling",
            Check::Refocusing => "refocusing",
            Check::DissipatorDecay => "dissipator-decay",
            Check::SerialSwap => "serial-swap",
            Check::Cptp => "cptp",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown check `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub check: Check,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{:<18} {status} {}", self.check.name(), self.detail)
    }
}

fn outcome(check: Check, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        check,
        passed,
        detail,
    }
}

/// Runs one check. Errors from the underlying computation are reported as
/// a failed outcome.
pub fn run_check(check: Check, spec: &SystemSpec, noise: &NoiseParams) -> CheckOutcome {
    let result = match check {
        Check::DoubleCommutator => double_commutator(spec),
        Check::BchScaling => bch_scaling(spec),
        Check::Refocusing => refocusing(spec),
        Check::DissipatorDecay => dissipator_decay(noise),
        Check::SerialSwap => serial_swap(spec),
        Check::Cptp => cptp(spec, noise),
    };
    result.unwrap_or_else(|e| outcome(check, false, format!("error: {e}")))
}

/// `16 FF (Z Z - 1)` on the nuclei, for `A = z`, `omega_d = 1`, one nucleus.
pub fn unit_closed_form(spec: &SystemSpec) -> Result<Operator> {
    let z = pauli(PauliAxis::Z);
    let zz = embed_many(&[(2, &z), (3, &z)], spec.n_sites())?;
    let nuc = zz - identity(spec.dim());
    Ok(flip_flop(spec).dot(&nuc) * 16.0)
}

fn double_commutator(spec: &SystemSpec) -> Result<CheckOutcome> {
    let c2 = double_commutator_channel(spec);
    let scale = max_abs(&c2);
    let off = off_flip_flop_residual(&c2, spec) / scale.max(f64::MIN_POSITIVE);

    let unit = SystemSpec::with_couplings(1.0, vec![[0.0, 0.0, 1.0]]);
    let closed = max_abs(&(double_commutator_channel(&unit) - unit_closed_form(&unit)?));
    let passed = off <= OFF_PATTERN_TOL && closed <= CLOSED_FORM_TOL && scale > 0.0;
    Ok(outcome(
        Check::DoubleCommutator,
        passed,
        format!("off_pattern_rel={off:.3e} closed_form_abs={closed:.3e}"),
    ))
}

fn bch_scaling(spec: &SystemSpec) -> Result<CheckOutcome> {
    let ratios = bch_scaling_ratios(spec, BCH_START, BCH_HALVINGS)?;
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    let list: Vec<String> = ratios.iter().map(|r| format!("{r:.4e}")).collect();
    Ok(outcome(
        Check::BchScaling,
        worst <= BCH_RATIO_MAX,
        format!(
            "ratios=[{}] max_allowed={BCH_RATIO_MAX:.4e}",
            list.join(",")
        ),
    ))
}

fn refocusing(spec: &SystemSpec) -> Result<CheckOutcome> {
    let target = if spec.k() >= 2 {
        spec.clone()
    } else {
        SystemSpec::default_two_nuclei()
    };
    let residual = refocusing_residual(&target)?;
    let cross = max_abs(&split_parallel_cross(&target).1);
    Ok(outcome(
        Check::Refocusing,
        residual <= REFOCUS_TOL && cross > 0.0,
        format!(
            "k={} rel_residual={residual:.3e} cross_norm={cross:.3e}",
            target.k()
        ),
    ))
}

/// Largest relative deviation of the single-spin decay from
/// `exp(-t/T1)` (population) and `exp(-t/T2)` (coherence) over
/// `t in [0, 5 T1]`.
pub fn decay_deviation(noise: &NoiseParams, samples: usize) -> Result<f64> {
    let (g1, g2) = crate::liouville::gammas_from_times(noise)?;
    let d = single_spin_dissipator(g1, g2);
    let mut rho = zeros(2);
    rho[(1, 1)] = ONE;
    rho[(0, 1)] = ONE * 0.5;
    rho[(1, 0)] = ONE * 0.5;
    let v: Array1<_> = vec(&rho)?;
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let t = 5.0 * noise.t1 * i as f64 / (samples - 1).max(1) as f64;
        let out = unvec(&expm(&(&d * t))?.dot(&v), 2)?;
        let pop = (-t / noise.t1).exp();
        let coh = 0.5 * (-t / noise.t2).exp();
        worst = worst
            .max((out[(1, 1)].re - pop).abs() / pop)
            .max((out[(0, 1)] - coh).norm() / coh);
    }
    Ok(worst)
}

fn dissipator_decay(noise: &NoiseParams) -> Result<CheckOutcome> {
    let dev = decay_deviation(noise, 50)?;
    Ok(outcome(
        Check::DissipatorDecay,
        dev <= DECAY_TOL,
        format!(
            "t1={:.4e} t2={:.4e} max_rel_dev={dev:.3e}",
            noise.t1, noise.t2
        ),
    ))
}

fn nuclear_swap() -> Operator {
    let mut s = zeros(4);
    for (a, b) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        s[(a, b)] = ONE;
    }
    s
}

fn serial_swap(spec: &SystemSpec) -> Result<CheckOutcome> {
    let protocols = ProtocolSet::standard(spec)?;
    let s = channel_superop(&protocols.swap, spec, None, false)?;
    let f = process_fidelity(&unitary_superop(&nuclear_swap()), &s)?;
    Ok(outcome(
        Check::SerialSwap,
        1.0 - f <= SWAP_INFIDELITY_TOL,
        format!("infidelity={:.3e}", 1.0 - f),
    ))
}

fn cptp(spec: &SystemSpec, noise: &NoiseParams) -> Result<CheckOutcome> {
    let p = ProtocolSet::standard(spec)?;
    let channels = [
        channel_superop(&p.wqc, spec, None, p.wqc_microwave)?,
        channel_superop(&p.wqc, spec, Some(noise), p.wqc_microwave)?,
        channel_superop(&p.swap, spec, None, false)?,
        channel_superop(&p.swap, spec, Some(noise), false)?,
    ];
    let mut trace: f64 = 0.0;
    let mut choi = f64::INFINITY;
    for s in &channels {
        let r = cptp_report(s)?;
        trace = trace.max(r.trace_residual);
        choi = choi.min(r.choi_min_eigenvalue);
    }
    Ok(outcome(
        Check::Cptp,
        trace <= CPTP_TOL && choi >= -CPTP_TOL,
        format!("channels=4 trace_residual={trace:.3e} choi_min_eig={choi:.3e}"),
    ))
}
