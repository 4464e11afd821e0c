//! Piecewise-constant pulse sequences.
//!
//! Segments are stored in the order they are applied. A segment with
//! generator `H`, sign `s` and duration `t` contributes `exp(-i s H t)`, and
//! later segments multiply from the left, so the propagator of
//! `[g0, g1, ..]` is `.. U1 U0`.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::effective_coupling::double_commutator_channel;
use crate::error::{Error, Result};
use crate::numerics::{expm, identity, logm, spectral_norm, Operator, I};
use crate::spin_system::{
    build_dipolar, build_hyperfine, build_microwave, heisenberg_exchange, SystemSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    Hyperfine,
    Dipolar,
    Microwave,
    /// Isotropic electron-nuclear exchange in both nodes at once, scaled by
    /// the hyperfine strength.
    SwapEn,
    /// Isotropic electron-electron exchange, scaled by the dipolar strength.
    SwapEe,
}

impl Generator {
    pub fn name(self) -> &'static str {
        match self {
            Generator::Hyperfine => "hyperfine",
            Generator::Dipolar => "dipolar",
            Generator::Microwave => "microwave",
            Generator::SwapEn => "swap_en",
            Generator::SwapEe => "swap_ee",
        }
    }

    /// Hamiltonian for this generator on the full register.
    pub fn hamiltonian(self, spec: &SystemSpec) -> Result<Operator> {
        match self {
            Generator::Hyperfine => Ok(build_hyperfine(spec)),
            Generator::Dipolar => Ok(build_dipolar(spec)),
            Generator::Microwave => build_microwave(spec),
            Generator::SwapEn => {
                require_single_nucleus(spec, "electron-nuclear swap")?;
                let n = spec.n_sites();
                let w = hyperfine_strength(spec);
                let h = heisenberg_exchange(0, spec.nuclear_site(0, 0), n)?
                    + heisenberg_exchange(1, spec.nuclear_site(1, 0), n)?;
                Ok(h * -w)
            }
            Generator::SwapEe => {
                let h = heisenberg_exchange(0, 1, spec.n_sites())?;
                Ok(h * -spec.dipolar)
            }
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hyperfine" => Ok(Self::Hyperfine),
            "dipolar" => Ok(Self::Dipolar),
            "microwave" => Ok(Self::Microwave),
            "swap_en" => Ok(Self::SwapEn),
            "swap_ee" => Ok(Self::SwapEe),
            other => Err(Error::InvalidInput(format!("unknown generator `{other}`"))),
        }
    }
}

fn require_single_nucleus(spec: &SystemSpec, what: &str) -> Result<()> {
    if spec.k() != 1 {
        return Err(Error::Unsupported(format!(
            "{what} is defined for one nucleus per node, got k = {}",
            spec.k()
        )));
    }
    Ok(())
}

/// `omega_hf = ||H_HF||` in the system's configured norm.
pub fn hyperfine_strength(spec: &SystemSpec) -> f64 {
    spec.norm.norm(&build_hyperfine(spec))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub generator: Generator,
    /// +1 or -1.
    pub sign: i8,
    /// Seconds.
    pub duration: f64,
    pub with_noise: bool,
}

impl Segment {
    pub fn new(generator: Generator, sign: i8, duration: f64) -> Self {
        Self {
            generator,
            sign,
            duration,
            with_noise: true,
        }
    }

    pub fn inverted(&self) -> Self {
        Self {
            sign: -self.sign,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub label: String,
    pub segments: Vec<Segment>,
}

impl PulseSequence {
    pub fn new(label: impl Into<String>, segments: Vec<Segment>) -> Result<Self> {
        let seq = Self {
            label: label.into(),
            segments,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidInput(format!(
                "sequence `{}` is empty",
                self.label
            )));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration > 0.0) || !s.duration.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "segment {i} of `{}` has non-positive duration {}",
                    self.label, s.duration
                )));
            }
            if s.sign != 1 && s.sign != -1 {
                return Err(Error::InvalidInput(format!(
                    "segment {i} has sign {}",
                    s.sign
                )));
            }
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Same segments with every sign flipped.
    pub fn with_signs_reversed(&self) -> Self {
        Self {
            label: format!("{} (signs reversed)", self.label),
            segments: self.segments.iter().map(Segment::inverted).collect(),
        }
    }
}

impl fmt::Display for PulseSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# sequence: {}", self.label)?;
        writeln!(f, "# index generator sign duration_s noise")?;
        for (i, s) in self.segments.iter().enumerate() {
            writeln!(
                f,
                "{i} {} {} {:.11e} {}",
                s.generator,
                if s.sign > 0 { "+" } else { "-" },
                s.duration,
                if s.with_noise { "on" } else { "off" }
            )?;
        }
        write!(f, "# total_duration_s {:.11e}", self.total_duration())
    }
}

/// Eight-segment cycle isolating `[[H_D, H_HF], H_HF]`.
///
/// Written as an operator product with the latest factor leftmost, the cycle
/// is `e^X e^Y e^-X e^-Y e^-X e^Y e^X e^-Y` with `X = -i tau H_HF` and
/// `Y = -i tau H_D`; the segment list is that product read right to left.
pub fn bch_sequence(tau: f64) -> Result<PulseSequence> {
    use Generator::{Dipolar as D, Hyperfine as HF};
    let pattern = [
        (D, -1),
        (HF, 1),
        (D, 1),
        (HF, -1),
        (D, -1),
        (HF, -1),
        (D, 1),
        (HF, 1),
    ];
    PulseSequence::new(
        "bch",
        pattern
            .iter()
            .map(|&(g, s)| Segment::new(g, s, tau))
            .collect(),
    )
}

/// Ordered product of segment exponentials with Hamiltonians supplied by
/// `resolve`.
pub fn sequence_propagator_with<F>(
    seq: &PulseSequence,
    dim: usize,
    mut resolve: F,
) -> Result<Operator>
where
    F: FnMut(Generator) -> Result<Operator>,
{
    let mut hamiltonians: HashMap<Generator, Operator> = HashMap::new();
    let mut u = identity(dim);
    for seg in &seq.segments {
        let h = match hamiltonians.entry(seg.generator) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => {
                let h = resolve(seg.generator)?;
                if h.dim() != (dim, dim) {
                    return Err(Error::DimensionMismatch(format!(
                        "generator {} has shape {:?}, expected {dim}",
                        seg.generator,
                        h.dim()
                    )));
                }
                e.insert(h)
            }
        };
        let step = expm(&h.mapv(|z| z * (-I * (seg.sign as f64 * seg.duration))))?;
        u = step.dot(&u);
    }
    Ok(u)
}

pub fn sequence_propagator(seq: &PulseSequence, spec: &SystemSpec) -> Result<Operator> {
    sequence_propagator_with(seq, spec.dim(), |g| g.hamiltonian(spec))
}

/// `tau` with `tau^3 ||H_D|| ||H_HF||^2 = pi/2`.
pub fn select_tau(spec: &SystemSpec) -> Result<f64> {
    let hd = spec.norm.norm(&build_dipolar(spec));
    let hf = hyperfine_strength(spec);
    if hd <= 0.0 || hf <= 0.0 {
        return Err(Error::Degenerate(format!(
            "tau selection needs nonzero couplings (||H_D|| = {hd}, ||H_HF|| = {hf})"
        )));
    }
    Ok((PI / (2.0 * hd * hf * hf)).cbrt())
}

/// Full-register SWAP of two sites, `exp(i pi/2 (1/2 sigma^a . sigma^b - 1))`,
/// which is the permutation SWAP times `exp(-i pi/4)`.
pub fn swap_unitary(spec: &SystemSpec, a: usize, b: usize) -> Result<Operator> {
    let n = spec.n_sites();
    if a >= n || b >= n {
        return Err(Error::InvalidInput(format!(
            "swap sites ({a}, {b}) out of range"
        )));
    }
    let h = heisenberg_exchange(a, b, n)?;
    expm(&h.mapv(|z| z * (I * FRAC_PI_2)))
}

/// Serial nuclear swap routed through the electrons: parallel e-n swaps, an
/// e-e swap, then parallel e-n swaps again, each timed so that
/// `t omega = pi/2`.
pub fn serial_swap_sequence(spec: &SystemSpec) -> Result<PulseSequence> {
    require_single_nucleus(spec, "serial swap")?;
    let w_hf = hyperfine_strength(spec);
    let w_d = spec.dipolar;
    if w_hf <= 0.0 || w_d <= 0.0 {
        return Err(Error::Degenerate(format!(
            "serial swap needs nonzero couplings (omega_hf = {w_hf}, omega_d = {w_d})"
        )));
    }
    let t_hf = FRAC_PI_2 / w_hf;
    let t_d = FRAC_PI_2 / w_d.abs();
    PulseSequence::new(
        "serial_swap",
        vec![
            Segment::new(Generator::SwapEn, 1, t_hf),
            Segment::new(Generator::SwapEe, w_d.signum() as i8, t_d),
            Segment::new(Generator::SwapEn, 1, t_hf),
        ],
    )
}

/// Sign `s` in `log U(8 tau) ~ s i tau^3 [[H_D, H_HF], H_HF]` for
/// [`bch_sequence`]. Fixed by comparing against the matrix logarithm of the
/// simulated cycle.
pub const COMMUTATOR_SIGN: f64 = 1.0;

/// `|| log U(8 tau) - i tau^3 [[H_D, H_HF], H_HF] ||` (spectral norm).
pub fn bch_residual(spec: &SystemSpec, tau: f64) -> Result<f64> {
    let u = sequence_propagator(&bch_sequence(tau)?, spec)?;
    let log_u = logm(&u)?;
    let c2 = double_commutator_channel(spec);
    let target = c2.mapv(|z| z * (I * (COMMUTATOR_SIGN * tau.powi(3))));
    Ok(spectral_norm(&(log_u - target)))
}

/// Ratios `E(tau/2^(i+1)) / E(tau/2^i)` over `halvings` successive halvings,
/// starting from the `tau` where the larger of `||tau H_HF||`, `||tau H_D||`
/// equals `start`.
pub fn bch_scaling_ratios(spec: &SystemSpec, start: f64, halvings: usize) -> Result<Vec<f64>> {
    let h = spectral_norm(&build_hyperfine(spec)).max(spectral_norm(&build_dipolar(spec)));
    if h <= 0.0 {
        return Err(Error::Degenerate("zero couplings".into()));
    }
    let mut tau = start / h;
    let mut prev = bch_residual(spec, tau)?;
    let mut ratios = Vec::with_capacity(halvings);
    for _ in 0..halvings {
        tau /= 2.0;
        let e = bch_residual(spec, tau)?;
        ratios.push(e / prev);
        prev = e;
    }
    Ok(ratios)
}
