//! Liouville-space channels in the column-stacking convention.
//!
//! A Kronecker term `P kron Q` acts as `rho -> Q rho P^T`, so the Liouvillian
//! of `H` is `1 kron H - H^T kron 1` and `L vec(rho) = vec([H, rho])`.
//! Evolution under `H` for time `t` is `exp(-i t L)`.

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::{
    embed, expm, identity, kron, pauli, raising, Operator, PauliAxis, SuperOp, I, ONE,
};
use crate::sequences::{Generator, PulseSequence};
use crate::spin_system::{build_microwave, NoiseParams, SystemSpec};

/// `(Gamma_1, Gamma_2) = (1/T1, (2 T1 - T2)/(T1 T2))`.
pub fn gammas_from_times(noise: &NoiseParams) -> Result<(f64, f64)> {
    noise.validate()?;
    let NoiseParams { t1, t2 } = *noise;
    if t1.is_infinite() {
        return Ok((0.0, 2.0 / t2));
    }
    Ok((1.0 / t1, (2.0 * t1 - t2) / (t1 * t2)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipatorParams {
    pub gamma1: f64,
    pub gamma2: f64,
    /// Node of the electron, 0 or 1.
    pub electron: usize,
}

impl DissipatorParams {
    pub fn from_noise(noise: &NoiseParams, electron: usize) -> Result<Self> {
        let (gamma1, gamma2) = gammas_from_times(noise)?;
        Ok(Self {
            gamma1,
            gamma2,
            electron,
        })
    }
}

pub fn liouvillian(h: &Operator) -> SuperOp {
    let d = h.nrows();
    let id = identity(d);
    kron(&id, h) - kron(&h.t().to_owned(), &id)
}

/// Superoperator of `rho -> u rho u^dagger`.
pub fn unitary_superop(u: &Operator) -> SuperOp {
    kron(&u.mapv(|z| z.conj()), u)
}

/// Amplitude and phase damping of one spin-1/2:
/// `-(G1 + G2)/2 (E- kron 1 + 1 kron E-) + G1 s kron s + G2 E- kron E-`,
/// with `s = |0><1|` the unit raising operator. Population of `|1>` decays at
/// `G1` and coherences at `(G1 + G2)/2`.
pub fn single_spin_dissipator(gamma1: f64, gamma2: f64) -> SuperOp {
    dissipator_terms(
        &pauli(PauliAxis::EMinus),
        &raising(),
        &identity(2),
        gamma1,
        gamma2,
    )
}

fn dissipator_terms(em: &Operator, up: &Operator, id: &Operator, g1: f64, g2: f64) -> SuperOp {
    (kron(em, id) + kron(id, em)) * (-0.5 * (g1 + g2))
        + kron(&up.mapv(|z| z.conj()), up) * g1
        + kron(em, em) * g2
}

/// Single-electron dissipator embedded on the full Liouville space.
pub fn electron_dissipator(params: &DissipatorParams, spec: &SystemSpec) -> Result<SuperOp> {
    if params.electron > 1 {
        return Err(Error::InvalidInput(format!(
            "electron index {} (expected 0 or 1)",
            params.electron
        )));
    }
    if !(params.gamma1 >= 0.0 && params.gamma2 >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "negative relaxation rates ({}, {})",
            params.gamma1, params.gamma2
        )));
    }
    let n = spec.n_sites();
    let site = spec.electron_site(params.electron);
    let em = embed(&pauli(PauliAxis::EMinus), site, n)?;
    let up = embed(&raising(), site, n)?;
    Ok(dissipator_terms(
        &em,
        &up,
        &identity(spec.dim()),
        params.gamma1,
        params.gamma2,
    ))
}

/// Both electron dissipators for the given noise.
pub fn noise_generator(noise: &NoiseParams, spec: &SystemSpec) -> Result<SuperOp> {
    let d1 = electron_dissipator(&DissipatorParams::from_noise(noise, 0)?, spec)?;
    let d2 = electron_dissipator(&DissipatorParams::from_noise(noise, 1)?, spec)?;
    Ok(d1 + d2)
}

/// Electron basis index of `|down down>`; `|down>` is basis index 1.
const ELECTRONS_DOWN: usize = 0b11;

/// `vec(rho_n) -> vec(|down down><down down| kron rho_n)`.
pub fn prep_superop(spec: &SystemSpec) -> SuperOp {
    let dn = spec.nuclear_dim();
    let full = spec.dim();
    let off = ELECTRONS_DOWN * dn;
    let mut s = Array2::zeros((full * full, dn * dn));
    for j in 0..dn {
        for i in 0..dn {
            s[((off + j) * full + off + i, j * dn + i)] = ONE;
        }
    }
    s
}

/// Partial trace over both electrons.
pub fn trace_superop(spec: &SystemSpec) -> SuperOp {
    let dn = spec.nuclear_dim();
    let full = spec.dim();
    let mut s = Array2::zeros((dn * dn, full * full));
    for e in 0..4 {
        for j in 0..dn {
            for i in 0..dn {
                let (r, c) = (e * dn + i, e * dn + j);
                s[(j * dn + i, c * full + r)] = ONE;
            }
        }
    }
    s
}

/// `trace . s_full . prep`.
pub fn restrict_to_nuclei(spec: &SystemSpec, s_full: &SuperOp) -> SuperOp {
    trace_superop(spec).dot(s_full).dot(&prep_superop(spec))
}

/// Nuclear-space channel of a pulse sequence.
///
/// Every segment is generated by `-i sign L_gen`, plus `-i L_mw` when the
/// microwave drive is on, plus both electron dissipators when `noise` is
/// given and the segment is marked noisy. Segments with identical generator
/// reuse one exponential.
pub fn channel_superop(
    seq: &PulseSequence,
    spec: &SystemSpec,
    noise: Option<&NoiseParams>,
    with_microwave: bool,
) -> Result<SuperOp> {
    seq.validate()?;
    let ld = spec.dim() * spec.dim();
    let dissipator = noise.map(|n| noise_generator(n, spec)).transpose()?;
    let drive = if with_microwave {
        Some(liouvillian(&build_microwave(spec)?).mapv(|z| z * -I))
    } else {
        None
    };

    let mut liouvillians: HashMap<Generator, SuperOp> = HashMap::new();
    let mut steps: HashMap<(Generator, i8, u64, bool), SuperOp> = HashMap::new();
    let mut total: SuperOp = identity(ld);
    for seg in &seq.segments {
        let noisy = dissipator.is_some() && seg.with_noise;
        let key = (seg.generator, seg.sign, seg.duration.to_bits(), noisy);
        if let Entry::Vacant(slot) = steps.entry(key) {
            let l = match liouvillians.entry(seg.generator) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(liouvillian(&seg.generator.hamiltonian(spec)?)),
            };
            let mut g = l.mapv(|z| z * (-I * seg.sign as f64));
            if let Some(d) = &drive {
                g += d;
            }
            if noisy {
                g += dissipator.as_ref().expect("noisy implies dissipator");
            }
            if g.dim() != (ld, ld) {
                return Err(Error::DimensionMismatch(format!(
                    "segment generator {:?} vs Liouville dim {ld}",
                    g.dim()
                )));
            }
            slot.insert(expm(&g.mapv(|z| z * seg.duration))?);
        }
        total = steps[&key].dot(&total);
    }
    Ok(restrict_to_nuclei(spec, &total))
}

/// Choi matrix `sum_ij |i><j| kron S(|i><j|)` of a square superoperator on
/// `d x d` operators.
pub fn choi_matrix(s: &SuperOp) -> Result<Operator> {
    let d = hilbert_dim(s)?;
    let dim = d * d;
    Ok(Array2::from_shape_fn((dim, dim), |(r, c)| {
        let (i, a) = (r / d, r % d);
        let (j, b) = (c / d, c % d);
        s[(b * d + a, j * d + i)]
    }))
}

/// Hilbert dimension `d` with `d^2 = s.nrows()`, for square superoperators.
pub fn hilbert_dim(s: &SuperOp) -> Result<usize> {
    let dim = s.nrows();
    let d = (dim as f64).sqrt().round() as usize;
    if s.ncols() != dim || d * d != dim {
        return Err(Error::DimensionMismatch(format!(
            "superoperator of shape {:?} is not square on a Liouville space",
            s.dim()
        )));
    }
    Ok(d)
}

pub(crate) fn vec_identity(d: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        v[i * d + i] = ONE;
    }
    v
}
