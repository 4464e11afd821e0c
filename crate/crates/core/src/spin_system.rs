//! Two identical nodes, each one electron coupled to `k` nuclei, and the
//! rotating-frame Hamiltonians acting on them.
//!
//! Site ordering is `[e1, e2, n11 .. n1k, n21 .. n2k]`. All frequencies held
//! by [`SystemSpec`] are angular (rad/s); the text form uses Hz.

use std::f64::consts::TAU;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{embed, embed_many, identity, pauli, zeros, NormKind, Operator, PauliAxis};

/// Physical description of a 2x(1e-kn) system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    /// Hyperfine vector `(A_x, A_y, A_z)` per nuclear index, shared by both nodes.
    pub hyperfine: Vec<[f64; 3]>,
    /// Nuclear Zeeman frequency per nuclear index.
    pub nuclear_zeeman: Vec<f64>,
    /// Electron-electron dipolar strength.
    pub dipolar: f64,
    /// Microwave Rabi frequency.
    pub rabi: f64,
    /// Norm used when reading coupling strengths off operators (tau
    /// selection, serial-swap timing).
    pub norm: NormKind,
}

impl Default for SystemSpec {
    /// One nucleus per node: `omega_d/2pi = 1 MHz`, `A/2pi = (20, 0, 60) MHz`,
    /// `omega_z/2pi = 1 MHz`, `omega_1/2pi = 100 MHz`.
    fn default() -> Self {
        Self {
            hyperfine: vec![[20e6 * TAU, 0.0, 60e6 * TAU]],
            nuclear_zeeman: vec![1e6 * TAU],
            dipolar: 1e6 * TAU,
            rabi: 100e6 * TAU,
            norm: NormKind::Spectral,
        }
    }
}

impl SystemSpec {
    /// Default parameters with a second nucleus `A/2pi = (35, 0, 15) MHz`.
    pub fn default_two_nuclei() -> Self {
        let mut s = Self::default();
        s.hyperfine.push([35e6 * TAU, 0.0, 15e6 * TAU]);
        s.nuclear_zeeman.push(1e6 * TAU);
        s
    }

    /// Spec with the given hyperfine vectors, zero Zeeman and microwave terms.
    pub fn with_couplings(dipolar: f64, hyperfine: Vec<[f64; 3]>) -> Self {
        let k = hyperfine.len();
        Self {
            hyperfine,
            nuclear_zeeman: vec![0.0; k],
            dipolar,
            rabi: 0.0,
            norm: NormKind::Spectral,
        }
    }

    pub fn k(&self) -> usize {
        self.hyperfine.len()
    }

    pub fn n_sites(&self) -> usize {
        2 + 2 * self.k()
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites()
    }

    /// Hilbert dimension of the nuclear registers of both nodes.
    pub fn nuclear_dim(&self) -> usize {
        1 << (2 * self.k())
    }

    pub fn electron_site(&self, node: usize) -> usize {
        debug_assert!(node < 2);
        node
    }

    /// Site of nucleus `j` (0-based) in `node` (0 or 1).
    pub fn nuclear_site(&self, node: usize, j: usize) -> usize {
        debug_assert!(node < 2 && j < self.k());
        2 + node * self.k() + j
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k == 0 {
            return Err(Error::InvalidInput(
                "at least one nucleus per node is required".into(),
            ));
        }
        if self.nuclear_zeeman.len() != k {
            return Err(Error::InvalidInput(format!(
                "{} hyperfine vectors but {} nuclear Zeeman frequencies",
                k,
                self.nuclear_zeeman.len()
            )));
        }
        let finite = self
            .hyperfine
            .iter()
            .flatten()
            .chain(&self.nuclear_zeeman)
            .chain([&self.dipolar, &self.rabi])
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("non-finite coupling".into()));
        }
        let mags: Vec<f64> = self.hyperfine.iter().map(norm3).collect();
        for i in 0..k {
            for j in (i + 1)..k {
                if (mags[i] - mags[j]).abs() <= 1e-9 * mags[i].max(mags[j]) {
                    warn!("hyperfine couplings {i} and {j} have equal magnitude; nuclei are not spectrally resolved");
                }
            }
        }
        Ok(())
    }

    fn site_op(&self, axis: PauliAxis, site: usize) -> Operator {
        embed(&pauli(axis), site, self.n_sites()).expect("site within register")
    }

    /// `A . sigma` on one nucleus.
    pub fn hyperfine_vector_op(&self, node: usize, j: usize) -> Operator {
        let a = self.hyperfine[j];
        let site = self.nuclear_site(node, j);
        let mut op = zeros(self.dim());
        for (axis, comp) in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z]
            .into_iter()
            .zip(a)
        {
            if comp != 0.0 {
                op = op + self.site_op(axis, site) * comp;
            }
        }
        op
    }
}

pub(crate) fn norm3(a: &[f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Electron relaxation times, shared by both electrons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub t1: f64,
    pub t2: f64,
}

impl NoiseParams {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        let n = Self { t1, t2 };
        n.validate()?;
        Ok(n)
    }

    /// `T1 = T2 = t`.
    pub fn uniform(t: f64) -> Result<Self> {
        Self::new(t, t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1 > 0.0) {
            return Err(Error::InvalidNoise {
                field: "t1",
                reason: format!("must be positive, got {}", self.t1),
            });
        }
        if !(self.t2 > 0.0) {
            return Err(Error::InvalidNoise {
                field: "t2",
                reason: format!("must be positive, got {}", self.t2),
            });
        }
        if self.t2 > 2.0 * self.t1 {
            return Err(Error::InvalidNoise {
                field: "t2",
                reason: format!(
                    "t2 = {} exceeds 2*t1 = {} (negative dephasing rate)",
                    self.t2,
                    2.0 * self.t1
                ),
            });
        }
        Ok(())
    }
}

/// `sum_k omega_z^k (sigma_z^{n1k} + sigma_z^{n2k})`.
pub fn build_nuclear_zeeman(spec: &SystemSpec) -> Operator {
    let mut h = zeros(spec.dim());
    for (j, &w) in spec.nuclear_zeeman.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for node in 0..2 {
            h = h + spec.site_op(PauliAxis::Z, spec.nuclear_site(node, j)) * w;
        }
    }
    h
}

/// `omega_d (2 zz - xx - yy)` on the two electrons.
pub fn build_dipolar(spec: &SystemSpec) -> Operator {
    let n = spec.n_sites();
    let pair = |axis| {
        let p = pauli(axis);
        embed_many(&[(0, &p), (1, &p)], n).expect("electron sites")
    };
    (pair(PauliAxis::Z) * 2.0 - pair(PauliAxis::X) - pair(PauliAxis::Y)) * spec.dipolar
}

/// `sum_k A^k . (sigma_z^{e1} sigma^{n1k} + sigma_z^{e2} sigma^{n2k})`.
pub fn build_hyperfine(spec: &SystemSpec) -> Operator {
    let mut h = zeros(spec.dim());
    for node in 0..2 {
        let ze = spec.site_op(PauliAxis::Z, spec.electron_site(node));
        let mut field = zeros(spec.dim());
        for j in 0..spec.k() {
            field = field + spec.hyperfine_vector_op(node, j);
        }
        h = h + ze.dot(&field);
    }
    h
}

/// Selective microwave drive
/// `omega_1 (sigma_x^{e1} + sigma_x^{e2}) (E+^{n1} E-^{n2} + E-^{n1} E+^{n2})`.
///
/// Only defined for one nucleus per node.
pub fn build_microwave(spec: &SystemSpec) -> Result<Operator> {
    if spec.k() != 1 {
        return Err(Error::Unsupported(format!(
            "microwave drive is defined for one nucleus per node, got k = {}",
            spec.k()
        )));
    }
    let n = spec.n_sites();
    let (ep, em) = (pauli(PauliAxis::EPlus), pauli(PauliAxis::EMinus));
    let (n1, n2) = (spec.nuclear_site(0, 0), spec.nuclear_site(1, 0));
    let proj = embed_many(&[(n1, &ep), (n2, &em)], n)? + embed_many(&[(n1, &em), (n2, &ep)], n)?;
    let drive = spec.site_op(PauliAxis::X, 0) + spec.site_op(PauliAxis::X, 1);
    Ok(drive.dot(&proj) * spec.rabi)
}

/// Rotating-frame Hamiltonian: nuclear Zeeman + hyperfine + dipolar. The
/// electron Zeeman term is removed by the frame.
pub fn total_hamiltonian(spec: &SystemSpec) -> Operator {
    build_nuclear_zeeman(spec) + build_hyperfine(spec) + build_dipolar(spec)
}

/// Isotropic exchange `1/2 sigma^a . sigma^b - 1` between two sites.
pub fn heisenberg_exchange(a: usize, b: usize, n_sites: usize) -> Result<Operator> {
    if a == b {
        return Err(Error::InvalidInput(format!(
            "exchange needs two distinct sites, got {a} twice"
        )));
    }
    let mut h = identity(1 << n_sites) * -1.0;
    for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
        let p = pauli(axis);
        h = h + embed_many(&[(a, &p), (b, &p)], n_sites)? * 0.5;
    }
    Ok(h)
}

/// On-disk form of [`SystemSpec`]; every frequency in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub dipolar_hz: f64,
    pub rabi_hz: f64,
    #[serde(default)]
    pub norm: NormKind,
    pub nucleus: Vec<NucleusFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NucleusFile {
    pub hyperfine_hz: [f64; 3],
    #[serde(default)]
    pub zeeman_hz: f64,
}

impl From<&SystemSpec> for SystemFile {
    fn from(s: &SystemSpec) -> Self {
        Self {
            dipolar_hz: s.dipolar / TAU,
            rabi_hz: s.rabi / TAU,
            norm: s.norm,
            nucleus: s
                .hyperfine
                .iter()
                .zip(&s.nuclear_zeeman)
                .map(|(a, z)| NucleusFile {
                    hyperfine_hz: a.map(|v| v / TAU),
                    zeeman_hz: z / TAU,
                })
                .collect(),
        }
    }
}

impl TryFrom<SystemFile> for SystemSpec {
    type Error = Error;

    fn try_from(f: SystemFile) -> Result<Self> {
        let spec = SystemSpec {
            hyperfine: f
                .nucleus
                .iter()
                .map(|n| n.hyperfine_hz.map(|v| v * TAU))
                .collect(),
            nuclear_zeeman: f.nucleus.iter().map(|n| n.zeeman_hz * TAU).collect(),
            dipolar: f.dipolar_hz * TAU,
            rabi: f.rabi_hz * TAU,
            norm: f.norm,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl SystemSpec {
    pub fn to_toml_string(&self) -> String {
        toml::to_string(&SystemFile::from(self)).expect("system spec serializes")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let f: SystemFile = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        f.try_into()
    }
}
