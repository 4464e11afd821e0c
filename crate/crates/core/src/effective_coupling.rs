//! The induced cross-node nuclear coupling.
//!
//! The double commutator `[[H_D, H_HF], H_HF]` of the dipolar and hyperfine
//! terms carries an electron flip-flop times a sum of two-body couplings
//! between nucleus `l` of node 1 and nucleus `m` of node 2. Each pair coupling
//! is written in the dipolar alphabet; pairs with `l != m` are removed by
//! sign-patterned nuclear inversions.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::{
    commutator, dagger, embed, embed_many, identity, lowering, max_abs, pauli, raising, zeros,
    Operator, PauliAxis,
};
use crate::spin_system::{build_dipolar, build_hyperfine, norm3, SystemSpec};

/// `[[H_D, H_HF], H_HF]` by direct matrix algebra.
pub fn double_commutator_channel(spec: &SystemSpec) -> Operator {
    let hd = build_dipolar(spec);
    let hf = build_hyperfine(spec);
    let inner = commutator(&hd, &hf).expect("same register");
    commutator(&inner, &hf).expect("same register")
}

/// Electron flip-flop `|up down><down up| + h.c.` built from unit ladder
/// operators.
pub fn flip_flop(spec: &SystemSpec) -> Operator {
    let n = spec.n_sites();
    let (up, down) = (raising(), lowering());
    embed_many(&[(0, &up), (1, &down)], n).expect("electron sites")
        + embed_many(&[(0, &down), (1, &up)], n).expect("electron sites")
}

/// Largest matrix element of `op` outside the electron flip-flop blocks
/// (`|up down> <-> |down up>`), for any nuclear configuration.
pub fn off_flip_flop_residual(op: &Operator, spec: &SystemSpec) -> f64 {
    let shift = 2 * spec.k();
    let (ud, du) = (0b01usize, 0b10usize);
    let mut r: f64 = 0.0;
    for ((row, col), v) in op.indexed_iter() {
        let (er, ec) = (row >> shift, col >> shift);
        let allowed = (er == ud && ec == du) || (er == du && ec == ud);
        if !allowed {
            r = r.max(v.norm());
        }
    }
    r
}

/// The six dipolar-alphabet terms coupling nucleus `l` of node 1 to nucleus
/// `m` of node 2, each on the full register.
///
/// Ladder operators follow `sigma_+- = sigma_x +- i sigma_y`; products of two
/// ladders carry 1/4 and a ladder times `sigma_z` carries 1/2, so the six
/// terms add up to `(A^l . sigma^{n1l}) (A^m . sigma^{n2m})`.
#[derive(Debug, Clone)]
pub struct AlphabetTerms {
    pub a_term: Operator,
    pub b_term: Operator,
    pub c_term: Operator,
    pub d_term: Operator,
    pub e_term: Operator,
    pub f_term: Operator,
}

impl AlphabetTerms {
    pub fn sum(&self) -> Operator {
        &self.a_term + &self.b_term + &self.c_term + &self.d_term + &self.e_term + &self.f_term
    }
}

/// Scalar prefactors of the alphabet as functions of two hyperfine vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphabetPrefactors {
    /// `A_z^l A_z^m`.
    pub a: f64,
    /// `A_x^l A_x^m + A_y^l A_y^m`.
    pub b_symmetric: f64,
    /// `A_x^l A_y^m - A_y^l A_x^m`.
    pub b_antisymmetric: f64,
    /// `A_x^l A_z^m - i A_y^l A_z^m`, multiplies `sigma_+ sigma_z`.
    pub c_left: C64,
    /// `A_z^l A_x^m - i A_z^l A_y^m`, multiplies `sigma_z sigma_+`.
    pub c_right: C64,
    /// `A_x^l A_x^m - A_y^l A_y^m - i A_x^l A_y^m - i A_y^l A_x^m`.
    pub e: C64,
}

impl AlphabetPrefactors {
    pub fn new(al: [f64; 3], am: [f64; 3]) -> Self {
        let [xl, yl, zl] = al;
        let [xm, ym, zm] = am;
        Self {
            a: zl * zm,
            b_symmetric: xl * xm + yl * ym,
            b_antisymmetric: xl * ym - yl * xm,
            c_left: C64::new(xl * zm, -yl * zm),
            c_right: C64::new(zl * xm, -zl * ym),
            e: C64::new(xl * xm - yl * ym, -(xl * ym + yl * xm)),
        }
    }
}

/// Dipolar alphabet for the cross-node pair `(l, m)`, 0-based nuclear indices.
pub fn dipolar_alphabet(spec: &SystemSpec, l: usize, m: usize) -> Result<AlphabetTerms> {
    let k = spec.k();
    if l >= k || m >= k {
        return Err(Error::InvalidInput(format!(
            "nuclear index pair ({l}, {m}) out of range for k = {k}"
        )));
    }
    let n = spec.n_sites();
    let (s1, s2) = (spec.nuclear_site(0, l), spec.nuclear_site(1, m));
    let p = PrefactorsOps::new();
    let pair =
        |a: &Operator, b: &Operator| embed_many(&[(s1, a), (s2, b)], n).expect("nuclear sites");
    let pf = AlphabetPrefactors::new(spec.hyperfine[l], spec.hyperfine[m]);
    let i = C64::new(0.0, 1.0);

    let a_term = pair(&p.z, &p.z) * pf.a;
    let pm = pair(&p.plus, &p.minus);
    let mp = pair(&p.minus, &p.plus);
    let b_term =
        (&pm + &mp) * (0.25 * pf.b_symmetric) + (&pm - &mp) * (i * 0.25 * pf.b_antisymmetric);
    let c_term = pair(&p.plus, &p.z) * (pf.c_left * 0.5) + pair(&p.z, &p.plus) * (pf.c_right * 0.5);
    let e_term = pair(&p.plus, &p.plus) * (pf.e * 0.25);
    let d_term = dagger(&c_term);
    let f_term = dagger(&e_term);
    Ok(AlphabetTerms {
        a_term,
        b_term,
        c_term,
        d_term,
        e_term,
        f_term,
    })
}

struct PrefactorsOps {
    z: Operator,
    plus: Operator,
    minus: Operator,
}

impl PrefactorsOps {
    fn new() -> Self {
        Self {
            z: pauli(PauliAxis::Z),
            plus: pauli(PauliAxis::Plus),
            minus: pauli(PauliAxis::Minus),
        }
    }
}

/// `H_D^{lm}`: the summed alphabet for one cross-node pair.
pub fn pair_coupling(spec: &SystemSpec, l: usize, m: usize) -> Result<Operator> {
    Ok(dipolar_alphabet(spec, l, m)?.sum())
}

/// Sum of all `H_D^{lm}`.
pub fn cross_node_coupling(spec: &SystemSpec) -> Operator {
    let (par, cross) = split_parallel_cross(spec);
    par + cross
}

/// Split the pair couplings into identical-index (`l == m`) and cross-index
/// (`l != m`) sums.
pub fn split_parallel_cross(spec: &SystemSpec) -> (Operator, Operator) {
    let mut parallel = zeros(spec.dim());
    let mut cross = zeros(spec.dim());
    for l in 0..spec.k() {
        for m in 0..spec.k() {
            let h = pair_coupling(spec, l, m).expect("indices in range");
            if l == m {
                parallel = parallel + h;
            } else {
                cross = cross + h;
            }
        }
    }
    (parallel, cross)
}

/// Sign patterns for inversion cycles: one sign per nuclear index, applied
/// to that nucleus in both nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InversionPattern {
    pub cycles: Vec<Vec<i8>>,
}

impl InversionPattern {
    /// Checks cycle lengths and sign values against `k` nuclei.
    pub fn check_shape(&self, k: usize) -> Result<()> {
        if self.cycles.is_empty() {
            return Err(Error::InvalidInput(
                "inversion pattern has no cycles".into(),
            ));
        }
        for c in &self.cycles {
            if c.len() != k {
                return Err(Error::InvalidInput(format!(
                    "inversion cycle has {} signs, expected {k}",
                    c.len()
                )));
            }
            if c.iter().any(|&s| s != 1 && s != -1) {
                return Err(Error::InvalidInput(
                    "inversion signs must be +1 or -1".into(),
                ));
            }
        }
        Ok(())
    }

    /// Shape check plus the refocusing condition: every pair of distinct
    /// columns is orthogonal over the cycles.
    pub fn validate(&self, k: usize) -> Result<()> {
        self.check_shape(k)?;
        for l in 0..k {
            for m in (l + 1)..k {
                let s: i32 = self.cycles.iter().map(|c| (c[l] * c[m]) as i32).sum();
                if s != 0 {
                    return Err(Error::InvalidInput(format!(
                        "columns {l} and {m} are not balanced (sum {s})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// First `k` columns of the Sylvester-Hadamard matrix of order
/// `2^ceil(log2 k)`.
pub fn inversion_pattern(k: usize) -> InversionPattern {
    let order = k.max(1).next_power_of_two();
    let cycles = (0..order)
        .map(|row| {
            (0..k)
                .map(|col| {
                    if (row & col).count_ones() % 2 == 0 {
                        1
                    } else {
                        -1
                    }
                })
                .collect()
        })
        .collect();
    InversionPattern { cycles }
}

/// Axis of the inversion pulse for hyperfine vector `a`: `a x z` normalized,
/// or `x` when `a` is parallel to `z`.
pub fn inversion_axis(a: [f64; 3]) -> [f64; 3] {
    let cross = [a[1], -a[0], 0.0];
    let n = norm3(&cross);
    if n <= 1e-12 * norm3(&a) || n == 0.0 {
        [1.0, 0.0, 0.0]
    } else {
        cross.map(|v| v / n)
    }
}

/// Ideal pi rotation (up to global phase) inverting nucleus `j` in both nodes.
pub fn inversion_pulse(spec: &SystemSpec, j: usize) -> Operator {
    let axis = inversion_axis(spec.hyperfine[j]);
    let mut rot = zeros(2);
    for (ax, c) in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z]
        .into_iter()
        .zip(axis)
    {
        rot = rot + pauli(ax) * c;
    }
    let n = spec.n_sites();
    embed(&rot, spec.nuclear_site(0, j), n)
        .expect("site")
        .dot(&embed(&rot, spec.nuclear_site(1, j), n).expect("site"))
}

/// Zeroth-order average of the summed pair couplings over the inversion
/// cycles: `1/N sum_s P_s H P_s^dagger`.
pub fn refocused_average(spec: &SystemSpec, pattern: &InversionPattern) -> Result<Operator> {
    pattern.check_shape(spec.k()).map_err(|e| match e {
        Error::InvalidInput(msg) => {
            Error::InvalidInput(format!("pattern does not fit spec: {msg}"))
        }
        other => other,
    })?;
    let h = cross_node_coupling(spec);
    let pulses: Vec<Operator> = (0..spec.k()).map(|j| inversion_pulse(spec, j)).collect();
    let mut acc: Array2<C64> = zeros(spec.dim());
    for cycle in &pattern.cycles {
        let mut p = identity(spec.dim());
        for (j, &s) in cycle.iter().enumerate() {
            if s == -1 {
                p = p.dot(&pulses[j]);
            }
        }
        acc = acc + p.dot(&h).dot(&dagger(&p));
    }
    Ok(acc * (1.0 / pattern.cycles.len() as f64))
}

/// Relative residual between the refocused average and the identical-index
/// couplings.
pub fn refocusing_residual(spec: &SystemSpec) -> Result<f64> {
    let avg = refocused_average(spec, &inversion_pattern(spec.k()))?;
    let (par, _) = split_parallel_cross(spec);
    Ok(max_abs(&(avg - &par)) / max_abs(&par).max(f64::MIN_POSITIVE))
}
