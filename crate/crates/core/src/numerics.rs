//! Dense complex matrix substrate.
//!
//! Operators live on a tensor product of spin-1/2 sites. Site 0 is the
//! leftmost Kronecker factor, so in an `n`-site basis index the bit for site 0
//! is the most significant one. Basis state `|0>` is the `+1` eigenvector of
//! `sigma_z` and `|1>` the `-1` eigenvector.
//!
//! Liouville space uses column stacking: entry `rho[(i, j)]` of a `d x d`
//! operator lands at position `j * d + i` of `vec(rho)`, and
//! `(B^T kron A) vec(rho) = vec(A rho B)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use ndarray::{linalg::kron as nd_kron, Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Dense operator on a (tensor-product) Hilbert space.
pub type Operator = Array2<C64>;

/// Dense superoperator on Liouville space, possibly rectangular.
pub type SuperOp = Array2<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Single-site operator labels.
///
/// `Plus`/`Minus` follow the `sigma_x +/- i sigma_y` convention, so they carry
/// a factor of two relative to the unit ladder operators returned by
/// [`raising`] and [`lowering`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliAxis {
    X,
    Y,
    Z,
    Plus,
    Minus,
    Identity,
    /// Projector `|0><0|`.
    EPlus,
    /// Projector `|1><1|`.
    EMinus,
}

impl FromStr for PauliAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Self::X),
            "y" => Ok(Self::Y),
            "z" => Ok(Self::Z),
            "plus" | "+" => Ok(Self::Plus),
            "minus" | "-" => Ok(Self::Minus),
            "identity" | "i" | "id" => Ok(Self::Identity),
            "e_plus" => Ok(Self::EPlus),
            "e_minus" => Ok(Self::EMinus),
            other => Err(Error::InvalidInput(format!("unknown pauli axis `{other}`"))),
        }
    }
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::X => "x",
            Self::Y => "y",
            Self::Z => "z",
            Self::Plus => "plus",
            Self::Minus => "minus",
            Self::Identity => "identity",
            Self::EPlus => "e_plus",
            Self::EMinus => "e_minus",
        };
        f.write_str(s)
    }
}

fn mat2(a: C64, b: C64, c: C64, d: C64) -> Operator {
    Array2::from_shape_vec((2, 2), vec![a, b, c, d]).expect("2x2 shape")
}

pub fn pauli(axis: PauliAxis) -> Operator {
    let two = C64::new(2.0, 0.0);
    match axis {
        PauliAxis::X => mat2(ZERO, ONE, ONE, ZERO),
        PauliAxis::Y => mat2(ZERO, -I, I, ZERO),
        PauliAxis::Z => mat2(ONE, ZERO, ZERO, -ONE),
        PauliAxis::Plus => mat2(ZERO, two, ZERO, ZERO),
        PauliAxis::Minus => mat2(ZERO, ZERO, two, ZERO),
        PauliAxis::Identity => mat2(ONE, ZERO, ZERO, ONE),
        PauliAxis::EPlus => mat2(ONE, ZERO, ZERO, ZERO),
        PauliAxis::EMinus => mat2(ZERO, ZERO, ZERO, ONE),
    }
}

/// Unit raising operator `|0><1|` (moves weight from the `sigma_z = -1` state up).
pub fn raising() -> Operator {
    mat2(ZERO, ONE, ZERO, ZERO)
}

/// Unit lowering operator `|1><0|`.
pub fn lowering() -> Operator {
    mat2(ZERO, ZERO, ONE, ZERO)
}

pub fn identity(d: usize) -> Operator {
    Array2::eye(d)
}

pub fn zeros(d: usize) -> Operator {
    Array2::zeros((d, d))
}

pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    nd_kron(a, b)
}

/// Place a single-site operator on `site` of an `n_sites` register.
pub fn embed(op: &Operator, site: usize, n_sites: usize) -> Result<Operator> {
    if op.dim() != (2, 2) {
        return Err(Error::InvalidInput(format!(
            "embed expects a 2x2 operator, got {:?}",
            op.dim()
        )));
    }
    if site >= n_sites {
        return Err(Error::InvalidInput(format!(
            "site {site} out of range for {n_sites} sites"
        )));
    }
    let left = identity(1 << site);
    let right = identity(1 << (n_sites - site - 1));
    Ok(kron(&kron(&left, op), &right))
}

/// Product of single-site operators on distinct sites, identity elsewhere.
pub fn embed_many(ops: &[(usize, &Operator)], n_sites: usize) -> Result<Operator> {
    let mut factors: Vec<Option<&Operator>> = vec![None; n_sites];
    for &(site, op) in ops {
        if site >= n_sites {
            return Err(Error::InvalidInput(format!(
                "site {site} out of range for {n_sites} sites"
            )));
        }
        if op.dim() != (2, 2) {
            return Err(Error::InvalidInput(
                "embed_many expects 2x2 operators".into(),
            ));
        }
        if factors[site].is_some() {
            return Err(Error::InvalidInput(format!("site {site} given twice")));
        }
        factors[site] = Some(op);
    }
    let id2 = identity(2);
    let mut out = identity(1);
    for f in factors {
        out = kron(&out, f.unwrap_or(&id2));
    }
    Ok(out)
}

pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    if a.dim() != b.dim() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "commutator of {:?} and {:?}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.dot(b) - b.dot(a))
}

pub fn trace(m: &Array2<C64>) -> C64 {
    m.diag().sum()
}

pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |M - M^dagger|`.
pub fn hermiticity_residual(m: &Operator) -> f64 {
    let n = m.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

pub fn frobenius_norm(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Maximum absolute column sum.
pub fn one_norm(m: &Array2<C64>) -> f64 {
    m.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn to_nalgebra(m: &Array2<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Largest singular value.
pub fn spectral_norm(m: &Array2<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    to_nalgebra(m)
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle is
/// trusted; callers are expected to pass a Hermitian input.
pub fn hermitian_eigenvalues(m: &Operator) -> Vec<f64> {
    let mut ev: Vec<f64> = to_nalgebra(m)
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Matrix norm used where a scalar coupling strength is read off an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    #[default]
    Spectral,
    Frobenius,
}

impl NormKind {
    pub fn norm(self, m: &Operator) -> f64 {
        match self {
            NormKind::Spectral => spectral_norm(m),
            NormKind::Frobenius => frobenius_norm(m),
        }
    }
}

impl FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Self::Spectral),
            "frobenius" => Ok(Self::Frobenius),
            other => Err(Error::InvalidInput(format!("unknown norm `{other}`"))),
        }
    }
}

/// Column-stacking vectorization.
pub fn vec(rho: &Operator) -> Result<Array1<C64>> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::InvalidInput(format!(
            "vec expects a square operator, got {:?}",
            rho.dim()
        )));
    }
    Ok(rho.t().iter().cloned().collect())
}

/// Inverse of [`vec`].
pub fn unvec(v: &Array1<C64>, d: usize) -> Result<Operator> {
    if v.len() != d * d {
        return Err(Error::InvalidInput(format!(
            "unvec: length {} is not {d}^2",
            v.len()
        )));
    }
    Ok(Array2::from_shape_fn((d, d), |(i, j)| v[j * d + i]))
}

/// Solve `a x = b` by LU with partial pivoting.
pub fn solve(a: &Array2<C64>, b: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "solve: a is {:?}, b is {:?}",
            a.dim(),
            b.dim()
        )));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .fold((k, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        if pmax == 0.0 || !pmax.is_finite() {
            return Err(Error::Numerical("singular matrix in solve".into()));
        }
        if p != k {
            for j in 0..n {
                lu.swap((k, j), (p, j));
            }
            for j in 0..x.ncols() {
                x.swap((k, j), (p, j));
            }
        }
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let f = lu[(i, k)] / pivot;
            if f == ZERO {
                continue;
            }
            lu[(i, k)] = f;
            for j in (k + 1)..n {
                let t = lu[(k, j)];
                lu[(i, j)] -= f * t;
            }
            for j in 0..x.ncols() {
                let t = x[(k, j)];
                x[(i, j)] -= f * t;
            }
        }
    }
    for j in 0..x.ncols() {
        for i in (0..n).rev() {
            let mut s = x[(i, j)];
            for l in (i + 1)..n {
                s -= lu[(i, l)] * x[(l, j)];
            }
            x[(i, j)] = s / lu[(i, i)];
        }
    }
    Ok(x)
}

pub fn inverse(a: &Array2<C64>) -> Result<Array2<C64>> {
    solve(a, &identity(a.nrows()))
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Backward-error bounds on the 1-norm for each Pade degree (Higham 2005).
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

fn scaled(m: &Array2<C64>, c: f64) -> Array2<C64> {
    m.mapv(|z| z * c)
}

fn pade_low(a: &Array2<C64>, b: &[f64]) -> (Array2<C64>, Array2<C64>) {
    let n = a.nrows();
    let a2 = a.dot(a);
    let mut u = identity(n) * b[1];
    let mut v = identity(n) * b[0];
    let mut pow = identity(n);
    for k in 1..b.len() / 2 {
        pow = pow.dot(&a2);
        u = u + scaled(&pow, b[2 * k + 1]);
        v = v + scaled(&pow, b[2 * k]);
    }
    (a.dot(&u), v)
}

fn pade13(a: &Array2<C64>) -> (Array2<C64>, Array2<C64>) {
    let b = &PADE13;
    let n = a.nrows();
    let id = identity(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let inner_u = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    let u = a6.dot(&inner_u)
        + scaled(&a6, b[7])
        + scaled(&a4, b[5])
        + scaled(&a2, b[3])
        + scaled(&id, b[1]);
    let u = a.dot(&u);
    let inner_v = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    let v = a6.dot(&inner_v)
        + scaled(&a6, b[6])
        + scaled(&a4, b[4])
        + scaled(&a2, b[2])
        + scaled(&id, b[0]);
    (u, v)
}

/// Matrix exponential by scaling and squaring with a diagonal Pade
/// approximant (degree chosen from the 1-norm).
pub fn expm(m: &Array2<C64>) -> Result<Array2<C64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::InvalidInput(format!(
            "expm expects a square matrix, got {:?}",
            m.dim()
        )));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("expm: non-finite entries".into()));
    }
    if n == 0 {
        return Ok(m.clone());
    }
    let norm = one_norm(m);
    for &(deg, theta) in &THETA {
        if norm <= theta {
            let b: &[f64] = match deg {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let (u, v) = pade_low(m, b);
            return solve(&(&v - &u), &(&v + &u));
        }
    }
    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let a = scaled(m, 0.5f64.powi(s));
    let (u, v) = pade13(&a);
    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Principal matrix logarithm by inverse scaling and squaring.
///
/// Square roots come from the Denman-Beavers iteration; once the argument is
/// within 0.25 of the identity in 1-norm the Mercator series is summed to
/// convergence. Fails if the input has eigenvalues on or near the closed
/// negative real axis.
pub fn logm(m: &Array2<C64>) -> Result<Array2<C64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::InvalidInput("logm expects a square matrix".into()));
    }
    let id = identity(n);
    let mut a = m.clone();
    let mut roots = 0u32;
    while one_norm(&(&a - &id)) > 0.25 {
        if roots > 60 {
            return Err(Error::Numerical(
                "logm: square roots did not converge".into(),
            ));
        }
        a = sqrtm_db(&a)?;
        roots += 1;
    }
    let x = &a - &id;
    let mut term = x.clone();
    let mut acc = x.clone();
    for k in 2..200 {
        term = term.dot(&x);
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        let contrib = scaled(&term, sign / k as f64);
        acc += &contrib;
        if one_norm(&contrib) <= 1e-18 * one_norm(&acc).max(1e-300) {
            break;
        }
    }
    Ok(scaled(&acc, 2f64.powi(roots as i32)))
}

fn sqrtm_db(a: &Array2<C64>) -> Result<Array2<C64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = identity(n);
    for _ in 0..100 {
        let y_inv = inverse(&y)?;
        let z_inv = inverse(&z)?;
        let y_next = scaled(&(&y + &z_inv), 0.5);
        let z_next = scaled(&(&z + &y_inv), 0.5);
        let delta = one_norm(&(&y_next - &y));
        y = y_next;
        z = z_next;
        if delta <= 1e-15 * one_norm(&y) {
            return Ok(y);
        }
    }
    Err(Error::Numerical(
        "sqrtm: Denman-Beavers did not converge".into(),
    ))
}
