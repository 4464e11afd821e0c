//! Channel fidelities, CPTP diagnostics and noise-robustness sweeps.

use std::fmt::Write as _;

use log::{debug, warn};
use ndarray::Array1;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouville::{channel_superop, choi_matrix, hilbert_dim, vec_identity};
use crate::numerics::{hermitian_eigenvalues, hermiticity_residual, SuperOp};
use crate::sequences::{bch_sequence, select_tau, serial_swap_sequence, PulseSequence};
use crate::spin_system::{NoiseParams, SystemSpec};

/// Smallest infidelity resolved by [`neg_log10_infidelity`].
pub const INFIDELITY_FLOOR: f64 = 1e-15;

const IMAG_TOLERANCE: f64 = 1e-10;

pub const CSV_HEADER: &str =
    "t1_s,t2_s,fidelity_wqc,fidelity_swap,neg_log10_infid_wqc,neg_log10_infid_swap";

fn hs_inner(a: &SuperOp, b: &SuperOp) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidInput(format!(
            "superoperator shapes differ: {:?} vs {:?}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

fn real_part(z: C64, scale: f64) -> Result<f64> {
    if z.im.abs() > IMAG_TOLERANCE * scale.max(1.0) {
        return Err(Error::Numerical(format!(
            "fidelity has imaginary part {:.3e}",
            z.im / scale
        )));
    }
    Ok(z.re / scale)
}

/// `Re Tr(S_ideal^dagger S_noisy) / d^2` with `d` the Hilbert dimension.
pub fn process_fidelity(s_ideal: &SuperOp, s_noisy: &SuperOp) -> Result<f64> {
    let d = hilbert_dim(s_ideal)?;
    let scale = (d * d) as f64;
    real_part(hs_inner(s_ideal, s_noisy)?, scale)
}

/// `Re Tr(S_ideal^dagger S_noisy) / Tr(S_ideal^dagger S_ideal)`.
///
/// Equal to [`process_fidelity`] whenever the ideal channel is unitary, and
/// still 1 at zero noise when it is not.
pub fn relative_process_fidelity(s_ideal: &SuperOp, s_noisy: &SuperOp) -> Result<f64> {
    hilbert_dim(s_ideal)?;
    let norm = hs_inner(s_ideal, s_ideal)?.re;
    if norm <= 0.0 {
        return Err(Error::Degenerate("ideal channel is zero".into()));
    }
    real_part(hs_inner(s_ideal, s_noisy)?, norm)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FidelityMeasure {
    /// [`process_fidelity`].
    HilbertSchmidt,
    /// [`relative_process_fidelity`].
    #[default]
    Relative,
}

impl FidelityMeasure {
    pub fn evaluate(self, s_ideal: &SuperOp, s_noisy: &SuperOp) -> Result<f64> {
        match self {
            Self::HilbertSchmidt => process_fidelity(s_ideal, s_noisy),
            Self::Relative => relative_process_fidelity(s_ideal, s_noisy),
        }
    }
}

/// `-log10(1 - F)`, with the infidelity clamped below at [`INFIDELITY_FLOOR`].
pub fn neg_log10_infidelity(f: f64) -> f64 {
    -(1.0 - f).max(INFIDELITY_FLOOR).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CptpReport {
    /// `max |vec(I)^dagger S - vec(I)^dagger|`.
    pub trace_residual: f64,
    pub choi_min_eigenvalue: f64,
    /// `max |J - J^dagger|` of the Choi matrix `J`.
    pub hermiticity_residual: f64,
}

impl CptpReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.trace_residual <= tol
            && self.choi_min_eigenvalue >= -tol
            && self.hermiticity_residual <= tol
    }
}

pub fn cptp_report(s: &SuperOp) -> Result<CptpReport> {
    let d = hilbert_dim(s)?;
    let left = Array1::from(vec_identity(d));
    let row = left.dot(s);
    let trace_residual = row
        .iter()
        .zip(left.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let choi = choi_matrix(s)?;
    let hermiticity_residual = hermiticity_residual(&choi);
    let sym = (&choi + &choi.t().mapv(|z| z.conj())) * 0.5;
    let choi_min_eigenvalue = hermitian_eigenvalues(&sym).first().copied().unwrap_or(0.0);
    Ok(CptpReport {
        trace_residual,
        choi_min_eigenvalue,
        hermiticity_residual,
    })
}

/// The two protocols compared by a sweep.
#[derive(Debug, Clone)]
pub struct ProtocolSet {
    pub wqc: PulseSequence,
    pub swap: PulseSequence,
    /// Whether the microwave drive is on during the wqc segments.
    pub wqc_microwave: bool,
    pub fidelity: FidelityMeasure,
}

impl ProtocolSet {
    /// BCH cycle at the selected tau with the drive on, against the serial SWAP.
    pub fn standard(spec: &SystemSpec) -> Result<Self> {
        Ok(Self {
            wqc: bch_sequence(select_tau(spec)?)?,
            swap: serial_swap_sequence(spec)?,
            wqc_microwave: true,
            fidelity: FidelityMeasure::default(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub t1: f64,
    pub t2: f64,
    pub fidelity_wqc: f64,
    pub fidelity_swap: f64,
    pub neg_log10_infidelity_wqc: f64,
    pub neg_log10_infidelity_swap: f64,
    pub cptp_wqc: CptpReport,
    pub cptp_swap: CptpReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepFailure {
    pub t: f64,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    /// Sorted by `t1` ascending.
    pub points: Vec<SweepPoint>,
    pub failures: Vec<SweepFailure>,
    pub ideal_cptp_wqc: CptpReport,
    pub ideal_cptp_swap: CptpReport,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            writeln!(
                out,
                "{:.11e},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}",
                p.t1,
                p.t2,
                p.fidelity_wqc,
                p.fidelity_swap,
                p.neg_log10_infidelity_wqc,
                p.neg_log10_infidelity_swap
            )
            .expect("writing to a String");
        }
        out
    }

    /// Worst CPTP figures over every channel in the sweep, ideal ones included.
    pub fn worst_cptp(&self) -> CptpReport {
        let all = self
            .points
            .iter()
            .flat_map(|p| [p.cptp_wqc, p.cptp_swap])
            .chain([self.ideal_cptp_wqc, self.ideal_cptp_swap]);
        all.fold(
            CptpReport {
                trace_residual: 0.0,
                choi_min_eigenvalue: f64::INFINITY,
                hermiticity_residual: 0.0,
            },
            |acc, r| CptpReport {
                trace_residual: acc.trace_residual.max(r.trace_residual),
                choi_min_eigenvalue: acc.choi_min_eigenvalue.min(r.choi_min_eigenvalue),
                hermiticity_residual: acc.hermiticity_residual.max(r.hermiticity_residual),
            },
        )
    }
}

/// `n` log-spaced values from `t_min` to `t_max`, endpoints exact.
pub fn log_grid(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max >= t_min && t_max.is_finite()) || n == 0 {
        return Err(Error::InvalidInput(format!(
            "grid needs 0 < t_min <= t_max and n > 0 (got {t_min}, {t_max}, {n})"
        )));
    }
    if n == 1 {
        return Ok(vec![t_min]);
    }
    let (lo, hi) = (t_min.log10(), t_max.log10());
    Ok((0..n)
        .map(|i| match i {
            0 => t_min,
            _ if i == n - 1 => t_max,
            _ => 10f64.powf(lo + (hi - lo) * i as f64 / (n - 1) as f64),
        })
        .collect())
}

pub const DEFAULT_T_MIN: f64 = 1e-7;
pub const DEFAULT_T_MAX: f64 = 1e-2;
pub const DEFAULT_POINTS: usize = 25;

pub fn default_t_grid() -> Vec<f64> {
    log_grid(DEFAULT_T_MIN, DEFAULT_T_MAX, DEFAULT_POINTS).expect("static grid")
}

/// Fidelities of both protocols at `T1 = T2 = t` for every `t`.
///
/// Points are evaluated in parallel and returned in input order. A point
/// whose channel cannot be built is recorded in `failures`.
pub fn robustness_sweep(
    spec: &SystemSpec,
    t_values: &[f64],
    protocols: &ProtocolSet,
) -> Result<SweepResult> {
    spec.validate()?;
    if t_values.is_empty() {
        return Err(Error::InvalidInput("empty sweep grid".into()));
    }
    if t_values.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidInput("sweep times must be positive".into()));
    }
    if t_values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput(
            "sweep times must be sorted ascending".into(),
        ));
    }

    let ideal_wqc = channel_superop(&protocols.wqc, spec, None, protocols.wqc_microwave)?;
    let ideal_swap = channel_superop(&protocols.swap, spec, None, false)?;
    let ideal_cptp_wqc = cptp_report(&ideal_wqc)?;
    let ideal_cptp_swap = cptp_report(&ideal_swap)?;

    let eval = |t: f64| -> Result<SweepPoint> {
        let noise = NoiseParams::uniform(t)?;
        let noisy_wqc =
            channel_superop(&protocols.wqc, spec, Some(&noise), protocols.wqc_microwave)?;
        let noisy_swap = channel_superop(&protocols.swap, spec, Some(&noise), false)?;
        let fidelity_wqc = protocols.fidelity.evaluate(&ideal_wqc, &noisy_wqc)?;
        let fidelity_swap = protocols.fidelity.evaluate(&ideal_swap, &noisy_swap)?;
        debug!("t = {t:.3e}: F_wqc = {fidelity_wqc:.12}, F_swap = {fidelity_swap:.12}");
        Ok(SweepPoint {
            t1: noise.t1,
            t2: noise.t2,
            fidelity_wqc,
            fidelity_swap,
            neg_log10_infidelity_wqc: neg_log10_infidelity(fidelity_wqc),
            neg_log10_infidelity_swap: neg_log10_infidelity(fidelity_swap),
            cptp_wqc: cptp_report(&noisy_wqc)?,
            cptp_swap: cptp_report(&noisy_swap)?,
        })
    };
    let outcomes: Vec<(f64, Result<SweepPoint>)> =
        t_values.par_iter().map(|&t| (t, eval(t))).collect();

    let mut points = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for (t, outcome) in outcomes {
        match outcome {
            Ok(p) => points.push(p),
            Err(e) => {
                warn!("sweep point t = {t:.3e} failed: {e}");
                failures.push(SweepFailure {
                    t,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(SweepResult {
        points,
        failures,
        ideal_cptp_wqc,
        ideal_cptp_swap,
    })
}

/// Least-squares slope of `log10 y` against `log10 x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidInput(
            "need at least two paired samples".into(),
        ));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidInput(
            "log-log fit needs positive samples".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.log10()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.log10()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Slope of `log(1 - F_wqc)` against `log(1/T1)` over points with
/// `T1 >= t_max / 10`.
pub fn low_noise_slope(result: &SweepResult) -> Result<f64> {
    let t_max = result
        .points
        .last()
        .ok_or_else(|| Error::InvalidInput("empty sweep".into()))?
        .t1;
    let tail: Vec<&SweepPoint> = result
        .points
        .iter()
        .filter(|p| p.t1 >= t_max / 10.0 * (1.0 - 1e-12))
        .collect();
    let gammas: Vec<f64> = tail.iter().map(|p| 1.0 / p.t1).collect();
    let infid: Vec<f64> = tail.iter().map(|p| 1.0 - p.fidelity_wqc).collect();
    loglog_slope(&gammas, &infid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::unitary_superop;
    use crate::numerics::{expm, identity, pauli, zeros, PauliAxis, ONE};
    use ndarray::Array2;

    fn depolarizing(d: usize) -> SuperOp {
        // rho -> Tr(rho) I / d
        let mut s = Array2::zeros((d * d, d * d));
        for a in 0..d {
            for i in 0..d {
                s[(a * d + a, i * d + i)] = C64::new(1.0 / d as f64, 0.0);
            }
        }
        s
    }

    fn random_unitary(seed: u64) -> SuperOp {
        let mut h = zeros(4);
        let mut x = seed as f64;
        for i in 0..4 {
            for j in 0..=i {
                x = (x * 1.618 + 0.37).fract();
                let y = (x * 7.1).fract();
                h[(i, j)] = C64::new(x - 0.5, if i == j { 0.0 } else { y - 0.5 });
                h[(j, i)] = h[(i, j)].conj();
            }
        }
        expm(&h.mapv(|z| z * C64::new(0.0, -1.0))).unwrap()
    }

    #[test]
    fn fidelity_of_unitary_with_itself() {
        for seed in 1..5 {
            let s = unitary_superop(&random_unitary(seed));
            assert!((process_fidelity(&s, &s).unwrap() - 1.0).abs() < 1e-12);
            assert!((relative_process_fidelity(&s, &s).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_against_depolarizing() {
        let f = process_fidelity(&identity(16), &depolarizing(4)).unwrap();
        // Tr(S) = sum_a 1/d = 1
        assert!((f - 0.0625).abs() < 1e-15);
        assert!(process_fidelity(&identity(16), &identity(4)).is_err());
        assert!(process_fidelity(&identity(15), &identity(15)).is_err());
    }

    #[test]
    fn fidelity_is_linear() {
        let a = unitary_superop(&random_unitary(3));
        let b = unitary_superop(&random_unitary(4));
        let c = depolarizing(4);
        let mix = &b * 0.3 + &c * 0.7;
        let lhs = process_fidelity(&a, &mix).unwrap();
        let rhs = 0.3 * process_fidelity(&a, &b).unwrap() + 0.7 * process_fidelity(&a, &c).unwrap();
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn relative_fidelity_of_contraction() {
        let half = identity(16) * 0.5;
        assert!((process_fidelity(&half, &half).unwrap() - 0.25).abs() < 1e-15);
        assert!((relative_process_fidelity(&half, &half).unwrap() - 1.0).abs() < 1e-15);
        assert!(relative_process_fidelity(&zeros(16), &half).is_err());
    }

    #[test]
    fn infidelity_transform() {
        assert!((neg_log10_infidelity(0.99) - 2.0).abs() < 1e-12);
        assert_eq!(neg_log10_infidelity(1.0), 15.0);
        assert_eq!(neg_log10_infidelity(1.0 + 1e-12), 15.0);
        let fs = [0.0, 0.5, 0.9, 0.999, 1.0 - 1e-14];
        assert!(fs
            .windows(2)
            .all(|w| neg_log10_infidelity(w[0]) < neg_log10_infidelity(w[1])));
    }

    #[test]
    fn cptp_report_detects_corruption() {
        let s = unitary_superop(&random_unitary(7));
        let r = cptp_report(&s).unwrap();
        assert!(r.passes(1e-12), "{r:?}");
        assert!(r.choi_min_eigenvalue.abs() < 1e-12);

        let mut bad = s.clone();
        bad[(5, 3)] += C64::new(0.1, 0.0);
        let r = cptp_report(&bad).unwrap();
        assert!(r.trace_residual > 0.05 || r.hermiticity_residual > 0.05);
        assert!(!r.passes(1e-10));

        let dep = cptp_report(&depolarizing(2)).unwrap();
        assert!(dep.passes(1e-14));
        let mut flip = zeros(4);
        flip[(0, 0)] = ONE;
        assert!(cptp_report(&flip).unwrap().trace_residual > 0.5);
    }

    #[test]
    fn grid_shape() {
        let g = default_t_grid();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 1e-7);
        assert_eq!(g[24], 1e-2);
        assert!((g[12] / 10f64.powf(-4.5) - 1.0).abs() < 1e-14);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(log_grid(1.0, 2.0, 1).unwrap(), vec![1.0]);
        assert!(log_grid(0.0, 1.0, 3).is_err());
        assert!(log_grid(2.0, 1.0, 3).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = (1..6).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.5)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 1.5).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
        assert!(loglog_slope(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let spec = SystemSpec::default();
        let p = ProtocolSet::standard(&spec).unwrap();
        assert!(robustness_sweep(&spec, &[], &p).is_err());
        assert!(robustness_sweep(&spec, &[1e-5, 1e-6], &p).is_err());
        assert!(robustness_sweep(&spec, &[-1.0], &p).is_err());
    }

    #[test]
    fn small_sweep_is_ordered_and_physical() {
        let spec = SystemSpec::default();
        let p = ProtocolSet::standard(&spec).unwrap();
        let r = robustness_sweep(&spec, &[1e-6, 1e-4], &p).unwrap();
        assert!(r.failures.is_empty());
        assert_eq!(r.points.len(), 2);
        assert!(r.points[0].fidelity_wqc < r.points[1].fidelity_wqc);
        for q in &r.points {
            assert!(q.fidelity_wqc >= q.fidelity_swap);
            assert!(q.cptp_wqc.passes(1e-10) && q.cptp_swap.passes(1e-10));
        }
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with(CSV_HEADER));
        assert!(csv
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("1.00000000000e-6,1.00000000000e-6,"));
    }

    #[test]
    fn sigma_z_dephasing_fidelity() {
        // Z-rotation by angle phi: F = |Tr U|^2 / d^2 = cos^2(phi / 2)
        let phi: f64 = 0.3;
        let u = expm(&pauli(PauliAxis::Z).mapv(|z| z * C64::new(0.0, -phi / 2.0))).unwrap();
        let f = process_fidelity(&identity(4), &unitary_superop(&u)).unwrap();
        assert!((f - (phi / 2.0).cos().powi(2)).abs() < 1e-14);
    }
}
