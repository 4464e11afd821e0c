use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use wqc::analysis::{cptp_report, process_fidelity};
use wqc::liouville::{
    channel_superop, electron_dissipator, liouvillian, single_spin_dissipator, unitary_superop,
    DissipatorParams,
};
use wqc::numerics::{dagger, expm, identity, kron, max_abs, unvec, vec};
use wqc::sequences::{bch_sequence, select_tau, serial_swap_sequence};
use wqc::spin_system::{NoiseParams, SystemSpec};

fn matrix(d: usize) -> impl Strategy<Value = Array2<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d * d).prop_map(move |v| {
        Array2::from_shape_vec((d, d), v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
            .unwrap()
    })
}

fn hermitian(d: usize) -> impl Strategy<Value = Array2<C64>> {
    matrix(d).prop_map(|m| (&m + &dagger(&m)) * 0.5)
}

fn dim_and_pair() -> impl Strategy<Value = (Array2<C64>, Array2<C64>)> {
    prop_oneof![Just(2usize), Just(4), Just(8), Just(16)]
        .prop_flat_map(|d| (hermitian(d), matrix(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn liouvillian_is_commutator((h, rho) in dim_and_pair()) {
        let d = h.nrows();
        let lhs = unvec(&liouvillian(&h).dot(&vec(&rho).unwrap()), d).unwrap();
        let rhs = h.dot(&rho) - rho.dot(&h);
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-13 * d as f64);
    }

    #[test]
    fn vec_round_trip(m in matrix(4)) {
        prop_assert_eq!(unvec(&vec(&m).unwrap(), 4).unwrap(), m);
    }

    #[test]
    fn kron_acts_as_sandwich(p in matrix(3), q in matrix(3), rho in matrix(3)) {
        // (P kron Q) vec(rho) = vec(Q rho P^T)
        let lhs = unvec(&kron(&p, &q).dot(&vec(&rho).unwrap()), 3).unwrap();
        let rhs = q.dot(&rho).dot(&p.t());
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-13);
    }

    #[test]
    fn expm_inverse(h in hermitian(8), t in -3.0..3.0f64) {
        let a = h.mapv(|z| z * C64::new(0.0, -t));
        let u = expm(&a).unwrap();
        let v = expm(&a.mapv(|z| -z)).unwrap();
        prop_assert!(max_abs(&(u.dot(&v) - identity(8))) <= 1e-12);
        prop_assert!(max_abs(&(dagger(&u) - v)) <= 1e-12);
    }

    #[test]
    fn dissipator_preserves_trace(g1 in 0.0..10.0f64, g2 in 0.0..10.0f64, electron in 0usize..2) {
        let spec = SystemSpec::default();
        let d = electron_dissipator(&DissipatorParams { gamma1: g1, gamma2: g2, electron }, &spec).unwrap();
        let dim = spec.dim();
        let mut left = Array1::zeros(dim * dim);
        for i in 0..dim {
            left[i * dim + i] = C64::new(1.0, 0.0);
        }
        prop_assert!(left.dot(&d).iter().all(|z| z.norm() <= 1e-13 * (1.0 + g1 + g2)));
    }

    #[test]
    fn single_spin_channel_is_cptp(t1 in 0.1..10.0f64, ratio in 0.05..2.0f64, t in 0.0..20.0f64) {
        let noise = NoiseParams::new(t1, ratio * t1).unwrap();
        let (g1, g2) = wqc::liouville::gammas_from_times(&noise).unwrap();
        let s = expm(&single_spin_dissipator(g1, g2).mapv(|z| z * t)).unwrap();
        let r = cptp_report(&s).unwrap();
        prop_assert!(r.passes(1e-10), "{:?}", r);
    }

    #[test]
    fn fidelity_is_linear(u in hermitian(4), v in hermitian(4), x in hermitian(4), w in -2.0..2.0f64) {
        let conj = |h: &Array2<C64>| unitary_superop(&expm(&h.mapv(|z| z * C64::new(0.0, -1.0))).unwrap());
        let (s, a, b) = (conj(&u), conj(&v), conj(&x));
        let lhs = process_fidelity(&s, &(&a + &(&b * w))).unwrap();
        let rhs = process_fidelity(&s, &a).unwrap() + w * process_fidelity(&s, &b).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
        prop_assert!((process_fidelity(&s, &s).unwrap() - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn noisy_channels_are_cptp(log_t in -7.0..-3.0f64, ratio in 0.2..2.0f64) {
        let spec = SystemSpec::default();
        let t1 = 10f64.powf(log_t);
        let noise = NoiseParams::new(t1, ratio * t1).unwrap();
        let wqc = bch_sequence(select_tau(&spec).unwrap()).unwrap();
        for (seq, mw) in [(wqc, true), (serial_swap_sequence(&spec).unwrap(), false)] {
            let r = cptp_report(&channel_superop(&seq, &spec, Some(&noise), mw).unwrap()).unwrap();
            prop_assert!(r.trace_residual <= 1e-10 && r.choi_min_eigenvalue >= -1e-10, "{:?}", r);
        }
    }
}

#[test]
fn infinite_times_reproduce_noiseless_channel() {
    let spec = SystemSpec::default();
    let silent = NoiseParams {
        t1: f64::INFINITY,
        t2: f64::INFINITY,
    };
    let wqc = bch_sequence(select_tau(&spec).unwrap()).unwrap();
    for (seq, mw) in [(wqc, true), (serial_swap_sequence(&spec).unwrap(), false)] {
        let quiet = channel_superop(&seq, &spec, Some(&silent), mw).unwrap();
        let ideal = channel_superop(&seq, &spec, None, mw).unwrap();
        assert!(max_abs(&(quiet - ideal)) <= 1e-12);
    }
}

#[test]
fn ideal_channels_are_cptp() {
    let spec = SystemSpec::default();
    let wqc = bch_sequence(select_tau(&spec).unwrap()).unwrap();
    for (seq, mw) in [(wqc, true), (serial_swap_sequence(&spec).unwrap(), false)] {
        let r = cptp_report(&channel_superop(&seq, &spec, None, mw).unwrap()).unwrap();
        assert!(r.passes(1e-10), "{r:?}");
    }
}

#[test]
fn noisy_trace_residual_at_100_us() {
    let spec = SystemSpec::default();
    let noise = NoiseParams::uniform(100e-6).unwrap();
    let wqc = bch_sequence(select_tau(&spec).unwrap()).unwrap();
    let r = cptp_report(&channel_superop(&wqc, &spec, Some(&noise), true).unwrap()).unwrap();
    assert!(r.trace_residual <= 1e-10);
}
