use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use talbot::bands::degeneracy_point;
use talbot::propagation::*;
use talbot::susy::{jordan_chain, JordanChain};
use talbot::{ComplexPotential, Error, Tilt, Wavefield, C64};

const A: f64 = 2.0 * PI;

fn tilt(n: i64, d: i64) -> Tilt {
    Tilt::new(n, d)
}

fn scenario(pot: ComplexPotential, n: u32, m: u32, p: Tilt, z: ZSampling) -> Scenario {
    Scenario::new(
        pot,
        Commensurability::new(n, m).unwrap(),
        p,
        Profile::GaussianTrain { width: None },
        z,
    )
    .unwrap()
}

fn deltas_at(pot: ComplexPotential, n: u32, m: u32, p: Tilt, zs: &[f64]) -> Vec<(f64, f64)> {
    let trace = propagate(&scenario(pot, n, m, p, ZSampling::List(zs.to_vec()))).unwrap();
    trace.records[1..].iter().map(|r| (r.delta, r.delta_half)).collect()
}

#[test]
fn revival_periods() {
    let z = predict_revival(3, 2, A, tilt(0, 1)).unwrap();
    assert!((z - 18.0 * PI).abs() < 1e-12);
    assert!((predict_revival(1, 1, A, tilt(0, 1)).unwrap() - 2.0 * PI).abs() < 1e-12);
    let z = predict_revival(2, 1, A, tilt(1, 3)).unwrap();
    assert!((z - 72.0 * PI).abs() < 1e-10);
    assert_eq!(format!("{z:.1}"), "226.2");
}

#[test]
fn tilt_hypotheses_are_checked() {
    for p in [tilt(2, 3), tilt(1, 2), tilt(1, 4)] {
        assert!(matches!(
            predict_revival(2, 1, A, p),
            Err(Error::TiltConditionsViolated(_))
        ));
    }
    assert!(matches!(predict_revival(4, 2, A, tilt(0, 1)), Err(Error::NotCoprime { .. })));
}

#[test]
fn gaussian_train_support_and_shape() {
    let f = gaussian_train(3, 2, A, 0.3 * PI).unwrap();
    assert!(f.modes().iter().all(|(k, c)| k % 2 == 0 || *c == C64::default()));
    assert!((f.power() - 1.0).abs() < 1e-14);
    assert!(f.modes().iter().all(|(k, c)| c.im == 0.0 && c.re > 0.0 && (*c - f.mode(-k)).norm() == 0.0));
    assert!(matches!(gaussian_train(3, 2, A, 1.5 * PI), Err(Error::WidthTooLarge { .. })));
    assert!(matches!(gaussian_train(3, 2, A, 0.0), Err(Error::WidthTooLarge { .. })));
}

#[test]
fn free_space_talbot_and_half_shift() {
    let free = ComplexPotential::free(A).unwrap();
    let d = deltas_at(free, 1, 1, tilt(0, 1), &[PI, 2.0 * PI]);
    assert!(d[1].0 < 1e-10, "{d:?}");
    assert!(d[0].1 < 1e-10, "{d:?}");
}

#[test]
fn one_ss_revives() {
    let pot = ComplexPotential::one_ss(A, 1.0).unwrap();
    let d = deltas_at(pot, 3, 2, tilt(0, 1), &[9.0 * PI, 18.0 * PI, 36.0 * PI]);
    assert!(d[1].0 < 1e-6 && d[2].0 < 1e-6, "{d:?}");
    assert!(d[0].1 > 1e-2, "{d:?}");
}

#[test]
fn hermitian_counterpart_does_not_revive() {
    let pot = ComplexPotential::one_ss(A, 1.0).unwrap().real_part();
    let d = deltas_at(pot, 3, 2, tilt(0, 1), &[18.0 * PI]);
    assert!(d[0].0 > 1e-2, "{d:?}");
}

#[test]
fn tilted_input_revives() {
    let pot = ComplexPotential::one_ss(A, 1.0).unwrap();
    let d = deltas_at(pot, 2, 1, tilt(1, 3), &[72.0 * PI]);
    assert!(d[0].0 < 1e-6, "{d:?}");
}

#[test]
fn even_period_does_not_revive_and_grows() {
    let pot = ComplexPotential::one_ss(A, 1.0).unwrap();
    let z_t = predict_revival(2, 1, A, tilt(0, 1)).unwrap();
    let s = scenario(pot, 2, 1, tilt(0, 1), ZSampling::per_revival(z_t, 3.0, SAMPLES_PER_REVIVAL));
    let trace = propagate(&s).unwrap();
    let min = trace.min_after_departure(NON_REVIVAL_THRESHOLD).unwrap();
    assert!(min > NON_REVIVAL_THRESHOLD, "{min}");
    let n = |k: usize| trace.records[k * SAMPLES_PER_REVIVAL].norm;
    assert!(n(1) < n(2) && n(2) < n(3));
}

#[test]
fn blocks_match_the_undecomposed_evolution() {
    // exp(-i H z) over the whole L-periodic mode lattice, without splitting
    // into residue blocks
    let pot = ComplexPotential::one_ss(A, 1.0).unwrap();
    let field = gaussian_train(3, 2, A, 0.3 * PI).unwrap();
    let z = 7.0;
    let blocked = evolve(&pot, &field, &ZSampling::List(vec![z]), None).unwrap().pop().unwrap();
    let cells = 3i64;
    let reach = 100i64;
    let dim = (2 * reach + 1) as usize;
    let h = DMatrix::from_fn(dim, dim, |i, j| {
        let (k, l) = (i as i64 - reach, j as i64 - reach);
        let mut e = C64::default();
        if (k - l) % cells == 0 {
            e += pot.coeff((k - l) / cells);
        }
        if k == l {
            e += field.wavenumber(k).powi(2);
        }
        e
    });
    let x0 = DVector::from_fn(dim, |i, _| field.mode(i as i64 - reach));
    let x = (h * C64::new(0.0, -z)).exp() * x0;
    let err: f64 = (0..dim).map(|i| (x[i] - blocked.mode(i as i64 - reach)).norm_sqr()).sum();
    assert!(err.sqrt() < 1e-10, "{}", err.sqrt());
}

#[test]
fn modes_stay_on_the_field_lattice() {
    let pot = ComplexPotential::two_ss(A, 1.0).unwrap();
    let field = gaussian_train(3, 2, A, 0.3 * PI).unwrap();
    let out = evolve(&pot, &field, &ZSampling::List(vec![3.0, 30.0]), None).unwrap();
    for f in &out {
        assert_eq!(f.period(), 3.0 * A);
        assert_eq!(f.lattice_period(), A);
        assert_eq!(f.tilt(), tilt(0, 1));
    }
}

#[test]
fn hermitian_norm_is_conserved() {
    let pot = ComplexPotential::mathieu(A, 2.0).unwrap();
    let s = scenario(pot, 1, 1, tilt(0, 1), ZSampling::Uniform { step: 0.5, count: 1000 });
    let trace = propagate(&s).unwrap();
    let drift = trace.records.iter().map(|r| (r.norm - 1.0).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-8, "{drift}");
}

#[test]
fn recurrence_in_free_space_is_the_talbot_period() {
    let free = ComplexPotential::free(A).unwrap();
    let s = scenario(free, 1, 1, tilt(0, 1), ZSampling::per_revival(2.0 * PI, 2.0, 64));
    let trace = propagate(&s).unwrap();
    let z0 = recurrence_search(&trace, 1e-8).unwrap().unwrap();
    assert!((z0 - 2.0 * PI).abs() < 1e-12);
}

#[test]
fn mathieu_recurrence_is_approximate() {
    let pot = ComplexPotential::mathieu(A, 2.0).unwrap();
    let s = scenario(pot, 1, 1, tilt(0, 1), ZSampling::Uniform { step: 0.05, count: 10_000 });
    let trace = propagate(&s).unwrap();
    assert_eq!(recurrence_search(&trace, 1e-10).unwrap(), None);
}

#[test]
fn recurrence_needs_a_hermitian_trace() {
    let pot = ComplexPotential::one_ss(A, 1.0).unwrap();
    let s = scenario(pot, 2, 1, tilt(0, 1), ZSampling::Uniform { step: 1.0, count: 40 });
    let trace = propagate(&s).unwrap();
    assert!(matches!(recurrence_search(&trace, 0.05), Err(Error::NormNotConserved { .. })));
}

#[test]
fn free_space_oracle_is_exact() {
    let free = ComplexPotential::free(A).unwrap();
    let field = gaussian_train(3, 2, A, 0.3 * PI).unwrap();
    let exact = evolve(&free, &field, &ZSampling::List(vec![5.0]), None).unwrap().pop().unwrap();
    let split = split_step_oracle(&field, &free, 5.0, 0.5).unwrap();
    assert!(exact.distance_sqr(&split).sqrt() < 1e-12);
}

#[test]
fn oracle_agrees_on_one_ss() {
    let pot = ComplexPotential::one_ss(A, 1.0).unwrap();
    let field = gaussian_train(3, 2, A, 0.3 * PI).unwrap();
    let z = 18.0 * PI;
    let exact = evolve(&pot, &field, &ZSampling::List(vec![z]), None).unwrap().pop().unwrap();
    let split = split_step_oracle(&field, &pot, z, 0.0025).unwrap();
    assert!(exact.distance_sqr(&split).sqrt() < 1e-6);
}

#[test]
fn oracle_agrees_on_mathieu() {
    let pot = ComplexPotential::mathieu(A, 2.0).unwrap();
    let field = gaussian_train(1, 1, A, 0.2 * PI).unwrap();
    let exact = evolve(&pot, &field, &ZSampling::List(vec![10.0]), None).unwrap().pop().unwrap();
    let split = split_step_oracle(&field, &pot, 10.0, 0.0025).unwrap();
    assert!(exact.distance_sqr(&split).sqrt() < 1e-6);
    assert!((split.power() - 1.0).abs() < 1e-8);
}

#[test]
fn oracle_reports_coarse_steps() {
    let pot = ComplexPotential::mathieu(A, 2.0).unwrap();
    let field = gaussian_train(1, 1, A, 0.2 * PI).unwrap();
    assert!(matches!(
        split_step_oracle(&field, &pot, 10.0, 1.0),
        Err(Error::StepNotConverged { .. })
    ));
}

fn one_ss_chain() -> (ComplexPotential, JordanChain) {
    let pot = ComplexPotential::one_ss(A, 1.0).unwrap();
    let (e, q) = degeneracy_point(1, A);
    let chain = jordan_chain(&pot, e, q).unwrap();
    (pot, chain)
}

#[test]
fn jordan_input_grows_linearly() {
    let (pot, chain) = one_ss_chain();
    let slope = secular_growth_test(&pot, &chain, 400.0).unwrap();
    assert!((slope / chain.u.norm() - 1.0).abs() < 1e-2, "{slope}");
}

#[test]
fn eigenvector_input_keeps_its_norm() {
    let (pot, chain) = one_ss_chain();
    let zs: Vec<f64> = (1..=10).map(|k| 20.0 * k as f64).collect();
    let out = evolve(&pot, &chain.u, &ZSampling::List(zs), None).unwrap();
    assert!(out.iter().all(|f| (f.norm() - 1.0).abs() < 1e-8));
}

#[test]
fn free_space_is_not_secular() {
    let free = ComplexPotential::free(A).unwrap();
    let u = Wavefield::new(A, [(1, C64::from(1.0))]).unwrap();
    let v = Wavefield::new(A, [(2, C64::from(1.0))]).unwrap();
    let chain = JordanChain {
        energy: 1.0,
        q: 0.0,
        u,
        v,
        residuals: (0.0, 0.0),
        n_trunc: 8,
    };
    assert!(matches!(secular_growth_test(&free, &chain, 50.0), Err(Error::NotSecular(_))));
}
