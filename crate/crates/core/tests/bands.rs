mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use talbot::bands::*;
use talbot::linalg::CMatrix;
use talbot::{ComplexPotential, C64};

const A: f64 = 2.0 * PI;

#[test]
fn one_ss_block_is_strictly_lower_triangular() {
    let pot = ComplexPotential::one_ss(A, 1.0).unwrap();
    let block = bloch_matrix(&pot, 0.2, 2 * pot.reach()).unwrap();
    let v1 = common::fourier_coefficient(&|x| common::one_ss(A, 1.0, x), A, 1);
    for n in -5i64..=5 {
        assert!((block.entry(n, n - 1).unwrap() - v1).norm() < 1e-10);
        for l in n + 1..=6 {
            assert_eq!(block.entry(n, l).unwrap(), C64::default());
        }
    }
}

#[test]
fn one_sided_crystals_follow_the_free_parabola() {
    for pot in [
        ComplexPotential::one_ss(A, 1.0).unwrap(),
        ComplexPotential::two_ss(A, 1.0).unwrap(),
        ComplexPotential::exp(A, 1.0).unwrap(),
    ] {
        let d = band_diagram(&pot, 64, 7).unwrap();
        assert_eq!(d.bands(), 8);
        assert!(d.max_parabola_deviation() < 1e-8);
        assert!(d.is_gapless());
    }
}

#[test]
fn mathieu_bands_open_gaps() {
    let pot = ComplexPotential::mathieu(A, 2.0).unwrap();
    let d = band_diagram(&pot, 64, 7).unwrap();
    assert!(d.max_parabola_deviation() > 1e-2);
    assert!(!d.is_gapless());
}

#[test]
fn small_mathieu_gap_matches_two_mode_coupling() {
    let v0 = 0.2;
    let pot = ComplexPotential::mathieu(A, v0).unwrap();
    let d = band_diagram_at(&pot, &[-0.5], 3).unwrap();
    let gap = d.energies[0][1].re - d.energies[0][0].re;
    assert!((gap - v0).abs() < 0.1 * v0, "{gap}");
}

#[test]
fn pt_bands_are_even_in_q() {
    let pot = ComplexPotential::one_ss(A, 0.8).unwrap();
    let qs: Vec<f64> = (1..20).map(|k| 0.025 * k as f64).collect();
    let neg: Vec<f64> = qs.iter().map(|q| -q).collect();
    let (dp, dn) = (band_diagram_at(&pot, &qs, 6).unwrap(), band_diagram_at(&pot, &neg, 6).unwrap());
    for (ep, en) in dp.energies.iter().zip(&dn.energies) {
        for (x, y) in ep.iter().zip(en) {
            assert!((x - y).norm() < 1e-8);
        }
    }
}

#[test]
fn singularity_census() {
    let one = detect_singularities(&ComplexPotential::one_ss(A, 1.0).unwrap(), 6);
    assert_eq!(one.defective(), vec![1]);
    let two = detect_singularities(&ComplexPotential::two_ss(A, 1.0).unwrap(), 6);
    assert_eq!(two.defective(), vec![1, 3]);
    let exp = detect_singularities(&ComplexPotential::exp(A, 1.0).unwrap(), 6);
    assert_eq!(exp.defective(), vec![1, 2, 3, 4, 5, 6]);
}

#[test]
fn census_is_stable_under_doubled_truncation() {
    for pot in [
        ComplexPotential::one_ss(A, 1.0).unwrap(),
        ComplexPotential::two_ss(A, 1.0).unwrap(),
        ComplexPotential::exp(A, 1.0).unwrap(),
    ] {
        let base = detect_singularities(&pot, 6);
        let doubled = detect_singularities_with(&pot, 6, 2 * base.n_trunc).unwrap();
        assert_eq!(base.defective(), doubled.defective());
    }
}

#[test]
fn defective_points_are_self_orthogonal() {
    let one = detect_singularities(&ComplexPotential::one_ss(A, 1.0).unwrap(), 4);
    let e1 = one.record(1).unwrap();
    assert_eq!(e1.kernel_dim, 1);
    assert!(e1.coalescence_angle < 1e-6);
    assert!((e1.q_loc + 0.5).abs() < 1e-15);
    let e2 = one.record(2).unwrap();
    assert!(!e2.defective && e2.kernel_dim == 2 && e2.q_loc == 0.0);
}

#[test]
fn theorem_verdicts() {
    let one = detect_singularities(&ComplexPotential::one_ss(A, 1.0).unwrap(), 6);
    assert!(theorem1_applicable(&one, 3).applicable);
    let even = theorem1_applicable(&one, 2);
    assert!(!even.applicable);
    assert_eq!(even.blocking.unwrap().n, 1);
    let free = detect_singularities(&ComplexPotential::free(A).unwrap(), 6);
    assert!((1..7).all(|n| theorem1_applicable(&free, n).applicable));
}

fn lower_triangular(dim: usize, entries: &[(f64, f64)]) -> CMatrix {
    CMatrix::from_fn(dim, dim, |i, j| {
        if j > i {
            C64::default()
        } else {
            let (re, im) = entries[(i * 7 + j * 3) % entries.len()];
            C64::new(re, im)
        }
    })
}

proptest! {
    #[test]
    fn triangular_spectrum_is_the_diagonal(
        dim in 2usize..20,
        entries in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..30),
    ) {
        let m = lower_triangular(dim, &entries);
        let e = talbot::linalg::eigenvalues(&m);
        for (i, x) in e.iter().enumerate() {
            prop_assert_eq!(*x, m[(i, i)]);
        }
    }

    #[test]
    fn one_sided_bands_ignore_truncation(rho in 0.5f64..2.0, q in -0.5f64..0.5, extra in 0usize..20) {
        let pot = ComplexPotential::one_ss(A, rho).unwrap();
        let n = 2 * pot.reach();
        let small = bloch_matrix(&pot, q, n).unwrap().eigenvalues();
        let large = bloch_matrix(&pot, q, n + extra).unwrap().eigenvalues();
        for (i, e) in small.iter().enumerate() {
            prop_assert_eq!(*e, large[i + extra]);
        }
    }
}
