mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use pseudospec::flat_spectra::{
    eigenvalue_of, enumerate_spectrum, verify_eigenfunction, DeformationParameter, SpectrumWindow, FOUR_PI_SQ,
};
use pseudospec::quadform::{LatticePoint, Signature};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sets_match(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * x.abs().max(1.0))
}

#[test]
fn enumerated_values_reverify() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..10 {
        let n = 1 + trial % 3;
        let p = rng.random_range(0..=n);
        let g = DeformationParameter::new(common::random_invertible(n, &mut rng), Signature::new(p, n - p)).unwrap();
        let window = SpectrumWindow::new(-300.0, 300.0, 4).unwrap();
        let sample = enumerate_spectrum(&g, &window).unwrap();
        assert!(!sample.entries.is_empty());
        for e in &sample.entries {
            let direct = eigenvalue_of(&g, &e.witness).unwrap();
            assert!((e.eigenvalue - direct).abs() <= 1e-10 * direct.abs().max(1.0));
            assert!(window.contains(e.eigenvalue));
        }
        for w in sample.entries.windows(2) {
            assert!(w[0].eigenvalue <= w[1].eigenvalue);
        }
    }
}

#[test]
fn zero_is_always_present() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 1..=4 {
        for p in 0..=n {
            let g =
                DeformationParameter::new(common::random_invertible(n, &mut rng), Signature::new(p, n - p)).unwrap();
            let sample = enumerate_spectrum(&g, &SpectrumWindow::new(-1.0, 1.0, 1).unwrap()).unwrap();
            let zero = sample
                .entries
                .iter()
                .find(|e| e.witness == LatticePoint::zero(n))
                .expect("origin witness");
            assert_eq!(zero.eigenvalue, 0.0);
        }
    }
}

#[test]
fn definite_spectrum_invariant_under_unimodular_change() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..12 {
        let n = 2 + trial % 2;
        let sig = if trial % 4 < 2 {
            Signature::new(n, 0)
        } else {
            Signature::new(0, n)
        };
        let g0 = common::random_invertible(n, &mut rng);
        let u = common::random_unimodular(n, &mut rng);
        let a = DeformationParameter::new(g0.clone(), sig).unwrap();
        let b = DeformationParameter::new(&g0 * &u, sig).unwrap();
        let box_radius = if n == 2 { 40 } else { 14 };
        let smallest = |d: &DeformationParameter| {
            d.form()
                .matrix()
                .clone()
                .symmetric_eigenvalues()
                .iter()
                .map(|v| v.abs())
                .fold(f64::INFINITY, f64::min)
        };
        let reach = 0.9 * FOUR_PI_SQ * smallest(&a).min(smallest(&b)) * (box_radius as f64).powi(2);
        let window = if sig.q == 0 {
            SpectrumWindow::new(-reach, 0.0, box_radius).unwrap()
        } else {
            SpectrumWindow::new(0.0, reach, box_radius).unwrap()
        };
        let sa = enumerate_spectrum(&a, &window).unwrap();
        let sb = enumerate_spectrum(&b, &window).unwrap();
        assert!(sa.complete_below_box && sb.complete_below_box, "trial {trial}");
        let va: Vec<f64> = sa.entries.iter().map(|e| e.eigenvalue).collect();
        let vb: Vec<f64> = sb.entries.iter().map(|e| e.eigenvalue).collect();
        assert!(
            sets_match(&va, &vb, 1e-9),
            "trial {trial}: {} vs {}",
            va.len(),
            vb.len()
        );
    }
}

#[test]
fn indefinite_witnesses_transport_under_unimodular_change() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let g0 = common::random_invertible(3, &mut rng);
        let u = common::random_unimodular(3, &mut rng);
        let sig = Signature::new(2, 1);
        let a = DeformationParameter::new(g0.clone(), sig).unwrap();
        let b = DeformationParameter::new(&g0 * &u, sig).unwrap();
        let sample = enumerate_spectrum(&a, &SpectrumWindow::new(-200.0, 200.0, 3).unwrap()).unwrap();
        for e in &sample.entries {
            let m = DMatrix::from_iterator(3, 1, e.witness.coords().iter().map(|&v| v as f64));
            let moved = u.transpose() * m;
            let witness = LatticePoint::new(moved.iter().map(|v| v.round() as i64).collect());
            let value = eigenvalue_of(&b, &witness).unwrap();
            assert!((value - e.eigenvalue).abs() <= 1e-9 * value.abs().max(1.0));
        }
    }
}

#[test]
fn second_order_convergence_on_random_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..6 {
        let n = 1 + trial % 3;
        let p = rng.random_range(0..=n);
        let g = DeformationParameter::new(common::random_invertible(n, &mut rng), Signature::new(p, n - p)).unwrap();
        let m = LatticePoint::new((0..n).map(|_| rng.random_range(-2..=2)).collect());
        if m.sup_norm() == 0 {
            continue;
        }
        let (coarse, fine) = if n == 3 { (16, 32) } else { (32, 64) };
        let c = verify_eigenfunction(&g, &m, coarse).unwrap();
        let f = verify_eigenfunction(&g, &m, fine).unwrap();
        assert!(
            f.absolute_residual * 3.0 <= c.absolute_residual,
            "trial {trial}: {c:?} {f:?}"
        );
    }
}

proptest! {
    #[test]
    fn one_dim_scaling_law(g in 0.3f64..3.0, c in 0.3f64..3.0, m in 1u32..6) {
        let sig = Signature::new(1, 0);
        let base = DeformationParameter::new(DMatrix::from_element(1, 1, g), sig).unwrap();
        let scaled = DeformationParameter::new(DMatrix::from_element(1, 1, c * g), sig).unwrap();
        let window = SpectrumWindow::new(f64::MIN, 0.0, m).unwrap();
        let a = enumerate_spectrum(&base, &window).unwrap();
        let b = enumerate_spectrum(&scaled, &window).unwrap();
        prop_assert_eq!(a.entries.len(), b.entries.len());
        for (x, y) in a.entries.iter().zip(&b.entries) {
            prop_assert_eq!(&x.witness, &y.witness);
            prop_assert!((x.eigenvalue / (c * c) - y.eigenvalue).abs() <= 1e-12 * y.eigenvalue.abs().max(1.0));
        }
    }
}
