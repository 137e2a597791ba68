#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix2};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn gaussian_matrix<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Invertible matrix with condition number kept moderate by rejection.
pub fn random_invertible<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let g = gaussian_matrix(n, rng);
        let sv = g.singular_values();
        if sv.min() > 0.2 && sv.max() / sv.min() < 50.0 {
            return g;
        }
    }
}

/// Haar-ish orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let qr = gaussian_matrix(n, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let signs = DMatrix::from_fn(n, n, |i, j| if i == j { r[(i, i)].signum() } else { 0.0 });
    q * signs
}

pub fn random_rotation2<R: Rng>(rng: &mut R) -> Matrix2<f64> {
    let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    Matrix2::new(t.cos(), -t.sin(), t.sin(), t.cos())
}

/// Random element of SL(2, R) with moderate entries.
pub fn random_sl2<R: Rng>(rng: &mut R) -> Matrix2<f64> {
    loop {
        let m = Matrix2::new(
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
        );
        let det: f64 = m.determinant();
        if det > 0.1 {
            return m / det.sqrt();
        }
    }
}

/// Random unimodular integer matrix: a product of elementary moves with
/// multipliers in [-3, 3], entries capped at 3 in absolute value.
pub fn random_unimodular<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let mut u = DMatrix::<i64>::identity(n, n);
    for _ in 0..6 * n {
        let i = rng.random_range(0..n);
        let j = rng.random_range(0..n);
        if i == j {
            continue;
        }
        let k: i64 = rng.random_range(-1..=1);
        let mut candidate = u.clone();
        for c in 0..n {
            candidate[(i, c)] += k * u[(j, c)];
        }
        if candidate.iter().all(|v| v.abs() <= 3) {
            u = candidate;
        }
    }
    if rng.random_bool(0.5) && n > 1 {
        u.swap_rows(0, 1);
    }
    u.map(|v| v as f64)
}
