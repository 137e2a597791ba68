//! Real quadratic forms `Q_S(y) = yᵀ S y`, their inertia, and their values at
//! integer points.
//!
//! Forms are stored as symmetric `n × n` matrices. Evaluation at lattice points
//! uses error-free products and compensated summation so that the returned
//! value is within a few ulps of the exact integer-weighted sum even when the
//! individual terms cancel heavily, which is the normal situation for
//! indefinite forms near their null cone.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Default denominator bound for [`integer_proportionality`].
pub const DEFAULT_RATIONAL_BOUND: i64 = 1_000;
/// Default tolerance for [`integer_proportionality`].
pub const DEFAULT_RATIONAL_TOL: f64 = 1e-9;
/// Relative singularity threshold for deformation matrices: `|det g| < 1e-12 · ‖g‖ⁿ`.
pub const SINGULARITY_THRESHOLD: f64 = 1e-12;

/// A symmetric real `n × n` matrix regarded as a quadratic form.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    matrix: DMatrix<f64>,
}

impl QuadraticForm {
    /// Builds a form from a square matrix, replacing it by its symmetric part.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::EmptyDimension);
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "quadratic form" });
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        Ok(Self { matrix: sym })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)))
    }

    /// The standard form `I_{p,q} = diag(1,…,1,−1,…,−1)`.
    pub fn standard(sig: Signature) -> Result<Self> {
        Self::new(sig.standard_matrix())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn evaluate(&self, m: &LatticePoint) -> Result<f64> {
        evaluate(self, m)
    }

    pub fn signature(&self, tol: f64) -> Result<Signature> {
        signature(self, tol)
    }
}

/// Inertia `(p, q, z)` of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub p: usize,
    pub q: usize,
    pub z: usize,
}

impl Signature {
    /// Nondegenerate signature `(p, q)`.
    pub fn new(p: usize, q: usize) -> Self {
        Self { p, q, z: 0 }
    }

    pub fn dim(&self) -> usize {
        self.p + self.q + self.z
    }

    pub fn is_definite(&self) -> bool {
        self.z == 0 && (self.p == 0 || self.q == 0)
    }

    pub fn is_indefinite(&self) -> bool {
        self.p > 0 && self.q > 0
    }

    /// `diag(1 (p times), −1 (q times), 0 (z times))`.
    pub fn standard_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            if i != j {
                0.0
            } else if i < self.p {
                1.0
            } else if i < self.p + self.q {
                -1.0
            } else {
                0.0
            }
        })
    }
}

/// An integer vector `m ∈ ℤⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        Self(coords)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

/// `mᵀ S m` with compensated accumulation.
pub fn evaluate(form: &QuadraticForm, m: &LatticePoint) -> Result<f64> {
    evaluate_coords(form, m.coords())
}

/// [`evaluate`] on a bare coordinate slice.
pub fn evaluate_coords(form: &QuadraticForm, c: &[i64]) -> Result<f64> {
    let n = form.dim();
    if c.len() != n {
        return Err(Error::DimensionMismatch {
            form: n,
            point: c.len(),
        });
    }
    let s = &form.matrix;
    let mut acc = CompensatedSum::new();
    for i in 0..n {
        if c[i] == 0 {
            continue;
        }
        acc.add_product(s[(i, i)], (c[i] * c[i]) as f64);
        for j in (i + 1)..n {
            if c[j] == 0 {
                continue;
            }
            // off-diagonal pairs counted twice; the factor 2 is exact
            acc.add_product(2.0 * s[(i, j)], (c[i] * c[j]) as f64);
        }
    }
    Ok(acc.value())
}

/// Counts eigenvalues above `tol`, below `-tol`, and inside `[-tol, tol]`.
pub fn signature(form: &QuadraticForm, tol: f64) -> Result<Signature> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("must be positive and finite, got {tol}"),
        });
    }
    if form.matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "quadratic form" });
    }
    let eig = form.matrix.clone().symmetric_eigenvalues();
    let mut sig = Signature { p: 0, q: 0, z: 0 };
    for &ev in eig.iter() {
        if ev > tol {
            sig.p += 1;
        } else if ev < -tol {
            sig.q += 1;
        } else {
            sig.z += 1;
        }
    }
    Ok(sig)
}

/// Spectral condition number `σ_max / σ_min` of a square matrix (infinite when singular).
pub fn condition_number(g: &DMatrix<f64>) -> f64 {
    let sv = g.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Rejects matrices whose determinant is negligible relative to `‖g‖₂ⁿ`.
pub(crate) fn check_nonsingular(g: &DMatrix<f64>) -> Result<f64> {
    if g.nrows() != g.ncols() {
        return Err(Error::NotSquare {
            rows: g.nrows(),
            cols: g.ncols(),
        });
    }
    if g.nrows() == 0 {
        return Err(Error::EmptyDimension);
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "deformation matrix",
        });
    }
    let n = g.nrows() as i32;
    let norm = g.singular_values().max();
    let det = g.determinant();
    let threshold = SINGULARITY_THRESHOLD * norm.powi(n);
    if det.is_nan() || det.abs() < threshold || det == 0.0 {
        return Err(Error::Singular {
            det: det.abs(),
            threshold,
        });
    }
    Ok(det)
}

/// The form `g⁻¹ I_{p,q} ᵗg⁻¹` attached to the deformed lattice `g ℤⁿ`.
pub fn deformed_form(g: &DMatrix<f64>, sig: Signature) -> Result<QuadraticForm> {
    check_nonsingular(g)?;
    let n = g.nrows();
    if sig.z != 0 {
        return Err(Error::DegenerateSignature { z: sig.z });
    }
    if sig.dim() != n {
        return Err(Error::SignatureMismatch {
            p: sig.p,
            q: sig.q,
            z: sig.z,
            dim: n,
        });
    }
    let inv = g.clone().lu().try_inverse().ok_or(Error::Singular {
        det: 0.0,
        threshold: 0.0,
    })?;
    let s = &inv * sig.standard_matrix() * inv.transpose();
    QuadraticForm::new(s)
}

/// A certificate that a form equals `scale · matrix` with `matrix` integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionalityCertificate {
    pub scale: f64,
    /// Row-major primitive integer matrix.
    pub matrix: Vec<Vec<i64>>,
    /// `‖scale · matrix − S‖_∞` as verified.
    pub residual: f64,
}

impl ProportionalityCertificate {
    /// Re-checks `‖scale · matrix − S‖_∞ ≤ tol` against `form`.
    pub fn verifies(&self, form: &QuadraticForm, tol: f64) -> bool {
        let n = form.dim();
        if self.matrix.len() != n || self.matrix.iter().any(|r| r.len() != n) {
            return false;
        }
        sup_residual(form, self.scale, &self.matrix) <= tol
    }
}

fn sup_residual(form: &QuadraticForm, scale: f64, a: &[Vec<i64>]) -> f64 {
    let n = form.dim();
    let mut worst: f64 = 0.0;
    for (i, row) in a.iter().enumerate().take(n) {
        for (j, &v) in row.iter().enumerate().take(n) {
            worst = worst.max((scale * v as f64 - form.matrix[(i, j)]).abs());
        }
    }
    worst
}

/// First continued-fraction convergent `h/k` of `x` with `k ≤ bound` and
/// `weight · |x − h/k| ≤ tol`.
fn convergent_within(x: f64, weight: f64, bound: i64, tol: f64) -> Option<(i64, i64)> {
    let (mut h1, mut h2): (i128, i128) = (1, 0);
    let (mut k1, mut k2): (i128, i128) = (0, 1);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if !a.is_finite() || a.abs() > 1e18 {
            return None;
        }
        let a = a as i128;
        let h = a * h1 + h2;
        let k = a * k1 + k2;
        if k > bound as i128 {
            return None;
        }
        if weight * (x - h as f64 / k as f64).abs() <= tol {
            return Some((h as i64, k as i64));
        }
        let frac = rest - a as f64;
        if frac <= 0.0 {
            return None;
        }
        rest = 1.0 / frac;
        (h2, h1) = (h1, h);
        (k2, k1) = (k1, k);
    }
    None
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Searches for `(λ, A)` with `A` integral, `|A_ij| ≤ search_bound`, and
/// `‖λA − S‖_∞ ≤ tol`.
///
/// Each entry is divided by the largest-magnitude entry and approximated by
/// continued-fraction convergents with denominator at most `search_bound`;
/// the common denominator then gives `A`, which is reduced to a primitive
/// matrix and sign-normalized so that `λ > 0`. The candidate is verified
/// globally before being returned. `None` means "no certificate within the
/// bound", not a proof of irrationality.
pub fn integer_proportionality(
    form: &QuadraticForm,
    search_bound: i64,
    tol: f64,
) -> Option<ProportionalityCertificate> {
    if search_bound < 1 || tol.is_nan() || tol < 0.0 {
        return None;
    }
    let n = form.dim();
    let s = &form.matrix;
    let mut pivot = 0.0_f64;
    for v in s.iter() {
        if v.abs() > pivot.abs() {
            pivot = *v;
        }
    }
    if pivot == 0.0 {
        return Some(ProportionalityCertificate {
            scale: 1.0,
            matrix: vec![vec![0; n]; n],
            residual: 0.0,
        });
    }

    let mut fractions = vec![vec![(0i64, 1i64); n]; n];
    let mut denom: i64 = 1;
    for i in 0..n {
        for j in i..n {
            let ratio = s[(i, j)] / pivot;
            let (h, k) = convergent_within(ratio, pivot.abs(), search_bound, tol)?;
            fractions[i][j] = (h, k);
            fractions[j][i] = (h, k);
            denom = denom / gcd(denom, k) * k;
            if denom > search_bound {
                return None;
            }
        }
    }

    let mut a: Vec<Vec<i64>> = fractions
        .iter()
        .map(|row| row.iter().map(|&(h, k)| h * (denom / k)).collect())
        .collect();
    let common = a.iter().flatten().fold(0, |g, &v| gcd(g, v));
    if common > 1 {
        a.iter_mut().flatten().for_each(|v| *v /= common);
    }
    let mut scale = pivot * common as f64 / denom as f64;
    if scale < 0.0 {
        scale = -scale;
        a.iter_mut().flatten().for_each(|v| *v = -*v);
    }
    if a.iter().flatten().any(|v| v.abs() > search_bound) {
        return None;
    }
    let residual = sup_residual(form, scale, &a);
    if residual > tol {
        return None;
    }
    Some(ProportionalityCertificate {
        scale,
        matrix: a,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn evaluate_small_cases() {
        let s = QuadraticForm::from_diagonal(&[1.0, -1.0]).unwrap();
        assert_eq!(evaluate(&s, &LatticePoint::new(vec![3, 2])).unwrap(), 5.0);
        let s = QuadraticForm::standard(Signature::new(2, 3)).unwrap();
        assert_eq!(evaluate(&s, &LatticePoint::zero(5)).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_rejects_dimension_mismatch() {
        let s = QuadraticForm::from_diagonal(&[1.0, -1.0]).unwrap();
        let err = evaluate(&s, &LatticePoint::new(vec![1, 2, 3])).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { form: 2, point: 3 });
        assert!(err.to_string().contains('2') && err.to_string().contains('3'));
    }

    #[test]
    fn construction_symmetrizes() {
        let f = QuadraticForm::new(dmatrix![1.0, 2.0; 0.0, 1.0]).unwrap();
        assert_eq!(f.matrix()[(0, 1)], 1.0);
        assert_eq!(f.matrix()[(1, 0)], 1.0);
        assert!(QuadraticForm::new(DMatrix::zeros(2, 3)).is_err());
        assert!(QuadraticForm::new(DMatrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn signature_basic() {
        let f = QuadraticForm::from_diagonal(&[1.0, 1.0, -1.0]).unwrap();
        assert_eq!(signature(&f, 1e-12).unwrap(), Signature { p: 2, q: 1, z: 0 });
        let z = QuadraticForm::new(DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(signature(&z, 1e-12).unwrap(), Signature { p: 0, q: 0, z: 2 });
        assert!(signature(&z, 0.0).is_err());
    }

    #[test]
    fn non_finite_entries_rejected() {
        assert_eq!(
            QuadraticForm::new(dmatrix![f64::NAN, 0.0; 0.0, 1.0]).unwrap_err(),
            Error::NonFinite { what: "quadratic form" }
        );
    }

    #[test]
    fn deformed_form_identity_and_scaling() {
        let sig = Signature::new(2, 1);
        let f = deformed_form(&DMatrix::identity(3, 3), sig).unwrap();
        assert_eq!(f.matrix(), &sig.standard_matrix());

        let f = deformed_form(&dmatrix![2.0], Signature::new(1, 0)).unwrap();
        assert!((f.matrix()[(0, 0)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn deformed_form_rotation_invariance() {
        for k in 0..12 {
            let t = 0.37 * k as f64;
            let r = dmatrix![t.cos(), -t.sin(); t.sin(), t.cos()];
            let f = deformed_form(&r, Signature::new(2, 0)).unwrap();
            let diff = f.matrix() - DMatrix::<f64>::identity(2, 2);
            assert!(diff.amax() < 1e-14, "theta = {t}");
        }
    }

    #[test]
    fn deformed_form_rejects_bad_input() {
        let singular = dmatrix![1.0, 2.0; 2.0, 4.0];
        assert!(matches!(
            deformed_form(&singular, Signature::new(1, 1)),
            Err(Error::Singular { .. })
        ));
        assert!(matches!(
            deformed_form(&DMatrix::identity(2, 2), Signature { p: 1, q: 0, z: 1 }),
            Err(Error::DegenerateSignature { z: 1 })
        ));
        assert!(matches!(
            deformed_form(&DMatrix::identity(2, 2), Signature::new(2, 1)),
            Err(Error::SignatureMismatch { .. })
        ));
    }

    #[test]
    fn proportionality_examples() {
        let f = QuadraticForm::from_diagonal(&[1.0, -1.0]).unwrap();
        let c = integer_proportionality(&f, 1_000_000, 1e-9).unwrap();
        assert_eq!(c.scale, 1.0);
        assert_eq!(c.matrix, vec![vec![1, 0], vec![0, -1]]);

        let f = QuadraticForm::from_diagonal(&[1.0, -2f64.sqrt()]).unwrap();
        assert!(integer_proportionality(&f, 50, 1e-9).is_none());

        let f = QuadraticForm::from_diagonal(&[6.0, -15.0, 3.0]).unwrap();
        let c = integer_proportionality(&f, 1_000_000, 1e-9).unwrap();
        assert!((c.scale - 3.0).abs() < 1e-15);
        assert_eq!(c.matrix, vec![vec![2, 0, 0], vec![0, -5, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn proportionality_off_diagonal_rational() {
        let f = QuadraticForm::new(dmatrix![0.5, 0.25; 0.25, -1.5]).unwrap();
        let c = integer_proportionality(&f, 100, 1e-12).unwrap();
        assert_eq!(c.matrix, vec![vec![2, 1], vec![1, -6]]);
        assert!((c.scale - 0.25).abs() < 1e-15);
        assert!(c.verifies(&f, 1e-12));
    }

    #[test]
    fn sqrt2_convergents_oracle() {
        // convergents of 1/sqrt(2) with denominators <= 50: 1/1, 2/3, 5/7, 12/17, 29/41
        let x = 1.0 / 2f64.sqrt();
        let best = [(1, 1), (2, 3), (5, 7), (12, 17), (29, 41)]
            .iter()
            .map(|&(h, k): &(i64, i64)| (x - h as f64 / k as f64).abs() * 2f64.sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(best > 1e-9);
        assert!(convergent_within(x, 2f64.sqrt(), 50, 1e-9).is_none());
        assert_eq!(convergent_within(x, 1.0, 50, 2e-3), Some((12, 17)));
    }
}
