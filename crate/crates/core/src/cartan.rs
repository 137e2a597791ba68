//! Cartan projections, polyhedral cones in the Cartan subspace, the
//! properness criterion `μ(L) ∩ μ(H) = {0}`, and sharpness constants.
//!
//! Two ambient groups are supported:
//!
//! * `SL(n, ℝ)`: `μ(g)` is the vector of log singular values sorted in
//!   descending order. It lives in the traceless diagonal subspace, so it is
//!   stored with `n` coordinates summing to zero.
//! * `SL(2, ℝ) × SL(2, ℝ)`, the double cover of `SO(2, 2)` used as the
//!   isometry group of AdS³: `μ(g₁, g₂) = (log σ₁(g₁), log σ₁(g₂))` in the
//!   closed quadrant.
//!
//! The norm on the Cartan subspace is the Euclidean one, which is invariant
//! under the Weyl group for both kinds. Sharpness constants are relative to
//! this norm.

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Determinant drift tolerated by [`cartan_projection`].
pub const DET_TOLERANCE: f64 = 1e-6;
/// Chamber membership slack.
pub const CHAMBER_TOLERANCE: f64 = 1e-9;
/// Elements with `‖μ‖` at or below this are treated as elliptic and skipped.
pub const ELLIPTIC_NORM: f64 = 1e-9;
/// Positive floor that non-sharp estimates are clamped to.
pub const SHARPNESS_FLOOR: f64 = 1e-12;
/// Separations at or below this make the properness verdict a boundary case.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;
/// Additive constants reported alongside every sharpness estimate.
pub const PARETO_C_PRIMES: [f64; 4] = [0.0, 1.0, 2.0, 5.0];

const MAX_CONE_GENERATORS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AmbientGroup {
    /// `SL(n, ℝ)`.
    SlN { n: usize },
    /// `SL(2, ℝ) × SL(2, ℝ)`.
    Sl2xSl2,
}

impl AmbientGroup {
    /// Real rank, the dimension of the Cartan subspace.
    pub fn chamber_dim(&self) -> usize {
        match self {
            AmbientGroup::SlN { n } => n.saturating_sub(1),
            AmbientGroup::Sl2xSl2 => 2,
        }
    }

    /// Number of stored coordinates of a Cartan vector.
    pub fn coord_len(&self) -> usize {
        match self {
            AmbientGroup::SlN { n } => *n,
            AmbientGroup::Sl2xSl2 => 2,
        }
    }

    pub fn in_chamber(&self, coords: &[f64], tol: f64) -> bool {
        if coords.len() != self.coord_len() || coords.iter().any(|c| !c.is_finite()) {
            return false;
        }
        match self {
            AmbientGroup::SlN { .. } => {
                let scale = 1.0 + coords.iter().map(|c| c.abs()).fold(0.0, f64::max);
                coords.windows(2).all(|w| w[0] >= w[1] - tol)
                    && coords.iter().sum::<f64>().abs() <= tol * scale * coords.len() as f64
            }
            AmbientGroup::Sl2xSl2 => coords.iter().all(|&c| c >= -tol),
        }
    }
}

/// An element of `SL(2, ℝ) × SL(2, ℝ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sl2Pair {
    pub left: Matrix2<f64>,
    pub right: Matrix2<f64>,
}

impl Sl2Pair {
    pub fn identity() -> Self {
        Self {
            left: Matrix2::identity(),
            right: Matrix2::identity(),
        }
    }

    /// Checks `det = 1` per factor within `tol`.
    pub fn new(left: Matrix2<f64>, right: Matrix2<f64>, tol: f64) -> Result<Self> {
        for m in [&left, &right] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { what: "SL(2) factor" });
            }
            let det = m.determinant();
            if (det - 1.0).abs() > tol {
                return Err(Error::NotInGroup { det, tolerance: tol });
            }
        }
        Ok(Self { left, right })
    }

    /// `(diag(e^t, e^-t), I)`.
    pub fn left_hyperbolic(t: f64) -> Self {
        Self {
            left: Matrix2::new(t.exp(), 0.0, 0.0, (-t).exp()),
            right: Matrix2::identity(),
        }
    }

    /// Inverse via the adjugate, exact for unit determinant.
    pub fn inverse(&self) -> Self {
        let adj = |m: &Matrix2<f64>| Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]);
        Self {
            left: adj(&self.left),
            right: adj(&self.right),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            left: self.left * other.left,
            right: self.right * other.right,
        }
    }

    /// Conjugation `k g k⁻¹`.
    pub fn conjugate_by(&self, k: &Self) -> Self {
        k.mul(self).mul(&k.inverse())
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        ((self.left - other.left).norm_squared() + (self.right - other.right).norm_squared()).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    Matrix(DMatrix<f64>),
    Pair(Sl2Pair),
}

impl From<Sl2Pair> for GroupElement {
    fn from(p: Sl2Pair) -> Self {
        GroupElement::Pair(p)
    }
}

impl From<DMatrix<f64>> for GroupElement {
    fn from(m: DMatrix<f64>) -> Self {
        GroupElement::Matrix(m)
    }
}

/// A point of the closed dominant chamber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartanVector {
    coords: Vec<f64>,
    group: AmbientGroup,
}

impl CartanVector {
    pub fn new(group: AmbientGroup, coords: Vec<f64>) -> Result<Self> {
        if !group.in_chamber(&coords, CHAMBER_TOLERANCE) {
            return Err(Error::OutsideChamber { coords });
        }
        Ok(Self { coords, group })
    }

    pub fn zero(group: AmbientGroup) -> Self {
        Self {
            coords: vec![0.0; group.coord_len()],
            group,
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn group(&self) -> AmbientGroup {
        self.group
    }

    pub fn norm(&self) -> f64 {
        euclidean(&self.coords)
    }
}

fn euclidean(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `log σ₁(m / √|det m|)` for a 2×2 matrix, via
/// `σ₁ − σ₂ = hypot(a − d, b + c)` and `σ₁σ₂ = |det|`, which stays accurate
/// both near the identity and for large entries.
///
/// A determinant within rounding distance of 1 is taken to be exactly 1: for
/// long products the stored entries no longer pin it down, while `σ₁` is still
/// accurate to a few ulps.
pub fn sl2_log_top_singular(m: &Matrix2<f64>) -> f64 {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let bc = b * c;
    let det = (a.mul_add(d, -bc) + (-b).mul_add(c, bc)).abs();
    let noise = 4.0 * f64::EPSILON * a.hypot(b) * c.hypot(d);
    let scale = if (det - 1.0).abs() <= noise { 1.0 } else { det.sqrt() };
    let gap = (a - d).hypot(b + c) / scale;
    (gap / 2.0).asinh()
}

/// Determinant drift allowed for an element: [`DET_TOLERANCE`] plus the
/// rounding bound `n² ε Π‖rowᵢ‖` of a computed determinant, which dominates
/// for long products.
fn det_tolerance(row_norms: impl Iterator<Item = f64>, n: usize) -> f64 {
    let hadamard: f64 = row_norms.product();
    DET_TOLERANCE + (n * n) as f64 * f64::EPSILON * hadamard
}

/// Cartan projection `μ(k₁ e^X k₂) = X`.
pub fn cartan_projection(group: AmbientGroup, g: &GroupElement) -> Result<CartanVector> {
    match (group, g) {
        (AmbientGroup::SlN { n }, GroupElement::Matrix(m)) => {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch {
                    form: n,
                    point: m.nrows().max(m.ncols()),
                });
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { what: "group element" });
            }
            let det = m.determinant();
            let tolerance = det_tolerance(m.row_iter().map(|r| r.norm()), n);
            if (det - 1.0).abs() > tolerance {
                return Err(Error::NotInGroup { det, tolerance });
            }
            let mut logs: Vec<f64> = m.singular_values().iter().map(|s| s.ln()).collect();
            logs.sort_by(|a, b| b.total_cmp(a));
            // absorb residual determinant drift so the coordinates sum to zero
            let mean = logs.iter().sum::<f64>() / n as f64;
            logs.iter_mut().for_each(|l| *l -= mean);
            Ok(CartanVector { coords: logs, group })
        }
        (AmbientGroup::Sl2xSl2, GroupElement::Pair(p)) => {
            let mut coords = Vec::with_capacity(2);
            for m in [&p.left, &p.right] {
                if m.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { what: "group element" });
                }
                let det = m.determinant();
                let tolerance = det_tolerance(m.row_iter().map(|r| r.norm()), 2);
                if (det - 1.0).abs() > tolerance {
                    return Err(Error::NotInGroup { det, tolerance });
                }
                coords.push(sl2_log_top_singular(m));
            }
            Ok(CartanVector { coords, group })
        }
        (AmbientGroup::SlN { .. }, GroupElement::Pair(_)) | (AmbientGroup::Sl2xSl2, GroupElement::Matrix(_)) => {
            Err(Error::InvalidParameter {
                name: "group",
                reason: "element type does not match the ambient group".into(),
            })
        }
    }
}

/// A polyhedral cone in the chamber, given by generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSubset {
    group: AmbientGroup,
    generators: Vec<Vec<f64>>,
}

impl ConeSubset {
    /// An empty generator list is the cone `{0}`.
    pub fn new(group: AmbientGroup, generators: Vec<Vec<f64>>) -> Result<Self> {
        if generators.len() > MAX_CONE_GENERATORS {
            return Err(Error::InvalidParameter {
                name: "generators",
                reason: format!("at most {MAX_CONE_GENERATORS} generators supported"),
            });
        }
        for g in &generators {
            if !group.in_chamber(g, CHAMBER_TOLERANCE) {
                return Err(Error::OutsideChamber { coords: g.clone() });
            }
            if euclidean(g) == 0.0 {
                return Err(Error::InvalidParameter {
                    name: "generators",
                    reason: "cone generators must be nonzero".into(),
                });
            }
        }
        Ok(Self { group, generators })
    }

    pub fn zero(group: AmbientGroup) -> Self {
        Self {
            group,
            generators: Vec::new(),
        }
    }

    /// `{(t, 0)}`: `μ(SL(2,ℝ) × {e})`.
    pub fn first_axis_ray() -> Self {
        Self {
            group: AmbientGroup::Sl2xSl2,
            generators: vec![vec![1.0, 0.0]],
        }
    }

    /// `{(t, t)}`: `μ` of the diagonal `SL(2, ℝ)`, i.e. the AdS³ isotropy.
    pub fn diagonal_ray() -> Self {
        Self {
            group: AmbientGroup::Sl2xSl2,
            generators: vec![vec![1.0, 1.0]],
        }
    }

    /// The whole closed chamber (spanned by the fundamental coweights for `SL(n)`).
    pub fn full_chamber(group: AmbientGroup) -> Self {
        let generators = match group {
            AmbientGroup::Sl2xSl2 => vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            AmbientGroup::SlN { n } => (1..n)
                .map(|k| {
                    (0..n)
                        .map(|i| {
                            if i < k {
                                (n - k) as f64 / n as f64
                            } else {
                                -(k as f64) / n as f64
                            }
                        })
                        .collect()
                })
                .collect(),
        };
        Self { group, generators }
    }

    pub fn group(&self) -> AmbientGroup {
        self.group
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }
}

/// Least-squares coefficients of `target` in the span of `columns`, or `None`
/// when the columns are linearly dependent.
fn span_coefficients(columns: &[&[f64]], target: &[f64]) -> Option<DVector<f64>> {
    let rows = target.len();
    let a = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i]);
    let gram = a.transpose() * &a;
    let scale = gram.diagonal().amax();
    let chol = gram.clone().cholesky()?;
    // reject numerically dependent subsets
    let min_pivot = chol.l().diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min_pivot * min_pivot <= 1e-14 * scale {
        return None;
    }
    Some(chol.solve(&(a.transpose() * DVector::from_column_slice(target))))
}

fn subsets(k: usize, max_size: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1u32 << k)).filter_map(move |mask| {
        if mask.count_ones() as usize > max_size {
            return None;
        }
        Some((0..k).filter(|i| mask & (1 << i) != 0).collect())
    })
}

/// Euclidean projection of `v` onto the cone generated by `generators`.
///
/// The projection lies in the relative interior of some face, where it is
/// the orthogonal projection onto the span of a linearly independent set of
/// that face's generators with nonnegative coefficients. Minimizing over all
/// such subsets (and the apex) is therefore exact.
pub fn project_onto_cone(v: &[f64], generators: &[Vec<f64>]) -> (Vec<f64>, f64) {
    let mut best = (vec![0.0; v.len()], euclidean(v));
    for subset in subsets(generators.len(), v.len()) {
        let cols: Vec<&[f64]> = subset.iter().map(|&i| generators[i].as_slice()).collect();
        let Some(coef) = span_coefficients(&cols, v) else {
            continue;
        };
        if coef.iter().any(|&c| c < 0.0) {
            continue;
        }
        let mut point = vec![0.0; v.len()];
        for (c, col) in coef.iter().zip(&cols) {
            for (p, g) in point.iter_mut().zip(col.iter()) {
                *p += c * g;
            }
        }
        let dist = euclidean(&v.iter().zip(&point).map(|(a, b)| a - b).collect::<Vec<_>>());
        if dist < best.1 {
            best = (point, dist);
        }
    }
    best
}

/// Distance from `v` to the cone; an empty cone is `{0}`.
pub fn distance_to_cone(v: &CartanVector, cone: &ConeSubset) -> Result<f64> {
    if v.group.coord_len() != cone.group.coord_len() {
        return Err(Error::ChamberMismatch {
            left: v.group.coord_len(),
            right: cone.group.coord_len(),
        });
    }
    Ok(project_onto_cone(&v.coords, &cone.generators).1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Properness {
    Proper,
    NotProper,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProperVerdict {
    pub verdict: Properness,
    /// Nonzero common vector of both cones, normalized so its `μ(L)` coefficients sum to 1.
    pub witness: Option<Vec<f64>>,
    /// Smallest `d(v, μ(H))` over unit probe vectors `v ∈ μ(L)`.
    pub min_separation: f64,
    pub probes: usize,
}

/// Basic-solution search for `Σλᵢlᵢ = Σμⱼhⱼ`, `Σλᵢ = 1`, `λ, μ ≥ 0`.
fn common_ray(l: &[Vec<f64>], h: &[Vec<f64>]) -> Option<Vec<f64>> {
    let d = l.first()?.len();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(l.len() + h.len());
    for g in l {
        let mut c = g.clone();
        c.push(1.0);
        columns.push(c);
    }
    for g in h {
        let mut c: Vec<f64> = g.iter().map(|x| -x).collect();
        c.push(0.0);
        columns.push(c);
    }
    let mut rhs = vec![0.0; d];
    rhs.push(1.0);
    let scale = columns.iter().map(|c| euclidean(c)).fold(1.0, f64::max);

    for subset in subsets(columns.len(), d + 1) {
        if !subset.iter().any(|&i| i < l.len()) {
            continue;
        }
        let cols: Vec<&[f64]> = subset.iter().map(|&i| columns[i].as_slice()).collect();
        let Some(coef) = span_coefficients(&cols, &rhs) else {
            continue;
        };
        if coef.iter().any(|&c| c < -1e-12) {
            continue;
        }
        let mut resid = rhs.clone();
        for (c, col) in coef.iter().zip(&cols) {
            for (r, x) in resid.iter_mut().zip(col.iter()) {
                *r -= c * x;
            }
        }
        if euclidean(&resid) > 1e-13 * scale {
            continue;
        }
        let mut witness = vec![0.0; d];
        for (c, &i) in coef.iter().zip(&subset) {
            if i < l.len() {
                for (w, x) in witness.iter_mut().zip(&l[i]) {
                    *w += c.max(0.0) * x;
                }
            }
        }
        if euclidean(&witness) > BOUNDARY_TOLERANCE {
            return Some(witness);
        }
    }
    None
}

/// Decides whether `μ(L) ∩ μ(H) = {0}`.
///
/// The exact test is a feasibility search over basic solutions of the
/// linear system joining the two cones. Probing unit vectors of `μ(L)`
/// (each generator plus `probe_count` seeded random combinations) measures
/// how far the cones are from touching; a separation within
/// [`BOUNDARY_TOLERANCE`] without an exact common ray is reported as
/// [`Properness::Boundary`].
pub fn properness_check(mu_l: &ConeSubset, mu_h: &ConeSubset, probe_count: usize) -> Result<ProperVerdict> {
    if mu_l.group.coord_len() != mu_h.group.coord_len() {
        return Err(Error::ChamberMismatch {
            left: mu_l.group.coord_len(),
            right: mu_h.group.coord_len(),
        });
    }
    if mu_l.generators.is_empty() {
        return Ok(ProperVerdict {
            verdict: Properness::Proper,
            witness: None,
            min_separation: f64::INFINITY,
            probes: 0,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_ca27);
    let mut probes: Vec<Vec<f64>> = mu_l.generators.clone();
    for _ in 0..probe_count {
        let d = mu_l.generators[0].len();
        let mut v = vec![0.0; d];
        for g in &mu_l.generators {
            let w: f64 = rng.random();
            for (a, b) in v.iter_mut().zip(g) {
                *a += w * b;
            }
        }
        probes.push(v);
    }
    let min_separation = probes
        .iter()
        .filter_map(|v| {
            let norm = euclidean(v);
            (norm > 0.0).then(|| {
                let unit: Vec<f64> = v.iter().map(|x| x / norm).collect();
                project_onto_cone(&unit, &mu_h.generators).1
            })
        })
        .fold(f64::INFINITY, f64::min);

    let witness = common_ray(&mu_l.generators, &mu_h.generators);
    let verdict = match (&witness, min_separation <= BOUNDARY_TOLERANCE) {
        (Some(_), _) => Properness::NotProper,
        (None, true) => Properness::Boundary,
        (None, false) => Properness::Proper,
    };
    Ok(ProperVerdict {
        verdict,
        witness,
        min_separation,
        probes: probes.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessPoint {
    pub c_prime: f64,
    pub c: f64,
}

/// Certified pair `(C, C′)` on a finite sample of group elements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessEstimate {
    pub c: f64,
    pub c_prime: f64,
    /// Word-length radius of the sample, when it came from a word ball.
    pub word_radius: u32,
    /// Elements entering the ratio.
    pub samples: usize,
    /// Elliptic elements (`‖μ‖ ≈ 0`) left out.
    pub skipped: usize,
    /// False when some sampled `μ(γ)` sits on `μ(H)` (C clamped to the floor).
    pub sharp: bool,
    /// `d(μ(γ), μ(H)) ≥ C‖μ(γ)‖ − C′` re-checked on every sampled element.
    pub certified: bool,
    pub pareto: Vec<SharpnessPoint>,
}

/// Per-element `(distance to μ(H), ‖μ‖)` for the non-elliptic elements.
pub fn sharpness_data(
    group: AmbientGroup,
    elements: &[GroupElement],
    mu_h: &ConeSubset,
) -> Result<(Vec<(f64, f64)>, usize)> {
    let data: Vec<(f64, f64)> = elements
        .par_iter()
        .map(|g| {
            let mu = cartan_projection(group, g)?;
            Ok((distance_to_cone(&mu, mu_h)?, mu.norm()))
        })
        .collect::<Result<_>>()?;
    let total = data.len();
    let kept: Vec<(f64, f64)> = data.into_iter().filter(|&(_, n)| n > ELLIPTIC_NORM).collect();
    let skipped = total - kept.len();
    Ok((kept, skipped))
}

/// Largest `C ∈ (0, 1]` with `d + C′ ≥ C‖μ‖` on all points, shaved by a few
/// ulps so the inequality holds in floating point; `None` if not sharp.
fn best_constant(points: &[(f64, f64)], c_prime: f64) -> Option<f64> {
    let ratio = points
        .iter()
        .map(|&(d, n)| (d + c_prime) / n)
        .fold(f64::INFINITY, f64::min);
    if ratio.is_nan() || ratio <= SHARPNESS_FLOOR {
        return None;
    }
    Some((ratio * (1.0 - 4.0 * f64::EPSILON)).min(1.0))
}

/// Checks `d ≥ C‖μ‖ − C′` on every point.
pub fn certifies(points: &[(f64, f64)], c: f64, c_prime: f64) -> bool {
    points.iter().all(|&(d, n)| d >= c * n - c_prime)
}

pub fn estimate_sharpness(
    group: AmbientGroup,
    elements: &[GroupElement],
    mu_h: &ConeSubset,
    c_prime_cap: f64,
) -> Result<SharpnessEstimate> {
    if !c_prime_cap.is_finite() || c_prime_cap < 0.0 {
        return Err(Error::InvalidParameter {
            name: "c_prime_cap",
            reason: format!("must be nonnegative, got {c_prime_cap}"),
        });
    }
    let (points, skipped) = sharpness_data(group, elements, mu_h)?;
    estimate_from_data(&points, skipped, c_prime_cap)
}

pub(crate) fn estimate_from_data(points: &[(f64, f64)], skipped: usize, c_prime_cap: f64) -> Result<SharpnessEstimate> {
    if points.is_empty() {
        return Err(Error::NoData(format!(
            "all {skipped} elements have vanishing Cartan projection"
        )));
    }
    let constant = best_constant(points, c_prime_cap);
    let c = constant.unwrap_or(SHARPNESS_FLOOR);
    let pareto = PARETO_C_PRIMES
        .iter()
        .map(|&cp| SharpnessPoint {
            c_prime: cp,
            c: best_constant(points, cp).unwrap_or(SHARPNESS_FLOOR),
        })
        .collect();
    Ok(SharpnessEstimate {
        c,
        c_prime: c_prime_cap,
        word_radius: 0,
        samples: points.len(),
        skipped,
        sharp: constant.is_some(),
        certified: certifies(points, c, c_prime_cap),
        pareto,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn pair_vec(x: f64, y: f64) -> CartanVector {
        CartanVector::new(AmbientGroup::Sl2xSl2, vec![x, y]).unwrap()
    }

    #[test]
    fn identity_projects_to_zero() {
        let mu = cartan_projection(AmbientGroup::Sl2xSl2, &Sl2Pair::identity().into()).unwrap();
        assert_eq!(mu.coords(), &[0.0, 0.0]);
        let mu = cartan_projection(AmbientGroup::SlN { n: 3 }, &DMatrix::<f64>::identity(3, 3).into()).unwrap();
        assert!(mu.norm() < 1e-15);
    }

    #[test]
    fn diagonal_sl2_normal_form() {
        let t: f64 = 1.7;
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![t.exp(), (-t).exp()]));
        let mu = cartan_projection(AmbientGroup::SlN { n: 2 }, &g.into()).unwrap();
        assert!((mu.coords()[0] - t).abs() < 1e-12);
        assert!((mu.coords()[1] + t).abs() < 1e-12);
        let mu = cartan_projection(AmbientGroup::Sl2xSl2, &Sl2Pair::left_hyperbolic(t).into()).unwrap();
        assert!((mu.coords()[0] - t).abs() < 1e-12);
        assert_eq!(mu.coords()[1], 0.0);
    }

    #[test]
    fn projection_rejects_off_group() {
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        assert!(matches!(
            cartan_projection(AmbientGroup::SlN { n: 2 }, &g.into()),
            Err(Error::NotInGroup { .. })
        ));
        let bad = Sl2Pair {
            left: Matrix2::new(f64::NAN, 0.0, 0.0, 1.0),
            right: Matrix2::identity(),
        };
        assert!(cartan_projection(AmbientGroup::Sl2xSl2, &bad.into()).is_err());
        assert!(cartan_projection(AmbientGroup::Sl2xSl2, &DMatrix::<f64>::identity(2, 2).into()).is_err());
    }

    #[test]
    fn chamber_validation() {
        assert!(CartanVector::new(AmbientGroup::Sl2xSl2, vec![-0.1, 1.0]).is_err());
        assert!(CartanVector::new(AmbientGroup::SlN { n: 3 }, vec![1.0, 0.0, -1.0]).is_ok());
        assert!(CartanVector::new(AmbientGroup::SlN { n: 3 }, vec![0.0, 1.0, -1.0]).is_err());
        assert!(CartanVector::new(AmbientGroup::SlN { n: 3 }, vec![1.0, 0.0, 0.0]).is_err());
        assert!(ConeSubset::new(AmbientGroup::Sl2xSl2, vec![vec![0.0, 0.0]]).is_err());
    }

    #[test]
    fn distance_examples() {
        let ray = ConeSubset::diagonal_ray();
        assert!(distance_to_cone(&pair_vec(2.0, 2.0), &ray).unwrap() < 1e-15);
        for t in [0.5, 1.0, 3.0] {
            let d = distance_to_cone(&pair_vec(t, 0.0), &ray).unwrap();
            assert!((d - t / SQRT_2).abs() < 1e-14);
        }
        let zero = ConeSubset::zero(AmbientGroup::Sl2xSl2);
        assert!((distance_to_cone(&pair_vec(3.0, 4.0), &zero).unwrap() - 5.0).abs() < 1e-15);
        let full = ConeSubset::full_chamber(AmbientGroup::Sl2xSl2);
        assert_eq!(distance_to_cone(&pair_vec(3.0, 4.0), &full).unwrap(), 0.0);
    }

    #[test]
    fn projection_onto_two_generator_cone_against_brute_force() {
        // cone spanned by (1,0,0) and (1,1,1) in R^3; oracle scans the coefficient grid
        let gens = vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]];
        let v = [0.3, 2.0, -0.5];
        let (_, d) = project_onto_cone(&v, &gens);
        let mut best = f64::INFINITY;
        for i in 0..=400 {
            for j in 0..=400 {
                let (a, b) = (i as f64 * 0.01, j as f64 * 0.01);
                let p = [a + b, b, b];
                let dd = ((v[0] - p[0]).powi(2) + (v[1] - p[1]).powi(2) + (v[2] - p[2]).powi(2)).sqrt();
                best = best.min(dd);
            }
        }
        assert!(d <= best + 1e-12);
        assert!(best - d < 1e-2);
    }

    #[test]
    fn properness_scenarios() {
        let r = properness_check(&ConeSubset::first_axis_ray(), &ConeSubset::diagonal_ray(), 64).unwrap();
        assert_eq!(r.verdict, Properness::Proper);
        assert!(r.witness.is_none());
        assert!((r.min_separation - 1.0 / SQRT_2).abs() < 1e-12);

        let r = properness_check(&ConeSubset::diagonal_ray(), &ConeSubset::diagonal_ray(), 64).unwrap();
        assert_eq!(r.verdict, Properness::NotProper);
        let w = r.witness.unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12 && (w[1] - 1.0).abs() < 1e-12);

        let full = ConeSubset::full_chamber(AmbientGroup::Sl2xSl2);
        for l in [ConeSubset::first_axis_ray(), ConeSubset::diagonal_ray()] {
            let r = properness_check(&l, &full, 16).unwrap();
            assert_eq!(r.verdict, Properness::NotProper);
        }
    }

    #[test]
    fn properness_boundary_case() {
        let l = ConeSubset::new(AmbientGroup::Sl2xSl2, vec![vec![1.0, 1e-10]]).unwrap();
        let h = ConeSubset::new(AmbientGroup::Sl2xSl2, vec![vec![1.0, 0.0]]).unwrap();
        let r = properness_check(&l, &h, 8).unwrap();
        assert_eq!(r.verdict, Properness::Boundary);
    }

    #[test]
    fn properness_in_sl3() {
        let g = AmbientGroup::SlN { n: 3 };
        let full = ConeSubset::full_chamber(g);
        let ray = ConeSubset::new(g, vec![vec![1.0, 0.0, -1.0]]).unwrap();
        assert_eq!(properness_check(&ray, &full, 8).unwrap().verdict, Properness::NotProper);
        let a = ConeSubset::new(g, vec![vec![2.0, -1.0, -1.0]]).unwrap();
        let b = ConeSubset::new(g, vec![vec![1.0, 1.0, -2.0]]).unwrap();
        assert_eq!(properness_check(&a, &b, 8).unwrap().verdict, Properness::Proper);
    }

    #[test]
    fn sharpness_single_word() {
        let t = 2.5;
        let est = estimate_sharpness(
            AmbientGroup::Sl2xSl2,
            &[Sl2Pair::left_hyperbolic(t).into()],
            &ConeSubset::diagonal_ray(),
            0.0,
        )
        .unwrap();
        assert!((est.c - 1.0 / SQRT_2).abs() < 1e-12);
        assert!(est.sharp && est.certified);
        assert_eq!(est.pareto.len(), 4);
        assert!(est.pareto.windows(2).all(|w| w[0].c <= w[1].c));
    }

    #[test]
    fn sharpness_on_mu_h_is_not_sharp() {
        let diag = Sl2Pair {
            left: Matrix2::new(2f64.exp(), 0.0, 0.0, (-2f64).exp()),
            right: Matrix2::new(2f64.exp(), 0.0, 0.0, (-2f64).exp()),
        };
        let est = estimate_sharpness(AmbientGroup::Sl2xSl2, &[diag.into()], &ConeSubset::diagonal_ray(), 0.0).unwrap();
        assert!(!est.sharp);
        assert_eq!(est.c, SHARPNESS_FLOOR);
    }

    #[test]
    fn sharpness_skips_elliptic_and_errors_without_data() {
        let err = estimate_sharpness(
            AmbientGroup::Sl2xSl2,
            &[Sl2Pair::identity().into()],
            &ConeSubset::diagonal_ray(),
            0.0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoData(_)));
        let est = estimate_sharpness(
            AmbientGroup::Sl2xSl2,
            &[Sl2Pair::identity().into(), Sl2Pair::left_hyperbolic(1.0).into()],
            &ConeSubset::diagonal_ray(),
            0.0,
        )
        .unwrap();
        assert_eq!((est.samples, est.skipped), (1, 1));
    }

    #[test]
    fn sharpness_mixed_sample_min_ratio() {
        let rot = |th: f64| Matrix2::new(th.cos(), -th.sin(), th.sin(), th.cos());
        let hyp = |t: f64| Matrix2::new(t.exp(), 0.0, 0.0, (-t).exp());
        let elems: Vec<GroupElement> = vec![
            Sl2Pair {
                left: hyp(3.0),
                right: hyp(0.5),
            }
            .into(),
            Sl2Pair {
                left: hyp(1.0),
                right: rot(0.3) * hyp(0.9),
            }
            .into(),
            Sl2Pair {
                left: hyp(0.2),
                right: hyp(2.0),
            }
            .into(),
        ];
        let est = estimate_sharpness(AmbientGroup::Sl2xSl2, &elems, &ConeSubset::diagonal_ray(), 0.0).unwrap();
        // independent recomputation: distance from (a, b) to the diagonal ray is |a - b| / sqrt 2
        let expected = [(3.0, 0.5), (1.0, 0.9), (0.2, 2.0)]
            .iter()
            .map(|&(a, b): &(f64, f64)| ((a - b).abs() / SQRT_2) / (a * a + b * b).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!((est.c - expected).abs() < 1e-12);
        assert!(est.certified);
    }
}
