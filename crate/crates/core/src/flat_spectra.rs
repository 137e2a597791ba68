//! Discrete spectra of flat tori `ℝ^{p,q} / gℤⁿ`.
//!
//! For a deformation parameter `g ∈ GL(n, ℝ)` the functions
//! `f_m(x) = exp(2πi mᵀ g⁻¹ x)`, `m ∈ ℤⁿ`, are eigenfunctions of the flat
//! Laplacian with eigenvalue `−4π² Q_S(m)`, `S = g⁻¹ I_{p,q} ᵗg⁻¹`. They span
//! a dense subspace of `L²`, so the discrete spectrum is exactly the value set
//! of `−4π² Q_S` on `ℤⁿ`. Everything here works with a finite box
//! `‖m‖_∞ ≤ M` of that set.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadform::{
    self, deformed_form, integer_proportionality, LatticePoint, ProportionalityCertificate, QuadraticForm, Signature,
};

/// `4π²`.
pub const FOUR_PI_SQ: f64 = 4.0 * PI * PI;
/// Absolute tolerance for merging eigenvalues into one cluster.
pub const EIGENVALUE_DEDUP_TOL: f64 = 1e-9;
/// Default cap on the number of lattice points visited by one enumeration.
pub const DEFAULT_POINT_BUDGET: u64 = 100_000_000;
/// Perturbed deformations with `|det|` below this are redrawn.
pub const PERTURBATION_DET_FLOOR: f64 = 1e-8;
/// Default matching tolerance for [`stability_scan`].
pub const DEFAULT_MATCH_TOL: f64 = 1e-6;
/// Default gap-shrink factor separating dense from discrete behaviour.
pub const DEFAULT_SHRINK_FACTOR: f64 = 4.0;
/// Largest grid (total points) accepted by [`verify_eigenfunction`].
pub const MAX_GRID_POINTS: u64 = 1 << 22;

/// A point `g` of the deformation space of `ℤⁿ` in `ℝ^{p,q}`, together with
/// its form `g⁻¹ I_{p,q} ᵗg⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationParameter {
    g: DMatrix<f64>,
    signature: Signature,
    form: QuadraticForm,
}

impl DeformationParameter {
    pub fn new(g: DMatrix<f64>, signature: Signature) -> Result<Self> {
        let form = deformed_form(&g, signature)?;
        Ok(Self { g, signature, form })
    }

    /// The undeformed standard lattice `ℤⁿ`.
    pub fn identity(signature: Signature) -> Result<Self> {
        let n = signature.dim();
        Self::new(DMatrix::identity(n, n), signature)
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn form(&self) -> &QuadraticForm {
        &self.form
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn condition_number(&self) -> f64 {
        quadform::condition_number(&self.g)
    }
}

/// `−4π² Q_{g⁻¹I_{p,q}ᵗg⁻¹}(m)`.
pub fn eigenvalue_of(g: &DeformationParameter, m: &LatticePoint) -> Result<f64> {
    Ok(spectral_value(g.form.evaluate(m)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumWindow {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Enumeration bound `‖m‖_∞ ≤ box_radius`.
    pub box_radius: u32,
}

impl SpectrumWindow {
    pub fn new(lambda_min: f64, lambda_max: f64, box_radius: u32) -> Result<Self> {
        if !lambda_min.is_finite() || !lambda_max.is_finite() {
            return Err(Error::NonFinite {
                what: "spectrum window",
            });
        }
        if lambda_min > lambda_max {
            return Err(Error::InvertedWindow {
                min: lambda_min,
                max: lambda_max,
            });
        }
        if box_radius < 1 {
            return Err(Error::InvalidParameter {
                name: "box_radius",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self {
            lambda_min,
            lambda_max,
            box_radius,
        })
    }

    pub fn contains(&self, lambda: f64) -> bool {
        lambda >= self.lambda_min && lambda <= self.lambda_max
    }

    pub fn with_box_radius(&self, box_radius: u32) -> Result<Self> {
        Self::new(self.lambda_min, self.lambda_max, box_radius)
    }

    /// Number of lattice points in the box, `(2M + 1)ⁿ`.
    pub fn point_count(&self, n: usize) -> u128 {
        (2 * self.box_radius as u128 + 1).saturating_pow(n as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub eigenvalue: f64,
    pub witness: LatticePoint,
}

/// A cluster of enumerated eigenvalues equal within [`EIGENVALUE_DEDUP_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralValue {
    pub eigenvalue: f64,
    /// Witness count inside the box; box-relative, not the true multiplicity.
    pub multiplicity: usize,
    pub witnesses: Vec<LatticePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    /// Sorted by eigenvalue, ties broken by lexicographic witness order.
    pub entries: Vec<SpectrumEntry>,
    pub window: SpectrumWindow,
    /// True when no lattice point outside the box can reach the window.
    pub complete_below_box: bool,
}

impl SpectrumSample {
    /// Clusters the entries into distinct values.
    ///
    /// Consecutive entries closer than `tol` share a cluster; the reported
    /// eigenvalue is the one of the witness with the smallest sup-norm, so the
    /// zero mode always reports exactly `0`.
    pub fn distinct_with_tol(&self, tol: f64) -> Vec<SpectralValue> {
        let mut out: Vec<SpectralValue> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        let mut best_norm = i64::MAX;
        for e in &self.entries {
            let start_new = out.is_empty() || e.eigenvalue - last > tol;
            if start_new {
                out.push(SpectralValue {
                    eigenvalue: e.eigenvalue,
                    multiplicity: 0,
                    witnesses: Vec::new(),
                });
                best_norm = i64::MAX;
            }
            let cluster = out.last_mut().expect("cluster pushed above");
            let norm = e.witness.sup_norm();
            if norm < best_norm {
                best_norm = norm;
                cluster.eigenvalue = e.eigenvalue;
            }
            cluster.multiplicity += 1;
            cluster.witnesses.push(e.witness.clone());
            last = e.eigenvalue;
        }
        out
    }

    pub fn distinct(&self) -> Vec<SpectralValue> {
        self.distinct_with_tol(EIGENVALUE_DEDUP_TOL)
    }

    pub fn distinct_values(&self) -> Vec<f64> {
        self.distinct().into_iter().map(|v| v.eigenvalue).collect()
    }

    /// Smallest gap between consecutive distinct values, if at least two exist.
    pub fn min_gap(&self) -> Option<f64> {
        let vals = self.distinct_values();
        vals.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationOptions {
    pub budget: u64,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_POINT_BUDGET,
        }
    }
}

pub fn enumerate_spectrum(g: &DeformationParameter, window: &SpectrumWindow) -> Result<SpectrumSample> {
    enumerate_spectrum_with(g, window, EnumerationOptions::default())
}

/// Enumerates `−4π² Q_S(m)` for all `‖m‖_∞ ≤ M` landing in the window.
///
/// Slabs of fixed first coordinate are processed in parallel and merged by
/// the sort order, so the output does not depend on scheduling.
pub fn enumerate_spectrum_with(
    g: &DeformationParameter,
    window: &SpectrumWindow,
    opts: EnumerationOptions,
) -> Result<SpectrumSample> {
    if window.lambda_min > window.lambda_max {
        return Err(Error::InvertedWindow {
            min: window.lambda_min,
            max: window.lambda_max,
        });
    }
    let n = g.dim();
    let required = window.point_count(n);
    if required > opts.budget as u128 {
        return Err(Error::Budget {
            required,
            budget: opts.budget,
        });
    }
    let m = window.box_radius as i64;
    let form = g.form();

    let mut entries: Vec<SpectrumEntry> = (-m..=m)
        .into_par_iter()
        .map(|first| {
            let mut slab = Vec::new();
            let mut coords = vec![-m; n];
            coords[0] = first;
            loop {
                let lambda = spectral_value(quadform::evaluate_coords(form, &coords).expect("dimension matches"));
                if window.contains(lambda) {
                    slab.push(SpectrumEntry {
                        eigenvalue: lambda,
                        witness: LatticePoint(coords.clone()),
                    });
                }
                if !advance(&mut coords[1..], m) {
                    break;
                }
            }
            slab
        })
        .flatten()
        .collect();

    entries.sort_by(|a, b| {
        a.eigenvalue
            .total_cmp(&b.eigenvalue)
            .then_with(|| a.witness.cmp(&b.witness))
    });

    Ok(SpectrumSample {
        entries,
        window: *window,
        complete_below_box: complete_below_box(g, window),
    })
}

/// Odometer step over `[-m, m]^k`; returns false once it wraps around.
fn advance(coords: &mut [i64], m: i64) -> bool {
    for c in coords.iter_mut().rev() {
        if *c < m {
            *c += 1;
            return true;
        }
        *c = -m;
    }
    false
}

/// Definite forms satisfy `|Q(m)| ≥ |λ|_min ‖m‖₂² ≥ |λ|_min (M+1)²` outside the
/// box; if that bound already leaves the window, the box is exhaustive.
fn complete_below_box(g: &DeformationParameter, window: &SpectrumWindow) -> bool {
    let sig = g.signature();
    if !sig.is_definite() {
        return false;
    }
    let eig = g.form().matrix().clone().symmetric_eigenvalues();
    let smallest = eig.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let outside = FOUR_PI_SQ * smallest * ((window.box_radius as f64) + 1.0).powi(2);
    if sig.q == 0 {
        -outside < window.lambda_min
    } else {
        outside > window.lambda_max
    }
}

/// `−4π² Q`, with `+0.0` for null vectors rather than `−0.0`.
fn spectral_value(q: f64) -> f64 {
    -FOUR_PI_SQ * q + 0.0
}

/// Result of a finite-difference check of one eigenfunction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenfunctionCheck {
    pub eigenvalue: f64,
    /// Grid spacing `h = 1/N` in lattice coordinates.
    pub spacing: f64,
    pub absolute_residual: f64,
    /// `absolute_residual / |eigenvalue|`, or the absolute residual when the eigenvalue is zero.
    pub relative_residual: f64,
}

/// Samples `f_m` on an `Nⁿ` grid of the fundamental domain `g·[0,1)ⁿ`, applies
/// the second-difference Laplacian of `ℝ^{p,q}`, and compares against
/// [`eigenvalue_of`].
///
/// In lattice coordinates `y = g⁻¹x` the flat Laplacian becomes
/// `Σ S_ab ∂_a ∂_b`; pure terms use the three-point stencil and mixed terms
/// the four-point cross stencil, both with periodic wraparound.
pub fn verify_eigenfunction(
    g: &DeformationParameter,
    m: &LatticePoint,
    grid_points_per_axis: usize,
) -> Result<EigenfunctionCheck> {
    let n = g.dim();
    if m.dim() != n {
        return Err(Error::DimensionMismatch {
            form: n,
            point: m.dim(),
        });
    }
    if grid_points_per_axis < 8 {
        return Err(Error::InvalidParameter {
            name: "grid_points_per_axis",
            reason: format!("must be at least 8, got {grid_points_per_axis}"),
        });
    }
    let big_n = grid_points_per_axis;
    let total = (big_n as u128).saturating_pow(n as u32);
    if total > MAX_GRID_POINTS as u128 {
        return Err(Error::Budget {
            required: total,
            budget: MAX_GRID_POINTS,
        });
    }
    let total = total as usize;
    let lambda = eigenvalue_of(g, m)?;
    let h = 1.0 / big_n as f64;
    let s = g.form().matrix();

    let strides: Vec<usize> = (0..n).map(|a| big_n.pow((n - 1 - a) as u32)).collect();
    let index_of = |idx: &[usize]| idx.iter().zip(&strides).map(|(i, s)| i * s).sum::<usize>();
    let unravel = |mut flat: usize| {
        let mut idx = vec![0usize; n];
        for a in 0..n {
            idx[a] = flat / strides[a];
            flat %= strides[a];
        }
        idx
    };

    // f(k) = exp(2πi m·k / N), phase reduced exactly in integers
    let big_n_i = big_n as i64;
    let samples: Vec<Complex<f64>> = (0..total)
        .map(|flat| {
            let idx = unravel(flat);
            let phase = idx
                .iter()
                .zip(m.coords())
                .map(|(&k, &mi)| (k as i64 * mi.rem_euclid(big_n_i)).rem_euclid(big_n_i))
                .sum::<i64>()
                .rem_euclid(big_n_i);
            Complex::from_polar(1.0, 2.0 * PI * phase as f64 / big_n as f64)
        })
        .collect();

    let shift = |idx: &[usize], a: usize, d: isize| {
        let mut out = idx.to_vec();
        out[a] = (idx[a] as isize + d).rem_euclid(big_n as isize) as usize;
        out
    };
    let inv_h2 = 1.0 / (h * h);

    let worst = (0..total)
        .into_par_iter()
        .map(|flat| {
            let idx = unravel(flat);
            let center = samples[flat];
            let mut lap = Complex::new(0.0, 0.0);
            for a in 0..n {
                let saa = s[(a, a)];
                if saa != 0.0 {
                    let plus = samples[index_of(&shift(&idx, a, 1))];
                    let minus = samples[index_of(&shift(&idx, a, -1))];
                    lap += (plus - center * 2.0 + minus) * (saa * inv_h2);
                }
                for b in (a + 1)..n {
                    let sab = s[(a, b)];
                    if sab == 0.0 {
                        continue;
                    }
                    let pp = samples[index_of(&shift(&shift(&idx, a, 1), b, 1))];
                    let pm = samples[index_of(&shift(&shift(&idx, a, 1), b, -1))];
                    let mp = samples[index_of(&shift(&shift(&idx, a, -1), b, 1))];
                    let mm = samples[index_of(&shift(&shift(&idx, a, -1), b, -1))];
                    // 2 S_ab ∂_a∂_b, cross stencil carries 1/(4h²)
                    lap += (pp - pm - mp + mm) * (2.0 * sab * inv_h2 * 0.25);
                }
            }
            (lap - center * lambda).norm()
        })
        .reduce(|| 0.0, f64::max);

    let relative = if lambda != 0.0 { worst / lambda.abs() } else { worst };
    Ok(EigenfunctionCheck {
        eigenvalue: lambda,
        spacing: h,
        absolute_residual: worst,
        relative_residual: relative,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityScan {
    /// Eigenvalues present (within the match tolerance) in every sampled spectrum.
    pub common: Vec<f64>,
    pub samples_used: usize,
    pub rejected_draws: usize,
    pub match_tol: f64,
}

/// Intersects the windowed spectra of `samples` random perturbations
/// `g0 + δ`, `δ_ij ~ U[−radius, radius]`.
///
/// Draws with `|det| < 1e-8` (or rejected as singular relative to their norm)
/// are redrawn, up to 100 attempts per requested sample.
pub fn stability_scan<R: Rng + ?Sized>(
    g0: &DeformationParameter,
    radius: f64,
    samples: usize,
    window: &SpectrumWindow,
    match_tol: f64,
    opts: EnumerationOptions,
    rng: &mut R,
) -> Result<StabilityScan> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "radius",
            reason: format!("must be positive, got {radius}"),
        });
    }
    if samples < 1 {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: "must be at least 1".into(),
        });
    }
    if match_tol.is_nan() || match_tol < 0.0 {
        return Err(Error::InvalidParameter {
            name: "match_tol",
            reason: format!("must be nonnegative, got {match_tol}"),
        });
    }
    let n = g0.dim();
    let mut deformations = Vec::with_capacity(samples);
    let mut rejected = 0usize;
    let max_attempts = 100 * samples;
    let mut attempts = 0usize;
    while deformations.len() < samples && attempts < max_attempts {
        attempts += 1;
        let delta = DMatrix::from_fn(n, n, |_, _| rng.random_range(-radius..=radius));
        let g = g0.g() + delta;
        if g.determinant().abs() < PERTURBATION_DET_FLOOR {
            rejected += 1;
            continue;
        }
        match DeformationParameter::new(g, g0.signature()) {
            Ok(d) => deformations.push(d),
            Err(Error::Singular { .. }) => rejected += 1,
            Err(e) => return Err(e),
        }
    }
    if deformations.is_empty() {
        return Err(Error::Sampling(format!(
            "all {attempts} perturbation draws were singular"
        )));
    }

    let spectra: Vec<Vec<f64>> = deformations
        .par_iter()
        .map(|d| enumerate_spectrum_with(d, window, opts).map(|s| s.distinct_values()))
        .collect::<Result<_>>()?;

    let mut common = spectra[0].clone();
    for other in &spectra[1..] {
        common.retain(|&v| has_match(other, v, match_tol));
    }
    Ok(StabilityScan {
        common,
        samples_used: deformations.len(),
        rejected_draws: rejected,
        match_tol,
    })
}

/// `sorted` must be ascending.
fn has_match(sorted: &[f64], v: f64, tol: f64) -> bool {
    let i = sorted.partition_point(|&x| x < v - tol);
    sorted.get(i).is_some_and(|&x| (x - v).abs() <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DensityClass {
    DenseSuspected,
    DiscreteSuspected,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityOptions {
    pub rational_bound: i64,
    pub rational_tol: f64,
    pub shrink_factor: f64,
    pub budget: u64,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self {
            rational_bound: quadform::DEFAULT_RATIONAL_BOUND,
            rational_tol: quadform::DEFAULT_RATIONAL_TOL,
            shrink_factor: DEFAULT_SHRINK_FACTOR,
            budget: DEFAULT_POINT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub box_radius: u32,
    pub min_gap: f64,
    pub distinct_values: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub gaps: Vec<GapRecord>,
    /// First box's min gap divided by the last box's.
    pub shrink_ratio: f64,
    pub classification: DensityClass,
    pub rationality: Option<ProportionalityCertificate>,
    pub hypotheses_met: bool,
    pub warnings: Vec<String>,
    pub options: DensityOptions,
}

const DENSITY_HYPOTHESES: &str = "n >= 3, p >= 2, q >= 1";

/// Heuristic dense/discrete classification of the spectrum from the behaviour
/// of its minimal gap as the box grows, cross-checked against the
/// integer-proportionality search on the form.
///
/// The windows should share one value range and have increasing box radii.
pub fn density_diagnostics(
    g: &DeformationParameter,
    windows: &[SpectrumWindow],
    opts: DensityOptions,
) -> Result<DensityReport> {
    if windows.is_empty() {
        return Err(Error::InvalidParameter {
            name: "windows",
            reason: "at least one window is required".into(),
        });
    }
    if windows.windows(2).any(|w| w[1].box_radius <= w[0].box_radius) {
        return Err(Error::InvalidParameter {
            name: "windows",
            reason: "box radii must be strictly increasing".into(),
        });
    }
    let sig = g.signature();
    let hypotheses_met = g.dim() >= 3 && sig.p >= 2 && sig.q >= 1;
    let mut warnings = Vec::new();
    if !hypotheses_met {
        warnings.push(format!(
            "signature (p={}, q={}) in dimension {} does not satisfy the dichotomy hypotheses \"{}\"; classification is inconclusive",
            sig.p,
            sig.q,
            g.dim(),
            DENSITY_HYPOTHESES
        ));
    }

    let enum_opts = EnumerationOptions { budget: opts.budget };
    let mut gaps = Vec::with_capacity(windows.len());
    for w in windows {
        let sample = enumerate_spectrum_with(g, w, enum_opts)?;
        let distinct = sample.distinct_values();
        let min_gap = sample.min_gap().ok_or(Error::WindowTooSmall {
            box_radius: w.box_radius,
            distinct: distinct.len(),
        })?;
        gaps.push(GapRecord {
            box_radius: w.box_radius,
            min_gap,
            distinct_values: distinct.len(),
        });
    }
    let shrink_ratio = gaps[0].min_gap / gaps[gaps.len() - 1].min_gap;
    let rationality = integer_proportionality(g.form(), opts.rational_bound, opts.rational_tol);

    let classification = if !hypotheses_met {
        DensityClass::Inconclusive
    } else if rationality.is_some() {
        DensityClass::DiscreteSuspected
    } else if gaps.len() >= 2 && shrink_ratio >= opts.shrink_factor {
        DensityClass::DenseSuspected
    } else {
        DensityClass::Inconclusive
    };

    Ok(DensityReport {
        gaps,
        shrink_ratio,
        classification,
        rationality,
        hypotheses_met,
        warnings,
        options: opts,
    })
}
