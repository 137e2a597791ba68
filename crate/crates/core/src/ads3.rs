//! Discrete subgroups of `SL(2,ℝ) × SL(2,ℝ)` acting on AdS³: word balls,
//! sharpness-driven stable eigenvalues `l(l − 2)`, orbit counts, deformation
//! experiments and Poincaré-type partial sums.
//!
//! Groups are handled as free groups on the given generators. Orbit counts
//! and partial sums use the pseudo-ball `{γ : ‖μ(γ)‖ ≤ R}` around the base
//! point `eH`, measured with the Euclidean norm on the Cartan subspace.
//!
//! The stable spectrum is produced from its closed formula in the sharpness
//! constant. Nothing here solves the Laplace equation on an AdS³ quotient;
//! the checks are on the geometric inputs to the formula.

use std::f64::consts::FRAC_PI_4;

use nalgebra::Matrix2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cartan::{self, cartan_projection, AmbientGroup, ConeSubset, GroupElement, SharpnessEstimate, Sl2Pair};
use crate::error::{Error, Result};
use crate::numeric::{linear_fit, CompensatedSum};

/// Determinant tolerance for presentation generators.
pub const GENERATOR_DET_TOLERANCE: f64 = 1e-9;
/// Frobenius distance below which two enumerated elements are merged.
pub const DEFAULT_DEDUPE_TOL: f64 = 1e-8;
/// Cap on the number of reduced words in one ball.
pub const DEFAULT_WORD_BUDGET: u64 = 10_000_000;
/// Samples whose sharpness constant drops below this are not counted as proper.
pub const PROPERNESS_THRESHOLD: f64 = 0.05;
/// Translation parameter of the standard ping-pong generators.
pub const STANDARD_TRANSLATION: f64 = 2.0;

/// A free group given by generators in `SL(2,ℝ) × SL(2,ℝ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPresentation {
    generators: Vec<Sl2Pair>,
}

impl GroupPresentation {
    pub fn new(generators: Vec<Sl2Pair>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidParameter {
                name: "generators",
                reason: "at least one generator is required".into(),
            });
        }
        for g in &generators {
            Sl2Pair::new(g.left, g.right, GENERATOR_DET_TOLERANCE)?;
        }
        Ok(Self { generators })
    }

    /// Rank-2 Schottky group in the first factor: `a = diag(e^t, e^{-t})` and
    /// its conjugate by the rotation through π/4, with `t = 2`. Their fixed
    /// points `{0, ∞}` and `{±1}` have disjoint ping-pong neighbourhoods once
    /// `e^{2t} > 3 + 2√2`.
    pub fn standard() -> Self {
        Self::ping_pong(STANDARD_TRANSLATION)
    }

    pub fn ping_pong(t: f64) -> Self {
        let a = Sl2Pair::left_hyperbolic(t);
        let (c, s) = (FRAC_PI_4.cos(), FRAC_PI_4.sin());
        let rot = Sl2Pair {
            left: Matrix2::new(c, -s, s, c),
            right: Matrix2::identity(),
        };
        Self {
            generators: vec![a, a.conjugate_by(&rot)],
        }
    }

    /// Cyclic group generated by `(diag(e^t, e^{-t}), I)`.
    pub fn rank_one(t: f64) -> Self {
        Self {
            generators: vec![Sl2Pair::left_hyperbolic(t)],
        }
    }

    pub fn generators(&self) -> &[Sl2Pair] {
        &self.generators
    }

    pub fn free_rank(&self) -> usize {
        self.generators.len()
    }

    /// Conjugates every generator by `k`.
    pub fn conjugated(&self, k: &Sl2Pair) -> Self {
        Self {
            generators: self.generators.iter().map(|g| g.conjugate_by(k)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    /// `+1` or `-1`.
    pub exponent: i8,
}

impl Letter {
    fn inverse(self) -> Self {
        Self {
            generator: self.generator,
            exponent: -self.exponent,
        }
    }
}

/// A reduced word with its matrix realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupWord {
    pub letters: Vec<Letter>,
    pub element: Sl2Pair,
}

impl GroupWord {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordBall {
    /// Nonempty reduced words, ordered by length then generation order,
    /// with near-duplicates removed.
    pub words: Vec<GroupWord>,
    pub radius: u32,
    /// Reduced words generated before merging.
    pub generated: usize,
    /// Words merged into an earlier word or the identity.
    pub merged: usize,
    pub warnings: Vec<String>,
}

impl WordBall {
    pub fn elements(&self) -> Vec<GroupElement> {
        self.words.iter().map(|w| GroupElement::Pair(w.element)).collect()
    }
}

/// Number of reduced words of length exactly `len` in a free group of rank `k`.
pub fn reduced_word_count(rank: usize, len: u32) -> u128 {
    if len == 0 {
        return 1;
    }
    let k = rank as u128;
    (2 * k).saturating_mul((2 * k - 1).saturating_pow(len - 1))
}

pub fn enumerate_ball(presentation: &GroupPresentation, word_radius: u32, dedupe_tol: f64) -> Result<WordBall> {
    enumerate_ball_with(presentation, word_radius, dedupe_tol, DEFAULT_WORD_BUDGET)
}

/// All reduced words of length `1..=word_radius`, built shell by shell.
pub fn enumerate_ball_with(
    presentation: &GroupPresentation,
    word_radius: u32,
    dedupe_tol: f64,
    budget: u64,
) -> Result<WordBall> {
    if word_radius < 1 {
        return Err(Error::InvalidParameter {
            name: "word_radius",
            reason: "must be at least 1".into(),
        });
    }
    let k = presentation.free_rank();
    let required: u128 = (1..=word_radius).map(|l| reduced_word_count(k, l)).sum();
    if required > budget as u128 {
        return Err(Error::Budget { required, budget });
    }

    let letters: Vec<(Letter, Sl2Pair)> = presentation
        .generators
        .iter()
        .enumerate()
        .flat_map(|(i, g)| {
            [
                (
                    Letter {
                        generator: i,
                        exponent: 1,
                    },
                    *g,
                ),
                (
                    Letter {
                        generator: i,
                        exponent: -1,
                    },
                    g.inverse(),
                ),
            ]
        })
        .collect();

    let mut shell: Vec<GroupWord> = letters
        .iter()
        .map(|(l, g)| GroupWord {
            letters: vec![*l],
            element: *g,
        })
        .collect();
    let mut words = shell.clone();
    for _ in 1..word_radius {
        shell = shell
            .par_iter()
            .flat_map_iter(|w| {
                let last = *w.letters.last().expect("words are nonempty");
                letters
                    .iter()
                    .filter(move |(l, _)| *l != last.inverse())
                    .map(move |(l, g)| {
                        let mut ls = w.letters.clone();
                        ls.push(*l);
                        GroupWord {
                            letters: ls,
                            element: w.element.mul(g),
                        }
                    })
            })
            .collect();
        words.extend(shell.iter().cloned());
    }

    let generated = words.len();
    let duplicate = near_duplicates(&words, dedupe_tol);
    let merged = duplicate.iter().filter(|&&d| d).count();
    let mut warnings = Vec::new();
    if merged > 0 {
        warnings.push(format!(
            "{merged} word(s) coincide within {dedupe_tol:e} with shorter words or the identity; the presentation may not be free or the group may not be discrete"
        ));
    }
    let words = words
        .into_iter()
        .zip(duplicate)
        .filter_map(|(w, d)| (!d).then_some(w))
        .collect();
    Ok(WordBall {
        words,
        radius: word_radius,
        generated,
        merged,
        warnings,
    })
}

/// Flags every word lying within `tol` (Frobenius) of the identity or of an
/// earlier word. Candidates are found by a sweep over the sorted `(0,0)` entry
/// of the first factor.
fn near_duplicates(words: &[GroupWord], tol: f64) -> Vec<bool> {
    let mut dup = vec![false; words.len()];
    if tol.is_nan() || tol <= 0.0 {
        return dup;
    }
    let identity = Sl2Pair::identity();
    // index 0 is the identity, word i sits at i + 1
    let elements: Vec<&Sl2Pair> = std::iter::once(&identity)
        .chain(words.iter().map(|w| &w.element))
        .collect();
    let mut order: Vec<usize> = (0..elements.len()).collect();
    order.sort_by(|&a, &b| elements[a].left[(0, 0)].total_cmp(&elements[b].left[(0, 0)]));
    for (pos, &i) in order.iter().enumerate() {
        let key = elements[i].left[(0, 0)];
        for &j in order[pos + 1..].iter() {
            if elements[j].left[(0, 0)] - key >= tol {
                break;
            }
            if elements[i].frobenius_distance(elements[j]) < tol {
                let later = i.max(j);
                if later > 0 {
                    dup[later - 1] = true;
                }
            }
        }
    }
    dup
}

/// Sharpness of a word ball against `μ(H)`, recording the ball radius.
pub fn ball_sharpness(ball: &WordBall, mu_h: &ConeSubset, c_prime_cap: f64) -> Result<SharpnessEstimate> {
    let mut est = cartan::estimate_sharpness(AmbientGroup::Sl2xSl2, &ball.elements(), mu_h, c_prime_cap)?;
    est.word_radius = ball.radius;
    Ok(est)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableSpectrum {
    pub c: f64,
    pub l_min: u64,
    pub l_max: u64,
    /// `l(l − 2)` for `l = l_min ..= l_max`.
    pub eigenvalues: Vec<i64>,
}

impl StableSpectrum {
    pub fn pairs(&self) -> Vec<(u64, i64)> {
        (self.l_min..=self.l_max)
            .zip(self.eigenvalues.iter().copied())
            .collect()
    }
}

/// Smallest integer `≥ 10 C⁻³`.
///
/// Values within a few ulps of an integer are snapped to it, so that e.g.
/// `C = 1/2` gives exactly 80.
pub fn stable_l_min(c: f64) -> Result<u64> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "C",
            reason: format!("sharpness constant must lie in (0, 1], got {c}"),
        });
    }
    let x = 10.0 / (c * c * c);
    if !x.is_finite() || x > 9.0e15 {
        return Err(Error::InvalidParameter {
            name: "C",
            reason: format!("10 C^-3 = {x:e} is out of range"),
        });
    }
    let nearest = x.round();
    let l = if (x - nearest).abs() <= 8.0 * f64::EPSILON * x {
        nearest
    } else {
        x.ceil()
    };
    Ok(l as u64)
}

/// `{l(l − 2) : l_min ≤ l ≤ l_max}` with `l_min = ⌈10 C⁻³⌉`.
pub fn stable_spectrum(c: f64, l_max: u64) -> Result<StableSpectrum> {
    let l_min = stable_l_min(c)?;
    if l_max < l_min {
        return Err(Error::InvalidParameter {
            name: "l_max",
            reason: format!("l_max = {l_max} is below l_min = {l_min}; the range would be empty"),
        });
    }
    if l_max > 3_000_000_000 {
        return Err(Error::InvalidParameter {
            name: "l_max",
            reason: "l(l - 2) would overflow".into(),
        });
    }
    let eigenvalues = (l_min..=l_max).map(|l| (l as i64) * (l as i64 - 2)).collect();
    Ok(StableSpectrum {
        c,
        l_min,
        l_max,
        eigenvalues,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitCount {
    pub radii: Vec<f64>,
    /// `N(R)`, identity included.
    pub counts: Vec<u64>,
    /// Least-squares slope of `ln N` against `R` over radii with `N ≥ 2`.
    pub fitted_slope: Option<f64>,
    pub word_radius: u32,
    /// Largest `‖μ(γ)‖` in the word ball.
    pub ball_max_norm: f64,
    /// Smallest `‖μ(γ)‖` among words of maximal length; radii up to this
    /// value are treated as fully covered by the ball.
    pub complete_radius: f64,
    /// True when the largest radius exceeds `ball_max_norm` (counts are lower bounds).
    pub incomplete: bool,
}

fn ball_norms(ball: &WordBall) -> Result<Vec<(usize, f64)>> {
    ball.words
        .par_iter()
        .map(|w| {
            let mu = cartan_projection(AmbientGroup::Sl2xSl2, &GroupElement::Pair(w.element))?;
            Ok((w.len(), mu.norm()))
        })
        .collect()
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::InvalidParameter {
            name: "radii",
            reason: "at least one radius is required".into(),
        });
    }
    if radii.iter().any(|r| !r.is_finite() || *r <= 0.0) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "radii",
            reason: "radii must be positive and strictly increasing".into(),
        });
    }
    Ok(())
}

/// `N(R) = #{γ : ‖μ(γ)‖ ≤ R}` over the word ball of the given radius.
pub fn orbit_count(presentation: &GroupPresentation, word_radius: u32, radii: &[f64]) -> Result<OrbitCount> {
    check_radii(radii)?;
    let ball = enumerate_ball(presentation, word_radius, DEFAULT_DEDUPE_TOL)?;
    orbit_count_in_ball(&ball, radii)
}

pub fn orbit_count_in_ball(ball: &WordBall, radii: &[f64]) -> Result<OrbitCount> {
    check_radii(radii)?;
    let with_len = ball_norms(ball)?;
    let mut norms: Vec<f64> = with_len.iter().map(|&(_, n)| n).collect();
    norms.push(0.0);
    norms.sort_by(f64::total_cmp);
    let counts: Vec<u64> = radii
        .iter()
        .map(|&r| norms.partition_point(|&n| n <= r) as u64)
        .collect();

    let (xs, ys): (Vec<f64>, Vec<f64>) = radii
        .iter()
        .zip(&counts)
        .filter(|(_, &c)| c >= 2)
        .map(|(&r, &c)| (r, (c as f64).ln()))
        .unzip();
    let fitted_slope = linear_fit(&xs, &ys).map(|(m, _)| m);

    let ball_max_norm = norms.last().copied().unwrap_or(0.0);
    let max_len = ball.radius as usize;
    let complete_radius = with_len
        .iter()
        .filter(|&&(l, _)| l == max_len)
        .map(|&(_, n)| n)
        .fold(f64::INFINITY, f64::min);
    let complete_radius = if complete_radius.is_finite() {
        complete_radius
    } else {
        ball_max_norm
    };
    Ok(OrbitCount {
        radii: radii.to_vec(),
        counts,
        fitted_slope,
        word_radius: ball.radius,
        ball_max_norm,
        complete_radius,
        incomplete: ball_max_norm < *radii.last().expect("radii nonempty"),
    })
}

/// `exp(X)` for traceless `X`, from `X² = −det(X)·I`.
pub fn exp_traceless(x: &Matrix2<f64>) -> Matrix2<f64> {
    let delta = -x.determinant();
    let id = Matrix2::identity();
    if delta > 0.0 {
        let s = delta.sqrt();
        id * s.cosh() + x * (s.sinh() / s)
    } else if delta < 0.0 {
        let s = (-delta).sqrt();
        id * s.cos() + x * (s.sin() / s)
    } else {
        id + x
    }
}

fn random_traceless<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Matrix2<f64> {
    if scale == 0.0 {
        return Matrix2::zeros();
    }
    let a = rng.random_range(-scale..=scale);
    let b = rng.random_range(-scale..=scale);
    let c = rng.random_range(-scale..=scale);
    Matrix2::new(a, b, c, -a)
}

fn renormalize(m: Matrix2<f64>) -> Matrix2<f64> {
    let det = m.determinant();
    if (det - 1.0).abs() <= 1e-12 || det <= 0.0 {
        m
    } else {
        m / det.sqrt()
    }
}

/// Multiplies each generator by `exp` of a random traceless pair with entries
/// in `[−scale, scale]`.
pub fn perturb_presentation<R: Rng + ?Sized>(
    presentation: &GroupPresentation,
    scale: f64,
    rng: &mut R,
) -> GroupPresentation {
    let generators = presentation
        .generators
        .iter()
        .map(|g| {
            let xl = random_traceless(scale, rng);
            let xr = random_traceless(scale, rng);
            Sl2Pair {
                left: renormalize(exp_traceless(&xl) * g.left),
                right: renormalize(exp_traceless(&xr) * g.right),
            }
        })
        .collect();
    GroupPresentation { generators }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityExperiment {
    /// `(l, l(l − 2))` shared by every sampled deformation.
    pub common_spectrum: Vec<(u64, i64)>,
    pub l_min: Option<u64>,
    pub min_c: f64,
    pub unperturbed_c: f64,
    pub sample_cs: Vec<f64>,
    pub all_proper_on_sample: bool,
    pub perturbation_scale: f64,
}

/// Sharpness constant of the word ball against the diagonal ray, `C′ = 0`.
/// Non-sharp balls report the floor value.
fn sharpness_against_diagonal(p: &GroupPresentation, word_radius: u32) -> Result<SharpnessEstimate> {
    let ball = enumerate_ball(p, word_radius, DEFAULT_DEDUPE_TOL)?;
    ball_sharpness(&ball, &ConeSubset::diagonal_ray(), 0.0)
}

/// Samples deformations near the presentation and tracks the sharpness
/// constant, hence the common part of the stable spectra.
pub fn stability_experiment<R: Rng + ?Sized>(
    presentation: &GroupPresentation,
    perturbation_scale: f64,
    samples: usize,
    word_radius: u32,
    l_max: u64,
    rng: &mut R,
) -> Result<StabilityExperiment> {
    if !perturbation_scale.is_finite() || perturbation_scale < 0.0 {
        return Err(Error::InvalidParameter {
            name: "perturbation_scale",
            reason: format!("must be nonnegative, got {perturbation_scale}"),
        });
    }
    if samples < 2 {
        return Err(Error::InvalidParameter {
            name: "samples",
            reason: "at least 2 samples are required".into(),
        });
    }
    let unperturbed_c = sharpness_against_diagonal(presentation, word_radius)?.c;
    let deformed: Vec<GroupPresentation> = (0..samples)
        .map(|_| perturb_presentation(presentation, perturbation_scale, rng))
        .collect();
    let estimates: Vec<SharpnessEstimate> = deformed
        .par_iter()
        .map(|p| sharpness_against_diagonal(p, word_radius))
        .collect::<Result<_>>()?;

    let sample_cs: Vec<f64> = estimates.iter().map(|e| e.c).collect();
    let min_c = sample_cs.iter().copied().fold(f64::INFINITY, f64::min);
    let all_proper_on_sample = estimates.iter().all(|e| e.sharp && e.c >= PROPERNESS_THRESHOLD);
    let (common_spectrum, l_min) = match stable_spectrum(min_c, l_max) {
        Ok(s) => (s.pairs(), Some(s.l_min)),
        Err(_) => (Vec::new(), stable_l_min(min_c).ok()),
    };
    Ok(StabilityExperiment {
        common_spectrum,
        l_min,
        min_c,
        unperturbed_c,
        sample_cs,
        all_proper_on_sample,
        perturbation_scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialSum {
    pub radius: u32,
    /// `1 + Σ_{1 ≤ |γ| ≤ radius} exp(−a‖μ(γ)‖)`.
    pub partial_sum: f64,
    /// Contribution of words with length in `(previous radius, radius]`.
    pub increment: f64,
    pub words: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareSeries {
    pub decay_rate: f64,
    pub rows: Vec<PartialSum>,
    /// Increments failed to decrease at the end of the schedule.
    pub divergence_suspected: bool,
}

/// Partial sums of `Σ_γ exp(−a‖μ(γ)‖)` over growing word balls, as a scalar
/// convergence proxy for Poincaré series over the orbit.
pub fn poincare_partial_sums(
    presentation: &GroupPresentation,
    decay_rate: f64,
    word_radius_schedule: &[u32],
) -> Result<PoincareSeries> {
    if !decay_rate.is_finite() || decay_rate < 0.0 {
        return Err(Error::InvalidParameter {
            name: "decay_rate",
            reason: format!("must be nonnegative, got {decay_rate}"),
        });
    }
    if word_radius_schedule.is_empty()
        || word_radius_schedule[0] < 1
        || word_radius_schedule.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::InvalidParameter {
            name: "word_radius_schedule",
            reason: "must be a nonempty strictly increasing list of positive radii".into(),
        });
    }
    let max_radius = *word_radius_schedule.last().expect("nonempty");
    let ball = enumerate_ball(presentation, max_radius, DEFAULT_DEDUPE_TOL)?;
    poincare_in_ball(&ball, decay_rate, word_radius_schedule)
}

/// As [`poincare_partial_sums`], over an already enumerated ball whose radius
/// covers the schedule.
pub fn poincare_in_ball(ball: &WordBall, decay_rate: f64, word_radius_schedule: &[u32]) -> Result<PoincareSeries> {
    if !decay_rate.is_finite() || decay_rate < 0.0 {
        return Err(Error::InvalidParameter {
            name: "decay_rate",
            reason: format!("must be nonnegative, got {decay_rate}"),
        });
    }
    if word_radius_schedule.is_empty()
        || word_radius_schedule[0] < 1
        || word_radius_schedule.windows(2).any(|w| w[1] <= w[0])
        || *word_radius_schedule.last().expect("nonempty") > ball.radius
    {
        return Err(Error::InvalidParameter {
            name: "word_radius_schedule",
            reason: format!(
                "must be a nonempty strictly increasing list of positive radii not exceeding {}",
                ball.radius
            ),
        });
    }
    let norms = ball_norms(ball)?;

    let mut acc = CompensatedSum::new();
    acc.add(1.0);
    let mut words = 1u64;
    let mut idx = 0;
    let mut rows = Vec::with_capacity(word_radius_schedule.len());
    for &radius in word_radius_schedule {
        // the shell is summed on its own so tiny increments survive
        let mut shell = CompensatedSum::new();
        while idx < norms.len() && norms[idx].0 <= radius as usize {
            let term = (-decay_rate * norms[idx].1).exp();
            acc.add(term);
            shell.add(term);
            words += 1;
            idx += 1;
        }
        rows.push(PartialSum {
            radius,
            partial_sum: acc.value(),
            increment: shell.value(),
            words,
        });
    }
    let divergence_suspected = rows.len() >= 2 && {
        let n = rows.len();
        rows[n - 1].increment >= rows[n - 2].increment
    };
    Ok(PoincareSeries {
        decay_rate,
        rows,
        divergence_suspected,
    })
}
