//! The discretized 1D sampling density and its Fourier-side
//! representations.
//!
//! The pipeline is `masses -> sqrt -> unitary DFT -> complex unit sphere`,
//! with the 2m-dimensional real sphere parametrized by 2m-1 angles. All
//! maps preserve the relevant 2-norms, so any point the optimizer visits
//! in angle space inverts to a valid probability distribution with no
//! renormalization step.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::design::DesignMatrix;
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-12;
const TAU: f64 = std::f64::consts::TAU;

/// Masses of `m` equal-width cells of `[0, 1]`, summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMassFunction {
    masses: Vec<f64>,
}

impl ProbabilityMassFunction {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidMasses("no cells".into()));
        }
        if let Some(&bad) = masses.iter().find(|&&p| p.is_nan() || p < 0.0) {
            return Err(Error::InvalidMasses(format!("negative or NaN mass {bad}")));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidMasses(format!("masses sum to {total}, not 1")));
        }
        Ok(Self { masses })
    }

    /// The uniform distribution over `m` cells.
    pub fn uniform(m: usize) -> Self {
        assert!(m >= 1, "cell count must be positive");
        Self {
            masses: vec![1.0 / m as f64; m],
        }
    }

    pub fn m(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }
}

/// Elementwise square roots of the masses; unit Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SqrtMassVector {
    amplitudes: Vec<f64>,
}

impl SqrtMassVector {
    pub fn new(amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidAmplitudes("no cells".into()));
        }
        if let Some(&bad) = amplitudes.iter().find(|&&q| q.is_nan() || q < 0.0) {
            return Err(Error::InvalidAmplitudes(format!(
                "negative or NaN amplitude {bad}"
            )));
        }
        let norm2: f64 = amplitudes.iter().map(|q| q * q).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidAmplitudes(format!(
                "squared norm is {norm2}, not 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }
}

/// `m` complex Fourier coefficients with unit 2-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficientVector {
    coefficients: Vec<Complex64>,
}

impl FourierCoefficientVector {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidCoefficients("no coefficients".into()));
        }
        let norm2: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if !norm2.is_finite() || (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidCoefficients(format!(
                "squared norm is {norm2}, not 1"
            )));
        }
        Ok(Self { coefficients })
    }

    pub fn m(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }
}

/// `2m - 1` angles in `[0, 2pi]` parametrizing the unit sphere in C^m.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerAngleVector {
    angles: Vec<f64>,
}

impl EulerAngleVector {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() || angles.len().is_multiple_of(2) {
            return Err(Error::InvalidAngles(format!(
                "need an odd count 2m-1 of angles, got {}",
                angles.len()
            )));
        }
        if let Some(&bad) = angles.iter().find(|&&t| !(0.0..=TAU).contains(&t)) {
            return Err(Error::InvalidAngles(format!(
                "angle {bad} outside [0, 2pi]"
            )));
        }
        Ok(Self { angles })
    }

    /// Clamps each angle into `[0, 2pi]` and reports whether any clamp
    /// fired. Non-finite input is rejected.
    pub fn from_clamped(angles: &[f64]) -> Result<(Self, bool)> {
        if let Some(&bad) = angles.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidAngles(format!("non-finite angle {bad}")));
        }
        let mut clamped = false;
        let fixed: Vec<f64> = angles
            .iter()
            .map(|&t| {
                let c = t.clamp(0.0, TAU);
                if c != t {
                    clamped = true;
                }
                c
            })
            .collect();
        Ok((Self::new(fixed)?, clamped))
    }

    /// The number of cells `m` this angle vector corresponds to.
    pub fn m(&self) -> usize {
        self.angles.len().div_ceil(2)
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}

/// `q_i = sqrt(p_i)`. The output invariant holds by construction.
pub fn sqrt_transform(pmf: &ProbabilityMassFunction) -> SqrtMassVector {
    SqrtMassVector {
        amplitudes: pmf.masses.iter().map(|&p| p.sqrt()).collect(),
    }
}

/// Unitary DFT of the sqrt-mass vector: `c_k = m^{-1/2} sum_j q_j w^{jk}`
/// with `w = exp(-2 pi i / m)`. Direct O(m^2) evaluation; `m` is small by
/// design, and the direct sum is bit-stable.
pub fn forward_dft(q: &SqrtMassVector) -> FourierCoefficientVector {
    let m = q.amplitudes.len();
    let scale = 1.0 / (m as f64).sqrt();
    let coefficients = (0..m)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &amp) in q.amplitudes.iter().enumerate() {
                let angle = -TAU * ((j * k) % m) as f64 / m as f64;
                acc += amp * Complex64::from_polar(1.0, angle);
            }
            acc * scale
        })
        .collect();
    FourierCoefficientVector { coefficients }
}

/// Unitary inverse DFT; returns the (generally complex) amplitudes.
pub fn inverse_dft(c: &FourierCoefficientVector) -> Vec<Complex64> {
    let m = c.coefficients.len();
    let scale = 1.0 / (m as f64).sqrt();
    (0..m)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &coef) in c.coefficients.iter().enumerate() {
                let angle = TAU * ((j * k) % m) as f64 / m as f64;
                acc += coef * Complex64::from_polar(1.0, angle);
            }
            acc * scale
        })
        .collect()
}

/// Maps angles to a unit vector in C^m via hyperspherical coordinates on
/// the real 2m-sphere: `v_j = (prod_{k<j} sin t_k) cos t_j` for
/// `j = 1..2m-1` and `v_2m = prod sin t_k`; consecutive real pairs form
/// the complex coefficients. The squared norm is 1 by trigonometric
/// identity for any input, including angles beyond the canonical
/// hyperspherical ranges.
pub fn angles_to_coefficients(theta: &EulerAngleVector) -> FourierCoefficientVector {
    let m = theta.m();
    let mut real = vec![0.0; 2 * m];
    let mut prefix = 1.0;
    for (j, &t) in theta.angles.iter().enumerate() {
        let (sin, cos) = t.sin_cos();
        real[j] = prefix * cos;
        prefix *= sin;
    }
    real[2 * m - 1] = prefix;
    let coefficients = real
        .chunks_exact(2)
        .map(|pair| Complex64::new(pair[0], pair[1]))
        .collect();
    FourierCoefficientVector { coefficients }
}

/// Inverse of [`angles_to_coefficients`]: extracts angles by repeated
/// `atan2` against suffix norms. The first `2m - 2` angles land in
/// `[0, pi]` and the last in `[0, 2pi)`, a valid preimage inside the
/// optimization box. When a suffix of the real vector is entirely zero
/// the corresponding angles are returned as 0 (atan2(0, 0) = 0), which is
/// the documented convention at parametrization singularities.
pub fn coefficients_to_angles(c: &FourierCoefficientVector) -> EulerAngleVector {
    let m = c.coefficients.len();
    let mut real = Vec::with_capacity(2 * m);
    for coef in &c.coefficients {
        real.push(coef.re);
        real.push(coef.im);
    }
    // suffix_sq[j] = sum of squares of real[j..]
    let mut suffix_sq = vec![0.0; 2 * m + 1];
    for j in (0..2 * m).rev() {
        suffix_sq[j] = suffix_sq[j + 1] + real[j] * real[j];
    }
    let mut angles = Vec::with_capacity(2 * m - 1);
    for j in 0..2 * m - 2 {
        angles.push(suffix_sq[j + 1].sqrt().atan2(real[j]));
    }
    let mut last = real[2 * m - 1].atan2(real[2 * m - 2]);
    if last < 0.0 {
        last += TAU;
    }
    angles.push(last);
    EulerAngleVector { angles }
}

/// Inverts coefficients to a mass function: `p_i = |q'_i|^2` where `q'`
/// is the inverse DFT. Parseval guarantees the masses sum to 1, so no
/// renormalization is applied.
pub fn coefficients_to_pmf(c: &FourierCoefficientVector) -> ProbabilityMassFunction {
    let masses = inverse_dft(c).iter().map(|q| q.norm_sqr()).collect();
    ProbabilityMassFunction { masses }
}

/// Draws an `n x d` design by i.i.d. coordinate sampling from `pmf`:
/// inverse-CDF cell selection followed by a uniform draw within the
/// half-open cell `[i/m, (i+1)/m)`. Each coordinate consumes exactly two
/// `f64` draws in row-major order, so the output is a pure function of
/// the generator state.
pub fn sample_design<R: Rng>(
    pmf: &ProbabilityMassFunction,
    n: usize,
    d: usize,
    rng: &mut R,
) -> Result<DesignMatrix> {
    if n == 0 {
        return Err(Error::EmptyDesign);
    }
    if d == 0 {
        return Err(Error::EmptyDimension);
    }
    let m = pmf.m();
    let mut cumulative = Vec::with_capacity(m);
    let mut acc = 0.0;
    for &p in &pmf.masses {
        acc += p;
        cumulative.push(acc);
    }
    let inv_m = 1.0 / m as f64;
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        let u: f64 = rng.random();
        let cell = cumulative.partition_point(|&c| c <= u).min(m - 1);
        let within: f64 = rng.random();
        data.push((cell as f64 + within) * inv_m);
    }
    DesignMatrix::new(data, n, d)
}

/// Persistence format for an optimized density: masses and the angle
/// preimage, plus the run parameters that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PdfDocument {
    pub m: usize,
    pub masses: Vec<f64>,
    pub angles: Vec<f64>,
    pub meta: PdfMeta,
}

/// Provenance block of a [`PdfDocument`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PdfMeta {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub objective_value: f64,
}

impl PdfDocument {
    pub fn new(pmf: &ProbabilityMassFunction, angles: &EulerAngleVector, meta: PdfMeta) -> Self {
        Self {
            m: pmf.m(),
            masses: pmf.masses().to_vec(),
            angles: angles.angles().to_vec(),
            meta,
        }
    }

    pub fn pmf(&self) -> Result<ProbabilityMassFunction> {
        if self.masses.len() != self.m {
            return Err(Error::InvalidMasses(format!(
                "document declares m = {} but carries {} masses",
                self.m,
                self.masses.len()
            )));
        }
        ProbabilityMassFunction::new(self.masses.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
