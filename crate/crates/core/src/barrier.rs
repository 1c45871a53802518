//! Scattering by the rectangular barrier `V = 1` on `[-L, L]`, zero elsewhere.
//!
//! For the equation `u'' - V u + σ² u = 0` the reflection and transmission
//! coefficients are closed-form in `σ` and `q = (σ² - 1)^{1/2}`; resonances
//! are the zeros of the common denominator
//!
//! ```text
//! K(σ) = (q+σ)/(q-σ) e^{-2iqL} - (q-σ)/(q+σ) e^{2iqL}
//! ```
//!
//! and a single resonance determines the half-width through
//! `L = -ln|(q+σ)/(q-σ)| / (2 Im q)`.

use num_complex::Complex64;
use thiserror::Error;

use crate::zscan::{self, ComplexRect, ZeroReport, ZscanError};

#[derive(Debug, Error)]
pub enum BarrierError {
    #[error("half-width must be positive and finite, got {0}")]
    InvalidWidth(f64),
    #[error("σ = {0} is a branch point of q = (σ² - 1)^(1/2)")]
    BranchPointInput(Complex64),
    #[error("window meets the branch cut [-1, 1] of q")]
    WindowOnBranchCut,
    #[error("|Im q| = {im_q:e} is too small to recover L from σ = {sigma}")]
    DegenerateResonance { sigma: Complex64, im_q: f64 },
    #[error("σ = {sigma} yields a non-positive half-width {length}; it is not a resonance")]
    NonPositiveLength { sigma: Complex64, length: f64 },
    #[error(transparent)]
    Zscan(#[from] ZscanError),
}

/// Height of the barrier.
pub const HEIGHT: f64 = 1.0;

const BRANCH_EPS: f64 = 1e-12;
const DEGENERATE_IM_Q: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierModel {
    half_width: f64,
}

impl BarrierModel {
    pub fn new(half_width: f64) -> Result<Self, BarrierError> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(BarrierError::InvalidWidth(half_width));
        }
        Ok(Self { half_width })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn potential(&self, x: f64) -> f64 {
        if x.abs() <= self.half_width {
            HEIGHT
        } else {
            0.0
        }
    }
}

/// S-matrix entries at one complex frequency. `S = [[t, r], [r', t']]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringData {
    pub sigma: Complex64,
    pub q: Complex64,
    pub r: Complex64,
    pub t: Complex64,
    pub r_prime: Complex64,
    pub t_prime: Complex64,
    pub k: Complex64,
}

impl ScatteringData {
    pub fn s_matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.t, self.r], [self.r_prime, self.t_prime]]
    }
}

/// `q = (σ - 1)^{1/2} (σ + 1)^{1/2}`: a root of `q² = σ² - 1` holomorphic off
/// `[-1, 1]` with `q ~ σ` at infinity, so that `K(-σ̄) = conj K(σ)`.
pub fn branch_q(sigma: Complex64) -> Complex64 {
    (sigma - 1.0).sqrt() * (sigma + 1.0).sqrt()
}

fn near_branch_point(sigma: Complex64) -> bool {
    (sigma - 1.0).norm() < BRANCH_EPS || (sigma + 1.0).norm() < BRANCH_EPS
}

fn k_with_q(half_width: f64, sigma: Complex64, q: Complex64) -> Complex64 {
    let i = Complex64::i();
    let ratio = (q + sigma) / (q - sigma);
    ratio * (-2.0 * i * q * half_width).exp() - (-2.0 * i * q * half_width).exp().inv() / ratio
}

/// Resonance function `K(σ; L)` with the branch `q` supplied by the caller.
///
/// Flipping `q -> -q` swaps the two terms and so changes the sign of `K`
/// while leaving its zero set unchanged.
pub fn resonance_function_with_q(model: &BarrierModel, sigma: Complex64, q: Complex64) -> Complex64 {
    k_with_q(model.half_width, sigma, q)
}

pub fn resonance_function(model: &BarrierModel, sigma: Complex64) -> Result<Complex64, BarrierError> {
    if near_branch_point(sigma) {
        return Err(BarrierError::BranchPointInput(sigma));
    }
    Ok(k_with_q(model.half_width, sigma, branch_q(sigma)))
}

pub fn scattering_matrix(model: &BarrierModel, sigma: Complex64) -> Result<ScatteringData, BarrierError> {
    if near_branch_point(sigma) || sigma.norm() < BRANCH_EPS {
        return Err(BarrierError::BranchPointInput(sigma));
    }
    let i = Complex64::i();
    let l = model.half_width;
    let q = branch_q(sigma);
    let k = k_with_q(l, sigma, q);
    let e_minus = (-2.0 * i * sigma * l - 2.0 * i * q * l).exp();
    let e_plus = (-2.0 * i * sigma * l + 2.0 * i * q * l).exp();
    let r = (e_plus - e_minus) / k;
    let t = e_minus + r * (q + sigma) / (q - sigma) * (-2.0 * i * q * l).exp();
    Ok(ScatteringData {
        sigma,
        q,
        r,
        t,
        r_prime: r,
        t_prime: t,
        k,
    })
}

fn check_window(window: &ComplexRect) -> Result<(), BarrierError> {
    let meets_real_axis = window.im_min() <= 0.0 && window.im_max() >= 0.0;
    let meets_cut = window.re_min() <= 1.0 && window.re_max() >= -1.0;
    if meets_real_axis && meets_cut {
        return Err(BarrierError::WindowOnBranchCut);
    }
    Ok(())
}

/// Resonances of the barrier inside `window`, sorted by real part.
pub fn barrier_resonances(model: &BarrierModel, window: &ComplexRect) -> Result<Vec<ZeroReport>, BarrierError> {
    barrier_resonances_with(model, window, &zscan::ScanConfig::default())
}

pub fn barrier_resonances_with(
    model: &BarrierModel,
    window: &ComplexRect,
    cfg: &zscan::ScanConfig,
) -> Result<Vec<ZeroReport>, BarrierError> {
    check_window(window)?;
    let l = model.half_width;
    let k = move |s: Complex64| k_with_q(l, s, branch_q(s));
    Ok(zscan::find_zeros_with(&k, window, cfg)?)
}

/// Half-width recovered from a single resonance.
///
/// Uses the principal root `q = (σ² - 1)^{1/2}`; the result does not depend on
/// the branch since `Im q` and `ln|(q+σ)/(q-σ)|` both change sign.
pub fn recover_length(sigma: Complex64) -> Result<f64, BarrierError> {
    recover_length_with_q(sigma, (sigma * sigma - 1.0).sqrt())
}

pub fn recover_length_with_q(sigma: Complex64, q: Complex64) -> Result<f64, BarrierError> {
    if q.im.abs() < DEGENERATE_IM_Q || (q - sigma).norm() == 0.0 {
        return Err(BarrierError::DegenerateResonance {
            sigma,
            im_q: q.im.abs(),
        });
    }
    let length = -((q + sigma) / (q - sigma)).norm().ln() / (2.0 * q.im);
    if !(length.is_finite() && length > 0.0) {
        return Err(BarrierError::NonPositiveLength { sigma, length });
    }
    Ok(length)
}
