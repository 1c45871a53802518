//! Static de Sitter-Schwarzschild geometry.
//!
//! The lapse is `α²(r) = 1 - 2m/r - Λr²/3`. Its zeros are the roots of
//! `r³ - (3/Λ) r + 6m/Λ = 0`: the black-hole horizon `r_bH`, the cosmological
//! horizon `r_sI` and a negative root `r_0`. Two horizons exist exactly when
//! `0 < 9m²Λ < 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("inadmissible parameters m = {m}, Λ = {lambda}: need m > 0, Λ > 0 and 9m²Λ < 1")]
    InadmissibleParams { m: f64, lambda: f64 },
    #[error("r = {r} lies outside the static region ({r_bh}, {r_si})")]
    OutOfDomain { r: f64, r_bh: f64, r_si: f64 },
}

/// Upper bound used for `9m²Λ`; closer to 1 the two horizons merge.
pub const EXTREMAL_SLACK: f64 = 1e-12;

/// Black-hole mass and cosmological constant, with `0 < 9m²Λ < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlackHoleParams {
    mass: f64,
    lambda: f64,
}

impl BlackHoleParams {
    pub fn new(mass: f64, lambda: f64) -> Result<Self, GeometryError> {
        let ok = mass.is_finite()
            && lambda.is_finite()
            && mass > 0.0
            && lambda > 0.0
            && 9.0 * mass * mass * lambda < 1.0 - EXTREMAL_SLACK;
        if !ok {
            return Err(GeometryError::InadmissibleParams { m: mass, lambda });
        }
        Ok(Self { mass, lambda })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Same cosmological constant, different mass.
    pub fn with_mass(&self, mass: f64) -> Result<Self, GeometryError> {
        Self::new(mass, self.lambda)
    }

    /// Radius where `β = 0`, the maximum of `α²`.
    pub fn critical_radius(&self) -> f64 {
        (3.0 * self.mass / self.lambda).cbrt()
    }
}

/// Upper end of the admissible mass interval `(0, 1/(3√Λ))`.
pub fn max_mass(lambda: f64) -> f64 {
    1.0 / (3.0 * lambda.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonData {
    pub r_bh: f64,
    pub r_si: f64,
    pub r_0: f64,
    pub beta_bh: f64,
    pub beta_si: f64,
}

impl HorizonData {
    pub fn beta_0(&self, params: &BlackHoleParams) -> f64 {
        beta(self.r_0, params)
    }
}

pub fn alpha_sq(r: f64, params: &BlackHoleParams) -> f64 {
    1.0 - 2.0 * params.mass / r - params.lambda * r * r / 3.0
}

/// `β = (1/2) dα²/dr = m/r² - Λr/3`.
pub fn beta(r: f64, params: &BlackHoleParams) -> f64 {
    params.mass / (r * r) - params.lambda * r / 3.0
}

fn cubic(r: f64, params: &BlackHoleParams) -> f64 {
    r * r * r - 3.0 / params.lambda * r + 6.0 * params.mass / params.lambda
}

fn polish(r: f64, params: &BlackHoleParams) -> f64 {
    let d = 3.0 * r * r - 3.0 / params.lambda;
    if d == 0.0 {
        return r;
    }
    r - cubic(r, params) / d
}

/// Horizon radii and surface-gravity values.
///
/// Roots come from the trigonometric form of the depressed cubic,
/// `r_k = (2/√Λ) cos(acos(-3m√Λ)/3 - 2πk/3)`, followed by one Newton step.
pub fn horizons(params: &BlackHoleParams) -> HorizonData {
    let s = 3.0 * params.mass * params.lambda.sqrt();
    let amp = 2.0 / params.lambda.sqrt();
    let phi = (-s).acos() / 3.0;
    let r_si = polish(amp * phi.cos(), params);
    let r_bh = polish(amp * (phi - 2.0 * PI / 3.0).cos(), params);
    let r_0 = polish(amp * (phi - 4.0 * PI / 3.0).cos(), params);
    HorizonData {
        r_bh,
        r_si,
        r_0,
        beta_bh: beta(r_bh, params),
        beta_si: beta(r_si, params),
    }
}

/// Radial potential of the scalar wave equation on the tortoise line,
/// `V = α² (l(l+1)/r² + 2β/r)`.
pub fn rw_potential(r: f64, params: &BlackHoleParams, l: u32) -> Result<f64, GeometryError> {
    let h = horizons(params);
    check_interior(r, &h)?;
    Ok(potential_at(r, params, l))
}

pub(crate) fn potential_at(r: f64, params: &BlackHoleParams, l: u32) -> f64 {
    let ll = f64::from(l) * f64::from(l + 1);
    alpha_sq(r, params) * (ll / (r * r) + 2.0 * beta(r, params) / r)
}

fn check_interior(r: f64, h: &HorizonData) -> Result<(), GeometryError> {
    if !(r > h.r_bh && r < h.r_si) {
        return Err(GeometryError::OutOfDomain {
            r,
            r_bh: h.r_bh,
            r_si: h.r_si,
        });
    }
    Ok(())
}

/// Residues `1/(2β(r_j))` of `1/α²` at its three roots.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Tortoise {
    pub roots: [f64; 3],
    pub weights: [f64; 3],
    pub offset: f64,
}

impl Tortoise {
    pub fn new(params: &BlackHoleParams) -> Self {
        let h = horizons(params);
        let roots = [h.r_bh, h.r_si, h.r_0];
        let weights = roots.map(|r| 0.5 / beta(r, params));
        let mut t = Self {
            roots,
            weights,
            offset: 0.0,
        };
        t.offset = t.raw(params.critical_radius());
        t
    }

    fn raw(&self, r: f64) -> f64 {
        self.roots
            .iter()
            .zip(self.weights)
            .map(|(rj, w)| w * (r - rj).abs().ln())
            .sum()
    }

    pub fn x(&self, r: f64) -> f64 {
        self.raw(r) - self.offset
    }

    /// Tortoise coordinate continued to complex `r` near the static region.
    /// Every log argument has positive real part there, so the principal
    /// branch matches the real-line definition.
    #[cfg(test)]
    pub fn x_complex(&self, r: Complex64) -> Complex64 {
        let [rb, rs, r0] = self.roots;
        let [wb, ws, w0] = self.weights;
        (r - rb).ln() * wb + (rs - r).ln() * ws + (r - r0).ln() * w0 - self.offset
    }

    /// Safeguarded Newton inversion of `x(r)` on `(r_bH, r_sI)`.
    pub fn r_of_x(&self, x: f64, params: &BlackHoleParams) -> f64 {
        let (mut lo, mut hi) = (self.roots[0], self.roots[1]);
        let mut r = params.critical_radius();
        for _ in 0..200 {
            let g = self.x(r) - x;
            if g > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let step = g * alpha_sq(r, params);
            let mut next = r - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - r).abs() <= 4.0 * f64::EPSILON * r {
                return next;
            }
            r = next;
        }
        r
    }
}

/// Tortoise coordinate `x(r)` with `dx/dr = 1/α²`, normalized to vanish at
/// the critical radius `(3m/Λ)^{1/3}`.
pub fn tortoise(r: f64, params: &BlackHoleParams) -> Result<f64, GeometryError> {
    let h = horizons(params);
    check_interior(r, &h)?;
    Ok(Tortoise::new(params).x(r))
}

/// Inverse of [`tortoise`].
pub fn radius_at(x: f64, params: &BlackHoleParams) -> f64 {
    Tortoise::new(params).r_of_x(x, params)
}

/// Excluded points `{0} ∪ {-i j β_bH} ∪ {-i j |β_sI|}`, `j = 1..=depth`,
/// deduplicated and sorted by `|Im|`.
pub fn trivial_set(params: &BlackHoleParams, depth: u32) -> Vec<Complex64> {
    let h = horizons(params);
    let mut im: Vec<f64> = vec![0.0];
    for j in 1..=depth {
        im.push(f64::from(j) * h.beta_bh);
        im.push(f64::from(j) * h.beta_si.abs());
    }
    im.sort_by(f64::total_cmp);
    im.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    im.into_iter().map(|v| Complex64::new(0.0, -v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: f64, l: f64) -> BlackHoleParams {
        BlackHoleParams::new(m, l).unwrap()
    }

    #[test]
    fn admissibility() {
        assert!(BlackHoleParams::new(1.0, 0.04).is_ok());
        assert!(BlackHoleParams::new(0.0, 0.04).is_err());
        assert!(BlackHoleParams::new(1.0, 0.0).is_err());
        assert!(BlackHoleParams::new(1.0, 1.0 / 9.0).is_err());
        assert!(BlackHoleParams::new(2.0, 0.04).is_err());
    }

    #[test]
    fn small_lambda_horizon_is_schwarzschild() {
        let h = horizons(&p(1.0, 1e-6));
        assert!((h.r_bh - 2.0).abs() < 1e-4);
        assert!(h.r_si > 1000.0);
    }

    #[test]
    fn near_extremal_horizons_merge() {
        let lambda = (1.0 - 1e-8) / 9.0;
        let h = horizons(&p(1.0, lambda));
        assert!((h.r_bh - h.r_si).abs() < 1e-2);
        assert!((h.r_bh - 3.0).abs() < 1e-2 && (h.r_si - 3.0).abs() < 1e-2);
        assert!(h.r_bh < h.r_si);
    }

    #[test]
    fn alpha_sq_arithmetic() {
        let v = alpha_sq(3.0, &p(1.0, 0.04));
        assert!((v - (1.0 - 2.0 / 3.0 - 0.12)).abs() < 1e-15);
    }

    #[test]
    fn beta_vanishes_at_critical_radius() {
        let params = p(1.0, 0.04);
        assert!(beta(params.critical_radius(), &params).abs() < 1e-15);
        let h = horizons(&params);
        assert!(h.beta_bh > 0.0 && h.beta_si < 0.0);
    }

    #[test]
    fn beta_matches_central_difference() {
        let params = p(1.0, 0.04);
        let (r, e) = (3.0, 1e-5);
        let fd = (alpha_sq(r + e, &params) - alpha_sq(r - e, &params)) / (4.0 * e);
        assert!((fd - beta(r, &params)).abs() < 1e-8);
    }

    #[test]
    fn potential_limits() {
        let params = p(1.0, 0.04);
        let h = horizons(&params);
        assert!(rw_potential(h.r_bh + 1e-9, &params, 2).unwrap().abs() < 1e-6);
        assert!(rw_potential(params.critical_radius(), &params, 0).unwrap().abs() < 1e-15);
        let v = rw_potential(3.0, &params, 1).unwrap();
        let a2 = 1.0 - 2.0 / 3.0 - 0.12;
        let b = 1.0 / 9.0 - 0.04;
        assert!((v - a2 * (2.0 / 9.0 + 2.0 * b / 3.0)).abs() < 1e-14);
        assert!(matches!(
            rw_potential(h.r_bh, &params, 1),
            Err(GeometryError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn tortoise_normalization_and_inverse() {
        let params = p(1.0, 0.04);
        assert!(tortoise(params.critical_radius(), &params).unwrap().abs() < 1e-14);
        for x in [-40.0, -3.0, 0.0, 2.5, 60.0] {
            let r = radius_at(x, &params);
            assert!((tortoise(r, &params).unwrap() - x).abs() < 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn trivial_set_contents() {
        let params = p(1.0, 0.04);
        let h = horizons(&params);
        let q = trivial_set(&params, 3);
        assert_eq!(q[0], Complex64::new(0.0, 0.0));
        assert_eq!(q.len(), 7);
        assert!(q.iter().all(|z| z.re == 0.0 && z.im <= 0.0));
        let first = h.beta_bh.min(h.beta_si.abs());
        assert!((q[1].im + first).abs() < 1e-15);
    }

    #[test]
    fn trivial_set_prefix_stable() {
        let params = p(0.7, 0.1);
        let short = trivial_set(&params, 2);
        let long = trivial_set(&params, 5);
        // both sorted; the short set's members all reappear
        for z in &short {
            assert!(long.contains(z));
        }
    }
}
