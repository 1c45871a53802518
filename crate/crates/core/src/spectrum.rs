//! Quasinormal modes of de Sitter-Schwarzschild black holes.
//!
//! Two forward models:
//!
//! * the pseudo-pole lattice
//!   `μ = (±(l + 1/2) - (i/2)(k + 1/2)) · (1 - 9Λm²)^{1/2} / (3^{3/2} m)`,
//!   an asymptotic description for large angular momentum;
//! * a shooting solver for `v'' + (λ² - V(x)) v = 0` on the tortoise line whose
//!   resonances are the zeros of the Wronskian of the two outgoing solutions.
//!
//! Outgoing solutions grow towards both horizons when `Im λ < 0`, so
//! integrating them inwards along the real axis amplifies every error in the
//! boundary data. The solver instead integrates along the rays
//! `x = x_m ± s e^{iθ}` with `Im(λ e^{iθ}) > 0`. There the outgoing solutions
//! decay outwards, become dominant when integrated inwards, and the Wronskian
//! (an analytic function of `x`) keeps its zeros.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::{self, BlackHoleParams, GeometryError, HorizonData, Tortoise};
use crate::ode::{Dopri5, OdeError};
use crate::zscan::{self, ComplexRect, Fallible, ScanConfig, ZeroReport, ZscanError};

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("|Im λ| = {im} exceeds the damping cap {cap}")]
    DampingCapExceeded { im: f64, cap: f64 },
    #[error("λ = {0} lies on the imaginary axis; the shooting solver needs Re λ ≠ 0")]
    AxisFrequency(Complex64),
    #[error("contour rotation θ = {theta} does not make the outgoing solutions decay for λ = {lambda}")]
    InvalidRotation { theta: f64, lambda: Complex64 },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("integration failed: {0}")]
    StiffIntegration(#[from] OdeError),
    #[error("no resonance found near {near}")]
    NoLocalResonance { near: Complex64 },
    #[error(transparent)]
    Zscan(#[from] ZscanError),
}

pub type Result<T> = std::result::Result<T, SpectrumError>;

/// Sign of the real part of a lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

/// One pseudo-pole with its indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePoint {
    pub l: u32,
    pub k: u32,
    pub re_sign: Sign,
    pub mu: Complex64,
    pub scale: f64,
}

/// `c(m) = (1 - 9Λm²)^{1/2} / (3^{3/2} m)`.
pub fn lattice_scale(params: &BlackHoleParams) -> f64 {
    let (m, lambda) = (params.mass(), params.lambda());
    (1.0 - 9.0 * lambda * m * m).sqrt() / (3f64.powf(1.5) * m)
}

/// `dc/dm = -1 / (3^{3/2} m² (1 - 9Λm²)^{1/2})`.
pub fn lattice_scale_derivative(params: &BlackHoleParams) -> f64 {
    let (m, lambda) = (params.mass(), params.lambda());
    -1.0 / (3f64.powf(1.5) * m * m * (1.0 - 9.0 * lambda * m * m).sqrt())
}

/// Index factor `n = ±(l + 1/2) - (i/2)(k + 1/2)`, so that `μ = n c`.
pub fn lattice_index_factor(l: u32, k: u32, sign: Sign) -> Complex64 {
    Complex64::new(sign.value() * (f64::from(l) + 0.5), -0.5 * (f64::from(k) + 0.5))
}

pub fn pseudo_pole(params: &BlackHoleParams, l: u32, k: u32, re_sign: Sign) -> LatticePoint {
    let scale = lattice_scale(params);
    LatticePoint {
        l,
        k,
        re_sign,
        mu: lattice_index_factor(l, k, re_sign) * scale,
        scale,
    }
}

/// All pseudo-poles with `l <= l_max`, `k <= k_max`, both signs, ordered by
/// `(l, k, sign)`.
///
/// The real parts are the half-integer multiples `±(l + 1/2) c`; reading the
/// two signs in `±l ± 1/2` independently only re-indexes the same set.
pub fn pseudo_poles(params: &BlackHoleParams, l_max: u32, k_max: u32) -> Vec<LatticePoint> {
    let mut out = Vec::with_capacity(2 * (l_max as usize + 1) * (k_max as usize + 1));
    for l in 0..=l_max {
        for k in 0..=k_max {
            for s in [Sign::Plus, Sign::Minus] {
                out.push(pseudo_pole(params, l, k, s));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Lattice,
    Shooting,
}

/// Search window for one angular momentum. Must lie in the open lower
/// half-plane: the physical half-plane `Im λ >= 0` carries no resonances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QnmWindow {
    rect: ComplexRect,
    l: u32,
    method: Method,
}

impl QnmWindow {
    pub fn new(rect: ComplexRect, l: u32, method: Method) -> Result<Self> {
        if rect.im_max() >= 0.0 {
            return Err(SpectrumError::InvalidWindow(format!(
                "im_max = {} must be negative",
                rect.im_max()
            )));
        }
        Ok(Self { rect, l, method })
    }

    pub fn rect(&self) -> &ComplexRect {
        &self.rect
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn method(&self) -> Method {
        self.method
    }
}

/// Immutable settings for the shooting solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingConfig {
    /// Integration is started where `|V| < xmax_tol · |λ|²`.
    pub xmax_tol: f64,
    /// Relative tolerance of the Runge-Kutta pair.
    pub rtol: f64,
    /// Tortoise coordinate of the matching point.
    pub match_point: f64,
    /// `k_cap` in `|Im λ| <= 0.9 min(β_bH, |β_sI|) (k_cap + 1)`.
    pub damping_cap: f64,
    /// Contour rotation angle; chosen from λ (or the window) when `None`.
    pub rotation: Option<f64>,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            xmax_tol: 1e-10,
            rtol: 1e-10,
            match_point: 0.0,
            damping_cap: 2.0,
            rotation: None,
        }
    }
}

/// Largest `|Im λ|` the shooting solver accepts.
pub fn damping_cap(params: &BlackHoleParams, cfg: &ShootingConfig) -> f64 {
    let h = geometry::horizons(params);
    0.9 * h.beta_bh.min(h.beta_si.abs()) * (cfg.damping_cap + 1.0)
}

/// Residual gate for shooting zeros, `|W| <= WRONSKIAN_TOL`.
pub const WRONSKIAN_TOL: f64 = 1e-8;
const ROTATION_MARGIN: f64 = 0.35;
const ROTATION_MAX: f64 = 1.45;
const MIN_DECAY_ANGLE: f64 = 0.05;
// Beyond this growth exponent the incoming admixture is below e^{-2·GROWTH_CAP}.
const GROWTH_CAP: f64 = 300.0;
const MIN_GROWTH: f64 = 18.0;
const MAX_EXTENT: f64 = 1e5;

fn auto_rotation(lambda: Complex64) -> f64 {
    let below = (-lambda.im).max(0.0).atan2(lambda.re.abs());
    (below + ROTATION_MARGIN).min(ROTATION_MAX)
}

/// Rotation angle suitable for every λ in `rect` (which must not straddle
/// the imaginary axis).
pub fn window_rotation(rect: &ComplexRect) -> Result<f64> {
    if rect.re_min() <= 0.0 && rect.re_max() >= 0.0 {
        return Err(SpectrumError::InvalidWindow(
            "window straddles the imaginary axis".into(),
        ));
    }
    let min_re = rect.re_min().abs().min(rect.re_max().abs());
    let below = (-rect.im_min()).max(0.0).atan2(min_re);
    let theta = (below + ROTATION_MARGIN).min(ROTATION_MAX);
    if theta - below < MIN_DECAY_ANGLE {
        return Err(SpectrumError::InvalidWindow(format!(
            "window reaches {:.3} rad below the real axis; too close to the imaginary axis",
            below
        )));
    }
    Ok(theta)
}

/// `r(x)` is analytic in the strip around the real axis except at the images
/// of `r = 0` and `r = ∞`, whose real parts do not depend on the sheet. Rays
/// leaving the real axis to the right of all of them (or to the left, on the
/// black-hole side) therefore sweep a region free of singularities, and the
/// rotated integral represents the same solutions for every angle.
fn rotation_origins(tortoise: &Tortoise, match_point: f64) -> (f64, f64) {
    let at_zero: f64 = tortoise
        .roots
        .iter()
        .zip(tortoise.weights)
        .map(|(r, w)| w * r.abs().ln())
        .sum::<f64>()
        - tortoise.offset;
    let at_infinity = -tortoise.offset;
    let margin = 0.1 * tortoise.weights[0].abs();
    (
        match_point.min(at_zero).min(at_infinity) - margin,
        match_point.max(at_zero).max(at_infinity) + margin,
    )
}

/// The shooting problem for fixed `(m, Λ, l)`.
#[derive(Debug, Clone)]
pub struct Shooter {
    params: BlackHoleParams,
    l: u32,
    cfg: ShootingConfig,
    horizons: HorizonData,
    r_match: f64,
    cap: f64,
    /// Rotation origins `(left, right)` in the tortoise coordinate.
    origins: (f64, f64),
}

#[derive(Clone, Copy)]
enum Side {
    BlackHole,
    Cosmological,
}

impl Shooter {
    pub fn new(params: &BlackHoleParams, l: u32, cfg: &ShootingConfig) -> Self {
        let tortoise = Tortoise::new(params);
        Self {
            origins: rotation_origins(&tortoise, cfg.match_point),
            params: *params,
            l,
            cfg: *cfg,
            horizons: geometry::horizons(params),
            r_match: tortoise.r_of_x(cfg.match_point, params),
            cap: damping_cap(params, cfg),
        }
    }

    pub fn params(&self) -> &BlackHoleParams {
        &self.params
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn damping_cap(&self) -> f64 {
        self.cap
    }

    /// Wronskian with the rotation taken from the configuration or from λ.
    pub fn wronskian(&self, lambda: Complex64) -> Result<Complex64> {
        let theta = self.cfg.rotation.unwrap_or_else(|| auto_rotation(lambda));
        self.wronskian_rotated(lambda, theta)
    }

    /// Wronskian along paths rotated by `theta` (mirrored for `Re λ < 0`).
    pub fn wronskian_rotated(&self, lambda: Complex64, theta: f64) -> Result<Complex64> {
        if lambda.re == 0.0 || !lambda.re.is_finite() || !lambda.im.is_finite() {
            return Err(SpectrumError::AxisFrequency(lambda));
        }
        if lambda.im.abs() > self.cap {
            return Err(SpectrumError::DampingCapExceeded {
                im: lambda.im.abs(),
                cap: self.cap,
            });
        }
        let theta = if lambda.re < 0.0 { -theta.abs() } else { theta.abs() };
        let dir = Complex64::from_polar(1.0, theta);
        let growth = (lambda * dir).im;
        if theta.abs() >= 0.5 * PI || growth < MIN_DECAY_ANGLE.sin() * lambda.norm() * 0.5 {
            return Err(SpectrumError::InvalidRotation { theta, lambda });
        }
        let (v_l, dv_l) = self.integrate_side(Side::BlackHole, lambda, dir, growth)?;
        let (v_r, dv_r) = self.integrate_side(Side::Cosmological, lambda, dir, growth)?;
        Ok(v_l * dv_r - dv_l * v_r)
    }

    fn lapse(&self, side: Side, y: Complex64) -> Complex64 {
        let h = &self.horizons;
        let (rh, a, b) = match side {
            Side::BlackHole => (h.r_bh, h.r_si, h.r_0),
            Side::Cosmological => (h.r_si, h.r_bh, h.r_0),
        };
        let r = rh + y;
        -(self.params.lambda() / (3.0 * r)) * y * (r - a) * (r - b)
    }

    fn potential(&self, r: Complex64, lapse: Complex64) -> Complex64 {
        let ll = f64::from(self.l) * f64::from(self.l + 1);
        let two_beta = 2.0 * (self.params.mass() / (r * r) - self.params.lambda() * r / 3.0);
        lapse * (ll / (r * r) + two_beta / r)
    }

    fn horizon(&self, side: Side) -> f64 {
        match side {
            Side::BlackHole => self.horizons.r_bh,
            Side::Cosmological => self.horizons.r_si,
        }
    }

    /// Real direction of the path and distance from `x_m` to the rotation
    /// origin, chosen beyond the images of `r = 0` and `r = ∞`.
    fn leg(&self, side: Side) -> (f64, f64) {
        match side {
            Side::BlackHole => (-1.0, self.cfg.match_point - self.origins.0),
            Side::Cosmological => (1.0, self.origins.1 - self.cfg.match_point),
        }
    }

    /// Follows `r(x)` from the matching point along the real leg and then
    /// along the rotated ray, in the offset `y = r - r_h` so that the horizon
    /// is approached without cancellation. Returns the end of the real leg
    /// and the end of the ray (parametrized by arclength `t` along the ray).
    fn trace(
        &self,
        side: Side,
        dir: Complex64,
        t_max: f64,
        mut stop: impl FnMut(f64, Complex64) -> bool,
    ) -> Result<(Complex64, crate::ode::Endpoint<1>)> {
        let rh = self.horizon(side);
        let (sgn, a) = self.leg(side);
        let ode = Dopri5::with_rtol(self.cfg.rtol);
        let y0 = Complex64::new(self.r_match - rh, 0.0);
        let corner = ode
            .integrate(|_, st: &[Complex64; 1]| [sgn * self.lapse(side, st[0])], 0.0, [y0], a)?
            .y[0];
        let d = sgn * dir;
        let end = ode.integrate_until(
            |_, st: &[Complex64; 1]| [d * self.lapse(side, st[0])],
            0.0,
            [corner],
            t_max,
            |t, st| stop(t, st[0]),
        )?;
        Ok((corner, end))
    }

    /// Returns `(v, dv/dx)` at the matching point for the solution outgoing
    /// at the given horizon, normalized as `e^{±iλ(x - x_m)}` far out.
    fn integrate_side(
        &self,
        side: Side,
        lambda: Complex64,
        dir: Complex64,
        growth: f64,
    ) -> Result<(Complex64, Complex64)> {
        let i = Complex64::i();
        let rh = self.horizon(side);
        let (sgn, a) = self.leg(side);
        let d = sgn * dir;
        let lam2 = lambda * lambda;
        let v_floor = self.cfg.xmax_tol * lam2.norm();
        let t_cap = (GROWTH_CAP / growth).min(MAX_EXTENT);
        let t_min = (MIN_GROWTH / growth).min(t_cap);

        let (_, path) = self.trace(side, dir, t_cap, |t, y| {
            t >= t_min && self.potential(rh + y, self.lapse(side, y)).norm() < v_floor
        })?;
        let (t_end, y_end) = (path.t, path.y[0]);

        let v_end = self.potential(rh + y_end, self.lapse(side, y_end));
        let k = lambda * (1.0 - v_end / lam2).sqrt();
        let v = (i * lambda * (a + t_end * dir)).exp();
        let dv = sgn * i * k * v;

        let rhs = |h: Complex64| {
            move |_: f64, st: &[Complex64; 3]| {
                let f = self.lapse(side, st[0]);
                let pot = self.potential(rh + st[0], f);
                [h * f, h * st[2], h * (pot - lam2) * st[1]]
            }
        };
        let ode = Dopri5::with_rtol(self.cfg.rtol);
        let corner = ode.integrate(rhs(d), t_end, [y_end, v, dv], 0.0)?;
        let fin = ode.integrate(rhs(Complex64::new(sgn, 0.0)), a, corner.y, 0.0)?;
        Ok((fin.y[1], fin.y[2]))
    }

    /// Zeros of the Wronskian inside `rect`.
    pub fn zeros_in(&self, rect: &ComplexRect) -> Result<Vec<ZeroReport>> {
        if rect.im_min().abs().max(rect.im_max().abs()) > self.cap {
            return Err(SpectrumError::DampingCapExceeded {
                im: rect.im_min().abs().max(rect.im_max().abs()),
                cap: self.cap,
            });
        }
        let theta = match self.cfg.rotation {
            Some(t) => t,
            None => window_rotation(rect)?,
        };
        let w = Fallible(|z: Complex64| self.wronskian_rotated(z, theta));
        let cfg = ScanConfig {
            tol: 1e-10,
            residual_tol: WRONSKIAN_TOL,
            ..ScanConfig::default()
        };
        Ok(zscan::find_zeros_with(&w, rect, &cfg)?)
    }

    /// Follow the zero nearest to `start` with a local Muller iteration.
    pub fn track(&self, start: Complex64) -> Result<ZeroReport> {
        let theta = self.cfg.rotation.unwrap_or_else(|| auto_rotation(start));
        let w = Fallible(|z: Complex64| self.wronskian_rotated(z, theta));
        let spread = 1e-3 * start.norm();
        let rep = zscan::refine_with(&w, start, spread, 1e-12, 100)?;
        if rep.residual > WRONSKIAN_TOL {
            return Err(SpectrumError::NoLocalResonance { near: start });
        }
        Ok(rep)
    }

    /// Window around the lattice column `(l, ±)` used to index overtones.
    pub fn overtone_window(&self, sign: Sign) -> Result<ComplexRect> {
        let c = lattice_scale(&self.params);
        let centre = (f64::from(self.l) + 0.5) * c;
        let lo = (centre - 0.75 * c).max(0.35 * c);
        let hi = centre + 0.45 * c;
        let rect = ComplexRect::new(lo, hi, -0.999 * self.cap, -1e-3 * c)?;
        Ok(match sign {
            Sign::Plus => rect,
            Sign::Minus => rect.mirror_re(),
        })
    }

    /// The `k`-th least damped shooting zero in the `(l, ±)` lattice column.
    pub fn overtone(&self, k: u32, sign: Sign) -> Result<ZeroReport> {
        let rect = self.overtone_window(sign)?;
        let mut zeros = self.zeros_in(&rect)?;
        zeros.sort_by(|a, b| a.location.im.abs().total_cmp(&b.location.im.abs()));
        zeros.get(k as usize).copied().ok_or(SpectrumError::NoLocalResonance {
            near: pseudo_pole(&self.params, self.l, k, sign).mu,
        })
    }
}

/// Matching determinant `W = v_L v_R' - v_L' v_R` of the solutions outgoing
/// at the black-hole and cosmological horizons. Its zeros are the resonances.
pub fn wronskian(lambda: Complex64, params: &BlackHoleParams, l: u32, cfg: &ShootingConfig) -> Result<Complex64> {
    Shooter::new(params, l, cfg).wronskian(lambda)
}

/// Shooting resonances inside the window, sorted by real part.
pub fn qnm_shooting(params: &BlackHoleParams, window: &QnmWindow, cfg: &ShootingConfig) -> Result<Vec<ZeroReport>> {
    if window.method != Method::Shooting {
        return Err(SpectrumError::InvalidWindow(
            "qnm_shooting needs a shooting window".into(),
        ));
    }
    Shooter::new(params, window.l, cfg).zeros_in(&window.rect)
}

/// Pseudo-poles with the window's `l` that fall inside the window.
pub fn qnm_lattice(params: &BlackHoleParams, window: &QnmWindow) -> Vec<LatticePoint> {
    let c = lattice_scale(params);
    let k_max = ((-window.rect.im_min()) / (0.5 * c)).ceil().max(0.0) as u32;
    let mut pts: Vec<LatticePoint> = (0..=k_max)
        .flat_map(|k| [Sign::Plus, Sign::Minus].map(|s| pseudo_pole(params, window.l, k, s)))
        .filter(|p| window.rect.contains(p.mu, 0.0))
        .collect();
    pts.sort_by(|a, b| a.mu.re.total_cmp(&b.mu.re).then(a.mu.im.total_cmp(&b.mu.im)));
    pts
}

/// Shooting zeros are reported with low confidence for `l <= 1`, where the
/// lattice description does not apply.
pub fn shooting_confident(l: u32) -> bool {
    l >= 2
}
