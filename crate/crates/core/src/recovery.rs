//! Recovering the mass from a single resonance.
//!
//! The cosmological constant is assumed known. Two inversions are provided:
//! an exact one through the pseudo-pole lattice, which needs the mode indices,
//! and a numerical one that tracks a shooting zero in `m`.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{max_mass, BlackHoleParams, GeometryError};
use crate::spectrum::{
    lattice_index_factor, lattice_scale, lattice_scale_derivative, Shooter, ShootingConfig, Sign, SpectrumError,
};

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error("λ = {lambda} is {class} and carries no information about the mass")]
    ExcludedResonance { lambda: Complex64, class: ResonanceClass },
    #[error("phase defect {defect:e} rad exceeds the gate {gate:e}: λ is not on the (l, k) lattice column")]
    InconsistentIndices { defect: f64, gate: f64 },
    #[error("no resonance within {radius} of {target} at m = {mass}")]
    NoLocalResonance { target: Complex64, mass: f64, radius: f64 },
    #[error("secant iteration stalled after {iterations} iterations with |F| = {residual:e}")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("|dλ/dm| = {derivative:e} is too small to estimate stability")]
    DegenerateSlope { derivative: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

pub type Result<T> = std::result::Result<T, RecoveryError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResonanceClass {
    Usable,
    ImaginaryAxisExcluded,
    Trivial,
}

impl ResonanceClass {
    pub fn name(self) -> &'static str {
        match self {
            ResonanceClass::Usable => "usable",
            ResonanceClass::ImaginaryAxisExcluded => "imaginary_axis_excluded",
            ResonanceClass::Trivial => "trivial",
        }
    }
}

impl std::fmt::Display for ResonanceClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

pub const DEFAULT_AXIS_TOL: f64 = 1e-12;
pub const DEFAULT_PHASE_GATE: f64 = 1e-3;

/// `0` is trivial; the rest of `i(-∞, 0]` is excluded; everything else is
/// usable.
pub fn classify_resonance(lambda: Complex64, tol_axis: f64) -> ResonanceClass {
    if lambda.re.abs() < tol_axis && lambda.im.abs() < tol_axis {
        ResonanceClass::Trivial
    } else if lambda.re.abs() < tol_axis && lambda.im <= 0.0 {
        ResonanceClass::ImaginaryAxisExcluded
    } else {
        ResonanceClass::Usable
    }
}

fn require_usable(lambda: Complex64) -> Result<()> {
    if !(lambda.re.is_finite() && lambda.im.is_finite()) {
        return Err(RecoveryError::InvalidInput(format!("λ = {lambda} is not finite")));
    }
    match classify_resonance(lambda, DEFAULT_AXIS_TOL) {
        ResonanceClass::Usable => Ok(()),
        class => Err(RecoveryError::ExcludedResonance { lambda, class }),
    }
}

fn require_lambda(cosmological: f64) -> Result<()> {
    if !(cosmological.is_finite() && cosmological > 0.0) {
        return Err(RecoveryError::InvalidInput(format!(
            "Λ must be positive and finite, got {cosmological}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryResult {
    pub m_hat: f64,
    /// Phase defect (lattice) or `|λ(m̂) - λ*|` (numeric).
    pub residual: f64,
    /// `|dλ/dm|⁻¹` at `m̂`.
    pub condition: f64,
    pub holder_n: f64,
    /// Largest distance in `m` from which the inversion was seen to land on `m̂`.
    pub delta_neighborhood: f64,
    pub iterations: usize,
}

/// Lattice inversion with the default phase gate.
pub fn recover_mass_lattice(
    lambda: Complex64,
    cosmological: f64,
    l: u32,
    k: u32,
    sign: Sign,
) -> Result<RecoveryResult> {
    recover_mass_lattice_gated(lambda, cosmological, l, k, sign, DEFAULT_PHASE_GATE)
}

/// `c = λ / n` must be positive real; then `27c² + 9Λ = 1/m²`.
pub fn recover_mass_lattice_gated(
    lambda: Complex64,
    cosmological: f64,
    l: u32,
    k: u32,
    sign: Sign,
    gate: f64,
) -> Result<RecoveryResult> {
    require_usable(lambda)?;
    require_lambda(cosmological)?;
    let n = lattice_index_factor(l, k, sign);
    let c = lambda / n;
    let defect = c.im.atan2(c.re).abs();
    if defect.is_nan() || defect > gate {
        return Err(RecoveryError::InconsistentIndices { defect, gate });
    }
    let m_hat = 1.0 / (27.0 * c.re * c.re + 9.0 * cosmological).sqrt();
    let m_max = max_mass(cosmological);
    assert!(
        m_hat > 0.0 && m_hat < m_max,
        "lattice inversion left the admissible set"
    );
    let params = BlackHoleParams::new(m_hat, cosmological)?;
    let condition = 1.0 / (n.norm() * lattice_scale_derivative(&params).abs());
    let holder_n = holder_exponent(
        |m| Ok(n * lattice_scale(&BlackHoleParams::new(m, cosmological)?)),
        m_hat,
        m_max,
    )?;
    Ok(RecoveryResult {
        m_hat,
        residual: defect,
        condition,
        holder_n,
        // c is strictly monotone in m, so the inversion is unique on all of O
        delta_neighborhood: m_hat.min(m_max - m_hat),
        iterations: 0,
    })
}

/// One index hypothesis that passed the lattice gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hypothesis {
    pub l: u32,
    pub k: u32,
    pub sign: Sign,
    pub result: RecoveryResult,
}

// Defects closer than this are indistinguishable; such ties go by (l, k).
const DEFECT_RESOLUTION: f64 = 1e-12;

/// Every `(l, k, ±)` hypothesis with `l <= l_max`, `k <= k_max` whose phase
/// passes the default gate, best first.
///
/// A single mode does not identify its indices: the phase of `λ` only fixes
/// `(2l + 1)/(2k + 1)`, and the modulus is absorbed into `c`. Distinct
/// hypotheses with equal index ratios are exact ties and yield different
/// masses.
pub fn recover_mass_lattice_blind(lambda: Complex64, cosmological: f64, l_max: u32, k_max: u32) -> Vec<Hypothesis> {
    let jobs: Vec<(u32, u32, Sign)> = (0..=l_max)
        .flat_map(|l| (0..=k_max).flat_map(move |k| [Sign::Plus, Sign::Minus].map(|s| (l, k, s))))
        .collect();
    let mut hits: Vec<Hypothesis> = jobs
        .par_iter()
        .filter_map(|&(l, k, sign)| {
            recover_mass_lattice(lambda, cosmological, l, k, sign)
                .ok()
                .map(|result| Hypothesis { l, k, sign, result })
        })
        .collect();
    let bucket = |h: &Hypothesis| (h.result.residual / DEFECT_RESOLUTION).floor();
    hits.sort_by(|a, b| {
        bucket(a)
            .total_cmp(&bucket(b))
            .then(a.l.cmp(&b.l))
            .then(a.k.cmp(&b.k))
            .then(a.sign.cmp(&b.sign))
    });
    hits
}

/// Settings for [`recover_mass_numeric_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericConfig {
    pub max_iter: usize,
    /// Zeros farther than this fraction of `|λ*|` from `λ*` are not tracked.
    pub tracking_radius: f64,
    /// Largest step, relative to the current mass.
    pub max_step: f64,
    /// Accepted `|F(m̂)|` relative to `|λ*|` when the iteration stalls before `tol`.
    pub residual_gate: f64,
    pub shooting: ShootingConfig,
}

impl Default for NumericConfig {
    fn default() -> Self {
        Self {
            max_iter: 60,
            tracking_radius: 0.25,
            max_step: 0.1,
            residual_gate: 1e-3,
            shooting: ShootingConfig::default(),
        }
    }
}

pub fn recover_mass_numeric(
    lambda_star: Complex64,
    cosmological: f64,
    l: u32,
    m_init: f64,
    tol: f64,
) -> Result<RecoveryResult> {
    recover_mass_numeric_with(lambda_star, cosmological, l, m_init, tol, &NumericConfig::default())
}

struct Tracker<'a> {
    target: Complex64,
    cosmological: f64,
    l: u32,
    cfg: &'a NumericConfig,
}

impl Tracker<'_> {
    fn zero_at(&self, m: f64, guess: Complex64) -> Result<Complex64> {
        let params = BlackHoleParams::new(m, self.cosmological)?;
        let radius = self.cfg.tracking_radius * self.target.norm();
        let lost = || RecoveryError::NoLocalResonance {
            target: self.target,
            mass: m,
            radius,
        };
        let z = match Shooter::new(&params, self.l, &self.cfg.shooting).track(guess) {
            Ok(rep) => rep.location,
            Err(SpectrumError::NoLocalResonance { .. } | SpectrumError::Zscan(_)) => return Err(lost()),
            Err(e) => return Err(e.into()),
        };
        // a jump of this size lands on a neighbouring overtone
        if (z - self.target).norm() > radius || (z - guess).norm() > 0.5 * guess.im.abs() {
            return Err(lost());
        }
        Ok(z)
    }

    /// Zero at `m` predicted from the zero `z` at `m_from` by the lattice
    /// scaling `λ ∝ c(m)`.
    fn predict(&self, z: Complex64, m_from: f64, m: f64) -> Result<Complex64> {
        let c_from = lattice_scale(&BlackHoleParams::new(m_from, self.cosmological)?);
        let c_to = lattice_scale(&BlackHoleParams::new(m, self.cosmological)?);
        Ok(z * (c_to / c_from))
    }

    /// Mass whose lattice column `l` has real part `|Re λ*|`.
    fn lattice_mass(&self) -> f64 {
        let c = self.target.re.abs() / (f64::from(self.l) + 0.5);
        1.0 / (27.0 * c * c + 9.0 * self.cosmological).sqrt()
    }
}

/// Safeguarded secant iteration on real `m` for `F(m) = λ(m) - λ*`, where
/// `λ(m)` is the shooting zero followed continuously from `λ*`.
///
/// Each step minimizes `|F|` along the secant model (a Gauss-Newton step with
/// a complex slope), is limited to `max_step · m`, and is folded back into
/// `O = (0, 1/(3√Λ))`.
pub fn recover_mass_numeric_with(
    lambda_star: Complex64,
    cosmological: f64,
    l: u32,
    m_init: f64,
    tol: f64,
    cfg: &NumericConfig,
) -> Result<RecoveryResult> {
    require_usable(lambda_star)?;
    require_lambda(cosmological)?;
    let m_max = max_mass(cosmological);
    if !(m_init > 0.0 && m_init < m_max) {
        return Err(GeometryError::InadmissibleParams {
            m: m_init,
            lambda: cosmological,
        }
        .into());
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(RecoveryError::InvalidInput(format!("tol must be positive, got {tol}")));
    }
    let tracker = Tracker {
        target: lambda_star,
        cosmological,
        l,
        cfg,
    };

    let mut m = m_init;
    let m_ref = tracker.lattice_mass();
    let mut z = tracker.zero_at(m, tracker.predict(lambda_star, m_ref, m)?)?;
    let mut f = z - lambda_star;
    // lattice scaling λ ∝ c(m) seeds the slope
    let p = BlackHoleParams::new(m, cosmological)?;
    let mut slope = z * lattice_scale_derivative(&p) / lattice_scale(&p);
    let mut visited = vec![m];

    for it in 0..=cfg.max_iter {
        if f.norm() <= tol {
            return finish(Iterate { m, z, f }, &visited, it, &tracker);
        }
        if it == cfg.max_iter {
            break;
        }
        let s2 = slope.norm_sqr();
        if !(s2 > 0.0 && s2.is_finite()) {
            return Err(RecoveryError::DegenerateSlope { derivative: s2.sqrt() });
        }
        let mut step = -(slope.conj() * f).re / s2;
        let cap = cfg.max_step * m;
        step = step.clamp(-cap, cap);
        let mut m_new = m + step;
        if m_new <= 0.0 {
            m_new = 0.5 * m;
        } else if m_new >= m_max {
            m_new = 0.5 * (m + m_max);
        }
        let z_new = tracker.zero_at(m_new, tracker.predict(z, m, m_new)?)?;
        let f_new = z_new - lambda_star;
        if m_new != m {
            slope = (z_new - z) / (m_new - m);
        }
        // steps below the resolution of F can no longer reduce the residual
        let stalled = (m_new - m).abs() <= (1e-13 * m).max(tol / slope.norm());
        m = m_new;
        z = z_new;
        f = f_new;
        visited.push(m);
        if stalled {
            if f.norm() <= cfg.residual_gate * lambda_star.norm() {
                return finish(Iterate { m, z, f }, &visited, it + 1, &tracker);
            }
            return Err(RecoveryError::NonConvergence {
                iterations: it + 1,
                residual: f.norm(),
            });
        }
    }
    Err(RecoveryError::NonConvergence {
        iterations: cfg.max_iter,
        residual: f.norm(),
    })
}

struct Iterate {
    m: f64,
    z: Complex64,
    f: Complex64,
}

fn finish(it: Iterate, visited: &[f64], iterations: usize, tracker: &Tracker<'_>) -> Result<RecoveryResult> {
    let Iterate { m, z, f, .. } = it;
    let cosmological = tracker.cosmological;
    // a fresh secant across a small bracket gives the local slope at m̂
    let h = 1e-5 * m;
    let m_max = max_mass(cosmological);
    let h = if m + h < m_max { h } else { -h };
    let z_h = tracker.zero_at(m + h, tracker.predict(z, m, m + h)?)?;
    let local = (z_h - z) / h;
    if local.norm() < 1e-14 {
        return Err(RecoveryError::DegenerateSlope {
            derivative: local.norm(),
        });
    }
    let holder_n = holder_exponent(|mm| tracker.zero_at(mm, tracker.predict(z, m, mm)?), m, m_max)?;
    let delta = visited.iter().map(|v| (v - m).abs()).fold(h.abs(), f64::max);
    Ok(RecoveryResult {
        m_hat: m,
        residual: f.norm(),
        condition: 1.0 / local.norm(),
        holder_n,
        delta_neighborhood: delta,
        iterations,
    })
}

/// Decades of `Δm` used by the Hölder estimator.
pub const HOLDER_STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Estimates `N` in `|Δm| ≤ C|Δλ|^{1/N}` as the inverse least-squares slope
/// of `log|Δm|` against `log|λ(m₀ + Δm) - λ(m₀)|` over [`HOLDER_STEPS`].
/// Steps leaving `(0, m_max)` are taken to the left instead.
pub fn holder_exponent<F>(family: F, m0: f64, m_max: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    let base = family(m0)?;
    let pts: Vec<(f64, f64)> = HOLDER_STEPS
        .par_iter()
        .map(|&dm| {
            let m = if m0 + dm < m_max { m0 + dm } else { m0 - dm };
            let dl = (family(m)? - base).norm();
            Ok((dm.ln(), dl.ln()))
        })
        .collect::<Result<_>>()?;
    holder_fit(&pts)
}

/// `N = 1 / slope` of the regression of `log Δm` (first) on `log Δλ`.
fn holder_fit(pts: &[(f64, f64)]) -> Result<f64> {
    if pts.len() < 3 || pts.iter().any(|&(_, y)| !y.is_finite()) {
        return Err(RecoveryError::DegenerateSlope { derivative: 0.0 });
    }
    let n = pts.len() as f64;
    let mean_m = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_l = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (cov, var) = pts.iter().fold((0.0, 0.0), |(c, v), &(lm, ll)| {
        (c + (lm - mean_m) * (ll - mean_l), v + (ll - mean_l) * (ll - mean_l))
    });
    let slope = cov / var;
    if !(slope.is_finite() && slope > 0.0) {
        return Err(RecoveryError::DegenerateSlope { derivative: 0.0 });
    }
    Ok(1.0 / slope)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeMode {
    Lattice,
    Shooting,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityEstimate {
    pub condition: f64,
    pub holder_n: f64,
    pub lambda: Complex64,
}

/// Empirical surrogates for the constants of the Hölder bound at `m̂`:
/// the condition `|dλ/dm|⁻¹` and the exponent denominator `N`.
pub fn stability_probe(
    m_hat: f64,
    cosmological: f64,
    l: u32,
    k: u32,
    mode: ProbeMode,
    shooting: &ShootingConfig,
) -> Result<StabilityEstimate> {
    require_lambda(cosmological)?;
    let params = BlackHoleParams::new(m_hat, cosmological)?;
    let m_max = max_mass(cosmological);
    match mode {
        ProbeMode::Lattice => {
            let n = lattice_index_factor(l, k, Sign::Plus);
            let derivative = n.norm() * lattice_scale_derivative(&params).abs();
            if derivative < 1e-14 {
                return Err(RecoveryError::DegenerateSlope { derivative });
            }
            let holder_n = holder_exponent(
                |m| Ok(n * lattice_scale(&BlackHoleParams::new(m, cosmological)?)),
                m_hat,
                m_max,
            )?;
            Ok(StabilityEstimate {
                condition: 1.0 / derivative,
                holder_n,
                lambda: n * lattice_scale(&params),
            })
        }
        ProbeMode::Shooting => {
            let z0 = Shooter::new(&params, l, shooting).overtone(k, Sign::Plus)?.location;
            let cfg = NumericConfig {
                shooting: *shooting,
                ..NumericConfig::default()
            };
            let tracker = Tracker {
                target: z0,
                cosmological,
                l,
                cfg: &cfg,
            };
            let h = 1e-4 * m_hat;
            if m_hat + h >= m_max {
                return Err(RecoveryError::InvalidInput("m̂ too close to the extremal mass".into()));
            }
            let zp = tracker.zero_at(m_hat + h, tracker.predict(z0, m_hat, m_hat + h)?)?;
            let zm = tracker.zero_at(m_hat - h, tracker.predict(z0, m_hat, m_hat - h)?)?;
            let derivative = ((zp - zm) / (2.0 * h)).norm();
            if derivative < 1e-14 {
                return Err(RecoveryError::DegenerateSlope { derivative });
            }
            let holder_n = holder_exponent(|m| tracker.zero_at(m, tracker.predict(z0, m_hat, m)?), m_hat, m_max)?;
            Ok(StabilityEstimate {
                condition: 1.0 / derivative,
                holder_n,
                lambda: z0,
            })
        }
    }
}

/// Shooting zero of index `k` for the given parameters; a convenience for
/// generating synthetic data.
pub fn shooting_mode(params: &BlackHoleParams, l: u32, k: u32, sign: Sign, cfg: &ShootingConfig) -> Result<Complex64> {
    Ok(Shooter::new(params, l, cfg).overtone(k, sign)?.location)
}
