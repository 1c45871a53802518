//! Zeros of holomorphic functions inside axis-aligned complex rectangles.
//!
//! Zeros are counted with the argument principle (boundary winding number of
//! `f`, built from phase increments so no derivative is required), isolated by
//! quad-tree subdivision and then polished with a Muller iteration.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;
use thiserror::Error;

/// Failure reported by a fallible function handle.
pub type EvalError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum ZscanError {
    #[error("degenerate rectangle [{re_min}, {re_max}] x [{im_min}, {im_max}]")]
    DegenerateRect {
        re_min: f64,
        re_max: f64,
        im_min: f64,
        im_max: f64,
    },
    #[error("|f| vanishes on the contour near {at}")]
    BoundaryZero { at: Complex64 },
    #[error("winding sum {winding:.4} is not close to an integer")]
    NonIntegerWinding { winding: f64 },
    #[error("negative winding number {winding}: the function has poles inside the contour")]
    NegativeWinding { winding: i64 },
    #[error("subdivision exceeded depth {depth} (clustered or multiple zeros)")]
    MaxDepthExceeded { depth: usize },
    #[error("no convergence after {iterations} iterations (last |f| = {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("function evaluation failed: {0}")]
    Evaluation(#[source] EvalError),
}

pub type Result<T> = std::result::Result<T, ZscanError>;

/// A function that can be evaluated at complex points, possibly failing.
///
/// Plain closures `Fn(Complex64) -> Complex64` implement this directly; wrap
/// a `Result`-returning closure in [`Fallible`].
pub trait Holomorphic: Sync {
    fn eval(&self, z: Complex64) -> std::result::Result<Complex64, EvalError>;
}

impl<F> Holomorphic for F
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    fn eval(&self, z: Complex64) -> std::result::Result<Complex64, EvalError> {
        Ok(self(z))
    }
}

/// Adapter for function handles whose evaluation can fail.
pub struct Fallible<F>(pub F);

impl<F, E> Holomorphic for Fallible<F>
where
    F: Fn(Complex64) -> std::result::Result<Complex64, E> + Sync,
    E: std::error::Error + Send + Sync + 'static,
{
    fn eval(&self, z: Complex64) -> std::result::Result<Complex64, EvalError> {
        (self.0)(z).map_err(|e| Box::new(e) as EvalError)
    }
}

fn eval<F: Holomorphic + ?Sized>(f: &F, z: Complex64) -> Result<Complex64> {
    let w = f.eval(z).map_err(ZscanError::Evaluation)?;
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(ZscanError::Evaluation(format!("non-finite value {w} at {z}").into()));
    }
    Ok(w)
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexRect {
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
}

impl ComplexRect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) && re_min < re_max && im_min < im_max;
        if !ok {
            return Err(ZscanError::DegenerateRect {
                re_min,
                re_max,
                im_min,
                im_max,
            });
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn re_min(&self) -> f64 {
        self.re_min
    }
    pub fn re_max(&self) -> f64 {
        self.re_max
    }
    pub fn im_min(&self) -> f64 {
        self.im_min
    }
    pub fn im_max(&self) -> f64 {
        self.im_max
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    /// Closed containment test with an absolute slack.
    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re_min - slack
            && z.re <= self.re_max + slack
            && z.im >= self.im_min - slack
            && z.im <= self.im_max + slack
    }

    /// Same rectangle grown by `factor` (e.g. 0.1 for 10%) about its center.
    pub fn dilate(&self, factor: f64) -> Result<Self> {
        let dw = 0.5 * factor * self.width();
        let dh = 0.5 * factor * self.height();
        Self::new(self.re_min - dw, self.re_max + dw, self.im_min - dh, self.im_max + dh)
    }

    /// Rectangle reflected through the imaginary axis (`z -> -conj z`).
    pub fn mirror_re(&self) -> Self {
        Self {
            re_min: -self.re_max,
            re_max: -self.re_min,
            im_min: self.im_min,
            im_max: self.im_max,
        }
    }

    fn grow(&self, by: f64) -> Self {
        Self {
            re_min: self.re_min - by,
            re_max: self.re_max + by,
            im_min: self.im_min - by,
            im_max: self.im_max + by,
        }
    }

    fn split(&self, fx: f64, fy: f64) -> [Self; 4] {
        let xm = self.re_min + fx * self.width();
        let ym = self.im_min + fy * self.height();
        [
            Self {
                re_min: self.re_min,
                re_max: xm,
                im_min: self.im_min,
                im_max: ym,
            },
            Self {
                re_min: xm,
                re_max: self.re_max,
                im_min: self.im_min,
                im_max: ym,
            },
            Self {
                re_min: self.re_min,
                re_max: xm,
                im_min: ym,
                im_max: self.im_max,
            },
            Self {
                re_min: xm,
                re_max: self.re_max,
                im_min: ym,
                im_max: self.im_max,
            },
        ]
    }
}

/// A located zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroReport {
    pub location: Complex64,
    pub multiplicity: usize,
    /// `|f|` at `location`.
    pub residual: f64,
    pub refine_iterations: usize,
}

/// Tuning knobs shared by the scanning routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    /// Nodes per rectangle edge for the winding sum (at least 16).
    pub quad_points: usize,
    /// Maximum quad-tree depth.
    pub max_depth: usize,
    /// Maximum Muller iterations per leaf.
    pub max_iter: usize,
    /// Refinement tolerance on `|f|` and on the step length.
    pub tol: f64,
    /// Largest `|f|` accepted for a reported zero.
    pub residual_tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            quad_points: 32,
            max_depth: 40,
            max_iter: 200,
            tol: 1e-10,
            residual_tol: 1e-9,
        }
    }
}

const BOUNDARY_REL: f64 = 1e-13;
const JITTER_REL: f64 = 1e-6;
const MAX_BISECT: usize = 24;
const NEAR_ZERO_REL: f64 = 0.25;

/// Winding number of `f` along the boundary of `rect`, as a real number.
fn winding<F: Holomorphic + ?Sized>(f: &F, rect: &ComplexRect, quad_points: usize) -> Result<f64> {
    let n = quad_points.max(16);
    let corners = rect.corners();
    let mut nodes = Vec::with_capacity(4 * n + 1);
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        for j in 0..n {
            nodes.push(a + (b - a) * (j as f64 / n as f64));
        }
    }
    let values = nodes.iter().map(|&z| eval(f, z)).collect::<Result<Vec<_>>>()?;

    let mut mags: Vec<f64> = values.iter().map(|w| w.norm()).collect();
    mags.sort_by(f64::total_cmp);
    let typical = mags[mags.len() / 2];
    let floor = BOUNDARY_REL * typical;
    if let Some(i) = values.iter().position(|w| w.norm() <= floor) {
        return Err(ZscanError::BoundaryZero { at: nodes[i] });
    }

    let m = nodes.len();
    let mut total = 0.0;
    for i in 0..m {
        let j = (i + 1) % m;
        total += phase_increment(f, (nodes[i], values[i]), (nodes[j], values[j]), floor, typical, 0)?;
    }
    Ok(total / TAU)
}

/// Phase change of `f` along a segment, bisecting until every piece turns
/// by less than π/2.
///
/// Near a zero of multiplicity `m` a segment can turn by a full 2π and alias
/// to a small increment. That needs endpoints much closer to the zero than
/// the bulk of the contour, so such segments are confirmed at their midpoint.
fn phase_increment<F: Holomorphic + ?Sized>(
    f: &F,
    (za, fa): (Complex64, Complex64),
    (zb, fb): (Complex64, Complex64),
    floor: f64,
    typical: f64,
    depth: usize,
) -> Result<f64> {
    let d = (fb / fa).arg();
    let suspect = fa.norm().min(fb.norm()) < NEAR_ZERO_REL * typical;
    if d.abs() < FRAC_PI_2 && !suspect {
        return Ok(d);
    }
    if depth >= MAX_BISECT {
        return Err(ZscanError::NonIntegerWinding { winding: f64::NAN });
    }
    let zm = 0.5 * (za + zb);
    let fm = eval(f, zm)?;
    if fm.norm() <= floor {
        return Err(ZscanError::BoundaryZero { at: zm });
    }
    if d.abs() < FRAC_PI_2 {
        let (d1, d2) = ((fm / fa).arg(), (fb / fm).arg());
        if d1.abs() < FRAC_PI_2 && d2.abs() < FRAC_PI_2 && (d1 + d2 - d).abs() < 1e-9 {
            return Ok(d);
        }
    }
    Ok(phase_increment(f, (za, fa), (zm, fm), floor, typical, depth + 1)?
        + phase_increment(f, (zm, fm), (zb, fb), floor, typical, depth + 1)?)
}

fn count_exact<F: Holomorphic + ?Sized>(f: &F, rect: &ComplexRect, quad_points: usize) -> Result<usize> {
    let w = winding(f, rect, quad_points)?;
    let n = w.round();
    if !w.is_finite() || (w - n).abs() > 0.25 {
        return Err(ZscanError::NonIntegerWinding { winding: w });
    }
    if n < 0.0 {
        return Err(ZscanError::NegativeWinding { winding: n as i64 });
    }
    Ok(n as usize)
}

/// Number of zeros of `f` inside `rect`, counted with multiplicity.
///
/// A zero sitting on the contour triggers one retry on a rectangle grown by
/// `1e-6` of its width before `BoundaryZero` is returned.
pub fn count_zeros<F: Holomorphic + ?Sized>(f: &F, rect: &ComplexRect, quad_points: usize) -> Result<usize> {
    match count_exact(f, rect, quad_points) {
        Err(ZscanError::BoundaryZero { .. }) => count_exact(f, &rect.grow(JITTER_REL * rect.width()), quad_points),
        other => other,
    }
}

/// Muller iteration from `z0` until `|f| <= tol` or the step drops below `tol`.
pub fn refine_zero<F: Holomorphic + ?Sized>(f: &F, z0: Complex64, tol: f64) -> Result<ZeroReport> {
    let h = 1e-3 * z0.norm().max(1.0);
    refine_with(f, z0, h, tol, ScanConfig::default().max_iter)
}

pub(crate) fn refine_with<F: Holomorphic + ?Sized>(
    f: &F,
    z0: Complex64,
    spread: f64,
    tol: f64,
    max_iter: usize,
) -> Result<ZeroReport> {
    let mut pts = [z0 + Complex64::new(spread, 0.0), z0 + Complex64::new(0.0, spread), z0];
    let mut vals = [eval(f, pts[0])?, eval(f, pts[1])?, eval(f, pts[2])?];
    // keep the best point last
    let best = (0..3)
        .min_by(|&a, &b| vals[a].norm().total_cmp(&vals[b].norm()))
        .unwrap();
    pts.swap(best, 2);
    vals.swap(best, 2);

    let report = |z: Complex64, w: Complex64, it: usize| ZeroReport {
        location: z,
        multiplicity: 1,
        residual: w.norm(),
        refine_iterations: it,
    };

    for it in 1..=max_iter {
        let (z2, f2) = (pts[2], vals[2]);
        if f2.norm() <= tol {
            return Ok(report(z2, f2, it - 1));
        }
        let mut step = muller_step(pts, vals);
        if !(step.re.is_finite() && step.im.is_finite()) || step.norm() == 0.0 {
            // collinear or flat data: fall back to a secant step
            let d = (vals[2] - vals[1]) / (pts[2] - pts[1]);
            step = if d.norm() > 0.0 {
                -f2 / d
            } else {
                Complex64::new(spread, spread)
            };
        }

        let mut accepted = None;
        for _ in 0..12 {
            let z = z2 + step;
            // a failed evaluation is treated like an ascent step
            if let Ok(w) = eval(f, z) {
                if w.norm() <= f2.norm() {
                    accepted = Some((z, w));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((z3, f3)) = accepted else {
            // no descent possible: we are at the numerical floor of f
            return Ok(report(z2, f2, it));
        };
        pts = [pts[1], pts[2], z3];
        vals = [vals[1], vals[2], f3];
        if step.norm() < tol {
            return Ok(report(z3, f3, it));
        }
    }
    Err(ZscanError::NoConvergence {
        iterations: max_iter,
        residual: vals[2].norm(),
    })
}

fn muller_step(z: [Complex64; 3], f: [Complex64; 3]) -> Complex64 {
    let h1 = z[1] - z[0];
    let h2 = z[2] - z[1];
    let d1 = (f[1] - f[0]) / h1;
    let d2 = (f[2] - f[1]) / h2;
    let a = (d2 - d1) / (h2 + h1);
    let b = a * h2 + d2;
    let c = f[2];
    let disc = (b * b - 4.0 * a * c).sqrt();
    let den = if (b + disc).norm() >= (b - disc).norm() {
        b + disc
    } else {
        b - disc
    };
    -2.0 * c / den
}

/// All zeros of `f` inside `rect` with the default configuration and the
/// given refinement tolerance.
pub fn find_zeros<F: Holomorphic + ?Sized>(f: &F, rect: &ComplexRect, tol: f64) -> Result<Vec<ZeroReport>> {
    let cfg = ScanConfig {
        tol,
        residual_tol: ScanConfig::default().residual_tol.max(tol),
        ..ScanConfig::default()
    };
    find_zeros_with(f, rect, &cfg)
}

/// All zeros of `f` inside `rect`, sorted by (Re, Im).
///
/// The multiplicities of the returned reports sum to `count_zeros(f, rect)`.
pub fn find_zeros_with<F: Holomorphic + ?Sized>(
    f: &F,
    rect: &ComplexRect,
    cfg: &ScanConfig,
) -> Result<Vec<ZeroReport>> {
    let (rect, count) = match count_exact(f, rect, cfg.quad_points) {
        Ok(n) => (*rect, n),
        Err(ZscanError::BoundaryZero { .. }) => {
            let grown = rect.grow(JITTER_REL * rect.width());
            (grown, count_exact(f, &grown, cfg.quad_points)?)
        }
        Err(e) => return Err(e),
    };
    let scale = rect.diameter();
    let mut zeros = scan(f, &rect, count, 0, cfg, scale)?;
    zeros.sort_by(|a, b| {
        a.location
            .re
            .total_cmp(&b.location.re)
            .then(a.location.im.total_cmp(&b.location.im))
    });
    Ok(zeros)
}

// Off-center split ratios; round inputs rarely put a zero on these lines.
const SPLITS: [(f64, f64); 4] = [(0.5123, 0.4871), (0.4617, 0.5389), (0.5531, 0.4402), (0.4259, 0.5713)];

fn scan<F: Holomorphic + ?Sized>(
    f: &F,
    rect: &ComplexRect,
    count: usize,
    depth: usize,
    cfg: &ScanConfig,
    scale: f64,
) -> Result<Vec<ZeroReport>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let cluster = (1e3 * cfg.tol).max(1e-9 * scale);
    if count == 1 || rect.diameter() < cluster {
        let spread = 0.25 * rect.width().min(rect.height());
        let rep = refine_with(f, rect.center(), spread, cfg.tol, cfg.max_iter);
        let rep = match rep {
            Ok(r) => r,
            Err(e) if rect.diameter() < cluster => return Err(e),
            Err(_) => ZeroReport {
                location: Complex64::new(f64::NAN, f64::NAN),
                multiplicity: 0,
                residual: f64::INFINITY,
                refine_iterations: 0,
            },
        };
        let slack = 1e-9 * scale;
        if rect.contains(rep.location, slack) {
            if rep.residual > cfg.residual_tol {
                return Err(ZscanError::NoConvergence {
                    iterations: rep.refine_iterations,
                    residual: rep.residual,
                });
            }
            return Ok(vec![ZeroReport {
                multiplicity: count,
                ..rep
            }]);
        }
        if rect.diameter() < cluster {
            return Err(ZscanError::MaxDepthExceeded { depth });
        }
    }
    if depth >= cfg.max_depth {
        return Err(ZscanError::MaxDepthExceeded { depth });
    }

    let mut last_err = None;
    for &(fx, fy) in SPLITS.iter().cycle().skip(depth % SPLITS.len()).take(SPLITS.len()) {
        let children = rect.split(fx, fy);
        let counts: Vec<Result<usize>> = rayon_map(&children, |c| count_exact(f, c, cfg.quad_points));
        let counts = match counts.into_iter().collect::<Result<Vec<_>>>() {
            Ok(c) => c,
            Err(e @ (ZscanError::BoundaryZero { .. } | ZscanError::NonIntegerWinding { .. })) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        if counts.iter().sum::<usize>() != count {
            last_err = Some(ZscanError::NonIntegerWinding { winding: f64::NAN });
            continue;
        }
        let jobs: Vec<(ComplexRect, usize)> = children.into_iter().zip(counts).collect();
        let parts = rayon_map(&jobs, |(c, n)| scan(f, c, *n, depth + 1, cfg, scale));
        let mut out = Vec::with_capacity(count);
        for p in parts {
            out.extend(p?);
        }
        return Ok(out);
    }
    Err(last_err.unwrap_or(ZscanError::MaxDepthExceeded { depth }))
}

fn rayon_map<T: Sync, R: Send>(items: &[T], op: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(op).collect()
}
