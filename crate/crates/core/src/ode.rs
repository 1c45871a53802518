//! Adaptive Dormand-Prince 5(4) integrator for small complex-valued systems.
//!
//! The independent variable is real; callers integrating along a complex path
//! parametrize it by arclength and fold the direction into the right-hand side.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("exceeded {max_steps} steps before reaching t = {target}")]
    TooManySteps { max_steps: usize, target: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Smallest step allowed, relative to the interval length.
    pub h_min_rel: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-300,
            max_steps: 1_000_000,
            h_min_rel: 1e-14,
        }
    }
}

/// Final state of an integration.
#[derive(Debug, Clone, Copy)]
pub struct Endpoint<const N: usize> {
    pub t: f64,
    pub y: [Complex64; N],
    pub steps: usize,
}

// Dormand-Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b* (error weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[Complex64; N], terms: &[(f64, &[Complex64; N])], h: f64) -> [Complex64; N] {
    let mut out = *y;
    for (a, k) in terms {
        for i in 0..N {
            out[i] += k[i] * (h * a);
        }
    }
    out
}

impl Dopri5 {
    pub fn with_rtol(rtol: f64) -> Self {
        Self {
            rtol,
            ..Self::default()
        }
    }

    /// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction).
    pub fn integrate<const N: usize, F>(
        &self,
        f: F,
        t0: f64,
        y0: [Complex64; N],
        t1: f64,
    ) -> Result<Endpoint<N>, OdeError>
    where
        F: FnMut(f64, &[Complex64; N]) -> [Complex64; N],
    {
        self.integrate_until(f, t0, y0, t1, |_, _| false)
    }

    /// Integrate towards `t1`, stopping early after the first accepted step
    /// for which `stop(t, y)` returns true.
    pub fn integrate_until<const N: usize, F, S>(
        &self,
        mut f: F,
        t0: f64,
        y0: [Complex64; N],
        t1: f64,
        mut stop: S,
    ) -> Result<Endpoint<N>, OdeError>
    where
        F: FnMut(f64, &[Complex64; N]) -> [Complex64; N],
        S: FnMut(f64, &[Complex64; N]) -> bool,
    {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(Endpoint { t: t0, y: y0, steps: 0 });
        }
        let dir = span.signum();
        let h_min = self.h_min_rel * span.abs();
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut h = dir * self.initial_step(&y, &k1, span.abs());
        let mut steps = 0;

        while (t1 - t) * dir > 0.0 {
            if steps >= self.max_steps {
                return Err(OdeError::TooManySteps {
                    max_steps: self.max_steps,
                    target: t1,
                });
            }
            if (t + h - t1) * dir > 0.0 {
                h = t1 - t;
            }

            let k2 = f(t + C2 * h, &axpy(&y, &[(A21, &k1)], h));
            let k3 = f(t + C3 * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
            let k4 = f(t + C4 * h, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
            let k5 = f(
                t + C5 * h,
                &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
            );
            let k6 = f(
                t + h,
                &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
            );
            let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
            let k7 = f(t + h, &y_new);

            let mut err2 = 0.0;
            for i in 0..N {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
                let sc = self.atol + self.rtol * y[i].norm().max(y_new[i].norm());
                err2 += (e.norm() / sc).powi(2);
            }
            let err = (err2 / N as f64).sqrt();
            if !err.is_finite() {
                if h.abs() <= h_min {
                    return Err(OdeError::NonFinite { t });
                }
                h *= 0.1;
                continue;
            }

            if err <= 1.0 {
                t += h;
                y = y_new;
                k1 = k7;
                steps += 1;
                if y.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                    return Err(OdeError::NonFinite { t });
                }
                if stop(t, &y) {
                    break;
                }
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                h *= fac;
            } else {
                h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                if h.abs() < h_min {
                    return Err(OdeError::StepSizeUnderflow { t, h: h.abs() });
                }
            }
        }
        Ok(Endpoint { t, y, steps })
    }

    fn initial_step<const N: usize>(&self, y: &[Complex64; N], dy: &[Complex64; N], span: f64) -> f64 {
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].norm();
            d0 += (y[i].norm() / sc).powi(2);
            d1 += (dy[i].norm() / sc).powi(2);
        }
        let h = if d0 < 1e-10 || d1 < 1e-10 {
            1e-6
        } else {
            0.01 * (d0 / d1).sqrt()
        };
        h.min(span).max(self.h_min_rel * span)
    }
}
