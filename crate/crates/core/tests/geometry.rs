use num_complex::Complex64;
use proptest::prelude::*;
use qnm_core::geometry::*;

/// 20 values of Λ log-spaced over [1e-4, 1] and, for each, 20 masses spread
/// across the admissible interval.
fn grid() -> Vec<BlackHoleParams> {
    let mut out = Vec::new();
    for i in 0..20 {
        let lambda = 10f64.powf(-4.0 + 4.0 * f64::from(i) / 19.0);
        for j in 0..20 {
            let frac = 0.01 + 0.98 * f64::from(j) / 19.0;
            out.push(BlackHoleParams::new(frac * max_mass(lambda), lambda).unwrap());
        }
    }
    out
}

#[test]
fn vieta_identities_on_grid() {
    for p in grid() {
        let h = horizons(&p);
        let (a, b, c) = (h.r_bh, h.r_si, h.r_0);
        let scale = a.abs().max(b.abs()).max(c.abs());
        assert!((a + b + c).abs() <= 1e-12 * scale, "{p:?}");
        let pairs = a * b + b * c + c * a;
        assert!((pairs + 3.0 / p.lambda()).abs() <= 1e-12 * (3.0 / p.lambda()), "{p:?}");
        let prod = a * b * c;
        let target = -6.0 * p.mass() / p.lambda();
        assert!((prod - target).abs() <= 1e-12 * target.abs(), "{p:?}");
    }
}

#[test]
fn horizons_are_zeros_of_the_lapse() {
    for p in grid() {
        let h = horizons(&p);
        for r in [h.r_bh, h.r_si, h.r_0] {
            // terms of α² are O(1) at every root
            assert!(alpha_sq(r, &p).abs() <= 1e-12, "{p:?} r = {r}");
        }
        assert!(h.r_0 < 0.0 && 0.0 < h.r_bh && h.r_bh < h.r_si);
        assert!(h.beta_bh > 0.0 && h.beta_si < 0.0, "{p:?}");
    }
}

#[test]
fn horizons_move_apart_as_mass_decreases() {
    for lambda in [1e-3, 0.04, 0.5] {
        let mut prev: Option<HorizonData> = None;
        for j in 1..100 {
            let m = max_mass(lambda) * f64::from(j) / 100.0;
            let h = horizons(&BlackHoleParams::new(m, lambda).unwrap());
            if let Some(q) = prev {
                assert!(h.r_bh > q.r_bh);
                assert!(h.r_si < q.r_si);
            }
            prev = Some(h);
        }
    }
}

/// Independent root formula: the roots are `(2/√Λ) Im ω` over the three cube
/// roots `ω` of `√(1 - 9m²Λ) + 3im√Λ`.
#[test]
fn complex_cube_root_form_agrees() {
    for p in grid() {
        let s = 3.0 * p.mass() * p.lambda().sqrt();
        let w = Complex64::new((1.0 - s * s).sqrt(), s);
        let amp = 2.0 / p.lambda().sqrt();
        let mut roots: Vec<f64> = (0..3)
            .map(|k| {
                let arg = w.arg() / 3.0 + 2.0 * std::f64::consts::PI * f64::from(k) / 3.0;
                amp * arg.sin()
            })
            .collect();
        roots.sort_by(f64::total_cmp);
        let h = horizons(&p);
        for (a, b) in roots.iter().zip([h.r_0, h.r_bh, h.r_si]) {
            assert!((a - b).abs() <= 1e-9 * amp, "{p:?}: {a} vs {b}");
        }
    }
}

#[test]
fn unit_mass_reference_values() {
    let h = horizons(&BlackHoleParams::new(1.0, 0.04).unwrap());
    assert!((h.r_bh - 2.129).abs() < 1e-3);
    assert!((h.r_si - 7.397).abs() < 1e-3);
    assert!((h.r_0 + 9.526).abs() < 1e-3);
}

#[test]
fn small_lambda_limit_is_schwarzschild() {
    for m in [0.5, 1.0, 3.0] {
        let lambda = 1e-8 / (m * m);
        let h = horizons(&BlackHoleParams::new(m, lambda).unwrap());
        // r_bH = 2m + (8/3) m³ Λ + O(Λ²)
        let expect = 2.0 * m + 8.0 / 3.0 * m.powi(3) * lambda;
        assert!((h.r_bh - expect).abs() <= 1e-12 * m, "{}", h.r_bh - expect);
        assert!((h.beta_bh - 0.25 / m).abs() <= 1e-7 / m);
        assert!((h.r_si - (3.0 / lambda).sqrt()).abs() <= 1e-3 * (3.0 / lambda).sqrt());
    }
}

#[test]
fn extremal_limit_merges_horizons() {
    let lambda = 0.04;
    let m = max_mass(lambda) * (1.0 - 1e-8);
    let p = BlackHoleParams::new(m, lambda).unwrap();
    let h = horizons(&p);
    let r_c = 1.0 / lambda.sqrt();
    assert!((h.r_bh - r_c).abs() < 1e-3 * r_c);
    assert!((h.r_si - r_c).abs() < 1e-3 * r_c);
    assert!(h.beta_bh < 1e-4 && h.beta_si > -1e-4);
    assert!(BlackHoleParams::new(max_mass(lambda), lambda).is_err());
}

#[test]
fn inadmissible_parameters_are_rejected() {
    for (m, l) in [
        (0.0, 0.1),
        (-1.0, 0.1),
        (1.0, 0.0),
        (1.0, -0.1),
        (2.0, 0.1),
        (f64::NAN, 0.1),
    ] {
        assert!(BlackHoleParams::new(m, l).is_err(), "{m} {l}");
    }
}

fn interior_points(p: &BlackHoleParams, n: usize) -> Vec<f64> {
    let h = horizons(p);
    (1..=n)
        .map(|i| h.r_bh + (h.r_si - h.r_bh) * i as f64 / (n + 1) as f64)
        .collect()
}

#[test]
fn tortoise_derivative_is_inverse_lapse() {
    let p = BlackHoleParams::new(1.0, 0.04).unwrap();
    for r in interior_points(&p, 20) {
        let h = 1e-5;
        let d = (tortoise(r + h, &p).unwrap() - tortoise(r - h, &p).unwrap()) / (2.0 * h);
        let exact = 1.0 / alpha_sq(r, &p);
        assert!((d - exact).abs() <= 1e-6 * exact, "r = {r}");
    }
}

#[test]
fn tortoise_is_increasing_and_vanishes_at_critical_radius() {
    let p = BlackHoleParams::new(0.7, 0.1).unwrap();
    let xs: Vec<f64> = interior_points(&p, 1000)
        .into_iter()
        .map(|r| tortoise(r, &p).unwrap())
        .collect();
    assert!(xs.windows(2).all(|w| w[1] > w[0]));
    assert!(tortoise(p.critical_radius(), &p).unwrap().abs() < 1e-12);
}

/// Composite Simpson on `1/α²` from the critical radius.
#[test]
fn tortoise_matches_quadrature() {
    let p = BlackHoleParams::new(1.0, 0.04).unwrap();
    let rc = p.critical_radius();
    let f = |r: f64| 1.0 / alpha_sq(r, &p);
    for r in [2.3, 3.0, 4.5, 6.0, 7.2] {
        let n = 20_000;
        let h = (r - rc) / n as f64;
        let mut s = f(rc) + f(r);
        for i in 1..n {
            s += f(rc + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let q = s * h / 3.0;
        assert!((tortoise(r, &p).unwrap() - q).abs() < 1e-8, "r = {r}");
    }
}

#[test]
fn tortoise_domain_and_inverse() {
    let p = BlackHoleParams::new(1.0, 0.04).unwrap();
    let h = horizons(&p);
    assert!(tortoise(h.r_bh, &p).is_err());
    assert!(tortoise(h.r_si + 0.1, &p).is_err());
    assert!(rw_potential(1.0, &p, 2).is_err());
    for x in [-30.0, -5.0, 0.0, 3.0, 25.0] {
        let r = radius_at(x, &p);
        assert!((tortoise(r, &p).unwrap() - x).abs() < 1e-9, "x = {x}");
    }
}

#[test]
fn trivial_set_spacing() {
    let p = BlackHoleParams::new(1.0, 0.04).unwrap();
    let h = horizons(&p);
    let t = trivial_set(&p, 3);
    assert_eq!(t[0], Complex64::new(0.0, 0.0));
    assert_eq!(t.len(), 7);
    assert!(t.iter().any(|z| (z.im + h.beta_bh).abs() < 1e-14));
    assert!(t.iter().any(|z| (z.im + 3.0 * h.beta_si.abs()).abs() < 1e-14));
    assert!(t.windows(2).all(|w| w[0].im.abs() <= w[1].im.abs()));
}

proptest! {
    #[test]
    fn potential_is_positive_and_vanishes_at_horizons(
        lambda in 1e-3f64..0.5,
        frac in 0.05f64..0.95,
        l in 0u32..6,
    ) {
        let p = BlackHoleParams::new(frac * max_mass(lambda), lambda).unwrap();
        let h = horizons(&p);
        let mut peak = 0f64;
        let photon_sphere = 3.0 * p.mass();
        for r in interior_points(&p, 30).into_iter().chain([photon_sphere]) {
            let v = rw_potential(r, &p, l).unwrap();
            if l > 0 {
                prop_assert!(v > 0.0);
            }
            prop_assert!(v.is_finite());
            peak = peak.max(v.abs());
        }
        prop_assert!(rw_potential(h.r_bh * (1.0 + 1e-9), &p, l).unwrap().abs() < 1e-6 * peak);
        prop_assert!(rw_potential(h.r_si * (1.0 - 1e-9), &p, l).unwrap().abs() < 1e-6 * peak);
    }

    #[test]
    fn horizon_scaling(lambda in 1e-3f64..0.5, frac in 0.05f64..0.95, s in 0.2f64..5.0) {
        let p = BlackHoleParams::new(frac * max_mass(lambda), lambda).unwrap();
        let q = BlackHoleParams::new(s * p.mass(), lambda / (s * s)).unwrap();
        let (a, b) = (horizons(&p), horizons(&q));
        prop_assert!((b.r_bh - s * a.r_bh).abs() <= 1e-10 * b.r_si);
        prop_assert!((b.r_si - s * a.r_si).abs() <= 1e-10 * b.r_si);
        prop_assert!((b.beta_bh - a.beta_bh / s).abs() <= 1e-8 * a.beta_bh.abs() / s);
    }
}
