use num_complex::Complex64;
use proptest::prelude::*;
use qnm_core::geometry::BlackHoleParams;
use qnm_core::spectrum::*;
use qnm_core::zscan::ComplexRect;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn unit() -> BlackHoleParams {
    BlackHoleParams::new(1.0, 0.04).unwrap()
}

fn fundamental(params: &BlackHoleParams, l: u32, cfg: &ShootingConfig) -> Complex64 {
    let mu = pseudo_pole(params, l, 0, Sign::Plus).mu;
    Shooter::new(params, l, cfg).track(mu).unwrap().location
}

#[test]
fn fundamental_approaches_lattice_with_growing_l() {
    let p = unit();
    let cfg = ShootingConfig::default();
    let dev: Vec<f64> = [8, 10, 12]
        .iter()
        .map(|&l| {
            let z = Shooter::new(&p, l, &cfg).overtone(0, Sign::Plus).unwrap().location;
            let mu = pseudo_pole(&p, l, 0, Sign::Plus).mu;
            (z - mu).norm() / mu.norm()
        })
        .collect();
    assert!(dev[1] < 0.05, "{dev:?}");
    assert!(dev[0] > dev[1] && dev[1] > dev[2], "{dev:?}");
}

#[test]
fn reference_fundamental_at_l10() {
    let z = fundamental(&unit(), 10, &ShootingConfig::default());
    assert!((z - c(1.6155669939, -0.0770788725)).norm() < 1e-8, "{z}");
}

#[test]
fn minus_column_mirrors_plus_column() {
    let sh = Shooter::new(&unit(), 3, &ShootingConfig::default());
    let a = sh.overtone(0, Sign::Plus).unwrap().location;
    let b = sh.overtone(0, Sign::Minus).unwrap().location;
    assert!((a + b.conj()).norm() < 1e-9, "{a} {b}");
}

#[test]
fn solver_tolerances_do_not_move_zeros() {
    let p = unit();
    let base = ShootingConfig::default();
    for l in [2, 6] {
        let z0 = fundamental(&p, l, &base);
        let tight = ShootingConfig {
            rtol: base.rtol / 32.0,
            xmax_tol: 1e-12,
            ..base
        };
        assert!((fundamental(&p, l, &tight) - z0).norm() < 1e-6, "l = {l}");
        let moved = ShootingConfig {
            match_point: 1.0,
            ..base
        };
        assert!((fundamental(&p, l, &moved) - z0).norm() < 1e-8, "l = {l}");
    }
}

#[test]
fn rotation_angle_does_not_move_zeros() {
    let p = unit();
    let z0 = fundamental(&p, 4, &ShootingConfig::default());
    for theta in [0.2, 0.6, 1.0] {
        let cfg = ShootingConfig {
            rotation: Some(theta),
            ..ShootingConfig::default()
        };
        assert!((fundamental(&p, 4, &cfg) - z0).norm() < 1e-8, "θ = {theta}");
    }
}

#[test]
fn mass_scaling_covariance() {
    let cfg = ShootingConfig::default();
    let z = fundamental(&unit(), 3, &cfg);
    for s in [0.5, 2.0] {
        let q = BlackHoleParams::new(s, 0.04 / (s * s)).unwrap();
        let zs = fundamental(&q, 3, &cfg);
        assert!((zs * s - z).norm() <= 1e-6 * z.norm(), "s = {s}");
    }
}

#[test]
fn physical_half_plane_has_no_modes() {
    let sh = Shooter::new(&unit(), 2, &ShootingConfig::default());
    let rect = ComplexRect::new(0.1, 0.7, 0.01, 0.15).unwrap();
    assert!(sh.zeros_in(&rect).unwrap().is_empty());
}

#[test]
fn wronskian_is_bounded_away_from_zero_between_modes() {
    let p = unit();
    let sh = Shooter::new(&p, 10, &ShootingConfig::default());
    let z0 = sh.track(pseudo_pole(&p, 10, 0, Sign::Plus).mu).unwrap().location;
    let scale = sh.wronskian(z0 + c(0.0, 0.05)).unwrap().norm();
    for dz in [c(0.1, 0.0), c(-0.1, 0.0), c(0.0, 0.04), c(0.05, -0.02)] {
        assert!(sh.wronskian(z0 + dz).unwrap().norm() > 1e-3 * scale, "{dz}");
    }
    assert!(sh.wronskian(z0).unwrap().norm() <= WRONSKIAN_TOL);
}

#[test]
fn zeros_in_window_pass_residual_gate() {
    let p = unit();
    let w = QnmWindow::new(ComplexRect::new(0.3, 0.5, -0.2, -0.01).unwrap(), 2, Method::Shooting).unwrap();
    let zs = qnm_shooting(&p, &w, &ShootingConfig::default()).unwrap();
    assert_eq!(zs.len(), 1);
    assert!((zs[0].location - c(0.3807839375, -0.0787588)).norm() < 1e-6);
    assert!(zs[0].residual <= WRONSKIAN_TOL);
}

#[test]
fn invalid_windows_are_rejected() {
    let p = unit();
    let r = ComplexRect::new(0.1, 1.0, -0.2, 0.1).unwrap();
    assert!(matches!(
        QnmWindow::new(r, 2, Method::Shooting),
        Err(SpectrumError::InvalidWindow(_))
    ));
    let straddle = QnmWindow::new(ComplexRect::new(-0.5, 0.5, -0.2, -0.01).unwrap(), 2, Method::Shooting).unwrap();
    assert!(matches!(
        qnm_shooting(&p, &straddle, &ShootingConfig::default()),
        Err(SpectrumError::InvalidWindow(_))
    ));
    let deep = QnmWindow::new(ComplexRect::new(0.1, 1.0, -5.0, -0.01).unwrap(), 2, Method::Shooting).unwrap();
    assert!(matches!(
        qnm_shooting(&p, &deep, &ShootingConfig::default()),
        Err(SpectrumError::DampingCapExceeded { .. })
    ));
    let lattice = QnmWindow::new(ComplexRect::new(0.1, 1.0, -0.2, -0.01).unwrap(), 2, Method::Lattice).unwrap();
    assert!(qnm_shooting(&p, &lattice, &ShootingConfig::default()).is_err());
}

#[test]
fn lattice_window_selects_column() {
    let p = unit();
    let cs = lattice_scale(&p);
    let w = QnmWindow::new(
        ComplexRect::new(-3.0 * cs, 3.0 * cs, -1.3 * cs, -0.01).unwrap(),
        2,
        Method::Lattice,
    )
    .unwrap();
    let pts = qnm_lattice(&p, &w);
    // k = 0..=2 at ±5c/2, the deepest sitting at -5c/4
    assert_eq!(pts.len(), 6);
    assert!(pts.iter().all(|q| q.l == 2 && q.k <= 2));
    assert!(pts.windows(2).all(|w| w[0].mu.re <= w[1].mu.re));
}

#[test]
fn lattice_ordering_and_count() {
    let pts = pseudo_poles(&unit(), 5, 2);
    assert_eq!(pts.len(), 36);
    let keys: Vec<(u32, u32, bool)> = pts.iter().map(|q| (q.l, q.k, q.re_sign == Sign::Minus)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn wronskian_schwarz_reflection(re in 0.2f64..1.2, im in -0.15f64..0.05, l in 0u32..5) {
        let p = unit();
        let sh = Shooter::new(&p, l, &ShootingConfig::default());
        let z = c(re, im);
        let w = sh.wronskian(z).unwrap();
        let wm = sh.wronskian(-z.conj()).unwrap();
        prop_assert!((wm - w.conj()).norm() <= 1e-8 * w.norm().max(1e-300), "{} vs {}", wm, w);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lattice_scales_with_mass(
        lambda in 1e-3f64..0.5,
        frac in 0.05f64..0.95,
        s in 0.2f64..5.0,
        l in 0u32..20,
        k in 0u32..6,
    ) {
        let p = BlackHoleParams::new(frac / (3.0 * lambda.sqrt()), lambda).unwrap();
        let q = BlackHoleParams::new(s * p.mass(), lambda / (s * s)).unwrap();
        let a = pseudo_pole(&p, l, k, Sign::Plus).mu;
        let b = pseudo_pole(&q, l, k, Sign::Plus).mu;
        prop_assert!((b * s - a).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn lattice_sign_mirror_and_spacing(
        lambda in 1e-3f64..0.5,
        frac in 0.05f64..0.95,
        l in 0u32..20,
        k in 0u32..6,
    ) {
        let p = BlackHoleParams::new(frac / (3.0 * lambda.sqrt()), lambda).unwrap();
        let cs = lattice_scale(&p);
        let a = pseudo_pole(&p, l, k, Sign::Plus);
        let b = pseudo_pole(&p, l, k, Sign::Minus);
        prop_assert!((a.mu + b.mu.conj()).norm() <= 1e-15 * a.mu.norm());
        let next_l = pseudo_pole(&p, l + 1, k, Sign::Plus).mu - a.mu;
        let next_k = pseudo_pole(&p, l, k + 1, Sign::Plus).mu - a.mu;
        prop_assert!((next_l - c(cs, 0.0)).norm() <= 1e-12 * cs * f64::from(l + 2));
        prop_assert!((next_k - c(0.0, -0.5 * cs)).norm() <= 1e-12 * cs * f64::from(l + 2));
        prop_assert!(a.mu.im < 0.0);
    }

    #[test]
    fn lattice_scale_derivative_matches_difference(lambda in 1e-3f64..0.5, frac in 0.05f64..0.9) {
        let m = frac / (3.0 * lambda.sqrt());
        let h = 1e-6 * m;
        let f = |m: f64| lattice_scale(&BlackHoleParams::new(m, lambda).unwrap());
        let fd = (f(m + h) - f(m - h)) / (2.0 * h);
        let d = lattice_scale_derivative(&BlackHoleParams::new(m, lambda).unwrap());
        prop_assert!((fd - d).abs() <= 1e-6 * d.abs());
    }
}
