use elastic_esm::elastic::{
    herglotz_eval, plane_wave_displacement, weighted_inner_product, weighted_norm, CVec2, Density,
    Direction, Material, PlaneWave, Point,
};
use num_complex::Complex64;
use proptest::prelude::*;

/// `mu Lap u + (lambda + mu) grad div u + omega^2 u` by second-order central differences.
fn navier_residual(f: impl Fn(&Point) -> CVec2, m: &Material, x: &Point, h: f64) -> CVec2 {
    let e = [Point::new(h, 0.0), Point::new(0.0, h)];
    let u0 = f(x);
    let mut lap = CVec2::zeros();
    // hess[a][b] = d_a d_b u
    let mut hess = [[CVec2::zeros(); 2]; 2];
    for a in 0..2 {
        let up = f(&(x + e[a]));
        let um = f(&(x - e[a]));
        hess[a][a] = (up - u0 * Complex64::new(2.0, 0.0) + um) / Complex64::new(h * h, 0.0);
        lap += hess[a][a];
    }
    let mixed = (f(&(x + e[0] + e[1])) - f(&(x + e[0] - e[1])) - f(&(x - e[0] + e[1]))
        + f(&(x - e[0] - e[1])))
        / Complex64::new(4.0 * h * h, 0.0);
    hess[0][1] = mixed;
    hess[1][0] = mixed;
    // (grad div u)_i = sum_k d_i d_k u_k
    let grad_div = CVec2::new(hess[0][0][0] + hess[0][1][1], hess[1][0][0] + hess[1][1][1]);
    let c = |v: f64| Complex64::new(v, 0.0);
    lap * c(m.mu) + grad_div * c(m.lambda + m.mu) + u0 * c(m.omega * m.omega)
}

fn density(parts: &[(f64, f64, f64, f64)]) -> Density {
    Density::new(
        parts.iter().map(|p| Complex64::new(p.0, p.1)).collect(),
        parts.iter().map(|p| Complex64::new(p.2, p.3)).collect(),
    )
    .unwrap()
}

fn density_pair(m: usize) -> impl Strategy<Value = (Density, Density)> {
    let entry = (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0);
    (
        prop::collection::vec(entry.clone(), m),
        prop::collection::vec(entry, m),
    )
        .prop_map(|(a, b)| (density(&a), density(&b)))
}

#[test]
fn wavenumbers_ordered_for_admissible_materials() {
    for (l, mu, w) in [
        (2.0, 1.0, 3.0),
        (0.1, 5.0, 1.0),
        (-0.5, 1.0, 2.0),
        (100.0, 0.01, 7.0),
    ] {
        let k = Material::new(l, mu, w).unwrap().wavenumbers();
        assert!(k.kp < k.ks);
    }
}

#[test]
fn herglotz_solves_navier() {
    let m = Material::default();
    let g = Density::new(
        (0..52)
            .map(|j| Complex64::new((j as f64 * 0.3).cos(), 0.2 * j as f64 / 52.0))
            .collect(),
        (0..52)
            .map(|j| Complex64::new(0.5, (j as f64 * 0.7).sin()))
            .collect(),
    )
    .unwrap();
    let x = Point::new(0.4, -1.1);
    let u = herglotz_eval(&g, &m, &x);
    let res = navier_residual(|p| herglotz_eval(&g, &m, p), &m, &x, 1e-3);
    assert!(
        res.norm() <= 1e-4 * u.norm(),
        "{} vs {}",
        res.norm(),
        u.norm()
    );
}

#[test]
fn herglotz_single_direction_is_scaled_plane_wave() {
    // One nonzero sample: the quadrature sum is a single weighted plane wave.
    let m = Material::default();
    let n = 52;
    let mut g = Density::zeros(n);
    g.up[5] = Complex64::new(1.0, 0.0);
    let theta = 2.0 * std::f64::consts::PI * 5.0 / n as f64;
    let x = Point::new(0.3, 0.8);
    let k = m.wavenumbers();
    let expect = plane_wave_displacement(&PlaneWave::pressure(Direction::new(theta)), &m, &x)
        * Complex64::new(
            (k.kp / m.omega).sqrt() * 2.0 * std::f64::consts::PI / n as f64,
            0.0,
        );
    assert!((herglotz_eval(&g, &m, &x) - expect).norm() < 1e-14);
}

proptest! {
    #[test]
    fn plane_wave_solves_navier(
        theta in 0.0f64..6.3,
        x in -3.0f64..3.0,
        y in -3.0f64..3.0,
        ap in (-1.0f64..1.0, -1.0f64..1.0),
        a_s in (-1.0f64..1.0, -1.0f64..1.0),
    ) {
        let m = Material::default();
        let ap = Complex64::new(ap.0, ap.1);
        let a_s = Complex64::new(a_s.0, a_s.1);
        prop_assume!(ap.norm() + a_s.norm() > 0.1);
        let pw = PlaneWave::new(Direction::new(theta), ap, a_s).unwrap();
        let p = Point::new(x, y);
        let u = plane_wave_displacement(&pw, &m, &p);
        let res = navier_residual(|q| plane_wave_displacement(&pw, &m, q), &m, &p, 1e-3);
        prop_assert!(res.norm() <= 1e-4 * u.norm(), "{} vs {}", res.norm(), u.norm());
    }

    #[test]
    fn inner_product_hermitian((g, h) in density_pair(12)) {
        let m = Material::default();
        let gh = weighted_inner_product(&g, &h, &m).unwrap();
        let hg = weighted_inner_product(&h, &g, &m).unwrap();
        prop_assert!((gh - hg.conj()).norm() <= 1e-12 * (1.0 + gh.norm()));
    }

    #[test]
    fn inner_product_positive((g, _h) in density_pair(12)) {
        let m = Material::default();
        let gg = weighted_inner_product(&g, &g, &m).unwrap();
        prop_assert!(gg.im.abs() <= 1e-12 * gg.re.abs());
        prop_assert!(gg.re >= 0.0);
        let nonzero = g.up.iter().chain(&g.us).any(|v| v.norm() > 0.0);
        prop_assert_eq!(gg.re > 0.0, nonzero);
    }

    #[test]
    fn cauchy_schwarz((g, h) in density_pair(12)) {
        let m = Material::default();
        let gh = weighted_inner_product(&g, &h, &m).unwrap();
        prop_assert!(gh.norm() <= weighted_norm(&g, &m) * weighted_norm(&h, &m) * (1.0 + 1e-12));
    }
}
