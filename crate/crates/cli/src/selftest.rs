//! Release gate: a fixed set of numerical checks with pass/fail verdicts.

use elastic_esm::disk::{rigid_disk_dataset, trace_coefficients};
use elastic_esm::elastic::{
    weighted_inner_product, Density, Direction, Material, PlaneWave, Point,
};
use elastic_esm::esm::{
    data_vector, dps_weights, indicator_field, weighted_adjoint, EsmParams, Mode, NormKind,
    ProbeOperator, SamplingGrid, DEFAULT_ALPHA,
};
use elastic_esm::mfs::{mfs_farfield, mfs_solve, BoundaryCondition, MfsConfig, ShapeSpec};
use elastic_esm::specfun::{bessel_j, j_table, y_table};
use nalgebra::DVector;
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn check(name: &'static str, value: f64, tolerance: f64) -> Check {
    Check {
        name,
        value,
        tolerance,
        pass: value <= tolerance,
    }
}

/// Deterministic pseudo-random complex entries; no RNG state needed.
fn probe_vector(n: usize, salt: f64) -> Vec<Complex64> {
    (0..n)
        .map(|j| {
            let t = j as f64 + salt;
            Complex64::new((1.7 * t).sin(), (0.9 * t + 0.3).cos())
        })
        .collect()
}

fn wronskian() -> f64 {
    let mut worst: f64 = 0.0;
    for x in [0.25, 1.0, PI / 2.0 * 2.4, PI * 2.4, 50.0] {
        let j = j_table(61, x);
        let y = y_table(61, x);
        for n in 0..=60 {
            let w = j[n] * y[n + 1] - j[n + 1] * y[n];
            let scale = 1.0f64.max(y[n + 1].abs() * j[n].abs());
            worst = worst.max((w + 2.0 / (PI * x)).abs() / scale);
        }
    }
    worst
}

fn jacobi_anger() -> f64 {
    let m = Material::default();
    let (r, theta_d, order) = (1.3, 0.7, 30i64);
    let (f, g) = trace_coefficients(
        &m,
        r,
        &PlaneWave::pressure(Direction::new(theta_d)),
        order as usize,
    );
    let z = m.wavenumbers().kp * r;
    let jn = |n: i64| bessel_j(n as i32, z).unwrap();
    let ipow = |n: i64| Complex64::new(0.0, 1.0).powi(n as i32);
    let mut worst: f64 = 0.0;
    for n in -order..=order {
        let idx = (n + order) as usize;
        let phase = Complex64::from_polar(1.0, -(n as f64) * theta_d);
        let normal = ipow(n - 1) * 0.5 * (jn(n - 1) - jn(n + 1)) * phase;
        let tangent = ipow(n) * (n as f64) * jn(n) / z * phase;
        worst = worst
            .max((f[idx] - normal).norm())
            .max((g[idx] - tangent).norm());
    }
    worst
}

fn disk_equivalence() -> f64 {
    let m = Material::default();
    let center = Point::new(-2.0, 3.0);
    let pw = PlaneWave::default();
    let sol = mfs_solve(
        &ShapeSpec::disk(1.0, center),
        BoundaryCondition::Dirichlet,
        &pw,
        &m,
        &MfsConfig::default(),
    );
    let Ok(sol) = sol else { return f64::INFINITY };
    let a = mfs_farfield(&sol, &m, 52);
    let Ok(b) = rigid_disk_dataset(&m, &center, 1.0, &pw, 52) else {
        return f64::INFINITY;
    };
    a.up.iter()
        .zip(&b.up)
        .chain(a.us.iter().zip(&b.us))
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn adjoint(corrupt_dps: bool) -> f64 {
    let m = Material::default();
    let Ok(op) = ProbeOperator::for_params(&EsmParams::new(Mode::Ipf, 0.6), &m) else {
        return f64::INFINITY;
    };
    let b = op.direct_matrix(&Point::new(-1.3, 2.2));
    let mut w = dps_weights(&m, op.directions());
    if corrupt_dps {
        let top = op.directions();
        w[..top].iter_mut().for_each(|v| *v *= 1.5);
    }
    let adj = weighted_adjoint(&b, &w);
    let n = b.nrows();
    let g = DVector::from_vec(probe_vector(n, 0.0));
    let h = DVector::from_vec(probe_vector(n, 0.5));
    let dens = |v: &DVector<Complex64>| Density::from_stacked(v.as_slice());
    let (Ok(bg), Ok(hd), Ok(gd), Ok(ah)) =
        (dens(&(&b * &g)), dens(&h), dens(&g), dens(&(&adj * &h)))
    else {
        return f64::INFINITY;
    };
    let (Ok(lhs), Ok(rhs)) = (
        weighted_inner_product(&bg, &hd, &m),
        weighted_inner_product(&gd, &ah, &m),
    ) else {
        return f64::INFINITY;
    };
    (lhs - rhs).norm() / lhs.norm().max(1.0)
}

fn fast_path() -> f64 {
    let m = Material::default();
    let mut worst: f64 = 0.0;
    for mode in [Mode::IppP, Mode::Ipf] {
        let Ok(op) = ProbeOperator::for_params(&EsmParams::new(mode, 0.6), &m) else {
            return f64::INFINITY;
        };
        let f = probe_vector(op.base().nrows(), 0.25);
        for k in 0..10 {
            let t = k as f64;
            let z = Point::new(4.5 * (1.3 * t).sin(), 4.5 * (0.7 * t + 1.0).cos());
            match (
                op.solve_at_point(&z, &f, DEFAULT_ALPHA),
                op.solve_direct(&z, &f, DEFAULT_ALPHA),
            ) {
                (Ok(a), Ok(d)) => worst = worst.max((&a - &d).norm() / d.norm()),
                _ => return f64::INFINITY,
            }
        }
    }
    worst
}

/// Distance of `z*` from the centre with a probe equal to the disk, and
/// whether the separation property holds with probe radius 1.2.
fn disk_reconstruction() -> (f64, bool) {
    let m = Material::default();
    let center = Point::new(-2.0, 3.0);
    let Ok(data) = rigid_disk_dataset(&m, &center, 1.0, &PlaneWave::default(), 52) else {
        return (f64::INFINITY, false);
    };
    let grid = SamplingGrid::default();
    let rhs = data_vector(&data, Mode::Ipf, &m);
    let field = |r: f64| {
        let op = ProbeOperator::for_params(&EsmParams::new(Mode::Ipf, r), &m).ok()?;
        let f = indicator_field(&op, &grid, &rhs, DEFAULT_ALPHA, NormKind::L2).ok()?;
        let at_center = op.norm_of(
            &op.solve_at_point(&center, &rhs, DEFAULT_ALPHA).ok()?,
            NormKind::L2,
        );
        Some((f, at_center))
    };
    let dist = field(1.0).map_or(f64::INFINITY, |(f, _)| (f.z_star() - center).norm());
    let separated = field(1.2).is_some_and(|(f, c)| {
        (0..grid.len())
            .filter(|&i| (grid.point(i) - center).norm() > 2.2)
            .all(|i| c < f.raw_norms[i])
    });
    (dist, separated)
}

pub fn run(corrupt_dps: bool) -> Vec<Check> {
    let (dist, separated) = disk_reconstruction();
    vec![
        check("bessel wronskian", wronskian(), 1e-10),
        check("jacobi-anger traces", jacobi_anger(), 1e-12),
        check("mfs disk vs series", disk_equivalence(), 1e-6),
        check("weighted adjoint", adjoint(corrupt_dps), 1e-12),
        check("fast path vs dense", fast_path(), 1e-10),
        check("disk reconstruction |z*-c|", dist, 0.15),
        check("disk separation", if separated { 0.0 } else { 1.0 }, 0.0),
    ]
}

pub fn report(checks: &[Check]) -> String {
    let mut s = format!(
        "{:<28} {:>12} {:>12}  result\n",
        "check", "value", "tolerance"
    );
    for c in checks {
        s += &format!(
            "{:<28} {:>12.3e} {:>12.1e}  {}\n",
            c.name,
            c.value,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    s
}
