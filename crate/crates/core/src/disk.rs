//! Closed-form far fields of the probe disks.
//!
//! The sound-soft acoustic disk is the kernel for single-part data, the
//! rigid elastic disk is the kernel for full far-field data. Both are
//! evaluated for an origin-centred disk; a disk at `z` only changes the
//! result by unimodular phase factors (see [`translate_acoustic`] and
//! [`translate_elastic`]).

use crate::elastic::{
    uniform_angles, CVec2, Direction, ElasticFarField, Material, PlaneWave, Point, WaveType,
};
use crate::error::{Error, Result};
use crate::specfun::{hankel1_deriv_from_table, hankel1_table, DEFAULT_MAX_ORDER};
use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, FRAC_PI_4, TAU};

/// Relative size below which a series term counts as negligible.
pub const SERIES_TOL: f64 = 1e-14;

/// Consecutive negligible orders required before the series is cut.
const TAIL_RUN: usize = 3;

/// Smallest admissible `|C_n|` in the rigid-disk mode solve.
pub const RESONANCE_GUARD: f64 = 1e-13;

/// Points of the trapezoid rule used for the Fourier coefficients of incident traces.
pub const TRACE_QUADRATURE: usize = 256;

/// A disk `B(center, radius)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskSpec {
    pub center: Point,
    pub radius: f64,
}

impl DiskSpec {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Config(format!(
                "disk radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, p: &Point) -> bool {
        (p - self.center).norm() < self.radius
    }
}

fn far_field_constant(k: f64) -> Complex64 {
    Complex64::from_polar((FRAC_2_PI / k).sqrt(), -FRAC_PI_4)
}

/// `i^{-n}` for `n >= 0`.
fn i_pow_neg(n: usize) -> Complex64 {
    match n % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// Series coefficients `J_n(kR)/H_n(kR)` of the origin-centred sound-soft disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftDiskSeries {
    pub k: f64,
    pub radius: f64,
    /// `J_n(kR)/H_n^(1)(kR)` for `n = 0..=N`.
    pub ratios: Vec<Complex64>,
}

impl SoftDiskSeries {
    pub fn new(k: f64, radius: f64) -> Result<Self> {
        Self::with_max_order(k, radius, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(k: f64, radius: f64, max_order: usize) -> Result<Self> {
        if !(k > 0.0) || !(radius > 0.0) {
            return Err(Error::Config(format!(
                "soft disk needs k > 0 and R > 0, got k={k}, R={radius}"
            )));
        }
        let x = k * radius;
        let h = hankel1_table(max_order, x);
        let mut ratios = Vec::new();
        let mut largest: f64 = 0.0;
        let mut quiet = 0;
        for (n, hn) in h.iter().enumerate() {
            let r = if hn.is_finite() {
                Complex64::new(h[n].re, 0.0) / hn
            } else {
                Complex64::new(0.0, 0.0)
            };
            let mag = r.norm();
            largest = largest.max(mag);
            ratios.push(r);
            if mag < SERIES_TOL * largest {
                quiet += 1;
                if quiet >= TAIL_RUN {
                    return Ok(Self { k, radius, ratios });
                }
            } else {
                quiet = 0;
            }
        }
        Err(Error::Truncation { max_order })
    }

    pub fn order(&self) -> usize {
        self.ratios.len() - 1
    }

    /// Far field for observation angle minus incidence angle.
    pub fn eval(&self, delta: f64) -> Complex64 {
        let mut sum = self.ratios[0];
        for (n, r) in self.ratios.iter().enumerate().skip(1) {
            sum += 2.0 * r * (n as f64 * delta).cos();
        }
        -far_field_constant(self.k) * sum
    }
}

/// Far field of the sound-soft disk of radius `radius` at the origin.
pub fn soft_disk_farfield(
    k: f64,
    radius: f64,
    theta_obs: f64,
    theta_inc: f64,
) -> Result<Complex64> {
    Ok(SoftDiskSeries::new(k, radius)?.eval(theta_obs - theta_inc))
}

/// Moves an acoustic disk far field from the origin to `z`.
pub fn translate_acoustic(
    value: Complex64,
    k: f64,
    z: &Point,
    theta_obs: f64,
    theta_inc: f64,
) -> Complex64 {
    let d = Direction::new(theta_inc).unit();
    let x = Direction::new(theta_obs).unit();
    value * Complex64::from_polar(1.0, k * z.dot(&(d - x)))
}

/// Coefficients of `phi = sum a_n H_|n|(kp r) e^{in theta}` and
/// `psi = sum b_n H_|n|(ks r) e^{in theta}` for the rigid disk at the origin.
///
/// The scattered displacement is `grad phi + grad_perp psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidDiskCoeffs {
    pub radius: f64,
    pub kp: f64,
    pub ks: f64,
    /// `a[n + N]` holds `a_n`, `n = -N..=N`.
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub order: usize,
}

impl RigidDiskCoeffs {
    pub fn a(&self, n: i64) -> Complex64 {
        self.a[(n + self.order as i64) as usize]
    }

    pub fn b(&self, n: i64) -> Complex64 {
        self.b[(n + self.order as i64) as usize]
    }

    /// `(u_p^inf(theta), u_s^inf(theta))`.
    pub fn farfield(&self, theta: f64) -> (Complex64, Complex64) {
        let mut sp = Complex64::new(0.0, 0.0);
        let mut ss = Complex64::new(0.0, 0.0);
        let n_max = self.order as i64;
        for n in -n_max..=n_max {
            let phase =
                i_pow_neg(n.unsigned_abs() as usize) * Complex64::from_polar(1.0, n as f64 * theta);
            sp += self.a(n) * phase;
            ss += self.b(n) * phase;
        }
        let up = Complex64::new(0.0, self.kp) * far_field_constant(self.kp) * sp;
        let us = Complex64::new(0.0, self.ks) * far_field_constant(self.ks) * ss;
        (up, us)
    }

    /// Scattered displacement at `x` (|x| >= R) from the potential series.
    pub fn displacement(&self, x: &Point) -> CVec2 {
        let r = x.norm();
        let theta = x.y.atan2(x.x);
        let n_max = self.order;
        let hp = hankel1_table(n_max + 1, self.kp * r);
        let hs = hankel1_table(n_max + 1, self.ks * r);
        let i = Complex64::new(0.0, 1.0);
        let (mut phi_r, mut phi_t, mut psi_r, mut psi_t) = (
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        for n in -(n_max as i64)..=(n_max as i64) {
            let m = n.unsigned_abs() as usize;
            let e = Complex64::from_polar(1.0, n as f64 * theta);
            let dp = hankel1_deriv_from_table(&hp, m, self.kp * r);
            let ds = hankel1_deriv_from_table(&hs, m, self.ks * r);
            phi_r += self.a(n) * self.kp * dp * e;
            phi_t += self.a(n) * hp[m] * i * n as f64 / r * e;
            psi_r += self.b(n) * self.ks * ds * e;
            psi_t += self.b(n) * hs[m] * i * n as f64 / r * e;
        }
        let radial = phi_r - psi_t;
        let angular = phi_t + psi_r;
        let (s, c) = theta.sin_cos();
        CVec2::new(radial * c - angular * s, radial * s + angular * c)
    }
}

/// Fourier coefficients `(1/2pi) int f(theta) e^{-in theta} d theta`, `n = -N..=N`,
/// by the trapezoid rule on the samples `f(2 pi q / Q)`.
fn fourier_coefficients(samples: &[Complex64], order: usize) -> Vec<Complex64> {
    let q = samples.len() as f64;
    (-(order as i64)..=(order as i64))
        .map(|n| {
            samples
                .iter()
                .enumerate()
                .map(|(j, f)| f * Complex64::from_polar(1.0, -(n as f64) * TAU * j as f64 / q))
                .sum::<Complex64>()
                / q
        })
        .collect()
}

/// Normal and tangential traces `nu . u_inc`, `tau . u_inc` on the circle `r = R`.
pub fn incident_traces(
    material: &Material,
    radius: f64,
    pw: &PlaneWave,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut normal = Vec::with_capacity(TRACE_QUADRATURE);
    let mut tangent = Vec::with_capacity(TRACE_QUADRATURE);
    for q in 0..TRACE_QUADRATURE {
        let dir = Direction::new(TAU * q as f64 / TRACE_QUADRATURE as f64);
        let nu = dir.unit();
        let tau = dir.perp();
        let u = pw.displacement(material, &(nu * radius));
        normal.push(u.x * nu.x + u.y * nu.y);
        tangent.push(u.x * tau.x + u.y * tau.y);
    }
    (normal, tangent)
}

/// Fourier coefficients `(f_n, g_n)`, `n = -N..=N`, of the normal and tangential traces.
pub fn trace_coefficients(
    material: &Material,
    radius: f64,
    pw: &PlaneWave,
    order: usize,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let (nu_trace, tau_trace) = incident_traces(material, radius, pw);
    (
        fourier_coefficients(&nu_trace, order),
        fourier_coefficients(&tau_trace, order),
    )
}

/// Solves the per-mode 2x2 systems of the rigid disk.
pub fn rigid_disk_coeffs(
    material: &Material,
    radius: f64,
    pw: &PlaneWave,
) -> Result<RigidDiskCoeffs> {
    rigid_disk_coeffs_with_max_order(material, radius, pw, DEFAULT_MAX_ORDER)
}

pub fn rigid_disk_coeffs_with_max_order(
    material: &Material,
    radius: f64,
    pw: &PlaneWave,
    max_order: usize,
) -> Result<RigidDiskCoeffs> {
    material.validate()?;
    if !(radius > 0.0) {
        return Err(Error::Config(format!(
            "disk radius must be positive, got {radius}"
        )));
    }
    let k = material.wavenumbers();
    let (kp, ks) = (k.kp, k.ks);
    let (f, g) = trace_coefficients(material, radius, pw, max_order);
    let hp = hankel1_table(max_order, kp * radius);
    let hs = hankel1_table(max_order, ks * radius);

    let mut a_pos = Vec::new();
    let mut b_pos = Vec::new();
    let mut a_neg = Vec::new();
    let mut b_neg = Vec::new();
    let mut largest: f64 = 0.0;
    let mut quiet = 0;
    for m in 0..=max_order {
        let dp = hankel1_deriv_from_table(&hp, m, kp * radius);
        let ds = hankel1_deriv_from_table(&hs, m, ks * radius);
        let mut biggest_here: f64 = 0.0;
        for sign in [1i64, -1] {
            let n = sign * m as i64;
            let idx = (n + max_order as i64) as usize;
            let inr = Complex64::new(0.0, n as f64 / radius);
            // kp H'p a - (in/R) Hs b = -f_n
            // (in/R) Hp a + ks H's b = -g_n
            let c = (n * n) as f64 / (radius * radius) * hp[m] * hs[m] - kp * ks * dp * ds;
            if !(c.norm() > RESONANCE_GUARD) {
                return Err(Error::Resonance {
                    order: n,
                    modulus: c.norm(),
                });
            }
            let a = (f[idx] * ks * ds + inr * hs[m] * g[idx]) / c;
            let b = (g[idx] * kp * dp - inr * hp[m] * f[idx]) / c;
            biggest_here = biggest_here.max(a.norm()).max(b.norm());
            if sign == 1 {
                a_pos.push(a);
                b_pos.push(b);
            } else {
                a_neg.push(a);
                b_neg.push(b);
            }
            if m == 0 {
                break;
            }
        }
        largest = largest.max(biggest_here);
        if biggest_here < SERIES_TOL * largest {
            quiet += 1;
            if quiet >= TAIL_RUN {
                let order = m;
                let assemble = |pos: &[Complex64], neg: &[Complex64]| -> Vec<Complex64> {
                    let mut v: Vec<Complex64> = neg.iter().rev().copied().collect();
                    v.extend_from_slice(pos);
                    v
                };
                return Ok(RigidDiskCoeffs {
                    radius,
                    kp,
                    ks,
                    a: assemble(&a_pos, &a_neg),
                    b: assemble(&b_pos, &b_neg),
                    order,
                });
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::Truncation { max_order })
}

/// Far field of the origin-centred rigid disk for one incident plane wave.
pub fn rigid_disk_farfield(
    material: &Material,
    radius: f64,
    pw: &PlaneWave,
    theta_obs: f64,
) -> Result<(Complex64, Complex64)> {
    Ok(rigid_disk_coeffs(material, radius, pw)?.farfield(theta_obs))
}

/// Moves a rigid-disk far field `(u_p, u_s)` from the origin to `z`.
///
/// `incident` selects the single-type incident wave (pressure or shear)
/// the far field belongs to.
pub fn translate_elastic(
    ff: (Complex64, Complex64),
    material: &Material,
    z: &Point,
    theta_obs: f64,
    theta_inc: f64,
    incident: WaveType,
) -> (Complex64, Complex64) {
    let k = material.wavenumbers();
    let d = Direction::new(theta_inc).unit();
    let x = Direction::new(theta_obs).unit();
    let kin = k.get(incident);
    let zd = z.dot(&d);
    let zx = z.dot(&x);
    (
        ff.0 * Complex64::from_polar(1.0, kin * zd - k.kp * zx),
        ff.1 * Complex64::from_polar(1.0, kin * zd - k.ks * zx),
    )
}

/// Far field of the rigid disk `B(center, radius)` for a mixed incident
/// wave, on `m` uniform observation directions.
pub fn rigid_disk_dataset(
    material: &Material,
    center: &Point,
    radius: f64,
    pw: &PlaneWave,
    m: usize,
) -> Result<ElasticFarField> {
    let parts = [
        (WaveType::P, pw.ap, PlaneWave::pressure(pw.dir)),
        (WaveType::S, pw.a_s, PlaneWave::shear(pw.dir)),
    ];
    let mut up = vec![Complex64::new(0.0, 0.0); m];
    let mut us = up.clone();
    for (wave, amp, single) in parts {
        if amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let coeffs = rigid_disk_coeffs(material, radius, &single)?;
        for (l, theta) in uniform_angles(m).into_iter().enumerate() {
            let (p, s) = translate_elastic(
                coeffs.farfield(theta),
                material,
                center,
                theta,
                pw.dir.theta,
                wave,
            );
            up[l] += amp * p;
            us[l] += amp * s;
        }
    }
    ElasticFarField::new(up, us)
}
