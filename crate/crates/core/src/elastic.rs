//! Isotropic elastic medium, plane waves and far-field containers.
//!
//! Far fields are sampled on the uniform grid `theta_j = 2 pi j / M`,
//! `j = 0..M`, shared by observation and incidence directions. Integrals
//! over the unit circle use the trapezoid weight `2 pi / M`.

use crate::error::{Error, Result};
use nalgebra::Vector2;
use num_complex::Complex64;
use std::f64::consts::TAU;

pub type Point = Vector2<f64>;
pub type CVec2 = Vector2<Complex64>;

/// Default number of observation/incidence directions.
pub const DEFAULT_DIRECTIONS: usize = 52;

/// Lamé parameters and circular frequency. Density is fixed to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub lambda: f64,
    pub mu: f64,
    pub omega: f64,
}

impl Material {
    pub fn new(lambda: f64, mu: f64, omega: f64) -> Result<Self> {
        let m = Self { lambda, mu, omega };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(Error::Config(format!(
                "mu must be positive, got {}",
                self.mu
            )));
        }
        if !(2.0 * self.mu + self.lambda > 0.0) {
            return Err(Error::Config(format!(
                "2 mu + lambda must be positive, got {}",
                2.0 * self.mu + self.lambda
            )));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::Config(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        Ok(())
    }

    pub fn wavenumbers(&self) -> Wavenumbers {
        Wavenumbers {
            kp: self.omega / (2.0 * self.mu + self.lambda).sqrt(),
            ks: self.omega / self.mu.sqrt(),
        }
    }
}

impl Default for Material {
    /// `lambda = 2`, `mu = 1`, `omega = pi`.
    fn default() -> Self {
        Self {
            lambda: 2.0,
            mu: 1.0,
            omega: std::f64::consts::PI,
        }
    }
}

/// Validated wavenumbers of a material.
pub fn wavenumbers(material: &Material) -> Result<Wavenumbers> {
    material.validate()?;
    Ok(material.wavenumbers())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumbers {
    /// Compressional.
    pub kp: f64,
    /// Shear.
    pub ks: f64,
}

impl Wavenumbers {
    pub fn get(&self, wave: WaveType) -> f64 {
        match wave {
            WaveType::P => self.kp,
            WaveType::S => self.ks,
        }
    }
}

/// Compressional or shear part of a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveType {
    P,
    S,
}

/// A direction on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub theta: f64,
}

impl Direction {
    pub fn new(theta: f64) -> Self {
        Self {
            theta: theta.rem_euclid(TAU),
        }
    }

    pub fn from_vector(v: Point) -> Self {
        Self::new(v.y.atan2(v.x))
    }

    pub fn unit(&self) -> Point {
        let (s, c) = self.theta.sin_cos();
        Point::new(c, s)
    }

    /// The unit vector rotated by `pi/2` anticlockwise.
    pub fn perp(&self) -> Point {
        let (s, c) = self.theta.sin_cos();
        Point::new(-s, c)
    }
}

/// Plane wave `ap d e^{i kp x.d} + as d_perp e^{i ks x.d}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub dir: Direction,
    pub ap: Complex64,
    pub a_s: Complex64,
}

impl Default for PlaneWave {
    /// `d = (1/2, sqrt(3)/2)` with unit amplitudes for both parts.
    fn default() -> Self {
        Self {
            dir: Direction::new(std::f64::consts::FRAC_PI_3),
            ap: Complex64::new(1.0, 0.0),
            a_s: Complex64::new(1.0, 0.0),
        }
    }
}

impl PlaneWave {
    pub fn new(dir: Direction, ap: Complex64, a_s: Complex64) -> Result<Self> {
        if ap == Complex64::new(0.0, 0.0) && a_s == Complex64::new(0.0, 0.0) {
            return Err(Error::Config("plane wave needs a nonzero amplitude".into()));
        }
        Ok(Self { dir, ap, a_s })
    }

    pub fn pressure(dir: Direction) -> Self {
        Self {
            dir,
            ap: Complex64::new(1.0, 0.0),
            a_s: Complex64::new(0.0, 0.0),
        }
    }

    pub fn shear(dir: Direction) -> Self {
        Self {
            dir,
            ap: Complex64::new(0.0, 0.0),
            a_s: Complex64::new(1.0, 0.0),
        }
    }

    pub fn displacement(&self, material: &Material, x: &Point) -> CVec2 {
        plane_wave_displacement(self, material, x)
    }

    /// Displacement gradient `G[i][k] = d u_i / d x_k`.
    pub fn gradient(&self, material: &Material, x: &Point) -> [[Complex64; 2]; 2] {
        let k = material.wavenumbers();
        let d = self.dir.unit();
        let dp = self.dir.perp();
        let xd = x.dot(&d);
        let ep = self.ap * Complex64::new(0.0, k.kp) * Complex64::from_polar(1.0, k.kp * xd);
        let es = self.a_s * Complex64::new(0.0, k.ks) * Complex64::from_polar(1.0, k.ks * xd);
        let mut g = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for kk in 0..2 {
                g[i][kk] = ep * d[i] * d[kk] + es * dp[i] * d[kk];
            }
        }
        g
    }
}

pub fn plane_wave_displacement(pw: &PlaneWave, material: &Material, x: &Point) -> CVec2 {
    let k = material.wavenumbers();
    let d = pw.dir.unit();
    let dp = pw.dir.perp();
    let xd = x.dot(&d);
    let ep = pw.ap * Complex64::from_polar(1.0, k.kp * xd);
    let es = pw.a_s * Complex64::from_polar(1.0, k.ks * xd);
    CVec2::new(ep * d.x + es * dp.x, ep * d.y + es * dp.y)
}

/// Traction `sigma(u) nu` from a displacement gradient `G[i][k] = d u_i/d x_k`.
///
/// Equal to `2 mu d_nu u + lambda nu div u - mu nu_perp div_perp u`.
pub fn traction_from_gradient(
    material: &Material,
    grad: &[[Complex64; 2]; 2],
    normal: &Point,
) -> CVec2 {
    let div = grad[0][0] + grad[1][1];
    let mut t = CVec2::zeros();
    for i in 0..2 {
        let mut acc = material.lambda * div * normal[i];
        for k in 0..2 {
            acc += material.mu * (grad[i][k] + grad[k][i]) * normal[k];
        }
        t[i] = acc;
    }
    t
}

/// `theta_j = 2 pi j / m`, `j = 0..m`.
pub fn uniform_angles(m: usize) -> Vec<f64> {
    (0..m).map(|j| TAU * j as f64 / m as f64).collect()
}

/// Trapezoid weight on the uniform grid of `m` directions.
pub fn quadrature_weight(m: usize) -> f64 {
    TAU / m as f64
}

/// Compressional and shear far-field parts sampled on the uniform grid.
///
/// Also used for densities `g = (g_p, g_s)` on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticFarField {
    pub up: Vec<Complex64>,
    pub us: Vec<Complex64>,
}

pub type Density = ElasticFarField;

impl ElasticFarField {
    pub fn new(up: Vec<Complex64>, us: Vec<Complex64>) -> Result<Self> {
        if up.len() != us.len() {
            return Err(Error::Shape {
                expected: up.len(),
                got: us.len(),
            });
        }
        if up.is_empty() {
            return Err(Error::Config(
                "far field needs at least one direction".into(),
            ));
        }
        Ok(Self { up, us })
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            up: vec![Complex64::new(0.0, 0.0); m],
            us: vec![Complex64::new(0.0, 0.0); m],
        }
    }

    pub fn len(&self) -> usize {
        self.up.len()
    }

    pub fn is_empty(&self) -> bool {
        self.up.is_empty()
    }

    pub fn directions(&self) -> Vec<f64> {
        uniform_angles(self.len())
    }

    pub fn part(&self, wave: WaveType) -> &[Complex64] {
        match wave {
            WaveType::P => &self.up,
            WaveType::S => &self.us,
        }
    }

    /// Stacked `(u_p; u_s)`, length `2M`.
    pub fn stacked(&self) -> Vec<Complex64> {
        self.up.iter().chain(self.us.iter()).copied().collect()
    }

    pub fn from_stacked(v: &[Complex64]) -> Result<Self> {
        if !v.len().is_multiple_of(2) {
            return Err(Error::Shape {
                expected: v.len() + 1,
                got: v.len(),
            });
        }
        let m = v.len() / 2;
        Self::new(v[..m].to_vec(), v[m..].to_vec())
    }

    pub fn acoustic(&self, wave: WaveType, material: &Material) -> AcousticFarField {
        AcousticFarField {
            values: self.part(wave).to_vec(),
            k: material.wavenumbers().get(wave),
        }
    }
}

/// Scalar far field of a Helmholtz radiating solution, tagged with its wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct AcousticFarField {
    pub values: Vec<Complex64>,
    pub k: f64,
}

impl AcousticFarField {
    pub fn directions(&self) -> Vec<f64> {
        uniform_angles(self.values.len())
    }
}

/// Far field of the scalar potential from one elastic far-field part:
/// multiplies by `1/(i k_t)`.
pub fn ipp_rhs_scale(values: &[Complex64], kt: f64) -> Vec<Complex64> {
    let s = Complex64::new(0.0, -1.0 / kt);
    values.iter().map(|v| v * s).collect()
}

/// `(omega/kp) sum g_p conj(h_p) w + (omega/ks) sum g_s conj(h_s) w`.
pub fn weighted_inner_product(g: &Density, h: &Density, material: &Material) -> Result<Complex64> {
    if g.len() != h.len() {
        return Err(Error::Shape {
            expected: g.len(),
            got: h.len(),
        });
    }
    let k = material.wavenumbers();
    let w = quadrature_weight(g.len());
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
    };
    Ok(dot(&g.up, &h.up) * (material.omega / k.kp * w)
        + dot(&g.us, &h.us) * (material.omega / k.ks * w))
}

pub fn weighted_norm(g: &Density, material: &Material) -> f64 {
    weighted_inner_product(g, g, material)
        .map(|v| v.re.max(0.0).sqrt())
        .unwrap_or(0.0)
}

/// Elastic Herglotz wave function with density `g`, by trapezoid quadrature.
pub fn herglotz_eval(g: &Density, material: &Material, x: &Point) -> CVec2 {
    let k = material.wavenumbers();
    let w = quadrature_weight(g.len());
    let cp = (k.kp / material.omega).sqrt();
    let cs = (k.ks / material.omega).sqrt();
    let mut v = CVec2::zeros();
    for (j, theta) in uniform_angles(g.len()).into_iter().enumerate() {
        let dir = Direction::new(theta);
        let d = dir.unit();
        let dp = dir.perp();
        let xd = x.dot(&d);
        let p = g.up[j] * cp * Complex64::from_polar(1.0, k.kp * xd);
        let s = g.us[j] * cs * Complex64::from_polar(1.0, k.ks * xd);
        v.x += (p * d.x + s * dp.x) * w;
        v.y += (p * d.y + s * dp.y) * w;
    }
    v
}
