//! Forward solver for the direct elastic obstacle problem.
//!
//! The scattered field is a superposition of Kupradze point sources placed
//! on a retracted copy of the boundary. Source strengths are fitted to the
//! boundary condition at collocation points by truncated least squares.
//! Nothing here depends on the disk series used by the inversion.

use crate::elastic::{
    traction_from_gradient, uniform_angles, CVec2, Direction, ElasticFarField, Material, PlaneWave,
    Point,
};
use crate::error::{Error, Result};
use crate::specfun::hankel1_012;
use nalgebra::{DMatrix, DVector, Dyn, QR};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_4, PI, TAU};

/// Default translation of the benchmark obstacles.
pub const DEFAULT_OFFSET: Point = Point::new(-2.0, 3.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeKind {
    /// `(1 + 0.15 cos 3t)(cos t, sin t)`
    Pear,
    /// `1.5 sqrt(cos^2 t + 0.25 sin^2 t)(cos t, sin t)`
    Peanut,
    /// `(1.5 sin t, cos t + 0.65 cos 2t - 0.65)`
    Kite,
    Disk {
        radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub offset: Point,
}

/// Point on a boundary with unit tangent and outward normal `(tau_2, -tau_1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub point: Point,
    pub tangent: Point,
    pub normal: Point,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind, offset: Point) -> Result<Self> {
        if let ShapeKind::Disk { radius } = kind {
            if !(radius > 0.0) {
                return Err(Error::Config(format!(
                    "disk radius must be positive, got {radius}"
                )));
            }
        }
        Ok(Self { kind, offset })
    }

    pub fn pear() -> Self {
        Self {
            kind: ShapeKind::Pear,
            offset: DEFAULT_OFFSET,
        }
    }

    pub fn peanut() -> Self {
        Self {
            kind: ShapeKind::Peanut,
            offset: DEFAULT_OFFSET,
        }
    }

    pub fn kite() -> Self {
        Self {
            kind: ShapeKind::Kite,
            offset: DEFAULT_OFFSET,
        }
    }

    pub fn disk(radius: f64, center: Point) -> Self {
        Self {
            kind: ShapeKind::Disk { radius },
            offset: center,
        }
    }

    /// Parametrisation relative to the offset and its derivative.
    fn local(&self, t: f64) -> (Point, Point) {
        let (s, c) = t.sin_cos();
        match self.kind {
            ShapeKind::Pear => {
                let r = 1.0 + 0.15 * (3.0 * t).cos();
                let dr = -0.45 * (3.0 * t).sin();
                (
                    Point::new(r * c, r * s),
                    Point::new(dr * c - r * s, dr * s + r * c),
                )
            }
            ShapeKind::Peanut => {
                let q = (c * c + 0.25 * s * s).sqrt();
                let r = 1.5 * q;
                let dr = -1.125 * c * s / q;
                (
                    Point::new(r * c, r * s),
                    Point::new(dr * c - r * s, dr * s + r * c),
                )
            }
            ShapeKind::Kite => (
                Point::new(1.5 * s, c + 0.65 * (2.0 * t).cos() - 0.65),
                Point::new(1.5 * c, -s - 1.3 * (2.0 * t).sin()),
            ),
            ShapeKind::Disk { radius } => (
                Point::new(radius * c, radius * s),
                Point::new(-radius * s, radius * c),
            ),
        }
    }

    /// Parametrisation as `x + i y` at a complex parameter, relative to the offset.
    fn local_complex(&self, t: Complex64) -> Complex64 {
        let i = Complex64::i();
        match self.kind {
            ShapeKind::Pear => (1.0 + 0.15 * (3.0 * t).cos()) * (i * t).exp(),
            ShapeKind::Peanut => {
                let (c, s) = (t.cos(), t.sin());
                1.5 * (c * c + 0.25 * s * s).sqrt() * (i * t).exp()
            }
            ShapeKind::Kite => 1.5 * t.sin() + i * (t.cos() + 0.65 * (2.0 * t).cos() - 0.65),
            ShapeKind::Disk { radius } => radius * (i * t).exp(),
        }
    }

    /// +1 for anticlockwise parametrisations, -1 otherwise.
    fn orientation(&self) -> f64 {
        match self.kind {
            ShapeKind::Kite => -1.0,
            _ => 1.0,
        }
    }

    pub fn eval(&self, theta: f64) -> BoundaryPoint {
        shape_eval(self, theta)
    }

    /// Area centroid of the enclosed region.
    pub fn centroid(&self) -> Point {
        let n = 2048;
        let mut area = 0.0;
        let mut cx = 0.0;
        let mut cy = 0.0;
        let pts: Vec<Point> = uniform_angles(n)
            .into_iter()
            .map(|t| self.local(t).0)
            .collect();
        for i in 0..n {
            let p = pts[i];
            let q = pts[(i + 1) % n];
            let cross = p.x * q.y - q.x * p.y;
            area += cross;
            cx += (p.x + q.x) * cross;
            cy += (p.y + q.y) * cross;
        }
        Point::new(cx / (3.0 * area), cy / (3.0 * area)) + self.offset
    }
}

pub fn shape_eval(shape: &ShapeSpec, theta: f64) -> BoundaryPoint {
    let (p, dp) = shape.local(theta);
    let tangent = dp.normalize() * shape.orientation();
    BoundaryPoint {
        point: p + shape.offset,
        tangent,
        normal: Point::new(tangent.y, -tangent.x),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    /// Rigid body: `u = -u_inc`.
    Dirichlet,
    /// Cavity: `T u = -T u_inc`.
    Neumann,
    /// `T u + i sigma u = -(T u_inc + i sigma u_inc)`.
    Impedance { sigma: f64 },
}

impl BoundaryCondition {
    pub fn impedance(sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(Error::Config(format!(
                "impedance sigma must be >= 0, got {sigma}"
            )));
        }
        Ok(Self::Impedance { sigma })
    }
}

/// Where the point sources sit inside the obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourcePlacement {
    /// `centroid + factor * (x(t) - centroid)`, `0 < factor < 1`.
    Retraction(f64),
    /// `x(t + i delta)` with the sign of `delta` chosen to point inward.
    ///
    /// Follows the analytic continuation of the boundary, so sources stay
    /// clear of the singularities of the scattered field near concave parts.
    ComplexShift(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfsConfig {
    pub n_sources: usize,
    pub n_collocation: usize,
    pub placement: SourcePlacement,
}

impl Default for MfsConfig {
    fn default() -> Self {
        Self {
            n_sources: 320,
            n_collocation: 640,
            placement: SourcePlacement::ComplexShift(0.15),
        }
    }
}

impl MfsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_sources == 0 || self.n_collocation < 2 * self.n_sources {
            return Err(Error::Config(format!(
                "need n_collocation >= 2 n_sources > 0, got {} and {}",
                self.n_collocation, self.n_sources
            )));
        }
        match self.placement {
            SourcePlacement::Retraction(f) if !(f > 0.0 && f < 1.0) => {
                return Err(Error::Config(format!(
                    "retraction must lie in (0, 1), got {f}"
                )));
            }
            SourcePlacement::ComplexShift(d) if !(d > 0.0 && d.is_finite()) => {
                return Err(Error::Config(format!(
                    "complex shift must be positive, got {d}"
                )));
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfsSolution {
    pub sources: Vec<Point>,
    pub strengths: Vec<CVec2>,
    /// Relative boundary-condition residual on a grid twice as fine as the collocation grid.
    pub residual: f64,
    /// Diagonal ratio of the triangular factor of the regularised system.
    pub condition: f64,
}

/// Value and first derivatives of `H_0^(1)(k r)` with respect to `r`.
struct RadialHankel {
    f: Complex64,
    d1: Complex64,
    d2: Complex64,
    d3: Complex64,
}

impl RadialHankel {
    fn new(k: f64, r: f64) -> Self {
        let [h0, h1, _] = hankel1_012(k * r);
        Self {
            f: h0,
            d1: -k * h1,
            d2: -k * k * h0 + k * h1 / r,
            d3: k * k * k * h1 + k * k * h0 / r - 2.0 * k * h1 / (r * r),
        }
    }
}

/// Kupradze tensor `Gamma(x, y)` and its gradient `dGamma[i][j][k] = d_k Gamma_ij`.
type Tensor = [[Complex64; 2]; 2];

fn kupradze(material: &Material, x: &Point, y: &Point) -> Result<(Tensor, [Tensor; 2])> {
    let diff = x - y;
    let r = diff.norm();
    if !(r > 0.0) {
        return Err(Error::Coincident);
    }
    let rh = [diff.x / r, diff.y / r];
    let k = material.wavenumbers();
    let hs = RadialHankel::new(k.ks, r);
    let hp = RadialHankel::new(k.kp, r);
    let ch = Complex64::new(0.0, 0.25 / material.mu);
    let cg = Complex64::new(0.0, 0.25 / (material.omega * material.omega));
    // h = ch H0(ks r), g = cg (H0(ks r) - H0(kp r))
    let h0 = ch * hs.f;
    let h1 = ch * hs.d1;
    let g1 = cg * (hs.d1 - hp.d1);
    let g2 = cg * (hs.d2 - hp.d2);
    let g3 = cg * (hs.d3 - hp.d3);
    let a = g2 - g1 / r;
    let b = g1 / r;
    let c3 = g3 - 3.0 * g2 / r + 3.0 * g1 / (r * r);
    let a_r = a / r;
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };

    let mut gamma = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut dgamma = [[[Complex64::new(0.0, 0.0); 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            gamma[i][j] = (h0 + b) * delta(i, j) + a * rh[i] * rh[j];
            for kk in 0..2 {
                dgamma[i][j][kk] = h1 * rh[kk] * delta(i, j)
                    + c3 * rh[i] * rh[j] * rh[kk]
                    + a_r * (delta(i, j) * rh[kk] + delta(i, kk) * rh[j] + delta(j, kk) * rh[i]);
            }
        }
    }
    Ok((gamma, dgamma))
}

/// Displacement at `x` of a point force of strength `q` at `y`.
pub fn kupradze_displacement(
    y: &Point,
    q: &CVec2,
    material: &Material,
    x: &Point,
) -> Result<CVec2> {
    let (g, _) = kupradze(material, x, y)?;
    Ok(CVec2::new(
        g[0][0] * q.x + g[0][1] * q.y,
        g[1][0] * q.x + g[1][1] * q.y,
    ))
}

fn displacement_gradient(dg: &[[[Complex64; 2]; 2]; 2], q: &CVec2) -> [[Complex64; 2]; 2] {
    let mut grad = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for k in 0..2 {
            grad[i][k] = dg[i][0][k] * q.x + dg[i][1][k] * q.y;
        }
    }
    grad
}

/// Traction on a surface with unit normal `normal` at `x`, from a point force at `y`.
pub fn kupradze_traction(
    y: &Point,
    q: &CVec2,
    material: &Material,
    x: &Point,
    normal: &Point,
) -> Result<CVec2> {
    let (_, dg) = kupradze(material, x, y)?;
    Ok(traction_from_gradient(
        material,
        &displacement_gradient(&dg, q),
        normal,
    ))
}

/// 2x2 block mapping a source strength to the boundary operator at one point.
fn boundary_block(
    material: &Material,
    bc: BoundaryCondition,
    bp: &BoundaryPoint,
    y: &Point,
) -> Result<[[Complex64; 2]; 2]> {
    let (g, dg) = kupradze(material, &bp.point, y)?;
    if let BoundaryCondition::Dirichlet = bc {
        return Ok(g);
    }
    let mut block = [[Complex64::new(0.0, 0.0); 2]; 2];
    for j in 0..2 {
        let q = if j == 0 {
            CVec2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            CVec2::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
        };
        let t = traction_from_gradient(material, &displacement_gradient(&dg, &q), &bp.normal);
        for i in 0..2 {
            block[i][j] = t[i];
            if let BoundaryCondition::Impedance { sigma } = bc {
                block[i][j] += Complex64::new(0.0, sigma) * g[i][j];
            }
        }
    }
    Ok(block)
}

/// Boundary operator applied to the incident field, negated.
fn boundary_data(
    material: &Material,
    bc: BoundaryCondition,
    bp: &BoundaryPoint,
    pw: &PlaneWave,
) -> CVec2 {
    let u = pw.displacement(material, &bp.point);
    let value = match bc {
        BoundaryCondition::Dirichlet => u,
        BoundaryCondition::Neumann => {
            traction_from_gradient(material, &pw.gradient(material, &bp.point), &bp.normal)
        }
        BoundaryCondition::Impedance { sigma } => {
            traction_from_gradient(material, &pw.gradient(material, &bp.point), &bp.normal)
                + u * Complex64::new(0.0, sigma)
        }
    };
    -value
}

fn assemble_matrix(
    material: &Material,
    bc: BoundaryCondition,
    shape: &ShapeSpec,
    sources: &[Point],
    n_points: usize,
) -> Result<DMatrix<Complex64>> {
    let rows: Vec<Vec<[[Complex64; 2]; 2]>> = uniform_angles(n_points)
        .into_par_iter()
        .map(|t| {
            let bp = shape.eval(t);
            sources
                .iter()
                .map(|y| boundary_block(material, bc, &bp, y))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut a = DMatrix::zeros(2 * n_points, 2 * sources.len());
    for (c, blocks) in rows.iter().enumerate() {
        for (m, block) in blocks.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    a[(2 * c + i, 2 * m + j)] = block[i][j];
                }
            }
        }
    }
    Ok(a)
}

fn assemble_rhs(
    material: &Material,
    bc: BoundaryCondition,
    shape: &ShapeSpec,
    pw: &PlaneWave,
    n_points: usize,
) -> DVector<Complex64> {
    let mut rhs = DVector::zeros(2 * n_points);
    for (c, t) in uniform_angles(n_points).into_iter().enumerate() {
        let data = boundary_data(material, bc, &shape.eval(t), pw);
        rhs[2 * c] = data.x;
        rhs[2 * c + 1] = data.y;
    }
    rhs
}

pub fn source_points(shape: &ShapeSpec, config: &MfsConfig) -> Vec<Point> {
    let ts = uniform_angles(config.n_sources);
    match config.placement {
        SourcePlacement::Retraction(f) => {
            let c = shape.centroid();
            ts.into_iter()
                .map(|t| c + (shape.eval(t).point - c) * f)
                .collect()
        }
        SourcePlacement::ComplexShift(d) => {
            let shift = Complex64::new(0.0, d * shape.orientation());
            ts.into_iter()
                .map(|t| {
                    let z = shape.local_complex(t + shift);
                    shape.offset + Point::new(z.re, z.im)
                })
                .collect()
        }
    }
}

/// Regularisation relative to the Frobenius norm of the equilibrated system.
const LSQ_REGULARIZATION: f64 = 1e-12;

/// Factorised MFS system for one obstacle, boundary condition and material.
///
/// The boundary operator does not depend on the incident wave, so one
/// factorisation serves every incidence.
#[derive(Debug, Clone)]
pub struct MfsSystem {
    shape: ShapeSpec,
    bc: BoundaryCondition,
    material: Material,
    n_collocation: usize,
    sources: Vec<Point>,
    /// Column norms of the unscaled collocation matrix.
    scales: Vec<f64>,
    /// Householder QR of `[A D^-1; eps I]`, `D = diag(scales)`.
    qr: QR<Complex64, Dyn, Dyn>,
    validation: DMatrix<Complex64>,
    condition: f64,
}

impl MfsSystem {
    pub fn new(
        shape: &ShapeSpec,
        bc: BoundaryCondition,
        material: &Material,
        config: &MfsConfig,
    ) -> Result<Self> {
        material.validate()?;
        config.validate()?;
        let sources = source_points(shape, config);
        let mut a = assemble_matrix(material, bc, shape, &sources, config.n_collocation)?;
        let scales: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
        for (j, s) in scales.iter().enumerate() {
            if !(*s > 0.0 && s.is_finite()) {
                return Err(Error::Solver {
                    condition: f64::INFINITY,
                });
            }
            a.column_mut(j).unscale_mut(*s);
        }

        // Minimise |A x - b|^2 + eps^2 |x|^2 through the stacked system.
        let (m, n) = a.shape();
        let eps = LSQ_REGULARIZATION * a.norm();
        let mut stacked = DMatrix::zeros(m + n, n);
        stacked.view_mut((0, 0), (m, n)).copy_from(&a);
        stacked
            .view_mut((m, 0), (n, n))
            .fill_diagonal(Complex64::new(eps, 0.0));
        let qr = stacked.qr();
        let diag = qr.r().diagonal().map(|v| v.norm());
        let condition = diag.max() / diag.min();
        if !(condition.is_finite()) {
            return Err(Error::Solver { condition });
        }

        let validation = assemble_matrix(material, bc, shape, &sources, 2 * config.n_collocation)?;
        Ok(Self {
            shape: *shape,
            bc,
            material: *material,
            n_collocation: config.n_collocation,
            sources,
            scales,
            qr,
            validation,
            condition,
        })
    }

    pub fn sources(&self) -> &[Point] {
        &self.sources
    }

    /// Fits source strengths for one incident wave.
    pub fn solve(&self, pw: &PlaneWave) -> Result<MfsSolution> {
        let n = self.scales.len();
        let b = assemble_rhs(&self.material, self.bc, &self.shape, pw, self.n_collocation);
        let mut rhs = DVector::zeros(b.len() + n);
        rhs.rows_mut(0, b.len()).copy_from(&b);
        self.qr.q_tr_mul(&mut rhs);
        let x = self
            .qr
            .r()
            .solve_upper_triangular(&rhs.rows(0, n).into_owned())
            .ok_or(Error::Solver {
                condition: self.condition,
            })?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver {
                condition: self.condition,
            });
        }
        let strengths: Vec<CVec2> = (0..self.sources.len())
            .map(|m| {
                CVec2::new(
                    x[2 * m] / self.scales[2 * m],
                    x[2 * m + 1] / self.scales[2 * m + 1],
                )
            })
            .collect();

        let bv = assemble_rhs(
            &self.material,
            self.bc,
            &self.shape,
            pw,
            2 * self.n_collocation,
        );
        let xs = DVector::from_iterator(n, strengths.iter().flat_map(|q| [q.x, q.y]));
        let residual = (&self.validation * xs - &bv).norm() / bv.norm();
        Ok(MfsSolution {
            sources: self.sources.clone(),
            strengths,
            residual,
            condition: self.condition,
        })
    }
}

/// Fits MFS source strengths to the boundary condition for one incident wave.
pub fn mfs_solve(
    shape: &ShapeSpec,
    bc: BoundaryCondition,
    pw: &PlaneWave,
    material: &Material,
    config: &MfsConfig,
) -> Result<MfsSolution> {
    MfsSystem::new(shape, bc, material, config)?.solve(pw)
}

/// `||B u_s + B u_inc|| / ||B u_inc||` over `n_points` uniformly spaced boundary points.
pub fn boundary_residual(
    solution: &MfsSolution,
    shape: &ShapeSpec,
    bc: BoundaryCondition,
    pw: &PlaneWave,
    material: &Material,
    n_points: usize,
) -> Result<f64> {
    let a = assemble_matrix(material, bc, shape, &solution.sources, n_points)?;
    let rhs = assemble_rhs(material, bc, shape, pw, n_points);
    let x = DVector::from_iterator(
        2 * solution.strengths.len(),
        solution.strengths.iter().flat_map(|q| [q.x, q.y]),
    );
    Ok((a * x - &rhs).norm() / rhs.norm())
}

impl MfsSolution {
    /// Scattered displacement at a point outside the source curve.
    pub fn displacement(&self, material: &Material, x: &Point) -> Result<CVec2> {
        let mut u = CVec2::zeros();
        for (y, q) in self.sources.iter().zip(&self.strengths) {
            u += kupradze_displacement(y, q, material, x)?;
        }
        Ok(u)
    }

    /// Scattered traction at `x` on a surface with normal `normal`.
    pub fn traction(&self, material: &Material, x: &Point, normal: &Point) -> Result<CVec2> {
        let mut t = CVec2::zeros();
        for (y, q) in self.sources.iter().zip(&self.strengths) {
            t += kupradze_traction(y, q, material, x, normal)?;
        }
        Ok(t)
    }
}

/// Far-field amplitudes of one point force: `(u_p^inf, u_s^inf)` in direction `theta`.
pub fn point_source_farfield(
    y: &Point,
    q: &CVec2,
    material: &Material,
    theta: f64,
) -> (Complex64, Complex64) {
    let k = material.wavenumbers();
    let dir = Direction::new(theta);
    let xh = dir.unit();
    let xp = dir.perp();
    // (i/4) sqrt(2/(pi k)) e^{-i pi/4} = e^{i pi/4} / sqrt(8 pi k)
    let base = |kk: f64| Complex64::from_polar(1.0 / (8.0 * PI * kk).sqrt(), FRAC_PI_4);
    let qp = q.x * xh.x + q.y * xh.y;
    let qs = q.x * xp.x + q.y * xp.y;
    let up = base(k.kp) / (material.lambda + 2.0 * material.mu)
        * Complex64::from_polar(1.0, -k.kp * xh.dot(y))
        * qp;
    let us = base(k.ks) / material.mu * Complex64::from_polar(1.0, -k.ks * xh.dot(y)) * qs;
    (up, us)
}

/// Far field of an MFS solution sampled on `m` uniform directions.
pub fn mfs_farfield(solution: &MfsSolution, material: &Material, m: usize) -> ElasticFarField {
    mfs_farfield_at(solution, material, &uniform_angles(m))
}

pub fn mfs_farfield_at(
    solution: &MfsSolution,
    material: &Material,
    thetas: &[f64],
) -> ElasticFarField {
    let mut up = Vec::with_capacity(thetas.len());
    let mut us = Vec::with_capacity(thetas.len());
    for &t in thetas {
        let mut p = Complex64::new(0.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        for (y, q) in solution.sources.iter().zip(&solution.strengths) {
            let (a, b) = point_source_farfield(y, q, material, t);
            p += a;
            s += b;
        }
        up.push(p);
        us.push(s);
    }
    ElasticFarField { up, us }
}

/// Seed used when the caller does not choose one.
pub const DEFAULT_SEED: u64 = 1;

/// Multiplies every sample by `1 + level * eta`, `eta` uniform on the unit disk.
pub fn add_noise(ff: &ElasticFarField, level: f64, seed: u64) -> ElasticFarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perturb = |v: &Complex64| -> Complex64 {
        let r: f64 = rng.random::<f64>().sqrt();
        let phi: f64 = TAU * rng.random::<f64>();
        v * (Complex64::new(1.0, 0.0) + level * Complex64::from_polar(r, phi))
    };
    let up = ff.up.iter().map(&mut perturb).collect();
    let us = ff.us.iter().map(&mut perturb).collect();
    ElasticFarField { up, us }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn benchmark_shape_points() {
        let p = ShapeSpec::pear().eval(0.0).point;
        assert_relative_eq!(p.x, -0.85, epsilon = 1e-14);
        assert_relative_eq!(p.y, 3.0, epsilon = 1e-14);
        let p = ShapeSpec::peanut().eval(0.0).point;
        assert_relative_eq!(p.x, -0.5, epsilon = 1e-14);
        assert_relative_eq!(p.y, 3.0, epsilon = 1e-14);
        let p = ShapeSpec::kite().eval(PI / 2.0).point;
        assert_relative_eq!(p.x, -0.5, epsilon = 1e-14);
        assert_relative_eq!(p.y, 1.7, epsilon = 1e-14);
    }

    #[test]
    fn normals_point_outward() {
        for shape in [
            ShapeSpec::pear(),
            ShapeSpec::peanut(),
            ShapeSpec::kite(),
            ShapeSpec::disk(1.0, DEFAULT_OFFSET),
        ] {
            let c = shape.centroid();
            // Outward normal: integral of nu ds = 0 and sum of (x - c).nu ds = 2 * area > 0.
            let mut flux = 0.0;
            for t in uniform_angles(400) {
                let bp = shape.eval(t);
                assert_relative_eq!(bp.normal.norm(), 1.0, epsilon = 1e-12);
                assert_relative_eq!(bp.tangent.dot(&bp.normal), 0.0, epsilon = 1e-12);
                flux += (bp.point - c).dot(&bp.normal);
            }
            assert!(flux > 0.0, "{shape:?}");
        }
    }

    #[test]
    fn sources_lie_inside() {
        let retract = MfsConfig {
            placement: SourcePlacement::Retraction(0.7),
            ..MfsConfig::default()
        };
        for (shape, cfg) in [ShapeSpec::pear(), ShapeSpec::peanut(), ShapeSpec::kite()]
            .into_iter()
            .flat_map(|s| [(s, MfsConfig::default()), (s, retract)])
        {
            let srcs = source_points(&shape, &cfg);
            let boundary: Vec<Point> = uniform_angles(2000)
                .into_iter()
                .map(|t| shape.eval(t).point)
                .collect();
            for y in srcs {
                // winding number around y
                let mut wind = 0.0;
                for i in 0..boundary.len() {
                    let a = boundary[i] - y;
                    let b = boundary[(i + 1) % boundary.len()] - y;
                    wind += (a.x * b.y - a.y * b.x).atan2(a.dot(&b));
                }
                assert!(wind.abs() > 6.0, "{shape:?}: source {y:?} outside");
            }
        }
    }

    #[test]
    fn config_validation() {
        let bad = MfsConfig {
            n_sources: 100,
            n_collocation: 150,
            ..MfsConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = MfsConfig {
            placement: SourcePlacement::Retraction(1.2),
            ..MfsConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = MfsConfig {
            placement: SourcePlacement::ComplexShift(-0.1),
            ..MfsConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(BoundaryCondition::impedance(-1.0).is_err());
    }

    #[test]
    fn coincident_points_rejected() {
        let m = Material::default();
        let y = Point::new(0.1, 0.2);
        let q = CVec2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(
            kupradze_displacement(&y, &q, &m, &y),
            Err(Error::Coincident)
        );
    }

    #[test]
    fn single_source_shear_vanishes_along_force() {
        let m = Material::default();
        let theta = 0.9;
        let d = Direction::new(theta).unit();
        let q = CVec2::new(Complex64::new(d.x, 0.0), Complex64::new(d.y, 0.0));
        let (up, us) = point_source_farfield(&Point::zeros(), &q, &m, theta);
        assert!(us.norm() < 1e-16);
        assert!(up.norm() > 0.0);
    }

    #[test]
    fn noise_level_zero_is_identity() {
        let ff = ElasticFarField::new(
            vec![Complex64::new(1.0, 2.0); 5],
            vec![Complex64::new(-1.0, 0.5); 5],
        )
        .unwrap();
        assert_eq!(add_noise(&ff, 0.0, 7), ff);
        assert_eq!(add_noise(&ff, 0.1, 7), add_noise(&ff, 0.1, 7));
        assert_ne!(add_noise(&ff, 0.1, 7), add_noise(&ff, 0.1, 8));
    }
}
