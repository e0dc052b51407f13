//! Extended sampling method.
//!
//! For every sampling point `z` a Tikhonov-regularised far-field equation is
//! solved whose kernel is the far field of a probe disk centred at `z`. The
//! obstacle sits where the solution norm is smallest.
//!
//! Moving the probe disk only multiplies the kernel by diagonal unimodular
//! factors, `K_z = Dx(z) K_0 Dd(z)`, so one SVD of `K_0` serves the whole
//! grid.

use crate::disk::{
    rigid_disk_coeffs, translate_acoustic, translate_elastic, DiskSpec, SoftDiskSeries,
};
use crate::elastic::{
    ipp_rhs_scale, quadrature_weight, uniform_angles, Direction, ElasticFarField, Material,
    PlaneWave, Point, WaveType, DEFAULT_DIRECTIONS,
};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

pub const DEFAULT_ALPHA: f64 = 1e-5;
pub const DEFAULT_INITIAL_RADIUS: f64 = 2.4;
pub const DEFAULT_RADIUS_FLOOR: f64 = 0.15;

/// Which data the inversion uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Compressional part only, sound-soft probe at `kp`.
    IppP,
    /// Shear part only, sound-soft probe at `ks`.
    IppS,
    /// Both parts, rigid elastic probe.
    Ipf,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::IppP => "ipp-p",
            Mode::IppS => "ipp-s",
            Mode::Ipf => "ipf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ipp-p" => Some(Mode::IppP),
            "ipp-s" => Some(Mode::IppS),
            "ipf" => Some(Mode::Ipf),
            _ => None,
        }
    }

    /// Length of the data vector for `m` directions.
    pub fn data_len(self, m: usize) -> usize {
        match self {
            Mode::Ipf => 2 * m,
            _ => m,
        }
    }
}

/// How the integral over incident directions is discretised.
///
/// With a fixed `alpha` the two conventions are not equivalent: folding a
/// constant weight `w` into the kernel is the same as solving the
/// unweighted problem with `alpha / w^2` and rescaling `g` by `1/w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    /// Plain matrix of kernel values.
    Unweighted,
    /// Kernel values times the trapezoid weight `2 pi / M`.
    Trapezoid,
}

/// Norm used for the indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// Euclidean norm of the coefficient vector.
    L2,
    /// Norm induced by the weighted inner product (equals `L2` for single-part modes).
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsmParams {
    pub alpha: f64,
    pub probe_radius: f64,
    pub mode: Mode,
    pub m_directions: usize,
    pub quadrature: Quadrature,
    pub norm: NormKind,
}

impl EsmParams {
    pub fn new(mode: Mode, probe_radius: f64) -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            probe_radius,
            mode,
            m_directions: DEFAULT_DIRECTIONS,
            quadrature: Quadrature::Unweighted,
            norm: NormKind::L2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.probe_radius > 0.0 && self.probe_radius.is_finite()) {
            return Err(Error::Config(format!(
                "probe radius must be positive, got {}",
                self.probe_radius
            )));
        }
        if self.m_directions < 2 {
            return Err(Error::Config(format!(
                "need at least 2 directions, got {}",
                self.m_directions
            )));
        }
        Ok(())
    }
}

/// Rectangular grid of sampling points, row-major with rows running over `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingGrid {
    pub x_min: f64,
    pub y_min: f64,
    pub step: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Default for SamplingGrid {
    /// `{(-5 + 0.1 m, -5 + 0.1 n) : m, n = 0..=100}`.
    fn default() -> Self {
        Self {
            x_min: -5.0,
            y_min: -5.0,
            step: 0.1,
            nx: 101,
            ny: 101,
        }
    }
}

impl SamplingGrid {
    /// Grid covering `[x_min, x_max] x [y_min, y_max]` with the given step.
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(x_max >= x_min) || !(y_max >= y_min) {
            return Err(Error::Config(format!(
                "bad grid [{x_min}, {x_max}] x [{y_min}, {y_max}] step {step}"
            )));
        }
        let count = |lo: f64, hi: f64| ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Ok(Self {
            x_min,
            y_min,
            step,
            nx: count(x_min, x_max),
            ny: count(y_min, y_max),
        })
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.step * (self.nx - 1) as f64
    }

    pub fn y_max(&self) -> f64 {
        self.y_min + self.step * (self.ny - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point `index = row * nx + col`, at `(x_min + col step, y_min + row step)`.
    pub fn point(&self, index: usize) -> Point {
        let row = index / self.nx;
        let col = index % self.nx;
        Point::new(
            self.x_min + self.step * col as f64,
            self.y_min + self.step * row as f64,
        )
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

/// Probe-disk kernel at the origin with its SVD in the weighted space.
///
/// Rows are observation directions, columns incident directions. For
/// [`Mode::Ipf`] both are stacked `(p; s)`.
#[derive(Debug, Clone)]
pub struct ProbeOperator {
    mode: Mode,
    material: Material,
    radius: f64,
    m: usize,
    quadrature: Quadrature,
    base: DMatrix<Complex64>,
    /// Square roots of the inner-product weights, `W = D^{1/2}`.
    sqrt_weights: Vec<f64>,
    /// Wavenumber attached to each row and column for the translation phases.
    row_k: Vec<f64>,
    col_k: Vec<f64>,
    dirs: Vec<Point>,
    u: DMatrix<Complex64>,
    sigma: Vec<f64>,
    v: DMatrix<Complex64>,
}

/// Diagonal of `D_ps = diag((ks/kp) I, I)`, the discrete form of the weighted inner product.
pub fn dps_weights(material: &Material, m: usize) -> Vec<f64> {
    let k = material.wavenumbers();
    let mut w = vec![k.ks / k.kp; m];
    w.extend(std::iter::repeat_n(1.0, m));
    w
}

/// `D^{-1} B^H D` for a diagonal weight `D`.
pub fn weighted_adjoint(b: &DMatrix<Complex64>, weights: &[f64]) -> DMatrix<Complex64> {
    let mut a = b.adjoint();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            a[(i, j)] *= weights[j] / weights[i];
        }
    }
    a
}

pub fn assemble_base_ipp(
    material: &Material,
    radius: f64,
    wave: WaveType,
    m: usize,
    quadrature: Quadrature,
) -> Result<ProbeOperator> {
    material.validate()?;
    let kt = material.wavenumbers().get(wave);
    let series = SoftDiskSeries::new(kt, radius)?;
    let angles = uniform_angles(m);
    let w = quadrature_factor(quadrature, m);
    let base = DMatrix::from_fn(m, m, |l, j| series.eval(angles[l] - angles[j]) * w);
    ProbeOperator::new(
        match wave {
            WaveType::P => Mode::IppP,
            WaveType::S => Mode::IppS,
        },
        *material,
        radius,
        m,
        quadrature,
        base,
        vec![1.0; m],
        vec![kt; m],
        vec![kt; m],
    )
}

pub fn assemble_base_ipf(
    material: &Material,
    radius: f64,
    m: usize,
    quadrature: Quadrature,
) -> Result<ProbeOperator> {
    material.validate()?;
    let k = material.wavenumbers();
    let angles = uniform_angles(m);
    let w = quadrature_factor(quadrature, m);
    let cp = (k.kp / material.omega).sqrt();
    let cs = (k.ks / material.omega).sqrt();
    let mut base = DMatrix::zeros(2 * m, 2 * m);
    for (j, &theta) in angles.iter().enumerate() {
        let dir = Direction::new(theta);
        let coeffs_p = rigid_disk_coeffs(material, radius, &PlaneWave::pressure(dir))?;
        let coeffs_s = rigid_disk_coeffs(material, radius, &PlaneWave::shear(dir))?;
        for (l, &obs) in angles.iter().enumerate() {
            let (pp, sp) = coeffs_p.farfield(obs);
            let (ps, ss) = coeffs_s.farfield(obs);
            base[(l, j)] = pp * cp * w;
            base[(m + l, j)] = sp * cp * w;
            base[(l, m + j)] = ps * cs * w;
            base[(m + l, m + j)] = ss * cs * w;
        }
    }
    let sqrt_weights = dps_weights(material, m)
        .into_iter()
        .map(f64::sqrt)
        .collect();
    let mut ks_stack = vec![k.kp; m];
    ks_stack.extend(std::iter::repeat_n(k.ks, m));
    ProbeOperator::new(
        Mode::Ipf,
        *material,
        radius,
        m,
        quadrature,
        base,
        sqrt_weights,
        ks_stack.clone(),
        ks_stack,
    )
}

fn quadrature_factor(q: Quadrature, m: usize) -> Complex64 {
    match q {
        Quadrature::Unweighted => Complex64::new(1.0, 0.0),
        Quadrature::Trapezoid => Complex64::new(quadrature_weight(m), 0.0),
    }
}

impl ProbeOperator {
    #[allow(clippy::too_many_arguments)]
    fn new(
        mode: Mode,
        material: Material,
        radius: f64,
        m: usize,
        quadrature: Quadrature,
        base: DMatrix<Complex64>,
        sqrt_weights: Vec<f64>,
        row_k: Vec<f64>,
        col_k: Vec<f64>,
    ) -> Result<Self> {
        if base.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver {
                condition: f64::INFINITY,
            });
        }
        // SVD of W K0 W^-1; the diagonal phases commute with W.
        let n = base.nrows();
        let scaled = DMatrix::from_fn(n, n, |i, j| {
            base[(i, j)] * (sqrt_weights[i] / sqrt_weights[j])
        });
        let svd = scaled
            .try_svd(true, true, f64::EPSILON, 10_000)
            .ok_or(Error::Solver {
                condition: f64::INFINITY,
            })?;
        let u = svd.u.ok_or(Error::Solver {
            condition: f64::INFINITY,
        })?;
        let v = svd
            .v_t
            .ok_or(Error::Solver {
                condition: f64::INFINITY,
            })?
            .adjoint();
        let dirs = uniform_angles(m)
            .into_iter()
            .map(|t| Direction::new(t).unit())
            .collect();
        Ok(Self {
            mode,
            material,
            radius,
            m,
            quadrature,
            base,
            sqrt_weights,
            row_k,
            col_k,
            dirs,
            u,
            sigma: svd.singular_values.iter().copied().collect(),
            v,
        })
    }

    /// Builds the operator matching `params`.
    pub fn for_params(params: &EsmParams, material: &Material) -> Result<Self> {
        params.validate()?;
        match params.mode {
            Mode::IppP => assemble_base_ipp(
                material,
                params.probe_radius,
                WaveType::P,
                params.m_directions,
                params.quadrature,
            ),
            Mode::IppS => assemble_base_ipp(
                material,
                params.probe_radius,
                WaveType::S,
                params.m_directions,
                params.quadrature,
            ),
            Mode::Ipf => assemble_base_ipf(
                material,
                params.probe_radius,
                params.m_directions,
                params.quadrature,
            ),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn material(&self) -> &Material {
        &self.material
    }

    pub fn directions(&self) -> usize {
        self.m
    }

    pub fn quadrature(&self) -> Quadrature {
        self.quadrature
    }

    /// Kernel of the origin-centred probe.
    pub fn base(&self) -> &DMatrix<Complex64> {
        &self.base
    }

    /// Singular values of the weighted base kernel, descending.
    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    /// Diagonal of the inner-product weight (all ones for single-part modes).
    pub fn inner_weights(&self) -> Vec<f64> {
        self.sqrt_weights.iter().map(|s| s * s).collect()
    }

    fn dir(&self, i: usize) -> &Point {
        &self.dirs[i % self.m]
    }

    /// Diagonals of `Dx(z)` and `Dd(z)` with `K_z = Dx(z) K_0 Dd(z)`.
    pub fn phases(&self, z: &Point) -> (Vec<Complex64>, Vec<Complex64>) {
        let rows = (0..self.row_k.len())
            .map(|i| Complex64::from_polar(1.0, -self.row_k[i] * z.dot(self.dir(i))))
            .collect();
        let cols = (0..self.col_k.len())
            .map(|j| Complex64::from_polar(1.0, self.col_k[j] * z.dot(self.dir(j))))
            .collect();
        (rows, cols)
    }

    /// `K_z` assembled entry by entry from the disk translation relations.
    pub fn direct_matrix(&self, z: &Point) -> DMatrix<Complex64> {
        let n = self.base.nrows();
        let angles = uniform_angles(self.m);
        let m = self.m;
        match self.mode {
            Mode::IppP | Mode::IppS => DMatrix::from_fn(n, n, |l, j| {
                translate_acoustic(self.base[(l, j)], self.row_k[l], z, angles[l], angles[j])
            }),
            Mode::Ipf => {
                let mut out = DMatrix::zeros(n, n);
                for l in 0..m {
                    for j in 0..m {
                        for (col, wave) in [(j, WaveType::P), (m + j, WaveType::S)] {
                            let (up, us) = translate_elastic(
                                (self.base[(l, col)], self.base[(m + l, col)]),
                                &self.material,
                                z,
                                angles[l],
                                angles[j],
                                wave,
                            );
                            out[(l, col)] = up;
                            out[(m + l, col)] = us;
                        }
                    }
                }
                out
            }
        }
    }

    fn check_rhs(&self, rhs: &[Complex64]) -> Result<()> {
        if rhs.len() != self.base.nrows() {
            return Err(Error::Shape {
                expected: self.base.nrows(),
                got: rhs.len(),
            });
        }
        Ok(())
    }

    /// Tikhonov solution `(K_z^* K_z + alpha I)^{-1} K_z^* f` by the factorised fast path.
    pub fn solve_at_point(
        &self,
        z: &Point,
        rhs: &[Complex64],
        alpha: f64,
    ) -> Result<DVector<Complex64>> {
        self.check_rhs(rhs)?;
        let (dx, dd) = self.phases(z);
        let n = rhs.len();
        // f~ = Dx^* W f
        let f = DVector::from_fn(n, |i, _| dx[i].conj() * rhs[i] * self.sqrt_weights[i]);
        let mut c = self.u.ad_mul(&f);
        for (ci, s) in c.iter_mut().zip(&self.sigma) {
            *ci *= s / (s * s + alpha);
        }
        let g = &self.v * c;
        // g = W^-1 Dd^* g~
        Ok(DVector::from_fn(n, |j, _| {
            g[j] * dd[j].conj() / self.sqrt_weights[j]
        }))
    }

    pub fn norm_of(&self, g: &DVector<Complex64>, kind: NormKind) -> f64 {
        match kind {
            NormKind::L2 => g.norm(),
            NormKind::Weighted => g
                .iter()
                .zip(&self.sqrt_weights)
                .map(|(v, w)| v.norm_sqr() * w * w)
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Tikhonov solve on the directly assembled `K_z`, without the SVD.
    ///
    /// Solves `[W K W^-1; sqrt(alpha) I] h = [W f; 0]` by Householder QR and
    /// returns `g = W^-1 h`, which satisfies `(K^* K + alpha I) g = K^* f`.
    pub fn solve_direct(
        &self,
        z: &Point,
        rhs: &[Complex64],
        alpha: f64,
    ) -> Result<DVector<Complex64>> {
        self.check_rhs(rhs)?;
        let k = self.direct_matrix(z);
        let n = k.ncols();
        let w = &self.sqrt_weights;
        let mut a = DMatrix::zeros(2 * n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = k[(i, j)] * (w[i] / w[j]);
            }
            a[(n + i, i)] = Complex64::new(alpha.sqrt(), 0.0);
        }
        let mut b = DVector::zeros(2 * n);
        for i in 0..n {
            b[i] = rhs[i] * w[i];
        }
        let qr = a.qr();
        qr.q_tr_mul(&mut b);
        let h = qr
            .r()
            .solve_upper_triangular(&b.rows(0, n).into_owned())
            .ok_or(Error::Solver {
                condition: f64::INFINITY,
            })?;
        Ok(DVector::from_fn(n, |j, _| h[j] / w[j]))
    }
}

/// Data vector for a mode: `u_t / (i k_t)` for single-part modes, `(u_p; u_s)` otherwise.
pub fn data_vector(data: &ElasticFarField, mode: Mode, material: &Material) -> Vec<Complex64> {
    let k = material.wavenumbers();
    match mode {
        Mode::IppP => ipp_rhs_scale(&data.up, k.kp),
        Mode::IppS => ipp_rhs_scale(&data.us, k.ks),
        Mode::Ipf => data.stacked(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorField {
    pub grid: SamplingGrid,
    /// `||g_z|| / max ||g_z||`, row-major.
    pub values: Vec<f64>,
    pub raw_norms: Vec<f64>,
    /// Index of the smallest norm; ties go to the lowest index.
    pub argmin: usize,
}

impl IndicatorField {
    pub fn z_star(&self) -> Point {
        self.grid.point(self.argmin)
    }

    pub fn min_raw_norm(&self) -> f64 {
        self.raw_norms[self.argmin]
    }
}

pub fn indicator_field(
    op: &ProbeOperator,
    grid: &SamplingGrid,
    rhs: &[Complex64],
    alpha: f64,
    norm: NormKind,
) -> Result<IndicatorField> {
    if grid.is_empty() {
        return Err(Error::Config("empty sampling grid".into()));
    }
    op.check_rhs(rhs)?;
    let raw_norms: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            op.solve_at_point(&grid.point(i), rhs, alpha)
                .map(|g| op.norm_of(&g, norm))
        })
        .collect::<Result<_>>()?;
    let mut argmin = 0;
    let mut max = raw_norms[0];
    for (i, &v) in raw_norms.iter().enumerate() {
        if v < raw_norms[argmin] {
            argmin = i;
        }
        max = max.max(v);
    }
    if !(max > 0.0 && max.is_finite()) {
        return Err(Error::Solver { condition: max });
    }
    let values = raw_norms.iter().map(|v| v / max).collect();
    Ok(IndicatorField {
        grid: *grid,
        values,
        raw_norms,
        argmin,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub z_star: Point,
    pub disk: DiskSpec,
    pub field: IndicatorField,
}

/// Single-level ESM: global minimiser of the indicator and the probe disk there.
pub fn esm_reconstruct(
    params: &EsmParams,
    material: &Material,
    data: &ElasticFarField,
    grid: &SamplingGrid,
) -> Result<Reconstruction> {
    let op = ProbeOperator::for_params(params, material)?;
    reconstruct_with(&op, params, material, data, grid)
}

fn reconstruct_with(
    op: &ProbeOperator,
    params: &EsmParams,
    material: &Material,
    data: &ElasticFarField,
    grid: &SamplingGrid,
) -> Result<Reconstruction> {
    if data.len() != params.m_directions {
        return Err(Error::Shape {
            expected: params.m_directions,
            got: data.len(),
        });
    }
    let rhs = data_vector(data, params.mode, material);
    let field = indicator_field(op, grid, &rhs, params.alpha, params.norm)?;
    let z_star = field.z_star();
    Ok(Reconstruction {
        z_star,
        disk: DiskSpec::new(z_star, params.probe_radius)?,
        field,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub radius: f64,
    pub z: Point,
    pub min_raw_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultilevelResult {
    pub levels: Vec<Level>,
    pub z_final: Point,
    pub r_final: f64,
}

/// Multilevel ESM on a fixed grid.
///
/// Radii halve from `initial_radius`. The search stops at the first level
/// whose minimiser leaves the previous reconstruction disk (closed) and
/// returns the previous level, or when the next radius would drop below
/// `floor`, returning the last level.
pub fn multilevel(
    params: &EsmParams,
    initial_radius: f64,
    floor: f64,
    material: &Material,
    data: &ElasticFarField,
    grid: &SamplingGrid,
) -> Result<MultilevelResult> {
    if !(initial_radius >= floor && floor > 0.0) {
        return Err(Error::Config(format!(
            "need initial radius >= floor > 0, got {initial_radius} and {floor}"
        )));
    }
    let mut levels: Vec<Level> = Vec::new();
    let mut radius = initial_radius;
    loop {
        let p = EsmParams {
            probe_radius: radius,
            ..*params
        };
        let rec = esm_reconstruct(&p, material, data, grid)?;
        let level = Level {
            radius,
            z: rec.z_star,
            min_raw_norm: rec.field.min_raw_norm(),
        };
        if let Some(prev) = levels.last().copied() {
            if (level.z - prev.z).norm() > prev.radius {
                levels.push(level);
                return Ok(MultilevelResult {
                    levels,
                    z_final: prev.z,
                    r_final: prev.radius,
                });
            }
        }
        levels.push(level);
        if radius / 2.0 < floor * (1.0 - 1e-12) {
            return Ok(MultilevelResult {
                levels,
                z_final: level.z,
                r_final: radius,
            });
        }
        radius /= 2.0;
    }
}
