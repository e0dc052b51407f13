use elastic_esm::disk::rigid_disk_dataset;
use elastic_esm::elastic::{
    weighted_inner_product, Density, Direction, Material, PlaneWave, Point, WaveType,
};
use elastic_esm::esm::{
    assemble_base_ipf, assemble_base_ipp, data_vector, dps_weights, indicator_field, multilevel,
    weighted_adjoint, EsmParams, Mode, NormKind, ProbeOperator, Quadrature, SamplingGrid,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

const M: usize = 52;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn ipp(radius: f64, wave: WaveType) -> ProbeOperator {
    assemble_base_ipp(
        &Material::default(),
        radius,
        wave,
        M,
        Quadrature::Unweighted,
    )
    .unwrap()
}

fn ipf(radius: f64) -> ProbeOperator {
    assemble_base_ipf(&Material::default(), radius, M, Quadrature::Unweighted).unwrap()
}

/// Eigenvalues of the circulant with first column `col`: `lambda_k = sum_n col_n e^{2 pi i n k / M}`.
fn circulant_eigenvalues(col: &[Complex64]) -> Vec<Complex64> {
    let m = col.len();
    (0..m)
        .map(|k| {
            col.iter()
                .enumerate()
                .map(|(n, v)| v * Complex64::from_polar(1.0, TAU * (n * k) as f64 / m as f64))
                .sum()
        })
        .collect()
}

fn fourier_vector(m: usize, k: usize) -> DVector<Complex64> {
    DVector::from_fn(m, |j, _| {
        Complex64::from_polar(1.0, -TAU * (j * k) as f64 / m as f64)
    })
}

fn assert_circulant(block: &DMatrix<Complex64>, tol: f64) {
    let m = block.nrows();
    let col: Vec<_> = block.column(0).iter().copied().collect();
    for l in 0..m {
        for j in 0..m {
            assert!((block[(l, j)] - col[(l + m - j) % m]).norm() < tol);
        }
    }
    // C f_k = lambda_k f_k with f_k the Fourier vectors.
    let lambda = circulant_eigenvalues(&col);
    for (k, lam) in lambda.iter().enumerate() {
        let f = fourier_vector(m, k);
        let err = (block * &f - &f * *lam).norm() / (m as f64).sqrt();
        assert!(err < 1e-12, "mode {k}: {err}");
    }
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

#[test]
fn ipp_base_is_circulant_and_svd_matches_fft() {
    for (r, wave) in [(1.0, WaveType::P), (0.3, WaveType::S), (2.4, WaveType::S)] {
        let op = ipp(r, wave);
        assert_circulant(op.base(), 1e-13);
        let col: Vec<_> = op.base().column(0).iter().copied().collect();
        let expect = sorted_desc(
            circulant_eigenvalues(&col)
                .iter()
                .map(|l| l.norm())
                .collect(),
        );
        for (s, e) in op.singular_values().iter().zip(&expect) {
            assert!((s - e).abs() < 1e-12, "{s} vs {e}");
        }
    }
}

#[test]
fn ipp_base_is_symmetric() {
    for r in [0.15, 1.2, 2.4] {
        let a = ipp(r, WaveType::P);
        assert!((a.base() - a.base().transpose()).camax() < 1e-13);
    }
}

#[test]
fn ipf_blocks_are_circulant_and_svd_matches_mode_blocks() {
    let op = ipf(1.2);
    let b = op.base();
    let w = dps_weights(&Material::default(), M);
    let mut expect = Vec::new();
    let blocks: Vec<Vec<Complex64>> = (0..4)
        .map(|q| {
            let blk = b.view(((q / 2) * M, (q % 2) * M), (M, M)).into_owned();
            assert_circulant(&blk, 1e-13);
            circulant_eigenvalues(&blk.column(0).iter().copied().collect::<Vec<_>>())
        })
        .collect();
    // In the Fourier basis the weighted operator splits into 2x2 blocks per mode.
    let (sp, ss) = (w[0].sqrt(), 1.0);
    for k in 0..M {
        let m2 = nalgebra::Matrix2::new(
            blocks[0][k],
            blocks[1][k] * (sp / ss),
            blocks[2][k] * (ss / sp),
            blocks[3][k],
        );
        let h = m2.adjoint() * m2;
        let tr = (h[(0, 0)] + h[(1, 1)]).re;
        let det = (h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)]).re;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        expect.push((tr / 2.0 + disc).sqrt());
        expect.push((tr / 2.0 - disc).max(0.0).sqrt());
    }
    let expect = sorted_desc(expect);
    let scale = expect[0];
    for (s, e) in op.singular_values().iter().zip(&expect) {
        assert!((s - e).abs() < 1e-12 * scale.max(1.0), "{s} vs {e}");
    }
}

#[test]
fn largest_probe_is_finite() {
    for op in [ipp(2.4, WaveType::P), ipp(2.4, WaveType::S), ipf(2.4)] {
        assert!(op.base().iter().all(|v| v.is_finite()));
    }
}

#[test]
fn weighted_adjoint_identity() {
    let m = Material::default();
    let op = ipf(0.6);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let b = op.direct_matrix(&Point::new(-1.3, 2.2));
    let adj = weighted_adjoint(&b, &dps_weights(&m, M));
    for _ in 0..5 {
        let g = DVector::from_vec(random_vec(&mut rng, 2 * M));
        let h = DVector::from_vec(random_vec(&mut rng, 2 * M));
        let dens = |v: &DVector<Complex64>| Density::from_stacked(v.as_slice()).unwrap();
        let lhs = weighted_inner_product(&dens(&(&b * &g)), &dens(&h), &m).unwrap();
        let rhs = weighted_inner_product(&dens(&g), &dens(&(&adj * &h)), &m).unwrap();
        assert!(
            (lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0),
            "{lhs} vs {rhs}"
        );
    }
}

#[test]
fn corrupted_weight_breaks_adjoint_identity() {
    let m = Material::default();
    let op = ipf(0.6);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let b = op.direct_matrix(&Point::new(0.4, -0.9));
    let mut w = dps_weights(&m, M);
    w[..M].iter_mut().for_each(|v| *v *= 1.5);
    let adj = weighted_adjoint(&b, &w);
    let g = DVector::from_vec(random_vec(&mut rng, 2 * M));
    let h = DVector::from_vec(random_vec(&mut rng, 2 * M));
    let dens = |v: &DVector<Complex64>| Density::from_stacked(v.as_slice()).unwrap();
    let lhs = weighted_inner_product(&dens(&(&b * &g)), &dens(&h), &m).unwrap();
    let rhs = weighted_inner_product(&dens(&g), &dens(&(&adj * &h)), &m).unwrap();
    assert!((lhs - rhs).norm() > 1e-6 * lhs.norm());
}

/// Tikhonov solution as the least-squares problem `[W K W^-1; sqrt(alpha) I] h = [W f; 0]`,
/// `g = W^-1 h`, solved by Householder QR.
fn dense_tikhonov(
    k: &DMatrix<Complex64>,
    weights: &[f64],
    f: &[Complex64],
    alpha: f64,
) -> DVector<Complex64> {
    let n = k.ncols();
    let w: Vec<f64> = weights.iter().map(|v| v.sqrt()).collect();
    let mut a = DMatrix::<Complex64>::zeros(2 * n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = k[(i, j)] * (w[i] / w[j]);
        }
        a[(n + i, i)] = c(alpha.sqrt(), 0.0);
    }
    let mut b = DVector::<Complex64>::zeros(2 * n);
    for i in 0..n {
        b[i] = f[i] * w[i];
    }
    let qr = a.qr();
    let qtb = qr.q().adjoint() * b;
    let h = qr
        .r()
        .solve_upper_triangular(&qtb.rows(0, n).into_owned())
        .unwrap();
    DVector::from_fn(n, |j, _| h[j] / w[j])
}

#[test]
fn fast_path_matches_dense_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let alpha = 1e-5;
    for op in [
        ipp(0.6, WaveType::P),
        ipp(1.2, WaveType::S),
        ipf(0.6),
        ipf(1.2),
    ] {
        let n = op.base().nrows();
        let f = random_vec(&mut rng, n);
        for _ in 0..10 {
            let z = Point::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let fast = op.solve_at_point(&z, &f, alpha).unwrap();
            let dense = dense_tikhonov(&op.direct_matrix(&z), &op.inner_weights(), &f, alpha);
            let err = (&fast - &dense).norm() / dense.norm();
            assert!(err < 1e-10, "{:?} z={z:?}: {err:e}", op.mode());
            let lib = op.solve_direct(&z, &f, alpha).unwrap();
            assert!((&lib - &dense).norm() / dense.norm() < 1e-10);
        }
    }
}

#[test]
fn norm_decreases_with_alpha() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for op in [ipp(0.6, WaveType::P), ipf(0.6)] {
        let f = random_vec(&mut rng, op.base().nrows());
        let z = Point::new(0.7, -2.0);
        let norms: Vec<f64> = [1e-5, 1e-3, 1e-1, 10.0]
            .iter()
            .map(|&a| op.norm_of(&op.solve_at_point(&z, &f, a).unwrap(), NormKind::L2))
            .collect();
        assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
    }
}

fn disk_data(center: Point, radius: f64) -> elastic_esm::elastic::ElasticFarField {
    let pw = PlaneWave::new(Direction::new(PI / 3.0), c(1.0, 0.0), c(1.0, 0.0)).unwrap();
    rigid_disk_dataset(&Material::default(), &center, radius, &pw, M).unwrap()
}

#[test]
fn indicator_is_normalised_and_deterministic() {
    let m = Material::default();
    let grid = SamplingGrid::new(-3.0, -1.0, 2.0, 4.0, 0.2).unwrap();
    let data = disk_data(Point::new(-2.0, 3.0), 0.5);
    for mode in [Mode::IppP, Mode::IppS, Mode::Ipf] {
        let op = ProbeOperator::for_params(&EsmParams::new(mode, 0.6), &m).unwrap();
        let rhs = data_vector(&data, mode, &m);
        let a = indicator_field(&op, &grid, &rhs, 1e-5, NormKind::L2).unwrap();
        let b = indicator_field(&op, &grid, &rhs, 1e-5, NormKind::L2).unwrap();
        assert_eq!(a, b);
        let max = a.values.iter().copied().fold(0.0, f64::max);
        assert_eq!(max, 1.0);
        assert!(a.values.iter().all(|&v| v > 0.0 && v <= 1.0));
        assert!(a.values.iter().all(|&v| v >= a.values[a.argmin]));
    }
}

#[test]
fn argmin_ties_go_to_lowest_index() {
    let m = Material::default();
    let op = ProbeOperator::for_params(&EsmParams::new(Mode::IppP, 1.0), &m).unwrap();
    let rhs = vec![c(1.0, 0.0); M];
    // Zero step: every grid point is the origin, so all norms tie.
    let grid = SamplingGrid {
        x_min: 0.0,
        y_min: 0.0,
        step: 0.0,
        nx: 3,
        ny: 2,
    };
    let f = indicator_field(&op, &grid, &rhs, 1e-5, NormKind::L2).unwrap();
    assert_eq!(f.argmin, 0);
}

#[test]
fn translation_covariance_of_argmin() {
    let m = Material::default();
    let op = ProbeOperator::for_params(&EsmParams::new(Mode::Ipf, 1.2), &m).unwrap();
    let grid = SamplingGrid::new(-4.0, 0.0, 1.0, 5.0, 0.1).unwrap();
    let base = disk_data(Point::new(-2.0, 3.0), 1.0);
    let shift = Point::new(0.3, -0.5);
    let moved = disk_data(Point::new(-2.0, 3.0) + shift, 1.0);
    let f0 = indicator_field(
        &op,
        &grid,
        &data_vector(&base, Mode::Ipf, &m),
        1e-5,
        NormKind::L2,
    )
    .unwrap();
    let f1 = indicator_field(
        &op,
        &grid,
        &data_vector(&moved, Mode::Ipf, &m),
        1e-5,
        NormKind::L2,
    )
    .unwrap();
    let d = f1.z_star() - f0.z_star();
    assert!((d - shift).norm() < 1e-9, "{d:?}");
}

#[test]
fn multilevel_radii_halve_and_exit_rule_holds() {
    let m = Material::default();
    let data = disk_data(Point::new(-2.0, 3.0), 1.0);
    let grid = SamplingGrid::new(-4.0, 0.0, 1.0, 5.0, 0.1).unwrap();
    let r = multilevel(&EsmParams::new(Mode::Ipf, 2.4), 2.4, 0.15, &m, &data, &grid).unwrap();
    for (j, lv) in r.levels.iter().enumerate() {
        assert!((lv.radius - 2.4 / 2f64.powi(j as i32)).abs() < 1e-15);
    }
    let n = r.levels.len();
    let last = r.levels[n - 1];
    if n >= 2 && (last.z - r.levels[n - 2].z).norm() > r.levels[n - 2].radius {
        assert_eq!(
            (r.z_final, r.r_final),
            (r.levels[n - 2].z, r.levels[n - 2].radius)
        );
    } else {
        assert_eq!((r.z_final, r.r_final), (last.z, last.radius));
        assert!(last.radius / 2.0 < 0.15);
    }
    assert!((r.z_final - Point::new(-2.0, 3.0)).norm() <= 0.5);
}

#[test]
fn quadrature_folding_is_not_a_rescaling_of_the_indicator() {
    // With alpha fixed, folding 2 pi / M into the kernel acts like a larger alpha.
    let m = Material::default();
    let data = disk_data(Point::new(-2.0, 3.0), 1.0);
    let rhs = data_vector(&data, Mode::IppP, &m);
    let grid = SamplingGrid::new(-3.0, 0.0, 1.0, 4.0, 0.5).unwrap();
    let plain = assemble_base_ipp(&m, 1.2, WaveType::P, M, Quadrature::Unweighted).unwrap();
    let folded = assemble_base_ipp(&m, 1.2, WaveType::P, M, Quadrature::Trapezoid).unwrap();
    let a = indicator_field(&plain, &grid, &rhs, 1e-5, NormKind::L2).unwrap();
    let b = indicator_field(&folded, &grid, &rhs, 1e-5, NormKind::L2).unwrap();
    let w = TAU / M as f64;
    let c = indicator_field(&plain, &grid, &rhs, 1e-5 / (w * w), NormKind::L2).unwrap();
    let diff = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(diff > 1e-3);
    for (x, y) in b.values.iter().zip(&c.values) {
        assert!((x - y).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norm_is_translation_covariant(
        zx in -4.0f64..4.0, zy in -4.0f64..4.0,
        tx in -2.0f64..2.0, ty in -2.0f64..2.0,
        seed in any::<u64>(),
        full in any::<bool>(),
    ) {
        let op = if full { ipf(0.6) } else { ipp(0.6, WaveType::S) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_vec(&mut rng, op.base().nrows());
        let z = Point::new(zx, zy);
        let t = Point::new(tx, ty);
        let (dx, _) = op.phases(&t);
        let shifted: Vec<Complex64> = f.iter().zip(&dx).map(|(v, p)| v * p).collect();
        for kind in [NormKind::L2, NormKind::Weighted] {
            let a = op.norm_of(&op.solve_at_point(&z, &f, 1e-5).unwrap(), kind);
            let b = op.norm_of(&op.solve_at_point(&(z + t), &shifted, 1e-5).unwrap(), kind);
            prop_assert!((a - b).abs() <= 1e-10 * a);
        }
    }

    #[test]
    fn fast_path_matches_direct_matrix(zx in -5.0f64..5.0, zy in -5.0f64..5.0, seed in any::<u64>()) {
        let op = ipp(0.3, WaveType::P);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_vec(&mut rng, M);
        let z = Point::new(zx, zy);
        let fast = op.solve_at_point(&z, &f, 1e-5).unwrap();
        let dense = dense_tikhonov(&op.direct_matrix(&z), &op.inner_weights(), &f, 1e-5);
        prop_assert!((&fast - &dense).norm() <= 1e-10 * dense.norm());
    }

    #[test]
    fn phases_are_unimodular(zx in -5.0f64..5.0, zy in -5.0f64..5.0) {
        let op = ipf(0.6);
        let (dx, dd) = op.phases(&Point::new(zx, zy));
        prop_assert!(dx.iter().chain(&dd).all(|p| (p.norm() - 1.0).abs() < 1e-14));
    }
}
