use std::f64::consts::PI;

use nalgebra::DMatrix;
use oso_core::chanmodel::{
    covariance, covariance_ula, covariance_with_rule, large_scale_gain, sample_rayleigh, ArrayGeometry,
    ChannelSampler, CovarianceMatrix, LargeScaleFading, RingScatterParams,
};
use oso_core::quad::GaussLegendre;
use oso_core::rng::{Domain, SeedTree};
use oso_core::Complex64;
use proptest::prelude::*;

/// Composite trapezoid of the ring integrand, coded straight from the definition.
fn trapezoid_entry(pos: &[[f64; 2]], lambda: f64, ring: &RingScatterParams, m: usize, p: usize, n: usize) -> Complex64 {
    let (theta, delta, a) = (ring.nominal_aoa, ring.angular_spread, ring.mean_gain);
    let du = [pos[m][0] - pos[p][0], pos[m][1] - pos[p][1]];
    let f = |alpha: f64| {
        let k = [-(2.0 * PI / lambda) * (alpha + theta).cos(), -(2.0 * PI / lambda) * (alpha + theta).sin()];
        let phase = -(k[0] * du[0] + k[1] * du[1]);
        Complex64::new(phase.cos(), phase.sin())
    };
    let h = 2.0 * delta / n as f64;
    let mut s = (f(-delta) + f(delta)) * 0.5;
    for i in 1..n {
        s += f(-delta + i as f64 * h);
    }
    s * h * (a / (2.0 * delta))
}

fn table_ring() -> RingScatterParams {
    RingScatterParams::new(0.0, 10f64.to_radians(), 1.0).unwrap()
}

#[test]
fn half_wavelength_entry_matches_trapezoid_oracle() {
    let lambda = 0.02;
    let geom = ArrayGeometry::ula(4, 0.5, lambda).unwrap();
    let ring = table_ring();
    let r = covariance(&geom, &ring).unwrap();
    let oracle = trapezoid_entry(geom.positions(), lambda, &ring, 0, 1, 10_000);
    assert!((r.get(0, 1) - oracle).norm() < 1e-8, "{} vs {}", r.get(0, 1), oracle);
    // Default 4-element array too, at an off-broadside angle.
    let geom = ArrayGeometry::on_y_axis(&[-0.02, -0.01, 0.01, 0.02], lambda).unwrap();
    let ring = RingScatterParams::new(0.7, 10f64.to_radians(), 2.5).unwrap();
    let r = covariance(&geom, &ring).unwrap();
    for (m, p) in [(0, 1), (0, 3), (1, 2), (2, 3)] {
        let oracle = trapezoid_entry(geom.positions(), lambda, &ring, m, p, 100_000);
        assert!((r.get(m, p) - oracle).norm() < 1e-8, "({m},{p}) {} vs {}", r.get(m, p), oracle);
    }
}

#[test]
fn doubling_quadrature_nodes_changes_nothing() {
    let geom = ArrayGeometry::on_y_axis(&[-0.02, -0.01, 0.01, 0.02], 0.02).unwrap();
    for ring in [table_ring(), RingScatterParams::new(-1.0, 0.5, 1.0).unwrap()] {
        let a = covariance(&geom, &ring).unwrap();
        let b = covariance_with_rule(&geom, &ring, &GaussLegendre::new(258)).unwrap();
        assert!((a.matrix() - b.matrix()).norm() < 1e-10);
    }
}

#[test]
fn ula_formula_matches_geometry() {
    for (theta, delta) in [(0.0, 0.17), (0.9, 0.3), (-2.5, 1.2), (1.3, PI)] {
        let ring = RingScatterParams::new(theta, delta, 1.7).unwrap();
        for s in [0.25, 0.5, 1.0] {
            let geom = ArrayGeometry::ula(6, s, 0.1).unwrap();
            let a = covariance(&geom, &ring).unwrap();
            let b = covariance_ula(6, s, &ring).unwrap();
            assert!((a.matrix() - b.matrix()).norm() < 1e-10);
        }
    }
}

#[test]
fn isotropic_half_wavelength_decorrelates_on_average() {
    // A full ring at half-wavelength spacing gives [R]_{m,p} = a·J0(π|m-p|).
    let ring = RingScatterParams::new(0.0, PI, 1.0).unwrap();
    let r = covariance_ula(8, 0.5, &ring).unwrap();
    for m in 0..8 {
        for p in 0..8 {
            if m != p {
                let j0 = bessel_j0(PI * (m as f64 - p as f64).abs());
                assert!((r.get(m, p).re - j0).abs() < 1e-10);
                assert!(r.get(m, p).im.abs() < 1e-10);
            }
        }
    }
    // Mean off-diagonal power shrinks as M grows, so R/a approaches I in that sense.
    let off_power = |m: usize| {
        let r = covariance_ula(m, 0.5, &ring).unwrap();
        let total: f64 = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| r.get(i, j).norm_sqr()).sum();
        total / (m * (m - 1)) as f64
    };
    let (p4, p16, p64) = (off_power(4), off_power(16), off_power(64));
    assert!(p16 < p4 && p64 < p16 && p64 < 0.02, "{p4} {p16} {p64}");
}

/// `J0(x) = (1/π) ∫_0^π cos(x sin t) dt`; the periodic integrand makes the
/// trapezoid rule spectrally accurate.
fn bessel_j0(x: f64) -> f64 {
    let n = 400;
    let s: f64 = (0..n).map(|i| (x * (PI * i as f64 / n as f64).sin()).cos()).sum();
    s / n as f64
}

#[test]
fn sample_covariance_converges() {
    let geom = ArrayGeometry::on_y_axis(&[-0.02, -0.01, 0.01, 0.02], 0.02).unwrap();
    let ring = RingScatterParams::new(0.4, 0.3, 1.0).unwrap();
    let r = covariance(&geom, &ring).unwrap();
    let sampler = ChannelSampler::new(&r).unwrap();
    let mut rng = SeedTree::new(21).stream(Domain::Diagnostics, 0);
    let n = 100_000;
    let mut acc = DMatrix::<Complex64>::zeros(4, 4);
    for _ in 0..n {
        let h = sampler.sample(&mut rng);
        acc += h.as_vector() * h.as_vector().adjoint();
    }
    acc /= Complex64::new(n as f64, 0.0);
    let rel = (&acc - r.matrix()).norm() / r.matrix().norm();
    assert!(rel < 0.02, "relative Frobenius error {rel}");
}

#[test]
fn rayleigh_moments() {
    let mut rng = SeedTree::new(22).stream(Domain::Diagnostics, 1);
    let n = 100_000;
    let (mut mean, mut power, mut fourth) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
    for _ in 0..n {
        let z = sample_rayleigh(1, &mut rng)[0];
        mean += z;
        power += z.norm_sqr();
        fourth += z.norm_sqr().powi(2);
    }
    let n = n as f64;
    assert!((mean / n).norm() < 0.01);
    assert!((power / n - 1.0).abs() < 0.01);
    // |z|² ~ Exp(1) has second moment 2.
    assert!((fourth / n - 2.0).abs() < 0.05);
}

#[test]
fn shadowing_is_zero_mean_in_db() {
    let fading = LargeScaleFading::table_default();
    let mut rng = SeedTree::new(23).stream(Domain::Placement, 0);
    let d = 0.3;
    let pl = fading.pathloss_db(d).unwrap();
    let n = 100_000;
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..n {
        let x = -10.0 * large_scale_gain(d, &fading, &mut rng).unwrap().log10() - pl;
        sum += x;
        sum2 += x * x;
    }
    let mean = sum / n as f64;
    let sd = (sum2 / n as f64 - mean * mean).sqrt();
    assert!(mean.abs() < 0.1, "mean {mean}");
    assert!((sd - 10.0).abs() < 0.2, "sd {sd}");
}

#[test]
fn pathloss_slope_choice() {
    let f367 = LargeScaleFading::table_default();
    let f376 = LargeScaleFading::new(128.1, 37.6, 10.0).unwrap();
    assert!((f367.pathloss_db(1.0).unwrap() - 128.1).abs() < 1e-12);
    assert!((f376.pathloss_db(0.1).unwrap() - (128.1 - 37.6)).abs() < 1e-12);
    assert!((f367.mean_gain(0.1).unwrap() - 10f64.powf(-(128.1 - 36.7) / 10.0)).abs() < 1e-22);
}

fn arb_ring() -> impl Strategy<Value = RingScatterParams> {
    (-PI..PI - 1e-9, 0.01..PI, 0.1f64..10.0).prop_map(|(t, d, a)| RingScatterParams::new(t, d, a).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn covariance_is_hermitian_psd_with_pinned_diagonal(
        ring in arb_ring(),
        ys in prop::collection::vec(-0.05f64..0.05, 1..7),
    ) {
        let mut ys = ys;
        ys.sort_by(f64::total_cmp);
        ys.dedup_by(|a, b| (*a - *b).abs() < 1e-4);
        let geom = ArrayGeometry::on_y_axis(&ys, 0.02).unwrap();
        let r = covariance(&geom, &ring).unwrap();
        let m = r.matrix();
        prop_assert!((m - m.adjoint()).norm() <= 1e-12 * m.norm());
        for i in 0..ys.len() {
            prop_assert_eq!(r.get(i, i), Complex64::new(ring.mean_gain, 0.0));
        }
        let eig = m.clone().symmetric_eigen();
        prop_assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-9 * ring.mean_gain));
        // from_matrix accepts what covariance produces.
        prop_assert!(CovarianceMatrix::from_matrix(m.clone()).is_ok());
    }

    #[test]
    fn entries_bounded_by_gain(ring in arb_ring()) {
        let r = covariance_ula(5, 0.5, &ring).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                prop_assert!(r.get(i, j).norm() <= ring.mean_gain * (1.0 + 1e-12));
            }
        }
    }
}
