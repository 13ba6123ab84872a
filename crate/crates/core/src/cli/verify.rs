//! The invariant suite behind `masense verify`.

use std::io::Write;

use nalgebra::{Matrix3, Rotation3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::estimation::{
    angular_error, mle_estimate, monte_carlo_msae, sweep, synthesize_signal, Dataset, Experiment, McConfig, MleGrid,
    SignalOptions, Source, SweepConfig,
};
use crate::geometry::{
    apv_covariance, apv_covariance_quadratic, check_feasibility, AngleVector, CovarianceMatrix, DirectionVector,
    MovementRegion, Positions, Trajectory,
};
use crate::metrics::{
    fim_oracle, geometry_factor, isotropy_report, msaeb, msaeb_from_covariance, planar_decomposition, AngleGrid,
    SensingScenario,
};
use crate::sca::{
    optimize, surrogate_covariance, surrogate_objective, AngularRegion, GridLayout, OptimizationProblem,
};
use crate::trajectories::{gen_circle, gen_circle3, gen_upg, BenchmarkKind, BenchmarkSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<Vector3<f64>> {
    (0..n)
        .map(|_| Vector3::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
        .collect()
}

fn random_chi(rng: &mut ChaCha8Rng, lo_deg: f64, hi_deg: f64) -> AngleVector {
    AngleVector::from_degrees(rng.random_range(lo_deg..hi_deg), rng.random_range(0.0..360.0)).expect("in range")
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let axis = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    *Rotation3::from_scaled_axis(axis.normalize() * rng.random_range(0.0..3.1)).matrix()
}

type Check = fn(&mut ChaCha8Rng) -> Result<(bool, String)>;

fn frame_orthonormal(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let chi = random_chi(rng, 0.0, 180.0);
        let fr = chi.tangent_frame();
        let q = Matrix3::from_rows(&[fr.f.transpose(), fr.g.transpose(), chi.direction().as_vector().transpose()]);
        worst = worst.max((q * q.transpose() - Matrix3::identity()).amax());
    }
    Ok((worst <= 1e-12, format!("max error {worst:.2e}")))
}

fn covariance_forms(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(3..60);
        let r = random_points(rng, n, 0.3);
        let u = apv_covariance(&r);
        let scale = u.matrix().norm();
        let c = Vector3::new(rng.random_range(-5.0..5.0), 1.0, -2.0);
        let shifted: Vec<_> = r.iter().map(|p| p + c).collect();
        let q = random_rotation(rng);
        let rotated: Vec<_> = r.iter().map(|p| q * p).collect();
        worst = worst
            .max((apv_covariance(&shifted).matrix() - u.matrix()).amax() / scale)
            .max((apv_covariance(&rotated).matrix() - u.rotated(&q).matrix()).amax() / scale)
            .max((apv_covariance_quadratic(&r).matrix() - u.matrix()).amax() / scale);
    }
    Ok((worst <= 1e-12, format!("max relative error {worst:.2e}")))
}

fn rotational_invariance(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let r = random_points(rng, 20, 0.5);
        let chi = random_chi(rng, 5.0, 175.0);
        let q = random_rotation(rng);
        let rotated: Vec<_> = r.iter().map(|p| q * p).collect();
        let eta = DirectionVector::normalize(q * chi.direction().as_vector()).expect("unit");
        let chi_q = AngleVector::from_direction(&eta);
        let (a, b) = (
            msaeb_from_covariance(&apv_covariance(&r), chi, 1.0).msaeb,
            msaeb_from_covariance(&apv_covariance(&rotated), chi_q, 1.0).msaeb,
        );
        worst = worst.max(rel(a, b));
    }
    Ok((worst <= 1e-9, format!("max relative error {worst:.2e}")))
}

fn oracle_equivalence(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(8..=64);
        let r = random_points(rng, n, 0.05);
        let chi = random_chi(rng, 5.0, 175.0);
        let scen = SensingScenario::from_snr_db(0.05, rng.random_range(-10.0..20.0), 1e-5, n)?;
        let closed = msaeb(&r, chi, &scen)?;
        let beta = scen.channel_gain() * scen.tx_power().sqrt();
        let fim = fim_oracle(&r, chi, beta, &scen);
        worst = worst.max(rel(closed.crb_theta, fim.crb_theta())).max(rel(closed.crb_phi, fim.crb_phi()));
    }
    Ok((worst <= 1e-6, format!("max relative error {worst:.2e}")))
}

fn isotropy(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let iso = CovarianceMatrix::isotropic(0.7);
    let vals: Vec<f64> = (0..1000).map(|_| geometry_factor(&iso, random_chi(rng, 0.0, 180.0))).collect();
    let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    let spread = (hi - lo) / lo;
    let aniso = CovarianceMatrix::from_diagonal(Vector3::new(1.0, 1.02, 0.9));
    let axes = [
        AngleVector::from_degrees(90.0, 0.0)?,
        AngleVector::from_degrees(90.0, 90.0)?,
        AngleVector::from_degrees(0.0, 0.0)?,
    ];
    let expect = [1.0 / 1.02 + 1.0 / 0.9, 1.0 + 1.0 / 0.9, 1.0 + 1.0 / 1.02];
    let got: Vec<f64> = axes.iter().map(|c| geometry_factor(&aniso, *c)).collect();
    let axis_err = got.iter().zip(expect).map(|(g, e)| rel(*g, e)).fold(0.0, f64::max);
    let (amin, amax) = got.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    let circle3 = isotropy_report(&apv_covariance(&gen_circle3(1200, 1e-3, 1e-5)?), 1e-9);
    let pass = spread < 1e-9 && axis_err < 1e-12 && amax / amin > 1.001 && circle3.is_isotropic;
    Ok((
        pass,
        format!("spread {spread:.2e}, principal-axis error {axis_err:.2e}, circle3 deviation {:.2e}", circle3.deviation),
    ))
}

fn planar_monotone(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut ok = true;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let r: Vec<_> = random_points(rng, 30, 0.2).into_iter().map(|p| Vector3::new(p.x, p.y, 0.0)).collect();
        let u = apv_covariance(&r);
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        let dec = planar_decomposition(&u, phi)?;
        let f = |deg: f64| geometry_factor(&u, AngleVector::new(deg.to_radians(), phi).expect("in range"));
        let up: Vec<f64> = (0..50).map(|i| f(85.0 * i as f64 / 49.0)).collect();
        let down: Vec<f64> = (0..50).map(|i| f(95.0 + 85.0 * i as f64 / 49.0)).collect();
        ok &= up.windows(2).all(|w| w[1] > w[0]) && down.windows(2).all(|w| w[1] < w[0]);
        for i in 0..50 {
            let t = (85.0 * i as f64 / 49.0).to_radians();
            worst = worst.max(rel(dec.reconstruct(t), f(t.to_degrees())));
        }
    }
    Ok((ok && worst <= 1e-10, format!("monotone {ok}, reconstruction error {worst:.2e}")))
}

fn scale_law(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let r = random_points(rng, 25, 0.1);
        let c = rng.random_range(0.1..10.0);
        let scaled: Vec<_> = r.iter().map(|p| p * c).collect();
        let chi = random_chi(rng, 5.0, 175.0);
        let (f, g) = (geometry_factor(&apv_covariance(&r), chi), geometry_factor(&apv_covariance(&scaled), chi));
        worst = worst.max(rel(f, g * c * c));
    }
    Ok((worst <= 1e-12, format!("max relative error {worst:.2e}")))
}

fn generators(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let (delta, ts) = (1e-3, 1e-5);
    let mut ok = true;
    let mut chord = 0.0f64;
    for t in [gen_upg(144, delta, ts)?, gen_circle(144, delta, ts)?, gen_circle3(144, delta, ts)?] {
        let (lo, hi) = t.bounding_box();
        let region = MovementRegion::new((lo + hi) / 2.0, ((hi - lo) / 2.0).map(|h| h.max(1e-12)))?;
        ok &= check_feasibility(&t, &region, delta / ts * (1.0 + 1e-12)).is_feasible();
    }
    let circ = gen_circle(144, delta, ts)?;
    for w in circ.positions().windows(2) {
        chord = chord.max(((w[1] - w[0]).norm() - delta).abs());
    }
    let c3 = gen_circle3(144, delta, ts)?;
    let m = 144 / 3;
    for (i, w) in c3.positions().windows(2).enumerate() {
        if i % m != m - 1 {
            chord = chord.max(((w[1] - w[0]).norm() - delta).abs());
        }
    }
    for kind in BenchmarkKind::ALL.into_iter().filter(|k| k.is_planar()) {
        let b = BenchmarkSpec { kind, n: 144, delta, wavelength: 0.05, sampling_period: ts }.generate()?;
        let u = apv_covariance(&b);
        ok &= (0..3).all(|i| u.matrix()[(2, i)] == 0.0 && u.matrix()[(i, 2)] == 0.0);
    }
    Ok((ok && chord <= 1e-12, format!("feasible and planar {ok}, chord error {chord:.2e}")))
}

fn surrogate(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let (mut gap, mut major, mut grad) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let rp = random_points(rng, 12, 0.05);
        let r: Vec<_> = rp.iter().map(|p| p + Vector3::new(rng.random_range(-0.01..0.01), rng.random_range(-0.01..0.01), rng.random_range(-0.01..0.01))).collect();
        let d = apv_covariance(&r).matrix() - surrogate_covariance(&r, &rp)?;
        gap = gap.min(SymmetricEigen::new((d + d.transpose()) * 0.5).eigenvalues.min());
        let chi = random_chi(rng, 5.0, 175.0);
        let s = surrogate_objective(&r, &rp, chi)?;
        let f = geometry_factor(&apv_covariance(&r), chi);
        major = major.max((f - s.value) / f);
        let tight = surrogate_objective(&rp, &rp, chi)?.value;
        major = major.max(rel(tight, geometry_factor(&apv_covariance(&rp), chi)));
        let h = 1e-7;
        let (mut err, mut norm) = (0.0, 0.0);
        for n in 0..r.len() {
            for k in 0..3 {
                let (mut up, mut dn) = (r.clone(), r.clone());
                up[n][k] += h;
                dn[n][k] -= h;
                let fd = (surrogate_objective(&up, &rp, chi)?.value - surrogate_objective(&dn, &rp, chi)?.value) / (2.0 * h);
                err += (fd - s.gradient[n][k]).powi(2);
                norm += s.gradient[n][k].powi(2);
            }
        }
        grad = grad.max((err / norm).sqrt());
    }
    let pass = gap >= -1e-10 && major <= 1e-10 && grad <= 1e-5;
    Ok((pass, format!("min gap eigenvalue {gap:.2e}, majorization {major:.2e}, gradient {grad:.2e}")))
}

fn sca_small(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let p = OptimizationProblem {
        region: MovementRegion::cube(0.06)?,
        vmax: 2.0,
        ts: 1e-3,
        n: 121,
        angular: AngularRegion::from_degrees((0.0, 80.0), (0.0, 360.0), 10, GridLayout::Fibonacci)?,
        velocity_block: 10,
        epsilon: 1e-4,
        max_outer_iters: 15,
        dense_count: 200,
    };
    let out = optimize(&p)?;
    let feasible = check_feasibility(&out.trajectory, &p.region, p.vmax).is_feasible();
    let monotone = out.trace.is_monotone(1e-8);
    let first = out.trace.iterations[0].delta_grid;
    Ok((
        feasible && monotone && out.trace.final_delta() <= first,
        format!("{} iterations, {:.3e} -> {:.3e}", out.trace.outer_iterations(), first, out.trace.final_delta()),
    ))
}

fn mle_properties(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let t = gen_circle3(48, 0.4, 1e-3)?;
    let scen = SensingScenario::from_snr_db(1.0, 0.0, 1e-3, 48)?;
    let grid = MleGrid { resolution_deg: 4.0, refinements: 1, ..MleGrid::default() };
    let mut ok = true;
    for s in 0..10 {
        let chi = random_chi(rng, 0.0, 180.0);
        let mut sig = synthesize_signal(&t, chi, &scen, s, SignalOptions::default())?;
        let a = mle_estimate(&sig, &t, &grid)?;
        let c = Complex64::cis(rng.random_range(0.0..std::f64::consts::TAU));
        sig.samples.iter_mut().for_each(|v| *v *= c);
        ok &= angular_error(&a.eta, &mle_estimate(&sig, &t, &grid)?.eta) < 1e-9;
    }
    let mut tri = true;
    for _ in 0..1000 {
        let (a, b, c) = (
            random_chi(rng, 0.0, 180.0).direction(),
            random_chi(rng, 0.0, 180.0).direction(),
            random_chi(rng, 0.0, 180.0).direction(),
        );
        tri &= angular_error(&a, &b) == angular_error(&b, &a)
            && angular_error(&a, &c) <= angular_error(&a, &b) + angular_error(&b, &c) + 1e-10;
    }
    Ok((ok && tri, format!("phase invariant {ok}, metric {tri}")))
}

fn msae_above_bound(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = f64::INFINITY;
    for s in 0..20 {
        let n = 48;
        let pts = random_points(rng, n, 0.6);
        let chi = random_chi(rng, 10.0, 170.0);
        let scen = SensingScenario::from_snr_db(1.0, rng.random_range(0.0..10.0), 1e-3, n)?;
        let mut mc = McConfig::new(200, 100 + s);
        mc.grid = MleGrid { resolution_deg: 3.0, ..MleGrid::default() };
        let r = monte_carlo_msae(&pts, chi, &scen, &mc)?;
        worst = worst.min(r.msae / r.msaeb);
    }
    Ok((worst >= 0.8, format!("smallest MSAE/MSAEB {worst:.3}")))
}

fn datasets_deterministic(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut mc = McConfig::new(8, 5);
    mc.grid = MleGrid { resolution_deg: 6.0, refinements: 1, ..MleGrid::default() };
    mc.snr_db = vec![0.0];
    let cfg = SweepConfig {
        sources: vec![
            Source::new("circle3", &gen_circle3(48, 0.4, 1e-3)?),
            Source::new("circle", &gen_circle(48, 0.4, 1e-3)?),
        ],
        wavelength: 1.0,
        sampling_period: 1e-3,
        target: AngleVector::from_degrees(30.0, 40.0)?,
        theta_deg: vec![10.0, 50.0],
        phi_deg: 0.0,
        snr_db: 0.0,
        mc,
        correlation_grid: AngleGrid::from_degrees((0.0, 180.0, 7), (0.0, 360.0, 9))?,
    };
    let mut ok = true;
    for exp in [Experiment::MsaeVsSnr, Experiment::MsaeVsTheta, Experiment::CorrelationFig] {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        let d = sweep(exp, &cfg)?;
        d.write_csv(&mut a)?;
        sweep(exp, &cfg)?.write_csv(&mut b)?;
        ok &= a == b && Dataset::read_csv(exp, a.as_slice())? == d;
    }
    let t = Trajectory::through_points(gen_circle(40, 0.1, 1e-3)?.positions(), 1e-3)?;
    let mut buf = Vec::new();
    crate::geometry::io::write_trajectory_csv(&t, &mut buf)?;
    let back = crate::geometry::io::read_trajectory_csv(buf.as_slice())?;
    ok &= back.positions().iter().zip(t.positions()).all(|(a, b)| (a - b).norm() <= 1e-12);
    Ok((ok, format!("byte-identical and round-trip {ok}")))
}

const CHECKS: &[(&str, Check)] = &[
    ("tangent frame orthonormal", frame_orthonormal),
    ("covariance translation/rotation/forms", covariance_forms),
    ("bound rotation invariance", rotational_invariance),
    ("closed form matches Fisher oracle", oracle_equivalence),
    ("isotropy both directions", isotropy),
    ("planar monotonicity and decomposition", planar_monotone),
    ("scale law", scale_law),
    ("benchmark generator invariants", generators),
    ("surrogate gap, majorization, gradient", surrogate),
    ("SCA monotone and feasible", sca_small),
    ("MLE phase invariance, error metric", mle_properties),
    ("MSAE at least 0.8 MSAEB at high SNR", msae_above_bound),
    ("datasets deterministic and round-trip", datasets_deterministic),
];

/// Runs every check with generators derived from `seed`.
pub fn run_checks(seed: u64) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .enumerate()
        .map(|(i, (name, f))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let (pass, detail) = f(&mut rng).unwrap_or_else(|e| (false, format!("error: {e}")));
            CheckResult { name, pass, detail }
        })
        .collect()
}

/// `check,status,detail`.
pub fn write_report<W: Write>(results: &[CheckResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check", "status", "detail"])?;
    for r in results {
        w.write_record([r.name, if r.pass { "PASS" } else { "FAIL" }, r.detail.as_str()])?;
    }
    w.flush()?;
    Ok(())
}
