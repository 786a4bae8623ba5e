mod common;

use common::*;
use klfield::linalg::Matrix;
use klfield::simulate::*;
use klfield::spectral::{nystrom_spectrum, Spectrum};
use klfield::{Domain, Grid, Kernel, KlError, Rule};
use std::sync::OnceLock;

const SEED: u64 = 20_240_917;

fn spectrum_500() -> &'static Spectrum {
    static S: OnceLock<Spectrum> = OnceLock::new();
    S.get_or_init(|| nystrom_spectrum(&reference_kernel(), &trapezoid(500), 60).unwrap())
}

fn model(n: usize) -> KlModel {
    KlModel::new(spectrum_500().clone(), n).unwrap()
}

fn bits(m: &Matrix) -> Vec<u64> {
    m.as_slice().iter().map(|v| v.to_bits()).collect()
}

#[test]
fn projection_recovers_coefficients() {
    let m = model(20);
    let batch = sample_batch(&m, 100, SEED).unwrap();
    for r in 0..100 {
        let xi_hat = project_coefficients(&m, batch.fields().row(r)).unwrap();
        for (a, b) in xi_hat.iter().zip(batch.xi().row(r)) {
            assert!((a - b).abs() <= 1e-8);
        }
    }
}

#[test]
fn projection_of_a_single_mode() {
    let m = model(6);
    let s = m.spectrum();
    let field: Vec<f64> = s
        .eigenfunction_values(0)
        .iter()
        .map(|e| e * s.eigenvalues()[0].sqrt())
        .collect();
    let xi = project_coefficients(&m, &field).unwrap();
    assert!((xi[0] - 1.0).abs() < 1e-8);
    assert!(xi[1..].iter().all(|x| x.abs() < 1e-8));
    assert!(project_coefficients(&m, &field[1..]).is_err());
}

#[test]
fn projection_is_orthogonal_for_arbitrary_fields() {
    let m = model(10);
    let s = m.spectrum();
    let grid = s.grid();
    let field: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&t| (3.0 * t).sin() + t * t)
        .collect();
    let xi = project_coefficients(&m, &field).unwrap();
    let approx = m.synthesize(&xi).unwrap();
    let residual: Vec<f64> = field.iter().zip(&approx).map(|(a, b)| a - b).collect();
    for i in 0..10 {
        let ip = grid
            .inner_product(&residual, s.eigenfunction_values(i))
            .unwrap();
        assert!(ip.abs() <= 1e-8, "mode {i}: {ip}");
    }
    // the projection is the best rank-10 approximation: perturbing a coefficient hurts
    let base = grid.norm(&residual).unwrap();
    let mut worse = xi.clone();
    worse[3] += 1e-3;
    let alt = m.synthesize(&worse).unwrap();
    let alt_res: Vec<f64> = field.iter().zip(&alt).map(|(a, b)| a - b).collect();
    assert!(grid.norm(&alt_res).unwrap() > base);
}

#[test]
fn constant_kernel_gives_flat_realizations() {
    let d = Domain::new(0.0, 4.0).unwrap();
    let k = Kernel::constant(2.0, d).unwrap();
    let s = nystrom_spectrum(&k, &Grid::new(d, 25, Rule::Trapezoid).unwrap(), 5).unwrap();
    let m = KlModel::new(s, 1).unwrap();
    assert!(
        KlModel::new(m.spectrum().clone(), 2).is_err(),
        "second mode is numerically zero"
    );
    let batch = sample_batch(&m, 50, 3).unwrap();
    for r in 0..50 {
        let row = batch.fields().row(r);
        // √σ²·|D| · ξ · 1/√|D| = √2 · ξ
        let want = 2f64.sqrt() * batch.xi()[(r, 0)];
        assert!(row.iter().all(|v| (v - want).abs() < 1e-12));
    }
}

#[test]
fn batches_are_bitwise_reproducible() {
    let m = model(8);
    let a = sample_batch(&m, 1, SEED).unwrap();
    let b = sample_batch(&m, 1, SEED).unwrap();
    assert_eq!(bits(a.fields()), bits(b.fields()));

    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let wide = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let a = serial.install(|| sample_batch(&m, 333, SEED).unwrap());
    let b = wide.install(|| sample_batch(&m, 333, SEED).unwrap());
    assert_eq!(bits(a.xi()), bits(b.xi()));
    assert_eq!(bits(a.fields()), bits(b.fields()));

    let c = sample_batch(&m, 333, SEED + 1).unwrap();
    assert_ne!(bits(a.fields()), bits(c.fields()));
    // rows are addressable: a longer batch extends a shorter one
    let d = sample_batch(&m, 10, SEED).unwrap();
    assert_eq!(bits(d.xi())[..], bits(a.xi())[..80]);
    assert_eq!(a.xi()[(5, 3)], standard_normal(SEED, 5, 3));
}

#[test]
fn batch_rows_follow_the_synthesis_formula() {
    let m = model(6);
    let batch = sample_batch(&m, 5, SEED).unwrap();
    for r in 0..5 {
        assert_eq!(
            batch.fields().row(r),
            &m.synthesize(batch.xi().row(r)).unwrap()[..]
        );
    }
    assert!(sample_batch(&m, 0, SEED).is_err());
}

#[test]
fn model_variance_bounds() {
    let k = reference_kernel();
    for n in [1, 6, 30, 60] {
        let m = model(n);
        for &t in &[0.0, 0.05, 0.333, 0.5, 0.999, 1.0] {
            let v = m.variance_at(t).unwrap();
            assert!(
                v >= 0.0 && v <= k.eval(t, t) + 1e-8,
                "N = {n}, t = {t}: {v}"
            );
        }
    }
    assert!(KlModel::new(spectrum_500().clone(), 0).is_err());
    assert!(KlModel::new(spectrum_500().clone(), 61).is_err());
}

#[test]
fn pointwise_moments_match_the_model() {
    let m = model(6);
    let samples = 20_000;
    let batch = sample_batch(&m, samples, SEED).unwrap();
    let mf = samples as f64;
    let v = m.node_variances();
    let n = m.grid_len();
    for j in (0..n).step_by(7) {
        let col: Vec<f64> = (0..samples).map(|r| batch.fields()[(r, j)]).collect();
        let mean = col.iter().sum::<f64>() / mf;
        let var = col.iter().map(|x| x * x).sum::<f64>() / mf;
        assert!(
            mean.abs() <= 4.0 * (v[j] / mf).sqrt(),
            "node {j}: mean {mean}"
        );
        assert!(
            (var - v[j]).abs() <= 4.0 * v[j] * (2.0 / mf).sqrt(),
            "node {j}: var {var}"
        );
    }

    // centre of the interval, three standard errors
    let mid = m
        .spectrum()
        .grid()
        .nodes()
        .iter()
        .position(|&t| t >= 0.5)
        .unwrap();
    let v_mid = m.variance_at(0.5).unwrap();
    let col = m.synthesize_at(&[1.0; 6], &[0.5]).unwrap();
    assert!(col[0].is_finite());
    let at_half: Vec<f64> = (0..samples)
        .map(|r| m.synthesize_at(batch.xi().row(r), &[0.5]).unwrap()[0])
        .collect();
    let var = at_half.iter().map(|x| x * x).sum::<f64>() / mf;
    assert!(
        (var - v_mid).abs() <= 3.0 * v_mid * (2.0 / mf).sqrt(),
        "{var} vs {v_mid}"
    );
    assert!(mid > 0);
}

#[test]
fn coefficient_moments_are_standard() {
    let batch = sample_batch(&model(6), 20_000, SEED).unwrap();
    let stats = coefficient_statistics(&batch).unwrap();
    assert!(stats.passed(), "{stats:?}");
    assert_eq!(stats.means.len(), 6);
    assert_eq!(stats.second_moments.len(), 6);
}

#[test]
fn degenerate_statistics() {
    let m = model(4);
    let tiny = sample_batch(&m, 2, SEED).unwrap();
    let stats = coefficient_statistics(&tiny).unwrap();
    assert!(stats.mean_tolerance.is_finite() && stats.variance_tolerance.is_finite());
    assert!((stats.mean_tolerance - 4.0 / 2f64.sqrt()).abs() < 1e-15);

    let zeros = SampleBatch::from_coefficients(m.clone(), Matrix::zeros(500, 4), 0).unwrap();
    let stats = coefficient_statistics(&zeros).unwrap();
    assert!(stats.means.iter().all(|&x| x == 0.0));
    assert!(stats.variances.iter().all(|&x| x == 0.0));
    assert_eq!(stats.variance_flags, vec![0, 1, 2, 3]);
    assert!(!stats.passed());

    let one = sample_batch(&m, 1, SEED).unwrap();
    assert!(coefficient_statistics(&one).is_err());
    assert!(matches!(
        empirical_covariance(&one),
        Err(KlError::InvalidParameter(_))
    ));
}

#[test]
fn covariance_matches_truncated_kernel() {
    let batch = sample_batch(&model(6), 20_000, SEED).unwrap();
    let cov = empirical_covariance(&batch).unwrap();
    assert!(
        cov.within_envelope(),
        "{} > {}",
        cov.sup_vs_truncated,
        cov.envelope
    );
    assert_eq!(cov.matrix.asymmetry(), 0.0);
}

#[test]
fn marginal_is_normal_at_the_centre() {
    let batch = sample_batch(&model(6), 10_000, SEED).unwrap();
    let ks = marginal_normality(&batch, 0.5).unwrap();
    assert!(ks.passed(), "{ks:?}");
    assert!((ks.threshold - 0.0163).abs() < 1e-12);
    assert!(
        (ks.variance - 0.960_328_306).abs() < 1e-6,
        "v_6(1/2) from LAPACK eigenpairs"
    );
    assert!(marginal_normality(&batch, 1.5).is_err());

    let few = sample_batch(&model(6), 99, SEED).unwrap();
    assert!(marginal_normality(&few, 0.5).is_err());
}

#[test]
fn uniform_coefficients_fail_the_normality_check() {
    let m = model(6);
    let rows = 10_000;
    let mut xi = Matrix::zeros(rows, 6);
    // unit-variance uniforms from a low-discrepancy sequence
    let golden = [
        0.618_033_988_749_894_9,
        0.754_877_666_246_692_7,
        0.569_840_290_998_053_3,
        0.438_155_979_057_061_2,
        0.324_717_957_244_746,
        0.236_067_977_499_789_7,
    ];
    for r in 0..rows {
        for (i, g) in golden.iter().enumerate() {
            let u = ((r as f64 + 0.5) * g + 0.123 * i as f64).fract();
            xi[(r, i)] = 3f64.sqrt() * (2.0 * u - 1.0);
        }
    }
    let batch = SampleBatch::from_coefficients(m, xi, 0).unwrap();
    let ks = marginal_normality(&batch, 0.5).unwrap();
    assert!(!ks.passed(), "{ks:?}");
}

#[test]
fn refinement_telescopes() {
    let s = spectrum_500();
    let pts = klfield::quadrature::uniform_points(unit(), 57);
    let same = refinement_trajectories(s, &[6, 6], SEED, 3, &pts).unwrap();
    assert_eq!(same.curves[0], same.curves[1]);

    let r = refinement_trajectories(s, &[2, 4], SEED, 3, &pts).unwrap();
    let e = s.evaluate_modes(&pts, 4).unwrap();
    let lam = s.eigenvalues();
    for p in 0..pts.len() {
        let added: f64 = (2..4).map(|i| lam[i].sqrt() * r.xi[i] * e[(p, i)]).sum();
        assert!((r.curves[1][p] - r.curves[0][p] - added).abs() < 1e-10);
    }
    // the shared coefficients are those of realization 3 in a batch with the same seed
    let batch = sample_batch(&model(4), 4, SEED).unwrap();
    assert_eq!(&r.xi[..], batch.xi().row(3));

    assert!(refinement_trajectories(s, &[4, 2], SEED, 0, &pts).is_err());
    assert!(refinement_trajectories(s, &[], SEED, 0, &pts).is_err());
    assert!(refinement_trajectories(s, &[0, 2], SEED, 0, &pts).is_err());
    assert!(refinement_trajectories(s, &[2, 61], SEED, 0, &pts).is_err());
}

#[test]
fn refinement_steps_shrink() {
    let s = spectrum_500();
    let grid = s.grid();
    let r = refinement_trajectories(s, &[2, 6, 20, 50], SEED, 0, grid.nodes()).unwrap();
    let dist = |a: usize, b: usize| {
        let d: Vec<f64> = r.curves[a]
            .iter()
            .zip(&r.curves[b])
            .map(|(x, y)| x - y)
            .collect();
        grid.norm(&d).unwrap()
    };
    assert!(dist(3, 2) <= dist(2, 1), "{} > {}", dist(3, 2), dist(2, 1));
}
