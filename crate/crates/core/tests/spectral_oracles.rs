use biphoton::spectral::{nm_to_omega, omega_to_nm, SpectralGrid};
use biphoton::{
    apply_dbs, build_amplitudes, compute_overlap, concurrence, dm_from_overlap, pump_sweep,
    source_overlap, BiphotonAmplitude, Complex64, DichroicSplitter, OverlapResult, PhaseMatchModel,
    SpectralError,
};
use nalgebra::DMatrix;

fn paper_grid(model: &PhaseMatchModel) -> SpectralGrid {
    model.covering_grid(776.0, 778.0, 6.0, 513).unwrap()
}

/// Composite Simpson rule on an odd number of uniform samples.
fn simpson(axis: &[f64], f: &[f64]) -> f64 {
    assert!(axis.len() % 2 == 1);
    let h = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
    let mut acc = f[0] + f[f.len() - 1];
    for k in 1..f.len() - 1 {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f[k];
    }
    acc * h / 3.0
}

fn simpson_2d(axis: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    let inner: Vec<f64> = axis
        .iter()
        .map(|&w2| {
            let row: Vec<f64> = axis.iter().map(|&w1| f(w1, w2)).collect();
            simpson(axis, &row)
        })
        .collect();
    simpson(axis, &inner)
}

#[test]
fn symmetric_model_is_maximally_overlapping() {
    let m = PhaseMatchModel::symmetric();
    let grid = paper_grid(&m);
    let amp = build_amplitudes(&m, &grid).unwrap();
    assert_eq!(amp.swap_asymmetry_norm().unwrap(), 0.0);
    let split = apply_dbs(&amp, &DichroicSplitter::default()).unwrap();
    let ov = compute_overlap(&split, 0.0).unwrap();
    assert!((ov.q.norm() - 0.5).abs() < 1e-6, "|q| = {}", ov.q.norm());
    let c = concurrence(&dm_from_overlap(&ov).unwrap());
    assert!((c - 1.0).abs() < 1e-6);
}

#[test]
fn symmetric_sweep_has_unit_overlap_everywhere() {
    let m = PhaseMatchModel::symmetric();
    let report = pump_sweep(&m, &paper_grid(&m), 776.0, 778.0, 5).unwrap();
    for s in &report.steps {
        assert!(
            (s.overlap_2q - 1.0).abs() < 1e-9,
            "{}: {}",
            s.pump_nm,
            s.overlap_2q
        );
    }
}

#[test]
fn source_probabilities_sum_to_one_on_all_presets() {
    for name in PhaseMatchModel::PRESETS {
        let m = PhaseMatchModel::preset(name).unwrap();
        let grid = m.covering_grid(m.pump_nm, m.pump_nm, 6.0, 513).unwrap();
        let ov = source_overlap(&build_amplitudes(&m, &grid).unwrap()).unwrap();
        assert!((ov.p_hv + ov.p_vh - 1.0).abs() < 1e-6, "{name}");
        assert!(ov.cauchy_schwarz_holds(1e-12), "{name}");
    }
}

#[test]
fn grid_doubling_is_converged_on_all_presets() {
    for name in PhaseMatchModel::PRESETS {
        let m = PhaseMatchModel::preset(name).unwrap();
        let coarse = m.covering_grid(m.pump_nm, m.pump_nm, 6.0, 385).unwrap();
        let fine = coarse.refined();
        let a = source_overlap(&build_amplitudes(&m, &coarse).unwrap()).unwrap();
        let b = source_overlap(&build_amplitudes(&m, &fine).unwrap()).unwrap();
        assert!((a.p_hv - b.p_hv).abs() < 1e-4, "{name}");
        assert!((a.p_vh - b.p_vh).abs() < 1e-4, "{name}");
        assert!((a.q.norm() - b.q.norm()).abs() < 1e-4, "{name}");
    }
}

#[test]
fn normalization_matches_a_finer_simpson_integral() {
    // Broad 5 nm channels on a 257-point grid; the normalization constant
    // is re-integrated on a 1025-point grid with Simpson's rule.
    let mut m = PhaseMatchModel::symmetric();
    for ch in [&mut m.hv, &mut m.vh] {
        ch.width_nm = 5.0;
    }
    m.pump_linewidth_nm = 0.6;
    let grid = m.covering_grid(m.pump_nm, m.pump_nm, 5.0, 257).unwrap();
    let amp = build_amplitudes(&m, &grid).unwrap();

    let (i0, j0) = amp.a_hv().map(|z| z.re).iamax_full();
    let (w1, w2) = (grid.omega1()[i0], grid.omega2()[j0]);
    let scale = amp.a_hv()[(i0, j0)].re / m.raw_amplitudes(w1, w2).0;

    let (lo, hi) = grid.omega1_range();
    let axis: Vec<f64> = (0..1025)
        .map(|k| lo + (hi - lo) * k as f64 / 1024.0)
        .collect();
    let total = simpson_2d(&axis, |a, b| (scale * m.raw_amplitudes(a, b).0).powi(2));
    assert!((total - m.hv_weight).abs() < 1e-6, "{total}");
}

fn gaussian(x: f64, mu: f64, s: f64) -> f64 {
    (-(x - mu).powi(2) / (4.0 * s * s)).exp()
}

/// Overlap of two unit-normalized Gaussian amplitudes with intensity rms
/// widths `s1`, `s2` and center offset `d`.
fn gaussian_overlap(s1: f64, s2: f64, d: f64) -> f64 {
    let v = s1 * s1 + s2 * s2;
    (2.0 * s1 * s2 / v).sqrt() * (-d * d / (4.0 * v)).exp()
}

#[test]
fn offset_gaussians_match_the_closed_form_overlap() {
    let grid = SpectralGrid::from_wavelength_span(1500.0, 1620.0, 1025).unwrap();
    let (ws, wi) = (nm_to_omega(1537.0), nm_to_omega(1575.0));
    let (sa, sb, sc, sd) = (2.0e12, 2.4e12, 2.6e12, 1.8e12);
    let (d1, d2) = (1.5e12, -2.2e12);
    let axis = grid.omega1().to_vec();
    let n = axis.len();
    let a_hv = DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(gaussian(axis[i], ws, sa) * gaussian(axis[j], wi, sb), 0.0)
    });
    // A_VH(w1, w2) with the V photon at w2 on the short-wavelength side.
    let a_vh = DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(
            gaussian(axis[j], ws + d1, sc) * gaussian(axis[i], wi + d2, sd),
            0.0,
        )
    });
    let amp = BiphotonAmplitude::from_samples(grid, a_hv, a_vh)
        .unwrap()
        .normalize()
        .unwrap();
    let split = apply_dbs(&amp, &DichroicSplitter::default()).unwrap();
    let ov = compute_overlap(&split, 0.0).unwrap();

    use std::f64::consts::PI;
    let n_hv = 2.0 * PI * sa * sb;
    let n_vh = 2.0 * PI * sc * sd;
    let expected_q =
        gaussian_overlap(sa, sc, d1) * gaussian_overlap(sb, sd, d2) * (n_hv * n_vh).sqrt()
            / (n_hv + n_vh);
    assert!((ov.p_hv - n_hv / (n_hv + n_vh)).abs() < 1e-5);
    assert!(
        (ov.q.norm() - expected_q).abs() < 1e-5,
        "{} vs {expected_q}",
        ov.q.norm()
    );
}

#[test]
fn paper_preset_passes_the_dichroic_audit() {
    let m = PhaseMatchModel::paper();
    let amp = build_amplitudes(&m, &paper_grid(&m)).unwrap();
    let split = apply_dbs(&amp, &DichroicSplitter::default()).unwrap();
    assert!(split.leakage < 0.05, "{}", split.leakage);
    let ov = compute_overlap(&split, 0.0).unwrap();
    assert!((ov.p_hv + ov.p_vh - 1.0).abs() < 1e-12);
}

#[test]
fn degenerate_preset_fails_the_dichroic_audit() {
    let m = PhaseMatchModel::degenerate();
    let grid = m.covering_grid(m.pump_nm, m.pump_nm, 6.0, 513).unwrap();
    let amp = build_amplitudes(&m, &grid).unwrap();
    for cut in [1560.0, 1555.8] {
        let dbs = DichroicSplitter {
            cut_nm: cut,
            ..DichroicSplitter::default()
        };
        assert!(matches!(
            apply_dbs(&amp, &dbs),
            Err(SpectralError::LeakageThresholdExceeded { .. })
        ));
    }
}

#[test]
fn degenerate_guard_leakage_matches_direct_integration() {
    // With the cut at the degeneracy point and a guard band of 0.6745 rms
    // widths, about half of the pairs have a photon inside the band.
    let m = PhaseMatchModel::degenerate();
    let grid = m.covering_grid(m.pump_nm, m.pump_nm, 6.0, 513).unwrap();
    let amp = build_amplitudes(&m, &grid).unwrap();
    let dbs = DichroicSplitter {
        cut_nm: 1555.8,
        guard_nm: 0.6745 * m.hv.width_nm,
        ..DichroicSplitter::default()
    };
    let split = dbs.route(&amp).unwrap();

    let axis = grid.omega1();
    let w: Vec<f64> = (0..axis.len())
        .map(|k| {
            let left = if k > 0 { axis[k] - axis[k - 1] } else { 0.0 };
            let right = if k + 1 < axis.len() {
                axis[k + 1] - axis[k]
            } else {
                0.0
            };
            0.5 * (left + right)
        })
        .collect();
    let guard = |x: f64| (omega_to_nm(x) - 1555.8).abs() <= dbs.guard_nm;
    // Power fractions reaching different arms and the same arm; the grid
    // line on the cut itself is split evenly.
    let (mut inside, mut same_arm, mut total) = (0.0, 0.0, 0.0);
    for j in 0..axis.len() {
        let r2 = dbs.signal_fraction(axis[j]);
        for i in 0..axis.len() {
            let r1 = dbs.signal_fraction(axis[i]);
            let a = (amp.a_hv()[(i, j)] + amp.a_vh()[(i, j)]).norm_sqr() * w[i] * w[j];
            total += a;
            same_arm += a * (r1 * r2 + (1.0 - r1) * (1.0 - r2));
            if guard(axis[i]) || guard(axis[j]) {
                inside += a * (r1 * (1.0 - r2) + (1.0 - r1) * r2);
            }
        }
    }
    assert!((split.same_port_weight - same_arm / total).abs() < 1e-9);
    assert!((split.guard_weight - inside / total).abs() < 1e-9);
    assert!(
        (split.leakage - 0.5).abs() < 0.05,
        "{} = {} + {}",
        split.leakage,
        split.same_port_weight,
        split.guard_weight
    );
    assert!(!split.approximation_valid());
}

#[test]
fn coarse_sweep_optimum_agrees_with_dense_sweep() {
    let m = PhaseMatchModel::paper();
    let grid = paper_grid(&m);
    let coarse = pump_sweep(&m, &grid, 776.0, 778.0, 11).unwrap();
    let dense = pump_sweep(&m, &grid, 776.0, 778.0, 101).unwrap();
    let step = 2.0 / 10.0;
    assert!((coarse.optimum_pump_nm - dense.optimum_pump_nm).abs() <= step);
    assert!((dense.optimum_pump_nm - 777.9).abs() <= step);
    assert!((dense.optimum_overlap_2q - 0.8).abs() < 0.01);
}

#[test]
fn gamma_rotates_only_the_coherence() {
    let m = PhaseMatchModel::paper();
    let split = apply_dbs(
        &build_amplitudes(&m, &paper_grid(&m)).unwrap(),
        &DichroicSplitter::default(),
    )
    .unwrap();
    let a = compute_overlap(&split, 0.0).unwrap();
    for g in [0.3, 1.7, -2.9] {
        let b = compute_overlap(&split, g).unwrap();
        assert_eq!((a.p_hv, a.p_vh), (b.p_hv, b.p_vh));
        assert!((b.q - a.q * Complex64::from_polar(1.0, g)).norm() < 1e-15);
        let c: OverlapResult = a.with_added_phase(g);
        assert!((c.q - b.q).norm() < 1e-15);
    }
}
