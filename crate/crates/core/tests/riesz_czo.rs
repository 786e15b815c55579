use std::f64::consts::PI;

use qspace::predual::{default_family, l1alpha_norm, p_alpha_upper};
use qspace::riesz::{
    c_d_constant, counterexample_blowup, counterexample_f, czo_decay_check, even_scales,
    naive_fs_split, riesz_kernel_constant, riesz_l1alpha_report, spatial_window, terms_disjoint,
    wavelet_matrix,
};
use qspace::spectral::riesz_apply;
use qspace::wavelet::{Basis, BasisSpec, CoefficientField, ScaleWindow};
use qspace::{GridFunction, GridSpec, WaveletIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_mean_zero(spec: GridSpec, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..spec.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut f = GridFunction::from_fn(spec, |_| 0.0);
    f.samples_mut().copy_from_slice(&noise);
    let m = f.mean();
    f.add_scaled(-m, &GridFunction::from_fn(spec, |_| 1.0));
    f
}

#[test]
fn hilbert_transform_of_sine() {
    let spec = GridSpec::new(1, 8, 1).unwrap();
    let s = GridFunction::from_fn(spec, |x| (3.0 * PI * x[0]).sin());
    let c = GridFunction::from_fn(spec, |x| -(3.0 * PI * x[0]).cos());
    assert!(riesz_apply(&s, 1).max_abs_diff(&c) < 1e-12);
    assert!(riesz_apply(&s, 0).max_abs_diff(&s) < 1e-15);
}

#[test]
fn riesz_identities() {
    for n in [1usize, 2] {
        let spec = GridSpec::new(n, if n == 1 { 9 } else { 5 }, 0).unwrap();
        let f = random_mean_zero(spec, 1);
        let g = random_mean_zero(spec, 2);
        let mut sum = GridFunction::zeros(spec);
        for i in 1..=n {
            let rf = riesz_apply(&f, i);
            assert!((rf.inner(&g) + f.inner(&riesz_apply(&g, i))).abs() < 1e-10);
            sum.add_scaled(1.0, &riesz_apply(&rf, i));
        }
        // Nyquist bins are zeroed by the multiplier, so compare on their complement.
        let nyq = qspace::spectral::apply_multiplier(&f, |_, nyq| {
            num_complex::Complex64::new(if nyq { 0.0 } else { 1.0 }, 0.0)
        });
        assert!(sum.max_abs_diff(&nyq.scaled(-1.0)) < 1e-10, "n={n}");
    }
}

#[test]
fn daubechies_matrix_decays_off_the_diagonal() {
    let basis = Basis::build(BasisSpec::daubechies(1, 4, 12, 3)).unwrap();
    let w = ScaleWindow::new(2, 5);
    let idx = spatial_window(&basis, w, 1.0).unwrap();
    let m = wavelet_matrix(&basis, 1, &idx, &idx, w).unwrap();
    assert!(m.antisymmetry_defect.unwrap() < 1e-8);
    let rep = czo_decay_check(&m, 1, None);
    assert!(rep.c.is_finite() && rep.c > 0.0);
    assert!(m.max_beyond_band(2) > 0.0);
    let diag = |j: i32| {
        m.entries
            .iter()
            .filter(|((r, c), _)| r.j() == j && c.j() == j && r.k()[0] + 1 == c.k()[0])
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    };
    // Nearest-neighbour entries at the same scale are scale invariant.
    assert!((diag(3) - diag(4)).abs() < 1e-3 * diag(3));
    let near = m.get(&WaveletIndex::new(1, 4, &[0]).unwrap(), &WaveletIndex::new(1, 4, &[1]).unwrap()).abs();
    let far = m.get(&WaveletIndex::new(1, 4, &[0]).unwrap(), &WaveletIndex::new(1, 4, &[12]).unwrap()).abs();
    assert!(far < near);
}

#[test]
fn meyer_matrix_is_band_diagonal() {
    let basis = Basis::build(BasisSpec::meyer(1, 10, 0)).unwrap();
    let w = ScaleWindow::new(0, 4);
    let idx = spatial_window(&basis, w, 1.0).unwrap();
    let m = wavelet_matrix(&basis, 1, &idx, &idx, w).unwrap();
    assert!(m.max_beyond_band(2) == 0.0);
    let rep = czo_decay_check(&m, 1, None);
    assert!(rep.c.is_finite() && rep.c > 0.0);
    assert!(rep.by_band.iter().all(|(gap, v)| gap.abs() < 2 || *v == 0.0));
    assert!(wavelet_matrix(&basis, 2, &idx, &idx, w).is_err());
}

#[test]
fn counterexample_terms() {
    let basis = Basis::build(BasisSpec::daubechies(1, 4, 14, 5)).unwrap();
    let f0 = counterexample_f(&basis, &[0]).unwrap();
    let sup = f0.linf_norm();
    for j in [0u32, 2, 4] {
        let f = counterexample_f(&basis, &even_scales(j)).unwrap();
        assert!((f.linf_norm() - sup).abs() < 1e-12);
        assert!(terms_disjoint(&basis, &even_scales(j)).unwrap());
    }
    assert!(counterexample_f(&Basis::build(BasisSpec::meyer(1, 10, 5)).unwrap(), &[0]).is_err());
}

#[test]
fn single_term_riesz_value_near_c_d() {
    let basis = Basis::build(BasisSpec::daubechies(1, 4, 15, 7)).unwrap();
    let c_d = c_d_constant(&basis, 10).unwrap();
    assert!(c_d < 0.0);
    let f = counterexample_f(&basis, &[0]).unwrap();
    let r = riesz_apply(&f, 1);
    let at_origin = r.samples()[0];
    let want = riesz_kernel_constant(1) * c_d;
    assert!((at_origin - want).abs() < 0.05 * want.abs(), "{at_origin} vs {want}");
}

#[test]
fn blowup_table_decreases() {
    let basis = Basis::build(BasisSpec::daubechies(1, 4, 17, 5)).unwrap();
    let c_d = c_d_constant(&basis, 10).unwrap();
    let table = counterexample_blowup(&basis, &[0, 2, 4], c_d, 0.5).unwrap();
    assert!(table.strictly_decreasing(), "{}", table.csv());
    let s0 = table.rows[0].sup_norm;
    assert!(table.rows.iter().all(|r| (r.sup_norm - s0).abs() < 1e-12));
    assert!(table.rows.iter().all(|r| r.probes > 0));
}

#[test]
fn naive_split_reconstructs() {
    for n in [1usize, 2] {
        let spec = GridSpec::new(n, if n == 1 { 10 } else { 6 }, 1).unwrap();
        let f = random_mean_zero(spec, 5);
        // Remove the Nyquist content the Riesz multiplier cannot represent.
        let f = qspace::spectral::apply_multiplier(&f, |_, nyq| {
            num_complex::Complex64::new(if nyq { 0.0 } else { 1.0 }, 0.0)
        });
        let split = naive_fs_split(&f).unwrap();
        assert_eq!(split.components.len(), n + 1);
        assert_eq!(split.components[0].linf_norm(), 0.0);
        assert!(split.reconstruction_error < 1e-8);
    }
}

#[test]
fn naive_split_of_a_riesz_image_stays_bounded() {
    let spec = GridSpec::new(1, 10, 1).unwrap();
    let g = GridFunction::from_fn(spec, |x| (PI * x[0]).sin() + 0.3 * (5.0 * PI * x[0]).cos());
    let split = naive_fs_split(&riesz_apply(&g, 1)).unwrap();
    assert!(split.sup_norms[1] <= g.linf_norm() + 1e-9);
}

#[test]
fn naive_split_grows_on_the_counterexample() {
    let basis = Basis::build(BasisSpec::daubechies(1, 4, 16, 5)).unwrap();
    let sups: Vec<f64> = [0u32, 2, 4]
        .iter()
        .map(|&j| {
            let f = counterexample_f(&basis, &even_scales(j)).unwrap();
            let m = f.mean();
            let mut f0 = f.clone();
            f0.add_scaled(-m, &GridFunction::from_fn(*basis.grid(), |_| 1.0));
            naive_fs_split(&f0).unwrap().sup_norms[1]
        })
        .collect();
    assert!(sups.windows(2).all(|w| w[1] > w[0]), "{sups:?}");
}

#[test]
fn riesz_report_on_an_atom() {
    let basis = Basis::build(BasisSpec::meyer(2, 6, 0)).unwrap();
    let w = basis.field_window(ScaleWindow::new(0, 3)).unwrap();
    let mut g = CoefficientField::new(w);
    g.set(1, 1, &[0, 1], 0.5).unwrap();
    g.set(3, 2, &[1, 2], -0.25).unwrap();
    let rows = riesz_l1alpha_report(&g, &basis, 0.3).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.value.is_finite() && r.value > 0.0));
    let direct = l1alpha_norm(&g, &basis, 0.3, &default_family(&g).unwrap()).unwrap();
    assert!((rows[0].value - direct.value).abs() < 1e-12);
    assert!(p_alpha_upper(&g, 0.3) > 0.0);

    let zero = CoefficientField::new(w);
    assert!(riesz_l1alpha_report(&zero, &basis, 0.3).unwrap().iter().all(|r| r.value == 0.0));
}
