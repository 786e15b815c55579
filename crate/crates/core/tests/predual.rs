use proptest::prelude::*;
use qspace::dyadic::{enumerate_block, WindowSpec};
use qspace::microlocal::{feasibility, solve, MicrolocalProblem};
use qspace::norms::{h1_norm, q_norm_field};
use qspace::predual::{
    band_split, default_family, greedy_atoms, l1alpha_norm, linfalpha_norm, p_alpha_bracket,
    p_alpha_cha, p_alpha_lower, p_alpha_upper, p_stn, pairing, standard_atom_check,
    wavelet_atom_check, SplitKind,
};
use qspace::wavelet::{Basis, BasisSpec, CoefficientField, FieldWindow, ScaleWindow};
use qspace::{DyadicCube, GridFunction, GridSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_window() -> FieldWindow {
    FieldWindow::new(1, 0, 3, 0).unwrap()
}

fn random_field(w: FieldWindow, seed: u64, density: f64, nonneg: bool) -> CoefficientField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = CoefficientField::new(w);
    for j in w.j_min..=w.j_max {
        for k in 0..w.positions(j) {
            if rng.gen_bool(density) {
                let v: f64 = rng.gen_range(-1.0..1.0);
                c.set(1, j, &[k], if nonneg { v.abs() } else { v }).unwrap();
            }
        }
    }
    c
}

fn sup_min(rows: &[(i32, u32, u32, f64)], minimize: bool) -> f64 {
    let mut windows: std::collections::BTreeMap<(i32, u32), f64> = Default::default();
    for &(s, n, _, v) in rows {
        let e = windows.entry((s, n)).or_insert(if minimize { f64::INFINITY } else { f64::NEG_INFINITY });
        *e = if minimize { e.min(v) } else { e.max(v) };
    }
    windows.values().cloned().fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn pairing_matches_grid_inner_product() {
    let basis = Basis::build(BasisSpec::meyer(1, 10, 1)).unwrap();
    let w = ScaleWindow::new(-1, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut fields = Vec::new();
    for _ in 0..2 {
        let mut c = CoefficientField::new(basis.field_window(w).unwrap());
        for idx in basis.window_indices(w).unwrap() {
            c.insert(idx, rng.gen_range(-1.0..1.0)).unwrap();
        }
        fields.push(c);
    }
    let a = basis.synthesize(&fields[0]).unwrap();
    let b = basis.synthesize(&fields[1]).unwrap();
    let p = pairing(&fields[0], &fields[1]);
    assert!((p - a.inner(&b)).abs() < 1e-8, "{p} vs {}", a.inner(&b));
}

#[test]
fn pairing_trivial_cases() {
    let mut a = CoefficientField::new(small_window());
    a.set(1, 1, &[0], 1.0).unwrap();
    let mut b = CoefficientField::new(small_window());
    b.set(1, 1, &[1], 1.0).unwrap();
    assert_eq!(pairing(&a, &b), 0.0);
    assert_eq!(pairing(&a, &a), 1.0);
}

#[test]
fn standard_atom_examples() {
    let spec = GridSpec::new(1, 9, 2).unwrap();
    let q = DyadicCube::new(-1, &[0]).unwrap();
    let zero = GridFunction::zeros(spec);
    assert!(standard_atom_check(&zero, &q, 0.4).unwrap().valid);

    let odd = GridFunction::from_fn(spec, |x| {
        let y = x[0] - 1.0;
        if y.abs() < 0.5 { 0.01 * y * (1.0 - 4.0 * y * y) } else { 0.0 }
    });
    let cert = standard_atom_check(&odd, &q, 0.4).unwrap();
    assert!(cert.valid, "{cert:?}");
    assert_eq!(cert.leaks, 0);
    assert!(cert.moment_residuals.iter().all(|(_, r)| r.abs() < 1e-12));

    let flat = GridFunction::from_fn(spec, |x| if x[0] < 2.0 { 1.0 } else { 0.0 });
    assert!(!standard_atom_check(&flat, &q, 0.4).unwrap().valid);

    let outside = GridFunction::from_fn(spec, |x| {
        let y = x[0] - 3.0;
        if y.abs() < 0.5 { 0.01 * y } else { 0.0 }
    });
    let cert = standard_atom_check(&outside, &q, 0.4).unwrap();
    assert!(cert.leaks > 0 && !cert.valid);
}

#[test]
fn wavelet_atom_and_greedy_examples() {
    let q = DyadicCube::new(0, &[0]).unwrap();
    let zero = CoefficientField::new(small_window());
    let cert = wavelet_atom_check(&zero, &q, 0.25);
    assert!(cert.valid);
    assert!((cert.slacks[0].1 - 1.0).abs() < 1e-15);

    let mut atom = CoefficientField::new(small_window());
    atom.set(1, 0, &[0], 1.0).unwrap();
    let cert = wavelet_atom_check(&atom, &q, 0.25);
    assert!(cert.valid && cert.slacks[0].1.abs() < 1e-12);
    assert!(!wavelet_atom_check(&atom.scaled(1.01), &q, 0.25).valid);
    assert!((p_alpha_upper(&atom, 0.25) - 1.0).abs() < 1e-10);
    assert!((p_alpha_upper(&atom.scaled(3.5), 0.25) - 3.5).abs() < 1e-10);

    let w = FieldWindow::new(1, 0, 3, 1).unwrap();
    let mut two = CoefficientField::new(w);
    two.set(1, 0, &[0], 2.0).unwrap();
    two.set(1, 0, &[1], 3.0).unwrap();
    let pieces = greedy_atoms(&two, 0.25);
    assert_eq!(pieces.len(), 2);
    assert!((p_alpha_upper(&two, 0.25) - 5.0).abs() < 1e-10);
}

#[test]
fn p_stn_at_t_zero_is_the_hardy_square_function() {
    let w = FieldWindow::new(1, 0, 4, 0).unwrap();
    let mut c = CoefficientField::new(w);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..w.positions(3) {
        c.set(1, 3, &[k], rng.gen_range(-1.0..1.0)).unwrap();
    }
    let spec = WindowSpec::covering_torus(1, 3, 2, 0).unwrap();
    let p = p_stn(&c, &spec, 0, 0.3).unwrap();
    assert!((p.l1 - h1_norm(&c)).abs() < 1e-8);
    assert!((p.q_stn - p.l1).abs() < 1e-12);
    assert_eq!(p.lower_l1, 0.0);
}

#[test]
fn p_alpha_cha_examples() {
    let w = FieldWindow::new(1, 0, 3, 0).unwrap();
    let fam = default_family(&CoefficientField::new(w)).unwrap();
    assert_eq!(p_alpha_cha(&CoefficientField::new(w), 0.3, &fam).unwrap().value, 0.0);
    assert!(p_alpha_cha(&CoefficientField::new(w), 0.3, &[]).is_err());

    let mut atom = CoefficientField::new(w);
    atom.set(1, 1, &[1], 1.0).unwrap();
    atom.set(1, 2, &[3], -0.5).unwrap();
    let spec = WindowSpec::new(2, 2, vec![vec![0]]);
    let rep = p_alpha_cha(&atom, 0.3, std::slice::from_ref(&spec)).unwrap();
    let direct = (0..=2)
        .map(|t| p_stn(&atom, &spec, t, 0.3).unwrap().l1)
        .fold(f64::INFINITY, f64::min);
    assert!((rep.value - direct).abs() < 1e-12);
    assert_eq!(rep.choices.len(), 1);
}

#[test]
fn p_alpha_cha_agrees_with_an_exhaustive_scan() {
    let w = FieldWindow::new(1, 0, 4, 0).unwrap();
    let c = random_field(w, 17, 0.6, false);
    let fam = default_family(&c).unwrap();
    let rep = p_alpha_cha(&c, 0.2, &fam).unwrap();
    let mut rows = Vec::new();
    for spec in &fam {
        for t in 0..=spec.depth {
            rows.push((spec.s, spec.depth, t, p_stn(&c, spec, t, 0.2).unwrap().l1));
        }
    }
    assert!((rep.value - sup_min(&rows, true)).abs() < 1e-12);
    assert!(rep.csv().starts_with("s,N,t,T1_value,T2_value,total"));
}

#[test]
fn band_norms_agree_with_an_exhaustive_scan() {
    let basis = Basis::build(BasisSpec::meyer(1, 9, 0)).unwrap();
    let w = basis.field_window(ScaleWindow::new(0, 4)).unwrap();
    let c = random_field(w, 23, 0.5, false);
    let fam = default_family(&c).unwrap();
    let alpha = 0.3;
    let mut pre = Vec::new();
    let mut bmo = Vec::new();
    for spec in &fam {
        for t in 0..=spec.depth {
            let split = band_split(&c, spec, t, SplitKind::T).unwrap();
            let low = basis.synthesize(&split.low).unwrap();
            pre.push((spec.s, spec.depth, t, p_alpha_upper(&split.high, alpha) + low.l1_norm()));
            let q = q_norm_field(&split.high, alpha).unwrap().value;
            bmo.push((spec.s, spec.depth, t, q + low.linf_norm()));
        }
    }
    let l1 = l1alpha_norm(&c, &basis, alpha, &fam).unwrap();
    let linf = linfalpha_norm(&c, &basis, alpha, &fam).unwrap();
    assert!((l1.value - sup_min(&pre, true)).abs() < 1e-10 * l1.value);
    assert!((linf.value - sup_min(&bmo, false)).abs() < 1e-10 * linf.value);

    let zero = CoefficientField::new(w);
    assert_eq!(l1alpha_norm(&zero, &basis, alpha, &fam).unwrap().value, 0.0);
    assert_eq!(linfalpha_norm(&zero, &basis, alpha, &fam).unwrap().value, 0.0);
    let l1s = l1alpha_norm(&c.scaled(2.5), &basis, alpha, &fam).unwrap().value;
    assert!((l1s - 2.5 * l1.value).abs() < 1e-10 * l1s);
}

#[test]
fn single_scale_field_in_the_bmo_scan() {
    let basis = Basis::build(BasisSpec::meyer(1, 9, 0)).unwrap();
    let w = basis.field_window(ScaleWindow::new(0, 4)).unwrap();
    let c = random_field(w, 31, 1.0, false).scale_band(2, 2);
    let spec = WindowSpec::covering_torus(1, 2, 2, 0).unwrap();
    let rep = linfalpha_norm(&c, &basis, 0.3, std::slice::from_ref(&spec)).unwrap();
    let q = q_norm_field(&c, 0.3).unwrap().value;
    let at_top = rep.rows.iter().find(|r| r.t == 2).unwrap();
    assert!((at_top.total - q).abs() < 1e-12);
    assert_eq!(at_top.t2, 0.0);
}

fn arb_field() -> impl Strategy<Value = CoefficientField> {
    (any::<u64>(), 0.2f64..0.9).prop_map(|(seed, d)| random_field(small_window(), seed, d, false))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn band_split_partitions_the_window(c in arb_field(), s in 0i32..=3, depth_seed in 0u32..4, t_seed in 0u32..4, seed in any::<u64>()) {
        let depth = depth_seed % (s as u32 + 1);
        let t = t_seed % (depth + 1);
        let spec = WindowSpec::covering_torus(1, s, depth, 0).unwrap();
        let split = band_split(&c, &spec, t, SplitKind::S).unwrap();
        let proj = qspace::predual::window_projection(&c, &spec).unwrap();
        let joined = split.high.combine(1.0, &split.low, 1.0).unwrap();
        prop_assert_eq!(joined.max_abs_diff(&proj), 0.0);
        prop_assert!(split.high.iter().all(|(i, _)| split.low.get(i) == 0.0));
        let h = random_field(small_window(), seed, 0.7, false);
        let lhs = pairing(&split.high, &h) + pairing(&split.low, &h);
        prop_assert!((lhs - pairing(&proj, &h)).abs() < 1e-12);
        if t == depth {
            prop_assert!(split.low.is_empty());
        }
        if t == 0 {
            prop_assert!(split.high.iter().all(|(i, _)| i.j() == s));
        }
    }

    #[test]
    fn duality_with_q_alpha(f in arb_field(), g in arb_field(), alpha in 0.0f64..0.49) {
        let qf = q_norm_field(&f, alpha).unwrap().value;
        prop_assert!(pairing(&f, &g).abs() <= qf * p_alpha_upper(&g, alpha) * (1.0 + 1e-10) + 1e-14);
    }

    #[test]
    fn block_duality(values in prop::collection::vec(-2.0f64..2.0, 7), test in prop::collection::vec(-2.0f64..2.0, 7), alpha in 0.0f64..0.49) {
        let base = DyadicCube::new(0, &[0]).unwrap();
        prop_assume!(enumerate_block(base, 2).len() == 7);
        let p = MicrolocalProblem::new(base, 2, alpha, values.clone()).unwrap();
        let q = feasibility(&test, base, 2, alpha).unwrap();
        let worst = q.iter().cloned().fold(0.0, f64::max);
        prop_assume!(worst > 0.0);
        let f: Vec<f64> = test.iter().map(|v| v / worst.sqrt()).collect();
        let pair: f64 = f.iter().zip(&values).map(|(a, b)| a * b).sum();
        prop_assert!(pair.abs() <= solve(&p).unwrap().value * (1.0 + 1e-8) + 1e-12);
    }

    #[test]
    fn bracket_is_ordered(g in arb_field(), alpha in 0.0f64..0.49) {
        let b = p_alpha_bracket(&g, alpha).unwrap();
        prop_assert!(b.lower <= b.upper * (1.0 + 1e-9) + 1e-14);
    }

    #[test]
    fn truncation_does_not_increase_the_scan(seed in any::<u64>(), j in 0i32..3, alpha in 0.0f64..0.49) {
        let g = random_field(small_window(), seed, 0.7, true);
        let fam = default_family(&g).unwrap();
        let full = p_alpha_cha(&g, alpha, &fam).unwrap().value;
        let cut = p_alpha_cha(&g.scale_band(0, j), alpha, &fam).unwrap().value;
        prop_assert!(cut <= full * (1.0 + 1e-9) + 1e-14, "{} > {}", cut, full);
    }

    #[test]
    fn band_split_chain(g in arb_field(), s in 0i32..=3, t_seed in 0u32..4, alpha in 0.0f64..0.49) {
        let spec = WindowSpec::covering_torus(1, s, s as u32, 0).unwrap();
        let t = t_seed % (s as u32 + 1);
        let split = band_split(&g, &spec, t, SplitKind::T).unwrap();
        let proj = qspace::predual::window_projection(&g, &spec).unwrap();
        let lower = p_alpha_lower(&proj, alpha).unwrap();
        let rhs = p_alpha_upper(&split.high, alpha) + p_alpha_upper(&split.low, alpha);
        prop_assert!(lower <= rhs * (1.0 + 1e-9) + 1e-14);
    }
}
