use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::Args;
use qspace::dyadic::{enumerate_block, epsilon_bits};
use qspace::microlocal::{solve, MicrolocalProblem, MicrolocalSolution};
use qspace::norms::{h1_norm, q_norm_field, sobolev_norm};
use qspace::predual::{
    default_family, l1alpha_norm, linfalpha_norm, p_alpha_bracket, p_alpha_cha, pairing,
};
use qspace::riesz::{
    c_d_constant, counterexample_blowup, counterexample_f, czo_decay_check, even_scales,
    probe_radius, spatial_window, wavelet_matrix,
};
use qspace::{Basis, BasisSpec, CoefficientField, DyadicCube, Family, GridFunction, ScaleWindow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{spec_from_tag, Common, Defaults, RunConfig};
use crate::error::{CliError, Context};
use crate::output::{plot_script, Outputs};

const BAND_ORTHOGONALITY_TOL: f64 = 1e-10;

fn apply_jobs(cfg: &RunConfig) {
    if let Some(j) = cfg.jobs {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j).build_global();
    }
}

fn read_field(path: &Path) -> Result<CoefficientField, CliError> {
    let file = File::open(path).map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    let (c, _) = CoefficientField::read_jsonl(BufReader::new(file)).ctx(&path.display().to_string())?;
    Ok(c)
}

/// Basis defaults for a coefficient file: its own tag when present,
/// otherwise the smallest grid resolving its finest scale.
fn field_defaults(c: &CoefficientField) -> Defaults {
    let w = c.window();
    match c.basis().and_then(spec_from_tag) {
        Some(spec) => Defaults {
            family: spec.family,
            n: spec.n,
            log2_points: spec.log2_points,
            period_log2: spec.period_log2,
            moments: if spec.family == Family::Daubechies { spec.regularity } else { 4 },
            ..Defaults::default()
        },
        None => Defaults {
            n: w.n,
            period_log2: w.period_log2,
            log2_points: (w.j_max + w.period_log2 + 2).max(1) as u32,
            ..Defaults::default()
        },
    }
}

fn check_dims(basis: &Basis, c: &CoefficientField) -> Result<(), CliError> {
    if basis.dim() != c.dim() || basis.spec().period_log2 != c.window().period_log2 {
        return Err(CliError::Input(format!(
            "coefficients live on an n={} torus with period 2^{} but the basis is {}",
            c.dim(),
            c.window().period_log2,
            basis.fingerprint()
        )));
    }
    Ok(())
}

fn fmt_k(k: &[i64]) -> String {
    k.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

// ---------------------------------------------------------------- analyze

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Binary grid file; its `.json` sidecar must sit next to it.
    #[arg(long)]
    pub input: PathBuf,
}

pub fn analyze(common: &Common, args: &AnalyzeArgs) -> Result<Outputs, CliError> {
    let f = GridFunction::read(&args.input).ctx(&format!("reading {}", args.input.display()))?;
    let g = *f.spec();
    let defaults = Defaults {
        n: g.n,
        log2_points: g.log2_points,
        period_log2: g.period_log2,
        ..Defaults::default()
    };
    let cfg = RunConfig::resolve("analyze", common, defaults)?.with_input(&args.input)?;
    apply_jobs(&cfg);
    let basis = Basis::build(cfg.basis)?;
    let window = cfg.window.unwrap_or_else(|| basis.full_window());
    let mut out = Outputs::claim(&cfg.out, &["coefficients.jsonl"], cfg.force)?;
    let c = basis.analyze(&f, window, None)?;
    let err = basis.synthesize(&c)?.max_abs_diff(&f);
    let mut body = Vec::new();
    c.write_jsonl(&mut body)?;
    let footer = json!({ "footer": {
        "reconstruction_error": err,
        "tolerance": cfg.recon_tol,
        "entries": c.len(),
        "version": crate::config::VERSION,
        "fingerprint": cfg.fingerprint(),
    }});
    body.extend_from_slice(format!("{footer}\n").as_bytes());
    out.write("coefficients.jsonl", body)?;
    if err > cfg.recon_tol {
        eprintln!(
            "warning: reconstruction error {err:.3e} exceeds {:.1e}; the input is not resolved by scales {}..={}",
            cfg.recon_tol, window.j_min, window.j_max
        );
    }
    Ok(out)
}

// ------------------------------------------------------------- synthesize

#[derive(Args, Debug)]
pub struct SynthesizeArgs {
    /// Coefficient JSON-lines file.
    #[arg(long)]
    pub input: PathBuf,
}

pub fn synthesize(common: &Common, args: &SynthesizeArgs) -> Result<Outputs, CliError> {
    let c = read_field(&args.input)?;
    let cfg = RunConfig::resolve("synthesize", common, field_defaults(&c))?.with_input(&args.input)?;
    apply_jobs(&cfg);
    let basis = Basis::build(cfg.basis)?;
    check_dims(&basis, &c)?;
    let mut out = Outputs::claim(
        &cfg.out,
        &["function.bin", "function.bin.json", "synthesize.json"],
        cfg.force,
    )?;
    let f = basis.synthesize(&c)?;
    let path = out.path("function.bin");
    f.write(&path)?;
    out.record(GridFunction::sidecar_path(&path));
    out.record(path);
    out.write_json(
        "synthesize.json",
        &json!({
            "header": cfg.header(),
            "entries": c.len(),
            "l2_norm": f.l2_norm(),
            "linf_norm": f.linf_norm(),
        }),
    )?;
    Ok(out)
}

// ------------------------------------------------------------------ norms

#[derive(Args, Debug)]
pub struct NormsArgs {
    /// Coefficient JSON-lines file.
    #[arg(long)]
    pub input: PathBuf,
    /// Smoothness r of the Sobolev norm.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub sobolev_r: f64,
    /// Integrability p of the Sobolev norm.
    #[arg(long, default_value_t = 2.0)]
    pub sobolev_p: f64,
}

pub fn norms(common: &Common, args: &NormsArgs) -> Result<Outputs, CliError> {
    let c = read_field(&args.input)?;
    let cfg = RunConfig::resolve("norms", common, field_defaults(&c))?
        .with_input(&args.input)?
        .param("sobolev_r", args.sobolev_r)
        .param("sobolev_p", args.sobolev_p);
    apply_jobs(&cfg);
    let basis = Basis::build(cfg.basis)?;
    check_dims(&basis, &c)?;
    let alpha = cfg.alpha;
    let files = [
        "norms.json",
        "q_profile.csv",
        "p_alpha_cha_scan.csv",
        "l1alpha_scan.csv",
        "linfalpha_scan.csv",
        "plot_norms.py",
    ];
    let mut out = Outputs::claim(&cfg.out, &files, cfg.force)?;
    let family = default_family(&c)?;

    let ((q, cha), (l1, linf)) = rayon::join(
        || (q_norm_field(&c, alpha), p_alpha_cha(&c, alpha, &family)),
        || {
            rayon::join(
                || l1alpha_norm(&c, &basis, alpha, &family),
                || linfalpha_norm(&c, &basis, alpha, &family),
            )
        },
    );
    let (q, cha, l1, linf) = (q.ctx("q_norm")?, cha.ctx("p_alpha_cha")?, l1.ctx("l1alpha")?, linf.ctx("linfalpha")?);
    let h1 = h1_norm(&c);
    let sob = sobolev_norm(&c, args.sobolev_r, args.sobolev_p).ctx("sobolev")?;
    let bracket = p_alpha_bracket(&c, alpha)?;

    let values = vec![
        json!({ "op": "q_norm_field", "quantity": "sup_Q C_{alpha,Q}", "value": q.value }),
        json!({ "op": "h1_norm", "quantity": "wavelet H1 norm", "value": h1 }),
        json!({ "op": "sobolev_norm", "quantity": format!("r={}, p={}", args.sobolev_r, args.sobolev_p), "value": sob }),
        json!({ "op": "p_alpha_lower", "quantity": "duality lower bound", "value": bracket.lower }),
        json!({ "op": "p_alpha_upper", "quantity": "greedy atomic upper bound", "value": bracket.upper }),
        json!({ "op": "p_alpha_cha", "quantity": "sup-min of ||P_{s,t,N} g||_L1", "value": cha.value }),
        json!({ "op": "l1alpha_norm", "quantity": "sup-min of T1 + T2", "value": l1.value }),
        json!({ "op": "linfalpha_norm", "quantity": "sup-sup of S1 + S2", "value": linf.value }),
    ];
    out.write_json(
        "norms.json",
        &json!({
            "header": cfg.header(),
            "values": values,
            "window_count": family.len(),
            "argmax": { "p_alpha_cha": cha.argmax, "l1alpha_norm": l1.argmax, "linfalpha_norm": linf.argmax },
        }),
    )?;
    out.write("q_profile.csv", q.profile_csv())?;
    out.write("p_alpha_cha_scan.csv", cha.csv())?;
    out.write("l1alpha_scan.csv", l1.csv())?;
    out.write("linfalpha_scan.csv", linf.csv())?;
    out.write(
        "plot_norms.py",
        plot_script("q_profile.csv", "j", &["value"], "C_{alpha,Q} profile by scale", "q_profile.png"),
    )?;
    Ok(out)
}

// ------------------------------------------------------------- microlocal

#[derive(Args, Debug)]
pub struct MicrolocalArgs {
    /// Scale of the block's base cube.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub j: i32,
    /// Position of the base cube, comma separated; zeros by default.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub k: Vec<i64>,
    /// Block depth t.
    #[arg(long, default_value_t = 1)]
    pub depth: u32,
    /// Block values in member order, comma separated. Random when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Vec<f64>,
    /// Number of random problems.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
}

/// `P^0_j g = 2^{−nj/2} (Σ_ε g_ε²)^{1/2}` at depth zero.
fn depth_zero_value(p: &MicrolocalProblem) -> f64 {
    let n = p.base.dim() as f64;
    (-n * p.base.j as f64 / 2.0).exp2() * p.values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn microlocal(common: &Common, args: &MicrolocalArgs) -> Result<Outputs, CliError> {
    let cfg = RunConfig::resolve("microlocal", common, Defaults::default())?
        .param("j", args.j)
        .param("k", &args.k)
        .param("depth", args.depth)
        .param("values", &args.values)
        .param("count", args.count);
    apply_jobs(&cfg);
    let n = cfg.basis.n;
    let k = if args.k.is_empty() { vec![0; n] } else { args.k.clone() };
    if k.len() != n {
        return Err(CliError::Input(format!("--k has {} entries for dimension {n}", k.len())));
    }
    let base = DyadicCube::new(args.j, &k)?;
    let members = enumerate_block(base, args.depth).members;
    let problems: Vec<MicrolocalProblem> = if !args.values.is_empty() {
        if args.count != 1 {
            return Err(CliError::Input("--values describes a single problem; drop --count".into()));
        }
        vec![MicrolocalProblem::new(base, args.depth, cfg.alpha, args.values.clone())?]
    } else {
        if args.count == 0 {
            return Err(CliError::Input("--count must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        (0..args.count)
            .map(|_| {
                let v = (0..members.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                MicrolocalProblem::new(base, args.depth, cfg.alpha, v)
            })
            .collect::<Result<_, _>>()?
    };
    let mut out = Outputs::claim(
        &cfg.out,
        &["microlocal.csv", "microlocal_members.csv", "microlocal.json", "plot_microlocal.py"],
        cfg.force,
    )?;
    let solutions: Vec<MicrolocalSolution> = problems
        .par_iter()
        .map(solve)
        .collect::<Result<_, _>>()
        .ctx("micro-local solve")?;

    let mut table = String::from("problem,value,closed_form,iterations,max_violation,duality_gap\n");
    let mut member_rows = String::from("problem,eps,j,k,g,f\n");
    let mut worst_closed: f64 = 0.0;
    for (i, (p, s)) in problems.iter().zip(&solutions).enumerate() {
        let closed = (args.depth == 0).then(|| depth_zero_value(p));
        if let Some(v) = closed {
            worst_closed = worst_closed.max((v - s.value).abs() / v.max(1.0));
        }
        table.push_str(&format!(
            "{i},{:.17e},{},{},{:.3e},{:.3e}\n",
            s.value,
            closed.map_or("".to_string(), |v| format!("{v:.17e}")),
            s.diagnostics.iterations,
            s.diagnostics.max_violation,
            s.diagnostics.duality_gap
        ));
        for (idx, (g, f)) in members.iter().zip(p.values.iter().zip(&s.maximizer)) {
            let eps: String = epsilon_bits(idx.eps, n).iter().map(|b| b.to_string()).collect();
            member_rows.push_str(&format!(
                "{i},{eps},{},{},{:.17e},{:.17e}\n",
                idx.j(),
                fmt_k(idx.k()),
                g,
                f
            ));
        }
    }
    out.write("microlocal.csv", table)?;
    out.write("microlocal_members.csv", member_rows)?;
    out.write_json(
        "microlocal.json",
        &json!({
            "header": cfg.header(),
            "block_members": members.len(),
            "values": solutions.iter().map(|s| s.value).collect::<Vec<_>>(),
            "closed_form_max_rel_error": (args.depth == 0).then_some(worst_closed),
        }),
    )?;
    out.write(
        "plot_microlocal.py",
        plot_script("microlocal.csv", "problem", &["value"], "Micro-local values", "microlocal.png"),
    )?;
    if worst_closed > 1e-10 {
        return Err(CliError::Numeric(format!(
            "depth-zero values differ from the closed form by {worst_closed:.3e}"
        )));
    }
    Ok(out)
}

// ------------------------------------------------------------------ riesz

#[derive(Args, Debug)]
pub struct RieszArgs {
    /// Riesz index i; 0 is the identity.
    #[arg(long, default_value_t = 1)]
    pub axis: usize,
    /// Keep wavelets whose cube's lower corner lies in [0, extent)^n.
    #[arg(long, default_value_t = 1.0)]
    pub extent: f64,
    /// Decay order N₀ of the envelope.
    #[arg(long, default_value_t = 1)]
    pub n0: u32,
    /// Constant C whose violations are listed.
    #[arg(long = "c")]
    pub user_c: Option<f64>,
}

pub fn riesz(common: &Common, args: &RieszArgs) -> Result<Outputs, CliError> {
    let defaults = Defaults {
        window: Some(ScaleWindow::new(0, 4)),
        ..Defaults::default()
    };
    let cfg = RunConfig::resolve("riesz", common, defaults)?
        .param("axis", args.axis)
        .param("extent", args.extent)
        .param("n0", args.n0)
        .param("c", args.user_c);
    apply_jobs(&cfg);
    let basis = Basis::build(cfg.basis)?;
    let window = cfg.window.expect("riesz has a default window");
    let idx = spatial_window(&basis, window, args.extent)?;
    if idx.is_empty() {
        return Err(CliError::Input(format!("no wavelets start inside [0, {})^n", args.extent)));
    }
    let mut out = Outputs::claim(
        &cfg.out,
        &["riesz_matrix.jsonl", "riesz_decay.csv", "riesz.json", "plot_riesz.py"],
        cfg.force,
    )?;
    let m = wavelet_matrix(&basis, args.axis, &idx, &idx, window)?;
    let rep = czo_decay_check(&m, args.n0, args.user_c);
    let band = m.max_beyond_band(2);
    let mut body = Vec::new();
    m.write_jsonl(&mut body)?;
    out.write("riesz_matrix.jsonl", body)?;
    out.write("riesz_decay.csv", rep.csv())?;
    out.write_json(
        "riesz.json",
        &json!({
            "header": cfg.header(),
            "op": m.op,
            "indices": idx.len(),
            "nonzero_entries": m.entries.len(),
            "antisymmetry_defect": m.antisymmetry_defect,
            "band_orthogonality_max": band,
            "decay": rep,
        }),
    )?;
    out.write(
        "plot_riesz.py",
        plot_script("riesz_decay.csv", "band", &["max_ratio"], "Entry / envelope by scale gap", "riesz_decay.png"),
    )?;
    if basis.family() == Family::Meyer && args.axis > 0 && band > BAND_ORTHOGONALITY_TOL {
        return Err(CliError::Numeric(format!(
            "Meyer entries with |j - j'| >= 2 reach {band:.3e}, above {BAND_ORTHOGONALITY_TOL:.0e}"
        )));
    }
    Ok(out)
}

// --------------------------------------------------------- counterexample

#[derive(Args, Debug)]
pub struct CounterexampleArgs {
    /// Largest even scale cutoff J.
    #[arg(long = "Jmax", alias = "jmax", default_value_t = 8)]
    pub jmax: u32,
    /// log2 of the samples per unit used for the C_D quadrature.
    #[arg(long, default_value_t = 12)]
    pub resolution: u32,
    /// Probe radius; the first distance where the single-term transform
    /// leaves c_n·C_D/2 is used when omitted.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Also evaluate the L^{∞,α} scan of every partial sum.
    #[arg(long)]
    pub linfalpha: bool,
}

pub fn counterexample(common: &Common, args: &CounterexampleArgs) -> Result<Outputs, CliError> {
    let defaults = Defaults {
        family: Family::Daubechies,
        moments: 8,
        log2_points: 19,
        period_log2: 7,
        ..Defaults::default()
    };
    let cfg = RunConfig::resolve("counterexample", common, defaults)?
        .param("Jmax", args.jmax)
        .param("resolution", args.resolution)
        .param("delta", args.delta)
        .param("linfalpha", args.linfalpha);
    apply_jobs(&cfg);
    if cfg.basis.family != Family::Daubechies {
        return Err(CliError::Input("the counterexample needs --basis daubechies".into()));
    }
    let basis = Basis::build(cfg.basis)?;
    let cutoffs: Vec<u32> = (0..=args.jmax).step_by(2).collect();
    for &j in &cutoffs {
        counterexample_f(&basis, &even_scales(j)).ctx(&format!("J = {j}"))?;
    }
    let mut out = Outputs::claim(
        &cfg.out,
        &["blowup.csv", "counterexample.json", "plot_counterexample.py"],
        cfg.force,
    )?;
    let c_d = c_d_constant(&basis, args.resolution)?;
    let delta = match args.delta {
        Some(d) if d > 0.0 => d,
        Some(d) => return Err(CliError::Input(format!("--delta {d} must be positive"))),
        None => probe_radius(&basis, c_d)?,
    };
    let table = counterexample_blowup(&basis, &cutoffs, c_d, delta)?;
    let linf: Option<Vec<f64>> = if args.linfalpha {
        let vals: Vec<f64> = cutoffs
            .par_iter()
            .map(|&j| -> Result<f64, CliError> {
                let f = counterexample_f(&basis, &even_scales(j))?;
                let c = basis.analyze(&f, basis.full_window(), None)?;
                Ok(linfalpha_norm(&c, &basis, cfg.alpha, &default_family(&c)?)?.value)
            })
            .collect::<Result<_, _>>()?;
        Some(vals)
    } else {
        None
    };
    let mut csv = String::new();
    for (i, line) in table.csv().lines().enumerate() {
        csv.push_str(line);
        if let Some(v) = &linf {
            if i == 0 {
                csv.push_str(",linfalpha");
            } else {
                csv.push_str(&format!(",{:.17e}", v[i - 1]));
            }
        }
        csv.push('\n');
    }
    out.write("blowup.csv", csv)?;
    let decreasing = table.strictly_decreasing();
    out.write_json(
        "counterexample.json",
        &json!({
            "header": cfg.header(),
            "c_d": c_d,
            "delta": delta,
            "support_log2": basis.spec().support_log2,
            "strictly_decreasing": decreasing,
            "rows": table.rows,
            "linfalpha": linf,
        }),
    )?;
    out.write(
        "plot_counterexample.py",
        plot_script("blowup.csv", "J", &["probe_min", "sup_norm"], "R_1 f_J near the origin", "blowup.png"),
    )?;
    if !decreasing {
        return Err(CliError::Numeric("probe minima do not decrease strictly in J".into()));
    }
    Ok(out)
}

// --------------------------------------------------------------- selftest

struct Check {
    name: &'static str,
    detail: String,
    pass: bool,
}

fn run_check(name: &'static str, f: impl FnOnce() -> Result<(bool, String), CliError>) -> Check {
    match f() {
        Ok((pass, detail)) => Check { name, detail, pass },
        Err(e) => Check {
            name,
            detail: e.to_string(),
            pass: false,
        },
    }
}

fn random_field(basis: &Basis, window: ScaleWindow, seed: u64) -> Result<CoefficientField, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = CoefficientField::new(basis.field_window(window)?);
    for idx in basis.window_indices(window)? {
        c.insert(idx, rng.gen_range(-1.0..1.0))?;
    }
    Ok(c)
}

/// Runs a fixed battery of quick checks; returns whether all passed.
pub fn selftest(common: &Common) -> Result<bool, CliError> {
    let cfg = RunConfig::resolve("selftest", common, Defaults::default())?;
    apply_jobs(&cfg);
    let seed = cfg.seed;
    let checks = vec![
        run_check("meyer_orthonormality", || {
            let basis = Basis::build(BasisSpec::meyer(1, 9, 0))?;
            let w = ScaleWindow::new(0, 3);
            let idx = basis.window_indices(w)?;
            let d = basis.gram_defect(w, &idx)?;
            Ok((d < 1e-10, format!("gram defect {d:.2e}")))
        }),
        run_check("daubechies_round_trip", || {
            let basis = Basis::build(BasisSpec::daubechies(1, 4, 10, 0))?;
            let w = ScaleWindow::new(0, 8);
            let c = random_field(&basis, w, seed)?;
            let back = basis.analyze(&basis.synthesize(&c)?, w, None)?;
            let e = c.max_abs_diff(&back);
            Ok((e < 1e-10, format!("max coefficient error {e:.2e}")))
        }),
        run_check("pairing_orthonormality", || {
            let basis = Basis::build(BasisSpec::meyer(1, 10, 0))?;
            let w = ScaleWindow::new(0, 5);
            let a = random_field(&basis, w, seed)?;
            let b = random_field(&basis, w, seed.wrapping_add(1))?;
            let e = (pairing(&a, &b) - basis.synthesize(&a)?.inner(&basis.synthesize(&b)?)).abs();
            Ok((e < 1e-8, format!("pairing vs inner product {e:.2e}")))
        }),
        run_check("microlocal_closed_form", || {
            let p = MicrolocalProblem::new(DyadicCube::new(2, &[1])?, 0, 0.25, vec![0.8])?;
            let v = solve(&p)?.value;
            let want = 0.4;
            Ok(((v - want).abs() < 1e-12, format!("value {v:.12} vs {want}")))
        }),
        run_check("meyer_riesz_band", || {
            let basis = Basis::build(BasisSpec::meyer(1, 9, 0))?;
            let w = ScaleWindow::new(0, 3);
            let idx = spatial_window(&basis, w, 1.0)?;
            let m = wavelet_matrix(&basis, 1, &idx, &idx, w)?;
            let band = m.max_beyond_band(2);
            Ok((band < BAND_ORTHOGONALITY_TOL, format!("max |entry| at |j - j'| >= 2: {band:.2e}")))
        }),
        run_check("c_d_negative", || {
            let basis = Basis::build(BasisSpec::daubechies(1, 4, 10, 5))?;
            let c6 = c_d_constant(&basis, 6)?;
            let c8 = c_d_constant(&basis, 8)?;
            Ok((c6 < 0.0 && (c6 - c8).abs() < 1e-4, format!("C_D {c6:.6} / {c8:.6}")))
        }),
    ];
    let mut all = true;
    for c in &checks {
        println!("selftest {}: {} | {}", c.name, if c.pass { "PASS" } else { "FAIL" }, c.detail);
        all &= c.pass;
    }
    Ok(all)
}
