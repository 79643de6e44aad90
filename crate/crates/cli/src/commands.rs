//! Subcommand handlers. Each returns `Ok(())` on success and a [`CliError`]
//! carrying the exit code otherwise.

use std::fmt::Write as _;
use std::io::Write as _;

use lobound::constants::ConstantTable;
use lobound::density::{AnalyticSpec, DensityField, RadialDensity};
use lobound::functionals::bound::{
    assemble_bound, BoundConstants, BoundReport, BoundVariant, REPORT_SCHEMA_VERSION,
};
use lobound::functionals::corr::{
    corr_periodic_cell, default_chain_corpus, verify_chain, ChainReport, CorrQuadrature,
};
use lobound::functionals::{direct_coulomb, tf_scaling_check, FunctionalValues, TfScalingReport};
use lobound::jellium::energy::{
    jellium_table, shift_fourier_check, yukawa_shift, JelliumReport, DEFAULT_K_VALUES,
};
use lobound::jellium::{decomposition_check, BravaisLattice, FiniteReport};
use lobound::kernel::{chi, psi, psi_split, r_star};
use lobound::maximal::{
    c_chi, check_heat_estimate, default_lemma_corpus, hl_constant_heat, hl_constant_simple,
    k_curve, minimize_k, verify_lemma, HeatEstimateCheck, KPoint, LemmaReport, MaximalGrid,
};
use serde::Serialize;

use crate::args::*;
use crate::cube::{parse_cube, NegativeValues};
use crate::error::CliError;

fn emit(out: &OutputArgs, text: &str) -> Result<(), CliError> {
    match &out.output {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Failed(format!("cannot serialize report: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.10}")).unwrap_or_else(|| "diverges".into())
}

pub fn show_defaults() -> Result<(), CliError> {
    let text = to_json(&Defaults::current())?;
    print!("{text}");
    Ok(())
}

// ---------------------------------------------------------------- constants

pub fn constants(args: &ConstantsArgs) -> Result<(), CliError> {
    if let Some(t) = args.tolerance {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(CliError::Parse(format!("tolerance must be a non-negative number, got {t}")));
        }
    }
    let table = if args.all {
        ConstantTable::derive_with_auxiliary()?
    } else {
        ConstantTable::derive()?
    };
    let tol = args.tolerance;
    let text = if args.check {
        let mut s = String::new();
        for e in &table.entries {
            let verdict = if e.matches(tol) { "ok" } else { "MISMATCH" };
            let _ = writeln!(s, "{verdict:8} {:24} {:.10} vs {}", e.name, e.value, e.reference);
        }
        s
    } else {
        match args.out.format {
            Format::Json => to_json(&table)?,
            Format::Csv => table.to_csv(tol),
            Format::Table => {
                let mut s = format!(
                    "{:24} {:>16} {:>10} {:>9} {:>7}  {}\n",
                    "name", "value", "reference", "tolerance", "match", "location"
                );
                for e in &table.entries {
                    let arg = e
                        .argument
                        .as_ref()
                        .map(|a| format!(" (at {} = {:.6})", a.name, a.value))
                        .unwrap_or_default();
                    let _ = writeln!(
                        s,
                        "{:24} {:>16.10} {:>10} {:>9.0e} {:>7}  {}{arg}",
                        e.name,
                        e.value,
                        e.reference,
                        tol.unwrap_or(e.tolerance),
                        e.matches(tol),
                        e.source_location
                    );
                }
                s
            }
        }
    };
    emit(&args.out, &text)?;
    if table.all_match(tol) {
        Ok(())
    } else {
        let bad: Vec<&str> = table
            .entries
            .iter()
            .filter(|e| !e.matches(tol))
            .map(|e| e.name.as_str())
            .collect();
        Err(CliError::Failed(format!("constants outside tolerance: {}", bad.join(", "))))
    }
}

// -------------------------------------------------------------------- bound

/// Parses `gaussian:width=1,n=1` or the JSON form of [`AnalyticSpec`].
pub fn parse_spec(text: &str) -> Result<AnalyticSpec, CliError> {
    let t = text.trim();
    if t.starts_with('{') {
        return serde_json::from_str(t).map_err(|e| CliError::Parse(format!("bad density spec: {e}")));
    }
    let (kind, rest) = t.split_once(':').unwrap_or((t, ""));
    let mut obj = serde_json::Map::new();
    obj.insert("type".into(), kind.trim().into());
    for kv in rest.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("bad density parameter '{kv}' (expected key=value)")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::Parse(format!("density parameter '{}' is not a number", k.trim())))?;
        obj.insert(k.trim().to_ascii_lowercase(), v.into());
    }
    serde_json::from_value(obj.into()).map_err(|e| CliError::Parse(format!("bad density spec '{t}': {e}")))
}

#[derive(Debug, Serialize)]
struct Skipped {
    variant: BoundVariant,
    reason: String,
}

#[derive(Debug, Serialize)]
struct BoundOutput {
    schema_version: u32,
    tool_version: &'static str,
    density: String,
    clamped_voxels: usize,
    functionals: FunctionalValues,
    /// `None` for grid densities.
    direct_coulomb: Option<f64>,
    reports: Vec<BoundReport>,
    skipped: Vec<Skipped>,
}

fn load_density(args: &BoundArgs) -> Result<(DensityField, usize), CliError> {
    if let Some(path) = &args.cube {
        let policy = if args.clamp_negative {
            NegativeValues::Clamp
        } else {
            NegativeValues::Reject
        };
        let cube = parse_cube(path, policy)?;
        let clamped = cube.clamped;
        return Ok((cube.into_density()?, clamped));
    }
    let spec = parse_spec(args.spec.as_deref().unwrap_or_default())?;
    let rho = spec.build().map_err(|e| CliError::Parse(e.to_string()))?;
    Ok((DensityField::AnalyticRadial(rho), 0))
}

pub fn bound(args: &BoundArgs) -> Result<(), CliError> {
    let (rho, clamped_voxels) = load_density(args)?;
    let constants = match args.constants {
        ConstantChoice::Published => BoundConstants::published(),
        ConstantChoice::Derived => BoundConstants::derived(hl_constant_heat()?)?,
    };
    let values = FunctionalValues::compute(&rho)?;
    let direct = match rho {
        DensityField::AnalyticRadial(_) => Some(direct_coulomb(&rho)?),
        DensityField::CartesianGrid(_) => None,
    };
    let variants: Vec<BoundVariant> = match args.variant {
        Some(v) => vec![v],
        None => BoundVariant::ALL.to_vec(),
    };
    let name = rho.describe();
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for v in variants {
        match assemble_bound(&values, v, args.alpha, &constants, &name) {
            Ok(r) => reports.push(r),
            Err(e @ lobound::Error::Divergent(_)) if args.variant.is_none() => skipped.push(Skipped {
                variant: v,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e.into()),
        }
    }
    let out = BoundOutput {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        density: name,
        clamped_voxels,
        functionals: values,
        direct_coulomb: direct,
        reports,
        skipped,
    };
    let text = match args.out.format {
        Format::Json => to_json(&out)?,
        Format::Csv => {
            let mut s = String::from("variant,alpha,constant_used,bound_value,clamped\n");
            for r in &out.reports {
                let a = r.alpha.map(|a| a.to_string()).unwrap_or_default();
                let _ = writeln!(s, "{},{a},{},{:.12e},{}", r.variant, r.constant_used, r.bound_value, r.clamped);
            }
            for k in &out.skipped {
                let _ = writeln!(s, "{},,,,skipped", k.variant);
            }
            s
        }
        Format::Table => {
            let mut s = format!("density: {}\n", out.density);
            if clamped_voxels > 0 {
                let _ = writeln!(s, "negative voxels clamped to zero: {clamped_voxels}");
            }
            let _ = writeln!(s, "  ∫ρ^(4/3)        {:.10}", values.f_rho43);
            let _ = writeln!(s, "  ∫|∇ρ|           {:.10}", values.f_grad_l1);
            let _ = writeln!(s, "  ∫|∇ρ^(1/3)|²    {}", opt(values.f_grad13_l2));
            let _ = writeln!(
                s,
                "  D(ρ,ρ)          {}",
                direct.map(|d| format!("{d:.10}")).unwrap_or_else(|| "n/a (grid)".into())
            );
            let _ = writeln!(s, "{:12} {:>10} {:>14} {:>18} {:>8}", "variant", "alpha", "constant", "bound", "clamped");
            for r in &out.reports {
                let a = r.alpha.map(|a| format!("{a:.6}")).unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    s,
                    "{:12} {:>10} {:>14.6} {:>18.10} {:>8}",
                    r.variant.name(),
                    a,
                    r.constant_used,
                    r.bound_value,
                    r.clamped
                );
            }
            for k in &out.skipped {
                let _ = writeln!(s, "{:12} skipped: {}", k.variant.name(), k.reason);
            }
            s
        }
    };
    emit(&args.out, &text)
}

// ------------------------------------------------------------------ certify

#[derive(Debug, Serialize)]
struct CertifyOutput {
    schema_version: u32,
    alphas: Vec<f64>,
    chain: Vec<ChainReport>,
    periodic_constant_corr: f64,
    periodic_passes: bool,
    tf_scaling: TfScalingReport,
    tf_passes: bool,
    heat_estimate: Vec<HeatEstimateCheck>,
    lemma: Option<LemmaReport>,
    all_pass: bool,
}

/// Agreement required of the Thomas-Fermi slopes on an analytic density.
const TF_SLOPE_TOL: f64 = 1e-3;
const PERIODIC_TOL: f64 = 1e-12;

pub fn certify(args: &CertifyArgs) -> Result<(), CliError> {
    if args.alphas.is_empty() || args.alphas.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(CliError::Parse("--alphas needs positive values".into()));
    }
    let mut corpus = default_chain_corpus();
    if args.with_ball {
        corpus.push(RadialDensity::uniform_ball(1.0, 1.0)?);
    }
    let quad = CorrQuadrature {
        rel_tol: args.rel_tol,
        ..CorrQuadrature::default()
    };
    let constants = BoundConstants::published();
    let chain = corpus
        .iter()
        .map(|r| verify_chain(&DensityField::AnalyticRadial(*r), &args.alphas, &constants, &quad))
        .collect::<Result<Vec<_>, _>>()?;
    let periodic = corr_periodic_cell(|_| 1.0, PERIODIC_CELL_POINTS, 8, 6);
    let gaussian = DensityField::AnalyticRadial(RadialDensity::gaussian(1.0, 1.0)?);
    let tf = tf_scaling_check(&gaussian, &TF_Z_VALUES)?;
    let tf_passes = tf.max_deviation <= TF_SLOPE_TOL;
    let heat = HEAT_CHECK_TIMES
        .iter()
        .map(|&t| check_heat_estimate(t, HEAT_CHECK_SAMPLES))
        .collect::<Result<Vec<_>, _>>()?;
    let lemma = if args.quick {
        None
    } else {
        Some(verify_lemma(&default_lemma_corpus(), &MaximalGrid::default())?)
    };
    let all_pass = chain.iter().all(|c| c.all_hold)
        && periodic.abs() <= PERIODIC_TOL
        && tf_passes
        && heat.iter().all(|h| h.holds)
        && lemma.as_ref().is_none_or(|l| l.holds);
    let out = CertifyOutput {
        schema_version: REPORT_SCHEMA_VERSION,
        alphas: args.alphas.clone(),
        chain,
        periodic_constant_corr: periodic,
        periodic_passes: periodic.abs() <= PERIODIC_TOL,
        tf_scaling: tf,
        tf_passes,
        heat_estimate: heat,
        lemma,
        all_pass,
    };
    let witness = {
        let mut s = format!("{}\n", ChainReport::csv_header());
        for c in &out.chain {
            s.push_str(&c.csv_rows());
        }
        s
    };
    if let Some(path) = &args.witness {
        std::fs::write(path, &witness)?;
    }
    let text = match args.out.format {
        Format::Json => to_json(&out)?,
        Format::Csv => witness,
        Format::Table => {
            let mut s = String::new();
            for c in &out.chain {
                let _ = writeln!(
                    s,
                    "{:48} Corr = {:+.6e} ± {:.1e}  {}",
                    c.density,
                    c.corr,
                    c.corr_error,
                    if c.all_hold { "holds" } else { "FAILS" }
                );
                for r in &c.rows {
                    let l13 = match (r.rhs_l13, r.holds_l13) {
                        (Some(v), Some(h)) => format!("{v:+.6e} {h}"),
                        _ => "skipped".into(),
                    };
                    let _ = writeln!(
                        s,
                        "    α = {:<5} ∫|∇ρ| rhs {:+.6e} {}   ∫|∇ρ^(1/3)|² rhs {l13}",
                        r.alpha, r.rhs_l1, r.holds_l1
                    );
                    if let Some(why) = &r.skip_reason {
                        let _ = writeln!(s, "      note: {why}");
                    }
                }
            }
            let _ = writeln!(
                s,
                "periodic constant density: Corr = {:.3e} ({})",
                out.periodic_constant_corr,
                if out.periodic_passes { "ok" } else { "FAILS" }
            );
            let slopes: Vec<String> = out.tf_scaling.slopes.iter().map(|v| opt(*v)).collect();
            let _ = writeln!(
                s,
                "Thomas-Fermi slopes: {} (max deviation {:.2e}, {})",
                slopes.join(", "),
                out.tf_scaling.max_deviation,
                if tf_passes { "ok" } else { "FAILS" }
            );
            for h in &out.heat_estimate {
                let _ = writeln!(s, "heat estimate at T = {}: min slack {:.3e} ({})", h.t, h.min_slack, h.holds);
            }
            if let Some(l) = &out.lemma {
                let _ = writeln!(
                    s,
                    "maximal lemma: max ratio {:.6} ({}) ≤ {:.6}: {}",
                    l.max_ratio, l.witness, l.threshold, l.holds
                );
            }
            let _ = writeln!(s, "certificate: {}", if all_pass { "PASS" } else { "FAIL" });
            s
        }
    };
    emit(&args.out, &text)?;
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Failed("certificate failed".into()))
    }
}

// ------------------------------------------------------------------- maxfn

#[derive(Debug, Serialize)]
struct MaxfnOutput {
    schema_version: u32,
    ball_plateau: f64,
    hl_constant_simple: f64,
    k_min: KPoint,
    hl_constant_heat: f64,
    heat_estimate: Vec<HeatEstimateCheck>,
    lemma: Option<LemmaReport>,
    all_pass: bool,
}

fn curve_text(curve: Curve, n: usize) -> Result<String, CliError> {
    if n < 2 {
        return Err(CliError::Parse("--points must be at least 2".into()));
    }
    let mut s = String::new();
    match curve {
        Curve::K => {
            s.push_str("t,k\n");
            for p in k_curve(K_CURVE_RANGE.0, K_CURVE_RANGE.1, n)? {
                let _ = writeln!(s, "{:.10e},{:.12e}", p.t, p.k);
            }
        }
        Curve::Chi => {
            s.push_str("r,chi,psi,psi1,psi2\n");
            for i in 0..n {
                let r = 1.5 * i as f64 / (n - 1) as f64;
                let (p1, p2) = psi_split(r)?;
                let _ = writeln!(s, "{r:.10e},{:.12e},{:.12e},{p1:.12e},{p2:.12e}", chi(r)?, psi(r)?);
            }
        }
    }
    Ok(s)
}

pub fn maxfn(args: &MaxfnArgs) -> Result<(), CliError> {
    if let Some(curve) = args.curve {
        return emit(&args.out, &curve_text(curve, args.points)?);
    }
    let k_min = minimize_k()?;
    let heat = HEAT_CHECK_TIMES
        .iter()
        .map(|&t| check_heat_estimate(t, HEAT_CHECK_SAMPLES))
        .collect::<Result<Vec<_>, _>>()?;
    let lemma = if args.lemma {
        Some(verify_lemma(&default_lemma_corpus(), &MaximalGrid::default())?)
    } else {
        None
    };
    let all_pass = heat.iter().all(|h| h.holds) && lemma.as_ref().is_none_or(|l| l.holds);
    let out = MaxfnOutput {
        schema_version: REPORT_SCHEMA_VERSION,
        ball_plateau: c_chi()?,
        hl_constant_simple: hl_constant_simple()?,
        hl_constant_heat: hl_constant_heat()?,
        k_min,
        heat_estimate: heat,
        lemma,
        all_pass,
    };
    let text = match args.out.format {
        Format::Json => to_json(&out)?,
        Format::Csv => match &out.lemma {
            Some(l) => l.to_csv(),
            None => {
                let mut s = String::from("quantity,value\n");
                let _ = writeln!(s, "ball_plateau,{:.12e}", out.ball_plateau);
                let _ = writeln!(s, "hl_constant_simple,{:.12e}", out.hl_constant_simple);
                let _ = writeln!(s, "k_min,{:.12e}", out.k_min.k);
                let _ = writeln!(s, "t_min,{:.12e}", out.k_min.t);
                let _ = writeln!(s, "hl_constant_heat,{:.12e}", out.hl_constant_heat);
                s
            }
        },
        Format::Table => {
            let mut s = String::new();
            let _ = writeln!(s, "ball-indicator plateau     {:.8}", out.ball_plateau);
            let _ = writeln!(s, "layer-cake constant        {:.8}", out.hl_constant_simple);
            let _ = writeln!(s, "min K(T)                   {:.8} at T = {:.6}", out.k_min.k, out.k_min.t);
            let _ = writeln!(s, "heat-kernel constant       {:.8}", out.hl_constant_heat);
            let _ = writeln!(s, "r* = {:.10}", r_star());
            for h in &out.heat_estimate {
                let _ = writeln!(s, "heat estimate at T = {}: min slack {:.3e} ({})", h.t, h.min_slack, h.holds);
            }
            if let Some(l) = &out.lemma {
                for r in &l.rows {
                    let _ = writeln!(s, "  {:24} ratio {:.6}", r.function_id, r.ratio);
                }
                let _ = writeln!(s, "max ratio {:.6} ({}) ≤ {:.6}: {}", l.max_ratio, l.witness, l.threshold, l.holds);
            }
            s
        }
    };
    emit(&args.out, &text)?;
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Failed("maximal-function checks failed".into()))
    }
}

// ------------------------------------------------------------------ jellium

#[derive(Debug, Serialize)]
struct JelliumOutput {
    schema_version: u32,
    #[serde(flatten)]
    report: JelliumReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    fourier_shift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    yukawa_nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    yukawa_shift: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    finite: Option<FiniteReport>,
}

pub fn jellium(args: &JelliumArgs) -> Result<(), CliError> {
    if args.cutoff < lobound::jellium::energy::MIN_SHELL_CUTOFF {
        return Err(CliError::Parse(format!(
            "--cutoff must be at least {}",
            lobound::jellium::energy::MIN_SHELL_CUTOFF
        )));
    }
    if let Some(nu) = args.yukawa {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(CliError::Parse(format!("--yukawa needs ν > 0, got {nu}")));
        }
    }
    let reports = if args.table {
        jellium_table(args.cutoff)?
    } else {
        let l = BravaisLattice::of_kind(args.lattice)?;
        vec![JelliumReport::compute(&l, args.cutoff)?]
    };
    let mut outputs = Vec::new();
    for r in reports {
        let l = BravaisLattice::of_kind(r.lattice)?;
        let fourier_shift = if args.fourier {
            Some(shift_fourier_check(&l, &DEFAULT_K_VALUES)?)
        } else {
            None
        };
        let yukawa = args.yukawa.map(|nu| yukawa_shift(&l, nu)).transpose()?;
        let finite = args
            .finite
            .map(|n| decomposition_check(&l, n, args.carving))
            .transpose()?;
        outputs.push(JelliumOutput {
            schema_version: REPORT_SCHEMA_VERSION,
            report: r,
            fourier_shift,
            yukawa_nu: args.yukawa,
            yukawa_shift: yukawa,
            finite,
        });
    }
    let converged = outputs.iter().all(|o| o.report.converged);
    let text = match args.out.format {
        Format::Json if args.table => to_json(&outputs)?,
        Format::Json => to_json(&outputs[0])?,
        Format::Csv => {
            let mut s = format!("{}\n", JelliumReport::csv_header());
            for o in &outputs {
                let _ = writeln!(s, "{}", o.report.csv_row());
            }
            s
        }
        Format::Table => {
            let mut s = format!(
                "{:8} {:>12} {:>12} {:>12} {:>10}\n",
                "lattice", "shift", "indirect", "e_jel", "tail"
            );
            for o in &outputs {
                let r = &o.report;
                let _ = writeln!(
                    s,
                    "{:8} {:>12.6} {:>12.6} {:>12.6} {:>10.1e}",
                    r.lattice.name(),
                    r.shift,
                    r.indirect,
                    r.e_jel,
                    r.tail_estimate
                );
                if let Some(f) = o.fourier_shift {
                    let _ = writeln!(s, "    Fourier-limit shift {f:.8}");
                }
                if let (Some(nu), Some(y)) = (o.yukawa_nu, o.yukawa_shift) {
                    let _ = writeln!(s, "    Yukawa shift (ν = {nu}) {y:.3e}");
                }
                if let Some(f) = &o.finite {
                    let _ = writeln!(
                        s,
                        "    N = {} ({:?}): indirect/N {:.6}, (U−I)/2N {:.6}, (I−D)/2N {:.6}",
                        f.n, f.carving, f.indirect_per_particle, f.coulomb_minus_interaction, f.interaction_minus_direct
                    );
                }
            }
            s
        }
    };
    emit(&args.out, &text)?;
    if converged {
        Ok(())
    } else {
        Err(CliError::Failed("lattice sum tail above tolerance; raise --cutoff".into()))
    }
}
