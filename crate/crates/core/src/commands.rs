//! The `entropy`, `verify` and `rate` subcommands.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::config::{
    self, EntropyConfig, ModulusSpec, RateConfig, RatioSpec, StudySpec, VerifyConfig,
};
use crate::covering::{entropy_sweep, measured_log_covering, CoverOptions, MetricSpec};
use crate::engine::{
    boundlog_check, fourth_moment_bound_check, holder_diameter_check, lemma22_sweep, lemma33_sweep,
    log_grid, make_concave_log_modulus, young_pair_check, YoungPair,
};
use crate::error::{Error, Result};
use crate::integral::{
    bracketing_entropy_integral, check_j_structure, default_structure_grid, dominates,
    uniform_entropy_integral, EntropyCurve,
};
use crate::montecarlo::{
    contraction_chain_check, theorem_ratio_study, variance_decomposition_check, McConfig,
    McEstimate, Theorem,
};
use crate::rates::{
    empirical_rate_experiment, modulus_from_entropy, rate_from_entropy, solve_rate,
    ModulusFunction, RateExperiment,
};
use crate::report::{cell, OutputDir, RunHeader, Table};
use crate::seed::{noise_rng, replication_seed};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub workers: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    /// False when an asserted check failed.
    pub passed: bool,
    pub files: Vec<String>,
    /// One line per check or result, for the terminal.
    pub lines: Vec<String>,
}

fn open<C: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<config::LoadedConfig<C>> {
    config::load(path)
}

#[derive(Serialize)]
struct EntropySummary {
    class: String,
    class_size: usize,
    family: String,
    metric_r: f64,
    sweep_rows: usize,
    model_curve: Option<String>,
    /// First radius where the model falls below the measured uniform entropy.
    model_violation: Option<(f64, f64, f64)>,
}

pub fn run_entropy(path: &Path, opts: &RunOptions) -> Result<Outcome> {
    let loaded = open::<EntropyConfig>(path)?;
    let cfg = loaded.config;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let grid = cfg.grid.build()?;
    let measure = cfg.measure.build(&grid)?;
    let class = cfg.class.build(&grid)?;
    if cfg.eps_grid.windows(2).any(|w| !(w[0] < w[1])) || cfg.eps_grid.is_empty() {
        return Err(Error::Config(
            "eps_grid must be nonempty and strictly increasing".into(),
        ));
    }
    let cover = CoverOptions {
        exact_cap: cfg.exact_cap,
    };
    let metric = MetricSpec::new(measure.clone(), cfg.metric_r)?;
    let family = cfg.family.build(&grid, &measure, seed)?;
    let sweep = entropy_sweep(&class, &cfg.eps_grid, &metric, &cover)?;
    let uniform = measured_log_covering(&class, &cfg.eps_grid, cfg.metric_r, &family, &cover)?;

    let mut t = Table::new(&[
        "eps",
        "covering_exact",
        "covering_greedy",
        "packing",
        "bracketing",
        "log_uniform_covering",
    ]);
    for (row, &(_, lu)) in sweep.iter().zip(&uniform) {
        t.push(vec![
            cell(row.eps),
            cell(row.covering_exact),
            cell(row.covering_greedy),
            cell(row.packing),
            cell(row.bracketing),
            cell(lu),
        ]);
    }

    let uniform_curve = EntropyCurve::from_measured(&uniform)?;
    let bracket_logs: Vec<(f64, f64)> = sweep
        .iter()
        .map(|r| (r.eps, (r.bracketing as f64).ln()))
        .collect();
    let bracket_curve = EntropyCurve::from_measured(&bracket_logs)?;
    let model = cfg.curve.as_ref().map(|c| c.entropy_curve()).transpose()?;
    let mut jt = Table::new(&[
        "delta",
        "j_uniform",
        "j_bracketing",
        "lower_cutoff",
        "j_model",
        "model_quadrature_error",
    ]);
    for &d in &cfg.delta_grid {
        let ju = uniform_entropy_integral(&uniform_curve, d).map_err(coverage_as_config)?;
        let jb = bracketing_entropy_integral(&bracket_curve, d).map_err(coverage_as_config)?;
        let jm = model
            .as_ref()
            .map(|m| uniform_entropy_integral(m, d))
            .transpose()?;
        jt.push(vec![
            cell(d),
            cell(ju.value),
            cell(jb.value),
            cell(ju.lower_cutoff),
            cell(jm.map(|r| r.value)),
            cell(jm.map(|r| r.quadrature_error_estimate)),
        ]);
    }
    let model_violation = model
        .as_ref()
        .map(|m| dominates(m, &uniform))
        .transpose()?
        .flatten();

    let mut out = OutputDir::create(&opts.out, RunHeader::new(seed, &loaded.bytes))?;
    out.csv("entropy_sweep.csv", &t)?;
    out.csv("entropy_integral.csv", &jt)?;
    out.json(
        "entropy_summary.json",
        &EntropySummary {
            class: class.label().to_string(),
            class_size: class.len(),
            family: family.description.clone(),
            metric_r: cfg.metric_r,
            sweep_rows: t.len(),
            model_curve: model.as_ref().map(|m| m.description().to_string()),
            model_violation,
        },
    )?;
    let mut lines = vec![format!(
        "entropy: {} ({} members), {} radii",
        class.label(),
        class.len(),
        t.len()
    )];
    if let Some((e, a, b)) = model_violation {
        lines.push(format!(
            "model curve below measured entropy at eps={e}: {a} < {b}"
        ));
    }
    Ok(Outcome {
        passed: true,
        files: out.written().to_vec(),
        lines,
    })
}

fn coverage_as_config(e: Error) -> Error {
    match e {
        Error::Coverage { .. } => Error::Config(format!("delta_grid exceeds eps_grid: {e}")),
        other => other,
    }
}

/// One verified statement.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub check: String,
    pub subject: String,
    pub value: f64,
    pub threshold: f64,
    pub asserted: bool,
    pub passed: bool,
}

impl Check {
    fn at_most(
        check: impl Into<String>,
        subject: impl Into<String>,
        value: f64,
        threshold: f64,
    ) -> Self {
        Self {
            check: check.into(),
            subject: subject.into(),
            value,
            threshold,
            asserted: true,
            passed: value <= threshold,
        }
    }
}

#[derive(Serialize)]
struct VerifySummary<'a> {
    passed: bool,
    checks: usize,
    failed: Vec<&'a Check>,
}

struct VerifyTables {
    checks: Vec<Check>,
    ratios: Table,
    chain: Table,
    lemmas: Table,
}

pub fn run_verify(path: &Path, opts: &RunOptions) -> Result<Outcome> {
    let loaded = open::<VerifyConfig>(path)?;
    let cfg = loaded.config;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let mut tabs = VerifyTables {
        checks: Vec::new(),
        ratios: Table::new(&[
            "study",
            "theorem",
            "delta",
            "n",
            "class_size",
            "mean",
            "stderr",
            "bound",
            "ratio",
            "ratio_stderr",
            "asserted",
            "clamped",
        ]),
        chain: Table::new(&[
            "study",
            "link",
            "n",
            "delta",
            "lhs",
            "factor",
            "rhs",
            "diff_mean",
            "diff_stderr",
            "asserted",
            "holds",
        ]),
        lemmas: Table::new(&[
            "lemma", "exponent", "a", "b", "r", "z_max", "j_z", "bound", "ratio",
        ]),
    };

    if cfg.structure_points < 2 {
        return Err(Error::Config("structure_points must be ≥ 2".into()));
    }
    let grid = default_structure_grid::<f64>(cfg.structure_points);
    for c in &cfg.curves {
        let j = c.entropy_fn()?;
        let rep = check_j_structure(j.as_ref(), &grid)?;
        for p in &rep.properties {
            let mut ch = Check::at_most(
                format!("structure.{}", p.name),
                &rep.curve,
                p.worst_violation,
                rep.tolerance,
            );
            ch.passed = p.passed;
            tabs.checks.push(ch);
        }
    }
    for s in &cfg.studies {
        run_study(s, seed, opts.workers, &mut tabs)?;
    }
    if let Some(l) = &cfg.lemmas {
        for (name, rows, k) in [
            ("lemma22", lemma22_sweep()?, l.k22),
            ("lemma33", lemma33_sweep()?, l.k33),
        ] {
            let worst = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
            for r in &rows {
                tabs.lemmas.push(vec![
                    name.into(),
                    cell(r.exponent),
                    cell(r.a),
                    cell(r.b),
                    cell(r.r),
                    cell(r.z_max),
                    cell(r.j_z),
                    cell(r.bound),
                    cell(r.ratio),
                ]);
            }
            tabs.checks.push(Check::at_most(
                format!("{name}.max_ratio"),
                format!("{} sweep points", rows.len()),
                worst,
                k,
            ));
        }
    }
    if let Some(d) = &cfg.devices {
        device_checks(d, seed, &mut tabs.checks)?;
    }

    let passed = tabs.checks.iter().all(|c| c.passed || !c.asserted);
    let mut ct = Table::new(&[
        "check",
        "subject",
        "value",
        "threshold",
        "asserted",
        "passed",
    ]);
    for c in &tabs.checks {
        ct.push(vec![
            c.check.clone(),
            c.subject.clone(),
            cell(c.value),
            cell(c.threshold),
            cell(c.asserted),
            cell(c.passed),
        ]);
    }
    let mut out = OutputDir::create(&opts.out, RunHeader::new(seed, &loaded.bytes))?;
    out.csv("checks.csv", &ct)?;
    if !tabs.ratios.is_empty() {
        out.csv("ratios.csv", &tabs.ratios)?;
    }
    if !tabs.chain.is_empty() {
        out.csv("chain.csv", &tabs.chain)?;
    }
    if !tabs.lemmas.is_empty() {
        out.csv("lemmas.csv", &tabs.lemmas)?;
    }
    out.json(
        "verify_summary.json",
        &VerifySummary {
            passed,
            checks: tabs.checks.len(),
            failed: tabs
                .checks
                .iter()
                .filter(|c| c.asserted && !c.passed)
                .collect(),
        },
    )?;
    let lines = tabs
        .checks
        .iter()
        .map(|c| {
            let tag = match (c.asserted, c.passed) {
                (false, _) => "INFO",
                (true, true) => "PASS",
                (true, false) => "FAIL",
            };
            format!(
                "{tag} {} [{}] value={} threshold={}",
                c.check,
                c.subject,
                cell(c.value),
                cell(c.threshold)
            )
        })
        .collect();
    Ok(Outcome {
        passed,
        files: out.written().to_vec(),
        lines,
    })
}

fn theorem_of(r: &RatioSpec) -> Theorem<f64> {
    match *r {
        RatioSpec::Thm21 { .. } => Theorem::Thm21,
        RatioSpec::SmallDelta { .. } => Theorem::SmallDelta,
        RatioSpec::Thm31 { p, .. } => Theorem::Thm31 { p },
        RatioSpec::Thm32 { p, c, .. } => Theorem::Thm32 { p, c },
    }
}

fn run_study(s: &StudySpec, seed: u64, workers: usize, tabs: &mut VerifyTables) -> Result<()> {
    let grid = s.grid.build()?;
    let measure = s.measure.build(&grid)?;
    let class = s.class.build(&grid)?;
    let curve = s.curve.entropy_curve()?;
    let family = s.family.build(&grid, &measure, seed)?;
    let mc = McConfig {
        measure,
        class,
        n_grid: s.n_grid.clone(),
        delta_grid: s.delta_grid.clone(),
        replications: s.replications,
        master_seed: seed,
        workers,
    };
    mc.validate()?;
    for spec in &s.ratios {
        let study = theorem_ratio_study(
            &mc,
            theorem_of(spec),
            &curve,
            &family,
            &CoverOptions::default(),
        )?;
        for r in &study.rows {
            tabs.ratios.push(vec![
                s.name.clone(),
                study.theorem.clone(),
                cell(r.delta),
                cell(r.n),
                cell(r.class_size),
                cell(r.estimate.mean),
                cell(r.estimate.stderr),
                cell(r.bound),
                cell(r.ratio),
                cell(r.ratio_stderr),
                cell(r.asserted),
                cell(r.clamped),
            ]);
        }
        let subject = format!("{} {} {}", s.name, study.theorem, study.curve);
        tabs.checks.push(Check::at_most(
            "ratio.max",
            subject.clone(),
            study.max_ratio,
            spec.max_ratio(),
        ));
        if let Some(limit) = spec.max_abs_slope() {
            tabs.checks.push(match study.slope {
                Some(fit) => Check::at_most("ratio.abs_slope", subject, fit.slope.abs(), limit),
                None => Check {
                    passed: false,
                    ..Check::at_most(
                        "ratio.abs_slope",
                        format!("{subject} (no fit)"),
                        f64::NAN,
                        limit,
                    )
                },
            });
        }
    }
    let push_link =
        |tab: &mut Table, name: &str, n: usize, d: f64, l: &crate::montecarlo::PairedCheck<f64>| {
            let m = |e: &McEstimate<f64>| cell(e.mean);
            tab.push(vec![
                s.name.clone(),
                name.to_string(),
                cell(n),
                cell(d),
                m(&l.lhs),
                cell(l.factor),
                m(&l.rhs),
                cell(l.diff.mean),
                cell(l.diff.stderr),
                cell(l.asserted),
                cell(l.holds()),
            ]);
        };
    for (enabled, name) in [(s.chain, "chain"), (s.variance, "variance")] {
        if !enabled {
            continue;
        }
        let mut failures = 0usize;
        let mut total = 0usize;
        for &n in &s.n_grid {
            for &d in &s.delta_grid {
                let links = if name == "chain" {
                    contraction_chain_check(&mc, n, d)?.links
                } else {
                    vec![variance_decomposition_check(&mc, n, d)?]
                };
                for l in &links {
                    push_link(&mut tabs.chain, l.name, n, d, l);
                    if l.asserted {
                        total += 1;
                        failures += usize::from(!l.holds());
                    }
                }
            }
        }
        tabs.checks.push(Check::at_most(
            format!("{name}.violations"),
            format!("{} ({total} asserted links)", s.name),
            failures as f64,
            0.0,
        ));
    }
    Ok(())
}

/// Log-uniform draw on `[lo, hi]`.
fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// Young pair orders exercised by the device checks.
pub const YOUNG_ORDERS: [f64; 3] = [0.5, 1.0, 2.0];

fn device_checks(d: &config::DeviceSpec, seed: u64, checks: &mut Vec<Check>) -> Result<()> {
    // Young's inequality and the inverse pair
    let mut rng = noise_rng(replication_seed(seed, 0x5955_4f47));
    for &r in &YOUNG_ORDERS {
        let y = YoungPair::new(r)?;
        let (mut worst, mut inv) = (f64::NEG_INFINITY, 0.0f64);
        for _ in 0..d.young_pairs {
            let f = log_uniform(&mut rng, 1e-3, 1e3);
            let g_hi = if r < 1.0 { 20.0 } else { 200.0 };
            let g = log_uniform(&mut rng, 1e-3, g_hi);
            let c = young_pair_check(&y, f, g)?;
            worst = worst.max((c.lhs - c.rhs) / c.rhs.abs().max(1.0));
            let back = y.psi_bar(y.psi(f))?;
            inv = inv.max((back - f).abs() / f.max(1.0));
        }
        checks.push(Check::at_most(
            "young.excess",
            format!("r={r}, {} pairs", d.young_pairs),
            worst,
            1e-9,
        ));
        checks.push(Check::at_most("young.inverse", format!("r={r}"), inv, 1e-9));
    }
    let k = make_concave_log_modulus(1.0)?;
    checks.push(Check::at_most(
        "modulus.breakpoint",
        "r=1, t*=e^-2",
        (k.t_star - (-2.0f64).exp()).abs(),
        1e-10,
    ));

    // log-bound constant under grid refinement
    for &r in &YOUNG_ORDERS {
        let coarse = boundlog_check(r, &log_grid(1e-3, 1e6, 200), &log_grid(1e-3, 1e3, 100))?;
        let fine = boundlog_check(r, &log_grid(1e-3, 1e6, 400), &log_grid(1e-3, 1e3, 200))?;
        checks.push(Check::at_most(
            "boundlog.refinement",
            format!("r={r}, constant={fine}"),
            (fine - coarse).abs() / fine,
            d.max_refinement_change,
        ));
    }

    let grid = d.grid.build()?;
    let measure = d.measure.build(&grid)?;
    let class = d.class.build(&grid)?;
    if d.n_list.is_empty() || d.draws < 2 {
        return Err(Error::Config(
            "devices need a nonempty n_list and at least 2 draws".into(),
        ));
    }
    for &n in &d.n_list {
        let draws: Vec<_> = (0..d.draws)
            .map(|i| measure.draw_sample(n, replication_seed(seed, i as u64)))
            .collect::<Result<_>>()?;
        for &p in &d.holder_p {
            let worst = draws
                .iter()
                .map(|dr| {
                    holder_diameter_check(&class, dr, p)
                        .map(|c| (c.lhs - c.rhs) / c.rhs.abs().max(1.0))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            checks.push(Check::at_most(
                "holder.excess",
                format!("p={p}, n={n}, {} draws", d.draws),
                worst,
                1e-10,
            ));
        }
        let ratios = draws
            .iter()
            .map(|dr| {
                fourth_moment_bound_check(&class, &measure, dr, 2.0 / d.fourth_moment_p)
                    .map(|x| x.max_ratio)
            })
            .collect::<Result<Vec<_>>>()?;
        let est = McEstimate::from_samples(&ratios);
        let sd = est.stderr * (ratios.len() as f64).sqrt();
        let cv = if est.mean > 0.0 { sd / est.mean } else { 0.0 };
        let worst = ratios.iter().copied().fold(0.0, f64::max);
        checks.push(Check::at_most(
            "fourth_moment.cv",
            format!(
                "p={}, n={n}, {} draws, max ratio={}",
                d.fourth_moment_p,
                d.draws,
                cell(worst)
            ),
            cv,
            d.max_cv,
        ));
    }
    Ok(())
}

#[derive(Serialize)]
struct RateSummary {
    modulus: String,
    rates: Vec<RateEntry>,
    experiment: Option<ExperimentSummary>,
    passed: bool,
}

#[derive(Serialize)]
struct RateEntry {
    n: usize,
    delta_n: f64,
    no_rate: bool,
}

#[derive(Serialize)]
struct ExperimentSummary {
    slope_available: bool,
    slope: Option<f64>,
    half_width: Option<f64>,
    predicted_slope: f64,
    slope_interval: Option<[f64; 2]>,
    in_interval: Option<bool>,
}

pub fn run_rate(path: &Path, opts: &RunOptions) -> Result<Outcome> {
    let loaded = open::<RateConfig>(path)?;
    let cfg = loaded.config;
    let seed = opts.seed.unwrap_or(cfg.seed);
    if cfg.n_grid.is_empty() {
        return Err(Error::Config("n_grid must be nonempty".into()));
    }
    let mut label = String::new();
    let mut rates = Vec::new();
    for &n in &cfg.n_grid {
        let sol = match &cfg.modulus {
            ModulusSpec::Power { c, a } => {
                let phi = ModulusFunction::power(*c, *a)?;
                label = phi.provenance().to_string();
                solve_rate(&phi, n)?
            }
            ModulusSpec::Entropy { curve } => {
                let phi = modulus_from_entropy(curve.entropy_fn()?, n)?;
                label = format!(
                    "J(δ)(1+J(δ)/(δ²√n)) with J={}",
                    curve.entropy_fn()?.describe()
                );
                solve_rate(&phi, n)?
            }
            ModulusSpec::EntropyDirect { curve } => {
                let j: Arc<dyn crate::integral::EntropyFn<f64>> = curve.entropy_fn()?;
                label = format!("J={}", j.describe());
                rate_from_entropy(j, n)?
            }
        };
        rates.push(RateEntry {
            n,
            delta_n: sol.delta,
            no_rate: sol.no_rate,
        });
    }
    let mut rt = Table::new(&["n", "delta_n", "no_rate"]);
    for r in &rates {
        rt.push(vec![cell(r.n), cell(r.delta_n), cell(r.no_rate)]);
    }
    let mut lines: Vec<String> = rates
        .iter()
        .map(|r| {
            format!(
                "n={} delta_n={}{}",
                r.n,
                r.delta_n,
                if r.no_rate { " (no rate)" } else { "" }
            )
        })
        .collect();
    let mut passed = true;
    let mut out = OutputDir::create(&opts.out, RunHeader::new(seed, &loaded.bytes))?;
    out.csv("rates.csv", &rt)?;
    let experiment = match &cfg.experiment {
        None => None,
        Some(e) => {
            let rep = empirical_rate_experiment(&RateExperiment {
                n_list: e.n_list.clone(),
                replications: e.replications,
                sigma: e.sigma,
                seed,
                workers: opts.workers,
            })?;
            let mut et = Table::new(&["n", "mean_error", "stderr"]);
            for r in &rep.rows {
                et.push(vec![cell(r.n), cell(r.mean_error), cell(r.stderr)]);
            }
            out.csv("experiment.csv", &et)?;
            let slope = rep.fit.map(|f| f.slope);
            let in_interval = match (slope, e.slope_interval) {
                (Some(s), Some([lo, hi])) => Some(lo <= s && s <= hi),
                _ => None,
            };
            if in_interval == Some(false) {
                passed = false;
            }
            lines.push(match slope {
                Some(s) => format!(
                    "{} empirical slope {s} ± {} (predicted {})",
                    match in_interval {
                        Some(true) => "PASS",
                        Some(false) => "FAIL",
                        None => "INFO",
                    },
                    cell(rep.half_width),
                    rep.predicted_slope
                ),
                None => {
                    "INFO empirical slope unavailable (fewer than two usable sample sizes)".into()
                }
            });
            Some(ExperimentSummary {
                slope_available: slope.is_some(),
                slope,
                half_width: rep.half_width,
                predicted_slope: rep.predicted_slope,
                slope_interval: e.slope_interval,
                in_interval,
            })
        }
    };
    out.json(
        "rate_summary.json",
        &RateSummary {
            modulus: label,
            rates,
            experiment,
            passed,
        },
    )?;
    Ok(Outcome {
        passed,
        files: out.written().to_vec(),
        lines,
    })
}
