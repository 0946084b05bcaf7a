//! One runner per suite. Each returns its checks, a JSON details block and
//! any tables it wrote.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use metagibbs::bounds::{check_thm3, check_thm4, rate_sweep, write_rate_csv, SweepFamily};
use metagibbs::mean_est::{gen_closed_form, gen_monte_carlo, isk_closed_form, MeanEstConfig, SampleLaw};
use metagibbs::meta::{theorem1_report, MetaInstance};
use metagibbs::presets::{bern2_with, random_meta_instance, random_meta_shape, random_tiny_super};
use metagibbs::super_task::{hellstrom_intermediate_bounds, theorem2_terms, SuperInstance};

use crate::config::{BoundsConfig, MeanEstimationConfig, RateSweepConfig, SweepSpec, Theorem1Config, Theorem2Config};
use crate::error::CliError;
use crate::report::{max_abs, min_of, Check};

/// Ordering tolerance for the loss inequalities.
const ORDER_TOL: f64 = 1e-10;
/// Tolerance for the isolated `1/(mn)` component.
const COMPONENT_TOL: f64 = 1e-10;
/// Tolerance for the closed-form identity `γ·gen = ISKL`.
const CLOSED_FORM_TOL: f64 = 1e-12;

pub struct Outcome {
    pub checks: Vec<Check>,
    pub details: Value,
    pub artifacts: Vec<String>,
}

fn outcome(checks: Vec<Check>, details: impl Serialize) -> Result<Outcome, CliError> {
    Ok(Outcome { checks, details: serde_json::to_value(details)?, artifacts: Vec::new() })
}

fn labelled<T: Serialize>(label: &str, value: &T) -> Result<Value, CliError> {
    Ok(json!({ "instance": label, "result": serde_json::to_value(value)? }))
}

fn meta_instances(
    spec: &crate::config::MetaSpec,
    gammas: &[f64],
    random: u64,
    seed: u64,
) -> Result<Vec<(String, MetaInstance)>, CliError> {
    let mut out = Vec::new();
    for &g in gammas {
        out.push((format!("configured,gamma={g}"), spec.build(g)?));
    }
    for idx in 0..random {
        let shape = random_meta_shape(seed, idx);
        for &g in gammas {
            out.push((format!("random#{idx},gamma={g}"), random_meta_instance(seed, idx, shape, g)));
        }
    }
    Ok(out)
}

fn super_instances(
    specs: &[&crate::config::SuperSpec],
    gammas: &[f64],
    random: u64,
    seed: u64,
) -> Result<Vec<(String, SuperInstance)>, CliError> {
    let mut out = Vec::new();
    for (k, spec) in specs.iter().enumerate() {
        for &g in gammas {
            out.push((format!("configured#{k},gamma={g}"), spec.build(g)?));
        }
    }
    // random variants carry their own γ
    for idx in 0..random {
        let n = 1 + (idx as usize % 2);
        out.push((format!("random#{idx},n={n}"), random_tiny_super(seed, idx, n)));
    }
    Ok(out)
}

fn validate_gammas(gammas: &[f64]) -> Result<(), CliError> {
    if gammas.is_empty() {
        return Err(CliError::ConfigInvalid("gammas must not be empty".into()));
    }
    if let Some(g) = gammas.iter().find(|g| g.is_nan() || **g <= 0.0 || g.is_infinite()) {
        return Err(CliError::ConfigInvalid(format!("gamma must be positive and finite, got {g}")));
    }
    Ok(())
}

pub fn verify_theorem1(c: &Theorem1Config, seed: u64, cap: u128) -> Result<Outcome, CliError> {
    validate_gammas(&c.gammas)?;
    let insts = meta_instances(&c.instance, &c.gammas, c.random_instances, seed)?;
    let mut records = Vec::with_capacity(insts.len());
    let (mut res, mut res_t, mut res_d, mut gaps) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (label, inst) in &insts {
        let r = theorem1_report(inst, cap)?;
        res.push(r.residual);
        res_t.push(r.per_task.residual);
        res_d.push(r.decomposition.residual);
        if let Some(g) = r.retrained_gap {
            gaps.push(g);
        }
        records.push(labelled(label, &r)?);
    }
    let checks = vec![
        Check::abs_at_most("max |gen_direct - iskl/gamma|", max_abs(res), c.tolerance),
        Check::abs_at_most("max |per-task residual|", max_abs(res_t), c.tolerance),
        Check::abs_at_most("max |decomposition residual|", max_abs(res_d), c.tolerance),
        // the retrained-learner reading is not an exact identity; shown for reference
        Check::abs_at_most("max |retrained population risk gap|", max_abs(gaps), c.tolerance).informational(),
    ];
    outcome(checks, json!({ "instances": records.len(), "records": records }))
}

pub fn verify_theorem2(c: &Theorem2Config, seed: u64, cap: u128) -> Result<Outcome, CliError> {
    validate_gammas(&c.gammas)?;
    let insts = super_instances(&[&c.instance], &c.gammas, c.random_variants, seed)?;
    let mut records = Vec::with_capacity(insts.len());
    let mut terms = Vec::with_capacity(insts.len());
    for (label, inst) in &insts {
        let t = theorem2_terms(inst, cap)?;
        records.push(labelled(label, &t)?);
        terms.push(t);
    }
    let tol = c.tolerance;
    let col = |f: fn(&metagibbs::super_task::Theorem2Terms) -> f64| terms.iter().map(f).collect::<Vec<_>>();
    let checks = vec![
        Check::abs_at_most("max |item 1 residual|", max_abs(col(|t| t.residual_1)), tol),
        Check::abs_at_most("max |item 2 residual|", max_abs(col(|t| t.residual_2)), tol),
        Check::abs_at_most("max |item 3 residual|", max_abs(col(|t| t.residual_3)), tol),
        Check::abs_at_most("max |item 4 residual|", max_abs(col(|t| t.residual_4)), tol),
        Check::abs_at_most("max |gen_super - final expression|", max_abs(col(|t| t.gen_residual)), tol),
        Check::at_least_neg_tol("min (L_bar - L_hat)", min_of(col(|t| t.losses.bar - t.losses.hat)), ORDER_TOL),
        Check::at_least_neg_tol("min (L_tilde - L_hat)", min_of(col(|t| t.losses.tilde - t.losses.hat)), ORDER_TOL),
        Check::at_least_neg_tol("min (L_pop - L_tilde)", min_of(col(|t| t.losses.pop - t.losses.tilde)), ORDER_TOL),
        Check::abs_at_most("max |item 1 residual, cross-task losses|", max_abs(col(|t| t.residual_1_cross)), tol)
            .informational(),
        Check::abs_at_most("max |item 3 residual, cross-task losses|", max_abs(col(|t| t.residual_3_cross)), tol)
            .informational(),
        Check::abs_at_most("max |item 1 residual, rearranged form|", max_abs(col(|t| t.residual_1_alt)), tol)
            .informational(),
    ];
    outcome(checks, json!({ "instances": records.len(), "records": records }))
}

pub fn mean_estimation(c: &MeanEstimationConfig, seed: u64) -> Result<Outcome, CliError> {
    c.model.validate()?;
    if c.trials < 100 {
        return Err(CliError::ConfigInvalid(format!("trials must be at least 100, got {}", c.trials)));
    }
    let mut variants: Vec<(String, MeanEstConfig)> = vec![("configured".into(), c.model)];
    for &s in &c.sigma_tau_sweep {
        variants.push((format!("sigma_tau={s}"), MeanEstConfig { sigma_tau: s, ..c.model }));
    }
    if c.non_gaussian {
        variants
            .push(("shifted-rademacher".into(), MeanEstConfig { sample_law: SampleLaw::ShiftedRademacher, ..c.model }));
    }
    let mut checks = Vec::new();
    let mut records = Vec::new();
    for (label, cfg) in &variants {
        cfg.validate()?;
        let closed = gen_closed_form(cfg)?;
        let iskl = isk_closed_form(cfg)?;
        let est = gen_monte_carlo(cfg, c.trials, seed, c.mode.into())?;
        let z = (est.estimate - closed) / est.stderr;
        checks.push(Check::abs_at_most(format!("{label}: (mc - closed)/stderr"), z, c.z_threshold));
        checks.push(Check::abs_at_most(
            format!("{label}: gamma*gen - iskl"),
            cfg.gamma * closed - iskl,
            CLOSED_FORM_TOL,
        ));
        records.push(json!({
            "variant": label,
            "config": cfg,
            "gen_closed": closed,
            "iskl_closed": iskl,
            "monte_carlo": est,
        }));
    }
    outcome(checks, json!({ "mode": c.mode, "trials": c.trials, "records": records }))
}

pub fn bounds(c: &BoundsConfig, seed: u64, cap: u128) -> Result<Outcome, CliError> {
    validate_gammas(&c.gammas)?;
    let mut metas = Vec::new();
    for spec in &c.meta {
        metas.extend(meta_instances(spec, &c.gammas, 0, seed)?);
    }
    for idx in 0..c.random_meta {
        let shape = random_meta_shape(seed, idx);
        for &g in &c.gammas {
            metas.push((format!("random#{idx},gamma={g}"), random_meta_instance(seed, idx, shape, g)));
        }
    }
    let supers = super_instances(&c.super_tasks.iter().collect::<Vec<_>>(), &c.gammas, c.random_super, seed)?;
    let (mut thm3, mut chen, mut meta_records) = (Vec::new(), Vec::new(), Vec::new());
    for (label, inst) in &metas {
        let r = check_thm3(inst)?;
        thm3.push(r.slack);
        chen.push(r.ingredients["chen_slack"]);
        meta_records.push(labelled(label, &r)?);
    }
    let (mut thm4, mut task, mut sample, mut cross, mut super_records) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (label, inst) in &supers {
        let r = check_thm4(inst)?;
        let h = hellstrom_intermediate_bounds(inst, cap)?;
        thm4.push(r.slack);
        task.push(h.task_slack);
        sample.push(h.sample_slack);
        cross.push(h.task_slack_cross);
        super_records.push(json!({ "instance": label, "thm4": r, "intermediate": h }));
    }
    let tol = c.tolerance;
    let checks = vec![
        Check::at_least_neg_tol("min sub-gaussian lautum bound slack", min_of(thm3), tol),
        Check::at_least_neg_tol("min mutual-information bound slack", min_of(chen), tol),
        Check::at_least_neg_tol("min super-task bound slack", min_of(thm4), tol),
        Check::at_least_neg_tol("min task-level intermediate slack", min_of(task), tol),
        Check::at_least_neg_tol("min sample-level intermediate slack", min_of(sample), tol),
        Check::at_least_neg_tol("min task-level intermediate slack, training weights", min_of(cross), tol)
            .informational(),
    ];
    outcome(checks, json!({ "meta": meta_records, "super": super_records }))
}

pub fn rate_sweep_run(c: &RateSweepConfig, name: &str, seed: u64, out: &Path) -> Result<Outcome, CliError> {
    if c.ms.is_empty() || c.ns.is_empty() || c.ms.iter().chain(&c.ns).any(|&v| v == 0) {
        return Err(CliError::ConfigInvalid("ms and ns must be non-empty lists of positive sizes".into()));
    }
    let family = match &c.family {
        SweepSpec::MeanEst { base, mc_trials } => {
            base.validate()?;
            if let Some(t) = mc_trials.filter(|&t| t < 100) {
                return Err(CliError::ConfigInvalid(format!("mc_trials must be at least 100, got {t}")));
            }
            SweepFamily::MeanEst { base: *base, mc: mc_trials.map(|t| (t, seed)) }
        }
        SweepSpec::Bern2 { gamma } => {
            validate_gammas(&[*gamma])?;
            SweepFamily::Finite { build: bern2_with, gamma: *gamma }
        }
    };
    let (rows, summary) = rate_sweep(&family, &c.ms, &c.ns)?;
    std::fs::create_dir_all(out)?;
    let csv_name = format!("{name}.csv");
    write_rate_csv(&rows, std::fs::File::create(out.join(&csv_name))?)?;

    let mut checks = Vec::new();
    match c.family {
        SweepSpec::MeanEst { .. } => {
            for (m, s) in &summary.slope_vs_n {
                checks.push(Check::abs_at_most(format!("slope vs n at m={m}, plus 1"), s + 1.0, c.tolerance));
            }
            let comp = summary.mn_component.iter().map(|(_, _, got, want)| got - want);
            checks.push(Check::abs_at_most("max |1/(mn) component - closed form|", max_abs(comp), COMPONENT_TOL));
        }
        SweepSpec::Bern2 { .. } => {
            let slack = rows.iter().filter_map(|r| r.slack);
            checks.push(Check::at_least_neg_tol("min bound slack over the grid", min_of(slack), c.tolerance));
        }
    }
    let mut o = outcome(checks, json!({ "rows": rows.len(), "summary": summary }))?;
    o.artifacts.push(csv_name);
    Ok(o)
}
