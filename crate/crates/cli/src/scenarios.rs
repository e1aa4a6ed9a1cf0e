//! Scenario runners. Each writes its tables into the output directory and
//! reports failed audits instead of aborting, so artifacts survive a failure.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use umet_core::adversary::perturbation_trial;
use umet_core::lemmas::{dynamics_suite, lemma_suite, SuiteConfig};
use umet_core::{
    family_entropy_profile, greedy_family_sequence, openness_margin, run_adversary, strong_mixing_deviation,
    uniform_l1_deviation, vc_dual_dimension, weak_mixing_deviation, zero_entropy_certificate, ConjugatedOdometer,
    DeviationReport, InequalityCheck, MapSpec, PiecewiseMap, Rational, Relation, SetFamily,
};

use crate::config::{ExperimentConfig, Scenario};
use crate::output::{self, den, num, write_table, OUT_DIR_VAR};

#[derive(Debug, Default)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// Failed invariant audits; a non-empty list means a non-zero exit.
    pub failures: Vec<String>,
}

/// `UMET_OUT_DIR` wins over the config's `output`; the fallback is `out/<scenario>`.
pub fn output_dir(cfg: &ExperimentConfig, env_override: Option<&str>) -> PathBuf {
    match (env_override.filter(|s| !s.is_empty()), &cfg.output) {
        (Some(dir), _) => PathBuf::from(dir),
        (None, Some(dir)) => dir.clone(),
        (None, None) => Path::new("out").join(cfg.scenario.name()),
    }
}

fn need<'a, T>(value: &'a Option<T>, key: &str, scenario: Scenario) -> Result<&'a T> {
    value.as_ref().with_context(|| format!("{scenario} needs `{key}`"))
}

fn schedule(cfg: &ExperimentConfig) -> Result<&[usize]> {
    if cfg.n_schedule.is_empty() {
        bail!("{} needs a non-empty `n_schedule`", cfg.scenario);
    }
    Ok(&cfg.n_schedule)
}

/// Checks everything a scenario needs without running it.
pub fn validate(cfg: &ExperimentConfig) -> Result<()> {
    let sc = cfg.scenario;
    match sc {
        Scenario::EntropyProfile | Scenario::VcDim => {
            let f = need(&cfg.family, "family", sc)?;
            if let Some(h) = cfg.horizon {
                if sc == Scenario::EntropyProfile && h > f.horizon() {
                    bail!("horizon {h} exceeds the family's {} members", f.horizon());
                }
            }
        }
        Scenario::UmetRun | Scenario::MixingRun => {
            need(&cfg.map, "map", sc)?.build()?;
            need(&cfg.family, "family", sc)?;
            schedule(cfg)?;
        }
        Scenario::AdversaryRun => {
            need(&cfg.family, "family", sc)?;
            need(&cfg.epsilon, "epsilon", sc)?;
            if let Some(m) = &cfg.map {
                m.build()?.invert().context("adversary-run needs an invertible map")?;
            }
        }
        Scenario::LemmaSuite => {}
    }
    Ok(())
}

/// Runs the scenario, writing artifacts and SCHEMAS into `dir`.
pub fn run(cfg: &ExperimentConfig, experiment: &str, dir: &Path) -> Result<RunOutcome> {
    validate(cfg)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut outcome = RunOutcome::default();
    match cfg.scenario {
        Scenario::EntropyProfile => entropy_profile(cfg, experiment, dir, &mut outcome)?,
        Scenario::VcDim => vc_dim(cfg, experiment, dir, &mut outcome)?,
        Scenario::UmetRun => umet_run(cfg, experiment, dir, &mut outcome)?,
        Scenario::MixingRun => mixing_run(cfg, experiment, dir, &mut outcome)?,
        Scenario::AdversaryRun => adversary_run(cfg, experiment, dir, &mut outcome)?,
        Scenario::LemmaSuite => lemma_run(cfg, experiment, dir, &mut outcome)?,
    }
    let schemas = dir.join("SCHEMAS");
    fs::write(&schemas, output::schemas_text())?;
    outcome.files.push(schemas);
    Ok(outcome)
}

/// Runs with the directory taken from the environment and the config.
pub fn run_with_env(cfg: &ExperimentConfig, experiment: &str) -> Result<(PathBuf, RunOutcome)> {
    let env = std::env::var(OUT_DIR_VAR).ok();
    let dir = output_dir(cfg, env.as_deref());
    let outcome = run(cfg, experiment, &dir)?;
    Ok((dir, outcome))
}

/// Shortest round-trip form, so floats are reproducible byte for byte.
fn float(x: f64) -> String {
    format!("{x:?}")
}

const DEFAULT_PROFILE_HORIZON: usize = 12;
const DEFAULT_VC_K_MAX: usize = 8;
const DEFAULT_LADDER: u32 = 10;

fn entropy_profile(cfg: &ExperimentConfig, exp: &str, dir: &Path, out: &mut RunOutcome) -> Result<()> {
    let f = cfg.family.as_ref().expect("validated");
    let n_max = cfg.horizon.unwrap_or(DEFAULT_PROFILE_HORIZON.min(f.horizon()));
    let greedy = greedy_family_sequence(f, n_max)?;
    let profile = family_entropy_profile(f, n_max)?;
    let rows: Vec<Vec<String>> = profile
        .iter()
        .enumerate()
        .map(|(i, p)| {
            vec![
                exp.to_string(),
                p.n.to_string(),
                greedy.indices[i].to_string(),
                float(greedy.steps[i].value),
                float(greedy.steps[i].error_bound),
                float(p.lower_bound.value),
                float(p.lower_bound.error_bound),
            ]
        })
        .collect();
    out.files.push(write_table(dir, &output::ENTROPY_PROFILE, &rows)?);
    if let Some(delta) = &cfg.epsilon {
        let ladder = cfg.resolution.unwrap_or(DEFAULT_LADDER);
        let level = zero_entropy_certificate(f, delta.to_f64(), ladder)
            .and_then(|p| p.cells().first().map(|c| c.measure()))
            .map(|m| m.dyadic_exponent().map(|e| e.to_string()).unwrap_or_default())
            .unwrap_or_default();
        let row = vec![exp.to_string(), num(delta), den(delta), ladder.to_string(), level];
        out.files.push(write_table(dir, &output::ENTROPY_CERTIFICATE, &[row])?);
    }
    Ok(())
}

fn vc_dim(cfg: &ExperimentConfig, exp: &str, dir: &Path, out: &mut RunOutcome) -> Result<()> {
    let f = cfg.family.as_ref().expect("validated");
    let k_max = cfg.horizon.unwrap_or(DEFAULT_VC_K_MAX);
    let row = vec![exp.to_string(), f.to_string(), k_max.to_string(), vc_dual_dimension(f, k_max).to_string()];
    out.files.push(write_table(dir, &output::VC_DIM, &[row])?);
    Ok(())
}

fn report_rows(exp: &str, prefix: &[&str], r: &DeviationReport) -> Vec<Vec<String>> {
    r.per_member
        .iter()
        .map(|(id, v)| {
            let mut row = vec![exp.to_string()];
            row.extend(prefix.iter().map(|s| s.to_string()));
            row.extend([r.n.to_string(), id.to_string(), num(v), den(v), (*id == r.argmax).to_string()]);
            row
        })
        .collect()
}

fn umet_run(cfg: &ExperimentConfig, exp: &str, dir: &Path, out: &mut RunOutcome) -> Result<()> {
    let t = cfg.map.as_ref().expect("validated").build()?;
    let f = cfg.family.as_ref().expect("validated");
    let mut members = Vec::new();
    let mut sups = Vec::new();
    for &n in schedule(cfg)? {
        let r = uniform_l1_deviation(&t, f, n)?;
        members.extend(report_rows(exp, &[], &r));
        sups.push(vec![exp.to_string(), n.to_string(), num(&r.sup), den(&r.sup), r.argmax.to_string()]);
    }
    out.files.push(write_table(dir, &output::UMET_MEMBERS, &members)?);
    out.files.push(write_table(dir, &output::UMET_SUP, &sups)?);
    Ok(())
}

fn mixing_run(cfg: &ExperimentConfig, exp: &str, dir: &Path, out: &mut RunOutcome) -> Result<()> {
    let t = cfg.map.as_ref().expect("validated").build()?;
    let f = cfg.family.as_ref().expect("validated");
    let mut rows = Vec::new();
    for &n in schedule(cfg)? {
        rows.extend(report_rows(exp, &["strong"], &strong_mixing_deviation(&t, f, n)));
        rows.extend(report_rows(exp, &["weak"], &weak_mixing_deviation(&t, f, n)?));
    }
    out.files.push(write_table(dir, &output::MIXING, &rows)?);
    Ok(())
}

fn check_row(exp: &str, stage: &str, c: &InequalityCheck) -> Vec<String> {
    let index: Vec<String> = c.index.iter().map(|i| i.to_string()).collect();
    vec![
        exp.to_string(),
        stage.to_string(),
        c.name.clone(),
        index.join(";"),
        num(&c.lhs),
        den(&c.lhs),
        c.relation.to_string(),
        num(&c.rhs),
        den(&c.rhs),
        c.holds.to_string(),
        c.required.to_string(),
    ]
}

fn map_row(exp: &str, stage: &str, name: &str, holds: bool) -> Vec<String> {
    let mut row = vec![exp.to_string(), stage.to_string(), name.to_string(), String::new()];
    row.extend([String::new(), String::new(), "=".into(), String::new(), String::new()]);
    row.extend([holds.to_string(), "true".into()]);
    row
}

fn adversary_run(cfg: &ExperimentConfig, exp: &str, dir: &Path, out: &mut RunOutcome) -> Result<()> {
    let phi = cfg.map.as_ref().unwrap_or(&MapSpec::Identity).build()?;
    let f: &SetFamily = cfg.family.as_ref().expect("validated");
    let eps = cfg.epsilon.as_ref().expect("validated");
    let run = run_adversary(&phi, f, eps, cfg.horizon.unwrap_or(1), cfg.resolution)?;

    let json = serde_json::to_string_pretty(&run)?;
    let report = dir.join(output::ADVERSARY_REPORT.file);
    fs::write(&report, json + "\n")?;
    out.files.push(report);

    let mut checks = vec![
        map_row(exp, "tower_conjugacy", run.claim1.name, run.claim1.holds),
        map_row(exp, "conjugacy_identity", run.conjugacy.name, run.conjugacy.holds),
    ];
    let d = &run.claim2.distance;
    let distance = InequalityCheck::new("weak_distance_below_epsilon", vec![], d.upper(), Relation::Lt, run.claim2.epsilon.clone());
    checks.push(check_row(exp, "weak_distance", &distance));
    checks.extend(run.claim2.checks.iter().map(|c| check_row(exp, "weak_distance", c)));
    checks.extend(run.trace.checks.iter().map(|c| check_row(exp, "bad_average", c)));
    out.files.push(write_table(dir, &output::ADVERSARY_CHECKS, &checks)?);

    let plan = &run.plan;
    let int = |x: usize| Rational::from_integer(x as i64);
    let t = ConjugatedOdometer::new(plan.resolution, run.new_phi.clone())?;
    let c = &run.bad_set.set;
    let h = plan.height();
    let margin = openness_margin(&t, c, h, &plan.delta);
    let mut summary: Vec<(&str, Rational)> = vec![
        ("resolution", int(plan.resolution as usize)),
        ("n", int(plan.n)),
        ("height", int(h)),
        ("m", int(plan.m)),
        ("epsilon", plan.epsilon.clone()),
        ("delta0", plan.delta0.clone()),
        ("delta1", plan.delta1.clone()),
        ("delta", plan.delta.clone()),
        ("bad_set_index", int(run.bad_set.index)),
        ("r", int(run.trace.r)),
        ("weak_distance_upper", d.upper()),
        ("bad_average", run.trace.bad_average.clone()),
    ];
    if let Ok(m) = &margin {
        summary.push(("openness_margin", m.epsilon.clone()));
        summary.push(("margin_weight", m.weight.clone()));
    }
    let rows: Vec<Vec<String>> =
        summary.iter().map(|(k, v)| vec![exp.to_string(), k.to_string(), num(v), den(v)]).collect();
    out.files.push(write_table(dir, &output::ADVERSARY_SUMMARY, &rows)?);

    if !run.all_ok() {
        let failed: Vec<String> = run.trace.failed().map(|c| c.to_string()).collect();
        out.failures.push(format!(
            "adversary certificate not established (claim1 {}, conjugacy {}, claim2 {}, accepted {}; {})",
            run.claim1.holds,
            run.conjugacy.holds,
            run.claim2.all_hold(),
            run.trace.accepted,
            failed.join("; ")
        ));
    }
    match margin {
        Ok(m) if !cfg.seeds.is_empty() => {
            let mut rows = Vec::new();
            for &seed in &cfg.seeds {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let trial = perturbation_trial(&mut rng, &run.new_phi, plan.resolution, c, h, &plan.delta, &m.epsilon)?;
                if !trial.holds() {
                    out.failures.push(format!("perturbation trial with seed {seed} leaves the margin's guarantee"));
                }
                let up = trial.distance.upper();
                rows.push(vec![
                    exp.to_string(),
                    seed.to_string(),
                    num(&trial.swap_at),
                    den(&trial.swap_at),
                    num(&trial.swap_length),
                    den(&trial.swap_length),
                    num(&up),
                    den(&up),
                    num(&trial.deviation),
                    den(&trial.deviation),
                    trial.within_margin.to_string(),
                    trial.keeps_deviation.to_string(),
                ]);
            }
            out.files.push(write_table(dir, &output::ADVERSARY_TRIALS, &rows)?);
        }
        Ok(_) => {}
        Err(e) => out.failures.push(format!("no openness margin: {e}")),
    }
    Ok(())
}

fn lemma_run(cfg: &ExperimentConfig, exp: &str, dir: &Path, out: &mut RunOutcome) -> Result<()> {
    let seeds = if cfg.seeds.is_empty() { vec![0] } else { cfg.seeds.clone() };
    let mut lemma_rows = Vec::new();
    let mut dynamics_rows = Vec::new();
    for seed in seeds {
        let report = lemma_suite(&SuiteConfig { seed, ..SuiteConfig::default() })?;
        for c in &report.checks {
            if !c.holds {
                out.failures.push(format!("seed {seed}: {} instance {} fails", c.property, c.instance));
            }
            lemma_rows.push(vec![
                exp.to_string(),
                seed.to_string(),
                c.property.to_string(),
                c.instance.to_string(),
                float(c.parameter),
                float(c.lhs),
                float(c.rhs),
                float(c.error_bound),
                c.holds.to_string(),
            ]);
        }
        for c in dynamics_suite(seed, 100, 16)? {
            if !c.holds {
                out.failures.push(format!("seed {seed}: {} instance {} fails", c.property, c.instance));
            }
            dynamics_rows.push(vec![
                exp.to_string(),
                seed.to_string(),
                c.property.to_string(),
                c.instance.to_string(),
                c.holds.to_string(),
                c.witness.unwrap_or_default(),
            ]);
        }
    }
    out.files.push(write_table(dir, &output::LEMMA_SUITE, &lemma_rows)?);
    out.files.push(write_table(dir, &output::DYNAMICS_SUITE, &dynamics_rows)?);
    Ok(())
}

/// Human-readable description of a map or family spec.
pub fn describe(spec: &str) -> Result<String> {
    if let Ok(m) = spec.parse::<MapSpec>() {
        let t: PiecewiseMap = m.build()?;
        let mut s = format!("map {m}\n  pieces: {}\n  invertible: {}\n", t.pieces().len(), t.is_invertible());
        s.push_str(&format!("  preserves level-8 dyadic measures: {}\n", t.preserves_dyadic_measures(8)));
        if t.pieces().len() <= 16 {
            s.push_str(&format!("  {t}\n"));
        }
        return Ok(s);
    }
    let f: SetFamily = spec.parse().map_err(|e| anyhow::anyhow!("{spec:?} is neither a map nor a family: {e}"))?;
    let mut s = format!("family {f}\n  horizon: {} members\n  entropy: {:?}\n", f.horizon(), f.entropy_tag());
    for (i, c) in f.members().iter().take(4).enumerate() {
        s.push_str(&format!("  member {i}: {c} (measure {})\n", c.measure()));
    }
    if f.horizon() > 4 {
        s.push_str("  ...\n");
    }
    Ok(s)
}
