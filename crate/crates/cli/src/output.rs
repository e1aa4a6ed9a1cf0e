//! Versioned CSV tables and the generated SCHEMAS file.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use umet_core::Rational;

use crate::config::Scenario;

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable that overrides the config's output directory.
pub const OUT_DIR_VAR: &str = "UMET_OUT_DIR";

pub struct Column {
    pub name: &'static str,
    pub doc: &'static str,
}

pub struct TableSchema {
    pub file: &'static str,
    pub scenario: Scenario,
    pub about: &'static str,
    pub columns: &'static [Column],
}

const fn col(name: &'static str, doc: &'static str) -> Column {
    Column { name, doc }
}

pub const ENTROPY_PROFILE: TableSchema = TableSchema {
    file: "entropy-profile.csv",
    scenario: Scenario::EntropyProfile,
    about: "Greedy lower bound (1/n)·H(join of the first n picks), in bits.",
    columns: &[
        col("experiment", "experiment id"),
        col("n", "sequence length"),
        col("member", "family index picked at step n"),
        col("step_entropy", "conditional entropy of the pick given the earlier join"),
        col("step_error_bound", "certified bound on |step_entropy − exact|"),
        col("lower_bound", "(1/n)·H(join)"),
        col("lower_bound_error", "certified bound on |lower_bound − exact|"),
    ],
};

pub const ENTROPY_CERTIFICATE: TableSchema = TableSchema {
    file: "entropy-certificate.csv",
    scenario: Scenario::EntropyProfile,
    about: "Coarsest dyadic level whose cells leave every member with conditional entropy at most delta (empty level: none).",
    columns: &[
        col("experiment", "experiment id"),
        col("delta_num", "delta numerator (config epsilon)"),
        col("delta_den", "delta denominator"),
        col("ladder", "deepest level tried (config resolution, default 10)"),
        col("level", "certificate level, empty when absent"),
    ],
};

pub const VC_DIM: TableSchema = TableSchema {
    file: "vc-dim.csv",
    scenario: Scenario::VcDim,
    about: "Dual VC dimension of the family horizon.",
    columns: &[
        col("experiment", "experiment id"),
        col("family", "family spec"),
        col("k_max", "largest k searched (config horizon)"),
        col("dimension", "largest k with k members whose join has 2^k cells"),
    ],
};

pub const UMET_MEMBERS: TableSchema = TableSchema {
    file: "umet-run.csv",
    scenario: Scenario::UmetRun,
    about: "Exact L¹ deviation of the n-step ergodic average, per member.",
    columns: &[
        col("experiment", "experiment id"),
        col("n", "averaging horizon"),
        col("member", "family index"),
        col("deviation_num", "deviation numerator"),
        col("deviation_den", "deviation denominator"),
        col("sup", "true on the first member attaining the sup"),
    ],
};

pub const UMET_SUP: TableSchema = TableSchema {
    file: "umet-sup.csv",
    scenario: Scenario::UmetRun,
    about: "Sup over the family of the L¹ deviation, per n.",
    columns: &[
        col("experiment", "experiment id"),
        col("n", "averaging horizon"),
        col("sup_num", "sup numerator"),
        col("sup_den", "sup denominator"),
        col("argmax", "first member attaining the sup"),
    ],
};

pub const MIXING: TableSchema = TableSchema {
    file: "mixing-run.csv",
    scenario: Scenario::MixingRun,
    about: "Largest pair correlations |μ(A∩T^{-n}B) − μ(A)μ(B)| (strong) and their Cesàro means over i < n (weak); ten pairs kept per row group.",
    columns: &[
        col("experiment", "experiment id"),
        col("kind", "strong or weak"),
        col("n", "lag (strong) or averaging horizon (weak)"),
        col("pair", "a:b, family indices of A and B"),
        col("deviation_num", "deviation numerator"),
        col("deviation_den", "deviation denominator"),
        col("sup", "true on the pair attaining the sup"),
    ],
};

pub const ADVERSARY_SUMMARY: TableSchema = TableSchema {
    file: "adversary-summary.csv",
    scenario: Scenario::AdversaryRun,
    about: "Construction parameters and headline quantities.",
    columns: &[
        col("experiment", "experiment id"),
        col("quantity", "parameter name"),
        col("value_num", "numerator (integers have denominator 1)"),
        col("value_den", "denominator"),
    ],
};

pub const ADVERSARY_CHECKS: TableSchema = TableSchema {
    file: "adversary-checks.csv",
    scenario: Scenario::AdversaryRun,
    about: "Every exact check behind the certificate. Map identities leave lhs and rhs empty.",
    columns: &[
        col("experiment", "experiment id"),
        col("stage", "tower_conjugacy, conjugacy_identity, weak_distance or bad_average"),
        col("check", "check name"),
        col("index", "worst instance, ';'-separated, empty for scalar checks"),
        col("lhs_num", "left side numerator"),
        col("lhs_den", "left side denominator"),
        col("relation", "one of > >= = < <="),
        col("rhs_num", "right side numerator"),
        col("rhs_den", "right side denominator"),
        col("holds", "true or false"),
        col("required", "false for informational checks"),
    ],
};

pub const ADVERSARY_TRIALS: TableSchema = TableSchema {
    file: "adversary-trials.csv",
    scenario: Scenario::AdversaryRun,
    about: "Random swap perturbations inside the openness margin, one per seed.",
    columns: &[
        col("experiment", "experiment id"),
        col("seed", "trial seed"),
        col("swap_at_num", "swap position numerator"),
        col("swap_at_den", "swap position denominator"),
        col("swap_length_num", "swapped interval length numerator"),
        col("swap_length_den", "swapped interval length denominator"),
        col("distance_num", "weak distance upper bound numerator"),
        col("distance_den", "weak distance upper bound denominator"),
        col("deviation_num", "perturbed L¹ deviation numerator"),
        col("deviation_den", "perturbed L¹ deviation denominator"),
        col("within_margin", "distance below the margin"),
        col("keeps_deviation", "deviation still above delta"),
    ],
};

pub const LEMMA_SUITE: TableSchema = TableSchema {
    file: "lemma-suite.csv",
    scenario: Scenario::LemmaSuite,
    about: "Randomized entropy-lemma instances. Values are floats with the certified error bound of the comparison.",
    columns: &[
        col("experiment", "experiment id"),
        col("seed", "suite seed"),
        col("property", "checked property"),
        col("instance", "instance index"),
        col("parameter", "epsilon, or sequence length"),
        col("lhs", "left side"),
        col("rhs", "right side"),
        col("error_bound", "certified bound on the entropy error in the comparison"),
        col("holds", "true or false"),
    ],
};

pub const DYNAMICS_SUITE: TableSchema = TableSchema {
    file: "dynamics-suite.csv",
    scenario: Scenario::LemmaSuite,
    about: "Exact identities on random interval exchanges.",
    columns: &[
        col("experiment", "experiment id"),
        col("seed", "suite seed"),
        col("property", "checked identity"),
        col("instance", "instance index"),
        col("holds", "true or false"),
        col("witness", "an interval where the sides differ, empty when equal"),
    ],
};

pub const ALL_TABLES: [&TableSchema; 12] = [
    &ENTROPY_PROFILE,
    &ENTROPY_CERTIFICATE,
    &VC_DIM,
    &UMET_MEMBERS,
    &UMET_SUP,
    &MIXING,
    &ADVERSARY_SUMMARY,
    &ADVERSARY_CHECKS,
    &ADVERSARY_TRIALS,
    &ADVERSARY_REPORT,
    &LEMMA_SUITE,
    &DYNAMICS_SUITE,
];

/// JSON rather than CSV, so it has no columns.
pub const ADVERSARY_REPORT: TableSchema = TableSchema {
    file: "adversary-run.json",
    scenario: Scenario::AdversaryRun,
    about: "Full run report: plan summary, bad set, claim checks, certificate trace with the serialized ψ, S and τ maps, and the perturbed φ.",
    columns: &[],
};

/// Text of the SCHEMAS file.
pub fn schemas_text() -> String {
    let mut out = format!("# CSV schemas, version {SCHEMA_VERSION}\n# Every CSV starts with the line `# schema={SCHEMA_VERSION}`.\n");
    for scenario in Scenario::ALL {
        out.push_str(&format!("\n## {scenario}\n"));
        for t in ALL_TABLES.iter().filter(|t| t.scenario == scenario) {
            out.push_str(&format!("\n{}\n  {}\n", t.file, t.about));
            for c in t.columns {
                out.push_str(&format!("  - {}: {}\n", c.name, c.doc));
            }
        }
    }
    out
}

pub fn num(r: &Rational) -> String {
    r.numer().to_string()
}

pub fn den(r: &Rational) -> String {
    r.denom().to_string()
}

/// Writes one table: the schema comment, a header row, then `rows`.
pub fn write_table(dir: &Path, schema: &TableSchema, rows: &[Vec<String>]) -> Result<PathBuf> {
    let path = dir.join(schema.file);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "# schema={SCHEMA_VERSION}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(schema.columns.iter().map(|c| c.name))?;
    for row in rows {
        debug_assert_eq!(row.len(), schema.columns.len(), "{}", schema.file);
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(path)
}
