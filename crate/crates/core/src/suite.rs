//! The validation suite: every harness in [`crate::validate`] at fixed sizes,
//! with a Bonferroni-corrected significance level over the chi-square checks.
//!
//! Each check gets its seed from the suite seed and the check's position in
//! the full list, so running a subset with `only` replays the same numbers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{SolveError, ValidateError};
use crate::oracle::{HiddenShiftInstance, Oracle};
use crate::seed;
use crate::sieve::{run_sieve, OracleSource};
use crate::solver::{self, Mode};
use crate::stats::{self, ChiSquare};
use crate::validate::{self, CoefficientMode, SIGNIFICANCE};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Check groups accepted by [`SuiteConfig::only`].
pub const GROUPS: [&str; 9] = [
    "lemma1",
    "theorem2",
    "homogeneity",
    "sieve",
    "signs",
    "success",
    "space",
    "shape",
    "brute_force",
];

const SIGN_TOLERANCE: f64 = 0.03;
const SIGMAS: f64 = 3.0;
const SOLVE_EPSILON: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Base sample count for histogram and sign checks.
    pub trials: u64,
    /// Single attempts per success-rate check.
    pub attempts: u64,
    /// Instances per brute-force comparison.
    pub instances: u64,
    pub only: Option<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 10_000,
            attempts: 1000,
            instances: 50,
            only: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Passes when `p_value >= threshold`.
    ChiSquare,
    /// Passes when `|statistic - 0.5| <= threshold`.
    Tolerance,
    /// Passes when `statistic >= threshold`.
    AtLeast,
    /// Passes when `statistic <= threshold`.
    AtMost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub group: String,
    pub kind: CheckKind,
    pub statistic: f64,
    pub dof: Option<u64>,
    pub p_value: Option<f64>,
    pub threshold: f64,
    pub passed: bool,
    pub seed: u64,
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub config: SuiteConfig,
    pub significance: f64,
    pub chi_square_checks: usize,
    pub per_check_alpha: f64,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Planned {
    group: &'static str,
    name: String,
    seed: u64,
    kind: Kind,
}

enum Kind {
    Lemma1 { n: usize, t: u32, trials: u64, mode: CoefficientMode },
    Theorem2 { p: u64, n: usize, t: u32, trials: u64 },
    Homogeneity { n: usize, t: u32, trials: u64 },
    SieveLevel { n: usize, t: u32, level: u32, trials: u64 },
    Signs { trials: u64 },
    Success { n: usize, t: u32, mode: Mode },
    Shape { n: usize, t: u32 },
    BruteForce { n: usize, t: u32, mode: Mode },
}

fn plan(cfg: &SuiteConfig) -> Vec<Planned> {
    let mut out = Vec::new();
    let mut push = |group: &'static str, name: String, kind: Kind| {
        let seed = seed::derive(cfg.seed, out.len() as u64);
        out.push(Planned { group, name, seed, kind });
    };
    let lemma_sizes = [(1, 2, 1), (2, 2, 2), (1, 3, 1)];
    let modes = [
        ("unsigned", CoefficientMode::Unsigned),
        ("random_signs", CoefficientMode::RandomSigns),
        ("literal_set", CoefficientMode::LiteralSet),
    ];
    for (n, t, scale) in lemma_sizes {
        for (label, mode) in modes {
            let trials = cfg.trials * scale;
            push("lemma1", format!("lemma1/n{n}_t{t}/{label}"), Kind::Lemma1 { n, t, trials, mode });
        }
    }
    for p in [3, 5] {
        let trials = 3 * cfg.trials;
        push("theorem2", format!("theorem2/p{p}_n1_t2"), Kind::Theorem2 { p, n: 1, t: 2, trials });
    }
    for (n, t, scale) in lemma_sizes {
        let trials = 2 * cfg.trials * scale;
        push("homogeneity", format!("homogeneity/p2_n{n}_t{t}"), Kind::Homogeneity { n, t, trials });
    }
    for (n, t, level) in [(1, 3, 0), (1, 3, 1), (2, 3, 0), (2, 3, 1)] {
        let trials = cfg.trials;
        push("sieve", format!("sieve/n{n}_t{t}/level{level}"), Kind::SieveLevel { n, t, level, trials });
    }
    push("signs", "signs/plus_frequency".into(), Kind::Signs { trials: cfg.trials });
    for (n, t, mode) in [(3, 1, Mode::Standard), (3, 2, Mode::Standard), (3, 3, Mode::Standard), (3, 2, Mode::Coset)] {
        let tag = mode_tag(mode);
        push("success", format!("success/{tag}_n{n}_t{t}"), Kind::Success { n, t, mode });
    }
    for t in 1..=3 {
        for n in 2..=4 {
            push("shape", format!("shape/n{n}_t{t}"), Kind::Shape { n, t });
        }
    }
    for (n, t, mode) in [(2, 2, Mode::Standard), (2, 3, Mode::Standard), (3, 2, Mode::Coset)] {
        let tag = mode_tag(mode);
        push("brute_force", format!("brute_force/{tag}_n{n}_t{t}"), Kind::BruteForce { n, t, mode });
    }
    out
}

fn mode_tag(mode: Mode) -> &'static str {
    match mode {
        Mode::Standard => "standard",
        Mode::Coset => "coset",
    }
}

/// Raw outcome before the chi-square threshold is known.
struct Raw {
    kind: CheckKind,
    statistic: f64,
    chi: Option<ChiSquare>,
    threshold: f64,
    trials: u64,
}

impl Raw {
    fn chi(chi: ChiSquare, trials: u64) -> Self {
        Self {
            kind: CheckKind::ChiSquare,
            statistic: chi.statistic,
            chi: Some(chi),
            threshold: f64::NAN,
            trials,
        }
    }

    fn bound(kind: CheckKind, statistic: f64, threshold: f64, trials: u64) -> Self {
        Self {
            kind,
            statistic,
            chi: None,
            threshold,
            trials,
        }
    }
}

/// Runs the configured checks. `only` may name a group from [`GROUPS`] or
/// a single check by its full name.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport, ValidateError> {
    if cfg.trials == 0 || cfg.attempts == 0 || cfg.instances == 0 {
        return Err(ValidateError::NoTrials);
    }
    let mut planned = plan(cfg);
    if let Some(only) = &cfg.only {
        // Peak checks ride along with the success and shape runs.
        let space = only == "space";
        planned.retain(|p| p.group == only || p.name == *only || (space && matches!(p.group, "success" | "shape")));
        if planned.is_empty() {
            return Err(ValidateError::InvalidParameters(format!("no check or group named {only:?}")));
        }
    }
    let raws = planned
        .iter()
        .map(|p| run_one(p, cfg))
        .collect::<Result<Vec<_>, _>>()?;

    let chi_square_checks = raws.iter().flatten().filter(|(_, r)| r.kind == CheckKind::ChiSquare).count();
    let per_check_alpha = SIGNIFICANCE / chi_square_checks.max(1) as f64;
    let mut checks = Vec::new();
    for (p, raws) in planned.iter().zip(raws) {
        for (suffix, raw) in raws {
            let threshold = if raw.kind == CheckKind::ChiSquare { per_check_alpha } else { raw.threshold };
            let passed = match raw.kind {
                CheckKind::ChiSquare => raw.chi.is_some_and(|c| c.passes(threshold)),
                CheckKind::Tolerance => (raw.statistic - 0.5).abs() <= threshold,
                CheckKind::AtLeast => raw.statistic >= threshold,
                CheckKind::AtMost => raw.statistic <= threshold,
            };
            let group = if suffix == "peak" { "space" } else { p.group };
            if cfg.only.as_deref().is_some_and(|o| o == "space") && group != "space" {
                continue;
            }
            checks.push(CheckResult {
                name: if suffix.is_empty() { p.name.clone() } else { format!("{}/{suffix}", p.name) },
                group: group.to_string(),
                kind: raw.kind,
                statistic: raw.statistic,
                dof: raw.chi.map(|c| c.dof),
                p_value: raw.chi.map(|c| c.p_value),
                threshold,
                passed,
                seed: p.seed,
                trials: raw.trials,
            });
        }
    }
    Ok(SuiteReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: cfg.clone(),
        significance: SIGNIFICANCE,
        chi_square_checks,
        per_check_alpha,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn run_one(p: &Planned, cfg: &SuiteConfig) -> Result<Vec<(&'static str, Raw)>, ValidateError> {
    Ok(match p.kind {
        Kind::Lemma1 { n, t, trials, mode } => {
            let r = validate::lemma1_trial(n, t, trials, mode, p.seed)?;
            vec![("", Raw::chi(r.chi_square, r.trials))]
        }
        Kind::Theorem2 { p: prime, n, t, trials } => {
            let r = validate::theorem2_trial(prime, t, n, trials, p.seed)?;
            vec![("", Raw::chi(r.chi_square, r.trials))]
        }
        Kind::Homogeneity { n, t, trials } => {
            let a = validate::lemma1_trial(n, t, trials, CoefficientMode::LiteralSet, seed::derive(p.seed, 0))?;
            let b = validate::theorem2_trial(2, t, n, trials, seed::derive(p.seed, 1))?;
            vec![("", Raw::chi(stats::homogeneity(&a.cells, &b.cells), a.trials + b.trials))]
        }
        Kind::SieveLevel { n, t, level, trials } => {
            let r = validate::sieve_level_trial(n, t, level, trials, p.seed)?;
            vec![("", Raw::chi(r.chi_square, r.trials))]
        }
        Kind::Signs { trials } => {
            let inst = HiddenShiftInstance::new(3, 2, 6, seed::derive(p.seed, 0))?;
            let mut oracle = Oracle::new(inst, seed::derive(p.seed, 1));
            let freq = validate::sign_balance_trial(&mut oracle, trials)?;
            vec![("", Raw::bound(CheckKind::Tolerance, freq, SIGN_TOLERANCE, trials))]
        }
        Kind::Success { n, t, mode } => {
            let b = validate::success_bound_trial(n, t, cfg.attempts, mode, p.seed)?;
            let level_bound = b.per_level_bound();
            let level_min = level_bound - SIGMAS * stats::binomial_sigma(level_bound, b.rounds);
            let attempt_min = 0.5 - SIGMAS * stats::binomial_sigma(0.5, b.attempts);
            let space = (n as u32 * t + t) as f64;
            vec![
                ("level", Raw::bound(CheckKind::AtLeast, b.per_level_rate(), level_min, b.rounds)),
                ("attempt", Raw::bound(CheckKind::AtLeast, b.per_attempt_rate(), attempt_min, b.attempts)),
                ("peak", Raw::bound(CheckKind::AtMost, b.peak_live_tokens as f64, space, b.attempts)),
            ]
        }
        Kind::Shape { n, t } => {
            let inst = HiddenShiftInstance::new(n, t, n as u32 * t, seed::derive(p.seed, 0))?;
            let mut oracle = Oracle::new(inst, seed::derive(p.seed, 1));
            let mut rng = seed::derived_rng(p.seed, 2);
            let count = n + t as usize;
            let root = oracle.root();
            let run = run_sieve(&mut oracle, OracleSource::new(root), n, t - 1, count, &mut rng)?;
            let per_final = run.base_consumed as f64 / run.finals.len() as f64;
            for token in run.finals {
                oracle.discard(token)?;
            }
            let expected = ((n + 1) as f64).powi(t as i32 - 1);
            let error = (per_final - expected).abs();
            let space = (n as u32 * t + t) as f64;
            vec![
                ("", Raw::bound(CheckKind::AtMost, error, 0.0, count as u64)),
                ("peak", Raw::bound(CheckKind::AtMost, oracle.report().peak_live_tokens as f64, space, 1)),
            ]
        }
        Kind::BruteForce { n, t, mode } => {
            let runs = (0..cfg.instances)
                .into_par_iter()
                .map(|i| brute_force_compare(n, t, mode, seed::derive(p.seed, i)))
                .collect::<Result<Vec<_>, _>>()?;
            let mismatches = runs.iter().filter(|r| **r == Some(false)).count();
            let failures = runs.iter().filter(|r| r.is_none()).count();
            let completed = runs.len() - failures;
            let trials = cfg.instances;
            let allowed = SOLVE_EPSILON * trials as f64 + SIGMAS * stats::binomial_sigma(SOLVE_EPSILON, trials) * trials as f64;
            vec![
                ("", Raw::bound(CheckKind::AtMost, mismatches as f64, 0.0, completed as u64)),
                ("failures", Raw::bound(CheckKind::AtMost, failures as f64, allowed, trials)),
            ]
        }
    })
}

/// Solves one fresh instance and compares the answer with a table scan.
/// `None` when every attempt failed.
fn brute_force_compare(n: usize, t: u32, mode: Mode, seed: u64) -> Result<Option<bool>, ValidateError> {
    let inst = HiddenShiftInstance::new(n, t, n as u32 * t, seed::derive(seed, 0))?;
    let mut tables = Oracle::new(inst.clone(), seed::derive(seed, 1));
    let (f0, f1) = validate::oracle_tables(&mut tables)?;
    let truth = validate::brute_force_shift(&f0, &f1, n, t)?;
    let mut oracle = Oracle::new(inst, seed::derive(seed, 2));
    let mut rng = seed::derived_rng(seed, 3);
    match solver::solve_with_mode(&mut oracle, SOLVE_EPSILON, mode, &mut rng) {
        Ok(sol) => Ok(Some(sol.shift == truth)),
        Err(SolveError::AllAttemptsFailed { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(only: &str) -> SuiteConfig {
        SuiteConfig {
            seed: 5,
            trials: 2000,
            attempts: 200,
            instances: 10,
            only: Some(only.into()),
        }
    }

    #[test]
    fn check_names_are_unique() {
        let planned = plan(&SuiteConfig::default());
        let mut names: Vec<_> = planned.iter().map(|p| p.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), planned.len());
        for p in &planned {
            assert!(GROUPS.contains(&p.group), "{}", p.name);
        }
    }

    #[test]
    fn only_selects_and_replays() {
        let report = run_suite(&small("lemma1/n1_t2/unsigned")).unwrap();
        assert_eq!(report.checks.len(), 1);
        assert_eq!(report.chi_square_checks, 1);
        assert_eq!(report.per_check_alpha, SIGNIFICANCE);
        let group = run_suite(&small("lemma1")).unwrap();
        assert_eq!(group.checks.len(), 9);
        assert_eq!(group.per_check_alpha, SIGNIFICANCE / 9.0);
        let same = group.checks.iter().find(|c| c.name == "lemma1/n1_t2/unsigned").unwrap();
        assert_eq!(same.statistic, report.checks[0].statistic);
        assert_eq!(same.seed, report.checks[0].seed);
    }

    #[test]
    fn space_group_reports_only_peaks() {
        let report = run_suite(&small("space")).unwrap();
        assert!(report.checks.iter().all(|c| c.group == "space" && c.name.ends_with("/peak")));
        assert!(report.passed, "{:?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn unknown_selection_is_rejected() {
        assert!(matches!(run_suite(&small("nope")), Err(ValidateError::InvalidParameters(_))));
        let zero = SuiteConfig { trials: 0, ..SuiteConfig::default() };
        assert!(matches!(run_suite(&zero), Err(ValidateError::NoTrials)));
    }

    #[test]
    fn shape_and_brute_force_pass() {
        for group in ["shape", "brute_force", "signs"] {
            let report = run_suite(&small(group)).unwrap();
            assert!(report.passed, "{:?}", report.failures().collect::<Vec<_>>());
        }
    }
}
