use std::fs;
use std::path::Path;

use hidden_shift::error::{SolveError, ValidateError};
use hidden_shift::instance_file::InstanceFile;
use hidden_shift::seed;
use hidden_shift::solver::{self, Mode};
use hidden_shift::suite::{self, SuiteConfig};
use hidden_shift::{HiddenShiftInstance, Oracle, SieveReport};
use serde::Serialize;

use crate::args::{BenchArgs, Command, GenArgs, ModeArg, SizeArgs, SolveArgs, ValidateArgs};

pub const EXIT_SOLVE: u8 = 1;
pub const EXIT_VALIDATE: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self { code: EXIT_USAGE, message: message.to_string() }
    }

    fn solve(message: impl ToString) -> Self {
        Self { code: EXIT_SOLVE, message: message.to_string() }
    }
}

/// Common wrapper for every JSON artifact.
#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    version: &'static str,
    command: &'a str,
    seed: u64,
    config: C,
    result: R,
}

fn envelope<C: Serialize, R: Serialize>(command: &str, seed: u64, config: C, result: R) -> String {
    let env = Envelope { version: env!("CARGO_PKG_VERSION"), command, seed, config, result };
    let mut text = serde_json::to_string_pretty(&env).expect("plain data serializes");
    text.push('\n');
    text
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::solve(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a, None),
        Command::SolveCoset(a) => solve(a, Some(Mode::Coset)),
        Command::Validate(a) => validate(a),
        Command::Bench(a) => bench(a),
    }
}

fn mode(arg: ModeArg) -> Mode {
    match arg {
        ModeArg::Standard => Mode::Standard,
        ModeArg::Coset => Mode::Coset,
    }
}

fn instance_from_size(size: &SizeArgs, seed: u64) -> Result<HiddenShiftInstance, Failure> {
    let (Some(n), Some(t)) = (size.n, size.t) else {
        return Err(Failure::usage("--n and --t are required"));
    };
    let l = size.l.unwrap_or(n as u32 * t);
    HiddenShiftInstance::new(n as usize, t, l, seed).map_err(Failure::usage)
}

fn gen(a: GenArgs) -> Result<(), Failure> {
    let inst = instance_from_size(&a.size, a.seed)?;
    emit(&InstanceFile::from_instance(&inst, a.with_secret).to_text(), a.out.as_deref())
}

#[derive(Serialize)]
struct SolveConfig {
    n: usize,
    t: u32,
    l: u32,
    instance_seed: u64,
    instance: Option<String>,
    epsilon: f64,
    mode: Mode,
}

#[derive(Serialize)]
struct SolveResult {
    s: Option<Vec<u64>>,
    attempts_used: Option<u32>,
    verified: bool,
    /// `match` or `mismatch` when the instance file stores the secret.
    secret_check: Option<&'static str>,
    oracle_queries: u64,
    peak_live_tokens: u64,
    space_bound: u64,
    error: Option<String>,
    report: SieveReport,
}

fn solve(a: SolveArgs, forced: Option<Mode>) -> Result<(), Failure> {
    let mode = forced.unwrap_or(mode(a.mode));
    if !(a.epsilon > 0.0 && a.epsilon < 1.0) {
        return Err(Failure::usage(format!("--epsilon must be in (0,1), got {}", a.epsilon)));
    }
    let (inst, stored) = match &a.instance {
        Some(path) => {
            let file = InstanceFile::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            let inst = file.instantiate().map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            (inst, file.s)
        }
        None => (instance_from_size(&a.size, a.seed)?, None),
    };
    let params = inst.params();
    let config = SolveConfig {
        n: params.n,
        t: params.t,
        l: params.l,
        instance_seed: inst.seed(),
        instance: a.instance.as_ref().map(|p| p.display().to_string()),
        epsilon: a.epsilon,
        mode,
    };
    let space_bound = params.n as u64 * params.t as u64 + params.t as u64;
    let mut oracle = Oracle::new(inst, a.seed);
    let mut rng = seed::derived_rng(a.seed, 0);
    let outcome = solver::solve_with_mode(&mut oracle, a.epsilon, mode, &mut rng);
    let report = oracle.report();
    let (shift, attempts_used, error) = match &outcome {
        Ok(sol) => (Some(sol.shift.coords().to_vec()), Some(sol.attempts_used), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    let secret_check = match (&stored, &shift) {
        (Some(s), Some(found)) => Some(if s == found { "match" } else { "mismatch" }),
        _ => None,
    };
    let result = SolveResult {
        verified: outcome.as_ref().is_ok_and(|s| s.verified),
        s: shift,
        attempts_used,
        secret_check,
        oracle_queries: report.oracle_queries,
        peak_live_tokens: report.peak_live_tokens,
        space_bound,
        error,
        report,
    };
    let text = envelope("solve", a.seed, &config, &result);
    emit(&text, a.out.as_deref())?;
    match outcome {
        Err(SolveError::InvalidEpsilon(e)) => Err(Failure::usage(format!("invalid epsilon {e}"))),
        Err(e) => Err(Failure::solve(e)),
        Ok(_) if result.peak_live_tokens > space_bound => Err(Failure::solve(format!(
            "peak live tokens {} exceed nt+t = {space_bound}",
            result.peak_live_tokens
        ))),
        Ok(_) if secret_check == Some("mismatch") => Err(Failure::solve("recovered shift differs from the stored secret")),
        Ok(_) => Ok(()),
    }
}

fn validate(a: ValidateArgs) -> Result<(), Failure> {
    let config = SuiteConfig {
        seed: a.seed,
        trials: a.trials,
        attempts: a.attempts,
        instances: a.instances,
        only: a.only,
    };
    let report = suite::run_suite(&config).map_err(|e| match e {
        ValidateError::InvalidParameters(_) | ValidateError::NoTrials | ValidateError::TooFewTrials { .. } => Failure::usage(e),
        e => Failure { code: EXIT_VALIDATE, message: e.to_string() },
    })?;
    let text = envelope("validate", a.seed, &config, &report);
    emit(&text, a.out.as_deref())?;
    if report.passed {
        Ok(())
    } else {
        let names: Vec<_> = report.failures().map(|c| c.name.as_str()).collect();
        Err(Failure { code: EXIT_VALIDATE, message: format!("failed: {}", names.join(", ")) })
    }
}

#[derive(Serialize)]
struct BenchConfig {
    trials: u64,
    n_max: u64,
    t_max: u32,
    mode: Mode,
}

#[derive(Serialize)]
struct BenchRow {
    n: usize,
    t: u32,
    attempts: u64,
    mean_queries: f64,
    /// Base states per final state in the first round.
    base_per_final: f64,
    expected_base_per_final: u64,
    peak_live_tokens: u64,
    space_bound: u64,
    /// `(n+1)^{t+2}`, the growth the query counts should follow.
    growth: u64,
    success_rate: f64,
}

fn bench(a: BenchArgs) -> Result<(), Failure> {
    use rayon::prelude::*;
    if a.trials == 0 {
        return Err(Failure::usage("--trials must be positive"));
    }
    let mode = mode(a.mode);
    let mut cells = Vec::new();
    for n in 1..=a.n_max as usize {
        for t in 1..=a.t_max {
            if n as u32 * t <= 64 {
                cells.push((n, t));
            }
        }
    }
    let rows = cells
        .iter()
        .enumerate()
        .map(|(cell, &(n, t))| {
            let runs = (0..a.trials)
                .into_par_iter()
                .map(|i| {
                    let s = seed::derive(seed::derive(a.seed, cell as u64), i);
                    let inst = HiddenShiftInstance::new(n, t, n as u32 * t, s).map_err(Failure::usage)?;
                    let mut oracle = Oracle::new(inst, s);
                    let mut rng = seed::derived_rng(s, 0);
                    let r = solver::attempt(&mut oracle, mode, &mut rng).map_err(Failure::solve)?;
                    let report = oracle.report();
                    let first = r.rounds.first().map_or(0, |r| r.base_consumed);
                    Ok((report.oracle_queries, first, report.peak_live_tokens, r.candidate.is_some()))
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            let count = a.trials as f64;
            let finals = (n + t as usize) as f64;
            Ok(BenchRow {
                n,
                t,
                attempts: a.trials,
                mean_queries: runs.iter().map(|r| r.0 as f64).sum::<f64>() / count,
                base_per_final: runs.iter().map(|r| r.1 as f64 / finals).sum::<f64>() / count,
                expected_base_per_final: (n as u64 + 1).pow(t - 1),
                peak_live_tokens: runs.iter().map(|r| r.2).max().unwrap_or(0),
                space_bound: (n as u64 + 1) * t as u64,
                growth: (n as u64 + 1).saturating_pow(t + 2),
                success_rate: runs.iter().filter(|r| r.3).count() as f64 / count,
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let config = BenchConfig { trials: a.trials, n_max: a.n_max, t_max: a.t_max, mode };
    let text = if a.table { table(a.seed, &config, &rows) } else { envelope("bench", a.seed, &config, &rows) };
    emit(&text, a.out.as_deref())
}

fn table(seed: u64, config: &BenchConfig, rows: &[BenchRow]) -> String {
    let mut out = format!(
        "# hidden-shift {} bench seed={seed} trials={} mode={}\n",
        env!("CARGO_PKG_VERSION"),
        config.trials,
        format!("{:?}", config.mode).to_lowercase()
    );
    out.push_str(&format!(
        "{:>3} {:>3} {:>14} {:>14} {:>10} {:>6} {:>6} {:>12} {:>8}\n",
        "n", "t", "mean_queries", "base/final", "expected", "peak", "nt+t", "(n+1)^(t+2)", "success"
    ));
    for r in rows {
        out.push_str(&format!(
            "{:>3} {:>3} {:>14.1} {:>14.3} {:>10} {:>6} {:>6} {:>12} {:>8.3}\n",
            r.n, r.t, r.mean_queries, r.base_per_final, r.expected_base_per_final, r.peak_live_tokens, r.space_bound, r.growth, r.success_rate
        ));
    }
    out
}
