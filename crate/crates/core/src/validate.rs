//! Independent checks of every distributional and probabilistic claim the
//! algorithm relies on, plus brute-force ground truth.
//!
//! Histogram harnesses draw their own uniform labels and never go through the
//! solver, so they test the combination rule itself. Trials are split into
//! fixed chunks, each with an RNG derived from the root seed by chunk index,
//! which keeps results identical for any thread count.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ValidateError;
use crate::gf2::Gf2System;
use crate::group::{GroupVector, Sign};
use crate::oracle::{Codeword, HiddenShiftInstance, Oracle};
use crate::seed;
use crate::solver::{self, Mode};
use crate::stats::{self, ChiSquare};

/// Largest histogram accepted by the uniformity harnesses.
pub const MAX_CELLS: u64 = 1 << 12;
/// Minimum average count per histogram cell.
pub const MIN_TRIALS_PER_CELL: u64 = 50;
/// Family-wise significance of the validation suite.
pub const SIGNIFICANCE: f64 = 0.01;

const CHUNK: u64 = 1024;

/// Exact histogram and its chi-square test against the uniform distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformityResult {
    pub cells: Vec<u64>,
    pub trials: u64,
    pub chi_square: ChiSquare,
}

impl UniformityResult {
    fn from_cells(cells: Vec<u64>) -> Self {
        let trials = cells.iter().sum();
        let chi_square = stats::uniform(&cells);
        Self {
            cells,
            trials,
            chi_square,
        }
    }

    pub fn passes(&self, alpha: f64) -> bool {
        self.chi_square.passes(alpha)
    }
}

/// The unique `s` with `f0(x) = f1(x + s)` for every `x`, by table scan.
/// Tables are indexed by [`GroupVector::to_index`].
pub fn brute_force_shift(f0: &[Codeword], f1: &[Codeword], n: usize, t: u32) -> Result<GroupVector, ValidateError> {
    let size = 1u64
        .checked_shl(n as u32 * t)
        .filter(|&s| s <= 1 << 16)
        .ok_or_else(|| ValidateError::InvalidParameters(format!("domain 2^{} too large", n as u32 * t)))?;
    if f0.len() as u64 != size || f1.len() as u64 != size {
        return Err(ValidateError::InvalidParameters("table size does not match the domain".into()));
    }
    let mut positions: HashMap<&Codeword, Vec<u64>> = HashMap::new();
    for (y, c) in f1.iter().enumerate() {
        positions.entry(c).or_default().push(y as u64);
    }
    let mut found = Vec::new();
    // s must map x = 0 onto some y with f1(y) = f0(0), so s = y
    for &y in positions.get(&f0[0]).map(Vec::as_slice).unwrap_or(&[]) {
        let s = GroupVector::from_index(y, n, t)?;
        let ok = (0..size).all(|x| {
            let xv = GroupVector::from_index(x, n, t).expect("in range");
            let shifted = xv.add(&s).expect("same group").to_index();
            f0[x as usize] == f1[shifted as usize]
        });
        if ok {
            found.push(s);
        }
    }
    match found.len() {
        1 => Ok(found.pop().expect("one element")),
        0 => Err(ValidateError::PromiseViolation("no shift maps f0 onto f1".into())),
        k => Err(ValidateError::PromiseViolation(format!("{k} shifts map f0 onto f1"))),
    }
}

/// Full `f(., 0)` and `f(., 1)` tables through the oracle's query interface.
pub fn oracle_tables(oracle: &mut Oracle) -> Result<(Vec<Codeword>, Vec<Codeword>), ValidateError> {
    let p = oracle.params();
    let size = 1u64 << p.domain_bits();
    let mut f0 = Vec::with_capacity(size as usize);
    let mut f1 = Vec::with_capacity(size as usize);
    for i in 0..size {
        let x = GroupVector::from_index(i, p.n, p.t)?;
        f0.push(oracle.f_eval(&x, false)?);
        f1.push(oracle.f_eval(&x, true)?);
    }
    Ok((f0, f1))
}

/// How coefficient vectors are drawn in [`lemma1_trial`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientMode {
    /// Uniform nonzero `a in {0,1}^{n+1}` from the dependence sampler.
    Unsigned,
    /// As `Unsigned`, then an independent fair sign on each selected entry;
    /// the distribution the combination pipeline realizes.
    RandomSigns,
    /// Uniform over the whole set `A` of nonzero `a in {0, +-1}^{n+1}`.
    LiteralSet,
}

fn check_histogram(cells: u64, trials: u64) -> Result<(), ValidateError> {
    if trials == 0 {
        return Err(ValidateError::NoTrials);
    }
    if cells > MAX_CELLS {
        return Err(ValidateError::TooManyCells { cells, limit: MAX_CELLS });
    }
    if trials < MIN_TRIALS_PER_CELL * cells {
        return Err(ValidateError::TooFewTrials { trials, cells });
    }
    Ok(())
}

fn chunked_histogram<F>(cells: u64, trials: u64, root_seed: u64, per_chunk: F) -> Result<Vec<u64>, ValidateError>
where
    F: Fn(u64, &mut rand_chacha::ChaCha8Rng, &mut [u64]) -> Result<(), ValidateError> + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let partial: Result<Vec<Vec<u64>>, ValidateError> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed::derived_rng(root_seed, c);
            let mut hist = vec![0u64; cells as usize];
            let size = CHUNK.min(trials - c * CHUNK);
            per_chunk(size, &mut rng, &mut hist)?;
            Ok(hist)
        })
        .collect();
    let mut total = vec![0u64; cells as usize];
    for hist in partial? {
        for (a, b) in total.iter_mut().zip(hist) {
            *a += b;
        }
    }
    Ok(total)
}

/// Draws `u_1..u_{n+1}` uniform in `Z_{2^t}^n`, a coefficient vector in the
/// given mode, and histograms `(sum a_i u_i) / 2` over `Z_{2^{t-1}}^n`.
pub fn lemma1_trial(n: usize, t: u32, trials: u64, mode: CoefficientMode, root_seed: u64) -> Result<UniformityResult, ValidateError> {
    if n == 0 || t < 2 {
        return Err(ValidateError::InvalidParameters(format!("need n >= 1, t >= 2, got n={n}, t={t}")));
    }
    let cell_bits = (t - 1) as u64 * n as u64;
    let cells = 1u64.checked_shl(cell_bits as u32).filter(|_| cell_bits < 63).unwrap_or(u64::MAX);
    check_histogram(cells, trials)?;
    let cells = chunked_histogram(cells, trials, root_seed, |size, rng, hist| {
        for _ in 0..size {
            let us: Vec<GroupVector> = (0..=n).map(|_| GroupVector::random(n, t, rng)).collect::<Result<_, _>>()?;
            let coeffs = draw_binary_coefficients(&us, mode, rng)?;
            let mut sum = GroupVector::zero(n, t)?;
            for (u, c) in us.iter().zip(&coeffs) {
                match c {
                    1 => sum = sum.add(u)?,
                    -1 => sum = sum.sub(u)?,
                    _ => {}
                }
            }
            hist[sum.halve()?.to_index() as usize] += 1;
        }
        Ok(())
    })?;
    Ok(UniformityResult::from_cells(cells))
}

fn draw_binary_coefficients<R: Rng + ?Sized>(us: &[GroupVector], mode: CoefficientMode, rng: &mut R) -> Result<Vec<i8>, ValidateError> {
    let n = us[0].dim();
    let columns: Vec<Vec<bool>> = us.iter().map(GroupVector::reduce_mod2).collect();
    let mut system = Gf2System::from_columns(&columns, n)?;
    let support = match mode {
        CoefficientMode::Unsigned | CoefficientMode::RandomSigns => system.sample_uniform_solution(rng)?,
        CoefficientMode::LiteralSet => {
            // a support of weight w stands for 2^w signed elements of A
            let len = us.len() as u32;
            loop {
                let candidate = system.sample_uniform_solution(rng)?;
                let w = candidate.count_ones() as u32;
                if rng.random_range(0..1u64 << len) < 1u64 << w {
                    break candidate;
                }
            }
        }
    };
    Ok(support
        .to_bools()
        .into_iter()
        .map(|on| match (on, mode) {
            (false, _) => 0,
            (true, CoefficientMode::Unsigned) => 1,
            (true, _) => {
                if rng.random::<bool>() {
                    1
                } else {
                    -1
                }
            }
        })
        .collect())
}

/// Nonzero solutions of `sum_j a_j c_j = 0 (mod p)` for columns `c_j`, as a
/// reduced basis over GF(p).
struct ModPNullspace {
    p: u64,
    ncols: usize,
    pivots: Vec<(usize, Vec<u64>)>,
    free: Vec<usize>,
}

impl ModPNullspace {
    fn new(columns: &[Vec<u64>], p: u64) -> Self {
        let ncols = columns.len();
        let nrows = columns.first().map_or(0, Vec::len);
        let mut rows: Vec<Vec<u64>> = (0..nrows).map(|i| columns.iter().map(|c| c[i] % p).collect()).collect();
        let inv = |a: u64| (1..p).find(|&b| a * b % p == 1).expect("p prime");
        let mut rank = 0;
        let mut pivot_cols = Vec::new();
        for col in 0..ncols {
            let Some(found) = (rank..nrows).find(|&r| rows[r][col] != 0) else {
                continue;
            };
            rows.swap(rank, found);
            let scale = inv(rows[rank][col]);
            for v in rows[rank].iter_mut() {
                *v = *v * scale % p;
            }
            for r in 0..nrows {
                if r != rank && rows[r][col] != 0 {
                    let factor = rows[r][col];
                    let pivot = rows[rank].clone();
                    for (v, &q) in rows[r].iter_mut().zip(&pivot) {
                        *v = (*v + p * p - factor * q % p) % p;
                    }
                }
            }
            pivot_cols.push(col);
            rank += 1;
        }
        let free = (0..ncols).filter(|c| !pivot_cols.contains(c)).collect();
        let pivots = pivot_cols.into_iter().zip(rows).collect();
        Self { p, ncols, pivots, free }
    }

    /// Uniform nonzero solution (free variables uniform, not all zero).
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        assert!(!self.free.is_empty());
        loop {
            let mut x = vec![0u64; self.ncols];
            for &f in &self.free {
                x[f] = rng.random_range(0..self.p);
            }
            if self.free.iter().all(|&f| x[f] == 0) {
                continue;
            }
            for (col, row) in &self.pivots {
                let s: u64 = self.free.iter().map(|&f| row[f] * x[f]).sum::<u64>() % self.p;
                x[*col] = (self.p - s) % self.p;
            }
            return x;
        }
    }
}

/// Prime-power generalization: labels in `Z_{p^t}^n`, coefficients uniform
/// over nonzero `a in {-(p-1), .., p-1}^{n+1}` with `sum a_i u_i = 0 (mod p)`,
/// histogram of `(sum a_i u_i) / p` over `Z_{p^{t-1}}^n`.
pub fn theorem2_trial(p: u64, t: u32, n: usize, trials: u64, root_seed: u64) -> Result<UniformityResult, ValidateError> {
    if ![2, 3, 5].contains(&p) {
        return Err(ValidateError::UnsupportedPrime(p));
    }
    if n == 0 || t < 2 {
        return Err(ValidateError::InvalidParameters(format!("need n >= 1, t >= 2, got n={n}, t={t}")));
    }
    let modulus = p.checked_pow(t).ok_or_else(|| ValidateError::InvalidParameters("modulus overflow".into()))?;
    let cell_base = modulus / p;
    let cells = (cell_base as u128).pow(n as u32).min(u64::MAX as u128) as u64;
    check_histogram(cells, trials)?;
    let len = n as u32 + 1;
    let cells = chunked_histogram(cells, trials, root_seed, |size, rng, hist| {
        for _ in 0..size {
            let us: Vec<Vec<u64>> = (0..=n).map(|_| (0..n).map(|_| rng.random_range(0..modulus)).collect()).collect();
            let null = ModPNullspace::new(&us, p);
            // each nonzero residue has two representatives in {-(p-1), .., p-1}
            let residues = loop {
                let r = null.sample(rng);
                let w = r.iter().filter(|&&v| v != 0).count() as u32;
                if rng.random_range(0..1u64 << len) < 1u64 << w {
                    break r;
                }
            };
            let coeffs: Vec<i64> = residues
                .iter()
                .map(|&r| match r {
                    0 => 0,
                    r if rng.random::<bool>() => r as i64,
                    r => r as i64 - p as i64,
                })
                .collect();
            let mut index = 0u64;
            for coord in (0..n).rev() {
                let sum = us
                    .iter()
                    .zip(&coeffs)
                    .map(|(u, &a)| a * u[coord] as i64)
                    .sum::<i64>()
                    .rem_euclid(modulus as i64) as u64;
                debug_assert_eq!(sum % p, 0);
                index = index * cell_base + sum / p;
            }
            hist[index as usize] += 1;
        }
        Ok(())
    })?;
    Ok(UniformityResult::from_cells(cells))
}

/// Frequency of `+` over `trials` combinations of fresh phase states.
pub fn sign_balance_trial(oracle: &mut Oracle, trials: u64) -> Result<f64, ValidateError> {
    if trials == 0 {
        return Err(ValidateError::NoTrials);
    }
    let mut plus = 0u64;
    for _ in 0..trials {
        let a = oracle.sample_phase_state()?;
        let b = oracle.sample_phase_state()?;
        let (sign, c) = oracle.combine(a, b)?;
        plus += (sign == Sign::Plus) as u64;
        oracle.discard(c)?;
    }
    Ok(plus as f64 / trials as f64)
}

/// Empirical per-round rank rate and per-attempt success rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessBound {
    pub n: usize,
    pub t: u32,
    pub attempts: u64,
    pub attempts_succeeded: u64,
    pub rounds: u64,
    pub rounds_full_rank: u64,
    pub peak_live_tokens: u64,
}

impl SuccessBound {
    pub fn per_level_rate(&self) -> f64 {
        self.rounds_full_rank as f64 / self.rounds as f64
    }

    pub fn per_attempt_rate(&self) -> f64 {
        self.attempts_succeeded as f64 / self.attempts as f64
    }

    /// `1 - 2^{-t}`.
    pub fn per_level_bound(&self) -> f64 {
        1.0 - 0.5f64.powi(self.t as i32)
    }

    /// `(1 - 2^{-t})^t`.
    pub fn per_attempt_bound(&self) -> f64 {
        self.per_level_bound().powi(self.t as i32)
    }
}

/// Runs `attempts` single attempts, each on a fresh random instance, and
/// counts full-rank rounds and verified attempts.
pub fn success_bound_trial(n: usize, t: u32, attempts: u64, mode: Mode, root_seed: u64) -> Result<SuccessBound, ValidateError> {
    if attempts == 0 {
        return Err(ValidateError::NoTrials);
    }
    let per_attempt: Result<Vec<(bool, u64, u64, u64)>, ValidateError> = (0..attempts)
        .into_par_iter()
        .map(|i| {
            let inst_seed = seed::derive(root_seed, 2 * i);
            let run_seed = seed::derive(root_seed, 2 * i + 1);
            let inst = HiddenShiftInstance::new(n, t, n as u32 * t, inst_seed)?;
            let secret = inst.secret().clone();
            let mut oracle = Oracle::new(inst, run_seed);
            let mut rng = seed::rng(run_seed);
            let result = solver::attempt(&mut oracle, mode, &mut rng)?;
            let full = result.rounds.iter().filter(|r| r.full_rank).count() as u64;
            let ok = match &result.candidate {
                Some(c) => solver::verify(&mut oracle, c, &mut rng)? && *c == secret,
                None => false,
            };
            Ok((ok, result.rounds.len() as u64, full, oracle.report().peak_live_tokens))
        })
        .collect();
    let per_attempt = per_attempt?;
    Ok(SuccessBound {
        n,
        t,
        attempts,
        attempts_succeeded: per_attempt.iter().filter(|r| r.0).count() as u64,
        rounds: per_attempt.iter().map(|r| r.1).sum(),
        rounds_full_rank: per_attempt.iter().map(|r| r.2).sum(),
        peak_live_tokens: per_attempt.iter().map(|r| r.3).max().unwrap_or(0),
    })
}

/// Histogram of level-`j` outputs of the real pipeline (through the oracle)
/// over `Z_{2^{t-j-1}}^n`.
pub fn sieve_level_trial(n: usize, t: u32, level: u32, trials: u64, root_seed: u64) -> Result<UniformityResult, ValidateError> {
    use crate::sieve::{OracleSource, PhaseSource, RunLevel};
    if level + 1 >= t {
        return Err(ValidateError::InvalidParameters(format!("level {level} needs t > {}", level + 1)));
    }
    let out_bits = t - level - 1;
    let cells = 1u64 << (out_bits as u64 * n as u64).min(63);
    check_histogram(cells, trials)?;
    let cells = chunked_histogram(cells, trials, root_seed, |size, rng, hist| {
        let inst = HiddenShiftInstance::new(n, t, n as u32 * t, rng.random())?;
        let mut oracle = Oracle::new(inst, rng.random());
        let mut stack: Box<dyn PhaseSource> = Box::new(OracleSource::new(oracle.root()));
        for j in 0..=level {
            stack = Box::new(RunLevel::new(stack, n, j));
        }
        for _ in 0..size {
            let token = stack.pull(&mut oracle, rng)?;
            hist[token.label().to_index() as usize] += 1;
            oracle.discard(token)?;
        }
        Ok(())
    })?;
    Ok(UniformityResult::from_cells(cells))
}
