//! Recovering the shift from final-state measurements.
//!
//! Each round measures `n + t` sieved states in the `+/-` basis, solving the
//! resulting parity equations for the current shift modulo 2, then descends
//! to `f'(x, 0) = f(2x, 0)`, `f'(x, 1) = f(2x + s_2, 1)` whose hidden shift is
//! `(s - s_2) / 2`. After `t` rounds the accumulated offset is `s`.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::gf2::{BitRow, Gf2System};
use crate::group::GroupVector;
use crate::oracle::{Oracle, Outcome, PhaseToken, SieveReport, WrappedOracle};
use crate::sieve::{run_sieve, CosetSource, OracleSource};

/// Largest domain checked exhaustively during verification.
pub const EXHAUSTIVE_VERIFY_LIMIT: u64 = 1 << 10;
/// Random points checked during verification of larger domains.
pub const VERIFY_SAMPLES: usize = 32;

/// One measured final state: `parity = <indicator, s'> mod 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityEquation {
    pub indicator: Vec<bool>,
    pub parity: bool,
}

/// Measures every final state; indicators are the labels' parities.
pub fn collect_equations(oracle: &mut Oracle, finals: Vec<PhaseToken>) -> Result<Vec<ParityEquation>, SolveError> {
    finals
        .into_iter()
        .map(|token| {
            let indicator = token.label().reduce_mod2();
            let parity = oracle.measure_pm(token)?;
            Ok(ParityEquation { indicator, parity })
        })
        .collect()
}

/// Unique solution of the parity equations over `Z_2^n`.
pub fn solve_mod2(equations: &[ParityEquation], n: usize) -> Result<GroupVector, SolveError> {
    if equations.len() < n {
        return Err(SolveError::TooFewEquations {
            needed: n,
            got: equations.len(),
        });
    }
    let mut system = Gf2System::new(n);
    for eq in equations {
        system.push(BitRow::from_bools(&eq.indicator), eq.parity)?;
    }
    system.echelonize();
    if system.rank() < n {
        return Err(SolveError::RankDeficient {
            rank: system.rank(),
            needed: n,
        });
    }
    let solution = system
        .unique_solution()
        .map_err(|_| SolveError::Inconsistent)?
        .expect("full column rank");
    Ok(GroupVector::new(solution.to_bools().into_iter().map(u64::from).collect(), 1)?)
}

/// Wraps the oracle once more with `s_2 = (current shift) mod 2`.
pub fn descend(view: &WrappedOracle, s2: &GroupVector) -> Result<WrappedOracle, SolveError> {
    Ok(view.descend(s2)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Phase states prepared from oracle queries.
    Standard,
    /// Phase states made from a coset-state stream.
    Coset,
}

/// What happened in one round of an attempt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundRecord {
    pub round: u32,
    pub full_rank: bool,
    /// Base states pulled from the oracle this round.
    pub base_consumed: u64,
    /// Offset known after the round (unchanged on failure).
    pub known: GroupVector,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttemptResult {
    pub rounds: Vec<RoundRecord>,
    /// Candidate shift, present when every round had full rank.
    pub candidate: Option<GroupVector>,
}

/// One pass of `t` rounds. Stops at the first rank-deficient round.
pub fn attempt(oracle: &mut Oracle, mode: Mode, rng: &mut dyn RngCore) -> Result<AttemptResult, SolveError> {
    let params = oracle.params();
    let (n, t) = (params.n, params.t);
    let count = n + t as usize;
    let mut view = oracle.root();
    let mut rounds = Vec::with_capacity(t as usize);
    for round in 0..t {
        let levels = t - round - 1;
        let run = match mode {
            Mode::Standard => run_sieve(oracle, OracleSource::new(view.clone()), n, levels, count, rng)?,
            Mode::Coset => run_sieve(oracle, CosetSource::new(view.offset().clone()), n, levels, count, rng)?,
        };
        let equations = collect_equations(oracle, run.finals)?;
        match solve_mod2(&equations, n) {
            Ok(s2) => {
                view = descend(&view, &s2)?;
                rounds.push(RoundRecord {
                    round,
                    full_rank: true,
                    base_consumed: run.base_consumed,
                    known: view.offset().clone(),
                });
            }
            Err(SolveError::RankDeficient { .. }) | Err(SolveError::Inconsistent) => {
                rounds.push(RoundRecord {
                    round,
                    full_rank: false,
                    base_consumed: run.base_consumed,
                    known: view.offset().clone(),
                });
                return Ok(AttemptResult { rounds, candidate: None });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(AttemptResult {
        rounds,
        candidate: Some(view.offset().clone()),
    })
}

/// Checks `f(x, 0) = f(x + s, 1)`, on every `x` for small domains and on
/// [`VERIFY_SAMPLES`] random points otherwise.
pub fn verify<R: Rng + ?Sized>(oracle: &mut Oracle, candidate: &GroupVector, rng: &mut R) -> Result<bool, SolveError> {
    let params = oracle.params();
    let bits = params.domain_bits();
    let check = |oracle: &mut Oracle, x: GroupVector| -> Result<bool, SolveError> {
        let lhs = oracle.f_eval(&x, false)?;
        let rhs = oracle.f_eval(&x.add(candidate)?, true)?;
        Ok(lhs == rhs)
    };
    if bits < 64 && (1u64 << bits) <= EXHAUSTIVE_VERIFY_LIMIT {
        for index in 0..1u64 << bits {
            if !check(oracle, GroupVector::from_index(index, params.n, params.t)?)? {
                return Ok(false);
            }
        }
    } else {
        for _ in 0..VERIFY_SAMPLES {
            if !check(oracle, GroupVector::random(params.n, params.t, rng)?)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `ceil(log2(1 / epsilon))` attempts, at least one.
pub fn attempt_budget(epsilon: f64) -> Result<u32, SolveError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(SolveError::InvalidEpsilon(epsilon));
    }
    Ok(((1.0 / epsilon).log2().ceil() as u32).max(1))
}

/// A verified shift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub shift: GroupVector,
    pub attempts_used: u32,
    pub verified: bool,
    pub report: SieveReport,
}

/// Repeats attempts until a candidate passes verification or the budget for
/// `epsilon` runs out.
pub fn solve_with_mode(oracle: &mut Oracle, epsilon: f64, mode: Mode, rng: &mut dyn RngCore) -> Result<Solution, SolveError> {
    let budget = attempt_budget(epsilon)?;
    for used in 1..=budget {
        let result = attempt(oracle, mode, rng)?;
        let Some(candidate) = result.candidate else {
            oracle.record_outcome(Outcome::RankDeficient);
            continue;
        };
        if verify(oracle, &candidate, rng)? {
            oracle.record_outcome(Outcome::Success);
            return Ok(Solution {
                shift: candidate,
                attempts_used: used,
                verified: true,
                report: oracle.report(),
            });
        }
        oracle.record_outcome(Outcome::Failed);
    }
    Err(SolveError::AllAttemptsFailed { attempts: budget })
}

pub fn solve(oracle: &mut Oracle, epsilon: f64, rng: &mut dyn RngCore) -> Result<Solution, SolveError> {
    solve_with_mode(oracle, epsilon, Mode::Standard, rng)
}

/// Same recovery from coset states: round `i` undoes the known `s_i` before
/// the QFT and needs only `t - i - 1` sieve levels.
pub fn solve_coset(oracle: &mut Oracle, epsilon: f64, rng: &mut dyn RngCore) -> Result<Solution, SolveError> {
    solve_with_mode(oracle, epsilon, Mode::Coset, rng)
}
