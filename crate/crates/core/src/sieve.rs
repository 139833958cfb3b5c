//! The combination pipeline.
//!
//! One sieve level takes `n + 1` phase states with labels in `Z_{2^m}^n`,
//! finds a nonzero `a in {0,1}^{n+1}` with `sum a_i u_i = 0 (mod 2)`, folds the
//! selected states together with [`Oracle::combine`] and halves the resulting
//! even label, giving one state labelled in `Z_{2^{m-1}}^n`. States outside the
//! selection are discarded so that every output sees a fresh uniform sample.
//!
//! Levels are pull-driven: a level asks its source for a state only when it
//! needs one, so at most `n + 1` states wait at any level. With `t - 1` levels
//! and an output buffer of `n + t` this keeps at most `nt + t` states alive.

use rand::{Rng, RngCore};

use crate::error::SieveError;
use crate::gf2::{BitRow, CoefficientVector, Gf2System};
use crate::group::{GroupVector, Sign};
use crate::oracle::{Oracle, PhaseToken, WrappedOracle};

/// Uniformly random nonzero `a` with `sum a_i u_i = 0 (mod 2)`.
pub fn find_dependence<R: Rng + ?Sized>(labels: &[&GroupVector], rng: &mut R) -> Result<BitRow, SieveError> {
    let n = labels.first().map(|u| u.dim()).unwrap_or(0);
    if labels.len() != n + 1 {
        return Err(SieveError::WrongArity {
            expected: n + 1,
            got: labels.len(),
        });
    }
    let columns: Vec<Vec<bool>> = labels.iter().map(|u| u.reduce_mod2()).collect();
    let mut system = Gf2System::from_columns(&columns, n)?;
    Ok(system.sample_uniform_solution(rng)?)
}

/// Result of folding a selection of states together.
#[derive(Debug)]
pub struct Combined {
    pub token: PhaseToken,
    /// Signs `eps_i` of the realized sum `v = sum eps_i u_i`, in selection order.
    pub signs: Vec<Sign>,
}

impl Combined {
    pub fn label(&self) -> &GroupVector {
        self.token.label()
    }

    /// Coefficients over all `n + 1` positions given the selection support.
    pub fn coefficients(&self, support: &BitRow) -> CoefficientVector {
        let mut coeffs = CoefficientVector::zeros(support.len());
        for (index, &sign) in support.ones().zip(&self.signs) {
            coeffs.set(index, Some(sign));
        }
        coeffs
    }
}

/// Left fold of [`Oracle::combine`] in selection order; the first sign is `+`.
pub fn combine_chain(oracle: &mut Oracle, selected: Vec<PhaseToken>) -> Result<Combined, SieveError> {
    let mut iter = selected.into_iter();
    let mut acc = iter.next().ok_or(SieveError::EmptySelection)?;
    let mut signs = vec![Sign::Plus];
    for next in iter {
        let (sign, token) = oracle.combine(acc, next)?;
        signs.push(sign);
        acc = token;
    }
    Ok(Combined { token: acc, signs })
}

/// Anything that hands out phase states on demand.
pub trait PhaseSource {
    fn pull(&mut self, oracle: &mut Oracle, rng: &mut dyn RngCore) -> Result<PhaseToken, SieveError>;

    /// States taken from the underlying oracle so far.
    fn base_pulled(&self) -> u64;
}

impl<S: PhaseSource + ?Sized> PhaseSource for Box<S> {
    fn pull(&mut self, oracle: &mut Oracle, rng: &mut dyn RngCore) -> Result<PhaseToken, SieveError> {
        (**self).pull(oracle, rng)
    }

    fn base_pulled(&self) -> u64 {
        (**self).base_pulled()
    }
}

/// Fresh phase states prepared from a (possibly descended) oracle.
#[derive(Debug, Clone)]
pub struct OracleSource {
    view: WrappedOracle,
    pulled: u64,
}

impl OracleSource {
    pub fn new(view: WrappedOracle) -> Self {
        Self { view, pulled: 0 }
    }
}

impl PhaseSource for OracleSource {
    fn pull(&mut self, oracle: &mut Oracle, _rng: &mut dyn RngCore) -> Result<PhaseToken, SieveError> {
        let token = oracle.sample_phase_state_via(&self.view)?;
        self.pulled += 1;
        Ok(token)
    }

    fn base_pulled(&self) -> u64 {
        self.pulled
    }
}

/// Phase states made from the coset-state stream after undoing the known
/// part `s_i` of the shift.
#[derive(Debug, Clone)]
pub struct CosetSource {
    known: GroupVector,
    pulled: u64,
}

impl CosetSource {
    pub fn new(known: GroupVector) -> Self {
        Self { known, pulled: 0 }
    }
}

impl PhaseSource for CosetSource {
    fn pull(&mut self, oracle: &mut Oracle, _rng: &mut dyn RngCore) -> Result<PhaseToken, SieveError> {
        let coset = oracle.sample_coset_state()?;
        let token = oracle.shift_and_transform(coset, &self.known)?;
        self.pulled += 1;
        Ok(token)
    }

    fn base_pulled(&self) -> u64 {
        self.pulled
    }
}

/// States waiting at one level for a full group of `capacity`.
#[derive(Debug)]
pub struct LevelBuffer {
    level: u32,
    capacity: usize,
    entries: Vec<PhaseToken>,
}

impl LevelBuffer {
    pub fn new(level: u32, capacity: usize) -> Self {
        Self {
            level,
            capacity,
            entries: Vec::with_capacity(capacity),
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    fn push(&mut self, token: PhaseToken) {
        assert!(!self.is_full(), "level {} buffer overflow", self.level);
        self.entries.push(token);
    }

    fn drain(&mut self) -> Vec<PhaseToken> {
        std::mem::take(&mut self.entries)
    }
}

/// One sieve level over `source`: emits states whose labels have one bit less.
pub struct RunLevel<S> {
    source: S,
    buffer: LevelBuffer,
    emitted: u64,
}

impl<S: PhaseSource> RunLevel<S> {
    pub fn new(source: S, n: usize, level: u32) -> Self {
        Self {
            source,
            buffer: LevelBuffer::new(level, n + 1),
            emitted: 0,
        }
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }
}

impl<S: PhaseSource> PhaseSource for RunLevel<S> {
    fn pull(&mut self, oracle: &mut Oracle, rng: &mut dyn RngCore) -> Result<PhaseToken, SieveError> {
        while !self.buffer.is_full() {
            let token = self.source.pull(oracle, rng)?;
            self.buffer.push(token);
        }
        let entries = self.buffer.drain();
        let labels: Vec<&GroupVector> = entries.iter().map(PhaseToken::label).collect();
        let support = find_dependence(&labels, rng)?;

        let mut selected = Vec::with_capacity(support.count_ones());
        for (i, token) in entries.into_iter().enumerate() {
            if support.get(i) {
                selected.push(token);
            } else {
                oracle.discard(token)?;
            }
        }
        let combined = combine_chain(oracle, selected)?;
        let token = combined.token.halve_label()?;
        self.emitted += 1;
        Ok(token)
    }

    fn base_pulled(&self) -> u64 {
        self.source.base_pulled()
    }
}

/// Output of [`run_sieve`].
#[derive(Debug)]
pub struct SieveRun {
    pub finals: Vec<PhaseToken>,
    pub base_consumed: u64,
}

/// Stacks `levels` sieve levels on `base` and collects `count` final states.
pub fn run_sieve<'a, S: PhaseSource + 'a>(
    oracle: &mut Oracle,
    base: S,
    n: usize,
    levels: u32,
    count: usize,
    rng: &mut dyn RngCore,
) -> Result<SieveRun, SieveError> {
    let mut stack: Box<dyn PhaseSource + 'a> = Box::new(base);
    for level in 0..levels {
        stack = Box::new(RunLevel::new(stack, n, level));
    }
    let mut finals = Vec::with_capacity(count);
    for _ in 0..count {
        finals.push(stack.pull(oracle, rng)?);
    }
    Ok(SieveRun {
        finals,
        base_consumed: stack.base_pulled(),
    })
}
