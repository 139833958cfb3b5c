//! The simulated quantum device.
//!
//! An [`Oracle`] owns a [`HiddenShiftInstance`] and a token table. Solver code
//! receives labels, combination signs and measurement bits, never phases or
//! the secret. Each phase state is a single qubit
//! `(|0> + e^{2 pi i theta / 2^P} |1>) / sqrt 2`, stored exactly as the residue
//! `theta` modulo `2^P`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::encoding::{mix64, Codeword};
use super::instance::{HiddenShiftInstance, Params};
use crate::error::{GroupError, OracleError};
use crate::group::{GroupVector, Sign};

static NEXT_DEVICE: AtomicU64 = AtomicU64::new(1);

/// How the solver currently sees the oracle after `depth` descents:
/// `f'(x, 0) = f(2^depth x, 0)` and `f'(x, 1) = f(2^depth x + offset, 1)` over
/// `Z_{2^{t-depth}}^n`. When `offset = s mod 2^depth`, `f'` hides the shift
/// `(s - offset) / 2^depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WrappedOracle {
    params: Params,
    depth: u32,
    offset: GroupVector,
}

impl WrappedOracle {
    pub fn root(params: Params) -> Self {
        Self {
            params,
            depth: 0,
            offset: GroupVector::zero(params.n, params.t).expect("validated parameters"),
        }
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Bits per coordinate of the wrapped group, `t - depth`.
    pub fn group_bits(&self) -> u32 {
        self.params.t - self.depth
    }

    /// Shift bits recovered so far, `s mod 2^depth` when every descent was correct.
    pub fn offset(&self) -> &GroupVector {
        &self.offset
    }

    /// Composes one more descent with `s_2`, the wrapped shift modulo 2.
    pub fn descend(&self, s2: &GroupVector) -> Result<Self, GroupError> {
        if self.depth >= self.params.t {
            return Err(GroupError::UnsupportedModulus(0));
        }
        if s2.dim() != self.params.n {
            return Err(GroupError::DimensionMismatch {
                left: self.params.n,
                right: s2.dim(),
            });
        }
        if s2.modulus_log() != 1 {
            return Err(GroupError::ModulusMismatch {
                left: 1,
                right: s2.modulus_log(),
            });
        }
        let step = s2.widen(self.params.t)?;
        let step = GroupVector::from_reduced(step.coords().iter().map(|&c| c << self.depth), self.params.t)?;
        Ok(Self {
            params: self.params,
            depth: self.depth + 1,
            offset: self.offset.add(&step)?,
        })
    }

    fn map_input(&self, x: &GroupVector, bit: bool) -> Result<GroupVector, GroupError> {
        if x.modulus_log() != self.group_bits() {
            return Err(GroupError::ModulusMismatch {
                left: self.group_bits(),
                right: x.modulus_log(),
            });
        }
        let scaled = GroupVector::from_reduced(x.coords().iter().map(|&c| c << self.depth), self.params.t)?;
        if bit {
            scaled.add(&self.offset)
        } else {
            Ok(scaled)
        }
    }
}

/// Handle to one live phase qubit. The label is public; the phase is not.
///
/// Handles cannot be copied:
///
/// ```compile_fail
/// # use hidden_shift::{HiddenShiftInstance, Oracle};
/// let mut oracle = Oracle::new(HiddenShiftInstance::new(2, 2, 4, 0).unwrap(), 0);
/// let token = oracle.sample_phase_state().unwrap();
/// let copy = token.clone();
/// ```
///
/// and carry no phase:
///
/// ```compile_fail
/// # use hidden_shift::{HiddenShiftInstance, Oracle};
/// let mut oracle = Oracle::new(HiddenShiftInstance::new(2, 2, 4, 0).unwrap(), 0);
/// let token = oracle.sample_phase_state().unwrap();
/// let theta = token.theta;
/// ```
#[derive(Debug, PartialEq, Eq)]
pub struct PhaseToken {
    device: u64,
    id: u64,
    label: GroupVector,
}

impl PhaseToken {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn label(&self) -> &GroupVector {
        &self.label
    }

    /// Replaces an even label `v` with `v / 2`. The qubit is untouched: its
    /// phase depends on the label only through `2 (v / 2) = v`.
    pub fn halve_label(self) -> Result<Self, GroupError> {
        Ok(Self {
            label: self.label.halve()?,
            ..self
        })
    }
}

/// Handle to one live coset state `(|x>|0> + |x+s>|1>) / sqrt 2`.
#[derive(Debug, PartialEq, Eq)]
pub struct CosetToken {
    device: u64,
    id: u64,
}

impl CosetToken {
    pub fn id(&self) -> u64 {
        self.id
    }
}

/// Exact phase of a simulated qubit.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Phase {
    /// `theta` modulo `2^bits`.
    Coherent { theta: u64, bits: u32 },
    /// Maximally mixed; arises only from an oracle that breaks the promise
    /// (a wrong descent), and absorbs everything it is combined with.
    Mixed { bits: u32 },
}

impl Phase {
    fn bits(&self) -> u32 {
        match *self {
            Phase::Coherent { bits, .. } | Phase::Mixed { bits } => bits,
        }
    }
}

#[derive(Clone, Debug)]
struct PhaseRecord {
    phase: Phase,
    // effective hidden shift the phase refers to, for the inspector
    shift: Option<GroupVector>,
}

#[derive(Clone, Debug)]
enum Record {
    Phase(PhaseRecord),
    #[cfg_attr(not(any(test, feature = "inspect")), allow(dead_code))]
    Coset { x: GroupVector },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    RankDeficient,
    Failed,
}

/// Instrumentation snapshot.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveReport {
    pub oracle_queries: u64,
    /// QFT cost in `(n t')^2` units, `t'` the bits of the group transformed.
    pub qft_units: u64,
    pub tokens_created: u64,
    pub tokens_consumed: u64,
    pub live_tokens: u64,
    pub peak_live_tokens: u64,
    /// Phase tokens consumed (combined, discarded or measured), indexed by
    /// the sieve level of their label.
    pub per_level_consumed: Vec<u64>,
    pub measurements: u64,
    pub outcome: Option<Outcome>,
}

/// Simulated quantum device holding a hidden shift instance.
pub struct Oracle {
    instance: HiddenShiftInstance,
    device: u64,
    rng: ChaCha8Rng,
    next_id: u64,
    table: HashMap<u64, Record>,
    report: SieveReport,
}

impl Oracle {
    /// `run_seed` drives every simulated measurement; together with the
    /// instance seed it fixes the whole transcript.
    pub fn new(instance: HiddenShiftInstance, run_seed: u64) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(mix64(instance.seed()) ^ mix64(run_seed.rotate_left(17)));
        Self {
            instance,
            device: NEXT_DEVICE.fetch_add(1, Ordering::Relaxed),
            rng,
            next_id: 0,
            table: HashMap::new(),
            report: SieveReport::default(),
        }
    }

    pub fn params(&self) -> Params {
        self.instance.params()
    }

    pub fn root(&self) -> WrappedOracle {
        WrappedOracle::root(self.params())
    }

    pub fn report(&self) -> SieveReport {
        self.report.clone()
    }

    pub fn record_outcome(&mut self, outcome: Outcome) {
        self.report.outcome = Some(outcome);
    }

    /// Classical query `f(x, bit)`.
    pub fn f_eval(&mut self, x: &GroupVector, bit: bool) -> Result<Codeword, OracleError> {
        self.report.oracle_queries += 1;
        self.instance.f(x, bit)
    }

    /// Classical query of a wrapped oracle.
    pub fn f_eval_via(&mut self, view: &WrappedOracle, x: &GroupVector, bit: bool) -> Result<Codeword, OracleError> {
        self.check_view(view)?;
        let y = view.map_input(x, bit)?;
        self.f_eval(&y, bit)
    }

    fn check_view(&self, view: &WrappedOracle) -> Result<(), OracleError> {
        if view.params != self.params() {
            return Err(OracleError::InvalidParameters("wrapped oracle belongs to another instance".into()));
        }
        Ok(())
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn create(&mut self, record: Record) -> u64 {
        let id = self.fresh_id();
        self.table.insert(id, record);
        self.report.tokens_created += 1;
        self.report.live_tokens += 1;
        self.report.peak_live_tokens = self.report.peak_live_tokens.max(self.report.live_tokens);
        id
    }

    fn check_live(&self, device: u64, id: u64) -> Result<(), OracleError> {
        if device != self.device || id >= self.next_id {
            return Err(OracleError::UnknownToken(id));
        }
        if !self.table.contains_key(&id) {
            return Err(OracleError::TokenConsumed(id));
        }
        Ok(())
    }

    fn consume(&mut self, id: u64) -> Record {
        let record = self.table.remove(&id).expect("checked live");
        self.report.tokens_consumed += 1;
        self.report.live_tokens -= 1;
        record
    }

    fn note_level(&mut self, level: usize, count: u64) {
        if self.report.per_level_consumed.len() <= level {
            self.report.per_level_consumed.resize(level + 1, 0);
        }
        self.report.per_level_consumed[level] += count;
    }

    fn level_of(&self, token: &PhaseToken) -> Result<usize, OracleError> {
        let bits = self.phase_of(token.id)?.phase.bits();
        Ok(bits.saturating_sub(token.label.modulus_log()) as usize)
    }

    fn phase_of(&self, id: u64) -> Result<&PhaseRecord, OracleError> {
        match self.table.get(&id) {
            Some(Record::Phase(p)) => Ok(p),
            Some(Record::Coset { .. }) => Err(OracleError::UnknownToken(id)),
            None => Err(OracleError::TokenConsumed(id)),
        }
    }

    /// Prepares `|phi_u>` from the root oracle.
    pub fn sample_phase_state(&mut self) -> Result<PhaseToken, OracleError> {
        let root = self.root();
        self.sample_phase_state_via(&root)
    }

    /// Uniform superposition, one query of `f'`, measurement of the output
    /// register, QFT over `Z_{2^{t'}}^n` and measurement of `u`.
    ///
    /// The output-register measurement collapses onto a uniform `x`; the
    /// surviving qubit carries `<u, s'>` for the wrapped shift `s'`, and `u` is
    /// uniform regardless of `x`, so neither `x` nor the codeword is drawn.
    pub fn sample_phase_state_via(&mut self, view: &WrappedOracle) -> Result<PhaseToken, OracleError> {
        self.check_view(view)?;
        let bits = view.group_bits();
        if bits == 0 {
            return Err(OracleError::InvalidParameters("wrapped group is trivial".into()));
        }
        let n = self.params().n;
        self.report.oracle_queries += 1;
        self.report.qft_units += (n as u64 * bits as u64).pow(2);

        let label = GroupVector::random(n, bits, &mut self.rng)?;
        let diff = self.instance.secret().sub(view.offset())?;
        let low = (1u64 << view.depth()) - 1;
        let (phase, shift) = if diff.coords().iter().all(|&c| c & low == 0) {
            let shift = GroupVector::from_reduced(diff.coords().iter().map(|&c| c >> view.depth()), bits)?;
            let theta = label.inner_product(&shift)?;
            (Phase::Coherent { theta, bits }, Some(shift))
        } else {
            // no collisions between f'(., 0) and f'(., 1): the qubit ends in a
            // computational basis state chosen by the output measurement
            (Phase::Mixed { bits }, None)
        };
        let id = self.create(Record::Phase(PhaseRecord { phase, shift }));
        Ok(PhaseToken {
            device: self.device,
            id,
            label,
        })
    }

    /// CNOT from `a` onto `b` followed by a computational-basis measurement of
    /// `b`. Yields `|phi_{u+u'}>` or `|phi_{u-u'}>` with probability 1/2 each;
    /// the measured bit tells the solver which.
    pub fn combine(&mut self, a: PhaseToken, b: PhaseToken) -> Result<(Sign, PhaseToken), OracleError> {
        self.check_live(a.device, a.id)?;
        self.check_live(b.device, b.id)?;
        if a.id == b.id {
            return Err(OracleError::TokenConsumed(b.id));
        }
        let (pa, pb) = (self.phase_of(a.id)?, self.phase_of(b.id)?);
        if pa.phase.bits() != pb.phase.bits() {
            return Err(OracleError::PhaseModulusMismatch {
                left: pa.phase.bits(),
                right: pb.phase.bits(),
            });
        }
        if a.label.dim() != b.label.dim() {
            return Err(GroupError::DimensionMismatch {
                left: a.label.dim(),
                right: b.label.dim(),
            }
            .into());
        }
        if a.label.modulus_log() != b.label.modulus_log() {
            return Err(GroupError::ModulusMismatch {
                left: a.label.modulus_log(),
                right: b.label.modulus_log(),
            }
            .into());
        }

        let level = self.level_of(&a)?;
        let Record::Phase(ra) = self.consume(a.id) else { unreachable!() };
        let Record::Phase(rb) = self.consume(b.id) else { unreachable!() };
        self.note_level(level, 2);

        let sign = if self.rng.random::<bool>() { Sign::Plus } else { Sign::Minus };
        let label = a.label.add_signed(&b.label, sign)?;
        let phase = match (ra.phase, rb.phase) {
            (Phase::Coherent { theta: ta, bits }, Phase::Coherent { theta: tb, .. }) => {
                let m = (1u64 << bits) - 1;
                let theta = match sign {
                    Sign::Plus => ta.wrapping_add(tb) & m,
                    Sign::Minus => ta.wrapping_sub(tb) & m,
                };
                Phase::Coherent { theta, bits }
            }
            (p, _) => Phase::Mixed { bits: p.bits() },
        };
        let shift = match (ra.shift, rb.shift) {
            (Some(x), Some(y)) if x == y => Some(x),
            _ => None,
        };
        let id = self.create(Record::Phase(PhaseRecord { phase, shift }));
        Ok((
            sign,
            PhaseToken {
                device: self.device,
                id,
                label,
            },
        ))
    }

    /// Measurement in the `|+>, |->` basis; `true` is the `|->` outcome,
    /// drawn with probability `sin^2(pi theta / 2^P)`.
    pub fn measure_pm(&mut self, token: PhaseToken) -> Result<bool, OracleError> {
        self.check_live(token.device, token.id)?;
        let level = self.level_of(&token)?;
        let Record::Phase(record) = self.consume(token.id) else { unreachable!() };
        self.note_level(level, 1);
        self.report.measurements += 1;
        let outcome = match record.phase {
            Phase::Coherent { theta: 0, .. } => false,
            Phase::Coherent { theta, bits } if theta == 1u64 << (bits - 1) => true,
            Phase::Coherent { theta, bits } => {
                let angle = PI * theta as f64 / (1u64 << bits) as f64;
                self.rng.random::<f64>() < angle.sin().powi(2)
            }
            Phase::Mixed { .. } => self.rng.random(),
        };
        Ok(outcome)
    }

    /// Drops a qubit without measuring it.
    pub fn discard(&mut self, token: PhaseToken) -> Result<(), OracleError> {
        self.check_live(token.device, token.id)?;
        let level = self.level_of(&token)?;
        self.consume(token.id);
        self.note_level(level, 1);
        Ok(())
    }

    /// One element of the coset-state stream, with uniformly random hidden `x`.
    pub fn sample_coset_state(&mut self) -> Result<CosetToken, OracleError> {
        let p = self.params();
        self.report.oracle_queries += 1;
        let x = GroupVector::random(p.n, p.t, &mut self.rng)?;
        let id = self.create(Record::Coset { x });
        Ok(CosetToken { device: self.device, id })
    }

    /// Applies `|x>|i> -> |x - i s_i>|i>`, then the QFT over `Z_{2^t}^n`, and
    /// measures `u`. The remaining qubit carries `<u, s - s_i>` modulo `2^t`.
    pub fn shift_and_transform(&mut self, token: CosetToken, s_i: &GroupVector) -> Result<PhaseToken, OracleError> {
        self.check_live(token.device, token.id)?;
        let p = self.params();
        if !matches!(self.table.get(&token.id), Some(Record::Coset { .. })) {
            return Err(OracleError::UnknownToken(token.id));
        }
        let shift = self.instance.secret().sub(s_i)?;
        self.consume(token.id);
        self.report.qft_units += (p.n as u64 * p.t as u64).pow(2);
        let label = GroupVector::random(p.n, p.t, &mut self.rng)?;
        let theta = label.inner_product(&shift)?;
        let id = self.create(Record::Phase(PhaseRecord {
            phase: Phase::Coherent { theta, bits: p.t },
            shift: Some(shift),
        }));
        Ok(PhaseToken {
            device: self.device,
            id,
            label,
        })
    }

    pub fn is_live(&self, token: &PhaseToken) -> bool {
        self.check_live(token.device, token.id).is_ok()
    }
}

/// Privileged view of hidden device state for tests.
#[cfg(any(test, feature = "inspect"))]
pub struct Inspector<'a> {
    oracle: &'a Oracle,
}

#[cfg(any(test, feature = "inspect"))]
impl<'a> Inspector<'a> {
    pub fn new(oracle: &'a Oracle) -> Self {
        Self { oracle }
    }

    pub fn secret(&self) -> &GroupVector {
        self.oracle.instance.secret()
    }

    /// `None` for consumed, unknown or mixed tokens.
    pub fn theta(&self, token: &PhaseToken) -> Option<u64> {
        match self.oracle.phase_of(token.id).ok()?.phase {
            Phase::Coherent { theta, .. } => Some(theta),
            Phase::Mixed { .. } => None,
        }
    }

    pub fn phase_bits(&self, token: &PhaseToken) -> Option<u32> {
        self.oracle.phase_of(token.id).ok().map(|p| p.phase.bits())
    }

    pub fn coset_x(&self, token: &CosetToken) -> Option<GroupVector> {
        match self.oracle.table.get(&token.id)? {
            Record::Coset { x } => Some(x.clone()),
            Record::Phase(_) => None,
        }
    }

    /// Checks `theta = <2^j label, shift> mod 2^P` for the effective shift the
    /// token was prepared against, `j` the label's sieve level.
    pub fn phase_consistent(&self, token: &PhaseToken) -> bool {
        let Ok(record) = self.oracle.phase_of(token.id) else {
            return false;
        };
        let (Phase::Coherent { theta, bits }, Some(shift)) = (&record.phase, &record.shift) else {
            return false;
        };
        let Some(level) = bits.checked_sub(token.label.modulus_log()) else {
            return false;
        };
        token
            .label
            .lift(level)
            .and_then(|lifted| lifted.inner_product(shift))
            .map(|ip| ip == *theta)
            .unwrap_or(false)
    }

    /// A second handle to the same qubit, for exercising the no-cloning checks.
    pub fn duplicate_handle(&self, token: &PhaseToken) -> PhaseToken {
        PhaseToken {
            device: token.device,
            id: token.id,
            label: token.label.clone(),
        }
    }

    pub fn duplicate_coset_handle(&self, token: &CosetToken) -> CosetToken {
        CosetToken {
            device: token.device,
            id: token.id,
        }
    }

    pub fn live_ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self.oracle.table.keys().copied().collect();
        ids.sort_unstable();
        ids
    }
}
