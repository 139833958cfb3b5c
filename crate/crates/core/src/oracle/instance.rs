use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::encoding::{Codeword, Encoding};
use crate::error::OracleError;
use crate::group::GroupVector;

/// Problem parameters visible to everyone: `Z_{2^t}^n` with `l`-bit outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Params {
    pub n: usize,
    pub t: u32,
    pub l: u32,
}

impl Params {
    pub fn new(n: usize, t: u32, l: u32) -> Result<Self, OracleError> {
        if n == 0 || t == 0 {
            return Err(OracleError::InvalidParameters(format!("need n >= 1 and t >= 1, got n={n}, t={t}")));
        }
        let bits = n as u64 * t as u64;
        if bits > 64 {
            return Err(OracleError::InvalidParameters(format!("n*t = {bits} exceeds 64")));
        }
        if (l as u64) < bits {
            return Err(OracleError::EncodingTooShort { l, bits: bits as u32 });
        }
        Ok(Self { n, t, l })
    }

    /// `n * t`, the number of bits in a group element.
    pub fn domain_bits(&self) -> u32 {
        self.n as u32 * self.t
    }

    /// `n * t + t`, the live phase-state budget of the pipeline.
    pub fn state_bound(&self) -> u64 {
        (self.n as u64 + 1) * self.t as u64
    }
}

/// A hidden shift instance: injective `f_0(x) = enc(x)` and
/// `f_1(x) = enc(x - s)`, so that `f_0(x) = f_1(x + s)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HiddenShiftInstance {
    params: Params,
    seed: u64,
    secret: GroupVector,
    encoding: Encoding,
}

impl HiddenShiftInstance {
    /// Draws the secret uniformly and keys the encoding, both from `seed`.
    pub fn new(n: usize, t: u32, l: u32, seed: u64) -> Result<Self, OracleError> {
        let params = Params::new(n, t, l)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let secret = GroupVector::random(n, t, &mut rng)?;
        let key = rng.random();
        Ok(Self {
            params,
            seed,
            secret,
            encoding: Encoding::new(key, params.domain_bits(), l),
        })
    }

    /// Same encoding as [`HiddenShiftInstance::new`] but with a chosen secret.
    pub fn with_secret(l: u32, seed: u64, secret: GroupVector) -> Result<Self, OracleError> {
        let mut inst = Self::new(secret.dim(), secret.modulus_log(), l, seed)?;
        inst.secret = secret;
        Ok(inst)
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The hidden shift. Never reachable from an [`super::Oracle`].
    pub fn secret(&self) -> &GroupVector {
        &self.secret
    }

    pub(crate) fn encode(&self, x: &GroupVector) -> Codeword {
        self.encoding.encode(x.to_index())
    }

    /// `f(x, i)`: `enc(x)` for `i = 0`, `enc(x - s)` for `i = 1`.
    pub(crate) fn f(&self, x: &GroupVector, bit: bool) -> Result<Codeword, OracleError> {
        if bit {
            Ok(self.encode(&x.sub(&self.secret)?))
        } else {
            if x.dim() != self.params.n || x.modulus_log() != self.params.t {
                // surface the mismatch the same way the shifted branch would
                x.sub(&self.secret)?;
            }
            Ok(self.encode(x))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction() {
        let inst = HiddenShiftInstance::new(2, 1, 2, 7).unwrap();
        assert_eq!(inst.secret().dim(), 2);
        assert_eq!(inst.secret().modulus_log(), 1);
        assert_eq!(inst, HiddenShiftInstance::new(2, 1, 2, 7).unwrap());
        assert_eq!(
            HiddenShiftInstance::new(3, 2, 5, 0),
            Err(OracleError::EncodingTooShort { l: 5, bits: 6 })
        );
        assert!(HiddenShiftInstance::new(0, 2, 5, 0).is_err());
        assert!(HiddenShiftInstance::new(9, 8, 80, 0).is_err());
        assert_eq!(Params::new(2, 2, 4).unwrap().state_bound(), 6);
    }

    #[test]
    fn shift_identity_and_injectivity() {
        let inst = HiddenShiftInstance::new(2, 3, 10, 11).unwrap();
        let s = inst.secret().clone();
        let mut seen = std::collections::HashSet::new();
        for i in 0..64 {
            let x = GroupVector::from_index(i, 2, 3).unwrap();
            let y = x.add(&s).unwrap();
            assert_eq!(inst.f(&x, false).unwrap(), inst.f(&y, true).unwrap());
            assert!(seen.insert(inst.f(&x, false).unwrap()));
        }
    }

    #[test]
    fn zero_shift_makes_both_functions_equal() {
        let inst = HiddenShiftInstance::with_secret(6, 3, GroupVector::zero(3, 2).unwrap()).unwrap();
        for i in 0..64 {
            let x = GroupVector::from_index(i, 3, 2).unwrap();
            assert_eq!(inst.f(&x, false).unwrap(), inst.f(&x, true).unwrap());
        }
    }
}
