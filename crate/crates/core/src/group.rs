//! Exact arithmetic in `Z_{2^t}^n`.
//!
//! Coordinates are stored as `u64` words and reduced with an explicit mask, so
//! every operation is exact for `t <= 63` (wrapping arithmetic modulo `2^64`
//! agrees with arithmetic modulo any smaller power of two).

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::GroupError;

/// Largest supported modulus exponent.
pub const MAX_MODULUS_LOG: u32 = 63;

/// Sign of a term in a signed combination of labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// An element of `Z_{2^t}^n`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupVector {
    coords: Vec<u64>,
    modulus_log: u32,
}

#[inline]
fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

fn check_bits(bits: u32) -> Result<(), GroupError> {
    if bits == 0 || bits > MAX_MODULUS_LOG {
        return Err(GroupError::UnsupportedModulus(bits));
    }
    Ok(())
}

impl GroupVector {
    /// Builds a vector, rejecting coordinates that are not reduced.
    pub fn new(coords: Vec<u64>, modulus_log: u32) -> Result<Self, GroupError> {
        check_bits(modulus_log)?;
        let m = mask(modulus_log);
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, &c)| c & !m != 0) {
            return Err(GroupError::CoordinateOutOfRange {
                index,
                value,
                modulus_log,
            });
        }
        Ok(Self {
            coords,
            modulus_log,
        })
    }

    /// Builds a vector, reducing every coordinate modulo `2^modulus_log`.
    pub fn from_reduced(coords: impl IntoIterator<Item = u64>, modulus_log: u32) -> Result<Self, GroupError> {
        check_bits(modulus_log)?;
        let m = mask(modulus_log);
        Ok(Self {
            coords: coords.into_iter().map(|c| c & m).collect(),
            modulus_log,
        })
    }

    pub fn zero(dim: usize, modulus_log: u32) -> Result<Self, GroupError> {
        Self::new(vec![0; dim], modulus_log)
    }

    /// Uniform element of `Z_{2^modulus_log}^dim`.
    pub fn random<R: Rng + ?Sized>(dim: usize, modulus_log: u32, rng: &mut R) -> Result<Self, GroupError> {
        check_bits(modulus_log)?;
        let m = mask(modulus_log);
        Ok(Self {
            coords: (0..dim).map(|_| rng.random::<u64>() & m).collect(),
            modulus_log,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn modulus_log(&self) -> u32 {
        self.modulus_log
    }

    pub fn modulus(&self) -> u64 {
        1u64 << self.modulus_log
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    fn check_compatible(&self, other: &Self) -> Result<(), GroupError> {
        if self.dim() != other.dim() {
            return Err(GroupError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        if self.modulus_log != other.modulus_log {
            return Err(GroupError::ModulusMismatch {
                left: self.modulus_log,
                right: other.modulus_log,
            });
        }
        Ok(())
    }

    /// Coordinatewise `self + sign * other` modulo `2^t`.
    pub fn add_signed(&self, other: &Self, sign: Sign) -> Result<Self, GroupError> {
        self.check_compatible(other)?;
        let m = mask(self.modulus_log);
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(&a, &b)| match sign {
                Sign::Plus => a.wrapping_add(b) & m,
                Sign::Minus => a.wrapping_sub(b) & m,
            })
            .collect();
        Ok(Self {
            coords,
            modulus_log: self.modulus_log,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, GroupError> {
        self.add_signed(other, Sign::Plus)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GroupError> {
        self.add_signed(other, Sign::Minus)
    }

    /// `sum_i u_i * s_i mod 2^t`.
    pub fn inner_product(&self, other: &Self) -> Result<u64, GroupError> {
        self.check_compatible(other)?;
        let sum = self
            .coords
            .iter()
            .zip(&other.coords)
            .fold(0u64, |acc, (&a, &b)| acc.wrapping_add(a.wrapping_mul(b)));
        Ok(sum & mask(self.modulus_log))
    }

    /// Coordinatewise parity.
    pub fn reduce_mod2(&self) -> Vec<bool> {
        self.coords.iter().map(|&c| c & 1 == 1).collect()
    }

    /// Divides every (even) coordinate by two, landing in `Z_{2^{t-1}}^n`.
    pub fn halve(&self) -> Result<Self, GroupError> {
        if self.modulus_log < 2 {
            return Err(GroupError::UnsupportedModulus(self.modulus_log - 1));
        }
        if let Some(index) = self.coords.iter().position(|&c| c & 1 == 1) {
            return Err(GroupError::OddCoordinate { index });
        }
        Ok(Self {
            coords: self.coords.iter().map(|&c| c >> 1).collect(),
            modulus_log: self.modulus_log - 1,
        })
    }

    /// Multiplies by `2^shift`, embedding into `Z_{2^{t+shift}}^n`.
    pub fn lift(&self, shift: u32) -> Result<Self, GroupError> {
        let bits = self.modulus_log + shift;
        check_bits(bits)?;
        Ok(Self {
            coords: self.coords.iter().map(|&c| c << shift).collect(),
            modulus_log: bits,
        })
    }

    /// Reduces modulo `2^bits` for `bits <= t`.
    pub fn truncate(&self, bits: u32) -> Result<Self, GroupError> {
        if bits > self.modulus_log {
            return Err(GroupError::ModulusMismatch {
                left: self.modulus_log,
                right: bits,
            });
        }
        Self::from_reduced(self.coords.iter().copied(), bits)
    }

    /// Reinterprets the coordinates in a wider modulus without changing their values.
    pub fn widen(&self, bits: u32) -> Result<Self, GroupError> {
        if bits < self.modulus_log {
            return Err(GroupError::ModulusMismatch {
                left: self.modulus_log,
                right: bits,
            });
        }
        Self::new(self.coords.clone(), bits)
    }

    /// Packs the coordinates into a single integer, `t` bits per coordinate.
    /// Requires `n * t <= 64`.
    pub fn to_index(&self) -> u64 {
        debug_assert!(self.dim() as u32 * self.modulus_log <= 64);
        self.coords
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &c)| acc | (c << (i as u32 * self.modulus_log)))
    }

    pub fn from_index(index: u64, dim: usize, modulus_log: u32) -> Result<Self, GroupError> {
        check_bits(modulus_log)?;
        let m = mask(modulus_log);
        Ok(Self {
            coords: (0..dim)
                .map(|i| {
                    let shift = i as u32 * modulus_log;
                    if shift >= 64 {
                        0
                    } else {
                        (index >> shift) & m
                    }
                })
                .collect(),
            modulus_log,
        })
    }
}

impl fmt::Debug for GroupVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} mod 2^{}", self.coords, self.modulus_log)
    }
}

impl fmt::Display for GroupVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
