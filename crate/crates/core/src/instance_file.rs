//! Instance files.
//!
//! A pretty-printed JSON object:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "n": 2,
//!   "t": 2,
//!   "l": 4,
//!   "seed": 1,
//!   "s": [3, 1]
//! }
//! ```
//!
//! `s` is optional. The secret and the encoding are always regenerated from
//! `seed`; when `s` is present it is checked against the regenerated secret.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::InstanceFileError;
use crate::oracle::HiddenShiftInstance;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub n: usize,
    pub t: u32,
    pub l: u32,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<u64>>,
}

impl InstanceFile {
    pub fn from_instance(instance: &HiddenShiftInstance, with_secret: bool) -> Self {
        let p = instance.params();
        Self {
            schema_version: SCHEMA_VERSION,
            n: p.n,
            t: p.t,
            l: p.l,
            seed: instance.seed(),
            s: with_secret.then(|| instance.secret().coords().to_vec()),
        }
    }

    pub fn has_secret(&self) -> bool {
        self.s.is_some()
    }

    pub fn to_text(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("plain data serializes");
        text.push('\n');
        text
    }

    pub fn parse(text: &str) -> Result<Self, InstanceFileError> {
        let file: Self = serde_json::from_str(text)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(InstanceFileError::SchemaVersion(file.schema_version));
        }
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self, InstanceFileError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), InstanceFileError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Rebuilds the instance, checking a stored secret if there is one.
    pub fn instantiate(&self) -> Result<HiddenShiftInstance, InstanceFileError> {
        let instance = HiddenShiftInstance::new(self.n, self.t, self.l, self.seed)?;
        if let Some(s) = &self.s {
            if s.as_slice() != instance.secret().coords() {
                return Err(InstanceFileError::SecretMismatch);
            }
        }
        Ok(instance)
    }
}
