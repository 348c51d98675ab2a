//! On-disk formats for keys, tokens, signatures and ciphertexts.
//!
//! Key material is written at full float precision; only reports are
//! rounded. Every file is one JSON document.

use std::fs;
use std::path::Path;

use anyhow::Context;
use cosetlab_core::gf2::BitVector;
use cosetlab_core::qsim::{StateVector, C64};
use cosetlab_core::toksig::{Token, TsPublicKey, TsPublicKeyDescriptor};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// A quantum register as a list of `[re, im]` amplitudes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub n: usize,
    pub amplitudes: Vec<[f64; 2]>,
    #[serde(default)]
    pub consumed: bool,
}

impl StateFile {
    pub fn from_state(st: &StateVector, consumed: bool) -> Self {
        StateFile { n: st.n(), amplitudes: st.amplitudes().iter().map(|z| [z.re, z.im]).collect(), consumed }
    }

    pub fn to_state(&self) -> cosetlab_core::Result<StateVector> {
        StateVector::from_amplitudes(self.n, self.amplitudes.iter().map(|[re, im]| C64::new(*re, *im)).collect())
    }

    pub fn from_token(t: &Token) -> Self {
        Self::from_state(t.state(), t.is_consumed())
    }
}

/// Public key of the encryption scheme: one descriptor per register.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdePublicKeyFile {
    pub n: usize,
    pub registers: Vec<TsPublicKeyDescriptor>,
}

impl SdePublicKeyFile {
    pub fn to_key(&self) -> cosetlab_core::Result<cosetlab_core::sde::SdePublicKey> {
        let registers = self
            .registers
            .iter()
            .cloned()
            .map(TsPublicKey::from_descriptor)
            .collect::<cosetlab_core::Result<Vec<_>>>()?;
        Ok(cosetlab_core::sde::SdePublicKey { n: self.n, registers })
    }
}

/// Key registers of the encryption scheme or the copy-protected PRF.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegistersFile {
    pub registers: Vec<StateFile>,
}

impl RegistersFile {
    pub fn from_states(states: &[StateVector]) -> Self {
        RegistersFile { registers: states.iter().map(|s| StateFile::from_state(s, false)).collect() }
    }

    pub fn to_states(&self) -> cosetlab_core::Result<Vec<StateVector>> {
        self.registers.iter().map(StateFile::to_state).collect()
    }
}

/// Ciphertext recipe. The program is rebuilt from the public key, so the
/// message is stored in the clear; the file is for challenger use only.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CiphertextFile {
    pub n: usize,
    pub kappa: usize,
    pub r: Vec<bool>,
    pub m: BitVector,
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}
