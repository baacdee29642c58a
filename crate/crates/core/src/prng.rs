//! Seeded, domain-separated randomness.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type Prng = ChaCha20Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Seed(pub [u8; 32]);

impl Seed {
    pub fn from_u64(x: u64) -> Self {
        Self::from_bytes(&x.to_le_bytes())
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        Seed(Sha256::digest(bytes).into())
    }

    /// Child seed for an independent stream named `label`.
    pub fn derive(&self, label: &str) -> Seed {
        let mut h = Sha256::new();
        h.update(self.0);
        h.update(label.as_bytes());
        Seed(h.finalize().into())
    }

    pub fn derive_index(&self, label: &str, i: u64) -> Seed {
        let mut h = Sha256::new();
        h.update(self.0);
        h.update(label.as_bytes());
        h.update(i.to_le_bytes());
        Seed(h.finalize().into())
    }

    pub fn rng(&self) -> Prng {
        ChaCha20Rng::from_seed(self.0)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let v = hex::decode(s).ok()?;
        Some(Seed(v.try_into().ok()?))
    }
}
