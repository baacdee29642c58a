//! JSON files for keys and ciphertexts.
//!
//! Every file starts with a `params` header. Fresh GLWE masks are stored as `"seed:<hex>"`
//! and regenerated on load; other masks and all bodies are decimal coefficient strings.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::decomposition::GadgetSpec;
use crate::error::{FheError, Result};
use crate::glwe::{GlevCiphertext, GlweCiphertext, GlweParams, PublicKey};
use crate::poly::{RingParams, RingPoly};
use crate::prng::Seed;
use crate::tfhe::LweCiphertext;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsHeader {
    pub scheme: String,
    pub preset: String,
    pub k: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<String>,
    pub sign: String,
}

impl ParamsHeader {
    /// Fails unless scheme and preset agree.
    pub fn expect(&self, other: &ParamsHeader) -> Result<()> {
        if self != other {
            return Err(FheError::Format(format!(
                "file is for {}/{}, expected {}/{}",
                self.scheme, self.preset, other.scheme, other.preset
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaskField {
    Seed(String),
    Polys(Vec<Vec<String>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlweFile {
    pub params: ParamsHeader,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    pub mask: MaskField,
    pub body: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LweFile {
    pub params: ParamsHeader,
    pub a: Vec<u64>,
    pub b: u64,
}

/// A secret key plus the seed its evaluation keys are derived from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyFile {
    pub params: ParamsHeader,
    pub seed: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub secret: Vec<Vec<i64>>,
}

/// Masks and body of one RLWE/GLWE ciphertext, always written in full.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CtData {
    pub masks: Vec<Vec<String>>,
    pub body: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PublicKeyFile {
    pub params: ParamsHeader,
    pub key: CtData,
}

/// Relinearization and Galois keys, each a list of gadget levels.
///
/// `big` holds CKKS keys at `g·q_L`: `"relin"` and one entry per Galois exponent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalKeyFile {
    pub params: Option<ParamsHeader>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relin: Vec<CtData>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub galois: BTreeMap<u64, Vec<CtData>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub big: BTreeMap<String, CtData>,
    /// Key seed when the evaluation key is rebuilt rather than stored (TFHE).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<String>,
}

pub fn ct_data(ct: &GlweCiphertext) -> CtData {
    CtData { masks: ct.masks.iter().map(poly_strings).collect(), body: poly_strings(&ct.body) }
}

pub fn ct_from_data(d: &CtData, ring: &Arc<RingParams>) -> Result<GlweCiphertext> {
    let masks = d.masks.iter().map(|p| poly_from_strings(ring, p)).collect::<Result<_>>()?;
    Ok(GlweCiphertext { masks, body: poly_from_strings(ring, &d.body)?, mask_seed: None })
}

pub fn glev_data(g: &GlevCiphertext) -> Vec<CtData> {
    g.levels.iter().map(ct_data).collect()
}

pub fn glev_from_data(d: &[CtData], ring: &Arc<RingParams>, gadget: &GadgetSpec) -> Result<GlevCiphertext> {
    if d.len() != gadget.gadget.len() {
        return Err(FheError::Format(format!("{} gadget levels, expected {}", d.len(), gadget.gadget.len())));
    }
    let levels = d.iter().map(|c| ct_from_data(c, ring)).collect::<Result<_>>()?;
    Ok(GlevCiphertext { levels, gadget: gadget.clone() })
}

pub fn public_key_data(pk: &PublicKey) -> CtData {
    CtData { masks: pk.pk2.iter().map(poly_strings).collect(), body: poly_strings(&pk.pk1) }
}

pub fn public_key_from_data(d: &CtData, ring: &Arc<RingParams>) -> Result<PublicKey> {
    let ct = ct_from_data(d, ring)?;
    Ok(PublicKey { pk1: ct.body, pk2: ct.masks })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CiphertextFile {
    Glwe(GlweFile),
    Lwe(LweFile),
}

impl CiphertextFile {
    pub fn params(&self) -> &ParamsHeader {
        match self {
            CiphertextFile::Glwe(g) => &g.params,
            CiphertextFile::Lwe(l) => &l.params,
        }
    }
}

fn poly_strings(p: &RingPoly) -> Vec<String> {
    p.coeffs().iter().map(|c| c.to_string()).collect()
}

fn poly_from_strings(ring: &Arc<RingParams>, c: &[String]) -> Result<RingPoly> {
    if c.len() != ring.n {
        return Err(FheError::Format(format!("{} coefficients, ring degree {}", c.len(), ring.n)));
    }
    let v = c
        .iter()
        .map(|s| s.parse::<BigUint>().map_err(|e| FheError::Format(format!("coefficient {s:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if v.iter().any(|x| x >= &ring.q) {
        return Err(FheError::Format("coefficient not below the modulus".into()));
    }
    Ok(RingPoly::from_bigints(ring, &v.into_iter().map(BigInt::from).collect::<Vec<_>>()))
}

pub fn glwe_to_file(ct: &GlweCiphertext, params: ParamsHeader, level: Option<usize>, scale: Option<f64>) -> GlweFile {
    let mask = match &ct.mask_seed {
        Some(s) => MaskField::Seed(format!("seed:{}", s.to_hex())),
        None => MaskField::Polys(ct.masks.iter().map(poly_strings).collect()),
    };
    GlweFile { params, level, scale, mask, body: poly_strings(&ct.body) }
}

/// Rebuild a ciphertext over `glwe.ring`; seeded masks are re-expanded.
pub fn glwe_from_file(file: &GlweFile, glwe: &GlweParams) -> Result<GlweCiphertext> {
    let body = poly_from_strings(&glwe.ring, &file.body)?;
    match &file.mask {
        MaskField::Seed(s) => {
            let hex = s.strip_prefix("seed:").ok_or_else(|| FheError::Format(format!("mask {s:?}")))?;
            let seed = Seed::from_hex(hex).ok_or_else(|| FheError::Format(format!("seed {hex:?}")))?;
            Ok(GlweCiphertext::from_seed(glwe, seed, body))
        }
        MaskField::Polys(ps) => {
            if ps.len() != glwe.k {
                return Err(FheError::Format(format!("{} masks, expected {}", ps.len(), glwe.k)));
            }
            let masks = ps.iter().map(|p| poly_from_strings(&glwe.ring, p)).collect::<Result<_>>()?;
            Ok(GlweCiphertext { masks, body, mask_seed: None })
        }
    }
}

pub fn lwe_to_file(ct: &LweCiphertext, params: ParamsHeader) -> LweFile {
    LweFile { params, a: ct.a.clone(), b: ct.b }
}

pub fn lwe_from_file(file: &LweFile, log_q: u32, k: usize) -> Result<LweCiphertext> {
    let q = 1u64 << log_q;
    if file.a.len() != k || file.a.iter().chain([&file.b]).any(|&x| x >= q) {
        return Err(FheError::Format(format!("LWE ciphertext does not fit k = {k}, q = 2^{log_q}")));
    }
    Ok(LweCiphertext { a: file.a.clone(), b: file.b, log_q })
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| FheError::Format(e.to_string()))
}

pub fn from_json<T: DeserializeOwned>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| FheError::Format(e.to_string()))
}

pub fn seed_from_hex(s: &str) -> Result<Seed> {
    Seed::from_hex(s).ok_or_else(|| FheError::Format(format!("seed {s:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bfv::{BfvContext, BfvParams};
    use crate::glwe;

    fn header(ctx: &BfvContext) -> ParamsHeader {
        ParamsHeader {
            scheme: "bfv".into(),
            preset: "desk".into(),
            k: 1,
            n: ctx.n(),
            q: Some(ctx.params.q.to_string()),
            chain: None,
            t: Some(ctx.t()),
            delta: Some(ctx.delta().to_string()),
            sign: "minus".into(),
        }
    }

    #[test]
    fn glwe_roundtrip_seeded_and_full() {
        let ctx = BfvContext::new(BfvParams::desk()).unwrap();
        let keys = ctx.keygen(&Seed::from_u64(1)).unwrap();
        let v: Vec<u64> = (0..16).collect();
        let ct = ctx.encrypt(&v, &keys.secret, &Seed::from_u64(2)).unwrap();
        let file = glwe_to_file(&ct, header(&ctx), None, None);
        assert!(matches!(file.mask, MaskField::Seed(_)));
        let json = to_json(&CiphertextFile::Glwe(file)).unwrap();
        assert!(json.contains("\"mask\": \"seed:"));
        let back = match from_json::<CiphertextFile>(&json).unwrap() {
            CiphertextFile::Glwe(g) => glwe_from_file(&g, &ctx.glwe).unwrap(),
            _ => panic!("wrong variant"),
        };
        assert_eq!(back, ct);
        let sum = ctx.add(&ct, &ct).unwrap();
        let file = glwe_to_file(&sum, header(&ctx), None, None);
        assert!(matches!(file.mask, MaskField::Polys(_)));
        let back = glwe_from_file(&from_json(&to_json(&file).unwrap()).unwrap(), &ctx.glwe).unwrap();
        assert_eq!(ctx.decrypt(&back, &keys.secret).unwrap(), v.iter().map(|x| 2 * x % 97).collect::<Vec<_>>());
    }

    #[test]
    fn eval_keys_roundtrip() {
        let ctx = BfvContext::new(BfvParams::toy()).unwrap();
        let keys = ctx.keygen(&Seed::from_u64(5)).unwrap();
        let mut file = EvalKeyFile { params: Some(header(&ctx)), relin: glev_data(&keys.eval.relin), ..Default::default() };
        for (k, ksk) in &keys.eval.galois {
            file.galois.insert(*k, glev_data(&ksk.levs[0]));
        }
        let back: EvalKeyFile = from_json(&to_json(&file).unwrap()).unwrap();
        assert_eq!(back, file);
        let relin = glev_from_data(&back.relin, &ctx.big.ring, &ctx.relin_gadget).unwrap();
        assert_eq!(glev_data(&relin), glev_data(&keys.eval.relin));
        assert!(glev_from_data(&back.relin[1..], &ctx.big.ring, &ctx.relin_gadget).is_err());
        let pk = public_key_from_data(&public_key_data(&keys.public), &ctx.glwe.ring).unwrap();
        assert_eq!(pk, keys.public);
    }

    #[test]
    fn rejects_malformed() {
        let ctx = BfvContext::new(BfvParams::desk()).unwrap();
        let sk = glwe::GlweSecretKey::generate(&ctx.glwe, &Seed::from_u64(3));
        let ct = ctx.encrypt(&[1; 16], &sk, &Seed::from_u64(4)).unwrap();
        let mut file = glwe_to_file(&ct, header(&ctx), None, None);
        file.body.pop();
        assert!(matches!(glwe_from_file(&file, &ctx.glwe), Err(FheError::Format(_))));
        let mut file = glwe_to_file(&ct, header(&ctx), None, None);
        file.mask = MaskField::Seed("seed:zz".into());
        assert!(glwe_from_file(&file, &ctx.glwe).is_err());
        assert!(from_json::<KeyFile>("{not json").is_err());
        let mut other = header(&ctx);
        other.preset = "toy".into();
        assert!(header(&ctx).expect(&other).is_err());
        let lwe = LweFile { params: header(&ctx), a: vec![1, 2, 300], b: 4 };
        assert!(lwe_from_file(&lwe, 8, 3).is_err());
        assert_eq!(lwe_from_file(&LweFile { a: vec![1, 2, 3], ..lwe }, 8, 3).unwrap().b, 4);
    }
}
