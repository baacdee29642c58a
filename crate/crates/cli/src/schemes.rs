//! Per-scheme key files, plaintext parsing and ciphertext handling.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use clap::ValueEnum;
use deskfhe::bfv::{BfvContext, BfvEvalKeys, BfvParams};
use deskfhe::bgv::{BgvCiphertext, BgvContext, BgvEvalKeys, BgvParams};
use deskfhe::ckks::{max_abs_error, CkksCiphertext, CkksContext, CkksEvalKeys, CkksParams};
use deskfhe::glwe::{GlweCiphertext, GlweParams, GlweSecretKey, KeySwitchKey, PublicKey};
use deskfhe::prng::Seed;
use deskfhe::serial::{
    self, ct_data, ct_from_data, glev_data, glev_from_data, glwe_from_file, glwe_to_file, lwe_from_file, lwe_to_file,
    public_key_data, public_key_from_data, CiphertextFile, EvalKeyFile, GlweFile, KeyFile, ParamsHeader, PublicKeyFile,
};
use deskfhe::tfhe::{gate_eval, keygen, ClientKey, Gate, LweCiphertext, ServerKey, TfheParams};
use deskfhe::FheError;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::{read_file, CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Tfhe,
    Bfv,
    Ckks,
    Bgv,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Tfhe => "tfhe",
            Scheme::Bfv => "bfv",
            Scheme::Ckks => "ckks",
            Scheme::Bgv => "bgv",
        }
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Scheme as ValueEnum>::from_str(s, true)
    }
}

pub enum Kind {
    Tfhe(TfheParams),
    Bfv(Box<BfvContext>),
    Ckks(Box<CkksContext>),
    Bgv(Box<BgvContext>),
}

pub struct Context {
    pub preset: String,
    pub kind: Kind,
}

fn usage_if_unknown(e: FheError) -> CliError {
    match e {
        FheError::NotFound(m) => CliError::Usage(format!("unknown {m}")),
        other => other.into(),
    }
}

fn data<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

fn load<T: DeserializeOwned>(dir: &Path, name: &str) -> CliResult<T> {
    let path = dir.join(name);
    serial::from_json(&read_file(&path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Header of whichever key file is present in `dir`.
pub fn key_header(dir: &Path) -> CliResult<ParamsHeader> {
    for name in ["public.json", "eval.json", "secret.json"] {
        if dir.join(name).exists() {
            let v: Value = load(dir, name)?;
            return serde_json::from_value(v["params"].clone()).map_err(|e| CliError::Data(format!("{name}: {e}")));
        }
    }
    Err(CliError::Usage(format!("no key files in {}; pass --scheme and --preset or run keygen", dir.display())))
}

fn seed_hex(seed: u64) -> String {
    Seed::from_u64(seed).to_hex()
}

fn to_json<T: serde::Serialize>(v: &T) -> CliResult<String> {
    serial::to_json(v).map_err(data)
}

fn need(cts: &[String], k: usize, op: &str) -> CliResult<()> {
    if cts.len() != k {
        return Err(CliError::Usage(format!("{op} takes {k} ciphertext(s), got {}", cts.len())));
    }
    Ok(())
}

fn plain_u64(v: &Value, n: usize, t: u64) -> CliResult<Vec<u64>> {
    let arr = v.as_array().ok_or_else(|| CliError::Data("plaintext must be a JSON array".into()))?;
    if arr.is_empty() || arr.len() > n {
        return Err(CliError::Data(format!("plaintext needs 1 to {n} slots, got {}", arr.len())));
    }
    let mut out = arr
        .iter()
        .map(|x| x.as_u64().filter(|&x| x < t).ok_or_else(|| CliError::Data(format!("slot {x} is not in [0, {t})"))))
        .collect::<CliResult<Vec<_>>>()?;
    out.resize(n, 0);
    Ok(out)
}

fn plain_complex(v: &Value, slots: usize) -> CliResult<Vec<Complex64>> {
    let arr = v.as_array().ok_or_else(|| CliError::Data("plaintext must be a JSON array".into()))?;
    if arr.is_empty() || arr.len() > slots {
        return Err(CliError::Data(format!("plaintext needs 1 to {slots} slots, got {}", arr.len())));
    }
    let mut out = arr
        .iter()
        .map(|x| match x {
            Value::Array(p) if p.len() == 2 => match (p[0].as_f64(), p[1].as_f64()) {
                (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                _ => Err(CliError::Data(format!("slot {x} is not a [re, im] pair"))),
            },
            Value::Number(r) => Ok(Complex64::new(r.as_f64().unwrap_or(f64::NAN), 0.0)),
            _ => Err(CliError::Data(format!("slot {x} is not a [re, im] pair"))),
        })
        .collect::<CliResult<Vec<_>>>()?;
    out.resize(slots, Complex64::new(0.0, 0.0));
    Ok(out)
}

fn plain_bit(v: &Value) -> CliResult<bool> {
    let x = match v {
        Value::Array(a) if a.len() == 1 => &a[0],
        Value::Array(a) => return Err(CliError::Data(format!("tfhe encrypts one bit per file, got {}", a.len()))),
        other => other,
    };
    match x {
        Value::Bool(b) => Ok(*b),
        Value::Number(n) if n.as_u64() == Some(0) => Ok(false),
        Value::Number(n) if n.as_u64() == Some(1) => Ok(true),
        _ => Err(CliError::Data(format!("{x} is not a bit"))),
    }
}

fn pairs(z: &[Complex64]) -> Value {
    json!(z.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
}

enum Op {
    Add,
    Sub,
    Mul,
    Rotate(usize),
    Conj,
    Gate(Gate),
}

fn parse_op(op: &str) -> CliResult<Op> {
    let bad = || CliError::Usage(format!("unknown --op {op:?}; use add, sub, mul, rotate:H, conj or gate:NAME"));
    match op.split_once(':') {
        None => match op {
            "add" => Ok(Op::Add),
            "sub" => Ok(Op::Sub),
            "mul" => Ok(Op::Mul),
            "conj" | "swap" => Ok(Op::Conj),
            _ => Err(bad()),
        },
        Some(("rotate", h)) => h.parse().map(Op::Rotate).map_err(|_| bad()),
        Some(("gate", g)) => g.parse().map(Op::Gate).map_err(|e: FheError| CliError::Usage(e.to_string())),
        _ => Err(bad()),
    }
}

impl Context {
    pub fn new(scheme: Scheme, preset: &str) -> CliResult<Self> {
        let kind = match scheme {
            Scheme::Tfhe => Kind::Tfhe(TfheParams::by_name(preset).map_err(usage_if_unknown)?),
            Scheme::Bfv => Kind::Bfv(Box::new(BfvContext::new(BfvParams::by_name(preset).map_err(usage_if_unknown)?)?)),
            Scheme::Ckks => Kind::Ckks(Box::new(CkksContext::new(CkksParams::by_name(preset).map_err(usage_if_unknown)?)?)),
            Scheme::Bgv => Kind::Bgv(Box::new(BgvContext::new(BgvParams::by_name(preset).map_err(usage_if_unknown)?)?)),
        };
        Ok(Self { preset: preset.into(), kind })
    }

    pub fn header(&self) -> ParamsHeader {
        let preset = self.preset.clone();
        match &self.kind {
            Kind::Tfhe(p) => ParamsHeader {
                scheme: "tfhe".into(),
                preset,
                k: p.k,
                n: p.n,
                q: Some((1u128 << p.log_q).to_string()),
                chain: None,
                t: Some(p.t),
                delta: Some(p.delta().to_string()),
                sign: "plus".into(),
            },
            Kind::Bfv(c) => ParamsHeader {
                scheme: "bfv".into(),
                preset,
                k: 1,
                n: c.n(),
                q: Some(c.params.q.to_string()),
                chain: None,
                t: Some(c.t()),
                delta: Some(c.delta().to_string()),
                sign: "minus".into(),
            },
            Kind::Ckks(c) => ParamsHeader {
                scheme: "ckks".into(),
                preset,
                k: 1,
                n: c.n(),
                q: None,
                chain: Some(c.primes.clone()),
                t: None,
                delta: Some(c.scale().to_string()),
                sign: "minus".into(),
            },
            Kind::Bgv(c) => ParamsHeader {
                scheme: "bgv".into(),
                preset,
                k: 1,
                n: c.n(),
                q: None,
                chain: Some(c.primes.clone()),
                t: Some(c.t()),
                delta: Some("1".into()),
                sign: "minus".into(),
            },
        }
    }

    fn secret_ring(&self) -> Option<&GlweParams> {
        match &self.kind {
            Kind::Tfhe(_) => None,
            Kind::Bfv(c) => Some(&c.glwe),
            Kind::Ckks(c) => Some(&c.levels[c.top()]),
            Kind::Bgv(c) => Some(&c.levels[c.top()]),
        }
    }

    /// File name and contents, in writing order.
    pub fn keygen(&self, seed: u64) -> CliResult<Vec<(String, String)>> {
        let params = self.header();
        let s = Seed::from_u64(seed);
        let secret_file = |sk: &GlweSecretKey| KeyFile {
            params: params.clone(),
            seed: seed_hex(seed),
            secret: sk.polys.iter().map(|p| p.centered_i64()).collect(),
        };
        let public_file = |pk: &PublicKey| PublicKeyFile { params: params.clone(), key: public_key_data(pk) };
        let galois = |g: &BTreeMap<u64, KeySwitchKey>| g.iter().map(|(k, ksk)| (*k, glev_data(&ksk.levs[0]))).collect();
        let (secret, public, eval) = match &self.kind {
            Kind::Tfhe(p) => {
                let ck = ClientKey::generate(p, &s)?;
                let secret = KeyFile {
                    params: params.clone(),
                    seed: seed_hex(seed),
                    secret: vec![ck.lwe.bits.iter().map(|&b| b as i64).collect(), ck.glwe.clone()],
                };
                let eval = EvalKeyFile { params: Some(params.clone()), seed: Some(seed_hex(seed)), ..Default::default() };
                (secret, None, eval)
            }
            Kind::Bfv(c) => {
                let keys = c.keygen(&s)?;
                let eval = EvalKeyFile {
                    params: Some(params.clone()),
                    relin: glev_data(&keys.eval.relin),
                    galois: galois(&keys.eval.galois),
                    ..Default::default()
                };
                (secret_file(&keys.secret), Some(public_file(&keys.public)), eval)
            }
            Kind::Bgv(c) => {
                let keys = c.keygen(&s)?;
                let eval = EvalKeyFile {
                    params: Some(params.clone()),
                    relin: glev_data(&keys.eval.relin),
                    galois: galois(&keys.eval.galois),
                    ..Default::default()
                };
                (secret_file(&keys.secret), Some(public_file(&keys.public)), eval)
            }
            Kind::Ckks(c) => {
                let keys = c.keygen(&s)?;
                let mut big = BTreeMap::new();
                big.insert("relin".to_string(), ct_data(&keys.eval.evk));
                for (k, ct) in &keys.eval.galois {
                    big.insert(k.to_string(), ct_data(ct));
                }
                let eval = EvalKeyFile {
                    params: Some(params.clone()),
                    relin: glev_data(&keys.eval.relin),
                    big,
                    ..Default::default()
                };
                (secret_file(&keys.secret), Some(public_file(&keys.public)), eval)
            }
        };
        let mut out = vec![("secret.json".to_string(), to_json(&secret)?)];
        if let Some(p) = public {
            out.push(("public.json".into(), to_json(&p)?));
        }
        out.push(("eval.json".into(), to_json(&eval)?));
        Ok(out)
    }

    fn check(&self, params: &ParamsHeader) -> CliResult<()> {
        params.expect(&self.header()).map_err(data)
    }

    fn secret(&self, dir: &Path) -> CliResult<GlweSecretKey> {
        let f: KeyFile = load(dir, "secret.json")?;
        self.check(&f.params)?;
        let glwe = self.secret_ring().ok_or_else(|| CliError::Data("no RLWE secret for this scheme".into()))?;
        if f.secret.len() != glwe.k || f.secret.iter().any(|p| p.len() != glwe.ring.n) {
            return Err(CliError::Data("secret key has the wrong shape".into()));
        }
        Ok(GlweSecretKey::from_i64(&glwe.ring, &f.secret))
    }

    fn client_key(&self, dir: &Path, p: &TfheParams) -> CliResult<ClientKey> {
        let f: KeyFile = load(dir, "secret.json")?;
        self.check(&f.params)?;
        let ck = ClientKey::generate(p, &serial::seed_from_hex(&f.seed)?)?;
        let bits: Vec<i64> = ck.lwe.bits.iter().map(|&b| b as i64).collect();
        if f.secret.first() != Some(&bits) {
            return Err(CliError::Data("secret key does not match its seed".into()));
        }
        Ok(ck)
    }

    fn server_key(&self, dir: &Path, p: &TfheParams) -> CliResult<ServerKey> {
        let f: EvalKeyFile = load(dir, "eval.json")?;
        self.check(f.params.as_ref().ok_or_else(|| CliError::Data("eval.json has no params".into()))?)?;
        let seed = f.seed.ok_or_else(|| CliError::Data("eval.json has no key seed".into()))?;
        Ok(keygen(p, &serial::seed_from_hex(&seed)?)?.1)
    }

    fn public(&self, dir: &Path) -> CliResult<PublicKey> {
        let f: PublicKeyFile = load(dir, "public.json")?;
        self.check(&f.params)?;
        let glwe = self.secret_ring().ok_or_else(|| CliError::Data("no public key for this scheme".into()))?;
        Ok(public_key_from_data(&f.key, &glwe.ring)?)
    }

    fn eval_file(&self, dir: &Path) -> CliResult<EvalKeyFile> {
        let f: EvalKeyFile = load(dir, "eval.json")?;
        self.check(f.params.as_ref().ok_or_else(|| CliError::Data("eval.json has no params".into()))?)?;
        Ok(f)
    }

    fn glwe_file(&self, text: &str) -> CliResult<GlweFile> {
        match serial::from_json::<CiphertextFile>(text).map_err(data)? {
            CiphertextFile::Glwe(g) => {
                self.check(&g.params)?;
                Ok(g)
            }
            CiphertextFile::Lwe(_) => Err(CliError::Data("expected an RLWE ciphertext".into())),
        }
    }

    fn level_of(g: &GlweFile, top: usize) -> CliResult<usize> {
        let l = g.level.ok_or_else(|| CliError::Data("ciphertext has no level".into()))?;
        if l > top {
            return Err(CliError::Data(format!("level {l} above {top}")));
        }
        Ok(l)
    }

    fn bgv_ct(c: &BgvContext, g: &GlweFile) -> CliResult<BgvCiphertext> {
        let level = Self::level_of(g, c.top())?;
        Ok(BgvCiphertext { ct: glwe_from_file(g, &c.levels[level])?, level })
    }

    fn ckks_ct(c: &CkksContext, g: &GlweFile) -> CliResult<CkksCiphertext> {
        let level = Self::level_of(g, c.top())?;
        let scale = g.scale.ok_or_else(|| CliError::Data("ciphertext has no scale".into()))?;
        Ok(CkksCiphertext { ct: glwe_from_file(g, &c.levels[level])?, level, scale })
    }

    fn lwe_ct(&self, p: &TfheParams, text: &str) -> CliResult<LweCiphertext> {
        match serial::from_json::<CiphertextFile>(text).map_err(data)? {
            CiphertextFile::Lwe(l) => {
                self.check(&l.params)?;
                Ok(lwe_from_file(&l, p.log_q, p.k)?)
            }
            CiphertextFile::Glwe(_) => Err(CliError::Data("expected an LWE ciphertext".into())),
        }
    }

    fn write_glwe(&self, ct: &GlweCiphertext, level: Option<usize>, scale: Option<f64>) -> CliResult<String> {
        to_json(&CiphertextFile::Glwe(glwe_to_file(ct, self.header(), level, scale)))
    }

    pub fn encrypt(&self, dir: &Path, v: &Value, seed: u64) -> CliResult<String> {
        let s = Seed::from_u64(seed).derive("encrypt");
        match &self.kind {
            Kind::Tfhe(p) => {
                let ck = self.client_key(dir, p)?;
                let ct = ck.encrypt_bit(plain_bit(v)?, &mut s.rng());
                to_json(&CiphertextFile::Lwe(lwe_to_file(&ct, self.header())))
            }
            Kind::Bfv(c) => {
                let ct = c.encrypt_pk(&plain_u64(v, c.n(), c.t())?, &self.public(dir)?, &s)?;
                self.write_glwe(&ct, None, None)
            }
            Kind::Bgv(c) => {
                let ct = c.encrypt_pk(&plain_u64(v, c.n(), c.t())?, &self.public(dir)?, &s)?;
                self.write_glwe(&ct.ct, Some(ct.level), None)
            }
            Kind::Ckks(c) => {
                let ct = c.encrypt_pk(&plain_complex(v, c.slots())?, &self.public(dir)?, &s)?;
                self.write_glwe(&ct.ct, Some(ct.level), Some(ct.scale))
            }
        }
    }

    /// Plaintext JSON and an optional report line.
    pub fn decrypt(&self, dir: &Path, text: &str, reference: Option<&Value>) -> CliResult<(String, Option<String>)> {
        let exact_report = |got: &[u64], n: usize, t: u64| -> CliResult<Option<String>> {
            match reference {
                None => Ok(None),
                Some(r) => {
                    let want = plain_u64(r, n, t)?;
                    let bad = got.iter().zip(&want).filter(|(a, b)| a != b).count();
                    if bad > 0 {
                        return Err(CliError::Data(format!("{bad} of {n} slots differ from the reference")));
                    }
                    Ok(Some(format!("all {n} slots match the reference")))
                }
            }
        };
        match &self.kind {
            Kind::Tfhe(p) => {
                let ck = self.client_key(dir, p)?;
                let bit = ck.decrypt_bit(&self.lwe_ct(p, text)?)?;
                Ok((json!([bit as u8]).to_string(), None))
            }
            Kind::Bfv(c) => {
                let ct = glwe_from_file(&self.glwe_file(text)?, &c.glwe)?;
                let got = c.decrypt(&ct, &self.secret(dir)?)?;
                let report = exact_report(&got, c.n(), c.t())?;
                Ok((json!(got).to_string(), report))
            }
            Kind::Bgv(c) => {
                let ct = Self::bgv_ct(c, &self.glwe_file(text)?)?;
                let got = c.decrypt(&ct, &self.secret(dir)?)?;
                let report = exact_report(&got, c.n(), c.t())?;
                Ok((json!(got).to_string(), report))
            }
            Kind::Ckks(c) => {
                let ct = Self::ckks_ct(c, &self.glwe_file(text)?)?;
                let got = c.decrypt(&ct, &self.secret(dir)?)?;
                let err = match reference {
                    Some(r) => format!("max slot error {:.3e}", max_abs_error(&got, &plain_complex(r, c.slots())?)),
                    None => "max slot error n/a (pass the plaintext as a second --in)".into(),
                };
                let report = format!("level {}, scale 2^{:.3}, {err}", ct.level, ct.scale.log2());
                Ok((pairs(&got).to_string(), Some(report)))
            }
        }
    }

    pub fn eval(&self, dir: &Path, op: &str, cts: &[String]) -> CliResult<String> {
        let op = parse_op(op)?;
        let unsupported = |s: &str| CliError::Usage(format!("operation not available for {s}"));
        match &self.kind {
            Kind::Tfhe(p) => {
                let Op::Gate(g) = op else { return Err(unsupported("tfhe (use gate:NAME)")) };
                need(cts, g.arity(), &format!("gate:{g:?}"))?;
                let inputs = cts.iter().map(|t| self.lwe_ct(p, t)).collect::<CliResult<Vec<_>>>()?;
                let sk = self.server_key(dir, p)?;
                let out = gate_eval(g, &inputs.iter().collect::<Vec<_>>(), &sk)?;
                to_json(&CiphertextFile::Lwe(lwe_to_file(&out, self.header())))
            }
            Kind::Bfv(c) => {
                let x = cts.iter().map(|t| Ok(glwe_from_file(&self.glwe_file(t)?, &c.glwe)?)).collect::<CliResult<Vec<_>>>()?;
                let keys = || -> CliResult<BfvEvalKeys> {
                    let f = self.eval_file(dir)?;
                    Ok(BfvEvalKeys {
                        relin: glev_from_data(&f.relin, &c.big.ring, &c.relin_gadget)?,
                        galois: f
                            .galois
                            .iter()
                            .map(|(k, d)| Ok((*k, KeySwitchKey { levs: vec![glev_from_data(d, &c.glwe.ring, &c.ks_gadget)?] })))
                            .collect::<CliResult<_>>()?,
                    })
                };
                let out = match op {
                    Op::Add => need(cts, 2, "add").and_then(|_| Ok(c.add(&x[0], &x[1])?))?,
                    Op::Sub => need(cts, 2, "sub").and_then(|_| Ok(c.sub(&x[0], &x[1])?))?,
                    Op::Mul => need(cts, 2, "mul").and_then(|_| Ok(c.mul(&x[0], &x[1], &keys()?)?))?,
                    Op::Rotate(h) => need(cts, 1, "rotate").and_then(|_| Ok(c.rotate(&x[0], h, &keys()?)?))?,
                    Op::Conj => need(cts, 1, "swap").and_then(|_| Ok(c.swap(&x[0], &keys()?)?))?,
                    Op::Gate(_) => return Err(unsupported("bfv")),
                };
                self.write_glwe(&out, None, None)
            }
            Kind::Bgv(c) => {
                let x = cts.iter().map(|t| Self::bgv_ct(c, &self.glwe_file(t)?)).collect::<CliResult<Vec<_>>>()?;
                let keys = || -> CliResult<BgvEvalKeys> {
                    let f = self.eval_file(dir)?;
                    let ring = &c.levels[c.top()].ring;
                    Ok(BgvEvalKeys {
                        relin: glev_from_data(&f.relin, ring, &c.ks_gadget)?,
                        galois: f
                            .galois
                            .iter()
                            .map(|(k, d)| Ok((*k, KeySwitchKey { levs: vec![glev_from_data(d, ring, &c.ks_gadget)?] })))
                            .collect::<CliResult<_>>()?,
                    })
                };
                let out = match op {
                    Op::Add => need(cts, 2, "add").and_then(|_| Ok(c.add(&x[0], &x[1])?))?,
                    Op::Sub => need(cts, 2, "sub").and_then(|_| Ok(c.sub(&x[0], &x[1])?))?,
                    Op::Mul => need(cts, 2, "mul").and_then(|_| Ok(c.mul(&x[0], &x[1], &keys()?, true)?))?,
                    Op::Rotate(h) => need(cts, 1, "rotate").and_then(|_| Ok(c.rotate(&x[0], h, &keys()?)?))?,
                    Op::Conj => need(cts, 1, "swap").and_then(|_| Ok(c.swap(&x[0], &keys()?)?))?,
                    Op::Gate(_) => return Err(unsupported("bgv")),
                };
                self.write_glwe(&out.ct, Some(out.level), None)
            }
            Kind::Ckks(c) => {
                let x = cts.iter().map(|t| Self::ckks_ct(c, &self.glwe_file(t)?)).collect::<CliResult<Vec<_>>>()?;
                let keys = || -> CliResult<CkksEvalKeys> {
                    let f = self.eval_file(dir)?;
                    let top = c.top();
                    let big = &c.big_rings[top];
                    let evk = f.big.get("relin").ok_or_else(|| CliError::Data("eval.json has no relin key".into()))?;
                    let mut galois = BTreeMap::new();
                    for (k, d) in f.big.iter().filter(|(k, _)| k.as_str() != "relin") {
                        let k: u64 = k.parse().map_err(|_| CliError::Data(format!("bad Galois exponent {k:?}")))?;
                        galois.insert(k, ct_from_data(d, big)?);
                    }
                    Ok(CkksEvalKeys {
                        relin: glev_from_data(&f.relin, &c.levels[top].ring, &c.ks_gadget)?,
                        evk: ct_from_data(evk, big)?,
                        galois,
                    })
                };
                let out = match op {
                    Op::Add => need(cts, 2, "add").and_then(|_| Ok(c.add(&x[0], &x[1])?))?,
                    Op::Sub => need(cts, 2, "sub").and_then(|_| Ok(c.sub(&x[0], &x[1])?))?,
                    Op::Mul => need(cts, 2, "mul").and_then(|_| Ok(c.mul_rescale(&x[0], &x[1], &keys()?)?))?,
                    Op::Rotate(h) => need(cts, 1, "rotate").and_then(|_| Ok(c.rotate(&x[0], h, &keys()?)?))?,
                    Op::Conj => need(cts, 1, "conj").and_then(|_| Ok(c.conjugate(&x[0], &keys()?)?))?,
                    Op::Gate(_) => return Err(unsupported("ckks")),
                };
                self.write_glwe(&out.ct, Some(out.level), Some(out.scale))
            }
        }
    }
}
