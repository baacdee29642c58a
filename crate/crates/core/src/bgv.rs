//! BGV: messages in the low bits (`B = −A·S + M + t·E`), modulus switching with a mod-`t` correction.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};

use crate::decomposition::GadgetSpec;
use crate::error::{FheError, Result};
use crate::glwe::{self, GlevCiphertext, GlweCiphertext, GlweParams, GlweSecretKey, KeySwitchKey, SignConvention};
use crate::modular::{canonical, centered_u64, from_signed, inv_mod, is_prime_u64, mul_mod, prime_near, round_div};
use crate::poly::{RingParams, RingPoly};
use crate::prng::Seed;
use crate::rns::{RnsBase, RnsPoly};
use crate::transform::{j_exp, RingMatrices};

#[derive(Clone, Debug, PartialEq)]
pub struct BgvParams {
    pub n: usize,
    pub t: u64,
    /// Number of modulus switches available.
    pub levels: usize,
    pub prime_bits: u32,
    pub sigma: f64,
    pub ks_base_log: u32,
}

impl BgvParams {
    /// `n = 16`, `t = 97`, four 30-bit primes.
    pub fn desk() -> Self {
        Self { n: 16, t: 97, levels: 3, prime_bits: 30, sigma: 3.2, ks_base_log: 10 }
    }

    /// `n = 8`, `t = 17`.
    pub fn toy() -> Self {
        Self { n: 8, t: 17, levels: 2, prime_bits: 30, sigma: 3.2, ks_base_log: 10 }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "toy" => Ok(Self::toy()),
            "desk" => Ok(Self::desk()),
            _ => Err(FheError::NotFound(format!("BGV preset {name}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BgvContext {
    pub params: BgvParams,
    /// `w_0, …, w_L`, each `≡ 1 mod 2nt`.
    pub primes: Vec<u64>,
    pub levels: Vec<GlweParams>,
    pub slots: Option<RingMatrices>,
    pub ks_gadget: GadgetSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BgvCiphertext {
    pub ct: GlweCiphertext,
    pub level: usize,
}

#[derive(Clone, Debug)]
pub struct BgvEvalKeys {
    pub relin: GlevCiphertext,
    pub galois: BTreeMap<u64, KeySwitchKey>,
}

#[derive(Clone, Debug)]
pub struct BgvKeys {
    pub secret: GlweSecretKey,
    pub public: glwe::PublicKey,
    pub eval: BgvEvalKeys,
}

impl BgvContext {
    pub fn new(params: BgvParams) -> Result<Self> {
        let n = params.n;
        let t = params.t;
        let m = 2 * n as u64 * t;
        let mut primes = Vec::new();
        for _ in 0..=params.levels {
            primes.push(prime_near(1u64 << params.prime_bits, m, &primes)?);
        }
        let mut levels = Vec::new();
        let mut q = BigUint::one();
        for &w in &primes {
            q *= w;
            let ring = RingParams::new(n, q.clone())?;
            levels.push(
                GlweParams::with_delta(1, ring, t, BigUint::one(), SignConvention::Minus, params.sigma)?.with_noise_scale(t),
            );
        }
        let slots = if is_prime_u64(t) && (t - 1) % (2 * n as u64) == 0 { Some(RingMatrices::new(n, t, None)?) } else { None };
        let ks_gadget = GadgetSpec::power_basis(1 << params.ks_base_log, q)?;
        Ok(Self { params, primes, levels, slots, ks_gadget })
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn t(&self) -> u64 {
        self.params.t
    }

    pub fn top(&self) -> usize {
        self.params.levels
    }

    pub fn q(&self, level: usize) -> &BigUint {
        self.levels[level].q()
    }

    fn ring(&self, level: usize) -> &Arc<RingParams> {
        &self.levels[level].ring
    }

    fn batching(&self) -> Result<&RingMatrices> {
        self.slots.as_ref().ok_or_else(|| FheError::ParamMismatch(format!("t = {} does not support batching", self.t())))
    }

    pub fn encode(&self, v: &[u64]) -> Result<Vec<u64>> {
        self.batching()?.encode(v)
    }

    pub fn decode(&self, m: &[u64]) -> Result<Vec<u64>> {
        self.batching()?.decode(m)
    }

    fn plain_poly(&self, m: &[u64], level: usize) -> Result<RingPoly> {
        if m.len() != self.n() {
            return Err(FheError::LengthMismatch { expected: self.n(), got: m.len() });
        }
        let t = self.t();
        Ok(RingPoly::from_i64(self.ring(level), &m.iter().map(|&x| centered_u64(x % t, t)).collect::<Vec<_>>()))
    }

    pub fn keygen(&self, seed: &Seed) -> Result<BgvKeys> {
        let top = &self.levels[self.top()];
        let (secret, public) = glwe::keygen(top, seed);
        let eseed = seed.derive("eval");
        let s = &secret.polys[0];
        let relin = glwe::glev_encrypt(&s.mul(s), &secret, top, &self.ks_gadget, &eseed.derive("relin"))?;
        let mut eval = BgvEvalKeys { relin, galois: BTreeMap::new() };
        let mut step = 1;
        while step < self.n() / 2 {
            self.ensure_rotation(&mut eval, &secret, step, &eseed)?;
            step *= 2;
        }
        self.ensure_galois(&mut eval, &secret, 2 * self.n() as u64 - 1, &eseed)?;
        Ok(BgvKeys { secret, public, eval })
    }

    pub fn ensure_galois(&self, keys: &mut BgvEvalKeys, sk: &GlweSecretKey, k: u64, seed: &Seed) -> Result<()> {
        if !keys.galois.contains_key(&k) {
            let ksk = glwe::galois_key(sk, k, &self.levels[self.top()], &self.ks_gadget, seed)?;
            keys.galois.insert(k, ksk);
        }
        Ok(())
    }

    pub fn ensure_rotation(&self, keys: &mut BgvEvalKeys, sk: &GlweSecretKey, h: usize, seed: &Seed) -> Result<()> {
        self.ensure_galois(keys, sk, j_exp(h, self.n()), seed)
    }

    pub fn encrypt_coeffs(&self, m: &[u64], sk: &GlweSecretKey, seed: &Seed) -> Result<BgvCiphertext> {
        let level = self.top();
        let ct = glwe::encrypt_raw(&self.plain_poly(m, level)?, sk, &self.levels[level], seed);
        Ok(BgvCiphertext { ct, level })
    }

    pub fn encrypt(&self, slots: &[u64], sk: &GlweSecretKey, seed: &Seed) -> Result<BgvCiphertext> {
        self.encrypt_coeffs(&self.encode(slots)?, sk, seed)
    }

    pub fn encrypt_pk(&self, slots: &[u64], pk: &glwe::PublicKey, seed: &Seed) -> Result<BgvCiphertext> {
        let level = self.top();
        let params = &self.levels[level];
        let zero = RingPoly::zero(&params.ring);
        let ct = glwe::pk_encrypt(&zero, pk, params, seed).add_plain(&self.plain_poly(&self.encode(slots)?, level)?)?;
        Ok(BgvCiphertext { ct, level })
    }

    /// Centered phase reduced mod `t`.
    pub fn decrypt_coeffs(&self, c: &BgvCiphertext, sk: &GlweSecretKey) -> Result<Vec<u64>> {
        let ph = glwe::phase(&c.ct, sk, SignConvention::Minus)?;
        let t = BigUint::from(self.t());
        Ok(ph.centered().iter().map(|x| canonical(x, &t).to_u64().unwrap()).collect())
    }

    pub fn decrypt(&self, c: &BgvCiphertext, sk: &GlweSecretKey) -> Result<Vec<u64>> {
        self.decode(&self.decrypt_coeffs(c, sk)?)
    }

    /// `‖phase‖∞`; decryption is correct while this stays below `q_ℓ/2`.
    pub fn noise(&self, c: &BgvCiphertext, sk: &GlweSecretKey) -> Result<BigUint> {
        Ok(glwe::phase(&c.ct, sk, SignConvention::Minus)?.inf_norm())
    }

    fn check_pair(&self, a: &BgvCiphertext, b: &BgvCiphertext) -> Result<()> {
        if a.level != b.level {
            return Err(FheError::ParamMismatch(format!("levels {} and {}", a.level, b.level)));
        }
        Ok(())
    }

    pub fn add(&self, a: &BgvCiphertext, b: &BgvCiphertext) -> Result<BgvCiphertext> {
        self.check_pair(a, b)?;
        Ok(BgvCiphertext { ct: a.ct.add(&b.ct)?, level: a.level })
    }

    pub fn sub(&self, a: &BgvCiphertext, b: &BgvCiphertext) -> Result<BgvCiphertext> {
        self.check_pair(a, b)?;
        Ok(BgvCiphertext { ct: a.ct.sub(&b.ct)?, level: a.level })
    }

    pub fn add_plain(&self, a: &BgvCiphertext, slots: &[u64]) -> Result<BgvCiphertext> {
        let pt = self.plain_poly(&self.encode(slots)?, a.level)?;
        Ok(BgvCiphertext { ct: a.ct.add_plain(&pt)?, level: a.level })
    }

    pub fn mul_plain(&self, a: &BgvCiphertext, slots: &[u64]) -> Result<BgvCiphertext> {
        let pt = self.plain_poly(&self.encode(slots)?, a.level)?;
        Ok(BgvCiphertext { ct: a.ct.mul_plain(&pt)?, level: a.level })
    }

    /// Tensor and relinearize; with `rescale` also switch down one level.
    pub fn mul(&self, a: &BgvCiphertext, b: &BgvCiphertext, eval: &BgvEvalKeys, rescale: bool) -> Result<BgvCiphertext> {
        self.check_pair(a, b)?;
        let d = glwe::tensor(&a.ct, &b.ct)?;
        let ct = glwe::relinearize(&d, &eval.relin.reduce_to(self.ring(a.level)))?;
        let out = BgvCiphertext { ct, level: a.level };
        if rescale {
            self.mod_switch(&out)
        } else {
            Ok(out)
        }
    }

    /// Next level down, with the correction `H`.
    pub fn mod_switch(&self, a: &BgvCiphertext) -> Result<BgvCiphertext> {
        self.mod_switch_to(a, a.level.checked_sub(1).ok_or(FheError::LevelExhausted)?, true)
    }

    /// `A′ = ⌊q̂·A/q_ℓ⌉`, `ε′ = q̂·A − q_ℓ·A′`, then `A′ + H` with `H = q_ℓ⁻¹·ε′ mod t` (centered).
    ///
    /// `correct = false` skips `H`; the result then decrypts to noise. Same level is the identity.
    pub fn mod_switch_to(&self, a: &BgvCiphertext, level: usize, correct: bool) -> Result<BgvCiphertext> {
        if level > a.level {
            return Err(FheError::BadTargetModulus(format!("level {level} is above {}", a.level)));
        }
        if level == a.level {
            return Ok(a.clone());
        }
        Ok(BgvCiphertext { ct: self.switch_raw(&a.ct, self.ring(level), correct)?, level })
    }

    /// Switch to any `q̂ < q_ℓ` with `q̂ ≡ 1 mod t`, on or off the chain.
    pub fn switch_raw(&self, ct: &GlweCiphertext, target: &Arc<RingParams>, correct: bool) -> Result<GlweCiphertext> {
        let t = self.t();
        let tt = BigUint::from(t);
        let q = ct.ring().q.clone();
        let q_hat = &target.q;
        if q_hat >= &q || !(q_hat % &tt).is_one() {
            return Err(FheError::BadTargetModulus(format!("{q_hat} is not below {q} and = 1 mod {t}")));
        }
        let q_inv = inv_mod((&q % &tt).to_u64().unwrap(), t)?;
        let (qi, qh) = (BigInt::from(q), BigInt::from(q_hat.clone()));
        Ok(ct.map(|p| {
            let c: Vec<BigInt> = p
                .centered()
                .iter()
                .map(|x| {
                    let num = &qh * x;
                    let a1 = round_div(&num, &qi);
                    if !correct {
                        return a1;
                    }
                    let eps = num - &qi * &a1;
                    let e = canonical(&eps, &tt).to_u64().unwrap();
                    a1 + BigInt::from(centered_u64(mul_mod(q_inv, e, t), t))
                })
                .collect();
            RingPoly::from_bigints(target, &c)
        }))
    }

    /// Decrypt a ciphertext at any modulus (e.g. after an off-chain switch).
    pub fn decrypt_raw(&self, ct: &GlweCiphertext, sk: &GlweSecretKey) -> Result<Vec<u64>> {
        let level = self.top();
        self.decrypt(&BgvCiphertext { ct: ct.clone(), level }, sk)
    }

    /// Drop the last prime `w` in RNS form: `A′ = (A − [A]_w)/w` residue by residue, `H_A = w⁻¹·[A]_w mod t`.
    pub fn mod_switch_rns(&self, a: &BgvCiphertext) -> Result<BgvCiphertext> {
        if a.level == 0 {
            return Err(FheError::LevelExhausted);
        }
        let t = self.t();
        let base = RnsBase::new(&self.primes[..=a.level])?;
        let keep = RnsBase::new(&self.primes[..a.level])?;
        let w = self.primes[a.level];
        let w_inv_t = inv_mod(w % t, t)?;
        let w_inv: Vec<u64> = keep.moduli().iter().map(|&m| inv_mod(w % m, m)).collect::<Result<_>>()?;
        let ring = self.ring(a.level - 1);
        let switch = |p: &RingPoly| -> Result<RingPoly> {
            let r = RnsPoly::from_poly(p, &base)?;
            let out = r.map_coeffs(&keep, |v| {
                let c = v[a.level];
                let h = centered_u64(mul_mod(w_inv_t, from_signed(c, t), t), t);
                Ok(keep
                    .moduli()
                    .iter()
                    .enumerate()
                    .map(|(i, &m)| {
                        let diff = from_signed(v[i], m) as i128 - c as i128;
                        let q = mul_mod(diff.rem_euclid(m as i128) as u64, w_inv[i], m);
                        centered_u64((q + from_signed(h, m)) % m, m)
                    })
                    .collect())
            })?;
            out.to_poly(ring)
        };
        let masks = a.ct.masks.iter().map(&switch).collect::<Result<_>>()?;
        let body = switch(&a.ct.body)?;
        Ok(BgvCiphertext { ct: GlweCiphertext { masks, body, mask_seed: None }, level: a.level - 1 })
    }

    /// Reduce into a lower modulus without scaling; the noise keeps its absolute size.
    pub fn mod_drop(&self, a: &BgvCiphertext, level: usize) -> Result<BgvCiphertext> {
        if level > a.level {
            return Err(FheError::BadTargetModulus(format!("level {level} is above {}", a.level)));
        }
        Ok(BgvCiphertext { ct: a.ct.reduce_to(self.ring(level)), level })
    }

    pub fn apply_galois(&self, a: &BgvCiphertext, k: u64, eval: &BgvEvalKeys) -> Result<BgvCiphertext> {
        let ksk = eval.galois.get(&k).ok_or(FheError::MissingGaloisKey(k))?;
        Ok(BgvCiphertext { ct: glwe::apply_galois(&a.ct, k, ksk)?, level: a.level })
    }

    /// Left rotation of both halves by `h`.
    pub fn rotate(&self, a: &BgvCiphertext, h: usize, eval: &BgvEvalKeys) -> Result<BgvCiphertext> {
        let h = h % (self.n() / 2).max(1);
        if h == 0 {
            return Ok(a.clone());
        }
        let k = j_exp(h, self.n());
        if eval.galois.contains_key(&k) {
            return self.apply_galois(a, k, eval);
        }
        let mut out = a.clone();
        for bit in 0..usize::BITS {
            if h >> bit & 1 == 1 {
                out = self.apply_galois(&out, j_exp(1 << bit, self.n()), eval)?;
            }
        }
        Ok(out)
    }

    pub fn swap(&self, a: &BgvCiphertext, eval: &BgvEvalKeys) -> Result<BgvCiphertext> {
        self.apply_galois(a, 2 * self.n() as u64 - 1, eval)
    }
}
