//! BFV: exact arithmetic on `Z_t` slot vectors (or plain `Z_t[X]/(X^n+1)` when `t` is not a suitable prime).

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::One;

use crate::decomposition::GadgetSpec;
use crate::error::{FheError, Result};
use crate::glwe::{
    self, GlevCiphertext, GlweCiphertext, GlweParams, GlweSecretKey, KeySwitchKey, PublicKey, SignConvention,
};
use crate::modular::{centered_u64, is_prime_u64, mul_mod, pow_mod, primes_below};
use crate::poly::{RingParams, RingPoly};
use crate::prng::Seed;
use crate::transform::{j_exp, RingMatrices};

pub type BfvCiphertext = GlweCiphertext;

#[derive(Clone, Debug, PartialEq)]
pub struct BfvParams {
    pub n: usize,
    pub t: u64,
    pub q: BigUint,
    pub sigma: f64,
    /// Root used for batching; `None` picks one.
    pub omega: Option<u64>,
    pub ks_base_log: u32,
    pub relin_base_log: u32,
}

impl BfvParams {
    pub fn new(n: usize, t: u64, q: BigUint) -> Self {
        Self { n, t, q, sigma: 3.2, omega: None, ks_base_log: 10, relin_base_log: 16 }
    }

    fn ntt_prime(bits: u32, n: usize) -> BigUint {
        BigUint::from(primes_below(bits, 2 * n as u64, 1).expect("prime")[0])
    }

    /// `n = 8`, `t = 17`, `ω = 3`, `q` a 40-bit prime.
    pub fn toy() -> Self {
        Self { omega: Some(3), ..Self::new(8, 17, Self::ntt_prime(40, 8)) }
    }

    /// `n = 4`, `t = 17`, `ω = 9`.
    pub fn batch_example() -> Self {
        Self { omega: Some(9), ..Self::new(4, 17, Self::ntt_prime(40, 4)) }
    }

    /// `n = 16`, `t = 97`, `q` a 60-bit prime.
    pub fn desk() -> Self {
        Self::new(16, 97, Self::ntt_prime(60, 16))
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "toy" => Ok(Self::toy()),
            "batch" => Ok(Self::batch_example()),
            "desk" => Ok(Self::desk()),
            _ => Err(FheError::NotFound(format!("BFV preset {name}"))),
        }
    }

    pub fn with_t(&self, t: u64) -> Self {
        Self { t, omega: None, ..self.clone() }
    }
}

#[derive(Clone, Debug)]
pub struct BfvContext {
    pub params: BfvParams,
    pub glwe: GlweParams,
    /// Same key, modulus `Q = q·Δ`, used for the tensor product.
    pub big: GlweParams,
    pub slots: Option<RingMatrices>,
    pub ks_gadget: GadgetSpec,
    pub relin_gadget: GadgetSpec,
}

#[derive(Clone, Debug)]
pub struct BfvEvalKeys {
    /// `RLev(S²)` at `Q`.
    pub relin: GlevCiphertext,
    /// Galois exponent `k` to the key switching `S(X^k)` back to `S`.
    pub galois: BTreeMap<u64, KeySwitchKey>,
}

#[derive(Clone, Debug)]
pub struct BfvKeys {
    pub secret: GlweSecretKey,
    pub public: PublicKey,
    pub eval: BfvEvalKeys,
}

impl BfvContext {
    pub fn new(params: BfvParams) -> Result<Self> {
        let n = params.n;
        let ring = RingParams::new(n, params.q.clone())?;
        let glwe = GlweParams::new(1, ring, params.t, SignConvention::Minus, params.sigma)?;
        let q = &params.q;
        let big_q = q * &glwe.delta;
        if (q - 1u32) * (n + 1) >= big_q {
            return Err(FheError::ParamMismatch(format!("q = {q} too small for t = {}", params.t)));
        }
        let big = glwe.with_ring(RingParams::new(n, big_q.clone())?);
        let batchable = n >= 2 && is_prime_u64(params.t) && (params.t - 1) % (2 * n as u64) == 0;
        let slots = if batchable || params.omega.is_some() {
            Some(RingMatrices::new(n, params.t, params.omega)?)
        } else {
            None
        };
        let ks_gadget = GadgetSpec::power_basis(1 << params.ks_base_log, q.clone())?;
        let relin_gadget = GadgetSpec::power_basis(1 << params.relin_base_log, big_q)?;
        Ok(Self { params, glwe, big, slots, ks_gadget, relin_gadget })
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn t(&self) -> u64 {
        self.params.t
    }

    pub fn delta(&self) -> &BigUint {
        &self.glwe.delta
    }

    pub fn ring(&self) -> &Arc<RingParams> {
        &self.glwe.ring
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

    fn check_len(&self, m: &[u64]) -> Result<()> {
        if m.len() != self.n() {
            return Err(FheError::LengthMismatch { expected: self.n(), got: m.len() });
        }
        Ok(())
    }

    /// Plaintext polynomial with coefficients in `[0, t)`.
    pub fn plain_poly(&self, m: &[u64]) -> Result<RingPoly> {
        self.check_len(m)?;
        let t = self.t();
        Ok(RingPoly::from_u64(self.ring(), &m.iter().map(|x| x % t).collect::<Vec<_>>()))
    }

    /// Plaintext polynomial with centered coefficients, for multiplying into ciphertexts.
    pub fn small_poly(&self, m: &[u64]) -> Result<RingPoly> {
        self.check_len(m)?;
        let t = self.t();
        Ok(RingPoly::from_i64(self.ring(), &m.iter().map(|&x| centered_u64(x % t, t)).collect::<Vec<_>>()))
    }

    pub fn keygen(&self, seed: &Seed) -> Result<BfvKeys> {
        let (secret, public) = glwe::keygen(&self.glwe, seed);
        let eval = self.eval_keys(&secret, &seed.derive("eval"))?;
        Ok(BfvKeys { secret, public, eval })
    }

    /// Relinearization key plus Galois keys for power-of-two rotations and the half swap.
    pub fn eval_keys(&self, sk: &GlweSecretKey, seed: &Seed) -> Result<BfvEvalKeys> {
        let big_sk = sk.lift_to(&self.big.ring);
        let s2 = big_sk.polys[0].mul(&big_sk.polys[0]);
        let relin = glwe::glev_encrypt(&s2, &big_sk, &self.big, &self.relin_gadget, &seed.derive("relin"))?;
        let mut keys = BfvEvalKeys { relin, galois: BTreeMap::new() };
        if self.n() >= 4 {
            let mut step = 1;
            while step < self.n() / 2 {
                self.ensure_rotation(&mut keys, sk, step, seed)?;
                step *= 2;
            }
        }
        self.ensure_galois(&mut keys, sk, self.swap_exponent(), seed)?;
        Ok(keys)
    }

    pub fn swap_exponent(&self) -> u64 {
        2 * self.n() as u64 - 1
    }

    pub fn ensure_galois(&self, keys: &mut BfvEvalKeys, sk: &GlweSecretKey, k: u64, seed: &Seed) -> Result<()> {
        if !keys.galois.contains_key(&k) {
            let ksk = glwe::galois_key(sk, k, &self.glwe, &self.ks_gadget, seed)?;
            keys.galois.insert(k, ksk);
        }
        Ok(())
    }

    /// Adds the key for a one-shot rotation by `h`.
    pub fn ensure_rotation(&self, keys: &mut BfvEvalKeys, sk: &GlweSecretKey, h: usize, seed: &Seed) -> Result<()> {
        self.ensure_galois(keys, sk, j_exp(h, self.n()), seed)
    }

    pub fn encrypt_coeffs(&self, m: &[u64], sk: &GlweSecretKey, seed: &Seed) -> Result<BfvCiphertext> {
        Ok(glwe::encrypt(&self.plain_poly(m)?, sk, &self.glwe, seed))
    }

    pub fn encrypt(&self, slots: &[u64], sk: &GlweSecretKey, seed: &Seed) -> Result<BfvCiphertext> {
        self.encrypt_coeffs(&self.encode(slots)?, sk, seed)
    }

    pub fn encrypt_coeffs_pk(&self, m: &[u64], pk: &PublicKey, seed: &Seed) -> Result<BfvCiphertext> {
        Ok(glwe::pk_encrypt(&self.plain_poly(m)?, pk, &self.glwe, seed))
    }

    pub fn encrypt_pk(&self, slots: &[u64], pk: &PublicKey, seed: &Seed) -> Result<BfvCiphertext> {
        self.encrypt_coeffs_pk(&self.encode(slots)?, pk, seed)
    }

    pub fn decrypt_coeffs(&self, ct: &BfvCiphertext, sk: &GlweSecretKey) -> Result<Vec<u64>> {
        glwe::decrypt(ct, sk, &self.glwe)
    }

    pub fn decrypt(&self, ct: &BfvCiphertext, sk: &GlweSecretKey) -> Result<Vec<u64>> {
        self.decode(&self.decrypt_coeffs(ct, sk)?)
    }

    /// `‖phase − Δ·M‖∞` against the expected plaintext coefficients.
    pub fn noise(&self, ct: &BfvCiphertext, sk: &GlweSecretKey, m: &[u64]) -> Result<BigUint> {
        let payload = glwe::scale_plaintext(&self.plain_poly(m)?, &self.glwe);
        glwe::noise_norm(ct, sk, SignConvention::Minus, &payload)
    }

    /// Bits of headroom left: `log2(Δ/2) − log2(noise)`.
    pub fn noise_budget(&self, ct: &BfvCiphertext, sk: &GlweSecretKey, m: &[u64]) -> Result<f64> {
        let e = self.noise(ct, sk, m)?;
        let half = (self.delta() / 2u32).bits() as f64;
        Ok(half - (e.bits() as f64))
    }

    pub fn add(&self, a: &BfvCiphertext, b: &BfvCiphertext) -> Result<BfvCiphertext> {
        a.add(b)
    }

    pub fn sub(&self, a: &BfvCiphertext, b: &BfvCiphertext) -> Result<BfvCiphertext> {
        a.sub(b)
    }

    pub fn add_plain_coeffs(&self, ct: &BfvCiphertext, m: &[u64]) -> Result<BfvCiphertext> {
        ct.add_plain(&glwe::scale_plaintext(&self.plain_poly(m)?, &self.glwe))
    }

    pub fn add_plain(&self, ct: &BfvCiphertext, slots: &[u64]) -> Result<BfvCiphertext> {
        self.add_plain_coeffs(ct, &self.encode(slots)?)
    }

    pub fn mul_plain_coeffs(&self, ct: &BfvCiphertext, m: &[u64]) -> Result<BfvCiphertext> {
        ct.mul_plain(&self.small_poly(m)?)
    }

    /// Slot-wise product with a plaintext vector.
    pub fn mul_plain(&self, ct: &BfvCiphertext, slots: &[u64]) -> Result<BfvCiphertext> {
        self.mul_plain_coeffs(ct, &self.encode(slots)?)
    }

    pub fn mul_scalar(&self, ct: &BfvCiphertext, c: u64) -> BfvCiphertext {
        ct.scalar_mul(&BigInt::from(centered_u64(c % self.t(), self.t())))
    }

    /// Lift to `Q`, tensor, relinearize, then divide by `Δ` back into `q`.
    pub fn mul(&self, a: &BfvCiphertext, b: &BfvCiphertext, eval: &BfvEvalKeys) -> Result<BfvCiphertext> {
        if !a.ring().same(self.ring()) || !b.ring().same(self.ring()) {
            return Err(FheError::ParamMismatch("ciphertext not at this context's modulus".into()));
        }
        let big = &self.big.ring;
        let d = glwe::tensor(&a.lift_to(big), &b.lift_to(big))?;
        let relin = glwe::relinearize(&d, &eval.relin)?;
        let one = BigUint::one();
        Ok(relin.map(|p| p.scale_round_to(self.ring(), &one, self.delta())))
    }

    pub fn square(&self, a: &BfvCiphertext, eval: &BfvEvalKeys) -> Result<BfvCiphertext> {
        self.mul(a, a, eval)
    }

    pub fn apply_galois(&self, ct: &BfvCiphertext, k: u64, eval: &BfvEvalKeys) -> Result<BfvCiphertext> {
        let ksk = eval.galois.get(&k).ok_or(FheError::MissingGaloisKey(k))?;
        glwe::apply_galois(ct, k, ksk)
    }

    /// Left rotation of both halves by `h`: slot `j` receives slot `j + h` of its half.
    ///
    /// Uses the key for `J(h)` when present, else composes power-of-two steps.
    pub fn rotate(&self, ct: &BfvCiphertext, h: usize, eval: &BfvEvalKeys) -> Result<BfvCiphertext> {
        let half = self.n() / 2;
        let h = if half == 0 { 0 } else { h % half };
        if h == 0 {
            return Ok(ct.clone());
        }
        let k = j_exp(h, self.n());
        if eval.galois.contains_key(&k) {
            return self.apply_galois(ct, k, eval);
        }
        let mut out = ct.clone();
        let mut bit = 0;
        while (1 << bit) <= h {
            if h >> bit & 1 == 1 {
                out = self.apply_galois(&out, j_exp(1 << bit, self.n()), eval)?;
            }
            bit += 1;
        }
        Ok(out)
    }

    /// Exchanges the two halves of the slot vector.
    pub fn swap(&self, ct: &BfvCiphertext, eval: &BfvEvalKeys) -> Result<BfvCiphertext> {
        self.apply_galois(ct, self.swap_exponent(), eval)
    }

    /// `A·x` for an `m × n` matrix with `m | n`; slot `j` of the result holds row `j mod m`.
    ///
    /// Diagonal method. Full-length rotations are assembled from half rotations and the swap
    /// with two plaintext masks per step.
    pub fn mat_vec_mul(&self, a: &[Vec<u64>], ct: &BfvCiphertext, eval: &BfvEvalKeys) -> Result<BfvCiphertext> {
        let n = self.n();
        let half = n / 2;
        let t = self.t();
        let m = a.len();
        if m == 0 || n % m != 0 {
            return Err(FheError::ParamMismatch(format!("{m} rows do not divide {n} slots")));
        }
        if let Some(row) = a.iter().find(|r| r.len() != n) {
            return Err(FheError::LengthMismatch { expected: n, got: row.len() });
        }
        let diag = |i: usize| -> Vec<u64> { (0..n).map(|j| a[j % m][(i + j) % n] % t).collect() };
        let mut acc: Option<BfvCiphertext> = None;
        let mut rotated = ct.clone();
        for r in 0..half {
            if r > 0 {
                rotated = self.rotate(&rotated, 1, eval)?;
            }
            let swapped = self.swap(&rotated, eval)?;
            let (lo, hi) = (diag(r), diag(half + r));
            let mut w_rot = vec![0u64; n];
            let mut w_swap = vec![0u64; n];
            for j in 0..n {
                let keep = j % half < half - r;
                w_rot[j] = if keep { lo[j] } else { hi[j] };
                w_swap[j] = if keep { hi[j] } else { lo[j] };
            }
            let term = self.mul_plain(&rotated, &w_rot)?.add(&self.mul_plain(&swapped, &w_swap)?)?;
            acc = Some(match acc {
                None => term,
                Some(s) => s.add(&term)?,
            });
        }
        Ok(acc.expect("at least one diagonal"))
    }

    /// `p(x)` for coefficients in `Z_t` (lowest degree first), powers by balanced splitting.
    pub fn eval_poly(&self, coeffs: &[u64], ct: &BfvCiphertext, eval: &BfvEvalKeys) -> Result<BfvCiphertext> {
        let d = coeffs.len().saturating_sub(1);
        let mut pows: Vec<BfvCiphertext> = vec![ct.clone(); d.max(1) + 1];
        for i in 2..=d {
            pows[i] = self.mul(&pows[i / 2], &pows[i - i / 2], eval)?;
        }
        let zero = vec![0u64; self.n()];
        let mut acc = self.encrypt_trivial(&zero)?;
        for (i, &c) in coeffs.iter().enumerate().skip(1) {
            if c % self.t() != 0 {
                acc = acc.add(&self.mul_scalar(&pows[i], c))?;
            }
        }
        let mut c0 = zero;
        c0[0] = coeffs.first().copied().unwrap_or(0);
        self.add_plain_coeffs(&acc, &c0)
    }

    /// `(0, Δ·M)`.
    pub fn encrypt_trivial(&self, m: &[u64]) -> Result<BfvCiphertext> {
        Ok(GlweCiphertext::trivial(1, glwe::scale_plaintext(&self.plain_poly(m)?, &self.glwe)))
    }

    /// The same ciphertext read under plaintext modulus `t'` (same `q`).
    pub fn reinterpret(&self, ct: &BfvCiphertext, other: &BfvContext) -> Result<BfvCiphertext> {
        if !other.ring().same(self.ring()) {
            return Err(FheError::ParamMismatch("contexts differ in ring".into()));
        }
        Ok(ct.clone())
    }
}

/// Binary digits of `x` as coefficients (so the value is the polynomial at `X = 2`).
pub fn encode_integer(x: u64, n: usize) -> Result<Vec<u64>> {
    if n < 64 && x >> n != 0 {
        return Err(FheError::InputTooLarge);
    }
    Ok((0..n).map(|i| if i < 64 { x >> i & 1 } else { 0 }).collect())
}

/// Evaluate centered coefficients at `X = 2`.
pub fn decode_integer(m: &[u64], t: u64) -> i128 {
    m.iter().rev().fold(0i128, |acc, &c| acc * 2 + centered_u64(c % t, t) as i128)
}

/// Lifting polynomials for extracting the top base-`p` digit of a value mod `p^ε`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitExtractSpec {
    pub p: u64,
    pub epsilon: u32,
    /// `lifts[e−1]` holds `F_e` (`e = 1..ε−1`), coefficients mod `p^ε`, lowest degree first.
    pub lifts: Vec<Vec<u64>>,
}

/// Digit `j` of `x^p` interpolated over `x ∈ [0, p)` in `Z_{p^ε}`.
fn interpolate(p: u64, modulus: u64, values: &[u64]) -> Result<Vec<u64>> {
    let mut out = vec![0u64; p as usize];
    for (i, &y) in values.iter().enumerate() {
        if y == 0 {
            continue;
        }
        // Numerator prod_{k != i} (X - k), denominator prod_{k != i} (i - k).
        let mut num = vec![1u64];
        let mut den = 1u64;
        for k in 0..p {
            if k == i as u64 {
                continue;
            }
            let neg_k = (modulus - k % modulus) % modulus;
            let mut next = vec![0u64; num.len() + 1];
            for (d, &c) in num.iter().enumerate() {
                next[d + 1] = (next[d + 1] + c) % modulus;
                next[d] = (next[d] + mul_mod(c, neg_k, modulus)) % modulus;
            }
            num = next;
            let diff = (i as i64 - k as i64).rem_euclid(modulus as i64) as u64;
            den = mul_mod(den, diff, modulus);
        }
        let scale = mul_mod(y, crate::modular::inv_mod(den, modulus)?, modulus);
        for (d, &c) in num.iter().enumerate() {
            out[d] = (out[d] + mul_mod(c, scale, modulus)) % modulus;
        }
    }
    Ok(out)
}

impl DigitExtractSpec {
    pub fn new(p: u64, epsilon: u32) -> Result<Self> {
        if !is_prime_u64(p) || epsilon == 0 {
            return Err(FheError::BadModulus(format!("digit extraction needs a prime p (got {p}) and ε ≥ 1")));
        }
        let modulus = p
            .checked_pow(epsilon)
            .filter(|&m| m < 1 << 31)
            .ok_or(FheError::InputTooLarge)?;
        let digits: Vec<Vec<u64>> = (1..epsilon)
            .map(|j| (0..p).map(|x| pow_mod(x, p, modulus) / p.pow(j) % p).collect())
            .collect();
        let fs: Vec<Vec<u64>> = digits.iter().map(|d| interpolate(p, modulus, d)).collect::<Result<_>>()?;
        let mut lifts = Vec::new();
        for e in 1..epsilon {
            // F_e = X^p - sum_{j<=e} p^j f_j
            let mut f = vec![0u64; p as usize + 1];
            f[p as usize] = 1;
            for (j, fj) in fs.iter().enumerate().take(e as usize) {
                let pj = p.pow(j as u32 + 1);
                for (d, &c) in fj.iter().enumerate() {
                    f[d] = (f[d] + modulus - mul_mod(c, pj, modulus)) % modulus;
                }
            }
            lifts.push(f);
        }
        Ok(Self { p, epsilon, lifts })
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.epsilon)
    }

    /// `⌊p^{ε−1}/2⌋`, added first so the extracted digit is rounded.
    pub fn offset(&self) -> u64 {
        self.p.pow(self.epsilon - 1) / 2
    }

    /// `F_e(z) mod p^v`.
    pub fn lift(&self, e: usize, z: u64, v: u32) -> u64 {
        let m = self.p.pow(v);
        self.lifts[e - 1].iter().rev().fold(0u64, |acc, &c| (mul_mod(acc, z, m) + c % m) % m)
    }

    /// `F_{v−1} ∘ … ∘ F_1 (z) mod p^v`: the lowest digit of `z`, lifted to `Z_{p^v}`.
    pub fn lowest_digit(&self, z: u64, v: u32) -> u64 {
        let m = self.p.pow(v);
        (1..v as usize).fold(z % m, |acc, e| self.lift(e, acc, v))
    }

    /// `G_v(z) = (z − F_{v−1}∘…∘F_1(z)) / p`, from `Z_{p^v}` to `Z_{p^{v−1}}`.
    pub fn strip(&self, z: u64, v: u32) -> u64 {
        let m = self.p.pow(v);
        let z = z % m;
        let d = (z + m - self.lowest_digit(z, v)) % m;
        debug_assert_eq!(d % self.p, 0);
        d / self.p
    }

    /// `⌊z / p^{ε−1}⌉ mod p`.
    pub fn eval(&self, z: u64) -> u64 {
        let mut acc = (z + self.offset()) % self.modulus();
        for v in (2..=self.epsilon).rev() {
            acc = self.strip(acc, v);
        }
        acc % self.p
    }
}

pub fn digit_extract_eval(z: u64, spec: &DigitExtractSpec) -> u64 {
    spec.eval(z)
}

/// Homomorphic digit extraction on constant plaintexts, one context per `t = p^v`.
pub struct DigitExtractor {
    pub spec: DigitExtractSpec,
    /// `contexts[v−1]` has `t = p^v`.
    pub contexts: Vec<BfvContext>,
    pub eval: Vec<BfvEvalKeys>,
}

impl DigitExtractor {
    pub fn new(base: &BfvParams, spec: DigitExtractSpec, sk: &GlweSecretKey, seed: &Seed) -> Result<Self> {
        let mut contexts = Vec::new();
        let mut eval = Vec::new();
        for v in 1..=spec.epsilon {
            let ctx = BfvContext::new(base.with_t(spec.p.pow(v)))?;
            let keys = BfvEvalKeys {
                relin: {
                    let big_sk = sk.lift_to(&ctx.big.ring);
                    let s2 = big_sk.polys[0].mul(&big_sk.polys[0]);
                    glwe::glev_encrypt(&s2, &big_sk, &ctx.big, &ctx.relin_gadget, &seed.derive_index("relin", v as u64))?
                },
                galois: BTreeMap::new(),
            };
            contexts.push(ctx);
            eval.push(keys);
        }
        Ok(Self { spec, contexts, eval })
    }

    pub fn top(&self) -> &BfvContext {
        &self.contexts[self.spec.epsilon as usize - 1]
    }

    /// Input encrypts a constant `z` at `t = p^ε`; output encrypts `⌊z/p^{ε−1}⌉ mod p` at `t = p`.
    pub fn extract(&self, ct: &BfvCiphertext) -> Result<BfvCiphertext> {
        let eps = self.spec.epsilon;
        let top = self.top();
        let mut off = vec![0u64; top.n()];
        off[0] = self.spec.offset();
        let mut acc = top.add_plain_coeffs(ct, &off)?;
        for v in (2..=eps).rev() {
            let ctx = &self.contexts[v as usize - 1];
            let keys = &self.eval[v as usize - 1];
            let m = self.spec.p.pow(v);
            let mut low = acc.clone();
            for e in 1..v as usize {
                let coeffs: Vec<u64> = self.spec.lifts[e - 1].iter().map(|c| c % m).collect();
                low = ctx.eval_poly(&coeffs, &low, keys)?;
            }
            acc = ctx.reinterpret(&acc.sub(&low)?, &self.contexts[v as usize - 2])?;
        }
        Ok(acc)
    }
}
