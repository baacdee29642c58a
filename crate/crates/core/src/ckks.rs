//! CKKS: approximate arithmetic on complex slot vectors over a modulus chain.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{FromPrimitive, One, ToPrimitive};

use crate::decomposition::GadgetSpec;
use crate::error::{FheError, Result};
use crate::glwe::{self, GlevCiphertext, GlweCiphertext, GlweParams, GlweSecretKey, SignConvention};
use crate::modular::prime_near;
use crate::poly::{RingParams, RingPoly};
use crate::prng::Seed;
use crate::transform::{j_exp, ComplexMatrices};

/// Slot encoder: `n/2` complex slots, conjugates implied.
#[derive(Clone, Debug)]
pub struct CkksEncoder {
    pub n: usize,
    pub matrices: ComplexMatrices,
}

impl CkksEncoder {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self { n, matrices: ComplexMatrices::new(n)? })
    }

    pub fn slots(&self) -> usize {
        self.n / 2
    }

    /// Real coefficients of `Ŵ·I^R·(z, z̄)/n` before scaling.
    pub fn embed_inverse(&self, z: &[Complex64]) -> Result<Vec<f64>> {
        if z.len() != self.slots() {
            return Err(FheError::LengthMismatch { expected: self.slots(), got: z.len() });
        }
        let full: Vec<Complex64> = z.iter().copied().chain(z.iter().map(|c| c.conj())).collect();
        Ok(self.matrices.encode_full(&full).iter().map(|c| c.re).collect())
    }

    /// `⌊Δ·m⌉` per coefficient.
    pub fn encode(&self, z: &[Complex64], scale: f64) -> Result<Vec<BigInt>> {
        self.embed_inverse(z)?
            .iter()
            .map(|&c| BigInt::from_f64((c * scale + 0.5).floor()).ok_or(FheError::ScaleOverflow))
            .collect()
    }

    pub fn decode(&self, coeffs: &[BigInt], scale: f64) -> Vec<Complex64> {
        self.decode_full(coeffs, scale)[..self.slots()].to_vec()
    }

    /// All `n` evaluations; the second half conjugates the first.
    pub fn decode_full(&self, coeffs: &[BigInt], scale: f64) -> Vec<Complex64> {
        let m: Vec<Complex64> =
            coeffs.iter().map(|c| Complex64::new(c.to_f64().unwrap_or(f64::NAN) / scale, 0.0)).collect();
        self.matrices.decode_full(&m)
    }

    /// `s` slots replicated `n/(2s)` times; the encoding lies in `Z[X^{n/(2s)}]`.
    pub fn encode_sparse(&self, z: &[Complex64], scale: f64) -> Result<Vec<BigInt>> {
        let s = z.len();
        if s == 0 || !s.is_power_of_two() || self.slots() % s != 0 {
            return Err(FheError::BadSubring(s));
        }
        let full: Vec<Complex64> = (0..self.slots()).map(|i| z[i % s]).collect();
        self.encode(&full, scale)
    }

    /// First `s` slots of a sparse encoding.
    pub fn decode_sparse(&self, coeffs: &[BigInt], scale: f64, s: usize) -> Result<Vec<Complex64>> {
        if s == 0 || !s.is_power_of_two() || self.slots() % s != 0 {
            return Err(FheError::BadSubring(s));
        }
        let step = self.slots() / s;
        if coeffs.iter().enumerate().any(|(i, c)| i % step != 0 && c.bits() > 0) {
            return Err(FheError::BadSubring(s));
        }
        Ok(self.decode(coeffs, scale)[..s].to_vec())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CkksParams {
    pub n: usize,
    /// Number of rescalings available.
    pub levels: usize,
    pub scale_bits: u32,
    pub base_bits: u32,
    pub sigma: f64,
    pub ks_base_log: u32,
}

impl CkksParams {
    /// `n = 64`, four levels, `Δ = 2^20`, base prime near `2^30`.
    pub fn desk() -> Self {
        Self { n: 64, levels: 4, scale_bits: 20, base_bits: 30, sigma: 3.2, ks_base_log: 10 }
    }

    pub fn toy() -> Self {
        Self { n: 8, levels: 2, scale_bits: 20, base_bits: 30, sigma: 3.2, ks_base_log: 10 }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "toy" => Ok(Self::toy()),
            "desk" => Ok(Self::desk()),
            _ => Err(FheError::NotFound(format!("CKKS preset {name}"))),
        }
    }

    pub fn scale(&self) -> f64 {
        (self.scale_bits as f64).exp2()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelinMethod {
    /// Power-basis `RLev(S²)` at the top modulus, reduced per level.
    Gadget,
    /// One `RLWE(g·S²)` at `g·q_L` with `g = q_L²`, divided by `g` after the product.
    BigModulus,
}

#[derive(Clone, Debug)]
pub struct CkksContext {
    pub params: CkksParams,
    /// `w_0, …, w_L`.
    pub primes: Vec<u64>,
    /// `levels[ℓ]` works modulo `q_ℓ = w_0⋯w_ℓ`.
    pub levels: Vec<GlweParams>,
    /// Rings modulo `g·q_ℓ`.
    pub big_rings: Vec<Arc<RingParams>>,
    pub g: BigUint,
    pub encoder: CkksEncoder,
    pub ks_gadget: GadgetSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CkksCiphertext {
    pub ct: GlweCiphertext,
    pub level: usize,
    pub scale: f64,
}

#[derive(Clone, Debug)]
pub struct CkksEvalKeys {
    pub relin: GlevCiphertext,
    /// `RLWE_{g·q_L}(g·S²)`.
    pub evk: GlweCiphertext,
    /// `RLWE_{g·q_L}(g·S(X^k))` per Galois exponent `k`.
    pub galois: BTreeMap<u64, GlweCiphertext>,
}

#[derive(Clone, Debug)]
pub struct CkksKeys {
    pub secret: GlweSecretKey,
    pub public: glwe::PublicKey,
    pub eval: CkksEvalKeys,
}

impl CkksContext {
    pub fn new(params: CkksParams) -> Result<Self> {
        let n = params.n;
        let m = 2 * n as u64;
        if params.base_bits < params.scale_bits + 10 || params.base_bits > 62 || params.scale_bits > 40 {
            return Err(FheError::ParamMismatch("base prime must exceed the scale by 10 bits".into()));
        }
        let mut primes = vec![prime_near(1u64 << params.base_bits, m, &[])?];
        let mut scale_primes: Vec<u64> = Vec::new();
        for _ in 0..params.levels {
            scale_primes.push(prime_near(1u64 << params.scale_bits, m, &scale_primes)?);
        }
        // Nearest primes on top: those are rescaled away first.
        primes.extend(scale_primes.iter().rev());
        let mut levels = Vec::new();
        let mut q = BigUint::one();
        for &w in &primes {
            q *= w;
            let ring = RingParams::new(n, q.clone())?;
            levels.push(GlweParams::with_delta(1, ring, 2, BigUint::one(), SignConvention::Minus, params.sigma)?);
        }
        let g = &q * &q;
        let big_rings = levels.iter().map(|l| RingParams::new(n, &g * l.q())).collect::<Result<_>>()?;
        let ks_gadget = GadgetSpec::power_basis(1 << params.ks_base_log, q)?;
        Ok(Self { encoder: CkksEncoder::new(n)?, params, primes, levels, big_rings, g, ks_gadget })
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn slots(&self) -> usize {
        self.params.n / 2
    }

    pub fn top(&self) -> usize {
        self.params.levels
    }

    pub fn scale(&self) -> f64 {
        self.params.scale()
    }

    pub fn q(&self, level: usize) -> &BigUint {
        self.levels[level].q()
    }

    fn ring(&self, level: usize) -> &Arc<RingParams> {
        &self.levels[level].ring
    }

    pub fn keygen(&self, seed: &Seed) -> Result<CkksKeys> {
        let top = &self.levels[self.top()];
        let (secret, public) = glwe::keygen(top, seed);
        let eseed = seed.derive("eval");
        let s = &secret.polys[0];
        let s2 = s.mul(s);
        let relin = glwe::glev_encrypt(&s2, &secret, top, &self.ks_gadget, &eseed.derive("relin"))?;
        let s2_big = s2.lift_to(&self.big_rings[self.top()]);
        let evk = self.big_key(&secret, &s2_big, &eseed.derive("evk"));
        let mut eval = CkksEvalKeys { relin, evk, galois: BTreeMap::new() };
        let mut step = 1;
        while step < self.slots() {
            self.ensure_rotation(&mut eval, &secret, step, &eseed)?;
            step *= 2;
        }
        self.ensure_galois(&mut eval, &secret, self.conj_exponent(), &eseed)?;
        Ok(CkksKeys { secret, public, eval })
    }

    pub fn conj_exponent(&self) -> u64 {
        2 * self.n() as u64 - 1
    }

    /// `RLWE_{g·q_L}(g·P)` for a small `P` already in the big ring.
    fn big_key(&self, sk: &GlweSecretKey, p: &RingPoly, seed: &Seed) -> GlweCiphertext {
        let big_ring = &self.big_rings[self.top()];
        let big_sk = sk.lift_to(big_ring);
        let big_params = self.levels[self.top()].with_ring(big_ring.clone());
        glwe::encrypt_raw(&p.scalar_mul(&BigInt::from(self.g.clone())), &big_sk, &big_params, seed)
    }

    /// `⌊P·key/g⌉` at `level`: an encryption of `P·X` when `key` encrypts `g·X`.
    fn big_switch(&self, p: &RingPoly, key: &GlweCiphertext, level: usize) -> GlweCiphertext {
        let big = &self.big_rings[level];
        let key = key.reduce_to(big);
        let p = p.lift_to(big);
        key.map(|k| k.mul(&p).scale_round_to(self.ring(level), &BigUint::one(), &self.g))
    }

    pub fn ensure_galois(&self, keys: &mut CkksEvalKeys, sk: &GlweSecretKey, k: u64, seed: &Seed) -> Result<()> {
        if !keys.galois.contains_key(&k) {
            let sk_k = sk.polys[0].apply_automorphism(k as i64)?.lift_to(&self.big_rings[self.top()]);
            keys.galois.insert(k, self.big_key(sk, &sk_k, &seed.derive_index("galois", k)));
        }
        Ok(())
    }

    pub fn ensure_rotation(&self, keys: &mut CkksEvalKeys, sk: &GlweSecretKey, h: usize, seed: &Seed) -> Result<()> {
        self.ensure_galois(keys, sk, j_exp(h, self.n()), seed)
    }

    /// Plaintext polynomial `⌊Δ·m⌉` at `level`.
    pub fn encode(&self, z: &[Complex64], scale: f64, level: usize) -> Result<RingPoly> {
        let coeffs = self.encoder.encode(z, scale)?;
        let half = self.q(level) / 2u32;
        if coeffs.iter().any(|c| c.magnitude() >= &half) {
            return Err(FheError::ScaleOverflow);
        }
        Ok(RingPoly::from_bigints(self.ring(level), &coeffs))
    }

    pub fn encrypt(&self, z: &[Complex64], sk: &GlweSecretKey, seed: &Seed) -> Result<CkksCiphertext> {
        let level = self.top();
        let pt = self.encode(z, self.scale(), level)?;
        let ct = glwe::encrypt_raw(&pt, sk, &self.levels[level], seed);
        Ok(CkksCiphertext { ct, level, scale: self.scale() })
    }

    pub fn encrypt_pk(&self, z: &[Complex64], pk: &glwe::PublicKey, seed: &Seed) -> Result<CkksCiphertext> {
        let level = self.top();
        let pt = self.encode(z, self.scale(), level)?;
        let params = &self.levels[level];
        let ct = glwe::pk_encrypt(&RingPoly::zero(&params.ring), pk, params, seed).add_plain(&pt)?;
        Ok(CkksCiphertext { ct, level, scale: self.scale() })
    }

    pub fn decrypt(&self, c: &CkksCiphertext, sk: &GlweSecretKey) -> Result<Vec<Complex64>> {
        let ph = glwe::phase(&c.ct, sk, SignConvention::Minus)?;
        Ok(self.encoder.decode(&ph.centered(), c.scale))
    }

    pub fn decrypt_full(&self, c: &CkksCiphertext, sk: &GlweSecretKey) -> Result<Vec<Complex64>> {
        let ph = glwe::phase(&c.ct, sk, SignConvention::Minus)?;
        Ok(self.encoder.decode_full(&ph.centered(), c.scale))
    }

    fn check_pair(&self, a: &CkksCiphertext, b: &CkksCiphertext) -> Result<()> {
        if a.level != b.level {
            return Err(FheError::ParamMismatch(format!("levels {} and {}", a.level, b.level)));
        }
        if ((a.scale - b.scale) / a.scale).abs() > 1e-9 {
            return Err(FheError::ParamMismatch(format!("scales {} and {}", a.scale, b.scale)));
        }
        Ok(())
    }

    pub fn add(&self, a: &CkksCiphertext, b: &CkksCiphertext) -> Result<CkksCiphertext> {
        self.check_pair(a, b)?;
        Ok(CkksCiphertext { ct: a.ct.add(&b.ct)?, ..a.clone() })
    }

    pub fn sub(&self, a: &CkksCiphertext, b: &CkksCiphertext) -> Result<CkksCiphertext> {
        self.check_pair(a, b)?;
        Ok(CkksCiphertext { ct: a.ct.sub(&b.ct)?, ..a.clone() })
    }

    pub fn add_plain(&self, a: &CkksCiphertext, z: &[Complex64]) -> Result<CkksCiphertext> {
        let pt = self.encode(z, a.scale, a.level)?;
        Ok(CkksCiphertext { ct: a.ct.add_plain(&pt)?, ..a.clone() })
    }

    /// Slot-wise product with a plaintext encoded at `Δ`; the scale multiplies.
    pub fn mul_plain(&self, a: &CkksCiphertext, z: &[Complex64]) -> Result<CkksCiphertext> {
        let pt = self.encode(z, self.scale(), a.level)?;
        self.scaled_result(a.ct.mul_plain(&pt)?, a.level, a.scale * self.scale())
    }

    pub fn mul_const(&self, a: &CkksCiphertext, c: Complex64) -> Result<CkksCiphertext> {
        self.mul_plain(a, &vec![c; self.slots()])
    }

    fn scaled_result(&self, ct: GlweCiphertext, level: usize, scale: f64) -> Result<CkksCiphertext> {
        if scale * 2.0 >= self.q(level).to_f64().unwrap_or(f64::INFINITY) {
            return Err(FheError::ScaleOverflow);
        }
        Ok(CkksCiphertext { ct, level, scale })
    }

    /// Tensor and relinearize without rescaling.
    pub fn mul(&self, a: &CkksCiphertext, b: &CkksCiphertext, eval: &CkksEvalKeys, method: RelinMethod) -> Result<CkksCiphertext> {
        if a.level != b.level {
            return Err(FheError::ParamMismatch(format!("levels {} and {}", a.level, b.level)));
        }
        let scale = a.scale * b.scale;
        if scale * 2.0 >= self.q(a.level).to_f64().unwrap_or(f64::INFINITY) {
            return Err(FheError::ScaleOverflow);
        }
        let d = glwe::tensor(&a.ct, &b.ct)?;
        let ct = self.relinearize(&d, a.level, eval, method)?;
        self.scaled_result(ct, a.level, scale)
    }

    fn relinearize(&self, d: &[RingPoly; 3], level: usize, eval: &CkksEvalKeys, method: RelinMethod) -> Result<GlweCiphertext> {
        let ring = self.ring(level);
        match method {
            RelinMethod::Gadget => glwe::relinearize(d, &eval.relin.reduce_to(ring)),
            RelinMethod::BigModulus => {
                let c = self.big_switch(&d[2], &eval.evk, level);
                GlweCiphertext { masks: vec![d[1].clone()], body: d[0].clone(), mask_seed: None }.add(&c)
            }
        }
    }

    /// Divide by `w_ℓ` and drop to level `ℓ − 1`.
    pub fn rescale(&self, a: &CkksCiphertext) -> Result<CkksCiphertext> {
        if a.level == 0 {
            return Err(FheError::LevelExhausted);
        }
        let w = BigUint::from(self.primes[a.level]);
        let target = self.ring(a.level - 1);
        let ct = a.ct.map(|p| p.scale_round_to(target, &BigUint::one(), &w));
        Ok(CkksCiphertext { ct, level: a.level - 1, scale: a.scale / self.primes[a.level] as f64 })
    }

    pub fn mul_rescale(&self, a: &CkksCiphertext, b: &CkksCiphertext, eval: &CkksEvalKeys) -> Result<CkksCiphertext> {
        self.rescale(&self.mul(a, b, eval, RelinMethod::Gadget)?)
    }

    /// Reduce to a lower level without touching the scale.
    pub fn mod_drop(&self, a: &CkksCiphertext, level: usize) -> Result<CkksCiphertext> {
        if level > a.level {
            return Err(FheError::ParamMismatch(format!("cannot raise level {} to {level}", a.level)));
        }
        Ok(CkksCiphertext { ct: a.ct.reduce_to(self.ring(level)), level, scale: a.scale })
    }

    /// `(A(X^k), B(X^k))`, then `(0, B(X^k)) + ⌊A(X^k)·key_k/g⌉`.
    pub fn apply_galois(&self, a: &CkksCiphertext, k: u64, eval: &CkksEvalKeys) -> Result<CkksCiphertext> {
        let key = eval.galois.get(&k).ok_or(FheError::MissingGaloisKey(k))?;
        let auto = a.ct.apply_automorphism(k as i64)?;
        let switched = self.big_switch(&auto.masks[0], key, a.level);
        let ct = GlweCiphertext { masks: switched.masks, body: switched.body.add(&auto.body), mask_seed: None };
        Ok(CkksCiphertext { ct, ..a.clone() })
    }

    /// Left rotation by `h`: slot `j` receives slot `j + h`.
    pub fn rotate(&self, a: &CkksCiphertext, h: usize, eval: &CkksEvalKeys) -> Result<CkksCiphertext> {
        let h = h % self.slots();
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

    pub fn conjugate(&self, a: &CkksCiphertext, eval: &CkksEvalKeys) -> Result<CkksCiphertext> {
        self.apply_galois(a, self.conj_exponent(), eval)
    }

    /// `M·z` for an `n/2 × n/2` complex matrix (diagonal method, one rescale).
    pub fn linear_transform(&self, a: &CkksCiphertext, mat: &[Vec<Complex64>], eval: &CkksEvalKeys) -> Result<CkksCiphertext> {
        let s = self.slots();
        if mat.len() != s || mat.iter().any(|r| r.len() != s) {
            return Err(FheError::LengthMismatch { expected: s, got: mat.len() });
        }
        let mut acc: Option<CkksCiphertext> = None;
        let mut rotated = a.clone();
        for i in 0..s {
            if i > 0 {
                rotated = self.rotate(&rotated, 1, eval)?;
            }
            let diag: Vec<Complex64> = (0..s).map(|j| mat[j][(j + i) % s]).collect();
            if diag.iter().all(|c| c.norm() == 0.0) {
                continue;
            }
            let term = self.mul_plain(&rotated, &diag)?;
            acc = Some(match acc {
                None => term,
                Some(x) => self.add(&x, &term)?,
            });
        }
        let acc = match acc {
            Some(x) => x,
            None => self.mul_const(a, Complex64::new(0.0, 0.0))?,
        };
        self.rescale(&acc)
    }

    /// `A·z + B·z̄`, as used by the coefficient/slot transforms.
    pub fn linear_transform_conj(
        &self,
        a: &CkksCiphertext,
        pair: &(Vec<Vec<Complex64>>, Vec<Vec<Complex64>>),
        eval: &CkksEvalKeys,
    ) -> Result<CkksCiphertext> {
        let x = self.linear_transform(a, &pair.0, eval)?;
        let y = self.linear_transform(&self.conjugate(a, eval)?, &pair.1, eval)?;
        self.add(&x, &y)
    }
}

/// `(A, B)` with `coeffs_lo + i·coeffs_hi = A·z + B·z̄`, where the coefficients are those of the encoding of `z`.
pub fn coeff_to_slot_matrices(enc: &CkksEncoder) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
    let (n, s) = (enc.n, enc.slots());
    // Column c of the n × n encoding map applied to (z, z̄).
    let col = |c: usize| -> Vec<Complex64> {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[c] = Complex64::new(1.0, 0.0);
        enc.matrices.encode_full(&e)
    };
    let cols: Vec<Vec<Complex64>> = (0..n).map(col).collect();
    let i = Complex64::new(0.0, 1.0);
    let entry = |r: usize, c: usize| cols[c][r] + i * cols[c][r + s];
    let a = (0..s).map(|r| (0..s).map(|c| entry(r, c)).collect()).collect();
    let b = (0..s).map(|r| (0..s).map(|c| entry(r, c + s)).collect()).collect();
    (a, b)
}

/// Inverse of [`coeff_to_slot_matrices`]: from `coeffs_lo + i·coeffs_hi` back to the slots.
pub fn slot_to_coeff_matrices(enc: &CkksEncoder) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
    let s = enc.slots();
    let w = &enc.matrices.w_hat_star;
    let half = Complex64::new(0.5, 0.0);
    let neg_half_i = Complex64::new(0.0, -0.5);
    let a = (0..s).map(|r| (0..s).map(|c| w[r][c] * half + w[r][c + s] * neg_half_i).collect()).collect();
    let b = (0..s).map(|r| (0..s).map(|c| w[r][c] * half - w[r][c + s] * neg_half_i).collect()).collect();
    (a, b)
}

pub fn apply_pair(pair: &(Vec<Vec<Complex64>>, Vec<Vec<Complex64>>), z: &[Complex64]) -> Vec<Complex64> {
    pair.0
        .iter()
        .zip(&pair.1)
        .map(|(ra, rb)| {
            ra.iter().zip(z).map(|(x, y)| x * y).sum::<Complex64>()
                + rb.iter().zip(z).map(|(x, y)| x * y.conj()).sum::<Complex64>()
        })
        .collect()
}

/// Taylor coefficients of `exp(2πi·x / (2^r·q0))` up to degree `d0`.
pub fn eval_exp_coeffs(d0: usize, r: u32, q0: f64) -> Vec<Complex64> {
    let a = Complex64::new(0.0, 2.0 * PI / (r as f64).exp2() / q0);
    let mut out = Vec::with_capacity(d0 + 1);
    let mut term = Complex64::new(1.0, 0.0);
    for j in 0..=d0 {
        if j > 0 {
            term = term * a / j as f64;
        }
        out.push(term);
    }
    out
}

/// Cleartext model of the modular reduction step: Taylor polynomial, `r` squarings,
/// then `(q0/2π)·(−i/2)(w − w̄)`, which approximates `x mod q0` for `x` near a multiple of `q0`.
pub fn eval_exp_sine(x: f64, d0: usize, r: u32, q0: f64) -> f64 {
    let coeffs = eval_exp_coeffs(d0, r, q0);
    let xc = Complex64::new(x, 0.0);
    let mut w = coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * xc + c);
    for _ in 0..r {
        w = w * w;
    }
    let sine = Complex64::new(0.0, -0.5) * (w - w.conj());
    sine.re * q0 / (2.0 * PI)
}

pub fn max_abs_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rand_slots(rng: &mut impl Rng, s: usize, lo: f64, hi: f64) -> Vec<Complex64> {
        (0..s)
            .map(|_| Complex64::from_polar(rng.random_range(lo..hi), rng.random_range(0.0..2.0 * PI)))
            .collect()
    }

    #[test]
    fn encode_example_n4() {
        let enc = CkksEncoder::new(4).unwrap();
        let z = [c(1.1, 4.3), c(3.5, -1.4)];
        let m = enc.encode(&z, 1024.0).unwrap();
        assert_eq!(m, [2355, 1195, 1485, 2933].map(BigInt::from).to_vec());
        assert!(max_abs_error(&enc.decode(&m, 1024.0), &z) <= 1.5e-3);
    }

    #[test]
    fn encode_decode_error_scales_with_delta() {
        let enc = CkksEncoder::new(64).unwrap();
        let mut rng = Seed::from_u64(1).rng();
        let z = rand_slots(&mut rng, 32, 0.0, 10.0);
        for bits in [10, 20, 30] {
            let s = (bits as f64).exp2();
            let err = max_abs_error(&enc.decode(&enc.encode(&z, s).unwrap(), s), &z);
            // Rounding error of n coefficients, each at most 1/2.
            assert!(err <= 64.0 * 0.5 / s, "Δ = 2^{bits}: {err}");
        }
    }

    #[test]
    fn sparse_packing() {
        let enc = CkksEncoder::new(32).unwrap();
        let z = [c(1.5, -0.5), c(-2.0, 0.25), c(0.0, 1.0), c(3.0, 0.0)];
        let m = enc.encode_sparse(&z, 2f64.powi(20)).unwrap();
        for (i, x) in m.iter().enumerate() {
            if i % 4 != 0 {
                assert_eq!(x.bits(), 0, "coefficient {i}");
            }
        }
        let back = enc.decode_sparse(&m, 2f64.powi(20), 4).unwrap();
        assert!(max_abs_error(&back, &z) < 1e-5);
        assert!(matches!(enc.encode_sparse(&z[..3], 1.0), Err(FheError::BadSubring(_))));
        let dense = enc.encode(&vec![c(1.0, 2.0); 16].iter().enumerate().map(|(i, x)| x * i as f64).collect::<Vec<_>>(), 1e6).unwrap();
        assert!(matches!(enc.decode_sparse(&dense, 1e6, 4), Err(FheError::BadSubring(_))));
    }

    #[test]
    fn chain_shape() {
        let ctx = CkksContext::new(CkksParams::desk()).unwrap();
        assert_eq!(ctx.primes.len(), 5);
        assert!(ctx.primes[0] >= 1 << 30);
        for &w in &ctx.primes[1..] {
            assert_eq!(w % 128, 1);
            assert!(((w as f64).log2() - 20.0).abs() < 0.01);
        }
        let mut sorted = ctx.primes.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), 5);
    }

    #[test]
    fn encrypt_add_rotate_conjugate() {
        let ctx = CkksContext::new(CkksParams::desk()).unwrap();
        let keys = ctx.keygen(&Seed::from_u64(2)).unwrap();
        let mut rng = Seed::from_u64(3).rng();
        let (a, b) = (rand_slots(&mut rng, 32, 0.0, 4.0), rand_slots(&mut rng, 32, 0.0, 4.0));
        let ca = ctx.encrypt(&a, &keys.secret, &Seed::from_u64(4)).unwrap();
        let cb = ctx.encrypt_pk(&b, &keys.public, &Seed::from_u64(5)).unwrap();
        assert!(max_abs_error(&ctx.decrypt(&ca, &keys.secret).unwrap(), &a) < 1e-4);
        assert!(max_abs_error(&ctx.decrypt(&cb, &keys.secret).unwrap(), &b) < 1e-3);
        let sum: Vec<_> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        assert!(max_abs_error(&ctx.decrypt(&ctx.add(&ca, &cb).unwrap(), &keys.secret).unwrap(), &sum) < 1e-3);
        for h in [1, 5, 31] {
            let r = ctx.decrypt(&ctx.rotate(&ca, h, &keys.eval).unwrap(), &keys.secret).unwrap();
            let want: Vec<_> = (0..32).map(|j| a[(j + h) % 32]).collect();
            assert!(max_abs_error(&r, &want) < 1e-3, "h = {h}");
        }
        let conj: Vec<_> = a.iter().map(|x| x.conj()).collect();
        assert!(max_abs_error(&ctx.decrypt(&ctx.conjugate(&ca, &keys.eval).unwrap(), &keys.secret).unwrap(), &conj) < 1e-3);
        let shifted: Vec<_> = a.iter().map(|x| x + c(0.5, -1.0)).collect();
        let pa = ctx.add_plain(&ca, &vec![c(0.5, -1.0); 32]).unwrap();
        assert!(max_abs_error(&ctx.decrypt(&pa, &keys.secret).unwrap(), &shifted) < 1e-4);
    }

    #[test]
    fn multiply_both_relinearizations() {
        let ctx = CkksContext::new(CkksParams::desk()).unwrap();
        let keys = ctx.keygen(&Seed::from_u64(6)).unwrap();
        let mut rng = Seed::from_u64(7).rng();
        for i in 0..10 {
            let (a, b) = (rand_slots(&mut rng, 32, 0.5, 2.0), rand_slots(&mut rng, 32, 0.5, 2.0));
            let ca = ctx.encrypt(&a, &keys.secret, &Seed::from_u64(100 + i)).unwrap();
            let cb = ctx.encrypt(&b, &keys.secret, &Seed::from_u64(200 + i)).unwrap();
            let want: Vec<_> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
            for method in [RelinMethod::Gadget, RelinMethod::BigModulus] {
                let p = ctx.rescale(&ctx.mul(&ca, &cb, &keys.eval, method).unwrap()).unwrap();
                assert_eq!(p.level, ctx.top() - 1);
                let err = max_abs_error(&ctx.decrypt(&p, &keys.secret).unwrap(), &want);
                assert!(err < 1e-3, "{method:?}: {err}");
            }
            let pm = ctx.rescale(&ctx.mul_plain(&ca, &b).unwrap()).unwrap();
            assert!(max_abs_error(&ctx.decrypt(&pm, &keys.secret).unwrap(), &want) < 1e-3);
        }
    }

    #[test]
    fn level_and_scale_errors() {
        let ctx = CkksContext::new(CkksParams::toy()).unwrap();
        let keys = ctx.keygen(&Seed::from_u64(8)).unwrap();
        let z = vec![c(0.5, 0.5); 4];
        let ct = ctx.encrypt(&z, &keys.secret, &Seed::from_u64(9)).unwrap();
        let low = ctx.mod_drop(&ct, 0).unwrap();
        assert!(max_abs_error(&ctx.decrypt(&low, &keys.secret).unwrap(), &z) < 1e-4);
        assert!(matches!(ctx.rescale(&low), Err(FheError::LevelExhausted)));
        // q0 ≈ 2^30 cannot hold a scale of 2^40.
        assert!(matches!(ctx.mul(&low, &low, &keys.eval, RelinMethod::Gadget), Err(FheError::ScaleOverflow)));
        assert!(ctx.add(&ct, &low).is_err());
        assert!(matches!(
            ctx.encrypt(&vec![c(1e20, 0.0); 4], &keys.secret, &Seed::from_u64(1)),
            Err(FheError::ScaleOverflow)
        ));
        let mut eval = keys.eval.clone();
        eval.galois.clear();
        assert!(matches!(ctx.rotate(&ct, 1, &eval), Err(FheError::MissingGaloisKey(_))));
    }

    #[test]
    fn depth_three_product() {
        let ctx = CkksContext::new(CkksParams::desk()).unwrap();
        let keys = ctx.keygen(&Seed::from_u64(10)).unwrap();
        let mut rng = Seed::from_u64(11).rng();
        for i in 0..5 {
            let xs: Vec<Vec<Complex64>> = (0..8).map(|_| rand_slots(&mut rng, 32, 0.5, 1.5)).collect();
            let mut cs: Vec<CkksCiphertext> = xs
                .iter()
                .enumerate()
                .map(|(k, x)| ctx.encrypt(x, &keys.secret, &Seed::from_u64(1000 + 8 * i + k as u64)).unwrap())
                .collect();
            while cs.len() > 1 {
                cs = cs.chunks(2).map(|p| ctx.mul_rescale(&p[0], &p[1], &keys.eval).unwrap()).collect();
            }
            let want: Vec<Complex64> = (0..32).map(|j| xs.iter().map(|x| x[j]).product()).collect();
            let got = ctx.decrypt(&cs[0], &keys.secret).unwrap();
            let rel = got.iter().zip(&want).map(|(g, w)| (g - w).norm() / w.norm()).fold(0.0, f64::max);
            assert!(rel < 1e-2, "relative error {rel}");
        }
    }

    #[test]
    fn rotate_example_n4() {
        let ctx = CkksContext::new(CkksParams { n: 4, ..CkksParams::toy() }).unwrap();
        let keys = ctx.keygen(&Seed::from_u64(20)).unwrap();
        let z = [c(1.1, 4.3), c(3.5, -1.4)];
        let ct = ctx.encrypt(&z, &keys.secret, &Seed::from_u64(21)).unwrap();
        let r = ctx.decrypt(&ctx.rotate(&ct, 1, &keys.eval).unwrap(), &keys.secret).unwrap();
        assert!(max_abs_error(&r, &[z[1], z[0]]) < 1e-3, "{r:?}");
        let cc = ctx.conjugate(&ctx.conjugate(&ct, &keys.eval).unwrap(), &keys.eval).unwrap();
        assert!(max_abs_error(&ctx.decrypt(&cc, &keys.secret).unwrap(), &z) < 1e-3);
    }

    #[test]
    fn rescale_scale_and_hermitian() {
        let ctx = CkksContext::new(CkksParams::desk()).unwrap();
        let keys = ctx.keygen(&Seed::from_u64(22)).unwrap();
        let mut rng = Seed::from_u64(23).rng();
        let fresh = ctx.encrypt(&rand_slots(&mut rng, 32, 0.5, 1.5), &keys.secret, &Seed::from_u64(24)).unwrap();
        let mut ct = fresh.clone();
        while ct.level > 0 {
            let full = ctx.decrypt_full(&ct, &keys.secret).unwrap();
            let asym = (0..32).map(|j| (full[j] - full[j + 32].conj()).norm()).fold(0.0, f64::max);
            assert!(asym < 1e-6, "level {}: {asym}", ct.level);
            ct = ctx.mul_rescale(&ct, &ct, &keys.eval).unwrap();
        }
        for level in 1..=4 {
            let w = ctx.primes[level] as f64;
            let x = ctx.mod_drop(&fresh, level).unwrap();
            let r = ctx.mul_rescale(&x, &x, &keys.eval).unwrap();
            assert_eq!(r.scale, ctx.scale() * ctx.scale() / w);
            // Only three primes = 1 mod 128 lie within 2^10 of 2^20.
            if (w - ctx.scale()).abs() < 1024.0 {
                assert!((r.scale / ctx.scale() - 1.0).abs() < 2f64.powi(-10), "level {level}: {}", r.scale);
            }
        }
        // Two rescales divide by the product of the dropped primes.
        let x = rand_slots(&mut rng, 32, 0.5, 1.5);
        let a = ctx.encrypt(&x, &keys.secret, &Seed::from_u64(25)).unwrap();
        let b = ctx.mul_const(&a, c(1.0, 0.0)).unwrap();
        let b = ctx.mul_const(&ctx.rescale(&b).unwrap(), c(1.0, 0.0)).unwrap();
        let twice = ctx.rescale(&b).unwrap();
        let w = (ctx.primes[4] as f64) * (ctx.primes[3] as f64);
        assert!((twice.scale - ctx.scale().powi(3) / w).abs() < 1e-6);
        assert!(max_abs_error(&ctx.decrypt(&twice, &keys.secret).unwrap(), &x) < 1e-2);
    }

    #[test]
    fn eval_exp_desk_settings() {
        let q0 = 2f64.powi(20);
        assert_eq!(eval_exp_sine(0.0, 7, 6, q0), 0.0);
        for k in -4i32..=4 {
            assert!(eval_exp_sine(q0 * k as f64, 7, 6, q0).abs() < q0 * 1e-4, "k = {k}");
        }
        for x in [1.0, -250.0, 4000.0, -q0 / 100.0, q0 / 100.0] {
            let got = eval_exp_sine(x, 7, 6, q0);
            assert!(((got - x) / x).abs() < 1e-3, "x = {x}: {got}");
        }
    }

    #[test]
    fn coeff_slot_matrices_invert() {
        let enc = CkksEncoder::new(16).unwrap();
        let mut rng = Seed::from_u64(12).rng();
        let z = rand_slots(&mut rng, 8, 0.0, 3.0);
        let cts = coeff_to_slot_matrices(&enc);
        let stc = slot_to_coeff_matrices(&enc);
        let packed = apply_pair(&cts, &z);
        let m = enc.embed_inverse(&z).unwrap();
        for j in 0..8 {
            assert!((packed[j] - c(m[j], m[j + 8])).norm() < 1e-9);
        }
        assert!(max_abs_error(&apply_pair(&stc, &packed), &z) < 1e-9);
    }

    #[test]
    fn homomorphic_slot_to_coeff() {
        let ctx = CkksContext::new(CkksParams { n: 16, ..CkksParams::desk() }).unwrap();
        let keys = ctx.keygen(&Seed::from_u64(13)).unwrap();
        let mut rng = Seed::from_u64(14).rng();
        let z = rand_slots(&mut rng, 8, 0.0, 1.0);
        let packed = apply_pair(&coeff_to_slot_matrices(&ctx.encoder), &z);
        let ct = ctx.encrypt(&packed, &keys.secret, &Seed::from_u64(15)).unwrap();
        let out = ctx.linear_transform_conj(&ct, &slot_to_coeff_matrices(&ctx.encoder), &keys.eval).unwrap();
        assert!(max_abs_error(&ctx.decrypt(&out, &keys.secret).unwrap(), &z) < 1e-2);
        let back = ctx.linear_transform_conj(&out, &coeff_to_slot_matrices(&ctx.encoder), &keys.eval).unwrap();
        assert!(max_abs_error(&ctx.decrypt(&back, &keys.secret).unwrap(), &packed) < 1e-2);
    }

    #[test]
    fn eval_exp_reduces_mod_q0() {
        let q0 = 2f64.powi(10);
        let coeffs = eval_exp_coeffs(3, 2, q0);
        assert!((coeffs[1] - c(0.0, 2.0 * PI / 4.0 / q0)).norm() < 1e-15);
        assert!((coeffs[2] - c(-(2.0 * PI / 4.0 / q0).powi(2) / 2.0, 0.0)).norm() < 1e-15);
        for k in -10i32..=10 {
            for m in [-8.0, -1.0, 0.0, 0.5, 3.0, 7.25] {
                let x = m + k as f64 * q0;
                let got = eval_exp_sine(x, 12, 6, q0);
                let sine = q0 / (2.0 * PI) * (2.0 * PI * x / q0).sin();
                assert!((got - sine).abs() < 1e-4, "x = {x}: {got} vs {sine}");
                // The sine itself is within (2π)²·|m|³/(6·q0²) of m.
                let bound = (2.0 * PI).powi(2) * f64::abs(m).powi(3) / (6.0 * q0 * q0) + 1e-4;
                assert!((got - m).abs() < bound, "x = {x}: {got}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn encode_roundtrip(re in proptest::collection::vec(-100.0f64..100.0, 8), im in proptest::collection::vec(-100.0f64..100.0, 8)) {
            let enc = CkksEncoder::new(16).unwrap();
            let z: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| c(a, b)).collect();
            let s = 2f64.powi(30);
            prop_assert!(max_abs_error(&enc.decode(&enc.encode(&z, s).unwrap(), s), &z) < 16.0 / s);
        }
    }
}
