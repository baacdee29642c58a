//! TFHE over power-of-two moduli: LWE algebra, LUT polynomials, blind rotation,
//! sample extraction, bootstrapping, gates and tensor multiplication.
//!
//! The accumulator is RLWE (`k' = 1`). Bootstrapping-key GGSWs are held in FFT form.

use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, RngCore};

use crate::error::{FheError, Result};
use crate::poly::NoiseSampler;
use crate::prng::{Prng, Seed};
use crate::transform::{negacyclic_fft, NegacyclicFft};

/// Arithmetic mod `2^log_q` on `u64` words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Torus {
    pub log_q: u32,
    mask: u64,
}

impl Torus {
    pub fn new(log_q: u32) -> Result<Self> {
        if log_q == 0 || log_q > 63 {
            return Err(FheError::BadModulus(format!("2^{log_q}")));
        }
        Ok(Self { log_q, mask: (1u64 << log_q) - 1 })
    }

    pub fn q(&self) -> u64 {
        1 << self.log_q
    }

    pub fn reduce(&self, x: u64) -> u64 {
        x & self.mask
    }

    pub fn from_i64(&self, x: i64) -> u64 {
        (x as u64) & self.mask
    }

    pub fn centered(&self, x: u64) -> i64 {
        let x = x & self.mask;
        if x >= 1 << (self.log_q - 1) {
            x as i64 - (1i64 << self.log_q)
        } else {
            x as i64
        }
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        a.wrapping_add(b) & self.mask
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        a.wrapping_sub(b) & self.mask
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a.wrapping_mul(b) & self.mask
    }

    /// `⌈x·2^target/q⌋ mod 2^target`.
    pub fn switch_to(&self, x: u64, target: u32) -> u64 {
        let x = x & self.mask;
        if target >= self.log_q {
            return x << (target - self.log_q);
        }
        let shift = self.log_q - target;
        ((x + (1 << (shift - 1))) >> shift) & ((1u64 << target) - 1)
    }

    pub fn uniform<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.next_u64() & self.mask
    }
}

/// Balanced digits of `⌈x·β^ℓ/q⌋` in `(−β/2, β/2]`, most significant first.
pub fn decompose_u64(x: u64, log_q: u32, base_log: u32, out: &mut [i64]) {
    let levels = out.len() as u32;
    let total = base_log * levels;
    debug_assert!(total <= log_q);
    let shift = log_q - total;
    let x = x & if log_q == 64 { u64::MAX } else { (1u64 << log_q) - 1 };
    let mut y = if shift == 0 { x } else { (x >> shift) + ((x >> (shift - 1)) & 1) };
    let beta = 1i64 << base_log;
    let half = beta / 2;
    let dmask = (beta - 1) as u64;
    for l in (0..out.len()).rev() {
        let mut d = (y & dmask) as i64;
        y >>= base_log;
        if d > half {
            d -= beta;
            y += 1;
        }
        out[l] = d;
    }
}

/// `g_l = q/β^(l+1)`.
pub fn gadget_u64(log_q: u32, base_log: u32, l: usize) -> u64 {
    1u64 << (log_q - base_log * (l as u32 + 1))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TfheParams {
    /// Ring degree of the accumulator and LUT.
    pub n: usize,
    /// LWE dimension.
    pub k: usize,
    pub log_q: u32,
    pub t: u64,
    pub bk_base_log: u32,
    pub bk_levels: usize,
    pub ks_base_log: u32,
    pub ks_levels: usize,
    pub lwe_sigma: f64,
    pub glwe_sigma: f64,
}

impl TfheParams {
    /// `n = 16, t = 8, q = 64, k = 8`, noiseless, exact gadgets.
    pub fn toy() -> Self {
        Self {
            n: 16,
            k: 8,
            log_q: 6,
            t: 8,
            bk_base_log: 2,
            bk_levels: 3,
            ks_base_log: 2,
            ks_levels: 3,
            lwe_sigma: 0.0,
            glwe_sigma: 0.0,
        }
    }

    /// `q = 32, t = 8, n = 8` gate table setting, noiseless.
    pub fn gate_toy() -> Self {
        Self {
            n: 8,
            k: 8,
            log_q: 5,
            t: 8,
            bk_base_log: 1,
            bk_levels: 5,
            ks_base_log: 1,
            ks_levels: 5,
            lwe_sigma: 0.0,
            glwe_sigma: 0.0,
        }
    }

    /// Reduced dimensions with real noise, for statistics in tests.
    pub fn small() -> Self {
        Self {
            n: 256,
            k: 64,
            log_q: 32,
            t: 8,
            bk_base_log: 7,
            bk_levels: 3,
            ks_base_log: 4,
            ks_levels: 5,
            lwe_sigma: 4096.0,
            glwe_sigma: 128.0,
        }
    }

    /// `n = 1024, k = 630, q = 2^32`.
    pub fn desk() -> Self {
        Self {
            n: 1024,
            k: 630,
            log_q: 32,
            t: 8,
            bk_base_log: 7,
            bk_levels: 3,
            ks_base_log: 4,
            ks_levels: 5,
            lwe_sigma: 131072.0,
            glwe_sigma: 128.0,
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "toy" => Ok(Self::toy()),
            "gate-toy" => Ok(Self::gate_toy()),
            "small" => Ok(Self::small()),
            "desk" => Ok(Self::desk()),
            other => Err(FheError::NotFound(format!("TFHE preset {other}"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() || self.n < 2 {
            return Err(FheError::ParamMismatch(format!("ring degree {} is not a power of two", self.n)));
        }
        if self.log_q > 32 {
            return Err(FheError::ParamMismatch("accumulator modulus above 2^32".into()));
        }
        if !self.t.is_power_of_two() || self.t < 2 || self.t as u128 > 1u128 << self.log_q {
            return Err(FheError::ParamMismatch(format!("plaintext modulus {}", self.t)));
        }
        if (2 * self.n as u64) % self.t != 0 {
            return Err(FheError::ParamMismatch(format!("t = {} does not divide 2n", self.t)));
        }
        if self.bk_base_log * self.bk_levels as u32 > self.log_q || self.ks_base_log * self.ks_levels as u32 > self.log_q
        {
            return Err(FheError::InexactGadget);
        }
        Ok(())
    }

    pub fn torus(&self) -> Torus {
        Torus::new(self.log_q).expect("validated modulus")
    }

    pub fn delta(&self) -> u64 {
        (1u64 << self.log_q) / self.t
    }

    /// `Δ̂ = 2n/t`.
    pub fn delta_hat(&self) -> u64 {
        2 * self.n as u64 / self.t
    }

    pub fn log_2n(&self) -> u32 {
        (2 * self.n).trailing_zeros()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LweCiphertext {
    pub a: Vec<u64>,
    pub b: u64,
    pub log_q: u32,
}

impl LweCiphertext {
    pub fn torus(&self) -> Torus {
        Torus::new(self.log_q).expect("ciphertext modulus")
    }

    pub fn trivial(k: usize, b: u64, log_q: u32) -> Self {
        Self { a: vec![0; k], b, log_q }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.a.len() != other.a.len() || self.log_q != other.log_q {
            return Err(FheError::ParamMismatch("LWE ciphertexts differ in dimension or modulus".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let tq = self.torus();
        Ok(Self {
            a: self.a.iter().zip(&other.a).map(|(&x, &y)| tq.add(x, y)).collect(),
            b: tq.add(self.b, other.b),
            log_q: self.log_q,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let tq = self.torus();
        Self { a: self.a.iter().map(|&x| tq.sub(0, x)).collect(), b: tq.sub(0, self.b), log_q: self.log_q }
    }

    pub fn scalar_mul(&self, c: i64) -> Self {
        let tq = self.torus();
        let c = tq.from_i64(c);
        Self { a: self.a.iter().map(|&x| tq.mul(x, c)).collect(), b: tq.mul(self.b, c), log_q: self.log_q }
    }

    /// Add a raw constant to the body.
    pub fn add_constant(&self, c: i64) -> Self {
        let tq = self.torus();
        Self { a: self.a.clone(), b: tq.add(self.b, tq.from_i64(c)), log_q: self.log_q }
    }

    /// Round every component to modulus `2^target`.
    pub fn modulus_switch(&self, target: u32) -> Result<Self> {
        let tq = self.torus();
        Torus::new(target)?;
        Ok(Self { a: self.a.iter().map(|&x| tq.switch_to(x, target)).collect(), b: tq.switch_to(self.b, target), log_q: target })
    }
}

/// Binary LWE key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LweKey {
    pub bits: Vec<u64>,
}

impl LweKey {
    pub fn generate<R: RngCore + ?Sized>(k: usize, rng: &mut R) -> Self {
        Self { bits: (0..k).map(|_| rng.next_u64() & 1).collect() }
    }

    pub fn phase(&self, ct: &LweCiphertext) -> Result<u64> {
        if ct.a.len() != self.bits.len() {
            return Err(FheError::KeyMismatch(format!("key length {} for dimension {}", self.bits.len(), ct.a.len())));
        }
        let tq = ct.torus();
        let dot = ct.a.iter().zip(&self.bits).fold(0u64, |acc, (&a, &s)| acc.wrapping_add(a.wrapping_mul(s)));
        Ok(tq.sub(ct.b, dot))
    }

    pub fn encrypt_raw<R: Rng + ?Sized>(&self, payload: u64, log_q: u32, sampler: &NoiseSampler, rng: &mut R) -> LweCiphertext {
        let tq = Torus::new(log_q).expect("modulus");
        let a: Vec<u64> = (0..self.bits.len()).map(|_| tq.uniform(rng)).collect();
        let e = sampler.sample(rng);
        let dot = a.iter().zip(&self.bits).fold(0u64, |acc, (&x, &s)| acc.wrapping_add(x.wrapping_mul(s)));
        LweCiphertext { b: tq.reduce(dot.wrapping_add(payload).wrapping_add(tq.from_i64(e))), a, log_q }
    }
}

/// RLWE with plus convention: `b = a·S + payload + e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RlweCiphertext {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
}

/// `p·X^e` for `e` taken mod `2n`.
pub fn rotate_u64(p: &[u64], e: i64, tq: Torus) -> Vec<u64> {
    let n = p.len();
    let e = e.rem_euclid(2 * n as i64) as usize;
    let mut out = vec![0u64; n];
    for (j, &c) in p.iter().enumerate() {
        let idx = j + e;
        if idx < n {
            out[idx] = c;
        } else if idx < 2 * n {
            out[idx - n] = tq.sub(0, c);
        } else {
            out[idx - 2 * n] = c;
        }
    }
    out
}

impl RlweCiphertext {
    pub fn trivial(payload: Vec<u64>) -> Self {
        Self { a: vec![0; payload.len()], b: payload }
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn rotate(&self, e: i64, tq: Torus) -> Self {
        Self { a: rotate_u64(&self.a, e, tq), b: rotate_u64(&self.b, e, tq) }
    }

    pub fn add(&self, o: &Self, tq: Torus) -> Self {
        Self {
            a: self.a.iter().zip(&o.a).map(|(&x, &y)| tq.add(x, y)).collect(),
            b: self.b.iter().zip(&o.b).map(|(&x, &y)| tq.add(x, y)).collect(),
        }
    }

    pub fn sub(&self, o: &Self, tq: Torus) -> Self {
        Self {
            a: self.a.iter().zip(&o.a).map(|(&x, &y)| tq.sub(x, y)).collect(),
            b: self.b.iter().zip(&o.b).map(|(&x, &y)| tq.sub(x, y)).collect(),
        }
    }
}

/// Coefficient `h` as an LWE ciphertext under the flattened key.
pub fn sample_extract(ct: &RlweCiphertext, h: usize, log_q: u32) -> Result<LweCiphertext> {
    let n = ct.n();
    if h >= n {
        return Err(FheError::IndexOutOfRange(h));
    }
    let tq = Torus::new(log_q)?;
    let a = (0..n).map(|j| if j <= h { ct.a[h - j] } else { tq.sub(0, ct.a[n + h - j]) }).collect();
    Ok(LweCiphertext { a, b: ct.b[h], log_q })
}

#[derive(Clone, Debug)]
pub struct FourierRlwe {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

/// Row 0 encrypts `−S·m·g_l`, row 1 encrypts `m·g_l`.
#[derive(Clone, Debug)]
pub struct FourierGgsw {
    pub rows: [Vec<FourierRlwe>; 2],
}

/// The lookup polynomial `V` and how the phase is aligned with it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lut {
    /// Signed coefficients in `Z_t`.
    pub poly: Vec<i64>,
    pub t: u64,
    /// First plaintext of the contiguous domain.
    pub half_domain_offset: i64,
    /// Added to the switched body so that noise in `(−Δ̂/2, Δ̂/2)` rounds to the block.
    pub shift: u64,
}

/// Coefficient `j` holds `f(⌊r/Δ̂⌋)` for the rotation `r ≡ j`, negated when `r` wraps past `n`.
pub fn build_lut(table: &[i64], offset: i64, params: &TfheParams) -> Result<Lut> {
    params.validate()?;
    if table.len() as u64 > params.t / 2 {
        return Err(FheError::DomainTooLarge(table.len()));
    }
    let n = params.n as i64;
    let dh = params.delta_hat() as i64;
    let t = params.t as i64;
    let mut poly = vec![0i64; params.n];
    let start = dh * offset;
    for r in start..start + dh * table.len() as i64 {
        let m = r.div_euclid(dh);
        let v = table[(m - offset) as usize].rem_euclid(t);
        let v = if v >= t / 2 { v - t } else { v };
        let p = r.rem_euclid(2 * n);
        if p < n {
            poly[p as usize] = v;
        } else {
            poly[(p - n) as usize] = -v;
        }
    }
    Ok(Lut { poly, t: params.t, half_domain_offset: offset, shift: params.delta_hat() / 2 })
}

impl Lut {
    pub fn from_fn(f: impl Fn(i64) -> i64, offset: i64, params: &TfheParams) -> Result<Self> {
        let table: Vec<i64> = (offset..offset + params.t as i64 / 2).map(f).collect();
        build_lut(&table, offset, params)
    }

    /// Identity on `[−t/4, t/4)`.
    pub fn identity(params: &TfheParams) -> Result<Self> {
        Self::from_fn(|m| m, -(params.t as i64) / 4, params)
    }

    /// `V = Σ X^i`: positive rotations give `+1`, wrapped ones `−1`.
    pub fn gate(params: &TfheParams) -> Self {
        Lut { poly: vec![1; params.n], t: params.t, half_domain_offset: 0, shift: 0 }
    }

    /// `Δ·V` mod `q`.
    pub fn payload(&self, params: &TfheParams) -> Vec<u64> {
        let tq = params.torus();
        let d = params.delta() as i64;
        self.poly.iter().map(|&v| tq.from_i64(v * d)).collect()
    }

    /// Constant coefficient after `V·X^{−r}`.
    pub fn lookup(&self, r: i64) -> i64 {
        let n = self.poly.len() as i64;
        let p = r.rem_euclid(2 * n);
        if p < n {
            self.poly[p as usize]
        } else {
            -self.poly[(p - n) as usize]
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClientKey {
    pub params: TfheParams,
    pub lwe: LweKey,
    /// Binary accumulator key `S_bk`.
    pub glwe: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct ServerKey {
    pub params: TfheParams,
    pub bsk: Vec<FourierGgsw>,
    /// `ksk[j·ℓ_ks + l] = LWE_s(s'_j·g_l)`.
    pub ksk: Vec<LweCiphertext>,
    fft: Arc<NegacyclicFft>,
}

fn centered_f64(x: u64, tq: Torus) -> f64 {
    tq.centered(x) as f64
}

fn poly_mul_key(a: &[u64], s: &[i64], fft: &NegacyclicFft, tq: Torus) -> Vec<u64> {
    let fa = fft.forward_f64(&a.iter().map(|&x| centered_f64(x, tq)).collect::<Vec<_>>());
    let fs = fft.forward_i64(s);
    let prod = fa.iter().zip(&fs).map(|(x, y)| x * y).collect();
    fft.inverse(prod).iter().map(|x| tq.from_i64(x.round() as i64)).collect()
}

impl ClientKey {
    pub fn generate(params: &TfheParams, seed: &Seed) -> Result<Self> {
        params.validate()?;
        let mut rng = seed.derive("tfhe-secret").rng();
        let lwe = LweKey::generate(params.k, &mut rng);
        let glwe = (0..params.n).map(|_| (rng.next_u64() & 1) as i64).collect();
        Ok(Self { params: params.clone(), lwe, glwe })
    }

    /// `s'` read off `S_bk`.
    pub fn extracted_key(&self) -> LweKey {
        LweKey { bits: self.glwe.iter().map(|&x| x as u64).collect() }
    }

    fn lwe_sampler(&self) -> NoiseSampler {
        NoiseSampler::new(self.params.lwe_sigma)
    }

    pub fn encrypt<R: Rng + ?Sized>(&self, m: i64, rng: &mut R) -> LweCiphertext {
        let tq = self.params.torus();
        let payload = tq.from_i64(m.rem_euclid(self.params.t as i64) * self.params.delta() as i64);
        self.lwe.encrypt_raw(payload, self.params.log_q, &self.lwe_sampler(), rng)
    }

    /// Noiseless mask, then the given error added to the body.
    pub fn encrypt_with_error<R: Rng + ?Sized>(&self, m: i64, e: i64, rng: &mut R) -> LweCiphertext {
        let tq = self.params.torus();
        let payload = tq.from_i64(m.rem_euclid(self.params.t as i64) * self.params.delta() as i64 + e);
        self.lwe.encrypt_raw(payload, self.params.log_q, &NoiseSampler::new(0.0), rng)
    }

    pub fn phase(&self, ct: &LweCiphertext) -> Result<u64> {
        self.lwe.phase(ct)
    }

    /// `⌈phase/Δ⌋ mod t`.
    pub fn decrypt(&self, ct: &LweCiphertext) -> Result<u64> {
        let ph = self.phase(ct)?;
        Ok(self.params.torus().switch_to(ph, self.params.t.trailing_zeros()))
    }

    /// Centered `phase − Δm`.
    pub fn noise(&self, ct: &LweCiphertext, m: i64) -> Result<i64> {
        let tq = self.params.torus();
        let expected = tq.from_i64(m * self.params.delta() as i64);
        Ok(tq.centered(tq.sub(self.phase(ct)?, expected)))
    }

    /// Bits travel as `0 ↦ −1`, `1 ↦ 1`.
    pub fn encrypt_bit<R: Rng + ?Sized>(&self, bit: bool, rng: &mut R) -> LweCiphertext {
        self.encrypt(if bit { 1 } else { -1 }, rng)
    }

    pub fn decrypt_bit(&self, ct: &LweCiphertext) -> Result<bool> {
        Ok(self.params.torus().centered(self.phase(ct)?) > 0)
    }

    fn rlwe_encrypt<R: Rng + ?Sized>(&self, payload: &[u64], rng: &mut R) -> RlweCiphertext {
        let tq = self.params.torus();
        let sampler = NoiseSampler::new(self.params.glwe_sigma);
        let fft = negacyclic_fft(self.params.n).expect("ring degree");
        let a: Vec<u64> = (0..self.params.n).map(|_| tq.uniform(rng)).collect();
        let as_ = poly_mul_key(&a, &self.glwe, &fft, tq);
        let b = as_
            .iter()
            .zip(payload)
            .map(|(&x, &p)| tq.add(tq.add(x, p), tq.from_i64(sampler.sample(rng))))
            .collect();
        RlweCiphertext { a, b }
    }

    /// RLWE encryption of the polynomial `Δ·m` for signed `m`.
    pub fn encrypt_rlwe<R: Rng + ?Sized>(&self, m: &[i64], rng: &mut R) -> RlweCiphertext {
        let tq = self.params.torus();
        let d = self.params.delta() as i64;
        let payload: Vec<u64> = m.iter().map(|&x| tq.from_i64(x * d)).collect();
        self.rlwe_encrypt(&payload, rng)
    }

    pub fn encrypt_rlwe_bit<R: Rng + ?Sized>(&self, bit: bool, rng: &mut R) -> RlweCiphertext {
        let mut m = vec![0i64; self.params.n];
        m[0] = if bit { 1 } else { -1 };
        self.encrypt_rlwe(&m, rng)
    }

    /// Encrypted LUT for programmable bootstrapping with a hidden table.
    pub fn encrypt_lut<R: Rng + ?Sized>(&self, lut: &Lut, rng: &mut R) -> RlweCiphertext {
        self.rlwe_encrypt(&lut.payload(&self.params), rng)
    }

    pub fn rlwe_phase(&self, ct: &RlweCiphertext) -> Vec<u64> {
        let tq = self.params.torus();
        let fft = negacyclic_fft(self.params.n).expect("ring degree");
        let as_ = poly_mul_key(&ct.a, &self.glwe, &fft, tq);
        ct.b.iter().zip(&as_).map(|(&b, &x)| tq.sub(b, x)).collect()
    }

    /// Per-coefficient `⌈phase/Δ⌋` as signed values in `[−t/2, t/2)`.
    pub fn rlwe_decrypt(&self, ct: &RlweCiphertext) -> Vec<i64> {
        let tq = self.params.torus();
        let lt = self.params.t.trailing_zeros();
        let t = self.params.t as i64;
        self.rlwe_phase(ct)
            .iter()
            .map(|&p| {
                let v = tq.switch_to(p, lt) as i64;
                if v >= t / 2 {
                    v - t
                } else {
                    v
                }
            })
            .collect()
    }

    pub fn encrypt_ggsw<R: Rng + ?Sized>(&self, m: i64, rng: &mut R) -> FourierGgsw {
        let p = &self.params;
        let tq = p.torus();
        let fft = negacyclic_fft(p.n).expect("ring degree");
        let to_fourier = |ct: RlweCiphertext| FourierRlwe {
            a: fft.forward_f64(&ct.a.iter().map(|&x| centered_f64(x, tq)).collect::<Vec<_>>()),
            b: fft.forward_f64(&ct.b.iter().map(|&x| centered_f64(x, tq)).collect::<Vec<_>>()),
        };
        let mut rows: [Vec<FourierRlwe>; 2] = [Vec::new(), Vec::new()];
        for l in 0..p.bk_levels {
            let g = gadget_u64(p.log_q, p.bk_base_log, l) as i64;
            let payload0: Vec<u64> = self.glwe.iter().map(|&s| tq.from_i64(-s * m * g)).collect();
            let mut payload1 = vec![0u64; p.n];
            payload1[0] = tq.from_i64(m * g);
            rows[0].push(to_fourier(self.rlwe_encrypt(&payload0, rng)));
            rows[1].push(to_fourier(self.rlwe_encrypt(&payload1, rng)));
        }
        FourierGgsw { rows }
    }

    pub fn server_key(&self, seed: &Seed) -> ServerKey {
        let p = &self.params;
        let mut rng = seed.derive("tfhe-bsk").rng();
        let bsk = self.lwe.bits.iter().map(|&s| self.encrypt_ggsw(s as i64, &mut rng)).collect();
        let mut rng = seed.derive("tfhe-ksk").rng();
        let sampler = self.lwe_sampler();
        let tq = p.torus();
        let mut ksk = Vec::with_capacity(p.n * p.ks_levels);
        for &s in &self.glwe {
            for l in 0..p.ks_levels {
                let payload = tq.mul(s as u64, gadget_u64(p.log_q, p.ks_base_log, l));
                ksk.push(self.lwe.encrypt_raw(payload, p.log_q, &sampler, &mut rng));
            }
        }
        ServerKey { params: p.clone(), bsk, ksk, fft: negacyclic_fft(p.n).expect("ring degree") }
    }
}

pub fn keygen(params: &TfheParams, seed: &Seed) -> Result<(ClientKey, ServerKey)> {
    let ck = ClientKey::generate(params, seed)?;
    let sk = ck.server_key(seed);
    Ok((ck, sk))
}

/// Net rotation `b̂ − Σ â_i s_i mod 2n` that blind rotation applies.
pub fn rotation_amount(switched: &LweCiphertext, key: &LweKey) -> Result<i64> {
    Ok(key.phase(switched)? as i64)
}

impl ServerKey {
    pub fn fft(&self) -> &NegacyclicFft {
        &self.fft
    }

    /// `Σ ⟨Decomp(a), row 0⟩ + ⟨Decomp(b), row 1⟩`.
    pub fn external_product(&self, ct: &RlweCiphertext, ggsw: &FourierGgsw) -> RlweCiphertext {
        let p = &self.params;
        let tq = p.torus();
        let n = p.n;
        let h = n / 2;
        let mut acc_a = vec![Complex64::new(0.0, 0.0); h];
        let mut acc_b = vec![Complex64::new(0.0, 0.0); h];
        let mut digits = vec![vec![0i64; n]; p.bk_levels];
        let mut buf = vec![0i64; p.bk_levels];
        for (poly, row) in [&ct.a, &ct.b].into_iter().zip(&ggsw.rows) {
            for (j, &c) in poly.iter().enumerate() {
                decompose_u64(c, p.log_q, p.bk_base_log, &mut buf);
                for l in 0..p.bk_levels {
                    digits[l][j] = buf[l];
                }
            }
            for (d, lev) in digits.iter().zip(row) {
                let f = self.fft.forward_i64(d);
                for i in 0..h {
                    acc_a[i] += f[i] * lev.a[i];
                    acc_b[i] += f[i] * lev.b[i];
                }
            }
        }
        let back = |v: Vec<Complex64>| -> Vec<u64> {
            self.fft.inverse(v).iter().map(|x| tq.from_i64(x.round() as i64)).collect()
        };
        RlweCiphertext { a: back(acc_a), b: back(acc_b) }
    }

    /// `c0 + sel·(c1 − c0)`.
    pub fn cmux(&self, sel: &FourierGgsw, c0: &RlweCiphertext, c1: &RlweCiphertext) -> RlweCiphertext {
        let tq = self.params.torus();
        c0.add(&self.external_product(&c1.sub(c0, tq), sel), tq)
    }

    /// `V_0 = V·X^{−b̂}`, then `V_{i+1} = s_i·(V_i·X^{â_i} − V_i) + V_i`.
    pub fn blind_rotate(&self, lut_ct: &RlweCiphertext, switched: &LweCiphertext) -> Result<RlweCiphertext> {
        if switched.a.len() != self.bsk.len() {
            return Err(FheError::KeyMismatch(format!(
                "{} bootstrapping GGSWs for LWE dimension {}",
                self.bsk.len(),
                switched.a.len()
            )));
        }
        if switched.log_q != self.params.log_2n() {
            return Err(FheError::ParamMismatch("ciphertext not switched to 2n".into()));
        }
        let tq = self.params.torus();
        let mut acc = lut_ct.rotate(-(switched.b as i64), tq);
        for (&a, ggsw) in switched.a.iter().zip(&self.bsk) {
            if a == 0 {
                continue;
            }
            let rotated = acc.rotate(a as i64, tq);
            acc = self.cmux(ggsw, &acc, &rotated);
        }
        Ok(acc)
    }

    /// `(0, b) − Σ ⟨Decomp(a'_j), LWE_s(s'_j·g)⟩`.
    pub fn keyswitch(&self, ct: &LweCiphertext) -> Result<LweCiphertext> {
        let p = &self.params;
        if ct.a.len() != p.n || ct.log_q != p.log_q {
            return Err(FheError::KeyMismatch(format!("keyswitch input has dimension {}", ct.a.len())));
        }
        let mask = (1u64 << p.log_q) - 1;
        let mut a = vec![0u64; p.k];
        let mut b = ct.b;
        let mut buf = vec![0i64; p.ks_levels];
        for (j, &aj) in ct.a.iter().enumerate() {
            decompose_u64(aj, p.log_q, p.ks_base_log, &mut buf);
            for (l, &d) in buf.iter().enumerate() {
                if d == 0 {
                    continue;
                }
                let key = &self.ksk[j * p.ks_levels + l];
                let d = d as u64;
                for (x, &y) in a.iter_mut().zip(&key.a) {
                    *x = x.wrapping_sub(d.wrapping_mul(y));
                }
                b = b.wrapping_sub(d.wrapping_mul(key.b));
            }
        }
        Ok(LweCiphertext { a: a.iter().map(|x| x & mask).collect(), b: b & mask, log_q: p.log_q })
    }

    /// Modulus switch, blind rotation, extraction of coefficient 0, key switch.
    pub fn bootstrap_with(&self, ct: &LweCiphertext, lut_ct: &RlweCiphertext, shift: u64) -> Result<LweCiphertext> {
        let p = &self.params;
        if ct.log_q != p.log_q {
            return Err(FheError::ParamMismatch("bootstrap input modulus".into()));
        }
        let mut sw = ct.modulus_switch(p.log_2n())?;
        sw.b = (sw.b + shift) % (2 * p.n as u64);
        let acc = self.blind_rotate(lut_ct, &sw)?;
        let ext = sample_extract(&acc, 0, p.log_q)?;
        self.keyswitch(&ext)
    }

    pub fn bootstrap(&self, ct: &LweCiphertext, lut: &Lut) -> Result<LweCiphertext> {
        if lut.poly.len() != self.params.n || lut.t != self.params.t {
            return Err(FheError::ParamMismatch("LUT shape differs from parameters".into()));
        }
        self.bootstrap_with(ct, &RlweCiphertext::trivial(lut.payload(&self.params)), lut.shift)
    }

    /// CMUX on RLWE bits followed by extraction and key switch.
    pub fn mux_ggsw(&self, sel: &FourierGgsw, a: &RlweCiphertext, b: &RlweCiphertext) -> Result<LweCiphertext> {
        let out = self.cmux(sel, a, b);
        self.keyswitch(&sample_extract(&out, 0, self.params.log_q)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    And,
    Or,
    Nand,
    Xor,
    Not,
    Mux,
}

impl FromStr for Gate {
    type Err = FheError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "and" => Ok(Gate::And),
            "or" => Ok(Gate::Or),
            "nand" => Ok(Gate::Nand),
            "xor" => Ok(Gate::Xor),
            "not" => Ok(Gate::Not),
            "mux" => Ok(Gate::Mux),
            other => Err(FheError::UnsupportedGate(other.into())),
        }
    }
}

impl Gate {
    pub fn arity(self) -> usize {
        match self {
            Gate::Not => 1,
            Gate::Mux => 3,
            _ => 2,
        }
    }

    pub fn eval_plain(self, x: &[bool]) -> bool {
        match self {
            Gate::And => x[0] && x[1],
            Gate::Or => x[0] || x[1],
            Gate::Nand => !(x[0] && x[1]),
            Gate::Xor => x[0] ^ x[1],
            Gate::Not => !x[0],
            Gate::Mux => {
                if x[0] {
                    x[2]
                } else {
                    x[1]
                }
            }
        }
    }
}

/// Gate bootstrapping on `±1`-encoded bits (`t = 8`). `Mux` takes `(sel, a, b)` and picks `b` when `sel = 1`.
pub fn gate_eval(gate: Gate, inputs: &[&LweCiphertext], server: &ServerKey) -> Result<LweCiphertext> {
    if inputs.len() != gate.arity() {
        return Err(FheError::ParamMismatch(format!("{gate:?} takes {} inputs, got {}", gate.arity(), inputs.len())));
    }
    if server.params.t != 8 {
        return Err(FheError::UnsupportedGate(format!("gates need t = 8, have {}", server.params.t)));
    }
    let d = server.params.delta() as i64;
    let lut = Lut::gate(&server.params);
    let boot = |ct: LweCiphertext| server.bootstrap(&ct, &lut);
    match gate {
        Gate::Not => Ok(inputs[0].neg()),
        Gate::And => boot(inputs[0].add(inputs[1])?.add_constant(-d)),
        Gate::Or => boot(inputs[0].add(inputs[1])?.add_constant(d)),
        Gate::Nand => boot(inputs[0].add(inputs[1])?.neg().add_constant(d)),
        Gate::Xor => boot(inputs[0].add(inputs[1])?.scalar_mul(2).add_constant(2 * d)),
        Gate::Mux => {
            let (sel, a, b) = (inputs[0], inputs[1], inputs[2]);
            let take_b = gate_eval(Gate::And, &[sel, b], server)?;
            let not_sel = sel.neg();
            let take_a = gate_eval(Gate::And, &[&not_sel, a], server)?;
            gate_eval(Gate::Or, &[&take_b, &take_a], server)
        }
    }
}

/// `Lev_s(s_i·s_j)` at `Q = q·Δ`, for the tensor product of LWE ciphertexts.
#[derive(Clone, Debug)]
pub struct LweRelinKey {
    pub k: usize,
    pub log_q: u32,
    pub log_t: u32,
    pub log_big_q: u32,
    pub base_log: u32,
    pub levels: usize,
    pub lev: Vec<LweCiphertext>,
}

impl LweRelinKey {
    pub fn generate<R: Rng + ?Sized>(
        key: &LweKey,
        log_q: u32,
        t: u64,
        base_log: u32,
        levels: usize,
        sigma: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !t.is_power_of_two() || t < 2 {
            return Err(FheError::ParamMismatch(format!("plaintext modulus {t}")));
        }
        let log_t = t.trailing_zeros();
        let log_big_q = 2 * log_q - log_t;
        if log_big_q > 63 || base_log * levels as u32 > log_big_q {
            return Err(FheError::ParamMismatch(format!("Q = 2^{log_big_q} does not fit the word size")));
        }
        let tq = Torus::new(log_big_q)?;
        let sampler = NoiseSampler::new(sigma);
        let k = key.bits.len();
        let mut lev = Vec::with_capacity(k * k * levels);
        for i in 0..k {
            for j in 0..k {
                let sij = key.bits[i] * key.bits[j];
                for l in 0..levels {
                    let payload = tq.mul(sij, gadget_u64(log_big_q, base_log, l));
                    lev.push(key.encrypt_raw(payload, log_big_q, &sampler, rng));
                }
            }
        }
        Ok(Self { k, log_q, log_t, log_big_q, base_log, levels, lev })
    }
}

/// ModRaise to `Q`, tensor, relinearize with `Lev(s⊗s)`, rescale by `Δ`.
pub fn lwe_tensor_mul(c1: &LweCiphertext, c2: &LweCiphertext, rk: &LweRelinKey) -> Result<LweCiphertext> {
    if c1.a.len() != rk.k || c2.a.len() != rk.k || c1.log_q != rk.log_q || c2.log_q != rk.log_q {
        return Err(FheError::KeyMismatch("relinearization key does not match the ciphertexts".into()));
    }
    let small = c1.torus();
    let big = Torus::new(rk.log_big_q)?;
    let raise = |x: u64| big.from_i64(small.centered(x));
    let (a1, b1): (Vec<u64>, u64) = (c1.a.iter().map(|&x| raise(x)).collect(), raise(c1.b));
    let (a2, b2): (Vec<u64>, u64) = (c2.a.iter().map(|&x| raise(x)).collect(), raise(c2.b));
    let d0 = big.mul(b1, b2);
    let mut a: Vec<u64> = a1.iter().zip(&a2).map(|(&x, &y)| big.add(big.mul(b2, x), big.mul(b1, y))).collect();
    let mut b = d0;
    let mut buf = vec![0i64; rk.levels];
    for i in 0..rk.k {
        for j in 0..rk.k {
            let d2 = big.mul(a1[i], a2[j]);
            decompose_u64(d2, rk.log_big_q, rk.base_log, &mut buf);
            for (l, &d) in buf.iter().enumerate() {
                if d == 0 {
                    continue;
                }
                let key = &rk.lev[(i * rk.k + j) * rk.levels + l];
                let d = big.from_i64(d);
                for (x, &y) in a.iter_mut().zip(&key.a) {
                    *x = big.add(*x, big.mul(d, y));
                }
                b = big.add(b, big.mul(d, key.b));
            }
        }
    }
    let log_delta = rk.log_q - rk.log_t;
    let down = |x: u64| big.switch_to(x, rk.log_big_q - log_delta);
    Ok(LweCiphertext { a: a.iter().map(|&x| down(x)).collect(), b: down(b), log_q: rk.log_q })
}

/// Fresh randomness for callers that do not manage their own.
pub fn rng_from(seed: &Seed, label: &str) -> Prng {
    seed.derive(label).rng()
}
