//! GLWE over `Z_q[X]/(X^n+1)` with `k` masks. LWE is `n = 1`, RLWE is `k = 1`.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

use crate::decomposition::GadgetSpec;
use crate::error::{FheError, Result};
use crate::modular::{canonical, round_div};
use crate::poly::{inner_product, sample_poly, sample_poly_with, NoiseSampler, RingParams, RingPoly, SampleKind};
use crate::prng::Seed;

/// Sign of `Σ A_i·S_i` in the body: `B = ±Σ A_i·S_i + payload`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignConvention {
    Plus,
    Minus,
}

impl SignConvention {
    pub fn as_i64(self) -> i64 {
        match self {
            SignConvention::Plus => 1,
            SignConvention::Minus => -1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SignConvention::Plus => "plus",
            SignConvention::Minus => "minus",
        }
    }
}

#[derive(Clone, Debug)]
pub struct GlweParams {
    pub k: usize,
    pub ring: Arc<RingParams>,
    pub t: u64,
    pub delta: BigUint,
    pub sign: SignConvention,
    pub sampler: NoiseSampler,
    pub key_kind: SampleKind,
    /// Fresh noise is multiplied by this (`t` for BGV, 1 otherwise).
    pub noise_scale: u64,
}

impl GlweParams {
    /// `Δ = ⌊q/t⌋`, ternary keys.
    pub fn new(k: usize, ring: Arc<RingParams>, t: u64, sign: SignConvention, sigma: f64) -> Result<Self> {
        if t < 2 {
            return Err(FheError::ParamMismatch(format!("plaintext modulus {t} < 2")));
        }
        let delta = &ring.q / t;
        Self::with_delta(k, ring, t, delta, sign, sigma)
    }

    pub fn with_delta(
        k: usize,
        ring: Arc<RingParams>,
        t: u64,
        delta: BigUint,
        sign: SignConvention,
        sigma: f64,
    ) -> Result<Self> {
        if k == 0 {
            return Err(FheError::ParamMismatch("mask count must be positive".into()));
        }
        Ok(Self {
            k,
            ring,
            t,
            delta,
            sign,
            sampler: NoiseSampler::new(sigma),
            key_kind: SampleKind::Ternary,
            noise_scale: 1,
        })
    }

    pub fn binary_keys(mut self) -> Self {
        self.key_kind = SampleKind::Binary;
        self
    }

    pub fn with_noise_scale(mut self, scale: u64) -> Self {
        self.noise_scale = scale;
        self
    }

    /// The same parameters over another ring, `Δ` unchanged.
    pub fn with_ring(&self, ring: Arc<RingParams>) -> Self {
        Self { ring, ..self.clone() }
    }

    fn noise(&self, seed: &Seed) -> RingPoly {
        let e = sample_poly(SampleKind::Gaussian, &self.ring, &self.sampler, seed);
        self.scale_noise(e)
    }

    fn scale_noise(&self, e: RingPoly) -> RingPoly {
        if self.noise_scale == 1 {
            e
        } else {
            e.scalar_mul(&BigInt::from(self.noise_scale))
        }
    }

    pub fn q(&self) -> &BigUint {
        &self.ring.q
    }

    pub fn n(&self) -> usize {
        self.ring.n
    }

    /// The same parameters over another modulus, with `Δ` scaled by `q̂/q`.
    pub fn switched(&self, ring: Arc<RingParams>) -> Self {
        let delta = round_div(&BigInt::from(&self.delta * &ring.q), &BigInt::from(self.ring.q.clone()))
            .to_biguint()
            .unwrap_or_default();
        Self { ring, delta, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlweSecretKey {
    pub polys: Vec<RingPoly>,
}

impl GlweSecretKey {
    pub fn generate(params: &GlweParams, seed: &Seed) -> Self {
        let mut rng = seed.derive("secret").rng();
        let polys =
            (0..params.k).map(|_| sample_poly_with(params.key_kind, &params.ring, &params.sampler, &mut rng)).collect();
        Self { polys }
    }

    pub fn from_i64(ring: &Arc<RingParams>, polys: &[Vec<i64>]) -> Self {
        Self { polys: polys.iter().map(|p| RingPoly::from_i64(ring, p)).collect() }
    }

    pub fn k(&self) -> usize {
        self.polys.len()
    }

    /// The same small key read in another ring of equal degree.
    pub fn lift_to(&self, ring: &Arc<RingParams>) -> Self {
        Self { polys: self.polys.iter().map(|p| p.lift_to(ring)).collect() }
    }

    pub fn centered(&self) -> Vec<Vec<i64>> {
        self.polys.iter().map(|p| p.centered_i64()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlweCiphertext {
    pub masks: Vec<RingPoly>,
    pub body: RingPoly,
    /// Present while the masks are the fresh expansion of this seed.
    pub mask_seed: Option<Seed>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    pub pk1: RingPoly,
    pub pk2: Vec<RingPoly>,
}

fn expand_masks(params: &GlweParams, seed: &Seed) -> Vec<RingPoly> {
    let mut rng = seed.rng();
    (0..params.k).map(|_| sample_poly_with(SampleKind::Uniform, &params.ring, &params.sampler, &mut rng)).collect()
}

fn sigma_times(sign: SignConvention, p: RingPoly) -> RingPoly {
    match sign {
        SignConvention::Plus => p,
        SignConvention::Minus => p.neg(),
    }
}

impl GlweCiphertext {
    pub fn ring(&self) -> &Arc<RingParams> {
        self.body.ring()
    }

    pub fn k(&self) -> usize {
        self.masks.len()
    }

    /// `(0, …, 0, payload)`.
    pub fn trivial(k: usize, payload: RingPoly) -> Self {
        Self { masks: vec![RingPoly::zero(payload.ring()); k], body: payload, mask_seed: None }
    }

    /// Masks regenerated from a stored seed.
    pub fn from_seed(params: &GlweParams, mask_seed: Seed, body: RingPoly) -> Self {
        Self { masks: expand_masks(params, &mask_seed), body, mask_seed: Some(mask_seed) }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.k() != other.k() || !self.ring().same(other.ring()) {
            return Err(FheError::ParamMismatch("ciphertexts differ in shape or modulus".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            masks: self.masks.iter().zip(&other.masks).map(|(a, b)| a.add(b)).collect(),
            body: self.body.add(&other.body),
            mask_seed: None,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            masks: self.masks.iter().zip(&other.masks).map(|(a, b)| a.sub(b)).collect(),
            body: self.body.sub(&other.body),
            mask_seed: None,
        })
    }

    pub fn neg(&self) -> Self {
        self.map(|p| p.neg())
    }

    pub fn map(&self, f: impl Fn(&RingPoly) -> RingPoly) -> Self {
        Self { masks: self.masks.iter().map(&f).collect(), body: f(&self.body), mask_seed: None }
    }

    pub fn scalar_mul(&self, c: &BigInt) -> Self {
        self.map(|p| p.scalar_mul(c))
    }

    /// Multiply every component by `Λ`.
    pub fn mul_plain(&self, lambda: &RingPoly) -> Result<Self> {
        if !lambda.ring().same(self.ring()) {
            return Err(FheError::ParamMismatch("plaintext ring differs from ciphertext ring".into()));
        }
        Ok(self.map(|p| p.mul(lambda)))
    }

    /// Add an already scaled plaintext to the body.
    pub fn add_plain(&self, lambda: &RingPoly) -> Result<Self> {
        if !lambda.ring().same(self.ring()) {
            return Err(FheError::ParamMismatch("plaintext ring differs from ciphertext ring".into()));
        }
        Ok(Self { masks: self.masks.clone(), body: self.body.add(lambda), mask_seed: None })
    }

    pub fn mul_monomial(&self, e: i64) -> Self {
        self.map(|p| p.mul_monomial(e))
    }

    pub fn apply_automorphism(&self, k: i64) -> Result<Self> {
        Ok(Self {
            masks: self.masks.iter().map(|p| p.apply_automorphism(k)).collect::<Result<_>>()?,
            body: self.body.apply_automorphism(k)?,
            mask_seed: None,
        })
    }

    /// Every component reduced into a modulus dividing the current one.
    pub fn reduce_to(&self, ring: &Arc<RingParams>) -> Self {
        self.map(|p| p.reduce_to(ring))
    }

    /// Centered lift into a larger modulus.
    pub fn lift_to(&self, ring: &Arc<RingParams>) -> Self {
        self.map(|p| p.lift_to(ring))
    }
}

/// Encrypt an already scaled payload.
pub fn encrypt_raw(payload: &RingPoly, sk: &GlweSecretKey, params: &GlweParams, seed: &Seed) -> GlweCiphertext {
    let mask_seed = seed.derive("mask");
    let masks = expand_masks(params, &mask_seed);
    let e = params.noise(&seed.derive("noise"));
    let body = sigma_times(params.sign, inner_product(&masks, &sk.polys)).add(payload).add(&e);
    GlweCiphertext { masks, body, mask_seed: Some(mask_seed) }
}

/// `Δ·M` for `M` with coefficients read as integers mod `t`.
pub fn scale_plaintext(m: &RingPoly, params: &GlweParams) -> RingPoly {
    let t = BigUint::from(params.t);
    let c: Vec<BigInt> = m.coeffs().iter().map(|x| BigInt::from((x % &t) * &params.delta)).collect();
    RingPoly::from_bigints(&params.ring, &c)
}

/// Plaintext polynomial from integer coefficients in `Z_t`.
pub fn plaintext(params: &GlweParams, m: &[i64]) -> RingPoly {
    let t = params.t as i64;
    RingPoly::from_i64(&params.ring, &m.iter().map(|x| x.rem_euclid(t)).collect::<Vec<_>>())
}

pub fn encrypt(m: &RingPoly, sk: &GlweSecretKey, params: &GlweParams, seed: &Seed) -> GlweCiphertext {
    encrypt_raw(&scale_plaintext(m, params), sk, params, seed)
}

/// Raw phase `B ∓ Σ A_i·S_i`.
pub fn phase(ct: &GlweCiphertext, sk: &GlweSecretKey, sign: SignConvention) -> Result<RingPoly> {
    if ct.k() != sk.k() {
        return Err(FheError::KeyMismatch(format!("ciphertext has {} masks, key has {}", ct.k(), sk.k())));
    }
    let ring = ct.ring();
    let keys: Vec<RingPoly> =
        if sk.polys[0].ring().same(ring) { sk.polys.clone() } else { sk.lift_to(ring).polys };
    Ok(ct.body.sub(&sigma_times(sign, inner_product(&ct.masks, &keys))))
}

/// `⌈phase/Δ⌋ mod t` per coefficient, as integers in `[0, t)`.
pub fn decode_phase(ph: &RingPoly, delta: &BigUint, t: u64) -> Vec<u64> {
    let d = BigInt::from(delta.clone());
    let tt = BigUint::from(t);
    ph.coeffs()
        .iter()
        .map(|c| canonical(&round_div(&BigInt::from(c.clone()), &d), &tt).to_u64().unwrap())
        .collect()
}

pub fn decrypt(ct: &GlweCiphertext, sk: &GlweSecretKey, params: &GlweParams) -> Result<Vec<u64>> {
    Ok(decode_phase(&phase(ct, sk, params.sign)?, &params.delta, params.t))
}

/// Largest centered deviation of the phase from the expected payload.
pub fn noise_norm(ct: &GlweCiphertext, sk: &GlweSecretKey, sign: SignConvention, payload: &RingPoly) -> Result<BigUint> {
    Ok(phase(ct, sk, sign)?.sub(payload).inf_norm())
}

pub fn keygen(params: &GlweParams, seed: &Seed) -> (GlweSecretKey, PublicKey) {
    let sk = GlweSecretKey::generate(params, seed);
    let pk = public_key(&sk, params, &seed.derive("public"));
    (sk, pk)
}

pub fn public_key(sk: &GlweSecretKey, params: &GlweParams, seed: &Seed) -> PublicKey {
    let pk2 = expand_masks(params, &seed.derive("mask"));
    let e = params.noise(&seed.derive("noise"));
    let pk1 = sigma_times(params.sign, inner_product(&pk2, &sk.polys)).add(&e);
    PublicKey { pk1, pk2 }
}

/// `B = PK1·U + ΔM + E1`, `A_i = PK2_i·U + E2_i`.
pub fn pk_encrypt(m: &RingPoly, pk: &PublicKey, params: &GlweParams, seed: &Seed) -> GlweCiphertext {
    let mut rng = seed.rng();
    let s = &params.sampler;
    let u = sample_poly_with(SampleKind::Ternary, &params.ring, s, &mut rng);
    let e1 = params.scale_noise(sample_poly_with(SampleKind::Gaussian, &params.ring, s, &mut rng));
    let masks = pk
        .pk2
        .iter()
        .map(|a| a.mul(&u).add(&params.scale_noise(sample_poly_with(SampleKind::Gaussian, &params.ring, s, &mut rng))))
        .collect();
    let body = pk.pk1.mul(&u).add(&scale_plaintext(m, params)).add(&e1);
    GlweCiphertext { masks, body, mask_seed: None }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlevCiphertext {
    pub levels: Vec<GlweCiphertext>,
    pub gadget: GadgetSpec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GgswCiphertext {
    pub rows: Vec<GlevCiphertext>,
}

/// Level `i` encrypts `g_i·M`.
pub fn glev_encrypt(
    m: &RingPoly,
    sk: &GlweSecretKey,
    params: &GlweParams,
    gadget: &GadgetSpec,
    seed: &Seed,
) -> Result<GlevCiphertext> {
    if !gadget.integral {
        return Err(FheError::InexactGadget);
    }
    if &gadget.q != params.q() {
        return Err(FheError::ParamMismatch("gadget modulus differs from ciphertext modulus".into()));
    }
    let levels = gadget
        .gadget
        .iter()
        .enumerate()
        .map(|(i, g)| encrypt_raw(&m.scalar_mul(&BigInt::from(g.clone())), sk, params, &seed.derive_index("lev", i as u64)))
        .collect();
    Ok(GlevCiphertext { levels, gadget: gadget.clone() })
}

/// Rows `0..k` encrypt `-σ·S_i·M`; the last row encrypts `M`.
pub fn ggsw_encrypt(
    m: &RingPoly,
    sk: &GlweSecretKey,
    params: &GlweParams,
    gadget: &GadgetSpec,
    seed: &Seed,
) -> Result<GgswCiphertext> {
    let mut rows = Vec::with_capacity(params.k + 1);
    for (i, s) in sk.polys.iter().enumerate() {
        let payload = sigma_times(params.sign, s.mul(m)).neg();
        rows.push(glev_encrypt(&payload, sk, params, gadget, &seed.derive_index("row", i as u64))?);
    }
    rows.push(glev_encrypt(m, sk, params, gadget, &seed.derive_index("row", params.k as u64))?);
    Ok(GgswCiphertext { rows })
}

/// `⟨Decomp(P), GLev⟩`.
pub fn glev_inner(p: &RingPoly, glev: &GlevCiphertext) -> Result<GlweCiphertext> {
    let ring = glev.levels[0].ring().clone();
    let gadget = if glev.gadget.q == ring.q { glev.gadget.clone() } else { glev.gadget.with_modulus(ring.q.clone()) };
    let digits = gadget.decompose_poly_into(p, &ring);
    let mut acc: Option<GlweCiphertext> = None;
    for (d, lvl) in digits.iter().zip(&glev.levels) {
        if d.is_zero() {
            continue;
        }
        let term = lvl.mul_plain(d)?;
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    Ok(acc.unwrap_or_else(|| GlweCiphertext::trivial(glev.levels[0].k(), RingPoly::zero(&ring))))
}

/// GLWE × GGSW: `Σ ⟨Decomp(A_i), row_i⟩ + ⟨Decomp(B), row_k⟩`.
pub fn external_product(ct: &GlweCiphertext, ggsw: &GgswCiphertext) -> Result<GlweCiphertext> {
    if ggsw.rows.len() != ct.k() + 1 {
        return Err(FheError::ParamMismatch(format!("GGSW has {} rows for k = {}", ggsw.rows.len(), ct.k())));
    }
    let mut acc = glev_inner(&ct.body, &ggsw.rows[ct.k()])?;
    for (a, row) in ct.masks.iter().zip(&ggsw.rows) {
        acc = acc.add(&glev_inner(a, row)?)?;
    }
    Ok(acc)
}

/// `KSK_i = GLev_{S'}(σ·S_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeySwitchKey {
    pub levs: Vec<GlevCiphertext>,
}

pub fn keyswitch_key(
    from: &GlweSecretKey,
    to: &GlweSecretKey,
    params: &GlweParams,
    gadget: &GadgetSpec,
    seed: &Seed,
) -> Result<KeySwitchKey> {
    let levs = from
        .polys
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let s = s.lift_to(&params.ring);
            glev_encrypt(&sigma_times(params.sign, s), to, params, gadget, &seed.derive_index("ksk", i as u64))
        })
        .collect::<Result<_>>()?;
    Ok(KeySwitchKey { levs })
}

/// `(0, B) - Σ ⟨Decomp(A_i), KSK_i⟩`.
pub fn gadget_keyswitch(ct: &GlweCiphertext, ksk: &KeySwitchKey) -> Result<GlweCiphertext> {
    if ksk.levs.len() != ct.k() {
        return Err(FheError::KeyMismatch(format!("{} switching keys for {} masks", ksk.levs.len(), ct.k())));
    }
    let k_out = ksk.levs[0].levels[0].k();
    let mut acc = GlweCiphertext::trivial(k_out, ct.body.clone());
    for (a, lev) in ct.masks.iter().zip(&ksk.levs) {
        acc = acc.sub(&glev_inner(a, lev)?)?;
    }
    Ok(acc)
}

/// Rescale every component by `q̂/q` with half-up rounding.
pub fn modulus_switch(ct: &GlweCiphertext, params: &GlweParams, target: &Arc<RingParams>) -> Result<GlweCiphertext> {
    let q = params.q();
    let q_hat = &target.q;
    if q_hat > q || target.n != params.n() {
        return Err(FheError::BadTargetModulus(format!("{q_hat} is not below {q}")));
    }
    let delta_hat = BigInt::from(&params.delta * q_hat) / BigInt::from(q.clone());
    let drift = BigInt::from(2 + params.k * params.n());
    if delta_hat <= drift {
        return Err(FheError::TargetTooSmall(format!("scaled delta {delta_hat} does not exceed drift {drift}")));
    }
    Ok(ct.map(|p| p.scale_round_to(target, q_hat, q)))
}

impl GlevCiphertext {
    /// Every level reduced into a modulus dividing the current one.
    pub fn reduce_to(&self, ring: &Arc<RingParams>) -> Self {
        Self { levels: self.levels.iter().map(|c| c.reduce_to(ring)).collect(), gadget: self.gadget.clone() }
    }
}

/// `(D0, D1, D2) = (B1·B2, B1·A2 + B2·A1, A1·A2)` for single-mask ciphertexts.
pub fn tensor(c1: &GlweCiphertext, c2: &GlweCiphertext) -> Result<[RingPoly; 3]> {
    if c1.k() != 1 || c2.k() != 1 || !c1.ring().same(c2.ring()) {
        return Err(FheError::ParamMismatch("tensor needs two RLWE ciphertexts over one ring".into()));
    }
    let (a1, b1, a2, b2) = (&c1.masks[0], &c1.body, &c2.masks[0], &c2.body);
    Ok([b1.mul(b2), b1.mul(a2).add(&b2.mul(a1)), a1.mul(a2)])
}

/// `(D1, D0) + ⟨Decomp(D2), RLev(S²)⟩`.
pub fn relinearize(d: &[RingPoly; 3], relin: &GlevCiphertext) -> Result<GlweCiphertext> {
    let alpha = GlweCiphertext { masks: vec![d[1].clone()], body: d[0].clone(), mask_seed: None };
    alpha.add(&glev_inner(&d[2], relin)?)
}

/// Switching key from `S(X^k)` to `S`.
pub fn galois_key(sk: &GlweSecretKey, k: u64, params: &GlweParams, gadget: &GadgetSpec, seed: &Seed) -> Result<KeySwitchKey> {
    let from = GlweSecretKey {
        polys: sk.polys.iter().map(|p| p.apply_automorphism(k as i64)).collect::<Result<_>>()?,
    };
    keyswitch_key(&from, sk, params, gadget, &seed.derive_index("galois", k))
}

/// `(A(X^k), B(X^k))` switched back to the original key.
pub fn apply_galois(ct: &GlweCiphertext, k: u64, ksk: &KeySwitchKey) -> Result<GlweCiphertext> {
    let ring = ct.ring();
    let ksk = if ksk.levs[0].levels[0].ring().same(ring) {
        ksk.clone()
    } else {
        KeySwitchKey { levs: ksk.levs.iter().map(|l| l.reduce_to(ring)).collect() }
    };
    gadget_keyswitch(&ct.apply_automorphism(k as i64)?, &ksk)
}

pub fn is_zero_payload(p: &RingPoly) -> bool {
    p.coeffs().iter().all(Zero::is_zero)
}
