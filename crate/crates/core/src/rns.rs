//! Residue number system: CRT codec, fast base conversions, RNS modulus changes.
//!
//! Scalar residue vectors are `i64` in the centered range of their modulus.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{FheError, Result};
use crate::glwe::{encrypt_raw, GlweCiphertext, GlweParams, GlweSecretKey};
use crate::modular::{canonical, centered_u64, center_canonical, from_i128, inv_mod, is_prime_u64, mul_mod};
use crate::poly::{RingParams, RingPoly};
use crate::prng::Seed;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RnsBase {
    moduli: Vec<u64>,
    product: BigUint,
    y: Vec<BigUint>,
    z: Vec<u64>,
}

fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

impl RnsBase {
    pub fn new(moduli: &[u64]) -> Result<Self> {
        if moduli.is_empty() {
            return Err(FheError::BadModulus("empty base".into()));
        }
        for (i, &a) in moduli.iter().enumerate() {
            if a < 2 || a >= 1 << 62 {
                return Err(FheError::BadModulus(format!("modulus {a} out of range")));
            }
            for &b in &moduli[i + 1..] {
                if gcd(a, b) != 1 {
                    return Err(FheError::BadModulus(format!("{a} and {b} are not coprime")));
                }
            }
        }
        let product: BigUint = moduli.iter().map(|&m| BigUint::from(m)).product();
        let y: Vec<BigUint> = moduli.iter().map(|&m| &product / m).collect();
        let z = moduli
            .iter()
            .zip(&y)
            .map(|(&m, yi)| inv_mod((yi % m).to_u64().unwrap(), m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { moduli: moduli.to_vec(), product, y, z })
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn product(&self) -> &BigUint {
        &self.product
    }

    pub fn len(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moduli.is_empty()
    }

    /// `q/q_i`.
    pub fn y(&self, i: usize) -> &BigUint {
        &self.y[i]
    }

    /// `(q/q_i)⁻¹ mod q_i`.
    pub fn z(&self, i: usize) -> u64 {
        self.z[i]
    }

    pub fn coprime_with(&self, other: &RnsBase) -> bool {
        self.moduli.iter().all(|&a| other.moduli.iter().all(|&b| gcd(a, b) == 1))
    }

    pub fn join(&self, other: &RnsBase) -> Result<RnsBase> {
        if !self.coprime_with(other) {
            return Err(FheError::BaseOverlap);
        }
        RnsBase::new(&[self.moduli.clone(), other.moduli.clone()].concat())
    }

    /// The first `k` moduli.
    pub fn prefix(&self, k: usize) -> Result<RnsBase> {
        if k == 0 || k > self.len() {
            return Err(FheError::NotSubBase);
        }
        RnsBase::new(&self.moduli[..k])
    }

    fn check_len(&self, r: &[i64]) -> Result<()> {
        if r.len() != self.len() {
            return Err(FheError::LengthMismatch { expected: self.len(), got: r.len() });
        }
        Ok(())
    }
}

fn center(x: i128, m: u64) -> i64 {
    centered_u64(from_i128(x, m), m)
}

pub fn crt_to_rns(x: &BigInt, base: &RnsBase) -> Vec<i64> {
    base.moduli.iter().map(|&m| centered_u64(canonical(x, &BigUint::from(m)).to_u64().unwrap(), m)).collect()
}

/// `Σ a_i y_i z_i mod q`, canonical.
pub fn rns_to_int(r: &[i64], base: &RnsBase) -> Result<BigUint> {
    base.check_len(r)?;
    let mut acc = BigInt::zero();
    for (i, (&a, &m)) in r.iter().zip(&base.moduli).enumerate() {
        let v = mul_mod(from_i128(a as i128, m), base.z[i], m);
        acc += BigInt::from(&base.y[i] * v);
    }
    Ok(canonical(&acc, &base.product))
}

pub fn rns_to_centered(r: &[i64], base: &RnsBase) -> Result<BigInt> {
    Ok(center_canonical(&rns_to_int(r, base)?, &base.product))
}

/// Precomputed `y_i mod b_j` for converting from one base to another.
#[derive(Clone, Debug)]
pub struct BaseConverter {
    pub from: RnsBase,
    pub to: RnsBase,
    y_mod: Vec<Vec<u64>>,
}

impl BaseConverter {
    pub fn new(from: &RnsBase, to: &RnsBase) -> Result<Self> {
        if !from.coprime_with(to) {
            return Err(FheError::BaseOverlap);
        }
        let y_mod = to.moduli.iter().map(|&b| from.y.iter().map(|y| (y % b).to_u64().unwrap()).collect()).collect();
        Ok(Self { from: from.clone(), to: to.clone(), y_mod })
    }

    /// Centered `[x_i z_i]_{q_i}`.
    pub fn terms(&self, x: &[i64]) -> Vec<i64> {
        x.iter()
            .zip(&self.from.moduli)
            .zip(&self.from.z)
            .map(|((&a, &m), &z)| centered_u64(mul_mod(from_i128(a as i128, m), z, m), m))
            .collect()
    }

    pub fn convert(&self, x: &[i64]) -> Result<Vec<i64>> {
        self.from.check_len(x)?;
        let v = self.terms(x);
        Ok(self
            .to
            .moduli
            .iter()
            .zip(&self.y_mod)
            .map(|(&b, ys)| {
                let s: i128 = v.iter().zip(ys).map(|(&vi, &yi)| vi as i128 * yi as i128 % b as i128).sum();
                center(s, b)
            })
            .collect())
    }

    /// The integer `Σ [x_i z_i]_{q_i} y_i` that the conversion represents.
    pub fn lifted(&self, x: &[i64]) -> BigInt {
        self.terms(x).iter().zip(&self.from.y).map(|(&v, y)| BigInt::from(v) * BigInt::from(y.clone())).sum()
    }
}

/// `x + u·q` over the target base, `|u| ≤ k/2 + 1`.
pub fn fast_bconv(x: &[i64], from: &RnsBase, to: &RnsBase) -> Result<Vec<i64>> {
    BaseConverter::new(from, to)?.convert(x)
}

fn check_aux(b_alpha: u64, q: &RnsBase, b: &RnsBase) -> Result<()> {
    if !is_prime_u64(b_alpha) {
        return Err(FheError::BadAuxModulus(format!("{b_alpha} is not prime")));
    }
    if q.moduli.iter().chain(&b.moduli).any(|&m| gcd(m, b_alpha) != 1) {
        return Err(FheError::BadAuxModulus(format!("{b_alpha} shares a factor with the bases")));
    }
    if b_alpha <= q.len() as u64 + 2 {
        return Err(FheError::BadAuxModulus(format!("{b_alpha} too small for {} source moduli", q.len())));
    }
    Ok(())
}

/// Input `c = FastBConv([b_α·x]_q, q, b ∪ {b_α})` with `b_α` last. Output `x + u′q` over `b`, `u′ ∈ {−1, 0, 1}`.
pub fn small_mont(c: &[i64], q: &RnsBase, b: &RnsBase, b_alpha: u64) -> Result<Vec<i64>> {
    check_aux(b_alpha, q, b)?;
    if c.len() != b.len() + 1 {
        return Err(FheError::LengthMismatch { expected: b.len() + 1, got: c.len() });
    }
    let q_inv = inv_mod((q.product() % b_alpha).to_u64().unwrap(), b_alpha)?;
    let ca = from_i128(c[b.len()] as i128, b_alpha);
    let c_prime = centered_u64(mul_mod(ca, q_inv, b_alpha), b_alpha) as i128;
    b.moduli
        .iter()
        .zip(c)
        .map(|(&m, &ci)| {
            let qm = (q.product() % m).to_u64().unwrap() as i128;
            let diff = from_i128(ci as i128 - qm * c_prime % m as i128, m);
            let inv = inv_mod(b_alpha % m, m)?;
            Ok(centered_u64(mul_mod(diff, inv, m), m))
        })
        .collect()
}

/// `[b_α·x]_q`, `FastBConv` to `b ∪ {b_α}`, then `small_mont`.
pub fn small_mont_convert(x: &[i64], q: &RnsBase, b: &RnsBase, b_alpha: u64) -> Result<Vec<i64>> {
    check_aux(b_alpha, q, b)?;
    q.check_len(x)?;
    let scaled: Vec<i64> =
        x.iter().zip(&q.moduli).map(|(&a, &m)| center(a as i128 * (b_alpha % m) as i128, m)).collect();
    let ext = b.join(&RnsBase::new(&[b_alpha])?)?;
    let c = fast_bconv(&scaled, q, &ext)?;
    small_mont(&c, q, b, b_alpha)
}

/// Exact conversion of `x` given over `b ∪ {b_α}` (`b_α` last) to `q`.
/// `lambda` bounds `μ` in `|x|_b = x + μb`.
pub fn fast_bconv_ex(x: &[i64], b: &RnsBase, b_alpha: u64, q: &RnsBase, lambda: u64) -> Result<Vec<i64>> {
    if x.len() != b.len() + 1 {
        return Err(FheError::LengthMismatch { expected: b.len() + 1, got: x.len() });
    }
    if (b_alpha as u128) < 2 * (b.len() as u128 + lambda as u128) {
        return Err(FheError::InputTooLarge);
    }
    let alpha = RnsBase::new(&[b_alpha])?;
    if !b.coprime_with(&alpha) {
        return Err(FheError::BaseOverlap);
    }
    let x_hat = &x[..b.len()];
    let to_alpha = fast_bconv(x_hat, b, &alpha)?[0];
    let b_inv = inv_mod((b.product() % b_alpha).to_u64().unwrap(), b_alpha)?;
    let diff = from_i128(to_alpha as i128 - x[b.len()] as i128, b_alpha);
    let gamma = centered_u64(mul_mod(diff, b_inv, b_alpha), b_alpha) as i128;
    let to_q = fast_bconv(x_hat, b, q)?;
    Ok(to_q
        .iter()
        .zip(&q.moduli)
        .map(|(&v, &m)| center(v as i128 - gamma * (b.product() % m).to_u64().unwrap() as i128, m))
        .collect())
}

/// Residues over `q ∪ b` of `x + u·q`.
pub fn mod_raise_rns(x: &[i64], q: &RnsBase, b: &RnsBase) -> Result<Vec<i64>> {
    q.check_len(x)?;
    let ext = fast_bconv(x, q, b)?;
    Ok([x.to_vec(), ext].concat())
}

/// Residues over a sub-base.
pub fn mod_drop_rns(x: &[i64], base: &RnsBase, keep: &RnsBase) -> Result<Vec<i64>> {
    base.check_len(x)?;
    keep.moduli
        .iter()
        .map(|m| base.moduli.iter().position(|b| b == m).map(|i| x[i]).ok_or(FheError::NotSubBase))
        .collect()
}

/// The moduli of `full` after the prefix `q`.
pub fn trailing_base(full: &RnsBase, q: &RnsBase) -> Result<RnsBase> {
    if q.len() >= full.len() || full.moduli[..q.len()] != q.moduli[..] {
        return Err(FheError::NotSubBase);
    }
    RnsBase::new(&full.moduli[q.len()..])
}

/// `|b⁻¹|_q·(χ − χ̂)` over `q`, approximating `⌈χ/b⌋`.
pub fn mod_switch_rns(chi: &[i64], full: &RnsBase, q: &RnsBase) -> Result<Vec<i64>> {
    full.check_len(chi)?;
    let b = trailing_base(full, q)?;
    let chi_hat = fast_bconv(&chi[q.len()..], &b, q)?;
    q.moduli
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let inv = inv_mod((b.product() % m).to_u64().unwrap(), m)?;
            let d = from_i128(chi[i] as i128 - chi_hat[i] as i128, m);
            Ok(centered_u64(mul_mod(d, inv, m), m))
        })
        .collect()
}

/// Plaintext from the phase `ct(s)` given over `q`, through the auxiliary base `{γ, t}`.
pub fn bfv_decrypt_rns(ct_s: &[i64], q: &RnsBase, t: u64, gamma: u64) -> Result<u64> {
    q.check_len(ct_s)?;
    if gamma <= q.len() as u64 + 2 {
        return Err(FheError::GammaTooSmall);
    }
    let aux = RnsBase::new(&[gamma, t]).map_err(|_| FheError::BaseOverlap)?;
    let gt = gamma as u128 * t as u128;
    let scaled: Vec<i64> = ct_s
        .iter()
        .zip(&q.moduli)
        .map(|(&c, &m)| {
            let f = (gt % m as u128) as u64;
            centered_u64(mul_mod(from_i128(c as i128, m), f, m), m)
        })
        .collect();
    let y = fast_bconv(&scaled, q, &aux)?;
    let neg_q_inv = |m: u64| -> Result<u64> {
        let qm = (q.product() % m).to_u64().unwrap();
        Ok((m - inv_mod(qm, m)?) % m)
    };
    let y_gamma = centered_u64(mul_mod(from_i128(y[0] as i128, gamma), neg_q_inv(gamma)?, gamma), gamma);
    let y_t = mul_mod(from_i128(y[1] as i128, t), neg_q_inv(t)?, t);
    let g_inv = inv_mod(gamma % t, t)?;
    Ok(mul_mod(from_i128(y_t as i128 - y_gamma as i128, t), g_inv, t))
}

/// Coefficient-wise RNS form of a polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RnsPoly {
    pub base: RnsBase,
    pub residues: Vec<RingPoly>,
}

impl RnsPoly {
    pub fn n(&self) -> usize {
        self.residues[0].n()
    }

    pub fn from_coeff_vectors(base: &RnsBase, coeffs: &[Vec<i64>]) -> Result<Self> {
        let n = coeffs.len();
        let residues = (0..base.len())
            .map(|i| {
                let ring = RingParams::with_u64(n, base.moduli[i])?;
                let c: Vec<i64> = coeffs.iter().map(|v| v[i]).collect();
                Ok(RingPoly::from_i64(&ring, &c))
            })
            .collect::<Result<_>>()?;
        Ok(Self { base: base.clone(), residues })
    }

    /// Reduce a polynomial with coefficients read centered.
    pub fn from_poly(p: &RingPoly, base: &RnsBase) -> Result<Self> {
        let cs: Vec<Vec<i64>> = p.centered().iter().map(|c| crt_to_rns(c, base)).collect();
        Self::from_coeff_vectors(base, &cs)
    }

    /// One centered residue vector per coefficient.
    pub fn coeff_vectors(&self) -> Vec<Vec<i64>> {
        let cols: Vec<Vec<i64>> = self.residues.iter().map(|r| r.centered_i64()).collect();
        (0..self.n()).map(|j| cols.iter().map(|c| c[j]).collect()).collect()
    }

    /// CRT reconstruction into a ring whose modulus is the base product.
    pub fn to_poly(&self, ring: &Arc<RingParams>) -> Result<RingPoly> {
        if &ring.q != self.base.product() || ring.n != self.n() {
            return Err(FheError::ParamMismatch("ring differs from base product".into()));
        }
        let cs = self.coeff_vectors().iter().map(|v| rns_to_centered(v, &self.base)).collect::<Result<Vec<_>>>()?;
        Ok(RingPoly::from_bigints(ring, &cs))
    }

    /// Apply a scalar residue map to every coefficient.
    pub fn map_coeffs(&self, target: &RnsBase, f: impl Fn(&[i64]) -> Result<Vec<i64>>) -> Result<Self> {
        let out = self.coeff_vectors().iter().map(|v| f(v)).collect::<Result<Vec<_>>>()?;
        Self::from_coeff_vectors(target, &out)
    }

    pub fn fast_bconv(&self, to: &RnsBase) -> Result<Self> {
        let conv = BaseConverter::new(&self.base, to)?;
        self.map_coeffs(to, |v| conv.convert(v))
    }

    pub fn mod_raise(&self, b: &RnsBase) -> Result<Self> {
        let full = self.base.join(b)?;
        let conv = BaseConverter::new(&self.base, b)?;
        self.map_coeffs(&full, |v| Ok([v.to_vec(), conv.convert(v)?].concat()))
    }

    pub fn mod_drop(&self, keep: &RnsBase) -> Result<Self> {
        let residues = keep
            .moduli
            .iter()
            .map(|m| {
                self.base.moduli.iter().position(|b| b == m).map(|i| self.residues[i].clone()).ok_or(FheError::NotSubBase)
            })
            .collect::<Result<_>>()?;
        Ok(Self { base: keep.clone(), residues })
    }

    pub fn mod_switch(&self, q: &RnsBase) -> Result<Self> {
        self.map_coeffs(q, |v| mod_switch_rns(v, &self.base, q))
    }
}

/// Keys `GLWE(S·y_i·z_i)` for each modulus of `base`, under `to`.
pub fn decomp_mult_keys(
    s: &RingPoly,
    to: &GlweSecretKey,
    params: &GlweParams,
    base: &RnsBase,
    seed: &Seed,
) -> Result<Vec<GlweCiphertext>> {
    if params.q() != base.product() {
        return Err(FheError::ParamMismatch("key modulus differs from base product".into()));
    }
    let s = s.lift_to(&params.ring);
    Ok((0..base.len())
        .map(|i| {
            let f = BigInt::from(base.y(i) * base.z(i));
            encrypt_raw(&s.scalar_mul(&f), to, params, &seed.derive_index("digit", i as u64))
        })
        .collect())
}

/// `Σ A_i·key_i` with `A_i` the centered residue polynomial of `A`.
pub fn decomp_mult_rns(a: &RnsPoly, keys: &[GlweCiphertext]) -> Result<GlweCiphertext> {
    if keys.len() != a.base.len() {
        return Err(FheError::KeyCountMismatch { expected: a.base.len(), got: keys.len() });
    }
    let ring = keys[0].ring().clone();
    let mut acc = GlweCiphertext::trivial(keys[0].k(), RingPoly::zero(&ring));
    for (ai, key) in a.residues.iter().zip(keys) {
        acc = acc.add(&key.mul_plain(&ai.lift_to(&ring))?)?;
    }
    Ok(acc)
}
