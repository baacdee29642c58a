//! The negacyclic ring `Z_q[X]/(X^n+1)`.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};

use crate::error::{FheError, Result};
use crate::modular::{canonical, center_canonical, is_prime_u64, mul_mod, scale_round};
use crate::prng::Seed;
use crate::transform::{exact_negacyclic, schoolbook_negacyclic, tables, NttTables};

#[derive(Debug)]
pub struct RingParams {
    pub n: usize,
    pub q: BigUint,
    ntt: Option<Arc<NttTables>>,
}

impl RingParams {
    pub fn new(n: usize, q: BigUint) -> Result<Arc<Self>> {
        if n == 0 || !n.is_power_of_two() {
            return Err(FheError::ParamMismatch(format!("ring degree {n} is not a power of two")));
        }
        if q < BigUint::from(2u8) {
            return Err(FheError::BadModulus(format!("{q} < 2")));
        }
        let ntt = match q.to_u64() {
            Some(p) if p < 1 << 62 && (p - 1) % (2 * n as u64) == 0 && is_prime_u64(p) => Some(tables(n, p)?),
            _ => None,
        };
        Ok(Arc::new(Self { n, q, ntt }))
    }

    pub fn with_u64(n: usize, q: u64) -> Result<Arc<Self>> {
        Self::new(n, BigUint::from(q))
    }

    pub fn ntt(&self) -> Option<&Arc<NttTables>> {
        self.ntt.as_ref()
    }

    pub fn same(&self, other: &RingParams) -> bool {
        self.n == other.n && self.q == other.q
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    Coefficient,
    Evaluation,
}

#[derive(Clone, Debug)]
pub struct RingPoly {
    ring: Arc<RingParams>,
    coeffs: Vec<BigUint>,
    form: Form,
}

impl PartialEq for RingPoly {
    fn eq(&self, other: &Self) -> bool {
        self.ring.same(&other.ring) && self.form == other.form && self.coeffs == other.coeffs
    }
}

impl Eq for RingPoly {}

impl RingPoly {
    pub fn zero(ring: &Arc<RingParams>) -> Self {
        Self { ring: ring.clone(), coeffs: vec![BigUint::zero(); ring.n], form: Form::Coefficient }
    }

    /// Coefficients beyond `n` are folded back with `X^n = -1`.
    pub fn from_bigints(ring: &Arc<RingParams>, c: &[BigInt]) -> Self {
        let n = ring.n;
        let mut acc = vec![BigInt::zero(); n];
        for (i, x) in c.iter().enumerate() {
            if (i / n) % 2 == 0 {
                acc[i % n] += x;
            } else {
                acc[i % n] -= x;
            }
        }
        Self { ring: ring.clone(), coeffs: acc.iter().map(|x| canonical(x, &ring.q)).collect(), form: Form::Coefficient }
    }

    pub fn from_i64(ring: &Arc<RingParams>, c: &[i64]) -> Self {
        Self::from_bigints(ring, &c.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>())
    }

    pub fn from_u64(ring: &Arc<RingParams>, c: &[u64]) -> Self {
        Self::from_u64_form(ring.clone(), c, Form::Coefficient)
    }

    pub fn from_u64_form(ring: Arc<RingParams>, c: &[u64], form: Form) -> Self {
        assert_eq!(c.len(), ring.n);
        let coeffs = c.iter().map(|&x| BigUint::from(x) % &ring.q).collect();
        Self { ring, coeffs, form }
    }

    pub fn from_biguints(ring: &Arc<RingParams>, c: Vec<BigUint>) -> Result<Self> {
        if c.len() != ring.n {
            return Err(FheError::LengthMismatch { expected: ring.n, got: c.len() });
        }
        let coeffs = c.into_iter().map(|x| x % &ring.q).collect();
        Ok(Self { ring: ring.clone(), coeffs, form: Form::Coefficient })
    }

    pub fn constant(ring: &Arc<RingParams>, c: &BigInt) -> Self {
        let mut p = Self::zero(ring);
        p.coeffs[0] = canonical(c, &ring.q);
        p
    }

    /// `c·X^e` for any integer `e`.
    pub fn monomial(ring: &Arc<RingParams>, c: &BigInt, e: i64) -> Self {
        Self::constant(ring, c).rotate_coeffs(-e)
    }

    pub fn ring(&self) -> &Arc<RingParams> {
        &self.ring
    }

    pub fn n(&self) -> usize {
        self.ring.n
    }

    pub fn modulus(&self) -> &BigUint {
        &self.ring.q
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn centered(&self) -> Vec<BigInt> {
        self.coeffs.iter().map(|c| center_canonical(c, &self.ring.q)).collect()
    }

    /// Centered coefficients; panics if one does not fit an `i64`.
    pub fn centered_i64(&self) -> Vec<i64> {
        self.centered().iter().map(|x| x.to_i64().expect("coefficient exceeds i64")).collect()
    }

    pub fn to_u64_vec(&self) -> Vec<u64> {
        self.coeffs.iter().map(|c| c.to_u64().expect("coefficient exceeds u64")).collect()
    }

    /// Largest centered coefficient magnitude.
    pub fn inf_norm(&self) -> BigUint {
        self.centered().iter().map(|x| x.magnitude().clone()).max().unwrap_or_default()
    }

    fn check(&self, other: &RingPoly) {
        assert!(self.ring.same(&other.ring), "operands live in different rings");
        assert_eq!(self.form, other.form, "operands are in different forms");
    }

    fn map2(&self, other: &RingPoly, f: impl Fn(&BigUint, &BigUint) -> BigUint) -> RingPoly {
        self.check(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect();
        RingPoly { ring: self.ring.clone(), coeffs, form: self.form }
    }

    pub fn add(&self, other: &RingPoly) -> RingPoly {
        let q = &self.ring.q;
        self.map2(other, |a, b| {
            let s = a + b;
            if &s >= q {
                s - q
            } else {
                s
            }
        })
    }

    pub fn sub(&self, other: &RingPoly) -> RingPoly {
        let q = &self.ring.q;
        self.map2(other, |a, b| if a >= b { a - b } else { q - b + a })
    }

    pub fn neg(&self) -> RingPoly {
        let q = &self.ring.q;
        let coeffs = self.coeffs.iter().map(|a| if a.is_zero() { BigUint::zero() } else { q - a }).collect();
        RingPoly { ring: self.ring.clone(), coeffs, form: self.form }
    }

    pub fn scalar_mul(&self, c: &BigInt) -> RingPoly {
        let q = &self.ring.q;
        let c = canonical(c, q);
        let coeffs = self.coeffs.iter().map(|a| (a * &c) % q).collect();
        RingPoly { ring: self.ring.clone(), coeffs, form: self.form }
    }

    /// Ring product. Uses the NTT when `q` is an NTT prime for this degree,
    /// otherwise an exact integer product of centered lifts reduced mod `q`.
    pub fn mul(&self, other: &RingPoly) -> RingPoly {
        self.check(other);
        let ring = &self.ring;
        if self.form == Form::Evaluation {
            let p = ring.ntt.as_ref().expect("evaluation form requires NTT tables").q;
            let v: Vec<u64> =
                self.to_u64_vec().iter().zip(other.to_u64_vec()).map(|(a, b)| mul_mod(*a, b, p)).collect();
            return RingPoly::from_u64_form(ring.clone(), &v, Form::Evaluation);
        }
        if let Some(t) = &ring.ntt {
            let v = t.negacyclic_mul(&self.to_u64_vec(), &other.to_u64_vec());
            return RingPoly::from_u64(ring, &v);
        }
        RingPoly::from_bigints(ring, &exact_negacyclic(&self.centered(), &other.centered()))
    }

    /// Reference product by the schoolbook rule.
    pub fn mul_schoolbook(&self, other: &RingPoly) -> RingPoly {
        self.check(other);
        assert_eq!(self.form, Form::Coefficient);
        let a: Vec<BigInt> = self.coeffs.iter().map(|c| BigInt::from(c.clone())).collect();
        let b: Vec<BigInt> = other.coeffs.iter().map(|c| BigInt::from(c.clone())).collect();
        RingPoly::from_bigints(&self.ring, &schoolbook_negacyclic(&a, &b))
    }

    /// Product with a small signed polynomial given by its integer coefficients.
    pub fn mul_small(&self, small: &[BigInt]) -> RingPoly {
        assert_eq!(self.form, Form::Coefficient);
        let other = RingPoly::from_bigints(&self.ring, small);
        self.mul(&other)
    }

    /// `f·X^{-h}`: a left rotation by `h` where wrapped coefficients change sign.
    pub fn rotate_coeffs(&self, h: i64) -> RingPoly {
        assert_eq!(self.form, Form::Coefficient);
        let n = self.ring.n;
        let m = 2 * n as i64;
        let h = h.rem_euclid(m) as usize;
        let q = &self.ring.q;
        let mut coeffs = vec![BigUint::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            // X^i · X^{-h} = X^{i + 2n - h}
            let e = (i + 2 * n - h) % (2 * n);
            if e < n {
                coeffs[e] = c.clone();
            } else if !c.is_zero() {
                coeffs[e - n] = q - c;
            }
        }
        RingPoly { ring: self.ring.clone(), coeffs, form: Form::Coefficient }
    }

    /// `f·X^e`.
    pub fn mul_monomial(&self, e: i64) -> RingPoly {
        self.rotate_coeffs(-e)
    }

    /// `f(X^k)` for odd `k`.
    pub fn apply_automorphism(&self, k: i64) -> Result<RingPoly> {
        if k.rem_euclid(2) == 0 {
            return Err(FheError::BadExponent(k));
        }
        assert_eq!(self.form, Form::Coefficient);
        let n = self.ring.n;
        let m = 2 * n as u64;
        let k = k.rem_euclid(m as i64) as u64;
        let q = &self.ring.q;
        let mut coeffs = vec![BigUint::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            let e = ((i as u64 * k) % m) as usize;
            if e < n {
                coeffs[e] = c.clone();
            } else if !c.is_zero() {
                coeffs[e - n] = q - c;
            }
        }
        Ok(RingPoly { ring: self.ring.clone(), coeffs, form: Form::Coefficient })
    }

    /// Canonical coefficients reduced into another modulus (used when the new modulus divides the old).
    pub fn reduce_to(&self, ring: &Arc<RingParams>) -> RingPoly {
        assert_eq!(ring.n, self.ring.n);
        assert_eq!(self.form, Form::Coefficient);
        let coeffs = self.coeffs.iter().map(|c| c % &ring.q).collect();
        RingPoly { ring: ring.clone(), coeffs, form: Form::Coefficient }
    }

    /// Centered lift into another modulus.
    pub fn lift_to(&self, ring: &Arc<RingParams>) -> RingPoly {
        assert_eq!(ring.n, self.ring.n);
        assert_eq!(self.form, Form::Coefficient);
        RingPoly::from_bigints(ring, &self.centered())
    }

    /// `⌈c·num/den⌋` of each centered coefficient, placed in `ring`.
    pub fn scale_round_to(&self, ring: &Arc<RingParams>, num: &BigUint, den: &BigUint) -> RingPoly {
        assert_eq!(ring.n, self.ring.n);
        assert_eq!(self.form, Form::Coefficient);
        let c: Vec<BigInt> = self.centered().iter().map(|x| scale_round(x, num, den)).collect();
        RingPoly::from_bigints(ring, &c)
    }

    pub fn to_evaluation(&self) -> Result<RingPoly> {
        match self.form {
            Form::Evaluation => Ok(self.clone()),
            Form::Coefficient => {
                let t = self.ring.ntt.as_ref().ok_or(FheError::TableMismatch)?;
                Ok(RingPoly::from_u64_form(self.ring.clone(), &t.forward(&self.to_u64_vec()), Form::Evaluation))
            }
        }
    }

    pub fn to_coefficient(&self) -> Result<RingPoly> {
        match self.form {
            Form::Coefficient => Ok(self.clone()),
            Form::Evaluation => {
                let t = self.ring.ntt.as_ref().ok_or(FheError::TableMismatch)?;
                Ok(RingPoly::from_u64_form(self.ring.clone(), &t.inverse(&self.to_u64_vec()), Form::Coefficient))
            }
        }
    }
}

fn check_pair(a: &RingPoly, b: &RingPoly) -> Result<()> {
    if !a.ring.same(&b.ring) {
        return Err(FheError::ParamMismatch(format!(
            "(n={}, q={}) vs (n={}, q={})",
            a.ring.n, a.ring.q, b.ring.n, b.ring.q
        )));
    }
    if a.form != b.form {
        return Err(FheError::ParamMismatch("operands are in different forms".into()));
    }
    Ok(())
}

pub fn poly_add(a: &RingPoly, b: &RingPoly) -> Result<RingPoly> {
    check_pair(a, b)?;
    Ok(a.add(b))
}

pub fn poly_sub(a: &RingPoly, b: &RingPoly) -> Result<RingPoly> {
    check_pair(a, b)?;
    Ok(a.sub(b))
}

pub fn poly_negacyclic_mul(a: &RingPoly, b: &RingPoly) -> Result<RingPoly> {
    check_pair(a, b)?;
    Ok(a.mul(b))
}

pub fn rotate_coeffs(f: &RingPoly, h: i64) -> RingPoly {
    f.rotate_coeffs(h)
}

pub fn apply_automorphism(f: &RingPoly, k: i64) -> Result<RingPoly> {
    f.apply_automorphism(k)
}

/// Rounded Gaussian with a hard cap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSampler {
    pub sigma: f64,
    pub bound: i64,
}

impl NoiseSampler {
    /// Cap at `⌈6σ⌉`.
    pub fn new(sigma: f64) -> Self {
        Self { sigma, bound: (6.0 * sigma).ceil() as i64 }
    }

    pub fn with_bound(sigma: f64, bound: i64) -> Self {
        Self { sigma, bound }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        if self.sigma <= 0.0 || self.bound == 0 {
            return 0;
        }
        let normal = Normal::new(0.0, self.sigma).expect("finite sigma");
        loop {
            let r = (normal.sample(rng) + 0.5).floor() as i64;
            if r.abs() <= self.bound {
                return r;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleKind {
    Uniform,
    Ternary,
    Binary,
    Gaussian,
}

/// Uniform value in `[0, q)` by rejection on the bit length of `q`.
pub fn uniform_below<R: RngCore + ?Sized>(q: &BigUint, rng: &mut R) -> BigUint {
    if let Some(q64) = q.to_u64() {
        return BigUint::from(rng.random_range(0..q64));
    }
    let bits = q.bits();
    let bytes = bits.div_ceil(8) as usize;
    let excess = (bytes as u64) * 8 - bits;
    let mut buf = vec![0u8; bytes];
    loop {
        rng.fill_bytes(&mut buf);
        buf[bytes - 1] &= 0xffu8 >> excess;
        let x = BigUint::from_bytes_le(&buf);
        if &x < q {
            return x;
        }
    }
}

/// Small signed coefficients for the given kind; uniform is not small and is rejected here.
pub fn sample_small<R: RngCore + ?Sized>(kind: SampleKind, n: usize, sampler: &NoiseSampler, rng: &mut R) -> Vec<i64> {
    (0..n)
        .map(|_| match kind {
            SampleKind::Ternary => rng.random_range(-1i64..=1),
            SampleKind::Binary => rng.random_range(0i64..=1),
            SampleKind::Gaussian => sampler.sample(rng),
            SampleKind::Uniform => panic!("uniform samples are not small"),
        })
        .collect()
}

pub fn sample_poly_with<R: RngCore + ?Sized>(
    kind: SampleKind,
    ring: &Arc<RingParams>,
    sampler: &NoiseSampler,
    rng: &mut R,
) -> RingPoly {
    match kind {
        SampleKind::Uniform => {
            let coeffs = (0..ring.n).map(|_| uniform_below(&ring.q, rng)).collect();
            RingPoly { ring: ring.clone(), coeffs, form: Form::Coefficient }
        }
        _ => RingPoly::from_i64(ring, &sample_small(kind, ring.n, sampler, rng)),
    }
}

pub fn sample_poly(kind: SampleKind, ring: &Arc<RingParams>, sampler: &NoiseSampler, seed: &Seed) -> RingPoly {
    sample_poly_with(kind, ring, sampler, &mut seed.rng())
}

/// `Σ a_i·b_i` over ring elements.
pub fn inner_product(a: &[RingPoly], b: &[RingPoly]) -> RingPoly {
    assert_eq!(a.len(), b.len());
    assert!(!a.is_empty());
    let mut acc = a[0].mul(&b[0]);
    for (x, y) in a.iter().zip(b).skip(1) {
        acc = acc.add(&x.mul(y));
    }
    acc
}

/// Integer power of two as `BigUint`.
pub fn pow2(e: u32) -> BigUint {
    BigUint::one() << e
}

/// `x mod q` as a signed big integer in the centered range, for plain integers.
pub fn centered_of(x: &BigInt, q: &BigUint) -> BigInt {
    let r = x.mod_floor(&BigInt::from_biguint(Sign::Plus, q.clone()));
    center_canonical(&r.to_biguint().unwrap(), q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn ring(n: usize, q: u64) -> Arc<RingParams> {
        RingParams::with_u64(n, q).unwrap()
    }

    #[test]
    fn add_small_example() {
        let r = ring(2, 5);
        let s = poly_add(&RingPoly::from_i64(&r, &[1, 2]), &RingPoly::from_i64(&r, &[3, 1])).unwrap();
        assert_eq!(s, RingPoly::from_i64(&r, &[4, 3]));
        let f = RingPoly::from_i64(&r, &[4, 1]);
        assert_eq!(poly_add(&f, &RingPoly::zero(&r)).unwrap(), f);
        assert!(matches!(poly_add(&f, &RingPoly::zero(&ring(2, 7))), Err(FheError::ParamMismatch(_))));
    }

    #[test]
    fn reduction_by_x_squared_plus_one() {
        let r = ring(2, 7);
        let f = RingPoly::from_i64(&r, &[10, 6, 11, 3, 1]);
        let one = RingPoly::constant(&r, &BigInt::one());
        assert_eq!(poly_negacyclic_mul(&f, &one).unwrap(), RingPoly::from_i64(&r, &[0, 3]));
    }

    #[test]
    fn rotation_examples() {
        let r = ring(4, 8);
        let f = RingPoly::from_i64(&r, &[2, 3, -4, -1]);
        assert_eq!(f.rotate_coeffs(1), RingPoly::from_i64(&r, &[3, -4, -1, -2]));
        assert_eq!(f.rotate_coeffs(3), RingPoly::from_i64(&r, &[-1, -2, -3, -4]));
        assert_eq!(f.rotate_coeffs(0), f);
        assert_eq!(f.rotate_coeffs(4), f.neg());
        assert_eq!(f.rotate_coeffs(-1), f.rotate_coeffs(7));
    }

    #[test]
    fn automorphism_example() {
        let r = ring(4, 1 << 16);
        let f = RingPoly::from_i64(&r, &[2355, 1195, 1485, 2933]);
        assert_eq!(f.apply_automorphism(5).unwrap(), RingPoly::from_i64(&r, &[2355, -1195, 1485, -2933]));
        assert_eq!(f.apply_automorphism(1).unwrap(), f);
        assert_eq!(f.apply_automorphism(4), Err(FheError::BadExponent(4)));
    }

    #[test]
    fn ntt_and_exact_paths_agree_with_schoolbook() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let s = NoiseSampler::new(3.2);
        // 7681 ≡ 1 mod 512: NTT path. 2^40: exact multi-prime path.
        for q in [7681u64, 1 << 40, 1_000_003] {
            let r = ring(64, q);
            for _ in 0..20 {
                let a = sample_poly_with(SampleKind::Uniform, &r, &s, &mut rng);
                let b = sample_poly_with(SampleKind::Uniform, &r, &s, &mut rng);
                assert_eq!(a.mul(&b), a.mul_schoolbook(&b));
            }
        }
        assert!(ring(64, 7681).ntt().is_some());
        assert!(ring(64, 1 << 40).ntt().is_none());
    }

    #[test]
    fn big_modulus_product() {
        let q = (BigUint::one() << 200u32) - 75u32;
        let r = RingParams::new(16, q).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let s = NoiseSampler::new(1.0);
        let a = sample_poly_with(SampleKind::Uniform, &r, &s, &mut rng);
        let b = sample_poly_with(SampleKind::Uniform, &r, &s, &mut rng);
        assert_eq!(a.mul(&b), a.mul_schoolbook(&b));
    }

    #[test]
    fn samplers() {
        let r = ring(8, 97);
        let s = NoiseSampler::new(3.2);
        let seed = Seed::from_u64(1);
        let t = sample_poly(SampleKind::Ternary, &r, &s, &seed);
        assert!(t.centered_i64().iter().all(|c| (-1..=1).contains(c)));
        assert_eq!(t, sample_poly(SampleKind::Ternary, &r, &s, &seed));
        assert_ne!(t, sample_poly(SampleKind::Ternary, &r, &s, &Seed::from_u64(2)));
        let mut rng = seed.rng();
        let draws: Vec<i64> = (0..10_000).map(|_| s.sample(&mut rng)).collect();
        assert_eq!(s.bound, 20);
        assert!(draws.iter().all(|e| e.abs() <= s.bound));
        let mean = draws.iter().sum::<i64>() as f64 / 1e4;
        let var = draws.iter().map(|&e| (e as f64 - mean).powi(2)).sum::<f64>() / 1e4;
        assert!(mean.abs() < 0.15 && (var.sqrt() - 3.2).abs() < 0.15, "mean {mean} sd {}", var.sqrt());
        assert_eq!(NoiseSampler::new(0.0).sample(&mut rng), 0);
    }

    #[test]
    fn uniform_big_is_in_range() {
        let q = (BigUint::one() << 130u32) + 51u32;
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let mut top = false;
        for _ in 0..2000 {
            let x = uniform_below(&q, &mut rng);
            assert!(x < q);
            top |= x.bits() == 131;
        }
        let _ = top;
    }

    #[test]
    fn evaluation_form_roundtrip() {
        let r = ring(16, 97);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let s = NoiseSampler::new(1.0);
        let a = sample_poly_with(SampleKind::Uniform, &r, &s, &mut rng);
        let b = sample_poly_with(SampleKind::Uniform, &r, &s, &mut rng);
        let ea = a.to_evaluation().unwrap();
        let eb = b.to_evaluation().unwrap();
        assert_eq!(ea.mul(&eb).to_coefficient().unwrap(), a.mul(&b));
        assert_eq!(ea.add(&eb).to_coefficient().unwrap(), a.add(&b));
        assert_eq!(ring(16, 96).ntt().map(|_| ()), None);
        assert_eq!(RingPoly::zero(&ring(16, 96)).to_evaluation(), Err(FheError::TableMismatch));
    }

    fn arb_poly(n: usize, q: u64) -> impl Strategy<Value = RingPoly> {
        proptest::collection::vec(0..q, n).prop_map(move |c| RingPoly::from_u64(&ring(n, q), &c))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn add_commutes(a in arb_poly(8, 1 << 20), b in arb_poly(8, 1 << 20)) {
            prop_assert_eq!(a.add(&b), b.add(&a));
        }

        #[test]
        fn rotation_composes(f in arb_poly(8, 257), h1 in 0i64..16, h2 in 0i64..16) {
            prop_assert_eq!(f.rotate_coeffs((h1 + h2) % 16), f.rotate_coeffs(h1).rotate_coeffs(h2));
            prop_assert_eq!(f.rotate_coeffs(8), f.neg());
        }

        #[test]
        fn ntt_product_is_schoolbook(a in arb_poly(16, 7681), b in arb_poly(16, 7681)) {
            prop_assert_eq!(a.mul(&b), a.mul_schoolbook(&b));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn automorphism_is_ring_hom(
            a in arb_poly(16, 7681), b in arb_poly(16, 7681), c in arb_poly(16, 7681), kk in 0i64..16
        ) {
            let k = 2 * kk + 1;
            let s = |p: &RingPoly| p.apply_automorphism(k).unwrap();
            prop_assert_eq!(s(&a.add(&b)), s(&a).add(&s(&b)));
            prop_assert_eq!(s(&a.mul(&c)), s(&a).mul(&s(&c)));
            let inv = crate::modular::inv_mod(k as u64, 32).unwrap() as i64;
            prop_assert_eq!(s(&a).apply_automorphism(inv).unwrap(), a);
        }
    }
}
