//! Modular integer arithmetic, residue representations and prime generation.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{FheError, Result};

/// An integer paired with its modulus. Stored canonically in `[0, modulus)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigIntMod {
    value: BigUint,
    modulus: BigUint,
}

impl BigIntMod {
    pub fn new(x: &BigInt, modulus: &BigUint) -> Result<Self> {
        if modulus < &BigUint::from(2u8) {
            return Err(FheError::BadModulus(format!("{modulus} < 2")));
        }
        Ok(Self { value: canonical(x, modulus), modulus: modulus.clone() })
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn centered(&self) -> BigInt {
        centered_reduce(&BigInt::from(self.value.clone()), &self.modulus)
    }
}

/// Generated primes are `bit_length` bits wide and congruent to `congruence.0` modulo `congruence.1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeSpec {
    pub bit_length: u32,
    pub congruence: (u64, u64),
}

/// Canonical residue in `[0, q)`.
pub fn canonical(x: &BigInt, q: &BigUint) -> BigUint {
    let qi = BigInt::from(q.clone());
    x.mod_floor(&qi).to_biguint().expect("mod_floor is non-negative")
}

/// Centered residue: `[-q/2, q/2 - 1]` for even `q`, `[-(q-1)/2, (q-1)/2]` for odd `q`.
pub fn centered_reduce(x: &BigInt, q: &BigUint) -> BigInt {
    let r = canonical(x, q);
    let half_up = (q + 1u32) >> 1;
    if r >= half_up {
        BigInt::from(r) - BigInt::from(q.clone())
    } else {
        BigInt::from(r)
    }
}

/// Centered lift of an already canonical residue.
pub fn center_canonical(r: &BigUint, q: &BigUint) -> BigInt {
    let half_up = (q + 1u32) >> 1;
    if r >= &half_up {
        BigInt::from_biguint(Sign::Plus, r.clone()) - BigInt::from_biguint(Sign::Plus, q.clone())
    } else {
        BigInt::from_biguint(Sign::Plus, r.clone())
    }
}

/// `⌊a/b + 1/2⌋` for `b > 0`.
pub fn round_div(a: &BigInt, b: &BigInt) -> BigInt {
    debug_assert!(b.is_positive());
    let num: BigInt = a * 2 + b;
    num.div_floor(&(b * 2))
}

/// `⌊a·num/den + 1/2⌋`, the rescaling primitive used by every modulus switch.
pub fn scale_round(a: &BigInt, num: &BigUint, den: &BigUint) -> BigInt {
    round_div(&(a * BigInt::from(num.clone())), &BigInt::from(den.clone()))
}

pub fn mod_inverse(a: &BigInt, q: &BigUint) -> Result<BigUint> {
    let qi = BigInt::from(q.clone());
    let a = a.mod_floor(&qi);
    let e = a.extended_gcd(&qi);
    if !e.gcd.is_one() {
        return Err(FheError::NotInvertible(a.to_string(), q.to_string()));
    }
    Ok(canonical(&e.x, q))
}

pub fn pow_mod_big(base: &BigUint, exp: &BigUint, q: &BigUint) -> BigUint {
    base.modpow(exp, q)
}

#[inline]
pub fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    let s = a + b;
    if s >= q {
        s - q
    } else {
        s
    }
}

#[inline]
pub fn sub_mod(a: u64, b: u64, q: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + q - b
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

pub fn inv_mod(a: u64, q: u64) -> Result<u64> {
    let (mut r0, mut r1) = (q as i128, (a % q) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (s0, s1) = (s1, s0 - k * s1);
    }
    if r0 != 1 {
        return Err(FheError::NotInvertible(a.to_string(), q.to_string()));
    }
    Ok(s0.rem_euclid(q as i128) as u64)
}

/// Centered representative of a canonical `u64` residue.
#[inline]
pub fn centered_u64(x: u64, q: u64) -> i64 {
    if x >= q.div_ceil(2) {
        x as i64 - q as i64
    } else {
        x as i64
    }
}

#[inline]
pub fn from_signed(x: i64, q: u64) -> u64 {
    x.rem_euclid(q as i64) as u64
}

#[inline]
pub fn from_i128(x: i128, q: u64) -> u64 {
    x.rem_euclid(q as i128) as u64
}

/// Shoup precomputation for multiplying by a fixed `w` modulo `q < 2^63`.
#[derive(Clone, Copy, Debug)]
pub struct ShoupConst {
    pub w: u64,
    pub w_shoup: u64,
}

impl ShoupConst {
    pub fn new(w: u64, q: u64) -> Self {
        Self { w, w_shoup: (((w as u128) << 64) / q as u128) as u64 }
    }

    #[inline(always)]
    pub fn mul(&self, x: u64, q: u64) -> u64 {
        let hi = ((x as u128 * self.w_shoup as u128) >> 64) as u64;
        let r = x.wrapping_mul(self.w).wrapping_sub(hi.wrapping_mul(q));
        if r >= q {
            r - q
        } else {
            r
        }
    }
}

const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin over big integers; deterministic below 2^64, fixed 24 witnesses above.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let nm1 = n - &one;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    let witnesses = (0..24u64).map(|i| BigUint::from(MR_BASES[(i % 12) as usize] + 40 * (i / 12)));
    'witness: for a in witnesses {
        let mut x = a.modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime of exactly `bit_length` bits satisfying the congruence.
pub fn gen_ntt_prime(spec: PrimeSpec) -> Result<u64> {
    let (r, m) = spec.congruence;
    if spec.bit_length < 2 || spec.bit_length > 63 || m == 0 || m > 1u64 << spec.bit_length {
        return Err(FheError::NotFound(format!("{spec:?}")));
    }
    let lo = 1u64 << (spec.bit_length - 1);
    let hi = 1u64 << spec.bit_length;
    let r = r % m;
    let mut c = lo + (r + m - lo % m) % m;
    while c < hi {
        if is_prime_u64(c) {
            return Ok(c);
        }
        c = match c.checked_add(m) {
            Some(v) => v,
            None => break,
        };
    }
    Err(FheError::NotFound(format!("{spec:?}")))
}

/// The `count` largest primes below `2^bits` that are `≡ 1 mod m`, descending.
pub fn primes_below(bits: u32, m: u64, count: usize) -> Result<Vec<u64>> {
    let top = 1u64 << bits;
    let mut c = top - (top % m) + 1;
    if c >= top {
        c -= m;
    }
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if c < m {
            return Err(FheError::NotFound(format!("{count} primes below 2^{bits} = 1 mod {m}")));
        }
        if is_prime_u64(c) {
            out.push(c);
        }
        c -= m;
    }
    Ok(out)
}

/// Prime `≡ 1 mod m` closest to `target`, skipping anything in `exclude`.
pub fn prime_near(target: u64, m: u64, exclude: &[u64]) -> Result<u64> {
    let base = target - target % m + 1;
    for step in 0..(1u64 << 24) {
        for cand in [base.checked_add(step * m), base.checked_sub((step + 1) * m)].into_iter().flatten() {
            if cand > 2 && is_prime_u64(cand) && !exclude.contains(&cand) {
                return Ok(cand);
            }
        }
    }
    Err(FheError::NotFound(format!("prime near {target} = 1 mod {m}")))
}

/// Element of multiplicative order exactly `2n` modulo prime `t` (`n` a power of two).
///
/// Takes `x^((t-1)/2n)` for the first quadratic non-residue `x`.
pub fn find_primitive_2nth_root(t: u64, n: usize) -> Result<u64> {
    let two_n = 2 * n as u64;
    if !n.is_power_of_two() || t < 3 || (t - 1) % two_n != 0 || !is_prime_u64(t) {
        return Err(FheError::BadModulus(format!("{t} is not a prime = 1 mod {two_n}")));
    }
    let e = (t - 1) / two_n;
    for x in 2..t {
        let w = pow_mod(x, e, t);
        if pow_mod(w, n as u64, t) == t - 1 {
            return Ok(w);
        }
    }
    Err(FheError::NotFound(format!("2n-th root mod {t}")))
}

/// Multiplicative order of `w` modulo `t`, by brute force. Test helper for small moduli.
pub fn multiplicative_order(w: u64, t: u64) -> Option<u64> {
    let mut x = w % t;
    for k in 1..t {
        if x == 1 {
            return Some(k);
        }
        x = mul_mod(x, w, t);
    }
    None
}

pub fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

pub fn ubig(x: u64) -> BigUint {
    BigUint::from(x)
}

pub fn to_i64(x: &BigInt) -> Option<i64> {
    x.to_i64()
}

pub fn bit_len(x: &BigUint) -> u64 {
    if x.is_zero() {
        0
    } else {
        x.bits()
    }
}

pub fn abs_bits(x: &BigInt) -> u64 {
    x.abs().to_biguint().map(|m| bit_len(&m)).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn centered_examples() {
        let c = |x: i64, q: u64| centered_reduce(&big(x), &ubig(q));
        assert_eq!(c(7, 5), big(2));
        assert_eq!(c(6, 8), big(-2));
        assert_eq!(c(-4, 8), big(-4));
        assert_eq!(c(4, 8), big(-4));
        assert_eq!(c(3, 8), big(3));
        assert_eq!(c(-2, 5), big(-2));
        assert_eq!(c(3, 5), big(-2));
    }

    #[test]
    fn centered_range_brute_force() {
        for q in 2u64..40 {
            let lo = -(q.div_ceil(2) as i64);
            let hi = (q / 2) as i64 - if q % 2 == 0 { 1 } else { 0 };
            for x in -100i64..100 {
                let c = centered_reduce(&big(x), &ubig(q)).to_i64().unwrap();
                assert!((x - c).rem_euclid(q as i64) == 0);
                if q % 2 == 0 {
                    assert!(lo <= c && c <= hi, "q={q} x={x} c={c}");
                } else {
                    assert!(c.abs() <= (q as i64 - 1) / 2);
                }
                assert_eq!(c, centered_u64(x.rem_euclid(q as i64) as u64, q));
            }
        }
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(mod_inverse(&big(3), &ubig(11)).unwrap(), ubig(4));
        assert_eq!(mod_inverse(&big(1), &ubig(97)).unwrap(), ubig(1));
        let brute = (0..16u64).find(|y| 7 * y % 16 == 1).unwrap();
        assert_eq!(mod_inverse(&big(7), &ubig(16)).unwrap(), ubig(brute));
        assert!(matches!(mod_inverse(&big(4), &ubig(16)), Err(FheError::NotInvertible(..))));
        assert_eq!(inv_mod(3, 11).unwrap(), 4);
        assert!(inv_mod(6, 9).is_err());
    }

    #[test]
    fn rounding_half_up() {
        assert_eq!(round_div(&big(-25), &big(2)), big(-12));
        assert_eq!(round_div(&big(7), &big(2)), big(4));
        assert_eq!(round_div(&big(-7), &big(2)), big(-3));
        assert_eq!(round_div(&big(5), &big(3)), big(2));
    }

    #[test]
    fn primitive_roots() {
        let w = find_primitive_2nth_root(17, 4).unwrap();
        assert!([2, 8, 15, 9].contains(&w));
        assert_eq!(w, 9);
        let w = find_primitive_2nth_root(17, 8).unwrap();
        assert!([3, 5, 6, 7, 10, 11, 12, 14].contains(&w));
        assert_eq!(w, 3);
        let w = find_primitive_2nth_root(5, 2).unwrap();
        assert!([2, 3].contains(&w));
        assert!(matches!(find_primitive_2nth_root(19, 4), Err(FheError::BadModulus(_))));
    }

    #[test]
    fn root_order_exact() {
        for (t, n) in [(17u64, 4usize), (17, 8), (97, 16), (257, 128), (7681, 256)] {
            let w = find_primitive_2nth_root(t, n).unwrap();
            assert_eq!(multiplicative_order(w, t), Some(2 * n as u64));
        }
    }

    #[test]
    fn prime_generation() {
        assert_eq!(gen_ntt_prime(PrimeSpec { bit_length: 5, congruence: (1, 8) }).unwrap(), 17);
        assert_eq!(gen_ntt_prime(PrimeSpec { bit_length: 2, congruence: (1, 2) }).unwrap(), 3);
        let p = gen_ntt_prime(PrimeSpec { bit_length: 30, congruence: (1, 2048) }).unwrap();
        assert!(is_prime_u64(p) && p % 2048 == 1 && p >> 29 == 1);
        let brute: Vec<u64> = (2..2000u64).filter(|&x| (2..x).take_while(|d| d * d <= x).all(|d| x % d != 0)).collect();
        for x in 0..2000u64 {
            assert_eq!(is_prime_u64(x), brute.contains(&x), "{x}");
        }
        let ps = primes_below(61, 1 << 17, 3).unwrap();
        assert!(ps.windows(2).all(|w| w[0] > w[1]));
        assert!(ps.iter().all(|&p| is_prime_u64(p) && p % (1 << 17) == 1 && p < 1 << 61));
    }

    #[test]
    fn big_primality_agrees_with_u64() {
        let m61 = ubig((1u64 << 61) - 1);
        assert!(is_prime(&m61));
        let m127 = (BigUint::one() << 127u32) - 1u32;
        assert!(is_prime(&m127));
        assert!(!is_prime(&(&m127 * &m61)));
    }

    #[test]
    fn shoup_matches_u128() {
        let q = (1u64 << 61) - 1;
        for (w, x) in [(3u64, q - 1), (q - 2, q - 5), (123456789, 987654321)] {
            assert_eq!(ShoupConst::new(w, q).mul(x, q), mul_mod(w, x, q));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn centered_roundtrip(x in any::<i64>(), q in 2u64..1_000_000) {
            let c = centered_reduce(&big(x), &ubig(q));
            prop_assert_eq!(canonical(&c, &ubig(q)), canonical(&big(x), &ubig(q)));
        }

        #[test]
        fn inverse_is_inverse(a in 1u64..1_000_000_007, q in 2u64..1_000_000_007) {
            prop_assume!(num_integer::gcd(a, q) == 1);
            let inv = mod_inverse(&big(a as i64), &ubig(q)).unwrap();
            prop_assert_eq!((ubig(a) * inv) % ubig(q), ubig(1) % ubig(q));
        }
    }
}
