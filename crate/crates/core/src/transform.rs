//! Negacyclic NTT over word-size primes, exact big-integer products via several
//! NTT primes, and the slot encoding matrices over `Z_t` and `C`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{FheError, Result};
use crate::modular::{
    abs_bits, find_primitive_2nth_root, inv_mod, is_prime_u64, mul_mod, pow_mod, primes_below, ShoupConst,
};
use crate::poly::{Form, RingPoly};

#[derive(Debug)]
pub struct NttTables {
    pub n: usize,
    pub q: u64,
    pub omega: u64,
    pub n_inv: u64,
    /// `ω^(2i+1)` for `i < n`: the evaluation point of slot `i`.
    pub powers: Vec<u64>,
    pub inv_powers: Vec<u64>,
    psi_rev: Vec<ShoupConst>,
    psi_inv_rev: Vec<ShoupConst>,
    n_inv_shoup: ShoupConst,
    bitrev: Vec<usize>,
}

fn bit_reverse(i: usize, log_n: u32) -> usize {
    if log_n == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - log_n)
    }
}

impl NttTables {
    pub fn new(n: usize, q: u64) -> Result<Self> {
        let omega = find_primitive_2nth_root(q, n)?;
        Self::with_root(n, q, omega)
    }

    pub fn with_root(n: usize, q: u64, omega: u64) -> Result<Self> {
        if !n.is_power_of_two() || q >= 1 << 62 || !is_prime_u64(q) || (q - 1) % (2 * n as u64) != 0 {
            return Err(FheError::BadModulus(format!("{q} does not support a size-{n} negacyclic NTT")));
        }
        if pow_mod(omega, n as u64, q) != q - 1 {
            return Err(FheError::BadModulus(format!("{omega} is not a primitive {}-th root mod {q}", 2 * n)));
        }
        let log_n = n.trailing_zeros();
        let omega_inv = inv_mod(omega, q)?;
        let mut psi_rev = vec![ShoupConst::new(1, q); n];
        let mut psi_inv_rev = vec![ShoupConst::new(1, q); n];
        for i in 0..n {
            let r = bit_reverse(i, log_n) as u64;
            psi_rev[i] = ShoupConst::new(pow_mod(omega, r, q), q);
            psi_inv_rev[i] = ShoupConst::new(pow_mod(omega_inv, r, q), q);
        }
        let n_inv = inv_mod(n as u64, q)?;
        let powers = (0..n as u64).map(|i| pow_mod(omega, 2 * i + 1, q)).collect();
        let inv_powers = (0..n as u64).map(|i| pow_mod(omega_inv, 2 * i + 1, q)).collect();
        Ok(Self {
            n,
            q,
            omega,
            n_inv,
            powers,
            inv_powers,
            psi_rev,
            psi_inv_rev,
            n_inv_shoup: ShoupConst::new(n_inv, q),
            bitrev: (0..n).map(|i| bit_reverse(i, log_n)).collect(),
        })
    }

    /// In-place forward transform; output index `j` holds `f(ω^(2·rev(j)+1))`.
    pub fn forward_br(&self, a: &mut [u64]) {
        let q = self.q;
        let n = self.n;
        let mut t = n;
        let mut m = 1;
        while m < n {
            t >>= 1;
            for i in 0..m {
                let j1 = 2 * i * t;
                let s = self.psi_rev[m + i];
                let (lo, hi) = a[j1..j1 + 2 * t].split_at_mut(t);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let u = *x;
                    let v = s.mul(*y, q);
                    let sum = u + v;
                    *x = if sum >= q { sum - q } else { sum };
                    *y = if u >= v { u - v } else { u + q - v };
                }
            }
            m <<= 1;
        }
    }

    pub fn inverse_br(&self, a: &mut [u64]) {
        let q = self.q;
        let n = self.n;
        let mut t = 1;
        let mut m = n;
        while m > 1 {
            let h = m >> 1;
            let mut j1 = 0;
            for i in 0..h {
                let s = self.psi_inv_rev[h + i];
                let (lo, hi) = a[j1..j1 + 2 * t].split_at_mut(t);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let u = *x;
                    let v = *y;
                    let sum = u + v;
                    *x = if sum >= q { sum - q } else { sum };
                    *y = s.mul(if u >= v { u - v } else { u + q - v }, q);
                }
                j1 += 2 * t;
            }
            t <<= 1;
            m = h;
        }
        for x in a.iter_mut() {
            *x = self.n_inv_shoup.mul(*x, q);
        }
    }

    /// Natural order: slot `i` is `f(ω^(2i+1))`.
    pub fn forward(&self, a: &[u64]) -> Vec<u64> {
        let mut w = a.to_vec();
        self.forward_br(&mut w);
        (0..self.n).map(|i| w[self.bitrev[i]]).collect()
    }

    pub fn inverse(&self, v: &[u64]) -> Vec<u64> {
        let mut w = vec![0u64; self.n];
        for i in 0..self.n {
            w[self.bitrev[i]] = v[i];
        }
        self.inverse_br(&mut w);
        w
    }

    pub fn negacyclic_mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        self.forward_br(&mut x);
        self.forward_br(&mut y);
        for (u, v) in x.iter_mut().zip(&y) {
            *u = mul_mod(*u, *v, self.q);
        }
        self.inverse_br(&mut x);
        x
    }
}

static TABLES: OnceLock<Mutex<HashMap<(usize, u64), Arc<NttTables>>>> = OnceLock::new();

/// Shared tables for `(n, q)`, built on first use.
pub fn tables(n: usize, q: u64) -> Result<Arc<NttTables>> {
    let cache = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("table cache").get(&(n, q)) {
        return Ok(t.clone());
    }
    let t = Arc::new(NttTables::new(n, q)?);
    cache.lock().expect("table cache").insert((n, q), t.clone());
    Ok(t)
}

/// Largest supported ring degree for the auxiliary product primes.
pub const MAX_AUX_DEGREE: usize = 1 << 16;

struct AuxPrimes {
    primes: Vec<u64>,
    /// `inv[j][i] = p_i^{-1} mod p_j` for `i < j`.
    inv: Vec<Vec<u64>>,
    /// Prefix products `p_0 ⋯ p_{j-1}`.
    prefix: Vec<BigUint>,
}

fn aux_primes() -> &'static AuxPrimes {
    static AUX: OnceLock<AuxPrimes> = OnceLock::new();
    AUX.get_or_init(|| {
        let primes = primes_below(61, 2 * MAX_AUX_DEGREE as u64, 40).expect("auxiliary primes");
        let inv = (0..primes.len())
            .map(|j| (0..j).map(|i| inv_mod(primes[i] % primes[j], primes[j]).expect("coprime")).collect())
            .collect();
        let mut prefix = vec![BigUint::from(1u8)];
        for &p in &primes {
            let last = prefix.last().unwrap().clone();
            prefix.push(last * p);
        }
        AuxPrimes { primes, inv, prefix }
    })
}

fn residue(x: &BigInt, p: u64) -> u64 {
    let r = (x.magnitude() % p).to_u64().unwrap_or(0);
    if x.sign() == Sign::Minus && r != 0 {
        p - r
    } else {
        r
    }
}

/// Exact integer product in `Z[X]/(X^n+1)` of two signed coefficient vectors.
pub fn exact_negacyclic(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len();
    assert_eq!(n, b.len(), "operand degree mismatch");
    assert!(n.is_power_of_two() && n <= MAX_AUX_DEGREE);
    let ba = a.iter().map(abs_bits).max().unwrap_or(0);
    let bb = b.iter().map(abs_bits).max().unwrap_or(0);
    if ba == 0 || bb == 0 {
        return vec![BigInt::zero(); n];
    }
    let need = ba + bb + n.trailing_zeros() as u64 + 2;
    let aux = aux_primes();
    let k = need.div_ceil(60) as usize;
    assert!(k <= aux.primes.len(), "operands too large for the auxiliary prime set");
    let res: Vec<Vec<u64>> = aux.primes[..k]
        .iter()
        .map(|&p| {
            let t = tables(n, p).expect("auxiliary NTT tables");
            let ra: Vec<u64> = a.iter().map(|x| residue(x, p)).collect();
            let rb: Vec<u64> = b.iter().map(|x| residue(x, p)).collect();
            t.negacyclic_mul(&ra, &rb)
        })
        .collect();
    let total = &aux.prefix[k];
    let half = total >> 1;
    (0..n)
        .map(|c| {
            let mut v = vec![0u64; k];
            for j in 0..k {
                let p = aux.primes[j];
                let mut x = res[j][c];
                for i in 0..j {
                    let d = if x >= v[i] % p { x - v[i] % p } else { x + p - v[i] % p };
                    x = mul_mod(d, aux.inv[j][i], p);
                }
                v[j] = x;
            }
            let mut acc = BigUint::zero();
            for j in (0..k).rev() {
                acc = acc * aux.primes[j] + v[j];
            }
            debug_assert!(&acc < total);
            if acc > half {
                BigInt::from_biguint(Sign::Minus, total - acc)
            } else {
                BigInt::from_biguint(Sign::Plus, acc)
            }
        })
        .collect()
}

/// Schoolbook negacyclic product over the integers. Reference path.
pub fn schoolbook_negacyclic(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len();
    let mut out = vec![BigInt::zero(); n];
    for i in 0..n {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..n {
            let p = &a[i] * &b[j];
            if i + j < n {
                out[i + j] += p;
            } else {
                out[i + j - n] -= p;
            }
        }
    }
    out
}

/// Forward transform of a coefficient-form polynomial over an NTT prime.
pub fn ntt_forward(f: &RingPoly, tables: &NttTables) -> Result<RingPoly> {
    let ring = f.ring();
    if f.form() != Form::Coefficient || ring.n != tables.n || ring.q != BigUint::from(tables.q) {
        return Err(FheError::TableMismatch);
    }
    let v = tables.forward(&f.to_u64_vec());
    Ok(RingPoly::from_u64_form(ring.clone(), &v, Form::Evaluation))
}

pub fn ntt_inverse(v: &RingPoly, tables: &NttTables) -> Result<RingPoly> {
    let ring = v.ring();
    if v.form() != Form::Evaluation || ring.n != tables.n || ring.q != BigUint::from(tables.q) {
        return Err(FheError::TableMismatch);
    }
    let c = tables.inverse(&v.to_u64_vec());
    Ok(RingPoly::from_u64_form(ring.clone(), &c, Form::Coefficient))
}

/// `J(h) = 5^h mod 2n`.
pub fn j_exp(h: usize, n: usize) -> u64 {
    pow_mod(5, h as u64, 2 * n as u64)
}

/// `J*(h) = -5^h mod 2n`.
pub fn j_star_exp(h: usize, n: usize) -> u64 {
    let m = 2 * n as u64;
    (m - j_exp(h, n)) % m
}

/// Exponent of the evaluation point behind slot `i`: `J(0..n/2)` then `J*(0..n/2)`.
pub fn slot_exponents(n: usize) -> Vec<u64> {
    let half = n / 2;
    (0..half).map(|h| j_exp(h, n)).chain((0..half).map(|h| j_star_exp(h, n))).collect()
}

/// Column exponents of `Ŵ`: `J(n/2-1) … J(0)` then `J*(n/2-1) … J*(0)`.
pub fn encoding_column_exponents(n: usize) -> Vec<u64> {
    let half = n / 2;
    (0..half).rev().map(|h| j_exp(h, n)).chain((0..half).rev().map(|h| j_star_exp(h, n))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Ring(u64),
    Complex,
}

/// `Ŵ` and `Ŵ*` over `Z_t`.
#[derive(Clone, Debug)]
pub struct RingMatrices {
    pub n: usize,
    pub t: u64,
    pub omega: u64,
    pub n_inv: u64,
    pub w_hat: Vec<Vec<u64>>,
    pub w_hat_star: Vec<Vec<u64>>,
    pub j_table: Vec<u64>,
    pub j_star_table: Vec<u64>,
}

/// `Ŵ` and `Ŵ*` over `C` with `ω = e^(iπ/n)`.
#[derive(Clone, Debug)]
pub struct ComplexMatrices {
    pub n: usize,
    pub w_hat: Vec<Vec<Complex64>>,
    pub w_hat_star: Vec<Vec<Complex64>>,
    pub j_table: Vec<u64>,
    pub j_star_table: Vec<u64>,
}

#[derive(Clone, Debug)]
pub enum EncodingMatrices {
    Ring(RingMatrices),
    Complex(ComplexMatrices),
}

pub fn build_matrices(n: usize, field: Field) -> Result<EncodingMatrices> {
    Ok(match field {
        Field::Ring(t) => EncodingMatrices::Ring(RingMatrices::new(n, t, None)?),
        Field::Complex => EncodingMatrices::Complex(ComplexMatrices::new(n)?),
    })
}

fn check_degree(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(FheError::ParamMismatch(format!("ring degree {n} must be a power of two >= 2")));
    }
    Ok(())
}

impl RingMatrices {
    pub fn new(n: usize, t: u64, omega: Option<u64>) -> Result<Self> {
        check_degree(n)?;
        let omega = match omega {
            Some(w) => {
                if !is_prime_u64(t) || pow_mod(w, n as u64, t) != t - 1 {
                    return Err(FheError::BadModulus(format!("{w} is not a primitive {}-th root mod {t}", 2 * n)));
                }
                w
            }
            None => find_primitive_2nth_root(t, n)?,
        };
        let cols = encoding_column_exponents(n);
        let rows = slot_exponents(n);
        let w_hat = (0..n)
            .map(|r| cols.iter().map(|&e| pow_mod(pow_mod(omega, e, t), r as u64, t)).collect())
            .collect();
        let w_hat_star =
            rows.iter().map(|&e| (0..n).map(|c| pow_mod(pow_mod(omega, e, t), c as u64, t)).collect()).collect();
        let half = n / 2;
        Ok(Self {
            n,
            t,
            omega,
            n_inv: inv_mod(n as u64, t)?,
            w_hat,
            w_hat_star,
            j_table: (0..half).map(|h| j_exp(h, n)).collect(),
            j_star_table: (0..half).map(|h| j_star_exp(h, n)).collect(),
        })
    }

    /// `m = n⁻¹·Ŵ·I^R·v`.
    pub fn encode(&self, v: &[u64]) -> Result<Vec<u64>> {
        if v.len() != self.n {
            return Err(FheError::LengthMismatch { expected: self.n, got: v.len() });
        }
        let t = self.t;
        Ok(self
            .w_hat
            .iter()
            .map(|row| {
                let s = (0..self.n).fold(0u128, |acc, c| acc + row[c] as u128 * (v[self.n - 1 - c] % t) as u128);
                mul_mod((s % t as u128) as u64, self.n_inv, t)
            })
            .collect())
    }

    /// `v = Ŵ*·m`.
    pub fn decode(&self, m: &[u64]) -> Result<Vec<u64>> {
        if m.len() != self.n {
            return Err(FheError::LengthMismatch { expected: self.n, got: m.len() });
        }
        let t = self.t;
        Ok(self
            .w_hat_star
            .iter()
            .map(|row| {
                let s = row.iter().zip(m).fold(0u128, |acc, (&w, &x)| acc + w as u128 * (x % t) as u128);
                (s % t as u128) as u64
            })
            .collect())
    }
}

/// `e^(iπk/n)`, reducing `k` first so large exponents keep full precision.
pub fn root_power(k: u64, n: usize) -> Complex64 {
    let k = k % (2 * n as u64);
    Complex64::from_polar(1.0, PI * k as f64 / n as f64)
}

impl ComplexMatrices {
    pub fn new(n: usize) -> Result<Self> {
        check_degree(n)?;
        let cols = encoding_column_exponents(n);
        let rows = slot_exponents(n);
        let w_hat = (0..n).map(|r| cols.iter().map(|&e| root_power(e * r as u64, n)).collect()).collect();
        let w_hat_star = rows.iter().map(|&e| (0..n).map(|c| root_power(e * c as u64, n)).collect()).collect();
        let half = n / 2;
        Ok(Self {
            n,
            w_hat,
            w_hat_star,
            j_table: (0..half).map(|h| j_exp(h, n)).collect(),
            j_star_table: (0..half).map(|h| j_star_exp(h, n)).collect(),
        })
    }

    /// `Ŵ·I^R·v′/n` for a full length-`n` slot vector.
    pub fn encode_full(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        self.w_hat
            .iter()
            .map(|row| (0..n).map(|c| row[c] * v[n - 1 - c]).sum::<Complex64>() / n as f64)
            .collect()
    }

    pub fn decode_full(&self, m: &[Complex64]) -> Vec<Complex64> {
        self.w_hat_star.iter().map(|row| row.iter().zip(m).map(|(w, x)| w * x).sum()).collect()
    }
}

/// Matrix product over `Z_t`.
pub fn mat_mul_mod(a: &[Vec<u64>], b: &[Vec<u64>], t: u64) -> Vec<Vec<u64>> {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..b.len()).fold(0u64, |acc, k| (acc + mul_mod(a[i][k], b[k][j], t)) % t))
                .collect()
        })
        .collect()
}

pub fn mat_mul_complex(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    let m = b[0].len();
    (0..n).map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

/// Negacyclic products of real polynomials through a complex FFT of half length.
///
/// Coefficients `a_j + i·a_{j+n/2}` are twisted by `e^{iπj/n}`, so slot `k` holds the
/// value at a root of `X^n + 1` with `X^{n/2} = i`.
pub struct NegacyclicFft {
    n: usize,
    twist: Vec<Complex64>,
    fwd: Arc<dyn rustfft::Fft<f64>>,
    inv: Arc<dyn rustfft::Fft<f64>>,
}

impl std::fmt::Debug for NegacyclicFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "NegacyclicFft({})", self.n)
    }
}

impl NegacyclicFft {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return Err(FheError::BadModulus(format!("FFT length {n} is not a power of two >= 2")));
        }
        let h = n / 2;
        let mut planner = rustfft::FftPlanner::new();
        let twist = (0..h).map(|j| Complex64::from_polar(1.0, PI * j as f64 / n as f64)).collect();
        Ok(Self { n, twist, fwd: planner.plan_fft_forward(h), inv: planner.plan_fft_inverse(h) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward_f64(&self, a: &[f64]) -> Vec<Complex64> {
        let h = self.n / 2;
        let mut v: Vec<Complex64> = (0..h).map(|j| Complex64::new(a[j], a[j + h]) * self.twist[j]).collect();
        self.fwd.process(&mut v);
        v
    }

    pub fn forward_i64(&self, a: &[i64]) -> Vec<Complex64> {
        let h = self.n / 2;
        let mut v: Vec<Complex64> =
            (0..h).map(|j| Complex64::new(a[j] as f64, a[j + h] as f64) * self.twist[j]).collect();
        self.fwd.process(&mut v);
        v
    }

    /// Consumes the spectrum; returns real coefficients before rounding.
    pub fn inverse(&self, mut v: Vec<Complex64>) -> Vec<f64> {
        let h = self.n / 2;
        self.inv.process(&mut v);
        let scale = 1.0 / h as f64;
        let mut out = vec![0.0; self.n];
        for j in 0..h {
            let c = v[j] * self.twist[j].conj() * scale;
            out[j] = c.re;
            out[j + h] = c.im;
        }
        out
    }

    /// Rounded negacyclic product of integer polynomials.
    pub fn mul_i64(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        let fa = self.forward_i64(a);
        let fb = self.forward_i64(b);
        let prod = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
        self.inverse(prod).iter().map(|x| x.round() as i64).collect()
    }
}

static FFTS: OnceLock<Mutex<HashMap<usize, Arc<NegacyclicFft>>>> = OnceLock::new();

pub fn negacyclic_fft(n: usize) -> Result<Arc<NegacyclicFft>> {
    let cache = FFTS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft cache");
    if let Some(f) = guard.get(&n) {
        return Ok(f.clone());
    }
    let f = Arc::new(NegacyclicFft::new(n)?);
    guard.insert(n, f.clone());
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::RingParams;
    use rand::{Rng, SeedableRng};

    fn reverse_identity(n: usize, scale: u64) -> Vec<Vec<u64>> {
        (0..n).map(|i| (0..n).map(|j| if i + j == n - 1 { scale } else { 0 }).collect()).collect()
    }

    #[test]
    fn ring_matrices_n4() {
        let m = RingMatrices::new(4, 17, Some(9)).unwrap();
        assert_eq!(m.w_hat, vec![vec![1, 1, 1, 1], vec![8, 9, 15, 2], vec![13, 13, 4, 4], vec![2, 15, 9, 8]]);
        assert_eq!(m.w_hat_star, vec![vec![1, 9, 13, 15], vec![1, 8, 13, 2], vec![1, 2, 4, 8], vec![1, 15, 4, 9]]);
        assert_eq!(mat_mul_mod(&m.w_hat_star, &m.w_hat, 17), reverse_identity(4, 4));
        assert_eq!(m.n_inv, 13);
    }

    #[test]
    fn ring_matrices_n8() {
        let m = RingMatrices::new(8, 17, Some(3)).unwrap();
        assert_eq!(m.w_hat[1], vec![12, 14, 5, 3, 10, 11, 7, 6]);
        assert_eq!(m.w_hat[7], vec![7, 6, 10, 11, 5, 3, 12, 14]);
        assert_eq!(m.w_hat_star[0], vec![1, 3, 9, 10, 13, 5, 15, 11]);
        assert_eq!(m.w_hat_star[7], vec![1, 10, 15, 14, 4, 6, 9, 5]);
        assert_eq!(mat_mul_mod(&m.w_hat_star, &m.w_hat, 17), reverse_identity(8, 8));
        assert!(matches!(RingMatrices::new(8, 19, None), Err(FheError::BadModulus(_))));
    }

    #[test]
    fn exponents_cover_odd_residues() {
        for n in [2usize, 4, 8, 16, 64, 256] {
            let mut e = slot_exponents(n);
            e.sort();
            assert_eq!(e, (0..n as u64).map(|i| 2 * i + 1).collect::<Vec<_>>());
        }
    }

    #[test]
    fn complex_identity() {
        for n in [4usize, 16, 64] {
            let m = ComplexMatrices::new(n).unwrap();
            let p = mat_mul_complex(&m.w_hat_star, &m.w_hat);
            for i in 0..n {
                for j in 0..n {
                    let want = if i + j == n - 1 { n as f64 } else { 0.0 };
                    assert!((p[i][j] - Complex64::new(want, 0.0)).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn ntt_matches_direct_evaluation() {
        let t = NttTables::with_root(4, 17, 9).unwrap();
        let f = [12u64, 11, 12, 1];
        let v = t.forward(&f);
        for i in 0..4 {
            let x = t.powers[i];
            let direct = (0..4).fold(0, |acc, j| (acc + f[j] * pow_mod(x, j as u64, 17)) % 17);
            assert_eq!(v[i], direct);
        }
        let m = RingMatrices::new(4, 17, Some(9)).unwrap();
        let mut by_slot = m.decode(&f).unwrap();
        by_slot.sort();
        let mut by_ntt = v.clone();
        by_ntt.sort();
        assert_eq!(by_slot, by_ntt);
        assert_eq!(t.inverse(&v), f.to_vec());
    }

    #[test]
    fn ntt_constant_and_monomial() {
        let q = 7681;
        let n = 256;
        let t = NttTables::new(n, q).unwrap();
        let mut c = vec![0u64; n];
        c[0] = 42;
        assert!(t.forward(&c).iter().all(|&x| x == 42));
        assert_eq!(t.inverse(&vec![42; n]), c);
        let mut mono = vec![0u64; n];
        mono[n - 1] = 1;
        let v = t.forward(&mono);
        for i in 0..n {
            assert_eq!(v[i], pow_mod(t.omega, (2 * i as u64 + 1) * (n as u64 - 1), q));
        }
    }

    #[test]
    fn ntt_roundtrip_and_product() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        for log_n in 2..=8 {
            let n = 1usize << log_n;
            let q = primes_below(40, 2 * n as u64, 1).unwrap()[0];
            let t = NttTables::new(n, q).unwrap();
            for _ in 0..20 {
                let a: Vec<u64> = (0..n).map(|_| rng.random_range(0..q)).collect();
                let b: Vec<u64> = (0..n).map(|_| rng.random_range(0..q)).collect();
                assert_eq!(t.inverse(&t.forward(&a)), a);
                let fa = t.forward(&a);
                let fb = t.forward(&b);
                let pw: Vec<u64> = fa.iter().zip(&fb).map(|(x, y)| mul_mod(*x, *y, q)).collect();
                let prod = t.inverse(&pw);
                let ia: Vec<BigInt> = a.iter().map(|&x| BigInt::from(x)).collect();
                let ib: Vec<BigInt> = b.iter().map(|&x| BigInt::from(x)).collect();
                let sb: Vec<u64> = schoolbook_negacyclic(&ia, &ib)
                    .iter()
                    .map(|x| crate::modular::canonical(x, &BigUint::from(q)).to_u64().unwrap())
                    .collect();
                assert_eq!(prod, sb);
            }
        }
    }

    #[test]
    fn exact_product_matches_schoolbook() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
        for n in [1usize, 2, 8, 32] {
            for bits in [3u32, 40, 130, 300] {
                let gen = |rng: &mut rand_chacha::ChaCha20Rng| -> BigInt {
                    let mut x = BigInt::from(rng.random::<u64>());
                    while (x.bits() as u32) < bits {
                        x = (x << 64u32) + rng.random::<u64>();
                    }
                    let sh = x.bits() as u32 - bits;
                    let x = x >> sh;
                    if rng.random::<bool>() {
                        -x
                    } else {
                        x
                    }
                };
                let a: Vec<BigInt> = (0..n).map(|_| gen(&mut rng)).collect();
                let b: Vec<BigInt> = (0..n).map(|_| gen(&mut rng)).collect();
                assert_eq!(exact_negacyclic(&a, &b), schoolbook_negacyclic(&a, &b));
            }
        }
    }

    #[test]
    fn ntt_poly_api() {
        let ring = RingParams::new(4, BigUint::from(17u8)).unwrap();
        let t = NttTables::with_root(4, 17, 9).unwrap();
        let f = RingPoly::from_i64(&ring, &[12, 11, 12, 1]);
        let ev = ntt_forward(&f, &t).unwrap();
        assert_eq!(ev.form(), Form::Evaluation);
        assert_eq!(ntt_inverse(&ev, &t).unwrap(), f);
        assert_eq!(ntt_forward(&ev, &t), Err(FheError::TableMismatch));
        let other = NttTables::new(8, 17).unwrap();
        assert_eq!(ntt_forward(&f, &other), Err(FheError::TableMismatch));
    }

    #[test]
    fn complex_fft_matches_schoolbook() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(77);
        for n in [2usize, 4, 16, 64, 1024] {
            let fft = negacyclic_fft(n).unwrap();
            for _ in 0..20 {
                let a: Vec<i64> = (0..n).map(|_| rng.random_range(-(1i64 << 31)..1 << 31)).collect();
                let b: Vec<i64> = (0..n).map(|_| rng.random_range(-64..=64)).collect();
                let want = schoolbook_negacyclic(
                    &a.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>(),
                    &b.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>(),
                );
                let got = fft.mul_i64(&a, &b);
                for (g, w) in got.iter().zip(&want) {
                    assert!((BigInt::from(*g) - w).magnitude() <= &BigUint::from(2u32), "n={n}");
                }
            }
        }
        assert!(NegacyclicFft::new(12).is_err());
    }
}
