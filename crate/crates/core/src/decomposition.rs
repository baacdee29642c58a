//! Radix and gadget decomposition with balanced digits in `(-β/2, β/2]`.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{FheError, Result};
use crate::modular::{canonical, center_canonical, round_div};
use crate::poly::{RingParams, RingPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GadgetKind {
    /// `g_i = ⌈q/β^i⌋` for `i = 1..ℓ`.
    Scaled,
    /// `g = (β^{ℓ-1}, …, β, 1)` with enough levels to cover any residue.
    PowerBasis,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetSpec {
    pub beta: u64,
    pub ell: usize,
    pub q: BigUint,
    pub gadget: Vec<BigUint>,
    /// `β^ℓ = q`: recomposition is lossless.
    pub exact: bool,
    /// `β^ℓ | q`: every `g_i` is an integer.
    pub integral: bool,
    pub kind: GadgetKind,
    beta_ell: BigUint,
}

impl GadgetSpec {
    pub fn new(beta: u64, ell: usize, q: BigUint) -> Result<Self> {
        if beta < 2 || ell == 0 {
            return Err(FheError::ParamMismatch(format!("gadget base {beta}, level {ell}")));
        }
        let b = BigUint::from(beta);
        let beta_ell = b.pow(ell as u32);
        let qi = BigInt::from(q.clone());
        let gadget = (1..=ell)
            .map(|i| round_div(&qi, &BigInt::from(b.pow(i as u32))).to_biguint().unwrap())
            .collect();
        Ok(Self {
            beta,
            ell,
            exact: beta_ell == q,
            integral: (&q % &beta_ell).is_zero(),
            gadget,
            q,
            kind: GadgetKind::Scaled,
            beta_ell,
        })
    }

    pub fn power_basis(beta: u64, q: BigUint) -> Result<Self> {
        if beta < 2 {
            return Err(FheError::ParamMismatch(format!("gadget base {beta}")));
        }
        let b = BigUint::from(beta);
        let mut ell = 1;
        let mut p = b.clone();
        while p < q {
            p *= &b;
            ell += 1;
        }
        ell += 1;
        let gadget = (0..ell).rev().map(|i| b.pow(i as u32)).collect();
        Ok(Self { beta, ell, exact: true, integral: true, gadget, q, kind: GadgetKind::PowerBasis, beta_ell: p * b })
    }

    /// The same digits against a smaller modulus (power basis only).
    pub fn with_modulus(&self, q: BigUint) -> Self {
        assert_eq!(self.kind, GadgetKind::PowerBasis);
        Self { q, ..self.clone() }
    }

    /// Worst-case recomposition error for a scaled gadget with integral entries.
    pub fn error_bound(&self) -> BigUint {
        if self.exact || self.kind == GadgetKind::PowerBasis {
            BigUint::zero()
        } else {
            &self.q / (&self.beta_ell * 2u32)
        }
    }

    fn balanced(&self, mut v: BigInt, keep_top: bool) -> Vec<i64> {
        let b = BigInt::from(self.beta);
        let half = self.beta as i64 / 2;
        let mut out = vec![0i64; self.ell];
        for i in (0..self.ell).rev() {
            if i == 0 && keep_top {
                out[0] = v.to_i64().expect("top digit exceeds i64");
                return out;
            }
            let (quo, r) = v.div_mod_floor(&b);
            let mut d = r.to_i64().unwrap();
            v = quo;
            if d > half {
                d -= self.beta as i64;
                v += 1;
            }
            out[i] = d;
        }
        out
    }

    /// Digits `γ_1..γ_ℓ`, most significant first.
    pub fn decompose_scalar(&self, gamma: &BigUint) -> Vec<i64> {
        let g = BigInt::from(gamma % &self.q);
        match self.kind {
            GadgetKind::Scaled => {
                let scaled = round_div(&(g * BigInt::from(self.beta_ell.clone())), &BigInt::from(self.q.clone()));
                self.balanced(scaled, false)
            }
            GadgetKind::PowerBasis => self.balanced(center_canonical(&(gamma % &self.q), &self.q), true),
        }
    }

    pub fn decompose_signed(&self, gamma: &BigInt) -> Vec<i64> {
        self.decompose_scalar(&canonical(gamma, &self.q))
    }

    pub fn gadget_recompose(&self, digits: &[i64]) -> Result<BigUint> {
        if digits.len() != self.ell {
            return Err(FheError::LengthMismatch { expected: self.ell, got: digits.len() });
        }
        let s: BigInt = digits.iter().zip(&self.gadget).map(|(&d, g)| BigInt::from(d) * BigInt::from(g.clone())).sum();
        Ok(canonical(&s, &self.q))
    }

    /// Per-level signed digit vectors of every coefficient: `out[i][j]` is digit `i` of coefficient `j`.
    pub fn decompose_coeffs(&self, f: &RingPoly) -> Vec<Vec<i64>> {
        let mut out = vec![vec![0i64; f.n()]; self.ell];
        for (j, c) in f.coeffs().iter().enumerate() {
            for (i, d) in self.decompose_scalar(c).into_iter().enumerate() {
                out[i][j] = d;
            }
        }
        out
    }

    /// Digit polynomials `f_1..f_ℓ` in `ring` (the ring of the operand by default).
    pub fn decompose_poly_into(&self, f: &RingPoly, ring: &Arc<RingParams>) -> Vec<RingPoly> {
        self.decompose_coeffs(f).iter().map(|d| RingPoly::from_i64(ring, d)).collect()
    }

    pub fn decompose_poly(&self, f: &RingPoly) -> Vec<RingPoly> {
        self.decompose_poly_into(f, f.ring())
    }

    pub fn recompose_poly(&self, digits: &[RingPoly]) -> Result<RingPoly> {
        if digits.len() != self.ell {
            return Err(FheError::LengthMismatch { expected: self.ell, got: digits.len() });
        }
        let mut acc = RingPoly::zero(digits[0].ring());
        for (d, g) in digits.iter().zip(&self.gadget) {
            acc = acc.add(&d.scalar_mul(&BigInt::from(g.clone())));
        }
        Ok(acc)
    }
}

pub fn decompose_scalar(gamma: &BigUint, spec: &GadgetSpec) -> Vec<i64> {
    spec.decompose_scalar(gamma)
}

pub fn decompose_poly(f: &RingPoly, spec: &GadgetSpec) -> Vec<RingPoly> {
    spec.decompose_poly(f)
}

pub fn gadget_recompose(digits: &[i64], spec: &GadgetSpec) -> Result<BigUint> {
    spec.gadget_recompose(digits)
}

/// Unsigned base-β digits (most significant first) rewritten in balanced form.
pub fn unsigned_to_balanced(digits: &[i64], beta: u64) -> Vec<i64> {
    let mut out = digits.to_vec();
    let half = beta as i64 / 2;
    let mut carry = 0;
    for d in out.iter_mut().rev() {
        let mut v = *d + carry;
        carry = 0;
        if v > half {
            v -= beta as i64;
            carry = 1;
        }
        *d = v;
    }
    out
}

/// Signed distance from `x` to `y` modulo `q`.
pub fn mod_distance(x: &BigUint, y: &BigUint, q: &BigUint) -> BigUint {
    let d = BigInt::from(x.clone()) - BigInt::from(y.clone());
    center_canonical(&canonical(&d, q), q).abs().to_biguint().unwrap()
}
