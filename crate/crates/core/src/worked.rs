//! Small worked examples with known answers, runnable as a report.
//!
//! The unit test below runs the same list, so the CLI report and the test suite share one manifest.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::bfv::{BfvContext, BfvParams};
use crate::ckks::{max_abs_error, CkksContext, CkksEncoder, CkksParams};
use crate::decomposition::{unsigned_to_balanced, GadgetSpec};
use crate::glwe::{self, GlweCiphertext, GlweParams, GlweSecretKey, SignConvention};
use crate::modular::{find_primitive_2nth_root, inv_mod};
use crate::poly::{poly_negacyclic_mul, RingParams, RingPoly};
use crate::prng::Seed;
use crate::tfhe::{
    gate_eval, keygen, rotation_amount, sample_extract, ClientKey, Gate, LweCiphertext, LweKey, Lut, RlweCiphertext,
    TfheParams, Torus,
};
use crate::transform::{mat_mul_mod, RingMatrices};

pub type Outcome = std::result::Result<String, String>;

#[derive(Clone, Copy)]
pub struct WorkedExample {
    pub id: &'static str,
    pub area: &'static str,
    pub run: fn() -> Outcome,
}

fn expect<T: PartialEq + std::fmt::Debug>(got: T, want: T) -> Outcome {
    if got == want {
        Ok(format!("{got:?}"))
    } else {
        Err(format!("got {got:?}, expected {want:?}"))
    }
}

fn e2s<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn reverse_identity(n: usize, scale: u64) -> Vec<Vec<u64>> {
    (0..n).map(|i| (0..n).map(|j| if i + j == n - 1 { scale } else { 0 }).collect()).collect()
}

fn ring(n: usize, q: u64) -> std::result::Result<std::sync::Arc<RingParams>, String> {
    RingParams::with_u64(n, q).map_err(e2s)
}

fn inverse_3_mod_11() -> Outcome {
    expect(inv_mod(3, 11).map_err(e2s)?, 4)
}

fn root_n4() -> Outcome {
    let w = find_primitive_2nth_root(17, 4).map_err(e2s)?;
    expect([2, 8, 15, 9].contains(&w), true).map(|_| format!("omega = {w}"))
}

fn root_n8() -> Outcome {
    let w = find_primitive_2nth_root(17, 8).map_err(e2s)?;
    expect([3, 5, 6, 7, 10, 11, 12, 14].contains(&w), true).map(|_| format!("omega = {w}"))
}

fn reduce_mod_x2_plus_1() -> Outcome {
    let r = ring(2, 7)?;
    let f = RingPoly::from_i64(&r, &[10, 6, 11, 3, 1]);
    let one = RingPoly::from_i64(&r, &[1]);
    expect(poly_negacyclic_mul(&f, &one).map_err(e2s)?.centered_i64(), vec![0, 3])
}

fn rotate_h1() -> Outcome {
    let r = ring(4, 8)?;
    expect(RingPoly::from_i64(&r, &[2, 3, -4, -1]).rotate_coeffs(1).centered_i64(), vec![3, -4, -1, -2])
}

fn rotate_h3() -> Outcome {
    let r = ring(4, 8)?;
    expect(RingPoly::from_i64(&r, &[2, 3, -4, -1]).rotate_coeffs(3).centered_i64(), vec![-1, -2, -3, -4])
}

fn automorphism_k5() -> Outcome {
    let r = ring(4, 1 << 16)?;
    let f = RingPoly::from_i64(&r, &[2355, 1195, 1485, 2933]);
    expect(f.apply_automorphism(5).map_err(e2s)?.centered_i64(), vec![2355, -1195, 1485, -2933])
}

fn w_hat_n4() -> Outcome {
    let m = RingMatrices::new(4, 17, Some(9)).map_err(e2s)?;
    expect(m.w_hat, vec![vec![1, 1, 1, 1], vec![8, 9, 15, 2], vec![13, 13, 4, 4], vec![2, 15, 9, 8]])
}

fn w_star_w_n4() -> Outcome {
    let m = RingMatrices::new(4, 17, Some(9)).map_err(e2s)?;
    expect(mat_mul_mod(&m.w_hat_star, &m.w_hat, 17), reverse_identity(4, 4)).map(|_| "4·I^R".into())
}

fn w_star_w_n8() -> Outcome {
    let m = RingMatrices::new(8, 17, Some(3)).map_err(e2s)?;
    expect(mat_mul_mod(&m.w_hat_star, &m.w_hat, 17), reverse_identity(8, 8)).map(|_| "8·I^R".into())
}

fn decompose_13() -> Outcome {
    let g = GadgetSpec::new(2, 4, BigUint::from(16u32)).map_err(e2s)?;
    expect(g.decompose_scalar(&BigUint::from(13u32)), vec![1, 1, 0, 1])
}

fn recompose_13() -> Outcome {
    let g = GadgetSpec::new(2, 4, BigUint::from(16u32)).map_err(e2s)?;
    expect(g.gadget_recompose(&[1, 1, 0, 1]).map_err(e2s)?, BigUint::from(13u32))
}

fn decompose_poly() -> Outcome {
    let r = ring(4, 16)?;
    let g = GadgetSpec::new(4, 2, BigUint::from(16u32)).map_err(e2s)?;
    let d = g.decompose_coeffs(&RingPoly::from_i64(&r, &[7, 14, 3, 6]));
    // Digits of the high part x³+0x²+3x+1 and the low part 2x³+3x²+2x+3, in balanced form.
    let high = [1, 3, 0, 1];
    let low = [3, 2, 3, 2];
    let want: Vec<Vec<i64>> = (0..4).map(|j| unsigned_to_balanced(&[high[j], low[j]], 4)).collect();
    let got: Vec<Vec<i64>> = (0..4).map(|j| vec![d[0][j], d[1][j]]).collect();
    expect(got, want).map(|_| "(x³+3x+1, 2x³+3x²+2x+3)".into())
}

fn lwe_switch() -> Outcome {
    let r = ring(1, 64)?;
    let params = GlweParams::with_delta(4, r.clone(), 4, BigUint::from(16u32), SignConvention::Plus, 0.0).map_err(e2s)?;
    let sk = GlweSecretKey::from_i64(&r, &[vec![0], vec![1], vec![1], vec![0]]);
    let ct = GlweCiphertext {
        masks: [-25, 12, -3, 7].iter().map(|&a| RingPoly::from_i64(&r, &[a])).collect(),
        body: RingPoly::from_i64(&r, &[26]),
        mask_seed: None,
    };
    let target = ring(1, 32)?;
    let sw = glwe::modulus_switch(&ct, &params, &target).map_err(e2s)?;
    let got: Vec<i64> = sw.masks.iter().chain([&sw.body]).map(|p| p.centered_i64()[0]).collect();
    expect(got, vec![-12, 6, -1, 4, 13])?;
    expect(glwe::decrypt(&sw, &sk, &params.switched(target)).map_err(e2s)?, vec![1])
        .map(|_| "(-12, 6, -1, 4, 13), m = 1".into())
}

fn identity_lut() -> Outcome {
    let lut = Lut::identity(&TfheParams::toy()).map_err(e2s)?;
    expect(lut.poly, vec![0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 1, 1, 1, 1])
}

fn and_lut() -> Outcome {
    expect(Lut::gate(&TfheParams::gate_toy()).poly, vec![1; 8])
}

struct Walkthrough {
    ck: ClientKey,
    sk: crate::tfhe::ServerKey,
    ct: LweCiphertext,
}

fn walkthrough() -> std::result::Result<Walkthrough, String> {
    let params = TfheParams::toy();
    let mut ck = ClientKey::generate(&params, &Seed::from_u64(1)).map_err(e2s)?;
    ck.lwe = LweKey { bits: vec![1, 0, 0, 1, 1, 1, 0, 1] };
    let sk = ck.server_key(&Seed::from_u64(2));
    let tq = Torus::new(6).map_err(e2s)?;
    let a = [8i64, -28, 4, -32, 0, 31, -6, 7].iter().map(|&x| tq.from_i64(x)).collect();
    Ok(Walkthrough { ck, sk, ct: LweCiphertext { a, b: 24, log_q: 6 } })
}

fn tfhe_switch() -> Outcome {
    let w = walkthrough()?;
    let sw = w.ct.modulus_switch(5).map_err(e2s)?;
    let t32 = Torus::new(5).map_err(e2s)?;
    let got: Vec<u64> = sw.a.iter().chain([&sw.b]).copied().collect();
    // 16 and −16 are the same residue mod 32.
    expect(got, [4i64, -14, 2, -16, 0, 16, -3, 4, 12].iter().map(|&x| t32.from_i64(x)).collect())
        .map(|_| "(4, -14, 2, -16, 0, 16, -3, 4, 12) mod 32".into())
}

fn tfhe_rotation() -> Outcome {
    let w = walkthrough()?;
    let sw = w.ct.modulus_switch(5).map_err(e2s)?;
    expect(rotation_amount(&sw, &w.ck.lwe).map_err(e2s)?, 4)?;
    let params = &w.ck.params;
    let lut = Lut::identity(params).map_err(e2s)?;
    let acc = w.sk.blind_rotate(&RlweCiphertext::trivial(lut.payload(params)), &sw).map_err(e2s)?;
    let ext = sample_extract(&acc, 0, 6).map_err(e2s)?;
    let ph = w.ck.extracted_key().phase(&ext).map_err(e2s)?;
    expect(ph / params.delta(), 1).map(|_| "rotation 4, constant coefficient v4 = 1".into())
}

fn tfhe_bootstrap() -> Outcome {
    let w = walkthrough()?;
    let lut = Lut::identity(&w.ck.params).map_err(e2s)?;
    expect(w.ck.decrypt(&w.sk.bootstrap(&w.ct, &lut).map_err(e2s)?).map_err(e2s)?, 1)
}

fn and_table() -> Outcome {
    let (ck, sk) = keygen(&TfheParams::gate_toy(), &Seed::from_u64(3)).map_err(e2s)?;
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let mut out = Vec::new();
    for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
        let (ca, cb) = (ck.encrypt_bit(a, &mut rng), ck.encrypt_bit(b, &mut rng));
        out.push(ck.decrypt_bit(&gate_eval(Gate::And, &[&ca, &cb], &sk).map_err(e2s)?).map_err(e2s)? as u8);
    }
    expect(out, vec![0, 0, 0, 1])
}

fn bfv_encode_n4() -> Outcome {
    let ctx = BfvContext::new(BfvParams::batch_example()).map_err(e2s)?;
    expect(ctx.encode(&[10, 3, 5, 13]).map_err(e2s)?, vec![12, 11, 12, 1])
}

fn bfv_encode_n8() -> Outcome {
    let ctx = BfvContext::new(BfvParams::toy()).map_err(e2s)?;
    expect(ctx.encode(&(1..=8).collect::<Vec<_>>()).map_err(e2s)?, vec![13, 16, 10, 5, 9, 12, 7, 1])
}

fn bfv_decode_n4() -> Outcome {
    let ctx = BfvContext::new(BfvParams::batch_example()).map_err(e2s)?;
    expect(ctx.decode(&[3, 16, 9, 7]).map_err(e2s)?, vec![12, 7, 8, 2])
}

fn bfv_add() -> Outcome {
    let ctx = BfvContext::new(BfvParams::batch_example()).map_err(e2s)?;
    let keys = ctx.keygen(&Seed::from_u64(4)).map_err(e2s)?;
    let a = ctx.encrypt(&[10, 3, 5, 13], &keys.secret, &Seed::from_u64(5)).map_err(e2s)?;
    let b = ctx.encrypt(&[2, 4, 3, 6], &keys.secret, &Seed::from_u64(6)).map_err(e2s)?;
    let sum = ctx.add(&a, &b).map_err(e2s)?;
    expect(ctx.decrypt(&sum, &keys.secret).map_err(e2s)?, vec![12, 7, 8, 2])
}

fn bfv_rotate() -> Outcome {
    let ctx = BfvContext::new(BfvParams::toy()).map_err(e2s)?;
    let keys = ctx.keygen(&Seed::from_u64(1)).map_err(e2s)?;
    let ct = ctx.encrypt(&(1..=8).collect::<Vec<_>>(), &keys.secret, &Seed::from_u64(2)).map_err(e2s)?;
    let r = ctx.rotate(&ct, 3, &keys.eval).map_err(e2s)?;
    expect(ctx.decrypt(&r, &keys.secret).map_err(e2s)?, vec![4, 1, 2, 3, 8, 5, 6, 7])
}

fn example_slots() -> [Complex64; 2] {
    [Complex64::new(1.1, 4.3), Complex64::new(3.5, -1.4)]
}

fn within(got: &[Complex64], want: &[Complex64], tol: f64) -> Outcome {
    let err = max_abs_error(got, want);
    let shown: Vec<String> = got.iter().map(|c| format!("{:.4}{:+.4}i", c.re, c.im)).collect();
    if err < tol {
        Ok(format!("({}) error {err:.1e}", shown.join(", ")))
    } else {
        Err(format!("({}) error {err:.1e} >= {tol:.0e}", shown.join(", ")))
    }
}

fn ckks_encode() -> Outcome {
    let enc = CkksEncoder::new(4).map_err(e2s)?;
    expect(enc.encode(&example_slots(), 1024.0).map_err(e2s)?, [2355, 1195, 1485, 2933].map(BigInt::from).to_vec())
}

fn ckks_decode() -> Outcome {
    let enc = CkksEncoder::new(4).map_err(e2s)?;
    let got = enc.decode(&[2355, 1195, 1485, 2933].map(BigInt::from), 1024.0);
    within(&got, &[Complex64::new(1.0997, 4.3007), Complex64::new(3.5, -1.4003)], 1e-3)?;
    within(&got, &example_slots(), 2e-3)
}

fn ckks_rotate() -> Outcome {
    let ctx = CkksContext::new(CkksParams { n: 4, ..CkksParams::toy() }).map_err(e2s)?;
    let keys = ctx.keygen(&Seed::from_u64(7)).map_err(e2s)?;
    let ct = ctx.encrypt(&example_slots(), &keys.secret, &Seed::from_u64(8)).map_err(e2s)?;
    let r = ctx.decrypt(&ctx.rotate(&ct, 1, &keys.eval).map_err(e2s)?, &keys.secret).map_err(e2s)?;
    let z = example_slots();
    within(&r, &[z[1], z[0]], 1e-3)
}

pub fn all() -> Vec<WorkedExample> {
    macro_rules! ex {
        ($area:literal, $f:ident) => {
            WorkedExample { id: stringify!($f), area: $area, run: $f }
        };
    }
    vec![
        ex!("modular", inverse_3_mod_11),
        ex!("modular", root_n4),
        ex!("modular", root_n8),
        ex!("poly", reduce_mod_x2_plus_1),
        ex!("poly", rotate_h1),
        ex!("poly", rotate_h3),
        ex!("poly", automorphism_k5),
        ex!("transform", w_hat_n4),
        ex!("transform", w_star_w_n4),
        ex!("transform", w_star_w_n8),
        ex!("decomposition", decompose_13),
        ex!("decomposition", recompose_13),
        ex!("decomposition", decompose_poly),
        ex!("lwe", lwe_switch),
        ex!("tfhe", identity_lut),
        ex!("tfhe", and_lut),
        ex!("tfhe", tfhe_switch),
        ex!("tfhe", tfhe_rotation),
        ex!("tfhe", tfhe_bootstrap),
        ex!("tfhe", and_table),
        ex!("bfv", bfv_encode_n4),
        ex!("bfv", bfv_encode_n8),
        ex!("bfv", bfv_decode_n4),
        ex!("bfv", bfv_add),
        ex!("bfv", bfv_rotate),
        ex!("ckks", ckks_encode),
        ex!("ckks", ckks_decode),
        ex!("ckks", ckks_rotate),
    ]
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ExampleResult {
    pub id: String,
    pub area: String,
    pub pass: bool,
    pub detail: String,
}

/// Runs each example, catching panics as failures.
pub fn run(examples: &[WorkedExample]) -> Vec<ExampleResult> {
    examples
        .iter()
        .map(|ex| {
            let res = std::panic::catch_unwind(ex.run).unwrap_or_else(|_| Err("panicked".into()));
            let (pass, detail) = match res {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            ExampleResult { id: ex.id.into(), area: ex.area.into(), pass, detail }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_worked_example_passes() {
        for r in run(&all()) {
            assert!(r.pass, "{}: {}", r.id, r.detail);
        }
    }

    #[test]
    fn failures_are_reported() {
        fn wrong() -> Outcome {
            expect(inv_mod(3, 11).map_err(e2s)?, 5)
        }
        fn boom() -> Outcome {
            panic!("boom")
        }
        let r = run(&[WorkedExample { id: "wrong", area: "x", run: wrong }, WorkedExample { id: "boom", area: "x", run: boom }]);
        assert!(r.iter().all(|r| !r.pass));
        assert_eq!(r[0].detail, "got 4, expected 5");
    }
}
