//! End-to-end runs through the public API, with a JSON round trip in the middle.

use std::collections::BTreeMap;

use deskfhe::bfv::{BfvContext, BfvEvalKeys, BfvParams};
use deskfhe::bgv::{BgvCiphertext, BgvContext, BgvParams};
use deskfhe::ckks::{max_abs_error, CkksCiphertext, CkksContext, CkksParams};
use deskfhe::glwe::KeySwitchKey;
use deskfhe::prng::Seed;
use deskfhe::serial::{
    from_json, glev_data, glev_from_data, glwe_from_file, glwe_to_file, lwe_from_file, lwe_to_file, to_json,
    CiphertextFile, EvalKeyFile, ParamsHeader,
};
use deskfhe::tfhe::{gate_eval, keygen, Gate, TfheParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn header(scheme: &str) -> ParamsHeader {
    ParamsHeader {
        scheme: scheme.into(),
        preset: "test".into(),
        k: 1,
        n: 0,
        q: None,
        chain: None,
        t: None,
        delta: None,
        sign: "minus".into(),
    }
}

fn through_json(f: CiphertextFile) -> CiphertextFile {
    from_json(&to_json(&f).unwrap()).unwrap()
}

#[test]
fn bfv_eval_keys_survive_serialization() {
    let ctx = BfvContext::new(BfvParams::desk()).unwrap();
    let keys = ctx.keygen(&Seed::from_u64(11)).unwrap();
    let file = EvalKeyFile {
        relin: glev_data(&keys.eval.relin),
        galois: keys.eval.galois.iter().map(|(k, v)| (*k, glev_data(&v.levs[0]))).collect(),
        ..Default::default()
    };
    let file: EvalKeyFile = from_json(&to_json(&file).unwrap()).unwrap();
    let eval = BfvEvalKeys {
        relin: glev_from_data(&file.relin, &ctx.big.ring, &ctx.relin_gadget).unwrap(),
        galois: file
            .galois
            .iter()
            .map(|(k, d)| (*k, KeySwitchKey { levs: vec![glev_from_data(d, &ctx.glwe.ring, &ctx.ks_gadget).unwrap()] }))
            .collect::<BTreeMap<_, _>>(),
    };

    let n = ctx.n();
    let t = ctx.t();
    let v: Vec<u64> = (0..n as u64).map(|i| (3 * i + 1) % t).collect();
    let ct = ctx.encrypt_pk(&v, &keys.public, &Seed::from_u64(12)).unwrap();
    let ct = match through_json(CiphertextFile::Glwe(glwe_to_file(&ct, header("bfv"), None, None))) {
        CiphertextFile::Glwe(g) => glwe_from_file(&g, &ctx.glwe).unwrap(),
        _ => unreachable!(),
    };
    let sq = ctx.mul(&ct, &ct, &eval).unwrap();
    let want: Vec<u64> = v.iter().map(|x| x * x % t).collect();
    assert_eq!(ctx.decrypt(&sq, &keys.secret).unwrap(), want);

    let r = ctx.rotate(&ct, 1, &eval).unwrap();
    let got = ctx.decrypt(&r, &keys.secret).unwrap();
    let h = n / 2;
    for i in 0..h {
        assert_eq!(got[i], v[(i + 1) % h]);
        assert_eq!(got[h + i], v[h + (i + 1) % h]);
    }
}

#[test]
fn bgv_depth_two_with_file_round_trip() {
    let ctx = BgvContext::new(BgvParams::desk()).unwrap();
    let keys = ctx.keygen(&Seed::from_u64(21)).unwrap();
    let t = ctx.t();
    let v: Vec<u64> = (0..ctx.n() as u64).map(|i| (i + 2) % t).collect();
    let ct = ctx.encrypt(&v, &keys.secret, &Seed::from_u64(22)).unwrap();
    let sq = ctx.mul(&ct, &ct, &keys.eval, true).unwrap();
    let back = match through_json(CiphertextFile::Glwe(glwe_to_file(&sq.ct, header("bgv"), Some(sq.level), None))) {
        CiphertextFile::Glwe(g) => {
            let level = g.level.unwrap();
            BgvCiphertext { ct: glwe_from_file(&g, &ctx.levels[level]).unwrap(), level }
        }
        _ => unreachable!(),
    };
    let quad = ctx.mul(&back, &back, &keys.eval, true).unwrap();
    assert_eq!(quad.level, ct.level - 2);
    let want: Vec<u64> = v.iter().map(|&x| (x * x % t) * (x * x % t) % t).collect();
    assert_eq!(ctx.decrypt(&quad, &keys.secret).unwrap(), want);
}

#[test]
fn ckks_polynomial_with_file_round_trip() {
    let ctx = CkksContext::new(CkksParams::desk()).unwrap();
    let keys = ctx.keygen(&Seed::from_u64(31)).unwrap();
    let z: Vec<Complex64> = (0..ctx.slots()).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos() / 2.0)).collect();
    let ct = ctx.encrypt_pk(&z, &keys.public, &Seed::from_u64(32)).unwrap();
    let ct = match through_json(CiphertextFile::Glwe(glwe_to_file(&ct.ct, header("ckks"), Some(ct.level), Some(ct.scale)))) {
        CiphertextFile::Glwe(g) => {
            let level = g.level.unwrap();
            CkksCiphertext { ct: glwe_from_file(&g, &ctx.levels[level]).unwrap(), level, scale: g.scale.unwrap() }
        }
        _ => unreachable!(),
    };
    // z^2 + z
    let sq = ctx.mul_rescale(&ct, &ct, &keys.eval).unwrap();
    let lin = ctx.mod_drop(&ct, sq.level).unwrap();
    let lin = CkksCiphertext { scale: sq.scale, ..lin };
    let out = ctx.add(&sq, &lin).unwrap();
    let want: Vec<Complex64> = z.iter().map(|x| x * x + x).collect();
    let err = max_abs_error(&ctx.decrypt(&out, &keys.secret).unwrap(), &want);
    assert!(err < 1e-2, "{err}");
}

#[test]
fn tfhe_half_adder_with_file_round_trip() {
    let p = TfheParams::gate_toy();
    let (ck, sk) = keygen(&p, &Seed::from_u64(41)).unwrap();
    let mut rng = Seed::from_u64(42).rng();
    for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
        let ca = ck.encrypt_bit(a, &mut rng);
        let cb = match through_json(CiphertextFile::Lwe(lwe_to_file(&ck.encrypt_bit(b, &mut rng), header("tfhe")))) {
            CiphertextFile::Lwe(l) => lwe_from_file(&l, p.log_q, p.k).unwrap(),
            _ => unreachable!(),
        };
        let sum = gate_eval(Gate::Xor, &[&ca, &cb], &sk).unwrap();
        let carry = gate_eval(Gate::And, &[&ca, &cb], &sk).unwrap();
        assert_eq!(ck.decrypt_bit(&sum).unwrap(), a ^ b);
        assert_eq!(ck.decrypt_bit(&carry).unwrap(), a & b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bfv_toy_add_and_plain_mul_are_slotwise(
        a in proptest::collection::vec(0u64..17, 8),
        b in proptest::collection::vec(0u64..17, 8),
        seed in any::<u64>(),
    ) {
        let ctx = BfvContext::new(BfvParams::toy()).unwrap();
        let t = ctx.t();
        let keys = ctx.keygen(&Seed::from_u64(seed)).unwrap();
        let ca = ctx.encrypt(&a, &keys.secret, &Seed::from_u64(seed).derive("a")).unwrap();
        let cb = ctx.encrypt(&b, &keys.secret, &Seed::from_u64(seed).derive("b")).unwrap();
        let sum = ctx.decrypt(&ctx.add(&ca, &cb).unwrap(), &keys.secret).unwrap();
        let prod = ctx.decrypt(&ctx.mul_plain(&ca, &b).unwrap(), &keys.secret).unwrap();
        for i in 0..8 {
            prop_assert_eq!(sum[i], (a[i] + b[i]) % t);
            prop_assert_eq!(prod[i], a[i] * b[i] % t);
        }
    }
}
