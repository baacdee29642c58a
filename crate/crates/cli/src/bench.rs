//! Wall-clock timing of single primitives.

use std::hint::black_box;
use std::time::Instant;

use clap::ValueEnum;
use deskfhe::modular::primes_below;
use deskfhe::prng::Seed;
use deskfhe::tfhe::{keygen, Lut, TfheParams};
use deskfhe::transform::NttTables;
use serde::Serialize;

use crate::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Target {
    /// Forward plus inverse NTT at degree --size (default 4096).
    Ntt,
    /// One GGSW x GLWE external product, tfhe desk parameters.
    Extprod,
    /// One programmable bootstrap, tfhe desk parameters.
    Bootstrap,
}

#[derive(Debug, Serialize)]
pub struct BenchResult {
    pub target: String,
    pub params: String,
    pub reps: usize,
    pub ns_per_op: f64,
}

impl BenchResult {
    pub fn line(&self) -> String {
        format!("{:<10} {:<28} {:>14.0} ns/op  ({} reps)", self.target, self.params, self.ns_per_op, self.reps)
    }
}

fn time<F: FnMut()>(reps: usize, mut f: F) -> f64 {
    f();
    let start = Instant::now();
    for _ in 0..reps {
        f();
    }
    start.elapsed().as_nanos() as f64 / reps as f64
}

pub fn run(target: Target, size: Option<usize>) -> CliResult<BenchResult> {
    let seed = Seed::from_u64(0);
    match target {
        Target::Ntt => {
            let n = size.unwrap_or(4096);
            if n < 2 || !n.is_power_of_two() {
                return Err(CliError::Usage(format!("--size must be a power of two >= 2, got {n}")));
            }
            let q = primes_below(50, 2 * n as u64, 1)?[0];
            let tables = NttTables::new(n, q)?;
            let mut rng = seed.rng();
            let mut a: Vec<u64> = (0..n).map(|_| rand::Rng::random_range(&mut rng, 0..q)).collect();
            let reps = (1 << 22) / n.max(1);
            let ns = time(reps.clamp(10, 10_000), || {
                tables.forward_br(black_box(&mut a));
                tables.inverse_br(black_box(&mut a));
            });
            Ok(BenchResult { target: "ntt".into(), params: format!("n={n} q={q}"), reps: reps.clamp(10, 10_000), ns_per_op: ns })
        }
        Target::Extprod | Target::Bootstrap => {
            let p = TfheParams::desk();
            let (ck, sk) = keygen(&p, &seed)?;
            let params = format!("n={} k={} l={}", p.n, p.k, p.bk_levels);
            let mut rng = seed.derive("bench").rng();
            if target == Target::Extprod {
                let reps = size.unwrap_or(200);
                let ct = ck.encrypt_rlwe_bit(true, &mut rng);
                let ns = time(reps, || {
                    black_box(sk.external_product(black_box(&ct), &sk.bsk[0]));
                });
                Ok(BenchResult { target: "extprod".into(), params, reps, ns_per_op: ns })
            } else {
                let reps = size.unwrap_or(5);
                let lut = Lut::identity(&p)?;
                let ct = ck.encrypt(1, &mut rng);
                let mut err = None;
                let ns = time(reps, || {
                    if let Err(e) = sk.bootstrap(black_box(&ct), &lut) {
                        err = Some(e);
                    }
                });
                if let Some(e) = err {
                    return Err(e.into());
                }
                Ok(BenchResult { target: "bootstrap".into(), params, reps, ns_per_op: ns })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ntt_rejects_bad_sizes() {
        assert!(matches!(run(Target::Ntt, Some(12)), Err(CliError::Usage(_))));
        let r = run(Target::Ntt, Some(64)).unwrap();
        assert!(r.ns_per_op > 0.0 && r.line().contains("ns/op"));
    }
}
