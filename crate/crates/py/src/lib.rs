//! Python bindings: `import pydeskfhe`.
//!
//! Each scheme class owns its secret and evaluation keys; ciphertexts are opaque handles.

use deskfhe::bfv::{BfvCiphertext, BfvContext, BfvEvalKeys, BfvParams};
use deskfhe::bgv::{BgvCiphertext, BgvContext, BgvEvalKeys, BgvParams};
use deskfhe::ckks::{CkksCiphertext, CkksContext, CkksEvalKeys, CkksParams};
use deskfhe::glwe::GlweSecretKey;
use deskfhe::modular::inv_mod;
use deskfhe::prng::Seed;
use deskfhe::tfhe::{gate_eval, keygen, ClientKey, Gate, LweCiphertext, ServerKey, TfheParams};
use deskfhe::transform::NttTables;
use deskfhe::{worked, FheError};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: FheError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// `a^-1 mod q`.
#[pyfunction]
pub fn mod_inverse(a: u64, q: u64) -> PyResult<u64> {
    inv_mod(a, q).map_err(err)
}

/// Negacyclic NTT of `coeffs` (natural order in and out); `q = 1 mod 2n`.
#[pyfunction]
pub fn ntt(coeffs: Vec<u64>, q: u64) -> PyResult<Vec<u64>> {
    Ok(NttTables::new(coeffs.len(), q).map_err(err)?.forward(&coeffs))
}

#[pyfunction]
pub fn intt(values: Vec<u64>, q: u64) -> PyResult<Vec<u64>> {
    Ok(NttTables::new(values.len(), q).map_err(err)?.inverse(&values))
}

/// Run the built-in worked examples; one dict per example.
#[pyfunction]
pub fn worked_examples(py: Python<'_>) -> PyResult<Vec<Bound<'_, PyDict>>> {
    worked::run(&worked::all())
        .into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("id", r.id)?;
            d.set_item("area", r.area)?;
            d.set_item("pass", r.pass)?;
            d.set_item("detail", r.detail)?;
            Ok(d)
        })
        .collect()
}

fn check_slots(v: &[u64], n: usize, t: u64) -> PyResult<Vec<u64>> {
    if v.is_empty() || v.len() > n {
        return Err(PyValueError::new_err(format!("need 1 to {n} slots, got {}", v.len())));
    }
    if let Some(x) = v.iter().find(|&&x| x >= t) {
        return Err(PyValueError::new_err(format!("slot {x} is not below t = {t}")));
    }
    let mut out = v.to_vec();
    out.resize(n, 0);
    Ok(out)
}

#[pyclass(module = "pydeskfhe", from_py_object)]
#[derive(Clone)]
pub struct BfvCt(BfvCiphertext);

/// BFV with preset `toy`, `batch` or `desk`.
#[pyclass(module = "pydeskfhe")]
pub struct Bfv {
    ctx: BfvContext,
    sk: GlweSecretKey,
    eval: BfvEvalKeys,
    seed: Seed,
    count: u64,
}

#[pymethods]
impl Bfv {
    #[new]
    #[pyo3(signature = (preset = "toy", seed = 0))]
    pub fn new(preset: &str, seed: u64) -> PyResult<Self> {
        let ctx = BfvContext::new(BfvParams::by_name(preset).map_err(err)?).map_err(err)?;
        let seed = Seed::from_u64(seed);
        let keys = ctx.keygen(&seed).map_err(err)?;
        Ok(Self { ctx, sk: keys.secret, eval: keys.eval, seed, count: 0 })
    }

    #[getter]
    pub fn n(&self) -> usize {
        self.ctx.n()
    }

    #[getter]
    pub fn t(&self) -> u64 {
        self.ctx.t()
    }

    pub fn encrypt(&mut self, slots: Vec<u64>) -> PyResult<BfvCt> {
        let v = check_slots(&slots, self.ctx.n(), self.ctx.t())?;
        self.count += 1;
        let s = self.seed.derive_index("py-encrypt", self.count);
        Ok(BfvCt(self.ctx.encrypt(&v, &self.sk, &s).map_err(err)?))
    }

    pub fn decrypt(&self, ct: &BfvCt) -> PyResult<Vec<u64>> {
        self.ctx.decrypt(&ct.0, &self.sk).map_err(err)
    }

    pub fn add(&self, a: &BfvCt, b: &BfvCt) -> PyResult<BfvCt> {
        Ok(BfvCt(self.ctx.add(&a.0, &b.0).map_err(err)?))
    }

    pub fn sub(&self, a: &BfvCt, b: &BfvCt) -> PyResult<BfvCt> {
        Ok(BfvCt(self.ctx.sub(&a.0, &b.0).map_err(err)?))
    }

    pub fn mul(&self, a: &BfvCt, b: &BfvCt) -> PyResult<BfvCt> {
        Ok(BfvCt(self.ctx.mul(&a.0, &b.0, &self.eval).map_err(err)?))
    }

    /// Left-rotate each half of the slot vector by `h`.
    pub fn rotate(&self, a: &BfvCt, h: usize) -> PyResult<BfvCt> {
        Ok(BfvCt(self.ctx.rotate(&a.0, h, &self.eval).map_err(err)?))
    }

    /// Swap the two halves.
    pub fn swap(&self, a: &BfvCt) -> PyResult<BfvCt> {
        Ok(BfvCt(self.ctx.swap(&a.0, &self.eval).map_err(err)?))
    }
}

#[pyclass(module = "pydeskfhe", from_py_object)]
#[derive(Clone)]
pub struct BgvCt(BgvCiphertext);

#[pymethods]
impl BgvCt {
    #[getter]
    pub fn level(&self) -> usize {
        self.0.level
    }
}

/// BGV with preset `toy` or `desk`.
#[pyclass(module = "pydeskfhe")]
pub struct Bgv {
    ctx: BgvContext,
    sk: GlweSecretKey,
    eval: BgvEvalKeys,
    seed: Seed,
    count: u64,
}

#[pymethods]
impl Bgv {
    #[new]
    #[pyo3(signature = (preset = "desk", seed = 0))]
    pub fn new(preset: &str, seed: u64) -> PyResult<Self> {
        let ctx = BgvContext::new(BgvParams::by_name(preset).map_err(err)?).map_err(err)?;
        let seed = Seed::from_u64(seed);
        let keys = ctx.keygen(&seed).map_err(err)?;
        Ok(Self { ctx, sk: keys.secret, eval: keys.eval, seed, count: 0 })
    }

    #[getter]
    pub fn n(&self) -> usize {
        self.ctx.n()
    }

    #[getter]
    pub fn t(&self) -> u64 {
        self.ctx.t()
    }

    pub fn encrypt(&mut self, slots: Vec<u64>) -> PyResult<BgvCt> {
        let v = check_slots(&slots, self.ctx.n(), self.ctx.t())?;
        self.count += 1;
        let s = self.seed.derive_index("py-encrypt", self.count);
        Ok(BgvCt(self.ctx.encrypt(&v, &self.sk, &s).map_err(err)?))
    }

    pub fn decrypt(&self, ct: &BgvCt) -> PyResult<Vec<u64>> {
        self.ctx.decrypt(&ct.0, &self.sk).map_err(err)
    }

    pub fn add(&self, a: &BgvCt, b: &BgvCt) -> PyResult<BgvCt> {
        Ok(BgvCt(self.ctx.add(&a.0, &b.0).map_err(err)?))
    }

    /// Multiply, relinearize and drop one level.
    pub fn mul(&self, a: &BgvCt, b: &BgvCt) -> PyResult<BgvCt> {
        Ok(BgvCt(self.ctx.mul(&a.0, &b.0, &self.eval, true).map_err(err)?))
    }

    pub fn rotate(&self, a: &BgvCt, h: usize) -> PyResult<BgvCt> {
        Ok(BgvCt(self.ctx.rotate(&a.0, h, &self.eval).map_err(err)?))
    }
}

#[pyclass(module = "pydeskfhe", from_py_object)]
#[derive(Clone)]
pub struct CkksCt(CkksCiphertext);

#[pymethods]
impl CkksCt {
    #[getter]
    pub fn level(&self) -> usize {
        self.0.level
    }

    #[getter]
    pub fn scale(&self) -> f64 {
        self.0.scale
    }
}

/// CKKS with preset `toy` or `desk`; slots are Python complex numbers.
#[pyclass(module = "pydeskfhe")]
pub struct Ckks {
    ctx: CkksContext,
    sk: GlweSecretKey,
    eval: CkksEvalKeys,
    seed: Seed,
    count: u64,
}

#[pymethods]
impl Ckks {
    #[new]
    #[pyo3(signature = (preset = "desk", seed = 0))]
    pub fn new(preset: &str, seed: u64) -> PyResult<Self> {
        let ctx = CkksContext::new(CkksParams::by_name(preset).map_err(err)?).map_err(err)?;
        let seed = Seed::from_u64(seed);
        let keys = ctx.keygen(&seed).map_err(err)?;
        Ok(Self { ctx, sk: keys.secret, eval: keys.eval, seed, count: 0 })
    }

    #[getter]
    pub fn slots(&self) -> usize {
        self.ctx.slots()
    }

    pub fn encrypt(&mut self, z: Vec<Complex64>) -> PyResult<CkksCt> {
        let n = self.ctx.slots();
        if z.is_empty() || z.len() > n {
            return Err(PyValueError::new_err(format!("need 1 to {n} slots, got {}", z.len())));
        }
        let mut z = z;
        z.resize(n, Complex64::new(0.0, 0.0));
        self.count += 1;
        let s = self.seed.derive_index("py-encrypt", self.count);
        Ok(CkksCt(self.ctx.encrypt(&z, &self.sk, &s).map_err(err)?))
    }

    pub fn decrypt(&self, ct: &CkksCt) -> PyResult<Vec<Complex64>> {
        self.ctx.decrypt(&ct.0, &self.sk).map_err(err)
    }

    pub fn add(&self, a: &CkksCt, b: &CkksCt) -> PyResult<CkksCt> {
        Ok(CkksCt(self.ctx.add(&a.0, &b.0).map_err(err)?))
    }

    /// Multiply, relinearize and rescale.
    pub fn mul(&self, a: &CkksCt, b: &CkksCt) -> PyResult<CkksCt> {
        Ok(CkksCt(self.ctx.mul_rescale(&a.0, &b.0, &self.eval).map_err(err)?))
    }

    pub fn rotate(&self, a: &CkksCt, h: usize) -> PyResult<CkksCt> {
        Ok(CkksCt(self.ctx.rotate(&a.0, h, &self.eval).map_err(err)?))
    }

    pub fn conjugate(&self, a: &CkksCt) -> PyResult<CkksCt> {
        Ok(CkksCt(self.ctx.conjugate(&a.0, &self.eval).map_err(err)?))
    }
}

#[pyclass(module = "pydeskfhe", from_py_object)]
#[derive(Clone)]
pub struct TfheCt(LweCiphertext);

/// Boolean TFHE with preset `gate-toy`, `small` or `desk`.
#[pyclass(module = "pydeskfhe")]
pub struct Tfhe {
    ck: ClientKey,
    sk: ServerKey,
    seed: Seed,
    count: u64,
}

#[pymethods]
impl Tfhe {
    #[new]
    #[pyo3(signature = (preset = "gate-toy", seed = 0))]
    pub fn new(preset: &str, seed: u64) -> PyResult<Self> {
        let p = TfheParams::by_name(preset).map_err(err)?;
        let seed = Seed::from_u64(seed);
        let (ck, sk) = keygen(&p, &seed).map_err(err)?;
        Ok(Self { ck, sk, seed, count: 0 })
    }

    pub fn encrypt(&mut self, bit: bool) -> TfheCt {
        self.count += 1;
        let mut rng = self.seed.derive_index("py-encrypt", self.count).rng();
        TfheCt(self.ck.encrypt_bit(bit, &mut rng))
    }

    pub fn decrypt(&self, ct: &TfheCt) -> PyResult<bool> {
        self.ck.decrypt_bit(&ct.0).map_err(err)
    }

    /// `gate("AND", [a, b])`; MUX takes `[sel, a, b]`.
    pub fn gate(&self, name: &str, inputs: Vec<TfheCt>) -> PyResult<TfheCt> {
        let g: Gate = name.parse().map_err(err)?;
        if inputs.len() != g.arity() {
            return Err(PyValueError::new_err(format!("{name} takes {} inputs, got {}", g.arity(), inputs.len())));
        }
        let refs: Vec<&LweCiphertext> = inputs.iter().map(|c| &c.0).collect();
        Ok(TfheCt(gate_eval(g, &refs, &self.sk).map_err(err)?))
    }
}

#[pymodule]
fn pydeskfhe(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(mod_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(ntt, m)?)?;
    m.add_function(wrap_pyfunction!(intt, m)?)?;
    m.add_function(wrap_pyfunction!(worked_examples, m)?)?;
    m.add_class::<Bfv>()?;
    m.add_class::<BfvCt>()?;
    m.add_class::<Bgv>()?;
    m.add_class::<BgvCt>()?;
    m.add_class::<Ckks>()?;
    m.add_class::<CkksCt>()?;
    m.add_class::<Tfhe>()?;
    m.add_class::<TfheCt>()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bfv_session_roundtrip() {
        let mut s = Bfv::new("toy", 3).unwrap();
        let a = s.encrypt(vec![1, 2, 3, 4, 5, 6, 7, 8]).unwrap();
        let r = s.rotate(&a, 3).unwrap();
        assert_eq!(s.decrypt(&r).unwrap(), vec![4, 1, 2, 3, 8, 5, 6, 7]);
        let m = s.mul(&a, &a).unwrap();
        assert_eq!(s.decrypt(&m).unwrap()[..3], [1, 4, 9]);
        assert!(s.encrypt(vec![]).is_err());
        assert!(s.encrypt(vec![99]).is_err());
    }

    #[test]
    fn tfhe_gates() {
        let mut s = Tfhe::new("gate-toy", 1).unwrap();
        for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
            let x = s.encrypt(a);
            let y = s.encrypt(b);
            let o = s.gate("XOR", vec![x.clone(), y]).unwrap();
            assert_eq!(s.decrypt(&o).unwrap(), a ^ b);
        }
        let x = s.encrypt(true);
        assert!(s.gate("AND", vec![x]).is_err());
    }

    #[test]
    fn ckks_session() {
        let mut s = Ckks::new("desk", 2).unwrap();
        let a = s.encrypt(vec![Complex64::new(1.5, 0.5)]).unwrap();
        let m = s.mul(&a, &a).unwrap();
        let got = s.decrypt(&m).unwrap()[0];
        assert!((got - Complex64::new(2.0, 1.5)).norm() < 1e-2, "{got}");
        assert_eq!(m.level(), a.level() - 1);
    }

    #[test]
    fn ntt_inverts() {
        let q = 17;
        let a = vec![1, 2, 3, 4];
        assert_eq!(intt(ntt(a.clone(), q).unwrap(), q).unwrap(), a);
        assert_eq!(mod_inverse(3, 7).unwrap(), 5);
        assert!(mod_inverse(0, 7).is_err());
    }
}
