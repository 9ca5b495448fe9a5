//! Groth16 over BN254 for R1CS matrices built on the Python side.
//!
//! The Python package owns the circuit; this extension only replays its
//! sparse matrices into arkworks and exposes setup / prove / verify plus the
//! compressed canonical encodings of keys and proofs.

use ark_bn254::{Bn254, Fr, G1Projective, G2Projective};
use ark_groth16::{Groth16, PreparedVerifyingKey, Proof, ProvingKey, VerifyingKey};
use ark_relations::r1cs::{
    ConstraintSynthesizer, ConstraintSystemRef, LinearCombination, SynthesisError, Variable,
};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize, Compress, Validate};
use ark_std::UniformRand;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use zeroize::Zeroize;

type Row = Vec<(usize, Fr)>;

fn decode_fr(bytes: &[u8]) -> PyResult<Fr> {
    if bytes.len() != 32 {
        return Err(PyValueError::new_err("field element must be 32 bytes"));
    }
    Fr::deserialize_compressed(bytes)
        .map_err(|_| PyValueError::new_err("non-canonical field element"))
}

fn decode_rows(rows: Vec<Vec<(usize, Vec<u8>)>>, num_wires: usize) -> PyResult<Vec<Row>> {
    rows.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|(col, coeff)| {
                    if col >= num_wires {
                        return Err(PyValueError::new_err("wire index out of range"));
                    }
                    Ok((col, decode_fr(&coeff)?))
                })
                .collect()
        })
        .collect()
}

fn seeded(seed: &[u8]) -> PyResult<ChaCha20Rng> {
    let seed: [u8; 32] = seed
        .try_into()
        .map_err(|_| PyValueError::new_err("rng seed must be 32 bytes"))?;
    Ok(ChaCha20Rng::from_seed(seed))
}

/// Sparse R1CS: wire 0 is the constant one, wires 1..=num_public are public.
#[pyclass(frozen, module = "sans._groth16")]
struct Circuit {
    num_public: usize,
    num_wires: usize,
    a: Vec<Row>,
    b: Vec<Row>,
    c: Vec<Row>,
}

#[pymethods]
impl Circuit {
    #[new]
    fn new(
        num_public: usize,
        num_wires: usize,
        a: Vec<Vec<(usize, Vec<u8>)>>,
        b: Vec<Vec<(usize, Vec<u8>)>>,
        c: Vec<Vec<(usize, Vec<u8>)>>,
    ) -> PyResult<Self> {
        if a.len() != b.len() || b.len() != c.len() {
            return Err(PyValueError::new_err("matrices must have equal row counts"));
        }
        if num_public + 1 > num_wires {
            return Err(PyValueError::new_err("more public inputs than wires"));
        }
        Ok(Circuit {
            num_public,
            num_wires,
            a: decode_rows(a, num_wires)?,
            b: decode_rows(b, num_wires)?,
            c: decode_rows(c, num_wires)?,
        })
    }

    #[getter]
    fn num_constraints(&self) -> usize {
        self.a.len()
    }

    #[getter]
    fn num_public(&self) -> usize {
        self.num_public
    }

    #[getter]
    fn num_wires(&self) -> usize {
        self.num_wires
    }
}

struct Synth<'a> {
    circuit: &'a Circuit,
    witness: Option<&'a [Fr]>,
}

impl<'a> ConstraintSynthesizer<Fr> for Synth<'a> {
    fn generate_constraints(self, cs: ConstraintSystemRef<Fr>) -> Result<(), SynthesisError> {
        let n = self.circuit.num_wires;
        let mut vars = Vec::with_capacity(n);
        vars.push(Variable::One);
        for i in 1..n {
            let value = || {
                self.witness
                    .map(|w| w[i])
                    .ok_or(SynthesisError::AssignmentMissing)
            };
            let var = if i <= self.circuit.num_public {
                cs.new_input_variable(value)?
            } else {
                cs.new_witness_variable(value)?
            };
            vars.push(var);
        }
        let lc = |row: &Row| LinearCombination(row.iter().map(|(col, k)| (*k, vars[*col])).collect());
        for i in 0..self.circuit.a.len() {
            cs.enforce_constraint(lc(&self.circuit.a[i]), lc(&self.circuit.b[i]), lc(&self.circuit.c[i]))?;
        }
        Ok(())
    }
}

#[pyclass(frozen, module = "sans._groth16")]
struct ProvingParams {
    inner: ProvingKey<Bn254>,
}

#[pymethods]
impl ProvingParams {
    #[staticmethod]
    #[pyo3(signature = (data, validate = true))]
    fn from_bytes(py: Python<'_>, data: Vec<u8>, validate: bool) -> PyResult<Self> {
        let check = if validate { Validate::Yes } else { Validate::No };
        py.allow_threads(|| {
            ProvingKey::<Bn254>::deserialize_with_mode(&data[..], Compress::Yes, check)
                .map(|inner| ProvingParams { inner })
                .map_err(|e| PyValueError::new_err(format!("bad proving key: {e}")))
        })
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyBytes>> {
        let mut out = Vec::new();
        self.inner
            .serialize_compressed(&mut out)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(PyBytes::new_bound(py, &out))
    }

    fn verifying_params(&self) -> VerifyingParams {
        VerifyingParams::wrap(self.inner.vk.clone())
    }
}

#[pyclass(frozen, module = "sans._groth16")]
struct VerifyingParams {
    prepared: PreparedVerifyingKey<Bn254>,
}

impl VerifyingParams {
    fn wrap(vk: VerifyingKey<Bn254>) -> Self {
        VerifyingParams {
            prepared: ark_groth16::prepare_verifying_key(&vk),
        }
    }
}

#[pymethods]
impl VerifyingParams {
    #[staticmethod]
    fn from_bytes(data: Vec<u8>) -> PyResult<Self> {
        VerifyingKey::<Bn254>::deserialize_compressed(&data[..])
            .map(VerifyingParams::wrap)
            .map_err(|e| PyValueError::new_err(format!("bad verifying key: {e}")))
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyBytes>> {
        let mut out = Vec::new();
        self.prepared
            .vk
            .serialize_compressed(&mut out)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(PyBytes::new_bound(py, &out))
    }

    #[getter]
    fn num_public(&self) -> usize {
        self.prepared.vk.gamma_abc_g1.len() - 1
    }
}

/// Single-party setup. The four scalar trapdoors are zeroized before return.
#[pyfunction]
fn setup(py: Python<'_>, circuit: &Circuit, seed: Vec<u8>) -> PyResult<ProvingParams> {
    let mut rng = seeded(&seed)?;
    py.allow_threads(move || {
        let mut alpha = Fr::rand(&mut rng);
        let mut beta = Fr::rand(&mut rng);
        let mut gamma = Fr::rand(&mut rng);
        let mut delta = Fr::rand(&mut rng);
        let g1 = G1Projective::rand(&mut rng);
        let g2 = G2Projective::rand(&mut rng);
        let synth = Synth { circuit, witness: None };
        let result = Groth16::<Bn254>::generate_parameters_with_qap(
            synth, alpha, beta, gamma, delta, g1, g2, &mut rng,
        );
        alpha.zeroize();
        beta.zeroize();
        gamma.zeroize();
        delta.zeroize();
        drop(rng);
        result
            .map(|inner| ProvingParams { inner })
            .map_err(|e| PyRuntimeError::new_err(format!("setup failed: {e}")))
    })
}

#[pyfunction]
#[pyo3(signature = (circuit, params, witness, seed, threads = 0))]
fn prove<'py>(
    py: Python<'py>,
    circuit: &Circuit,
    params: &ProvingParams,
    witness: Vec<Vec<u8>>,
    seed: Vec<u8>,
    threads: usize,
) -> PyResult<Bound<'py, PyBytes>> {
    if witness.len() != circuit.num_wires {
        return Err(PyValueError::new_err("witness length does not match wire count"));
    }
    let values = witness.iter().map(|w| decode_fr(w)).collect::<PyResult<Vec<Fr>>>()?;
    let mut rng = seeded(&seed)?;
    let out = py.allow_threads(move || {
        let mut run = move || {
            let synth = Synth { circuit, witness: Some(&values) };
            Groth16::<Bn254>::create_random_proof_with_reduction(synth, &params.inner, &mut rng)
        };
        let proof = if threads > 0 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
            pool.install(run)
        } else {
            run()
        }
        .map_err(|e| PyRuntimeError::new_err(format!("proving failed: {e}")))?;
        let mut out = Vec::new();
        proof
            .serialize_compressed(&mut out)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok::<_, PyErr>(out)
    })?;
    Ok(PyBytes::new_bound(py, &out))
}

/// Returns the pairing check result; raises ValueError on undecodable input.
#[pyfunction]
fn verify(py: Python<'_>, params: &VerifyingParams, public_inputs: Vec<Vec<u8>>, proof: Vec<u8>) -> PyResult<bool> {
    if public_inputs.len() + 1 != params.prepared.vk.gamma_abc_g1.len() {
        return Err(PyValueError::new_err("wrong number of public inputs"));
    }
    let inputs = public_inputs.iter().map(|x| decode_fr(x)).collect::<PyResult<Vec<Fr>>>()?;
    let proof = Proof::<Bn254>::deserialize_compressed(&proof[..])
        .map_err(|e| PyValueError::new_err(format!("malformed proof: {e}")))?;
    py.allow_threads(|| {
        Groth16::<Bn254>::verify_proof(&params.prepared, &proof, &inputs)
            .map_err(|e| PyValueError::new_err(format!("verification error: {e}")))
    })
}

#[pyfunction]
fn proof_size() -> usize {
    Proof::<Bn254>::default().compressed_size()
}

#[pymodule]
fn _groth16(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Circuit>()?;
    m.add_class::<ProvingParams>()?;
    m.add_class::<VerifyingParams>()?;
    m.add_function(wrap_pyfunction!(setup, m)?)?;
    m.add_function(wrap_pyfunction!(prove, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(proof_size, m)?)?;
    Ok(())
}
