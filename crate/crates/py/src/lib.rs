//! Python bindings for permex.

use std::sync::Arc;

use permex_core::analysis::{self, Comparison, RandomnessReport};
use permex_core::{keyfile, transform, BitStream, EntropySource, KeyTrace, PermutationMap, PermutationSet, ShuffleMode, TailPolicy};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

create_exception!(permex, PermexError, PyException, "Base error raised by permex.");
create_exception!(permex, EntropyExhausted, PermexError, "The entropy source ran out of bits.");
create_exception!(permex, KeyFileError, PermexError, "A key file is malformed or corrupted.");

fn to_py(err: permex_core::Error) -> PyErr {
    use permex_core::Error;
    if err.is_exhaustion() {
        return EntropyExhausted::new_err(err.to_string());
    }
    match err {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        Error::KeyFile(e) => KeyFileError::new_err(e.to_string()),
        Error::Format(m) => PermexError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_mode(mode: &str) -> PyResult<ShuffleMode> {
    match mode {
        "unbiased" => Ok(ShuffleMode::Unbiased),
        "paper-literal" | "literal" => Ok(ShuffleMode::PaperLiteral),
        other => Err(PyValueError::new_err(format!("unknown shuffle mode {other:?}"))),
    }
}

fn parse_tail(tail: &str) -> PyResult<TailPolicy> {
    tail.parse().map_err(to_py)
}

fn parse_bits(bits: &str) -> PyResult<BitStream> {
    BitStream::parse(bits).map_err(to_py)
}

/// Supplier of random bits, consumed most significant bit first.
#[pyclass(name = "EntropySource", module = "permex")]
struct PyEntropySource {
    inner: EntropySource,
}

#[pymethods]
impl PyEntropySource {
    /// The operating system's entropy pool.
    #[staticmethod]
    fn system() -> Self {
        Self { inner: EntropySource::system() }
    }

    /// Reproducible ChaCha20 stream keyed by up to 32 seed bytes.
    #[staticmethod]
    fn seeded(seed: &[u8]) -> PyResult<Self> {
        EntropySource::seeded(seed).map(|inner| Self { inner }).map_err(to_py)
    }

    /// Reproducible ChaCha20 stream keyed by a hex seed.
    #[staticmethod]
    fn from_hex(seed: &str) -> PyResult<Self> {
        EntropySource::seeded_hex(seed).map(|inner| Self { inner }).map_err(to_py)
    }

    /// Finite pool of entropy bytes, e.g. QRNG output.
    #[staticmethod]
    #[pyo3(signature = (data, cycle = false))]
    fn from_bytes(data: &[u8], cycle: bool) -> Self {
        Self { inner: EntropySource::from_entropy_bytes(data.to_vec(), cycle) }
    }

    /// Finite pool read from a file.
    #[staticmethod]
    #[pyo3(signature = (path, cycle = false))]
    fn from_file(path: std::path::PathBuf, cycle: bool) -> PyResult<Self> {
        EntropySource::from_entropy_file(path, cycle).map(|inner| Self { inner }).map_err(to_py)
    }

    /// Incrementing byte counter, for tests.
    #[staticmethod]
    #[pyo3(signature = (start = 0))]
    fn counter(start: u8) -> Self {
        Self { inner: EntropySource::counter(start) }
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner.kind() {
            permex_core::SourceKind::QrngFile => "qrng-file",
            permex_core::SourceKind::System => "system",
            permex_core::SourceKind::DeterministicTest => "deterministic-test",
        }
    }

    /// Bits consumed so far.
    #[getter]
    fn position(&self) -> u64 {
        self.inner.position()
    }

    #[getter]
    fn capacity(&self) -> Option<u64> {
        self.inner.capacity()
    }

    #[getter]
    fn remaining(&self) -> Option<u64> {
        self.inner.remaining()
    }

    /// Next `k` bits as a '0'/'1' string.
    fn next_bits(&mut self, k: usize) -> PyResult<String> {
        self.inner.next_bits(k).map(|b| b.to_string()).map_err(to_py)
    }

    /// Next `k <= 64` bits as an unsigned integer.
    fn next_uint(&mut self, k: u32) -> PyResult<u64> {
        self.inner.next_uint(k).map_err(to_py)
    }

    /// Uniform integer in `[lo, hi]`.
    fn random_int(&mut self, lo: u64, hi: u64) -> PyResult<u64> {
        self.inner.random_int(lo, hi).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("EntropySource(kind={:?}, position={})", self.kind(), self.inner.position())
    }
}

/// Permutation of bit positions; `targets[i]` is the input index that
/// lands at output position `i` (0-based).
#[pyclass(name = "PermutationMap", module = "permex", frozen, eq)]
#[derive(PartialEq)]
struct PyPermutationMap {
    inner: PermutationMap,
}

#[pymethods]
impl PyPermutationMap {
    #[new]
    fn new(targets: Vec<u32>) -> PyResult<Self> {
        PermutationMap::new(targets).map(|inner| Self { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn from_one_based(targets: Vec<u32>) -> PyResult<Self> {
        PermutationMap::from_one_based(&targets).map(|inner| Self { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn identity(size: usize) -> Self {
        Self { inner: PermutationMap::identity(size) }
    }

    /// Fisher-Yates draw from `source`. `mode` is "unbiased" or "paper-literal".
    #[staticmethod]
    #[pyo3(signature = (size, source, mode = "unbiased"))]
    fn random(size: usize, source: &mut PyEntropySource, mode: &str) -> PyResult<Self> {
        PermutationMap::random(size, &mut source.inner, parse_mode(mode)?)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn targets(&self) -> Vec<u32> {
        self.inner.targets().to_vec()
    }

    fn to_one_based(&self) -> Vec<u32> {
        self.inner.to_one_based()
    }

    fn is_identity(&self) -> bool {
        self.inner.is_identity()
    }

    fn invert(&self) -> Self {
        Self { inner: self.inner.invert() }
    }

    /// Applies the map to a '0'/'1' string of exactly `size` bits.
    fn apply(&self, bits: &str) -> PyResult<String> {
        self.inner.apply(&parse_bits(bits)?).map(|b| b.to_string()).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.size()
    }

    fn __repr__(&self) -> String {
        format!("PermutationMap({:?})", self.inner.targets())
    }
}

/// Ordered set of `count` maps of one block size.
#[pyclass(name = "PermutationSet", module = "permex", frozen)]
struct PyPermutationSet {
    inner: Arc<PermutationSet>,
}

#[pymethods]
impl PyPermutationSet {
    #[new]
    fn new(maps: Vec<PyRef<'_, PyPermutationMap>>) -> PyResult<Self> {
        let maps = maps.iter().map(|m| m.inner.clone()).collect();
        PermutationSet::new(maps).map(|s| Self { inner: Arc::new(s) }).map_err(to_py)
    }

    /// Draws `count` maps of size `block_size` from `source`.
    #[staticmethod]
    #[pyo3(signature = (block_size, count, source, mode = "unbiased"))]
    fn generate(block_size: usize, count: usize, source: &mut PyEntropySource, mode: &str) -> PyResult<Self> {
        permex_core::generate_set(block_size, count, &mut source.inner, parse_mode(mode)?)
            .map(|s| Self { inner: Arc::new(s) })
            .map_err(to_py)
    }

    #[getter]
    fn block_size(&self) -> usize {
        self.inner.block_size()
    }

    #[getter]
    fn count(&self) -> usize {
        self.inner.count()
    }

    #[getter]
    fn maps(&self) -> Vec<PyPermutationMap> {
        self.inner.maps().iter().map(|m| PyPermutationMap { inner: m.clone() }).collect()
    }

    fn inverted(&self) -> Self {
        Self { inner: Arc::new(self.inner.inverted()) }
    }

    fn __len__(&self) -> usize {
        self.inner.count()
    }

    fn __repr__(&self) -> String {
        format!("PermutationSet(block_size={}, count={})", self.inner.block_size(), self.inner.count())
    }
}

/// Everything needed to invert one expansion.
#[pyclass(name = "KeyTrace", module = "permex", frozen)]
struct PyKeyTrace {
    inner: KeyTrace,
}

#[pymethods]
impl PyKeyTrace {
    #[getter]
    fn set(&self) -> PyPermutationSet {
        PyPermutationSet { inner: self.inner.set.clone() }
    }

    #[getter]
    fn selections(&self) -> Vec<u32> {
        self.inner.selections.clone()
    }

    #[getter]
    fn tail(&self) -> &'static str {
        self.inner.tail.as_str()
    }

    /// Input length in bits.
    #[getter]
    fn original_length(&self) -> u64 {
        self.inner.original_length
    }

    /// Serialized key-file record.
    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &keyfile::encode(&self.inner))
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        keyfile::decode(data)
            .map(|inner| Self { inner })
            .map_err(|e| to_py(e.into()))
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        keyfile::save(&self.inner, path).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        keyfile::load(path).map(|inner| Self { inner }).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "KeyTrace(block_size={}, count={}, chunks={}, tail={:?}, original_length={})",
            self.inner.block_size(),
            self.inner.set.count(),
            self.inner.selections.len(),
            self.inner.tail.as_str(),
            self.inner.original_length
        )
    }
}

fn report_dict<'py>(py: Python<'py>, r: &RandomnessReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("byte_count", r.byte_count)?;
    d.set_item("entropy", r.entropy)?;
    d.set_item("chi_square", r.chi_square)?;
    d.set_item("mean", r.mean)?;
    d.set_item("monte_carlo_pi", r.monte_carlo_pi)?;
    d.set_item("serial_correlation", r.serial_correlation)?;
    Ok(d)
}

fn comparison_dict<'py>(py: Python<'py>, c: &Comparison) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for m in &c.metrics {
        let row = PyDict::new(py);
        row.set_item("ideal", m.ideal)?;
        row.set_item("before", m.before)?;
        row.set_item("after", m.after)?;
        row.set_item("percent_change", m.percent_change)?;
        d.set_item(&m.metric, row)?;
    }
    Ok(d)
}

/// Expands `data` chunk by chunk. Returns `(output_bytes, trace)`.
#[pyfunction]
#[pyo3(signature = (data, set, source, tail = "identity"))]
fn expand<'py>(
    py: Python<'py>,
    data: &[u8],
    set: &PyPermutationSet,
    source: &mut PyEntropySource,
    tail: &str,
) -> PyResult<(Bound<'py, PyBytes>, PyKeyTrace)> {
    let input = BitStream::from_bytes(data.to_vec());
    let (out, trace) = transform::expand(&input, &set.inner, &mut source.inner, parse_tail(tail)?).map_err(to_py)?;
    let bytes = out.into_bytes().map_err(to_py)?;
    Ok((PyBytes::new(py, &bytes), PyKeyTrace { inner: trace }))
}

/// Restores the input of `expand` from its output and trace.
#[pyfunction]
fn invert<'py>(py: Python<'py>, data: &[u8], trace: &PyKeyTrace) -> PyResult<Bound<'py, PyBytes>> {
    let out = transform::invert(&BitStream::from_bytes(data.to_vec()), &trace.inner).map_err(to_py)?;
    Ok(PyBytes::new(py, &out.into_bytes().map_err(to_py)?))
}

/// Bit-string variant of `expand` for inputs that are not whole bytes.
#[pyfunction]
#[pyo3(signature = (bits, set, source, tail = "identity"))]
fn expand_bits(bits: &str, set: &PyPermutationSet, source: &mut PyEntropySource, tail: &str) -> PyResult<(String, PyKeyTrace)> {
    let (out, trace) =
        transform::expand(&parse_bits(bits)?, &set.inner, &mut source.inner, parse_tail(tail)?).map_err(to_py)?;
    Ok((out.to_string(), PyKeyTrace { inner: trace }))
}

#[pyfunction]
fn invert_bits(bits: &str, trace: &PyKeyTrace) -> PyResult<String> {
    transform::invert(&parse_bits(bits)?, &trace.inner).map(|b| b.to_string()).map_err(to_py)
}

/// ENT-style measures of `data` as a dict.
#[pyfunction]
fn analyze<'py>(py: Python<'py>, data: &[u8]) -> PyResult<Bound<'py, PyDict>> {
    report_dict(py, &analysis::analyze(data).map_err(to_py)?)
}

/// Per-metric before/after comparison of two byte sequences.
#[pyfunction]
fn compare<'py>(py: Python<'py>, before: &[u8], after: &[u8]) -> PyResult<Bound<'py, PyDict>> {
    let b = analysis::analyze(before).map_err(to_py)?;
    let a = analysis::analyze(after).map_err(to_py)?;
    comparison_dict(py, &analysis::compare(&b, &a))
}

#[pyfunction]
fn save_keys(traces: Vec<PyRef<'_, PyKeyTrace>>, path: std::path::PathBuf) -> PyResult<()> {
    let traces: Vec<KeyTrace> = traces.iter().map(|t| t.inner.clone()).collect();
    keyfile::save_many(&traces, path).map_err(to_py)
}

#[pyfunction]
fn load_keys(path: std::path::PathBuf) -> PyResult<Vec<PyKeyTrace>> {
    keyfile::load_many(path)
        .map(|ts| ts.into_iter().map(|inner| PyKeyTrace { inner }).collect())
        .map_err(to_py)
}

#[pymodule]
fn permex(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("PermexError", py.get_type::<PermexError>())?;
    m.add("EntropyExhausted", py.get_type::<EntropyExhausted>())?;
    m.add("KeyFileError", py.get_type::<KeyFileError>())?;
    m.add_class::<PyEntropySource>()?;
    m.add_class::<PyPermutationMap>()?;
    m.add_class::<PyPermutationSet>()?;
    m.add_class::<PyKeyTrace>()?;
    m.add_function(wrap_pyfunction!(expand, m)?)?;
    m.add_function(wrap_pyfunction!(invert, m)?)?;
    m.add_function(wrap_pyfunction!(expand_bits, m)?)?;
    m.add_function(wrap_pyfunction!(invert_bits, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(save_keys, m)?)?;
    m.add_function(wrap_pyfunction!(load_keys, m)?)?;
    Ok(())
}
