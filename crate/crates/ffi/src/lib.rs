//! C ABI for `hyperlat`.
//!
//! Objects are opaque handles created by `hyperlat_*_build`/`_analyze` and
//! released with the matching `_free`. Every fallible call returns a
//! [`HyperlatStatus`]; on failure, [`hyperlat_last_error`] describes the
//! error for the calling thread. Strings returned to the caller are released
//! with [`hyperlat_string_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hyperlat::css::{analyze, Analysis};
use hyperlat::decoder::{Decoder, Syndrome};
use hyperlat::error::{Error, LatticeError};
use hyperlat::fuchsian::{build_generators, GeneratorSet, QuotientSpec};
use hyperlat::lattice::{build_lattice, Lattice};
use hyperlat::montecarlo::{run, SimConfig};

/// Result of every fallible call. Values match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HyperlatStatus {
    Ok = 0,
    /// Null pointer, bad length or invalid UTF-8.
    InvalidArgument = 1,
    /// Rejected input: malformed quotient, config or pattern.
    InvalidInput = 2,
    /// A structural or algebraic invariant did not hold.
    InvariantFailure = 3,
    /// Decoding, simulation or I/O failure.
    RuntimeFailure = 4,
    /// A panic was caught at the boundary.
    Panic = 5,
}

/// A closed `{p,q}` lattice.
pub struct HyperlatLattice {
    lattice: Lattice,
    generators: GeneratorSet,
}

/// The surface code of a lattice, with its cycle bases and distances.
pub struct HyperlatCode {
    graph: hyperlat::lattice::PeriodicGraph,
    analysis: Analysis,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HyperlatStatus {
    match e {
        Error::Geometry(_) | Error::Fuchsian(_) | Error::Quotient(_) | Error::ConfigInvalid(_) => {
            HyperlatStatus::InvalidInput
        }
        Error::Lattice(
            LatticeError::ParseError(_) | LatticeError::NonIntegerCount { .. } | LatticeError::CoverageFailure { .. },
        ) => HyperlatStatus::InvalidInput,
        Error::Lattice(_) | Error::Cycle(_) | Error::Css(_) => HyperlatStatus::InvariantFailure,
        Error::Decode(_) | Error::InsufficientData(_) | Error::Io { .. } => HyperlatStatus::RuntimeFailure,
    }
}

struct Failure(HyperlatStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), format!("{}: {e}", e.name()))
    }
}

fn invalid(msg: &str) -> Failure {
    Failure(HyperlatStatus::InvalidArgument, msg.to_string())
}

/// Runs `f`, recording any error or panic for [`hyperlat_last_error`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HyperlatStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HyperlatStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            HyperlatStatus::Panic
        }
    }
}

/// # Safety
/// `s` must be null or a valid nul-terminated string.
unsafe fn str_arg<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(invalid("null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid("string argument is not UTF-8"))
}

/// # Safety
/// `p` must be null or point to a live `T` created by this library.
unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| invalid("null handle"))
}

fn write_out<T>(out: *mut T, value: T) {
    if !out.is_null() {
        // SAFETY: caller passes either null or a writable pointer.
        unsafe { out.write(value) }
    }
}

/// Message describing the last failure on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn hyperlat_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn hyperlat_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds the `{p,q}` lattice of a quotient given as JSON text.
///
/// # Safety
/// `quotient_json` must be a valid nul-terminated string and `out` a
/// writable pointer.
#[no_mangle]
pub unsafe extern "C" fn hyperlat_lattice_build(
    p: usize,
    q: usize,
    quotient_json: *const c_char,
    out: *mut *mut HyperlatLattice,
) -> HyperlatStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("null output pointer"));
        }
        let spec = QuotientSpec::from_json(str_arg(quotient_json)?).map_err(Error::from)?;
        let generators = build_generators(spec.signature()).map_err(Error::from)?;
        let lattice = build_lattice(p, q, &spec)?;
        out.write(Box::into_raw(Box::new(HyperlatLattice { lattice, generators })));
        Ok(())
    })
}

/// Vertex, edge and face counts, cell count and surface genus. Any output
/// pointer may be null.
///
/// # Safety
/// `lattice` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hyperlat_lattice_counts(
    lattice: *const HyperlatLattice,
    vertices: *mut usize,
    edges: *mut usize,
    faces: *mut usize,
    cells: *mut usize,
    genus: *mut usize,
) -> HyperlatStatus {
    guard(|| {
        let l = &handle(lattice)?.lattice;
        write_out(vertices, l.graph.num_vertices);
        write_out(edges, l.graph.num_edges());
        write_out(faces, l.predicted.f);
        write_out(cells, l.cells);
        write_out(genus, l.predicted.genus);
        Ok(())
    })
}

/// Edge endpoints as `2E` vertex ids, written into `buf` of length `len`.
///
/// # Safety
/// `lattice` must be a live handle and `buf` writable for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn hyperlat_lattice_edges(
    lattice: *const HyperlatLattice,
    buf: *mut usize,
    len: usize,
) -> HyperlatStatus {
    guard(|| {
        let edges = &handle(lattice)?.lattice.graph.edges;
        if buf.is_null() || len < 2 * edges.len() {
            return Err(invalid("edge buffer too small"));
        }
        let out = std::slice::from_raw_parts_mut(buf, 2 * edges.len());
        for (i, &(a, b)) in edges.iter().enumerate() {
            out[2 * i] = a;
            out[2 * i + 1] = b;
        }
        Ok(())
    })
}

/// # Safety
/// `lattice` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hyperlat_lattice_free(lattice: *mut HyperlatLattice) {
    if !lattice.is_null() {
        drop(Box::from_raw(lattice));
    }
}

/// Cycle bases, stabilizers, logicals and distances of a lattice.
///
/// # Safety
/// `lattice` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn hyperlat_code_analyze(
    lattice: *const HyperlatLattice,
    out: *mut *mut HyperlatCode,
) -> HyperlatStatus {
    guard(|| {
        let l = handle(lattice)?;
        if out.is_null() {
            return Err(invalid("null output pointer"));
        }
        let analysis = analyze(&l.lattice.graph, Some(&l.generators))?;
        out.write(Box::into_raw(Box::new(HyperlatCode {
            graph: l.lattice.graph.clone(),
            analysis,
        })));
        Ok(())
    })
}

/// `[[n, k, d_Z, d_X]]`. Any output pointer may be null.
///
/// # Safety
/// `code` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hyperlat_code_parameters(
    code: *const HyperlatCode,
    n: *mut usize,
    k: *mut usize,
    d_z: *mut usize,
    d_x: *mut usize,
) -> HyperlatStatus {
    guard(|| {
        let a = &handle(code)?.analysis;
        write_out(n, a.code.n);
        write_out(k, a.code.k);
        write_out(d_z, a.d_z);
        write_out(d_x, a.d_x);
        Ok(())
    })
}

/// Decodes a Z-error syndrome given as defect vertex ids. Writes one byte
/// per edge into `correction` (1 = flip) and the correction weight into
/// `weight`, which may be null.
///
/// # Safety
/// `code` must be a live handle, `defects` readable for `num_defects`
/// elements and `correction` writable for `num_edges` bytes.
#[no_mangle]
pub unsafe extern "C" fn hyperlat_code_decode(
    code: *const HyperlatCode,
    defects: *const usize,
    num_defects: usize,
    correction: *mut u8,
    num_edges: usize,
    weight: *mut usize,
) -> HyperlatStatus {
    guard(|| {
        let c = handle(code)?;
        let ne = c.graph.num_edges();
        if correction.is_null() || num_edges != ne {
            return Err(invalid("correction buffer must hold one byte per edge"));
        }
        if defects.is_null() && num_defects > 0 {
            return Err(invalid("null defect list"));
        }
        let d = if num_defects == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(defects, num_defects)
        };
        if let Some(&v) = d.iter().find(|&&v| v >= c.graph.num_vertices) {
            return Err(invalid(&format!("defect {v} out of range")));
        }
        let m = Decoder::new(&c.graph)
            .decode(&Syndrome::new(d.to_vec()))
            .map_err(Error::from)?;
        let corr = m.correction(ne);
        let out = std::slice::from_raw_parts_mut(correction, ne);
        for (i, b) in out.iter_mut().enumerate() {
            *b = u8::from(corr.get(i));
        }
        write_out(weight, m.total_weight);
        Ok(())
    })
}

/// # Safety
/// `code` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hyperlat_code_free(code: *mut HyperlatCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Runs a simulation from a JSON config and returns the results CSV in
/// `csv_out`, to be released with [`hyperlat_string_free`]. Relative
/// quotient paths resolve against the working directory.
///
/// # Safety
/// `config_json` must be a valid nul-terminated string and `csv_out` a
/// writable pointer.
#[no_mangle]
pub unsafe extern "C" fn hyperlat_simulate(config_json: *const c_char, csv_out: *mut *mut c_char) -> HyperlatStatus {
    guard(|| {
        if csv_out.is_null() {
            return Err(invalid("null output pointer"));
        }
        let config: SimConfig = serde_json::from_str(str_arg(config_json)?)
            .map_err(|e| Failure::from(Error::ConfigInvalid(e.to_string())))?;
        let result = run(&config)?;
        let csv = CString::new(result.to_csv()).expect("CSV has no nul bytes");
        csv_out.write(csv.into_raw());
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hyperlat_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
