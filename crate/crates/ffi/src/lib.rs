//! C bindings for parsing, validating and comparing BPMN models.
//!
//! Every fallible function returns a [`BpmnkitStatus`]. On failure a message
//! is available from [`bpmnkit_last_error`] on the same thread. Strings handed
//! out by this library must be released with [`bpmnkit_string_free`], and
//! documents with [`bpmnkit_document_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bpmnkit::compliance::validate;
use bpmnkit::embeddings::{HashingEmbedder, DEFAULT_DIMENSION};
use bpmnkit::model::{build_graph, graph_stats};
use bpmnkit::similarity::{compare, CompareOptions};
use bpmnkit::xml::{self, BpmnDocument};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpmnkitStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    GraphError = 4,
    EmbeddingError = 5,
    IoError = 6,
    Panic = 7,
}

/// Parsed BPMN document. Opaque to C callers.
pub struct BpmnkitDocument {
    inner: BpmnDocument,
}

/// Size statistics of a model's graph view.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BpmnkitGraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub density: f64,
    pub average_degree: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> Result<(), (BpmnkitStatus, String)>) -> BpmnkitStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BpmnkitStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            BpmnkitStatus::Panic
        }
    }
}

fn null(what: &str) -> (BpmnkitStatus, String) {
    (
        BpmnkitStatus::NullArgument,
        format!("`{what}` must not be null"),
    )
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (BpmnkitStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| {
        (
            BpmnkitStatus::InvalidUtf8,
            format!("`{what}` is not UTF-8: {e}"),
        )
    })
}

unsafe fn doc_arg<'a>(
    p: *const BpmnkitDocument,
    what: &str,
) -> Result<&'a BpmnDocument, (BpmnkitStatus, String)> {
    p.as_ref().map(|d| &d.inner).ok_or_else(|| null(what))
}

fn into_c_string(text: String) -> *mut c_char {
    CString::new(text.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

fn parse_bytes(
    bytes: &[u8],
    out: *mut *mut BpmnkitDocument,
) -> Result<(), (BpmnkitStatus, String)> {
    let doc = xml::parse(bytes).map_err(|e| (BpmnkitStatus::ParseError, e.to_string()))?;
    unsafe { *out = Box::into_raw(Box::new(BpmnkitDocument { inner: doc })) };
    Ok(())
}

/// Message of the last failure on this thread, or null. Valid until the next
/// call into this library from the same thread; do not free it.
#[no_mangle]
pub extern "C" fn bpmnkit_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bpmnkit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn bpmnkit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `len` bytes of BPMN XML into a new document stored in `*out`.
///
/// # Safety
/// `data` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bpmnkit_document_parse(
    data: *const u8,
    len: usize,
    out: *mut *mut BpmnkitDocument,
) -> BpmnkitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if data.is_null() {
            return Err(null("data"));
        }
        parse_bytes(std::slice::from_raw_parts(data, len), out)
    })
}

/// Reads and parses the BPMN file at `path`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bpmnkit_document_load(
    path: *const c_char,
    out: *mut *mut BpmnkitDocument,
) -> BpmnkitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let path = str_arg(path, "path")?;
        let bytes =
            std::fs::read(path).map_err(|e| (BpmnkitStatus::IoError, format!("{path}: {e}")))?;
        parse_bytes(&bytes, out)
    })
}

/// Destroys a document. Null is ignored.
///
/// # Safety
/// `doc` must be null or a live handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn bpmnkit_document_free(doc: *mut BpmnkitDocument) {
    if !doc.is_null() {
        drop(Box::from_raw(doc));
    }
}

/// Serializes the document back to XML.
///
/// # Safety
/// `doc` must be a live handle and `out_xml` writable.
#[no_mangle]
pub unsafe extern "C" fn bpmnkit_document_serialize(
    doc: *const BpmnkitDocument,
    out_xml: *mut *mut c_char,
) -> BpmnkitStatus {
    guard(|| {
        if out_xml.is_null() {
            return Err(null("out_xml"));
        }
        *out_xml = ptr::null_mut();
        let doc = doc_arg(doc, "doc")?;
        *out_xml = into_c_string(String::from_utf8_lossy(&xml::serialize(doc)).into_owned());
        Ok(())
    })
}

/// Runs the compliance rules. Writes the report as JSON to `*out_json` and,
/// when `out_compliant` is not null, whether the model has no errors.
///
/// # Safety
/// `doc` must be a live handle, `out_json` writable, `out_compliant` null or writable.
#[no_mangle]
pub unsafe extern "C" fn bpmnkit_document_validate(
    doc: *const BpmnkitDocument,
    out_json: *mut *mut c_char,
    out_compliant: *mut bool,
) -> BpmnkitStatus {
    guard(|| {
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        *out_json = ptr::null_mut();
        let report = validate(doc_arg(doc, "doc")?);
        if !out_compliant.is_null() {
            *out_compliant = report.compliant;
        }
        *out_json = into_c_string(report.to_json());
        Ok(())
    })
}

/// Computes node and edge counts, density and mean degree.
///
/// # Safety
/// `doc` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bpmnkit_document_graph_stats(
    doc: *const BpmnkitDocument,
    out: *mut BpmnkitGraphStats,
) -> BpmnkitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let built = build_graph(doc_arg(doc, "doc")?)
            .map_err(|e| (BpmnkitStatus::GraphError, e.to_string()))?;
        let s = graph_stats(&built.graph);
        *out = BpmnkitGraphStats {
            node_count: s.node_count,
            edge_count: s.edge_count,
            density: s.density,
            average_degree: s.average_degree,
        };
        Ok(())
    })
}

/// Scores two documents with the offline hashing embedder and writes the
/// similarity breakdown as JSON. A `dimension` of 0 selects the default.
///
/// # Safety
/// `a` and `b` must be live handles and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn bpmnkit_compare(
    a: *const BpmnkitDocument,
    b: *const BpmnkitDocument,
    dimension: usize,
    include_context: bool,
    out_json: *mut *mut c_char,
) -> BpmnkitStatus {
    guard(|| {
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        *out_json = ptr::null_mut();
        let graph = |d: &BpmnDocument| {
            build_graph(d).map_err(|e| (BpmnkitStatus::GraphError, e.to_string()))
        };
        let ga = graph(doc_arg(a, "a")?)?;
        let gb = graph(doc_arg(b, "b")?)?;
        let dim = if dimension == 0 {
            DEFAULT_DIMENSION
        } else {
            dimension
        };
        let embed = HashingEmbedder::new(dim)
            .map_err(|e| (BpmnkitStatus::EmbeddingError, e.to_string()))?;
        let opts = CompareOptions {
            context: include_context,
            ..CompareOptions::default()
        };
        let breakdown = compare(&ga.graph, &gb.graph, &embed, &opts)
            .map_err(|e| (BpmnkitStatus::EmbeddingError, e.to_string()))?;
        *out_json = into_c_string(serde_json::to_string(&breakdown).expect("breakdown serializes"));
        Ok(())
    })
}
