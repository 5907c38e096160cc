//! C ABI over `chainrec`.
//!
//! Every function returns a [`ChainrecStatus`]; results come back through out
//! pointers. Objects are opaque handles released with their `_free`
//! function, and strings returned to the caller are released with
//! [`chainrec_string_free`]. After a non-`Ok` status,
//! [`chainrec_last_error_message`] describes the failure on the calling
//! thread. Panics never cross the boundary; they become `Panic`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chainrec::components::component_period;
use chainrec::limits_basins::{terminal_basin_partition, BasinAssignment, BasinReport};
use chainrec::report::{emit_dot, emit_json, parse_config, run_pipeline};
use chainrec::{
    build_chain_graph, parse_system, scc_decompose, subdivide, BoxId, ChainDecomposition,
    ChainGraphParams, ComponentId, Error, Grid, Point, SystemConfig, SystemDef,
};

/// Outcome of an API call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainrecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Bad input: config, parameters, points outside the domain.
    Validation = 3,
    /// The computation itself failed.
    Analysis = 4,
    /// A box or component index past the end.
    OutOfRange = 5,
    Panic = 6,
}

/// A dynamical system.
pub struct ChainrecSystem {
    sys: SystemDef,
}

/// Chain graph decomposition and basin partition at one resolution.
pub struct ChainrecAnalysis {
    grid: Grid,
    dec: ChainDecomposition,
    basins: BasinReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

struct Failure(ChainrecStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_validation() {
            ChainrecStatus::Validation
        } else {
            ChainrecStatus::Analysis
        };
        Failure(status, e.to_string())
    }
}

type FfiResult = std::result::Result<(), Failure>;

fn null(what: &str) -> Failure {
    Failure(ChainrecStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> FfiResult) -> ChainrecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ChainrecStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            ChainrecStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> std::result::Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(ChainrecStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> std::result::Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> std::result::Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("nul bytes removed")
        .into_raw()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn chainrec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn chainrec_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chainrec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a system from a TOML fragment such as
/// `type = "builtin"` / `name = "logistic"` / `params = { r = 3.2 }`.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainrec_system_from_toml(
    toml: *const c_char,
    out: *mut *mut ChainrecSystem,
) -> ChainrecStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let text = read_str(toml, "toml")?;
        let cfg: SystemConfig = toml::from_str(text)
            .map_err(|e| Failure(ChainrecStatus::Validation, format!("system config: {e}")))?;
        let sys = parse_system(&cfg)?;
        *out = Box::into_raw(Box::new(ChainrecSystem { sys }));
        Ok(())
    })
}

/// Releases a system. Null is ignored.
///
/// # Safety
/// `sys` must come from [`chainrec_system_from_toml`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chainrec_system_free(sys: *mut ChainrecSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Dimension of the phase space (1 or 2).
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainrec_system_dim(
    sys: *const ChainrecSystem,
    out: *mut usize,
) -> ChainrecStatus {
    guard(|| {
        let sys = handle(sys, "sys")?;
        *out_ref(out, "out")? = sys.sys.domain().dim();
        Ok(())
    })
}

/// Evaluates the map at `x[0..dim]` and writes the image to `out[0..dim]`.
///
/// # Safety
/// `x` and `out` must point to `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn chainrec_system_evaluate(
    sys: *const ChainrecSystem,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> ChainrecStatus {
    guard(|| {
        let sys = &handle(sys, "sys")?.sys;
        if x.is_null() {
            return Err(null("x"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let p = Point::from_slice(std::slice::from_raw_parts(x, dim))?;
        let y = sys.evaluate(&p)?;
        std::slice::from_raw_parts_mut(out, dim).copy_from_slice(y.coords());
        Ok(())
    })
}

/// Grid of `2^depth` boxes per axis, chain graph at tolerance `delta`
/// (a negative `delta` means one box width), decomposition and basins.
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainrec_analysis_new(
    sys: *const ChainrecSystem,
    depth: u32,
    delta: f64,
    out: *mut *mut ChainrecAnalysis,
) -> ChainrecStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let sys = &handle(sys, "sys")?.sys;
        let grid = subdivide(*sys.domain(), depth)?;
        let delta = if delta < 0.0 { grid.max_width() } else { delta };
        let g = build_chain_graph(sys, &grid, ChainGraphParams::new(delta, 0.0)?)?;
        let dec = scc_decompose(&g);
        let basins = terminal_basin_partition(&dec);
        *out = Box::into_raw(Box::new(ChainrecAnalysis { grid, dec, basins }));
        Ok(())
    })
}

/// Releases an analysis. Null is ignored.
///
/// # Safety
/// `a` must come from [`chainrec_analysis_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn chainrec_analysis_free(a: *mut ChainrecAnalysis) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainrec_analysis_box_count(
    a: *const ChainrecAnalysis,
    out: *mut usize,
) -> ChainrecStatus {
    guard(|| {
        *out_ref(out, "out")? = handle(a, "analysis")?.grid.box_count();
        Ok(())
    })
}

/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainrec_analysis_component_count(
    a: *const ChainrecAnalysis,
    out: *mut usize,
) -> ChainrecStatus {
    guard(|| {
        *out_ref(out, "out")? = handle(a, "analysis")?.dec.component_count();
        Ok(())
    })
}

/// Number of terminal components.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainrec_analysis_terminal_count(
    a: *const ChainrecAnalysis,
    out: *mut usize,
) -> ChainrecStatus {
    guard(|| {
        let dec = &handle(a, "analysis")?.dec;
        *out_ref(out, "out")? = dec.component_ids().filter(|&c| dec.is_terminal(c)).count();
        Ok(())
    })
}

fn box_id(a: &ChainrecAnalysis, b: u32) -> std::result::Result<BoxId, Failure> {
    if (b as usize) < a.grid.box_count() {
        Ok(BoxId(b))
    } else {
        Err(Failure(
            ChainrecStatus::OutOfRange,
            format!("box {b} out of range (grid has {})", a.grid.box_count()),
        ))
    }
}

fn component_id(a: &ChainrecAnalysis, c: u32) -> std::result::Result<ComponentId, Failure> {
    if (c as usize) < a.dec.component_count() {
        Ok(ComponentId(c))
    } else {
        Err(Failure(
            ChainrecStatus::OutOfRange,
            format!(
                "component {c} out of range ({} components)",
                a.dec.component_count()
            ),
        ))
    }
}

/// Component containing box `b`.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainrec_analysis_component_of(
    a: *const ChainrecAnalysis,
    b: u32,
    out: *mut u32,
) -> ChainrecStatus {
    guard(|| {
        let a = handle(a, "analysis")?;
        let b = box_id(a, b)?;
        *out_ref(out, "out")? = a.dec.component_of(b).0;
        Ok(())
    })
}

/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainrec_analysis_is_terminal(
    a: *const ChainrecAnalysis,
    c: u32,
    out: *mut bool,
) -> ChainrecStatus {
    guard(|| {
        let a = handle(a, "analysis")?;
        let c = component_id(a, c)?;
        *out_ref(out, "out")? = a.dec.is_terminal(c);
        Ok(())
    })
}

/// Period of a cyclic component; `Validation` for an acyclic one.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainrec_analysis_period(
    a: *const ChainrecAnalysis,
    c: u32,
    out: *mut u32,
) -> ChainrecStatus {
    guard(|| {
        let a = handle(a, "analysis")?;
        let c = component_id(a, c)?;
        let out = out_ref(out, "out")?;
        *out = component_period(&a.dec, c)
            .map_err(|e| Failure(ChainrecStatus::Validation, e.to_string()))?;
        Ok(())
    })
}

/// Terminal component whose basin holds box `b`, or -1 when ambiguous.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainrec_analysis_basin_of(
    a: *const ChainrecAnalysis,
    b: u32,
    out: *mut i64,
) -> ChainrecStatus {
    guard(|| {
        let a = handle(a, "analysis")?;
        let b = box_id(a, b)?;
        *out_ref(out, "out")? = match a.basins.of(b) {
            BasinAssignment::Terminal(c) => c.0 as i64,
            BasinAssignment::Ambiguous => -1,
        };
        Ok(())
    })
}

/// Fraction of boxes with a unique terminal basin.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainrec_analysis_v_fraction(
    a: *const ChainrecAnalysis,
    out: *mut f64,
) -> ChainrecStatus {
    guard(|| {
        *out_ref(out, "out")? = handle(a, "analysis")?.basins.v_fraction;
        Ok(())
    })
}

/// Condensation graph in DOT. Free the result with [`chainrec_string_free`].
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainrec_analysis_dot(
    a: *const ChainrecAnalysis,
    out: *mut *mut c_char,
) -> ChainrecStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        *out = to_c_string(emit_dot(&handle(a, "analysis")?.dec));
        Ok(())
    })
}

/// Runs a full analysis config and returns the JSON report. Analyses that
/// fail are listed in the report's `errors` and give `Analysis`; the report
/// is still returned. Free it with [`chainrec_string_free`].
///
/// # Safety
/// `config` must be a NUL-terminated string; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn chainrec_run_config(
    config: *const c_char,
    out_json: *mut *mut c_char,
) -> ChainrecStatus {
    guard(|| {
        let out = out_ref(out_json, "out_json")?;
        *out = ptr::null_mut();
        let cfg = parse_config(read_str(config, "config")?)?;
        let run = run_pipeline(&cfg)?;
        *out = to_c_string(emit_json(&run.report)?);
        match run.report.errors.first() {
            None => Ok(()),
            Some(f) => Err(Failure(
                ChainrecStatus::Analysis,
                format!("analysis {} failed: {}", f.analysis, f.message),
            )),
        }
    })
}
