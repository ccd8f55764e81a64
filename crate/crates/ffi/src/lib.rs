//! C ABI over the core toolkit: models, environment fields, and clusters
//! as opaque handles with status-code error reporting.
//!
//! Conventions:
//! - Every constructor writes its result through an out-pointer and
//!   returns a status; on failure the out-pointer is left untouched.
//! - A failing call stores a message retrievable with `dre_last_error`
//!   until the next failing call on the same thread.
//! - Handles are freed exactly once with their matching `_free`; passing
//!   null to `_free` is a no-op.
//! - Arrow sets cross the boundary as bitmasks: bit 2*(axis-1) is the
//!   positive direction on that axis, bit 2*(axis-1)+1 the negative one.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dre::cluster::{backward_cluster, forward_cluster, Cluster};
use dre::config::ModelConfig;
use dre::env::EnvironmentField;
use dre::error::DreError;
use dre::fixed::Prob;
use dre::grid::GridFile;
use dre::lattice::LatticeBox;
use dre::model::ModelSpec;

/// Result of every fallible call.
#[repr(C)]
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum DreStatus {
    Ok = 0,
    InvalidModel = 1,
    ConditionFailed = 2,
    InvalidInput = 3,
    ParseError = 4,
    IoError = 5,
    ResourceLimit = 6,
    NullPointer = 7,
    Panic = 8,
}

pub struct DreModel(ModelSpec);
pub struct DreField(EnvironmentField);
pub struct DreCluster(Cluster);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean: String = msg.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn fail(status: DreStatus, msg: &str) -> DreStatus {
    set_error(msg);
    status
}

fn status_of(e: &DreError) -> DreStatus {
    match e {
        DreError::InvalidModel(_) => DreStatus::InvalidModel,
        DreError::ConditionFailed(_) => DreStatus::ConditionFailed,
        DreError::InvalidInput(_) => DreStatus::InvalidInput,
        DreError::Parse(_) => DreStatus::ParseError,
        DreError::Io(_) => DreStatus::IoError,
        DreError::Resource(_) => DreStatus::ResourceLimit,
    }
}

fn fail_err(e: &DreError) -> DreStatus {
    set_error(&e.to_string());
    status_of(e)
}

fn guarded(f: impl FnOnce() -> DreStatus) -> DreStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(DreStatus::Panic, "internal panic"),
    }
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, DreStatus> {
    if ptr.is_null() {
        return Err(fail(DreStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(DreStatus::ParseError, "string argument is not UTF-8"))
}

/// # Safety
/// `ptr` must be null or point to `len` readable elements.
unsafe fn read_site<'a>(ptr: *const i64, len: usize) -> Result<&'a [i64], DreStatus> {
    if ptr.is_null() {
        return Err(fail(DreStatus::NullPointer, "null site argument"));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn check_site_len(model: &ModelSpec, len: usize) -> Result<(), DreStatus> {
    if len != model.dim() {
        return Err(fail(
            DreStatus::InvalidInput,
            &format!("site has {len} coordinates, model is {}-dimensional", model.dim()),
        ));
    }
    Ok(())
}

/// Message from the most recent failing call on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dre_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static toolkit version string.
#[no_mangle]
pub extern "C" fn dre_version() -> *const c_char {
    static VERSION: &str = concat!("0.1.0", "\0");
    VERSION.as_ptr() as *const c_char
}

// ---------------------------------------------------------------------
// models

unsafe fn write_model(out: *mut *mut DreModel, spec: ModelSpec) -> DreStatus {
    if out.is_null() {
        return fail(DreStatus::NullPointer, "null out-pointer");
    }
    *out = Box::into_raw(Box::new(DreModel(spec)));
    DreStatus::Ok
}

/// Two-valued model: all positive arrows with probability p, all negative
/// arrows otherwise.
///
/// # Safety
/// `p` must be a NUL-terminated decimal string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dre_model_orthant(
    dim: u32,
    p: *const c_char,
    out: *mut *mut DreModel,
) -> DreStatus {
    guarded(|| {
        let p = match read_str(p) {
            Ok(s) => s,
            Err(e) => return e,
        };
        let p = match Prob::from_decimal_str(p) {
            Ok(p) => p,
            Err(e) => return fail_err(&e),
        };
        write_model(out, ModelSpec::orthant(dim as usize, p))
    })
}

/// Two-valued model: all positive arrows with probability p, every arrow
/// otherwise.
///
/// # Safety
/// `p` must be a NUL-terminated decimal string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dre_model_half_orthant(
    dim: u32,
    p: *const c_char,
    out: *mut *mut DreModel,
) -> DreStatus {
    guarded(|| {
        let p = match read_str(p) {
            Ok(s) => s,
            Err(e) => return e,
        };
        let p = match Prob::from_decimal_str(p) {
            Ok(p) => p,
            Err(e) => return fail_err(&e),
        };
        write_model(out, ModelSpec::half_orthant(dim as usize, p))
    })
}

/// Build a model from TOML text (same schema as the model files).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dre_model_from_toml(
    text: *const c_char,
    out: *mut *mut DreModel,
) -> DreStatus {
    guarded(|| {
        let text = match read_str(text) {
            Ok(s) => s,
            Err(e) => return e,
        };
        let spec = match ModelConfig::parse(text).and_then(|c| c.build()) {
            Ok(s) => s,
            Err(e) => return fail_err(&e),
        };
        write_model(out, spec)
    })
}

/// The model with every backward arrow set replaced by the full set.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dre_model_starred(
    model: *const DreModel,
    out: *mut *mut DreModel,
) -> DreStatus {
    guarded(|| {
        if model.is_null() {
            return fail(DreStatus::NullPointer, "null model");
        }
        write_model(out, (*model).0.starred())
    })
}

/// Ok when the forward-drift condition holds; ConditionFailed with a
/// clause report otherwise.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dre_model_check_condition1(model: *const DreModel) -> DreStatus {
    guarded(|| {
        if model.is_null() {
            return fail(DreStatus::NullPointer, "null model");
        }
        let report = (*model).0.check_condition1();
        if report.pass() {
            DreStatus::Ok
        } else {
            fail(DreStatus::ConditionFailed, &report.failure_summary())
        }
    })
}

/// Ok when the dense-labels condition holds.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dre_model_check_condition2(model: *const DreModel) -> DreStatus {
    guarded(|| {
        if model.is_null() {
            return fail(DreStatus::NullPointer, "null model");
        }
        let report = (*model).0.check_condition2();
        if report.pass() {
            DreStatus::Ok
        } else {
            fail(DreStatus::ConditionFailed, &report.failure_summary())
        }
    })
}

/// Lattice dimension, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dre_model_dim(model: *const DreModel) -> u32 {
    if model.is_null() {
        return 0;
    }
    (*model).0.dim() as u32
}

/// # Safety
/// `model` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn dre_model_free(model: *mut DreModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

// ---------------------------------------------------------------------
// environment fields

/// Seeded environment over the whole lattice.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dre_field_new(
    model: *const DreModel,
    seed: u64,
    out: *mut *mut DreField,
) -> DreStatus {
    guarded(|| {
        if model.is_null() {
            return fail(DreStatus::NullPointer, "null model");
        }
        if out.is_null() {
            return fail(DreStatus::NullPointer, "null out-pointer");
        }
        *out = Box::into_raw(Box::new(DreField(EnvironmentField::new(
            (*model).0.clone(),
            seed,
        ))));
        DreStatus::Ok
    })
}

/// Whether the site draws from the E side.
///
/// # Safety
/// `field` must be live; `site` must hold `site_len` readable values;
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dre_field_is_omega_plus(
    field: *const DreField,
    site: *const i64,
    site_len: usize,
    out: *mut bool,
) -> DreStatus {
    guarded(|| {
        if field.is_null() || out.is_null() {
            return fail(DreStatus::NullPointer, "null argument");
        }
        let site = match read_site(site, site_len) {
            Ok(s) => s,
            Err(e) => return e,
        };
        if let Err(e) = check_site_len((*field).0.spec(), site_len) {
            return e;
        }
        *out = (*field).0.is_omega_plus(site);
        DreStatus::Ok
    })
}

/// Arrow set at the site as a direction bitmask.
///
/// # Safety
/// `field` must be live; `site` must hold `site_len` readable values;
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dre_field_env_at(
    field: *const DreField,
    site: *const i64,
    site_len: usize,
    out: *mut u32,
) -> DreStatus {
    guarded(|| {
        if field.is_null() || out.is_null() {
            return fail(DreStatus::NullPointer, "null argument");
        }
        let site = match read_site(site, site_len) {
            Ok(s) => s,
            Err(e) => return e,
        };
        if let Err(e) = check_site_len((*field).0.spec(), site_len) {
            return e;
        }
        let set = (*field).0.env_at(site);
        let mut mask = 0u32;
        for d in set.iter() {
            let bit = 2 * (d.axis() - 1) + usize::from(d.is_negative());
            mask |= 1 << bit;
        }
        *out = mask;
        DreStatus::Ok
    })
}

/// # Safety
/// `field` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn dre_field_free(field: *mut DreField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

// ---------------------------------------------------------------------
// clusters

unsafe fn cluster_common(
    field: *const DreField,
    origin: *const i64,
    lo: *const i64,
    hi: *const i64,
    len: usize,
    out: *mut *mut DreCluster,
    backward: bool,
) -> DreStatus {
    if field.is_null() || out.is_null() {
        return fail(DreStatus::NullPointer, "null argument");
    }
    let origin = match read_site(origin, len) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let lo = match read_site(lo, len) {
        Ok(s) => s,
        Err(e) => return e,
    };
    let hi = match read_site(hi, len) {
        Ok(s) => s,
        Err(e) => return e,
    };
    if let Err(e) = check_site_len((*field).0.spec(), len) {
        return e;
    }
    let bbox = match LatticeBox::new(lo.to_vec(), hi.to_vec()) {
        Ok(b) => b,
        Err(e) => return fail_err(&e),
    };
    let result = if backward {
        backward_cluster(&(*field).0, origin, &bbox)
    } else {
        forward_cluster(&(*field).0, origin, &bbox)
    };
    match result {
        Ok(c) => {
            *out = Box::into_raw(Box::new(DreCluster(c)));
            DreStatus::Ok
        }
        Err(e) => fail_err(&e),
    }
}

/// Sites reachable from the origin inside the box [lo, hi].
///
/// # Safety
/// `field` must be live; `origin`, `lo`, `hi` must each hold `len`
/// readable values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dre_forward_cluster(
    field: *const DreField,
    origin: *const i64,
    lo: *const i64,
    hi: *const i64,
    len: usize,
    out: *mut *mut DreCluster,
) -> DreStatus {
    guarded(|| cluster_common(field, origin, lo, hi, len, out, false))
}

/// Sites that reach the origin inside the box [lo, hi].
///
/// # Safety
/// `field` must be live; `origin`, `lo`, `hi` must each hold `len`
/// readable values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dre_backward_cluster(
    field: *const DreField,
    origin: *const i64,
    lo: *const i64,
    hi: *const i64,
    len: usize,
    out: *mut *mut DreCluster,
) -> DreStatus {
    guarded(|| cluster_common(field, origin, lo, hi, len, out, true))
}

/// Number of member sites, or 0 for a null handle.
///
/// # Safety
/// `cluster` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dre_cluster_member_count(cluster: *const DreCluster) -> u64 {
    if cluster.is_null() {
        return 0;
    }
    (*cluster).0.member_count() as u64
}

/// Whether the site belongs to the cluster (false outside the box).
///
/// # Safety
/// `cluster` must be live; `site` must hold `site_len` readable values;
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dre_cluster_contains(
    cluster: *const DreCluster,
    site: *const i64,
    site_len: usize,
    out: *mut bool,
) -> DreStatus {
    guarded(|| {
        if cluster.is_null() || out.is_null() {
            return fail(DreStatus::NullPointer, "null argument");
        }
        let site = match read_site(site, site_len) {
            Ok(s) => s,
            Err(e) => return e,
        };
        if site_len != (*cluster).0.search_box().dim() {
            return fail(DreStatus::InvalidInput, "site dimension mismatch");
        }
        *out = (*cluster).0.contains(site);
        DreStatus::Ok
    })
}

/// Whether the search stopped at the box wall anywhere.
///
/// # Safety
/// `cluster` must be live; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dre_cluster_touched_boundary(
    cluster: *const DreCluster,
    out: *mut bool,
) -> DreStatus {
    guarded(|| {
        if cluster.is_null() || out.is_null() {
            return fail(DreStatus::NullPointer, "null argument");
        }
        *out = (*cluster).0.touched_boundary();
        DreStatus::Ok
    })
}

/// Write the membership grid to a file in the toolkit's binary format.
///
/// # Safety
/// `cluster` must be live; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dre_cluster_write_grid(
    cluster: *const DreCluster,
    path: *const c_char,
) -> DreStatus {
    guarded(|| {
        if cluster.is_null() {
            return fail(DreStatus::NullPointer, "null cluster");
        }
        let path = match read_str(path) {
            Ok(s) => s,
            Err(e) => return e,
        };
        let grid = GridFile::from_cluster(&(*cluster).0);
        match grid.write_to(std::path::Path::new(path)) {
            Ok(()) => DreStatus::Ok,
            Err(e) => fail_err(&e),
        }
    })
}

/// # Safety
/// `cluster` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn dre_cluster_free(cluster: *mut DreCluster) {
    if !cluster.is_null() {
        drop(Box::from_raw(cluster));
    }
}
