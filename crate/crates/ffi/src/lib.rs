//! C ABI for the co-simulation engine: opaque handles, integer status
//! codes, and a per-thread error message. The header is generated into
//! `include/epinomics.h` at build time.
//!
//! Ownership rules: every `*_load`/`*_from_*`/`*_run` that returns a handle
//! transfers ownership to the caller, who must release it with the matching
//! `*_free`. Handles are not thread-safe; use one per thread or guard them.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

use epinomics::coupler::scenarios::{scenario_library, ScenarioVariantArgs};
use epinomics::coupler::{run, ScenarioSpec, SimulationRecord};
use epinomics::datahub::{load_country_dataset, CountryDataset};
use epinomics::output::write_record_csv;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpinomicsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    DataError = 3,
    ScenarioError = 4,
    SimulationError = 5,
    NotFound = 6,
    BufferTooSmall = 7,
    IoError = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: impl Into<String>) {
    let message = message.into();
    let sanitized = CString::new(message.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = sanitized);
}

/// Opaque dataset handle.
pub struct EpinomicsDataset {
    inner: CountryDataset,
}

/// Opaque scenario handle.
pub struct EpinomicsScenario {
    inner: ScenarioSpec,
}

/// Opaque simulation record handle.
pub struct EpinomicsRecord {
    inner: SimulationRecord,
}

unsafe fn cstr<'a>(ptr: *const c_char) -> Result<&'a str, EpinomicsStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(EpinomicsStatus::NullArgument);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        EpinomicsStatus::InvalidUtf8
    })
}

/// Copy the last error message of this thread into `buffer` (always
/// NUL-terminated when `length > 0`). Returns the byte length of the full
/// message, excluding the terminator.
///
/// # Safety
/// `buffer` must point to at least `length` writable bytes, or be null
/// (only the required length is returned then).
#[no_mangle]
pub unsafe extern "C" fn epinomics_last_error(buffer: *mut c_char, length: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes_with_nul();
        if !buffer.is_null() && length > 0 {
            let n = bytes.len().min(length);
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buffer, n);
                // Guarantee termination even when truncating.
                *buffer.add(n - 1) = 0;
            }
        }
        bytes.len() - 1
    })
}

/// Load and validate a country dataset directory.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epinomics_dataset_load(
    path: *const c_char,
    out: *mut *mut EpinomicsDataset,
) -> EpinomicsStatus {
    if out.is_null() {
        set_error("null output pointer");
        return EpinomicsStatus::NullArgument;
    }
    let path = match unsafe { cstr(path) } {
        Ok(p) => PathBuf::from(p),
        Err(status) => return status,
    };
    match load_country_dataset(&path) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(EpinomicsDataset { inner })) };
            EpinomicsStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            unsafe { *out = ptr::null_mut() };
            EpinomicsStatus::DataError
        }
    }
}

/// # Safety
/// `dataset` must be a pointer returned by [`epinomics_dataset_load`] that
/// has not been freed, or null.
#[no_mangle]
pub unsafe extern "C" fn epinomics_dataset_free(dataset: *mut EpinomicsDataset) {
    if !dataset.is_null() {
        drop(unsafe { Box::from_raw(dataset) });
    }
}

/// Number of spatial patches in the dataset; 0 for null.
///
/// # Safety
/// `dataset` must be a live dataset handle or null.
#[no_mangle]
pub unsafe extern "C" fn epinomics_dataset_patches(dataset: *const EpinomicsDataset) -> usize {
    if dataset.is_null() {
        return 0;
    }
    unsafe { &*dataset }.inner.n_patches()
}

/// Number of economic sectors in the dataset; 0 for null.
///
/// # Safety
/// `dataset` must be a live dataset handle or null.
#[no_mangle]
pub unsafe extern "C" fn epinomics_dataset_sectors(dataset: *const EpinomicsDataset) -> usize {
    if dataset.is_null() {
        return 0;
    }
    unsafe { &*dataset }.inner.n_sectors()
}

/// Parse a scenario from TOML text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epinomics_scenario_from_toml(
    text: *const c_char,
    out: *mut *mut EpinomicsScenario,
) -> EpinomicsStatus {
    if out.is_null() {
        set_error("null output pointer");
        return EpinomicsStatus::NullArgument;
    }
    let text = match unsafe { cstr(text) } {
        Ok(t) => t,
        Err(status) => return status,
    };
    match ScenarioSpec::from_toml(text) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(EpinomicsScenario { inner })) };
            EpinomicsStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            unsafe { *out = ptr::null_mut() };
            EpinomicsStatus::ScenarioError
        }
    }
}

/// Build a library scenario (`scenario1` .. `scenario4`, `factual`) with its
/// default variant for a country code.
///
/// # Safety
/// `name` and `country` must be NUL-terminated strings; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn epinomics_scenario_from_library(
    name: *const c_char,
    country: *const c_char,
    out: *mut *mut EpinomicsScenario,
) -> EpinomicsStatus {
    if out.is_null() {
        set_error("null output pointer");
        return EpinomicsStatus::NullArgument;
    }
    let name = match unsafe { cstr(name) } {
        Ok(n) => n,
        Err(status) => return status,
    };
    let country = match unsafe { cstr(country) } {
        Ok(c) => c,
        Err(status) => return status,
    };
    match scenario_library(name, country, &ScenarioVariantArgs::default()) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(EpinomicsScenario { inner })) };
            EpinomicsStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            unsafe { *out = ptr::null_mut() };
            EpinomicsStatus::ScenarioError
        }
    }
}

/// Override one model parameter on a scenario (same names as the CLI
/// `--set`).
///
/// # Safety
/// `scenario` must be a live scenario handle; `name` a NUL-terminated
/// string.
#[no_mangle]
pub unsafe extern "C" fn epinomics_scenario_set(
    scenario: *mut EpinomicsScenario,
    name: *const c_char,
    value: f64,
) -> EpinomicsStatus {
    if scenario.is_null() {
        set_error("null scenario handle");
        return EpinomicsStatus::NullArgument;
    }
    let name = match unsafe { cstr(name) } {
        Ok(n) => n,
        Err(status) => return status,
    };
    match unsafe { &mut *scenario }.inner.params.set(name, value) {
        Ok(()) => EpinomicsStatus::Ok,
        Err(e) => {
            set_error(e.to_string());
            EpinomicsStatus::NotFound
        }
    }
}

/// # Safety
/// `scenario` must be a pointer returned by a scenario constructor that has
/// not been freed, or null.
#[no_mangle]
pub unsafe extern "C" fn epinomics_scenario_free(scenario: *mut EpinomicsScenario) {
    if !scenario.is_null() {
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// Run a scenario on a dataset, producing a simulation record.
///
/// # Safety
/// `dataset` and `scenario` must be live handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn epinomics_run(
    dataset: *const EpinomicsDataset,
    scenario: *const EpinomicsScenario,
    out: *mut *mut EpinomicsRecord,
) -> EpinomicsStatus {
    if dataset.is_null() || scenario.is_null() || out.is_null() {
        set_error("null argument");
        return EpinomicsStatus::NullArgument;
    }
    let ds = unsafe { &*dataset };
    let spec = unsafe { &*scenario };
    match run(&spec.inner, &ds.inner) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(EpinomicsRecord { inner })) };
            EpinomicsStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            unsafe { *out = ptr::null_mut() };
            EpinomicsStatus::SimulationError
        }
    }
}

/// Number of recorded days; 0 for null.
///
/// # Safety
/// `record` must be a live record handle or null.
#[no_mangle]
pub unsafe extern "C" fn epinomics_record_days(record: *const EpinomicsRecord) -> usize {
    if record.is_null() {
        return 0;
    }
    unsafe { &*record }.inner.n_days()
}

fn lookup_series(record: &SimulationRecord, variable: &str, stratum: &str) -> Option<Vec<f64>> {
    let patch = record.patch_ids.iter().position(|p| p == stratum);
    let sector = record.sector_codes.iter().position(|c| c == stratum);
    let per_patch = |field: &Vec<Vec<f64>>| -> Option<Vec<f64>> {
        match (stratum, patch) {
            ("national", _) => Some(field.iter().map(|row| row.iter().sum()).collect()),
            (_, Some(g)) => Some(field.iter().map(|row| row[g]).collect()),
            _ => None,
        }
    };
    let per_sector = |field: &Vec<Vec<f64>>| -> Option<Vec<f64>> {
        match (stratum, sector) {
            ("national", _) => Some(field.iter().map(|row| row.iter().sum()).collect()),
            (_, Some(k)) => Some(field.iter().map(|row| row[k]).collect()),
            _ => None,
        }
    };
    match variable {
        "q_hosp" => per_patch(&record.q_hosp),
        "hosp_incidence" => per_patch(&record.hosp_incidence),
        "ic_load" => per_patch(&record.ic_load),
        "m_eff" => patch.map(|g| record.m_eff.iter().map(|row| row[g]).collect()),
        "m_leisure" => patch.map(|g| record.m_leisure.iter().map(|row| row[g]).collect()),
        "x" => per_sector(&record.x),
        "l" => per_sector(&record.l),
        "d" => per_sector(&record.d),
        "kappa_d" => sector.map(|k| record.kappa_d.iter().map(|row| row[k]).collect()),
        "kappa_s" => sector.map(|k| record.kappa_s.iter().map(|row| row[k]).collect()),
        "kappa_f" => sector.map(|k| record.kappa_f.iter().map(|row| row[k]).collect()),
        _ => None,
    }
}

/// Copy one daily series into `buffer`. `variable` is one of the tidy-CSV
/// variables (`q_hosp`, `hosp_incidence`, `ic_load`, `m_eff`, `m_leisure`,
/// `x`, `l`, `d`, `kappa_d`, `kappa_s`, `kappa_f`); `stratum` is a patch id,
/// a sector code, or `national` for aggregates. `length` must be at least
/// the number of recorded days.
///
/// # Safety
/// `record` must be a live handle, the strings NUL-terminated, and `buffer`
/// must point to at least `length` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn epinomics_record_series(
    record: *const EpinomicsRecord,
    variable: *const c_char,
    stratum: *const c_char,
    buffer: *mut f64,
    length: usize,
) -> EpinomicsStatus {
    if record.is_null() || buffer.is_null() {
        set_error("null argument");
        return EpinomicsStatus::NullArgument;
    }
    let variable = match unsafe { cstr(variable) } {
        Ok(v) => v,
        Err(status) => return status,
    };
    let stratum = match unsafe { cstr(stratum) } {
        Ok(s) => s,
        Err(status) => return status,
    };
    let record = unsafe { &*record };
    let Some(series) = lookup_series(&record.inner, variable, stratum) else {
        set_error(format!(
            "no series for variable '{variable}', stratum '{stratum}'"
        ));
        return EpinomicsStatus::NotFound;
    };
    if length < series.len() {
        set_error(format!(
            "buffer holds {length} values, series has {}",
            series.len()
        ));
        return EpinomicsStatus::BufferTooSmall;
    }
    unsafe { ptr::copy_nonoverlapping(series.as_ptr(), buffer, series.len()) };
    EpinomicsStatus::Ok
}

/// Write the record as tidy CSV (date, variable, stratum, value).
///
/// # Safety
/// `record` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn epinomics_record_write_csv(
    record: *const EpinomicsRecord,
    path: *const c_char,
) -> EpinomicsStatus {
    if record.is_null() {
        set_error("null record handle");
        return EpinomicsStatus::NullArgument;
    }
    let path = match unsafe { cstr(path) } {
        Ok(p) => PathBuf::from(p),
        Err(status) => return status,
    };
    match write_record_csv(&unsafe { &*record }.inner, &path) {
        Ok(()) => EpinomicsStatus::Ok,
        Err(e) => {
            set_error(e.to_string());
            EpinomicsStatus::IoError
        }
    }
}

/// # Safety
/// `record` must be a pointer returned by [`epinomics_run`] that has not
/// been freed, or null.
#[no_mangle]
pub unsafe extern "C" fn epinomics_record_free(record: *mut EpinomicsRecord) {
    if !record.is_null() {
        drop(unsafe { Box::from_raw(record) });
    }
}
