#ifndef EPINOMICS_H
#define EPINOMICS_H

/* Generated by cbindgen from the epinomics-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum {
  EPINOMICS_STATUS_OK = 0,
  EPINOMICS_STATUS_NULL_ARGUMENT = 1,
  EPINOMICS_STATUS_INVALID_UTF8 = 2,
  EPINOMICS_STATUS_DATA_ERROR = 3,
  EPINOMICS_STATUS_SCENARIO_ERROR = 4,
  EPINOMICS_STATUS_SIMULATION_ERROR = 5,
  EPINOMICS_STATUS_NOT_FOUND = 6,
  EPINOMICS_STATUS_BUFFER_TOO_SMALL = 7,
  EPINOMICS_STATUS_IO_ERROR = 8,
} EpinomicsStatus;

/**
 * Opaque dataset handle.
 */
typedef struct EpinomicsDataset EpinomicsDataset;

/**
 * Opaque simulation record handle.
 */
typedef struct EpinomicsRecord EpinomicsRecord;

/**
 * Opaque scenario handle.
 */
typedef struct EpinomicsScenario EpinomicsScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buffer` (always
 * NUL-terminated when `length > 0`). Returns the byte length of the full
 * message, excluding the terminator.
 *
 * # Safety
 * `buffer` must point to at least `length` writable bytes, or be null
 * (only the required length is returned then).
 */
size_t epinomics_last_error(char *buffer, size_t length);

/**
 * Load and validate a country dataset directory.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid pointer.
 */
EpinomicsStatus epinomics_dataset_load(const char *path, EpinomicsDataset **out);

/**
 * # Safety
 * `dataset` must be a pointer returned by [`epinomics_dataset_load`] that
 * has not been freed, or null.
 */
void epinomics_dataset_free(EpinomicsDataset *dataset);

/**
 * Number of spatial patches in the dataset; 0 for null.
 *
 * # Safety
 * `dataset` must be a live dataset handle or null.
 */
size_t epinomics_dataset_patches(const EpinomicsDataset *dataset);

/**
 * Number of economic sectors in the dataset; 0 for null.
 *
 * # Safety
 * `dataset` must be a live dataset handle or null.
 */
size_t epinomics_dataset_sectors(const EpinomicsDataset *dataset);

/**
 * Parse a scenario from TOML text.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be a valid pointer.
 */
EpinomicsStatus epinomics_scenario_from_toml(const char *text, EpinomicsScenario **out);

/**
 * Build a library scenario (`scenario1` .. `scenario4`, `factual`) with its
 * default variant for a country code.
 *
 * # Safety
 * `name` and `country` must be NUL-terminated strings; `out` must be valid.
 */
EpinomicsStatus epinomics_scenario_from_library(const char *name,
                                                const char *country,
                                                EpinomicsScenario **out);

/**
 * Override one model parameter on a scenario (same names as the CLI
 * `--set`).
 *
 * # Safety
 * `scenario` must be a live scenario handle; `name` a NUL-terminated
 * string.
 */
EpinomicsStatus epinomics_scenario_set(EpinomicsScenario *scenario, const char *name, double value);

/**
 * # Safety
 * `scenario` must be a pointer returned by a scenario constructor that has
 * not been freed, or null.
 */
void epinomics_scenario_free(EpinomicsScenario *scenario);

/**
 * Run a scenario on a dataset, producing a simulation record.
 *
 * # Safety
 * `dataset` and `scenario` must be live handles; `out` must be valid.
 */
EpinomicsStatus epinomics_run(const EpinomicsDataset *dataset,
                              const EpinomicsScenario *scenario,
                              EpinomicsRecord **out);

/**
 * Number of recorded days; 0 for null.
 *
 * # Safety
 * `record` must be a live record handle or null.
 */
size_t epinomics_record_days(const EpinomicsRecord *record);

/**
 * Copy one daily series into `buffer`. `variable` is one of the tidy-CSV
 * variables (`q_hosp`, `hosp_incidence`, `ic_load`, `m_eff`, `m_leisure`,
 * `x`, `l`, `d`, `kappa_d`, `kappa_s`, `kappa_f`); `stratum` is a patch id,
 * a sector code, or `national` for aggregates. `length` must be at least
 * the number of recorded days.
 *
 * # Safety
 * `record` must be a live handle, the strings NUL-terminated, and `buffer`
 * must point to at least `length` writable doubles.
 */
EpinomicsStatus epinomics_record_series(const EpinomicsRecord *record,
                                        const char *variable,
                                        const char *stratum,
                                        double *buffer,
                                        size_t length);

/**
 * Write the record as tidy CSV (date, variable, stratum, value).
 *
 * # Safety
 * `record` must be a live handle and `path` a NUL-terminated string.
 */
EpinomicsStatus epinomics_record_write_csv(const EpinomicsRecord *record, const char *path);

/**
 * # Safety
 * `record` must be a pointer returned by [`epinomics_run`] that has not
 * been freed, or null.
 */
void epinomics_record_free(EpinomicsRecord *record);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPINOMICS_H */
