#ifndef CODEMIX_SARCASM_H
#define CODEMIX_SARCASM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CmsAverage {
  CMS_AVERAGE_MICRO = 0,
  CMS_AVERAGE_MACRO = 1,
  CMS_AVERAGE_WEIGHTED = 2,
} CmsAverage;

typedef enum CmsLabel {
  CMS_LABEL_NON_SARCASTIC = 0,
  CMS_LABEL_SARCASTIC = 1,
  /*
   Returned by [`cms_parse_label`] when neither label is recognized.
   */
  CMS_LABEL_UNPARSEABLE = 2,
} CmsLabel;

typedef enum CmsLanguage {
  CMS_LANGUAGE_TAMIL_ENGLISH = 0,
  CMS_LANGUAGE_MALAYALAM_ENGLISH = 1,
} CmsLanguage;

typedef enum CmsStatus {
  CMS_STATUS_OK = 0,
  CMS_STATUS_NULL_POINTER = 1,
  CMS_STATUS_INVALID_UTF8 = 2,
  CMS_STATUS_INVALID_ARGUMENT = 3,
  CMS_STATUS_IO = 4,
  CMS_STATUS_INVALID_DATA = 5,
  CMS_STATUS_INCONSISTENT = 6,
  CMS_STATUS_PANIC = 7,
} CmsStatus;

/*
 Opaque list of reconstruction candidates, best first.
 */
typedef struct CmsCandidates CmsCandidates;

/*
 Opaque loaded dataset.
 */
typedef struct CmsDataset CmsDataset;

/*
 Opaque classification report.
 */
typedef struct CmsReport CmsReport;

typedef struct CmsScores {
  double precision;
  double recall;
  double f1;
  uint64_t support;
} CmsScores;

/*
 Printed report to reconstruct from. Rows are Non-sarcastic, Sarcastic,
 micro, macro, weighted; columns precision, recall, F1. A NaN cell is
 unconstrained.
 */
typedef struct CmsPublishedReport {
  uint64_t supports[2];
  double cells[5][3];
} CmsPublishedReport;

typedef struct CmsCandidate {
  uint64_t nn;
  uint64_t ns;
  uint64_t sn;
  uint64_t ss;
  double residual;
} CmsCandidate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the most recent failure on this thread, or null. The pointer
 stays valid until the next failing call on this thread.
 */
const char *cms_last_error(void);

/*
 Library version as a static nul-terminated string.
 */
const char *cms_version(void);

/*
 # Safety
 `s` must be null or a string returned by this library, not yet freed.
 */
void cms_string_free(char *s);

/*
 Half-up rounding on the shortest decimal representation of `x`.
 */
double cms_round_half_up(double x, uint32_t places);

/*
 # Safety
 `raw` must be a nul-terminated string; `out` must be writable.
 */
enum CmsStatus cms_parse_label(const char *raw, enum CmsLabel *out);

/*
 Renders the default zero-shot prompt for `text`.

 # Safety
 `text` must be a nul-terminated string; `out` must be writable.
 */
enum CmsStatus cms_render_default_prompt(enum CmsLanguage lang, const char *text, char **out);

/*
 Builds a report from confusion counts (gold-major).

 # Safety
 `out` must be writable.
 */
enum CmsStatus cms_report_from_counts(uint64_t nn,
                                      uint64_t ns,
                                      uint64_t sn,
                                      uint64_t ss,
                                      struct CmsReport **out);

/*
 # Safety
 `report` must be a live handle; `out` must be writable.
 */
enum CmsStatus cms_report_class(const struct CmsReport *report,
                                enum CmsLabel label,
                                struct CmsScores *out);

/*
 # Safety
 `report` must be a live handle; `out` must be writable.
 */
enum CmsStatus cms_report_average(const struct CmsReport *report,
                                  enum CmsAverage kind,
                                  struct CmsScores *out);

/*
 Pretty JSON for the report.

 # Safety
 `report` must be a live handle; `out` must be writable.
 */
enum CmsStatus cms_report_to_json(const struct CmsReport *report, char **out);

/*
 The fixed-width text table.

 # Safety
 `report` must be a live handle; `out` must be writable.
 */
enum CmsStatus cms_report_to_text(const struct CmsReport *report, char **out);

/*
 # Safety
 `report` must be null or a handle from [`cms_report_from_counts`], not yet freed.
 */
void cms_report_free(struct CmsReport *report);

/*
 Every integer matrix consistent with `target` within `tolerance`.
 Returns `Inconsistent` when none exists.

 # Safety
 `target` must point to a valid struct; `out` must be writable.
 */
enum CmsStatus cms_reconstruct(const struct CmsPublishedReport *target,
                               double tolerance,
                               struct CmsCandidates **out);

/*
 Number of candidates; 0 for a null handle.

 # Safety
 `c` must be null or a live handle.
 */
size_t cms_candidates_len(const struct CmsCandidates *c);

/*
 # Safety
 `c` must be a live handle; `out` must be writable.
 */
enum CmsStatus cms_candidates_get(const struct CmsCandidates *c,
                                  size_t index,
                                  struct CmsCandidate *out);

/*
 # Safety
 `c` must be null or a handle from [`cms_reconstruct`], not yet freed.
 */
void cms_candidates_free(struct CmsCandidates *c);

/*
 Loads a TSV dataset.

 # Safety
 `path` must be a nul-terminated string; `out` must be writable.
 */
enum CmsStatus cms_dataset_load(const char *path, enum CmsLanguage lang, struct CmsDataset **out);

/*
 Number of comments; 0 for a null handle.

 # Safety
 `d` must be null or a live handle.
 */
size_t cms_dataset_len(const struct CmsDataset *d);

/*
 Validation summary as JSON. A negative `expected_count` skips the count
 check.

 # Safety
 `d` must be a live handle; `out` must be writable.
 */
enum CmsStatus cms_dataset_validate_json(const struct CmsDataset *d,
                                         int64_t expected_count,
                                         char **out);

/*
 # Safety
 `d` must be null or a handle from [`cms_dataset_load`], not yet freed.
 */
void cms_dataset_free(struct CmsDataset *d);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CODEMIX_SARCASM_H */
