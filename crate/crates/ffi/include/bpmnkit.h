#ifndef BPMNKIT_H
#define BPMNKIT_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum BpmnkitStatus {
  BPMNKIT_STATUS_OK = 0,
  BPMNKIT_STATUS_NULL_ARGUMENT = 1,
  BPMNKIT_STATUS_INVALID_UTF8 = 2,
  BPMNKIT_STATUS_PARSE_ERROR = 3,
  BPMNKIT_STATUS_GRAPH_ERROR = 4,
  BPMNKIT_STATUS_EMBEDDING_ERROR = 5,
  BPMNKIT_STATUS_IO_ERROR = 6,
  BPMNKIT_STATUS_PANIC = 7,
} BpmnkitStatus;

/**
 * Parsed BPMN document. Opaque to C callers.
 */
typedef struct BpmnkitDocument BpmnkitDocument;

/**
 * Size statistics of a model's graph view.
 */
typedef struct BpmnkitGraphStats {
  size_t node_count;
  size_t edge_count;
  double density;
  double average_degree;
} BpmnkitGraphStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * call into this library from the same thread; do not free it.
 */
const char *bpmnkit_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *bpmnkit_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a pointer obtained from this library, freed at most once.
 */
void bpmnkit_string_free(char *s);

/**
 * Parses `len` bytes of BPMN XML into a new document stored in `*out`.
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` must be writable.
 */
enum BpmnkitStatus bpmnkit_document_parse(const uint8_t *data,
                                          size_t len,
                                          struct BpmnkitDocument **out);

/**
 * Reads and parses the BPMN file at `path`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` must be writable.
 */
enum BpmnkitStatus bpmnkit_document_load(const char *path, struct BpmnkitDocument **out);

/**
 * Destroys a document. Null is ignored.
 *
 * # Safety
 * `doc` must be null or a live handle from this library, freed at most once.
 */
void bpmnkit_document_free(struct BpmnkitDocument *doc);

/**
 * Serializes the document back to XML.
 *
 * # Safety
 * `doc` must be a live handle and `out_xml` writable.
 */
enum BpmnkitStatus bpmnkit_document_serialize(const struct BpmnkitDocument *doc, char **out_xml);

/**
 * Runs the compliance rules. Writes the report as JSON to `*out_json` and,
 * when `out_compliant` is not null, whether the model has no errors.
 *
 * # Safety
 * `doc` must be a live handle, `out_json` writable, `out_compliant` null or writable.
 */
enum BpmnkitStatus bpmnkit_document_validate(const struct BpmnkitDocument *doc,
                                             char **out_json,
                                             bool *out_compliant);

/**
 * Computes node and edge counts, density and mean degree.
 *
 * # Safety
 * `doc` must be a live handle and `out` writable.
 */
enum BpmnkitStatus bpmnkit_document_graph_stats(const struct BpmnkitDocument *doc,
                                                struct BpmnkitGraphStats *out);

/**
 * Scores two documents with the offline hashing embedder and writes the
 * similarity breakdown as JSON. A `dimension` of 0 selects the default.
 *
 * # Safety
 * `a` and `b` must be live handles and `out_json` writable.
 */
enum BpmnkitStatus bpmnkit_compare(const struct BpmnkitDocument *a,
                                   const struct BpmnkitDocument *b,
                                   size_t dimension,
                                   bool include_context,
                                   char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BPMNKIT_H */
