/* C interface to the cgwalk instance-segmentation library.
 *
 * All functions returning cgw_status put a human-readable message for the
 * calling thread behind cgw_last_error() on failure. Objects are opaque;
 * every *_free accepts NULL. Strings returned through char** are owned by the
 * caller and released with cgw_string_free.
 */
#ifndef CGWALK_CGWALK_H
#define CGWALK_CGWALK_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cgw_status {
  CGW_OK = 0,
  CGW_BAD_ARGUMENT = 1,
  CGW_LENGTH_MISMATCH = 2,
  CGW_INDEX_OUT_OF_RANGE = 3,
  CGW_DUPLICATE_INSTANCE_ID = 4,
  CGW_NON_FINITE = 5,
  CGW_IO = 6,
  CGW_PARSE = 7,
  CGW_CONFIG = 8,
  CGW_INTERNAL = 9
} cgw_status;

typedef struct cgw_scene cgw_scene;
typedef struct cgw_labeling cgw_labeling;
typedef struct cgw_report cgw_report;

const char* cgw_version(void);

/* Message from the most recent failing call on this thread; empty string if
 * none. The pointer stays valid until the next failing call. */
const char* cgw_last_error(void);

/* Default run configuration as JSON text. */
char* cgw_default_config(void);
void cgw_string_free(char* text);

/* Validates config_json (NULL means defaults) and returns the normalized
 * effective configuration with every field spelled out. Unknown keys are an
 * error. */
cgw_status cgw_config_echo(const char* config_json, char** out);

/* Scene generation and bundle I/O. config_json may be NULL for defaults; the
 * seed argument overrides the configured one. */
cgw_status cgw_scene_generate(const char* config_json, uint64_t seed, const char* name,
                              cgw_scene** out);
cgw_status cgw_scene_load(const char* bundle_dir, cgw_scene** out);
cgw_status cgw_scene_save(const cgw_scene* scene, const char* bundle_dir);
cgw_status cgw_scene_point_count(const cgw_scene* scene, int64_t* out);
void cgw_scene_free(cgw_scene* scene);

/* Segmentation. algo is one of "cgcrw", "rw", "kmeans", "bfs"; config_json
 * may be NULL; threads <= 0 takes the configured thread count. */
cgw_status cgw_segment(const cgw_scene* scene, const char* algo, const char* config_json,
                       int threads, cgw_labeling** out);
cgw_status cgw_labeling_save(const cgw_labeling* labeling, const char* dir);
cgw_status cgw_labeling_load(const char* dir, const cgw_scene* scene, cgw_labeling** out);
cgw_status cgw_labeling_instance_id(const cgw_labeling* labeling, int64_t point, int* out);
double cgw_labeling_wall_seconds(const cgw_labeling* labeling);
int cgw_labeling_warning_count(const cgw_labeling* labeling);
const char* cgw_labeling_warning(const cgw_labeling* labeling, int index);
void cgw_labeling_free(cgw_labeling* labeling);

/* Evaluation against the scene's ground truth. */
cgw_status cgw_evaluate(const cgw_scene* scene, const cgw_labeling* labeling, cgw_report** out);
cgw_status cgw_report_json(const cgw_report* report, char** out);
/* name: miou, map, map50, map25, mpre50, mrec50 */
cgw_status cgw_report_metric(const cgw_report* report, const char* name, double* out);
cgw_status cgw_report_write(const cgw_report* report, const char* dir);
void cgw_report_free(cgw_report* report);

#ifdef __cplusplus
}
#endif

#endif /* CGWALK_CGWALK_H */
