/* C interface to the distributed OMP library. */
#ifndef DOMP_DOMP_H
#define DOMP_DOMP_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define DOMP_API __attribute__((visibility("default")))
#else
#define DOMP_API
#endif

typedef struct domp_config domp_config;

typedef enum {
  DOMP_OK = 0,
  DOMP_ERR_CONFIG = 1,
  DOMP_ERR_RUNTIME = 2,
  DOMP_ERR_INVALID_ARGUMENT = 3,
  DOMP_ERR_IO = 4
} domp_status;

DOMP_API const char* domp_version(void);

/* Message of the last failed call on this thread; "" if none. */
DOMP_API const char* domp_last_error(void);

DOMP_API domp_status domp_config_from_json(const char* json_text, domp_config** out);
/* Unreadable files are reported as DOMP_ERR_CONFIG. */
DOMP_API domp_status domp_config_load(const char* path, domp_config** out);
DOMP_API void domp_config_free(domp_config* cfg);
DOMP_API domp_status domp_config_set_seed(domp_config* cfg, uint64_t master_seed);
DOMP_API domp_status domp_config_set_verbose(domp_config* cfg, int verbose);
/* Canonical JSON of the config. Free with domp_string_free. */
DOMP_API domp_status domp_config_to_json(const domp_config* cfg, char** out);

/* One protocol run on trial 0 at gen.theta_min. `algo` uses the config
   algorithm syntax ("dj", "ds:6", ...). Writes a text report to *out. */
DOMP_API domp_status domp_simulate(const domp_config* cfg, const char* algo, char** out);

/* Full sweep. Writes the CSV and <csv>.manifest.json; *out receives a short
   summary (may be NULL). */
DOMP_API domp_status domp_sweep(const domp_config* cfg, const char* csv_path, char** out);

/* Aligned text report followed by a one-line JSON record. */
DOMP_API domp_status domp_theory(const domp_config* cfg, char** out);

/* Dumps shard `machine` of trial 0 at gen.theta_min as a binary file. */
DOMP_API domp_status domp_datagen(const domp_config* cfg, const char* path, uint32_t machine);

DOMP_API void domp_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
