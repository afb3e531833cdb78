#ifndef TWSIM_H
#define TWSIM_H

/* Generated by cbindgen from crates/ffi/src; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes.
 */
typedef enum TwsimStatus {
  TWSIM_STATUS_OK = 0,
  TWSIM_STATUS_NULL_POINTER = 1,
  TWSIM_STATUS_INVALID_ARGUMENT = 2,
  TWSIM_STATUS_NOT_FOUND = 3,
  TWSIM_STATUS_SOLVER = 4,
  TWSIM_STATUS_MOTION = 5,
  TWSIM_STATUS_RADAR = 6,
  TWSIM_STATUS_SPECTRAL = 7,
  TWSIM_STATUS_FORMAT = 8,
  TWSIM_STATUS_IO = 9,
  TWSIM_STATUS_BUFFER_TOO_SMALL = 10,
  TWSIM_STATUS_PANIC = 11,
} TwsimStatus;

typedef struct TwsimImage TwsimImage;

typedef struct TwsimMap TwsimMap;

typedef struct TwsimSeries TwsimSeries;

typedef struct TwsimTrack TwsimTrack;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or NULL. Valid until
 the next call into the library from the same thread.
 */
const char *twsim_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *twsim_version(void);

/*
 Number of cases in the wall catalog.
 */
size_t twsim_wall_count(void);

/*
 Copies the NUL-terminated id of catalog case `index` into `buf`.

 # Safety
 `buf` must be valid for `len` bytes.
 */
enum TwsimStatus twsim_wall_id(size_t index, char *buf, size_t len);

/*
 Solves the default scene with wall `wall_id` (NULL or "free" for free
 space) and returns its normalized transmission map.

 # Safety
 `wall_id` must be NULL or a NUL-terminated string; `out` must be writable.
 */
enum TwsimStatus twsim_map_compute(const char *wall_id, struct TwsimMap **out);

/*
 # Safety
 `path` and `wall_id` must be NUL-terminated strings; `out` must be writable.
 */
enum TwsimStatus twsim_map_load(const char *path, const char *wall_id, struct TwsimMap **out);

/*
 # Safety
 `map` must be a live handle and `path` a NUL-terminated string.
 */
enum TwsimStatus twsim_map_save(const struct TwsimMap *map, const char *path);

/*
 # Safety
 `map` must be a live handle; `nx` and `nz` must be writable.
 */
enum TwsimStatus twsim_map_dims(const struct TwsimMap *map, size_t *nx, size_t *nz);

/*
 Bilinear sample of the map at scene point `(x, z)`.

 # Safety
 `map` must be a live handle; `re` and `im` must be writable.
 */
enum TwsimStatus twsim_map_sample(const struct TwsimMap *map,
                                  double x,
                                  double z,
                                  double *re,
                                  double *im);

/*
 # Safety
 `map` must be NULL or a handle not yet freed.
 */
void twsim_map_free(struct TwsimMap *map);

/*
 Scatterer tracks of a generated motion (`0` walk, `1` walk-leap-walk)
 placed at the default start and turned by `yaw_deg`.

 # Safety
 `out` must be writable.
 */
enum TwsimStatus twsim_track_generate(uint8_t motion, double yaw_deg, struct TwsimTrack **out);

/*
 # Safety
 `track` must be a live handle; `parts` and `samples` must be writable.
 */
enum TwsimStatus twsim_track_dims(const struct TwsimTrack *track, size_t *parts, size_t *samples);

/*
 Copies the radar range of part `part` over all samples into `buf`.

 # Safety
 `track` must be a live handle and `buf` valid for `len` doubles.
 */
enum TwsimStatus twsim_track_range(const struct TwsimTrack *track,
                                   size_t part,
                                   double *buf,
                                   size_t len);

/*
 # Safety
 `track` must be NULL or a handle not yet freed.
 */
void twsim_track_free(struct TwsimTrack *track);

/*
 Free-space baseband return of a track with default radar parameters.

 # Safety
 `track` must be a live handle; `out` must be writable.
 */
enum TwsimStatus twsim_synth_freespace(const struct TwsimTrack *track, struct TwsimSeries **out);

/*
 Through-wall baseband return of a track using `map`.

 # Safety
 `track` and `map` must be live handles; `out` must be writable.
 */
enum TwsimStatus twsim_synth_throughwall(const struct TwsimTrack *track,
                                         const struct TwsimMap *map,
                                         struct TwsimSeries **out);

/*
 Copies interleaved `(re, im)` samples into `buf`, which must hold
 `2 * length` doubles; `needed` (optional) receives that count.

 # Safety
 `series` must be a live handle and `buf` valid for `len` doubles.
 */
enum TwsimStatus twsim_series_samples(const struct TwsimSeries *series,
                                      double *buf,
                                      size_t len,
                                      size_t *needed);

/*
 # Safety
 `series` must be a live handle and `path` a NUL-terminated string.
 */
enum TwsimStatus twsim_series_save(const struct TwsimSeries *series, const char *path);

/*
 # Safety
 `series` must be NULL or a handle not yet freed.
 */
void twsim_series_free(struct TwsimSeries *series);

/*
 Spectrogram image of a series, tagged with motion, yaw and the series'
 wall label.

 # Safety
 `series` must be a live handle; `out` must be writable.
 */
enum TwsimStatus twsim_image_from_series(const struct TwsimSeries *series,
                                         uint8_t motion,
                                         float yaw_deg,
                                         struct TwsimImage **out);

/*
 Whole chain for one sample with the default configuration.

 # Safety
 `wall_id` must be NULL or a NUL-terminated string; `out` must be writable.
 */
enum TwsimStatus twsim_run_case(const char *wall_id,
                                uint8_t motion,
                                double yaw_deg,
                                struct TwsimImage **out);

/*
 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum TwsimStatus twsim_image_load(const char *path, struct TwsimImage **out);

/*
 # Safety
 `image` must be a live handle and `path` a NUL-terminated string.
 */
enum TwsimStatus twsim_image_save(const struct TwsimImage *image, const char *path);

/*
 Copies the 64×64 row-major pixels (row = Doppler, column = time).

 # Safety
 `image` must be a live handle and `buf` valid for `len` floats.
 */
enum TwsimStatus twsim_image_pixels(const struct TwsimImage *image, float *buf, size_t len);

/*
 # Safety
 `image` must be NULL or a handle not yet freed.
 */
void twsim_image_free(struct TwsimImage *image);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TWSIM_H */
