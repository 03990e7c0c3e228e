#ifndef CHIRALCMT_H
#define CHIRALCMT_H

/*
 * chiralcmt C API.
 *
 * Coupled-mode model of an LC / chiral edge-magnetoplasmon circulator, with
 * spectrum analysis, model fitting, baseband pulse propagation and lumped
 * circuit helpers.
 *
 * Conventions:
 *   - every frequency and rate crossing this boundary is ordinary frequency
 *     in Hz (angular value / 2 pi);
 *   - functions return cmt_status; on failure cmt_last_error() describes the
 *     problem for the calling thread until its next API call;
 *   - opaque handles are owned by the caller and released with the matching
 *     *_destroy function (NULL is accepted and ignored);
 *   - array outputs take a capacity; CMT_ERR_INVALID_ARGUMENT is returned when
 *     it is too small. Query sizes first with the *_size functions.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CHIRALCMT_BUILDING)
#    define CMT_API __declspec(dllexport)
#  else
#    define CMT_API __declspec(dllimport)
#  endif
#else
#  define CMT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cmt_status
{
    CMT_OK = 0,
    CMT_ERR_INVALID_ARGUMENT = 1, /* contract or precondition violation */
    CMT_ERR_DATA = 2,             /* malformed or unusable input data */
    CMT_ERR_NUMERICAL = 3,        /* non-convergence, singular system, pole */
    CMT_ERR_IO = 4,               /* filesystem failure */
    CMT_ERR_INTERNAL = 5
} cmt_status;

CMT_API const char *cmt_last_error(void);
CMT_API const char *cmt_version(void);

/* ---- model ------------------------------------------------------------ */

typedef enum cmt_direction
{
    CMT_FORWARD = 0,
    CMT_REVERSE = 1
} cmt_direction;

typedef struct cmt_params
{
    double f0_hz;       /* LC resonance (both resonators) */
    double kappa0_hz;   /* LC decay rate */
    double fm_hz;       /* edge-plasmon resonance */
    double kappa_m_hz;  /* edge-plasmon decay rate */
    double g_hz;        /* coupling */
    double path_ratio;  /* ratio of the two edge-path responses */
    int has_background;
    double bg_amplitude;
    double bg_phase_rad;
    double bg_delay_s;
} cmt_params;

/* Fills the low-power fitted values: f0 = fm = 543.8 MHz, g = 4.9 MHz,
 * kappa0 = 0.9 MHz, kappa_m = 1.3 MHz, path_ratio = 2, no background. */
CMT_API void cmt_params_default(cmt_params *params);
CMT_API cmt_status cmt_params_validate(const cmt_params *params);

CMT_API cmt_status cmt_transmission(const cmt_params *params, double f_hz, cmt_direction direction,
                                    double *re, double *im);
CMT_API cmt_status cmt_oracle_transmission(const cmt_params *params, double f_hz, cmt_direction direction,
                                           double *re, double *im);

/* Four complex mode frequencies in Hz (imaginary part = -decay / 2 pi),
 * sorted by real then imaginary part. */
CMT_API cmt_status cmt_eigenmodes(const cmt_params *params, double re_hz[4], double im_hz[4]);
CMT_API cmt_status cmt_ep_gap(const cmt_params *params, double *gap_hz);

/* ---- spectra ---------------------------------------------------------- */

typedef struct cmt_spectrum cmt_spectrum;

typedef enum cmt_format
{
    CMT_FORMAT_CSV_COMPLEX = 0,
    CMT_FORMAT_CSV_DB_PHASE = 1,
    CMT_FORMAT_TOUCHSTONE = 2
} cmt_format;

CMT_API cmt_status cmt_spectrum_create(const double *freqs_hz, const double *re, const double *im, size_t n,
                                       const char *label, cmt_spectrum **out);
CMT_API void cmt_spectrum_destroy(cmt_spectrum *spectrum);
CMT_API size_t cmt_spectrum_size(const cmt_spectrum *spectrum);
CMT_API const char *cmt_spectrum_label(const cmt_spectrum *spectrum);
CMT_API cmt_status cmt_spectrum_data(const cmt_spectrum *spectrum, double *freqs_hz, double *re, double *im,
                                     size_t capacity);

CMT_API cmt_status cmt_format_from_name(const char *name, cmt_format *out);
/* Touchstone by extension, CSV flavor by header. */
CMT_API cmt_status cmt_format_detect(const char *path, cmt_format *out);
CMT_API cmt_status cmt_spectrum_read(const char *path, cmt_format format, cmt_spectrum **out);
CMT_API cmt_status cmt_spectrum_write(const cmt_spectrum *spectrum, const char *path, cmt_format format);

CMT_API cmt_status cmt_simulate(const cmt_params *params, double f_start_hz, double f_stop_hz, size_t n_points,
                                cmt_direction direction, int conjugate_for_export, cmt_spectrum **out);

CMT_API cmt_status cmt_unwrap_phase(const cmt_spectrum *spectrum, double *phase_rad, size_t capacity);
CMT_API cmt_status cmt_group_delay(const cmt_spectrum *spectrum, double *delay_s, size_t capacity);
CMT_API cmt_status cmt_normalize_to_reference(const cmt_spectrum *target, const cmt_spectrum *reference,
                                              cmt_spectrum **target_out, cmt_spectrum **reference_out);
CMT_API cmt_status cmt_isolation_db(const cmt_spectrum *fwd, const cmt_spectrum *rev, double *db, size_t capacity,
                                    double *max_db, double *f_at_max_hz);

typedef enum cmt_resonance_kind
{
    CMT_PEAK = 0,
    CMT_DIP = 1
} cmt_resonance_kind;

typedef struct cmt_resonance
{
    double f_center_hz;
    double q_factor;
    double bandwidth_3db_hz;
    double peak_mag_db;
    cmt_resonance_kind kind;
} cmt_resonance;

CMT_API cmt_status cmt_fit_resonance(const cmt_spectrum *spectrum, cmt_resonance_kind kind, cmt_resonance *out);

typedef struct cmt_extremum
{
    size_t index;
    double f_hz;
    double mag_db;
    cmt_resonance_kind kind;
} cmt_extremum;

/* Writes up to capacity extrema; *count receives the total number found. */
CMT_API cmt_status cmt_find_extrema(const cmt_spectrum *spectrum, cmt_extremum *out, size_t capacity, size_t *count);

typedef struct cmt_power_row
{
    double power_dbm;
    double max_isolation_db;
    double dip_frequency_hz;
    double bandwidth_3db_hz;
    int ok;             /* 0 when extraction failed for this row */
    char message[256];  /* failure description when ok == 0 */
} cmt_power_row;

/* rows receives n entries ordered by power; fwd is the transmitting path,
 * rev the isolated path holding the dip. */
CMT_API cmt_status cmt_power_trend(const double *powers_dbm, const cmt_spectrum *const *fwd,
                                   const cmt_spectrum *const *rev, size_t n, cmt_power_row *rows);

/* ---- fitting ---------------------------------------------------------- */

typedef enum cmt_objective_space
{
    CMT_OBJECTIVE_DB_MAGNITUDE = 0,
    CMT_OBJECTIVE_LINEAR_COMPLEX = 1
} cmt_objective_space;

typedef struct cmt_interval
{
    double min;
    double max;
} cmt_interval;

typedef struct cmt_fit_config
{
    cmt_objective_space objective_space;
    double mag_floor_db;
    int fit_background;
    cmt_interval g_hz, kappa0_hz, kappa_m_hz, f0_hz, fm_hz;
    cmt_interval bg_amplitude, bg_phase_rad, bg_delay_s;
    size_t max_evaluations;
    double simplex_tolerance;
    unsigned restarts;
    unsigned multi_starts;
    double start_jitter;
    uint64_t seed;
} cmt_fit_config;

CMT_API void cmt_fit_config_default(cmt_fit_config *config);

typedef struct cmt_fit_result cmt_fit_result;

CMT_API cmt_status cmt_fit_objective(const cmt_params *params, const cmt_spectrum *data,
                                     const cmt_fit_config *config, double *value);
CMT_API cmt_status cmt_fit(const cmt_spectrum *data, const cmt_params *init, const cmt_fit_config *config,
                           cmt_fit_result **out);
CMT_API void cmt_fit_result_destroy(cmt_fit_result *result);
CMT_API cmt_status cmt_fit_result_params(const cmt_fit_result *result, cmt_params *params);
CMT_API double cmt_fit_result_residual(const cmt_fit_result *result);
CMT_API size_t cmt_fit_result_evaluations(const cmt_fit_result *result);
CMT_API int cmt_fit_result_converged(const cmt_fit_result *result);
/* Copies the report text (NUL-terminated, truncated to capacity); *needed
 * receives the full length including the terminator. */
CMT_API cmt_status cmt_fit_result_report(const cmt_fit_result *result, char *buffer, size_t capacity, size_t *needed);

/* ---- time domain ------------------------------------------------------ */

typedef struct cmt_pulse_spec
{
    double f_center_hz;
    double bandwidth_hz; /* FWHM of the envelope's magnitude spectrum */
    double span_s;
    size_t n_samples;    /* power of two */
} cmt_pulse_spec;

typedef struct cmt_timeseries cmt_timeseries;

CMT_API void cmt_pulse_spec_default(cmt_pulse_spec *spec);
CMT_API cmt_status cmt_synth_pulse(const cmt_pulse_spec *spec, cmt_timeseries **out);
CMT_API cmt_status cmt_apply_channel(const cmt_timeseries *pulse, const cmt_spectrum *channel, double f_center_hz,
                                     cmt_timeseries **out, int *coverage_warning);
CMT_API cmt_status cmt_estimate_delay(const cmt_timeseries *input, const cmt_timeseries *output, double *delay_s);
CMT_API void cmt_timeseries_destroy(cmt_timeseries *series);
CMT_API size_t cmt_timeseries_size(const cmt_timeseries *series);
CMT_API cmt_status cmt_timeseries_data(const cmt_timeseries *series, double *t_s, double *re, double *im,
                                       size_t capacity);

/* ---- circuit ---------------------------------------------------------- */

CMT_API cmt_status cmt_lc_resonance_hz(double inductance_h, double capacitance_f, double *f_hz);
CMT_API cmt_status cmt_stray_capacitance_f(double inductance_h, double f_hz, double *capacitance_f);
CMT_API cmt_status cmt_edge_impedance_ohm(int chern_number, double *ohm);
CMT_API cmt_status cmt_emp_frequency_hz(double radius_m, double velocity_m_per_s, double *f_hz);

/* ---- output ----------------------------------------------------------- */

/* Equal-length numeric columns with a header row; shortest round-trip
 * decimal formatting. */
CMT_API cmt_status cmt_write_columns_csv(const char *path, const char *const *headers, const double *const *columns,
                                         size_t n_columns, size_t n_rows);
CMT_API cmt_status cmt_write_text(const char *path, const char *text);
/* Shortest round-trip decimal text for v into buffer (NUL-terminated). */
CMT_API cmt_status cmt_format_double(double v, char *buffer, size_t capacity);

typedef struct cmt_plot cmt_plot;

CMT_API cmt_status cmt_plot_create(const char *title, const char *x_label, const char *y_label, int log_x, int log_y,
                                   cmt_plot **out);
CMT_API cmt_status cmt_plot_add_series(cmt_plot *plot, const char *label, const double *x, const double *y, size_t n);
CMT_API cmt_status cmt_plot_write(const cmt_plot *plot, const char *path);
CMT_API void cmt_plot_destroy(cmt_plot *plot);

#ifdef __cplusplus
}
#endif

#endif
