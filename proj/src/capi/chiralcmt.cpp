#include "chiralcmt/chiralcmt.h"

#include "circuit.hpp"
#include "fit.hpp"
#include "io.hpp"
#include "model.hpp"
#include "spectra.hpp"
#include "svg.hpp"
#include "timedomain.hpp"

#include <cstring>
#include <memory>
#include <new>
#include <numbers>
#include <string>

using namespace chiralcmt;

struct cmt_spectrum
{
    Spectrum value;
};

struct cmt_timeseries
{
    timedomain::TimeSeries value;
};

struct cmt_fit_result
{
    fit::FitResult value;
    std::string report;
};

struct cmt_plot
{
    std::vector<svg::Series> series;
    svg::Axes axes;
};

namespace
{
constexpr double kTwoPi = 2.0 * std::numbers::pi;

thread_local std::string g_last_error;

cmt_status fail(cmt_status status, const std::string &message)
{
    g_last_error = message;
    return status;
}

cmt_status status_of(ErrorKind kind)
{
    switch (kind)
    {
    case ErrorKind::Contract: return CMT_ERR_INVALID_ARGUMENT;
    case ErrorKind::Data: return CMT_ERR_DATA;
    case ErrorKind::Numerical: return CMT_ERR_NUMERICAL;
    case ErrorKind::Io: return CMT_ERR_IO;
    }
    return CMT_ERR_INTERNAL;
}

// Runs body, translating exceptions into status codes.
template <class F>
cmt_status guarded(F &&body)
{
    g_last_error.clear();
    try
    {
        body();
        return CMT_OK;
    }
    catch (const Error &e)
    {
        return fail(status_of(e.kind()), e.what());
    }
    catch (const std::bad_alloc &)
    {
        return fail(CMT_ERR_INTERNAL, "out of memory");
    }
    catch (const std::exception &e)
    {
        return fail(CMT_ERR_INTERNAL, e.what());
    }
}

void need(const void *p, const char *what)
{
    if (p == nullptr)
        throw ContractError(std::string(what) + " must not be NULL");
}

void need_capacity(std::size_t capacity, std::size_t required)
{
    if (capacity < required)
        throw ContractError("output capacity " + std::to_string(capacity) + " is below the required " +
                            std::to_string(required));
}

model::CmtParams to_model(const cmt_params *p)
{
    need(p, "params");
    std::optional<model::BackgroundPath> bg;
    if (p->has_background)
        bg = model::BackgroundPath{p->bg_amplitude, p->bg_phase_rad, p->bg_delay_s};
    return model::CmtParams::from_hz(p->f0_hz, p->kappa0_hz, p->fm_hz, p->kappa_m_hz, p->g_hz, p->path_ratio, bg);
}

cmt_params from_model(const model::CmtParams &p)
{
    cmt_params out{};
    out.f0_hz = p.omega0 / kTwoPi;
    out.kappa0_hz = p.kappa0 / kTwoPi;
    out.fm_hz = p.omega_m / kTwoPi;
    out.kappa_m_hz = p.kappa_m / kTwoPi;
    out.g_hz = p.g / kTwoPi;
    out.path_ratio = p.path_ratio;
    out.has_background = p.background ? 1 : 0;
    if (p.background)
    {
        out.bg_amplitude = p.background->amplitude;
        out.bg_phase_rad = p.background->phase_offset;
        out.bg_delay_s = p.background->delay;
    }
    return out;
}

model::Direction to_direction(cmt_direction d)
{
    if (d != CMT_FORWARD && d != CMT_REVERSE)
        throw ContractError("unknown direction");
    return d == CMT_FORWARD ? model::Direction::Forward : model::Direction::Reverse;
}

io::Format to_format(cmt_format f)
{
    switch (f)
    {
    case CMT_FORMAT_CSV_COMPLEX: return io::Format::CsvComplex;
    case CMT_FORMAT_CSV_DB_PHASE: return io::Format::CsvDbPhase;
    case CMT_FORMAT_TOUCHSTONE: return io::Format::Touchstone;
    }
    throw ContractError("unknown spectrum format");
}

cmt_format from_format(io::Format f)
{
    switch (f)
    {
    case io::Format::CsvComplex: return CMT_FORMAT_CSV_COMPLEX;
    case io::Format::CsvDbPhase: return CMT_FORMAT_CSV_DB_PHASE;
    case io::Format::Touchstone: return CMT_FORMAT_TOUCHSTONE;
    }
    return CMT_FORMAT_CSV_COMPLEX;
}

spectra::ResonanceKind to_kind(cmt_resonance_kind k)
{
    if (k != CMT_PEAK && k != CMT_DIP)
        throw ContractError("unknown resonance kind");
    return k == CMT_PEAK ? spectra::ResonanceKind::Peak : spectra::ResonanceKind::Dip;
}

const Spectrum &spec(const cmt_spectrum *s, const char *what = "spectrum")
{
    need(s, what);
    return s->value;
}

cmt_spectrum *wrap(Spectrum s) { return new cmt_spectrum{std::move(s)}; }

fit::Interval to_interval(cmt_interval i) { return {i.min, i.max}; }
cmt_interval from_interval(fit::Interval i) { return {i.min, i.max}; }

fit::FitConfig to_fit_config(const cmt_fit_config *c)
{
    fit::FitConfig config;
    if (c == nullptr)
        return config;
    if (c->objective_space != CMT_OBJECTIVE_DB_MAGNITUDE && c->objective_space != CMT_OBJECTIVE_LINEAR_COMPLEX)
        throw ContractError("unknown objective space");
    config.objective_space = c->objective_space == CMT_OBJECTIVE_DB_MAGNITUDE ? fit::ObjectiveSpace::DbMagnitude
                                                                                : fit::ObjectiveSpace::LinearComplex;
    config.mag_floor_db = c->mag_floor_db;
    config.fit_background = c->fit_background != 0;
    config.bounds.g_hz = to_interval(c->g_hz);
    config.bounds.kappa0_hz = to_interval(c->kappa0_hz);
    config.bounds.kappa_m_hz = to_interval(c->kappa_m_hz);
    config.bounds.f0_hz = to_interval(c->f0_hz);
    config.bounds.fm_hz = to_interval(c->fm_hz);
    config.bounds.bg_amplitude = to_interval(c->bg_amplitude);
    config.bounds.bg_phase_rad = to_interval(c->bg_phase_rad);
    config.bounds.bg_delay_s = to_interval(c->bg_delay_s);
    config.minimizer.max_evaluations = c->max_evaluations;
    config.minimizer.simplex_tolerance = c->simplex_tolerance;
    config.minimizer.restarts = c->restarts;
    config.minimizer.seed = c->seed;
    config.multi_starts = c->multi_starts;
    config.start_jitter = c->start_jitter;
    config.validate();
    return config;
}

void copy_string(const std::string &s, char *buffer, std::size_t capacity)
{
    if (buffer == nullptr || capacity == 0)
        return;
    const std::size_t n = std::min(s.size(), capacity - 1);
    std::memcpy(buffer, s.data(), n);
    buffer[n] = '\0';
}

std::string str(const char *s) { return s ? std::string(s) : std::string(); }
} // namespace

extern "C" {

const char *cmt_last_error(void) { return g_last_error.c_str(); }

const char *cmt_version(void) { return "0.1.0"; }

void cmt_params_default(cmt_params *params)
{
    if (params == nullptr)
        return;
    *params = cmt_params{};
    params->f0_hz = 543.8e6;
    params->fm_hz = 543.8e6;
    params->g_hz = 4.9e6;
    params->kappa0_hz = 0.9e6;
    params->kappa_m_hz = 1.3e6;
    params->path_ratio = 2.0;
}

cmt_status cmt_params_validate(const cmt_params *params)
{
    return guarded([&] { to_model(params); });
}

cmt_status cmt_transmission(const cmt_params *params, double f_hz, cmt_direction direction, double *re, double *im)
{
    return guarded([&] {
        need(re, "re");
        need(im, "im");
        const Complex t = model::transmission(to_model(params), kTwoPi * f_hz, to_direction(direction));
        *re = t.real();
        *im = t.imag();
    });
}

cmt_status cmt_oracle_transmission(const cmt_params *params, double f_hz, cmt_direction direction, double *re,
                                   double *im)
{
    return guarded([&] {
        need(re, "re");
        need(im, "im");
        const Complex t = model::oracle_transmission(to_model(params), kTwoPi * f_hz, to_direction(direction));
        *re = t.real();
        *im = t.imag();
    });
}

cmt_status cmt_eigenmodes(const cmt_params *params, double re_hz[4], double im_hz[4])
{
    return guarded([&] {
        need(re_hz, "re_hz");
        need(im_hz, "im_hz");
        const auto modes = model::eigenmodes(to_model(params));
        for (std::size_t i = 0; i < 4; ++i)
        {
            re_hz[i] = modes[i].real() / kTwoPi;
            im_hz[i] = modes[i].imag() / kTwoPi;
        }
    });
}

cmt_status cmt_ep_gap(const cmt_params *params, double *gap_hz)
{
    return guarded([&] {
        need(gap_hz, "gap_hz");
        *gap_hz = model::ep_gap(to_model(params)) / kTwoPi;
    });
}

cmt_status cmt_spectrum_create(const double *freqs_hz, const double *re, const double *im, size_t n, const char *label,
                               cmt_spectrum **out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        need(freqs_hz, "freqs_hz");
        need(re, "re");
        need(im, "im");
        std::vector<double> f(freqs_hz, freqs_hz + n);
        std::vector<Complex> v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = {re[i], im[i]};
        *out = wrap(Spectrum(std::move(f), std::move(v), str(label)));
    });
}

void cmt_spectrum_destroy(cmt_spectrum *spectrum) { delete spectrum; }

size_t cmt_spectrum_size(const cmt_spectrum *spectrum) { return spectrum ? spectrum->value.size() : 0; }

const char *cmt_spectrum_label(const cmt_spectrum *spectrum) { return spectrum ? spectrum->value.label().c_str() : ""; }

cmt_status cmt_spectrum_data(const cmt_spectrum *spectrum, double *freqs_hz, double *re, double *im, size_t capacity)
{
    return guarded([&] {
        const auto &s = spec(spectrum);
        need_capacity(capacity, s.size());
        for (std::size_t i = 0; i < s.size(); ++i)
        {
            if (freqs_hz)
                freqs_hz[i] = s.freqs_hz()[i];
            if (re)
                re[i] = s.values()[i].real();
            if (im)
                im[i] = s.values()[i].imag();
        }
    });
}

cmt_status cmt_format_from_name(const char *name, cmt_format *out)
{
    return guarded([&] {
        need(name, "name");
        need(out, "out");
        *out = from_format(io::parse_format(name));
    });
}

cmt_status cmt_format_detect(const char *path, cmt_format *out)
{
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = from_format(io::detect_format(path));
    });
}

cmt_status cmt_spectrum_read(const char *path, cmt_format format, cmt_spectrum **out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        need(path, "path");
        *out = wrap(io::read_spectrum(path, to_format(format)));
    });
}

cmt_status cmt_spectrum_write(const cmt_spectrum *spectrum, const char *path, cmt_format format)
{
    return guarded([&] {
        need(path, "path");
        io::write_spectrum(spec(spectrum), path, to_format(format));
    });
}

cmt_status cmt_simulate(const cmt_params *params, double f_start_hz, double f_stop_hz, size_t n_points,
                        cmt_direction direction, int conjugate_for_export, cmt_spectrum **out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        *out = wrap(model::sweep_spectrum(to_model(params), f_start_hz, f_stop_hz, n_points, to_direction(direction),
                                          conjugate_for_export != 0));
    });
}

cmt_status cmt_unwrap_phase(const cmt_spectrum *spectrum, double *phase_rad, size_t capacity)
{
    return guarded([&] {
        need(phase_rad, "phase_rad");
        const auto &s = spec(spectrum);
        need_capacity(capacity, s.size());
        const auto phase = spectra::unwrap_phase(s);
        std::copy(phase.begin(), phase.end(), phase_rad);
    });
}

cmt_status cmt_group_delay(const cmt_spectrum *spectrum, double *delay_s, size_t capacity)
{
    return guarded([&] {
        need(delay_s, "delay_s");
        const auto &s = spec(spectrum);
        need_capacity(capacity, s.size());
        const auto tau = spectra::group_delay(s);
        std::copy(tau.begin(), tau.end(), delay_s);
    });
}

cmt_status cmt_normalize_to_reference(const cmt_spectrum *target, const cmt_spectrum *reference,
                                      cmt_spectrum **target_out, cmt_spectrum **reference_out)
{
    return guarded([&] {
        need(target_out, "target_out");
        need(reference_out, "reference_out");
        *target_out = nullptr;
        *reference_out = nullptr;
        auto pair = spectra::normalize_to_reference(spec(target, "target"), spec(reference, "reference"));
        std::unique_ptr<cmt_spectrum> t(wrap(std::move(pair.target)));
        std::unique_ptr<cmt_spectrum> r(wrap(std::move(pair.reference)));
        *target_out = t.release();
        *reference_out = r.release();
    });
}

cmt_status cmt_isolation_db(const cmt_spectrum *fwd, const cmt_spectrum *rev, double *db, size_t capacity,
                            double *max_db, double *f_at_max_hz)
{
    return guarded([&] {
        const auto trace = spectra::isolation_db(spec(fwd, "fwd"), spec(rev, "rev"));
        if (db)
        {
            need_capacity(capacity, trace.db.size());
            std::copy(trace.db.begin(), trace.db.end(), db);
        }
        if (max_db)
            *max_db = trace.max_db;
        if (f_at_max_hz)
            *f_at_max_hz = trace.f_at_max_hz;
    });
}

cmt_status cmt_fit_resonance(const cmt_spectrum *spectrum, cmt_resonance_kind kind, cmt_resonance *out)
{
    return guarded([&] {
        need(out, "out");
        const auto r = spectra::fit_resonance(spec(spectrum), to_kind(kind));
        *out = {r.f_center_hz, r.q_factor, r.bandwidth_3db_hz, r.peak_mag_db, kind};
    });
}

cmt_status cmt_find_extrema(const cmt_spectrum *spectrum, cmt_extremum *out, size_t capacity, size_t *count)
{
    return guarded([&] {
        need(count, "count");
        const auto extrema = spectra::find_extrema(spec(spectrum));
        *count = extrema.size();
        for (std::size_t i = 0; i < extrema.size() && i < capacity && out; ++i)
            out[i] = {extrema[i].index, extrema[i].f_hz, extrema[i].mag_db,
                      extrema[i].kind == spectra::ResonanceKind::Peak ? CMT_PEAK : CMT_DIP};
    });
}

cmt_status cmt_power_trend(const double *powers_dbm, const cmt_spectrum *const *fwd, const cmt_spectrum *const *rev,
                           size_t n, cmt_power_row *rows)
{
    return guarded([&] {
        need(powers_dbm, "powers_dbm");
        need(fwd, "fwd");
        need(rev, "rev");
        need(rows, "rows");
        std::vector<spectra::PowerSweepEntry> entries;
        entries.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            entries.push_back({powers_dbm[i], spec(fwd[i], "fwd"), spec(rev[i], "rev")});
        const auto table = spectra::power_trend(entries);
        for (std::size_t i = 0; i < table.size(); ++i)
        {
            rows[i] = cmt_power_row{};
            rows[i].power_dbm = table[i].power_dbm;
            rows[i].max_isolation_db = table[i].max_isolation_db;
            rows[i].dip_frequency_hz = table[i].dip_frequency_hz;
            rows[i].bandwidth_3db_hz = table[i].bandwidth_3db_hz;
            rows[i].ok = table[i].error ? 0 : 1;
            if (table[i].error)
                copy_string(*table[i].error, rows[i].message, sizeof rows[i].message);
        }
    });
}

void cmt_fit_config_default(cmt_fit_config *config)
{
    if (config == nullptr)
        return;
    const fit::FitConfig d;
    *config = cmt_fit_config{};
    config->objective_space = CMT_OBJECTIVE_DB_MAGNITUDE;
    config->mag_floor_db = d.mag_floor_db;
    config->fit_background = d.fit_background ? 1 : 0;
    config->g_hz = from_interval(d.bounds.g_hz);
    config->kappa0_hz = from_interval(d.bounds.kappa0_hz);
    config->kappa_m_hz = from_interval(d.bounds.kappa_m_hz);
    config->f0_hz = from_interval(d.bounds.f0_hz);
    config->fm_hz = from_interval(d.bounds.fm_hz);
    config->bg_amplitude = from_interval(d.bounds.bg_amplitude);
    config->bg_phase_rad = from_interval(d.bounds.bg_phase_rad);
    config->bg_delay_s = from_interval(d.bounds.bg_delay_s);
    config->max_evaluations = d.minimizer.max_evaluations;
    config->simplex_tolerance = d.minimizer.simplex_tolerance;
    config->restarts = d.minimizer.restarts;
    config->multi_starts = d.multi_starts;
    config->start_jitter = d.start_jitter;
    config->seed = d.minimizer.seed;
}

cmt_status cmt_fit_objective(const cmt_params *params, const cmt_spectrum *data, const cmt_fit_config *config,
                             double *value)
{
    return guarded([&] {
        need(value, "value");
        *value = fit::objective(to_model(params), spec(data, "data"), to_fit_config(config));
    });
}

cmt_status cmt_fit(const cmt_spectrum *data, const cmt_params *init, const cmt_fit_config *config, cmt_fit_result **out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        auto result = fit::fit_transmission(spec(data, "data"), to_model(init), to_fit_config(config));
        auto report = fit::fit_report_text(result);
        *out = new cmt_fit_result{std::move(result), std::move(report)};
    });
}

void cmt_fit_result_destroy(cmt_fit_result *result) { delete result; }

cmt_status cmt_fit_result_params(const cmt_fit_result *result, cmt_params *params)
{
    return guarded([&] {
        need(result, "result");
        need(params, "params");
        *params = from_model(result->value.params);
    });
}

double cmt_fit_result_residual(const cmt_fit_result *result) { return result ? result->value.residual : 0.0; }

size_t cmt_fit_result_evaluations(const cmt_fit_result *result) { return result ? result->value.evaluations : 0; }

int cmt_fit_result_converged(const cmt_fit_result *result) { return result && result->value.converged ? 1 : 0; }

cmt_status cmt_fit_result_report(const cmt_fit_result *result, char *buffer, size_t capacity, size_t *needed)
{
    return guarded([&] {
        need(result, "result");
        if (needed)
            *needed = result->report.size() + 1;
        copy_string(result->report, buffer, capacity);
    });
}

void cmt_pulse_spec_default(cmt_pulse_spec *spec)
{
    if (spec == nullptr)
        return;
    const timedomain::PulseSpec d;
    *spec = {d.f_center_hz, d.bandwidth_hz, d.span_s, d.n_samples};
}

cmt_status cmt_synth_pulse(const cmt_pulse_spec *spec_in, cmt_timeseries **out)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        need(spec_in, "spec");
        const timedomain::PulseSpec s{spec_in->f_center_hz, spec_in->bandwidth_hz, spec_in->span_s, spec_in->n_samples};
        *out = new cmt_timeseries{timedomain::synth_pulse(s)};
    });
}

cmt_status cmt_apply_channel(const cmt_timeseries *pulse, const cmt_spectrum *channel, double f_center_hz,
                             cmt_timeseries **out, int *coverage_warning)
{
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        need(pulse, "pulse");
        auto result = timedomain::apply_channel(pulse->value, spec(channel, "channel"), f_center_hz);
        if (coverage_warning)
            *coverage_warning = result.coverage_warning ? 1 : 0;
        *out = new cmt_timeseries{std::move(result.output)};
    });
}

cmt_status cmt_estimate_delay(const cmt_timeseries *input, const cmt_timeseries *output, double *delay_s)
{
    return guarded([&] {
        need(input, "input");
        need(output, "output");
        need(delay_s, "delay_s");
        *delay_s = timedomain::estimate_delay(input->value, output->value);
    });
}

void cmt_timeseries_destroy(cmt_timeseries *series) { delete series; }

size_t cmt_timeseries_size(const cmt_timeseries *series) { return series ? series->value.values.size() : 0; }

cmt_status cmt_timeseries_data(const cmt_timeseries *series, double *t_s, double *re, double *im, size_t capacity)
{
    return guarded([&] {
        need(series, "series");
        const auto &s = series->value;
        need_capacity(capacity, s.values.size());
        for (std::size_t i = 0; i < s.values.size(); ++i)
        {
            if (t_s)
                t_s[i] = s.time(i);
            if (re)
                re[i] = s.values[i].real();
            if (im)
                im[i] = s.values[i].imag();
        }
    });
}

cmt_status cmt_lc_resonance_hz(double inductance_h, double capacitance_f, double *f_hz)
{
    return guarded([&] {
        need(f_hz, "f_hz");
        *f_hz = circuit::lc_resonance_hz(inductance_h, capacitance_f);
    });
}

cmt_status cmt_stray_capacitance_f(double inductance_h, double f_hz, double *capacitance_f)
{
    return guarded([&] {
        need(capacitance_f, "capacitance_f");
        *capacitance_f = circuit::stray_capacitance_f(inductance_h, f_hz);
    });
}

cmt_status cmt_edge_impedance_ohm(int chern_number, double *ohm)
{
    return guarded([&] {
        need(ohm, "ohm");
        *ohm = circuit::edge_impedance_ohm(chern_number);
    });
}

cmt_status cmt_emp_frequency_hz(double radius_m, double velocity_m_per_s, double *f_hz)
{
    return guarded([&] {
        need(f_hz, "f_hz");
        *f_hz = circuit::emp_frequency_hz(radius_m, velocity_m_per_s);
    });
}

cmt_status cmt_write_columns_csv(const char *path, const char *const *headers, const double *const *columns,
                                 size_t n_columns, size_t n_rows)
{
    return guarded([&] {
        need(path, "path");
        need(headers, "headers");
        need(columns, "columns");
        std::vector<std::string> h;
        std::vector<std::vector<double>> c;
        for (std::size_t j = 0; j < n_columns; ++j)
        {
            need(headers[j], "header");
            need(columns[j], "column");
            h.emplace_back(headers[j]);
            c.emplace_back(columns[j], columns[j] + n_rows);
        }
        io::write_columns_csv(path, h, c);
    });
}

cmt_status cmt_write_text(const char *path, const char *text)
{
    return guarded([&] {
        need(path, "path");
        need(text, "text");
        io::write_text(path, text);
    });
}

cmt_status cmt_format_double(double v, char *buffer, size_t capacity)
{
    return guarded([&] {
        need(buffer, "buffer");
        const std::string s = io::format_double(v);
        need_capacity(capacity, s.size() + 1);
        copy_string(s, buffer, capacity);
    });
}

cmt_status cmt_plot_create(const char *title, const char *x_label, const char *y_label, int log_x, int log_y,
                           cmt_plot **out)
{
    return guarded([&] {
        need(out, "out");
        *out = new cmt_plot{{}, {str(title), str(x_label), str(y_label), log_x != 0, log_y != 0}};
    });
}

cmt_status cmt_plot_add_series(cmt_plot *plot, const char *label, const double *x, const double *y, size_t n)
{
    return guarded([&] {
        need(plot, "plot");
        if (n > 0)
        {
            need(x, "x");
            need(y, "y");
        }
        plot->series.push_back({str(label), std::vector<double>(x, x + n), std::vector<double>(y, y + n)});
    });
}

cmt_status cmt_plot_write(const cmt_plot *plot, const char *path)
{
    return guarded([&] {
        need(plot, "plot");
        need(path, "path");
        svg::emit_svg_plot(plot->series, plot->axes, path);
    });
}

void cmt_plot_destroy(cmt_plot *plot) { delete plot; }

} // extern "C"
