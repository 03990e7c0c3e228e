#include "cli.hpp"

#include <chiralcmt/chiralcmt.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

namespace chiralcmt::cli
{

namespace
{
namespace fs = std::filesystem;
using json = nlohmann::json;

struct Failure
{
    int code;
    std::string message;
};

[[noreturn]] void fail(int code, const std::string &message) { throw Failure{code, message}; }

int exit_code_for(cmt_status status)
{
    switch (status)
    {
    case CMT_OK: return kExitOk;
    case CMT_ERR_INVALID_ARGUMENT: return kExitUsage;
    case CMT_ERR_DATA:
    case CMT_ERR_IO: return kExitData;
    case CMT_ERR_NUMERICAL:
    case CMT_ERR_INTERNAL: return kExitNumerical;
    }
    return kExitNumerical;
}

void check(cmt_status status, const std::string &context)
{
    if (status != CMT_OK)
        fail(exit_code_for(status), context + ": " + cmt_last_error());
}

struct SpectrumDeleter
{
    void operator()(cmt_spectrum *s) const { cmt_spectrum_destroy(s); }
};
struct SeriesDeleter
{
    void operator()(cmt_timeseries *s) const { cmt_timeseries_destroy(s); }
};
struct FitDeleter
{
    void operator()(cmt_fit_result *r) const { cmt_fit_result_destroy(r); }
};
struct PlotDeleter
{
    void operator()(cmt_plot *p) const { cmt_plot_destroy(p); }
};
using SpectrumPtr = std::unique_ptr<cmt_spectrum, SpectrumDeleter>;
using SeriesPtr = std::unique_ptr<cmt_timeseries, SeriesDeleter>;
using FitPtr = std::unique_ptr<cmt_fit_result, FitDeleter>;
using PlotPtr = std::unique_ptr<cmt_plot, PlotDeleter>;

std::string num(double v)
{
    char buf[64];
    if (v == 0.0)
        v = 0.0;  // no "-0" in reports
    if (cmt_format_double(v, buf, sizeof buf) != CMT_OK)
        return "nan";
    return buf;
}

struct SpectrumData
{
    std::string label;
    std::vector<double> f, re, im;

    std::complex<double> at(std::size_t i) const { return {re[i], im[i]}; }
    std::size_t size() const { return f.size(); }
};

SpectrumData fetch(const cmt_spectrum *s)
{
    SpectrumData d;
    d.label = cmt_spectrum_label(s);
    const std::size_t n = cmt_spectrum_size(s);
    d.f.resize(n);
    d.re.resize(n);
    d.im.resize(n);
    check(cmt_spectrum_data(s, d.f.data(), d.re.data(), d.im.data(), n), "spectrum");
    return d;
}

SpectrumPtr make_spectrum(const SpectrumData &d)
{
    cmt_spectrum *raw = nullptr;
    check(cmt_spectrum_create(d.f.data(), d.re.data(), d.im.data(), d.size(), d.label.c_str(), &raw), "spectrum");
    return SpectrumPtr(raw);
}

std::vector<double> magnitude_db(const SpectrumData &d)
{
    std::vector<double> db(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
    {
        const double mag = std::abs(d.at(i));
        db[i] = mag > 0.0 ? std::max(20.0 * std::log10(mag), -200.0) : -200.0;
    }
    return db;
}

std::vector<double> to_mhz(const std::vector<double> &f)
{
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        out[i] = f[i] * 1e-6;
    return out;
}

struct PlotSeries
{
    std::string label;
    std::vector<double> x, y;
};

void write_plot(const std::string &path, const std::string &title, const std::string &x_label,
                const std::string &y_label, const std::vector<PlotSeries> &series)
{
    cmt_plot *raw = nullptr;
    check(cmt_plot_create(title.c_str(), x_label.c_str(), y_label.c_str(), 0, 0, &raw), "--svg");
    PlotPtr plot(raw);
    for (const auto &s : series)
        check(cmt_plot_add_series(plot.get(), s.label.c_str(), s.x.data(), s.y.data(), s.x.size()), "--svg");
    check(cmt_plot_write(plot.get(), path.c_str()), "writing '" + path + "'");
}

void write_columns(const std::string &path, const std::vector<std::string> &headers,
                   const std::vector<const std::vector<double> *> &columns)
{
    std::vector<const char *> h;
    std::vector<const double *> c;
    for (const auto &s : headers)
        h.push_back(s.c_str());
    for (const auto *col : columns)
        c.push_back(col->data());
    const std::size_t rows = columns.empty() ? 0 : columns.front()->size();
    check(cmt_write_columns_csv(path.c_str(), h.data(), c.data(), c.size(), rows), "writing '" + path + "'");
}

cmt_format resolve_format(const std::string &name, const std::string &path, bool reading)
{
    cmt_format format{};
    if (name.empty() || name == "auto")
    {
        if (reading)
        {
            check(cmt_format_detect(path.c_str(), &format), "reading '" + path + "'");
            return format;
        }
        const std::string ext = fs::path(path).extension().string();
        return ext == ".s1p" || ext == ".ts" ? CMT_FORMAT_TOUCHSTONE : CMT_FORMAT_CSV_COMPLEX;
    }
    if (cmt_format_from_name(name.c_str(), &format) != CMT_OK)
        fail(kExitUsage, "--format: unknown format '" + name + "' (csv-complex, csv-db-phase, touchstone)");
    return format;
}

SpectrumPtr read_file(const std::string &path, const std::string &format_name)
{
    const cmt_format format = resolve_format(format_name, path, true);
    cmt_spectrum *raw = nullptr;
    check(cmt_spectrum_read(path.c_str(), format, &raw), "reading '" + path + "'");
    return SpectrumPtr(raw);
}

// ---- run configuration --------------------------------------------------

struct SweepSettings
{
    std::optional<double> f_start_hz, f_stop_hz;
    std::size_t points = 201;
    cmt_direction direction = CMT_FORWARD;
    bool conjugate = false;
};

struct RunConfig
{
    cmt_params model{};
    SweepSettings sweep;
    cmt_fit_config fit{};
    bool conjugated_data = false;
    cmt_pulse_spec pulse{};
    std::string data_path;
    std::string channel_path;
};

class ConfigReader
{
public:
    explicit ConfigReader(std::string source) : source_(std::move(source)) {}

    void keys(const json &obj, const std::string &where, std::initializer_list<const char *> allowed) const
    {
        if (!obj.is_object())
            bad(where + " must be an object");
        for (const auto &item : obj.items())
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char *k) { return item.key() == k; }))
                bad("unknown key '" + where + "." + item.key() + "'");
    }

    double number(const json &obj, const char *key, const std::string &where, double fallback) const
    {
        if (!obj.contains(key))
            return fallback;
        const auto &v = obj.at(key);
        if (!v.is_number())
            bad("'" + where + "." + key + "' must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d))
            bad("'" + where + "." + key + "' must be finite");
        return d;
    }

    double positive(const json &obj, const char *key, const std::string &where, double fallback) const
    {
        const double d = number(obj, key, where, fallback);
        if (!(d > 0.0))
            bad("'" + where + "." + key + "' must be positive");
        return d;
    }

    std::size_t count(const json &obj, const char *key, const std::string &where, std::size_t fallback) const
    {
        if (!obj.contains(key))
            return fallback;
        const auto &v = obj.at(key);
        if (!v.is_number_unsigned())
            bad("'" + where + "." + key + "' must be a non-negative integer");
        return v.get<std::size_t>();
    }

    bool boolean(const json &obj, const char *key, const std::string &where, bool fallback) const
    {
        if (!obj.contains(key))
            return fallback;
        const auto &v = obj.at(key);
        if (!v.is_boolean())
            bad("'" + where + "." + key + "' must be true or false");
        return v.get<bool>();
    }

    std::string text(const json &obj, const char *key, const std::string &where, std::string fallback) const
    {
        if (!obj.contains(key))
            return fallback;
        const auto &v = obj.at(key);
        if (!v.is_string())
            bad("'" + where + "." + key + "' must be a string");
        return v.get<std::string>();
    }

    cmt_interval interval(const json &obj, const char *key, const std::string &where, cmt_interval fallback) const
    {
        if (!obj.contains(key))
            return fallback;
        const auto &v = obj.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            bad("'" + where + "." + key + "' must be [min, max]");
        return {v[0].get<double>(), v[1].get<double>()};
    }

    [[noreturn]] void bad(const std::string &what) const { fail(kExitUsage, "config '" + source_ + "': " + what); }

private:
    std::string source_;
};

cmt_direction parse_direction(const std::string &name, const std::string &where)
{
    if (name == "forward" || name == "fwd")
        return CMT_FORWARD;
    if (name == "reverse" || name == "rev")
        return CMT_REVERSE;
    fail(kExitUsage, where + ": direction must be 'forward' or 'reverse', got '" + name + "'");
}

cmt_objective_space parse_objective(const std::string &name, const std::string &where)
{
    if (name == "db")
        return CMT_OBJECTIVE_DB_MAGNITUDE;
    if (name == "complex")
        return CMT_OBJECTIVE_LINEAR_COMPLEX;
    fail(kExitUsage, where + ": objective must be 'db' or 'complex', got '" + name + "'");
}

std::string resolve_input(const fs::path &base, const std::string &value, const std::string &key, const std::string &source)
{
    fs::path p(value);
    if (p.is_relative())
        p = base / p;
    std::error_code ec;
    if (!fs::is_regular_file(p, ec))
        fail(kExitData, "config '" + source + "': file for '" + key + "' does not exist: " + p.string());
    return p.string();
}

RunConfig default_config()
{
    RunConfig c;
    cmt_params_default(&c.model);
    cmt_fit_config_default(&c.fit);
    cmt_pulse_spec_default(&c.pulse);
    return c;
}

RunConfig load_config(const std::string &path)
{
    RunConfig c = default_config();
    if (path.empty())
        return c;

    std::ifstream in(path);
    if (!in)
        fail(kExitData, "--params: cannot open config '" + path + "'");
    json root;
    try
    {
        root = json::parse(in);
    }
    catch (const json::parse_error &e)
    {
        fail(kExitUsage, "config '" + path + "': " + e.what());
    }

    const ConfigReader r(path);
    r.keys(root, "config", {"model", "sweep", "fit", "pulse", "paths"});

    if (root.contains("model"))
    {
        const json &m = root["model"];
        r.keys(m, "model", {"f0_hz", "fm_hz", "g_hz", "kappa0_hz", "kappa_m_hz", "path_ratio", "background"});
        c.model.f0_hz = r.positive(m, "f0_hz", "model", c.model.f0_hz);
        c.model.fm_hz = r.positive(m, "fm_hz", "model", c.model.fm_hz);
        c.model.g_hz = r.number(m, "g_hz", "model", c.model.g_hz);
        c.model.kappa0_hz = r.positive(m, "kappa0_hz", "model", c.model.kappa0_hz);
        c.model.kappa_m_hz = r.positive(m, "kappa_m_hz", "model", c.model.kappa_m_hz);
        c.model.path_ratio = r.positive(m, "path_ratio", "model", c.model.path_ratio);
        if (m.contains("background"))
        {
            const json &b = m["background"];
            r.keys(b, "model.background", {"amplitude", "phase_rad", "delay_s"});
            c.model.has_background = 1;
            c.model.bg_amplitude = r.number(b, "amplitude", "model.background", 0.0);
            c.model.bg_phase_rad = r.number(b, "phase_rad", "model.background", 0.0);
            c.model.bg_delay_s = r.number(b, "delay_s", "model.background", 0.0);
        }
    }

    if (root.contains("sweep"))
    {
        const json &s = root["sweep"];
        r.keys(s, "sweep", {"f_start_hz", "f_stop_hz", "points", "direction", "conjugate"});
        if (s.contains("f_start_hz"))
            c.sweep.f_start_hz = r.positive(s, "f_start_hz", "sweep", 0.0);
        if (s.contains("f_stop_hz"))
            c.sweep.f_stop_hz = r.positive(s, "f_stop_hz", "sweep", 0.0);
        c.sweep.points = r.count(s, "points", "sweep", c.sweep.points);
        c.sweep.direction = parse_direction(r.text(s, "direction", "sweep", "forward"), "config 'sweep.direction'");
        c.sweep.conjugate = r.boolean(s, "conjugate", "sweep", c.sweep.conjugate);
    }

    if (root.contains("fit"))
    {
        const json &f = root["fit"];
        r.keys(f, "fit", {"objective", "mag_floor_db", "fit_background", "multi_starts", "restarts", "max_evaluations",
                          "tolerance", "start_jitter", "conjugated_data", "bounds"});
        c.fit.objective_space = parse_objective(r.text(f, "objective", "fit", "db"), "config 'fit.objective'");
        c.fit.mag_floor_db = r.number(f, "mag_floor_db", "fit", c.fit.mag_floor_db);
        c.fit.fit_background = r.boolean(f, "fit_background", "fit", c.fit.fit_background != 0) ? 1 : 0;
        c.fit.multi_starts = static_cast<unsigned>(r.count(f, "multi_starts", "fit", c.fit.multi_starts));
        c.fit.restarts = static_cast<unsigned>(r.count(f, "restarts", "fit", c.fit.restarts));
        c.fit.max_evaluations = r.count(f, "max_evaluations", "fit", c.fit.max_evaluations);
        c.fit.simplex_tolerance = r.positive(f, "tolerance", "fit", c.fit.simplex_tolerance);
        c.fit.start_jitter = r.number(f, "start_jitter", "fit", c.fit.start_jitter);
        c.conjugated_data = r.boolean(f, "conjugated_data", "fit", c.conjugated_data);
        if (f.contains("bounds"))
        {
            const json &b = f["bounds"];
            r.keys(b, "fit.bounds", {"g_hz", "kappa0_hz", "kappa_m_hz", "f0_hz", "fm_hz", "bg_amplitude",
                                     "bg_phase_rad", "bg_delay_s"});
            c.fit.g_hz = r.interval(b, "g_hz", "fit.bounds", c.fit.g_hz);
            c.fit.kappa0_hz = r.interval(b, "kappa0_hz", "fit.bounds", c.fit.kappa0_hz);
            c.fit.kappa_m_hz = r.interval(b, "kappa_m_hz", "fit.bounds", c.fit.kappa_m_hz);
            c.fit.f0_hz = r.interval(b, "f0_hz", "fit.bounds", c.fit.f0_hz);
            c.fit.fm_hz = r.interval(b, "fm_hz", "fit.bounds", c.fit.fm_hz);
            c.fit.bg_amplitude = r.interval(b, "bg_amplitude", "fit.bounds", c.fit.bg_amplitude);
            c.fit.bg_phase_rad = r.interval(b, "bg_phase_rad", "fit.bounds", c.fit.bg_phase_rad);
            c.fit.bg_delay_s = r.interval(b, "bg_delay_s", "fit.bounds", c.fit.bg_delay_s);
        }
    }

    if (root.contains("pulse"))
    {
        const json &p = root["pulse"];
        r.keys(p, "pulse", {"f_center_hz", "bandwidth_hz", "span_s", "samples"});
        c.pulse.f_center_hz = r.positive(p, "f_center_hz", "pulse", c.pulse.f_center_hz);
        c.pulse.bandwidth_hz = r.positive(p, "bandwidth_hz", "pulse", c.pulse.bandwidth_hz);
        c.pulse.span_s = r.positive(p, "span_s", "pulse", c.pulse.span_s);
        c.pulse.n_samples = r.count(p, "samples", "pulse", c.pulse.n_samples);
    }

    if (root.contains("paths"))
    {
        const json &p = root["paths"];
        r.keys(p, "paths", {"data", "channel"});
        const fs::path base = fs::path(path).parent_path();
        if (p.contains("data"))
            c.data_path = resolve_input(base, r.text(p, "data", "paths", ""), "paths.data", path);
        if (p.contains("channel"))
            c.channel_path = resolve_input(base, r.text(p, "channel", "paths", ""), "paths.channel", path);
    }

    if (cmt_params_validate(&c.model) != CMT_OK)
        fail(kExitUsage, "config '" + path + "': model: " + cmt_last_error());
    return c;
}

// ---- shared options -----------------------------------------------------

struct GlobalOptions
{
    std::string params_path;
    std::uint64_t seed = 0;
    std::optional<double> f0, fm, g, kappa0, kappa_m, ratio;
};

void add_global_options(CLI::App &app, GlobalOptions &o)
{
    app.add_option("--params", o.params_path, "JSON run configuration (model, sweep, fit, pulse, paths)");
    app.add_option("--seed", o.seed, "Seed for every random choice (default 0)");
    app.add_option("--f0", o.f0, "LC resonance frequency, Hz");
    app.add_option("--fm", o.fm, "Edge-plasmon resonance frequency, Hz");
    app.add_option("--g", o.g, "Coupling rate, Hz");
    app.add_option("--kappa0", o.kappa0, "LC decay rate, Hz");
    app.add_option("--kappa-m", o.kappa_m, "Edge-plasmon decay rate, Hz");
    app.add_option("--path-ratio", o.ratio, "Ratio of the two chiral path responses");
}

RunConfig resolve(const GlobalOptions &o)
{
    RunConfig c = load_config(o.params_path);
    if (o.f0)
        c.model.f0_hz = *o.f0;
    if (o.fm)
        c.model.fm_hz = *o.fm;
    if (o.g)
        c.model.g_hz = *o.g;
    if (o.kappa0)
        c.model.kappa0_hz = *o.kappa0;
    if (o.kappa_m)
        c.model.kappa_m_hz = *o.kappa_m;
    if (o.ratio)
        c.model.path_ratio = *o.ratio;
    if (cmt_params_validate(&c.model) != CMT_OK)
        fail(kExitUsage, std::string("model parameters: ") + cmt_last_error());
    c.fit.seed = o.seed;
    return c;
}

// ---- simulate -----------------------------------------------------------

struct SimulateOptions
{
    std::optional<double> f_start, f_stop;
    std::optional<std::size_t> points;
    std::optional<std::string> direction;
    bool conjugate = false;
    std::string out = "spectrum.csv";
    std::string format;
    std::string svg;
};

int run_simulate(const GlobalOptions &g, const SimulateOptions &o, std::ostream &out)
{
    const RunConfig c = resolve(g);
    const double center = c.model.f0_hz;
    const double f_start = o.f_start.value_or(c.sweep.f_start_hz.value_or(center - 15e6));
    const double f_stop = o.f_stop.value_or(c.sweep.f_stop_hz.value_or(center + 15e6));
    const std::size_t points = o.points.value_or(c.sweep.points);
    const cmt_direction dir = o.direction ? parse_direction(*o.direction, "--direction") : c.sweep.direction;
    const bool conjugate = o.conjugate || c.sweep.conjugate;

    cmt_spectrum *raw = nullptr;
    check(cmt_simulate(&c.model, f_start, f_stop, points, dir, conjugate ? 1 : 0, &raw), "simulate");
    SpectrumPtr spectrum(raw);
    const cmt_format format = resolve_format(o.format, o.out, false);
    check(cmt_spectrum_write(spectrum.get(), o.out.c_str(), format), "writing '" + o.out + "'");

    if (!o.svg.empty())
    {
        const SpectrumData d = fetch(spectrum.get());
        write_plot(o.svg, "Model transmission", "Frequency (MHz)", "|t| (dB)", {{d.label, to_mhz(d.f), magnitude_db(d)}});
    }
    out << "wrote " << o.out << " (" << points << " points, " << (dir == CMT_FORWARD ? "forward" : "reverse")
        << (conjugate ? ", conjugated" : "") << ")\n";
    return kExitOk;
}

// ---- fit ----------------------------------------------------------------

struct FitOptions
{
    std::string data;
    std::string format;
    std::optional<std::string> objective;
    std::optional<double> floor_db;
    bool background = false;
    bool conjugated = false;
    std::optional<unsigned> starts;
    std::string report;
    std::string svg;
    std::string fitted_out;
};

SpectrumData modeled(const cmt_params &p, const SpectrumData &grid, bool conjugate)
{
    SpectrumData m;
    m.label = "fit";
    m.f = grid.f;
    m.re.resize(grid.size());
    m.im.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        check(cmt_transmission(&p, grid.f[i], CMT_FORWARD, &m.re[i], &m.im[i]), "fitted model");
        if (conjugate)
            m.im[i] = -m.im[i];
    }
    return m;
}

int run_fit(const GlobalOptions &g, const FitOptions &o, std::ostream &out)
{
    RunConfig c = resolve(g);
    const std::string data_path = !o.data.empty() ? o.data : c.data_path;
    if (data_path.empty())
        fail(kExitUsage, "fit: --data is required (or paths.data in --params)");
    if (o.objective)
        c.fit.objective_space = parse_objective(*o.objective, "--objective");
    if (o.floor_db)
        c.fit.mag_floor_db = *o.floor_db;
    if (o.background)
        c.fit.fit_background = 1;
    if (o.starts)
        c.fit.multi_starts = *o.starts;
    const bool conjugated = o.conjugated || c.conjugated_data;

    SpectrumPtr data = read_file(data_path, o.format);
    SpectrumData d = fetch(data.get());
    if (conjugated)
    {
        for (auto &v : d.im)
            v = -v;
        data = make_spectrum(d);
    }

    cmt_params init = c.model;
    if (c.fit.fit_background && !init.has_background)
    {
        init.has_background = 1;
        init.bg_amplitude = 0.0;
        init.bg_phase_rad = 0.0;
        init.bg_delay_s = 0.0;
    }

    cmt_fit_result *raw = nullptr;
    check(cmt_fit(data.get(), &init, &c.fit, &raw), "fitting '" + data_path + "'");
    FitPtr result(raw);

    std::size_t needed = 0;
    check(cmt_fit_result_report(result.get(), nullptr, 0, &needed), "fit report");
    std::string report(needed, '\0');
    check(cmt_fit_result_report(result.get(), report.data(), report.size(), &needed), "fit report");
    report.resize(needed > 0 ? needed - 1 : 0);
    out << report;
    if (!o.report.empty())
        check(cmt_write_text(o.report.c_str(), report.c_str()), "writing '" + o.report + "'");

    cmt_params fitted{};
    check(cmt_fit_result_params(result.get(), &fitted), "fit result");
    if (!o.svg.empty() || !o.fitted_out.empty())
    {
        const SpectrumData m = modeled(fitted, d, conjugated);
        if (!o.fitted_out.empty())
        {
            SpectrumPtr ms = make_spectrum(m);
            const cmt_format format = resolve_format("", o.fitted_out, false);
            check(cmt_spectrum_write(ms.get(), o.fitted_out.c_str(), format), "writing '" + o.fitted_out + "'");
        }
        if (!o.svg.empty())
            write_plot(o.svg, "Fit overlay", "Frequency (MHz)", "|t| (dB)",
                       {{d.label.empty() ? "data" : d.label, to_mhz(d.f), magnitude_db(d)},
                        {"fit", to_mhz(m.f), magnitude_db(m)}});
    }
    return kExitOk;
}

// ---- eigen --------------------------------------------------------------

int run_eigen(const GlobalOptions &g, std::ostream &out)
{
    const RunConfig c = resolve(g);
    double re[4], im[4], gap = 0.0;
    check(cmt_eigenmodes(&c.model, re, im), "eigen");
    check(cmt_ep_gap(&c.model, &gap), "eigen");
    for (int k = 0; k < 4; ++k)
        out << "mode_" << k << "_hz = " << num(re[k]) << " " << num(im[k]) << "\n";
    out << "ep_gap_hz = " << num(gap) << "\n";
    return kExitOk;
}

// ---- pulse --------------------------------------------------------------

struct PulseOptions
{
    std::string channel;
    std::string format;
    std::optional<double> f_center, bandwidth, span;
    std::optional<std::size_t> samples;
    std::string out = "pulse.csv";
    std::string svg;
};

struct SeriesData
{
    std::vector<double> t, re, im;
};

SeriesData fetch(const cmt_timeseries *s)
{
    SeriesData d;
    const std::size_t n = cmt_timeseries_size(s);
    d.t.resize(n);
    d.re.resize(n);
    d.im.resize(n);
    check(cmt_timeseries_data(s, d.t.data(), d.re.data(), d.im.data(), n), "time series");
    return d;
}

std::vector<double> envelope(const SeriesData &d)
{
    std::vector<double> out(d.t.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::hypot(d.re[i], d.im[i]);
    return out;
}

int run_pulse(const GlobalOptions &g, const PulseOptions &o, std::ostream &out, std::ostream &err)
{
    const RunConfig c = resolve(g);
    cmt_pulse_spec spec = c.pulse;
    if (o.f_center)
        spec.f_center_hz = *o.f_center;
    if (o.bandwidth)
        spec.bandwidth_hz = *o.bandwidth;
    if (o.span)
        spec.span_s = *o.span;
    if (o.samples)
        spec.n_samples = *o.samples;

    cmt_timeseries *raw = nullptr;
    check(cmt_synth_pulse(&spec, &raw), "pulse");
    SeriesPtr input(raw);

    const std::string channel_path = !o.channel.empty() ? o.channel : c.channel_path;
    SpectrumPtr channel;
    if (!channel_path.empty())
        channel = read_file(channel_path, o.format);
    else
    {
        // Measurement-convention model response over a band wide enough to
        // hold every occupied bin of the pulse spectrum.
        const double half = 20.0 * spec.bandwidth_hz;
        cmt_spectrum *ch = nullptr;
        check(cmt_simulate(&c.model, spec.f_center_hz - half, spec.f_center_hz + half, 4001, CMT_FORWARD, 1, &ch),
              "pulse channel");
        channel.reset(ch);
    }

    int warning = 0;
    raw = nullptr;
    check(cmt_apply_channel(input.get(), channel.get(), spec.f_center_hz, &raw, &warning),
          channel_path.empty() ? "pulse" : "channel '" + channel_path + "'");
    SeriesPtr output(raw);
    if (warning)
        err << "warning: channel grid does not cover the whole pulse band; edge values were held\n";

    double delay = 0.0;
    check(cmt_estimate_delay(input.get(), output.get(), &delay), "pulse delay");

    const SeriesData in_d = fetch(input.get());
    const SeriesData out_d = fetch(output.get());
    write_columns(o.out, {"t_s", "in_re", "in_im", "out_re", "out_im"},
                  {&in_d.t, &in_d.re, &in_d.im, &out_d.re, &out_d.im});
    if (!o.svg.empty())
    {
        std::vector<double> t_ms(in_d.t.size());
        for (std::size_t i = 0; i < t_ms.size(); ++i)
            t_ms[i] = in_d.t[i] * 1e3;
        write_plot(o.svg, "Pulse envelopes", "Time (ms)", "|envelope|",
                   {{"input", t_ms, envelope(in_d)}, {"output", t_ms, envelope(out_d)}});
    }
    out << "delay_s = " << num(delay) << "\n";
    return kExitOk;
}

// ---- analyze ------------------------------------------------------------

struct AnalyzeOptions
{
    std::vector<std::string> files;
    std::string format;
    std::string kind = "dip";
    std::string gd_out;
    std::string svg;
};

const char *kind_name(cmt_resonance_kind k) { return k == CMT_PEAK ? "peak" : "dip"; }

int run_analyze(const AnalyzeOptions &o, std::ostream &out)
{
    if (o.files.empty() || o.files.size() > 2)
        fail(kExitUsage, "analyze: expected one or two data files");
    cmt_resonance_kind kind;
    if (o.kind == "dip")
        kind = CMT_DIP;
    else if (o.kind == "peak")
        kind = CMT_PEAK;
    else
        fail(kExitUsage, "--kind: expected 'dip' or 'peak', got '" + o.kind + "'");

    std::vector<SpectrumPtr> spectra;
    for (const auto &f : o.files)
        spectra.push_back(read_file(f, o.format));
    const cmt_spectrum *primary = spectra.front().get();
    const SpectrumData d = fetch(primary);

    out << "[analyze]\nfile = " << o.files.front() << "\npoints = " << d.size() << "\n";

    std::size_t count = 0;
    check(cmt_find_extrema(primary, nullptr, 0, &count), "extrema");
    std::vector<cmt_extremum> ext(count);
    check(cmt_find_extrema(primary, ext.data(), ext.size(), &count), "extrema");
    out << "extrema = " << count << "\n";
    for (const auto &e : ext)
        out << kind_name(e.kind) << " f_hz = " << num(e.f_hz) << " mag_db = " << num(e.mag_db) << "\n";

    cmt_resonance res{};
    const cmt_status st = cmt_fit_resonance(primary, kind, &res);
    if (st == CMT_OK)
    {
        out << "resonance = " << kind_name(kind) << "\n";
        out << "f_center_hz = " << num(res.f_center_hz) << "\n";
        out << "q_factor = " << num(res.q_factor) << "\n";
        out << "bandwidth_3db_hz = " << num(res.bandwidth_3db_hz) << "\n";
        out << "resonance_mag_db = " << num(res.peak_mag_db) << "\n";
    }
    else if (st == CMT_ERR_DATA || st == CMT_ERR_NUMERICAL)
        out << "resonance = unavailable (" << cmt_last_error() << ")\n";
    else
        check(st, "resonance fit");

    std::vector<double> tau(d.size());
    check(cmt_group_delay(primary, tau.data(), tau.size()), "group delay of '" + o.files.front() + "'");
    std::size_t imin = 0, imax = 0;
    for (std::size_t i = 1; i < tau.size(); ++i)
    {
        if (tau[i] < tau[imin])
            imin = i;
        if (tau[i] > tau[imax])
            imax = i;
    }
    out << "group_delay_min_s = " << num(tau[imin]) << " at f_hz = " << num(d.f[imin]) << "\n";
    out << "group_delay_max_s = " << num(tau[imax]) << " at f_hz = " << num(d.f[imax]) << "\n";
    if (st == CMT_OK)
    {
        std::size_t ic = 0;
        for (std::size_t i = 1; i < d.size(); ++i)
            if (std::abs(d.f[i] - res.f_center_hz) < std::abs(d.f[ic] - res.f_center_hz))
                ic = i;
        out << "group_delay_at_center_s = " << num(tau[ic]) << "\n";
    }
    if (!o.gd_out.empty())
        write_columns(o.gd_out, {"freq_hz", "group_delay_s"}, {&d.f, &tau});

    std::vector<PlotSeries> plot{{d.label, to_mhz(d.f), magnitude_db(d)}};
    if (spectra.size() == 2)
    {
        const SpectrumData r = fetch(spectra[1].get());
        std::vector<double> iso(d.size());
        double max_db = 0.0, f_at = 0.0;
        check(cmt_isolation_db(primary, spectra[1].get(), iso.data(), iso.size(), &max_db, &f_at),
              "isolation of '" + o.files[0] + "' vs '" + o.files[1] + "'");
        out << "max_isolation_db = " << num(max_db) << " at f_hz = " << num(f_at) << "\n";
        plot.push_back({r.label, to_mhz(r.f), magnitude_db(r)});
    }
    if (!o.svg.empty())
        write_plot(o.svg, "Measured transmission", "Frequency (MHz)", "|S| (dB)", plot);
    return kExitOk;
}

// ---- sweep --------------------------------------------------------------

struct SweepOptions
{
    std::string dir;
    std::string format;
    std::string out = "power_trend.csv";
};

int run_sweep(const SweepOptions &o, std::ostream &out, std::ostream &err)
{
    std::error_code ec;
    if (!fs::is_directory(o.dir, ec))
        fail(kExitData, "--dir: not a directory: " + o.dir);

    static const std::regex pattern(R"(^(.*)_(fwd|rev)_([+-]?[0-9]+(?:\.[0-9]+)?)dBm\.(csv|s1p|ts)$)");
    struct Pair
    {
        double power;
        std::string fwd, rev;
    };
    std::map<std::string, Pair> pairs;  // keyed by the power label text, sorted for determinism
    std::vector<fs::path> entries;
    for (const auto &e : fs::directory_iterator(o.dir, ec))
        if (e.is_regular_file())
            entries.push_back(e.path());
    if (ec)
        fail(kExitData, "--dir: cannot list '" + o.dir + "': " + ec.message());
    std::sort(entries.begin(), entries.end());

    for (const auto &p : entries)
    {
        std::smatch m;
        const std::string name = p.filename().string();
        if (!std::regex_match(name, m, pattern))
            continue;
        const std::string label = m[3].str();
        Pair &pair = pairs[label];
        pair.power = std::stod(label);
        std::string &slot = m[2].str() == "fwd" ? pair.fwd : pair.rev;
        if (!slot.empty())
            fail(kExitData, "sweep: two " + m[2].str() + " files for " + label + " dBm: " + slot + " and " + p.string());
        slot = p.string();
    }
    if (pairs.empty())
        fail(kExitData, "sweep: no '<name>_fwd_<power>dBm' / '<name>_rev_<power>dBm' files in " + o.dir);

    std::vector<double> powers;
    std::vector<SpectrumPtr> fwd, rev;
    for (const auto &[label, pair] : pairs)
    {
        if (pair.fwd.empty() || pair.rev.empty())
            fail(kExitData, "sweep: missing " + std::string(pair.fwd.empty() ? "fwd" : "rev") + " file for " + label +
                                " dBm (have " + (pair.fwd.empty() ? pair.rev : pair.fwd) + ")");
        powers.push_back(pair.power);
        fwd.push_back(read_file(pair.fwd, o.format));
        rev.push_back(read_file(pair.rev, o.format));
    }

    std::vector<const cmt_spectrum *> fp, rp;
    for (std::size_t i = 0; i < powers.size(); ++i)
    {
        fp.push_back(fwd[i].get());
        rp.push_back(rev[i].get());
    }
    std::vector<cmt_power_row> rows(powers.size());
    check(cmt_power_trend(powers.data(), fp.data(), rp.data(), powers.size(), rows.data()), "sweep");

    std::vector<double> cp, ci, cf, cb, cok;
    for (const auto &r : rows)
    {
        cp.push_back(r.power_dbm);
        const double nan = std::nan("");
        ci.push_back(r.ok ? r.max_isolation_db : nan);
        cf.push_back(r.ok ? r.dip_frequency_hz : nan);
        cb.push_back(r.ok ? r.bandwidth_3db_hz : nan);
        cok.push_back(r.ok ? 1.0 : 0.0);
        if (!r.ok)
            err << "warning: " << r.message << "\n";
    }
    write_columns(o.out, {"power_dbm", "max_isolation_db", "dip_frequency_hz", "bandwidth_3db_hz", "ok"},
                  {&cp, &ci, &cf, &cb, &cok});
    out << "power_dbm,max_isolation_db,dip_frequency_hz,bandwidth_3db_hz,ok\n";
    for (std::size_t i = 0; i < rows.size(); ++i)
        out << num(cp[i]) << "," << num(ci[i]) << "," << num(cf[i]) << "," << num(cb[i]) << "," << num(cok[i]) << "\n";
    return kExitOk;
}

} // namespace

int cli_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Chiral coupled-mode circulator toolkit", "chiralcmt"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", cmt_version());

    GlobalOptions global;
    add_global_options(app, global);

    SimulateOptions sim;
    auto *simulate = app.add_subcommand("simulate", "Model spectrum to CSV/Touchstone and SVG");
    simulate->add_option("--f-start", sim.f_start, "Sweep start, Hz (default f0 - 15 MHz)");
    simulate->add_option("--f-stop", sim.f_stop, "Sweep stop, Hz (default f0 + 15 MHz)");
    simulate->add_option("--points", sim.points, "Number of sweep points (default 201)");
    simulate->add_option("--direction", sim.direction, "forward | reverse");
    simulate->add_flag("--conjugate", sim.conjugate, "Export in the measurement phase convention");
    simulate->add_option("--out", sim.out, "Output spectrum file");
    simulate->add_option("--format", sim.format, "csv-complex | csv-db-phase | touchstone (default by extension)");
    simulate->add_option("--svg", sim.svg, "Magnitude plot");

    FitOptions fo;
    auto *fit = app.add_subcommand("fit", "Fit the model to a measured spectrum");
    fit->add_option("--data", fo.data, "Spectrum file to fit");
    fit->add_option("--format", fo.format, "Input format (default: detect)");
    fit->add_option("--objective", fo.objective, "db | complex");
    fit->add_option("--floor", fo.floor_db, "Magnitude floor for the dB objective");
    fit->add_flag("--background", fo.background, "Also fit the background path");
    fit->add_flag("--conjugated", fo.conjugated, "Data uses the measurement phase convention");
    fit->add_option("--starts", fo.starts, "Number of multi-starts");
    fit->add_option("--report", fo.report, "Write the fit report here");
    fit->add_option("--svg", fo.svg, "Data and fit overlay plot");
    fit->add_option("--fitted-out", fo.fitted_out, "Fitted model spectrum on the data grid");

    auto *eigen = app.add_subcommand("eigen", "Complex mode frequencies and exceptional-point gap");

    PulseOptions po;
    auto *pulse = app.add_subcommand("pulse", "Propagate a Gaussian envelope through a channel");
    pulse->add_option("--channel", po.channel, "Channel spectrum file (default: model response)");
    pulse->add_option("--format", po.format, "Channel file format (default: detect)");
    pulse->add_option("--f-center", po.f_center, "Carrier frequency, Hz");
    pulse->add_option("--bandwidth", po.bandwidth, "Spectral FWHM of the envelope, Hz");
    pulse->add_option("--span", po.span, "Time span, s");
    pulse->add_option("--samples", po.samples, "Number of samples (power of two)");
    pulse->add_option("--out", po.out, "Envelope CSV");
    pulse->add_option("--svg", po.svg, "Envelope plot");

    AnalyzeOptions ao;
    auto *analyze = app.add_subcommand("analyze", "Extrema, Q, group delay and isolation of measured spectra");
    analyze->add_option("files", ao.files, "Transmitting-path file, then optionally the isolated-path file")->required();
    analyze->add_option("--format", ao.format, "Input format (default: detect)");
    analyze->add_option("--kind", ao.kind, "dip | peak");
    analyze->add_option("--gd-out", ao.gd_out, "Group delay trace CSV");
    analyze->add_option("--svg", ao.svg, "Magnitude plot");

    SweepOptions so;
    auto *sweep = app.add_subcommand("sweep", "Power trend table from a directory of labeled sweeps");
    sweep->add_option("--dir", so.dir, "Directory of <name>_fwd_<P>dBm / <name>_rev_<P>dBm files")->required();
    sweep->add_option("--format", so.format, "Input format (default: detect)");
    sweep->add_option("--out", so.out, "Table CSV");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try
    {
        if (simulate->parsed())
            return run_simulate(global, sim, out);
        if (fit->parsed())
            return run_fit(global, fo, out);
        if (eigen->parsed())
            return run_eigen(global, out);
        if (pulse->parsed())
            return run_pulse(global, po, out, err);
        if (analyze->parsed())
            return run_analyze(ao, out);
        if (sweep->parsed())
            return run_sweep(so, out, err);
    }
    catch (const Failure &f)
    {
        err << "chiralcmt: " << f.message << "\n";
        return f.code;
    }
    catch (const std::exception &e)
    {
        err << "chiralcmt: internal error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}

} // namespace chiralcmt::cli
