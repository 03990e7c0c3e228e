#include "io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace chiralcmt::io
{

namespace
{
constexpr double kDegToRad = std::numbers::pi / 180.0;

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true)
    {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string_view> tokens(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size())
    {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
            ++i;
        const std::size_t start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])))
            ++i;
        if (i > start)
            out.push_back(s.substr(start, i - start));
    }
    return out;
}

std::string where(const std::string &source, std::size_t line)
{
    return source + ":" + std::to_string(line);
}

double parse_number(std::string_view cell, const std::string &source, std::size_t line)
{
    double v = 0.0;
    if (!cell.empty() && cell.front() == '+')
        cell.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty() || !std::isfinite(v))
        throw DataError(where(source, line) + ": non-numeric cell '" + std::string(cell) + "'");
    return v;
}

struct Row
{
    std::size_t line;
    double freq;
    Complex value;
};

Spectrum build(std::vector<Row> rows, const std::string &source, const std::string &label)
{
    if (rows.size() < 2)
        throw DataError(source + ": at least two data rows are required");
    for (std::size_t i = 1; i < rows.size(); ++i)
    {
        if (rows[i].freq == rows[i - 1].freq)
            throw DataError(where(source, rows[i].line) + ": duplicate frequency " + format_double(rows[i].freq));
        if (rows[i].freq < rows[i - 1].freq)
            throw DataError(where(source, rows[i].line) + ": non-monotonic frequencies");
    }
    std::vector<double> f;
    std::vector<Complex> v;
    f.reserve(rows.size());
    v.reserve(rows.size());
    for (const auto &r : rows)
    {
        f.push_back(r.freq);
        v.push_back(r.value);
    }
    return Spectrum(std::move(f), std::move(v), label);
}

std::vector<std::string_view> lines_of(std::string_view text)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= text.size())
    {
        auto pos = text.find('\n', start);
        std::string_view line = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        out.push_back(line);
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

Spectrum parse_csv(std::string_view text, Format format, const std::string &source, const std::string &label)
{
    const std::string expected = format == Format::CsvComplex ? "freq_hz,re,im" : "freq_hz,mag_db,phase_deg";
    const auto lines = lines_of(text);
    std::vector<Row> rows;
    bool header_seen = false;
    for (std::size_t i = 0; i < lines.size(); ++i)
    {
        const std::size_t line_no = i + 1;
        const auto line = trim(lines[i]);
        if (line.empty() || line.front() == '#')
            continue;
        if (!header_seen)
        {
            std::string compact;
            for (char c : line)
                if (!std::isspace(static_cast<unsigned char>(c)))
                    compact.push_back(c);
            if (lower(compact) != expected)
                throw DataError(where(source, line_no) + ": malformed header '" + std::string(line) + "', expected '" +
                                expected + "'");
            header_seen = true;
            continue;
        }
        const auto cells = split(line, ',');
        if (cells.size() != 3)
            throw DataError(where(source, line_no) + ": expected 3 cells, found " + std::to_string(cells.size()));
        const double f = parse_number(cells[0], source, line_no);
        const double a = parse_number(cells[1], source, line_no);
        const double b = parse_number(cells[2], source, line_no);
        const Complex value = format == Format::CsvComplex ? Complex(a, b) : std::polar(std::pow(10.0, a / 20.0), b * kDegToRad);
        rows.push_back({line_no, f, value});
    }
    if (!header_seen)
        throw DataError(source + ": missing header '" + expected + "'");
    return build(std::move(rows), source, label);
}

Spectrum parse_touchstone(std::string_view text, const std::string &source, const std::string &label)
{
    double unit = 1e9;
    enum class Kind { MA, DB, RI } kind = Kind::MA;
    bool option_seen = false;
    std::vector<Row> rows;

    const auto lines = lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i)
    {
        const std::size_t line_no = i + 1;
        std::string_view line = lines[i];
        if (const auto bang = line.find('!'); bang != std::string_view::npos)
            line = line.substr(0, bang);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[')
            throw DataError(where(source, line_no) + ": unsupported Touchstone 2.0 keyword '" + std::string(line) + "'");
        if (line.front() == '#')
        {
            if (option_seen)
                continue;
            option_seen = true;
            const auto toks = tokens(line.substr(1));
            for (std::size_t t = 0; t < toks.size(); ++t)
            {
                const std::string tok = lower(toks[t]);
                if (tok == "hz")
                    unit = 1.0;
                else if (tok == "khz")
                    unit = 1e3;
                else if (tok == "mhz")
                    unit = 1e6;
                else if (tok == "ghz")
                    unit = 1e9;
                else if (tok == "s")
                    continue;
                else if (tok == "ma")
                    kind = Kind::MA;
                else if (tok == "db")
                    kind = Kind::DB;
                else if (tok == "ri")
                    kind = Kind::RI;
                else if (tok == "r")
                {
                    if (t + 1 >= toks.size())
                        throw DataError(where(source, line_no) + ": option 'R' needs a resistance");
                    const double r = parse_number(toks[++t], source, line_no);
                    if (!(r > 0.0))
                        throw DataError(where(source, line_no) + ": reference resistance must be positive");
                }
                else
                    throw DataError(where(source, line_no) + ": unsupported Touchstone option '" + std::string(toks[t]) + "'");
            }
            continue;
        }
        const auto toks = tokens(line);
        if (toks.size() != 3)
            throw DataError(where(source, line_no) + ": only 1-port Touchstone data is supported (expected 3 values, found " +
                            std::to_string(toks.size()) + ")");
        const double f = parse_number(toks[0], source, line_no) * unit;
        const double a = parse_number(toks[1], source, line_no);
        const double b = parse_number(toks[2], source, line_no);
        Complex value;
        switch (kind)
        {
        case Kind::RI: value = {a, b}; break;
        case Kind::MA: value = std::polar(a, b * kDegToRad); break;
        case Kind::DB: value = std::polar(std::pow(10.0, a / 20.0), b * kDegToRad); break;
        }
        rows.push_back({line_no, f, value});
    }
    return build(std::move(rows), source, label);
}

std::string read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
} // namespace

std::string format_double(double v)
{
    char buf[64];
    // Whole numbers such as frequencies in Hz stay in plain digits.
    const bool whole = std::isfinite(v) && std::abs(v) < 1e17 && v == std::trunc(v);
    const auto [ptr, ec] = whole ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed)
                                 : std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{})
        throw ContractError("format_double: conversion failed");
    return std::string(buf, ptr);
}

Format parse_format(std::string_view name)
{
    const std::string n = lower(name);
    if (n == "csv-complex")
        return Format::CsvComplex;
    if (n == "csv-db-phase")
        return Format::CsvDbPhase;
    if (n == "touchstone")
        return Format::Touchstone;
    throw ContractError("unknown spectrum format '" + std::string(name) + "'");
}

std::string_view format_name(Format format)
{
    switch (format)
    {
    case Format::CsvComplex: return "csv-complex";
    case Format::CsvDbPhase: return "csv-db-phase";
    case Format::Touchstone: return "touchstone";
    }
    return "csv-complex";
}

Format detect_format(const std::string &path)
{
    const std::string ext = lower(std::filesystem::path(path).extension().string());
    if (ext == ".s1p" || ext == ".ts")
        return Format::Touchstone;
    const std::string text = read_file(path);
    for (const auto raw : lines_of(text))
    {
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        std::string compact;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c)))
                compact.push_back(c);
        if (lower(compact) == "freq_hz,mag_db,phase_deg")
            return Format::CsvDbPhase;
        break;
    }
    return Format::CsvComplex;
}

Spectrum parse_spectrum(std::string_view text, Format format, const std::string &source)
{
    const std::string label = std::filesystem::path(source).stem().string();
    if (format == Format::Touchstone)
        return parse_touchstone(text, source, label);
    return parse_csv(text, format, source, label);
}

Spectrum read_spectrum(const std::string &path, Format format)
{
    return parse_spectrum(read_file(path), format, path);
}

std::string format_spectrum(const Spectrum &spectrum, Format format)
{
    std::string out;
    switch (format)
    {
    case Format::CsvComplex: out = "freq_hz,re,im\n"; break;
    case Format::CsvDbPhase: out = "freq_hz,mag_db,phase_deg\n"; break;
    case Format::Touchstone: out = "! chiralcmt 1-port export\n# Hz S RI R 50\n"; break;
    }
    const char sep = format == Format::Touchstone ? ' ' : ',';
    for (std::size_t i = 0; i < spectrum.size(); ++i)
    {
        const Complex v = spectrum.values()[i];
        double a = v.real();
        double b = v.imag();
        if (format == Format::CsvDbPhase)
        {
            const double mag = std::abs(v);
            a = mag > 0.0 ? 20.0 * std::log10(mag) : -1000.0;
            b = std::arg(v) / kDegToRad;
        }
        out += format_double(spectrum.freqs_hz()[i]);
        out += sep;
        out += format_double(a);
        out += sep;
        out += format_double(b);
        out += '\n';
    }
    return out;
}

void write_text(const std::string &path, std::string_view text)
{
    if (std::filesystem::is_directory(path))
        throw IoError("cannot write '" + path + "': path is a directory");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw IoError("write to '" + path + "' failed");
}

void write_spectrum(const Spectrum &spectrum, const std::string &path, Format format)
{
    write_text(path, format_spectrum(spectrum, format));
}

void write_columns_csv(const std::string &path, std::span<const std::string> headers,
                       std::span<const std::vector<double>> columns)
{
    require(!headers.empty() && headers.size() == columns.size(), "write_columns_csv: header/column count mismatch");
    const std::size_t rows = columns.front().size();
    for (const auto &c : columns)
        require(c.size() == rows, "write_columns_csv: columns differ in length");

    std::string out;
    for (std::size_t j = 0; j < headers.size(); ++j)
    {
        if (j)
            out += ',';
        out += headers[j];
    }
    out += '\n';
    for (std::size_t i = 0; i < rows; ++i)
    {
        for (std::size_t j = 0; j < columns.size(); ++j)
        {
            if (j)
                out += ',';
            out += format_double(columns[j][i]);
        }
        out += '\n';
    }
    write_text(path, out);
}

} // namespace chiralcmt::io
