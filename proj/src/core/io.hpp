#ifndef CHIRALCMT_IO_HPP
#define CHIRALCMT_IO_HPP

#include "spectrum.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chiralcmt::io
{

enum class Format
{
    CsvComplex,   // freq_hz,re,im
    CsvDbPhase,   // freq_hz,mag_db,phase_deg
    Touchstone,   // 1-port, "# <unit> S <MA|DB|RI> R <ohm>"
};

// "csv-complex", "csv-db-phase", "touchstone". Throws ContractError otherwise.
Format parse_format(std::string_view name);
std::string_view format_name(Format format);

// Touchstone by extension (.s1p, .ts); CSV flavor by header sniffing.
Format detect_format(const std::string &path);

Spectrum read_spectrum(const std::string &path, Format format);
Spectrum parse_spectrum(std::string_view text, Format format, const std::string &source = "<memory>");

void write_spectrum(const Spectrum &spectrum, const std::string &path, Format format);
std::string format_spectrum(const Spectrum &spectrum, Format format);

// Writes equal-length numeric columns under a header row.
void write_columns_csv(const std::string &path, std::span<const std::string> headers,
                       std::span<const std::vector<double>> columns);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

void write_text(const std::string &path, std::string_view text);

} // namespace chiralcmt::io

#endif
