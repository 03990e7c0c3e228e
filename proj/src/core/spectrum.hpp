#ifndef CHIRALCMT_SPECTRUM_HPP
#define CHIRALCMT_SPECTRUM_HPP

#include "error.hpp"
#include "numerics.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace chiralcmt
{

// Complex transmission sampled on a strictly increasing frequency grid (Hz).
class Spectrum
{
public:
    Spectrum(std::vector<double> freqs_hz, std::vector<Complex> values, std::string label = {})
        : freqs_hz_(std::move(freqs_hz)), values_(std::move(values)), label_(std::move(label))
    {
        if (freqs_hz_.size() != values_.size())
            throw ContractError("Spectrum: frequency and value counts differ");
        if (freqs_hz_.size() < 2)
            throw ContractError("Spectrum: at least two points are required");
        for (std::size_t i = 0; i < freqs_hz_.size(); ++i)
        {
            if (!std::isfinite(freqs_hz_[i]))
                throw ContractError("Spectrum: non-finite frequency at index " + std::to_string(i));
            if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag()))
                throw ContractError("Spectrum: non-finite value at index " + std::to_string(i));
            if (i > 0 && !(freqs_hz_[i] > freqs_hz_[i - 1]))
                throw ContractError("Spectrum: frequencies must be strictly increasing (index " + std::to_string(i) + ")");
        }
    }

    std::size_t size() const noexcept { return freqs_hz_.size(); }
    const std::vector<double> &freqs_hz() const noexcept { return freqs_hz_; }
    const std::vector<Complex> &values() const noexcept { return values_; }
    const std::string &label() const noexcept { return label_; }

    bool same_grid(const Spectrum &other) const noexcept { return freqs_hz_ == other.freqs_hz_; }

private:
    std::vector<double> freqs_hz_;
    std::vector<Complex> values_;
    std::string label_;
};

} // namespace chiralcmt

#endif
