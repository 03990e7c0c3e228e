#ifndef CHIRALCMT_CIRCUIT_HPP
#define CHIRALCMT_CIRCUIT_HPP

#include <optional>

namespace chiralcmt::circuit
{

// CODATA 2018 exact values.
constexpr double kPlanck = 6.62607015e-34;           // J s
constexpr double kElementaryCharge = 1.602176634e-19; // C

struct CircuitParams
{
    double inductance_h = 180e-9;
    double c_stray_f = 0.0;
    std::optional<double> c_edge_f;  // descriptive only
    int chern_number = 1;
    double disk_radius_m = 100e-6;

    void validate() const;
};

// 1 / (2 pi sqrt(L C))
double lc_resonance_hz(double inductance_h, double capacitance_f);

// 1 / (L (2 pi f)^2)
double stray_capacitance_f(double inductance_h, double frequency_hz);

// h / (C e^2)
double edge_impedance_ohm(int chern_number);

// Fundamental edge-plasmon mode with wavelength equal to the disk circumference.
double emp_frequency_hz(double radius_m, double velocity_m_per_s);

} // namespace chiralcmt::circuit

#endif
