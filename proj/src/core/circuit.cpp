#include "circuit.hpp"

#include "error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace chiralcmt::circuit
{

namespace
{
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_positive(double v, const char *what)
{
    if (!std::isfinite(v) || !(v > 0.0))
        throw ContractError(std::string(what) + " must be finite and positive");
}
} // namespace

void CircuitParams::validate() const
{
    require_positive(inductance_h, "inductance_h");
    if (c_stray_f != 0.0)
        require_positive(c_stray_f, "c_stray_f");
    if (c_edge_f)
        require_positive(*c_edge_f, "c_edge_f");
    if (chern_number < 1)
        throw ContractError("chern_number must be at least 1");
    require_positive(disk_radius_m, "disk_radius_m");
}

double lc_resonance_hz(double inductance_h, double capacitance_f)
{
    require_positive(inductance_h, "lc_resonance_hz: inductance");
    require_positive(capacitance_f, "lc_resonance_hz: capacitance");
    return 1.0 / (kTwoPi * std::sqrt(inductance_h * capacitance_f));
}

double stray_capacitance_f(double inductance_h, double frequency_hz)
{
    require_positive(inductance_h, "stray_capacitance_f: inductance");
    require_positive(frequency_hz, "stray_capacitance_f: frequency");
    const double omega = kTwoPi * frequency_hz;
    return 1.0 / (inductance_h * omega * omega);
}

double edge_impedance_ohm(int chern_number)
{
    if (chern_number < 1)
        throw ContractError("edge_impedance_ohm: Chern number must be at least 1");
    return kPlanck / (static_cast<double>(chern_number) * kElementaryCharge * kElementaryCharge);
}

double emp_frequency_hz(double radius_m, double velocity_m_per_s)
{
    require_positive(radius_m, "emp_frequency_hz: radius");
    require_positive(velocity_m_per_s, "emp_frequency_hz: velocity");
    return velocity_m_per_s / (kTwoPi * radius_m);
}

} // namespace chiralcmt::circuit
