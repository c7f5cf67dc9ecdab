#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ostlab/errors.hpp"
#include "ostlab/spectral_core.hpp"

namespace ostlab {

enum class DatumFamily { LORENTZ_POWER, ODD_POWER, GAUSSIAN_DERIVATIVE };

inline std::string_view to_string(DatumFamily f) {
    switch (f) {
    case DatumFamily::LORENTZ_POWER: return "lorentz_power";
    case DatumFamily::ODD_POWER: return "odd_power";
    case DatumFamily::GAUSSIAN_DERIVATIVE: return "gaussian_derivative";
    }
    return "?";
}

// lorentz_power(a, r):       a (1 + x^2)^{-r/2}
// odd_power(a, r):           a x (1 + x^2)^{-(r+1)/2}
// gaussian_derivative(a, s): a d/dx e^{-x^2/s^2}
struct DatumDescriptor {
    DatumFamily family = DatumFamily::LORENTZ_POWER;
    double amplitude = 0.05;
    double parameter = 3.0;

    bool operator==(const DatumDescriptor&) const = default;
};

struct Datum {
    Field field;
    double mass;
    double decay_rate;  // algebraic decay exponent; +inf for super-algebraic families
    bool zero_mean_family;
    bool decay_above_two;  // strict x^{-2} decay hypothesis for the asymptotic profile
    std::string tail_class;
};

inline void validate(const DatumDescriptor& d) {
    if (!std::isfinite(d.amplitude)) throw DomainError("datum amplitude must be finite");
    if (!(d.parameter > 0.0) || !std::isfinite(d.parameter)) throw DomainError("datum parameter must be positive");
    if (d.family == DatumFamily::ODD_POWER && !(d.parameter > 1.0))
        throw DomainError("odd_power requires r > 1 for an integrable datum");
    if (d.family == DatumFamily::LORENTZ_POWER && !(d.parameter > 1.0))
        throw DomainError("lorentz_power requires r > 1 for an integrable datum");
}

inline double datum_value(const DatumDescriptor& d, double x) {
    switch (d.family) {
    case DatumFamily::LORENTZ_POWER: return d.amplitude * std::pow(1.0 + x * x, -d.parameter / 2.0);
    case DatumFamily::ODD_POWER: return d.amplitude * x * std::pow(1.0 + x * x, -(d.parameter + 1.0) / 2.0);
    case DatumFamily::GAUSSIAN_DERIVATIVE: {
        const double s2 = d.parameter * d.parameter;
        return d.amplitude * (-2.0 * x / s2) * std::exp(-x * x / s2);
    }
    }
    return 0.0;
}

inline double datum_decay_rate(const DatumDescriptor& d) {
    return d.family == DatumFamily::GAUSSIAN_DERIVATIVE ? std::numeric_limits<double>::infinity() : d.parameter;
}

inline Datum datum_build(const DatumDescriptor& d, const Grid& grid) {
    validate(d);
    std::vector<double> v(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) v[j] = datum_value(d, grid.x(j));
    // x_0 = -L is also the periodic image of +L: sample the seam symmetrically.
    v[0] = 0.5 * (datum_value(d, -grid.half_length()) + datum_value(d, grid.half_length()));
    Field f(grid, 0.0, std::move(v));
    const double rate = datum_decay_rate(d);
    const bool zero_mean = d.family != DatumFamily::LORENTZ_POWER;
    std::ostringstream tail;
    if (std::isinf(rate))
        tail << "super-algebraic";
    else
        tail << "algebraic x^-" << rate;
    const double mass = f.mass();
    return {std::move(f), mass, rate, zero_mean, rate > 2.0, tail.str()};
}

}  // namespace ostlab
