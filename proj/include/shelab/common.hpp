#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace shelab {

/// Series truncation could not reach the requested tolerance within the
/// term budget; `achieved` is the tail bound that was reached.
struct truncation_error : std::runtime_error {
    double achieved;
    truncation_error(const std::string& what, double achieved_bound)
        : std::runtime_error(what), achieved(achieved_bound) {}
};

/// Non-finite intermediate value, overflow, or failed numerical contract.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Neumaier compensated accumulator. Summation order still matters for the
/// final bits, so callers that need reproducibility must fix the order.
struct Kahan {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kEuler = 2.718281828459045235360287471352662498;

} // namespace shelab
