#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace silt {

/// Exact rational p/q with q > 0, stored reduced.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational make(std::int64_t num, std::int64_t den);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

/// Hurst parameter in (0,1), optionally carrying its exact rational form.
///
/// Regime boundaries (H = 1/d, H = 3/(2d), H = 3/4) can only be decided
/// exactly when the rational form is present.
class Hurst {
public:
    explicit Hurst(double value);
    explicit Hurst(Rational exact);
    Hurst(std::int64_t num, std::int64_t den) : Hurst(Rational::make(num, den)) {}

    /// Accepts "p/q" (exact) or a decimal literal (inexact).
    static Hurst parse(std::string_view text);

    double value() const { return value_; }
    const std::optional<Rational>& exact() const { return exact_; }
    std::string to_string() const;

private:
    double value_;
    std::optional<Rational> exact_;
};

}  // namespace silt
