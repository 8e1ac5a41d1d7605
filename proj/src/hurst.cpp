#include "silt/hurst.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "silt/error.hpp"

namespace silt {

Rational Rational::make(std::int64_t num, std::int64_t den)
{
    if (den == 0) throw InvalidArgument("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return {num, den};
}

Hurst::Hurst(double value) : value_(value)
{
    if (!(value > 0.0 && value < 1.0))
        throw InvalidArgument(fmt::format("Hurst parameter must lie in (0,1), got {}", value));
}

Hurst::Hurst(Rational exact) : value_(exact.value()), exact_(exact)
{
    if (!(exact.num > 0 && exact.num < exact.den))
        throw InvalidArgument(
            fmt::format("Hurst parameter must lie in (0,1), got {}/{}", exact.num, exact.den));
}

namespace {

std::int64_t parse_int(std::string_view s)
{
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw InvalidArgument(fmt::format("cannot parse integer '{}'", s));
    return v;
}

}  // namespace

Hurst Hurst::parse(std::string_view text)
{
    if (const auto slash = text.find('/'); slash != std::string_view::npos)
        return Hurst(Rational::make(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1))));
    double v = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size())
        throw InvalidArgument(fmt::format("cannot parse Hurst parameter '{}'", text));
    return Hurst(v);
}

std::string Hurst::to_string() const
{
    if (exact_) return fmt::format("{}/{}", exact_->num, exact_->den);
    return fmt::format("{:.17g}", value_);
}

}  // namespace silt
