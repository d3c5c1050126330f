#include "dse/priors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "dse/errors.hpp"

namespace dse {
namespace {

void check_shape(double alpha, double beta)
{
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
        throw DomainError("beta distribution requires alpha > 0 and beta > 0");
}

double round_half_even(double x)
{
    double r = std::round(x);
    if (std::abs(x - std::trunc(x)) == 0.5)
        r = 2.0 * std::round(x / 2.0);
    return r;
}

using ConfigSet = std::unordered_set<Configuration, ConfigurationHash>;

}  // namespace

double beta_pdf(double x, double alpha, double beta)
{
    check_shape(alpha, beta);
    if (!(x >= 0.0 && x <= 1.0))
        throw DomainError("beta density is defined on [0, 1]");

    auto endpoint = [](double exponent) {
        if (exponent < 0.0)
            return std::numeric_limits<double>::infinity();
        return exponent == 0.0 ? 1.0 : 0.0;
    };
    double log_norm = std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta);
    if (x == 0.0 || x == 1.0) {
        double head = x == 0.0 ? endpoint(alpha - 1.0) : 1.0;
        double tail = x == 1.0 ? endpoint(beta - 1.0) : 1.0;
        double v = head * tail;
        return std::isinf(v) || v == 0.0 ? v : std::exp(log_norm) * v;
    }
    return std::exp(log_norm + (alpha - 1.0) * std::log(x) + (beta - 1.0) * std::log1p(-x));
}

double sample_gamma(double shape, Rng& rng)
{
    if (!(shape > 0.0) || !std::isfinite(shape))
        throw DomainError("gamma distribution requires shape > 0");
    if (shape < 1.0) {
        double boost = std::pow(rng.uniform_open(), 1.0 / shape);
        return sample_gamma(shape + 1.0, rng) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z, v;
        do {
            z = rng.normal();
            v = 1.0 + c * z;
        } while (v <= 0.0);
        v = v * v * v;
        double u = rng.uniform_open();
        if (u < 1.0 - 0.0331 * z * z * z * z)
            return d * v;
        if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v)))
            return d * v;
    }
}

double sample_beta(double alpha, double beta, Rng& rng)
{
    check_shape(alpha, beta);
    for (;;) {
        double x = sample_gamma(alpha, rng);
        double y = sample_gamma(beta, rng);
        if (x + y > 0.0)
            return x / (x + y);
    }
}

Value value_from_unit(const Parameter& param, double u)
{
    u = std::clamp(u, 0.0, 1.0);
    switch (param.kind()) {
    case ParameterKind::real:
        return std::clamp(param.lower() + u * (param.upper() - param.lower()), param.lower(), param.upper());
    case ParameterKind::integer: {
        double x = round_half_even(param.lower() + u * (param.upper() - param.lower()));
        return static_cast<std::int64_t>(std::clamp(x, param.lower(), param.upper()));
    }
    case ParameterKind::ordinal: {
        const auto& values = param.values();
        double x = param.lower() + u * (param.upper() - param.lower());
        auto hi = std::lower_bound(values.begin(), values.end(), x);
        if (hi == values.end())
            return values.back();
        if (hi == values.begin())
            return values.front();
        auto lo = std::prev(hi);
        return (x - *lo <= *hi - x) ? *lo : *hi;
    }
    case ParameterKind::categorical: {
        const auto& probs = param.prior().probabilities;
        double cumulative = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t k = 0; k < probs.size(); ++k) {
            if (probs[k] <= 0.0)
                continue;
            last_positive = k;
            cumulative += probs[k];
            if (u < cumulative)
                return param.levels()[k];
        }
        return param.levels()[last_positive];
    }
    }
    throw DomainError("unknown parameter kind");
}

Value sample_parameter(const Parameter& param, Rng& rng)
{
    if (param.kind() == ParameterKind::categorical)
        return value_from_unit(param, rng.uniform());
    return value_from_unit(param, sample_beta(param.prior().alpha, param.prior().beta, rng));
}

Value sample_uniform_value(const Parameter& param, Rng& rng)
{
    if (param.kind() == ParameterKind::real)
        return value_from_unit(param, rng.uniform());
    return param.at(rng.below(*param.size()));
}

Configuration sample_configuration(const DesignSpace& space, Rng& rng)
{
    Configuration c;
    c.values.reserve(space.dimension());
    for (const auto& p : space.parameters())
        c.values.push_back(sample_parameter(p, rng));
    return c;
}

Configuration sample_uniform_configuration(const DesignSpace& space, Rng& rng)
{
    Configuration c;
    c.values.reserve(space.dimension());
    for (const auto& p : space.parameters())
        c.values.push_back(sample_uniform_value(p, rng));
    return c;
}

std::vector<Configuration> warmup_sample(const DesignSpace& space, std::size_t n, Rng& rng)
{
    if (n == 0)
        throw DomainError("warm-up sample size must be positive");
    auto cardinality = space.cardinality();
    if (cardinality && n >= *cardinality)
        return enumerate_space(space);

    std::vector<Configuration> out;
    ConfigSet seen;
    for (std::size_t attempt = 0; attempt < 100 * n && out.size() < n; ++attempt) {
        Configuration c = sample_configuration(space, rng);
        if (seen.insert(c).second)
            out.push_back(std::move(c));
    }
    if (out.size() < n && cardinality && *cardinality <= kDefaultEnumerationCap) {
        std::vector<Configuration> rest;
        space.for_each_configuration([&](const Configuration& c) {
            if (!seen.contains(c))
                rest.push_back(c);
        });
        rng.shuffle(std::span<Configuration>(rest));
        rest.resize(std::min(rest.size(), n - out.size()));
        for (auto& c : rest)
            out.push_back(std::move(c));
    }
    return out;
}

}  // namespace dse
