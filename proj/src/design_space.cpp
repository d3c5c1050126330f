#include "dse/design_space.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "dse/errors.hpp"

namespace dse {
namespace {

std::string field_of(const std::string& name)
{
    return "input_parameters." + name;
}

void validate_beta_prior(const std::string& name, const Prior& prior)
{
    if (prior.is_categorical())
        throw ValidationError(field_of(name) + ".prior",
                              "probability-list priors apply only to categorical parameters");
    if (!(prior.alpha > 0.0) || !(prior.beta > 0.0) || !std::isfinite(prior.alpha)
        || !std::isfinite(prior.beta))
        throw ValidationError(field_of(name) + ".prior", "beta prior requires alpha > 0 and beta > 0");
}


std::optional<double> parse_double(std::string_view text)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
        return std::nullopt;
    return v;
}

std::string describe(const Value& v)
{
    if (auto d = std::get_if<double>(&v))
        return format_number(*d);
    if (auto i = std::get_if<std::int64_t>(&v))
        return std::to_string(*i);
    return std::get<std::string>(v);
}

}  // namespace

std::string_view to_string(ParameterKind kind)
{
    switch (kind) {
    case ParameterKind::real: return "real";
    case ParameterKind::integer: return "integer";
    case ParameterKind::ordinal: return "ordinal";
    case ParameterKind::categorical: return "categorical";
    }
    return "unknown";
}

Parameter Parameter::real(std::string name, double lower, double upper, Prior prior)
{
    if (!std::isfinite(lower) || !std::isfinite(upper) || lower > upper)
        throw ValidationError(field_of(name) + ".values", "real bounds must satisfy lower <= upper");
    validate_beta_prior(name, prior);
    Parameter p;
    p.name_ = std::move(name);
    p.kind_ = ParameterKind::real;
    p.lower_ = lower;
    p.upper_ = upper;
    p.prior_ = std::move(prior);
    return p;
}

Parameter Parameter::integer(std::string name, std::int64_t lower, std::int64_t upper, Prior prior)
{
    if (lower > upper)
        throw ValidationError(field_of(name) + ".values", "integer bounds must satisfy lower <= upper");
    validate_beta_prior(name, prior);
    Parameter p;
    p.name_ = std::move(name);
    p.kind_ = ParameterKind::integer;
    p.lower_ = static_cast<double>(lower);
    p.upper_ = static_cast<double>(upper);
    p.prior_ = std::move(prior);
    return p;
}

Parameter Parameter::ordinal(std::string name, std::vector<double> values, Prior prior)
{
    if (values.empty())
        throw ValidationError(field_of(name) + ".values", "ordinal value list is empty");
    if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); }))
        throw ValidationError(field_of(name) + ".values", "ordinal values must be finite");
    std::sort(values.begin(), values.end());
    if (std::adjacent_find(values.begin(), values.end()) != values.end())
        throw ValidationError(field_of(name) + ".values", "ordinal values must be distinct");
    validate_beta_prior(name, prior);
    Parameter p;
    p.name_ = std::move(name);
    p.kind_ = ParameterKind::ordinal;
    p.lower_ = values.front();
    p.upper_ = values.back();
    p.values_ = std::move(values);
    p.prior_ = std::move(prior);
    return p;
}

Parameter Parameter::categorical(std::string name, std::vector<std::string> levels, Prior prior)
{
    if (levels.empty())
        throw ValidationError(field_of(name) + ".values", "categorical level list is empty");
    std::unordered_set<std::string> seen;
    for (const auto& level : levels) {
        if (!seen.insert(level).second)
            throw ValidationError(field_of(name) + ".values", "duplicate categorical level '" + level + "'");
        if (level.empty() || level.find_first_of(",\n\r\"") != std::string::npos)
            throw ValidationError(field_of(name) + ".values",
                                  "categorical level '" + level + "' is empty or contains a CSV delimiter");
    }
    if (prior.shape == PriorShape::uniform) {
        prior = Prior::categorical(std::vector<double>(levels.size(), 1.0 / static_cast<double>(levels.size())));
    } else if (!prior.is_categorical()) {
        throw ValidationError(field_of(name) + ".prior", "beta priors apply only to real, integer and ordinal parameters");
    }
    if (prior.probabilities.size() != levels.size())
        throw ValidationError(field_of(name) + ".prior", "expected " + std::to_string(levels.size())
                                                             + " probabilities, got "
                                                             + std::to_string(prior.probabilities.size()));
    double sum = 0.0;
    for (double q : prior.probabilities) {
        if (!(q >= 0.0) || !std::isfinite(q))
            throw ValidationError(field_of(name) + ".prior", "probabilities must be non-negative");
        sum += q;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError(field_of(name) + ".prior", "probabilities sum to " + format_number(sum));

    Parameter p;
    p.name_ = std::move(name);
    p.kind_ = ParameterKind::categorical;
    p.lower_ = 0.0;
    p.upper_ = static_cast<double>(levels.size() - 1);
    p.levels_ = std::move(levels);
    p.prior_ = std::move(prior);
    return p;
}

std::optional<std::uint64_t> Parameter::size() const
{
    switch (kind_) {
    case ParameterKind::real: return std::nullopt;
    case ParameterKind::integer: return static_cast<std::uint64_t>(upper_ - lower_) + 1;
    case ParameterKind::ordinal: return values_.size();
    case ParameterKind::categorical: return levels_.size();
    }
    return std::nullopt;
}

bool Parameter::contains(const Value& v) const
{
    switch (kind_) {
    case ParameterKind::real: {
        auto d = std::get_if<double>(&v);
        return d && std::isfinite(*d) && *d >= lower_ && *d <= upper_;
    }
    case ParameterKind::integer: {
        auto i = std::get_if<std::int64_t>(&v);
        return i && static_cast<double>(*i) >= lower_ && static_cast<double>(*i) <= upper_;
    }
    case ParameterKind::ordinal: {
        auto d = std::get_if<double>(&v);
        return d && std::binary_search(values_.begin(), values_.end(), *d);
    }
    case ParameterKind::categorical: {
        auto s = std::get_if<std::string>(&v);
        return s && std::find(levels_.begin(), levels_.end(), *s) != levels_.end();
    }
    }
    return false;
}

double Parameter::encode(const Value& v) const
{
    if (!contains(v))
        throw DomainError("value '" + describe(v) + "' outside the domain of parameter '" + name_ + "'");
    switch (kind_) {
    case ParameterKind::real:
    case ParameterKind::ordinal: return std::get<double>(v);
    case ParameterKind::integer: return static_cast<double>(std::get<std::int64_t>(v));
    case ParameterKind::categorical: {
        auto it = std::find(levels_.begin(), levels_.end(), std::get<std::string>(v));
        return static_cast<double>(it - levels_.begin());
    }
    }
    return 0.0;
}

Value Parameter::at(std::uint64_t index) const
{
    auto n = size();
    if (!n || index >= *n)
        throw DomainError("index out of range for parameter '" + name_ + "'");
    switch (kind_) {
    case ParameterKind::integer: return static_cast<std::int64_t>(lower_) + static_cast<std::int64_t>(index);
    case ParameterKind::ordinal: return values_[index];
    case ParameterKind::categorical: return levels_[index];
    case ParameterKind::real: break;
    }
    throw UnsupportedError("real parameters have no indexed values");
}

std::string Parameter::format(const Value& v) const
{
    if (!contains(v))
        throw DomainError("value '" + describe(v) + "' outside the domain of parameter '" + name_ + "'");
    return describe(v);
}

Value Parameter::parse(std::string_view text) const
{
    auto fail = [&]() -> DomainError {
        return DomainError("'" + std::string(text) + "' is not a value of parameter '" + name_ + "'");
    };
    Value v;
    switch (kind_) {
    case ParameterKind::categorical: v = std::string(text); break;
    case ParameterKind::integer: {
        std::int64_t i = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
        if (ec == std::errc() && ptr == text.data() + text.size()) {
            v = i;
        } else {
            auto d = parse_double(text);
            if (!d || std::floor(*d) != *d || std::abs(*d) > 9.0e15)
                throw fail();
            v = static_cast<std::int64_t>(*d);
        }
        break;
    }
    case ParameterKind::real:
    case ParameterKind::ordinal: {
        auto d = parse_double(text);
        if (!d)
            throw fail();
        v = *d == 0.0 ? 0.0 : *d;
        break;
    }
    }
    if (!contains(v))
        throw fail();
    return v;
}

std::size_t ConfigurationHash::operator()(const Configuration& c) const noexcept
{
    std::size_t h = 0x84222325cbf29ce4ULL;
    for (const auto& v : c.values) {
        std::size_t e = std::hash<Value>{}(v);
        h ^= e + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

DesignSpace::DesignSpace(std::vector<Parameter> parameters) : parameters_(std::move(parameters))
{
    std::unordered_set<std::string> names;
    for (const auto& p : parameters_)
        if (!names.insert(p.name()).second)
            throw ValidationError(field_of(p.name()), "duplicate parameter name");
}

std::optional<std::size_t> DesignSpace::index_of(std::string_view name) const
{
    for (std::size_t i = 0; i < parameters_.size(); ++i)
        if (parameters_[i].name() == name)
            return i;
    return std::nullopt;
}

std::optional<std::uint64_t> DesignSpace::cardinality() const
{
    std::uint64_t total = 1;
    for (const auto& p : parameters_) {
        auto n = p.size();
        if (!n)
            return std::nullopt;
        if (__builtin_mul_overflow(total, *n, &total))
            total = UINT64_MAX;
    }
    return total;
}

bool DesignSpace::contains(const Configuration& c) const
{
    if (c.values.size() != parameters_.size())
        return false;
    for (std::size_t i = 0; i < parameters_.size(); ++i)
        if (!parameters_[i].contains(c.values[i]))
            return false;
    return true;
}

Eigen::VectorXd DesignSpace::encode(const Configuration& c) const
{
    if (c.values.size() != parameters_.size())
        throw DomainError("configuration has " + std::to_string(c.values.size()) + " values, space has "
                          + std::to_string(parameters_.size()) + " parameters");
    Eigen::VectorXd x(static_cast<Eigen::Index>(parameters_.size()));
    for (std::size_t i = 0; i < parameters_.size(); ++i)
        x[static_cast<Eigen::Index>(i)] = parameters_[i].encode(c.values[i]);
    return x;
}

Eigen::MatrixXd DesignSpace::encode(const std::vector<Configuration>& configs) const
{
    Eigen::MatrixXd X(static_cast<Eigen::Index>(configs.size()), static_cast<Eigen::Index>(parameters_.size()));
    for (std::size_t r = 0; r < configs.size(); ++r)
        X.row(static_cast<Eigen::Index>(r)) = encode(configs[r]).transpose();
    return X;
}

std::vector<bool> DesignSpace::categorical_mask() const
{
    std::vector<bool> mask(parameters_.size());
    for (std::size_t i = 0; i < parameters_.size(); ++i)
        mask[i] = parameters_[i].kind() == ParameterKind::categorical;
    return mask;
}

Configuration DesignSpace::configuration_at(std::uint64_t index) const
{
    Configuration c;
    c.values.resize(parameters_.size());
    for (std::size_t i = parameters_.size(); i-- > 0;) {
        auto n = parameters_[i].size();
        if (!n)
            throw UnsupportedError("space with real parameter '" + parameters_[i].name() + "' is not indexable");
        c.values[i] = parameters_[i].at(index % *n);
        index /= *n;
    }
    return c;
}

void DesignSpace::for_each_configuration(const std::function<void(const Configuration&)>& visit,
                                         std::uint64_t cap) const
{
    for (const auto& p : parameters_)
        if (p.kind() == ParameterKind::real)
            throw UnsupportedError("cannot enumerate a space with real parameter '" + p.name() + "'");
    auto total = *cardinality();
    if (total > cap)
        throw UnsupportedError("cannot enumerate " + std::to_string(total) + " configurations (cap "
                               + std::to_string(cap) + ")");

    std::vector<std::uint64_t> digits(parameters_.size(), 0);
    Configuration c;
    c.values.reserve(parameters_.size());
    for (const auto& p : parameters_)
        c.values.push_back(p.at(0));
    for (std::uint64_t k = 0; k < total; ++k) {
        visit(c);
        for (std::size_t i = parameters_.size(); i-- > 0;) {
            if (++digits[i] < *parameters_[i].size()) {
                c.values[i] = parameters_[i].at(digits[i]);
                break;
            }
            digits[i] = 0;
            c.values[i] = parameters_[i].at(0);
        }
    }
}

std::vector<Configuration> enumerate_space(const DesignSpace& space, std::uint64_t cap)
{
    std::vector<Configuration> out;
    space.for_each_configuration([&](const Configuration& c) { out.push_back(c); }, cap);
    return out;
}

std::string format_configuration(const DesignSpace& space, const Configuration& c)
{
    std::string key;
    for (std::size_t i = 0; i < space.dimension(); ++i) {
        if (i)
            key += ',';
        key += space[i].format(c.values[i]);
    }
    return key;
}

std::string format_number(double v)
{
    char buf[64];
    if (v == 0.0)
        return "0";
    // Integral values print without exponent so that "1000000" never becomes "1e+06".
    auto fmt = std::trunc(v) == v && std::abs(v) < 1e15 ? std::chars_format::fixed : std::chars_format::general;
    auto [end, ec] = fmt == std::chars_format::fixed ? std::to_chars(buf, buf + sizeof(buf), v, fmt)
                                                     : std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

}  // namespace dse
