#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace dse {

enum class ParameterKind { real, integer, ordinal, categorical };

std::string_view to_string(ParameterKind kind);

enum class PriorShape { uniform, gaussian, decay, exponential, custom_beta, categorical_probs };

/// Sampling prior for one parameter. Beta shapes apply to real, integer and
/// ordinal parameters; categorical_probs carries one probability per level.
struct Prior
{
    PriorShape shape = PriorShape::uniform;
    double alpha = 1.0;
    double beta = 1.0;
    std::vector<double> probabilities;

    static Prior uniform() { return {}; }
    static Prior gaussian() { return {PriorShape::gaussian, 3.0, 3.0, {}}; }
    static Prior decay() { return {PriorShape::decay, 0.5, 1.5, {}}; }
    static Prior exponential() { return {PriorShape::exponential, 1.5, 0.5, {}}; }
    static Prior custom_beta(double alpha, double beta) { return {PriorShape::custom_beta, alpha, beta, {}}; }
    static Prior categorical(std::vector<double> probabilities)
    {
        return {PriorShape::categorical_probs, 1.0, 1.0, std::move(probabilities)};
    }

    bool is_categorical() const noexcept { return shape == PriorShape::categorical_probs; }

    friend bool operator==(const Prior&, const Prior&) = default;
};

/// Value of one parameter: double for real and ordinal, int64 for integer,
/// level string for categorical.
using Value = std::variant<double, std::int64_t, std::string>;

class Parameter
{
  public:
    static Parameter real(std::string name, double lower, double upper, Prior prior = {});
    static Parameter integer(std::string name, std::int64_t lower, std::int64_t upper, Prior prior = {});
    /// Values are sorted ascending; duplicates are rejected.
    static Parameter ordinal(std::string name, std::vector<double> values, Prior prior = {});
    static Parameter categorical(std::string name, std::vector<std::string> levels, Prior prior = {});

    const std::string& name() const noexcept { return name_; }
    ParameterKind kind() const noexcept { return kind_; }
    const Prior& prior() const noexcept { return prior_; }

    /// Real/integer bounds; for ordinal, the smallest and largest value.
    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }
    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<std::string>& levels() const noexcept { return levels_; }

    /// Number of admissible values; empty for real parameters.
    std::optional<std::uint64_t> size() const;

    bool contains(const Value& v) const;

    /// Numeric feature: the value itself, or the 0-based level index for
    /// categorical parameters. Throws DomainError outside the domain.
    double encode(const Value& v) const;

    /// The index-th admissible value in ascending order (finite kinds only).
    Value at(std::uint64_t index) const;

    /// Canonical wire text: integers without decimal point, reals in shortest
    /// round-trip form, categorical levels verbatim.
    std::string format(const Value& v) const;
    /// Inverse of format; accepts any numeric spelling that lands in the domain.
    Value parse(std::string_view text) const;

    friend bool operator==(const Parameter&, const Parameter&) = default;

  private:
    Parameter() = default;

    std::string name_;
    ParameterKind kind_ = ParameterKind::real;
    double lower_ = 0.0;
    double upper_ = 0.0;
    std::vector<double> values_;
    std::vector<std::string> levels_;
    Prior prior_;
};

/// One point of the design space, values in canonical parameter order.
struct Configuration
{
    std::vector<Value> values;

    friend bool operator==(const Configuration&, const Configuration&) = default;
};

struct ConfigurationHash
{
    std::size_t operator()(const Configuration& c) const noexcept;
};

using ConfigurationSet = std::unordered_set<Configuration, ConfigurationHash>;

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

class DesignSpace
{
  public:
    DesignSpace() = default;
    /// Throws ValidationError on duplicate names.
    explicit DesignSpace(std::vector<Parameter> parameters);

    const std::vector<Parameter>& parameters() const noexcept { return parameters_; }
    std::size_t dimension() const noexcept { return parameters_.size(); }
    const Parameter& operator[](std::size_t i) const { return parameters_[i]; }
    std::optional<std::size_t> index_of(std::string_view name) const;

    /// Exact product of domain sizes, saturating at UINT64_MAX; empty when any
    /// parameter is real (uncountable).
    std::optional<std::uint64_t> cardinality() const;

    bool contains(const Configuration& c) const;

    Eigen::VectorXd encode(const Configuration& c) const;
    /// One row per configuration.
    Eigen::MatrixXd encode(const std::vector<Configuration>& configs) const;
    /// true for features that must not be split by thresholds.
    std::vector<bool> categorical_mask() const;

    /// Mixed-radix decode of index, last parameter varying fastest.
    Configuration configuration_at(std::uint64_t index) const;

    /// Visits every configuration once in lexicographic order of the
    /// canonical parameter order. Throws UnsupportedError when a real
    /// parameter exists or the cardinality exceeds cap.
    void for_each_configuration(const std::function<void(const Configuration&)>& visit,
                                std::uint64_t cap = kDefaultEnumerationCap) const;

    friend bool operator==(const DesignSpace&, const DesignSpace&) = default;

  private:
    std::vector<Parameter> parameters_;
};

std::vector<Configuration> enumerate_space(const DesignSpace& space,
                                           std::uint64_t cap = kDefaultEnumerationCap);

/// Canonical decimal text of a number: integral values without a decimal
/// point or exponent, everything else as the shortest round-trip form.
std::string format_number(double v);

/// Canonical text of every value, comma-joined; used as a join key.
std::string format_configuration(const DesignSpace& space, const Configuration& c);

}  // namespace dse
