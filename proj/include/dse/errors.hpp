#pragma once

#include <stdexcept>
#include <string>

namespace dse {

/// Malformed scenario text (carries the JSON parser's line/column message).
struct ParseError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Scenario content that parses but breaks an invariant. field() names the
/// offending entry, e.g. "input_parameters.T.values".
class ValidationError : public std::runtime_error
{
  public:
    ValidationError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field))
    {
    }
    const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

/// Argument outside a mathematical or parameter domain.
struct DomainError : std::domain_error
{
    using std::domain_error::domain_error;
};

/// Operation requested on a space or input it does not support.
struct UnsupportedError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct FitError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Model used before fitting or with the wrong kind.
struct StateError : std::logic_error
{
    using std::logic_error::logic_error;
};

/// Evaluator failure; raw_output() holds the child's stdout/stderr when any.
class EvaluationError : public std::runtime_error
{
  public:
    explicit EvaluationError(const std::string& message, std::string raw_output = {})
        : std::runtime_error(message), raw_output_(std::move(raw_output))
    {
    }
    const std::string& raw_output() const noexcept { return raw_output_; }

  private:
    std::string raw_output_;
};

/// Scenario and evaluator disagree on columns or names.
struct ProtocolError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

}  // namespace dse

namespace dse {

/// Cross-validation preconditions violated.
struct DiagnosticsError : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

}  // namespace dse
