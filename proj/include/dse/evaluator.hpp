#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dse/csv.hpp"
#include "dse/design_space.hpp"
#include "dse/pareto.hpp"

namespace dse {

/// Column holding the feasibility flag and the literal meaning "feasible".
struct FeasibilityOutput
{
    std::string name;
    std::string true_value = "true";

    friend bool operator==(const FeasibilityOutput&, const FeasibilityOutput&) = default;
};

struct BuiltinEvaluator
{
    std::string name;

    friend bool operator==(const BuiltinEvaluator&, const BuiltinEvaluator&) = default;
};

/// External program speaking the batch CSV protocol on stdin/stdout.
struct SubprocessEvaluator
{
    std::string command;
    std::string working_dir;
    double timeout_seconds = 3600.0;

    friend bool operator==(const SubprocessEvaluator&, const SubprocessEvaluator&) = default;
};

struct EvaluatorSpec
{
    std::variant<BuiltinEvaluator, SubprocessEvaluator> mode;
    std::vector<std::string> objectives;
    std::optional<FeasibilityOutput> feasibility;

    friend bool operator==(const EvaluatorSpec&, const EvaluatorSpec&) = default;
};

/// Names accepted by BuiltinEvaluator: "toy_fpga" and "separable".
const std::vector<std::string>& builtin_evaluator_names();

struct ToyFpgaCost
{
    double cycles = 0.0;
    double logic = 0.0;
    bool feasible = false;
};

/// Synthetic accelerator cost model over tile size T, parallelism P,
/// pipelining S and memory banks B:
///   cycles = ceil(4096 / T) * ceil(T / P) * (S ? 1 : 2) + 64 B
///   logic  = 5 P + 3 T (S ? 2 : 1) + 7 B,   feasible iff logic <= 120.
/// Throws DomainError outside T in {2..64 powers of 2}, P in {1..16 powers of
/// 2}, B in [1, 4].
ToyFpgaCost toy_fpga(std::int64_t tile, std::int64_t parallelism, bool pipelined, std::int64_t banks);

/// The 240-point toy_fpga space (T, P with decay priors; S categorical; B integer).
DesignSpace toy_fpga_space();

/// Request CSV: header of parameter names, one canonical row per configuration.
std::string request_csv(const DesignSpace& space, const std::vector<Configuration>& batch);

/// Joins response rows to `batch` by the canonical parameter tuple. Every
/// requested configuration must appear exactly once; throws EvaluationError
/// otherwise, or ProtocolError when a declared column is absent.
std::vector<EvaluationRecord> join_response(const DesignSpace& space, const EvaluatorSpec& spec,
                                            const std::vector<Configuration>& batch, const CsvTable& response);

std::vector<EvaluationRecord> evaluate_batch(const DesignSpace& space, const EvaluatorSpec& spec,
                                             const std::vector<Configuration>& batch);

struct BruteForceResult
{
    std::vector<EvaluationRecord> records;
    std::vector<std::size_t> front;  ///< indices into records
};

/// Evaluates every configuration of an enumerable space.
BruteForceResult brute_force_front(const DesignSpace& space, const EvaluatorSpec& spec);

}  // namespace dse
