#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dse/design_space.hpp"
#include "dse/evaluator.hpp"
#include "dse/forest.hpp"

namespace dse {

/// A complete optimization setup as read from the scenario JSON file.
struct Scenario
{
    std::string application_name;
    std::vector<std::string> objectives;
    std::optional<FeasibilityOutput> feasibility;
    DesignSpace space;

    std::size_t doe_samples = 1000;                  ///< N
    std::size_t optimization_iterations = 50;        ///< maxAL
    std::size_t evaluations_per_iteration = 100;     ///< M
    std::size_t pareto_prediction_samples = 100000;  ///< S

    ForestHyperparams regressor;
    ForestHyperparams classifier;
    /// Turning the filter off keeps the classifier out of candidate selection.
    bool feasibility_filter = true;
    double feasibility_threshold = 0.5;

    std::uint64_t seed = 0;
    std::string output_dir = "output";
    EvaluatorSpec evaluator;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Throws ParseError (with line/column) on malformed JSON and
/// ValidationError naming the offending field on invalid content.
Scenario parse_scenario(std::string_view json_text);

/// JSON text that parse_scenario maps back to an equal Scenario.
std::string serialize_scenario(const Scenario& scenario);

}  // namespace dse
