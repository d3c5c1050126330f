#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "dse/design_space.hpp"
#include "dse/forest.hpp"
#include "dse/pareto.hpp"
#include "dse/random.hpp"
#include "dse/scenario.hpp"

namespace dse {

/// One regressor per objective plus the optional feasibility classifier.
struct SurrogateBundle
{
    std::vector<Forest> regressors;
    std::optional<Forest> classifier;
    double threshold = 0.5;
};

/// Fits all surrogates on every record. The classifier is skipped when
/// `with_classifier` is false.
SurrogateBundle fit_surrogates(const DesignSpace& space, const std::vector<EvaluationRecord>& records,
                               const ForestHyperparams& regressor, const ForestHyperparams& classifier,
                               bool with_classifier, double threshold, Rng& rng);

/// The full enumeration when the space is finite with at most `samples`
/// points, otherwise `samples` distinct uniform draws.
std::vector<Configuration> candidate_pool(const DesignSpace& space, std::size_t samples, Rng& rng);

/// Configurations of `pool` whose predicted objectives are non-dominated,
/// after dropping excluded points (the Pareto wall) and points the
/// classifier predicts infeasible. Result keeps pool order.
std::vector<Configuration> predict_pareto(const DesignSpace& space, const SurrogateBundle& bundle,
                                          const std::vector<Configuration>& pool, const ConfigurationSet& exclude);

/// At most m configurations: a random m-subset of `predicted` when it is too
/// large, otherwise all of it topped up with fresh prior draws. Never returns
/// an archived configuration; may come back short when the space runs out.
std::vector<Configuration> select_batch(const std::vector<Configuration>& predicted, std::size_t m,
                                        const DesignSpace& space, const ParetoArchive& archive, Rng& rng);

using BatchEvaluator = std::function<std::vector<EvaluationRecord>(const std::vector<Configuration>&)>;

struct RunResult
{
    ParetoArchive archive;
    SurrogateBundle models;                  ///< fitted on the final archive
    std::vector<std::size_t> batch_sizes;    ///< active-learning batches, in order
    std::size_t iterations = 0;
    std::string termination;                 ///< "max_iterations", "pareto_exhausted" or "evaluator_error"
    std::optional<std::string> error;        ///< set when the evaluator failed
};

/// Warm-up, then active learning until the predicted front holds nothing new
/// or optimization_iterations is reached. Evaluator failures stop the loop
/// and are reported in `error` with the partial archive kept.
RunResult run(const Scenario& scenario, const BatchEvaluator& evaluate);
RunResult run(const Scenario& scenario);

/// Lowest-objective feasible record of a single-objective archive; earliest
/// evaluation wins ties. Empty when nothing feasible was found.
std::optional<EvaluationRecord> mono_objective_best(const ParetoArchive& archive);

}  // namespace dse
