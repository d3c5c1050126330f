#include "dse/optimizer.hpp"

#include <algorithm>

#include "dse/errors.hpp"
#include "dse/evaluator.hpp"
#include "dse/priors.hpp"

namespace dse {
namespace {

enum Stream : std::uint64_t { kWarmup = 1, kModels = 2, kPool = 3, kBatch = 4 };

}  // namespace

SurrogateBundle fit_surrogates(const DesignSpace& space, const std::vector<EvaluationRecord>& records,
                               const ForestHyperparams& regressor, const ForestHyperparams& classifier,
                               bool with_classifier, double threshold, Rng& rng)
{
    if (records.empty())
        throw FitError("no records to fit surrogates on");
    std::vector<Configuration> configs;
    configs.reserve(records.size());
    for (const auto& r : records)
        configs.push_back(r.config);
    Eigen::MatrixXd X = space.encode(configs);
    Eigen::MatrixXd Y = objective_matrix(records);
    auto mask = space.categorical_mask();

    SurrogateBundle bundle;
    bundle.threshold = threshold;
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
        Rng model_rng(rng.next_u64(), static_cast<std::uint64_t>(j));
        bundle.regressors.push_back(fit_regressor(X, Y.col(j), regressor, model_rng, mask));
    }
    if (with_classifier) {
        std::vector<bool> labels;
        for (const auto& r : records)
            labels.push_back(r.feasible);
        Rng model_rng(rng.next_u64(), static_cast<std::uint64_t>(Y.cols()));
        bundle.classifier = fit_classifier(X, labels, classifier, model_rng, mask);
    }
    return bundle;
}

std::vector<Configuration> candidate_pool(const DesignSpace& space, std::size_t samples, Rng& rng)
{
    if (samples == 0)
        throw DomainError("candidate pool size must be positive");
    auto cardinality = space.cardinality();
    if (cardinality && *cardinality <= samples)
        return enumerate_space(space);

    std::vector<Configuration> pool;
    ConfigurationSet seen;
    for (std::size_t attempt = 0; attempt < 100 * samples && pool.size() < samples; ++attempt) {
        Configuration c = sample_uniform_configuration(space, rng);
        if (seen.insert(c).second)
            pool.push_back(std::move(c));
    }
    return pool;
}

std::vector<Configuration> predict_pareto(const DesignSpace& space, const SurrogateBundle& bundle,
                                          const std::vector<Configuration>& pool, const ConfigurationSet& exclude)
{
    if (bundle.regressors.empty() || !bundle.regressors.front().fitted())
        throw StateError("surrogate bundle is not fitted");

    std::vector<Configuration> survivors;
    for (const auto& c : pool)
        if (!exclude.contains(c))
            survivors.push_back(c);
    if (survivors.empty())
        return {};

    Eigen::MatrixXd X = space.encode(survivors);
    if (bundle.classifier) {
        Eigen::VectorXd prob = predict_feasible_prob_rows(*bundle.classifier, X);
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < prob.size(); ++i)
            if (prob[i] >= bundle.threshold)
                keep.push_back(i);
        if (keep.empty())
            return {};
        std::vector<Configuration> kept;
        for (auto i : keep)
            kept.push_back(std::move(survivors[static_cast<std::size_t>(i)]));
        survivors = std::move(kept);
        X = Eigen::MatrixXd(X(keep, Eigen::all));
    }

    Eigen::MatrixXd predicted(X.rows(), static_cast<Eigen::Index>(bundle.regressors.size()));
    for (std::size_t j = 0; j < bundle.regressors.size(); ++j)
        predicted.col(static_cast<Eigen::Index>(j)) = predict_regression_rows(bundle.regressors[j], X);

    std::vector<Configuration> front;
    for (Eigen::Index i : pareto_front(predicted))
        front.push_back(survivors[static_cast<std::size_t>(i)]);
    return front;
}

std::vector<Configuration> select_batch(const std::vector<Configuration>& predicted, std::size_t m,
                                        const DesignSpace& space, const ParetoArchive& archive, Rng& rng)
{
    if (m == 0)
        throw DomainError("batch size must be positive");

    std::vector<Configuration> fresh;
    for (const auto& c : predicted)
        if (!archive.contains(c))
            fresh.push_back(c);

    if (fresh.size() > m) {
        // Partial Fisher-Yates: the first m slots become a uniform m-subset.
        for (std::size_t i = 0; i < m; ++i)
            std::swap(fresh[i], fresh[i + static_cast<std::size_t>(rng.below(fresh.size() - i))]);
        fresh.resize(m);
        return fresh;
    }

    std::vector<Configuration> batch = std::move(fresh);
    ConfigurationSet taken(batch.begin(), batch.end());
    auto usable = [&](const Configuration& c) { return !archive.contains(c) && !taken.contains(c); };

    for (std::size_t attempt = 0; batch.size() < m && attempt < 100 * m; ++attempt) {
        Configuration c = sample_configuration(space, rng);
        if (usable(c)) {
            taken.insert(c);
            batch.push_back(std::move(c));
        }
    }

    auto cardinality = space.cardinality();
    if (batch.size() < m && cardinality && *cardinality <= kDefaultEnumerationCap) {
        std::vector<Configuration> rest;
        space.for_each_configuration([&](const Configuration& c) {
            if (usable(c))
                rest.push_back(c);
        });
        rng.shuffle(std::span<Configuration>(rest));
        rest.resize(std::min(rest.size(), m - batch.size()));
        for (auto& c : rest)
            batch.push_back(std::move(c));
    }
    return batch;
}

RunResult run(const Scenario& scenario, const BatchEvaluator& evaluate)
{
    const DesignSpace& space = scenario.space;
    const std::size_t p = scenario.objectives.size();
    Rng warmup_rng(scenario.seed, kWarmup);
    Rng model_rng(scenario.seed, kModels);
    Rng pool_rng(scenario.seed, kPool);
    Rng batch_rng(scenario.seed, kBatch);

    RunResult result;
    auto absorb = [&](const std::vector<Configuration>& batch, int tag) {
        std::vector<EvaluationRecord> records = evaluate(batch);
        if (records.size() != batch.size())
            throw ProtocolError("evaluator returned " + std::to_string(records.size()) + " records for "
                                + std::to_string(batch.size()) + " configurations");
        for (auto& r : records) {
            if (static_cast<std::size_t>(r.objectives.size()) != p)
                throw ProtocolError("evaluator returned " + std::to_string(r.objectives.size())
                                    + " objectives, scenario declares " + std::to_string(p));
            r.iteration_tag = tag;
            result.archive.add(std::move(r));
        }
    };
    auto fail = [&](const std::exception& e) {
        result.error = e.what();
        result.termination = "evaluator_error";
    };

    try {
        absorb(warmup_sample(space, scenario.doe_samples, warmup_rng), -1);
    } catch (const EvaluationError& e) {
        fail(e);
        return result;
    }

    const bool with_classifier = scenario.feasibility.has_value() && scenario.feasibility_filter;
    auto refit = [&] {
        result.models = fit_surrogates(space, result.archive.records(), scenario.regressor, scenario.classifier,
                                       with_classifier, scenario.feasibility_threshold, model_rng);
    };

    auto cardinality = space.cardinality();
    const bool fixed_pool = cardinality && *cardinality <= scenario.pareto_prediction_samples;
    std::vector<Configuration> pool;
    auto predict = [&] {
        if (!fixed_pool || pool.empty())
            pool = candidate_pool(space, scenario.pareto_prediction_samples, pool_rng);
        return predict_pareto(space, result.models, pool, result.archive.configurations());
    };

    refit();
    std::vector<Configuration> predicted = predict();
    result.termination = "pareto_exhausted";
    while (!predicted.empty() && result.iterations < scenario.optimization_iterations) {
        auto batch = select_batch(predicted, scenario.evaluations_per_iteration, space, result.archive, batch_rng);
        if (batch.empty()) {
            result.termination = "space_exhausted";
            return result;
        }
        try {
            absorb(batch, static_cast<int>(result.iterations));
        } catch (const EvaluationError& e) {
            fail(e);
            return result;
        }
        result.batch_sizes.push_back(batch.size());
        ++result.iterations;
        refit();
        predicted = predict();
    }
    if (!predicted.empty())
        result.termination = "max_iterations";
    return result;
}

RunResult run(const Scenario& scenario)
{
    return run(scenario, [&](const std::vector<Configuration>& batch) {
        return evaluate_batch(scenario.space, scenario.evaluator, batch);
    });
}

std::optional<EvaluationRecord> mono_objective_best(const ParetoArchive& archive)
{
    std::optional<EvaluationRecord> best;
    for (const auto& r : archive.records()) {
        if (r.objectives.size() != 1)
            throw DomainError("mono-objective search needs exactly one objective");
        if (r.feasible && (!best || r.objectives[0] < best->objectives[0]))
            best = r;
    }
    return best;
}

}  // namespace dse
