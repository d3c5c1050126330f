#include "dse/forest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "dse/errors.hpp"
#include "dse/parallel.hpp"

namespace dse {
namespace {

/// Weighted sufficient statistics of a sample set. For regression `a` is the
/// weighted target sum and `b` the weighted sum of squares; for
/// classification `a` is the feasible weight and `b` the infeasible weight.
struct Stats
{
    double weight = 0.0;
    double a = 0.0;
    double b = 0.0;

    void add(double w, double target, ForestKind kind)
    {
        weight += w;
        if (kind == ForestKind::regressor) {
            a += w * target;
            b += w * target * target;
        } else if (target > 0.5) {
            a += w;
        } else {
            b += w;
        }
    }

    Stats operator-(const Stats& o) const { return {weight - o.weight, a - o.a, b - o.b}; }

    /// Weighted SSE (regressor) or weight x Gini (classifier).
    double impurity(ForestKind kind) const
    {
        if (weight <= 0.0)
            return 0.0;
        if (kind == ForestKind::regressor)
            return std::max(0.0, b - a * a / weight);
        return std::max(0.0, weight - (a * a + b * b) / weight);
    }

    double leaf_value(ForestKind kind) const
    {
        if (kind == ForestKind::regressor)
            return a / weight;
        double total = a + b;
        return total > 0.0 ? a / total : 0.0;
    }
};

struct Split
{
    int feature = -1;
    double threshold = 0.0;
    bool equality = false;
    double gain = 0.0;
};

class TreeBuilder
{
  public:
    TreeBuilder(const Eigen::MatrixXd& X, const Eigen::VectorXd& targets, const std::vector<double>& weights,
                const std::vector<bool>& categorical, const ForestHyperparams& hp, std::size_t max_features,
                ForestKind kind, Rng rng)
        : X_(X), targets_(targets), weights_(weights), categorical_(categorical), hp_(hp),
          max_features_(max_features), kind_(kind), rng_(std::move(rng)),
          importance_(Eigen::VectorXd::Zero(X.cols()))
    {
    }

    Tree build(std::vector<int> samples)
    {
        // Regression targets are centred on the sample mean so that the
        // sum-of-squares statistics do not lose precision.
        if (kind_ == ForestKind::regressor) {
            double total = 0.0, weight = 0.0;
            for (int s : samples) {
                total += weights_[s] * targets_[s];
                weight += weights_[s];
            }
            offset_ = total / weight;
        }
        Stats root = stats_of(samples, 0, samples.size());
        root_weight_ = root.weight;
        samples_ = std::move(samples);
        grow(0, samples_.size(), 0);
        return std::move(tree_);
    }

    const Eigen::VectorXd& importance() const { return importance_; }

  private:
    double raw_mean(std::size_t begin, std::size_t end) const
    {
        double sum = 0.0, weight = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            sum += weights_[samples_[i]] * targets_[samples_[i]];
            weight += weights_[samples_[i]];
        }
        return sum / weight;
    }

    double target(int s) const { return kind_ == ForestKind::regressor ? targets_[s] - offset_ : targets_[s]; }

    Stats stats_of(const std::vector<int>& samples, std::size_t begin, std::size_t end) const
    {
        Stats st;
        for (std::size_t i = begin; i < end; ++i)
            st.add(weights_[samples[i]], target(samples[i]), kind_);
        return st;
    }

    int grow(std::size_t begin, std::size_t end, int depth)
    {
        Stats node = stats_of(samples_, begin, end);
        int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.push_back({});
        tree_.nodes[id].value = kind_ == ForestKind::regressor ? raw_mean(begin, end) : node.leaf_value(kind_);

        double impurity = node.impurity(kind_);
        bool can_split = end - begin >= static_cast<std::size_t>(std::max(2, hp_.min_samples_split))
                         && (!hp_.max_depth || depth < *hp_.max_depth) && impurity > 0.0;
        if (!can_split)
            return id;

        Split best = find_split(begin, end, node, impurity);
        if (best.feature < 0)
            return id;

        auto goes_left = [&](int s) {
            double v = X_(s, best.feature);
            return best.equality ? v == best.threshold : v <= best.threshold;
        };
        auto mid_it = std::stable_partition(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                            samples_.begin() + static_cast<std::ptrdiff_t>(end), goes_left);
        auto mid = static_cast<std::size_t>(mid_it - samples_.begin());

        importance_[best.feature] += best.gain / root_weight_;
        int left = grow(begin, mid, depth + 1);
        int right = grow(mid, end, depth + 1);
        TreeNode& n = tree_.nodes[id];
        n.feature = best.feature;
        n.threshold = best.threshold;
        n.equality = best.equality;
        n.left = left;
        n.right = right;
        return id;
    }

    /// Candidate features are visited in random order until max_features
    /// non-constant ones have been examined; ties keep the lowest feature
    /// index, then the lowest threshold or level.
    Split find_split(std::size_t begin, std::size_t end, const Stats& node, double impurity)
    {
        std::vector<int> order(static_cast<std::size_t>(X_.cols()));
        std::iota(order.begin(), order.end(), 0);
        rng_.shuffle(std::span<int>(order));

        Split best;
        double min_gain = impurity * 1e-12;
        std::size_t visited = 0;
        for (int f : order) {
            if (visited >= max_features_)
                break;
            Split s = categorical_[static_cast<std::size_t>(f)] ? best_equality_split(f, begin, end, node, impurity)
                                                                : best_threshold_split(f, begin, end, node, impurity);
            if (s.feature == -2)
                continue;  // constant in this node
            ++visited;
            if (s.feature < 0 || s.gain <= min_gain)
                continue;
            if (best.feature < 0 || s.gain > best.gain
                || (s.gain == best.gain
                    && (s.feature < best.feature || (s.feature == best.feature && s.threshold < best.threshold))))
                best = s;
        }
        return best;
    }

    Split best_threshold_split(int f, std::size_t begin, std::size_t end, const Stats& node, double impurity)
    {
        scratch_.assign(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                        samples_.begin() + static_cast<std::ptrdiff_t>(end));
        std::stable_sort(scratch_.begin(), scratch_.end(), [&](int a, int b) { return X_(a, f) < X_(b, f); });
        if (X_(scratch_.front(), f) == X_(scratch_.back(), f))
            return {-2};

        Split best;
        Stats left;
        for (std::size_t i = 0; i + 1 < scratch_.size(); ++i) {
            int s = scratch_[i];
            left.add(weights_[s], target(s), kind_);
            double lo = X_(s, f);
            double hi = X_(scratch_[i + 1], f);
            if (lo == hi)
                continue;
            double gain = impurity - left.impurity(kind_) - (node - left).impurity(kind_);
            if (best.feature < 0 || gain > best.gain) {
                double mid = lo + (hi - lo) / 2.0;
                if (!(mid < hi))
                    mid = lo;
                best = {f, mid, false, gain};
            }
        }
        return best;
    }

    Split best_equality_split(int f, std::size_t begin, std::size_t end, const Stats& node, double impurity)
    {
        std::map<double, Stats> per_level;
        for (std::size_t i = begin; i < end; ++i) {
            int s = samples_[i];
            per_level[X_(s, f)].add(weights_[s], target(s), kind_);
        }
        if (per_level.size() < 2)
            return {-2};
        Split best;
        for (const auto& [level, left] : per_level) {
            double gain = impurity - left.impurity(kind_) - (node - left).impurity(kind_);
            if (best.feature < 0 || gain > best.gain)
                best = {f, level, true, gain};
            if (per_level.size() == 2)
                break;  // the second level gives the mirrored split
        }
        return best;
    }

    const Eigen::MatrixXd& X_;
    const Eigen::VectorXd& targets_;
    const std::vector<double>& weights_;
    const std::vector<bool>& categorical_;
    const ForestHyperparams& hp_;
    std::size_t max_features_;
    ForestKind kind_;
    Rng rng_;

    double offset_ = 0.0;
    double root_weight_ = 1.0;
    std::vector<int> samples_;
    std::vector<int> scratch_;
    Tree tree_;
    Eigen::VectorXd importance_;
};

std::size_t resolve_max_features(const ForestHyperparams& hp, std::size_t d, ForestKind kind)
{
    if (!hp.max_features) {
        if (kind == ForestKind::regressor)
            return d;
        return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    }
    auto n = static_cast<std::size_t>(std::floor(*hp.max_features * static_cast<double>(d)));
    return std::clamp<std::size_t>(n, 1, d);
}

void check_training_shape(const Eigen::MatrixXd& X, Eigen::Index n_targets, const std::vector<bool>& categorical)
{
    if (X.rows() == 0)
        throw FitError("empty training set");
    if (X.rows() != n_targets)
        throw FitError("training set has " + std::to_string(X.rows()) + " rows but " + std::to_string(n_targets)
                       + " targets");
    if (X.cols() == 0)
        throw FitError("training set has no features");
    if (!categorical.empty() && categorical.size() != static_cast<std::size_t>(X.cols()))
        throw FitError("categorical mask length does not match feature count");
    if (!X.allFinite())
        throw FitError("training features must be finite");
}

Forest fit_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& targets, ForestKind kind,
                  const ForestHyperparams& hp, Rng& rng, const std::vector<bool>& categorical_in)
{
    hp.validate(kind == ForestKind::regressor ? "surrogate.regressor" : "surrogate.classifier");
    check_training_shape(X, targets.size(), categorical_in);
    std::vector<bool> categorical =
        categorical_in.empty() ? std::vector<bool>(static_cast<std::size_t>(X.cols()), false) : categorical_in;

    auto n = static_cast<int>(X.rows());
    auto d = static_cast<std::size_t>(X.cols());
    std::size_t max_features = resolve_max_features(hp, d, kind);
    std::uint64_t base_seed = rng.next_u64();
    std::uint64_t stream = rng.stream_id();

    auto trees_count = static_cast<std::size_t>(hp.n_estimators);
    std::vector<Tree> trees(trees_count);
    std::vector<Eigen::VectorXd> importances(trees_count);

    parallel_for(trees_count, [&](std::size_t t) {
        Rng tree_rng(base_seed ^ t, stream);
        std::vector<int> samples(static_cast<std::size_t>(n));
        if (hp.bootstrap) {
            for (auto& s : samples)
                s = static_cast<int>(tree_rng.below(static_cast<std::uint64_t>(n)));
            std::sort(samples.begin(), samples.end());
        } else {
            std::iota(samples.begin(), samples.end(), 0);
        }

        std::vector<double> weights(static_cast<std::size_t>(n), 1.0);
        if (kind == ForestKind::classifier) {
            // Balanced-by-class: each class contributes its configured weight
            // spread over its members in this tree's sample.
            double feasible = 0, infeasible = 0;
            for (int s : samples)
                (targets[s] > 0.5 ? feasible : infeasible) += 1.0;
            for (int i = 0; i < n; ++i)
                weights[static_cast<std::size_t>(i)] = targets[i] > 0.5
                                                           ? hp.class_weight.feasible / std::max(feasible, 1.0)
                                                           : hp.class_weight.infeasible / std::max(infeasible, 1.0);
        }

        TreeBuilder builder(X, targets, weights, categorical, hp, max_features, kind, std::move(tree_rng));
        trees[t] = builder.build(std::move(samples));
        importances[t] = builder.importance();
    });

    Eigen::VectorXd raw = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    for (const auto& imp : importances)
        raw += imp;
    raw /= static_cast<double>(trees_count);
    return Forest(kind, d, std::move(trees), std::move(raw));
}

void check_predict(const Forest& forest, ForestKind kind, Eigen::Index cols)
{
    if (!forest.fitted())
        throw StateError("forest is not fitted");
    if (forest.kind() != kind)
        throw StateError(kind == ForestKind::regressor ? "forest is not a regressor" : "forest is not a classifier");
    if (static_cast<std::size_t>(cols) != forest.feature_count())
        throw DomainError("feature vector has " + std::to_string(cols) + " entries, forest expects "
                          + std::to_string(forest.feature_count()));
}

template<class Row>
double mean_over_trees(const Forest& forest, const Row& x)
{
    double sum = 0.0;
    for (const auto& tree : forest.trees())
        sum += tree.predict(x);
    return sum / static_cast<double>(forest.trees().size());
}

Eigen::VectorXd predict_rows(const Forest& forest, const Eigen::MatrixXd& X)
{
    Eigen::VectorXd out(X.rows());
    constexpr Eigen::Index kChunk = 1024;
    auto chunks = static_cast<std::size_t>((X.rows() + kChunk - 1) / kChunk);
    parallel_for(chunks, [&](std::size_t c) {
        Eigen::Index begin = static_cast<Eigen::Index>(c) * kChunk;
        Eigen::Index end = std::min(X.rows(), begin + kChunk);
        for (Eigen::Index r = begin; r < end; ++r)
            out[r] = mean_over_trees(forest, X.row(r));
    });
    return out;
}

}  // namespace

void ForestHyperparams::validate(const std::string& field) const
{
    if (n_estimators < 1)
        throw ValidationError(field + ".n_estimators", "must be at least 1");
    if (max_depth && *max_depth < 1)
        throw ValidationError(field + ".max_depth", "must be positive or null");
    if (max_features && !(*max_features > 0.0 && *max_features <= 1.0))
        throw ValidationError(field + ".max_features", "fraction must lie in (0, 1]");
    if (!(class_weight.feasible > 0.0) || !(class_weight.infeasible > 0.0)
        || std::abs(class_weight.feasible + class_weight.infeasible - 1.0) > 1e-9)
        throw ValidationError(field + ".class_weight", "weights must be positive and sum to 1");
    if (min_samples_split < 1)
        throw ValidationError(field + ".min_samples_split", "must be at least 1");
}

std::size_t Tree::depth() const
{
    std::vector<std::size_t> level(nodes.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, level[i]);
        if (!nodes[i].is_leaf()) {
            level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
            level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
        }
    }
    return deepest;
}

Forest::Forest(ForestKind kind, std::size_t feature_count, std::vector<Tree> trees, Eigen::VectorXd raw_importance)
    : kind_(kind), feature_count_(feature_count), trees_(std::move(trees)), raw_importance_(std::move(raw_importance))
{
    if (raw_importance_.size() == 0)
        raw_importance_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(feature_count_));
}

Forest fit_regressor(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestHyperparams& hp, Rng& rng,
                     const std::vector<bool>& categorical)
{
    if (!y.allFinite())
        throw FitError("regression targets must be finite");
    return fit_forest(X, y, ForestKind::regressor, hp, rng, categorical);
}

Forest fit_classifier(const Eigen::MatrixXd& X, const std::vector<bool>& labels, const ForestHyperparams& hp,
                      Rng& rng, const std::vector<bool>& categorical)
{
    Eigen::VectorXd targets(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i)
        targets[static_cast<Eigen::Index>(i)] = labels[i] ? 1.0 : 0.0;
    return fit_forest(X, targets, ForestKind::classifier, hp, rng, categorical);
}

double predict_regression(const Forest& forest, const Eigen::VectorXd& x)
{
    check_predict(forest, ForestKind::regressor, x.size());
    return mean_over_trees(forest, x);
}

Eigen::VectorXd predict_regression_rows(const Forest& forest, const Eigen::MatrixXd& X)
{
    check_predict(forest, ForestKind::regressor, X.cols());
    return predict_rows(forest, X);
}

double predict_feasible_prob(const Forest& forest, const Eigen::VectorXd& x)
{
    check_predict(forest, ForestKind::classifier, x.size());
    return mean_over_trees(forest, x);
}

Eigen::VectorXd predict_feasible_prob_rows(const Forest& forest, const Eigen::MatrixXd& X)
{
    check_predict(forest, ForestKind::classifier, X.cols());
    return predict_rows(forest, X);
}

Eigen::VectorXd feature_importance(const Forest& forest)
{
    if (!forest.fitted())
        throw StateError("forest is not fitted");
    const auto& raw = forest.raw_importance();
    auto d = static_cast<Eigen::Index>(forest.feature_count());
    double total = raw.sum();
    if (!(total > 0.0))
        return Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d));
    return raw / total;
}

double recall(const std::vector<bool>& predicted, const std::vector<bool>& truth)
{
    if (predicted.size() != truth.size())
        throw DiagnosticsError("prediction and truth lengths differ");
    std::size_t tp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!truth[i])
            continue;
        (predicted[i] ? tp : fn) += 1;
    }
    if (tp + fn == 0)
        return 1.0;
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double kfold_recall(const Eigen::MatrixXd& X, const std::vector<bool>& labels, const ForestHyperparams& hp, int k,
                    Rng& rng, const std::vector<bool>& categorical, double threshold)
{
    if (k < 2)
        throw DiagnosticsError("k-fold cross-validation needs k >= 2");
    if (static_cast<std::size_t>(X.rows()) != labels.size())
        throw DiagnosticsError("feature rows and labels differ in length");
    if (labels.size() < static_cast<std::size_t>(k))
        throw DiagnosticsError("need at least k samples for k folds");
    if (std::none_of(labels.begin(), labels.end(), [](bool b) { return b; }))
        throw DiagnosticsError("k-fold recall needs at least one positive label");

    std::vector<Eigen::Index> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<Eigen::Index>(order));

    double total = 0.0;
    for (int fold = 0; fold < k; ++fold) {
        std::vector<Eigen::Index> train, test;
        for (std::size_t i = 0; i < order.size(); ++i)
            (static_cast<int>(i % static_cast<std::size_t>(k)) == fold ? test : train).push_back(order[i]);

        Eigen::MatrixXd X_train = X(train, Eigen::all);
        std::vector<bool> y_train;
        for (auto i : train)
            y_train.push_back(labels[static_cast<std::size_t>(i)]);
        Forest model = fit_classifier(X_train, y_train, hp, rng, categorical);

        Eigen::MatrixXd X_test = X(test, Eigen::all);
        Eigen::VectorXd prob = predict_feasible_prob_rows(model, X_test);
        std::vector<bool> predicted, truth;
        for (std::size_t j = 0; j < test.size(); ++j) {
            predicted.push_back(prob[static_cast<Eigen::Index>(j)] >= threshold);
            truth.push_back(labels[static_cast<std::size_t>(test[j])]);
        }
        total += recall(predicted, truth);
    }
    return total / static_cast<double>(k);
}

std::vector<ForestHyperparams> classifier_tuning_grid()
{
    std::vector<ForestHyperparams> grid;
    for (int trees : {10, 100, 1000})
        for (std::optional<int> depth : {std::optional<int>{}, std::optional<int>{4}, std::optional<int>{8}})
            for (std::optional<double> features :
                 {std::optional<double>{}, std::optional<double>{0.5}, std::optional<double>{0.75}})
                for (ClassWeight w : {ClassWeight{0.5, 0.5}, ClassWeight{0.75, 0.25}, ClassWeight{0.9, 0.1}}) {
                    ForestHyperparams hp;
                    hp.n_estimators = trees;
                    hp.max_depth = depth;
                    hp.max_features = features;
                    hp.class_weight = w;
                    grid.push_back(hp);
                }
    return grid;
}

std::vector<GridPoint> recall_grid_search(const Eigen::MatrixXd& X, const std::vector<bool>& labels,
                                          const std::vector<ForestHyperparams>& grid, int k, Rng& rng,
                                          const std::vector<bool>& categorical)
{
    std::vector<GridPoint> out;
    out.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        // Every grid point sees the same folds.
        Rng fold_rng = rng.substream(rng.stream_id() + 1);
        out.push_back({grid[i], kfold_recall(X, labels, grid[i], k, fold_rng, categorical)});
    }
    return out;
}

}  // namespace dse
