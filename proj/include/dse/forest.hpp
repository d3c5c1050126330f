#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dse/random.hpp"

namespace dse {

/// Per-class sample weights of the feasibility classifier; must sum to 1.
struct ClassWeight
{
    double feasible = 0.75;
    double infeasible = 0.25;

    friend bool operator==(const ClassWeight&, const ClassWeight&) = default;
};

struct ForestHyperparams
{
    int n_estimators = 10;
    std::optional<int> max_depth;              ///< empty = unlimited
    std::optional<double> max_features;        ///< fraction in (0, 1]; empty = "auto"
    ClassWeight class_weight;                  ///< classifier only
    bool bootstrap = true;
    int min_samples_split = 2;

    /// Throws ValidationError(field, ...) on a broken invariant.
    void validate(const std::string& field) const;

    friend bool operator==(const ForestHyperparams&, const ForestHyperparams&) = default;
};

enum class ForestKind { regressor, classifier };

/// Flat binary tree. Internal nodes send x left when x[feature] <= threshold,
/// or, for equality tests on unordered features, when x[feature] == threshold.
struct TreeNode
{
    int feature = -1;
    double threshold = 0.0;
    bool equality = false;
    int left = -1;
    int right = -1;
    /// Leaf output: target mean (regressor) or feasible-class probability.
    double value = 0.0;

    bool is_leaf() const noexcept { return feature < 0; }
};

struct Tree
{
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root

    template<class Row>
    double predict(const Row& x) const
    {
        const TreeNode* node = &nodes.front();
        while (!node->is_leaf()) {
            double v = x[node->feature];
            bool left = node->equality ? v == node->threshold : v <= node->threshold;
            node = &nodes[static_cast<std::size_t>(left ? node->left : node->right)];
        }
        return node->value;
    }

    std::size_t depth() const;
};

class Forest
{
  public:
    Forest() = default;
    Forest(ForestKind kind, std::size_t feature_count, std::vector<Tree> trees,
           Eigen::VectorXd raw_importance);

    bool fitted() const noexcept { return !trees_.empty(); }
    ForestKind kind() const noexcept { return kind_; }
    std::size_t feature_count() const noexcept { return feature_count_; }
    const std::vector<Tree>& trees() const noexcept { return trees_; }
    /// Accumulated weighted impurity decrease per feature, averaged over trees.
    const Eigen::VectorXd& raw_importance() const noexcept { return raw_importance_; }

  private:
    ForestKind kind_ = ForestKind::regressor;
    std::size_t feature_count_ = 0;
    std::vector<Tree> trees_;
    Eigen::VectorXd raw_importance_;
};

/// Variance-reduction forest. X holds one sample per row; `categorical`
/// marks unordered features (empty means all ordered). Trees train
/// concurrently; tree t draws from its own stream, so the result does not
/// depend on the thread count.
Forest fit_regressor(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestHyperparams& hp,
                     Rng& rng, const std::vector<bool>& categorical = {});

/// Class-weighted Gini forest; labels[i] is true for feasible samples.
Forest fit_classifier(const Eigen::MatrixXd& X, const std::vector<bool>& labels, const ForestHyperparams& hp,
                      Rng& rng, const std::vector<bool>& categorical = {});

double predict_regression(const Forest& forest, const Eigen::VectorXd& x);
/// One prediction per row of X.
Eigen::VectorXd predict_regression_rows(const Forest& forest, const Eigen::MatrixXd& X);

double predict_feasible_prob(const Forest& forest, const Eigen::VectorXd& x);
Eigen::VectorXd predict_feasible_prob_rows(const Forest& forest, const Eigen::MatrixXd& X);

/// Normalized impurity-based importance; sums to 1. Single-leaf forests
/// return the uniform vector.
Eigen::VectorXd feature_importance(const Forest& forest);

/// TP / (TP + FN); 1 when truth has no positives.
double recall(const std::vector<bool>& predicted, const std::vector<bool>& truth);

/// Mean held-out recall over k shuffled folds, classifying feasible when the
/// predicted probability is >= threshold.
double kfold_recall(const Eigen::MatrixXd& X, const std::vector<bool>& labels, const ForestHyperparams& hp,
                    int k, Rng& rng, const std::vector<bool>& categorical = {}, double threshold = 0.5);

/// The 3^4 classifier grid: n_estimators {10,100,1000} x max_depth {none,4,8}
/// x max_features {auto,0.5,0.75} x class_weight {0.5,0.75,0.9 feasible}.
std::vector<ForestHyperparams> classifier_tuning_grid();

struct GridPoint
{
    ForestHyperparams hyperparams;
    double mean_recall = 0.0;
};

std::vector<GridPoint> recall_grid_search(const Eigen::MatrixXd& X, const std::vector<bool>& labels,
                                          const std::vector<ForestHyperparams>& grid, int k, Rng& rng,
                                          const std::vector<bool>& categorical = {});

}  // namespace dse
