#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "dse/design_space.hpp"
#include "dse/errors.hpp"

namespace dse {

/// y dominates y' when it is no worse in every objective and strictly better
/// in at least one (all objectives minimized).
template<class DerivedA, class DerivedB>
bool dominates(const Eigen::DenseBase<DerivedA>& a, const Eigen::DenseBase<DerivedB>& b)
{
    if (a.size() != b.size())
        throw DomainError("objective vectors differ in length");
    bool strict = false;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a.derived().coeff(i) > b.derived().coeff(i))
            return false;
        if (a.derived().coeff(i) < b.derived().coeff(i))
            strict = true;
    }
    return strict;
}

/// Row indices of the non-dominated rows of `points` (one point per row), in
/// ascending order. Duplicate rows are all kept.
template<class Derived>
std::vector<Eigen::Index> pareto_front(const Eigen::MatrixBase<Derived>& points)
{
    const Eigen::Index n = points.rows();
    const Eigen::Index p = points.cols();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    // A dominator is lexicographically smaller than what it dominates, so a
    // lexicographic sweep only needs to test against the front found so far.
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index j = 0; j < p; ++j) {
            if (points(a, j) != points(b, j))
                return points(a, j) < points(b, j);
        }
        return a < b;
    });

    std::vector<Eigen::Index> front;
    for (Eigen::Index i : order) {
        bool dominated = std::any_of(front.begin(), front.end(),
                                     [&](Eigen::Index f) { return dominates(points.row(f), points.row(i)); });
        if (!dominated)
            front.push_back(i);
    }
    std::sort(front.begin(), front.end());
    return front;
}

/// Area dominated by a two-objective front inside the box bounded by `ref`.
/// Points not component-wise <= ref contribute nothing.
template<class Derived>
double hypervolume_2d(const Eigen::MatrixBase<Derived>& front, const Eigen::Vector2d& ref)
{
    if (front.rows() > 0 && front.cols() != 2)
        throw UnsupportedError("hypervolume is implemented for two objectives only");
    std::vector<Eigen::Vector2d> pts;
    for (Eigen::Index i = 0; i < front.rows(); ++i) {
        Eigen::Vector2d q(front(i, 0), front(i, 1));
        if (q[0] <= ref[0] && q[1] <= ref[1])
            pts.push_back(q);
    }
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
        return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
    });
    double area = 0.0;
    double ceiling = ref[1];
    for (const auto& q : pts) {
        if (q[1] < ceiling) {
            area += (ref[0] - q[0]) * (ceiling - q[1]);
            ceiling = q[1];
        }
    }
    return area;
}

struct EvaluationRecord
{
    Configuration config;
    Eigen::VectorXd objectives;
    bool feasible = true;
    /// -1 for warm-up, otherwise the active-learning iteration index.
    int iteration_tag = -1;
};

/// Stacks the objective vectors of `records` (or the subset `indices`) as rows.
Eigen::MatrixXd objective_matrix(const std::vector<EvaluationRecord>& records);
Eigen::MatrixXd objective_matrix(const std::vector<EvaluationRecord>& records,
                                 const std::vector<std::size_t>& indices);

/// Indices of the feasible, mutually non-dominated records.
std::vector<std::size_t> constrained_front(const std::vector<EvaluationRecord>& records);

/// Every evaluated record plus the current constrained Pareto subset.
class ParetoArchive
{
  public:
    bool contains(const Configuration& c) const { return seen_.contains(c); }
    /// Throws DomainError when the configuration is already archived.
    void add(EvaluationRecord record);

    const std::vector<EvaluationRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    const std::vector<std::size_t>& front() const noexcept { return front_; }
    const ConfigurationSet& configurations() const noexcept { return seen_; }
    std::vector<EvaluationRecord> front_records() const;

  private:
    std::vector<EvaluationRecord> records_;
    std::vector<std::size_t> front_;
    ConfigurationSet seen_;
};

/// Per-objective scale used to normalize fronts before computing HVI.
struct ObjectiveScale
{
    Eigen::VectorXd sigma;
    std::vector<std::string> warnings;  ///< one per objective left unscaled
};

/// Sample standard deviation (n - 1) of each column. Zero or undefined
/// deviations are replaced by 1 and reported in `warnings`.
ObjectiveScale objective_scale(const Eigen::MatrixXd& points);

/// Nadir used by hvi: component-wise max over the scaled fronts plus 1e-6.
Eigen::Vector2d hvi_reference_point(const std::vector<const Eigen::MatrixXd*>& fronts, const Eigen::VectorXd& sigma);

/// HV(reference) - HV(approx) after dividing every objective by sigma,
/// floored at 0. The box corner is hvi_reference_point({approx, reference}).
double hvi(const Eigen::MatrixXd& approx, const Eigen::MatrixXd& reference, const Eigen::VectorXd& sigma);
/// Same, with an explicit box corner in scaled coordinates.
double hvi(const Eigen::MatrixXd& approx, const Eigen::MatrixXd& reference, const Eigen::VectorXd& sigma,
           const Eigen::Vector2d& scaled_ref);

/// Constrained front of the union of several runs' records.
std::vector<EvaluationRecord> reference_front(const std::vector<std::vector<EvaluationRecord>>& runs);

}  // namespace dse
