#include "dse/pareto.hpp"

#include <cmath>
#include <limits>

namespace dse {

Eigen::MatrixXd objective_matrix(const std::vector<EvaluationRecord>& records)
{
    std::vector<std::size_t> all(records.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return objective_matrix(records, all);
}

Eigen::MatrixXd objective_matrix(const std::vector<EvaluationRecord>& records, const std::vector<std::size_t>& indices)
{
    Eigen::Index p = records.empty() ? 0 : records.front().objectives.size();
    Eigen::MatrixXd Y(static_cast<Eigen::Index>(indices.size()), p);
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto& y = records[indices[r]].objectives;
        if (y.size() != p)
            throw DomainError("records carry objective vectors of different lengths");
        Y.row(static_cast<Eigen::Index>(r)) = y.transpose();
    }
    return Y;
}

std::vector<std::size_t> constrained_front(const std::vector<EvaluationRecord>& records)
{
    std::vector<std::size_t> feasible;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].feasible)
            feasible.push_back(i);
    Eigen::MatrixXd Y = objective_matrix(records, feasible);
    std::vector<std::size_t> front;
    for (Eigen::Index k : pareto_front(Y))
        front.push_back(feasible[static_cast<std::size_t>(k)]);
    return front;
}

void ParetoArchive::add(EvaluationRecord record)
{
    if (!seen_.insert(record.config).second)
        throw DomainError("configuration evaluated twice");
    std::size_t index = records_.size();
    records_.push_back(std::move(record));
    const auto& added = records_.back();
    if (!added.feasible)
        return;
    for (std::size_t f : front_)
        if (dominates(records_[f].objectives, added.objectives))
            return;
    std::erase_if(front_, [&](std::size_t f) { return dominates(added.objectives, records_[f].objectives); });
    front_.push_back(index);
    std::sort(front_.begin(), front_.end());
}

std::vector<EvaluationRecord> ParetoArchive::front_records() const
{
    std::vector<EvaluationRecord> out;
    for (std::size_t f : front_)
        out.push_back(records_[f]);
    return out;
}

ObjectiveScale objective_scale(const Eigen::MatrixXd& points)
{
    ObjectiveScale scale;
    scale.sigma = Eigen::VectorXd::Ones(points.cols());
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
        double sd = 0.0;
        if (points.rows() >= 2) {
            auto col = points.col(j);
            double mean = col.mean();
            sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(points.rows() - 1));
        }
        if (sd > 0.0 && std::isfinite(sd)) {
            scale.sigma[j] = sd;
        } else {
            scale.warnings.push_back("objective " + std::to_string(j)
                                     + " has zero standard deviation; left unscaled");
        }
    }
    return scale;
}

namespace {

Eigen::MatrixXd scaled(const Eigen::MatrixXd& front, const Eigen::VectorXd& sigma)
{
    if (front.rows() == 0)
        return Eigen::MatrixXd(0, sigma.size());
    if (front.cols() != sigma.size())
        throw DomainError("front and normalization differ in objective count");
    Eigen::VectorXd inv = sigma.unaryExpr([](double s) { return s > 0.0 ? 1.0 / s : 1.0; });
    return front * inv.asDiagonal();
}

}  // namespace

Eigen::Vector2d hvi_reference_point(const std::vector<const Eigen::MatrixXd*>& fronts, const Eigen::VectorXd& sigma)
{
    if (sigma.size() != 2)
        throw UnsupportedError("hypervolume indicator is implemented for two objectives only");
    Eigen::Vector2d ref = Eigen::Vector2d::Constant(-std::numeric_limits<double>::infinity());
    for (const auto* front : fronts) {
        if (front->rows() == 0)
            continue;
        ref = ref.cwiseMax(scaled(*front, sigma).colwise().maxCoeff().transpose());
    }
    if (!ref.allFinite())
        throw DomainError("hypervolume indicator needs at least one non-empty front");
    return ref.array() + 1e-6;
}

double hvi(const Eigen::MatrixXd& approx, const Eigen::MatrixXd& reference, const Eigen::VectorXd& sigma)
{
    return hvi(approx, reference, sigma, hvi_reference_point({&approx, &reference}, sigma));
}

double hvi(const Eigen::MatrixXd& approx, const Eigen::MatrixXd& reference, const Eigen::VectorXd& sigma,
           const Eigen::Vector2d& scaled_ref)
{
    if (sigma.size() != 2)
        throw UnsupportedError("hypervolume indicator is implemented for two objectives only");
    if (reference.rows() == 0)
        throw DomainError("reference front is empty");
    double gap = hypervolume_2d(scaled(reference, sigma), scaled_ref) - hypervolume_2d(scaled(approx, sigma), scaled_ref);
    return std::max(0.0, gap);
}

std::vector<EvaluationRecord> reference_front(const std::vector<std::vector<EvaluationRecord>>& runs)
{
    if (runs.empty())
        throw DomainError("reference front needs at least one run");
    std::vector<EvaluationRecord> all;
    for (const auto& run : runs)
        all.insert(all.end(), run.begin(), run.end());
    std::vector<EvaluationRecord> front;
    for (std::size_t i : constrained_front(all))
        front.push_back(all[i]);
    return front;
}

}  // namespace dse
