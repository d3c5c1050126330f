#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "dse/design_space.hpp"
#include "dse/evaluator.hpp"

namespace fixtures {

struct ToyData
{
    dse::DesignSpace space;
    std::vector<dse::Configuration> configs;
    Eigen::MatrixXd X;
    Eigen::MatrixXd Y;  ///< cycles, logic
    std::vector<bool> feasible;
};

inline ToyData toy_data()
{
    ToyData d{dse::toy_fpga_space(), {}, {}, {}, {}};
    d.configs = dse::enumerate_space(d.space);
    d.X = d.space.encode(d.configs);
    d.Y.resize(static_cast<Eigen::Index>(d.configs.size()), 2);
    for (std::size_t i = 0; i < d.configs.size(); ++i) {
        const auto& v = d.configs[i].values;
        auto cost = dse::toy_fpga(static_cast<std::int64_t>(std::get<double>(v[0])),
                                  static_cast<std::int64_t>(std::get<double>(v[1])),
                                  std::get<std::string>(v[2]) == "true", std::get<std::int64_t>(v[3]));
        auto r = static_cast<Eigen::Index>(i);
        d.Y(r, 0) = cost.cycles;
        d.Y(r, 1) = cost.logic;
        d.feasible.push_back(cost.feasible);
    }
    return d;
}

inline dse::EvaluatorSpec toy_evaluator()
{
    return {dse::BuiltinEvaluator{"toy_fpga"}, {"cycles", "logic"}, dse::FeasibilityOutput{"feasible", "true"}};
}

}  // namespace fixtures
