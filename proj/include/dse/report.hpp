#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dse/csv.hpp"
#include "dse/design_space.hpp"
#include "dse/pareto.hpp"
#include "dse/scenario.hpp"

namespace dse {

/// Columns: parameters (canonical order), objectives, feasible, iteration_tag.
CsvTable records_table(const DesignSpace& space, const std::vector<std::string>& objectives,
                       const std::vector<EvaluationRecord>& records);
std::vector<EvaluationRecord> records_from_table(const DesignSpace& space, const std::vector<std::string>& objectives,
                                                 const CsvTable& table);

/// Objective rows of a front file (pareto.csv, true_front.csv), keeping only
/// rows whose `feasible` column, when present, reads "true".
Eigen::MatrixXd front_objectives(const CsvTable& table, const std::vector<std::string>& objectives);

struct HviTrace
{
    std::vector<double> values;  ///< values[k]: archive after k active-learning iterations
    Eigen::VectorXd sigma;
    Eigen::Vector2d scaled_ref = Eigen::Vector2d::Zero();
    std::vector<std::string> warnings;
};

/// HVI of each archive prefix against `reference`, with sigma taken over all
/// records and one box corner shared by every prefix so the trace is
/// comparable across iterations.
HviTrace hvi_trace(const std::vector<EvaluationRecord>& records, const Eigen::MatrixXd& reference,
                   std::size_t iterations);

/// Half-width of the two-sided 80% Student-t interval of the mean; empty for
/// fewer than two values.
std::optional<double> ci80_half_width(const std::vector<double>& values);

/// Reads a scenario file and applies `key=value` overrides (dotted keys reach
/// nested objects; values are JSON, falling back to plain strings). A
/// relative evaluator working_dir resolves against the scenario's directory.
Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides = {},
                       std::optional<std::uint64_t> seed = std::nullopt);

struct RunCommand
{
    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    std::optional<std::string> reference_front;
};

struct ReportCommand
{
    std::vector<std::string> run_dirs;
    std::optional<std::string> reference_front;
    std::string output = "report.csv";
};

/// Each command returns the process exit status. Failures print one
/// `error: <kind>: <message>` line to err.
int cmd_run(const RunCommand& command, std::ostream& out, std::ostream& err);
int cmd_brute_force(const std::string& scenario_path, std::ostream& out, std::ostream& err);
int cmd_report(const ReportCommand& command, std::ostream& out, std::ostream& err);

}  // namespace dse
