#include "dse/evaluator.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <unordered_map>

#include "dse/errors.hpp"
#include "dse/parallel.hpp"
#include "dse/subprocess.hpp"

namespace dse {
namespace {

using NamedOutputs = std::vector<std::pair<std::string, std::string>>;
using BuiltinFunction = std::function<NamedOutputs(const DesignSpace&, const Configuration&)>;

const Value& value_of(const DesignSpace& space, const Configuration& c, const std::string& name)
{
    auto i = space.index_of(name);
    if (!i)
        throw ProtocolError("builtin evaluator needs a parameter named '" + name + "'");
    return c.values[*i];
}

double numeric_of(const DesignSpace& space, const Configuration& c, const std::string& name)
{
    auto i = space.index_of(name);
    if (!i)
        throw ProtocolError("builtin evaluator needs a parameter named '" + name + "'");
    if (space[*i].kind() == ParameterKind::categorical)
        throw ProtocolError("builtin evaluator needs numeric parameter '" + name + "'");
    return space[*i].encode(c.values[*i]);
}

std::int64_t integral_of(const DesignSpace& space, const Configuration& c, const std::string& name)
{
    double v = numeric_of(space, c, name);
    if (std::floor(v) != v)
        throw DomainError("toy_fpga parameter " + name + " must be integral, got " + format_number(v));
    return static_cast<std::int64_t>(v);
}

NamedOutputs toy_fpga_outputs(const DesignSpace& space, const Configuration& c)
{
    const Value& s = value_of(space, c, "S");
    bool pipelined;
    if (auto level = std::get_if<std::string>(&s); level && (*level == "true" || *level == "false"))
        pipelined = *level == "true";
    else
        throw DomainError("toy_fpga parameter S must be the level true or false");
    ToyFpgaCost cost = toy_fpga(integral_of(space, c, "T"), integral_of(space, c, "P"), pipelined,
                                integral_of(space, c, "B"));
    return {{"cycles", format_number(cost.cycles)},
            {"logic", format_number(cost.logic)},
            {"feasible", cost.feasible ? "true" : "false"}};
}

/// f1 depends on A alone; f2 on B and C. Always feasible.
NamedOutputs separable_outputs(const DesignSpace& space, const Configuration& c)
{
    double a = numeric_of(space, c, "A");
    double b = numeric_of(space, c, "B");
    double cc = numeric_of(space, c, "C");
    return {{"f1", format_number(a * a + 1.0)}, {"f2", format_number(b + 2.0 * cc * cc)}, {"feasible", "true"}};
}

const std::map<std::string, BuiltinFunction>& builtins()
{
    static const std::map<std::string, BuiltinFunction> registry{
        {"toy_fpga", toy_fpga_outputs},
        {"separable", separable_outputs},
    };
    return registry;
}

CsvTable evaluate_builtin(const DesignSpace& space, const BuiltinFunction& fn, const std::vector<Configuration>& batch)
{
    std::vector<NamedOutputs> outputs(batch.size());
    parallel_for(batch.size(), [&](std::size_t i) { outputs[i] = fn(space, batch[i]); });

    CsvTable table;
    for (const auto& p : space.parameters())
        table.header.push_back(p.name());
    if (!outputs.empty())
        for (const auto& [name, _] : outputs.front())
            table.header.push_back(name);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        std::vector<std::string> row;
        for (std::size_t k = 0; k < space.dimension(); ++k)
            row.push_back(space[k].format(batch[i].values[k]));
        for (const auto& [_, cell] : outputs[i])
            row.push_back(cell);
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace

const std::vector<std::string>& builtin_evaluator_names()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, _] : builtins())
            out.push_back(name);
        return out;
    }();
    return names;
}

ToyFpgaCost toy_fpga(std::int64_t tile, std::int64_t parallelism, bool pipelined, std::int64_t banks)
{
    auto power_of_two_in = [](std::int64_t v, std::int64_t lo, std::int64_t hi) {
        return v >= lo && v <= hi && (v & (v - 1)) == 0;
    };
    if (!power_of_two_in(tile, 2, 64))
        throw DomainError("toy_fpga tile size T must be one of 2, 4, 8, 16, 32, 64");
    if (!power_of_two_in(parallelism, 1, 16))
        throw DomainError("toy_fpga parallelism P must be one of 1, 2, 4, 8, 16");
    if (banks < 1 || banks > 4)
        throw DomainError("toy_fpga banks B must lie in [1, 4]");

    auto ceil_div = [](std::int64_t a, std::int64_t b) { return (a + b - 1) / b; };
    std::int64_t cycles = ceil_div(4096, tile) * ceil_div(tile, parallelism) * (pipelined ? 1 : 2) + 64 * banks;
    std::int64_t logic = 5 * parallelism + 3 * tile * (pipelined ? 2 : 1) + 7 * banks;
    return {static_cast<double>(cycles), static_cast<double>(logic), logic <= 120};
}

DesignSpace toy_fpga_space()
{
    return DesignSpace({
        Parameter::ordinal("T", {2, 4, 8, 16, 32, 64}, Prior::decay()),
        Parameter::ordinal("P", {1, 2, 4, 8, 16}, Prior::decay()),
        Parameter::categorical("S", {"true", "false"}),
        Parameter::integer("B", 1, 4),
    });
}

std::string request_csv(const DesignSpace& space, const std::vector<Configuration>& batch)
{
    CsvTable table;
    for (const auto& p : space.parameters())
        table.header.push_back(p.name());
    for (const auto& c : batch) {
        std::vector<std::string> row;
        for (std::size_t k = 0; k < space.dimension(); ++k)
            row.push_back(space[k].format(c.values[k]));
        table.rows.push_back(std::move(row));
    }
    return write_csv(table);
}

std::vector<EvaluationRecord> join_response(const DesignSpace& space, const EvaluatorSpec& spec,
                                            const std::vector<Configuration>& batch, const CsvTable& response)
{
    auto require = [&](const std::string& name, const char* what) {
        int col = response.column(name);
        if (col < 0)
            throw ProtocolError(std::string("evaluator response lacks ") + what + " column '" + name + "'");
        return static_cast<std::size_t>(col);
    };
    std::vector<std::size_t> param_cols, objective_cols;
    for (const auto& p : space.parameters())
        param_cols.push_back(require(p.name(), "parameter"));
    for (const auto& name : spec.objectives)
        objective_cols.push_back(require(name, "objective"));
    std::optional<std::size_t> feasible_col;
    if (spec.feasibility)
        feasible_col = require(spec.feasibility->name, "feasibility");

    std::unordered_map<std::string, std::size_t> wanted;
    for (std::size_t i = 0; i < batch.size(); ++i)
        wanted.emplace(format_configuration(space, batch[i]), i);

    std::vector<std::optional<EvaluationRecord>> joined(batch.size());
    for (std::size_t r = 0; r < response.rows.size(); ++r) {
        const auto& row = response.rows[r];
        auto where = "response row " + std::to_string(r + 1);
        Configuration c;
        try {
            for (std::size_t k = 0; k < space.dimension(); ++k)
                c.values.push_back(space[k].parse(row[param_cols[k]]));
        } catch (const DomainError& e) {
            throw EvaluationError(where + ": " + e.what());
        }
        std::string key = format_configuration(space, c);
        auto it = wanted.find(key);
        if (it == wanted.end())
            throw EvaluationError(where + ": configuration (" + key + ") was not requested");
        if (joined[it->second])
            throw EvaluationError(where + ": configuration (" + key + ") appears twice");

        EvaluationRecord rec;
        rec.config = batch[it->second];
        rec.objectives.resize(static_cast<Eigen::Index>(objective_cols.size()));
        for (std::size_t j = 0; j < objective_cols.size(); ++j) {
            const std::string& cell = row[objective_cols[j]];
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
                throw EvaluationError(where + ": objective '" + spec.objectives[j] + "' value '" + cell
                                      + "' is not a finite number");
            rec.objectives[static_cast<Eigen::Index>(j)] = v;
        }
        rec.feasible = !feasible_col || row[*feasible_col] == spec.feasibility->true_value;
        joined[it->second] = std::move(rec);
    }

    std::vector<EvaluationRecord> records;
    records.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (!joined[i])
            throw EvaluationError("evaluator response is missing configuration ("
                                  + format_configuration(space, batch[i]) + ")");
        records.push_back(std::move(*joined[i]));
    }
    return records;
}

std::vector<EvaluationRecord> evaluate_batch(const DesignSpace& space, const EvaluatorSpec& spec,
                                             const std::vector<Configuration>& batch)
{
    if (batch.empty())
        throw DomainError("cannot evaluate an empty batch");

    if (const auto* builtin = std::get_if<BuiltinEvaluator>(&spec.mode)) {
        auto it = builtins().find(builtin->name);
        if (it == builtins().end())
            throw ProtocolError("unknown builtin evaluator '" + builtin->name + "'");
        return join_response(space, spec, batch, evaluate_builtin(space, it->second, batch));
    }

    const auto& sub = std::get<SubprocessEvaluator>(spec.mode);
    ProcessResult proc = run_process(sub.command, sub.working_dir, request_csv(space, batch), sub.timeout_seconds);
    std::string raw = proc.out + proc.err;
    if (proc.timed_out)
        throw EvaluationError("evaluator timed out after " + format_number(sub.timeout_seconds) + " s", raw);
    if (proc.exit_code != 0)
        throw EvaluationError("evaluator exited with status " + std::to_string(proc.exit_code), raw);
    try {
        return join_response(space, spec, batch, parse_csv(proc.out));
    } catch (const ParseError& e) {
        throw EvaluationError(std::string("unparseable evaluator response: ") + e.what(), raw);
    } catch (const EvaluationError& e) {
        throw EvaluationError(e.what(), raw);
    }
}

BruteForceResult brute_force_front(const DesignSpace& space, const EvaluatorSpec& spec)
{
    BruteForceResult result;
    result.records = evaluate_batch(space, spec, enumerate_space(space));
    result.front = constrained_front(result.records);
    return result;
}

}  // namespace dse
