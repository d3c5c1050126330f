#include "dse/report.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "dse/errors.hpp"
#include "dse/evaluator.hpp"
#include "dse/forest.hpp"
#include "dse/optimizer.hpp"
#include "dse/parallel.hpp"

#ifndef DSE_VERSION
#define DSE_VERSION "1.0.0"
#endif

namespace dse {
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

double parse_number(const std::string& cell, const std::string& what)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw ParseError(what + ": '" + cell + "' is not a number");
    return v;
}

struct IoError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text))
        throw IoError("cannot write " + path.string());
}

std::size_t column_of(const CsvTable& table, const std::string& name, const std::string& file)
{
    int col = table.column(name);
    if (col < 0)
        throw ProtocolError(file + " lacks column '" + name + "'");
    return static_cast<std::size_t>(col);
}

std::string error_kind(const std::exception& e)
{
    if (dynamic_cast<const ParseError*>(&e))
        return "parse_error";
    if (dynamic_cast<const ValidationError*>(&e))
        return "validation_error";
    if (dynamic_cast<const EvaluationError*>(&e))
        return "evaluation_error";
    if (dynamic_cast<const ProtocolError*>(&e))
        return "protocol_error";
    if (dynamic_cast<const UnsupportedError*>(&e))
        return "unsupported";
    if (dynamic_cast<const DomainError*>(&e))
        return "domain_error";
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e))
        return "io_error";
    return "error";
}

int report_error(std::ostream& err, const std::string& kind, std::string message)
{
    for (char& ch : message)
        if (ch == '\n' || ch == '\r')
            ch = ' ';
    err << "error: " << kind << ": " << message << '\n';
    return 1;
}

Json to_json(const Eigen::VectorXd& v)
{
    Json j = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        j.push_back(v[i]);
    return j;
}

std::optional<double> diagnostic_recall(const Scenario& s, const std::vector<EvaluationRecord>& records)
{
    constexpr int kFolds = 5;
    if (records.size() < kFolds || std::none_of(records.begin(), records.end(), [](const auto& r) { return r.feasible; }))
        return std::nullopt;
    std::vector<Configuration> configs;
    std::vector<bool> labels;
    for (const auto& r : records) {
        configs.push_back(r.config);
        labels.push_back(r.feasible);
    }
    Rng rng(s.seed, 5);
    return kfold_recall(s.space.encode(configs), labels, s.classifier, kFolds, rng, s.space.categorical_mask(),
                        s.feasibility_threshold);
}

void set_dotted(Json& doc, const std::string& key, Json value)
{
    Json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        auto dot = key.find('.', start);
        std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty())
            throw ValidationError(key, "malformed override key");
        if (dot == std::string::npos) {
            (*node)[part] = std::move(value);
            return;
        }
        if (!node->contains(part) || !(*node)[part].is_object())
            (*node)[part] = Json::object();
        node = &(*node)[part];
        start = dot + 1;
    }
}

}  // namespace

CsvTable records_table(const DesignSpace& space, const std::vector<std::string>& objectives,
                       const std::vector<EvaluationRecord>& records)
{
    CsvTable table;
    for (const auto& p : space.parameters())
        table.header.push_back(p.name());
    for (const auto& o : objectives)
        table.header.push_back(o);
    table.header.push_back("feasible");
    table.header.push_back("iteration_tag");
    for (const auto& r : records) {
        std::vector<std::string> row;
        for (std::size_t k = 0; k < space.dimension(); ++k)
            row.push_back(space[k].format(r.config.values[k]));
        for (Eigen::Index j = 0; j < r.objectives.size(); ++j)
            row.push_back(format_number(r.objectives[j]));
        row.push_back(r.feasible ? "true" : "false");
        row.push_back(std::to_string(r.iteration_tag));
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::vector<EvaluationRecord> records_from_table(const DesignSpace& space, const std::vector<std::string>& objectives,
                                                 const CsvTable& table)
{
    std::vector<std::size_t> param_cols, objective_cols;
    for (const auto& p : space.parameters())
        param_cols.push_back(column_of(table, p.name(), "record table"));
    for (const auto& o : objectives)
        objective_cols.push_back(column_of(table, o, "record table"));
    std::size_t feasible_col = column_of(table, "feasible", "record table");
    std::size_t tag_col = column_of(table, "iteration_tag", "record table");

    std::vector<EvaluationRecord> records;
    for (const auto& row : table.rows) {
        EvaluationRecord r;
        for (std::size_t k = 0; k < space.dimension(); ++k)
            r.config.values.push_back(space[k].parse(row[param_cols[k]]));
        r.objectives.resize(static_cast<Eigen::Index>(objectives.size()));
        for (std::size_t j = 0; j < objectives.size(); ++j)
            r.objectives[static_cast<Eigen::Index>(j)] = parse_number(row[objective_cols[j]], objectives[j]);
        r.feasible = row[feasible_col] == "true";
        r.iteration_tag = static_cast<int>(parse_number(row[tag_col], "iteration_tag"));
        records.push_back(std::move(r));
    }
    return records;
}

Eigen::MatrixXd front_objectives(const CsvTable& table, const std::vector<std::string>& objectives)
{
    std::vector<std::size_t> cols;
    for (const auto& o : objectives)
        cols.push_back(column_of(table, o, "front file"));
    int feasible_col = table.column("feasible");
    std::vector<Eigen::VectorXd> rows;
    for (const auto& row : table.rows) {
        if (feasible_col >= 0 && row[static_cast<std::size_t>(feasible_col)] != "true")
            continue;
        Eigen::VectorXd y(static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j)
            y[static_cast<Eigen::Index>(j)] = parse_number(row[cols[j]], objectives[j]);
        rows.push_back(std::move(y));
    }
    Eigen::MatrixXd Y(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(objectives.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        Y.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    return Y;
}

HviTrace hvi_trace(const std::vector<EvaluationRecord>& records, const Eigen::MatrixXd& reference,
                   std::size_t iterations)
{
    HviTrace trace;
    ObjectiveScale scale = objective_scale(objective_matrix(records));
    trace.sigma = scale.sigma;
    trace.warnings = scale.warnings;

    std::vector<Eigen::MatrixXd> fronts;
    for (std::size_t k = 0; k <= iterations; ++k) {
        std::vector<EvaluationRecord> prefix;
        for (const auto& r : records)
            if (r.iteration_tag < static_cast<int>(k))
                prefix.push_back(r);
        fronts.push_back(objective_matrix(prefix, constrained_front(prefix)));
        if (fronts.back().cols() == 0)
            fronts.back().resize(0, reference.cols());
    }
    std::vector<const Eigen::MatrixXd*> all{&reference};
    for (const auto& f : fronts)
        all.push_back(&f);
    trace.scaled_ref = hvi_reference_point(all, trace.sigma);
    for (const auto& f : fronts)
        trace.values.push_back(hvi(f, reference, trace.sigma, trace.scaled_ref));
    return trace;
}

std::optional<double> ci80_half_width(const std::vector<double>& values)
{
    if (values.size() < 2)
        return std::nullopt;
    // Identical values have no spread; the rounded mean would invent some.
    if (std::adjacent_find(values.begin(), values.end(), std::not_equal_to<>()) == values.end())
        return 0.0;
    double n = static_cast<double>(values.size());
    double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values)
        ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / (n - 1.0));
    boost::math::students_t_distribution<double> t(n - 1.0);
    return boost::math::quantile(t, 0.9) * sd / std::sqrt(n);
}

Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides,
                       std::optional<std::uint64_t> seed)
{
    std::string text = read_file(path);
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!doc.is_object())
        throw ValidationError("(root)", "scenario must be a JSON object");
    for (const auto& item : overrides) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ValidationError(item, "override must look like key=value");
        std::string value = item.substr(eq + 1);
        Json parsed = Json::parse(value, nullptr, false);
        set_dotted(doc, item.substr(0, eq), parsed.is_discarded() ? Json(value) : parsed);
    }
    if (seed)
        doc["seed"] = *seed;

    Scenario scenario = parse_scenario(doc.dump());
    if (auto* sub = std::get_if<SubprocessEvaluator>(&scenario.evaluator.mode)) {
        fs::path base = fs::absolute(path).parent_path();
        fs::path dir = sub->working_dir.empty() ? base : base / sub->working_dir;
        sub->working_dir = dir.lexically_normal().string();
    }
    return scenario;
}

int cmd_run(const RunCommand& command, std::ostream& out, std::ostream& err)
{
    auto started = std::chrono::steady_clock::now();
    try {
        Scenario s = load_scenario(command.scenario_path, command.overrides, command.seed);
        std::optional<Eigen::MatrixXd> supplied_reference;
        if (command.reference_front)
            supplied_reference = front_objectives(parse_csv(read_file(*command.reference_front)), s.objectives);

        RunResult result = run(s);
        auto finished_run = std::chrono::steady_clock::now();

        fs::path dir(s.output_dir);
        fs::create_directories(dir);
        const auto& records = result.archive.records();
        write_file(dir / "samples.csv", write_csv(records_table(s.space, s.objectives, records)));
        write_file(dir / "pareto.csv", write_csv(records_table(s.space, s.objectives, result.archive.front_records())));

        Json meta;
        meta["application_name"] = s.application_name;
        meta["version"] = DSE_VERSION;
        meta["seed"] = s.seed;
        meta["parameters"] = Json::array();
        for (const auto& p : s.space.parameters())
            meta["parameters"].push_back(p.name());
        meta["objectives"] = s.objectives;
        meta["evaluations"] = records.size();
        meta["warmup_evaluations"] = std::count_if(records.begin(), records.end(),
                                                   [](const auto& r) { return r.iteration_tag < 0; });
        meta["active_learning_iterations"] = result.iterations;
        meta["batch_sizes"] = result.batch_sizes;
        meta["termination"] = result.termination;
        meta["threads"] = thread_count();
        if (result.error)
            meta["error"] = *result.error;

        CsvTable trace_table{{"iteration", "hvi"}, {}};
        if (s.objectives.size() == 2 && !records.empty()) {
            Eigen::MatrixXd reference = supplied_reference
                                            ? *supplied_reference
                                            : objective_matrix(records, result.archive.front());
            Json hvi_meta;
            hvi_meta["reference"] = supplied_reference ? *command.reference_front : std::string("self");
            if (reference.rows() > 0) {
                HviTrace trace = hvi_trace(records, reference, result.iterations);
                for (std::size_t k = 0; k < trace.values.size(); ++k)
                    trace_table.rows.push_back({std::to_string(k), format_number(trace.values[k])});
                hvi_meta["sigma"] = to_json(trace.sigma);
                hvi_meta["sigma_source"] = "sample standard deviation over all evaluated records of this run";
                hvi_meta["scaled_reference_point"] = to_json(trace.scaled_ref);
                hvi_meta["warnings"] = trace.warnings;
                if (!trace.values.empty())
                    hvi_meta["final"] = trace.values.back();
            } else {
                hvi_meta["warnings"] = Json::array({"reference front is empty; no trace"});
            }
            meta["hvi"] = hvi_meta;
        }
        write_file(dir / "hvi_trace.csv", write_csv(trace_table));

        if (!result.models.regressors.empty()) {
            CsvTable importance{{"parameter"}, {}};
            for (const auto& o : s.objectives)
                importance.header.push_back(o);
            std::vector<Eigen::VectorXd> columns;
            for (const auto& model : result.models.regressors)
                columns.push_back(feature_importance(model));
            for (std::size_t k = 0; k < s.space.dimension(); ++k) {
                std::vector<std::string> row{s.space[k].name()};
                for (const auto& col : columns)
                    row.push_back(format_number(col[static_cast<Eigen::Index>(k)]));
                importance.rows.push_back(std::move(row));
            }
            write_file(dir / "feature_importance.csv", write_csv(importance));
        }

        if (s.feasibility) {
            std::vector<EvaluationRecord> warmup;
            for (const auto& r : records)
                if (r.iteration_tag < 0)
                    warmup.push_back(r);
            Json diag;
            auto as_json = [](std::optional<double> v) { return v ? Json(*v) : Json(nullptr); };
            diag["recall_5fold_warmup"] = as_json(diagnostic_recall(s, warmup));
            diag["recall_5fold_final"] = as_json(diagnostic_recall(s, records));
            meta["classifier"] = diag;
        }

        auto seconds = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };
        meta["timings_seconds"] = {{"optimization", seconds(started, finished_run)},
                                   {"total", seconds(started, std::chrono::steady_clock::now())}};
        write_file(dir / "run_meta.json", meta.dump(2) + "\n");

        if (result.error)
            return report_error(err, "evaluation_error", *result.error + " (partial archive written to "
                                                             + dir.string() + ")");
        if (result.archive.front().empty())
            err << "warning: no feasible configuration found\n";
        out << "evaluations=" << records.size() << " front=" << result.archive.front().size()
            << " iterations=" << result.iterations << " termination=" << result.termination << '\n';
        return 0;
    } catch (const std::exception& e) {
        return report_error(err, error_kind(e), e.what());
    }
}

int cmd_brute_force(const std::string& scenario_path, std::ostream& out, std::ostream& err)
{
    try {
        Scenario s = load_scenario(scenario_path);
        BruteForceResult truth = brute_force_front(s.space, s.evaluator);
        fs::path dir(s.output_dir);
        fs::create_directories(dir);
        std::vector<EvaluationRecord> front;
        for (std::size_t i : truth.front)
            front.push_back(truth.records[i]);
        write_file(dir / "all_points.csv", write_csv(records_table(s.space, s.objectives, truth.records)));
        write_file(dir / "true_front.csv", write_csv(records_table(s.space, s.objectives, front)));
        out << "points=" << truth.records.size() << " front=" << front.size() << '\n';
        return 0;
    } catch (const std::exception& e) {
        return report_error(err, error_kind(e), e.what());
    }
}

int cmd_report(const ReportCommand& command, std::ostream& out, std::ostream& err)
{
    try {
        if (command.run_dirs.empty())
            throw ValidationError("run_dirs", "need at least one run directory");

        std::vector<std::string> objectives;
        std::vector<Eigen::MatrixXd> fronts;
        std::vector<std::vector<EvaluationRecord>> runs;
        for (const auto& d : command.run_dirs) {
            fs::path dir(d);
            Json meta = Json::parse(read_file(dir / "run_meta.json"));
            auto names = meta.at("objectives").get<std::vector<std::string>>();
            if (objectives.empty())
                objectives = names;
            else if (names != objectives)
                throw ProtocolError("run " + d + " has a different objective set");

            CsvTable samples = parse_csv(read_file(dir / "samples.csv"));
            std::vector<EvaluationRecord> records;
            std::size_t feasible_col = column_of(samples, "feasible", "samples.csv");
            std::vector<std::size_t> cols;
            for (const auto& o : objectives)
                cols.push_back(column_of(samples, o, "samples.csv"));
            for (const auto& row : samples.rows) {
                EvaluationRecord r;
                r.objectives.resize(static_cast<Eigen::Index>(cols.size()));
                for (std::size_t j = 0; j < cols.size(); ++j)
                    r.objectives[static_cast<Eigen::Index>(j)] = parse_number(row[cols[j]], objectives[j]);
                r.feasible = row[feasible_col] == "true";
                records.push_back(std::move(r));
            }
            runs.push_back(std::move(records));
            fronts.push_back(front_objectives(parse_csv(read_file(dir / "pareto.csv")), objectives));
        }
        if (objectives.size() != 2)
            throw UnsupportedError("report needs exactly two objectives");

        Eigen::MatrixXd reference;
        if (command.reference_front) {
            Eigen::MatrixXd supplied = front_objectives(parse_csv(read_file(*command.reference_front)), objectives);
            std::vector<Eigen::Index> keep = pareto_front(supplied);
            reference = supplied(keep, Eigen::all);
        } else {
            std::vector<EvaluationRecord> ref = reference_front(runs);
            reference = objective_matrix(ref);
        }
        if (reference.rows() == 0)
            throw DomainError("reference front is empty");

        std::vector<EvaluationRecord> everything;
        for (const auto& r : runs)
            everything.insert(everything.end(), r.begin(), r.end());
        ObjectiveScale scale = objective_scale(objective_matrix(everything));
        for (const auto& w : scale.warnings)
            err << "warning: " << w << '\n';

        CsvTable report{{"run", "final_hvi"}, {}};
        std::vector<double> values;
        for (std::size_t i = 0; i < fronts.size(); ++i) {
            values.push_back(hvi(fronts[i], reference, scale.sigma));
            report.rows.push_back({command.run_dirs[i], format_number(values.back())});
        }
        double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        auto half = ci80_half_width(values);
        report.rows.push_back({"mean", format_number(mean)});
        report.rows.push_back({"ci80_half_width", half ? format_number(*half) : std::string()});
        write_file(command.output, write_csv(report));
        out << write_csv(report);
        return 0;
    } catch (const std::exception& e) {
        return report_error(err, error_kind(e), e.what());
    }
}

}  // namespace dse
