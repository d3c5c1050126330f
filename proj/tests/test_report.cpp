#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dse/csv.hpp"
#include "dse/errors.hpp"
#include "dse/evaluator.hpp"
#include "dse/report.hpp"

using namespace dse;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& path, const std::string& text)
{
    std::ofstream(path, std::ios::binary) << text;
}

/// Fresh scratch directory under the build tree's temp area.
struct Scratch
{
    fs::path dir;
    explicit Scratch(const std::string& name)
        : dir(fs::temp_directory_path() / ("dse_test_report_" + std::to_string(::getpid()) + "_" + name))
    {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
};

const char* toy_scenario_text = R"({
  "application_name": "toy",
  "optimization_objectives": ["cycles", "logic"],
  "feasible_output": {"name": "feasible", "true_value": "true"},
  "input_parameters": {
    "T": {"parameter_type": "ordinal", "values": [2, 4, 8, 16, 32, 64], "prior": "decay"},
    "P": {"parameter_type": "ordinal", "values": [1, 2, 4, 8, 16], "prior": "decay"},
    "S": {"parameter_type": "categorical", "values": ["true", "false"]},
    "B": {"parameter_type": "integer", "values": [1, 4]}
  },
  "design_of_experiment": {"number_of_samples": 30},
  "optimization_iterations": 5,
  "evaluations_per_optimization_iteration": 20,
  "seed": 3,
  "output_dir": "unused",
  "evaluator": {"builtin": "toy_fpga"}
})";

struct Run
{
    int status;
    std::string out, err;
};

Run run_cli(const fs::path& scenario, std::vector<std::string> overrides, std::optional<std::uint64_t> seed = {},
            std::optional<std::string> reference = {})
{
    std::ostringstream out, err;
    RunCommand cmd{scenario.string(), seed, std::move(overrides), std::move(reference)};
    int status = cmd_run(cmd, out, err);
    return {status, out.str(), err.str()};
}

std::string set_output(const fs::path& dir)
{
    return "output_dir=" + dir.string();
}

}  // namespace

TEST_CASE("records round-trip through CSV")
{
    auto space = toy_fpga_space();
    std::vector<EvaluationRecord> records{
        {Configuration{{2.0, 1.0, std::string("true"), std::int64_t{1}}}, Eigen::Vector2d(4160, 24), true, -1},
        {Configuration{{64.0, 16.0, std::string("false"), std::int64_t{4}}}, Eigen::Vector2d(0.1, 1e300), false, 3}};
    auto table = records_table(space, {"cycles", "logic"}, records);
    CHECK(table.header == std::vector<std::string>{"T", "P", "S", "B", "cycles", "logic", "feasible", "iteration_tag"});
    CHECK(table.rows[0] == std::vector<std::string>{"2", "1", "true", "1", "4160", "24", "true", "-1"});
    auto text = write_csv(table);
    auto back = records_from_table(space, {"cycles", "logic"}, parse_csv(text));
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back[i].config == records[i].config);
        CHECK(back[i].objectives == records[i].objectives);
        CHECK(back[i].feasible == records[i].feasible);
        CHECK(back[i].iteration_tag == records[i].iteration_tag);
    }
    CHECK(write_csv(parse_csv(text)) == text);
}

TEST_CASE("CSV parser")
{
    auto t = parse_csv("a,b\r\n1,2\r\n\n3,\n");
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    CHECK(t.rows.size() == 2);
    CHECK(t.rows[1] == std::vector<std::string>{"3", ""});
    CHECK(t.column("b") == 1);
    CHECK(t.column("z") == -1);
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), ParseError);
    CHECK_THROWS_AS(parse_csv(""), ParseError);
}

TEST_CASE("80% Student-t half-width")
{
    CHECK_FALSE(ci80_half_width({0.3}).has_value());
    CHECK(*ci80_half_width({0.2, 0.2, 0.2}) == 0.0);
    CHECK(*ci80_half_width({1, 2, 3}) == doctest::Approx(1.0886621079036487).epsilon(1e-12));
    CHECK(*ci80_half_width({1, 2, 3, 4, 5}) == doctest::Approx(1.084140553344839).epsilon(1e-12));
}

TEST_CASE("scenario overrides")
{
    Scratch scratch("overrides");
    auto path = scratch.dir / "s.json";
    spit(path, toy_scenario_text);
    auto s = load_scenario(path.string(),
                           {"optimization_iterations=0", "surrogate.regressor.n_estimators=3", "application_name=x=y"},
                           99);
    CHECK(s.optimization_iterations == 0);
    CHECK(s.regressor.n_estimators == 3);
    CHECK(s.application_name == "x=y");
    CHECK(s.seed == 99);
    CHECK_THROWS_AS(load_scenario(path.string(), {"no_equals_sign"}), ValidationError);
    CHECK_THROWS_AS(load_scenario(path.string(), {"optimization_iterations=-1"}), ValidationError);

    auto ext = scratch.dir / "ext.json";
    std::string text = toy_scenario_text;
    text.replace(text.find(R"({"builtin": "toy_fpga"})"), 23, R"({"command": "true", "working_dir": "sub"})");
    spit(ext, text);
    auto e = load_scenario(ext.string());
    CHECK(std::get<SubprocessEvaluator>(e.evaluator.mode).working_dir == (fs::absolute(scratch.dir) / "sub").string());
}

TEST_CASE("run artifacts")
{
    Scratch scratch("artifacts");
    auto path = scratch.dir / "toy.json";
    spit(path, toy_scenario_text);

    auto a = run_cli(path, {set_output(scratch.dir / "a")}, 7);
    auto b = run_cli(path, {set_output(scratch.dir / "b")}, 7);
    REQUIRE(a.status == 0);
    REQUIRE(b.status == 0);
    for (const char* name : {"samples.csv", "pareto.csv", "hvi_trace.csv", "feature_importance.csv"})
        CHECK(slurp(scratch.dir / "a" / name) == slurp(scratch.dir / "b" / name));

    auto space = toy_fpga_space();
    std::vector<std::string> objectives{"cycles", "logic"};
    auto samples = records_from_table(space, objectives, parse_csv(slurp(scratch.dir / "a" / "samples.csv")));
    auto pareto = records_from_table(space, objectives, parse_csv(slurp(scratch.dir / "a" / "pareto.csv")));

    // Row count and contiguous iteration tags.
    std::set<int> tags;
    for (const auto& r : samples)
        tags.insert(r.iteration_tag);
    CHECK(*tags.begin() == -1);
    CHECK(static_cast<int>(tags.size()) == *tags.rbegin() + 2);
    CHECK(samples.size() <= 30 + 5 * 20);

    // pareto.csv is exactly the constrained front of samples.csv.
    auto front = constrained_front(samples);
    REQUIRE(front.size() == pareto.size());
    for (std::size_t i = 0; i < front.size(); ++i)
        CHECK(samples[front[i]].config == pareto[i].config);

    auto importance = parse_csv(slurp(scratch.dir / "a" / "feature_importance.csv"));
    CHECK(importance.header == std::vector<std::string>{"parameter", "cycles", "logic"});
    for (int col = 1; col <= 2; ++col) {
        double sum = 0;
        for (const auto& row : importance.rows)
            sum += std::stod(row[static_cast<std::size_t>(col)]);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }

    auto trace = parse_csv(slurp(scratch.dir / "a" / "hvi_trace.csv"));
    CHECK(trace.header == std::vector<std::string>{"iteration", "hvi"});
    CHECK(trace.rows.back()[1] == "0");  // against its own final front

    auto warmup_only = run_cli(path, {set_output(scratch.dir / "c"), "optimization_iterations=0"});
    REQUIRE(warmup_only.status == 0);
    CHECK(parse_csv(slurp(scratch.dir / "c" / "samples.csv")).rows.size() == 30);
}

TEST_CASE("feature importance singles out the driving parameter")
{
    Scratch scratch("importance");
    auto path = scratch.dir / "sep.json";
    spit(path, R"({
      "application_name": "separable",
      "optimization_objectives": ["f1", "f2"],
      "input_parameters": {
        "A": {"parameter_type": "real", "values": [-2, 2]},
        "B": {"parameter_type": "integer", "values": [0, 8]},
        "C": {"parameter_type": "real", "values": [-1, 1]}
      },
      "design_of_experiment": {"number_of_samples": 60},
      "optimization_iterations": 3,
      "evaluations_per_optimization_iteration": 20,
      "pareto_prediction_samples": 5000,
      "evaluator": {"builtin": "separable"}
    })");
    REQUIRE(run_cli(path, {set_output(scratch.dir / "out")}).status == 0);
    auto table = parse_csv(slurp(scratch.dir / "out" / "feature_importance.csv"));
    REQUIRE(table.rows.size() == 3);
    double a = std::stod(table.rows[0][1]);
    CHECK(a >= 0.5);
    CHECK(a > std::stod(table.rows[1][1]));
    CHECK(a > std::stod(table.rows[2][1]));
}

TEST_CASE("infeasible-only runs warn and still succeed")
{
    Scratch scratch("nofeasible");
    auto path = scratch.dir / "bad.json";
    std::string text = toy_scenario_text;
    text.replace(text.find(R"("values": [2, 4, 8, 16, 32, 64])"), 31, R"("values": [64])");
    text.replace(text.find(R"("values": [1, 2, 4, 8, 16])"), 26, R"("values": [16])");
    spit(path, text);
    auto r = run_cli(path, {set_output(scratch.dir / "out")});
    CHECK(r.status == 0);
    CHECK(r.err.find("warning: no feasible configuration found") != std::string::npos);
    CHECK(parse_csv(slurp(scratch.dir / "out" / "pareto.csv")).rows.empty());
}

TEST_CASE("errors exit 1 with one machine-readable line")
{
    Scratch scratch("errors");
    auto path = scratch.dir / "broken.json";
    spit(path, "{\"application_name\": ");
    auto r = run_cli(path, {});
    CHECK(r.status == 1);
    CHECK(r.err.rfind("error: parse_error: ", 0) == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

    auto missing = run_cli(scratch.dir / "nope.json", {});
    CHECK(missing.status == 1);
    CHECK(missing.err.rfind("error: io_error: ", 0) == 0);

    spit(path, toy_scenario_text);
    auto bad_set = run_cli(path, {"evaluations_per_optimization_iteration=0"});
    CHECK(bad_set.status == 1);
    CHECK(bad_set.err.find("evaluations_per_optimization_iteration") != std::string::npos);
}

TEST_CASE("brute force command")
{
    Scratch scratch("brute");
    auto path = scratch.dir / "toy.json";
    spit(path, toy_scenario_text);
    {
        // output_dir comes from the scenario; point it into the scratch area.
        auto s = std::string(toy_scenario_text);
        s.replace(s.find("\"unused\""), 8, "\"" + (scratch.dir / "truth").string() + "\"");
        spit(path, s);
    }
    std::ostringstream out, err;
    CHECK(cmd_brute_force(path.string(), out, err) == 0);
    CHECK(parse_csv(slurp(scratch.dir / "truth" / "all_points.csv")).rows.size() == 240);
    auto front = parse_csv(slurp(scratch.dir / "truth" / "true_front.csv"));
    auto oracle = parse_csv(slurp(std::string(DSE_TEST_DATA) + "/toy_fpga_front.csv"));
    CHECK(front.rows.size() == oracle.rows.size());

    auto one = scratch.dir / "one.json";
    std::string text = toy_scenario_text;
    text.replace(text.find("\"unused\""), 8, "\"" + (scratch.dir / "one").string() + "\"");
    text.replace(text.find(R"("values": [2, 4, 8, 16, 32, 64])"), 31, R"("values": [2])");
    text.replace(text.find(R"("values": [1, 2, 4, 8, 16])"), 26, R"("values": [1])");
    text.replace(text.find(R"("values": ["true", "false"])"), 27, R"("values": ["true"])");
    text.replace(text.find(R"("values": [1, 4])"), 16, R"("values": [1, 1])");
    spit(one, text);
    CHECK(cmd_brute_force(one.string(), out, err) == 0);
    CHECK(parse_csv(slurp(scratch.dir / "one" / "all_points.csv")).rows.size() == 1);

    auto real = scratch.dir / "real.json";
    text = toy_scenario_text;
    text.replace(text.find(R"({"parameter_type": "integer", "values": [1, 4]})"), 47,
                 R"({"parameter_type": "real", "values": [1, 4]})");
    spit(real, text);
    std::ostringstream err2;
    CHECK(cmd_brute_force(real.string(), out, err2) == 1);
    CHECK(err2.str().rfind("error: unsupported: ", 0) == 0);
}

TEST_CASE("report over several runs")
{
    Scratch scratch("report");
    auto path = scratch.dir / "toy.json";
    spit(path, toy_scenario_text);
    for (const char* name : {"r1", "r2"})
        REQUIRE(run_cli(path, {set_output(scratch.dir / name)}, 5).status == 0);
    REQUIRE(run_cli(path, {set_output(scratch.dir / "r3")}, 6).status == 0);

    auto report = [&](std::vector<std::string> dirs) {
        ReportCommand cmd;
        for (auto& d : dirs)
            cmd.run_dirs.push_back((scratch.dir / d).string());
        cmd.output = (scratch.dir / "report.csv").string();
        std::ostringstream out, err;
        int status = cmd_report(cmd, out, err);
        return std::pair{status, parse_csv(slurp(cmd.output))};
    };

    auto [s1, identical] = report({"r1", "r2"});
    REQUIRE(s1 == 0);
    CHECK(identical.rows[2] == std::vector<std::string>{"mean", identical.rows[0][1]});
    CHECK(identical.rows[3][1] == "0");

    auto [s2, single] = report({"r3"});
    REQUIRE(s2 == 0);
    CHECK(single.rows[1][1] == single.rows[0][1]);
    CHECK(single.rows[2][1].empty());

    // Different objective sets cannot be compared.
    auto meta = slurp(scratch.dir / "r3" / "run_meta.json");
    meta.replace(meta.find("\"logic\""), 7, "\"area\"");
    spit(scratch.dir / "r3" / "run_meta.json", meta);
    auto [s3, ignored] = report({"r1", "r3"});
    CHECK(s3 == 1);
}
