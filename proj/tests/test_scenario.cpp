#include <doctest.h>

#include "dse/errors.hpp"
#include "dse/scenario.hpp"

using namespace dse;

namespace {

std::string scenario_with(const std::string& parameters, const std::string& extra = "")
{
    return R"({"application_name":"t","optimization_objectives":["y1","y2"],)"
           R"("evaluator":{"builtin":"toy_fpga"},"input_parameters":)"
           + parameters + extra + "}";
}

}  // namespace

TEST_CASE("ordinal parameter from JSON")
{
    auto s = parse_scenario(scenario_with(R"({"a":{"parameter_type":"ordinal","values":[1,5,8]}})"));
    REQUIRE(s.space.dimension() == 1);
    CHECK(s.space[0].kind() == ParameterKind::ordinal);
    CHECK(s.space[0].values() == std::vector<double>{1, 5, 8});
}

TEST_CASE("omitted priors default to uniform beta(1,1)")
{
    auto s = parse_scenario(scenario_with(R"({"a":{"parameter_type":"ordinal","values":[1,5,8]},)"
                                          R"("b":{"parameter_type":"real","values":[0,1]},)"
                                          R"("c":{"parameter_type":"integer","values":[0,9]}})"));
    for (const auto& p : s.space.parameters()) {
        CHECK(p.prior().shape == PriorShape::uniform);
        CHECK(p.prior().alpha == 1.0);
        CHECK(p.prior().beta == 1.0);
    }
}

TEST_CASE("defaults of optional fields")
{
    auto s = parse_scenario(scenario_with(R"({"a":{"parameter_type":"integer","values":[0,9]}})"));
    CHECK(s.doe_samples == 1000);
    CHECK(s.optimization_iterations == 50);
    CHECK(s.evaluations_per_iteration == 100);
    CHECK(s.pareto_prediction_samples == 100000);
    CHECK(s.regressor.n_estimators == 10);
    CHECK_FALSE(s.regressor.max_depth.has_value());
    CHECK_FALSE(s.classifier.max_features.has_value());
    CHECK(s.classifier.bootstrap);
    CHECK(s.classifier.class_weight == ClassWeight{0.75, 0.25});
    CHECK(s.feasibility_threshold == 0.5);
}

TEST_CASE("categorical probabilities must sum to one")
{
    try {
        parse_scenario(scenario_with(
            R"({"v":{"parameter_type":"categorical","values":["car","truck","motorbike"],"prior":[0.5,0.3,0.1]}})"));
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "input_parameters.v.prior");
        CHECK(std::string(e.what()).find("probabilities sum to 0.9") != std::string::npos);
    }
}

TEST_CASE("validation errors name the offending field")
{
    auto field_of = [](const std::string& text) {
        try {
            parse_scenario(text);
        } catch (const ValidationError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    CHECK(field_of(scenario_with(R"({"a":{"parameter_type":"complex","values":[1]}})"))
          == "input_parameters.a.parameter_type");
    CHECK(field_of(scenario_with(R"({"a":{"parameter_type":"ordinal","values":[1,1]}})"))
          == "input_parameters.a.values");
    CHECK(field_of(scenario_with(R"({"y1":{"parameter_type":"ordinal","values":[1]}})"))
          == "optimization_objectives");
    CHECK(field_of(scenario_with(R"({"a":{"parameter_type":"integer","values":[0,1]}})",
                                 R"(,"surrogate":{"classifier":{"class_weight":{"true":0.7,"false":0.7}}})"))
          == "surrogate.classifier.class_weight");
    CHECK(field_of(scenario_with(R"({"a":{"parameter_type":"integer","values":[0,1]}})",
                                 R"(,"evaluations_per_optimization_iteration":0)"))
          == "evaluations_per_optimization_iteration");
}

TEST_CASE("malformed JSON reports line and column")
{
    try {
        parse_scenario("{\n  \"application_name\": \"x\",\n  oops\n}");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("column") != std::string::npos);
    }
}

TEST_CASE("parameter order follows the file, not key order")
{
    auto s = parse_scenario(scenario_with(R"({"zeta":{"parameter_type":"integer","values":[0,1]},)"
                                          R"("alpha":{"parameter_type":"integer","values":[0,1]}})"));
    CHECK(s.space[0].name() == "zeta");
    CHECK(s.space[1].name() == "alpha");
}

TEST_CASE("serialize then parse is the identity")
{
    auto s = parse_scenario(R"({
        "application_name": "round trip",
        "optimization_objectives": ["cycles", "logic"],
        "feasible_output": {"name": "feasible", "true_value": "true"},
        "input_parameters": {
            "T": {"parameter_type": "ordinal", "values": [64, 2, 4, 8, 16, 32], "prior": "decay"},
            "P": {"parameter_type": "ordinal", "values": [1, 2, 4, 8, 16], "prior": [2.0, 5.0]},
            "S": {"parameter_type": "categorical", "values": [true, false], "prior": [0.25, 0.75]},
            "V": {"parameter_type": "categorical", "values": ["a", "b", "c"]},
            "B": {"parameter_type": "integer", "values": [1, 4], "prior": "exponential"},
            "R": {"parameter_type": "real", "values": [0.1, 0.7], "prior": "gaussian"}
        },
        "design_of_experiment": {"number_of_samples": 30},
        "optimization_iterations": 5,
        "evaluations_per_optimization_iteration": 20,
        "pareto_prediction_samples": 5000,
        "seed": 18446744073709551615,
        "output_dir": "out/x",
        "surrogate": {
            "regressor": {"n_estimators": 20, "max_depth": 8, "max_features": 0.5, "bootstrap": false},
            "classifier": {"n_estimators": 100, "max_features": "auto", "class_weight": {"true": 0.9, "false": 0.1}},
            "feasibility_filter": false
        },
        "evaluator": {"command": "python3 eval.py", "working_dir": "scripts", "timeout_seconds": 12.5}
    })");
    CHECK(s.seed == 18446744073709551615ULL);
    CHECK(s.space[0].values().front() == 2.0);
    CHECK(s.space[2].levels() == std::vector<std::string>{"true", "false"});
    auto again = parse_scenario(serialize_scenario(s));
    CHECK(again == s);
    CHECK(serialize_scenario(again) == serialize_scenario(s));
}
