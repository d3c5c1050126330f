#include "dse/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <json.hpp>

#include "dse/errors.hpp"

namespace dse {
namespace {

using Json = nlohmann::ordered_json;

const Json* find(const Json& obj, const char* key)
{
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

template<class T>
T get_as(const Json& j, const std::string& field)
{
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(field, e.what());
    }
}

std::size_t get_count(const Json& obj, const char* key, std::size_t fallback, std::size_t minimum)
{
    const Json* j = find(obj, key);
    if (!j)
        return fallback;
    if (!j->is_number_integer() || j->get<long long>() < static_cast<long long>(minimum))
        throw ValidationError(key, "must be an integer >= " + std::to_string(minimum));
    return j->get<std::size_t>();
}

Prior parse_prior(const Json& j, ParameterKind kind, const std::string& field)
{
    if (j.is_string()) {
        auto name = j.get<std::string>();
        if (name == "uniform")
            return Prior::uniform();
        if (kind == ParameterKind::categorical)
            throw ValidationError(field, "categorical priors must be 'uniform' or a probability list");
        if (name == "gaussian")
            return Prior::gaussian();
        if (name == "decay")
            return Prior::decay();
        if (name == "exponential")
            return Prior::exponential();
        throw ValidationError(field, "unknown prior '" + name + "'");
    }
    if (!j.is_array())
        throw ValidationError(field, "prior must be a shape name or a list of numbers");
    auto numbers = get_as<std::vector<double>>(j, field);
    if (kind == ParameterKind::categorical)
        return Prior::categorical(std::move(numbers));
    if (numbers.size() != 2)
        throw ValidationError(field, "custom beta prior must be [alpha, beta]");
    return Prior::custom_beta(numbers[0], numbers[1]);
}

std::string level_text(const Json& j, const std::string& field)
{
    if (j.is_string())
        return j.get<std::string>();
    if (j.is_boolean())
        return j.get<bool>() ? "true" : "false";
    if (j.is_number())
        return j.dump();
    throw ValidationError(field, "categorical levels must be strings, booleans or numbers");
}

Parameter parse_parameter(const std::string& name, const Json& j)
{
    std::string field = "input_parameters." + name;
    if (!j.is_object())
        throw ValidationError(field, "parameter must be an object");
    const Json* type = find(j, "parameter_type");
    if (!type || !type->is_string())
        throw ValidationError(field + ".parameter_type", "missing parameter type");
    std::string kind_name = type->get<std::string>();
    ParameterKind kind;
    if (kind_name == "real")
        kind = ParameterKind::real;
    else if (kind_name == "integer")
        kind = ParameterKind::integer;
    else if (kind_name == "ordinal")
        kind = ParameterKind::ordinal;
    else if (kind_name == "categorical")
        kind = ParameterKind::categorical;
    else
        throw ValidationError(field + ".parameter_type", "unknown parameter kind '" + kind_name + "'");

    const Json* values = find(j, "values");
    if (!values || !values->is_array() || values->empty())
        throw ValidationError(field + ".values", "missing or empty value list");
    Prior prior;
    if (const Json* p = find(j, "prior"))
        prior = parse_prior(*p, kind, field + ".prior");

    switch (kind) {
    case ParameterKind::real: {
        auto bounds = get_as<std::vector<double>>(*values, field + ".values");
        if (bounds.size() != 2)
            throw ValidationError(field + ".values", "real parameters take [lower, upper]");
        return Parameter::real(name, bounds[0], bounds[1], prior);
    }
    case ParameterKind::integer: {
        auto bounds = get_as<std::vector<std::int64_t>>(*values, field + ".values");
        if (bounds.size() != 2)
            throw ValidationError(field + ".values", "integer parameters take [lower, upper]");
        return Parameter::integer(name, bounds[0], bounds[1], prior);
    }
    case ParameterKind::ordinal:
        return Parameter::ordinal(name, get_as<std::vector<double>>(*values, field + ".values"), prior);
    case ParameterKind::categorical: {
        std::vector<std::string> levels;
        for (const auto& v : *values)
            levels.push_back(level_text(v, field + ".values"));
        return Parameter::categorical(name, std::move(levels), prior);
    }
    }
    throw ValidationError(field, "unreachable");
}

ForestHyperparams parse_forest(const Json* j, const std::string& field, bool classifier)
{
    ForestHyperparams hp;
    if (!j)
        return hp;
    if (!j->is_object())
        throw ValidationError(field, "must be an object");
    if (const Json* v = find(*j, "n_estimators"))
        hp.n_estimators = get_as<int>(*v, field + ".n_estimators");
    if (const Json* v = find(*j, "max_depth"); v && !v->is_null())
        hp.max_depth = get_as<int>(*v, field + ".max_depth");
    if (const Json* v = find(*j, "max_features")) {
        if (v->is_string()) {
            if (v->get<std::string>() != "auto")
                throw ValidationError(field + ".max_features", "must be \"auto\" or a fraction");
        } else {
            hp.max_features = get_as<double>(*v, field + ".max_features");
        }
    }
    if (const Json* v = find(*j, "bootstrap"))
        hp.bootstrap = get_as<bool>(*v, field + ".bootstrap");
    if (const Json* v = find(*j, "min_samples_split"))
        hp.min_samples_split = get_as<int>(*v, field + ".min_samples_split");
    if (const Json* v = find(*j, "class_weight")) {
        if (!classifier)
            throw ValidationError(field + ".class_weight", "only the classifier takes class weights");
        if (!v->is_object() || !v->contains("true") || !v->contains("false"))
            throw ValidationError(field + ".class_weight", "expected {\"true\": w, \"false\": w}");
        hp.class_weight.feasible = get_as<double>((*v)["true"], field + ".class_weight.true");
        hp.class_weight.infeasible = get_as<double>((*v)["false"], field + ".class_weight.false");
    }
    hp.validate(field);
    return hp;
}

Json forest_json(const ForestHyperparams& hp, bool classifier)
{
    Json j;
    j["n_estimators"] = hp.n_estimators;
    j["max_depth"] = hp.max_depth ? Json(*hp.max_depth) : Json(nullptr);
    j["max_features"] = hp.max_features ? Json(*hp.max_features) : Json("auto");
    j["bootstrap"] = hp.bootstrap;
    j["min_samples_split"] = hp.min_samples_split;
    if (classifier)
        j["class_weight"] = {{"true", hp.class_weight.feasible}, {"false", hp.class_weight.infeasible}};
    return j;
}

Json prior_json(const Prior& prior)
{
    switch (prior.shape) {
    case PriorShape::uniform: return "uniform";
    case PriorShape::gaussian: return "gaussian";
    case PriorShape::decay: return "decay";
    case PriorShape::exponential: return "exponential";
    case PriorShape::custom_beta: return Json::array({prior.alpha, prior.beta});
    case PriorShape::categorical_probs: return Json(prior.probabilities);
    }
    return "uniform";
}

}  // namespace

Scenario parse_scenario(std::string_view json_text)
{
    Json doc;
    try {
        doc = Json::parse(json_text.begin(), json_text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!doc.is_object())
        throw ValidationError("(root)", "scenario must be a JSON object");

    Scenario s;
    if (const Json* v = find(doc, "application_name"))
        s.application_name = get_as<std::string>(*v, "application_name");

    const Json* objectives = find(doc, "optimization_objectives");
    if (!objectives || !objectives->is_array() || objectives->empty())
        throw ValidationError("optimization_objectives", "need at least one objective");
    s.objectives = get_as<std::vector<std::string>>(*objectives, "optimization_objectives");

    if (const Json* v = find(doc, "feasible_output")) {
        if (!v->is_object() || !v->contains("name"))
            throw ValidationError("feasible_output", "expected {\"name\": ..., \"true_value\": ...}");
        FeasibilityOutput f;
        f.name = get_as<std::string>((*v)["name"], "feasible_output.name");
        if (v->contains("true_value"))
            f.true_value = level_text((*v)["true_value"], "feasible_output.true_value");
        s.feasibility = f;
    }

    const Json* params = find(doc, "input_parameters");
    if (!params || !params->is_object() || params->empty())
        throw ValidationError("input_parameters", "need at least one parameter");
    std::vector<Parameter> parameters;
    for (const auto& [name, spec] : params->items())
        parameters.push_back(parse_parameter(name, spec));
    s.space = DesignSpace(std::move(parameters));

    std::unordered_set<std::string> names;
    for (const auto& p : s.space.parameters())
        names.insert(p.name());
    for (const auto& o : s.objectives)
        if (!names.insert(o).second)
            throw ValidationError("optimization_objectives",
                                  "objective '" + o + "' duplicates another objective or a parameter name");
    if (s.feasibility && names.contains(s.feasibility->name))
        throw ValidationError("feasible_output.name", "column '" + s.feasibility->name + "' is already in use");

    if (const Json* v = find(doc, "design_of_experiment")) {
        if (!v->is_object())
            throw ValidationError("design_of_experiment", "must be an object");
        s.doe_samples = get_count(*v, "number_of_samples", s.doe_samples, 1);
    }
    s.optimization_iterations = get_count(doc, "optimization_iterations", s.optimization_iterations, 0);
    s.evaluations_per_iteration =
        get_count(doc, "evaluations_per_optimization_iteration", s.evaluations_per_iteration, 1);
    s.pareto_prediction_samples = get_count(doc, "pareto_prediction_samples", s.pareto_prediction_samples, 1);

    if (const Json* v = find(doc, "seed")) {
        if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<long long>() < 0))
            throw ValidationError("seed", "must be a non-negative integer");
        s.seed = v->get<std::uint64_t>();
    }
    if (const Json* v = find(doc, "output_dir"))
        s.output_dir = get_as<std::string>(*v, "output_dir");

    const Json* surrogate = find(doc, "surrogate");
    if (surrogate && !surrogate->is_object())
        throw ValidationError("surrogate", "must be an object");
    s.regressor = parse_forest(surrogate ? find(*surrogate, "regressor") : nullptr, "surrogate.regressor", false);
    s.classifier = parse_forest(surrogate ? find(*surrogate, "classifier") : nullptr, "surrogate.classifier", true);
    if (surrogate) {
        if (const Json* v = find(*surrogate, "feasibility_filter"))
            s.feasibility_filter = get_as<bool>(*v, "surrogate.feasibility_filter");
        if (const Json* v = find(*surrogate, "feasibility_threshold")) {
            s.feasibility_threshold = get_as<double>(*v, "surrogate.feasibility_threshold");
            if (!(s.feasibility_threshold >= 0.0 && s.feasibility_threshold <= 1.0))
                throw ValidationError("surrogate.feasibility_threshold", "must lie in [0, 1]");
        }
    }

    const Json* evaluator = find(doc, "evaluator");
    if (!evaluator || !evaluator->is_object())
        throw ValidationError("evaluator", "missing evaluator object");
    if (const Json* b = find(*evaluator, "builtin")) {
        auto name = get_as<std::string>(*b, "evaluator.builtin");
        const auto& known = builtin_evaluator_names();
        if (std::find(known.begin(), known.end(), name) == known.end())
            throw ValidationError("evaluator.builtin", "unknown builtin evaluator '" + name + "'");
        s.evaluator.mode = BuiltinEvaluator{name};
    } else if (const Json* c = find(*evaluator, "command")) {
        SubprocessEvaluator sub;
        sub.command = get_as<std::string>(*c, "evaluator.command");
        if (sub.command.empty())
            throw ValidationError("evaluator.command", "command is empty");
        if (const Json* w = find(*evaluator, "working_dir"))
            sub.working_dir = get_as<std::string>(*w, "evaluator.working_dir");
        if (const Json* t = find(*evaluator, "timeout_seconds")) {
            sub.timeout_seconds = get_as<double>(*t, "evaluator.timeout_seconds");
            if (!(sub.timeout_seconds > 0.0))
                throw ValidationError("evaluator.timeout_seconds", "must be positive");
        }
        s.evaluator.mode = sub;
    } else {
        throw ValidationError("evaluator", "expected \"builtin\" or \"command\"");
    }
    s.evaluator.objectives = s.objectives;
    s.evaluator.feasibility = s.feasibility;
    return s;
}

std::string serialize_scenario(const Scenario& s)
{
    Json doc;
    doc["application_name"] = s.application_name;
    doc["optimization_objectives"] = s.objectives;
    if (s.feasibility)
        doc["feasible_output"] = {{"name", s.feasibility->name}, {"true_value", s.feasibility->true_value}};

    Json params = Json::object();
    for (const auto& p : s.space.parameters()) {
        Json j;
        j["parameter_type"] = std::string(to_string(p.kind()));
        switch (p.kind()) {
        case ParameterKind::real: j["values"] = {p.lower(), p.upper()}; break;
        case ParameterKind::integer:
            j["values"] = {static_cast<std::int64_t>(p.lower()), static_cast<std::int64_t>(p.upper())};
            break;
        case ParameterKind::ordinal: j["values"] = p.values(); break;
        case ParameterKind::categorical: j["values"] = p.levels(); break;
        }
        j["prior"] = prior_json(p.prior());
        params[p.name()] = j;
    }
    doc["input_parameters"] = params;
    doc["design_of_experiment"] = {{"number_of_samples", s.doe_samples}};
    doc["optimization_iterations"] = s.optimization_iterations;
    doc["evaluations_per_optimization_iteration"] = s.evaluations_per_iteration;
    doc["pareto_prediction_samples"] = s.pareto_prediction_samples;
    doc["seed"] = s.seed;
    doc["output_dir"] = s.output_dir;

    Json surrogate;
    surrogate["regressor"] = forest_json(s.regressor, false);
    surrogate["classifier"] = forest_json(s.classifier, true);
    surrogate["feasibility_filter"] = s.feasibility_filter;
    surrogate["feasibility_threshold"] = s.feasibility_threshold;
    doc["surrogate"] = surrogate;

    if (const auto* b = std::get_if<BuiltinEvaluator>(&s.evaluator.mode)) {
        doc["evaluator"] = {{"builtin", b->name}};
    } else {
        const auto& sub = std::get<SubprocessEvaluator>(s.evaluator.mode);
        doc["evaluator"] = {{"command", sub.command}, {"working_dir", sub.working_dir},
                            {"timeout_seconds", sub.timeout_seconds}};
    }
    return doc.dump(2) + "\n";
}

}  // namespace dse
