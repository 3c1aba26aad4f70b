#include "sra/agent.hpp"

#include <algorithm>
#include <chrono>

namespace sra {

const ArgSpec* ToolSchema::find_arg(const std::string& arg_name) const {
    for (const auto& a : args)
        if (a.name == arg_name) return &a;
    return nullptr;
}

OJson ToolSchema::to_json() const {
    OJson j;
    j["name"] = name;
    j["args"] = OJson::array();
    for (const auto& a : args) {
        OJson arg;
        arg["name"] = a.name;
        arg["type"] = a.type;
        arg["required"] = a.required;
        if (!a.required) arg["default"] = a.default_value;
        j["args"].push_back(std::move(arg));
    }
    j["output_format"] = output_format;
    j["description"] = description;
    return j;
}

OJson Plan::to_json() const {
    OJson j;
    j["plan"] = plan;
    j["tool_chain"] = tool_chain;
    j["information"] = information;
    return j;
}

void ToolRegistry::register_tool(ToolSchema schema, ToolFn fn) {
    if (tools_.count(schema.name))
        throw AgentError("duplicate tool name '" + schema.name + "'");
    for (const auto& a : schema.args)
        if (a.type.empty())
            throw AgentError("tool '" + schema.name + "' arg '" + a.name + "' is untyped");
    std::string name = schema.name;
    order_.push_back(name);
    tools_.emplace(std::move(name), std::make_pair(std::move(schema), std::move(fn)));
}

bool ToolRegistry::has(const std::string& name) const { return tools_.count(name) > 0; }

const ToolSchema& ToolRegistry::schema(const std::string& name) const {
    auto it = tools_.find(name);
    if (it == tools_.end()) throw AgentError("unknown tool '" + name + "'");
    return it->second.first;
}

std::vector<std::string> ToolRegistry::tool_names() const { return order_; }

OJson ToolRegistry::invoke(const std::string& name, const OJson& args) const {
    auto it = tools_.find(name);
    if (it == tools_.end()) throw AgentError("unknown tool '" + name + "'");
    return it->second.second(args);
}

OJson ToolRegistry::schemas_json() const {
    OJson j = OJson::array();
    for (const auto& name : order_) j.push_back(schema(name).to_json());
    return j;
}

namespace {

bool type_matches(const std::string& type, const OJson& value) {
    if (type == "string") return value.is_string();
    if (type == "number") return value.is_number();
    if (type == "integer") return value.is_number_integer();
    if (type == "boolean") return value.is_boolean();
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    return false;
}

}  // namespace

OJson validate_args(const ToolSchema& schema, const OJson& args) {
    if (!args.is_object()) throw AgentError("tool args must be a JSON object");
    for (auto it = args.begin(); it != args.end(); ++it)
        if (!schema.find_arg(it.key()))
            throw AgentError("unknown argument '" + it.key() + "' for tool '" +
                             schema.name + "'");
    OJson normalized = OJson::object();
    for (const auto& spec : schema.args) {
        if (args.contains(spec.name)) {
            const auto& value = args.at(spec.name);
            if (!type_matches(spec.type, value))
                throw AgentError("type mismatch for argument '" + spec.name +
                                 "': expected " + spec.type);
            normalized[spec.name] = value;
        } else if (spec.required) {
            throw AgentError("missing required argument '" + spec.name + "' for tool '" +
                             schema.name + "'");
        } else {
            normalized[spec.name] = spec.default_value;
        }
    }
    return normalized;
}

namespace {

// heavy arg name -> producing tool
const std::map<std::string, std::string> kHeavyProducers = {
    {"output_2d", "tool_2d_object_detection"},
    {"tool_3d_output", "tool_object_3d_detection"},
};

bool is_empty_payload(const OJson& v) {
    return (v.is_object() && v.empty()) || (v.is_array() && v.empty());
}

}  // namespace

OJson inject_heavy_payloads(OJson args, const std::vector<CallChainEntry>& chain) {
    for (const auto& [arg_name, producer] : kHeavyProducers) {
        if (!args.contains(arg_name)) continue;
        if (!is_empty_payload(args.at(arg_name))) continue;
        auto it = std::find_if(chain.rbegin(), chain.rend(), [&](const CallChainEntry& e) {
            return e.call.tool == producer;
        });
        if (it == chain.rend()) continue;  // no producer yet; leave it empty
        args[arg_name] = it->raw_output;
    }
    return args;
}

AgentRun run_agent(const std::string& question, const ToolRegistry& registry,
                   const RoleBackends& backends, int budget) {
    if (budget < 0) throw AgentError("budget must be >= 0");
    auto t_start = std::chrono::steady_clock::now();

    AgentRun run;
    run.question = question;
    run.budget = budget;
    run.plan = backends.planner(question, registry);
    for (const auto& name : run.plan.plan)
        if (!registry.has(name))
            throw AgentError("planner selected unregistered tool '" + name + "'");

    if (budget == 0) {
        // Nothing can be gathered; skip the roles entirely.
        run.final_answer = kSentinelAnswer;
        run.total_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t_start)
                           .count();
        return run;
    }

    int n = 0;
    while (n < budget) {
        auto t_step = std::chrono::steady_clock::now();
        ReflectorDecision decision =
            backends.reflector(question, run.plan, run.chain, registry);
        if (decision.action == ReflectorDecision::Action::Final) break;

        CallChainEntry entry;
        entry.call = decision.call;
        try {
            const ToolSchema& schema = registry.schema(decision.call.tool);
            OJson args = validate_args(schema, decision.call.args);
            args = inject_heavy_payloads(std::move(args), run.chain);
            entry.call.args = args;
            entry.raw_output = registry.invoke(decision.call.tool, args);
        } catch (const std::exception& e) {
            // Errors become chain entries so the Summarizer can still answer.
            entry.raw_output = OJson{{"error", e.what()}};
        }
        // An unknown tool still needs an interpretation of its error entry.
        ToolSchema fallback;
        fallback.name = entry.call.tool;
        entry.interpretation = backends.executor_interpret(
            registry.has(entry.call.tool) ? registry.schema(entry.call.tool) : fallback,
            entry.call, entry.raw_output);
        run.chain.push_back(std::move(entry));
        ++n;
        run.step_ms.push_back(std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t_step)
                                  .count());
    }

    auto [summary, answer] = backends.summarizer(question, run.chain);
    run.summary = summary;
    run.final_answer = answer;
    run.total_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t_start)
                       .count();
    return run;
}

OJson trace_to_json(const AgentRun& run, bool include_timings) {
    OJson j;
    j["question"] = run.question;
    j["budget"] = run.budget;
    j["plan"] = run.plan.to_json();
    j["chain"] = OJson::array();
    for (const auto& entry : run.chain) {
        OJson e;
        e["call"] = OJson{{"tool", entry.call.tool}, {"args", entry.call.args}};
        e["raw_output"] = entry.raw_output;
        e["interpretation"] = entry.interpretation;
        j["chain"].push_back(std::move(e));
    }
    j["summary"] = run.summary;
    j["final_answer"] = run.final_answer;
    if (include_timings) {
        OJson t;
        t["step_ms"] = run.step_ms;
        t["total_ms"] = run.total_ms;
        j["timings"] = std::move(t);
    }
    return j;
}

OJson parse_single_json_object(const std::string& text) {
    auto try_parse = [](const std::string& s) -> std::optional<OJson> {
        OJson j = OJson::parse(s, nullptr, false);
        if (j.is_discarded() || !j.is_object()) return std::nullopt;
        return j;
    };

    std::string trimmed = text;
    auto strip = [](std::string& s) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
            s.erase(s.begin());
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    };
    strip(trimmed);
    if (auto j = try_parse(trimmed)) return *j;

    // One repair pass: strip markdown code fences.
    if (trimmed.rfind("```", 0) == 0) {
        std::size_t first_nl = trimmed.find('\n');
        std::size_t last_fence = trimmed.rfind("```");
        if (first_nl != std::string::npos && last_fence > first_nl) {
            std::string inner = trimmed.substr(first_nl + 1, last_fence - first_nl - 1);
            strip(inner);
            if (auto j = try_parse(inner)) return *j;
        }
    }
    throw BackendError("backend-malformed-output: expected exactly one JSON object");
}

}  // namespace sra
