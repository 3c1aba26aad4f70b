#pragma once

#include <json.hpp>

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace sra {

using OJson = nlohmann::ordered_json;

struct AgentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed role-backend output (strict single-JSON-object parsing).
struct BackendError : AgentError {
    using AgentError::AgentError;
};

struct ArgSpec {
    std::string name;
    std::string type;  // string | number | integer | boolean | object | array
    bool required = false;
    OJson default_value;  // used when !required
};

struct ToolSchema {
    std::string name;
    std::vector<ArgSpec> args;
    std::string output_format;
    std::string description;

    const ArgSpec* find_arg(const std::string& name) const;
    OJson to_json() const;
};

struct ToolCall {
    std::string tool;
    OJson args;
};

struct CallChainEntry {
    ToolCall call;
    OJson raw_output;
    std::string interpretation;
};

struct Plan {
    std::vector<std::string> plan;        // tool names in execution order
    std::vector<OJson> tool_chain;        // [{"tool": name}, ...]
    std::vector<std::string> information;

    OJson to_json() const;
};

struct ReflectorDecision {
    enum class Action { CallTool, Final };
    std::string analysis;
    Action action = Action::Final;
    ToolCall call;             // when action == CallTool
    std::string final_answer;  // when action == Final
};

struct AgentRun {
    std::string question;
    Plan plan;
    int budget = 0;
    std::vector<CallChainEntry> chain;
    std::string summary;
    std::string final_answer;
    std::vector<double> step_ms;
    double total_ms = 0.0;
};

using ToolFn = std::function<OJson(const OJson& args)>;

class ToolRegistry {
  public:
    void register_tool(ToolSchema schema, ToolFn fn);
    bool has(const std::string& name) const;
    const ToolSchema& schema(const std::string& name) const;
    std::vector<std::string> tool_names() const;
    OJson invoke(const std::string& name, const OJson& args) const;
    OJson schemas_json() const;

  private:
    std::vector<std::string> order_;
    std::map<std::string, std::pair<ToolSchema, ToolFn>> tools_;
};

/// Unknown keys rejected, missing required rejected, defaults filled, types
/// checked. Every error names the offending key.
OJson validate_args(const ToolSchema& schema, const OJson& args);

/// Replaces empty-valued output_2d / tool_3d_output args with the raw output
/// of the most recent chain entry produced by the matching tool.
OJson inject_heavy_payloads(OJson args, const std::vector<CallChainEntry>& chain);

struct RoleBackends {
    std::function<Plan(const std::string& question, const ToolRegistry&)> planner;
    std::function<ReflectorDecision(const std::string& question, const Plan&,
                                    const std::vector<CallChainEntry>&,
                                    const ToolRegistry&)>
        reflector;
    std::function<std::string(const ToolSchema&, const ToolCall&, const OJson& raw)>
        executor_interpret;
    std::function<std::pair<std::string, std::string>(const std::string& question,
                                                      const std::vector<CallChainEntry>&)>
        summarizer;
};

inline constexpr int kDefaultBudget = 8;
inline constexpr const char* kSentinelAnswer = "X";

/// Planner -> bounded Reflector/Executor loop -> Summarizer. Tool errors are
/// captured into the chain as error raw outputs, never aborts.
AgentRun run_agent(const std::string& question, const ToolRegistry& registry,
                   const RoleBackends& backends, int budget = kDefaultBudget);

/// Trace document with stable key order; timings included only on request.
OJson trace_to_json(const AgentRun& run, bool include_timings = false);

/// Strict single-object extraction used for remote backends: accepts exactly
/// one top-level JSON object, after at most one repair pass stripping
/// markdown code fences. Throws BackendError otherwise.
OJson parse_single_json_object(const std::string& text);

}  // namespace sra
