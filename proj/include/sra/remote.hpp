#pragma once

#include "sra/agent.hpp"

#include <chrono>
#include <memory>
#include <string>

namespace sra {

struct RemoteError : AgentError {
    using AgentError::AgentError;
};

/// Newline-delimited JSON request/response over a child process's stdio.
/// One request line in, one response line out; requests that time out or
/// return malformed JSON are retried once, then fail.
class RemoteProcess {
  public:
    /// Spawns `argv` (argv[0] = program). Throws RemoteError on spawn failure.
    explicit RemoteProcess(std::vector<std::string> argv,
                           std::chrono::milliseconds timeout =
                               std::chrono::milliseconds(60000));
    ~RemoteProcess();

    RemoteProcess(const RemoteProcess&) = delete;
    RemoteProcess& operator=(const RemoteProcess&) = delete;

    /// Sends one JSON object and returns the single JSON object replied.
    OJson request(const OJson& payload);

    bool alive() const;

  private:
    std::string round_trip(const std::string& line);

    std::vector<std::string> argv_;
    std::chrono::milliseconds timeout_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;  // partial line carried across reads
};

/// Loads {planner,reflector,executor,summarizer}.txt from a directory.
struct RolePrompts {
    std::string planner, reflector, executor, summarizer;

    static RolePrompts load(const std::string& dir);
};

/// Role backends that forward each role to the remote process as
/// {role, system_prompt, user_payload} and parse the single-object reply.
RoleBackends make_remote_backends(std::shared_ptr<RemoteProcess> process,
                                  RolePrompts prompts);

/// Forwards a tool invocation as {tool, args}; the reply must carry
/// {"result": ...} or {"error": ...}.
ToolFn make_remote_tool(std::shared_ptr<RemoteProcess> process, std::string tool_name);

}  // namespace sra
