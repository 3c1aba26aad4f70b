#include "sra/remote.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sra {

namespace {

[[noreturn]] void child_exec(const std::vector<std::string>& argv, int in_fd, int out_fd) {
    dup2(in_fd, STDIN_FILENO);
    dup2(out_fd, STDOUT_FILENO);
    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    execvp(cargv[0], cargv.data());
    _exit(127);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RemoteError("cannot read prompt file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace

RemoteProcess::RemoteProcess(std::vector<std::string> argv,
                             std::chrono::milliseconds timeout)
    : argv_(std::move(argv)), timeout_(timeout) {
    if (argv_.empty()) throw RemoteError("remote backend needs a command line");
    int to_pipe[2], from_pipe[2];
    if (pipe(to_pipe) != 0 || pipe(from_pipe) != 0)
        throw RemoteError("pipe failed: " + std::string(std::strerror(errno)));
    pid_ = fork();
    if (pid_ < 0) throw RemoteError("fork failed: " + std::string(std::strerror(errno)));
    if (pid_ == 0) {
        close(to_pipe[1]);
        close(from_pipe[0]);
        child_exec(argv_, to_pipe[0], from_pipe[1]);
    }
    close(to_pipe[0]);
    close(from_pipe[1]);
    to_child_ = to_pipe[1];
    from_child_ = from_pipe[0];
}

RemoteProcess::~RemoteProcess() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    if (pid_ > 0) {
        kill(pid_, SIGTERM);
        waitpid(pid_, nullptr, 0);
    }
}

bool RemoteProcess::alive() const {
    if (pid_ <= 0) return false;
    return waitpid(pid_, nullptr, WNOHANG) == 0;
}

std::string RemoteProcess::round_trip(const std::string& line) {
    std::string message = line + "\n";
    std::size_t written = 0;
    while (written < message.size()) {
        ssize_t n = write(to_child_, message.data() + written, message.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw RemoteError("write to backend failed: " +
                              std::string(std::strerror(errno)));
        }
        written += static_cast<std::size_t>(n);
    }

    auto deadline = std::chrono::steady_clock::now() + timeout_;
    while (true) {
        std::size_t newline = buffer_.find('\n');
        if (newline != std::string::npos) {
            std::string reply = buffer_.substr(0, newline);
            buffer_.erase(0, newline + 1);
            return reply;
        }
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) throw RemoteError("backend timed out");
        pollfd pfd{from_child_, POLLIN, 0};
        int ready = poll(&pfd, 1, static_cast<int>(remaining.count()));
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw RemoteError("poll failed: " + std::string(std::strerror(errno)));
        }
        if (ready == 0) throw RemoteError("backend timed out");
        char chunk[4096];
        ssize_t n = read(from_child_, chunk, sizeof chunk);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw RemoteError("read from backend failed: " +
                              std::string(std::strerror(errno)));
        }
        if (n == 0) throw RemoteError("backend closed its output");
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

OJson RemoteProcess::request(const OJson& payload) {
    const std::string line = payload.dump();
    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            return parse_single_json_object(round_trip(line));
        } catch (const AgentError& e) {
            last_error = e.what();
        }
    }
    throw BackendError("backend-malformed-output after retry: " + last_error);
}

RolePrompts RolePrompts::load(const std::string& dir) {
    RolePrompts prompts;
    prompts.planner = read_file(dir + "/planner.txt");
    prompts.reflector = read_file(dir + "/reflector.txt");
    prompts.executor = read_file(dir + "/executor.txt");
    prompts.summarizer = read_file(dir + "/summarizer.txt");
    return prompts;
}

namespace {

OJson chain_to_json(const std::vector<CallChainEntry>& chain) {
    OJson out = OJson::array();
    for (const auto& entry : chain) {
        out.push_back({{"call", {{"tool", entry.call.tool}, {"args", entry.call.args}}},
                       {"raw_output", entry.raw_output},
                       {"interpretation", entry.interpretation}});
    }
    return out;
}

OJson role_request(const std::string& role, const std::string& system_prompt,
                   OJson user_payload) {
    return OJson{{"role", role},
                 {"system_prompt", system_prompt},
                 {"user_payload", std::move(user_payload)}};
}

}  // namespace

RoleBackends make_remote_backends(std::shared_ptr<RemoteProcess> process,
                                  RolePrompts prompts) {
    RoleBackends backends;
    backends.planner = [process, prompts](const std::string& question,
                                          const ToolRegistry& registry) {
        OJson reply = process->request(role_request(
            "planner", prompts.planner,
            {{"question", question}, {"tools", registry.schemas_json()}}));
        Plan plan;
        try {
            for (const auto& t : reply.at("plan")) plan.plan.push_back(t.get<std::string>());
            if (reply.contains("tool_chain"))
                for (const auto& t : reply.at("tool_chain")) plan.tool_chain.push_back(t);
            if (reply.contains("information"))
                for (const auto& t : reply.at("information"))
                    plan.information.push_back(t.get<std::string>());
        } catch (const OJson::exception& e) {
            throw BackendError(std::string("backend-malformed-output: planner reply: ") +
                               e.what());
        }
        return plan;
    };
    backends.reflector = [process, prompts](const std::string& question, const Plan& plan,
                                            const std::vector<CallChainEntry>& chain,
                                            const ToolRegistry& registry) {
        OJson reply = process->request(role_request(
            "reflector", prompts.reflector,
            {{"question", question},
             {"plan", plan.to_json()},
             {"chain", chain_to_json(chain)},
             {"tools", registry.schemas_json()}}));
        ReflectorDecision decision;
        try {
            decision.analysis = reply.value("analysis", "");
            std::string action = reply.at("action").get<std::string>();
            if (action == "call_tool") {
                decision.action = ReflectorDecision::Action::CallTool;
                decision.call.tool = reply.at("tool").get<std::string>();
                decision.call.args = reply.value("args", OJson::object());
            } else if (action == "final") {
                decision.action = ReflectorDecision::Action::Final;
                decision.final_answer = reply.value("final_answer", "");
            } else {
                throw BackendError("backend-malformed-output: unknown reflector action '" +
                                   action + "'");
            }
        } catch (const OJson::exception& e) {
            throw BackendError(std::string("backend-malformed-output: reflector reply: ") +
                               e.what());
        }
        return decision;
    };
    backends.executor_interpret = [process, prompts](const ToolSchema& schema,
                                                     const ToolCall& call,
                                                     const OJson& raw) {
        OJson reply = process->request(role_request(
            "executor", prompts.executor,
            {{"tool", schema.to_json()},
             {"call", {{"tool", call.tool}, {"args", call.args}}},
             {"raw_output", raw}}));
        try {
            return reply.at("result_description").get<std::string>();
        } catch (const OJson::exception& e) {
            throw BackendError(std::string("backend-malformed-output: executor reply: ") +
                               e.what());
        }
    };
    backends.summarizer = [process, prompts](const std::string& question,
                                             const std::vector<CallChainEntry>& chain) {
        OJson reply = process->request(
            role_request("summarizer", prompts.summarizer,
                         {{"question", question}, {"chain", chain_to_json(chain)}}));
        try {
            return std::make_pair(reply.at("summary").get<std::string>(),
                                  reply.at("final_answer").get<std::string>());
        } catch (const OJson::exception& e) {
            throw BackendError(std::string("backend-malformed-output: summarizer reply: ") +
                               e.what());
        }
    };
    return backends;
}

ToolFn make_remote_tool(std::shared_ptr<RemoteProcess> process, std::string tool_name) {
    return [process, tool_name](const OJson& args) {
        OJson reply = process->request(OJson{{"tool", tool_name}, {"args", args}});
        if (reply.contains("result")) return reply.at("result");
        if (reply.contains("error"))
            throw RemoteError(reply.at("error").is_string()
                                  ? reply.at("error").get<std::string>()
                                  : reply.at("error").dump());
        throw BackendError("backend-malformed-output: tool reply has neither result "
                           "nor error");
    };
}

}  // namespace sra
