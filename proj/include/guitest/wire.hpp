#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "guitest/agents.hpp"
#include "guitest/orchestrator.hpp"

namespace guitest {

// Newline-delimited JSON over an abstract byte stream. One request line out,
// one response line back.
class ByteStream {
  public:
    virtual ~ByteStream() = default;
    virtual void write_line(const std::string& line) = 0;
    // nullopt means the peer produced nothing (closed / timed out); the
    // adapter treats it as retryable.
    virtual std::optional<std::string> read_line() = 0;
};

// In-process adapter: each written line is answered by the handler. Used by
// tests and by the echo endpoint.
class LoopbackStream : public ByteStream {
  public:
    using Handler = std::function<std::optional<std::string>(const std::string&)>;
    explicit LoopbackStream(Handler handler) : handler_(std::move(handler)) {}

    void write_line(const std::string& line) override { pending_ = handler_(line); }
    std::optional<std::string> read_line() override {
        auto out = pending_;
        pending_.reset();
        return out;
    }

  private:
    Handler handler_;
    std::optional<std::string> pending_;
};

// Minimal TCP client stream ("host:port"). Blocking, line-buffered.
class TcpStream : public ByteStream {
  public:
    explicit TcpStream(const std::string& endpoint);
    ~TcpStream() override;

    void write_line(const std::string& line) override;
    std::optional<std::string> read_line() override;

  private:
    int fd_ = -1;
    std::string buffer_;
};

enum class WireRole { planner, executor, monitor, reflector, judge };

std::string to_string(WireRole r);
WireRole wire_role_from(const std::string& s);

struct Handshake {
    WireRole role = WireRole::planner;
    std::string schema = "agent_wire_v1";
    bool reentrant = false;
    double temperature = 0.1;
};

json handshake_to_json(const Handshake& h);
Handshake handshake_from_json(const json& j);

// Framed request/response client for one remote role. Admits one in-flight
// request unless the peer's handshake declares reentrancy.
class RemoteAdapter {
  public:
    RemoteAdapter(std::shared_ptr<ByteStream> stream, WireRole role, int max_retries = 3);

    // Sends {role, payload} and returns the parsed response object.
    json call(const json& payload);

    const Handshake& peer() const { return peer_; }
    WireRole role() const { return role_; }

  private:
    std::shared_ptr<ByteStream> stream_;
    WireRole role_;
    int max_retries_;
    Handshake peer_;
    bool in_flight_ = false;
};

// --- Remote backends (schema agent_wire_v1) ---
// Request/response shapes, all single-line JSON objects:
//   planner   req {subject:"plan", observation, history:[{subtask, outcome}], reflection|null}
//             rsp {plan:[subtask...]}
//   executor  req {subject:"act", subtask, observation, tau:[step...]}
//             rsp {action}
//   monitor   req {subject:"check", subtask, pre, action, post}
//             rsp {verdict:{value, note}}
//   reflector req {subject:"reflect", subtask, tau:[step...], observation}
//             rsp {attribution}
//   judge     req {subject:"judge", task, defect, steps:[step...], declarations:[int...]}
//             rsp {verdict:"GUI_BUG"|"EXECUTOR_ERROR", checklist:{precondition_ok, trigger_ok, result_ok}}

class RemotePlanner : public PlannerBackend {
  public:
    explicit RemotePlanner(std::shared_ptr<RemoteAdapter> adapter) : adapter_(std::move(adapter)) {}
    std::vector<Subtask> plan(const Observation& obs, const std::vector<HistoryEntry>& history,
                              const std::optional<Attribution>& reflection) override;

  private:
    std::shared_ptr<RemoteAdapter> adapter_;
};

class RemoteExecutor : public ExecutorBackend {
  public:
    explicit RemoteExecutor(std::shared_ptr<RemoteAdapter> adapter) : adapter_(std::move(adapter)) {}
    Action act(const Subtask& subtask, const Observation& obs, const Trajectory& tau) override;

  private:
    std::shared_ptr<RemoteAdapter> adapter_;
};

class RemoteMonitor : public MonitorBackend {
  public:
    explicit RemoteMonitor(std::shared_ptr<RemoteAdapter> adapter) : adapter_(std::move(adapter)) {}
    MonitorVerdict check(const Subtask& subtask, const Observation& pre, const Action& action,
                         const Observation& post) override;

  private:
    std::shared_ptr<RemoteAdapter> adapter_;
};

class RemoteReflector : public ReflectorBackend {
  public:
    explicit RemoteReflector(std::shared_ptr<RemoteAdapter> adapter) : adapter_(std::move(adapter)) {}
    Attribution reflect(const Subtask& subtask, const Trajectory& tau, const Observation& obs) override;

  private:
    std::shared_ptr<RemoteAdapter> adapter_;
};

// Resolves the endpoint string: explicit flag first, then GUITEST_ENDPOINT.
std::optional<std::string> resolve_endpoint(const std::optional<std::string>& flag);

// Connects one adapter per role over its own TCP stream.
BackendSet make_remote_backends(const std::string& endpoint, AgentMode mode);

}  // namespace guitest
