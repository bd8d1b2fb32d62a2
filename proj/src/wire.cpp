#include "guitest/wire.hpp"

#include <cstdlib>

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

namespace guitest {

std::string to_string(WireRole r) {
    switch (r) {
        case WireRole::planner: return "planner";
        case WireRole::executor: return "executor";
        case WireRole::monitor: return "monitor";
        case WireRole::reflector: return "reflector";
        case WireRole::judge: return "judge";
    }
    return "planner";
}

WireRole wire_role_from(const std::string& s) {
    if (s == "planner") return WireRole::planner;
    if (s == "executor") return WireRole::executor;
    if (s == "monitor") return WireRole::monitor;
    if (s == "reflector") return WireRole::reflector;
    if (s == "judge") return WireRole::judge;
    throw ValidationError("unknown wire role '" + s + "'");
}

json handshake_to_json(const Handshake& h) {
    return json{{"role", to_string(h.role)},
                {"schema", h.schema},
                {"reentrant", h.reentrant},
                {"temperature", h.temperature}};
}

Handshake handshake_from_json(const json& j) {
    Handshake h;
    h.role = wire_role_from(j.at("role").get<std::string>());
    h.schema = j.at("schema").get<std::string>();
    if (h.schema != "agent_wire_v1")
        throw ProtocolError("unsupported wire schema '" + h.schema + "'");
    h.reentrant = j.value("reentrant", false);
    h.temperature = j.value("temperature", 0.1);
    return h;
}

// --- TcpStream ---

TcpStream::TcpStream(const std::string& endpoint) {
    const auto colon = endpoint.rfind(':');
    if (colon == std::string::npos) throw InputError("endpoint must be host:port, got '" + endpoint + "'");
    const std::string host = endpoint.substr(0, colon);
    const std::string port = endpoint.substr(colon + 1);

    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || !res)
        throw OrchestrationError("cannot resolve endpoint '" + endpoint + "'");
    fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd_ < 0 || ::connect(fd_, res->ai_addr, res->ai_addrlen) != 0) {
        if (fd_ >= 0) ::close(fd_);
        freeaddrinfo(res);
        throw OrchestrationError("cannot connect to endpoint '" + endpoint + "'");
    }
    freeaddrinfo(res);
}

TcpStream::~TcpStream() {
    if (fd_ >= 0) ::close(fd_);
}

void TcpStream::write_line(const std::string& line) {
    std::string framed = line + "\n";
    size_t sent = 0;
    while (sent < framed.size()) {
        const ssize_t n = ::send(fd_, framed.data() + sent, framed.size() - sent, 0);
        if (n <= 0) throw OrchestrationError("endpoint connection lost while writing");
        sent += static_cast<size_t>(n);
    }
}

std::optional<std::string> TcpStream::read_line() {
    for (;;) {
        const auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        char chunk[4096];
        const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
        if (n <= 0) return std::nullopt;
        buffer_.append(chunk, static_cast<size_t>(n));
    }
}

// --- RemoteAdapter ---

namespace {

json parse_wire_line(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ProtocolError("malformed wire response: " + line);
    return j;
}

}  // namespace

RemoteAdapter::RemoteAdapter(std::shared_ptr<ByteStream> stream, WireRole role, int max_retries)
    : stream_(std::move(stream)), role_(role), max_retries_(max_retries) {
    Handshake mine;
    mine.role = role_;
    stream_->write_line(handshake_to_json(mine).dump());
    auto line = stream_->read_line();
    if (!line) throw OrchestrationError("endpoint closed during handshake");
    peer_ = handshake_from_json(parse_wire_line(*line));
    if (peer_.role != role_)
        throw ProtocolError("endpoint answered handshake for role '" + to_string(peer_.role) +
                            "', expected '" + to_string(role_) + "'");
}

json RemoteAdapter::call(const json& payload) {
    if (in_flight_ && !peer_.reentrant)
        throw OrchestrationError("adapter for role '" + to_string(role_) +
                                 "' admits one in-flight request");
    in_flight_ = true;
    json request = payload;
    request["role"] = to_string(role_);
    const std::string line = request.dump();
    for (int attempt = 0; attempt <= max_retries_; ++attempt) {
        stream_->write_line(line);
        auto response = stream_->read_line();
        if (!response) continue;  // retryable: nothing came back
        in_flight_ = false;
        return parse_wire_line(*response);
    }
    in_flight_ = false;
    throw OrchestrationError("endpoint for role '" + to_string(role_) + "' gave no response after " +
                             std::to_string(max_retries_ + 1) + " attempts");
}

// --- Remote backends ---

std::vector<Subtask> RemotePlanner::plan(const Observation& obs, const std::vector<HistoryEntry>& history,
                                         const std::optional<Attribution>& reflection) {
    json hist = json::array();
    for (const auto& h : history)
        hist.push_back(json{{"subtask", subtask_to_json(h.subtask)}, {"outcome", to_string(h.outcome)}});
    json req{{"subject", "plan"}, {"observation", to_json(obs)}, {"history", std::move(hist)}};
    req["reflection"] = reflection ? attribution_to_json(*reflection) : json();
    json rsp = adapter_->call(req);
    if (!rsp.contains("plan") || !rsp["plan"].is_array())
        throw ProtocolError("planner response missing 'plan': " + rsp.dump());
    std::vector<Subtask> out;
    for (const auto& s : rsp["plan"]) out.push_back(subtask_from_json(s));
    return out;
}

Action RemoteExecutor::act(const Subtask& subtask, const Observation& obs, const Trajectory& tau) {
    json steps = json::array();
    for (const auto& r : tau) steps.push_back(step_record_to_json(r));
    json req{{"subject", "act"},
             {"subtask", subtask_to_json(subtask)},
             {"observation", to_json(obs)},
             {"tau", std::move(steps)}};
    json rsp = adapter_->call(req);
    if (!rsp.contains("action"))
        throw ProtocolError("executor response missing 'action': " + rsp.dump());
    Action a = action_from_json(rsp["action"]);
    a.validate();
    return a;
}

MonitorVerdict RemoteMonitor::check(const Subtask& subtask, const Observation& pre, const Action& action,
                                    const Observation& post) {
    json req{{"subject", "check"},
             {"subtask", subtask_to_json(subtask)},
             {"pre", to_json(pre)},
             {"action", to_json(action)},
             {"post", to_json(post)}};
    json rsp = adapter_->call(req);
    if (!rsp.contains("verdict") || !rsp["verdict"].is_object() || !rsp["verdict"].contains("value"))
        throw ProtocolError("monitor response missing 'verdict': " + rsp.dump());
    return {verdict_value_from(rsp["verdict"].at("value").get<std::string>()),
            rsp["verdict"].value("note", "")};
}

Attribution RemoteReflector::reflect(const Subtask& subtask, const Trajectory& tau, const Observation& obs) {
    json steps = json::array();
    for (const auto& r : tau) steps.push_back(step_record_to_json(r));
    json req{{"subject", "reflect"},
             {"subtask", subtask_to_json(subtask)},
             {"tau", std::move(steps)},
             {"observation", to_json(obs)}};
    json rsp = adapter_->call(req);
    if (!rsp.contains("attribution"))
        throw ProtocolError("reflector response missing 'attribution': " + rsp.dump());
    return attribution_from_json(rsp["attribution"]);
}

std::optional<std::string> resolve_endpoint(const std::optional<std::string>& flag) {
    if (flag && !flag->empty()) return flag;
    if (const char* env = std::getenv("GUITEST_ENDPOINT"); env && *env) return std::string(env);
    return std::nullopt;
}

BackendSet make_remote_backends(const std::string& endpoint, AgentMode mode) {
    if (mode == AgentMode::baseline)
        throw OrchestrationError("the wire protocol has no baseline role; use an orchestrated remote agent");
    BackendSet set;
    set.mode = mode;
    auto adapter_for = [&](WireRole role) {
        return std::make_shared<RemoteAdapter>(std::make_shared<TcpStream>(endpoint), role);
    };
    set.planner = std::make_shared<RemotePlanner>(adapter_for(WireRole::planner));
    set.executor = std::make_shared<RemoteExecutor>(adapter_for(WireRole::executor));
    set.monitor = std::make_shared<RemoteMonitor>(adapter_for(WireRole::monitor));
    set.reflector = std::make_shared<RemoteReflector>(adapter_for(WireRole::reflector));
    return set;
}

}  // namespace guitest
