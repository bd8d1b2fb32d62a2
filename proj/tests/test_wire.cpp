#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>

#include "fixtures.hpp"
#include "guitest/wire.hpp"

using namespace guitest;
using namespace guitest::fixtures;

namespace {

// Loopback handler that answers the handshake line itself and forwards
// everything after it to the wrapped request handler.
LoopbackStream::Handler with_handshake(WireRole role, LoopbackStream::Handler on_request,
                                       bool reentrant = false) {
    auto first = std::make_shared<bool>(true);
    return [=](const std::string& line) -> std::optional<std::string> {
        if (*first) {
            *first = false;
            Handshake h;
            h.role = role;
            h.reentrant = reentrant;
            CHECK_NOTHROW(handshake_from_json(json::parse(line)));  // client hello is well-formed
            return handshake_to_json(h).dump();
        }
        return on_request(line);
    };
}

std::shared_ptr<RemoteAdapter> loopback_adapter(WireRole role, LoopbackStream::Handler on_request,
                                                int max_retries = 3, bool reentrant = false) {
    auto stream = std::make_shared<LoopbackStream>(with_handshake(role, std::move(on_request), reentrant));
    return std::make_shared<RemoteAdapter>(stream, role, max_retries);
}

}  // namespace

TEST_CASE("handshake JSON round trips and rejects foreign schemas") {
    Handshake h;
    h.role = WireRole::judge;
    h.reentrant = true;
    h.temperature = 0.1;
    const Handshake back = handshake_from_json(handshake_to_json(h));
    CHECK(back.role == WireRole::judge);
    CHECK(back.reentrant);
    CHECK(back.temperature == doctest::Approx(0.1));

    json bad = handshake_to_json(h);
    bad["schema"] = "agent_wire_v2";
    CHECK_THROWS_AS(handshake_from_json(bad), ProtocolError);
    CHECK_THROWS_AS(wire_role_from("oracle"), ValidationError);
}

TEST_CASE("adapter rejects a peer that answers for the wrong role") {
    auto stream = std::make_shared<LoopbackStream>(
        with_handshake(WireRole::executor, [](const std::string&) { return std::nullopt; }));
    CHECK_THROWS_AS(RemoteAdapter(stream, WireRole::planner, 1), ProtocolError);
}

TEST_CASE("adapter stamps the role into every request") {
    std::vector<json> seen;
    auto adapter = loopback_adapter(WireRole::monitor, [&](const std::string& line) {
        seen.push_back(json::parse(line));
        return json{{"verdict", {{"value", "CONTINUE"}, {"note", ""}}}}.dump();
    });
    adapter->call(json{{"subject", "check"}});
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].at("role") == "monitor");
    CHECK(seen[0].at("subject") == "check");
}

TEST_CASE("remote executor round trips actions through the wire") {
    // The peer echoes the probe action back; every well-formed action must
    // survive serialization in both directions unchanged.
    std::vector<Action> probes;
    Action click;
    click.kind = ActionKind::click;
    click.point = Point{77, 901};
    probes.push_back(click);
    Action typing;
    typing.kind = ActionKind::type;
    typing.text = "route66";
    typing.point = Point{540, 300};
    probes.push_back(typing);
    Action scroll;
    scroll.kind = ActionKind::scroll;
    scroll.direction = Direction::up;
    probes.push_back(scroll);
    Action back;
    back.kind = ActionKind::press_back;
    probes.push_back(back);

    for (const Action& probe : probes) {
        RemoteExecutor echo(loopback_adapter(WireRole::executor, [&](const std::string& line) {
            CHECK(json::parse(line).at("subject") == "act");
            return json{{"action", to_json(probe)}}.dump();
        }));
        Subtask st;
        st.id = "nav-0";
        Observation obs;
        obs.screen_id = "home";
        const Action got = echo.act(st, obs, {});
        CHECK(to_json(got).dump() == to_json(probe).dump());
    }
}

TEST_CASE("remote planner parses subtasks including routing hints") {
    Subtask wanted;
    wanted.id = "intent-2";
    wanted.kind = SubtaskKind::test_intent;
    wanted.intent_pattern = IntentPattern::boundary_conditions;
    wanted.instruction = "probe the search box";
    wanted.goal = GoalPredicate::state_changed();
    wanted.avoid.insert({"home", "to_about", ActionKind::click});
    wanted.intent_action = RouteStep{"search", "search_box", ActionKind::type, std::string(kBoundaryProbeText)};

    json captured;
    auto adapter = loopback_adapter(WireRole::planner, [&](const std::string& line) {
        captured = json::parse(line);
        return json{{"plan", json::array({subtask_to_json(wanted)})}}.dump();
    });
    RemotePlanner planner(adapter);

    Observation obs;
    obs.screen_id = "home";
    Attribution refl;
    refl.value = AttributionValue::GUI_BUG;
    refl.evidence.edge = TransitionKey{"home", "to_about", ActionKind::click};
    const auto plan = planner.plan(obs, {}, refl);

    REQUIRE(plan.size() == 1);
    CHECK(subtask_to_json(plan[0]).dump() == subtask_to_json(wanted).dump());
    CHECK(captured.at("subject") == "plan");
    CHECK_FALSE(captured.at("reflection").is_null());
}

TEST_CASE("remote monitor and reflector validate response shapes") {
    Subtask st;
    st.id = "nav-0";
    st.goal = GoalPredicate::on_screen("settings");
    Observation obs;
    obs.screen_id = "home";
    Action a;
    a.kind = ActionKind::press_back;

    SUBCASE("well-formed verdict") {
        RemoteMonitor monitor(loopback_adapter(WireRole::monitor, [](const std::string&) {
            return json{{"verdict", {{"value", "FAIL"}, {"note", "missed"}}}}.dump();
        }));
        const auto v = monitor.check(st, obs, a, obs);
        CHECK(v.value == VerdictValue::FAIL);
        CHECK(v.note == "missed");
    }
    SUBCASE("missing verdict object") {
        RemoteMonitor monitor(loopback_adapter(
            WireRole::monitor, [](const std::string&) { return json{{"ok", true}}.dump(); }));
        CHECK_THROWS_AS(monitor.check(st, obs, a, obs), ProtocolError);
    }
    SUBCASE("well-formed attribution") {
        Attribution want;
        want.value = AttributionValue::GUI_BUG;
        want.evidence.step_indices = {3};
        want.evidence.edge = TransitionKey{"home", "to_about", ActionKind::click};
        RemoteReflector reflector(loopback_adapter(WireRole::reflector, [&](const std::string&) {
            return json{{"attribution", attribution_to_json(want)}}.dump();
        }));
        StepRecord step;
        const Attribution got = reflector.reflect(st, {step}, obs);
        CHECK(attribution_to_json(got).dump() == attribution_to_json(want).dump());
    }
    SUBCASE("missing attribution") {
        RemoteReflector reflector(loopback_adapter(
            WireRole::reflector, [](const std::string&) { return json::object().dump(); }));
        StepRecord step;
        CHECK_THROWS_AS(reflector.reflect(st, {step}, obs), ProtocolError);
    }
    SUBCASE("malformed response line") {
        auto adapter = loopback_adapter(WireRole::monitor,
                                        [](const std::string&) { return std::string("not json"); });
        CHECK_THROWS_AS(adapter->call(json{{"subject", "check"}}), ProtocolError);
    }
}

TEST_CASE("adapter retries empty reads a bounded number of times then gives up") {
    int requests = 0;
    auto adapter = loopback_adapter(
        WireRole::executor,
        [&](const std::string&) {
            ++requests;
            return std::nullopt;
        },
        /*max_retries=*/2);
    CHECK_THROWS_AS(adapter->call(json{{"subject", "act"}}), OrchestrationError);
    CHECK(requests == 3);  // initial attempt plus two retries
}

TEST_CASE("adapter transient drops recover within the retry budget") {
    int requests = 0;
    auto adapter = loopback_adapter(WireRole::executor, [&](const std::string&) -> std::optional<std::string> {
        if (++requests < 3) return std::nullopt;
        return json{{"action", {{"kind", "press_back"}}}}.dump();
    });
    const json rsp = adapter->call(json{{"subject", "act"}});
    CHECK(rsp.contains("action"));
    CHECK(requests == 3);
}

TEST_CASE("non-reentrant peers admit one in-flight request") {
    std::shared_ptr<RemoteAdapter> adapter;
    adapter = loopback_adapter(WireRole::monitor, [&](const std::string&) {
        // A nested call while the first is still being served must be refused.
        CHECK_THROWS_AS(adapter->call(json{{"subject", "check"}}), OrchestrationError);
        return json{{"verdict", {{"value", "CONTINUE"}, {"note", ""}}}}.dump();
    });
    CHECK_NOTHROW(adapter->call(json{{"subject", "check"}}));
}

TEST_CASE("reentrant peers may nest calls") {
    std::shared_ptr<RemoteAdapter> adapter;
    bool nested = false;
    adapter = loopback_adapter(
        WireRole::monitor,
        [&](const std::string&) {
            if (!nested) {
                nested = true;
                const json inner = adapter->call(json{{"subject", "check"}});
                CHECK(inner.contains("verdict"));
            }
            return json{{"verdict", {{"value", "CONTINUE"}, {"note", ""}}}}.dump();
        },
        3, /*reentrant=*/true);
    CHECK_NOTHROW(adapter->call(json{{"subject", "check"}}));
}

TEST_CASE("endpoint resolution prefers the flag over the environment") {
    ::unsetenv("GUITEST_ENDPOINT");
    CHECK_FALSE(resolve_endpoint(std::nullopt).has_value());
    CHECK(resolve_endpoint(std::string("a:1")) == std::string("a:1"));
    ::setenv("GUITEST_ENDPOINT", "b:2", 1);
    CHECK(resolve_endpoint(std::nullopt) == std::string("b:2"));
    CHECK(resolve_endpoint(std::string("a:1")) == std::string("a:1"));
    CHECK(resolve_endpoint(std::string("")) == std::string("b:2"));  // empty flag falls through
    ::unsetenv("GUITEST_ENDPOINT");
}
