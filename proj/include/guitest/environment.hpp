#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "guitest/defects.hpp"
#include "guitest/model.hpp"

namespace guitest {

// Loading-delay noise: a seeded per-transition delay; while delayed the
// environment shows a "loading" pseudo-screen and holds the pending effect
// until the delay runs out. Disabled by default.
struct NoiseConfig {
    bool enabled = false;
    int max_delay = 2;  // delay drawn uniformly from [0, max_delay]
};

constexpr const char* kLoadingScreenId = "__loading__";

// Unambiguous containment lookup over a visible element list. Throws
// InputError when the point lies outside the coordinate space.
const Element* hit_test(const std::vector<Element>& elements, Point p);
const Element* hit_test(const Screen& screen, Point p);

// Marker construction for Reflector consumption; hit id always equals the
// hit_test result for the marker point.
AnnotatedObservation annotate_action(const Observation& observation, const Action& action);

// Deterministic simulated GUI environment. One instance serves exactly one
// task run.
class Environment {
  public:
    explicit Environment(InstrumentedModel model, NoiseConfig noise = {});

    Observation reset(std::uint64_t seed);
    Observation observe() const;
    Observation apply_action(const Action& action);

    const DefectLedger& ledger() const { return ledger_; }
    const InstrumentedModel& instrumented() const { return model_; }
    const std::vector<ActionEvent>& event_history() const { return events_; }
    std::string state_digest() const;
    int steps_applied() const { return steps_; }

  private:
    struct PendingEffect {
        Effect effect;
        int remaining = 0;
    };

    const Screen& current_screen() const;
    std::vector<Element> visible_elements(const Screen& s) const;
    void apply_effect(const Effect& effect, const std::optional<std::string>& typed_text);
    Effect resolve_effect(const std::string& element_id, ActionKind kind);

    InstrumentedModel model_;
    NoiseConfig noise_;
    bool live_ = false;
    std::uint64_t seed_ = 0;
    std::string current_;
    std::vector<std::string> nav_stack_;
    std::map<std::string, std::string> variables_;
    std::set<std::string> scrolled_;
    std::vector<ActionEvent> events_;
    DefectLedger ledger_;
    std::optional<PendingEffect> pending_;
    int steps_ = 0;
};

}  // namespace guitest
