#include "guitest/environment.hpp"

#include <algorithm>

namespace guitest {

const Element* hit_test(const std::vector<Element>& elements, Point p) {
    if (p.x < 0 || p.x >= kScreenWidth || p.y < 0 || p.y >= kScreenHeight)
        throw InputError("hit_test point outside the coordinate space");
    for (const auto& e : elements)
        if (e.bounds.contains(p)) return &e;
    return nullptr;
}

const Element* hit_test(const Screen& screen, Point p) { return hit_test(screen.elements, p); }

AnnotatedObservation annotate_action(const Observation& observation, const Action& action) {
    Marker m;
    m.kind = action.kind;
    m.point = action.point;
    if (action.point) {
        const Element* e = hit_test(observation.elements, *action.point);
        if (e) m.hit = e->id;
    }
    return AnnotatedObservation{observation, m};
}

Environment::Environment(InstrumentedModel model, NoiseConfig noise)
    : model_(std::move(model)), noise_(noise) {}

Observation Environment::reset(std::uint64_t seed) {
    model_.model.validate();
    seed_ = seed;
    live_ = true;
    current_ = model_.model.initial_screen;
    nav_stack_.clear();
    variables_ = model_.model.variables;
    scrolled_.clear();
    events_.clear();
    ledger_.trigger_log.clear();
    pending_.reset();
    steps_ = 0;
    return observe();
}

const Screen& Environment::current_screen() const {
    const Screen* s = model_.model.find_screen(current_);
    if (!s) throw LifecycleError("current screen '" + current_ + "' missing from model");
    return *s;
}

std::vector<Element> Environment::visible_elements(const Screen& s) const {
    const auto& base = (scrolled_.contains(s.id) && !s.scroll_elements.empty()) ? s.scroll_elements : s.elements;
    std::vector<Element> out = base;
    for (auto& e : out) e.label = render_label(e.label, variables_);
    return out;
}

std::string Environment::state_digest() const {
    // Pure function of (current screen, navigation stack, variables); equal
    // states yield equal digests.
    std::uint64_t h = fnv1a(current_);
    h = fnv1a("\x1f", h);
    for (const auto& s : nav_stack_) {
        h = fnv1a(s, h);
        h = fnv1a("\x1e", h);
    }
    h = fnv1a("\x1f", h);
    for (const auto& [k, v] : variables_) {
        h = fnv1a(k, h);
        h = fnv1a("=", h);
        h = fnv1a(v, h);
        h = fnv1a("\x1e", h);
    }
    return to_hex(h);
}

Observation Environment::observe() const {
    if (!live_) throw LifecycleError("environment not reset");
    Observation o;
    if (pending_ && pending_->remaining > 0) {
        o.screen_id = kLoadingScreenId;
        o.screen_name = "Loading";
    } else {
        const Screen& s = current_screen();
        o.screen_id = s.id;
        o.screen_name = s.name;
        o.elements = visible_elements(s);
    }
    o.state_digest = state_digest();
    o.step_index = steps_;
    return o;
}

Effect Environment::resolve_effect(const std::string& element_id, ActionKind kind) {
    // Armed defects intercept the transition lookup: when the trigger matches
    // and the preconditions are satisfied as an ordered subsequence of the
    // history so far, the actual effect replaces the expected one.
    for (const auto& d : model_.defects) {
        if (d.trigger.screen_id != current_ || d.trigger.element_id != element_id || d.trigger.kind != kind)
            continue;
        if (precondition_progress(events_, d) == d.preconditions.size()) {
            ledger_.trigger_log.push_back({d.id, steps_});
            return d.actual_effect;
        }
    }
    auto it = model_.model.transitions.find(TransitionKey{current_, element_id, kind});
    return it != model_.model.transitions.end() ? it->second : Effect::none();
}

void Environment::apply_effect(const Effect& effect, const std::optional<std::string>& typed_text) {
    switch (effect.kind) {
        case Effect::Kind::none:
            break;
        case Effect::Kind::navigate:
            nav_stack_.push_back(current_);
            current_ = effect.target_screen;
            break;
        case Effect::Kind::mutate: {
            std::string value = effect.new_value;
            if (typed_text) {
                size_t pos = value.find("${text}");
                if (pos != std::string::npos) value.replace(pos, 7, *typed_text);
            }
            variables_[effect.variable] = value;
            break;
        }
    }
}

Observation Environment::apply_action(const Action& action) {
    if (!live_) throw LifecycleError("environment not reset");
    action.validate();

    // While a delayed transition is pending, actions only consume waiting
    // time; the true effect appears once the delay runs out.
    if (pending_ && pending_->remaining > 0) {
        events_.push_back({kLoadingScreenId, "", action.kind});
        ++steps_;
        if (--pending_->remaining == 0) {
            apply_effect(pending_->effect, std::nullopt);
            pending_.reset();
        }
        return observe();
    }

    const Screen& screen = current_screen();
    const auto visible = visible_elements(screen);
    std::string hit_id;
    Effect effect = Effect::none();
    std::optional<std::string> typed;

    switch (action.kind) {
        case ActionKind::click:
        case ActionKind::long_press: {
            const Element* e = hit_test(visible, *action.point);
            if (e && e->enabled) {
                hit_id = e->id;
                effect = resolve_effect(e->id, action.kind);
            }
            break;
        }
        case ActionKind::type: {
            const Element* target = nullptr;
            if (action.point) {
                target = hit_test(visible, *action.point);
            } else {
                for (const auto& e : visible)
                    if (e.kind == ElementKind::text_field && e.enabled) {
                        target = &e;
                        break;
                    }
            }
            if (target) {
                hit_id = target->id;
                typed = action.text;
                effect = resolve_effect(target->id, ActionKind::type);
            }
            break;
        }
        case ActionKind::scroll:
            if (screen.scrollable) {
                if (*action.direction == Direction::down)
                    scrolled_.insert(screen.id);
                else if (*action.direction == Direction::up)
                    scrolled_.erase(screen.id);
            }
            break;
        case ActionKind::drag:
            break;
        case ActionKind::press_back:
            if (!nav_stack_.empty()) {
                current_ = nav_stack_.back();
                nav_stack_.pop_back();
            }
            break;
        case ActionKind::press_home:
        case ActionKind::open_app:
            current_ = model_.model.initial_screen;
            nav_stack_.clear();
            break;
        case ActionKind::finished:
        case ActionKind::answer:
            break;
    }

    events_.push_back({screen.id, hit_id, action.kind});

    if (effect.kind != Effect::Kind::none && noise_.enabled) {
        Rng rng(derive_seed(seed_, "noise", static_cast<std::uint64_t>(steps_)));
        int delay = static_cast<int>(rng.below(static_cast<std::uint64_t>(noise_.max_delay) + 1));
        if (delay > 0) {
            pending_ = PendingEffect{effect, delay};
            ++steps_;
            return observe();
        }
    }

    apply_effect(effect, typed);
    ++steps_;
    return observe();
}

}  // namespace guitest
