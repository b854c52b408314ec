#include "shieldrl/env.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace shieldrl {

namespace {

int sample_row(const std::vector<double>& row, rng::Engine& engine) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(engine);
    double acc = 0.0;
    for (std::size_t s = 0; s < row.size(); ++s) {
        acc += row[s];
        if (u < acc) return static_cast<int>(s);
    }
    // Guard against accumulated rounding; the last supported state wins.
    for (std::size_t s = row.size(); s-- > 0;) {
        if (row[s] > 0.0) return static_cast<int>(s);
    }
    throw std::logic_error("transition row has no support");
}

void check_labels(const LabelSet& labels) {
    for (const auto& name : labels) {
        if (!is_valid_proposition_name(name)) {
            throw std::invalid_argument("invalid atomic proposition name: '" + name + "'");
        }
    }
}

}  // namespace

bool is_valid_proposition_name(const std::string& name) {
    if (name.empty() || name == "true") return false;
    if (!std::islower(static_cast<unsigned char>(name.front()))) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return std::islower(static_cast<unsigned char>(c)) ||
               std::isdigit(static_cast<unsigned char>(c)) || c == '-';
    });
}

LabeledStep Environment::reset(rng::Engine&) const {
    // Both shipped environments have a point-mass initial distribution.
    const int s = initial_state();
    return {s, labels(s), 0.0, is_terminal(s)};
}

LabeledStep Environment::step(int state, int action, rng::Engine& engine) const {
    if (state < 0 || state >= num_states()) {
        throw std::invalid_argument("step: state out of range");
    }
    if (is_terminal(state)) {
        throw std::invalid_argument("step: cannot step from a terminal state");
    }
    if (action < 0 || action >= num_actions()) {
        throw std::invalid_argument("step: action out of range");
    }
    const int next = sample_row(table_.row(state, action), engine);
    return {next, labels(next), transition_reward(state, action, next), is_terminal(next)};
}

MarkovChain induce_chain(const TransitionTable& table,
                         const std::vector<std::vector<double>>& policy) {
    if (static_cast<int>(policy.size()) != table.num_states) {
        throw std::invalid_argument("induce_chain: policy size mismatch");
    }
    MarkovChain chain;
    chain.labels = table.labels;
    chain.probs.assign(table.num_states, std::vector<double>(table.num_states, 0.0));
    for (int s = 0; s < table.num_states; ++s) {
        for (int a = 0; a < table.num_actions; ++a) {
            const double pa = policy[s][a];
            if (pa == 0.0) continue;
            const auto& row = table.row(s, a);
            for (int next = 0; next < table.num_states; ++next) {
                chain.probs[s][next] += pa * row[next];
            }
        }
    }
    return chain;
}

std::vector<std::vector<double>> uniform_policy_matrix(int num_states, int num_actions) {
    return std::vector<std::vector<double>>(
        num_states, std::vector<double>(num_actions, 1.0 / num_actions));
}

// ---------------------------------------------------------------------------
// ConveyorWorld
// ---------------------------------------------------------------------------

namespace {

bool adjacent(const Cell& a, const Cell& b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1;
}

constexpr int kDx[5] = {0, 0, -1, 1, 0};  // up, down, left, right, stay
constexpr int kDy[5] = {1, -1, 0, 0, 0};

}  // namespace

ConveyorWorld::ConveyorWorld(ConveyorWorldSpec spec) : spec_(std::move(spec)) {
    const auto in_bounds = [&](const Cell& c) {
        return c.x >= 0 && c.x < spec_.width && c.y >= 0 && c.y < spec_.height;
    };
    if (spec_.width < 1 || spec_.height < 1) {
        throw std::invalid_argument("conveyor: grid must be non-empty");
    }
    if (!(spec_.slip_prob >= 0.0 && spec_.slip_prob < 1.0)) {
        throw std::invalid_argument("conveyor: slip_prob must lie in [0,1)");
    }
    for (const Cell& c : {spec_.start, spec_.goal, spec_.acid}) {
        if (!in_bounds(c)) throw std::invalid_argument("conveyor: cell out of bounds");
    }
    if (spec_.belt.empty()) throw std::invalid_argument("conveyor: belt must be non-empty");
    for (std::size_t i = 0; i < spec_.belt.size(); ++i) {
        if (!in_bounds(spec_.belt[i])) {
            throw std::invalid_argument("conveyor: belt cell out of bounds");
        }
        for (std::size_t j = i + 1; j < spec_.belt.size(); ++j) {
            if (spec_.belt[i] == spec_.belt[j]) {
                throw std::invalid_argument("conveyor: belt cells must be distinct");
            }
        }
        if (i + 1 < spec_.belt.size() && !adjacent(spec_.belt[i], spec_.belt[i + 1])) {
            throw std::invalid_argument("conveyor: belt cells must be adjacent in sequence");
        }
    }
    if (!adjacent(spec_.belt.back(), spec_.acid)) {
        throw std::invalid_argument("conveyor: last belt cell must be adjacent to the acid");
    }
    const bool goal_on_belt =
        std::find(spec_.belt.begin(), spec_.belt.end(), spec_.goal) != spec_.belt.end();
    if (goal_on_belt || spec_.goal == spec_.acid) {
        throw std::invalid_argument("conveyor: goal must not lie on the belt or the acid");
    }

    const int n = num_states();
    state_labels_.assign(n, {});
    state_labels_[cell_id(spec_.acid)] = {"acid"};
    state_labels_[cell_id(spec_.goal)] = {"goal"};

    table_.num_states = n;
    table_.num_actions = num_actions();
    table_.labels = state_labels_;
    table_.terminal.assign(n, false);
    table_.terminal[cell_id(spec_.acid)] = true;
    table_.terminal[cell_id(spec_.goal)] = true;
    table_.probs.assign(static_cast<std::size_t>(n) * num_actions(),
                        std::vector<double>(n, 0.0));

    const auto resolve = [&](Cell from, int action) {
        Cell to{from.x + kDx[action], from.y + kDy[action]};
        return in_bounds(to) ? to : from;  // walls: stay in place
    };

    for (int s = 0; s < n; ++s) {
        const Cell here = cell_of(s);
        for (int a = 0; a < num_actions(); ++a) {
            auto& row = table_.probs[static_cast<std::size_t>(s) * num_actions() + a];
            if (table_.terminal[s]) {
                row[s] = 1.0;
                continue;
            }
            const auto belt_it = std::find(spec_.belt.begin(), spec_.belt.end(), here);
            if (belt_it != spec_.belt.end()) {
                // Belt transport overrides the action and never slips.
                const Cell next = (belt_it + 1 == spec_.belt.end()) ? spec_.acid : *(belt_it + 1);
                row[cell_id(next)] = 1.0;
                continue;
            }
            if (a == static_cast<int>(Action::stay) || spec_.slip_prob == 0.0) {
                row[cell_id(resolve(here, a))] += 1.0;
                continue;
            }
            // Lateral slips are the two directions perpendicular to the move.
            const bool vertical = (a == static_cast<int>(Action::up) ||
                                   a == static_cast<int>(Action::down));
            const int lat1 = vertical ? static_cast<int>(Action::left) : static_cast<int>(Action::up);
            const int lat2 = vertical ? static_cast<int>(Action::right) : static_cast<int>(Action::down);
            row[cell_id(resolve(here, a))] += 1.0 - spec_.slip_prob;
            row[cell_id(resolve(here, lat1))] += spec_.slip_prob / 2.0;
            row[cell_id(resolve(here, lat2))] += spec_.slip_prob / 2.0;
        }
    }
}

const LabelSet& ConveyorWorld::labels(int state) const {
    return state_labels_.at(static_cast<std::size_t>(state));
}

bool ConveyorWorld::is_terminal(int state) const {
    return table_.terminal.at(static_cast<std::size_t>(state));
}

double ConveyorWorld::transition_reward(int, int, int next) const {
    return next == cell_id(spec_.goal) ? 1.0 : 0.0;
}

// ---------------------------------------------------------------------------
// ChainMdp
// ---------------------------------------------------------------------------

ChainMdp::ChainMdp(ChainMdpSpec spec) : spec_(std::move(spec)) {
    const int n = num_states();
    if (n < 1) throw std::invalid_argument("chain: needs at least one state");
    for (double p : spec_.stay_safe) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("chain: stay-safe probabilities must lie in [0,1]");
        }
    }
    if (spec_.labels.empty()) {
        spec_.labels[n - 1] = {"unsafe"};
    }
    state_labels_.assign(n, {});
    for (const auto& [state, labels] : spec_.labels) {
        if (state < 0 || state >= n) {
            throw std::invalid_argument("chain: labelled state out of range");
        }
        check_labels(labels);
        state_labels_[state] = labels;
    }

    table_.num_states = n;
    table_.num_actions = 1;
    table_.labels = state_labels_;
    table_.terminal.assign(n, false);
    table_.probs.assign(n, std::vector<double>(n, 0.0));
    for (int s = 0; s < n; ++s) {
        auto& row = table_.probs[s];
        if (s == n - 1) {
            row[s] = 1.0;  // absorbing end of the chain
        } else {
            row[s] = spec_.stay_safe[s];
            row[s + 1] += 1.0 - spec_.stay_safe[s];
        }
    }
}

const LabelSet& ChainMdp::labels(int state) const {
    return state_labels_.at(static_cast<std::size_t>(state));
}

// ---------------------------------------------------------------------------
// JSON loading
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::vector<std::string>& known,
                         const std::string& where) {
    for (const auto& item : j.items()) {
        if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
            throw std::invalid_argument("unknown key '" + item.key() + "' in " + where);
        }
    }
}

Cell cell_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) {
        throw std::invalid_argument("cells must be [x, y] pairs");
    }
    return {j[0].get<int>(), j[1].get<int>()};
}

json cell_to_json(const Cell& c) { return json::array({c.x, c.y}); }

}  // namespace

std::unique_ptr<Environment> make_environment(const json& spec) {
    if (!spec.is_object() || !spec.contains("type")) {
        throw std::invalid_argument("environment spec must be an object with a \"type\" key");
    }
    const auto type = spec.at("type").get<std::string>();
    if (type == "conveyor") {
        reject_unknown_keys(spec, {"type", "width", "height", "start", "goal", "belt",
                                   "acid", "slip_prob"},
                            "conveyor spec");
        ConveyorWorldSpec s;
        if (spec.contains("width")) s.width = spec.at("width").get<int>();
        if (spec.contains("height")) s.height = spec.at("height").get<int>();
        if (spec.contains("start")) s.start = cell_from_json(spec.at("start"));
        if (spec.contains("goal")) s.goal = cell_from_json(spec.at("goal"));
        if (spec.contains("acid")) s.acid = cell_from_json(spec.at("acid"));
        if (spec.contains("slip_prob")) s.slip_prob = spec.at("slip_prob").get<double>();
        if (spec.contains("belt")) {
            s.belt.clear();
            for (const auto& c : spec.at("belt")) s.belt.push_back(cell_from_json(c));
        }
        return std::make_unique<ConveyorWorld>(std::move(s));
    }
    if (type == "chain") {
        reject_unknown_keys(spec, {"type", "stay_safe", "labels"}, "chain spec");
        ChainMdpSpec s;
        if (spec.contains("stay_safe")) {
            s.stay_safe = spec.at("stay_safe").get<std::vector<double>>();
        }
        if (spec.contains("labels")) {
            for (const auto& item : spec.at("labels").items()) {
                LabelSet labels;
                for (const auto& name : item.value()) labels.insert(name.get<std::string>());
                s.labels[std::stoi(item.key())] = std::move(labels);
            }
        }
        return std::make_unique<ChainMdp>(std::move(s));
    }
    throw std::invalid_argument("unknown environment type '" + type + "'");
}

json environment_spec_to_json(const ConveyorWorldSpec& spec) {
    json belt = json::array();
    for (const Cell& c : spec.belt) belt.push_back(cell_to_json(c));
    return json{{"type", "conveyor"}, {"width", spec.width},   {"height", spec.height},
                {"start", cell_to_json(spec.start)}, {"goal", cell_to_json(spec.goal)},
                {"belt", belt},       {"acid", cell_to_json(spec.acid)},
                {"slip_prob", spec.slip_prob}};
}

json environment_spec_to_json(const ChainMdpSpec& spec) {
    json labels = json::object();
    for (const auto& [state, set] : spec.labels) {
        labels[std::to_string(state)] = json(set);
    }
    return json{{"type", "chain"}, {"stay_safe", spec.stay_safe}, {"labels", labels}};
}

}  // namespace shieldrl
