#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "shieldrl/rng.hpp"

#include "json.hpp"

namespace shieldrl {

/// Set of atomic proposition names attached to a state by the labelling
/// function. Names follow the identifier grammar: a lowercase letter followed
/// by lowercase letters, digits or hyphens.
using LabelSet = std::set<std::string>;

bool is_valid_proposition_name(const std::string& name);

/// One observation from the environment: the state reached, its labels, the
/// reward collected by the transition, and whether the state is terminal.
struct LabeledStep {
    int state = 0;
    LabelSet labels;
    double reward = 0.0;
    bool terminal = false;
};

/// Explicit p(s'|s,a) table together with the labelling, used by the exact
/// checking oracle and by statistical checking of a raw environment.
struct TransitionTable {
    int num_states = 0;
    int num_actions = 0;
    std::vector<std::vector<double>> probs;  // indexed s * num_actions + a
    std::vector<LabelSet> labels;
    std::vector<bool> terminal;

    const std::vector<double>& row(int state, int action) const {
        return probs[static_cast<std::size_t>(state) * num_actions + action];
    }
};

/// State-to-state transition system induced by a policy.
struct MarkovChain {
    std::vector<std::vector<double>> probs;  // probs[s][s']
    std::vector<LabelSet> labels;
};

/// T(s,s') = sum_a policy[s][a] * p(s'|s,a). Terminal states self-loop.
MarkovChain induce_chain(const TransitionTable& table,
                         const std::vector<std::vector<double>>& policy);

std::vector<std::vector<double>> uniform_policy_matrix(int num_states, int num_actions);

/// Finite labelled MDP with a point-mass initial distribution. Environments
/// are immutable; the caller owns the current state and the RNG stream, so
/// independent episodes can run concurrently on one instance.
class Environment {
public:
    virtual ~Environment() = default;

    virtual int num_states() const = 0;
    virtual int num_actions() const = 0;
    virtual int initial_state() const = 0;
    virtual const LabelSet& labels(int state) const = 0;
    virtual bool is_terminal(int state) const = 0;

    LabeledStep reset(rng::Engine& engine) const;

    /// Samples the successor of (state, action). Throws std::invalid_argument
    /// when stepping from a terminal state or with an out-of-range action.
    LabeledStep step(int state, int action, rng::Engine& engine) const;

    /// Exact p(s'|s,a). Terminal states are reported as absorbing self-loops
    /// so that every row is a distribution.
    const TransitionTable& enumerate_transitions() const { return table_; }

protected:
    /// Reward observed when the transition (state, action) -> next fires.
    virtual double transition_reward(int state, int action, int next) const = 0;

    TransitionTable table_;  // filled by concrete constructors
};

enum class Action { up = 0, down = 1, left = 2, right = 3, stay = 4 };

struct Cell {
    int x = 0;
    int y = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Grid world with a conveyor belt that drags the agent into acid. The belt
/// is an ordered run of cells; stepping anywhere on it moves the agent one
/// cell further along regardless of the chosen action, and the final belt
/// cell feeds the acid cell. Reaching the goal pays +1; goal and acid are
/// terminal. Directional moves slip sideways with probability slip_prob
/// (split evenly between the two perpendicular directions); `stay` never
/// slips, and moves off the grid leave the agent in place.
struct ConveyorWorldSpec {
    int width = 7;
    int height = 7;
    Cell start{0, 0};
    Cell goal{6, 6};
    std::vector<Cell> belt{{1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}};
    Cell acid{6, 0};
    double slip_prob = 0.0;
};

class ConveyorWorld : public Environment {
public:
    explicit ConveyorWorld(ConveyorWorldSpec spec = {});

    int num_states() const override { return spec_.width * spec_.height; }
    int num_actions() const override { return 5; }
    int initial_state() const override { return cell_id(spec_.start); }
    const LabelSet& labels(int state) const override;
    bool is_terminal(int state) const override;

    const ConveyorWorldSpec& spec() const { return spec_; }
    int cell_id(const Cell& c) const { return c.y * spec_.width + c.x; }
    Cell cell_of(int state) const { return {state % spec_.width, state / spec_.width}; }

protected:
    double transition_reward(int state, int action, int next) const override;

private:
    ConveyorWorldSpec spec_;
    std::vector<LabelSet> state_labels_;
};

/// Linear chain used as an analytically solvable substrate: state i stays put
/// with probability stay_safe[i] and otherwise advances toward the end of the
/// chain, whose last state is absorbing. Single action, zero reward, no
/// terminal states. Default labelling marks the last state "unsafe".
struct ChainMdpSpec {
    std::vector<double> stay_safe{0.9, 1.0};
    std::map<int, LabelSet> labels;  // empty: last state gets {"unsafe"}
};

class ChainMdp : public Environment {
public:
    explicit ChainMdp(ChainMdpSpec spec = {});

    int num_states() const override { return static_cast<int>(spec_.stay_safe.size()); }
    int num_actions() const override { return 1; }
    int initial_state() const override { return 0; }
    const LabelSet& labels(int state) const override;
    bool is_terminal(int) const override { return false; }

    const ChainMdpSpec& spec() const { return spec_; }

protected:
    double transition_reward(int, int, int) const override { return 0.0; }

private:
    ChainMdpSpec spec_;
    std::vector<LabelSet> state_labels_;
};

/// Builds an environment from {"type": "conveyor" | "chain", ...}. Unknown
/// keys are rejected.
std::unique_ptr<Environment> make_environment(const nlohmann::json& spec);

nlohmann::json environment_spec_to_json(const ConveyorWorldSpec& spec);
nlohmann::json environment_spec_to_json(const ChainMdpSpec& spec);

}  // namespace shieldrl
