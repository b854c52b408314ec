#pragma once

#include <deque>
#include <vector>

#include "shieldrl/env.hpp"
#include "shieldrl/formula.hpp"
#include "shieldrl/rng.hpp"

#include "json.hpp"

namespace shieldrl {

/// One replayed experience tuple. For an ordinary step, `state` is the state
/// the action was taken from, `cost`/`safety_discount` are that state's
/// targets, and `terminal` is false. When an episode ends, the harness
/// additionally appends a marker with terminal = true whose state and
/// next_state are both the terminal state; that marker is the only evidence
/// a terminal state's cost and termination ever produce.
struct TransitionRecord {
    int state = 0;
    int action = 0;
    double reward = 0.0;
    double cost = 0.0;
    double safety_discount = 0.0;
    int next_state = 0;
    bool terminal = false;
};

/// Cost target: 0 when the labels satisfy the safety formula, C otherwise.
double make_cost_target(const LabelSet& labels, const StateFormula& formula,
                        double violation_cost);

/// Safety-discount target: gamma when the labels satisfy the safety formula,
/// 0 otherwise. A zero safety discount makes violating states act terminal
/// for cost backups.
double make_safety_discount_target(const LabelSet& labels, const StateFormula& formula,
                                   double gamma);

/// Bounded FIFO of transition records.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(const TransitionRecord& record);
    std::size_t size() const { return records_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return records_.empty(); }
    const TransitionRecord& operator[](std::size_t i) const { return records_[i]; }

private:
    std::size_t capacity_;
    std::deque<TransitionRecord> records_;
};

/// Uniform sample with replacement; deterministic given the engine state.
std::vector<TransitionRecord> sample_batch(const ReplayBuffer& buffer, int batch_size,
                                           rng::Engine& engine);

enum class CostPrior { optimistic, pessimistic };

struct ModelPrediction {
    std::vector<double> next_state_distribution;
    double reward = 0.0;
    double cost = 0.0;
    double discount = 0.0;
    double safety_discount = 0.0;
};

/// Count-based maximum-likelihood world model over a finite state/action
/// space, with per-state cost, violation-rate and termination-rate statistics
/// standing in for the cost, safety-discount and discount predictors.
/// Unvisited state-action pairs predict a reward-free self-loop; unvisited
/// states predict the configured cost prior (optimistic: cost 0 and safety
/// discount gamma; pessimistic: cost C and safety discount 0). Mutation is
/// single-owner; a model that is no longer observed is safe for concurrent
/// read-only rollouts.
class TabularWorldModel {
public:
    TabularWorldModel(int num_states, int num_actions, double gamma, double violation_cost,
                      CostPrior prior = CostPrior::optimistic);

    void observe(const TransitionRecord& record);

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    double gamma() const { return gamma_; }
    double violation_cost() const { return violation_cost_; }
    CostPrior cost_prior() const { return prior_; }

    long long visit_count(int state, int action) const;
    long long state_visit_count(int state) const;

    int sample_next_state(int state, int action, rng::Engine& engine) const;
    double predicted_reward(int state, int action) const;
    double predicted_cost(int state) const;
    double predicted_discount(int state) const;         // gamma * (1 - terminal rate)
    double predicted_safety_discount(int state) const;  // gamma * (1 - violation rate)
    double terminal_rate(int state) const;
    bool predicts_terminal(int state) const { return terminal_rate(state) > 0.5; }

    std::vector<double> next_state_distribution(int state, int action) const;
    ModelPrediction predict(int state, int action) const;

    nlohmann::json to_json() const;
    static TabularWorldModel from_json(const nlohmann::json& doc);

private:
    struct SaStats {
        long long total = 0;
        double reward_sum = 0.0;
        std::vector<std::pair<int, long long>> successors;  // sparse counts
    };
    struct StateStats {
        long long visits = 0;
        long long violations = 0;
        long long terminals = 0;
        double cost_sum = 0.0;
    };

    const SaStats& sa(int state, int action) const {
        return sa_[static_cast<std::size_t>(state) * num_actions_ + action];
    }
    SaStats& sa(int state, int action) {
        return sa_[static_cast<std::size_t>(state) * num_actions_ + action];
    }

    int num_states_;
    int num_actions_;
    double gamma_;
    double violation_cost_;
    CostPrior prior_;
    std::vector<SaStats> sa_;
    std::vector<StateStats> states_;
};

/// One step of an imagined rollout: the state reached, the action the policy
/// picks there, and the model's per-step predictions at that state.
struct ImaginedStep {
    int state = 0;
    int action = 0;
    double reward = 0.0;           // predicted reward of (state, action)
    double cost = 0.0;             // predicted cost of state
    double discount = 0.0;         // predicted discount of state
    double safety_discount = 0.0;  // predicted safety discount of state
};

using ImaginedTrace = std::vector<ImaginedStep>;

/// Rolls the model forward from `start` for up to `horizon` steps. The trace
/// holds the imagined successors of `start` (the start state itself is not an
/// element). Stops early once a state the model predicts terminal is reached.
/// The sampler is called as sampler(state, engine) -> action; per step the
/// action at the new state is drawn after the transition, so results are
/// reproducible given the engine state.
template <typename ActionSampler>
void rollout_into(ImaginedTrace& out, const TabularWorldModel& model, ActionSampler&& sampler,
                  int start, int horizon, rng::Engine& engine) {
    out.clear();
    if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
    out.reserve(static_cast<std::size_t>(horizon));
    int state = start;
    int action = sampler(state, engine);
    for (int t = 0; t < horizon; ++t) {
        const int next = model.sample_next_state(state, action, engine);
        state = next;
        action = sampler(state, engine);
        out.push_back(ImaginedStep{state, action, model.predicted_reward(state, action),
                                   model.predicted_cost(state), model.predicted_discount(state),
                                   model.predicted_safety_discount(state)});
        if (model.predicts_terminal(state)) break;
    }
}

template <typename ActionSampler>
ImaginedTrace rollout(const TabularWorldModel& model, ActionSampler&& sampler, int start,
                      int horizon, rng::Engine& engine) {
    ImaginedTrace trace;
    rollout_into(trace, model, std::forward<ActionSampler>(sampler), start, horizon, engine);
    return trace;
}

}  // namespace shieldrl
