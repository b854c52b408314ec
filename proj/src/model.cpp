#include "shieldrl/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace shieldrl {

double make_cost_target(const LabelSet& labels, const StateFormula& formula,
                        double violation_cost) {
    if (violation_cost <= 0.0) {
        throw std::invalid_argument("make_cost_target: violation cost must be positive");
    }
    return eval_state(labels, formula) ? 0.0 : violation_cost;
}

double make_safety_discount_target(const LabelSet& labels, const StateFormula& formula,
                                   double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("make_safety_discount_target: gamma must lie in (0,1)");
    }
    return eval_state(labels, formula) ? gamma : 0.0;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("replay buffer: capacity must be positive");
}

void ReplayBuffer::push(const TransitionRecord& record) {
    if (records_.size() == capacity_) records_.pop_front();
    records_.push_back(record);
}

std::vector<TransitionRecord> sample_batch(const ReplayBuffer& buffer, int batch_size,
                                           rng::Engine& engine) {
    if (buffer.empty()) throw std::invalid_argument("sample_batch: buffer is empty");
    if (batch_size < 0) throw std::invalid_argument("sample_batch: negative batch size");
    std::vector<TransitionRecord> batch;
    batch.reserve(static_cast<std::size_t>(batch_size));
    std::uniform_int_distribution<std::size_t> pick(0, buffer.size() - 1);
    for (int i = 0; i < batch_size; ++i) batch.push_back(buffer[pick(engine)]);
    return batch;
}

TabularWorldModel::TabularWorldModel(int num_states, int num_actions, double gamma,
                                     double violation_cost, CostPrior prior)
    : num_states_(num_states),
      num_actions_(num_actions),
      gamma_(gamma),
      violation_cost_(violation_cost),
      prior_(prior),
      sa_(static_cast<std::size_t>(num_states) * num_actions),
      states_(static_cast<std::size_t>(num_states)) {
    if (num_states < 1 || num_actions < 1) {
        throw std::invalid_argument("world model: state and action counts must be positive");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("world model: gamma must lie in (0,1)");
    }
    if (violation_cost <= 0.0) {
        throw std::invalid_argument("world model: violation cost must be positive");
    }
}

void TabularWorldModel::observe(const TransitionRecord& record) {
    auto& st = states_.at(static_cast<std::size_t>(record.state));
    st.visits += 1;
    st.cost_sum += record.cost;
    if (record.safety_discount == 0.0) st.violations += 1;
    if (record.terminal) st.terminals += 1;

    auto& pair = sa(record.state, record.action);
    pair.total += 1;
    pair.reward_sum += record.reward;
    // Successor lists stay sorted by state id so that sampling walks them in
    // a canonical order, including after a checkpoint round-trip.
    auto it = std::lower_bound(pair.successors.begin(), pair.successors.end(),
                               record.next_state,
                               [](const auto& e, int s) { return e.first < s; });
    if (it == pair.successors.end() || it->first != record.next_state) {
        pair.successors.insert(it, {record.next_state, 1});
    } else {
        it->second += 1;
    }
}

long long TabularWorldModel::visit_count(int state, int action) const {
    return sa(state, action).total;
}

long long TabularWorldModel::state_visit_count(int state) const {
    return states_.at(static_cast<std::size_t>(state)).visits;
}

int TabularWorldModel::sample_next_state(int state, int action, rng::Engine& engine) const {
    const SaStats& pair = sa(state, action);
    if (pair.total == 0) return state;  // unvisited pair: self-loop prior
    long long draw = std::uniform_int_distribution<long long>(0, pair.total - 1)(engine);
    for (const auto& [next, count] : pair.successors) {
        if (draw < count) return next;
        draw -= count;
    }
    return pair.successors.back().first;  // unreachable when counts are consistent
}

double TabularWorldModel::predicted_reward(int state, int action) const {
    const SaStats& pair = sa(state, action);
    return pair.total == 0 ? 0.0 : pair.reward_sum / static_cast<double>(pair.total);
}

double TabularWorldModel::predicted_cost(int state) const {
    const StateStats& st = states_.at(static_cast<std::size_t>(state));
    if (st.visits == 0) return prior_ == CostPrior::optimistic ? 0.0 : violation_cost_;
    return st.cost_sum / static_cast<double>(st.visits);
}

double TabularWorldModel::terminal_rate(int state) const {
    const StateStats& st = states_.at(static_cast<std::size_t>(state));
    return st.visits == 0 ? 0.0 : static_cast<double>(st.terminals) / static_cast<double>(st.visits);
}

double TabularWorldModel::predicted_discount(int state) const {
    return gamma_ * (1.0 - terminal_rate(state));
}

double TabularWorldModel::predicted_safety_discount(int state) const {
    const StateStats& st = states_.at(static_cast<std::size_t>(state));
    if (st.visits == 0) return prior_ == CostPrior::optimistic ? gamma_ : 0.0;
    const double violation_rate =
        static_cast<double>(st.violations) / static_cast<double>(st.visits);
    return gamma_ * (1.0 - violation_rate);
}

std::vector<double> TabularWorldModel::next_state_distribution(int state, int action) const {
    std::vector<double> dist(static_cast<std::size_t>(num_states_), 0.0);
    const SaStats& pair = sa(state, action);
    if (pair.total == 0) {
        dist[static_cast<std::size_t>(state)] = 1.0;
        return dist;
    }
    for (const auto& [next, count] : pair.successors) {
        dist[static_cast<std::size_t>(next)] =
            static_cast<double>(count) / static_cast<double>(pair.total);
    }
    return dist;
}

ModelPrediction TabularWorldModel::predict(int state, int action) const {
    return ModelPrediction{next_state_distribution(state, action), predicted_reward(state, action),
                           predicted_cost(state), predicted_discount(state),
                           predicted_safety_discount(state)};
}

nlohmann::json TabularWorldModel::to_json() const {
    nlohmann::json transitions = nlohmann::json::object();
    nlohmann::json rewards = nlohmann::json::object();
    for (int s = 0; s < num_states_; ++s) {
        for (int a = 0; a < num_actions_; ++a) {
            const SaStats& pair = sa(s, a);
            if (pair.total == 0) continue;
            const std::string sa_key = std::to_string(s) + "," + std::to_string(a);
            rewards[sa_key] = pair.reward_sum;
            for (const auto& [next, count] : pair.successors) {
                transitions[sa_key + "," + std::to_string(next)] = count;
            }
        }
    }
    nlohmann::json state_stats = nlohmann::json::object();
    for (int s = 0; s < num_states_; ++s) {
        const StateStats& st = states_[static_cast<std::size_t>(s)];
        if (st.visits == 0) continue;
        state_stats[std::to_string(s)] = {{"visits", st.visits},
                                          {"violations", st.violations},
                                          {"terminals", st.terminals},
                                          {"cost_sum", st.cost_sum}};
    }
    return nlohmann::json{{"version", 1},
                          {"num_states", num_states_},
                          {"num_actions", num_actions_},
                          {"gamma", gamma_},
                          {"violation_cost", violation_cost_},
                          {"cost_prior", prior_ == CostPrior::optimistic ? "optimistic" : "pessimistic"},
                          {"transition_counts", transitions},
                          {"reward_sums", rewards},
                          {"state_stats", state_stats}};
}

namespace {

std::vector<int> parse_key(const std::string& key, std::size_t parts) {
    std::vector<int> out;
    std::size_t begin = 0;
    while (begin <= key.size()) {
        const std::size_t comma = key.find(',', begin);
        const std::string piece =
            key.substr(begin, comma == std::string::npos ? std::string::npos : comma - begin);
        out.push_back(std::stoi(piece));
        if (comma == std::string::npos) break;
        begin = comma + 1;
    }
    if (out.size() != parts) throw std::invalid_argument("model: malformed table key '" + key + "'");
    return out;
}

}  // namespace

TabularWorldModel TabularWorldModel::from_json(const nlohmann::json& doc) {
    if (!doc.contains("version") || doc.at("version").get<int>() != 1) {
        throw std::runtime_error("model: unsupported schema version");
    }
    const auto prior = doc.at("cost_prior").get<std::string>() == "pessimistic"
                           ? CostPrior::pessimistic
                           : CostPrior::optimistic;
    TabularWorldModel model(doc.at("num_states").get<int>(), doc.at("num_actions").get<int>(),
                            doc.at("gamma").get<double>(), doc.at("violation_cost").get<double>(),
                            prior);
    for (const auto& item : doc.at("transition_counts").items()) {
        const auto key = parse_key(item.key(), 3);
        auto& pair = model.sa(key[0], key[1]);
        const long long count = item.value().get<long long>();
        pair.successors.emplace_back(key[2], count);
        pair.total += count;
    }
    for (const auto& item : doc.at("reward_sums").items()) {
        const auto key = parse_key(item.key(), 2);
        model.sa(key[0], key[1]).reward_sum = item.value().get<double>();
    }
    for (const auto& item : doc.at("state_stats").items()) {
        const int s = std::stoi(item.key());
        auto& st = model.states_.at(static_cast<std::size_t>(s));
        st.visits = item.value().at("visits").get<long long>();
        st.violations = item.value().at("violations").get<long long>();
        st.terminals = item.value().at("terminals").get<long long>();
        st.cost_sum = item.value().at("cost_sum").get<double>();
    }
    return model;
}

}  // namespace shieldrl
