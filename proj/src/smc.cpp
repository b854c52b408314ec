#include "shieldrl/smc.hpp"

#include <cmath>
#include <stdexcept>

namespace shieldrl {

int required_samples(double eps_approx, double delta, BoundSide side) {
    if (!(eps_approx > 0.0 && eps_approx < 1.0)) {
        throw std::invalid_argument("required_samples: eps_approx must lie in (0,1)");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("required_samples: delta must lie in (0,1)");
    }
    const double numerator = side == BoundSide::two_sided ? 2.0 / delta : 1.0 / delta;
    const double m = std::ceil(std::log(numerator) / (2.0 * eps_approx * eps_approx));
    if (m > 2e9) throw std::invalid_argument("required_samples: sample count overflows");
    return static_cast<int>(m);
}

double estimate_mu(const std::function<std::optional<Trace>()>& source,
                   const PathFormula& formula, int num_samples) {
    if (num_samples < 1) throw std::invalid_argument("estimate_mu: need at least one sample");
    long long satisfied = 0;
    for (int j = 0; j < num_samples; ++j) {
        std::optional<Trace> trace = source();
        if (!trace) {
            throw std::runtime_error("estimate_mu: trace source exhausted after " +
                                     std::to_string(j) + " of " + std::to_string(num_samples) +
                                     " traces");
        }
        if (eval_path(*trace, formula)) ++satisfied;
    }
    return static_cast<double>(satisfied) / num_samples;
}

double safe_threshold(double eps_safety, double eps_approx, DecisionMode mode) {
    return mode == DecisionMode::no_false_positive ? 1.0 - eps_safety + eps_approx
                                                   : 1.0 - eps_safety - eps_approx;
}

bool threshold_unreachable(double eps_safety, double eps_approx, DecisionMode mode) {
    return safe_threshold(eps_safety, eps_approx, mode) > 1.0;
}

SafetyEstimate decide(double mu_hat, int m_used, double eps_safety, double eps_approx,
                      DecisionMode mode) {
    if (!(eps_safety > 0.0 && eps_safety < 1.0) || !(eps_approx > 0.0 && eps_approx < 1.0)) {
        throw std::invalid_argument("decide: epsilon parameters must lie in (0,1)");
    }
    if (!(mu_hat >= 0.0 && mu_hat <= 1.0)) {
        throw std::invalid_argument("decide: mu_hat must lie in [0,1]");
    }
    const double threshold = safe_threshold(eps_safety, eps_approx, mode);
    return SafetyEstimate{mu_hat, m_used,
                          mu_hat >= threshold ? Verdict::safe : Verdict::unsafe, threshold};
}

namespace {

void check_rows(const MarkovChain& chain) {
    for (const auto& row : chain.probs) {
        if (row.size() != chain.probs.size()) {
            throw std::invalid_argument("markov chain: row size mismatch");
        }
        double total = 0.0;
        for (double p : row) {
            if (p < 0.0) throw std::invalid_argument("markov chain: negative probability");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw std::invalid_argument("markov chain: row does not sum to one");
        }
    }
}

}  // namespace

double exact_mu_oracle(const MarkovChain& chain, const StateFormula& formula, int horizon,
                       int start) {
    if (horizon < 0) throw std::invalid_argument("exact_mu_oracle: negative horizon");
    const int n = static_cast<int>(chain.probs.size());
    if (start < 0 || start >= n) throw std::invalid_argument("exact_mu_oracle: bad start state");
    check_rows(chain);

    std::vector<char> sat(n);
    for (int s = 0; s < n; ++s) sat[s] = eval_state(chain.labels[s], formula);

    std::vector<double> mu(n), next(n);
    for (int s = 0; s < n; ++s) mu[s] = sat[s] ? 1.0 : 0.0;
    for (int k = 1; k <= horizon; ++k) {
        for (int s = 0; s < n; ++s) {
            if (!sat[s]) {
                next[s] = 0.0;
                continue;
            }
            double acc = 0.0;
            const auto& row = chain.probs[s];
            for (int t = 0; t < n; ++t) acc += row[t] * mu[t];
            next[s] = acc;
        }
        mu.swap(next);
    }
    return mu[start];
}

Trace sample_chain_trace(const MarkovChain& chain, int start, int horizon,
                         rng::Engine& engine) {
    const int n = static_cast<int>(chain.probs.size());
    if (start < 0 || start >= n) throw std::invalid_argument("sample_chain_trace: bad start");
    Trace trace;
    trace.reserve(static_cast<std::size_t>(horizon) + 1);
    int state = start;
    trace.push_back(chain.labels[state]);
    for (int step = 0; step < horizon; ++step) {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(engine);
        const auto& row = chain.probs[state];
        double acc = 0.0;
        int next = -1;
        for (int s = 0; s < n; ++s) {
            acc += row[s];
            if (u < acc) {
                next = s;
                break;
            }
        }
        if (next < 0) {
            for (int s = n; s-- > 0;) {
                if (row[s] > 0.0) {
                    next = s;
                    break;
                }
            }
        }
        state = next;
        trace.push_back(chain.labels[state]);
    }
    return trace;
}

}  // namespace shieldrl
