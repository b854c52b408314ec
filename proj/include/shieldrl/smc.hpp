#pragma once

#include <functional>
#include <optional>

#include "shieldrl/env.hpp"
#include "shieldrl/formula.hpp"
#include "shieldrl/rng.hpp"

namespace shieldrl {

enum class DecisionMode { no_false_positive, no_false_negative };
enum class BoundSide { two_sided, one_sided };
enum class Verdict { safe, unsafe };

/// Parameters of a statistical check: the bounded-safety level epsilon, the
/// Monte-Carlo approximation error, the confidence delta, the sample count,
/// and the horizon of the bounded-always property.
struct SmcConfig {
    double epsilon_safety = 0.1;
    double epsilon_approx = 0.09;
    double delta = 0.1;
    int num_samples = 1;
    int horizon = 1;
    DecisionMode mode = DecisionMode::no_false_positive;
    BoundSide bound_side = BoundSide::two_sided;
};

struct SafetyEstimate {
    double mu_hat = 0.0;
    int m_used = 0;
    Verdict verdict = Verdict::unsafe;
    double threshold = 1.0;
};

/// Hoeffding sample count for estimating a trace-satisfaction probability to
/// within eps_approx with confidence 1-delta. The two-sided form is
/// ceil(ln(2/delta) / (2 eps^2)); the one-sided form, which only controls
/// overestimation, drops the factor of two inside the logarithm.
int required_samples(double eps_approx, double delta, BoundSide side);

/// Monte-Carlo estimate of the measure of traces satisfying the path formula:
/// the fraction of m sampled traces that satisfy it. The source returns
/// nullopt when exhausted, which is an error before m traces are drawn.
double estimate_mu(const std::function<std::optional<Trace>()>& source,
                   const PathFormula& formula, int num_samples);

/// Acceptance threshold on mu_hat: 1 - eps_safety + eps_approx in
/// no-false-positive mode, 1 - eps_safety - eps_approx in no-false-negative
/// mode.
double safe_threshold(double eps_safety, double eps_approx, DecisionMode mode);

/// Classifies an estimate. A threshold above 1 (eps_approx >= eps_safety in
/// no-false-positive mode) makes the safe verdict unreachable; this is a
/// configuration smell, not an error, and callers may warn via
/// threshold_unreachable().
SafetyEstimate decide(double mu_hat, int m_used, double eps_safety, double eps_approx,
                      DecisionMode mode);

bool threshold_unreachable(double eps_safety, double eps_approx, DecisionMode mode);

/// Exact finite-horizon measure of bounded safety by dynamic programming:
/// mu(s, 0) = [s |= phi]; mu(s, k) = [s |= phi] * sum_s' T(s,s') mu(s', k-1).
/// The state formula must be probability-free. Rows must sum to one.
double exact_mu_oracle(const MarkovChain& chain, const StateFormula& formula, int horizon,
                       int start);

/// Samples a label trace of horizon+1 states from the chain.
Trace sample_chain_trace(const MarkovChain& chain, int start, int horizon,
                         rng::Engine& engine);

}  // namespace shieldrl
