#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "shieldrl/env.hpp"  // LabelSet

namespace shieldrl {

/// Finite trace of label sets; element i carries the labels of the i-th state.
using Trace = std::vector<LabelSet>;

/// Closed non-empty subinterval of [0,1] attached to a probability operator.
struct ProbabilityBounds {
    double lo = 0.0;
    double hi = 1.0;
    friend bool operator==(const ProbabilityBounds&, const ProbabilityBounds&) = default;
};

class PathFormula;

namespace detail {
struct StateNode;
struct PathNode;
using StateNodePtr = std::shared_ptr<const StateNode>;
using PathNodePtr = std::shared_ptr<const PathNode>;
}  // namespace detail

/// State formula over the fragment {true, atom, negation, conjunction,
/// probability operator}. Disjunction, implication and the bounded temporal
/// sugar desugar into this core at parse time. Values are immutable and
/// cheap to copy; concurrent reads are safe.
class StateFormula {
public:
    enum class Kind { truth, atom, negation, conjunction, probability };

    static StateFormula truth();
    static StateFormula atom(std::string name);
    static StateFormula negation_of(StateFormula operand);
    static StateFormula conjunction_of(StateFormula lhs, StateFormula rhs);
    static StateFormula disjunction_of(StateFormula lhs, StateFormula rhs);   // !(!a & !b)
    static StateFormula implication_of(StateFormula lhs, StateFormula rhs);   // !(a & !b)
    static StateFormula probability_of(ProbabilityBounds bounds, PathFormula path);

    Kind kind() const;
    const std::string& atom_name() const;   // atom
    StateFormula operand() const;           // negation
    StateFormula lhs() const;               // conjunction
    StateFormula rhs() const;               // conjunction
    ProbabilityBounds bounds() const;       // probability
    PathFormula path() const;               // probability

    /// True when no probability operator occurs anywhere in the formula.
    bool is_probability_free() const;

    friend bool operator==(const StateFormula& a, const StateFormula& b);
    friend bool operator!=(const StateFormula& a, const StateFormula& b) { return !(a == b); }

private:
    friend class PathFormula;
    friend struct detail::StateNode;
    explicit StateFormula(detail::StateNodePtr node) : node_(std::move(node)) {}
    detail::StateNodePtr node_;
};

/// Path formula: next, until or bounded until, plus an optional negation
/// wrapper so the bounded-always derived form !(true U<=n !phi) is
/// representable.
class PathFormula {
public:
    enum class Kind { next, until, bounded_until };

    static PathFormula next(StateFormula operand);
    static PathFormula until(StateFormula lhs, StateFormula rhs);
    static PathFormula bounded_until(StateFormula lhs, StateFormula rhs, int bound);

    /// Copy with the negation wrapper toggled.
    PathFormula negated_form() const;

    Kind kind() const;
    bool negated() const;
    StateFormula lhs() const;  // operand of next; left side of until
    StateFormula rhs() const;
    int bound() const;         // bounded_until

    bool is_probability_free() const;

    friend bool operator==(const PathFormula& a, const PathFormula& b);
    friend bool operator!=(const PathFormula& a, const PathFormula& b) { return !(a == b); }

private:
    friend class StateFormula;
    friend struct detail::PathNode;
    explicit PathFormula(detail::PathNodePtr node) : node_(std::move(node)) {}
    detail::PathNodePtr node_;
};

/// G<=n phi, i.e. !(true U<=n !phi); every state within the first n steps
/// (and within the trace) must satisfy phi.
PathFormula bounded_always(int bound, StateFormula operand);

/// F<=n phi, i.e. true U<=n phi.
PathFormula bounded_eventually(int bound, StateFormula operand);

/// Syntax error with the 0-based character offset of the offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t position);
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Concrete syntax: `true`, identifiers, `!`, `&`, `|`, `=>`, parentheses,
/// `X`, `U`, `U<=n`, `G<=n`, `F<=n`, `P[lo,hi](path)`. Precedence
/// ! > & > | > =>; & and | associate left, => associates right. `|`, `=>`,
/// `G<=n` and `F<=n` are desugared while parsing.
StateFormula parse_state_formula(std::string_view text);
PathFormula parse_path_formula(std::string_view text);

/// Canonical text form; parse(format(f)) is structurally equal to f.
std::string format_state_formula(const StateFormula& formula);
std::string format_path_formula(const PathFormula& formula);

/// Satisfaction of a probability-free state formula by a label set. Throws
/// std::invalid_argument on a probability operator (those are checked by the
/// statistical layer, not per-state).
bool eval_state(const LabelSet& labels, const StateFormula& formula);

/// Satisfaction of a path formula by a finite trace. Bounded until inspects
/// indices up to min(bound, length-1): a trace that terminates before a
/// violation counts as satisfying. Unbounded until is rejected, as is `next`
/// on a trace with fewer than two elements.
bool eval_path(const Trace& trace, const PathFormula& formula);

}  // namespace shieldrl
