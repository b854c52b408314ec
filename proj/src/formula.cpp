#include "shieldrl/formula.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

namespace shieldrl {

namespace detail {

struct StateNode {
    StateFormula::Kind kind;
    std::string name;          // atom
    StateNodePtr left, right;  // negation: left; conjunction: left and right
    ProbabilityBounds bounds;  // probability
    PathNodePtr path;          // probability
};

struct PathNode {
    PathFormula::Kind kind;
    bool negated = false;
    StateNodePtr left, right;  // next: left; until forms: left and right
    int bound = 0;             // bounded_until
};

namespace {

bool state_equal(const StateNodePtr& a, const StateNodePtr& b);

bool path_equal(const PathNodePtr& a, const PathNodePtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return a->kind == b->kind && a->negated == b->negated && a->bound == b->bound &&
           state_equal(a->left, b->left) && state_equal(a->right, b->right);
}

bool state_equal(const StateNodePtr& a, const StateNodePtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return a->kind == b->kind && a->name == b->name && a->bounds == b->bounds &&
           state_equal(a->left, b->left) && state_equal(a->right, b->right) &&
           path_equal(a->path, b->path);
}

bool state_prob_free(const StateNodePtr& n) {
    if (!n) return true;
    if (n->kind == StateFormula::Kind::probability) return false;
    return state_prob_free(n->left) && state_prob_free(n->right);
}

bool path_prob_free(const PathNodePtr& n) {
    return state_prob_free(n->left) && state_prob_free(n->right);
}

}  // namespace
}  // namespace detail

using detail::PathNode;
using detail::PathNodePtr;
using detail::StateNode;
using detail::StateNodePtr;

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

StateFormula StateFormula::truth() {
    static const auto node = std::make_shared<const StateNode>(StateNode{Kind::truth, {}, {}, {}, {}, {}});
    return StateFormula(node);
}

StateFormula StateFormula::atom(std::string name) {
    if (!is_valid_proposition_name(name)) {
        throw std::invalid_argument("invalid atomic proposition name: '" + name + "'");
    }
    return StateFormula(std::make_shared<const StateNode>(
        StateNode{Kind::atom, std::move(name), {}, {}, {}, {}}));
}

StateFormula StateFormula::negation_of(StateFormula operand) {
    return StateFormula(std::make_shared<const StateNode>(
        StateNode{Kind::negation, {}, std::move(operand.node_), {}, {}, {}}));
}

StateFormula StateFormula::conjunction_of(StateFormula lhs, StateFormula rhs) {
    return StateFormula(std::make_shared<const StateNode>(StateNode{
        Kind::conjunction, {}, std::move(lhs.node_), std::move(rhs.node_), {}, {}}));
}

StateFormula StateFormula::disjunction_of(StateFormula lhs, StateFormula rhs) {
    return negation_of(conjunction_of(negation_of(std::move(lhs)), negation_of(std::move(rhs))));
}

StateFormula StateFormula::implication_of(StateFormula lhs, StateFormula rhs) {
    return negation_of(conjunction_of(std::move(lhs), negation_of(std::move(rhs))));
}

StateFormula StateFormula::probability_of(ProbabilityBounds bounds, PathFormula path) {
    if (!(bounds.lo >= 0.0 && bounds.lo <= bounds.hi && bounds.hi <= 1.0)) {
        throw std::invalid_argument("malformed probability interval");
    }
    return StateFormula(std::make_shared<const StateNode>(
        StateNode{Kind::probability, {}, {}, {}, bounds, std::move(path.node_)}));
}

StateFormula::Kind StateFormula::kind() const { return node_->kind; }

const std::string& StateFormula::atom_name() const {
    if (kind() != Kind::atom) throw std::logic_error("atom_name: not an atom");
    return node_->name;
}

StateFormula StateFormula::operand() const {
    if (kind() != Kind::negation) throw std::logic_error("operand: not a negation");
    return StateFormula(node_->left);
}

StateFormula StateFormula::lhs() const {
    if (kind() != Kind::conjunction) throw std::logic_error("lhs: not a conjunction");
    return StateFormula(node_->left);
}

StateFormula StateFormula::rhs() const {
    if (kind() != Kind::conjunction) throw std::logic_error("rhs: not a conjunction");
    return StateFormula(node_->right);
}

ProbabilityBounds StateFormula::bounds() const {
    if (kind() != Kind::probability) throw std::logic_error("bounds: not a probability formula");
    return node_->bounds;
}

PathFormula StateFormula::path() const {
    if (kind() != Kind::probability) throw std::logic_error("path: not a probability formula");
    return PathFormula(node_->path);
}

bool StateFormula::is_probability_free() const { return detail::state_prob_free(node_); }

bool operator==(const StateFormula& a, const StateFormula& b) {
    return detail::state_equal(a.node_, b.node_);
}

PathFormula PathFormula::next(StateFormula operand) {
    return PathFormula(std::make_shared<const PathNode>(
        PathNode{Kind::next, false, std::move(operand.node_), {}, 0}));
}

PathFormula PathFormula::until(StateFormula lhs, StateFormula rhs) {
    return PathFormula(std::make_shared<const PathNode>(
        PathNode{Kind::until, false, std::move(lhs.node_), std::move(rhs.node_), 0}));
}

PathFormula PathFormula::bounded_until(StateFormula lhs, StateFormula rhs, int bound) {
    if (bound < 0) throw std::invalid_argument("bounded until: bound must be non-negative");
    return PathFormula(std::make_shared<const PathNode>(
        PathNode{Kind::bounded_until, false, std::move(lhs.node_), std::move(rhs.node_), bound}));
}

PathFormula PathFormula::negated_form() const {
    auto copy = *node_;
    copy.negated = !copy.negated;
    return PathFormula(std::make_shared<const PathNode>(std::move(copy)));
}

PathFormula::Kind PathFormula::kind() const { return node_->kind; }
bool PathFormula::negated() const { return node_->negated; }

StateFormula PathFormula::lhs() const { return StateFormula(node_->left); }

StateFormula PathFormula::rhs() const {
    if (kind() == Kind::next) throw std::logic_error("rhs: next has a single operand");
    return StateFormula(node_->right);
}

int PathFormula::bound() const {
    if (kind() != Kind::bounded_until) throw std::logic_error("bound: not a bounded until");
    return node_->bound;
}

bool PathFormula::is_probability_free() const { return detail::path_prob_free(node_); }

bool operator==(const PathFormula& a, const PathFormula& b) {
    return detail::path_equal(a.node_, b.node_);
}

PathFormula bounded_always(int bound, StateFormula operand) {
    return PathFormula::bounded_until(StateFormula::truth(),
                                      StateFormula::negation_of(std::move(operand)), bound)
        .negated_form();
}

PathFormula bounded_eventually(int bound, StateFormula operand) {
    return PathFormula::bounded_until(StateFormula::truth(), std::move(operand), bound);
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error(message + " (at offset " + std::to_string(position) + ")"),
      position_(position) {}

namespace {

enum class Tok {
    truth, ident, number, bang, amp, pipe, arrow, lparen, rparen,
    lbracket, rbracket, comma, le, op_x, op_u, op_g, op_f, op_p, end
};

struct Token {
    Tok type;
    std::string text;
    double number = 0.0;
    bool is_integer = false;
    long long int_value = 0;
    std::size_t pos = 0;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    const auto push = [&](Tok t, std::size_t pos, std::string s = {}) {
        out.push_back(Token{t, std::move(s), 0.0, false, 0, pos});
    };
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (std::islower(static_cast<unsigned char>(c))) {
            std::size_t j = i + 1;
            while (j < text.size() &&
                   (std::islower(static_cast<unsigned char>(text[j])) ||
                    std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '-')) {
                ++j;
            }
            std::string word(text.substr(i, j - i));
            push(word == "true" ? Tok::truth : Tok::ident, start, std::move(word));
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            bool integral = true;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            if (j < text.size() && text[j] == '.') {
                integral = false;
                ++j;
                while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            }
            if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
                integral = false;
                ++j;
                if (j < text.size() && (text[j] == '+' || text[j] == '-')) ++j;
                while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            }
            Token tok{Tok::number, std::string(text.substr(i, j - i)), 0.0, integral, 0, start};
            const char* first = text.data() + i;
            const char* last = text.data() + j;
            if (std::from_chars(first, last, tok.number).ptr != last) {
                throw ParseError("malformed number", start);
            }
            if (integral) std::from_chars(first, last, tok.int_value);
            out.push_back(std::move(tok));
            i = j;
            continue;
        }
        switch (c) {
            case '!': push(Tok::bang, start); ++i; break;
            case '&': push(Tok::amp, start); ++i; break;
            case '|': push(Tok::pipe, start); ++i; break;
            case '(': push(Tok::lparen, start); ++i; break;
            case ')': push(Tok::rparen, start); ++i; break;
            case '[': push(Tok::lbracket, start); ++i; break;
            case ']': push(Tok::rbracket, start); ++i; break;
            case ',': push(Tok::comma, start); ++i; break;
            case '=':
                if (i + 1 >= text.size() || text[i + 1] != '>') {
                    throw ParseError("expected '=>'", start);
                }
                push(Tok::arrow, start);
                i += 2;
                break;
            case '<':
                if (i + 1 >= text.size() || text[i + 1] != '=') {
                    throw ParseError("expected '<='", start);
                }
                push(Tok::le, start);
                i += 2;
                break;
            case 'X': push(Tok::op_x, start); ++i; break;
            case 'U': push(Tok::op_u, start); ++i; break;
            case 'G': push(Tok::op_g, start); ++i; break;
            case 'F': push(Tok::op_f, start); ++i; break;
            case 'P': push(Tok::op_p, start); ++i; break;
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", start);
        }
    }
    push(Tok::end, text.size());
    return out;
}

// ---------------------------------------------------------------------------
// Recursive-descent parser
// ---------------------------------------------------------------------------

class Parser {
public:
    explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

    StateFormula parse_state_toplevel() {
        StateFormula f = parse_implies();
        expect(Tok::end, "unexpected trailing input");
        return f;
    }

    PathFormula parse_path_toplevel() {
        PathFormula f = parse_path();
        expect(Tok::end, "unexpected trailing input");
        return f;
    }

private:
    const Token& peek() const { return tokens_[cursor_]; }
    const Token& advance() { return tokens_[cursor_++]; }
    bool accept(Tok t) {
        if (peek().type == t) {
            ++cursor_;
            return true;
        }
        return false;
    }
    const Token& expect(Tok t, const char* message) {
        if (peek().type != t) throw ParseError(message, peek().pos);
        return advance();
    }

    StateFormula parse_implies() {
        StateFormula lhs = parse_or();
        if (accept(Tok::arrow)) {
            return StateFormula::implication_of(std::move(lhs), parse_implies());
        }
        return lhs;
    }

    StateFormula parse_or() {
        StateFormula acc = parse_and();
        while (accept(Tok::pipe)) {
            acc = StateFormula::disjunction_of(std::move(acc), parse_and());
        }
        return acc;
    }

    StateFormula parse_and() {
        StateFormula acc = parse_unary();
        while (accept(Tok::amp)) {
            acc = StateFormula::conjunction_of(std::move(acc), parse_unary());
        }
        return acc;
    }

    StateFormula parse_unary() {
        if (accept(Tok::bang)) return StateFormula::negation_of(parse_unary());
        return parse_primary();
    }

    StateFormula parse_primary() {
        const Token& tok = peek();
        switch (tok.type) {
            case Tok::truth:
                advance();
                return StateFormula::truth();
            case Tok::ident:
                advance();
                return StateFormula::atom(tok.text);
            case Tok::lparen: {
                advance();
                StateFormula inner = parse_implies();
                expect(Tok::rparen, "expected ')'");
                return inner;
            }
            case Tok::op_p: {
                advance();
                expect(Tok::lbracket, "expected '[' after P");
                const double lo = expect_number();
                expect(Tok::comma, "expected ',' in probability interval");
                const double hi = expect_number();
                expect(Tok::rbracket, "expected ']'");
                if (!(lo >= 0.0 && lo <= hi && hi <= 1.0)) {
                    throw ParseError("malformed probability interval", tok.pos);
                }
                expect(Tok::lparen, "expected '(' after probability interval");
                PathFormula path = parse_path();
                expect(Tok::rparen, "expected ')'");
                return StateFormula::probability_of({lo, hi}, std::move(path));
            }
            default:
                throw ParseError("expected a state formula", tok.pos);
        }
    }

    double expect_number() {
        const Token& tok = expect(Tok::number, "expected a number");
        return tok.number;
    }

    int expect_bound() {
        const Token& tok = expect(Tok::number, "expected an integer bound");
        if (!tok.is_integer || tok.int_value < 0) {
            throw ParseError("bound must be a non-negative integer", tok.pos);
        }
        return static_cast<int>(tok.int_value);
    }

    PathFormula parse_path() {
        const Token& tok = peek();
        switch (tok.type) {
            case Tok::op_x:
                advance();
                return PathFormula::next(parse_unary());
            case Tok::op_g: {
                advance();
                expect(Tok::le, "expected '<=' after G");
                const int n = expect_bound();
                return bounded_always(n, parse_unary());
            }
            case Tok::op_f: {
                advance();
                expect(Tok::le, "expected '<=' after F");
                const int n = expect_bound();
                return bounded_eventually(n, parse_unary());
            }
            case Tok::bang: {
                // `!(path)` is path negation; `!a U b` is a negated state
                // operand. Try the path reading first and back off.
                const std::size_t saved = cursor_;
                advance();
                if (peek().type == Tok::lparen) {
                    advance();
                    try {
                        PathFormula inner = parse_path();
                        expect(Tok::rparen, "expected ')'");
                        return inner.negated_form();
                    } catch (const ParseError&) {
                        cursor_ = saved;
                    }
                } else {
                    cursor_ = saved;
                }
                break;
            }
            case Tok::lparen: {
                const std::size_t saved = cursor_;
                advance();
                try {
                    PathFormula inner = parse_path();
                    expect(Tok::rparen, "expected ')'");
                    return inner;
                } catch (const ParseError&) {
                    cursor_ = saved;
                }
                break;
            }
            default:
                break;
        }
        StateFormula lhs = parse_unary();
        expect(Tok::op_u, "expected temporal operator");
        if (accept(Tok::le)) {
            const int n = expect_bound();
            return PathFormula::bounded_until(std::move(lhs), parse_unary(), n);
        }
        return PathFormula::until(std::move(lhs), parse_unary());
    }

    std::vector<Token> tokens_;
    std::size_t cursor_ = 0;
};

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

}  // namespace

StateFormula parse_state_formula(std::string_view text) {
    if (text.empty()) throw ParseError("empty formula", 0);
    return Parser(text).parse_state_toplevel();
}

PathFormula parse_path_formula(std::string_view text) {
    if (text.empty()) throw ParseError("empty formula", 0);
    return Parser(text).parse_path_toplevel();
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

std::string format_state_formula(const StateFormula& f) {
    switch (f.kind()) {
        case StateFormula::Kind::truth:
            return "true";
        case StateFormula::Kind::atom:
            return f.atom_name();
        case StateFormula::Kind::negation:
            return "!" + format_state_formula(f.operand());
        case StateFormula::Kind::conjunction:
            return "(" + format_state_formula(f.lhs()) + " & " + format_state_formula(f.rhs()) + ")";
        case StateFormula::Kind::probability: {
            const auto b = f.bounds();
            return "P[" + format_double(b.lo) + "," + format_double(b.hi) + "](" +
                   format_path_formula(f.path()) + ")";
        }
    }
    throw std::logic_error("format_state_formula: unreachable");
}

std::string format_path_formula(const PathFormula& f) {
    if (f.negated()) {
        if (f.kind() == PathFormula::Kind::bounded_until &&
            f.lhs().kind() == StateFormula::Kind::truth &&
            f.rhs().kind() == StateFormula::Kind::negation) {
            return "G<=" + std::to_string(f.bound()) + " " +
                   format_state_formula(f.rhs().operand());
        }
        return "!(" + format_path_formula(f.negated_form()) + ")";
    }
    switch (f.kind()) {
        case PathFormula::Kind::next:
            return "X " + format_state_formula(f.lhs());
        case PathFormula::Kind::until:
            return format_state_formula(f.lhs()) + " U " + format_state_formula(f.rhs());
        case PathFormula::Kind::bounded_until:
            if (f.lhs().kind() == StateFormula::Kind::truth) {
                return "F<=" + std::to_string(f.bound()) + " " + format_state_formula(f.rhs());
            }
            return format_state_formula(f.lhs()) + " U<=" + std::to_string(f.bound()) + " " +
                   format_state_formula(f.rhs());
    }
    throw std::logic_error("format_path_formula: unreachable");
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

bool eval_state(const LabelSet& labels, const StateFormula& f) {
    switch (f.kind()) {
        case StateFormula::Kind::truth:
            return true;
        case StateFormula::Kind::atom:
            return labels.count(f.atom_name()) > 0;
        case StateFormula::Kind::negation:
            return !eval_state(labels, f.operand());
        case StateFormula::Kind::conjunction:
            return eval_state(labels, f.lhs()) && eval_state(labels, f.rhs());
        case StateFormula::Kind::probability:
            throw std::invalid_argument(
                "probability operators cannot be evaluated on a single state");
    }
    throw std::logic_error("eval_state: unreachable");
}

bool eval_path(const Trace& trace, const PathFormula& f) {
    if (trace.empty()) throw std::invalid_argument("eval_path: empty trace");
    bool core = false;
    switch (f.kind()) {
        case PathFormula::Kind::next:
            if (trace.size() < 2) {
                throw std::invalid_argument("eval_path: 'next' needs a trace of length >= 2");
            }
            core = eval_state(trace[1], f.lhs());
            break;
        case PathFormula::Kind::until:
            throw std::invalid_argument(
                "eval_path: unbounded until is not checkable on finite traces");
        case PathFormula::Kind::bounded_until: {
            const StateFormula hold = f.lhs();
            const StateFormula reach = f.rhs();
            const std::size_t limit =
                std::min<std::size_t>(static_cast<std::size_t>(f.bound()), trace.size() - 1);
            for (std::size_t i = 0; i <= limit; ++i) {
                if (eval_state(trace[i], reach)) {
                    core = true;
                    break;
                }
                if (!eval_state(trace[i], hold)) break;
            }
            break;
        }
    }
    return core != f.negated();
}

}  // namespace shieldrl
