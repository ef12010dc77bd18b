#include "bigprob/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace bigprob {

NonConvergence::NonConvergence(std::size_t iterations, std::vector<double> last)
    : AnalysisError("value iteration did not converge within " + std::to_string(iterations) + " iterations"),
      last_(std::move(last)) {}

namespace {

void require_kind(const TransitionSystem& ts, ModelKind kind, const char* what) {
    if (ts.kind != kind)
        throw AnalysisError(std::string(what) + " needs a " + to_string(kind) + ", got a " + to_string(ts.kind));
}

std::optional<std::vector<Rational>> exact_bounded(const TransitionSystem& ts, const std::vector<char>& goal,
                                                   std::size_t steps) {
    for (const auto& row : ts.rows)
        for (const auto& t : row)
            if (!t.value.is_exact()) return std::nullopt;
    std::vector<Rational> x(ts.size());
    for (std::size_t s = 0; s < ts.size(); ++s) x[s] = goal[s] ? 1 : 0;
    std::vector<Rational> next(ts.size());
    for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t s = 0; s < ts.size(); ++s) {
            if (goal[s]) {
                next[s] = 1;
                continue;
            }
            Rational acc = 0;
            for (const auto& t : ts.rows[s]) {
                auto term = mul(*t.value.exact(), x[t.target]);
                if (!term) return std::nullopt;
                auto sum = add(acc, *term);
                if (!sum) return std::nullopt;
                acc = *sum;
            }
            next[s] = acc;
        }
        if (next == x) break;  // fixed point: further steps change nothing
        std::swap(x, next);
    }
    return x;
}

std::vector<double> float_bounded(const TransitionSystem& ts, const std::vector<char>& goal, std::size_t steps) {
    std::vector<double> x(ts.size()), next(ts.size());
    for (std::size_t s = 0; s < ts.size(); ++s) x[s] = goal[s] ? 1.0 : 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t s = 0; s < ts.size(); ++s) {
            if (goal[s]) {
                next[s] = 1.0;
                continue;
            }
            double acc = 0.0;
            for (const auto& t : ts.rows[s]) acc += t.value.value() * x[t.target];
            next[s] = acc;
        }
        if (next == x) break;
        std::swap(x, next);
    }
    return x;
}

// Backward closure: states with a path into `from` that only passes
// through states allowed by `via`.
std::vector<char> backward_reach(const TransitionSystem& ts, const std::vector<char>& from,
                                 const std::vector<char>& via) {
    std::vector<std::vector<int>> preds(ts.size());
    for (std::size_t s = 0; s < ts.size(); ++s)
        for (const auto& t : ts.rows[s])
            if (!t.value.is_zero()) preds[t.target].push_back(static_cast<int>(s));
    std::vector<char> seen = from;
    std::vector<int> stack;
    for (std::size_t s = 0; s < ts.size(); ++s)
        if (from[s]) stack.push_back(static_cast<int>(s));
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u : preds[v])
            if (!seen[u] && via[u]) {
                seen[u] = 1;
                stack.push_back(u);
            }
    }
    return seen;
}

double optimise(Optimum opt, double best, double candidate, bool first) {
    if (first) return candidate;
    return opt == Optimum::Min ? std::min(best, candidate) : std::max(best, candidate);
}

}  // namespace

std::vector<char> goal_states(const TransitionSystem& ts, const std::string& label) {
    std::vector<char> goal(ts.size(), 0);
    if (auto id = ts.label_id(label)) {
        for (std::size_t s = 0; s < ts.size(); ++s) goal[s] = ts.has_label(static_cast<int>(s), *id);
        return goal;
    }
    if (label == "init") {
        if (!goal.empty()) goal[0] = 1;
        return goal;
    }
    throw AnalysisError("unknown label " + label);
}

Scalar dtmc_bounded_reach(const TransitionSystem& ts, const std::string& label, std::size_t steps) {
    require_kind(ts, ModelKind::Dtmc, "bounded reachability");
    auto goal = goal_states(ts, label);
    if (ts.size() == 0) return Scalar(0);
    if (auto exact = exact_bounded(ts, goal, steps)) return Scalar((*exact)[0]);
    return Scalar(float_bounded(ts, goal, steps)[0]);
}

double dtmc_bounded_miss(const TransitionSystem& ts, const std::string& label, std::size_t steps) {
    require_kind(ts, ModelKind::Dtmc, "bounded reachability");
    auto goal = goal_states(ts, label);
    if (ts.size() == 0) return 0.0;
    std::vector<double> y(ts.size()), next(ts.size());
    for (std::size_t s = 0; s < ts.size(); ++s) y[s] = goal[s] ? 0.0 : 1.0;
    for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t s = 0; s < ts.size(); ++s) {
            double acc = 0.0;
            if (!goal[s])
                for (const auto& t : ts.rows[s]) acc += t.value.value() * y[t.target];
            next[s] = acc;
        }
        if (next == y) break;
        std::swap(y, next);
    }
    return y[0];
}

IterativeResult dtmc_reach(const TransitionSystem& ts, const std::string& label, const SolverOptions& options) {
    require_kind(ts, ModelKind::Dtmc, "reachability");
    auto goal = goal_states(ts, label);
    const std::size_t n = ts.size();
    // Probability 0: no path to the goal. Probability 1: no path that
    // avoids the goal into a probability-0 state.
    std::vector<char> not_goal(n), can_reach = backward_reach(ts, goal, std::vector<char>(n, 1));
    for (std::size_t s = 0; s < n; ++s) not_goal[s] = !goal[s];
    std::vector<char> never(n);
    for (std::size_t s = 0; s < n; ++s) never[s] = !can_reach[s];
    auto can_fail = backward_reach(ts, never, not_goal);

    IterativeResult result;
    std::vector<double> x(n);
    std::vector<std::size_t> unknown;
    for (std::size_t s = 0; s < n; ++s) {
        if (!can_fail[s]) x[s] = 1.0;
        else if (can_reach[s] && !goal[s]) unknown.push_back(s);
    }
    std::vector<double> next = x;
    while (!unknown.empty()) {
        if (result.iterations >= options.max_iterations) throw NonConvergence(result.iterations, x);
        double change = 0.0;
        for (auto s : unknown) {
            double acc = 0.0;
            for (const auto& t : ts.rows[s]) acc += t.value.value() * x[t.target];
            next[s] = acc;
            change = std::max(change, std::abs(acc - x[s]));
        }
        std::swap(x, next);
        ++result.iterations;
        if (change < options.tolerance) break;
    }
    result.value = x.empty() ? 0.0 : x[0];
    result.values = std::move(x);
    return result;
}

TransitionSystem embedded_chain(const TransitionSystem& ctmc) {
    require_kind(ctmc, ModelKind::Ctmc, "embedded chain");
    TransitionSystem out = ctmc;
    out.kind = ModelKind::Dtmc;
    for (std::size_t s = 0; s < out.size(); ++s) {
        auto& row = out.rows[s];
        Scalar exit(0);
        for (const auto& t : row) exit += t.value;
        if (row.empty() || exit.is_zero()) {
            row = {Transition{static_cast<int>(s), Scalar(1)}};
            continue;
        }
        for (auto& t : row) t.value = t.value / exit;
    }
    return out;
}

IterativeResult ctmc_reach(const TransitionSystem& ts, const std::string& label, const SolverOptions& options) {
    return dtmc_reach(embedded_chain(ts), label, options);
}

double mdp_bounded_reach(const TransitionSystem& ts, const std::string& label, std::size_t steps, Optimum opt) {
    require_kind(ts, ModelKind::Mdp, "bounded min/max reachability");
    auto goal = goal_states(ts, label);
    if (ts.size() == 0) return 0.0;
    std::vector<double> x(ts.size()), next(ts.size());
    for (std::size_t s = 0; s < ts.size(); ++s) x[s] = goal[s] ? 1.0 : 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        for (std::size_t s = 0; s < ts.size(); ++s) {
            if (goal[s] || ts.choices[s].empty()) {
                next[s] = x[s];
                continue;
            }
            double best = 0.0;
            bool first = true;
            for (const auto& c : ts.choices[s]) {
                double acc = 0.0;
                for (const auto& t : c.distribution) acc += t.value.value() * x[t.target];
                best = optimise(opt, best, acc, first);
                first = false;
            }
            next[s] = best;
        }
        if (next == x) break;
        std::swap(x, next);
    }
    return x[0];
}

double mdp_expected_cost(const TransitionSystem& ts, std::size_t horizon, Optimum opt) {
    require_kind(ts, ModelKind::Mdp, "expected cost");
    if (ts.size() == 0) return 0.0;
    std::vector<double> v(ts.size(), 0.0), next(ts.size());
    for (std::size_t k = 0; k < horizon; ++k) {
        for (std::size_t s = 0; s < ts.size(); ++s) {
            double here = ts.state_reward.empty() ? 0.0 : ts.state_reward[s].value();
            if (ts.choices[s].empty()) {
                next[s] = here + v[s];
                continue;
            }
            double best = 0.0;
            bool first = true;
            for (const auto& c : ts.choices[s]) {
                double acc = c.reward.value();
                for (const auto& t : c.distribution) acc += t.value.value() * v[t.target];
                best = optimise(opt, best, acc, first);
                first = false;
            }
            next[s] = here + best;
        }
        std::swap(v, next);
    }
    return v[0];
}

TransitionSystem apply_policy(const TransitionSystem& mdp, const std::vector<int>& policy) {
    require_kind(mdp, ModelKind::Mdp, "policy application");
    if (policy.size() != mdp.size()) throw AnalysisError("policy size differs from the state count");
    TransitionSystem out;
    out.kind = ModelKind::Dtmc;
    out.states = mdp.states;
    out.label_names = mdp.label_names;
    out.labels = mdp.labels;
    out.state_reward = mdp.state_reward;
    out.rows.resize(mdp.size());
    for (std::size_t s = 0; s < mdp.size(); ++s) {
        int c = policy[s];
        if (c < 0 || mdp.choices[s].empty()) {
            out.rows[s] = {Transition{static_cast<int>(s), Scalar(1)}};
            continue;
        }
        if (static_cast<std::size_t>(c) >= mdp.choices[s].size())
            throw AnalysisError("policy picks a missing choice at state " + std::to_string(s));
        out.rows[s] = mdp.choices[s][c].distribution;
    }
    return out;
}

namespace {

class QueryLexer {
public:
    explicit QueryLexer(std::string_view text) : text_(text) {}

    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(std::string_view word) {
        skip();
        if (text_.substr(pos_, word.size()) != word) return false;
        pos_ += word.size();
        return true;
    }

    void expect(std::string_view word) {
        if (!accept(word)) fail("expected '" + std::string(word) + "'");
    }

    std::size_t number() {
        skip();
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) fail("expected a step bound");
        try {
            return std::stoull(std::string(text_.substr(start, pos_ - start)));
        } catch (const std::out_of_range&) {
            fail("step bound too large");
        }
    }

    // Quoted text, or everything up to the closing bracket.
    std::string label() {
        skip();
        if (pos_ < text_.size() && text_[pos_] == '"') {
            auto end = text_.find('"', pos_ + 1);
            if (end == std::string_view::npos) fail("unterminated label");
            std::string out(text_.substr(pos_ + 1, end - pos_ - 1));
            pos_ = end + 1;
            return out;
        }
        std::size_t end = text_.rfind(']');
        if (end == std::string_view::npos || end < pos_) fail("expected ']'");
        std::string out(text_.substr(pos_, end - pos_));
        while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
        if (out.empty()) fail("expected a label");
        pos_ += out.size();
        return out;
    }

    void finish() {
        skip();
        if (pos_ != text_.size()) fail("unexpected trailing text");
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw AnalysisError("bad query at column " + std::to_string(pos_ + 1) + ": " + msg);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

Query parse_query(std::string_view text) {
    QueryLexer lex(text);
    Query q;
    bool reward = false;
    if (lex.accept("Pmin")) {
        q.optimum = Optimum::Min;
    } else if (lex.accept("Pmax")) {
        q.optimum = Optimum::Max;
    } else if (lex.accept("Rmin")) {
        q.optimum = Optimum::Min;
        reward = true;
    } else if (lex.accept("Rmax")) {
        q.optimum = Optimum::Max;
        reward = true;
    } else if (!lex.accept("P")) {
        lex.fail("expected P, Pmin, Pmax, Rmin or Rmax");
    }
    lex.expect("=?");
    lex.expect("[");
    if (reward) {
        lex.expect("C");
        lex.expect("<=");
        q.kind = Query::Kind::MdpCost;
        q.horizon = lex.number();
        lex.expect("]");
        lex.finish();
        return q;
    }
    lex.expect("F");
    bool bounded = lex.accept("<=");
    if (bounded) q.horizon = lex.number();
    if (q.optimum && !bounded) lex.fail("Pmin/Pmax need a step bound F<=N");
    q.kind = q.optimum ? Query::Kind::MdpReach : bounded ? Query::Kind::BoundedReach : Query::Kind::Reach;
    q.label = lex.label();
    lex.expect("]");
    lex.finish();
    return q;
}

QueryResult evaluate(const TransitionSystem& ts, const Query& query, const SolverOptions& options) {
    switch (query.kind) {
        case Query::Kind::BoundedReach:
            if (ts.kind == ModelKind::Ctmc)
                throw AnalysisError("step-bounded queries are not supported on CTMCs; use P=? [ F label ]");
            return {dtmc_bounded_reach(ts, query.label, query.horizon), std::nullopt};
        case Query::Kind::Reach: {
            if (ts.kind == ModelKind::Mdp) throw AnalysisError("unbounded queries are not supported on MDPs");
            auto r = ts.kind == ModelKind::Ctmc ? ctmc_reach(ts, query.label, options)
                                                : dtmc_reach(ts, query.label, options);
            return {Scalar(r.value), r.iterations};
        }
        case Query::Kind::MdpReach:
            return {Scalar(mdp_bounded_reach(ts, query.label, query.horizon, *query.optimum)), std::nullopt};
        case Query::Kind::MdpCost:
            return {Scalar(mdp_expected_cost(ts, query.horizon, *query.optimum)), std::nullopt};
    }
    return {};
}

}  // namespace bigprob
