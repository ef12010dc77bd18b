#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bigprob/bigraph.hpp"
#include "bigprob/error.hpp"
#include "bigprob/matching.hpp"
#include "bigprob/scalar.hpp"

namespace bigprob {

enum class SystemKind { Brs, Pbrs, Sbrs, Abrs };
enum class ModelKind { Brs, Dtmc, Ctmc, Mdp };

std::string to_string(SystemKind kind);
std::string to_string(ModelKind kind);
ModelKind model_kind_of(SystemKind kind);

/// A reaction rule with a weight (pbrs, abrs), a rate (sbrs) or 1 (brs).
struct WeightedRule {
    std::string name;
    Bigraph redex;
    Bigraph reactum;
    Scalar weight = Scalar(1);
};

struct ActionDecl {
    std::string name;
    Scalar reward = Scalar(0);
    std::vector<int> rules;  ///< indices into SystemSpec::rules
};

struct PredicateDecl {
    std::string name;
    Bigraph pattern;
    Scalar reward = Scalar(0);
};

struct SystemSpec {
    SystemKind kind = SystemKind::Pbrs;
    Bigraph initial;
    std::vector<WeightedRule> rules;
    std::vector<ActionDecl> actions;
    std::vector<PredicateDecl> predicates;
};

/// A successor state with its probability, rate or unit weight.
struct Successor {
    std::string key;
    Bigraph state;
    Scalar value;
};

/// Σ_R w_R · ρ_R(g, g') over the rules; with `to_key` empty, the total
/// weight out of g.
Scalar total_weight(const Bigraph& g, const std::vector<WeightedRule>& rules, const std::string& to_key = {});

/// Normalised reaction distribution, sorted by key; the delta on g when no
/// rule with positive weight applies.
std::vector<Successor> next_distribution(const Bigraph& g, const std::vector<WeightedRule>& rules);

/// Aggregated rates rate_R · ρ_R; zero rates omitted.
std::vector<Successor> next_rates(const Bigraph& g, const std::vector<WeightedRule>& rules);

struct ActionStep {
    std::string action;
    Scalar reward;
    std::vector<Successor> distribution;
};

/// One entry per applicable action, ordered by action name.
std::vector<ActionStep> action_step(const Bigraph& g, const std::vector<WeightedRule>& rules,
                                    const std::vector<ActionDecl>& actions);

/// Successor set of a plain reactive system, each with value 1.
std::vector<Successor> brs_successors(const Bigraph& g, const std::vector<WeightedRule>& rules);

struct Transition {
    int target = 0;
    Scalar value;  ///< probability, rate, or 1 for plain systems
};

struct Choice {
    std::string action;
    Scalar reward;
    std::vector<Transition> distribution;
};

struct State {
    std::string key;
    Bigraph bigraph;
};

struct TransitionSystem {
    ModelKind kind = ModelKind::Dtmc;
    std::vector<State> states;                    ///< state 0 is initial
    std::vector<std::vector<Transition>> rows;    ///< brs, dtmc, ctmc
    std::vector<std::vector<Choice>> choices;     ///< mdp
    std::vector<std::string> label_names;
    std::vector<std::vector<int>> labels;         ///< per state, sorted label ids
    std::vector<Scalar> state_reward;

    std::size_t size() const { return states.size(); }
    std::optional<int> label_id(const std::string& name) const;
    bool has_label(int state, int label) const;
    std::size_t transition_count() const;
    std::size_t choice_count() const;
};

/// Thrown when exploration exceeds the state cap; carries the states found
/// so far (unexpanded states have no outgoing transitions).
class StateCapExceeded : public Error {
public:
    StateCapExceeded(std::size_t cap, TransitionSystem partial)
        : Error("state cap of " + std::to_string(cap) + " states exceeded"), partial_(std::move(partial)) {}
    const TransitionSystem& partial() const noexcept { return partial_; }

private:
    TransitionSystem partial_;
};

struct BuildOptions {
    std::size_t max_states = 1'000'000;
    MatchOptions matching;
};

/// Breadth-first closure from the initial state. Within each BFS level new
/// states are numbered in canonical-key order. Labels and rewards are
/// filled in from the spec's predicates and actions.
TransitionSystem build_transition_system(const SystemSpec& spec, const BuildOptions& options = {});

/// Recomputes labels and state rewards from predicates.
void label_and_reward(TransitionSystem& ts, const std::vector<PredicateDecl>& predicates);

}  // namespace bigprob
