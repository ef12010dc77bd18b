#include "bigprob/reactive.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "bigprob/canonical.hpp"

namespace bigprob {

std::string to_string(SystemKind kind) {
    switch (kind) {
        case SystemKind::Brs: return "brs";
        case SystemKind::Pbrs: return "pbrs";
        case SystemKind::Sbrs: return "sbrs";
        case SystemKind::Abrs: return "abrs";
    }
    return "?";
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Brs: return "brs";
        case ModelKind::Dtmc: return "dtmc";
        case ModelKind::Ctmc: return "ctmc";
        case ModelKind::Mdp: return "mdp";
    }
    return "?";
}

ModelKind model_kind_of(SystemKind kind) {
    switch (kind) {
        case SystemKind::Brs: return ModelKind::Brs;
        case SystemKind::Pbrs: return ModelKind::Dtmc;
        case SystemKind::Sbrs: return ModelKind::Ctmc;
        case SystemKind::Abrs: return ModelKind::Mdp;
    }
    return ModelKind::Dtmc;
}

std::optional<int> TransitionSystem::label_id(const std::string& name) const {
    auto it = std::find(label_names.begin(), label_names.end(), name);
    if (it == label_names.end()) return std::nullopt;
    return static_cast<int>(it - label_names.begin());
}

bool TransitionSystem::has_label(int state, int label) const {
    const auto& l = labels[state];
    return std::binary_search(l.begin(), l.end(), label);
}

std::size_t TransitionSystem::transition_count() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.size();
    for (const auto& cs : choices)
        for (const auto& c : cs) n += c.distribution.size();
    return n;
}

std::size_t TransitionSystem::choice_count() const {
    std::size_t n = 0;
    for (const auto& cs : choices) n += cs.size();
    return n;
}

namespace {

// Rule applications at one state, computed on first use.
class StepEngine {
public:
    StepEngine(const Bigraph& g, const std::vector<WeightedRule>& rules, MatchOptions options)
        : g_(g), rules_(rules), options_(options), cache_(rules.size()) {}

    const std::vector<RewriteOutcome>& outcomes(std::size_t r) {
        if (!cache_[r]) cache_[r] = apply_rule_all(g_, rules_[r].redex, rules_[r].reactum, options_);
        return *cache_[r];
    }

    bool applies(std::size_t r) {
        if (cache_[r]) return !cache_[r]->empty();
        return occurs(rules_[r].redex, g_);
    }

    // Weighted mass per successor over a subset of rules.
    std::vector<Successor> mass(const std::vector<int>& subset) {
        std::map<std::string, Successor> acc;
        for (int r : subset) {
            const Scalar& w = rules_[r].weight;
            if (w.is_zero()) continue;
            for (const auto& o : outcomes(r)) {
                Scalar add = w * Scalar(static_cast<std::int64_t>(o.count));
                auto it = acc.find(o.key);
                if (it == acc.end())
                    acc.emplace(o.key, Successor{o.key, o.result, add});
                else
                    it->second.value += add;
            }
        }
        std::vector<Successor> out;
        out.reserve(acc.size());
        for (auto& [k, s] : acc) out.push_back(std::move(s));
        return out;
    }

    std::vector<Successor> normalise(std::vector<Successor> mass) {
        Scalar total(0);
        for (const auto& s : mass) total += s.value;
        if (mass.empty() || total.is_zero()) return {delta()};
        for (auto& s : mass) s.value = s.value / total;
        return mass;
    }

    Successor delta() { return Successor{canonical_key(g_), g_, Scalar(1)}; }

    std::vector<int> all() const {
        std::vector<int> v(rules_.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<int>(i);
        return v;
    }

private:
    const Bigraph& g_;
    const std::vector<WeightedRule>& rules_;
    MatchOptions options_;
    std::vector<std::optional<std::vector<RewriteOutcome>>> cache_;
};

std::vector<ActionStep> actions_at(StepEngine& engine, const std::vector<ActionDecl>& actions) {
    std::vector<int> order(actions.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return actions[a].name < actions[b].name; });
    std::vector<ActionStep> out;
    for (int a : order) {
        const auto& act = actions[a];
        bool applicable = std::any_of(act.rules.begin(), act.rules.end(), [&](int r) { return engine.applies(r); });
        if (!applicable) continue;
        out.push_back(ActionStep{act.name, act.reward, engine.normalise(engine.mass(act.rules))});
    }
    return out;
}

std::vector<Successor> rates_at(StepEngine& engine) {
    auto m = engine.mass(engine.all());
    std::erase_if(m, [](const Successor& s) { return s.value.is_zero(); });
    return m;
}

std::vector<Successor> brs_at(StepEngine& engine, std::size_t rule_count) {
    std::map<std::string, Successor> acc;
    for (std::size_t r = 0; r < rule_count; ++r)
        for (const auto& o : engine.outcomes(r)) acc.emplace(o.key, Successor{o.key, o.result, Scalar(1)});
    std::vector<Successor> out;
    for (auto& [k, s] : acc) out.push_back(std::move(s));
    return out;
}

}  // namespace

Scalar total_weight(const Bigraph& g, const std::vector<WeightedRule>& rules, const std::string& to_key) {
    StepEngine engine(g, rules, {});
    Scalar total(0);
    for (const auto& s : engine.mass(engine.all()))
        if (to_key.empty() || s.key == to_key) total += s.value;
    return total;
}

std::vector<Successor> next_distribution(const Bigraph& g, const std::vector<WeightedRule>& rules) {
    StepEngine engine(g, rules, {});
    return engine.normalise(engine.mass(engine.all()));
}

std::vector<Successor> next_rates(const Bigraph& g, const std::vector<WeightedRule>& rules) {
    StepEngine engine(g, rules, {});
    return rates_at(engine);
}

std::vector<ActionStep> action_step(const Bigraph& g, const std::vector<WeightedRule>& rules,
                                    const std::vector<ActionDecl>& actions) {
    StepEngine engine(g, rules, {});
    return actions_at(engine, actions);
}

std::vector<Successor> brs_successors(const Bigraph& g, const std::vector<WeightedRule>& rules) {
    StepEngine engine(g, rules, {});
    return brs_at(engine, rules.size());
}

void label_and_reward(TransitionSystem& ts, const std::vector<PredicateDecl>& predicates) {
    for (const auto& p : predicates)
        if (auto why = p.pattern.solidity_violation())
            throw SolidityError("predicate " + p.name + " is not solid: " + *why);
    ts.label_names.clear();
    for (const auto& p : predicates) ts.label_names.push_back(p.name);
    ts.labels.assign(ts.size(), {});
    ts.state_reward.assign(ts.size(), Scalar(0));
    for (std::size_t s = 0; s < ts.size(); ++s)
        for (std::size_t p = 0; p < predicates.size(); ++p)
            if (occurs(predicates[p].pattern, ts.states[s].bigraph)) {
                ts.labels[s].push_back(static_cast<int>(p));
                ts.state_reward[s] += predicates[p].reward;
            }
}

TransitionSystem build_transition_system(const SystemSpec& spec, const BuildOptions& options) {
    if (!spec.initial.is_ground()) throw GroundError("the initial bigraph must be ground");
    TransitionSystem ts;
    ts.kind = model_kind_of(spec.kind);
    const bool mdp = ts.kind == ModelKind::Mdp;

    std::unordered_map<std::string, int> index;
    auto key0 = canonical_key(spec.initial);
    index.emplace(key0, 0);
    ts.states.push_back(State{key0, spec.initial.lean()});

    // Rows are resolved to indices once the level's new states are numbered.
    struct PendingRow {
        int state;
        std::vector<std::pair<std::string, Scalar>> row;
        std::vector<std::tuple<std::string, Scalar, std::vector<std::pair<std::string, Scalar>>>> choices;
    };

    auto finish = [&]() {
        ts.rows.resize(mdp ? 0 : ts.size());
        ts.choices.resize(mdp ? ts.size() : 0);
        label_and_reward(ts, spec.predicates);
    };

    std::vector<int> frontier{0};
    while (!frontier.empty()) {
        std::map<std::string, Bigraph> fresh;
        std::vector<PendingRow> pending;
        auto note = [&](const Successor& s) {
            if (!index.count(s.key)) fresh.emplace(s.key, s.state);
        };
        for (int s : frontier) {
            StepEngine engine(ts.states[s].bigraph, spec.rules, options.matching);
            PendingRow row{s, {}, {}};
            auto take = [&](const std::vector<Successor>& succ, std::vector<std::pair<std::string, Scalar>>& into) {
                for (const auto& x : succ) {
                    note(x);
                    into.emplace_back(x.key, x.value);
                }
            };
            switch (spec.kind) {
                case SystemKind::Brs: take(brs_at(engine, spec.rules.size()), row.row); break;
                case SystemKind::Pbrs: take(engine.normalise(engine.mass(engine.all())), row.row); break;
                case SystemKind::Sbrs: take(rates_at(engine), row.row); break;
                case SystemKind::Abrs:
                    for (const auto& step : actions_at(engine, spec.actions)) {
                        std::vector<std::pair<std::string, Scalar>> dist;
                        take(step.distribution, dist);
                        row.choices.emplace_back(step.action, step.reward, std::move(dist));
                    }
                    break;
            }
            pending.push_back(std::move(row));
        }

        bool over = ts.size() + fresh.size() > options.max_states;
        std::vector<int> next;
        for (auto& [key, g] : fresh) {
            if (ts.size() >= options.max_states) break;
            int id = static_cast<int>(ts.size());
            index.emplace(key, id);
            ts.states.push_back(State{key, std::move(g)});
            next.push_back(id);
        }
        if (mdp)
            ts.choices.resize(ts.size());
        else
            ts.rows.resize(ts.size());
        for (auto& p : pending) {
            auto resolve = [&](const std::vector<std::pair<std::string, Scalar>>& in) {
                std::vector<Transition> out;
                for (const auto& [key, v] : in) {
                    auto it = index.find(key);
                    if (it != index.end()) out.push_back(Transition{it->second, v});
                }
                std::sort(out.begin(), out.end(), [](const Transition& a, const Transition& b) { return a.target < b.target; });
                return out;
            };
            if (mdp) {
                for (auto& [name, reward, dist] : p.choices)
                    ts.choices[p.state].push_back(Choice{name, reward, resolve(dist)});
            } else {
                ts.rows[p.state] = resolve(p.row);
            }
        }
        if (over) {
            finish();
            throw StateCapExceeded(options.max_states, std::move(ts));
        }
        frontier = std::move(next);
    }
    finish();
    return ts;
}

}  // namespace bigprob
