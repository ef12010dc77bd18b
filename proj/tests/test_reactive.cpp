#include <gtest/gtest.h>

#include "bigprob/analysis.hpp"
#include "bigprob/canonical.hpp"
#include "bigprob/reactive.hpp"
#include "support.hpp"

using namespace bigprob;

namespace {

SystemSpec scaled(SystemSpec spec, const Scalar& factor) {
    for (auto& r : spec.rules) r.weight = r.weight * factor;
    return spec;
}

std::vector<WeightedRule> rules_of(const SystemSpec& spec, const ActionDecl& a) {
    std::vector<WeightedRule> out;
    for (int r : a.rules) out.push_back(spec.rules[r]);
    return out;
}

bool same_rows(const TransitionSystem& a, const TransitionSystem& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t s = 0; s < a.size(); ++s) {
        if (a.states[s].key != b.states[s].key) return false;
        if (a.kind == ModelKind::Mdp) {
            if (a.choices[s].size() != b.choices[s].size()) return false;
            for (std::size_t c = 0; c < a.choices[s].size(); ++c) {
                const auto& x = a.choices[s][c].distribution;
                const auto& y = b.choices[s][c].distribution;
                if (x.size() != y.size()) return false;
                for (std::size_t i = 0; i < x.size(); ++i)
                    if (x[i].target != y[i].target || std::abs(x[i].value.value() - y[i].value.value()) > 1e-12)
                        return false;
            }
        } else {
            if (a.rows[s].size() != b.rows[s].size()) return false;
            for (std::size_t i = 0; i < a.rows[s].size(); ++i)
                if (a.rows[s][i].target != b.rows[s][i].target ||
                    std::abs(a.rows[s][i].value.value() - b.rows[s][i].value.value()) > 1e-12)
                    return false;
        }
    }
    return true;
}

const std::vector<std::string> kWeighted{"wsn.big", "action_wsn.big", "infection.big", "sensor_buffers.big", "virus.big",
                                         "mobile_sink.big"};

}  // namespace

TEST(Reactive, SensorNetworkWeights) {
    auto spec = load_model(support::model_path("wsn.big"));
    auto ts = build_transition_system(spec);
    const auto& g0 = ts.states[0].bigraph;
    const auto& g1 = ts.states[1].bigraph;
    EXPECT_EQ(total_weight(g0, spec.rules, ts.states[1].key), Scalar(6));
    EXPECT_TRUE(total_weight(g0, spec.rules, ts.states[0].key).is_zero());
    EXPECT_EQ(total_weight(g1, spec.rules), Scalar(5));

    auto mu0 = next_distribution(g0, spec.rules);
    ASSERT_EQ(mu0.size(), 1u);
    EXPECT_EQ(mu0[0].key, ts.states[1].key);
    EXPECT_EQ(*mu0[0].value.exact(), Rational(1));

    auto mu1 = next_distribution(g1, spec.rules);
    ASSERT_EQ(mu1.size(), 2u);
    for (const auto& s : mu1) {
        if (s.key == ts.states[2].key) EXPECT_EQ(*s.value.exact(), Rational::make(4, 5));
        else if (s.key == ts.states[0].key) EXPECT_EQ(*s.value.exact(), Rational::make(1, 5));
        else ADD_FAILURE() << "unexpected successor";
    }
    auto mu3 = next_distribution(ts.states[3].bigraph, spec.rules);
    ASSERT_EQ(mu3.size(), 1u);
    EXPECT_EQ(mu3[0].key, ts.states[2].key);
}

TEST(Reactive, SensorNetworkChain) {
    auto ts = build_transition_system(load_model(support::model_path("wsn.big")));
    ASSERT_EQ(ts.kind, ModelKind::Dtmc);
    ASSERT_EQ(ts.size(), 4u);
    EXPECT_EQ(ts.transition_count(), 6u);
    auto p = [&](int s, int t) {
        for (const auto& tr : ts.rows[s])
            if (tr.target == t) return *tr.value.exact();
        return Rational(0);
    };
    EXPECT_EQ(p(0, 1), Rational(1));
    EXPECT_EQ(p(1, 2), Rational::make(4, 5));
    EXPECT_EQ(p(1, 0), Rational::make(1, 5));
    EXPECT_EQ(p(2, 3), Rational::make(1, 2));
    EXPECT_EQ(p(2, 1), Rational::make(1, 2));
    EXPECT_EQ(p(3, 2), Rational(1));
}

TEST(Reactive, ActionStepOfSendExample) {
    auto spec = load_model(support::model_path("action_wsn.big"));
    auto ts = build_transition_system(spec);
    ASSERT_EQ(ts.size(), 3u);
    auto step = action_step(ts.states[0].bigraph, spec.rules, spec.actions);
    ASSERT_EQ(step.size(), 2u);
    EXPECT_EQ(step[0].action, "A_send");
    ASSERT_EQ(step[0].distribution.size(), 2u);
    std::multiset<std::string> probs;
    for (const auto& s : step[0].distribution) probs.insert(s.value.exact()->str());
    EXPECT_EQ(probs, (std::multiset<std::string>{"5/6", "1/6"}));
    EXPECT_EQ(step[1].action, "A_wait");
    ASSERT_EQ(step[1].distribution.size(), 1u);
    EXPECT_EQ(step[1].distribution[0].key, ts.states[0].key);

    int failed = *ts.label_id("failed");
    for (std::size_t s = 0; s < ts.size(); ++s) {
        if (!ts.has_label(static_cast<int>(s), failed)) continue;
        auto st = action_step(ts.states[s].bigraph, spec.rules, spec.actions);
        ASSERT_EQ(st.size(), 1u);
        EXPECT_EQ(st[0].action, "A_reset");
        ASSERT_EQ(st[0].distribution.size(), 1u);
        EXPECT_EQ(st[0].distribution[0].key, ts.states[0].key);
    }
    EXPECT_TRUE(action_step(ts.states[0].bigraph, spec.rules, {}).empty());
}

TEST(Reactive, ActionRewardsAndLabels) {
    auto spec = load_model(support::model_path("sensor_buffers.big"));
    auto ts = build_transition_system(spec);
    int full1 = *ts.label_id("full(1)");
    bool saw_reward = false;
    for (std::size_t s = 0; s < ts.size(); ++s)
        for (const auto& c : ts.choices[s])
            if (c.action == "receive_full") {
                EXPECT_EQ(c.reward, Scalar(1));
                saw_reward = true;
            } else {
                EXPECT_TRUE(c.reward.is_zero());
            }
    EXPECT_TRUE(saw_reward);
    EXPECT_EQ(ts.size(), 25u);
    int labelled = 0;
    for (std::size_t s = 0; s < ts.size(); ++s) {
        labelled += ts.has_label(static_cast<int>(s), full1);
        EXPECT_TRUE(ts.state_reward[s].is_zero());
    }
    EXPECT_EQ(labelled, 5);
}

TEST(Reactive, InfectionPredicateLabelsOneState) {
    auto ts = build_transition_system(load_model(support::model_path("virus.big")));
    int all = *ts.label_id("all_infected");
    int count = 0;
    for (std::size_t s = 0; s < ts.size(); ++s) count += ts.has_label(static_cast<int>(s), all);
    EXPECT_EQ(count, 1);
}

TEST(Reactive, TerminalStatesGetDeltaOrNothing) {
    SystemSpec spec;
    spec.kind = SystemKind::Pbrs;
    spec.initial = ion(make_control("Idle", 0, true), {});
    auto ts = build_transition_system(spec);
    ASSERT_EQ(ts.size(), 1u);
    ASSERT_EQ(ts.rows[0].size(), 1u);
    EXPECT_EQ(ts.rows[0][0].target, 0);
    EXPECT_EQ(ts.rows[0][0].value, Scalar(1));

    spec.kind = SystemKind::Abrs;
    auto mdp = build_transition_system(spec);
    EXPECT_TRUE(mdp.choices[0].empty());
}

TEST(Reactive, ZeroWeightRulesNeverFire) {
    auto spec = load_model(support::model_path("wsn.big"));
    for (auto& r : spec.rules) r.weight = Scalar(0);
    auto ts = build_transition_system(spec);
    ASSERT_EQ(ts.size(), 1u);
    ASSERT_EQ(ts.rows[0].size(), 1u);
    EXPECT_EQ(ts.rows[0][0].target, 0);
}

TEST(Reactive, StateCapReportsPartialSystem) {
    BuildOptions opts;
    opts.max_states = 10;
    try {
        build_transition_system(load_model(support::model_path("virus.big")), opts);
        FAIL() << "expected the cap to trip";
    } catch (const StateCapExceeded& e) {
        EXPECT_LE(e.partial().size(), 10u);
        EXPECT_GT(e.partial().size(), 0u);
    }
}

TEST(Reactive, CoatingRateScalesWithFreeCoats) {
    auto spec = load_model(support::model_path("budding.big"));
    auto rates = next_rates(spec.initial, spec.rules);
    bool coat = false;
    for (const auto& r : rates)
        if (r.value == Scalar(50)) coat = true;
    EXPECT_TRUE(coat);
    EXPECT_TRUE(next_rates(ion(make_control("Idle", 0, true), {}), spec.rules).empty());

    auto plain = load_model(support::model_path("coating.big"));
    auto first = next_rates(plain.initial, plain.rules);
    ASSERT_EQ(first.size(), 1u);
    EXPECT_EQ(first[0].value, Scalar(4));
}

TEST(ReactiveProperty, RowsAreDistributions) {
    for (const auto& name : kWeighted) {
        auto ts = build_transition_system(load_model(support::model_path(name)));
        for (std::size_t s = 0; s < ts.size(); ++s) {
            if (ts.kind == ModelKind::Mdp) {
                for (const auto& c : ts.choices[s]) {
                    double sum = 0;
                    for (const auto& t : c.distribution) sum += t.value.value();
                    EXPECT_NEAR(sum, 1.0, 1e-12) << name;
                }
            } else {
                double sum = 0;
                for (const auto& t : ts.rows[s]) sum += t.value.value();
                EXPECT_NEAR(sum, 1.0, 1e-12) << name;
            }
        }
    }
    auto ctmc = build_transition_system(load_model(support::model_path("budding.big"), support::defines({{"p_total", "6"}, {"c_max", "6"}})));
    for (const auto& row : ctmc.rows)
        for (const auto& t : row) EXPECT_GT(t.value.value(), 0.0);
}

TEST(ReactiveProperty, DtmcRowsEqualNextDistribution) {
    for (const auto& name : {"wsn.big", "infection.big", "virus.big"}) {
        auto spec = load_model(support::model_path(name));
        auto ts = build_transition_system(spec);
        for (std::size_t s = 0; s < ts.size(); ++s) {
            auto mu = next_distribution(ts.states[s].bigraph, spec.rules);
            ASSERT_EQ(mu.size(), ts.rows[s].size());
            Scalar total = total_weight(ts.states[s].bigraph, spec.rules);
            for (const auto& succ : mu) {
                auto it = std::find_if(ts.rows[s].begin(), ts.rows[s].end(),
                                       [&](const Transition& t) { return ts.states[t.target].key == succ.key; });
                ASSERT_NE(it, ts.rows[s].end());
                EXPECT_EQ(it->value, succ.value);
                if (!total.is_zero()) {
                    EXPECT_EQ(it->value, total_weight(ts.states[s].bigraph, spec.rules, succ.key) / total);
                }
            }
        }
    }
}

TEST(ReactiveProperty, FixingActionsGivesTheirDistributions) {
    for (const auto& name : {"action_wsn.big", "sensor_buffers.big", "mobile_sink.big"}) {
        auto spec = std::string(name) == "mobile_sink.big"
                        ? load_model(support::model_path(name), support::defines({{"bmax", "2"}}))
                        : load_model(support::model_path(name));
        auto mdp = build_transition_system(spec);
        for (unsigned seed : support::kSeeds) {
            std::mt19937 rng(seed);
            std::vector<int> policy(mdp.size(), -1);
            for (std::size_t s = 0; s < mdp.size(); ++s)
                if (!mdp.choices[s].empty()) policy[s] = support::pick(rng, static_cast<int>(mdp.choices[s].size()));
            auto dtmc = apply_policy(mdp, policy);
            ASSERT_EQ(dtmc.kind, ModelKind::Dtmc);
            for (std::size_t s = 0; s < mdp.size(); ++s) {
                if (policy[s] < 0) {
                    ASSERT_EQ(dtmc.rows[s].size(), 1u);
                    EXPECT_EQ(dtmc.rows[s][0].target, static_cast<int>(s));
                    continue;
                }
                const auto& choice = mdp.choices[s][policy[s]];
                auto decl = std::find_if(spec.actions.begin(), spec.actions.end(),
                                         [&](const ActionDecl& a) { return a.name == choice.action; });
                ASSERT_NE(decl, spec.actions.end());
                auto mu = next_distribution(mdp.states[s].bigraph, rules_of(spec, *decl));
                ASSERT_EQ(mu.size(), dtmc.rows[s].size());
                for (const auto& succ : mu) {
                    auto it = std::find_if(dtmc.rows[s].begin(), dtmc.rows[s].end(),
                                           [&](const Transition& t) { return mdp.states[t.target].key == succ.key; });
                    ASSERT_NE(it, dtmc.rows[s].end());
                    EXPECT_EQ(it->value, succ.value);
                }
            }
        }
    }
}

TEST(ReactiveProperty, WeightScalingLeavesDistributionsUnchanged) {
    for (const auto& name : kWeighted) {
        if (std::string(name) == "virus.big" || std::string(name) == "mobile_sink.big") continue;
        auto spec = load_model(support::model_path(name));
        auto base = build_transition_system(spec);
        for (unsigned seed : support::kSeeds) {
            std::mt19937 rng(seed);
            double c = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
            EXPECT_TRUE(same_rows(base, build_transition_system(scaled(spec, Scalar(c))))) << name << " x" << c;
            EXPECT_TRUE(same_rows(base, build_transition_system(scaled(spec, Scalar(Rational::make(seed % 7 + 2, 3))))))
                << name;
        }
    }
}

TEST(ReactiveProperty, BuildIsDeterministic) {
    for (const auto& name : support::corpus()) {
        if (name == "budding.big") continue;
        auto spec = load_model(support::model_path(name));
        auto a = build_transition_system(spec), b = build_transition_system(load_model(support::model_path(name)));
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t s = 0; s < a.size(); ++s) EXPECT_EQ(a.states[s].key, b.states[s].key);
        EXPECT_TRUE(a.kind == ModelKind::Brs || same_rows(a, b));
    }
}
