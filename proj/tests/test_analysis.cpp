#include <gtest/gtest.h>

#include "bigprob/analysis.hpp"
#include "support.hpp"

using namespace bigprob;

namespace {

// Chain with rows given as (source, target, value) and one label "goal".
TransitionSystem chain(ModelKind kind, int n, const std::vector<std::tuple<int, int, Scalar>>& edges,
                       const std::vector<int>& goal) {
    TransitionSystem ts;
    ts.kind = kind;
    ts.states.resize(n);
    for (int s = 0; s < n; ++s) ts.states[s].key = "s" + std::to_string(s);
    ts.rows.resize(n);
    ts.choices.resize(n);
    for (const auto& [s, t, v] : edges) ts.rows[s].push_back(Transition{t, v});
    ts.label_names = {"goal"};
    ts.labels.resize(n);
    for (int g : goal) ts.labels[g] = {0};
    ts.state_reward.assign(n, Scalar(0));
    return ts;
}

TransitionSystem mdp(int n) {
    TransitionSystem ts;
    ts.kind = ModelKind::Mdp;
    ts.states.resize(n);
    ts.rows.resize(n);
    ts.choices.resize(n);
    ts.label_names = {"goal"};
    ts.labels.resize(n);
    ts.state_reward.assign(n, Scalar(0));
    return ts;
}

// Random MDP: 1-3 actions per state (some states terminal), random rewards.
TransitionSystem random_mdp(std::mt19937& rng, int n) {
    auto ts = mdp(n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < n; ++s) {
        if (support::coin(rng, 0.4)) ts.labels[s] = {0};
        ts.state_reward[s] = Scalar(std::round(u(rng) * 4));
        if (support::coin(rng, 0.15)) continue;
        int actions = 1 + support::pick(rng, 3);
        for (int a = 0; a < actions; ++a) {
            Choice c{"a" + std::to_string(a), Scalar(std::round(u(rng) * 3)), {}};
            int k = 1 + support::pick(rng, 3);
            std::vector<double> w(k);
            double total = 0;
            for (auto& x : w) total += x = 0.1 + u(rng);
            std::map<int, double> dist;
            for (double x : w) dist[support::pick(rng, n)] += x / total;
            for (auto [t, p] : dist) c.distribution.push_back(Transition{t, Scalar(p)});
            ts.choices[s].push_back(c);
        }
    }
    return ts;
}

// Every stationary deterministic policy, -1 where no choice exists.
std::vector<std::vector<int>> all_policies(const TransitionSystem& ts) {
    std::vector<std::vector<int>> out{{}};
    for (std::size_t s = 0; s < ts.size(); ++s) {
        std::vector<std::vector<int>> next;
        int k = static_cast<int>(ts.choices[s].size());
        for (const auto& p : out)
            for (int c = k == 0 ? -1 : 0; c < std::max(k, 0); ++c) {
                auto q = p;
                q.push_back(c);
                next.push_back(q);
            }
        out = std::move(next);
    }
    return out;
}

// Finite-horizon cost of a fixed policy on the MDP itself.
double policy_cost(const TransitionSystem& ts, const std::vector<int>& policy, std::size_t k) {
    std::vector<double> v(ts.size(), 0.0), w(ts.size());
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t s = 0; s < ts.size(); ++s) {
            w[s] = ts.state_reward[s].value();
            if (policy[s] < 0) {
                w[s] += v[s];
                continue;
            }
            const auto& c = ts.choices[s][policy[s]];
            w[s] += c.reward.value();
            for (const auto& t : c.distribution) w[s] += t.value.value() * v[t.target];
        }
        std::swap(v, w);
    }
    return v[0];
}

}  // namespace

TEST(Analysis, BoundedReachOnSensorChain) {
    auto ts = build_transition_system(load_model(support::model_path("wsn.big")));
    auto p = dtmc_bounded_reach(ts, "all_failed", 3);
    ASSERT_TRUE(p.is_exact());
    EXPECT_EQ(*p.exact(), Rational::make(2, 5));
    EXPECT_EQ(dtmc_bounded_reach(ts, "all_failed", 0), Scalar(0));
    EXPECT_EQ(dtmc_bounded_reach(ts, "init", 0), Scalar(1));
    EXPECT_EQ(dtmc_bounded_reach(ts, "init", 7), Scalar(1));
    EXPECT_NEAR(dtmc_bounded_miss(ts, "all_failed", 3), 0.6, 1e-15);
    EXPECT_THROW(dtmc_bounded_reach(ts, "missing", 3), AnalysisError);
}

TEST(Analysis, UnboundedReachExamples) {
    auto split = chain(ModelKind::Dtmc, 3,
                       {{0, 1, Scalar(Rational::make(1, 4))}, {0, 2, Scalar(Rational::make(3, 4))}, {1, 1, Scalar(1)},
                        {2, 2, Scalar(1)}},
                       {1});
    EXPECT_NEAR(dtmc_reach(split, "goal").value, 0.25, 1e-9);

    auto sure = chain(ModelKind::Dtmc, 2, {{0, 1, Scalar(1)}, {1, 1, Scalar(1)}}, {1});
    EXPECT_NEAR(dtmc_reach(sure, "goal").value, 1.0, 1e-9);

    auto never = chain(ModelKind::Dtmc, 2, {{0, 0, Scalar(1)}, {1, 1, Scalar(1)}}, {1});
    EXPECT_EQ(dtmc_reach(never, "goal").value, 0.0);

    // A retry loop that reaches the goal almost surely is settled by graph
    // analysis alone.
    auto retry = chain(ModelKind::Dtmc, 2, {{0, 0, Scalar(0.5)}, {0, 1, Scalar(0.5)}, {1, 1, Scalar(1)}}, {1});
    auto certain = dtmc_reach(retry, "goal");
    EXPECT_EQ(certain.value, 1.0);
    EXPECT_EQ(certain.iterations, 0u);

    // With a losing branch the value 1/2 needs iterating.
    auto lossy = chain(ModelKind::Dtmc, 3,
                       {{0, 0, Scalar(0.5)}, {0, 1, Scalar(0.25)}, {0, 2, Scalar(0.25)}, {1, 1, Scalar(1)},
                        {2, 2, Scalar(1)}},
                       {1});
    auto r = dtmc_reach(lossy, "goal");
    EXPECT_NEAR(r.value, 0.5, 1e-8);
    EXPECT_GT(r.iterations, 10u);

    SolverOptions tight;
    tight.max_iterations = 3;
    EXPECT_THROW(dtmc_reach(lossy, "goal", tight), NonConvergence);
}

TEST(Analysis, ContinuousTimeReach) {
    auto race = chain(ModelKind::Ctmc, 3, {{0, 1, Scalar(2)}, {0, 2, Scalar(1)}}, {1});
    EXPECT_NEAR(ctmc_reach(race, "goal").value, 2.0 / 3.0, 1e-9);
    auto single = chain(ModelKind::Ctmc, 2, {{0, 1, Scalar(0.003)}}, {1});
    EXPECT_NEAR(ctmc_reach(single, "goal").value, 1.0, 1e-9);
    auto start = chain(ModelKind::Ctmc, 2, {{0, 1, Scalar(1)}}, {0});
    EXPECT_EQ(ctmc_reach(start, "goal").value, 1.0);

    auto jump = embedded_chain(race);
    EXPECT_EQ(jump.kind, ModelKind::Dtmc);
    ASSERT_EQ(jump.rows[1].size(), 1u);
    EXPECT_EQ(jump.rows[1][0].target, 1);
}

TEST(Analysis, ActionChoicesOnSendExample) {
    auto ts = build_transition_system(load_model(support::model_path("action_wsn.big")));
    EXPECT_NEAR(mdp_bounded_reach(ts, "success", 1, Optimum::Max), 5.0 / 6.0, 1e-12);
    EXPECT_EQ(mdp_bounded_reach(ts, "success", 1, Optimum::Min), 0.0);
    EXPECT_EQ(mdp_bounded_reach(ts, "success", 0, Optimum::Max), 0.0);
    EXPECT_EQ(mdp_bounded_reach(ts, "init", 0, Optimum::Min), 1.0);
}

TEST(Analysis, ExpectedCostConventions) {
    auto zero = mdp(2);
    zero.choices[0].push_back(Choice{"a", Scalar(0), {Transition{1, Scalar(1)}}});
    EXPECT_EQ(mdp_expected_cost(zero, 10, Optimum::Max), 0.0);

    auto one_state = mdp(1);
    one_state.state_reward[0] = Scalar(1);
    EXPECT_EQ(mdp_expected_cost(one_state, 4000, Optimum::Min), 4000.0);

    auto pick = mdp(2);
    pick.choices[0].push_back(Choice{"cheap", Scalar(1), {Transition{1, Scalar(1)}}});
    pick.choices[0].push_back(Choice{"dear", Scalar(3), {Transition{1, Scalar(1)}}});
    EXPECT_EQ(mdp_expected_cost(pick, 1, Optimum::Min), 1.0);
    EXPECT_EQ(mdp_expected_cost(pick, 1, Optimum::Max), 3.0);
}

TEST(Analysis, QueryParsing) {
    auto q = parse_query("P=? [ F<=3 all_failed ]");
    EXPECT_EQ(q.kind, Query::Kind::BoundedReach);
    EXPECT_EQ(q.horizon, 3u);
    EXPECT_EQ(q.label, "all_failed");
    EXPECT_EQ(parse_query("P=? [ F \"full(1)\" ]").label, "full(1)");
    EXPECT_EQ(parse_query("P=?[F full(1)]").label, "full(1)");
    auto m = parse_query("Pmax=? [ F<=10 success ]");
    EXPECT_EQ(m.kind, Query::Kind::MdpReach);
    EXPECT_EQ(*m.optimum, Optimum::Max);
    auto c = parse_query("Rmin=? [ C<=4000 ]");
    EXPECT_EQ(c.kind, Query::Kind::MdpCost);
    EXPECT_EQ(c.horizon, 4000u);
    for (const char* bad : {"", "P=? F goal", "Q=? [ F goal ]", "P=? [ G goal ]", "Rmin=? [ C<=x ]", "P=? [ F<=-1 g ]"})
        EXPECT_THROW(parse_query(bad), AnalysisError) << bad;
}

TEST(Analysis, EvaluateChecksModelKind) {
    auto ctmc = chain(ModelKind::Ctmc, 2, {{0, 1, Scalar(1)}}, {1});
    EXPECT_THROW(evaluate(ctmc, parse_query("P=? [ F<=2 goal ]")), AnalysisError);
    EXPECT_NEAR(evaluate(ctmc, parse_query("P=? [ F goal ]")).value.value(), 1.0, 1e-9);
    auto m = mdp(1);
    EXPECT_THROW(evaluate(m, parse_query("P=? [ F goal ]")), AnalysisError);
    auto dtmc = chain(ModelKind::Dtmc, 2, {{0, 1, Scalar(1)}, {1, 1, Scalar(1)}}, {1});
    EXPECT_THROW(evaluate(dtmc, parse_query("Rmin=? [ C<=2 ]")), AnalysisError);
}

TEST(AnalysisProperty, BoundedReachIsMonotoneAndConverges) {
    for (unsigned seed : support::kSeeds) {
        std::mt19937 rng(seed);
        for (int trial = 0; trial < 30; ++trial) {
            // Random chain over n states with two absorbing ends.
            int n = 3 + support::pick(rng, 6);
            std::vector<std::tuple<int, int, Scalar>> edges;
            for (int s = 0; s < n - 2; ++s) {
                int a = support::pick(rng, n), b = support::pick(rng, n);
                double p = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
                if (a == b) edges.emplace_back(s, a, Scalar(1));
                else {
                    edges.emplace_back(s, a, Scalar(p));
                    edges.emplace_back(s, b, Scalar(1 - p));
                }
            }
            edges.emplace_back(n - 2, n - 2, Scalar(1));
            edges.emplace_back(n - 1, n - 1, Scalar(1));
            auto ts = chain(ModelKind::Dtmc, n, edges, {n - 1});
            double prev = 0;
            for (std::size_t k = 0; k <= 40; ++k) {
                double v = dtmc_bounded_reach(ts, "goal", k).value();
                EXPECT_GE(v, prev - 1e-15);
                prev = v;
            }
            SolverOptions opts;
            opts.tolerance = 1e-10;
            auto r = dtmc_reach(ts, "goal", opts);
            EXPECT_NEAR(dtmc_bounded_reach(ts, "goal", 5000).value(), r.value, 10 * 1e-9);
        }
    }
}

TEST(AnalysisProperty, PolicyValuesLieBetweenOptima) {
    for (unsigned seed : support::kSeeds) {
        std::mt19937 rng(seed);
        for (int trial = 0; trial < 20; ++trial) {
            int n = 2 + support::pick(rng, 5);
            auto ts = random_mdp(rng, n);
            auto policies = all_policies(ts);
            if (policies.size() > 2000) continue;
            for (std::size_t k : {1u, 3u, 8u}) {
                double lo = mdp_bounded_reach(ts, "goal", k, Optimum::Min);
                double hi = mdp_bounded_reach(ts, "goal", k, Optimum::Max);
                double clo = mdp_expected_cost(ts, k, Optimum::Min);
                double chi = mdp_expected_cost(ts, k, Optimum::Max);
                EXPECT_LE(lo, hi + 1e-12);
                for (const auto& pol : policies) {
                    double v = dtmc_bounded_reach(apply_policy(ts, pol), "goal", k).value();
                    EXPECT_LE(lo, v + 1e-9);
                    EXPECT_LE(v, hi + 1e-9);
                    double c = policy_cost(ts, pol, k);
                    EXPECT_LE(clo, c + 1e-9);
                    EXPECT_LE(c, chi + 1e-9);
                }
            }
            double prev = 0;
            for (std::size_t k = 0; k < 12; ++k) {
                double c = mdp_expected_cost(ts, k, Optimum::Min);
                EXPECT_GE(c, prev - 1e-12);
                prev = c;
            }
        }
    }
}

TEST(AnalysisProperty, RateScalingLeavesReachUnchanged) {
    auto ts = build_transition_system(load_model(support::model_path("budding.big"),
                                                 support::defines({{"p_total", "5"}, {"c_max", "6"}})));
    std::vector<double> base;
    for (int n = 0; n <= 5; ++n) base.push_back(ctmc_reach(ts, "particles(" + std::to_string(n) + ")").value);
    for (unsigned seed : support::kSeeds) {
        std::mt19937 rng(seed);
        double c = std::uniform_real_distribution<double>(0.01, 100.0)(rng);
        auto scaled = ts;
        for (auto& row : scaled.rows)
            for (auto& t : row) t.value = t.value * Scalar(c);
        for (int n = 0; n <= 5; ++n)
            EXPECT_NEAR(ctmc_reach(scaled, "particles(" + std::to_string(n) + ")").value, base[n], 1e-9);
    }
}
