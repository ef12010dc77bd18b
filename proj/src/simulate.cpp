#include <algorithm>
#include <cmath>
#include <random>

#include "bigprob/canonical.hpp"
#include "bigprob/export.hpp"
#include "bigprob/matching.hpp"

namespace bigprob {

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

// Uniform in [0, 1) from the top 53 bits; avoids the library's
// implementation-defined distributions so traces match across platforms.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Move {
    std::string via;
    const RewriteOutcome* outcome;
    double mass;
};

// Index drawn with probability proportional to mass; -1 when all are zero.
int draw(const std::vector<Move>& moves, std::mt19937_64& rng) {
    double total = 0.0;
    for (const auto& m : moves) total += m.mass;
    if (total <= 0.0) return -1;
    double u = unit(rng) * total;
    int last = -1;
    for (std::size_t i = 0; i < moves.size(); ++i) {
        if (moves[i].mass <= 0.0) continue;
        last = static_cast<int>(i);
        if (u < moves[i].mass) return last;
        u -= moves[i].mass;
    }
    return last;
}

}  // namespace

std::vector<TraceStep> simulate(const SystemSpec& spec, std::size_t steps, std::uint64_t seed) {
    std::vector<TraceStep> trace;
    if (steps == 0) return trace;
    std::mt19937_64 rng(seed);
    Bigraph state = spec.initial.lean();
    std::string key = canonical_key(state);
    double time = 0.0;

    std::vector<int> action_order(spec.actions.size());
    for (std::size_t i = 0; i < action_order.size(); ++i) action_order[i] = static_cast<int>(i);
    std::stable_sort(action_order.begin(), action_order.end(),
                     [&](int a, int b) { return spec.actions[a].name < spec.actions[b].name; });

    for (std::size_t step = 1; step <= steps; ++step) {
        std::vector<std::vector<RewriteOutcome>> outcomes(spec.rules.size());
        std::vector<char> computed(spec.rules.size(), 0);
        auto of = [&](int r) -> const std::vector<RewriteOutcome>& {
            if (!computed[r]) {
                outcomes[r] = apply_rule_all(state, spec.rules[r].redex, spec.rules[r].reactum);
                computed[r] = 1;
            }
            return outcomes[r];
        };
        auto moves_of = [&](const std::vector<int>& rules, bool weighted) {
            std::vector<Move> moves;
            for (int r : rules)
                for (const auto& o : of(r))
                    moves.push_back(Move{spec.rules[r].name, &o,
                                         weighted ? spec.rules[r].weight.value() * o.count : 1.0});
            return moves;
        };
        std::vector<int> all(spec.rules.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);

        std::string via = "-";
        const RewriteOutcome* next = nullptr;
        switch (spec.kind) {
            case SystemKind::Pbrs:
            case SystemKind::Brs: {
                auto moves = moves_of(all, spec.kind == SystemKind::Pbrs);
                int i = draw(moves, rng);
                if (i >= 0) {
                    via = moves[i].via;
                    next = moves[i].outcome;
                } else if (spec.kind == SystemKind::Brs) {
                    return trace;
                }
                break;
            }
            case SystemKind::Sbrs: {
                auto moves = moves_of(all, true);
                double exit = 0.0;
                for (const auto& m : moves) exit += m.mass;
                int i = draw(moves, rng);
                if (i < 0) return trace;
                time += -std::log1p(-unit(rng)) / exit;
                via = moves[i].via;
                next = moves[i].outcome;
                break;
            }
            case SystemKind::Abrs: {
                std::vector<int> applicable;
                for (int a : action_order) {
                    const auto& rs = spec.actions[a].rules;
                    if (std::any_of(rs.begin(), rs.end(), [&](int r) { return !of(r).empty(); }))
                        applicable.push_back(a);
                }
                if (applicable.empty()) return trace;
                int a = applicable[static_cast<std::size_t>(unit(rng) * static_cast<double>(applicable.size()))];
                auto moves = moves_of(spec.actions[a].rules, true);
                int i = draw(moves, rng);
                via = spec.actions[a].name;
                if (i >= 0) {
                    via += "/" + moves[i].via;
                    next = moves[i].outcome;
                }
                break;
            }
        }
        if (next) {
            state = next->result;
            key = next->key;
        }
        trace.push_back(TraceStep{step, key, via, time});
    }
    return trace;
}

}  // namespace bigprob
