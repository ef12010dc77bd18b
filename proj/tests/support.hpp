// Shared helpers for the test suite: random bigraphs, brute-force oracles and
// paths to the model corpus.
#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bigprob/bigraph.hpp"
#include "bigprob/model.hpp"

namespace support {

using namespace bigprob;

inline const std::array<unsigned, 3> kSeeds{7u, 1234u, 987654u};

inline std::string model_path(const std::string& name) { return std::string(BIGPROB_MODELS_DIR) + "/" + name; }

inline std::vector<std::string> corpus() {
    return {"wsn.big",    "action_wsn.big", "infection.big",   "coating.big", "sensor_buffers.big",
            "virus.big",  "budding.big",    "mobile_sink.big", "ring.big"};
}

inline ElaborateOptions defines(std::map<std::string, std::string> values) {
    ElaborateOptions o;
    o.defines = std::move(values);
    return o;
}

struct Alphabet {
    ControlPtr box = make_control("Box", 0);
    ControlPtr link = make_control("Link", 1);
    ControlPtr pair = make_control("Pair", 2, true);
    ControlPtr dot = make_control("Dot", 0, true);
    ControlPtr tag = make_control("Tag", 1, true);

    std::vector<ControlPtr> all() const { return {box, link, pair, dot, tag}; }
};

inline const Alphabet& alphabet() {
    static const Alphabet a;
    return a;
}

inline int pick(std::mt19937& rng, int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
inline bool coin(std::mt19937& rng, double p) { return std::bernoulli_distribution(p)(rng); }

/// Ground bigraph with up to `max_nodes` nodes over the test alphabet.
inline Bigraph random_ground(std::mt19937& rng, int max_nodes, int regions = 1) {
    BigraphBuilder b;
    for (int r = 0; r < regions; ++r) b.add_region();
    int n = 1 + pick(rng, max_nodes);
    std::vector<Place> holders;
    for (int r = 0; r < regions; ++r) holders.push_back(Place::region(r));
    std::vector<int> edges;
    int pool = 1 + pick(rng, 3);
    for (int e = 0; e < pool; ++e) edges.push_back(b.add_edge());
    std::map<std::string, int> names;
    auto controls = alphabet().all();
    for (int i = 0; i < n; ++i) {
        auto c = controls[pick(rng, static_cast<int>(controls.size()))];
        int v = b.add_node(c, holders[pick(rng, static_cast<int>(holders.size()))]);
        if (!c->atomic) holders.push_back(Place::node(v));
        for (int p = 0; p < c->arity; ++p) {
            if (coin(rng, 0.3)) {
                std::string name = coin(rng, 0.5) ? "x" : "y";
                auto it = names.find(name);
                if (it == names.end()) it = names.emplace(name, b.add_outer(name)).first;
                b.link_port(v, p, it->second);
            } else {
                b.link_port(v, p, edges[pick(rng, pool)]);
            }
        }
    }
    return std::move(b).build().lean();
}

/// Solid redex cut out of `target`: one or two disjoint subtrees, with
/// dropped children replaced by a site and boundary links opened as names.
inline Bigraph carved_redex(std::mt19937& rng, const Bigraph& target, int max_nodes = 6) {
    auto kids = target.node_children_of_nodes();
    auto link_ports = target.link_ports();
    auto above = [&](int a, int d) {
        for (Place p = target.parent(d);; p = target.parent(p.index)) {
            if (!p.is_node()) return false;
            if (p.index == a) return true;
        }
    };
    std::vector<int> roots{pick(rng, target.node_count())};
    if (coin(rng, 0.35)) {
        int other = pick(rng, target.node_count());
        if (other != roots[0] && !above(roots[0], other) && !above(other, roots[0])) roots.push_back(other);
    }
    BigraphBuilder b;
    std::map<int, int> image;  // target node -> redex node
    std::vector<std::pair<int, int>> frontier;
    for (std::size_t r = 0; r < roots.size(); ++r) {
        b.add_region();
        image[roots[r]] = b.add_node(target.control_ptr(roots[r]), Place::region(static_cast<int>(r)));
        frontier.emplace_back(roots[r], image[roots[r]]);
    }
    for (std::size_t i = 0; i < frontier.size(); ++i) {
        auto [t, v] = frontier[i];
        bool dropped = false;
        for (int c : kids[t]) {
            if (b.node_count() < max_nodes && coin(rng, 0.6)) {
                image[c] = b.add_node(target.control_ptr(c), Place::node(v));
                frontier.emplace_back(c, image[c]);
            } else {
                dropped = true;
            }
        }
        if (!target.control(t).atomic && (dropped ? coin(rng, 0.9) : coin(rng, 0.3))) b.add_site(Place::node(v));
    }
    std::map<int, int> links;
    int fresh = 0;
    for (auto [t, v] : image) {
        for (int p = 0; p < target.arity(t); ++p) {
            int tl = target.port_link(t, p);
            auto it = links.find(tl);
            if (it == links.end()) {
                bool inside = std::all_of(link_ports[tl].begin(), link_ports[tl].end(),
                                          [&](auto np) { return image.count(np.first) > 0; });
                int rl = target.is_closed(tl) && inside && coin(rng, 0.7) ? b.add_edge()
                                                                          : b.add_outer("n" + std::to_string(fresh++));
                it = links.emplace(tl, rl).first;
            }
            b.link_port(v, p, it->second);
        }
    }
    return std::move(b).build();
}

/// Small random redex; not necessarily solid.
inline Bigraph random_pattern(std::mt19937& rng, int max_nodes = 4) {
    BigraphBuilder b;
    int regions = 1 + pick(rng, 2);
    for (int r = 0; r < regions; ++r) b.add_region();
    std::vector<Place> holders;
    for (int r = 0; r < regions; ++r) holders.push_back(Place::region(r));
    auto controls = alphabet().all();
    int n = 1 + pick(rng, max_nodes);
    std::vector<int> links{b.add_edge()};
    for (const char* name : {"x", "y"}) links.push_back(b.add_outer(name));
    for (int i = 0; i < n; ++i) {
        auto c = controls[pick(rng, static_cast<int>(controls.size()))];
        int v = b.add_node(c, holders[pick(rng, static_cast<int>(holders.size()))]);
        if (!c->atomic) holders.push_back(Place::node(v));
        for (int p = 0; p < c->arity; ++p) b.link_port(v, p, links[pick(rng, static_cast<int>(links.size()))]);
    }
    int sites = pick(rng, 3);
    for (int s = 0; s < sites; ++s) b.add_site(holders[pick(rng, static_cast<int>(holders.size()))]);
    return std::move(b).build().lean();
}

/// Arbitrary bigraph with sites and inner names, for checking solidity.
inline Bigraph random_open(std::mt19937& rng) {
    BigraphBuilder b;
    int regions = 1 + pick(rng, 2);
    for (int r = 0; r < regions; ++r) b.add_region();
    std::vector<Place> holders;
    for (int r = 0; r < regions; ++r) holders.push_back(Place::region(r));
    auto controls = alphabet().all();
    int n = pick(rng, 4);
    std::vector<int> links{b.add_edge()};
    for (const char* name : {"x", "y"}) links.push_back(b.add_outer(name));
    for (int i = 0; i < n; ++i) {
        auto c = controls[pick(rng, static_cast<int>(controls.size()))];
        int v = b.add_node(c, holders[pick(rng, static_cast<int>(holders.size()))]);
        if (!c->atomic) holders.push_back(Place::node(v));
        for (int p = 0; p < c->arity; ++p) b.link_port(v, p, links[pick(rng, static_cast<int>(links.size()))]);
    }
    int sites = pick(rng, 3);
    for (int s = 0; s < sites; ++s) b.add_site(holders[pick(rng, static_cast<int>(holders.size()))]);
    int inner = pick(rng, 3);
    for (int i = 0; i < inner; ++i) b.add_inner("i" + std::to_string(i), links[pick(rng, static_cast<int>(links.size()))]);
    return std::move(b).build();
}

/// Solidity checked clause by clause, independently of the library.
inline bool solid_by_clauses(const Bigraph& g) {
    auto region_kids = g.node_children_of_regions();
    for (const auto& kids : region_kids)
        if (kids.empty()) return false;
    std::vector<int> points(g.link_count(), 0), inner_on(g.link_count(), 0);
    for (int v = 0; v < g.node_count(); ++v)
        for (int p = 0; p < g.arity(v); ++p) ++points[g.port_link(v, p)];
    for (const auto& [name, l] : g.inner_links()) ++inner_on[l];
    for (int l = 0; l < g.link_count(); ++l) {
        if (g.is_closed(l)) continue;
        if (points[l] + inner_on[l] == 0) return false;  // outer name with no point
        if (inner_on[l] > 0) return false;               // outer name reaches an inner name
    }
    for (int l = 0; l < g.link_count(); ++l)
        if (inner_on[l] > 1) return false;
    std::set<Place> site_parents;
    for (int s = 0; s < g.site_count(); ++s) {
        Place p = g.site_parent(s);
        if (p.is_region()) return false;
        if (!site_parents.insert(p).second) return false;
    }
    return true;
}

namespace detail {

inline std::vector<int> child_counts(const Bigraph& b) {
    std::vector<int> n(b.node_count(), 0);
    for (int v = 0; v < b.node_count(); ++v)
        if (b.parent(v).is_node()) ++n[b.parent(v).index];
    return n;
}

inline std::vector<int> point_counts(const Bigraph& b) {
    std::vector<int> n(b.link_count(), 0);
    for (int v = 0; v < b.node_count(); ++v)
        for (int p = 0; p < b.arity(v); ++p) ++n[b.port_link(v, p)];
    return n;
}

// Redex automorphisms fixing regions, sites and outer names.
inline std::vector<std::vector<int>> automorphisms(const Bigraph& l) {
    int n = l.node_count();
    std::vector<int> sigma(n);
    std::iota(sigma.begin(), sigma.end(), 0);
    std::vector<std::vector<int>> out;
    do {
        bool ok = true;
        std::map<int, int> edges;
        std::set<int> edge_images;
        for (int v = 0; v < n && ok; ++v) {
            int w = sigma[v];
            if (!(l.control(v) == l.control(w))) ok = false;
            Place pv = l.parent(v), pw = l.parent(w);
            if (ok) ok = pv.is_node() ? pw == Place::node(sigma[pv.index]) : pw == pv;
            for (int p = 0; p < l.arity(v) && ok; ++p) {
                int a = l.port_link(v, p), c = l.port_link(w, p);
                if (!l.is_closed(a)) {
                    ok = a == c;
                } else if (!l.is_closed(c)) {
                    ok = false;
                } else {
                    auto [it, fresh] = edges.emplace(a, c);
                    if (fresh) ok = edge_images.insert(c).second;
                    else ok = it->second == c;
                }
            }
        }
        for (int s = 0; s < l.site_count() && ok; ++s) {
            Place p = l.site_parent(s);
            if (p.is_node()) ok = sigma[p.index] == p.index;
        }
        if (ok) out.push_back(sigma);
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    return out;
}

}  // namespace detail

/// Counts occurrences of `redex` in ground `target` by trying every
/// injective control-preserving node map and keeping the valid ones. With
/// `per_embedding` false, maps related by a redex automorphism count once.
inline int brute_force_occurrences(const Bigraph& redex, const Bigraph& target, bool per_embedding) {
    const int n = redex.node_count(), m = target.node_count();
    if (n > m) return 0;
    auto lkids = detail::child_counts(redex), tkids = detail::child_counts(target);
    auto tpoints = detail::point_counts(target), lpoints = detail::point_counts(redex);
    std::vector<char> has_site(n, 0);
    for (int s = 0; s < redex.site_count(); ++s)
        if (redex.site_parent(s).is_node()) has_site[redex.site_parent(s).index] = 1;
    auto autos = per_embedding ? std::vector<std::vector<int>>{} : detail::automorphisms(redex);

    auto valid = [&](const std::vector<int>& f) {
        std::vector<char> in_image(m, 0);
        for (int t : f) in_image[t] = 1;
        std::vector<std::optional<Place>> rp(redex.region_count());
        for (int v = 0; v < n; ++v) {
            Place lp = redex.parent(v), tp = target.parent(f[v]);
            if (lp.is_node()) {
                if (tp != Place::node(f[lp.index])) return false;
            } else {
                auto& slot = rp[lp.index];
                if (slot && *slot != tp) return false;
                slot = tp;
            }
            if (has_site[v] ? tkids[f[v]] < lkids[v] : tkids[f[v]] != lkids[v]) return false;
        }
        std::set<Place> distinct;
        for (const auto& p : rp) {
            if (!p || !distinct.insert(*p).second) return false;
            for (Place q = *p; q.is_node(); q = target.parent(q.index))
                if (in_image[q.index]) return false;
        }
        std::map<int, int> lm;
        std::set<int> used;
        for (int v = 0; v < n; ++v)
            for (int p = 0; p < redex.arity(v); ++p) {
                int rl = redex.port_link(v, p), tl = target.port_link(f[v], p);
                auto [it, fresh] = lm.emplace(rl, tl);
                if (!fresh) {
                    if (it->second != tl) return false;
                    continue;
                }
                if (!used.insert(tl).second) return false;
                if (redex.is_closed(rl) && (!target.is_closed(tl) || tpoints[tl] != lpoints[rl])) return false;
            }
        return true;
    };

    int count = 0;
    std::set<std::vector<int>> orbits;
    std::vector<int> f(n, -1);
    std::vector<char> used(m, 0);
    auto rec = [&](auto&& self, int v) -> void {
        if (v == n) {
            if (!valid(f)) return;
            if (per_embedding) {
                ++count;
                return;
            }
            std::vector<int> best;
            for (const auto& s : autos) {
                std::vector<int> g(n);
                for (int i = 0; i < n; ++i) g[i] = f[s[i]];
                if (best.empty() || g < best) best = g;
            }
            orbits.insert(best);
            return;
        }
        for (int t = 0; t < m; ++t) {
            if (used[t] || !(redex.control(v) == target.control(t))) continue;
            used[t] = 1;
            f[v] = t;
            self(self, v + 1);
            used[t] = 0;
        }
        f[v] = -1;
    };
    rec(rec, 0);
    return per_embedding ? count : static_cast<int>(orbits.size());
}

/// Isomorphism of two ground bigraphs by exhaustive search over node
/// bijections; regions and outer names are fixed, closed edges may be renamed.
inline bool brute_force_isomorphic(const Bigraph& a0, const Bigraph& b0) {
    Bigraph a = a0.lean(), b = b0.lean();
    if (a.node_count() != b.node_count() || a.region_count() != b.region_count() ||
        !(a.outer_face() == b.outer_face()))
        return false;
    int n = a.node_count();
    std::vector<int> sigma(n);
    std::iota(sigma.begin(), sigma.end(), 0);
    do {
        bool ok = true;
        std::map<int, int> edges;
        std::set<int> images;
        for (int v = 0; v < n && ok; ++v) {
            int w = sigma[v];
            if (!(a.control(v) == b.control(w))) ok = false;
            Place pv = a.parent(v), pw = b.parent(w);
            if (ok) ok = pv.is_node() ? pw == Place::node(sigma[pv.index]) : pw == pv;
            for (int p = 0; p < a.arity(v) && ok; ++p) {
                int la = a.port_link(v, p), lb = b.port_link(w, p);
                if (!a.is_closed(la)) {
                    ok = !b.is_closed(lb) && a.link_name(la) == b.link_name(lb);
                } else if (!b.is_closed(lb)) {
                    ok = false;
                } else {
                    auto [it, fresh] = edges.emplace(la, lb);
                    if (fresh) ok = images.insert(lb).second;
                    else ok = it->second == lb;
                }
            }
        }
        if (ok) return true;
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    return false;
}

/// Same bigraph with nodes and closed edges renumbered at random.
inline Bigraph shuffled(const Bigraph& g, std::mt19937& rng) {
    int n = g.node_count();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) pos[order[i]] = i;

    BigraphBuilder b;
    for (int r = 0; r < g.region_count(); ++r) b.add_region();
    std::vector<int> links(g.link_count());
    std::vector<int> link_order(g.link_count());
    std::iota(link_order.begin(), link_order.end(), 0);
    std::shuffle(link_order.begin(), link_order.end(), rng);
    for (int l : link_order) links[l] = g.is_closed(l) ? b.add_edge() : b.add_outer(*g.link_name(l));
    for (int i = 0; i < n; ++i) b.add_node(g.control_ptr(order[i]), Place::region(0));
    for (int i = 0; i < n; ++i) {
        Place p = g.parent(order[i]);
        b.set_parent(i, p.is_node() ? Place::node(pos[p.index]) : p);
        for (int port = 0; port < g.arity(order[i]); ++port) b.link_port(i, port, links[g.port_link(order[i], port)]);
    }
    for (int s = 0; s < g.site_count(); ++s) {
        Place p = g.site_parent(s);
        b.add_site(p.is_node() ? Place::node(pos[p.index]) : p);
    }
    for (const auto& [name, l] : g.inner_links()) b.add_inner(name, links[l]);
    return std::move(b).build();
}

}  // namespace support
