#include "bigprob/matching.hpp"

#include <algorithm>
#include <map>

#include "bigprob/canonical.hpp"
#include "bigprob/error.hpp"

namespace bigprob {

namespace {

// Adjacency of a bigraph precomputed for matching.
struct View {
    explicit View(const Bigraph& g)
        : b(g),
          node_children(g.node_children_of_nodes()),
          region_children(g.node_children_of_regions()),
          site_children(g.node_count(), 0),
          points(g.link_point_counts()) {
        for (int s = 0; s < g.site_count(); ++s)
            if (g.site_parent(s).is_node()) ++site_children[g.site_parent(s).index];
    }

    int child_count(int v) const { return static_cast<int>(node_children[v].size()) + site_children[v]; }

    const std::vector<int>& children(Place p) const {
        return p.is_region() ? region_children[p.index] : node_children[p.index];
    }

    const Bigraph& b;
    std::vector<std::vector<int>> node_children;
    std::vector<std::vector<int>> region_children;
    std::vector<int> site_children;
    std::vector<int> points;
};

void check_redex(const Bigraph& redex) {
    if (!redex.inner_links().empty()) throw MatchError("redexes with inner names are not supported");
    if (auto why = redex.solidity_violation()) throw SolidityError("redex is not solid: " + *why);
}

class Matcher {
public:
    Matcher(const Bigraph& redex, const Bigraph& target, MatchOptions options, bool first_only)
        : l_(redex), g_(target), options_(options), first_only_(first_only) {
        f_.assign(l_.b.node_count(), -1);
        used_.assign(g_.b.node_count(), 0);
        link_map_.assign(l_.b.link_count(), -1);
        link_owner_.assign(g_.b.link_count(), -1);
        region_parent_.assign(l_.b.region_count(), std::nullopt);
        redex_site_of_.assign(l_.b.node_count(), -1);
        for (int s = 0; s < l_.b.site_count(); ++s) redex_site_of_[l_.b.site_parent(s).index] = s;
        plan();
    }

    std::vector<Match> run() {
        if (feasible_) extend(0);
        std::vector<Match> out;
        out.reserve(found_.size());
        for (auto& [key, m] : found_) out.push_back(std::move(m));
        return out;
    }

private:
    // Preorder per region; roots and siblings by rarity in the target.
    void plan() {
        std::map<std::string, int> frequency;
        for (int t = 0; t < g_.b.node_count(); ++t) ++frequency[g_.b.control(t).label()];
        auto rarity = [&](int v) {
            auto it = frequency.find(l_.b.control(v).label());
            return it == frequency.end() ? 0 : it->second;
        };
        feasible_ = true;
        for (int v = 0; v < l_.b.node_count(); ++v)
            if (rarity(v) == 0) feasible_ = false;
        if (feasible_) count_children();
        auto by_rarity = [&](std::vector<int> vs) {
            std::stable_sort(vs.begin(), vs.end(), [&](int a, int c) { return rarity(a) < rarity(c); });
            return vs;
        };
        std::vector<int> regions(l_.b.region_count());
        for (int r = 0; r < l_.b.region_count(); ++r) regions[r] = r;
        std::stable_sort(regions.begin(), regions.end(), [&](int a, int c) {
            auto ra = by_rarity(l_.region_children[a]), rc = by_rarity(l_.region_children[c]);
            int fa = ra.empty() ? 0 : rarity(ra.front()), fc = rc.empty() ? 0 : rarity(rc.front());
            return fa < fc;
        });
        std::vector<int> stack;
        order_.clear();
        for (int r : regions) {
            auto roots = by_rarity(l_.region_children[r]);
            for (auto it = roots.rbegin(); it != roots.rend(); ++it) stack.push_back(*it);
            while (!stack.empty()) {
                int v = stack.back();
                stack.pop_back();
                order_.push_back(v);
                auto kids = by_rarity(l_.node_children[v]);
                for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
            }
        }
        if (first_only_ || options_.identity == OccurrenceIdentity::Decomposition) break_symmetry();
    }

    // Per node, how many children carry each control, keyed by a dense id.
    void count_children() {
        std::map<std::string, int> ids;
        auto id_of = [&](const Bigraph& b, int v) { return ids.try_emplace(b.control(v).label(), ids.size()).first->second; };
        auto tally = [&](const View& view, std::vector<std::vector<std::pair<int, int>>>& out) {
            out.assign(view.b.node_count(), {});
            for (int v = 0; v < view.b.node_count(); ++v) {
                std::map<int, int> counts;
                for (int c : view.node_children[v]) ++counts[id_of(view.b, c)];
                out[v].assign(counts.begin(), counts.end());
            }
        };
        tally(l_, redex_kinds_);
        tally(g_, target_kinds_);
    }

    bool children_suffice(int v, int t) const {
        const auto& have = target_kinds_[t];
        for (auto [id, n] : redex_kinds_[v]) {
            auto it = std::lower_bound(have.begin(), have.end(), std::pair{id, 0});
            if (it == have.end() || it->first != id || it->second < n) return false;
        }
        return true;
    }

    // Interchangeable leaves yield the same decomposition under any
    // permutation of their images, so only increasing images are tried.
    void break_symmetry() {
        twin_prev_.assign(l_.b.node_count(), -1);
        auto private_edge = [&](int link) { return l_.b.is_closed(link) && l_.points[link] == 1; };
        auto twins = [&](int a, int c) {
            if (l_.b.parent(a) != l_.b.parent(c) || !(l_.b.control(a) == l_.b.control(c))) return false;
            if (l_.child_count(a) != 0 || l_.child_count(c) != 0) return false;
            for (int port = 0; port < l_.b.arity(a); ++port) {
                int la = l_.b.port_link(a, port), lc = l_.b.port_link(c, port);
                if (la == lc ? l_.b.is_closed(la) : !(private_edge(la) && private_edge(lc))) return false;
            }
            return true;
        };
        for (std::size_t i = 0; i < order_.size(); ++i)
            for (std::size_t j = i; j-- > 0;)
                if (twins(order_[j], order_[i])) {
                    twin_prev_[order_[i]] = order_[j];
                    break;
                }
    }

    bool done() const { return first_only_ && !found_.empty(); }

    void extend(std::size_t depth) {
        if (done()) return;
        if (depth == order_.size()) {
            record();
            return;
        }
        int v = order_[depth];
        Place p = l_.b.parent(v);
        if (p.is_node()) {
            for (int t : g_.node_children[f_[p.index]]) try_assign(v, t, depth);
        } else if (region_parent_[p.index]) {
            for (int t : g_.children(*region_parent_[p.index])) try_assign(v, t, depth);
        } else {
            for (int t = 0; t < g_.b.node_count(); ++t) try_assign(v, t, depth);
        }
    }

    void try_assign(int v, int t, std::size_t depth) {
        if (done() || used_[t]) return;
        if (!twin_prev_.empty() && twin_prev_[v] >= 0 && t < f_[twin_prev_[v]]) return;
        if (!(l_.b.control(v) == g_.b.control(t))) return;
        // Children: exact unless the redex node holds a site.
        int need = static_cast<int>(l_.node_children[v].size());
        if (redex_site_of_[v] < 0 ? g_.child_count(t) != need : g_.child_count(t) < need) return;
        if (!children_suffice(v, t)) return;

        Place lp = l_.b.parent(v);
        bool set_region = false;
        if (lp.is_region()) {
            Place tp = g_.b.parent(t);
            auto& rp = region_parent_[lp.index];
            if (rp) {
                if (*rp != tp) return;
            } else {
                if (tp.is_node() && used_[tp.index]) return;
                for (const auto& other : region_parent_)
                    if (other && *other == tp) return;
                rp = tp;
                set_region = true;
            }
        }

        std::vector<int> assigned_links;
        bool ok = true;
        for (int port = 0; port < l_.b.arity(v) && ok; ++port) {
            int rl = l_.b.port_link(v, port);
            int tl = g_.b.port_link(t, port);
            if (link_map_[rl] >= 0) {
                ok = link_map_[rl] == tl;
                continue;
            }
            if (link_owner_[tl] >= 0) {
                ok = false;
                continue;
            }
            if (l_.b.is_closed(rl) && (!g_.b.is_closed(tl) || g_.points[tl] != l_.points[rl])) {
                ok = false;
                continue;
            }
            link_map_[rl] = tl;
            link_owner_[tl] = rl;
            assigned_links.push_back(rl);
        }
        if (ok) {
            f_[v] = t;
            used_[t] = 1;
            extend(depth + 1);
            used_[t] = 0;
            f_[v] = -1;
        }
        for (int rl : assigned_links) {
            link_owner_[link_map_[rl]] = -1;
            link_map_[rl] = -1;
        }
        if (set_region) region_parent_[lp.index].reset();
    }

    void record() {
        // Region parents must lie in the context: not inside the image.
        for (const auto& rp : region_parent_) {
            Place p = *rp;
            while (p.is_node()) {
                if (used_[p.index]) return;
                p = g_.b.parent(p.index);
            }
        }
        Match m;
        m.node_map = f_;
        m.link_map = link_map_;
        for (const auto& rp : region_parent_) m.region_parent.push_back(*rp);

        std::vector<int> key;
        if (options_.identity == OccurrenceIdentity::Embedding) {
            key = f_;
        } else {
            key = f_;
            std::sort(key.begin(), key.end());
            for (int s = 0; s < l_.b.site_count(); ++s) key.push_back(f_[l_.b.site_parent(s).index]);
        }
        for (const auto& rp : m.region_parent) {
            key.push_back(static_cast<int>(rp.kind));
            key.push_back(rp.index);
        }
        for (int l = 0; l < l_.b.link_count(); ++l)
            if (!l_.b.is_closed(l) || options_.identity == OccurrenceIdentity::Embedding)
                key.push_back(link_map_[l]);
        found_.emplace(std::move(key), std::move(m));
    }

    View l_;
    View g_;
    MatchOptions options_;
    bool first_only_;
    bool feasible_ = true;
    std::vector<int> order_;
    std::vector<int> f_;
    std::vector<char> used_;
    std::vector<int> link_map_;
    std::vector<int> link_owner_;
    std::vector<std::optional<Place>> region_parent_;
    std::vector<int> redex_site_of_;
    std::vector<int> twin_prev_;
    std::vector<std::vector<std::pair<int, int>>> redex_kinds_, target_kinds_;
    std::map<std::vector<int>, Match> found_;
};

}  // namespace

std::vector<Match> occurrences(const Bigraph& redex, const Bigraph& target, MatchOptions options) {
    check_redex(redex);
    return Matcher(redex, target, options, false).run();
}

bool occurs(const Bigraph& redex, const Bigraph& target) {
    check_redex(redex);
    return !Matcher(redex, target, {}, true).run().empty();
}

std::optional<std::string> match_violation(const Bigraph& redex, const Bigraph& target, const Match& m) {
    const int n = redex.node_count();
    if (static_cast<int>(m.node_map.size()) != n || static_cast<int>(m.link_map.size()) != redex.link_count() ||
        static_cast<int>(m.region_parent.size()) != redex.region_count())
        return "match has the wrong shape for this redex";
    std::vector<int> owner(target.node_count(), -1);
    for (int v = 0; v < n; ++v) {
        int t = m.node_map[v];
        if (t < 0 || t >= target.node_count()) return "node image out of range";
        if (owner[t] >= 0) return "node map is not injective";
        owner[t] = v;
        if (!(redex.control(v) == target.control(t))) return "control mismatch";
    }
    for (int r = 0; r < redex.region_count(); ++r) {
        Place p = m.region_parent[r];
        if (p.is_region() ? p.index >= target.region_count() : p.index >= target.node_count())
            return "region parent out of range";
        for (int q = 0; q < r; ++q)
            if (m.region_parent[q] == p) return "two redex regions share a parent";
        for (Place a = p; a.is_node(); a = target.parent(a.index))
            if (owner[a.index] >= 0) return "redex region placed inside the image";
    }
    std::vector<int> site_of(n, -1);
    for (int s = 0; s < redex.site_count(); ++s) site_of[redex.site_parent(s).index] = s;
    auto target_children = target.node_children_of_nodes();
    std::vector<int> target_sites(target.node_count(), 0);
    for (int s = 0; s < target.site_count(); ++s)
        if (target.site_parent(s).is_node()) ++target_sites[target.site_parent(s).index];
    auto redex_children = redex.node_children_of_nodes();
    for (int v = 0; v < n; ++v) {
        int t = m.node_map[v];
        Place lp = redex.parent(v);
        Place expect = lp.is_region() ? m.region_parent[lp.index] : Place::node(m.node_map[lp.index]);
        if (target.parent(t) != expect) return "parent not preserved";
        if (site_of[v] < 0 &&
            static_cast<int>(target_children[t].size()) + target_sites[t] != static_cast<int>(redex_children[v].size()))
            return "image node has children outside the match";
    }
    auto redex_points = redex.link_point_counts();
    auto target_points = target.link_point_counts();
    std::map<int, int> link_owner;
    for (int l = 0; l < redex.link_count(); ++l) {
        int tl = m.link_map[l];
        if (redex.is_closed(l) && redex_points[l] == 0) {
            if (tl != -1) return "idle redex edge has an image";
            continue;
        }
        if (tl < 0 || tl >= target.link_count()) return "link image out of range";
        if (!link_owner.emplace(tl, l).second) return "two redex links share a target link";
        if (redex.is_closed(l) && (!target.is_closed(tl) || target_points[tl] != redex_points[l]))
            return "closed edge image is not an exact closed edge";
    }
    for (int v = 0; v < n; ++v)
        for (int p = 0; p < redex.arity(v); ++p)
            if (target.port_link(m.node_map[v], p) != m.link_map[redex.port_link(v, p)]) return "link not preserved";
    return std::nullopt;
}

Bigraph Decomposition::assemble(const Bigraph& middle) const {
    return compose(context, compose(tensor(middle, identity(passthrough_width, passthrough_names)), parameter));
}

Decomposition decompose(const Bigraph& redex, const Bigraph& target, const Match& m) {
    if (auto why = match_violation(redex, target, m)) throw MatchError("not an occurrence: " + *why);
    const int tn = target.node_count();
    enum class Part : std::uint8_t { Context, Image, Parameter };
    std::vector<Part> part(tn, Part::Context);
    for (int t : m.node_map) part[t] = Part::Image;

    std::vector<int> site_of(redex.node_count(), -1);
    for (int s = 0; s < redex.site_count(); ++s) site_of[redex.site_parent(s).index] = s;
    std::vector<int> image_site(tn, -1);
    for (int v = 0; v < redex.node_count(); ++v)
        if (site_of[v] >= 0) image_site[m.node_map[v]] = site_of[v];

    auto below_image = [&](Place p) {
        for (Place a = p; a.is_node(); a = target.parent(a.index))
            if (part[a.index] == Part::Image) return true;
        return false;
    };
    for (int t = 0; t < tn; ++t)
        if (part[t] != Part::Image && below_image(target.parent(t))) part[t] = Part::Parameter;

    std::set<int> image_links;
    for (int l = 0; l < redex.link_count(); ++l)
        if (redex.is_closed(l)) image_links.insert(m.link_map[l]);

    // Which parts touch each target link.
    std::vector<char> in_param(target.link_count(), 0), in_context(target.link_count(), 0);
    for (int t = 0; t < tn; ++t)
        for (int p = 0; p < target.arity(t); ++p) {
            int l = target.port_link(t, p);
            if (part[t] == Part::Parameter) in_param[l] = 1;
            if (part[t] == Part::Context) in_context[l] = 1;
        }
    for (const auto& [name, l] : target.inner_links()) in_param[l] = 1;
    std::vector<char> in_redex(target.link_count(), 0);
    for (int l = 0; l < redex.link_count(); ++l)
        if (!redex.is_closed(l)) in_redex[m.link_map[l]] = 1;

    auto pass_name = [](int l) { return "$" + std::to_string(l); };
    Decomposition d;
    for (int l = 0; l < target.link_count(); ++l)
        if (in_param[l] && (in_context[l] || in_redex[l] || !target.is_closed(l))) d.passthrough_names.insert(pass_name(l));

    // Target sites outside the parameter pass straight through.
    std::vector<int> context_sites;
    for (int s = 0; s < target.site_count(); ++s) {
        Place p = target.site_parent(s);
        if (!below_image(p)) context_sites.push_back(s);
    }
    d.passthrough_width = static_cast<int>(context_sites.size());
    const int k = redex.site_count();

    // Parameter.
    {
        BigraphBuilder b;
        for (int r = 0; r < k + d.passthrough_width; ++r) b.add_region();
        std::vector<int> links(target.link_count(), -1);
        for (int l = 0; l < target.link_count(); ++l) {
            if (!in_param[l]) continue;
            links[l] = d.passthrough_names.count(pass_name(l)) ? b.add_outer(pass_name(l)) : b.add_edge();
        }
        std::vector<int> nodes(tn, -1);
        for (int t = 0; t < tn; ++t)
            if (part[t] == Part::Parameter) nodes[t] = b.add_node(target.control_ptr(t), Place::region(0));
        auto place = [&](Place p) {
            if (p.is_node() && part[p.index] == Part::Image) return Place::region(image_site[p.index]);
            return Place::node(nodes[p.index]);
        };
        for (int t = 0; t < tn; ++t) {
            if (nodes[t] < 0) continue;
            b.set_parent(nodes[t], place(target.parent(t)));
            for (int p = 0; p < target.arity(t); ++p) b.link_port(nodes[t], p, links[target.port_link(t, p)]);
        }
        for (int s = 0; s < target.site_count(); ++s) {
            auto it = std::find(context_sites.begin(), context_sites.end(), s);
            if (it != context_sites.end())
                b.add_site(Place::region(k + static_cast<int>(it - context_sites.begin())));
            else
                b.add_site(place(target.site_parent(s)));
        }
        for (const auto& [name, l] : target.inner_links()) b.add_inner(name, links[l]);
        d.parameter = std::move(b).build();
    }

    // Context.
    {
        BigraphBuilder b;
        for (int r = 0; r < target.region_count(); ++r) b.add_region();
        std::vector<int> links(target.link_count(), -1);
        for (int l = 0; l < target.link_count(); ++l) {
            if (image_links.count(l)) continue;
            if (const auto& name = target.link_name(l))
                links[l] = b.add_outer(*name);
            else if (in_context[l] || in_redex[l] || d.passthrough_names.count(pass_name(l)))
                links[l] = b.add_edge();
        }
        std::vector<int> nodes(tn, -1);
        for (int t = 0; t < tn; ++t)
            if (part[t] == Part::Context) nodes[t] = b.add_node(target.control_ptr(t), Place::region(0));
        auto place = [&](Place p) { return p.is_region() ? p : Place::node(nodes[p.index]); };
        for (int t = 0; t < tn; ++t) {
            if (nodes[t] < 0) continue;
            b.set_parent(nodes[t], place(target.parent(t)));
            for (int p = 0; p < target.arity(t); ++p) b.link_port(nodes[t], p, links[target.port_link(t, p)]);
        }
        for (const auto& rp : m.region_parent) b.add_site(place(rp));
        for (int s : context_sites) b.add_site(place(target.site_parent(s)));
        for (int l = 0; l < redex.link_count(); ++l)
            if (!redex.is_closed(l)) b.add_inner(*redex.link_name(l), links[m.link_map[l]]);
        for (const auto& name : d.passthrough_names) b.add_inner(name, links[std::stoi(name.substr(1))]);
        d.context = std::move(b).build();
    }
    return d;
}

Bigraph rewrite(const Bigraph& g, const Bigraph& redex, const Bigraph& reactum, const Match& m) {
    if (!g.is_ground()) throw GroundError("rewriting requires a ground bigraph");
    if (auto why = match_violation(redex, g, m)) throw MatchError("stale match: " + *why);
    if (!(redex.inner_face() == reactum.inner_face()) || !(redex.outer_face() == reactum.outer_face()))
        throw CompositionError("redex and reactum interfaces differ");

    const int tn = g.node_count();
    std::vector<char> image(tn, 0);
    for (int t : m.node_map) image[t] = 1;
    // Redex site holding the unmatched children of each image node.
    std::vector<int> param_of(tn, -1);
    for (int s = 0; s < redex.site_count(); ++s) param_of[m.node_map[redex.site_parent(s).index]] = s;

    BigraphBuilder b;
    for (int r = 0; r < g.region_count(); ++r) b.add_region();
    std::vector<int> links(g.link_count());
    for (int l = 0; l < g.link_count(); ++l)
        links[l] = g.link_name(l) ? b.add_outer(*g.link_name(l)) : b.add_edge();

    std::vector<int> kept(tn, -1);
    for (int t = 0; t < tn; ++t)
        if (!image[t]) kept[t] = b.add_node(g.control_ptr(t), Place::region(0));
    std::vector<int> fresh(reactum.node_count());
    for (int v = 0; v < reactum.node_count(); ++v) fresh[v] = b.add_node(reactum.control_ptr(v), Place::region(0));

    // Region parents are context places, hence kept.
    auto from_target = [&](Place p) { return p.is_region() ? p : Place::node(kept[p.index]); };
    auto from_reactum = [&](Place p) {
        return p.is_region() ? from_target(m.region_parent[p.index]) : Place::node(fresh[p.index]);
    };

    for (int t = 0; t < tn; ++t) {
        if (kept[t] < 0) continue;
        Place p = g.parent(t);
        bool param_root = p.is_node() && image[p.index];
        b.set_parent(kept[t], param_root ? from_reactum(reactum.site_parent(param_of[p.index])) : from_target(p));
        for (int q = 0; q < g.arity(t); ++q) b.link_port(kept[t], q, links[g.port_link(t, q)]);
    }
    std::vector<int> reactum_links(reactum.link_count());
    for (int l = 0; l < reactum.link_count(); ++l) {
        if (const auto& name = reactum.link_name(l))
            reactum_links[l] = links[m.link_map[*redex.outer_link(*name)]];
        else
            reactum_links[l] = b.add_edge();
    }
    for (int v = 0; v < reactum.node_count(); ++v) {
        b.set_parent(fresh[v], from_reactum(reactum.parent(v)));
        for (int q = 0; q < reactum.arity(v); ++q) b.link_port(fresh[v], q, reactum_links[reactum.port_link(v, q)]);
    }
    return std::move(b).build().lean();
}

std::vector<RewriteOutcome> apply_rule_all(const Bigraph& g, const Bigraph& redex, const Bigraph& reactum,
                                           MatchOptions options) {
    std::map<std::string, RewriteOutcome> grouped;
    for (const auto& m : occurrences(redex, g, options)) {
        Bigraph result = rewrite(g, redex, reactum, m);
        std::string key = canonical_key(result);
        auto it = grouped.find(key);
        if (it == grouped.end()) it = grouped.emplace(key, RewriteOutcome{key, std::move(result), 0}).first;
        ++it->second.count;
    }
    std::vector<RewriteOutcome> out;
    out.reserve(grouped.size());
    for (auto& [key, o] : grouped) out.push_back(std::move(o));
    return out;
}

void check_rule(const Bigraph& redex, const Bigraph& reactum, const std::string& name) {
    if (!redex.inner_links().empty()) throw ModelError("rule " + name + ": redex has inner names");
    if (auto why = redex.solidity_violation()) throw SolidityError("rule " + name + ": redex is not solid: " + *why);
    if (!(redex.inner_face() == reactum.inner_face()) || !(redex.outer_face() == reactum.outer_face()))
        throw ModelError("rule " + name + ": redex interface " + redex.inner_face().str() + " -> " +
                         redex.outer_face().str() + " differs from reactum interface " +
                         reactum.inner_face().str() + " -> " + reactum.outer_face().str());
}

}  // namespace bigprob
