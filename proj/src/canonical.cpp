#include "bigprob/canonical.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "bigprob/error.hpp"

namespace bigprob {

namespace {

using Code = std::int64_t;
using Encoding = std::vector<Code>;

// Individualisation-refinement canonical labelling of the node set. Colours
// are cell start positions, so a cell spanning positions [a, a+k) keeps that
// range under refinement and singletons keep their position.
class Canonicalizer {
public:
    explicit Canonicalizer(const Bigraph& b) : b_(b), n_(b.node_count()) {
        std::vector<std::pair<std::string, int>> labels;
        for (int v = 0; v < n_; ++v) labels.emplace_back(b.control(v).label(), b.arity(v));
        auto sorted = labels;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        ctrl_rank_.resize(n_);
        for (int v = 0; v < n_; ++v)
            ctrl_rank_[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), labels[v]) - sorted.begin());

        children_ = b.node_children_of_nodes();
        site_children_.resize(n_);
        for (int s = 0; s < b.site_count(); ++s)
            if (b.site_parent(s).is_node()) site_children_[b.site_parent(s).index].push_back(s);

        link_ports_ = b.link_ports();
        link_inner_.resize(b.link_count());
        int rank = 0;
        for (const auto& [name, l] : b.inner_links()) link_inner_[l].push_back(rank++);
        std::map<std::string, int> outer;
        for (int l = 0; l < b.link_count(); ++l)
            if (b.link_name(l)) outer.emplace(*b.link_name(l), l);
        outer_rank_.assign(b.link_count(), -1);
        rank = 0;
        for (const auto& [name, l] : outer) outer_rank_[l] = rank++;
        for (int v = 0; v < n_; ++v) max_arity_ = std::max(max_arity_, b.arity(v));
    }

    // Node order (position -> node) of the minimal leaf.
    std::vector<int> run() {
        std::vector<int> colors(n_);
        {
            std::vector<int> idx(n_);
            std::iota(idx.begin(), idx.end(), 0);
            std::stable_sort(idx.begin(), idx.end(), [&](int a, int c) { return ctrl_rank_[a] < ctrl_rank_[c]; });
            for (int i = 0; i < n_; ++i)
                colors[idx[i]] = (i > 0 && ctrl_rank_[idx[i]] == ctrl_rank_[idx[i - 1]]) ? colors[idx[i - 1]] : i;
        }
        search(std::move(colors), 0);
        return best_order_;
    }

private:
    static constexpr int kNone = -1;

    void refine(std::vector<int>& color) const {
        int cells = count_cells(color);
        std::vector<int> idx(n_);
        std::vector<Encoding> sig(n_);
        while (cells < n_) {
            // Closed edges are classed by the colours of their points.
            std::vector<Encoding> edge_sig(b_.link_count());
            std::vector<int> edge_class(b_.link_count(), 0);
            {
                std::vector<int> closed;
                for (int l = 0; l < b_.link_count(); ++l) {
                    if (!b_.is_closed(l)) continue;
                    auto& s = edge_sig[l];
                    for (auto [u, p] : link_ports_[l]) s.push_back(Code(color[u]) * (max_arity_ + 1) + p);
                    std::sort(s.begin(), s.end());
                    s.push_back(-1);
                    for (int r : link_inner_[l]) s.push_back(r);
                    closed.push_back(l);
                }
                std::sort(closed.begin(), closed.end(), [&](int a, int c) { return edge_sig[a] < edge_sig[c]; });
                for (std::size_t i = 0; i < closed.size(); ++i)
                    edge_class[closed[i]] =
                        (i > 0 && edge_sig[closed[i]] == edge_sig[closed[i - 1]]) ? edge_class[closed[i - 1]]
                                                                                  : static_cast<int>(i);
            }
            for (int v = 0; v < n_; ++v) {
                auto& s = sig[v];
                s.clear();
                s.push_back(color[v]);
                Place p = b_.parent(v);
                s.push_back(p.is_region() ? -1 - p.index : color[p.index]);
                std::size_t mark = s.size();
                for (int c : children_[v]) s.push_back(color[c]);
                std::sort(s.begin() + static_cast<std::ptrdiff_t>(mark), s.end());
                s.push_back(-1);
                for (int site : site_children_[v]) s.push_back(site);
                s.push_back(-1);
                for (int q = 0; q < b_.arity(v); ++q) {
                    int l = b_.port_link(v, q);
                    s.push_back(b_.is_closed(l) ? edge_class[l] : -1 - outer_rank_[l]);
                }
            }
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(), [&](int a, int c) { return sig[a] < sig[c]; });
            std::vector<int> next(n_);
            for (int i = 0; i < n_; ++i)
                next[idx[i]] = (i > 0 && sig[idx[i]] == sig[idx[i - 1]]) ? next[idx[i - 1]] : i;
            int next_cells = count_cells(next);
            color = std::move(next);
            if (next_cells == cells) break;
            cells = next_cells;
        }
    }

    int count_cells(const std::vector<int>& color) const {
        std::vector<char> seen(n_, 0);
        int cells = 0;
        for (int c : color)
            if (!seen[c]) {
                seen[c] = 1;
                ++cells;
            }
        return cells;
    }

    Encoding encode(const std::vector<int>& order, const std::vector<int>& pos) const {
        auto edge_id = edge_numbering(pos);
        Encoding e;
        e.reserve(4 + n_ * (3 + max_arity_));
        e.push_back(n_);
        e.push_back(b_.region_count());
        e.push_back(b_.site_count());
        auto place = [&](Place p) -> Code { return p.is_region() ? -1 - p.index : pos[p.index]; };
        auto link = [&](int l) -> Code { return b_.is_closed(l) ? edge_id[l] : -1 - outer_rank_[l]; };
        for (int v : order) {
            e.push_back(ctrl_rank_[v]);
            e.push_back(place(b_.parent(v)));
            for (int q = 0; q < b_.arity(v); ++q) e.push_back(link(b_.port_link(v, q)));
        }
        for (int s = 0; s < b_.site_count(); ++s) e.push_back(place(b_.site_parent(s)));
        for (const auto& [name, l] : b_.inner_links()) e.push_back(link(l));
        return e;
    }

    // Closed edges numbered by their least point under the labelling.
    std::vector<int> edge_numbering(const std::vector<int>& pos) const {
        std::vector<std::pair<Code, int>> keyed;
        for (int l = 0; l < b_.link_count(); ++l) {
            if (!b_.is_closed(l)) continue;
            Code key = std::numeric_limits<Code>::max();
            for (auto [u, p] : link_ports_[l]) key = std::min(key, Code(pos[u]) * (max_arity_ + 1) + p);
            if (link_ports_[l].empty() && !link_inner_[l].empty())
                key = Code(n_ + 1) * (max_arity_ + 1) + link_inner_[l].front();
            keyed.emplace_back(key, l);
        }
        std::sort(keyed.begin(), keyed.end());
        std::vector<int> id(b_.link_count(), -1);
        for (std::size_t i = 0; i < keyed.size(); ++i) id[keyed[i].second] = static_cast<int>(i);
        return id;
    }

    // Swapping two childless siblings with matching port structure is an
    // automorphism, so only one of them needs to be branched on.
    bool twins(int u, int w) const {
        if (b_.parent(u) != b_.parent(w) || ctrl_rank_[u] != ctrl_rank_[w]) return false;
        if (!children_[u].empty() || !children_[w].empty()) return false;
        if (!site_children_[u].empty() || !site_children_[w].empty()) return false;
        auto private_edge = [&](int l, int owner) {
            if (!b_.is_closed(l) || !link_inner_[l].empty()) return false;
            for (auto [x, p] : link_ports_[l])
                if (x != owner) return false;
            return true;
        };
        int a = b_.arity(u);
        for (int p = 0; p < a; ++p) {
            int lu = b_.port_link(u, p), lw = b_.port_link(w, p);
            if (lu == lw) continue;
            if (!private_edge(lu, u) || !private_edge(lw, w)) return false;
            for (int q = 0; q < a; ++q) {
                bool su = b_.port_link(u, q) == lu;
                bool sw = b_.port_link(w, q) == lw;
                if (su != sw) return false;
            }
        }
        return true;
    }

    int search(std::vector<int> colors, int depth) {
        refine(colors);
        if (count_cells(colors) == n_) return leaf(colors);

        // Target cell: smallest non-singleton, lowest start on ties.
        std::vector<int> size(n_, 0);
        for (int c : colors) ++size[c];
        int target = -1;
        for (int c = 0; c < n_; ++c)
            if (size[c] > 1 && (target < 0 || size[c] < size[target])) target = c;
        std::vector<int> cell;
        for (int v = 0; v < n_; ++v)
            if (colors[v] == target) cell.push_back(v);

        std::vector<int> explored;
        for (int v : cell) {
            bool skip = false;
            for (int e : explored)
                if (twins(e, v)) skip = true;
            if (!skip && !explored.empty() && same_orbit(v, explored)) skip = true;
            if (skip) continue;

            auto child = colors;
            for (int u : cell)
                if (u != v) child[u] = target + 1;
            path_.push_back(v);
            int jump = search(std::move(child), depth + 1);
            path_.pop_back();
            explored.push_back(v);
            if (jump != kNone && jump < depth) return jump;
        }
        return kNone;
    }

    int leaf(const std::vector<int>& colors) {
        std::vector<int> order(n_);
        for (int v = 0; v < n_; ++v) order[colors[v]] = v;
        Encoding enc = encode(order, colors);
        if (!have_best_ || enc < best_) {
            best_ = std::move(enc);
            best_order_ = std::move(order);
            best_path_ = path_;
            have_best_ = true;
            return kNone;
        }
        if (enc != best_) return kNone;
        std::vector<int> gamma(n_);
        for (int i = 0; i < n_; ++i) gamma[best_order_[i]] = order[i];
        automorphisms_.push_back(std::move(gamma));
        std::size_t common = 0;
        while (common < path_.size() && common < best_path_.size() && path_[common] == best_path_[common]) ++common;
        return static_cast<int>(common);
    }

    // Orbit test under the automorphisms found so far that fix the current
    // path pointwise.
    bool same_orbit(int v, const std::vector<int>& explored) const {
        std::vector<int> parent(n_);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        bool any = false;
        for (const auto& g : automorphisms_) {
            bool fixes = std::all_of(path_.begin(), path_.end(), [&](int p) { return g[p] == p; });
            if (!fixes) continue;
            any = true;
            for (int x = 0; x < n_; ++x) parent[find(x)] = find(g[x]);
        }
        if (!any) return false;
        int root = find(v);
        return std::any_of(explored.begin(), explored.end(), [&](int e) { return find(e) == root; });
    }

    const Bigraph& b_;
    int n_;
    int max_arity_ = 0;
    std::vector<int> ctrl_rank_;
    std::vector<std::vector<int>> children_;
    std::vector<std::vector<int>> site_children_;
    std::vector<std::vector<std::pair<int, int>>> link_ports_;
    std::vector<std::vector<int>> link_inner_;
    std::vector<int> outer_rank_;

    std::vector<int> path_;
    bool have_best_ = false;
    Encoding best_;
    std::vector<int> best_order_;
    std::vector<int> best_path_;
    std::vector<std::vector<int>> automorphisms_;
};

}  // namespace

std::string canonical_form(const Bigraph& input) {
    Bigraph b = input.lean();
    std::vector<int> order = Canonicalizer(b).run();
    std::vector<int> pos(b.node_count());
    for (int i = 0; i < b.node_count(); ++i) pos[order[i]] = i;

    // Closed edges numbered by least port under the canonical order.
    std::vector<int> edge_id(b.link_count(), -1);
    int next_edge = 0;
    for (int v : order)
        for (int p = 0; p < b.arity(v); ++p) {
            int l = b.port_link(v, p);
            if (b.is_closed(l) && edge_id[l] < 0) edge_id[l] = next_edge++;
        }
    for (const auto& [name, l] : b.inner_links())
        if (b.is_closed(l) && edge_id[l] < 0) edge_id[l] = next_edge++;

    auto link = [&](int l) { return b.is_closed(l) ? "#" + std::to_string(edge_id[l]) : *b.link_name(l); };
    auto place = [&](Place p) {
        return p.is_region() ? "r" + std::to_string(p.index) : std::to_string(pos[p.index]);
    };

    std::string out = "R" + std::to_string(b.region_count()) + ";";
    for (int v : order) {
        out += b.control(v).label();
        out += "@" + place(b.parent(v));
        if (b.arity(v) > 0) {
            out += "{";
            for (int p = 0; p < b.arity(v); ++p) {
                if (p) out += ",";
                out += link(b.port_link(v, p));
            }
            out += "}";
        }
        out += ";";
    }
    if (b.site_count() > 0) {
        out += "S";
        for (int s = 0; s < b.site_count(); ++s) out += (s ? "," : "") + place(b.site_parent(s));
        out += ";";
    }
    if (!b.inner_links().empty()) {
        out += "I";
        bool first = true;
        for (const auto& [name, l] : b.inner_links()) {
            out += (first ? "" : ",") + name + "=" + link(l);
            first = false;
        }
        out += ";";
    }
    auto names = b.outer_face().names;
    if (!names.empty()) {
        out += "O";
        bool first = true;
        for (const auto& n : names) {
            out += (first ? "" : ",") + n;
            first = false;
        }
        out += ";";
    }
    return out;
}

std::string canonical_key(const Bigraph& g) {
    if (!g.is_ground()) throw GroundError("canonical keys are defined for ground bigraphs only");
    return canonical_form(g);
}

bool support_equivalent(const Bigraph& f, const Bigraph& g) {
    if (!f.is_ground() || !g.is_ground())
        throw GroundError("support equivalence is defined for ground bigraphs only");
    return canonical_form(f) == canonical_form(g);
}

}  // namespace bigprob
