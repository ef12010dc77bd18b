#include "bigprob/bigraph.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "bigprob/error.hpp"

namespace bigprob {

std::string param_to_string(const Param& p) {
    if (const auto* i = std::get_if<std::int64_t>(&p)) return std::to_string(*i);
    // Reals always carry a point or exponent so 2.0 and 2 stay distinct.
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), std::get<double>(p));
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string Control::label() const {
    if (params.empty()) return name;
    std::string out = name + "(";
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) out += ",";
        out += param_to_string(params[i]);
    }
    return out + ")";
}

ControlPtr make_control(std::string name, int arity, bool atomic, std::vector<Param> params) {
    if (arity < 0) throw Error("control " + name + " has negative arity");
    return std::make_shared<const Control>(Control{std::move(name), std::move(params), arity, atomic});
}

std::string Interface::str() const {
    std::string out = "<" + std::to_string(width) + ",{";
    bool first = true;
    for (const auto& n : names) {
        if (!first) out += ",";
        out += n;
        first = false;
    }
    return out + "}>";
}

// ---------------------------------------------------------------------------
// Bigraph accessors

std::optional<int> Bigraph::outer_link(const std::string& name) const {
    for (int l = 0; l < link_count(); ++l)
        if (link_names_[l] && *link_names_[l] == name) return l;
    return std::nullopt;
}

Interface Bigraph::inner_face() const {
    Interface f{site_count(), {}};
    for (const auto& [n, l] : inner_) f.names.insert(n);
    return f;
}

Interface Bigraph::outer_face() const {
    Interface f{regions_, {}};
    for (const auto& n : link_names_)
        if (n) f.names.insert(*n);
    return f;
}

std::vector<std::vector<int>> Bigraph::node_children_of_regions() const {
    std::vector<std::vector<int>> out(regions_);
    for (int v = 0; v < node_count(); ++v)
        if (node_parent_[v].is_region()) out[node_parent_[v].index].push_back(v);
    return out;
}

std::vector<std::vector<int>> Bigraph::node_children_of_nodes() const {
    std::vector<std::vector<int>> out(node_count());
    for (int v = 0; v < node_count(); ++v)
        if (node_parent_[v].is_node()) out[node_parent_[v].index].push_back(v);
    return out;
}

std::vector<std::vector<std::pair<int, int>>> Bigraph::link_ports() const {
    std::vector<std::vector<std::pair<int, int>>> out(link_count());
    for (int v = 0; v < node_count(); ++v)
        for (int p = 0; p < arity(v); ++p) out[port_link(v, p)].emplace_back(v, p);
    return out;
}

std::vector<int> Bigraph::link_point_counts() const {
    std::vector<int> out(link_count(), 0);
    for (int l : port_link_) ++out[l];
    for (const auto& [n, l] : inner_) ++out[l];
    return out;
}

Bigraph Bigraph::lean() const {
    auto points = link_point_counts();
    bool idle = false;
    for (int l = 0; l < link_count(); ++l)
        if (is_closed(l) && points[l] == 0) idle = true;
    if (!idle) return *this;

    Bigraph out = *this;
    std::vector<int> remap(link_count(), -1);
    out.link_names_.clear();
    for (int l = 0; l < link_count(); ++l) {
        if (is_closed(l) && points[l] == 0) continue;
        remap[l] = static_cast<int>(out.link_names_.size());
        out.link_names_.push_back(link_names_[l]);
    }
    for (int& l : out.port_link_) l = remap[l];
    for (auto& [n, l] : out.inner_) l = remap[l];
    return out;
}

std::optional<std::string> Bigraph::solidity_violation() const {
    auto region_children = node_children_of_regions();
    for (int r = 0; r < regions_; ++r)
        if (region_children[r].empty())
            return "region " + std::to_string(r) + " contains no node";
    auto points = link_point_counts();
    for (int l = 0; l < link_count(); ++l)
        if (link_names_[l] && points[l] == 0)
            return "outer name " + *link_names_[l] + " is idle";

    std::set<Place> site_parents;
    for (int s = 0; s < site_count(); ++s)
        if (!site_parents.insert(site_parent_[s]).second)
            return "sites share a parent";
    std::set<int> inner_targets;
    for (const auto& [n, l] : inner_)
        if (!inner_targets.insert(l).second) return "inner names share a link";

    for (int s = 0; s < site_count(); ++s)
        if (site_parent_[s].is_region())
            return "site " + std::to_string(s) + " has a region as parent";

    for (const auto& [n, l] : inner_)
        if (link_names_[l])
            return "outer name " + *link_names_[l] + " is linked to inner name " + n;
    return std::nullopt;
}

std::string Bigraph::debug_string() const {
    std::ostringstream os;
    auto place = [](Place p) {
        return (p.is_region() ? "r" : "v") + std::to_string(p.index);
    };
    auto link = [this](int l) {
        return link_names_[l] ? *link_names_[l] : "e" + std::to_string(l);
    };
    os << inner_face().str() << " -> " << outer_face().str() << "\n";
    for (int v = 0; v < node_count(); ++v) {
        os << "v" << v << " " << control(v).label() << " in " << place(node_parent_[v]);
        if (arity(v) > 0) {
            os << " {";
            for (int p = 0; p < arity(v); ++p) os << (p ? "," : "") << link(port_link(v, p));
            os << "}";
        }
        os << "\n";
    }
    for (int s = 0; s < site_count(); ++s) os << "s" << s << " in " << place(site_parent_[s]) << "\n";
    for (const auto& [n, l] : inner_) os << "inner " << n << " -> " << link(l) << "\n";
    return os.str();
}

bool operator==(const Bigraph& a, const Bigraph& b) {
    if (a.node_count() != b.node_count() || a.regions_ != b.regions_ ||
        a.node_parent_ != b.node_parent_ || a.port_offset_ != b.port_offset_ ||
        a.port_link_ != b.port_link_ || a.site_parent_ != b.site_parent_ ||
        a.link_names_ != b.link_names_ || a.inner_ != b.inner_)
        return false;
    for (int v = 0; v < a.node_count(); ++v)
        if (!(a.control(v) == b.control(v))) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Builder

int BigraphBuilder::add_region() { return b_.regions_++; }

int BigraphBuilder::add_node(ControlPtr control, Place parent) {
    if (!control) throw Error("node without control");
    int arity = control->arity;
    b_.controls_.push_back(std::move(control));
    b_.node_parent_.push_back(parent);
    b_.port_offset_.push_back(b_.port_offset_.back() + arity);
    b_.port_link_.resize(b_.port_link_.size() + arity, -1);
    return b_.node_count() - 1;
}

int BigraphBuilder::add_site(Place parent) {
    b_.site_parent_.push_back(parent);
    return b_.site_count() - 1;
}

int BigraphBuilder::add_outer(const std::string& name) {
    if (outer_.count(name)) throw NameError("duplicate outer name " + name);
    b_.link_names_.emplace_back(name);
    int l = b_.link_count() - 1;
    outer_[name] = l;
    return l;
}

int BigraphBuilder::add_edge() {
    b_.link_names_.emplace_back(std::nullopt);
    return b_.link_count() - 1;
}

void BigraphBuilder::link_port(int node, int port, int link) {
    if (node < 0 || node >= b_.node_count() || port < 0 || port >= b_.arity(node))
        throw Error("port out of range");
    b_.port_link_[b_.port_offset_[node] + port] = link;
}

void BigraphBuilder::add_inner(const std::string& name, int link) {
    if (!b_.inner_.emplace(name, link).second) throw NameError("duplicate inner name " + name);
}

void BigraphBuilder::set_parent(int node, Place parent) { b_.node_parent_.at(node) = parent; }

Bigraph BigraphBuilder::build() && {
    const int n = b_.node_count();
    auto check_place = [&](Place p, const char* what) {
        if (p.is_region() ? (p.index < 0 || p.index >= b_.regions_) : (p.index < 0 || p.index >= n))
            throw Error(std::string(what) + " has an invalid parent");
        if (p.is_node() && b_.control(p.index).atomic)
            throw Error("atomic control " + b_.control(p.index).name + " has children");
    };
    for (int v = 0; v < n; ++v) check_place(b_.node_parent_[v], "node");
    for (const auto& p : b_.site_parent_) check_place(p, "site");

    // Acyclic: every node must reach a region.
    std::vector<int> state(n, 0);  // 0 unvisited, 1 on path, 2 done
    for (int v = 0; v < n; ++v) {
        std::vector<int> path;
        int u = v;
        while (state[u] == 0) {
            state[u] = 1;
            path.push_back(u);
            Place p = b_.node_parent_[u];
            if (p.is_region()) break;
            u = p.index;
            if (state[u] == 1) throw Error("place graph contains a cycle");
        }
        for (int w : path) state[w] = 2;
    }

    for (int l : b_.port_link_)
        if (l < 0 || l >= b_.link_count()) throw Error("unlinked or dangling port");
    for (const auto& [name, l] : b_.inner_)
        if (l < 0 || l >= b_.link_count()) throw Error("inner name " + name + " has a dangling link");
    return std::move(b_);
}

// ---------------------------------------------------------------------------
// Elementary bigraphs

Bigraph empty_bigraph() { return Bigraph{}; }

Bigraph one() {
    BigraphBuilder b;
    b.add_region();
    return std::move(b).build();
}

Bigraph site_bigraph() { return identity(1, {}); }

Bigraph identity(int width, const std::set<std::string>& names) {
    if (width < 0) throw ShapeError("negative width");
    BigraphBuilder b;
    for (int i = 0; i < width; ++i) b.add_site(Place::region(b.add_region()));
    for (const auto& n : names) b.add_inner(n, b.add_outer(n));
    return std::move(b).build();
}

Bigraph ion(ControlPtr control, const std::vector<std::string>& names) {
    if (static_cast<int>(names.size()) != control->arity)
        throw Error("control " + control->name + " has arity " + std::to_string(control->arity) +
                    " but " + std::to_string(names.size()) + " names were given");
    BigraphBuilder b;
    int r = b.add_region();
    bool atomic = control->atomic;
    int v = b.add_node(std::move(control), Place::region(r));
    std::map<std::string, int> links;
    for (std::size_t p = 0; p < names.size(); ++p) {
        auto it = links.find(names[p]);
        if (it == links.end()) it = links.emplace(names[p], b.add_outer(names[p])).first;
        b.link_port(v, static_cast<int>(p), it->second);
    }
    if (!atomic) b.add_site(Place::node(v));
    return std::move(b).build();
}

// ---------------------------------------------------------------------------
// Algebra

namespace {

// Copies the nodes of `src` into `out`. Regions of `src` are placed by
// `region_place`; links are translated by `link_map`. Returns node map.
template <typename RegionPlace>
std::vector<int> copy_nodes(BigraphBuilder& out, const Bigraph& src, RegionPlace region_place,
                            const std::vector<int>& link_map) {
    std::vector<int> node_map(src.node_count());
    for (int v = 0; v < src.node_count(); ++v)
        node_map[v] = out.add_node(src.control_ptr(v), Place::region(0));
    auto translate = [&](Place p) {
        return p.is_region() ? region_place(p.index) : Place::node(node_map[p.index]);
    };
    for (int v = 0; v < src.node_count(); ++v) {
        out.set_parent(node_map[v], translate(src.parent(v)));
        for (int p = 0; p < src.arity(v); ++p) out.link_port(node_map[v], p, link_map[src.port_link(v, p)]);
    }
    for (int s = 0; s < src.site_count(); ++s) out.add_site(translate(src.site_parent(s)));
    return node_map;
}

// Link map for `src` inside `out`, fusing outer names through `names`.
std::vector<int> copy_links(BigraphBuilder& out, const Bigraph& src, std::map<std::string, int>& names) {
    std::vector<int> map(src.link_count());
    for (int l = 0; l < src.link_count(); ++l) {
        if (const auto& n = src.link_name(l)) {
            auto it = names.find(*n);
            if (it == names.end()) it = names.emplace(*n, out.add_outer(*n)).first;
            map[l] = it->second;
        } else {
            map[l] = out.add_edge();
        }
    }
    return map;
}

void copy_inner(BigraphBuilder& out, const Bigraph& src, const std::vector<int>& link_map) {
    for (const auto& [n, l] : src.inner_links()) out.add_inner(n, link_map[l]);
}

void require_disjoint(const std::set<std::string>& a, const std::set<std::string>& b, const char* which) {
    for (const auto& n : a)
        if (b.count(n)) throw TensorError(std::string("shared ") + which + " name " + n);
}

Bigraph juxtapose(const Bigraph& left, const Bigraph& right, bool merge_regions) {
    require_disjoint(left.inner_face().names, right.inner_face().names, "inner");
    BigraphBuilder out;
    int left_regions = left.region_count();
    int right_offset = merge_regions ? 0 : left_regions;
    int total = merge_regions ? 1 : left_regions + right.region_count();
    for (int r = 0; r < total; ++r) out.add_region();
    std::map<std::string, int> names;
    auto lmap = copy_links(out, left, names);
    auto rmap = copy_links(out, right, names);
    copy_nodes(out, left, [](int r) { return Place::region(r); }, lmap);
    copy_nodes(out, right, [&](int r) { return Place::region(r + right_offset); }, rmap);
    copy_inner(out, left, lmap);
    copy_inner(out, right, rmap);
    return std::move(out).build();
}

}  // namespace

Bigraph compose(const Bigraph& outer, const Bigraph& inner) {
    if (!(outer.inner_face() == inner.outer_face()))
        throw CompositionError("cannot compose: inner face " + outer.inner_face().str() +
                               " of the outer bigraph differs from outer face " +
                               inner.outer_face().str() + " of the inner bigraph");
    BigraphBuilder out;
    for (int r = 0; r < outer.region_count(); ++r) out.add_region();

    std::vector<int> fmap(outer.link_count());
    std::map<std::string, int> names;
    fmap = copy_links(out, outer, names);
    std::vector<int> gmap(inner.link_count());
    for (int l = 0; l < inner.link_count(); ++l) {
        if (const auto& n = inner.link_name(l))
            gmap[l] = fmap[outer.inner_links().at(*n)];
        else
            gmap[l] = out.add_edge();
    }

    // Outer nodes first; its sites are not copied because inner regions
    // replace them.
    std::vector<int> fnodes(outer.node_count());
    for (int v = 0; v < outer.node_count(); ++v) fnodes[v] = out.add_node(outer.control_ptr(v), Place::region(0));
    auto translate_outer = [&](Place p) {
        return p.is_region() ? p : Place::node(fnodes[p.index]);
    };
    for (int v = 0; v < outer.node_count(); ++v) {
        out.set_parent(fnodes[v], translate_outer(outer.parent(v)));
        for (int p = 0; p < outer.arity(v); ++p) out.link_port(fnodes[v], p, fmap[outer.port_link(v, p)]);
    }
    copy_nodes(out, inner, [&](int r) { return translate_outer(outer.site_parent(r)); }, gmap);
    copy_inner(out, inner, gmap);
    return std::move(out).build();
}

Bigraph tensor(const Bigraph& left, const Bigraph& right) {
    require_disjoint(left.outer_face().names, right.outer_face().names, "outer");
    return juxtapose(left, right, false);
}

Bigraph parallel(const Bigraph& left, const Bigraph& right) { return juxtapose(left, right, false); }

Bigraph merge_parallel(const Bigraph& left, const Bigraph& right) {
    if (left.region_count() != 1 || right.region_count() != 1)
        throw ShapeError("merge requires single-region operands, got widths " +
                         std::to_string(left.region_count()) + " and " +
                         std::to_string(right.region_count()));
    return juxtapose(left, right, true);
}

Bigraph merge_power(int n, const Bigraph& b) {
    if (n < 0) throw ShapeError("negative repetition count");
    Bigraph acc = one();
    for (int i = 0; i < n; ++i) acc = merge_parallel(acc, b);
    return acc;
}

Bigraph close_name(const Bigraph& b, const std::string& name) {
    auto link = b.outer_link(name);
    if (!link) throw NameError("cannot close unknown outer name " + name);
    BigraphBuilder out;
    for (int r = 0; r < b.region_count(); ++r) out.add_region();
    std::vector<int> map(b.link_count());
    std::map<std::string, int> names;
    for (int l = 0; l < b.link_count(); ++l) {
        if (l == *link) {
            map[l] = out.add_edge();
        } else if (const auto& n = b.link_name(l)) {
            map[l] = out.add_outer(*n);
        } else {
            map[l] = out.add_edge();
        }
    }
    copy_nodes(out, b, [](int r) { return Place::region(r); }, map);
    copy_inner(out, b, map);
    return std::move(out).build();
}

Bigraph nest(const Bigraph& outer, const Bigraph& inner) {
    if (!outer.inner_face().names.empty())
        throw CompositionError("nesting requires an outer bigraph without inner names");
    return compose(parallel(outer, identity(0, inner.outer_face().names)), inner);
}

Bigraph rename_outer(const Bigraph& b, const std::map<std::string, std::string>& renaming) {
    BigraphBuilder out;
    for (int r = 0; r < b.region_count(); ++r) out.add_region();
    std::vector<int> map(b.link_count());
    std::map<std::string, int> names;
    for (int l = 0; l < b.link_count(); ++l) {
        if (const auto& n = b.link_name(l)) {
            auto r = renaming.find(*n);
            const std::string& target = r == renaming.end() ? *n : r->second;
            auto it = names.find(target);
            if (it == names.end()) it = names.emplace(target, out.add_outer(target)).first;
            map[l] = it->second;
        } else {
            map[l] = out.add_edge();
        }
    }
    copy_nodes(out, b, [](int r) { return Place::region(r); }, map);
    copy_inner(out, b, map);
    return std::move(out).build();
}

}  // namespace bigprob
