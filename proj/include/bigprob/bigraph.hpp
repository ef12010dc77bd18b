#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace bigprob {

/// A control parameter value. Reals compare exactly.
using Param = std::variant<std::int64_t, double>;

std::string param_to_string(const Param& p);

/// A concrete control: a family name plus one parameter valuation.
struct Control {
    std::string name;
    std::vector<Param> params;
    int arity = 0;
    bool atomic = false;

    /// "Name" or "Name(p1,p2)"; the identity used for matching and keys.
    std::string label() const;

    friend bool operator==(const Control& a, const Control& b) {
        return a.name == b.name && a.params == b.params && a.arity == b.arity &&
               a.atomic == b.atomic;
    }
};

using ControlPtr = std::shared_ptr<const Control>;

ControlPtr make_control(std::string name, int arity, bool atomic = false,
                        std::vector<Param> params = {});

/// Parent of a node or site.
struct Place {
    enum class Kind : std::uint8_t { Region, Node };
    Kind kind = Kind::Region;
    int index = 0;

    static Place region(int i) { return {Kind::Region, i}; }
    static Place node(int i) { return {Kind::Node, i}; }
    bool is_region() const { return kind == Kind::Region; }
    bool is_node() const { return kind == Kind::Node; }

    friend bool operator==(const Place&, const Place&) = default;
    friend auto operator<=>(const Place&, const Place&) = default;
};

struct Interface {
    int width = 0;
    std::set<std::string> names;

    std::string str() const;
    friend bool operator==(const Interface&, const Interface&) = default;
};

class BigraphBuilder;

/// A concrete bigraph. Nodes, sites, regions and links are indexed from 0.
/// A link is either an outer name or a closed edge; ports and inner names
/// point at links. Instances are immutable once built.
class Bigraph {
public:
    Bigraph() = default;

    int node_count() const { return static_cast<int>(controls_.size()); }
    int site_count() const { return static_cast<int>(site_parent_.size()); }
    int region_count() const { return regions_; }
    int link_count() const { return static_cast<int>(link_names_.size()); }

    const Control& control(int node) const { return *controls_[node]; }
    const ControlPtr& control_ptr(int node) const { return controls_[node]; }
    Place parent(int node) const { return node_parent_[node]; }
    Place site_parent(int site) const { return site_parent_[site]; }
    int arity(int node) const { return port_offset_[node + 1] - port_offset_[node]; }
    int port_link(int node, int port) const { return port_link_[port_offset_[node] + port]; }

    /// Name of an outer-name link, nullopt for a closed edge.
    const std::optional<std::string>& link_name(int link) const { return link_names_[link]; }
    bool is_closed(int link) const { return !link_names_[link].has_value(); }
    std::optional<int> outer_link(const std::string& name) const;

    /// inner name -> link
    const std::map<std::string, int>& inner_links() const { return inner_; }

    Interface inner_face() const;
    Interface outer_face() const;
    bool is_ground() const { return site_parent_.empty() && inner_.empty(); }

    /// Direct children of each place (nodes only), in index order.
    std::vector<std::vector<int>> node_children_of_regions() const;
    std::vector<std::vector<int>> node_children_of_nodes() const;

    /// Ports (node, index) on each link, in node order.
    std::vector<std::vector<std::pair<int, int>>> link_ports() const;
    /// Number of ports plus inner names on each link.
    std::vector<int> link_point_counts() const;

    /// Closed edges with no points removed.
    Bigraph lean() const;

    /// First violated solidity clause, or nullopt when solid.
    std::optional<std::string> solidity_violation() const;
    bool is_solid() const { return !solidity_violation().has_value(); }

    /// Human-readable dump, one entity per line.
    std::string debug_string() const;

    friend bool operator==(const Bigraph& a, const Bigraph& b);

private:
    friend class BigraphBuilder;

    std::vector<ControlPtr> controls_;
    std::vector<Place> node_parent_;
    std::vector<int> port_offset_{0};
    std::vector<int> port_link_;
    std::vector<Place> site_parent_;
    int regions_ = 0;
    std::vector<std::optional<std::string>> link_names_;
    std::map<std::string, int> inner_;
};

/// Incremental construction of a Bigraph; build() checks every structural
/// invariant and throws bigprob::Error on violation.
class BigraphBuilder {
public:
    int add_region();
    int add_node(ControlPtr control, Place parent);
    int add_site(Place parent);
    /// Outer-name link; throws NameError on duplicates.
    int add_outer(const std::string& name);
    int add_edge();
    void link_port(int node, int port, int link);
    void add_inner(const std::string& name, int link);
    void set_parent(int node, Place parent);

    int region_count() const { return b_.regions_; }
    int node_count() const { return b_.node_count(); }

    Bigraph build() &&;

private:
    Bigraph b_;
    std::map<std::string, int> outer_;
};

// Elementary bigraphs.

/// ⟨0,∅⟩ → ⟨0,∅⟩.
Bigraph empty_bigraph();
/// A single empty region.
Bigraph one();
/// A single region containing a single site.
Bigraph site_bigraph();
/// `width` sites in their own regions, each name linked inner to outer.
Bigraph identity(int width, const std::set<std::string>& names);
/// One node of the given control with ports linked to `names` (repeats
/// share a link). Non-atomic ions contain a site.
Bigraph ion(ControlPtr control, const std::vector<std::string>& names);

// Algebra.

/// outer ∘ inner.
Bigraph compose(const Bigraph& outer, const Bigraph& inner);
/// Juxtaposition with disjoint names.
Bigraph tensor(const Bigraph& left, const Bigraph& right);
/// Juxtaposition fusing shared outer names; inner names stay disjoint.
Bigraph parallel(const Bigraph& left, const Bigraph& right);
/// Both operands of width 1 merged into a single region; shared outer
/// names fuse.
Bigraph merge_parallel(const Bigraph& left, const Bigraph& right);
/// n-fold merge_parallel; n = 0 gives one().
Bigraph merge_power(int n, const Bigraph& b);
/// Outer name turned into a closed edge.
Bigraph close_name(const Bigraph& b, const std::string& name);
/// Nesting: `inner` placed in the sites of `outer`, outer names shared.
Bigraph nest(const Bigraph& outer, const Bigraph& inner);
/// Renames outer names per the map; merging two names fuses the links.
Bigraph rename_outer(const Bigraph& b, const std::map<std::string, std::string>& renaming);

}  // namespace bigprob
