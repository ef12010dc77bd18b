#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bigprob/bigraph.hpp"

namespace bigprob {

/// An embedding of a redex into a target bigraph.
struct Match {
    std::vector<int> node_map;          ///< redex node -> target node
    std::vector<int> link_map;          ///< redex link -> target link
    std::vector<Place> region_parent;   ///< redex region -> target place holding it

    friend bool operator==(const Match&, const Match&) = default;
};

/// When two embeddings count as the same occurrence.
enum class OccurrenceIdentity {
    /// Same decomposition: embeddings differing by a redex automorphism that
    /// fixes regions, sites and names are identified.
    Decomposition,
    /// Every distinct embedding counts.
    Embedding,
};

struct MatchOptions {
    OccurrenceIdentity identity = OccurrenceIdentity::Decomposition;
};

/// All occurrences of `redex` in `target`, each once, in a deterministic
/// order. Throws SolidityError for a non-solid redex and MatchError for a
/// redex with inner names.
std::vector<Match> occurrences(const Bigraph& redex, const Bigraph& target, MatchOptions options = {});

/// True iff at least one occurrence exists.
bool occurs(const Bigraph& redex, const Bigraph& target);

/// Reason `m` is not an occurrence of `redex` in `target`, or nullopt.
std::optional<std::string> match_violation(const Bigraph& redex, const Bigraph& target, const Match& m);

/// Witness target = context ∘ (redex ⊗ id) ∘ parameter for a match. The
/// identity has `passthrough_width` sites and the names `passthrough_names`.
struct Decomposition {
    Bigraph context;
    Bigraph parameter;
    int passthrough_width = 0;
    std::set<std::string> passthrough_names;

    /// Recomposes the three parts around `middle` (the redex or a reactum).
    Bigraph assemble(const Bigraph& middle) const;
};

Decomposition decompose(const Bigraph& redex, const Bigraph& target, const Match& m);

/// Replaces the occurrence `m` of `redex` in ground `g` by `reactum`.
/// Reactum site i receives the parameter of redex site i. The result is
/// lean. Throws MatchError if `m` is not an occurrence.
Bigraph rewrite(const Bigraph& g, const Bigraph& redex, const Bigraph& reactum, const Match& m);

/// Rewrite results grouped by canonical key.
struct RewriteOutcome {
    std::string key;
    Bigraph result;
    int count = 0;  ///< occurrences yielding this result
};

/// Applies a rule at every occurrence; outcomes sorted by key.
std::vector<RewriteOutcome> apply_rule_all(const Bigraph& g, const Bigraph& redex, const Bigraph& reactum,
                                           MatchOptions options = {});

/// Throws unless redex and reactum form a valid rule: solid redex without
/// inner names and equal interfaces.
void check_rule(const Bigraph& redex, const Bigraph& reactum, const std::string& name);

}  // namespace bigprob
