#pragma once

#include <string>

#include "bigprob/bigraph.hpp"

namespace bigprob {

/// Canonical encoding of `b` up to renaming of nodes and closed edges,
/// after idle closed edges are discarded. Interfaces are kept fixed:
/// regions, sites and names are part of the encoding in order.
std::string canonical_form(const Bigraph& b);

/// canonical_form restricted to ground bigraphs; throws GroundError otherwise.
std::string canonical_key(const Bigraph& g);

/// True iff the lean forms of two ground bigraphs are equal up to a
/// renaming of nodes and closed edges.
bool support_equivalent(const Bigraph& f, const Bigraph& g);

}  // namespace bigprob
