#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bigprob/reactive.hpp"

namespace bigprob {

struct PrismOptions {
    /// Move action rewards onto marked copies of the successor states, for
    /// tools that cannot read transition rewards.
    bool rewards_as_states = false;
};

/// Explicit-format PRISM files. `srew` is present when some state reward is
/// nonzero, `trew` when some action reward is.
struct PrismBundle {
    std::string tra;
    std::string lab;
    std::optional<std::string> srew;
    std::optional<std::string> trew;
};

PrismBundle export_prism(const TransitionSystem& ts, const PrismOptions& options = {});

/// Writes `<stem>.tra` etc. into `dir` (created if missing). Returns the
/// manifest: file role -> path.
std::map<std::string, std::string> write_bundle(const PrismBundle& bundle, const std::string& dir,
                                                const std::string& stem);

/// Reads a bundle produced by export_prism back into a transition system
/// without bigraphs. Throws Error on malformed input.
TransitionSystem import_prism(ModelKind kind, const std::string& tra, const std::string& lab,
                              const std::optional<std::string>& srew = std::nullopt,
                              const std::optional<std::string>& trew = std::nullopt);

std::string export_dot(const TransitionSystem& ts);

/// Interfaces, nodes with parents and ports, sites, and links of one
/// bigraph as a JSON object; layout in docs/json-schema.md.
std::string bigraph_json(const Bigraph& g);

/// The whole system; each state embeds its bigraph in the bigraph_json
/// layout.
std::string export_json(const TransitionSystem& ts);

struct TraceStep {
    std::size_t step = 0;  ///< 1-based
    std::string state;     ///< canonical key of the state entered
    std::string via;       ///< rule or action applied; "-" for the delta self-loop
    double time = 0.0;     ///< elapsed time, stochastic systems only
};

/// Random run of up to `steps` reactions from the initial state. Action
/// systems pick uniformly among applicable actions. A stochastic
/// system stops early in a state with no outgoing rate, as does an action
/// or plain system with nothing applicable.
std::vector<TraceStep> simulate(const SystemSpec& spec, std::size_t steps, std::uint64_t seed);

/// 64-bit FNV-1a, used to abbreviate canonical keys in traces.
std::uint64_t fnv1a(const std::string& text);

}  // namespace bigprob
