#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bigprob/error.hpp"
#include "bigprob/reactive.hpp"
#include "bigprob/scalar.hpp"

namespace bigprob {

enum class Optimum { Min, Max };

struct SolverOptions {
    double tolerance = 1e-9;
    std::size_t max_iterations = 1'000'000;
};

/// Value iteration did not settle; carries the last iterate.
class NonConvergence : public AnalysisError {
public:
    NonConvergence(std::size_t iterations, std::vector<double> last);
    const std::vector<double>& last() const noexcept { return last_; }

private:
    std::vector<double> last_;
};

struct IterativeResult {
    double value = 0.0;          ///< at the initial state
    std::size_t iterations = 0;
    std::vector<double> values;  ///< per state
};

/// States carrying `label`. The name `init` selects state 0 unless a
/// predicate of that name exists. Throws AnalysisError for unknown labels.
std::vector<char> goal_states(const TransitionSystem& ts, const std::string& label);

/// Probability of reaching `label` within `steps` steps of a DTMC. Exact
/// when every probability is rational and no intermediate overflows.
Scalar dtmc_bounded_reach(const TransitionSystem& ts, const std::string& label, std::size_t steps);

/// Probability of staying clear of `label` for `steps` steps, computed
/// directly rather than as 1 - reach, so tiny values keep their precision.
double dtmc_bounded_miss(const TransitionSystem& ts, const std::string& label, std::size_t steps);

/// Unbounded reachability on a DTMC by value iteration from below.
IterativeResult dtmc_reach(const TransitionSystem& ts, const std::string& label, const SolverOptions& options = {});

/// Unbounded reachability on a CTMC through its embedded chain.
IterativeResult ctmc_reach(const TransitionSystem& ts, const std::string& label, const SolverOptions& options = {});

/// The jump chain of a CTMC; states without exit rate become absorbing.
TransitionSystem embedded_chain(const TransitionSystem& ctmc);

double mdp_bounded_reach(const TransitionSystem& ts, const std::string& label, std::size_t steps, Optimum opt);

/// Expected reward accumulated over `horizon` steps. Each step earns the
/// current state's reward plus the chosen action's reward; states without
/// actions keep earning their state reward.
double mdp_expected_cost(const TransitionSystem& ts, std::size_t horizon, Optimum opt);

/// The DTMC obtained by fixing one choice per state (-1 for none).
TransitionSystem apply_policy(const TransitionSystem& mdp, const std::vector<int>& policy);

struct Query {
    enum class Kind { BoundedReach, Reach, MdpReach, MdpCost };
    Kind kind = Kind::Reach;
    std::optional<Optimum> optimum;  ///< set for Pmin/Pmax/Rmin/Rmax
    std::string label;
    std::size_t horizon = 0;
};

/// Parses `P=? [ F<=N l ]`, `P=? [ F l ]`, `Pmin=?`/`Pmax=? [ F<=N l ]`,
/// `Rmin=?`/`Rmax=? [ C<=K ]`. Labels may be quoted. Throws AnalysisError.
Query parse_query(std::string_view text);

struct QueryResult {
    Scalar value;
    std::optional<std::size_t> iterations;
};

QueryResult evaluate(const TransitionSystem& ts, const Query& query, const SolverOptions& options = {});

}  // namespace bigprob
