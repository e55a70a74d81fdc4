#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gctr/graph.hpp"
#include "gctr/normalize.hpp"

namespace gctr {

struct SolverConfig {
  double lambda_attacker = 2.0;  // expected attacker steps per inspection
  double lambda_defender = 1.0;  // inspection-window rate (documentation)
  std::optional<NodeId> start;   // attacker start override; default = root
  double tolerance = 1e-9;
  int path_ceiling = kDefaultPathCeiling;
  // When set, the attacker strategy space is every (path, start) pair
  // instead of paths starting at the root.
  bool general_start = false;
};

/// Truncated, score-gated position distribution over a node sequence.
struct PositionDistribution {
  std::vector<NodeId> nodes;
  std::vector<double> probabilities;  // sums to 1
};

/// One attacker pure strategy: a path, entered at `start_index` (always 0
/// unless SolverConfig::general_start).
struct PayoffColumn {
  int path_index = 0;
  int start_index = 0;
};

/// Rows: defendable nodes (non-root, non-vulnerable, non-artificial),
/// ascending. Entry = attacker success probability; inspecting an
/// interior node of the chosen path cuts it to 0.
struct PayoffMatrix {
  std::vector<NodeId> rows;
  std::vector<AttackPath> paths;
  std::vector<PayoffColumn> cols;
  std::vector<std::vector<double>> values;  // rows x cols
  bool degenerate = false;
  std::string degenerate_reason;  // no_defendable_nodes | undefendable_path
};

struct PathStrategy {
  int path_id = 0;  // 1-based, lexicographic enumeration order
  AttackPath path;
  double probability = 0.0;
};

struct EquilibriumSolution {
  std::vector<std::pair<NodeId, double>> defender;  // every defendable node
  std::vector<PathStrategy> attacker;               // every enumerated path
  // Per-column mix when the column space is richer than one-per-path
  // (general_start); empty otherwise.
  std::vector<double> column_probabilities;
  double value = 0.0;
  bool degenerate = false;
  std::string degenerate_reason;
};

double poisson_pmf(int k, double lambda);

/// Weight of the node at step distance d: pmf(d; lambda) times the
/// product of edge scores up to it; normalized over the sequence. A zero
/// score blocks everything past it.
PositionDistribution position_distribution(
    const std::vector<NodeId>& path_nodes,
    const std::vector<double>& edge_scores, const SolverConfig& config);

/// Distribution over the path's real nodes (the terminal artificial leaf
/// is an alias of its vulnerable parent and carries no extra step).
PositionDistribution position_distribution(const AttackPath& path,
                                           const NormalizedGraph& scored,
                                           const SolverConfig& config);

PayoffMatrix build_payoff_matrix(const NormalizedGraph& scored,
                                 const std::vector<AttackPath>& paths,
                                 const SolverConfig& config);

struct ZeroSumSolution {
  double value = 0.0;
  std::vector<double> row_strategy;  // minimizer
  std::vector<double> col_strategy;  // maximizer
};

/// Minimax solution of the zero-sum game where rows minimize and columns
/// maximize. Deterministic (Bland pivoting from a fixed start).
ZeroSumSolution solve_zero_sum(const std::vector<std::vector<double>>& matrix);

/// enumerate -> build -> solve, with the documented special cases:
/// a single path gets attacker probability 1 and value 0; a game with no
/// defendable interior reports value 0 flagged degenerate.
EquilibriumSolution solve_equilibrium(const NormalizedGraph& scored,
                                      const SolverConfig& config = {});

struct VerificationReport {
  bool pass = false;
  double worst_deviation = 0.0;
  std::vector<std::string> notes;
};

/// Nash check: strategies normalized and no pure-strategy deviation
/// improves either player by more than tol.
VerificationReport verify_equilibrium(const PayoffMatrix& matrix,
                                      const EquilibriumSolution& solution,
                                      double tol);

/// The three output tables (defender, attacker, equilibrium block),
/// six-decimal fixed point.
std::string format_solution_tables(const EquilibriumSolution& solution,
                                   const NormalizedGraph& scored);

}  // namespace gctr
