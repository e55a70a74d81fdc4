#include "gctr/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace gctr {

namespace {

constexpr double kPivotEps = 1e-11;

std::string format_fixed(double value, int precision = 6) {
  if (value == 0.0) value = 0.0;  // normalize -0.0
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", precision, value);
  return buffer;
}

// Dense tableau simplex for: maximize c.x subject to A x <= b, x >= 0,
// with b >= 0 (the slack basis is feasible). Bland's rule on both the
// entering and leaving choices keeps pivoting deterministic and free of
// cycling. Returns the primal optimum, objective value, and the dual
// vector read off the slack columns of the final objective row.
struct SimplexResult {
  double objective = 0.0;
  std::vector<double> primal;
  std::vector<double> dual;
};

SimplexResult simplex_max(const std::vector<std::vector<double>>& A,
                          const std::vector<double>& b,
                          const std::vector<double>& c) {
  const int m = static_cast<int>(A.size());
  const int n = static_cast<int>(c.size());
  std::vector<std::vector<double>> T(
      m + 1, std::vector<double>(n + m + 1, 0.0));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) T[i][j] = A[i][j];
    T[i][n + i] = 1.0;
    T[i][n + m] = b[i];
  }
  for (int j = 0; j < n; ++j) T[m][j] = -c[j];

  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  const long long max_iterations = 10000 + 100LL * (n + m);
  for (long long iteration = 0;; ++iteration) {
    if (iteration > max_iterations) {
      throw DomainError("simplex failed to converge");
    }
    int entering = -1;
    for (int j = 0; j < n + m; ++j) {
      if (T[m][j] < -kPivotEps) {
        entering = j;
        break;  // Bland: lowest index
      }
    }
    if (entering < 0) break;  // optimal

    int leaving = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < m; ++i) {
      if (T[i][entering] > kPivotEps) {
        double ratio = T[i][n + m] / T[i][entering];
        if (leaving < 0 || ratio < best_ratio - kPivotEps ||
            (std::abs(ratio - best_ratio) <= kPivotEps &&
             basis[i] < basis[leaving])) {
          leaving = i;
          best_ratio = ratio;
        }
      }
    }
    if (leaving < 0) {
      throw DomainError("linear program is unbounded");
    }

    double pivot = T[leaving][entering];
    for (double& cell : T[leaving]) cell /= pivot;
    for (int i = 0; i <= m; ++i) {
      if (i == leaving) continue;
      double factor = T[i][entering];
      if (factor == 0.0) continue;
      for (int j = 0; j <= n + m; ++j) T[i][j] -= factor * T[leaving][j];
    }
    basis[leaving] = entering;
  }

  SimplexResult result;
  result.objective = T[m][n + m];
  result.primal.assign(n, 0.0);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) result.primal[basis[i]] = T[i][n + m];
  }
  result.dual.assign(m, 0.0);
  for (int i = 0; i < m; ++i) result.dual[i] = T[m][n + i];
  return result;
}

void clean_distribution(std::vector<double>& p) {
  double sum = 0.0;
  for (double& v : p) {
    if (v < 1e-12) v = 0.0;
    sum += v;
  }
  if (sum <= 0.0) throw DomainError("strategy collapsed to zero mass");
  for (double& v : p) v /= sum;
}

}  // namespace

double poisson_pmf(int k, double lambda) {
  if (k < 0) throw DomainError("Poisson pmf needs k >= 0");
  if (lambda <= 0.0) throw DomainError("Poisson rate must be positive");
  double p = std::exp(-lambda);
  for (int i = 1; i <= k; ++i) p *= lambda / static_cast<double>(i);
  return p;
}

PositionDistribution position_distribution(
    const std::vector<NodeId>& path_nodes,
    const std::vector<double>& edge_scores, const SolverConfig& config) {
  if (path_nodes.empty()) throw DomainError("position distribution over empty path");
  if (edge_scores.size() + 1 != path_nodes.size()) {
    throw DomainError("edge score count must be path length minus one");
  }
  PositionDistribution dist;
  dist.nodes = path_nodes;
  dist.probabilities.resize(path_nodes.size());
  double gate = 1.0;  // product of edge scores up to the current node
  double sum = 0.0;
  for (std::size_t d = 0; d < path_nodes.size(); ++d) {
    if (d > 0) gate *= edge_scores[d - 1];
    double w = poisson_pmf(static_cast<int>(d), config.lambda_attacker) * gate;
    dist.probabilities[d] = w;
    sum += w;
  }
  // pmf(0) > 0 keeps the start positive, so the total cannot vanish.
  if (sum <= 0.0) throw DomainError("position weights summed to zero");
  for (double& p : dist.probabilities) p /= sum;
  return dist;
}

namespace {

std::vector<double> path_edge_scores(const AttackPath& path,
                                     const NormalizedGraph& scored) {
  std::vector<double> scores;
  const std::vector<NodeId>& nodes = path.nodes;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    std::optional<double> s = scored.graph.edge_score(nodes[i], nodes[i + 1]);
    if (!s) {
      throw DomainError("edge " + std::to_string(nodes[i]) + "->" +
                        std::to_string(nodes[i + 1]) +
                        " is unscored; run scoring first");
    }
    scores.push_back(*s);
  }
  return scores;
}

bool defendable(const AttackNode& node, NodeId root) {
  return node.id != root && !node.vulnerable && !node.artificial;
}

}  // namespace

PositionDistribution position_distribution(const AttackPath& path,
                                           const NormalizedGraph& scored,
                                           const SolverConfig& config) {
  std::vector<NodeId> real = path.real_nodes();
  if (real.empty()) throw DomainError("attack path has no real nodes");
  std::vector<double> scores = path_edge_scores(path, scored);
  scores.resize(real.size() - 1);  // drop the artificial leaf hop
  return position_distribution(real, scores, config);
}

PayoffMatrix build_payoff_matrix(const NormalizedGraph& scored,
                                 const std::vector<AttackPath>& paths,
                                 const SolverConfig& config) {
  PayoffMatrix matrix;
  matrix.paths = paths;
  for (const auto& [id, node] : scored.graph.nodes()) {
    if (defendable(node, scored.root)) matrix.rows.push_back(id);
  }

  bool undefendable_path = false;
  for (int p = 0; p < static_cast<int>(paths.size()); ++p) {
    std::vector<NodeId> real = paths[static_cast<size_t>(p)].real_nodes();
    bool has_interior = false;
    for (NodeId id : real) {
      if (defendable(scored.graph.node(id), scored.root)) {
        has_interior = true;
        break;
      }
    }
    if (!has_interior) undefendable_path = true;

    if (config.general_start) {
      int last_start = std::max<int>(0, static_cast<int>(real.size()) - 2);
      for (int s = 0; s <= last_start; ++s) {
        matrix.cols.push_back(PayoffColumn{p, s});
      }
    } else {
      int start = 0;
      if (config.start) {
        auto it = std::find(real.begin(), real.end(), *config.start);
        if (it != real.end()) {
          start = static_cast<int>(it - real.begin());
        } else {
          start = -1;  // path infeasible from the configured start
        }
      }
      matrix.cols.push_back(PayoffColumn{p, start});
    }
  }

  if (matrix.rows.empty()) {
    matrix.degenerate = true;
    matrix.degenerate_reason = "no_defendable_nodes";
  } else if (undefendable_path) {
    matrix.degenerate = true;
    matrix.degenerate_reason = "undefendable_path";
  }

  matrix.values.assign(matrix.rows.size(),
                       std::vector<double>(matrix.cols.size(), 0.0));
  for (std::size_t j = 0; j < matrix.cols.size(); ++j) {
    const PayoffColumn& col = matrix.cols[j];
    const AttackPath& path = matrix.paths[static_cast<size_t>(col.path_index)];
    std::vector<NodeId> real = path.real_nodes();
    if (col.start_index < 0) continue;  // infeasible start: success 0

    std::vector<double> scores = path_edge_scores(path, scored);
    scores.resize(real.size() - 1);
    std::vector<NodeId> suffix(real.begin() + col.start_index, real.end());
    std::vector<double> suffix_scores(scores.begin() + col.start_index,
                                      scores.end());
    PositionDistribution dist =
        position_distribution(suffix, suffix_scores, config);
    double success = dist.probabilities.back();

    std::set<NodeId> interior(suffix.begin(), suffix.end());
    for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
      NodeId c = matrix.rows[r];
      bool cuts = interior.count(c) != 0 &&
                  defendable(scored.graph.node(c), scored.root);
      matrix.values[r][j] = cuts ? 0.0 : success;
    }
  }
  return matrix;
}

ZeroSumSolution solve_zero_sum(const std::vector<std::vector<double>>& matrix) {
  const int m = static_cast<int>(matrix.size());
  if (m == 0) throw DomainError("payoff matrix has no rows");
  const int n = static_cast<int>(matrix[0].size());
  if (n == 0) throw DomainError("payoff matrix has no columns");
  double lo = matrix[0][0];
  for (const auto& row : matrix) {
    if (static_cast<int>(row.size()) != n) {
      throw DomainError("payoff matrix is ragged");
    }
    for (double v : row) lo = std::min(lo, v);
  }

  // The tableau has one constraint row per column player strategy. With
  // far more columns than rows (many attack paths, few defendable
  // nodes), solving the negated transpose keeps it small: the column
  // player of -A^T is our row player, and the value flips sign.
  if (n > m) {
    std::vector<std::vector<double>> transposed(
        n, std::vector<double>(m, 0.0));
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) transposed[j][i] = -matrix[i][j];
    }
    ZeroSumSolution flipped = solve_zero_sum(transposed);
    ZeroSumSolution solution;
    solution.value = -flipped.value;
    solution.row_strategy = flipped.col_strategy;
    solution.col_strategy = flipped.row_strategy;
    return solution;
  }

  // Shift so every entry is >= 1, then solve the reciprocal LP
  //   max sum(p)  s.t.  B^T p <= 1, p >= 0
  // whose optimum gives the minimizing row mix x = p / sum(p) and game
  // value 1 / sum(p); the dual of the same tableau yields the column mix.
  const double shift = 1.0 - lo;
  std::vector<std::vector<double>> constraints(
      n, std::vector<double>(m, 0.0));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) constraints[j][i] = matrix[i][j] + shift;
  }
  SimplexResult lp = simplex_max(constraints, std::vector<double>(n, 1.0),
                                 std::vector<double>(m, 1.0));
  if (lp.objective <= 0.0) {
    throw DomainError("zero-sum reduction produced a non-positive optimum");
  }

  ZeroSumSolution solution;
  solution.value = 1.0 / lp.objective - shift;
  solution.row_strategy = lp.primal;
  clean_distribution(solution.row_strategy);
  solution.col_strategy = lp.dual;
  clean_distribution(solution.col_strategy);
  return solution;
}

EquilibriumSolution solve_equilibrium(const NormalizedGraph& scored,
                                      const SolverConfig& config) {
  std::vector<AttackPath> paths =
      enumerate_attack_paths(scored, config.path_ceiling);
  if (paths.empty()) {
    throw DomainError("no_attack_surface: the graph has no attack paths");
  }
  PayoffMatrix matrix = build_payoff_matrix(scored, paths, config);

  EquilibriumSolution solution;
  for (NodeId id : matrix.rows) solution.defender.emplace_back(id, 0.0);
  for (int p = 0; p < static_cast<int>(paths.size()); ++p) {
    solution.attacker.push_back(
        {p + 1, paths[static_cast<size_t>(p)], 0.0});
  }

  if (matrix.degenerate) {
    // Honors the documented behavior: with no defendable interior the
    // reported value is 0, flagged so callers can tell it from a real
    // defender win. The attacker mass goes to the strongest uncuttable
    // path for determinism.
    solution.degenerate = true;
    solution.degenerate_reason = matrix.degenerate_reason;
    solution.value = 0.0;
    int best = -1;
    double best_mass = -1.0;
    for (std::size_t j = 0; j < matrix.cols.size(); ++j) {
      if (matrix.cols[j].start_index != 0) continue;
      double mass = 0.0;
      bool uncut = true;
      for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
        mass = std::max(mass, matrix.values[r][j]);
        if (matrix.values[r][j] == 0.0) uncut = false;
      }
      if (matrix.rows.empty()) {
        const AttackPath& path = matrix.paths[matrix.cols[j].path_index];
        SolverConfig c = config;
        mass = position_distribution(path, scored, c).probabilities.back();
        uncut = true;
      }
      if (uncut && mass > best_mass + 1e-15) {
        best_mass = mass;
        best = matrix.cols[j].path_index;
      }
    }
    if (best < 0) best = 0;
    solution.attacker[static_cast<size_t>(best)].probability = 1.0;
    return solution;
  }

  if (paths.size() == 1) {
    // Single exploitation path: the attacker commits to it, and any
    // inspection of its interior cuts it, so the value is exactly 0.
    solution.attacker[0].probability = 1.0;
    solution.value = 0.0;
    for (NodeId id : paths[0].real_nodes()) {
      if (defendable(scored.graph.node(id), scored.root)) {
        for (auto& [node, prob] : solution.defender) {
          if (node == id) prob = 1.0;
        }
        break;  // lowest-id interior node
      }
    }
    return solution;
  }

  ZeroSumSolution zs = solve_zero_sum(matrix.values);
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    solution.defender[r].second = zs.row_strategy[r];
  }
  for (std::size_t j = 0; j < matrix.cols.size(); ++j) {
    solution.attacker[static_cast<size_t>(matrix.cols[j].path_index)]
        .probability += zs.col_strategy[j];
  }
  if (matrix.cols.size() != matrix.paths.size()) {
    solution.column_probabilities = zs.col_strategy;
  }
  double max_entry = 0.0;
  for (const auto& row : matrix.values) {
    for (double v : row) max_entry = std::max(max_entry, v);
  }
  solution.value = std::clamp(zs.value, 0.0, max_entry);
  return solution;
}

VerificationReport verify_equilibrium(const PayoffMatrix& matrix,
                                      const EquilibriumSolution& solution,
                                      double tol) {
  VerificationReport report;
  if (solution.degenerate) {
    report.pass = true;
    report.notes.push_back(
        "degenerate game: reported value is the documented policy, not a "
        "minimax claim");
    return report;
  }
  bool per_path_cols = matrix.cols.size() == matrix.paths.size();
  if (matrix.rows.size() != solution.defender.size() ||
      matrix.paths.size() != solution.attacker.size() ||
      (!per_path_cols &&
       solution.column_probabilities.size() != matrix.cols.size())) {
    report.pass = false;
    report.notes.push_back("matrix and solution dimensions do not match");
    report.worst_deviation = 1.0;
    return report;
  }

  std::vector<double> x, y;
  double x_sum = 0.0, y_sum = 0.0;
  for (const auto& [id, p] : solution.defender) {
    x.push_back(p);
    x_sum += p;
  }
  if (per_path_cols) {
    for (const PathStrategy& ps : solution.attacker) {
      y.push_back(ps.probability);
      y_sum += ps.probability;
    }
  } else {
    for (double p : solution.column_probabilities) {
      y.push_back(p);
      y_sum += p;
    }
  }
  double worst = std::max(std::abs(x_sum - 1.0), std::abs(y_sum - 1.0));
  for (double v : x) worst = std::max(worst, -v);
  for (double v : y) worst = std::max(worst, -v);

  // Best pure responses against each mix.
  double defender_guarantee = 0.0;  // attacker's best column vs x
  for (std::size_t j = 0; j < matrix.cols.size(); ++j) {
    double expected = 0.0;
    for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
      expected += x[r] * matrix.values[r][j];
    }
    defender_guarantee = std::max(defender_guarantee, expected);
  }
  double attacker_guarantee = 0.0;  // defender's best row vs y
  bool first = true;
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    double expected = 0.0;
    for (std::size_t j = 0; j < matrix.cols.size(); ++j) {
      expected += matrix.values[r][j] * y[j];
    }
    if (first || expected < attacker_guarantee) attacker_guarantee = expected;
    first = false;
  }

  worst = std::max(worst, defender_guarantee - solution.value);
  worst = std::max(worst, solution.value - attacker_guarantee);
  report.worst_deviation = worst;
  report.pass = worst <= tol;
  if (!report.pass) {
    report.notes.push_back("worst pure deviation " + format_fixed(worst, 9) +
                           " exceeds tolerance");
  }
  return report;
}

std::string format_solution_tables(const EquilibriumSolution& solution,
                                   const NormalizedGraph& scored) {
  std::string out;

  std::vector<std::pair<NodeId, double>> defender = solution.defender;
  std::stable_sort(defender.begin(), defender.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  out += "Defender Strategy\n";
  out += "Node ID    Probability\n";
  for (const auto& [id, p] : defender) {
    std::string label = scored.graph.node(id).label;
    out += label + std::string(label.size() < 11 ? 11 - label.size() : 1, ' ') +
           format_fixed(p) + "\n";
  }
  if (defender.empty()) out += "(no defendable nodes)\n";
  out += "\n";

  std::vector<PathStrategy> attacker = solution.attacker;
  std::stable_sort(attacker.begin(), attacker.end(),
                   [](const PathStrategy& a, const PathStrategy& b) {
                     if (a.probability != b.probability) {
                       return a.probability > b.probability;
                     }
                     return a.path_id < b.path_id;
                   });
  std::vector<std::string> sequences;
  std::size_t width = 13;  // at least the header width
  for (const PathStrategy& ps : attacker) {
    std::string seq;
    for (NodeId id : ps.path.real_nodes()) {
      if (!seq.empty()) seq += " -> ";
      seq += scored.graph.node(id).label;
    }
    width = std::max(width, seq.size());
    sequences.push_back(std::move(seq));
  }
  out += "Attacker Strategy\n";
  out += "Path ID    Path Sequence" + std::string(width - 13, ' ') +
         "    Probability\n";
  for (std::size_t i = 0; i < attacker.size(); ++i) {
    std::string id = std::to_string(attacker[i].path_id);
    out += id + std::string(id.size() < 11 ? 11 - id.size() : 1, ' ');
    out += sequences[i] + std::string(width - sequences[i].size() + 4, ' ');
    out += format_fixed(attacker[i].probability) + "\n";
  }
  out += "\n";

  out += "Game Equilibrium\n";
  out += "Defender can keep attacker success below: " +
         format_fixed(solution.value) + "\n";
  out += "Attacker can guarantee success probability of: " +
         format_fixed(solution.value) + "\n";
  if (solution.degenerate) {
    out += "Note: degenerate game (" + solution.degenerate_reason +
           "); reported value follows the no-defendable-interior rule.\n";
  }
  return out;
}

}  // namespace gctr
