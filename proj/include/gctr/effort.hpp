#pragma once

#include "gctr/graph.hpp"
#include "gctr/normalize.hpp"
#include "gctr/session_log.hpp"

namespace gctr {

/// Simplex weights for the effort convex combination.
struct EffortWeights {
  double msg = 1.0 / 3.0;
  double tok = 1.0 / 3.0;
  double cost = 1.0 / 3.0;

  static EffortWeights uniform() { return {}; }
  /// Cloud-API adjustment: cost and tokens correlate, so cost weight
  /// drops to 0.3 and token weight rises to 0.4.
  static EffortWeights cloud_api() { return {0.3, 0.4, 0.3}; }

  void validate() const;  // non-negative, summing to 1 within 1e-12
};

/// Per-edge raw metrics: inclusive message span m to the nearest
/// vulnerable descendant, tokens t and cost c over that span.
struct EdgeMetrics {
  int m = 0;
  long long t = 0;
  double c = 0.0;
  bool unreachable = false;      // no vulnerable descendant -> score 0
  bool anchors_missing = false;  // descendants unanchored -> fallback 0.5
};

/// 1 - (m-1)/(J-1); a single-message log degenerates to 1.
double message_effort(int m, int J);

/// 1 - t/T; an empty log (T = 0) degenerates to 1.
double token_effort(long long t, long long T);

/// 1 - c/C; a costless log (C = 0) degenerates to 1.
double cost_effort(double c, double C);

/// Proportional cost estimate for y tokens given x tokens cost cost_x.
double estimate_cost(long long y, long long x, double cost_x);

/// Convex combination of the three normalized efforts.
double effort_score(const EffortWeights& weights, double phi_msg,
                    double phi_tok, double phi_cost);

/// Measures the edge against the log. Both endpoints must carry anchors
/// (artificial nodes inherit their parent's). The span is minimized over
/// all vulnerable descendants reachable from the edge target, the target
/// itself included when vulnerable.
EdgeMetrics edge_metrics(const AttackEdge& edge,
                         const NormalizedGraph& normalized,
                         const SessionLog& log);

/// Scores every non-artificial edge with the convex effort combination;
/// artificial vulnerable-to-leaf edges keep 1.0, unreachable edges get
/// 0.0, edges with missing anchors fall back to 0.5 with a warning.
NormalizedGraph score_edges(const NormalizedGraph& normalized,
                            const SessionLog& log,
                            const EffortWeights& weights);

/// Assigns `value` to every unscored non-artificial edge (used when no
/// session log is available, e.g. scripted loop runs).
NormalizedGraph fill_missing_scores(NormalizedGraph normalized,
                                    double value = 0.5);

}  // namespace gctr
