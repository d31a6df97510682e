#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bicex/model.hpp"

namespace bicex {

struct AuditOptions {
  std::int64_t min_cell = 200;
  double ci_level = 0.95;
  double epsilon = 0.01;
  int threads = 0;
};

/// One pooled cell: rounds sharing a structural role where arm `recommended`
/// was played, compared against `competitor`. The slack estimates
/// E[mu_i - mu_j | recommendation] with a replicate-clustered standard error.
struct AuditCell {
  std::string role;
  int recommended = 0;
  int competitor = 0;
  std::int64_t events = 0;   // total rounds pooled across replicates
  std::int64_t clusters = 0; // replicates contributing at least one round
  double slack = 0.0;
  double std_error = 0.0;
  double lcb = 0.0;
  double ucb = 0.0;
  bool conclusive = false;
  bool pass = false;
};

struct AuditReport {
  std::vector<AuditCell> cells;
  int replicates = 0;
  double epsilon = 0.0;
  double ci_level = 0.0;
  std::int64_t min_cell = 0;
  bool pass = false;
  int conclusive_cells = 0;
  int inconclusive_cells = 0;
  int failing_cells = 0;

  std::string to_json() const;
};

/// Produces one full-pipeline transcript for the given replicate index on a
/// fresh prior draw; the audit never inspects anything beyond the transcript.
using TranscriptRunner = std::function<Transcript(std::uint64_t replicate)>;

/// Statistical BIC audit: pools rounds by (role, recommended arm), compares
/// each recommended arm against every competitor, and passes iff every cell
/// with at least min_cell events has its lower confidence bound above
/// -epsilon. Smaller cells are reported as inconclusive and do not affect the
/// verdict.
AuditReport audit_bic(const TranscriptRunner& runner, int replicates,
                      const AuditOptions& opts = {});

}  // namespace bicex
