#include "bicex/audit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "json.hpp"

#include "bicex/parallel.hpp"
#include "bicex/stats.hpp"

namespace bicex {

namespace {

using CellKey = std::tuple<std::string, int, int>;

struct CellSums {
  std::int64_t events = 0;
  std::int64_t clusters = 0;
  double s = 0.0;
  double n2 = 0.0;
  double ns = 0.0;
  double s2 = 0.0;
};

using CellMap = std::map<CellKey, CellSums>;

void fold_replicate(CellMap& into, const std::map<CellKey, std::pair<std::int64_t, double>>& rep) {
  for (const auto& [key, ns] : rep) {
    CellSums& cell = into[key];
    const double n = static_cast<double>(ns.first);
    cell.events += ns.first;
    cell.clusters += 1;
    cell.s += ns.second;
    cell.n2 += n * n;
    cell.ns += n * ns.second;
    cell.s2 += ns.second * ns.second;
  }
}

}  // namespace

AuditReport audit_bic(const TranscriptRunner& runner, int replicates,
                      const AuditOptions& opts) {
  if (!runner) throw std::invalid_argument("audit_bic: missing transcript runner");
  if (replicates < 1000) throw std::invalid_argument("audit_bic: replicates must be >= 1000");
  if (opts.epsilon < 0.0) throw std::invalid_argument("audit_bic: epsilon must be nonnegative");
  if (opts.min_cell < 1) throw std::invalid_argument("audit_bic: min_cell must be positive");

  auto build = [&](std::int64_t lo, std::int64_t hi) {
    CellMap acc;
    for (std::int64_t r = lo; r < hi; ++r) {
      const Transcript t = runner(static_cast<std::uint64_t>(r));
      const int m = t.num_arms();
      std::map<CellKey, std::pair<std::int64_t, double>> rep;
      for (const TranscriptRow& row : t.rows) {
        const std::string& role = t.roles.at(row.role);
        const double mu_i = t.mean_of(row.arm, row.context);
        for (int j = 0; j < m; ++j) {
          if (j == row.arm) continue;
          auto& [count, sum] = rep[{role, row.arm, j}];
          count += 1;
          sum += mu_i - t.mean_of(j, row.context);
        }
      }
      fold_replicate(acc, rep);
    }
    return acc;
  };
  auto merge = [](CellMap& into, CellMap&& part) {
    for (auto& [key, sums] : part) {
      CellSums& cell = into[key];
      cell.events += sums.events;
      cell.clusters += sums.clusters;
      cell.s += sums.s;
      cell.n2 += sums.n2;
      cell.ns += sums.ns;
      cell.s2 += sums.s2;
    }
  };
  const CellMap cells = parallel_reduce<CellMap>(replicates, build, merge, opts.threads);

  AuditReport report;
  report.replicates = replicates;
  report.epsilon = opts.epsilon;
  report.ci_level = opts.ci_level;
  report.min_cell = opts.min_cell;
  report.pass = true;
  const double z = z_for_confidence(opts.ci_level);
  for (const auto& [key, sums] : cells) {
    AuditCell cell;
    cell.role = std::get<0>(key);
    cell.recommended = std::get<1>(key);
    cell.competitor = std::get<2>(key);
    cell.events = sums.events;
    cell.clusters = sums.clusters;
    const double n_total = static_cast<double>(sums.events);
    cell.slack = sums.s / n_total;
    double cluster_var = sums.s2 - 2.0 * cell.slack * sums.ns + cell.slack * cell.slack * sums.n2;
    cluster_var = std::max(cluster_var, 0.0);
    if (sums.clusters > 1) {
      const double correction =
          static_cast<double>(sums.clusters) / static_cast<double>(sums.clusters - 1);
      cell.std_error = std::sqrt(correction * cluster_var) / n_total;
    }
    cell.lcb = cell.slack - z * cell.std_error;
    cell.ucb = cell.slack + z * cell.std_error;
    cell.conclusive = sums.events >= opts.min_cell && sums.clusters >= 2;
    cell.pass = cell.conclusive && cell.lcb >= -opts.epsilon;
    if (cell.conclusive) {
      report.conclusive_cells += 1;
      if (!cell.pass) {
        report.failing_cells += 1;
        report.pass = false;
      }
    } else {
      report.inconclusive_cells += 1;
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

std::string AuditReport::to_json() const {
  nlohmann::ordered_json out;
  out["verdict"] = pass ? "PASS" : "FAIL";
  out["replicates"] = replicates;
  out["epsilon"] = epsilon;
  out["ci_level"] = ci_level;
  out["min_cell"] = min_cell;
  out["conclusive_cells"] = conclusive_cells;
  out["inconclusive_cells"] = inconclusive_cells;
  out["failing_cells"] = failing_cells;
  out["cells"] = nlohmann::ordered_json::array();
  for (const AuditCell& cell : cells) {
    nlohmann::ordered_json row;
    row["role"] = cell.role;
    row["recommended"] = cell.recommended + 1;
    row["competitor"] = cell.competitor + 1;
    row["events"] = cell.events;
    row["clusters"] = cell.clusters;
    row["slack"] = cell.slack;
    row["std_error"] = cell.std_error;
    row["lcb"] = cell.lcb;
    row["ucb"] = cell.ucb;
    row["status"] = cell.conclusive ? (cell.pass ? "pass" : "fail") : "inconclusive";
    out["cells"].push_back(std::move(row));
  }
  return out.dump(2) + "\n";
}

}  // namespace bicex
