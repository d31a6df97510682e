#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bicex/audit.hpp"
#include "bicex/config.hpp"
#include "bicex/experiment.hpp"
#include "bicex/metrics.hpp"
#include "bicex/parallel.hpp"
#include "bicex/stats.hpp"
#include "bicex/svg.hpp"

using namespace bicex;
namespace fs = std::filesystem;

namespace {

const char* kBetaTwoArm = R"({
  "arms": [{"kind": "beta", "alpha": 4, "beta": 2}, {"kind": "beta", "alpha": 2, "beta": 2}],
  "rewards": [{"kind": "bernoulli"}, {"kind": "bernoulli"}]
})";

const char* kOffsetPrior = R"({
  "arms": [{"kind": "gaussian", "mean": 1.0, "variance": 1.0}],
  "rewards": [{"kind": "gaussian", "noise_var": 1.0}, {"kind": "gaussian", "noise_var": 1.0}],
  "correlation": "offset",
  "offsets": [0.0, 0.2]
})";

std::string field_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<nothrow>";
}

std::string experiment_json(const std::string& algorithm, const std::string& prior,
                            std::int64_t horizon, const std::string& extra = "") {
  std::ostringstream out;
  out << "{\"seed\": 7, \"replicates\": 8, \"transcripts\": 1, \"horizon\": " << horizon
      << ", \"algorithm\": " << algorithm << ", \"prior\": " << prior << extra << "}";
  return out.str();
}

Transcript flat_transcript(std::vector<double> means, const std::vector<int>& arms) {
  Transcript t;
  t.means = std::move(means);
  const std::uint16_t role = t.role_id("play");
  for (std::size_t r = 0; r < arms.size(); ++r) {
    t.rows.push_back(
        TranscriptRow{static_cast<std::int64_t>(r) + 1, -1, arms[r], 0.0, role, {}, {}});
  }
  return t;
}

std::string jsonl_of(const Transcript& t) {
  std::ostringstream out;
  t.to_jsonl(out);
  return out.str();
}

std::string slurp_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / ("bicex_harness_" + leaf);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("experiment config parsing fills defaults and overrides") {
  const std::string text = experiment_json(
      R"({"kind": "reduction", "k": 2, "L": 9, "wrapped": "etc:3"})", kBetaTwoArm, 40,
      R"(, "name": "demo", "audit": {"replicates": 1200, "epsilon": 0.02},
         "constants": {"k": 2, "replicates": 21000})");
  const ExperimentConfig cfg = parse_experiment_config(text);

  CHECK(cfg.name == "demo");
  CHECK(cfg.seed == 7);
  CHECK(cfg.replicates == 8);
  CHECK(cfg.horizon == 40);
  CHECK(cfg.transcripts_to_write == 1);
  CHECK(cfg.raw_text == text);
  CHECK(cfg.algorithm.kind == "reduction");
  CHECK(cfg.algorithm.k == 2);
  CHECK(cfg.algorithm.L == 9);
  CHECK(cfg.algorithm.wrapped == "etc:3");
  CHECK_FALSE(cfg.algorithm.theta.has_value());
  REQUIRE(cfg.prior.has_value());
  CHECK(cfg.prior->num_arms() == 2);
  CHECK_FALSE(cfg.contextual_prior.has_value());
  REQUIRE(cfg.audit.has_value());
  CHECK(cfg.audit->replicates == 1200);
  CHECK(cfg.audit->epsilon == 0.02);
  CHECK(cfg.audit->min_cell == 200);
  REQUIRE(cfg.constants.has_value());
  CHECK(cfg.constants->k == 2);
  CHECK(cfg.constants->replicates == 21000);

  const ExperimentConfig lean = parse_experiment_config(
      experiment_json(R"({"kind": "standalone"})", kBetaTwoArm, 12));
  CHECK(lean.name == "experiment");
  CHECK_FALSE(lean.audit.has_value());
  CHECK_FALSE(lean.constants.has_value());
  CHECK(lean.algorithm.wrapped == "ucb1");
}

TEST_CASE("config errors carry the dotted field path") {
  CHECK(field_of([] { parse_experiment_config("not json"); }) == "<document>");
  CHECK(field_of([] { parse_experiment_config("{}"); }) == "algorithm");
  CHECK(field_of([] {
          parse_experiment_config(experiment_json(R"({"kind": "bogus"})", kBetaTwoArm, 5));
        }) == "algorithm.kind");
  CHECK(field_of([] { parse_experiment_config(R"({"algorithm": {"kind": "standalone"}})"); }) ==
        "prior");
  CHECK(field_of([] {
          parse_experiment_config(experiment_json(R"({"kind": "standalone"})", "{}", 5));
        }) == "prior.arms");
  CHECK(field_of([] {
          parse_experiment_config(experiment_json(R"({"kind": "standalone"})", kBetaTwoArm, 0));
        }) == "horizon");
  CHECK(field_of([] {
          parse_experiment_config(
              experiment_json(R"({"kind": "standalone"})", kBetaTwoArm, 5, R"(, "seed": -3)"));
        }) == "seed");

  const std::string no_noise = R"({
    "arms": [{"kind": "gaussian", "mean": 1.0, "variance": 1.0},
             {"kind": "gaussian", "mean": 0.5, "variance": 1.0}],
    "rewards": [{"kind": "gaussian"}, {"kind": "gaussian", "noise_var": 1.0}]
  })";
  CHECK(field_of([&] { parse_prior(no_noise); }) == "prior.rewards[0].noise_var");

  const std::string increasing = R"({
    "arms": [{"kind": "beta", "alpha": 2, "beta": 2}, {"kind": "beta", "alpha": 4, "beta": 2}],
    "rewards": [{"kind": "bernoulli"}, {"kind": "bernoulli"}]
  })";
  CHECK(field_of([&] { parse_prior(increasing); }) == "prior");
}

TEST_CASE("relabeling and policies are validated in context") {
  const std::string relabel_offset = R"({
    "arms": [{"kind": "gaussian", "mean": 1.0, "variance": 1.0}],
    "rewards": [{"kind": "gaussian", "noise_var": 1.0}, {"kind": "gaussian", "noise_var": 1.0}],
    "correlation": "offset", "offsets": [0.0, 0.2], "relabel": true
  })";
  CHECK(field_of([&] { parse_prior(relabel_offset); }) == "prior.relabel");

  const char* ctx_prior = R"({
    "contexts": {"weights": [0.5, 0.5]},
    "cells": [{"kind": "beta", "alpha": 4, "beta": 2}, {"kind": "beta", "alpha": 2, "beta": 2},
              {"kind": "beta", "alpha": 3, "beta": 3}, {"kind": "beta", "alpha": 2, "beta": 2}],
    "rewards": [{"kind": "bernoulli"}, {"kind": "bernoulli"}]
  })";
  const std::string good = experiment_json(R"({"kind": "ctx_reduction", "k": 1, "L": 2})",
                                           ctx_prior, 9, R"(, "policies": [[1, 2], [2, 1]])");
  const ExperimentConfig cfg = parse_experiment_config(good);
  REQUIRE(cfg.contextual_prior.has_value());
  CHECK(cfg.policies == PolicyClass{{0, 1}, {1, 0}});

  CHECK(field_of([&] {
          parse_experiment_config(experiment_json(R"({"kind": "ctx_reduction"})", ctx_prior, 9,
                                                  R"(, "policies": [[1]])"));
        }) == "policies");
  CHECK(field_of([&] {
          parse_experiment_config(experiment_json(R"({"kind": "ctx_reduction"})", ctx_prior, 9,
                                                  R"(, "policies": [[1, 3]])"));
        }) == "policies");
  CHECK(field_of([&] {
          parse_experiment_config(experiment_json(R"({"kind": "ctx_reduction"})", ctx_prior, 9,
                                                  R"(, "policies": [[0, 1]])"));
        }) == "policies[0][0]");
}

TEST_CASE("config_hash is a stable fnv-1a digest") {
  CHECK(config_hash("") == "cbf29ce484222325");
  const std::string digest = config_hash("abc");
  CHECK(digest.size() == 16);
  CHECK(digest.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(digest == config_hash("abc"));
  CHECK(digest != config_hash("abd"));
}

TEST_CASE("expost regret compares played means to the best arm") {
  const Transcript t = flat_transcript({0.8, 0.2}, {0, 1, 1});
  CHECK(expost_regret(t) == doctest::Approx(1.2).epsilon(1e-12));

  MabInstance other;
  other.means = {0.5, 1.0};
  CHECK(expost_regret(t, other) == doctest::Approx(0.5).epsilon(1e-12));

  Transcript contextual = flat_transcript({0.8, 0.2, 0.3, 0.4}, {0});
  contextual.num_contexts = 2;
  contextual.rows[0].context = 0;
  CHECK_THROWS_AS(expost_regret(contextual), std::invalid_argument);
}

TEST_CASE("bayes regret averages cumulative curves with a normal ci") {
  const Transcript a = flat_transcript({1.0, 0.0}, {1, 0});
  const Transcript b = flat_transcript({1.0, 0.0}, {0, 0});
  const RegretCurve curve = bayes_regret({a, b});

  REQUIRE(curve.points.size() == 2);
  CHECK(curve.replicates == 2);
  CHECK(curve.points[0].t == 1);
  CHECK(curve.points[0].mean == doctest::Approx(0.5));
  CHECK(curve.points[1].mean == doctest::Approx(0.5));
  const double se = 0.5;
  const double z = z_for_confidence(0.95);
  CHECK(curve.points[0].lo == doctest::Approx(0.5 - z * se).epsilon(1e-9));
  CHECK(curve.points[0].hi == doctest::Approx(0.5 + z * se).epsilon(1e-9));
  CHECK(curve.final_point().t == 2);

  const std::string csv = curve.to_csv();
  CHECK(csv.rfind("t,mean,lo,hi\n", 0) == 0);

  CHECK_THROWS_AS(bayes_regret({}), std::invalid_argument);
  CHECK_THROWS_AS(bayes_regret({a, flat_transcript({1.0, 0.0}, {0})}), std::invalid_argument);
  CHECK_THROWS_AS(RegretCurve{}.final_point(), std::logic_error);
}

TEST_CASE("avg_reward_window averages played means over a round window") {
  const Transcript a = flat_transcript({1.0, 0.0}, {0, 1, 0});
  const Transcript b = flat_transcript({0.5, 0.25}, {1, 1, 1});
  CHECK(avg_reward_window({a, b}, 2, 3) == doctest::Approx((0.5 + 0.25) / 2).epsilon(1e-12));
  CHECK(avg_reward_window({a, b}, 1, 1) == doctest::Approx((1.0 + 0.25) / 2).epsilon(1e-12));
  CHECK_THROWS_AS(avg_reward_window({}, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(avg_reward_window({a}, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(avg_reward_window({a}, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(avg_reward_window({a}, 1, 4), std::invalid_argument);
}

TEST_CASE("prediction coupling maps rounds onto wrapped phases") {
  Transcript t = flat_transcript({0.5, 0.5}, {0, 0, 0, 0, 0, 0, 0, 0});
  const std::int64_t c = 2;
  const std::int64_t L = 2;
  const std::vector<std::optional<std::string>> wrapped = {"a", "b", "c"};
  t.rows[4].prediction = "a";
  t.rows[5].prediction = "b";
  t.rows[6].prediction = "b";
  t.rows[7].prediction = "c";
  CHECK(check_prediction_coupling(t, wrapped, c, L));

  t.rows[6].prediction = "a";
  CHECK_FALSE(check_prediction_coupling(t, wrapped, c, L));
  t.rows[6].prediction = "b";

  std::vector<std::optional<std::string>> gapped = wrapped;
  gapped[1] = std::nullopt;
  t.rows[5].prediction = kNullPrediction;
  t.rows[6].prediction = std::nullopt;
  CHECK(check_prediction_coupling(t, gapped, c, L));

  CHECK_THROWS_AS(check_prediction_coupling(t, {{"a"}}, c, L), std::invalid_argument);
  CHECK_THROWS_AS(check_prediction_coupling(t, wrapped, -1, L), std::invalid_argument);
  CHECK_THROWS_AS(check_prediction_coupling(t, wrapped, c, 0), std::invalid_argument);
}

TEST_CASE("parallel_reduce is chunk-deterministic across thread counts") {
  const std::function<std::int64_t(std::int64_t, std::int64_t)> build =
      [](std::int64_t lo, std::int64_t hi) {
        std::int64_t s = 0;
        for (std::int64_t i = lo; i < hi; ++i) s += i;
        return s;
      };
  const std::function<void(std::int64_t&, std::int64_t&&)> merge =
      [](std::int64_t& into, std::int64_t&& part) { into += part; };
  const std::int64_t serial = parallel_reduce<std::int64_t>(1000, build, merge, 1);
  const std::int64_t threaded = parallel_reduce<std::int64_t>(1000, build, merge, 3);
  CHECK(serial == 1000 * 999 / 2);
  CHECK(serial == threaded);

  using Ranges = std::vector<std::pair<std::int64_t, std::int64_t>>;
  const std::function<Ranges(std::int64_t, std::int64_t)> collect =
      [](std::int64_t lo, std::int64_t hi) { return Ranges{{lo, hi}}; };
  const std::function<void(Ranges&, Ranges&&)> append = [](Ranges& into, Ranges&& part) {
    into.insert(into.end(), part.begin(), part.end());
  };
  const Ranges chunks = parallel_reduce<Ranges>(300, collect, append, 4);
  REQUIRE(chunks.size() == 128);
  CHECK(chunks.front().first == 0);
  CHECK(chunks.back().second == 300);
  for (std::size_t i = 1; i < chunks.size(); ++i) {
    CHECK(chunks[i].first == chunks[i - 1].second);
  }

  const Ranges tiny = parallel_reduce<Ranges>(5, collect, append, 4);
  CHECK(tiny.size() == 5);
  const Ranges empty = parallel_reduce<Ranges>(0, collect, append, 4);
  REQUIRE(empty.size() == 1);
  CHECK(empty[0] == std::pair<std::int64_t, std::int64_t>{0, 0});
}

TEST_CASE("svg renderers embed provenance, labels, and values") {
  const std::string chart = svg_line_chart(
      "Cumulative regret", "round", "regret",
      {{"mean", {1.0, 2.0, 3.0}, {0.1, 0.2, 0.3}}, {"ci upper", {1.0, 2.0, 3.0}, {0.2, 0.3, 0.4}}},
      "name=demo seed=7 config=cbf29ce484222325");
  CHECK(chart.find("<svg") != std::string::npos);
  CHECK(chart.find("</svg>") != std::string::npos);
  CHECK(chart.find("Cumulative regret") != std::string::npos);
  CHECK(chart.find("round") != std::string::npos);
  CHECK(chart.find("regret") != std::string::npos);
  CHECK(chart.find("mean") != std::string::npos);
  CHECK(chart.find("ci upper") != std::string::npos);
  CHECK(chart.find("name=demo seed=7 config=cbf29ce484222325") != std::string::npos);

  const std::string heat = svg_heatmap("Audit slack", {"play 2"}, {"vs 1"}, {-0.2},
                                       "name=demo seed=7 config=deadbeef00000000");
  CHECK(heat.find("<svg") != std::string::npos);
  CHECK(heat.find("Audit slack") != std::string::npos);
  CHECK(heat.find("play 2") != std::string::npos);
  CHECK(heat.find("vs 1") != std::string::npos);
  CHECK(heat.find("-0.2") != std::string::npos);
  CHECK(heat.find("config=deadbeef00000000") != std::string::npos);
}

TEST_CASE("audit pools cells by role and recommendation with exact slacks") {
  const TranscriptRunner runner = [](std::uint64_t) {
    Transcript t = flat_transcript({0.7, 0.5}, {0, 0, 1});
    const std::uint16_t tail = t.role_id("tail");
    t.rows[2].role = tail;
    return t;
  };

  AuditOptions opts;
  opts.min_cell = 100;
  const AuditReport report = audit_bic(runner, 1000, opts);
  CHECK(report.replicates == 1000);
  CHECK_FALSE(report.pass);
  CHECK(report.conclusive_cells == 2);
  CHECK(report.inconclusive_cells == 0);
  CHECK(report.failing_cells == 1);
  REQUIRE(report.cells.size() == 2);

  for (const AuditCell& cell : report.cells) {
    CHECK(cell.clusters == 1000);
    CHECK(cell.conclusive);
    CHECK(cell.std_error == doctest::Approx(0.0).epsilon(1e-12));
    if (cell.role == "play") {
      CHECK(cell.recommended == 0);
      CHECK(cell.competitor == 1);
      CHECK(cell.events == 2000);
      CHECK(cell.slack == doctest::Approx(0.2).epsilon(1e-12));
      CHECK(cell.pass);
    } else {
      CHECK(cell.role == "tail");
      CHECK(cell.recommended == 1);
      CHECK(cell.competitor == 0);
      CHECK(cell.events == 1000);
      CHECK(cell.slack == doctest::Approx(-0.2).epsilon(1e-12));
      CHECK_FALSE(cell.pass);
    }
  }

  AuditOptions strict = opts;
  strict.min_cell = 1500;
  const AuditReport filtered = audit_bic(runner, 1000, strict);
  CHECK(filtered.pass);
  CHECK(filtered.conclusive_cells == 1);
  CHECK(filtered.inconclusive_cells == 1);

  AuditOptions loose = opts;
  loose.epsilon = 0.25;
  CHECK(audit_bic(runner, 1000, loose).pass);

  CHECK_THROWS_AS(audit_bic(runner, 999, opts), std::invalid_argument);
  CHECK_THROWS_AS(audit_bic(TranscriptRunner{}, 1000, opts), std::invalid_argument);

  const nlohmann::json parsed = nlohmann::json::parse(report.to_json());
  CHECK(parsed.at("verdict") == "FAIL");
  CHECK(parsed.at("replicates") == 1000);
  CHECK(parsed.at("failing_cells") == 1);
  REQUIRE(parsed.at("cells").size() == 2);
  CHECK(parsed.at("cells")[0].at("recommended").get<int>() >= 1);
  CHECK(parsed.at("cells")[0].contains("status"));
}

TEST_CASE("transcript runners cover every algorithm kind deterministically") {
  struct Case {
    std::string algorithm;
    const char* prior;
    std::int64_t horizon;
    std::int64_t rows;
  };
  const char* beta_three = R"({
    "arms": [{"kind": "beta", "alpha": 4, "beta": 2}, {"kind": "beta", "alpha": 3, "beta": 2},
             {"kind": "beta", "alpha": 2, "beta": 2}],
    "rewards": [{"kind": "bernoulli"}, {"kind": "bernoulli"}, {"kind": "bernoulli"}]
  })";
  const std::vector<Case> cases = {
      {R"({"kind": "two_arm_sampler", "k": 2, "L": 3})", kBetaTwoArm, 20, 9},
      {R"({"kind": "m_arm_sampler", "k": 1, "L": 2})", beta_three, 20, 5},
      {R"({"kind": "reduction", "k": 1, "L": 2, "wrapped": "ucb1"})", kBetaTwoArm, 10, 10},
      {R"({"kind": "standalone", "wrapped": "constant:2"})", kOffsetPrior, 5, 5},
      {R"({"kind": "detail_free", "mu_hat": 0.3, "N": 2})", kBetaTwoArm, 10, 10},
      {R"({"kind": "df_two_arm", "k": 2, "k_star": 1, "L": 2, "C": 0.05})", kBetaTwoArm, 12, 12},
  };
  for (const Case& c : cases) {
    CAPTURE(c.algorithm);
    const ExperimentConfig cfg =
        parse_experiment_config(experiment_json(c.algorithm, c.prior, c.horizon));
    const TranscriptRunner runner = make_transcript_runner(cfg);
    const Transcript first = runner(0);
    CHECK(first.rows.size() == static_cast<std::size_t>(c.rows));
    CHECK(jsonl_of(first) == jsonl_of(runner(0)));
  }

  const char* ctx_prior = R"({
    "contexts": {"weights": [0.5, 0.5]},
    "cells": [{"kind": "beta", "alpha": 4, "beta": 2}, {"kind": "beta", "alpha": 2, "beta": 2},
              {"kind": "beta", "alpha": 3, "beta": 3}, {"kind": "beta", "alpha": 2, "beta": 2}],
    "rewards": [{"kind": "bernoulli"}, {"kind": "bernoulli"}]
  })";
  const ExperimentConfig ctx = parse_experiment_config(
      experiment_json(R"({"kind": "ctx_reduction", "k": 1, "L": 2})", ctx_prior, 9));
  const TranscriptRunner ctx_runner = make_transcript_runner(ctx);
  const Transcript ctx_first = ctx_runner(0);
  CHECK(ctx_first.rows.size() == 9);
  CHECK(ctx_first.num_contexts == 2);
  CHECK(jsonl_of(ctx_first) == jsonl_of(ctx_runner(0)));

  const ExperimentConfig standalone = parse_experiment_config(
      experiment_json(R"({"kind": "standalone", "wrapped": "constant:2"})", kOffsetPrior, 5));
  const TranscriptRunner noisy = make_transcript_runner(standalone);
  CHECK(jsonl_of(noisy(0)) != jsonl_of(noisy(1)));
  for (const TranscriptRow& row : noisy(0).rows) {
    CHECK(row.arm == 1);
    CHECK(noisy(0).roles.at(row.role) == "play");
  }

  const ExperimentConfig wide = parse_experiment_config(
      experiment_json(R"({"kind": "two_arm_sampler", "k": 1, "L": 1})", beta_three, 5));
  CHECK_THROWS_AS(make_transcript_runner(wide)(0), std::invalid_argument);

  ExperimentConfig bogus = standalone;
  bogus.algorithm.kind = "mystery";
  CHECK_THROWS_AS(make_transcript_runner(bogus)(0), std::invalid_argument);
}

TEST_CASE("experiment regret curve is exact for a constant policy on an offset prior") {
  const ExperimentConfig cfg = parse_experiment_config(experiment_json(
      R"({"kind": "standalone", "wrapped": "constant:2"})", kOffsetPrior, 5,
      R"(, "replicates": 24)"));
  const RegretCurve curve = experiment_regret_curve(cfg);
  REQUIRE(curve.points.size() == 5);
  CHECK(curve.replicates == 24);
  for (std::size_t s = 0; s < curve.points.size(); ++s) {
    const double expect = 0.2 * static_cast<double>(s + 1);
    CHECK(curve.points[s].mean == doctest::Approx(expect).epsilon(1e-9));
    CHECK(curve.points[s].lo == doctest::Approx(expect).epsilon(1e-9));
    CHECK(curve.points[s].hi == doctest::Approx(expect).epsilon(1e-9));
  }

  const ExperimentConfig best = parse_experiment_config(experiment_json(
      R"({"kind": "standalone", "wrapped": "constant:1"})", kOffsetPrior, 5,
      R"(, "replicates": 24)"));
  const RegretCurve zero = experiment_regret_curve(best);
  CHECK(zero.final_point().mean == doctest::Approx(0.0).epsilon(1e-12));

  const ExperimentConfig learner = parse_experiment_config(experiment_json(
      R"({"kind": "reduction", "k": 1, "L": 2, "wrapped": "ucb1"})", kBetaTwoArm, 12,
      R"(, "replicates": 16)"));
  const RegretCurve ramp = experiment_regret_curve(learner);
  REQUIRE(ramp.points.size() == 12);
  for (std::size_t s = 1; s < ramp.points.size(); ++s) {
    CHECK(ramp.points[s].mean >= ramp.points[s - 1].mean - 1e-12);
  }
}

TEST_CASE("run_experiment writes a reproducible artifact bundle and audits it") {
  const std::string text = experiment_json(
      R"({"kind": "standalone", "wrapped": "constant:2"})", kOffsetPrior, 4,
      R"(, "name": "slanted", "replicates": 12, "transcripts": 2,
         "audit": {"replicates": 1000, "epsilon": 0.01, "min_cell": 200})");
  const ExperimentConfig cfg = parse_experiment_config(text);

  const fs::path dir_a = fresh_dir("a");
  const ExperimentResult res = run_experiment(cfg, dir_a.string());
  CHECK(res.out_dir == dir_a.string());
  CHECK(res.audit_ran);
  CHECK_FALSE(res.audit_pass);
  CHECK(res.final_regret.t == 4);
  CHECK(res.final_regret.mean == doctest::Approx(0.8).epsilon(1e-9));

  REQUIRE_FALSE(res.files.empty());
  for (const std::string& rel : res.files) {
    CAPTURE(rel);
    CHECK(fs::exists(dir_a / rel));
  }
  const auto has = [&](const std::string& leaf) {
    return std::find(res.files.begin(), res.files.end(), leaf) != res.files.end();
  };
  CHECK(has("config.json"));
  CHECK(has("metrics.csv"));
  CHECK(has("regret.svg"));
  CHECK(has("audit.json"));
  CHECK(has("audit.svg"));
  CHECK(has("transcripts/rep_0.jsonl"));
  CHECK(has("transcripts/rep_1.jsonl"));
  CHECK_FALSE(has("transcripts/rep_2.jsonl"));
  CHECK(slurp_file(dir_a / "config.json") == text);

  const nlohmann::json audit = nlohmann::json::parse(slurp_file(dir_a / "audit.json"));
  CHECK(audit.at("verdict") == "FAIL");
  bool saw_failing = false;
  for (const auto& cell : audit.at("cells")) {
    if (cell.at("status") == "fail") {
      saw_failing = true;
      CHECK(cell.at("recommended") == 2);
      CHECK(cell.at("slack").get<double>() == doctest::Approx(-0.2).epsilon(1e-9));
    }
  }
  CHECK(saw_failing);

  const fs::path dir_b = fresh_dir("b");
  const ExperimentResult rerun = run_experiment(cfg, dir_b.string());
  REQUIRE(rerun.files == res.files);
  for (const std::string& rel : res.files) {
    CAPTURE(rel);
    CHECK(slurp_file(dir_a / rel) == slurp_file(dir_b / rel));
  }

  const std::string fair = experiment_json(
      R"({"kind": "standalone", "wrapped": "constant:1"})", kOffsetPrior, 4,
      R"(, "replicates": 12, "audit": {"replicates": 1000})");
  const fs::path dir_c = fresh_dir("c");
  const ExperimentResult pass = run_experiment(parse_experiment_config(fair), dir_c.string());
  CHECK(pass.audit_ran);
  CHECK(pass.audit_pass);

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  fs::remove_all(dir_c);
}
