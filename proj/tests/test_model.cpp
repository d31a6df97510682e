#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "bicex/model.hpp"
#include "bicex/rng.hpp"

using namespace bicex;

TEST_CASE("arm stats accumulate sufficient statistics") {
  ArmStats s;
  s.add(1.0);
  s.add(3.0);
  CHECK(s.n == 2);
  CHECK(s.sum == doctest::Approx(4.0));
  CHECK(s.sum2 == doctest::Approx(10.0));
  CHECK(s.mean() == doctest::Approx(2.0));
}

TEST_CASE("dataset indexes per arm and checks bounds") {
  Dataset d(2);
  d.add(0, 0.5);
  d.add(1, 1.0);
  d.add(1, 0.0);
  CHECK(d.count(0) == 1);
  CHECK(d.count(1) == 2);
  CHECK_THROWS(d.add(2, 1.0));
}

TEST_CASE("draw_reward families behave as declared") {
  RngStream rng = RngStream::derive(1, 0, "r", 0);
  const RewardFamily bern{RewardFamily::Kind::bernoulli, 0.0};
  for (int i = 0; i < 100; ++i) {
    const double r = draw_reward(bern, 0.4, rng);
    CHECK((r == 0.0 || r == 1.0));
  }
  const RewardFamily point{RewardFamily::Kind::point_mass, 0.0};
  CHECK(draw_reward(point, 0.7, rng) == 0.7);
  const RewardFamily gauss{RewardFamily::Kind::gaussian, 4.0};
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) sum += draw_reward(gauss, 1.0, rng);
  CHECK(std::fabs(sum / n - 1.0) < 5.0 * 2.0 / std::sqrt(static_cast<double>(n)));
  CHECK(bern.bounded_01());
  CHECK_FALSE(gauss.bounded_01());
}

TEST_CASE("best_mean and mean_of index correctly") {
  const MabInstance inst{{0.2, 0.9, 0.5}};
  CHECK(inst.best_mean() == doctest::Approx(0.9));

  Transcript mab;
  mab.num_contexts = 0;
  mab.means = {0.3, 0.8};
  CHECK(mab.num_arms() == 2);
  CHECK(mab.mean_of(1, -1) == doctest::Approx(0.8));

  Transcript ctx;
  ctx.num_contexts = 2;
  ctx.means = {0.8, 0.3, 0.4, 0.6};  // arm-major
  CHECK(ctx.num_arms() == 2);
  CHECK(ctx.mean_of(0, 1) == doctest::Approx(0.3));
  CHECK(ctx.mean_of(1, 0) == doctest::Approx(0.4));
}

TEST_CASE("role_id deduplicates labels") {
  Transcript t;
  const auto a = t.role_id("init");
  const auto b = t.role_id("explore:2");
  const auto c = t.role_id("init");
  CHECK(a == c);
  CHECK(a != b);
  CHECK(t.roles == std::vector<std::string>{"init", "explore:2"});
}

Transcript sample_transcript() {
  Transcript t;
  t.root_seed = 99;
  t.replicate = 3;
  t.num_contexts = 0;
  t.means = {0.25, 0.5};
  const auto init = t.role_id("init");
  const auto sim = t.role_id("sim");
  t.rows.push_back(TranscriptRow{1, -1, 0, 0.125, init, {}, {}});
  t.rows.push_back(TranscriptRow{2, -1, 1, -1.5, sim, {}, kNullPrediction});
  t.rows.push_back(TranscriptRow{3, -1, 1, 1.0, sim, std::string("0.75"), std::string("arm:2")});
  return t;
}

TEST_CASE("jsonl round trip preserves every field") {
  const Transcript t = sample_transcript();
  std::stringstream buffer;
  t.to_jsonl(buffer);
  const Transcript back = Transcript::from_jsonl(buffer);
  CHECK(back.root_seed == t.root_seed);
  CHECK(back.replicate == t.replicate);
  CHECK(back.num_contexts == t.num_contexts);
  CHECK(back.means == t.means);
  CHECK(back.roles == t.roles);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(back.rows[i].round == t.rows[i].round);
    CHECK(back.rows[i].context == t.rows[i].context);
    CHECK(back.rows[i].arm == t.rows[i].arm);
    CHECK(back.rows[i].reward == t.rows[i].reward);
    CHECK(back.roles[back.rows[i].role] == t.roles[t.rows[i].role]);
    CHECK(back.rows[i].feedback == t.rows[i].feedback);
    CHECK(back.rows[i].prediction == t.rows[i].prediction);
  }
}

TEST_CASE("jsonl serializes recommendations one based") {
  const Transcript t = sample_transcript();
  std::stringstream buffer;
  t.to_jsonl(buffer);
  std::string line;
  std::getline(buffer, line);  // header
  std::getline(buffer, line);
  CHECK(line.find("\"recommendation\":1") != std::string::npos);
  std::getline(buffer, line);
  CHECK(line.find("\"recommendation\":2") != std::string::npos);
  CHECK(line.find("\"prediction\":\"__null__\"") != std::string::npos);
}

TEST_CASE("jsonl replay is byte identical") {
  const Transcript t = sample_transcript();
  std::stringstream a;
  std::stringstream b;
  t.to_jsonl(a);
  t.to_jsonl(b);
  CHECK(a.str() == b.str());
  std::stringstream c;
  Transcript copy = t;
  copy.to_jsonl(c);
  CHECK(c.str() == a.str());
}

TEST_CASE("csv has a header and one line per row") {
  const Transcript t = sample_transcript();
  std::stringstream buffer;
  t.to_csv(buffer);
  std::string line;
  std::getline(buffer, line);
  CHECK(line == "round,context,recommendation,reward,feedback,prediction");
  int rows = 0;
  while (std::getline(buffer, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("contextual transcripts round trip the context column") {
  Transcript t;
  t.root_seed = 1;
  t.num_contexts = 2;
  t.means = {0.8, 0.3, 0.4, 0.6};
  const auto role = t.role_id("sim");
  t.rows.push_back(TranscriptRow{1, 1, 0, 1.0, role, {}, {}});
  std::stringstream buffer;
  t.to_jsonl(buffer);
  const Transcript back = Transcript::from_jsonl(buffer);
  CHECK(back.num_contexts == 2);
  CHECK(back.rows.at(0).context == 1);
  CHECK(back.mean_of(0, 1) == doctest::Approx(0.3));
}
