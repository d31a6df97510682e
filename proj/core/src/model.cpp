#include "bicex/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "bicex/stats.hpp"

namespace bicex {

double draw_reward(const RewardFamily& family, double mu, RngStream& rng) {
  switch (family.kind) {
    case RewardFamily::Kind::bernoulli:
      if (mu < 0.0 || mu > 1.0) {
        throw std::domain_error("draw_reward: Bernoulli mean outside [0, 1]");
      }
      return rng.bernoulli(mu) ? 1.0 : 0.0;
    case RewardFamily::Kind::gaussian:
      return rng.normal(mu, std::sqrt(family.noise_var));
    case RewardFamily::Kind::point_mass:
      return mu;
  }
  throw std::logic_error("draw_reward: unknown reward family");
}

double MabInstance::best_mean() const {
  if (means.empty()) throw std::logic_error("MabInstance::best_mean: no arms");
  return *std::max_element(means.begin(), means.end());
}

std::uint16_t Transcript::role_id(const std::string& label) {
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i] == label) return static_cast<std::uint16_t>(i);
  }
  roles.push_back(label);
  return static_cast<std::uint16_t>(roles.size() - 1);
}

namespace {

void append_json_string(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += '"';
}

}  // namespace

void Transcript::to_jsonl(std::ostream& os) const {
  std::string line;
  line += R"({"seed":)" + std::to_string(root_seed);
  line += R"(,"replicate":)" + std::to_string(replicate);
  line += R"(,"contexts":)" + std::to_string(num_contexts);
  line += R"(,"means":[)";
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (i) line += ',';
    line += format_double(means[i]);
  }
  line += R"(],"roles":[)";
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (i) line += ',';
    append_json_string(line, roles[i]);
  }
  line += "]}";
  os << line << '\n';

  for (const auto& row : rows) {
    line.clear();
    line += R"({"round":)" + std::to_string(row.round);
    line += R"(,"context":)";
    if (row.context < 0) {
      line += "null";
    } else {
      line += std::to_string(row.context + 1);
    }
    line += R"(,"recommendation":)" + std::to_string(row.arm + 1);
    line += R"(,"reward":)" + format_double(row.reward);
    line += R"(,"feedback":)";
    if (row.feedback) {
      append_json_string(line, *row.feedback);
    } else {
      line += "null";
    }
    line += R"(,"prediction":)";
    if (row.prediction) {
      append_json_string(line, *row.prediction);
    } else {
      line += "null";
    }
    line += R"(,"role":)";
    append_json_string(line, roles.at(row.role));
    line += '}';
    os << line << '\n';
  }
}

void Transcript::to_csv(std::ostream& os) const {
  os << "round,context,recommendation,reward,feedback,prediction\n";
  std::string line;
  for (const auto& row : rows) {
    line.clear();
    line += std::to_string(row.round);
    line += ',';
    if (row.context >= 0) line += std::to_string(row.context + 1);
    line += ',';
    line += std::to_string(row.arm + 1);
    line += ',';
    line += format_double(row.reward);
    line += ',';
    if (row.feedback) line += *row.feedback;
    line += ',';
    if (row.prediction) line += *row.prediction;
    line += '\n';
    os << line;
  }
}

Transcript Transcript::from_jsonl(std::istream& is) {
  Transcript t;
  std::string line;
  if (!std::getline(is, line)) {
    throw std::runtime_error("Transcript::from_jsonl: empty input");
  }
  nlohmann::json meta = nlohmann::json::parse(line);
  t.root_seed = meta.at("seed").get<std::uint64_t>();
  t.replicate = meta.at("replicate").get<std::uint64_t>();
  t.num_contexts = meta.at("contexts").get<int>();
  t.means = meta.at("means").get<std::vector<double>>();
  t.roles = meta.at("roles").get<std::vector<std::string>>();

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    TranscriptRow row;
    row.round = j.at("round").get<std::int64_t>();
    if (!j.at("context").is_null()) row.context = j.at("context").get<int>() - 1;
    row.arm = j.at("recommendation").get<int>() - 1;
    row.reward = j.at("reward").get<double>();
    if (!j.at("feedback").is_null()) row.feedback = j.at("feedback").get<std::string>();
    if (!j.at("prediction").is_null()) row.prediction = j.at("prediction").get<std::string>();
    const std::string role = j.at("role").get<std::string>();
    row.role = t.role_id(role);
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace bicex
