#include "kgcoop/agents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "kgcoop/error.hpp"
#include "kgcoop/random.hpp"
#include "kgcoop/text_format.hpp"

namespace kgcoop {

namespace {

constexpr std::string_view kMagic = "kgcoop-policy";

std::size_t feature_dim(AgentKind kind, std::size_t d) {
  return kind == AgentKind::reasoner ? 2 * d : 3 * d;
}

std::size_t param_count(AgentKind kind, std::size_t d) {
  const std::size_t in = 3 * d + feature_dim(kind, d);
  const std::size_t base = d * in + 2 * d + 1;
  return kind == AgentKind::extractor ? base + 3 * d : base;
}

const char* kind_name(AgentKind kind) {
  return kind == AgentKind::reasoner ? "reasoner" : "extractor";
}

void append(std::vector<double>& out, std::span<const double> v) {
  out.insert(out.end(), v.begin(), v.end());
}

// Scores candidates (message shared, per-candidate features) and optionally
// backpropagates the surrogate. abstain_slot marks the candidate whose
// features are the extractor's learned ABSTAIN vector.
struct ScoredCandidates {
  std::vector<double> probs;
  std::vector<double> log_probs;
};

ScoredCandidates score(const PolicyParams& p, const Message& message,
                       const std::vector<std::vector<double>>& features,
                       std::optional<std::size_t> abstain_slot, std::size_t chosen,
                       double advantage, double entropy_weight, std::span<double> gradient,
                       double* surrogate) {
  const std::size_t d = p.dimension;
  const std::size_t in = p.input_dim;
  const std::size_t hid = p.hidden_dim;
  const std::size_t msg_dim = 3 * d;
  const std::size_t feat_dim = in - msg_dim;
  if (message.size() != msg_dim) throw Error("message dimension does not match the policy");
  if (features.empty()) throw Error("policy needs at least one legal action");
  if (p.values.size() != param_count(p.kind, d)) throw Error("policy parameter count mismatch");
  const double* w1 = p.values.data();
  const double* b1 = w1 + p.b1_offset();
  const double* w2 = w1 + p.w2_offset();
  const double b2 = p.values[p.b2_offset()];

  std::vector<double> shared(b1, b1 + hid);
  for (std::size_t j = 0; j < hid; ++j) {
    const double* row = w1 + j * in;
    for (std::size_t i = 0; i < msg_dim; ++i) shared[j] += row[i] * message[i];
  }

  const std::size_t n = features.size();
  std::vector<std::vector<double>> hidden(n, std::vector<double>(hid));
  std::vector<double> logits(n, b2);
  for (std::size_t a = 0; a < n; ++a) {
    if (features[a].size() != feat_dim) throw Error("action feature dimension mismatch");
    for (std::size_t j = 0; j < hid; ++j) {
      const double* row = w1 + j * in + msg_dim;
      double pre = shared[j];
      for (std::size_t i = 0; i < feat_dim; ++i) pre += row[i] * features[a][i];
      hidden[a][j] = std::tanh(pre);
      logits[a] += w2[j] * hidden[a][j];
    }
  }

  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - top);
  const double log_z = top + std::log(z);
  ScoredCandidates out;
  out.log_probs.resize(n);
  out.probs.resize(n);
  double entropy = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    out.log_probs[a] = logits[a] - log_z;
    out.probs[a] = std::exp(out.log_probs[a]);
    entropy -= out.probs[a] * out.log_probs[a];
  }
  if (!surrogate) return out;
  if (chosen >= n) throw Error("chosen action index out of range");
  *surrogate = advantage * out.log_probs[chosen] + entropy_weight * entropy;
  if (gradient.empty()) return out;
  if (gradient.size() != p.values.size()) throw Error("gradient buffer size mismatch");

  double* g_w1 = gradient.data();
  double* g_b1 = g_w1 + p.b1_offset();
  double* g_w2 = g_w1 + p.w2_offset();
  double& g_b2 = gradient[p.b2_offset()];
  std::vector<double> msg_sum(hid, 0.0);
  std::vector<double> s(hid);
  for (std::size_t a = 0; a < n; ++a) {
    const double pa = out.probs[a];
    const double g = advantage * ((a == chosen ? 1.0 : 0.0) - pa) -
                     entropy_weight * pa * (out.log_probs[a] + entropy);
    if (g == 0.0) continue;
    g_b2 += g;
    for (std::size_t j = 0; j < hid; ++j) {
      g_w2[j] += g * hidden[a][j];
      s[j] = g * w2[j] * (1.0 - hidden[a][j] * hidden[a][j]);
      g_b1[j] += s[j];
      msg_sum[j] += s[j];
      double* row = g_w1 + j * in + msg_dim;
      for (std::size_t i = 0; i < feat_dim; ++i) row[i] += s[j] * features[a][i];
    }
    if (abstain_slot && *abstain_slot == a) {
      double* g_abs = gradient.data() + p.abstain_offset();
      for (std::size_t j = 0; j < hid; ++j) {
        const double* row = w1 + j * in + msg_dim;
        for (std::size_t i = 0; i < feat_dim; ++i) g_abs[i] += s[j] * row[i];
      }
    }
  }
  for (std::size_t j = 0; j < hid; ++j) {
    double* row = g_w1 + j * in;
    for (std::size_t i = 0; i < msg_dim; ++i) row[i] += msg_sum[j] * message[i];
  }
  return out;
}

std::vector<std::vector<double>> reasoner_features(std::span<const ReasonerAction> actions,
                                                   const EmbeddingTable& table) {
  std::vector<std::vector<double>> features;
  features.reserve(actions.size());
  for (const ReasonerAction& a : actions) {
    std::vector<double> f = table.relation(a.relation);
    append(f, table.entity(a.target));
    features.push_back(std::move(f));
  }
  return features;
}

std::vector<std::vector<double>> extractor_features(const PolicyParams& params,
                                                    std::span<const ExtractorAction> candidates,
                                                    const EmbeddingTable& table,
                                                    std::optional<std::size_t>& abstain_slot) {
  std::vector<std::vector<double>> features;
  features.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const ExtractorAction& c = candidates[i];
    if (c.abstain()) {
      if (abstain_slot) throw Error("ABSTAIN listed twice");
      abstain_slot = i;
      const auto first =
          params.values.begin() + static_cast<std::ptrdiff_t>(params.abstain_offset());
      features.emplace_back(first, first + static_cast<std::ptrdiff_t>(3 * params.dimension));
    } else {
      std::vector<double> f(table.entity(c.oriented.head).begin(),
                            table.entity(c.oriented.head).end());
      append(f, table.relation(c.oriented.relation));
      append(f, table.entity(c.oriented.tail));
      features.push_back(std::move(f));
    }
  }
  return features;
}

void check_kind(const PolicyParams& p, AgentKind kind) {
  if (p.kind != kind) throw Error(std::string("expected ") + kind_name(kind) + " parameters");
}

}  // namespace

PolicyParams zero_policy_params(AgentKind kind, std::size_t dimension) {
  if (dimension == 0) throw Error("policy dimension must be positive");
  PolicyParams p;
  p.kind = kind;
  p.dimension = dimension;
  p.input_dim = 3 * dimension + feature_dim(kind, dimension);
  p.hidden_dim = dimension;
  p.values.assign(param_count(kind, dimension), 0.0);
  return p;
}

PolicyParams random_policy_params(AgentKind kind, std::size_t dimension, Rng& rng) {
  PolicyParams p = zero_policy_params(kind, dimension);
  const double w1_scale = 1.0 / std::sqrt(static_cast<double>(p.input_dim));
  const double w2_scale = 1.0 / std::sqrt(static_cast<double>(p.hidden_dim));
  for (std::size_t i = 0; i < p.b1_offset(); ++i) p.values[i] = w1_scale * rng.normal();
  for (std::size_t j = 0; j < p.hidden_dim; ++j) {
    p.values[p.w2_offset() + j] = w2_scale * rng.normal();
  }
  if (kind == AgentKind::extractor) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(dimension));
    for (std::size_t i = p.abstain_offset(); i < p.values.size(); ++i) {
      p.values[i] = scale * rng.normal();
    }
  }
  return p;
}

Policies initial_policies(std::size_t dimension, std::uint64_t seed) {
  Rng rng(seed);
  Policies p;
  p.reasoner = random_policy_params(AgentKind::reasoner, dimension, rng);
  p.extractor = random_policy_params(AgentKind::extractor, dimension, rng);
  p.seed = seed;
  return p;
}

Message encode_state(const EmbeddingTable& table, EntityId current, const Query& query) {
  Message m;
  m.reserve(3 * table.dimension());
  append(m, table.entity(current));
  append(m, table.entity(query.source));
  append(m, table.relation(query.relation));
  return m;
}

Message encode_state(const EmbeddingTable& table, const EpisodeState& state) {
  return encode_state(table, state.current(), state.query());
}

std::vector<double> reasoner_policy(const PolicyParams& params, const Message& message,
                                    std::span<const ReasonerAction> actions,
                                    const EmbeddingTable& table) {
  check_kind(params, AgentKind::reasoner);
  return score(params, message, reasoner_features(actions, table), std::nullopt, 0, 0.0, 0.0, {},
               nullptr)
      .probs;
}

std::vector<double> extractor_policy(const PolicyParams& params, const Message& message,
                                     std::span<const ExtractorAction> candidates,
                                     const EmbeddingTable& table) {
  check_kind(params, AgentKind::extractor);
  std::optional<std::size_t> abstain_slot;
  auto features = extractor_features(params, candidates, table, abstain_slot);
  return score(params, message, features, abstain_slot, 0, 0.0, 0.0, {}, nullptr).probs;
}

double reasoner_surrogate(const PolicyParams& params, const Message& message,
                          std::span<const ReasonerAction> actions, const EmbeddingTable& table,
                          std::size_t chosen, double advantage, double entropy_weight,
                          std::span<double> gradient) {
  check_kind(params, AgentKind::reasoner);
  double value = 0.0;
  score(params, message, reasoner_features(actions, table), std::nullopt, chosen, advantage,
        entropy_weight, gradient, &value);
  return value;
}

double extractor_surrogate(const PolicyParams& params, const Message& message,
                           std::span<const ExtractorAction> candidates,
                           const EmbeddingTable& table, std::size_t chosen, double advantage,
                           double entropy_weight, std::span<double> gradient) {
  check_kind(params, AgentKind::extractor);
  std::optional<std::size_t> abstain_slot;
  auto features = extractor_features(params, candidates, table, abstain_slot);
  double value = 0.0;
  score(params, message, features, abstain_slot, chosen, advantage, entropy_weight, gradient,
        &value);
  return value;
}

std::size_t select_action(std::span<const double> distribution, SelectMode mode, Rng* rng) {
  if (distribution.empty()) throw Error("select_action: empty distribution");
  for (double p : distribution) {
    if (std::isnan(p)) throw Error("select_action: NaN in distribution");
  }
  if (mode == SelectMode::greedy) {
    return static_cast<std::size_t>(
        std::max_element(distribution.begin(), distribution.end()) - distribution.begin());
  }
  if (!rng) throw Error("select_action: sampling needs a generator");
  const double u = rng->uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < distribution.size(); ++i) {
    if (distribution[i] <= 0.0) continue;
    cumulative += distribution[i];
    last_positive = i;
    if (u < cumulative) return i;
  }
  // Rounding left the total just below u.
  return last_positive;
}

std::vector<double> LearnedPolicy::extractor_distribution(
    const EpisodeState& state, std::span<const ExtractorAction> candidates) const {
  return extractor_policy(policies_->extractor, encode_state(*table_, state), candidates, *table_);
}

std::vector<double> LearnedPolicy::reasoner_distribution(
    const EpisodeState& state, std::span<const ReasonerAction> actions) const {
  return reasoner_policy(policies_->reasoner, encode_state(*table_, state), actions, *table_);
}

void write_policies(std::ostream& out, const Policies& policies) {
  out << kMagic << "\t1\n"
      << "dimension\t" << policies.dimension() << '\n'
      << "seed\t" << policies.seed << '\n';
  for (const PolicyParams* p : {&policies.reasoner, &policies.extractor}) {
    out << kind_name(p->kind) << "\tinput\t" << p->input_dim << "\thidden\t" << p->hidden_dim
        << "\tcount\t" << p->count() << '\n';
    for (double x : p->values) out << format_double(x) << '\n';
  }
}

Policies read_policies(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> const std::string& {
    if (!std::getline(in, line)) throw ParseError("unexpected end of policy file", line_no);
    ++line_no;
    return line;
  };
  auto header = [&](std::string_view key) {
    const auto f = split_tabs(next());
    if (f.size() != 2 || f[0] != key) {
      throw ParseError("expected header '" + std::string(key) + "'", line_no);
    }
    return std::string(f[1]);
  };
  try {
    if (header(kMagic) != "1") throw Error("unsupported policy file version");
    Policies policies;
    const std::size_t d = parse_uint(header("dimension"));
    policies.seed = parse_uint(header("seed"));
    for (AgentKind kind : {AgentKind::reasoner, AgentKind::extractor}) {
      PolicyParams p = zero_policy_params(kind, d);
      const auto f = split_tabs(next());
      if (f.size() != 7 || f[0] != kind_name(kind) || f[1] != "input" || f[3] != "hidden" ||
          f[5] != "count") {
        throw Error(std::string("malformed ") + kind_name(kind) + " header");
      }
      if (parse_uint(f[2]) != p.input_dim || parse_uint(f[4]) != p.hidden_dim ||
          parse_uint(f[6]) != p.count()) {
        throw Error(std::string(kind_name(kind)) + " shape does not match dimension");
      }
      for (double& x : p.values) x = parse_double(next());
      (kind == AgentKind::reasoner ? policies.reasoner : policies.extractor) = std::move(p);
    }
    return policies;
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), line_no);
  }
}

void save_policies(const Policies& policies, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_policies(out, policies);
  if (!out) throw Error("write failed: " + path.string());
}

Policies load_policies(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return read_policies(in);
}

}  // namespace kgcoop
