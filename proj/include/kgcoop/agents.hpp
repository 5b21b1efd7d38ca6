#pragma once
// Stochastic policies for the two agents.
//
// Both agents score each candidate action with a shared two-layer network
//   score(x) = w2 . tanh(W1 x + b1) + b2,   hidden size = d,
// and take a softmax over the legal candidates only. The input is the
// reasoner's state message [e_t; e_s; r_q] followed by action features:
//   reasoner:  [r; e']            (SELF_LOOP: [0; e_t])
//   extractor: [head; r; tail]    (ABSTAIN: learned 3d vector)
// The extractor receives the reasoner's message verbatim.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "kgcoop/embed.hpp"
#include "kgcoop/env.hpp"

namespace kgcoop {

class Rng;

enum class AgentKind { reasoner, extractor };

// Flat parameters. Layout: W1 (hidden x input, row-major), b1, w2, b2, then
// for the extractor the 3d ABSTAIN feature vector.
struct PolicyParams {
  AgentKind kind = AgentKind::reasoner;
  std::size_t dimension = 0;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::vector<double> values;

  std::size_t count() const { return values.size(); }
  std::size_t b1_offset() const { return hidden_dim * input_dim; }
  std::size_t w2_offset() const { return b1_offset() + hidden_dim; }
  std::size_t b2_offset() const { return w2_offset() + hidden_dim; }
  std::size_t abstain_offset() const { return b2_offset() + 1; }

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;
};

// All-zero parameters (uniform policies).
PolicyParams zero_policy_params(AgentKind kind, std::size_t dimension);
// Gaussian W1 ~ N(0, 1/input), w2 ~ N(0, 1/hidden), abstain ~ N(0, 1/d), zero biases.
PolicyParams random_policy_params(AgentKind kind, std::size_t dimension, Rng& rng);

struct Policies {
  PolicyParams reasoner;
  PolicyParams extractor;
  std::uint64_t seed = 0;

  std::size_t dimension() const { return reasoner.dimension; }
  friend bool operator==(const Policies&, const Policies&) = default;
};

Policies initial_policies(std::size_t dimension, std::uint64_t seed);

using Message = std::vector<double>;

// [embed(e_t); embed(e_s); embed(r_q)], r_q falling back to zero-shot.
Message encode_state(const EmbeddingTable& table, EntityId current, const Query& query);
Message encode_state(const EmbeddingTable& table, const EpisodeState& state);

// Softmax over legal actions. Throws on an empty action list.
std::vector<double> reasoner_policy(const PolicyParams& params, const Message& message,
                                    std::span<const ReasonerAction> actions,
                                    const EmbeddingTable& table);
std::vector<double> extractor_policy(const PolicyParams& params, const Message& message,
                                     std::span<const ExtractorAction> candidates,
                                     const EmbeddingTable& table);

// One decision's contribution to the REINFORCE surrogate
//   advantage * log pi(chosen) + entropy_weight * H(pi),
// returned as a value; when gradient is non-empty its derivative with respect
// to params.values is added into it.
double reasoner_surrogate(const PolicyParams& params, const Message& message,
                          std::span<const ReasonerAction> actions, const EmbeddingTable& table,
                          std::size_t chosen, double advantage, double entropy_weight,
                          std::span<double> gradient);
double extractor_surrogate(const PolicyParams& params, const Message& message,
                           std::span<const ExtractorAction> candidates,
                           const EmbeddingTable& table, std::size_t chosen, double advantage,
                           double entropy_weight, std::span<double> gradient);

enum class SelectMode { sample, greedy };

// greedy: argmax, lowest index on ties. sample: inverse-CDF draw from rng.
// Throws on NaN or an empty distribution; rng is required for sample.
std::size_t select_action(std::span<const double> distribution, SelectMode mode, Rng* rng);

// Interface used by rollouts; lets tests plug in scripted agents.
class JointPolicy {
 public:
  virtual ~JointPolicy() = default;
  virtual std::vector<double> extractor_distribution(
      const EpisodeState& state, std::span<const ExtractorAction> candidates) const = 0;
  virtual std::vector<double> reasoner_distribution(
      const EpisodeState& state, std::span<const ReasonerAction> actions) const = 0;
};

class LearnedPolicy final : public JointPolicy {
 public:
  LearnedPolicy(const Policies& policies, const EmbeddingTable& table)
      : policies_(&policies), table_(&table) {}

  std::vector<double> extractor_distribution(
      const EpisodeState& state, std::span<const ExtractorAction> candidates) const override;
  std::vector<double> reasoner_distribution(
      const EpisodeState& state, std::span<const ReasonerAction> actions) const override;

 private:
  const Policies* policies_;
  const EmbeddingTable* table_;
};

void write_policies(std::ostream& out, const Policies& policies);
Policies read_policies(std::istream& in);
void save_policies(const Policies& policies, const std::filesystem::path& path);
Policies load_policies(const std::filesystem::path& path);

}  // namespace kgcoop
