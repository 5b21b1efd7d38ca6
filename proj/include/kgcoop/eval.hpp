#pragma once
// Held-out metrics for a pair of policies.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "kgcoop/agents.hpp"
#include "kgcoop/dataset.hpp"
#include "kgcoop/embed.hpp"
#include "kgcoop/env.hpp"

namespace kgcoop {

struct EvalConfig {
  SelectMode mode = SelectMode::greedy;
  // Sampled rollouts per query; greedy mode always uses one.
  std::size_t num_samples = 16;
  std::size_t horizon = kDefaultHorizon;
  std::size_t k = 3;
  std::uint64_t seed = 0;
  // false: reasoner-only baseline, the extractor always abstains.
  bool extractor_enabled = true;
};

struct Metrics {
  double hits_at_1 = 0.0;
  double hits_at_k = 0.0;
  std::size_t k = 0;
  double mrr = 0.0;
  double avg_hops = 0.0;
  double adoption_rate = 0.0;
  double success_rate = 0.0;  // over all rollouts
  std::size_t query_count = 0;
  std::string dataset_id;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

// Terminal entities are ranked by visit count, then by mean trajectory
// log-probability, then by id. A query whose answers never appear scores 0.
Metrics evaluate(const JointPolicy& policy, const Dataset& dataset, const EvalConfig& config);
Metrics evaluate(const Policies& policies, const Dataset& dataset, const EmbeddingTable& table,
                 const EvalConfig& config);

// Field-wise a - b. Throws when the dataset ids differ.
struct MetricsDelta {
  double hits_at_1 = 0.0;
  double hits_at_k = 0.0;
  double mrr = 0.0;
  double avg_hops = 0.0;
  double adoption_rate = 0.0;
  double success_rate = 0.0;
};
MetricsDelta compare(const Metrics& a, const Metrics& b);

inline constexpr std::string_view kEvalHeader =
    "queries,k,hits_at_1,hits_at_k,mrr,avg_hops,adoption_rate,success_rate";
void write_metrics_row(std::ostream& out, const Metrics& m);
void write_summary(std::ostream& out, const Metrics& m);
void write_delta(std::ostream& out, const MetricsDelta& d);

}  // namespace kgcoop
