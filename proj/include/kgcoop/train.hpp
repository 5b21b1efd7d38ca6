#pragma once
// REINFORCE training for both agents, drift-exploration bonus, and the
// empirical matrix game used to sanity-check GAME-scheme policies.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgcoop/agents.hpp"
#include "kgcoop/dataset.hpp"
#include "kgcoop/embed.hpp"
#include "kgcoop/env.hpp"
#include "kgcoop/minimax.hpp"
#include "kgcoop/random.hpp"
#include "kgcoop/reward.hpp"

namespace kgcoop {

struct RolloutOptions {
  SelectMode mode = SelectMode::sample;
  std::size_t horizon = kDefaultHorizon;
  // false: the extractor always abstains (reasoner-only baseline).
  bool extractor_enabled = true;
};

// Plays one episode. Extractor acts first each step. Candidate lists with a
// single entry are taken without consuming randomness.
Trajectory rollout(const KnowledgeGraph& graph, const ExtractionPool& pool, const Query& query,
                   const JointPolicy& policy, const RolloutOptions& options, Rng& rng);

// REINFORCE surrogate summed over a batch for one agent:
//   sum_traj sum_t [(G - baseline) log pi(a_t) + entropy_weight H(pi_t)].
// gradient (optional) receives its derivative with respect to params.values.
// Extractor steps of trajectories rolled out with the extractor disabled are
// skipped.
double reinforce_surrogate(const PolicyParams& params, std::span<const Trajectory> batch,
                           std::span<const double> returns, const EmbeddingTable& table,
                           double baseline, double entropy_weight,
                           std::vector<double>* gradient);

struct UpdateOptions {
  double learning_rate = 0.05;
  double baseline = 0.0;
  double entropy_weight = 0.0;
};

// Gradient ascent step params + lr * grad(surrogate). Throws Error (leaving
// params untouched) on an empty batch or a non-finite gradient.
PolicyParams reinforce_update(const PolicyParams& params, std::span<const Trajectory> batch,
                              std::span<const double> returns, const EmbeddingTable& table,
                              const UpdateOptions& options);

// Last batch in which each (entity, query relation) state was visited.
class VisitTable {
 public:
  std::optional<std::size_t> last_visit(EntityId entity, RelationId query_relation) const;
  void visit(EntityId entity, RelationId query_relation, std::size_t batch);
  std::size_t size() const { return last_.size(); }

 private:
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> last_;
};

// r_max when the state is unseen or was last visited more than `window`
// batches ago, else 0. Records the visit either way.
double drift_bonus(VisitTable& visits, EntityId entity, RelationId query_relation,
                   std::size_t batch, std::size_t window, double r_max);

enum class Optimizer { sgd, adam };

// "sgd" or "adam" (case-insensitive). Throws on anything else.
Optimizer parse_optimizer(std::string_view name);
std::string_view optimizer_name(Optimizer o);

// Adam state for one parameter vector (ascent direction).
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(std::size_t count) : m_(count, 0.0), v_(count, 0.0) {}
  void step(std::span<double> params, std::span<const double> gradient, double learning_rate);

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;
  std::vector<double> m_, v_;
  std::size_t t_ = 0;
};

struct TrainConfig {
  std::size_t episodes_per_batch = 32;
  std::size_t batches = 500;
  double reasoner_learning_rate = 0.003;
  double extractor_learning_rate = 0.003;
  double entropy_weight = 0.1;
  double baseline_decay = 0.9;
  RewardScheme scheme;
  std::size_t horizon = kDefaultHorizon;
  std::uint64_t seed = 0;
  std::size_t drift_window = 10;
  // R-max bonus added to the reasoner's return for coop/adopt/shaped; 0 off.
  double drift_bonus = 0.0;
  bool extractor_enabled = true;
  // sgd applies reinforce_update as is; adam rescales the same gradient.
  Optimizer optimizer = Optimizer::adam;

  void validate() const;
};

struct BatchMetrics {
  std::size_t batch = 0;  // 1-based
  double success_rate = 0.0;
  double avg_return_reasoner = 0.0;  // scheme return, without drift bonus
  double avg_return_extractor = 0.0;
  double adoption_rate = 0.0;  // adopted / injected triples, 0 when none injected
  double avg_hops = 0.0;
  // Mean injected-but-unused triples per episode; reported for game only.
  std::optional<double> rejected_proposals;
};

// Batch-by-batch trainer. Both agents update simultaneously from each batch.
class Trainer {
 public:
  Trainer(const TrainConfig& config, const Dataset& dataset, const EmbeddingTable& table,
          Policies initial);

  BatchMetrics run_batch();
  // Replaces the extraction pool for subsequent batches. Must outlive the trainer.
  void set_pool(const ExtractionPool& pool) { pool_ = &pool; }

  const Policies& policies() const { return policies_; }
  std::size_t batches_run() const { return batch_; }
  const VisitTable& visits() const { return visits_; }

 private:
  TrainConfig config_;
  const Dataset* dataset_;
  const ExtractionPool* pool_;
  const EmbeddingTable* table_;
  Policies policies_;
  Rng rng_;
  AdamState adam_reasoner_;
  AdamState adam_extractor_;
  double baseline_reasoner_ = 0.0;
  double baseline_extractor_ = 0.0;
  std::size_t batch_ = 0;
  VisitTable visits_;
};

struct TrainResult {
  Policies policies;
  std::vector<BatchMetrics> log;
};

// Policies start from initial_policies(d, derive_seed(config.seed, "policy")).
Policies default_initial_policies(const TrainConfig& config, const EmbeddingTable& table);
TrainResult train(const TrainConfig& config, const Dataset& dataset, const EmbeddingTable& table);
TrainResult train(const TrainConfig& config, const Dataset& dataset, const EmbeddingTable& table,
                  Policies initial);

inline constexpr std::string_view kMetricsHeader =
    "batch,success_rate,avg_return_reasoner,avg_return_extractor,adoption_rate,avg_hops,"
    "rejected_proposals";
void write_metrics_csv(std::ostream& out, std::span<const BatchMetrics> log);

// Reasoner GAME-scheme return averaged over sampled rollouts, for
// rows = reasoner {learned, uniform} and columns = extractor
// {learned, uniform, abstain}. Solving it gives the reasoner's security level
// against those extractor behaviours.
struct EmpiricalGame {
  PayoffMatrix payoff;
  std::vector<std::string> row_labels;
  std::vector<std::string> column_labels;
};
EmpiricalGame empirical_game(const Dataset& dataset, const EmbeddingTable& table,
                             const Policies& policies, const RewardScheme& scheme,
                             std::size_t horizon, std::size_t samples_per_query,
                             std::uint64_t seed);

}  // namespace kgcoop
