#include "kgcoop/train.hpp"

#include <cctype>
#include <cmath>
#include <ostream>

#include "kgcoop/error.hpp"
#include "kgcoop/text_format.hpp"

namespace kgcoop {

Trajectory rollout(const KnowledgeGraph& graph, const ExtractionPool& pool, const Query& query,
                   const JointPolicy& policy, const RolloutOptions& options, Rng& rng) {
  EpisodeState state = reset(graph, pool, query, options.horizon);
  Trajectory t;
  t.extractor_active = options.extractor_enabled;
  auto choose = [&](std::span<const double> dist) {
    const std::size_t i = select_action(dist, options.mode, &rng);
    t.log_prob += std::log(dist[i]);
    return i;
  };
  while (!state.terminal()) {
    StepRecord rec;
    rec.step = state.step();
    rec.entity = state.current();
    rec.extractor_candidates = state.extractor_candidates();
    if (!options.extractor_enabled) {
      rec.extractor_choice = rec.extractor_candidates.size() - 1;
    } else if (rec.extractor_candidates.size() > 1) {
      rec.extractor_choice =
          choose(policy.extractor_distribution(state, rec.extractor_candidates));
    }
    state.step_extractor(rec.extractor_candidates[rec.extractor_choice]);

    rec.reasoner_actions = state.reasoner_actions();
    if (rec.reasoner_actions.size() > 1) {
      rec.reasoner_choice = choose(policy.reasoner_distribution(state, rec.reasoner_actions));
    }
    state.step_reasoner(rec.reasoner_actions[rec.reasoner_choice]);
    t.steps.push_back(std::move(rec));
  }
  finish_trajectory(state, t);
  return t;
}

double reinforce_surrogate(const PolicyParams& params, std::span<const Trajectory> batch,
                           std::span<const double> returns, const EmbeddingTable& table,
                           double baseline, double entropy_weight,
                           std::vector<double>* gradient) {
  if (batch.size() != returns.size()) throw Error("one return per trajectory required");
  std::span<double> grad;
  if (gradient) {
    gradient->assign(params.count(), 0.0);
    grad = *gradient;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Trajectory& t = batch[i];
    const double advantage = returns[i] - baseline;
    for (const StepRecord& rec : t.steps) {
      const Message msg = encode_state(table, rec.entity, t.query);
      if (params.kind == AgentKind::reasoner) {
        total += reasoner_surrogate(params, msg, rec.reasoner_actions, table, rec.reasoner_choice,
                                    advantage, entropy_weight, grad);
      } else if (t.extractor_active) {
        total += extractor_surrogate(params, msg, rec.extractor_candidates, table,
                                     rec.extractor_choice, advantage, entropy_weight, grad);
      }
    }
  }
  return total;
}

PolicyParams reinforce_update(const PolicyParams& params, std::span<const Trajectory> batch,
                              std::span<const double> returns, const EmbeddingTable& table,
                              const UpdateOptions& options) {
  if (batch.empty()) throw Error("reinforce_update: empty batch");
  std::vector<double> grad;
  reinforce_surrogate(params, batch, returns, table, options.baseline, options.entropy_weight,
                      &grad);
  for (double g : grad) {
    if (!std::isfinite(g)) throw Error("reinforce_update: non-finite gradient");
  }
  PolicyParams out = params;
  for (std::size_t i = 0; i < grad.size(); ++i) out.values[i] += options.learning_rate * grad[i];
  return out;
}

std::optional<std::size_t> VisitTable::last_visit(EntityId entity,
                                                  RelationId query_relation) const {
  auto it = last_.find({entity.value, query_relation.value});
  if (it == last_.end()) return std::nullopt;
  return it->second;
}

void VisitTable::visit(EntityId entity, RelationId query_relation, std::size_t batch) {
  auto& slot = last_[{entity.value, query_relation.value}];
  if (batch < slot) throw Error("visit table: batch index went backwards");
  slot = batch;
}

double drift_bonus(VisitTable& visits, EntityId entity, RelationId query_relation,
                   std::size_t batch, std::size_t window, double r_max) {
  const auto last = visits.last_visit(entity, query_relation);
  const bool fire = !last || batch - *last > window;
  visits.visit(entity, query_relation, batch);
  return fire ? r_max : 0.0;
}

Optimizer parse_optimizer(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "sgd") return Optimizer::sgd;
  if (lower == "adam") return Optimizer::adam;
  throw Error("unknown optimizer '" + std::string(name) + "' (expected sgd or adam)");
}

std::string_view optimizer_name(Optimizer o) {
  return o == Optimizer::adam ? "adam" : "sgd";
}

void AdamState::step(std::span<double> params, std::span<const double> gradient,
                     double learning_rate) {
  if (params.size() != m_.size() || gradient.size() != m_.size()) {
    throw Error("adam: parameter count mismatch");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * gradient[i];
    v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * gradient[i] * gradient[i];
    params[i] += learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + kEpsilon);
  }
}

void TrainConfig::validate() const {
  if (episodes_per_batch == 0) throw Error("episodes per batch must be positive");
  auto check_rate = [](double v, const char* what) {
    if (!std::isfinite(v) || v < 0.0) throw Error(std::string(what) + " must be non-negative");
  };
  check_rate(reasoner_learning_rate, "reasoner learning rate");
  check_rate(extractor_learning_rate, "extractor learning rate");
  check_rate(entropy_weight, "entropy weight");
  check_rate(drift_bonus, "drift bonus");
  if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) {
    throw Error("baseline decay must be in [0, 1)");
  }
  if (drift_window == 0) throw Error("drift window must be at least 1");
  if (horizon == 0) throw Error("horizon must be positive");
  scheme.validate();
}

Trainer::Trainer(const TrainConfig& config, const Dataset& dataset, const EmbeddingTable& table,
                 Policies initial)
    : config_(config),
      dataset_(&dataset),
      pool_(&dataset.pool),
      table_(&table),
      policies_(std::move(initial)),
      rng_(derive_seed(config.seed, "rollout")),
      adam_reasoner_(policies_.reasoner.count()),
      adam_extractor_(policies_.extractor.count()) {
  config_.validate();
  table.check_matches(dataset.graph);
  if (dataset.queries.empty()) throw Error("training needs at least one query");
  if (policies_.dimension() != table.dimension()) {
    throw Error("policy dimension does not match the embeddings");
  }
}

BatchMetrics Trainer::run_batch() {
  ++batch_;
  const std::size_t n = config_.episodes_per_batch;
  const LearnedPolicy policy(policies_, *table_);
  const RolloutOptions options{SelectMode::sample, config_.horizon, config_.extractor_enabled};
  const bool use_bonus =
      config_.drift_bonus > 0.0 && config_.scheme.variant != RewardVariant::game;

  std::vector<Trajectory> batch;
  batch.reserve(n);
  std::vector<double> reasoner_returns, extractor_returns;
  BatchMetrics m;
  m.batch = batch_;
  std::size_t injected = 0, adopted = 0, rejected = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Query& q = dataset_->queries[rng_.index(dataset_->queries.size())];
    Trajectory t = rollout(dataset_->graph, *pool_, q, policy, options, rng_);
    const RewardPair r = compute_rewards(t, config_.scheme, *table_);
    double bonus = 0.0;
    if (use_bonus) {
      for (const StepRecord& rec : t.steps) {
        bonus += drift_bonus(visits_, rec.entity, q.relation, batch_, config_.drift_window,
                             config_.drift_bonus);
      }
      bonus += drift_bonus(visits_, t.terminal, q.relation, batch_, config_.drift_window,
                           config_.drift_bonus);
    }
    reasoner_returns.push_back(r.reasoner + bonus);
    extractor_returns.push_back(r.extractor);
    m.success_rate += t.success ? 1.0 : 0.0;
    m.avg_return_reasoner += r.reasoner;
    m.avg_return_extractor += r.extractor;
    m.avg_hops += static_cast<double>(t.hops);
    injected += t.injected.size();
    adopted += t.adopted.size();
    rejected += t.rejected();
    batch.push_back(std::move(t));
  }

  auto update = [&](PolicyParams& params, const std::vector<double>& returns, double lr,
                    double baseline, AdamState& adam) {
    if (config_.optimizer == Optimizer::sgd) {
      params = reinforce_update(params, batch, returns, *table_,
                                {lr, baseline, config_.entropy_weight});
      return;
    }
    std::vector<double> grad;
    reinforce_surrogate(params, batch, returns, *table_, baseline, config_.entropy_weight, &grad);
    for (double g : grad) {
      if (!std::isfinite(g)) throw Error("training: non-finite gradient");
    }
    adam.step(params.values, grad, lr);
  };
  // Both gradients are taken at the pre-update parameters.
  update(policies_.reasoner, reasoner_returns, config_.reasoner_learning_rate, baseline_reasoner_,
         adam_reasoner_);
  if (config_.extractor_enabled) {
    update(policies_.extractor, extractor_returns, config_.extractor_learning_rate,
           baseline_extractor_, adam_extractor_);
  }

  const double count = static_cast<double>(n);
  auto mean = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / count;
  };
  const double decay = config_.baseline_decay;
  baseline_reasoner_ = decay * baseline_reasoner_ + (1.0 - decay) * mean(reasoner_returns);
  baseline_extractor_ = decay * baseline_extractor_ + (1.0 - decay) * mean(extractor_returns);

  m.success_rate /= count;
  m.avg_return_reasoner /= count;
  m.avg_return_extractor /= count;
  m.avg_hops /= count;
  m.adoption_rate = injected ? static_cast<double>(adopted) / static_cast<double>(injected) : 0.0;
  if (config_.scheme.variant == RewardVariant::game) {
    m.rejected_proposals = static_cast<double>(rejected) / count;
  }
  return m;
}

Policies default_initial_policies(const TrainConfig& config, const EmbeddingTable& table) {
  return initial_policies(table.dimension(), derive_seed(config.seed, "policy"));
}

TrainResult train(const TrainConfig& config, const Dataset& dataset, const EmbeddingTable& table) {
  return train(config, dataset, table, default_initial_policies(config, table));
}

TrainResult train(const TrainConfig& config, const Dataset& dataset, const EmbeddingTable& table,
                  Policies initial) {
  Trainer trainer(config, dataset, table, std::move(initial));
  TrainResult result;
  result.log.reserve(config.batches);
  for (std::size_t b = 0; b < config.batches; ++b) result.log.push_back(trainer.run_batch());
  result.policies = trainer.policies();
  return result;
}

void write_metrics_csv(std::ostream& out, std::span<const BatchMetrics> log) {
  out << kMetricsHeader << '\n';
  for (const BatchMetrics& m : log) {
    out << m.batch << ',' << format_double(m.success_rate) << ','
        << format_double(m.avg_return_reasoner) << ',' << format_double(m.avg_return_extractor)
        << ',' << format_double(m.adoption_rate) << ',' << format_double(m.avg_hops) << ',';
    if (m.rejected_proposals) out << format_double(*m.rejected_proposals);
    out << '\n';
  }
}

namespace {

// Reasoner from params; extractor from params or forced to abstain.
class ProfilePolicy final : public JointPolicy {
 public:
  ProfilePolicy(const PolicyParams& reasoner, const PolicyParams* extractor,
                const EmbeddingTable& table)
      : reasoner_(&reasoner), extractor_(extractor), table_(&table) {}

  std::vector<double> extractor_distribution(
      const EpisodeState& state, std::span<const ExtractorAction> candidates) const override {
    if (!extractor_) {
      std::vector<double> d(candidates.size(), 0.0);
      d.back() = 1.0;
      return d;
    }
    return extractor_policy(*extractor_, encode_state(*table_, state), candidates, *table_);
  }
  std::vector<double> reasoner_distribution(
      const EpisodeState& state, std::span<const ReasonerAction> actions) const override {
    return reasoner_policy(*reasoner_, encode_state(*table_, state), actions, *table_);
  }

 private:
  const PolicyParams* reasoner_;
  const PolicyParams* extractor_;
  const EmbeddingTable* table_;
};

}  // namespace

EmpiricalGame empirical_game(const Dataset& dataset, const EmbeddingTable& table,
                             const Policies& policies, const RewardScheme& scheme,
                             std::size_t horizon, std::size_t samples_per_query,
                             std::uint64_t seed) {
  if (dataset.queries.empty()) throw Error("empirical game needs at least one query");
  if (samples_per_query == 0) throw Error("empirical game needs at least one sample");
  RewardScheme game = scheme;
  game.variant = RewardVariant::game;
  game.validate();

  const std::size_t d = policies.dimension();
  const PolicyParams uniform_reasoner = zero_policy_params(AgentKind::reasoner, d);
  const PolicyParams uniform_extractor = zero_policy_params(AgentKind::extractor, d);
  const PolicyParams* rows[] = {&policies.reasoner, &uniform_reasoner};
  const PolicyParams* cols[] = {&policies.extractor, &uniform_extractor, nullptr};

  EmpiricalGame out;
  out.row_labels = {"learned", "uniform"};
  out.column_labels = {"learned", "uniform", "abstain"};
  Rng rng(derive_seed(seed, "empirical-game"));
  const RolloutOptions options{SelectMode::sample, horizon, true};
  for (const PolicyParams* r : rows) {
    std::vector<double> row;
    for (const PolicyParams* c : cols) {
      const ProfilePolicy profile(*r, c, table);
      double total = 0.0;
      for (const Query& q : dataset.queries) {
        for (std::size_t s = 0; s < samples_per_query; ++s) {
          const Trajectory t = rollout(dataset.graph, dataset.pool, q, profile, options, rng);
          total += compute_rewards(t, game, table).reasoner;
        }
      }
      row.push_back(total / static_cast<double>(dataset.queries.size() * samples_per_query));
    }
    out.payoff.push_back(std::move(row));
  }
  return out;
}

}  // namespace kgcoop
