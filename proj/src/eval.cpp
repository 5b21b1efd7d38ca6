#include "kgcoop/eval.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "kgcoop/error.hpp"
#include "kgcoop/random.hpp"
#include "kgcoop/text_format.hpp"
#include "kgcoop/train.hpp"

namespace kgcoop {

namespace {

struct Candidate {
  EntityId entity;
  std::size_t count = 0;
  double log_prob_sum = 0.0;

  double mean_log_prob() const { return log_prob_sum / static_cast<double>(count); }
};

std::string signed_value(double x) {
  return (x > 0.0 ? "+" : "") + format_double(x);
}

}  // namespace

Metrics evaluate(const JointPolicy& policy, const Dataset& dataset, const EvalConfig& config) {
  if (dataset.queries.empty()) throw Error("evaluate: dataset has no queries");
  if (config.k == 0) throw Error("evaluate: k must be at least 1");
  const std::size_t samples = config.mode == SelectMode::greedy ? 1 : config.num_samples;
  if (samples == 0) throw Error("evaluate: num_samples must be positive");

  Rng rng(derive_seed(config.seed, "eval"));
  const RolloutOptions options{config.mode, config.horizon, config.extractor_enabled};
  Metrics m;
  m.k = config.k;
  m.query_count = dataset.queries.size();
  m.dataset_id = dataset.id;
  std::size_t rollouts = 0, successes = 0, hops = 0, injected = 0, adopted = 0;
  for (const Query& q : dataset.queries) {
    std::map<std::uint32_t, Candidate> seen;
    for (std::size_t s = 0; s < samples; ++s) {
      const Trajectory t = rollout(dataset.graph, dataset.pool, q, policy, options, rng);
      Candidate& c = seen[t.terminal.value];
      c.entity = t.terminal;
      ++c.count;
      c.log_prob_sum += t.log_prob;
      ++rollouts;
      successes += t.success ? 1 : 0;
      hops += t.hops;
      injected += t.injected.size();
      adopted += t.adopted.size();
    }
    std::vector<Candidate> ranked;
    for (const auto& [id, c] : seen) ranked.push_back(c);
    std::sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) {
      if (a.count != b.count) return a.count > b.count;
      if (a.mean_log_prob() != b.mean_log_prob()) return a.mean_log_prob() > b.mean_log_prob();
      return a.entity < b.entity;
    });
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      if (!q.is_answer(ranked[i].entity)) continue;
      const std::size_t rank = i + 1;
      if (rank == 1) m.hits_at_1 += 1.0;
      if (rank <= config.k) m.hits_at_k += 1.0;
      m.mrr += 1.0 / static_cast<double>(rank);
      break;
    }
  }
  const double nq = static_cast<double>(m.query_count);
  m.hits_at_1 /= nq;
  m.hits_at_k /= nq;
  m.mrr /= nq;
  m.avg_hops = static_cast<double>(hops) / static_cast<double>(rollouts);
  m.success_rate = static_cast<double>(successes) / static_cast<double>(rollouts);
  m.adoption_rate =
      injected ? static_cast<double>(adopted) / static_cast<double>(injected) : 0.0;
  return m;
}

Metrics evaluate(const Policies& policies, const Dataset& dataset, const EmbeddingTable& table,
                 const EvalConfig& config) {
  table.check_matches(dataset.graph);
  const LearnedPolicy policy(policies, table);
  return evaluate(policy, dataset, config);
}

MetricsDelta compare(const Metrics& a, const Metrics& b) {
  if (a.dataset_id != b.dataset_id) throw Error("compare: metrics come from different datasets");
  if (a.k != b.k) throw Error("compare: metrics use different k");
  return MetricsDelta{a.hits_at_1 - b.hits_at_1, a.hits_at_k - b.hits_at_k, a.mrr - b.mrr,
                      a.avg_hops - b.avg_hops,   a.adoption_rate - b.adoption_rate,
                      a.success_rate - b.success_rate};
}

void write_metrics_row(std::ostream& out, const Metrics& m) {
  out << m.query_count << ',' << m.k << ',' << format_double(m.hits_at_1) << ','
      << format_double(m.hits_at_k) << ',' << format_double(m.mrr) << ','
      << format_double(m.avg_hops) << ',' << format_double(m.adoption_rate) << ','
      << format_double(m.success_rate) << '\n';
}

void write_summary(std::ostream& out, const Metrics& m) {
  out << "queries        " << m.query_count << '\n'
      << "hits@1         " << format_double(m.hits_at_1) << '\n'
      << "hits@" << m.k << "         " << format_double(m.hits_at_k) << '\n'
      << "mrr            " << format_double(m.mrr) << '\n'
      << "avg hops       " << format_double(m.avg_hops) << '\n'
      << "adoption rate  " << format_double(m.adoption_rate) << '\n'
      << "success rate   " << format_double(m.success_rate) << '\n';
}

void write_delta(std::ostream& out, const MetricsDelta& d) {
  out << "delta hits@1         " << signed_value(d.hits_at_1) << '\n'
      << "delta hits@k         " << signed_value(d.hits_at_k) << '\n'
      << "delta mrr            " << signed_value(d.mrr) << '\n'
      << "delta avg hops       " << signed_value(d.avg_hops) << '\n'
      << "delta adoption rate  " << signed_value(d.adoption_rate) << '\n'
      << "delta success rate   " << signed_value(d.success_rate) << '\n';
}

}  // namespace kgcoop
