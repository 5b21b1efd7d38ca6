#pragma once
// Joint episodic MDP for the extractor and the reasoner.
//
// Each step the extractor acts first (inject one pool triple incident to the
// reasoner's entity, or abstain), then the reasoner follows one out-edge of
// the overlay graph or takes SELF_LOOP to stop. Transitions are
// deterministic. An episode ends on SELF_LOOP or after `horizon` reasoner
// steps; the entity where it ends is the answer.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "kgcoop/dataset.hpp"
#include "kgcoop/kg_store.hpp"

namespace kgcoop {

inline constexpr std::size_t kDefaultHorizon = 3;

struct ReasonerAction {
  RelationId relation;
  EntityId target;
  bool self_loop = false;
  friend bool operator==(const ReasonerAction&, const ReasonerAction&) = default;
};

// pool_index empty = ABSTAIN. `oriented` is the triple as seen from the
// reasoner's entity: (e_t, r, x) for head matches, (e_t, r^-1, y) for tails.
struct ExtractorAction {
  std::optional<std::size_t> pool_index;
  Triple oriented{};

  bool abstain() const { return !pool_index.has_value(); }
  friend bool operator==(const ExtractorAction&, const ExtractorAction&) = default;
};

// One hop of the realized path (self-loops are not recorded as hops).
struct Hop {
  EntityId from;
  RelationId relation;
  EntityId to;
};

class EpisodeState {
 public:
  EpisodeState(const KnowledgeGraph& graph, const ExtractionPool& pool, Query query,
               std::size_t horizon);

  const KnowledgeGraph& graph() const { return overlay_.base(); }
  const ExtractionPool& pool() const { return *pool_; }
  const GraphOverlay& overlay() const { return overlay_; }
  const Query& query() const { return query_; }
  std::size_t horizon() const { return horizon_; }

  EntityId current() const { return current_; }
  std::size_t step() const { return step_; }
  bool terminal() const { return terminal_; }
  bool success() const { return terminal_ && query_.is_answer(current_); }

  // (relation, entity) moves taken so far, self-loops included; size = step().
  std::span<const ReasonerAction> history() const { return history_; }
  std::span<const Hop> path() const { return path_; }
  // Pool indices in injection order; adopted is a subset of injected.
  std::span<const std::size_t> injected() const { return injected_; }
  std::span<const std::size_t> adopted() const { return adopted_; }
  bool was_injected(std::size_t pool_index) const;
  std::size_t hop_count() const { return path_.size(); }

  std::vector<ExtractorAction> extractor_candidates() const;
  void step_extractor(const ExtractorAction& action);
  std::vector<ReasonerAction> reasoner_actions() const;
  void step_reasoner(const ReasonerAction& action);

 private:
  void require_active() const;

  GraphOverlay overlay_;
  const ExtractionPool* pool_;
  Query query_;
  std::size_t horizon_;
  EntityId current_;
  std::size_t step_ = 0;
  bool terminal_ = false;
  bool extractor_moved_ = false;
  std::vector<ReasonerAction> history_;
  std::vector<Hop> path_;
  std::vector<std::size_t> injected_;
  std::vector<std::size_t> adopted_;
};

// Throws Error when the query ids are outside the graph vocabulary.
EpisodeState reset(const KnowledgeGraph& graph, const ExtractionPool& pool, const Query& query,
                   std::size_t horizon = kDefaultHorizon);

// Everything needed to replay one step or recompute its policy gradients.
struct StepRecord {
  std::size_t step = 0;
  EntityId entity;
  std::vector<ExtractorAction> extractor_candidates;
  std::size_t extractor_choice = 0;
  std::vector<ReasonerAction> reasoner_actions;
  std::size_t reasoner_choice = 0;
};

struct Trajectory {
  Query query;
  std::size_t horizon = 0;
  std::vector<StepRecord> steps;
  bool finished = false;
  EntityId terminal;
  bool success = false;
  std::size_t hops = 0;
  std::vector<std::size_t> injected;
  std::vector<std::size_t> adopted;
  std::vector<Hop> path;
  // Sum of log-probabilities of every chosen action (both agents).
  double log_prob = 0.0;
  // false when the extractor was forced to abstain (no extractor gradient).
  bool extractor_active = true;

  std::size_t rejected() const { return injected.size() - adopted.size(); }
};

// Copies the outcome of a terminal state into the trajectory.
void finish_trajectory(const EpisodeState& state, Trajectory& trajectory);

// Replays the recorded actions from reset; throws if any was illegal or the
// recorded outcome differs from the replayed one.
void replay(const KnowledgeGraph& graph, const ExtractionPool& pool, const Trajectory& t);

// One event per line, TAB separated:
//   query  <source>  <relation>  <answers>  <horizon>
//   step   <t>  <entity>  extract  <triple|ABSTAIN>  move  <relation>  <entity>
//   end    <terminal>  success  <0|1>  hops  <n>  injected  <n>  adopted  <n>
void dump_trajectory(std::ostream& out, const KnowledgeGraph& graph, const ExtractionPool& pool,
                     const Trajectory& t);

}  // namespace kgcoop
