#include "kgcoop/env.hpp"

#include <algorithm>
#include <ostream>

#include "kgcoop/error.hpp"

namespace kgcoop {

EpisodeState::EpisodeState(const KnowledgeGraph& graph, const ExtractionPool& pool, Query query,
                           std::size_t horizon)
    : overlay_(graph), pool_(&pool), query_(std::move(query)), horizon_(horizon) {
  if (!graph.valid(query_.source)) throw Error("query source outside the graph");
  if (!graph.valid(query_.relation) || graph.is_self_loop(query_.relation)) {
    throw Error("query relation outside the graph");
  }
  for (EntityId a : query_.answers) {
    if (!graph.valid(a)) throw Error("query answer outside the graph");
  }
  current_ = query_.source;
  terminal_ = horizon_ == 0;
}

bool EpisodeState::was_injected(std::size_t pool_index) const {
  return std::find(injected_.begin(), injected_.end(), pool_index) != injected_.end();
}

void EpisodeState::require_active() const {
  if (terminal_) throw Error("episode already terminal");
}

std::vector<ExtractorAction> EpisodeState::extractor_candidates() const {
  std::vector<ExtractorAction> out;
  for (std::size_t i : pool_->incident(current_)) {
    if (was_injected(i)) continue;
    const Triple& t = (*pool_)[i].triple;
    if (t.head == current_) {
      out.push_back(ExtractorAction{i, t});
    } else {
      out.push_back(ExtractorAction{i, Triple{current_, graph().inverse(t.relation), t.head}});
    }
  }
  out.push_back(ExtractorAction{});
  return out;
}

void EpisodeState::step_extractor(const ExtractorAction& action) {
  require_active();
  if (extractor_moved_) throw Error("extractor already acted this step");
  if (!action.abstain()) {
    const auto legal = extractor_candidates();
    if (std::find(legal.begin(), legal.end(), action) == legal.end()) {
      throw Error("illegal extractor action");
    }
    overlay_.add_triple((*pool_)[*action.pool_index].triple);
    injected_.push_back(*action.pool_index);
  }
  extractor_moved_ = true;
}

std::vector<ReasonerAction> EpisodeState::reasoner_actions() const {
  std::vector<ReasonerAction> out;
  for (const Edge& e : overlay_.neighbors(current_)) {
    out.push_back(ReasonerAction{e.relation, e.target, false});
  }
  out.push_back(ReasonerAction{graph().self_loop(), current_, true});
  return out;
}

void EpisodeState::step_reasoner(const ReasonerAction& action) {
  require_active();
  const auto legal = reasoner_actions();
  if (std::find(legal.begin(), legal.end(), action) == legal.end()) {
    throw Error("illegal reasoner action");
  }
  history_.push_back(action);
  if (action.self_loop) {
    terminal_ = true;
  } else {
    const Hop hop{current_, action.relation, action.target};
    path_.push_back(hop);
    for (std::size_t i : injected_) {
      const Triple& t = (*pool_)[i].triple;
      const bool forward = t.head == hop.from && t.relation == hop.relation && t.tail == hop.to;
      const bool backward = t.tail == hop.from && graph().inverse(t.relation) == hop.relation &&
                            t.head == hop.to;
      if ((forward || backward) &&
          std::find(adopted_.begin(), adopted_.end(), i) == adopted_.end()) {
        adopted_.push_back(i);
      }
    }
    current_ = action.target;
  }
  ++step_;
  extractor_moved_ = false;
  if (step_ >= horizon_) terminal_ = true;
}

EpisodeState reset(const KnowledgeGraph& graph, const ExtractionPool& pool, const Query& query,
                   std::size_t horizon) {
  return EpisodeState(graph, pool, query, horizon);
}

void finish_trajectory(const EpisodeState& state, Trajectory& trajectory) {
  if (!state.terminal()) throw Error("finish_trajectory: episode not terminal");
  trajectory.query = state.query();
  trajectory.horizon = state.horizon();
  trajectory.finished = true;
  trajectory.terminal = state.current();
  trajectory.success = state.success();
  trajectory.hops = state.hop_count();
  trajectory.injected.assign(state.injected().begin(), state.injected().end());
  trajectory.adopted.assign(state.adopted().begin(), state.adopted().end());
  trajectory.path.assign(state.path().begin(), state.path().end());
}

void replay(const KnowledgeGraph& graph, const ExtractionPool& pool, const Trajectory& t) {
  EpisodeState state = reset(graph, pool, t.query, t.horizon);
  for (const StepRecord& rec : t.steps) {
    if (state.terminal()) throw Error("replay: steps recorded past the end of the episode");
    if (state.current() != rec.entity) throw Error("replay: entity mismatch");
    const auto candidates = state.extractor_candidates();
    if (candidates != rec.extractor_candidates) throw Error("replay: candidate set mismatch");
    state.step_extractor(candidates.at(rec.extractor_choice));
    const auto actions = state.reasoner_actions();
    if (actions != rec.reasoner_actions) throw Error("replay: action set mismatch");
    state.step_reasoner(actions.at(rec.reasoner_choice));
  }
  if (!state.terminal()) throw Error("replay: episode did not terminate");
  if (state.current() != t.terminal || state.success() != t.success ||
      state.hop_count() != t.hops ||
      !std::equal(state.adopted().begin(), state.adopted().end(), t.adopted.begin(),
                  t.adopted.end()) ||
      !std::equal(state.injected().begin(), state.injected().end(), t.injected.begin(),
                  t.injected.end())) {
    throw Error("replay: outcome mismatch");
  }
}

void dump_trajectory(std::ostream& out, const KnowledgeGraph& graph, const ExtractionPool& pool,
                     const Trajectory& t) {
  out << "query\t" << graph.entity_name(t.query.source) << '\t'
      << graph.relation_name(t.query.relation) << '\t';
  for (std::size_t i = 0; i < t.query.answers.size(); ++i) {
    if (i) out << ',';
    out << graph.entity_name(t.query.answers[i]);
  }
  out << '\t' << t.horizon << '\n';
  for (const StepRecord& rec : t.steps) {
    out << "step\t" << rec.step << '\t' << graph.entity_name(rec.entity) << "\textract\t";
    const ExtractorAction& ex = rec.extractor_candidates.at(rec.extractor_choice);
    if (ex.abstain()) {
      out << "ABSTAIN";
    } else {
      const Triple& tr = pool[*ex.pool_index].triple;
      out << graph.entity_name(tr.head) << ' ' << graph.relation_name(tr.relation) << ' '
          << graph.entity_name(tr.tail);
    }
    const ReasonerAction& mv = rec.reasoner_actions.at(rec.reasoner_choice);
    out << "\tmove\t" << graph.relation_name(mv.relation) << '\t'
        << graph.entity_name(mv.target) << '\n';
  }
  out << "end\t" << graph.entity_name(t.terminal) << "\tsuccess\t" << (t.success ? 1 : 0)
      << "\thops\t" << t.hops << "\tinjected\t" << t.injected.size() << "\tadopted\t"
      << t.adopted.size() << '\n';
}

}  // namespace kgcoop
