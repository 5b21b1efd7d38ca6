#pragma once
// Terminal credit assignment for the two agents. No discounting: each agent
// receives one return per episode.

#include <string>
#include <string_view>

#include "kgcoop/embed.hpp"
#include "kgcoop/env.hpp"

namespace kgcoop {

enum class RewardVariant {
  coop,    // both agents get 1 on success
  adopt,   // extractor also needs one of its triples on the path
  shaped,  // adopt, plus embedding similarity credit on failure
  game,    // success minus per-agent costs (hops / unused injections)
};

struct RewardScheme {
  RewardVariant variant = RewardVariant::coop;
  double hop_cost = 0.1;        // game only
  double rejection_cost = 0.1;  // game only

  // Throws Error when a game cost is not positive.
  void validate() const;
};

// "coop", "adopt", "shaped", "game" (case-insensitive). Throws on anything else.
RewardVariant parse_reward_variant(std::string_view name);
std::string_view reward_variant_name(RewardVariant v);

struct RewardPair {
  double reasoner = 0.0;
  double extractor = 0.0;
};

// Throws Error on an unfinished trajectory.
RewardPair compute_rewards(const Trajectory& trajectory, const RewardScheme& scheme,
                           const EmbeddingTable& table);

}  // namespace kgcoop
