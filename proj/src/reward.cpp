#include "kgcoop/reward.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "kgcoop/error.hpp"

namespace kgcoop {

void RewardScheme::validate() const {
  if (variant != RewardVariant::game) return;
  if (!(hop_cost > 0.0) || !std::isfinite(hop_cost)) throw Error("hop cost must be positive");
  if (!(rejection_cost > 0.0) || !std::isfinite(rejection_cost)) {
    throw Error("rejection cost must be positive");
  }
}

RewardVariant parse_reward_variant(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "coop") return RewardVariant::coop;
  if (lower == "adopt") return RewardVariant::adopt;
  if (lower == "shaped") return RewardVariant::shaped;
  if (lower == "game") return RewardVariant::game;
  throw Error("unknown reward scheme '" + std::string(name) +
              "' (expected coop, adopt, shaped or game)");
}

std::string_view reward_variant_name(RewardVariant v) {
  switch (v) {
    case RewardVariant::coop: return "coop";
    case RewardVariant::adopt: return "adopt";
    case RewardVariant::shaped: return "shaped";
    case RewardVariant::game: return "game";
  }
  return "unknown";
}

RewardPair compute_rewards(const Trajectory& trajectory, const RewardScheme& scheme,
                           const EmbeddingTable& table) {
  if (!trajectory.finished) throw Error("compute_rewards: trajectory is not terminal");
  const bool success = trajectory.success;
  const bool adopted = !trajectory.adopted.empty();
  switch (scheme.variant) {
    case RewardVariant::coop: {
      const double r = success ? 1.0 : 0.0;
      return {r, r};
    }
    case RewardVariant::adopt:
      return {success ? 1.0 : 0.0, success && adopted ? 1.0 : 0.0};
    case RewardVariant::shaped: {
      if (success) return {1.0, adopted ? 1.0 : 0.0};
      double best = 0.0;
      for (EntityId a : trajectory.query.answers) {
        best = std::max(best, similarity(table, trajectory.terminal, a));
      }
      return {best, best};
    }
    case RewardVariant::game: {
      if (!success) return {0.0, 0.0};
      const double reasoner = 1.0 - scheme.hop_cost * static_cast<double>(trajectory.hops);
      const double extractor =
          1.0 - scheme.rejection_cost * static_cast<double>(trajectory.rejected());
      return {std::max(0.0, reasoner), std::max(0.0, extractor)};
    }
  }
  throw Error("compute_rewards: unknown scheme");
}

}  // namespace kgcoop
