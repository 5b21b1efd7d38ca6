#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "kgcoop/agents.hpp"
#include "kgcoop/error.hpp"
#include "kgcoop/random.hpp"
#include "support.hpp"

using namespace kgcoop;

namespace {

struct Fixture {
  Dataset data = testing::five_entity_dataset();
  EmbeddingTable table = initial_embeddings(data.graph, 4, 2);
  EpisodeState state = reset(data.graph, data.pool, data.queries[0], 3);
};

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("parameter layout") {
  const auto r = zero_policy_params(AgentKind::reasoner, 4);
  CHECK(r.input_dim == 20);
  CHECK(r.hidden_dim == 4);
  CHECK(r.count() == 4 * 20 + 4 + 4 + 1);
  const auto e = zero_policy_params(AgentKind::extractor, 4);
  CHECK(e.input_dim == 24);
  CHECK(e.count() == 4 * 24 + 4 + 4 + 1 + 12);
  CHECK(e.abstain_offset() + 12 == e.count());
}

TEST_CASE("state message") {
  Fixture f;
  const Message m = encode_state(f.table, f.state);
  REQUIRE(m.size() == 12);
  const auto cur = f.table.entity(f.state.current());
  const auto q = f.table.relation(f.state.query().relation);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(m[i] == cur[i]);
    CHECK(m[4 + i] == cur[i]);  // current == source at reset
    CHECK(m[8 + i] == q[i]);
  }
}

TEST_CASE("zero parameters give uniform distributions") {
  Fixture f;
  const Policies p{zero_policy_params(AgentKind::reasoner, 4),
                   zero_policy_params(AgentKind::extractor, 4), 0};
  const LearnedPolicy policy(p, f.table);
  const auto actions = f.state.reasoner_actions();
  for (double x : policy.reasoner_distribution(f.state, actions)) {
    CHECK(x == doctest::Approx(1.0 / actions.size()));
  }
  const auto cands = f.state.extractor_candidates();
  for (double x : policy.extractor_distribution(f.state, cands)) {
    CHECK(x == doctest::Approx(1.0 / cands.size()));
  }
}

TEST_CASE("distributions are normalized and positive") {
  Fixture f;
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const Policies p = initial_policies(4, 100 + i);
    const LearnedPolicy policy(p, f.table);
    const auto r = policy.reasoner_distribution(f.state, f.state.reasoner_actions());
    const auto e = policy.extractor_distribution(f.state, f.state.extractor_candidates());
    CHECK(sum(r) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sum(e) == doctest::Approx(1.0).epsilon(1e-12));
    for (double x : r) CHECK(x > 0.0);
    for (double x : e) CHECK(x > 0.0);
  }
  const Message m = encode_state(f.table, f.state);
  const Policies p = initial_policies(4, 1);
  CHECK_THROWS_AS(reasoner_policy(p.reasoner, m, {}, f.table), Error);
  CHECK_THROWS_AS(reasoner_policy(p.reasoner, Message(3, 0.0), f.state.reasoner_actions(), f.table),
                  Error);
}

TEST_CASE("initial policies are seeded") {
  CHECK(initial_policies(4, 9) == initial_policies(4, 9));
  CHECK_FALSE(initial_policies(4, 9) == initial_policies(4, 10));
}

TEST_CASE("surrogate gradients match central differences") {
  Fixture f;
  const Message m = encode_state(f.table, f.state);
  const auto actions = f.state.reasoner_actions();
  const auto cands = f.state.extractor_candidates();
  const Policies p = initial_policies(4, 5);
  for (std::size_t chosen = 0; chosen < actions.size(); ++chosen) {
    PolicyParams r = p.reasoner;
    std::vector<double> grad(r.count(), 0.0);
    reasoner_surrogate(r, m, actions, f.table, chosen, 0.7, 0.3, grad);
    auto fn = [&](std::vector<double>& x) {
      r.values = x;
      return reasoner_surrogate(r, m, actions, f.table, chosen, 0.7, 0.3, {});
    };
    const auto fd = testing::finite_difference(fn, p.reasoner.values, 1e-5);
    for (std::size_t i = 0; i < grad.size(); ++i) {
      INFO("i=", i, " grad=", grad[i], " fd=", fd[i]);
      CHECK(testing::relative_error(grad[i], fd[i], 1e-6) <= 1e-4);
    }
  }
  for (std::size_t chosen = 0; chosen < cands.size(); ++chosen) {
    PolicyParams e = p.extractor;
    std::vector<double> grad(e.count(), 0.0);
    extractor_surrogate(e, m, cands, f.table, chosen, -1.3, 0.2, grad);
    auto fn = [&](std::vector<double>& x) {
      e.values = x;
      return extractor_surrogate(e, m, cands, f.table, chosen, -1.3, 0.2, {});
    };
    const auto fd = testing::finite_difference(fn, p.extractor.values, 1e-5);
    for (std::size_t i = 0; i < grad.size(); ++i) {
      INFO("i=", i, " grad=", grad[i], " fd=", fd[i]);
      CHECK(testing::relative_error(grad[i], fd[i], 1e-6) <= 1e-4);
    }
  }
}

TEST_CASE("select_action") {
  const std::vector<double> tie{0.4, 0.4, 0.2};
  CHECK(select_action(tie, SelectMode::greedy, nullptr) == 0);
  CHECK(select_action(std::vector<double>{0.1, 0.9}, SelectMode::greedy, nullptr) == 1);
  CHECK_THROWS_AS(select_action(std::vector<double>{}, SelectMode::greedy, nullptr), Error);
  CHECK_THROWS_AS(select_action(std::vector<double>{NAN, 1.0}, SelectMode::greedy, nullptr), Error);
  CHECK_THROWS_AS(select_action(tie, SelectMode::sample, nullptr), Error);

  Rng rng(77);
  const std::vector<double> dist{0.2, 0.5, 0.3};
  std::vector<std::size_t> counts(3, 0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) ++counts[select_action(dist, SelectMode::sample, &rng)];
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(static_cast<double>(counts[i]) / n == doctest::Approx(dist[i]).epsilon(0.05));
  }
}

TEST_CASE("policy checkpoint round trip") {
  const Policies p = initial_policies(3, 8);
  std::stringstream buf;
  write_policies(buf, p);
  const Policies back = read_policies(buf);
  CHECK(back == p);
  testing::TempDir dir("agents");
  save_policies(p, dir.path() / "p.tsv");
  CHECK(load_policies(dir.path() / "p.tsv") == p);
  std::stringstream bad("garbage\n");
  CHECK_THROWS_AS(read_policies(bad), Error);
  CHECK_THROWS_AS(load_policies(dir.path() / "missing.tsv"), Error);
}
