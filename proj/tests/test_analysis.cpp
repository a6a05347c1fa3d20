#include <gtest/gtest.h>

#include <random>
#include <string>

#include "lncsec/analysis.hpp"
#include "oracle.hpp"

namespace {

using namespace lncsec;

const std::string kNsfnet = std::string(LNCSEC_SCENARIO_DIR) + "/nsfnet.cfg";

// Three paths 0->5 over distinct middle nodes; the two shortest share edge 0-2.
scenario three_path_toy() {
  topology topo({0, 2, 3, 4, 5},
                {{{0, 2}, 2}, {{2, 5}, 1}, {{2, 3}, 1}, {{3, 5}, 1}, {{0, 4}, 1}, {{4, 5}, 1}}, 0, 5);
  std::vector<path> paths{make_path(0, {0, 2, 5}, 1, 0.9), make_path(1, {0, 2, 3, 5}, 2, 0.8),
                          make_path(2, {0, 4, 5}, 3, 0.7)};
  return make_scenario("toy3", std::move(topo), std::move(paths), {});
}

TEST(ComboProbability, Examples) {
  const std::vector<double> p{0.8, 0.5};
  EXPECT_DOUBLE_EQ(combo_probability(p, 0b01), 0.4);
  EXPECT_DOUBLE_EQ(combo_probability(p, 0b11), 0.4);
  const std::vector<double> q{0.3, 0.0, 0.9};
  EXPECT_EQ(combo_probability(q, 0b111), 0.0);
  EXPECT_DOUBLE_EQ(combo_probability(q, 0b101), 0.27);
}

TEST(ProbNAvailable, TwoPaths) {
  const std::vector<double> p{0.8, 0.5};
  EXPECT_NEAR(prob_n_available(p, 2), 0.40, 1e-15);
  EXPECT_NEAR(prob_n_available(p, 1), 0.50, 1e-15);
  EXPECT_NEAR(prob_n_available(p, 0), 0.10, 1e-15);
  EXPECT_THROW(prob_n_available(p, 3), precondition_error);
}

TEST(ProbNAvailable, AllOnesPutsMassAtFull) {
  const std::vector<double> p(6, 1.0);
  for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(prob_n_available(p, j), 0.0);
  EXPECT_EQ(prob_n_available(p, 6), 1.0);
}

TEST(ProbNAvailable, SumsToOneOnNsfnet) {
  const auto sc = load_scenario_file(kNsfnet);
  const auto p = sc.paths.availabilities();
  compensated_sum total;
  for (std::size_t j = 0; j <= p.size(); ++j) total.add(prob_n_available(p, j));
  EXPECT_NEAR(total.value(), 1.0, 1e-9);
}

TEST(ProbNAvailable, MatchesPoissonBinomialRecursion) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> p(12);
    for (auto& x : p) x = u(rng);
    std::vector<double> dist{1.0};
    for (double x : p) {
      std::vector<double> next(dist.size() + 1, 0.0);
      for (std::size_t j = 0; j < dist.size(); ++j) {
        next[j] += dist[j] * (1 - x);
        next[j + 1] += dist[j] * x;
      }
      dist = next;
    }
    for (std::size_t j = 0; j <= p.size(); ++j) EXPECT_NEAR(prob_n_available(p, j), dist[j], 1e-14);
  }
}

TEST(Blocking, Examples) {
  EXPECT_NEAR(blocking_probability(std::vector<double>{0.8, 0.5}, 2), 0.60, 1e-15);
  EXPECT_EQ(blocking_probability(std::vector<double>{1.0, 1.0, 1.0}, 1), 0.0);
  EXPECT_THROW(blocking_probability(std::vector<double>{0.8, 0.5}, 3), precondition_error);
  EXPECT_THROW(blocking_probability(std::vector<double>{0.8, 0.5}, 0), precondition_error);
}

TEST(WiretapPathCount, Examples) {
  const auto sc = load_scenario_file(kNsfnet);
  const std::vector<std::size_t> four{0, 1, 9, 14};
  EXPECT_EQ(wiretap_path_count(sc.paths, four, {}), 0u);
  EXPECT_EQ(wiretap_path_count(sc.paths, std::vector<std::size_t>{0, 1, 2, 3}, {{2, 5}}), 4u);
  // paths 0 and 1 cross 2-5; 9 and 14 do not
  EXPECT_EQ(wiretap_path_count(sc.paths, four, {{2, 5}}), 2u);
  EXPECT_EQ(wiretap_path_count(sc.paths, four, {{2, 5}, {0, 2}}), 2u);
}

TEST(ExpectedWiretapPaths, DegenerateCases) {
  topology t({0, 1}, {{{0, 1}, 1}}, 0, 1);
  const auto one = make_scenario("one", t, {make_path(0, {0, 1}, 1, 1.0)}, {});
  EXPECT_DOUBLE_EQ(expected_wiretap_paths_opt(one.paths, {{0, 1}}, 1), 1.0);
  EXPECT_DOUBLE_EQ(expected_wiretap_paths_rnd(one.paths, {{0, 1}}, 1), 1.0);
}

TEST(ExpectedWiretapPaths, EdgeOnNoPath) {
  topology topo({0, 1, 2}, {{{0, 1}, 1}, {{0, 2}, 1}, {{2, 1}, 1}}, 0, 1);
  const auto sc = make_scenario("x", topo, {make_path(0, {0, 1}, 1, 0.7)}, {});
  EXPECT_EQ(expected_wiretap_paths_opt(sc.paths, {{0, 2}}, 1), 0.0);
  EXPECT_EQ(expected_wiretap_paths_rnd(sc.paths, {{0, 2}}, 1), 0.0);

  const auto toy = three_path_toy();
  EXPECT_EQ(expected_wiretap_paths_opt(toy.paths, {}, 2), 0.0);
  EXPECT_EQ(expected_wiretap_paths_rnd(toy.paths, {}, 2), 0.0);
  EXPECT_GT(expected_wiretap_paths_opt(toy.paths, {{2, 3}}, 2), 0.0);
}

TEST(ExpectedWiretapPaths, ThreePathToyFrozenValues) {
  const auto sc = three_path_toy();
  const edge_set shortest_only{{2, 5}};
  // exact rationals from hand enumeration: 423/451, 171/199, 339/451
  EXPECT_NEAR(expected_wiretap_paths_opt(sc.paths, shortest_only, 2), 423.0 / 451.0, 1e-14);
  EXPECT_NEAR(expected_wiretap_paths_rnd(sc.paths, shortest_only, 2), 171.0 / 199.0, 1e-14);
  EXPECT_NEAR(expected_wiretap_paths_rnd(sc.paths, shortest_only, 2, rnd_model::operational),
              339.0 / 451.0, 1e-14);
}

TEST(ExpectedWiretapPaths, AllPathsWiretappedGivesXi) {
  const auto sc = three_path_toy();
  const edge_set everything{{0, 2}, {0, 4}};
  for (std::size_t xi = 1; xi <= 3; ++xi) {
    EXPECT_NEAR(expected_wiretap_paths_rnd(sc.paths, everything, xi), static_cast<double>(xi), 1e-12);
    EXPECT_NEAR(expected_wiretap_paths_opt(sc.paths, everything, xi), static_cast<double>(xi), 1e-12);
  }
}

TEST(ExpectedWiretapPaths, AllAvailableCollapsesToShortestPaths) {
  auto sc = load_scenario_file(kNsfnet);
  std::vector<path> ps(sc.paths.begin(), sc.paths.end());
  for (auto& p : ps) p.availability = 1.0;
  const auto certain = make_scenario("certain", sc.topo, ps, {});
  for (std::size_t xi = 1; xi <= 18; ++xi) {
    for (const auto& e : sc.attack.eavesdrop) {
      std::size_t y = 0;
      for (std::size_t l = 0; l < xi; ++l) y += path_is_wiretapped(certain.paths[l], {e});
      EXPECT_EQ(expected_wiretap_paths_opt(certain.paths, {e}, xi), static_cast<double>(y));
    }
  }
}

TEST(ExpectedWiretapPaths, UndefinedWhenAlwaysBlocked) {
  topology t({0, 1}, {{{0, 1}, 2}}, 0, 1);
  const auto sc = make_scenario("dead", t, {make_path(0, {0, 1}, 1, 0.0), make_path(1, {0, 1}, 1, 0.5)}, {});
  EXPECT_THROW(expected_wiretap_paths_opt(sc.paths, {{0, 1}}, 2), undefined_expectation_error);
  EXPECT_THROW(expected_wiretap_paths_rnd(sc.paths, {{0, 1}}, 2), undefined_expectation_error);
  EXPECT_THROW(expected_wiretap_paths_opt(sc.paths, {{0, 1}}, 3), precondition_error);
}

TEST(AttackedBlocks, Examples) {
  EXPECT_DOUBLE_EQ(attacked_blocks(2, 20, 4), 10.0);
  EXPECT_DOUBLE_EQ(attacked_blocks(0, 20, 4), 0.0);
  EXPECT_DOUBLE_EQ(attacked_blocks(4, 20, 4), 20.0);
  EXPECT_THROW(attacked_blocks(1, 20, 0), precondition_error);
  EXPECT_DOUBLE_EQ(attacked_blocks_per_generation(4, 4), 1.0);
  EXPECT_DOUBLE_EQ(attacked_blocks_per_generation(2, 8), 0.25);
  EXPECT_THROW(attacked_blocks_per_generation(1, 0), precondition_error);
}

TEST(RecommendRedundancy, Examples) {
  EXPECT_EQ(recommend_redundancy(0, 20, 4).redundant_blocks, 0u);
  EXPECT_EQ(recommend_redundancy(1, 20, 5).redundant_blocks, 4u);
  EXPECT_EQ(recommend_redundancy(2, 20, 4).redundant_blocks, 10u);
  EXPECT_EQ(recommend_redundancy(2, 20, 4).jam_threshold, 11u);
  EXPECT_EQ(recommend_redundancy(0.3, 20, 4).redundant_blocks, 2u);
}

TEST(CatastrophicThreat, Examples) {
  topology t({0, 1}, {{{0, 1}, 1}}, 0, 1);
  const auto one = make_scenario("one", t, {make_path(0, {0, 1}, 1, 1.0)}, {});
  EXPECT_DOUBLE_EQ(catastrophic_threat(one.paths, {selection::opt, 1}, 1, edge_key{0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(catastrophic_threat(one.paths, {selection::rnd, 1}, 1, edge_key{0, 1}), 1.0);

  const auto sc = three_path_toy();
  EXPECT_EQ(catastrophic_threat(sc.paths, {selection::opt, 2}, 1, edge_key{2, 3}) > 0, true);
  EXPECT_EQ(catastrophic_threat(sc.paths, {selection::opt, 2}, 3, edge_key{0, 2}), 0.0);  // nu > xi
  // the two shortest paths share 0-2
  EXPECT_NEAR(catastrophic_threat(sc.paths, {selection::opt, 2}, 2, edge_key{0, 2}), 360.0 / 451.0, 1e-14);
  EXPECT_NEAR(catastrophic_threat(sc.paths, {selection::rnd, 2}, 2, edge_key{0, 2}), 108.0 / 199.0, 1e-14);
  EXPECT_NEAR(catastrophic_threat(sc.paths, {selection::rnd, 2}, 2, edge_key{0, 2}, rnd_model::operational),
              192.0 / 451.0, 1e-14);
  EXPECT_THROW(catastrophic_threat(sc.paths, {selection::opt, 2}, 0, edge_key{0, 2}), precondition_error);
}

TEST(CatastrophicThreat, EdgeOnNoPathIsZero) {
  topology topo({0, 1, 2}, {{{0, 1}, 1}, {{0, 2}, 1}, {{2, 1}, 1}}, 0, 1);
  const auto sc = make_scenario("x", topo, {make_path(0, {0, 1}, 1, 0.7)}, {});
  for (auto kind : {selection::opt, selection::rnd}) {
    EXPECT_EQ(catastrophic_threat(sc.paths, {kind, 1}, 1, edge_key{0, 2}), 0.0);
  }
}

TEST(Properties, BoundsAndMonotonicity) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = oracle::random_toy(rng, 3 + rng() % 6);
    const auto& paths = t.scene.paths;
    const std::size_t xi = 1 + rng() % paths.size();
    edge_set bigger = t.wiretap;
    bigger.insert(t.scene.topo.edges()[rng() % t.scene.topo.edges().size()].key);
    for (auto kind : {selection::opt, selection::rnd}) {
      for (auto model : {rnd_model::verbatim, rnd_model::operational}) {
        double y = 0, y_big = 0;
        try {
          y = expected_wiretap_paths(paths, t.wiretap, {kind, xi}, model);
          y_big = expected_wiretap_paths(paths, bigger, {kind, xi}, model);
        } catch (const undefined_expectation_error&) {
          continue;
        }
        EXPECT_GE(y, -1e-12);
        EXPECT_LE(y, static_cast<double>(xi) + 1e-12);
        EXPECT_GE(y_big, y - 1e-12);
        double prev = 1.0;
        for (std::size_t nu = 1; nu <= xi + 1; ++nu) {
          const double th = catastrophic_threat(paths, {kind, xi}, nu, t.wiretap, model);
          const double th_big = catastrophic_threat(paths, {kind, xi}, nu, bigger, model);
          EXPECT_GE(th, -1e-12);
          EXPECT_LE(th, 1.0 + 1e-12);
          EXPECT_LE(th, prev + 1e-12);
          EXPECT_GE(th_big, th - 1e-12);
          prev = th;
        }
      }
    }
  }
}

TEST(OracleEquivalence, RandomToys) {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const auto t = oracle::random_toy(rng, 2 + rng() % 8);
    const auto& paths = t.scene.paths;
    const std::size_t xi = 1 + rng() % paths.size();
    const std::size_t nu = 1 + rng() % xi;
    const auto ref = oracle::enumerate(paths, t.wiretap, xi, nu);
    const auto probs = paths.availabilities();
    for (std::size_t j = 0; j <= paths.size(); ++j) EXPECT_NEAR(prob_n_available(probs, j), ref.n_available[j], 1e-12);
    EXPECT_NEAR(blocking_probability(probs, xi), ref.blocking, 1e-12);
    if (ref.blocking >= 1.0 - 1e-15) continue;
    EXPECT_NEAR(expected_wiretap_paths_opt(paths, t.wiretap, xi), ref.y_opt, 1e-12);
    EXPECT_NEAR(expected_wiretap_paths_rnd(paths, t.wiretap, xi, rnd_model::operational), ref.y_rnd_uniform, 1e-12);
    EXPECT_NEAR(catastrophic_threat(paths, {selection::opt, xi}, nu, t.wiretap), ref.theta_opt, 1e-12);
    EXPECT_NEAR(catastrophic_threat(paths, {selection::rnd, xi}, nu, t.wiretap, rnd_model::operational),
                ref.theta_rnd_uniform, 1e-12);
    if (ref.n_available[xi] > 0) {
      EXPECT_NEAR(expected_wiretap_paths_rnd(paths, t.wiretap, xi), ref.y_rnd_verbatim, 1e-12);
      EXPECT_NEAR(catastrophic_threat(paths, {selection::rnd, xi}, nu, t.wiretap), ref.theta_rnd_verbatim, 1e-12);
    }
    ++checked;
  }
  EXPECT_GE(checked, 20);
}

TEST(Evaluate, ReportIsConsistent) {
  const auto sc = load_scenario_file(kNsfnet);
  for (auto kind : {selection::opt, selection::rnd}) {
    const auto rep = evaluate(sc.paths, {{2, 5}}, kind, 4, 1, 20);
    EXPECT_EQ(rep.policy.xi, 5u);
    EXPECT_NEAR(rep.lambda, 20.0 * rep.expected_wiretap_paths / 5.0, 1e-12);
    EXPECT_NEAR(rep.lambda_fraction(), rep.expected_wiretap_paths / 5.0, 1e-12);
    EXPECT_NEAR(rep.lambda_star, rep.expected_wiretap_paths / 4.0, 1e-12);
    EXPECT_GE(rep.theta_jam, rep.theta_eavesdrop);  // nu = 2 vs nu = 4
    EXPECT_NEAR(rep.blocking, blocking_probability(sc.paths.availabilities(), 5), 0.0);
  }
  EXPECT_THROW(evaluate(sc.paths, {}, selection::opt, 0, 1, 20), precondition_error);
}

TEST(Evaluate, OptFullGenerationExposedWithOneRedundantBlock) {
  const auto sc = load_scenario_file(kNsfnet);
  const auto rep = evaluate(sc.paths, {{2, 5}}, selection::opt, 4, 1, 20);
  EXPECT_GE(rep.lambda_star, 1.0);
}

TEST(Enumeration, RejectsOversizedUniverse) {
  const std::vector<double> p(31, 0.5);
  EXPECT_THROW(prob_n_available(p, 3), precondition_error);
}

}  // namespace
