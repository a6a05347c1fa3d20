#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <string>

#include "lncsec/sim.hpp"

namespace {

using namespace lncsec;

const std::string kNsfnet = std::string(LNCSEC_SCENARIO_DIR) + "/nsfnet.cfg";

scenario three_path_toy() {
  topology topo({0, 2, 3, 4, 5},
                {{{0, 2}, 2}, {{2, 5}, 1}, {{2, 3}, 1}, {{3, 5}, 1}, {{0, 4}, 1}, {{4, 5}, 1}}, 0, 5);
  std::vector<path> paths{make_path(0, {0, 2, 5}, 1, 0.9), make_path(1, {0, 2, 3, 5}, 2, 0.8),
                          make_path(2, {0, 4, 5}, 3, 0.7)};
  return make_scenario("toy3", std::move(topo), std::move(paths), {});
}

// n parallel single-hop paths 0 -> 1 through relay nodes 2..n+1.
scenario fan(const std::vector<double>& probs) {
  std::vector<node_id> nodes{0, 1};
  std::vector<edge> edges;
  std::vector<path> paths;
  for (std::size_t l = 0; l < probs.size(); ++l) {
    const auto relay = static_cast<node_id>(l + 2);
    nodes.push_back(relay);
    edges.push_back({{0, relay}, 1});
    edges.push_back({{relay, 1}, 1});
    paths.push_back(make_path(l, {0, relay, 1}, static_cast<double>(l + 1), probs[l]));
  }
  return make_scenario("fan", topology(nodes, edges, 0, 1), std::move(paths), {});
}

TEST(TrialRng, DependsOnlyOnSeedAndTrial) {
  auto a = trial_rng(7, 3);
  auto b = trial_rng(7, 3);
  auto c = trial_rng(7, 4);
  auto d = trial_rng(8, 3);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, d());
}

TEST(SampleAvailability, FrequencyMatchesProbability) {
  const auto sc = load_scenario_file(kNsfnet);
  constexpr int n = 40000;
  std::vector<int> up(sc.paths.size(), 0);
  std::mt19937_64 rng(12);
  for (int t = 0; t < n; ++t) {
    const auto mask = sample_availability(sc.paths, rng);
    for (std::size_t l = 0; l < sc.paths.size(); ++l) up[l] += (mask >> l) & 1u;
  }
  for (std::size_t l = 0; l < sc.paths.size(); ++l) {
    const double p = sc.paths[l].availability;
    const double sigma = std::sqrt(p * (1 - p) / n);
    EXPECT_NEAR(up[l] / static_cast<double>(n), p, 3 * sigma) << "path " << l;
  }
}

TEST(SelectPaths, BlockedWhenTooFewAvailable) {
  std::mt19937_64 rng(1);
  EXPECT_FALSE(select_paths(selection::opt, 0b0101, 3, rng));
  EXPECT_FALSE(select_paths(selection::rnd, 0b0101, 3, rng));
  EXPECT_FALSE(select_paths(selection::opt, 0, 1, rng));
}

TEST(SelectPaths, OptTakesLowestDelayPositions) {
  std::mt19937_64 rng(1);
  const auto got = select_paths(selection::opt, 0b110110, 3, rng);
  ASSERT_TRUE(got);
  EXPECT_EQ(*got, (std::vector<std::size_t>{1, 2, 4}));
  const auto all = select_paths(selection::opt, 0b1111, 4, rng);
  EXPECT_EQ(*all, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(SelectPaths, RndSubsetsAreUniform) {
  // 2-subsets of 5 available positions: 10 cells, chi-square with 9 dof
  std::mt19937_64 rng(77);
  const std::uint64_t avail = 0b1011011;
  std::map<std::vector<std::size_t>, int> counts;
  constexpr int n = 50000;
  for (int t = 0; t < n; ++t) {
    auto got = select_paths(selection::rnd, avail, 2, rng);
    ASSERT_TRUE(got);
    for (auto pos : *got) ASSERT_TRUE(avail >> pos & 1u);
    ++counts[*got];
  }
  ASSERT_EQ(counts.size(), 10u);
  const double expected = n / 10.0;
  double chi2 = 0.0;
  for (const auto& [subset, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 27.88);  // 0.999 quantile of chi-square(9)
}

TEST(RunTransmission, CountsWiretapAndJammedPaths) {
  const auto sc = fan({1, 1, 1, 1, 1, 1, 1});
  std::mt19937_64 rng(3);
  const attack_scenario attack{{{0, 2}, {0, 3}}, {{4, 1}}};
  const auto out = run_transmission(sc.paths, {0, 1, 2, 3, 4}, 4, 1, 20, attack, std::nullopt, rng);
  EXPECT_EQ(out.wiretap_paths_used, 2u);
  EXPECT_EQ(out.jammed_paths_used, 1u);
  EXPECT_EQ(out.eavesdropped_per_generation, std::vector<std::size_t>(5, 2));
  EXPECT_EQ(out.undecodable_generations, 0u);
  EXPECT_FALSE(out.decode_failed_at_receiver);
  EXPECT_FALSE(out.secret_recovered_by_attacker);
}

TEST(RunTransmission, RedundancyAbsorbsJamming) {
  const auto sc = fan({1, 1, 1, 1, 1, 1, 1});
  std::mt19937_64 rng(3);
  const codec_options codec{};
  // k = 4, r = 3: three jammed paths leave exactly four blocks per generation
  const attack_scenario three{{}, {{0, 2}, {0, 4}, {0, 6}}};
  const auto ok = run_transmission(sc.paths, {0, 1, 2, 3, 4, 5, 6}, 4, 3, 20, three, codec, rng);
  EXPECT_EQ(ok.jammed_paths_used, 3u);
  EXPECT_EQ(ok.undecodable_generations, 0u);

  const attack_scenario four{{}, {{0, 2}, {0, 3}, {0, 4}, {0, 6}}};
  const auto bad = run_transmission(sc.paths, {0, 1, 2, 3, 4, 5, 6}, 4, 3, 20, four, codec, rng);
  EXPECT_EQ(bad.undecodable_generations, 5u);
  EXPECT_TRUE(bad.decode_failed_at_receiver);
}

TEST(RunTransmission, AttackerWithKPathsRecoversSecret) {
  const auto sc = fan({1, 1, 1, 1, 1});
  std::mt19937_64 rng(5);
  const codec_options codec{};
  const attack_scenario tap{{{0, 2}, {0, 3}, {0, 4}, {0, 5}}, {}};
  // M = 10, k = 4: three generations, the last zero-padded
  const auto out = run_transmission(sc.paths, {0, 1, 2, 3, 4}, 4, 1, 10, tap, codec, rng);
  EXPECT_EQ(out.recovered_generations, 3u);
  EXPECT_TRUE(out.secret_recovered_by_attacker);
  EXPECT_THROW(run_transmission(sc.paths, {0, 1, 2}, 4, 1, 10, tap, codec, rng), precondition_error);
}

TEST(RunExperiment, DeterministicAcrossThreadCounts) {
  const auto sc = load_scenario_file(kNsfnet);
  trial_config cfg;
  cfg.scene = &sc;
  cfg.policy = selection::rnd;
  cfg.k = 4;
  cfg.r = 2;
  cfg.trials = 10000;
  cfg.seed = 42;
  cfg.attack_subsets = {{{2, 5}}, {{8, 9}, {12, 13}}};
  cfg.threads = 1;
  const auto a = run_experiment(cfg, false);
  cfg.threads = 3;
  const auto b = run_experiment(cfg, false);
  EXPECT_EQ(a.blocked_trials, b.blocked_trials);
  for (std::size_t s = 0; s < a.subsets.size(); ++s) {
    EXPECT_EQ(a.subsets[s].lambda_fraction.mean, b.subsets[s].lambda_fraction.mean);
    EXPECT_EQ(a.subsets[s].lambda_fraction.half_width, b.subsets[s].lambda_fraction.half_width);
    EXPECT_EQ(a.subsets[s].theta_jam.mean, b.subsets[s].theta_jam.mean);
  }
  cfg.seed = 43;
  const auto c = run_experiment(cfg, false);
  EXPECT_NE(a.subsets[0].lambda_fraction.mean, c.subsets[0].lambda_fraction.mean);
}

TEST(RunExperiment, ConservationAndPathCountEquivalence) {
  const auto sc = load_scenario_file(kNsfnet);
  for (auto kind : {selection::opt, selection::rnd}) {
    trial_config cfg;
    cfg.scene = &sc;
    cfg.policy = kind;
    cfg.k = 4;
    cfg.r = 1;
    cfg.trials = 5000;
    cfg.attack_subsets = {{{2, 5}}, {{2, 5}, {8, 9}, {12, 13}}};
    const auto rep = run_experiment(cfg, false);
    EXPECT_EQ(rep.blocking.mean, static_cast<double>(rep.blocked_trials) / 5000.0);
    EXPECT_EQ(rep.subsets[0].lambda_fraction.samples, 5000 - rep.blocked_trials);
    for (const auto& s : rep.subsets) {
      EXPECT_NEAR(s.lambda_star.mean, s.lambda_fraction.mean * 5.0 / 4.0, 1e-12);
      // without the codec, decode outcomes follow path counts exactly
      EXPECT_EQ(s.eavesdrop_success.mean, s.theta_eavesdrop.mean);
      EXPECT_EQ(s.jam_success.mean, s.theta_jam.mean);
      EXPECT_LE(s.lambda_fraction.mean, 1.0);
    }
    // a superset of wiretap edges never sees fewer paths
    EXPECT_GE(rep.subsets[1].lambda_fraction.mean, rep.subsets[0].lambda_fraction.mean);
  }
}

TEST(RunExperiment, ConvergesToClosedFormOnToy) {
  const auto sc = three_path_toy();
  trial_config cfg;
  cfg.scene = &sc;
  cfg.k = 1;
  cfg.r = 1;
  cfg.trials = 200000;
  cfg.attack_subsets = {{{2, 5}}, {{0, 2}}};
  for (auto kind : {selection::opt, selection::rnd}) {
    cfg.policy = kind;
    const auto rep = run_experiment(cfg);
    EXPECT_NEAR(rep.blocking.mean, blocking_probability(sc.paths.availabilities(), 2), 4 * rep.blocking.half_width);
    for (const auto& s : rep.subsets) {
      ASSERT_TRUE(s.analytical);
      const auto& a = *s.analytical;
      EXPECT_NEAR(s.lambda_fraction.mean, a.lambda_fraction(), 4 * s.lambda_fraction.half_width + 1e-12);
      EXPECT_NEAR(s.theta_jam.mean, a.theta_jam, 4 * s.theta_jam.half_width + 1e-12);
    }
  }
  // exact toy values under the operational model: 423/451 (OPT) and 339/451 (RND)
  cfg.policy = selection::opt;
  EXPECT_NEAR(run_experiment(cfg).subsets[0].lambda_fraction.mean * 2, 423.0 / 451.0, 0.01);
  cfg.policy = selection::rnd;
  EXPECT_NEAR(run_experiment(cfg).subsets[0].lambda_fraction.mean * 2, 339.0 / 451.0, 0.01);
}

TEST(RunExperiment, CodecAgreesWithPathCounts) {
  const auto sc = load_scenario_file(kNsfnet);
  trial_config cfg;
  cfg.scene = &sc;
  cfg.policy = selection::rnd;
  cfg.k = 4;
  cfg.r = 1;
  cfg.secret_blocks = 8;
  cfg.trials = 300;
  cfg.attack_subsets = {{{2, 5}, {8, 9}}};
  cfg.codec = codec_options{&galois_field::gf256(), 16};
  // run_transmission throws if a real decode disagrees with the counts
  const auto rep = run_experiment(cfg, false);
  EXPECT_EQ(rep.subsets[0].eavesdrop_success.mean, rep.subsets[0].theta_eavesdrop.mean);
  EXPECT_EQ(rep.subsets[0].jam_success.mean, rep.subsets[0].theta_jam.mean);
}

TEST(RunExperiment, AllBlockedIsDegenerate) {
  const auto sc = fan({0.0, 0.0, 0.5});
  trial_config cfg;
  cfg.scene = &sc;
  cfg.k = 2;
  cfg.r = 0;
  cfg.trials = 100;
  cfg.attack_subsets = {{{0, 2}}};
  EXPECT_THROW(run_experiment(cfg), degenerate_report_error);
  cfg.k = 4;
  EXPECT_THROW(run_experiment(cfg), precondition_error);
}

TEST(Estimate, MeanAndHalfWidth) {
  // values 0, 1, 1, 0 with scale 1: mean 0.5, sample variance 1/3
  const auto e = estimate(2, 2, 4, 1.0);
  EXPECT_DOUBLE_EQ(e.mean, 0.5);
  EXPECT_NEAR(e.half_width, z95 * std::sqrt(1.0 / 3.0 / 4.0), 1e-15);
  EXPECT_EQ(estimate(0, 0, 0, 1.0).samples, 0u);
  EXPECT_EQ(estimate(5, 5, 5, 1.0).half_width, 0.0);
}

}  // namespace
