#pragma once

// Seeded Monte Carlo model of one secret transfer per trial: draw path
// availability, pick xi paths (minimum delay or uniformly at random), send
// one coded block per path per generation, and let the attacker capture
// blocks on eavesdropped paths and erase blocks on jammed paths.

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lncsec/analysis.hpp"
#include "lncsec/codec.hpp"
#include "lncsec/error.hpp"
#include "lncsec/netmodel.hpp"

namespace lncsec {

inline constexpr double z95 = 1.959963984540054;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Independent stream for one trial; depends only on (seed, trial).
inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(trial)));
}

/// Each path is available independently with its own probability.
template <class Rng>
std::uint64_t sample_availability(const path_table& paths, Rng& rng) {
  if (paths.size() > 64) throw precondition_error("at most 64 paths per scenario");
  std::uint64_t mask = 0;
  for (std::size_t l = 0; l < paths.size(); ++l) {
    std::bernoulli_distribution up(paths[l].availability);
    if (up(rng)) mask |= std::uint64_t{1} << l;
  }
  return mask;
}

/// Chosen table positions in ascending order, or nullopt when blocked.
template <class Rng>
std::optional<std::vector<std::size_t>> select_paths(selection kind, std::uint64_t available,
                                                     std::size_t xi, Rng& rng) {
  std::vector<std::size_t> avail;
  for (std::uint64_t m = available; m != 0; m &= m - 1) {
    avail.push_back(static_cast<std::size_t>(std::countr_zero(m)));
  }
  if (xi == 0 || avail.size() < xi) return std::nullopt;
  if (kind == selection::opt) {
    avail.resize(xi);
    return avail;
  }
  // partial Fisher-Yates: the first xi slots become a uniform xi-subset
  for (std::size_t i = 0; i < xi; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, avail.size() - 1);
    std::swap(avail[i], avail[pick(rng)]);
  }
  avail.resize(xi);
  std::sort(avail.begin(), avail.end());
  return avail;
}

struct trial_outcome {
  bool blocked = false;
  std::size_t wiretap_paths_used = 0;  ///< chosen paths crossing an eavesdropped edge
  std::size_t jammed_paths_used = 0;   ///< chosen paths crossing a jammed edge
  std::vector<std::size_t> eavesdropped_per_generation;
  std::vector<std::size_t> jam_disrupted_per_generation;
  std::size_t undecodable_generations = 0;
  std::size_t recovered_generations = 0;
  bool secret_recovered_by_attacker = false;
  bool decode_failed_at_receiver = false;
};

/// When set, run_transmission pushes real coded blocks through the codec and
/// derives the outcome flags from actual decode results.
struct codec_options {
  const galois_field* field = &galois_field::gf256();
  std::size_t block_length = default_block_length;
};

template <class Rng>
trial_outcome run_transmission(const path_table& paths, const std::vector<std::size_t>& chosen,
                               std::size_t k, std::size_t r, std::size_t secret_blocks,
                               const attack_scenario& attack, const std::optional<codec_options>& codec,
                               Rng& rng) {
  const std::size_t n = k + r;
  if (k < 1) throw precondition_error("k must be >= 1");
  if (chosen.size() != n) {
    throw precondition_error("chosen " + std::to_string(chosen.size()) + " paths, need xi = k + r = " +
                             std::to_string(n));
  }
  if (secret_blocks < 1) throw precondition_error("secret must hold at least one block");

  std::vector<bool> tapped(n);
  std::vector<bool> jammed(n);
  trial_outcome out;
  for (std::size_t j = 0; j < n; ++j) {
    if (chosen[j] >= paths.size()) throw precondition_error("path position out of range");
    tapped[j] = path_is_wiretapped(paths[chosen[j]], attack.eavesdrop);
    jammed[j] = path_is_wiretapped(paths[chosen[j]], attack.jam);
    out.wiretap_paths_used += tapped[j];
    out.jammed_paths_used += jammed[j];
  }

  const std::size_t gens = generation_count(secret_blocks, k);
  out.eavesdropped_per_generation.assign(gens, out.wiretap_paths_used);
  out.jam_disrupted_per_generation.assign(gens, out.jammed_paths_used);

  if (!codec) {
    const bool receiver_ok = n - out.jammed_paths_used >= k;
    const bool attacker_ok = out.wiretap_paths_used >= k;
    out.undecodable_generations = receiver_ok ? 0 : gens;
    out.recovered_generations = attacker_ok ? gens : 0;
  } else {
    const galois_field& field = *codec->field;
    const generation_params params{k, r};
    for (std::size_t g = 0; g < gens; ++g) {
      std::vector<symbol_block> source;
      for (std::size_t i = 0; i < k; ++i) source.push_back(random_block(field, codec->block_length, rng));
      const auto coded = encode_generation(field, g, source, make_coefficients(field, params, rng));
      decode_state receiver(field, g, k);
      decode_state eavesdropper(field, g, k);
      for (std::size_t j = 0; j < n; ++j) {  // coded block j travels on chosen path j
        if (!jammed[j]) receiver.ingest(coded[j]);
        if (tapped[j]) eavesdropper.ingest(coded[j]);
      }
      const bool receiver_ok = receiver.decodable() && receiver.decode() == source;
      const bool attacker_ok = eavesdropper.decodable() && eavesdropper.decode() == source;
      if (receiver_ok != (n - out.jammed_paths_used >= k) || attacker_ok != (out.wiretap_paths_used >= k)) {
        throw std::logic_error("codec outcome disagrees with block counts in generation " +
                               std::to_string(g));
      }
      out.undecodable_generations += !receiver_ok;
      out.recovered_generations += attacker_ok;
    }
  }
  out.decode_failed_at_receiver = out.undecodable_generations > 0;
  out.secret_recovered_by_attacker = out.recovered_generations == gens;
  return out;
}

struct trial_config {
  const scenario* scene = nullptr;
  selection policy = selection::opt;
  std::size_t k = 4;
  std::size_t r = 0;
  std::size_t secret_blocks = 20;
  std::size_t trials = 100000;
  std::uint64_t seed = 1;
  /// Each subset is evaluated twice per trial: once as the eavesdropped set
  /// (eavesdrop metrics) and once as the jammed set (jam metrics).
  std::vector<edge_set> attack_subsets;
  std::optional<codec_options> codec;
  unsigned threads = 0;  ///< 0 = hardware concurrency

  std::size_t xi() const noexcept { return k + r; }

  void validate() const {
    if (scene == nullptr) throw precondition_error("trial config has no scenario");
    if (trials < 1) throw precondition_error("trials must be >= 1");
    if (k < 1) throw precondition_error("k must be >= 1");
    if (secret_blocks < 1) throw precondition_error("secret must hold at least one block");
    if (xi() > scene->paths.size()) {
      throw precondition_error("xi = " + std::to_string(xi()) + " exceeds the " +
                               std::to_string(scene->paths.size()) + " declared paths");
    }
  }
};

struct metric_estimate {
  double mean = 0.0;
  double half_width = 0.0;  ///< 95% normal-approximation half-width
  std::size_t samples = 0;
};

/// Mean and 95% half-width from integer sufficient statistics of values
/// v_t = x_t / scale.
inline metric_estimate estimate(std::uint64_t sum, std::uint64_t sum_sq, std::uint64_t n, double scale) {
  metric_estimate e;
  e.samples = n;
  if (n == 0) return e;
  const double dn = static_cast<double>(n);
  const double mean_raw = static_cast<double>(sum) / dn;
  e.mean = mean_raw / scale;
  if (n > 1) {
    const double ss = static_cast<double>(sum_sq) - static_cast<double>(sum) * mean_raw;
    const double var = std::max(0.0, ss / (dn - 1.0)) / (scale * scale);
    e.half_width = z95 * std::sqrt(var / dn);
  }
  return e;
}

struct subset_estimate {
  edge_set wiretap;
  metric_estimate lambda_fraction;    ///< Lambda / M = y / xi, eavesdropped
  metric_estimate lambda_star;        ///< y / k, eavesdropped
  metric_estimate theta_eavesdrop;    ///< P(y >= k) from path counts
  metric_estimate theta_jam;          ///< P(y_jam >= r + 1) from path counts
  metric_estimate eavesdrop_success;  ///< secret recovered (every generation decoded by attacker)
  metric_estimate jam_success;        ///< share of generations the receiver cannot decode
  std::optional<exposure_report> analytical;  ///< operational-model closed form, for deltas
};

struct sim_report {
  selection policy = selection::opt;
  std::size_t k = 0;
  std::size_t r = 0;
  std::size_t secret_blocks = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t blocked_trials = 0;
  metric_estimate blocking;
  std::vector<subset_estimate> subsets;
};

namespace detail {

struct subset_tally {
  std::uint64_t y = 0, y_sq = 0;
  std::uint64_t theta_e = 0, theta_j = 0;
  std::uint64_t recovered = 0;
  std::uint64_t undecodable = 0, undecodable_sq = 0;  // generations per trial

  void merge(const subset_tally& o) {
    y += o.y;
    y_sq += o.y_sq;
    theta_e += o.theta_e;
    theta_j += o.theta_j;
    recovered += o.recovered;
    undecodable += o.undecodable;
    undecodable_sq += o.undecodable_sq;
  }
};

struct chunk_tally {
  std::uint64_t trials = 0;
  std::uint64_t blocked = 0;
  std::vector<subset_tally> subsets;

  void merge(const chunk_tally& o) {
    trials += o.trials;
    blocked += o.blocked;
    for (std::size_t i = 0; i < subsets.size(); ++i) subsets[i].merge(o.subsets[i]);
  }
};

inline chunk_tally run_chunk(const trial_config& cfg, std::uint64_t first, std::uint64_t last) {
  chunk_tally tally;
  tally.subsets.resize(cfg.attack_subsets.size());
  const auto& paths = cfg.scene->paths;
  for (std::uint64_t t = first; t < last; ++t) {
    auto rng = trial_rng(cfg.seed, t);
    ++tally.trials;
    const auto available = sample_availability(paths, rng);
    const auto chosen = select_paths(cfg.policy, available, cfg.xi(), rng);
    if (!chosen) {
      ++tally.blocked;
      continue;
    }
    for (std::size_t s = 0; s < cfg.attack_subsets.size(); ++s) {
      const auto& subset = cfg.attack_subsets[s];
      const auto eav = run_transmission(paths, *chosen, cfg.k, cfg.r, cfg.secret_blocks,
                                        attack_scenario{subset, {}}, cfg.codec, rng);
      const auto jam = run_transmission(paths, *chosen, cfg.k, cfg.r, cfg.secret_blocks,
                                        attack_scenario{{}, subset}, cfg.codec, rng);
      auto& st = tally.subsets[s];
      st.y += eav.wiretap_paths_used;
      st.y_sq += eav.wiretap_paths_used * eav.wiretap_paths_used;
      st.theta_e += eav.wiretap_paths_used >= cfg.k;
      st.theta_j += jam.jammed_paths_used >= cfg.r + 1;
      st.recovered += eav.secret_recovered_by_attacker;
      st.undecodable += jam.undecodable_generations;
      st.undecodable_sq += jam.undecodable_generations * jam.undecodable_generations;
    }
  }
  return tally;
}

}  // namespace detail

/// Runs cfg.trials independent trials. Trials are cut into fixed chunks whose
/// integer tallies are merged in chunk order, so the report is identical for
/// any thread count.
inline sim_report run_experiment(const trial_config& cfg, bool with_analysis = true) {
  cfg.validate();
  constexpr std::uint64_t chunk_size = 4096;
  const std::uint64_t chunks = (cfg.trials + chunk_size - 1) / chunk_size;
  std::vector<detail::chunk_tally> results(chunks);

  unsigned workers = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, chunks));
  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t c = next++; c < chunks; c = next++) {
      results[c] = detail::run_chunk(cfg, c * chunk_size, std::min<std::uint64_t>(cfg.trials, (c + 1) * chunk_size));
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  detail::chunk_tally total;
  total.subsets.resize(cfg.attack_subsets.size());
  for (const auto& c : results) total.merge(c);

  sim_report rep;
  rep.policy = cfg.policy;
  rep.k = cfg.k;
  rep.r = cfg.r;
  rep.secret_blocks = cfg.secret_blocks;
  rep.trials = cfg.trials;
  rep.seed = cfg.seed;
  rep.blocked_trials = total.blocked;
  rep.blocking = estimate(total.blocked, total.blocked, total.trials, 1.0);

  const std::uint64_t served = total.trials - total.blocked;
  if (served == 0) {
    throw degenerate_report_error("all " + std::to_string(total.trials) +
                                  " trials were blocked; no exposure statistics");
  }
  const double xi = static_cast<double>(cfg.xi());
  const double gens = static_cast<double>(generation_count(cfg.secret_blocks, cfg.k));
  for (std::size_t s = 0; s < cfg.attack_subsets.size(); ++s) {
    const auto& st = total.subsets[s];
    subset_estimate est;
    est.wiretap = cfg.attack_subsets[s];
    est.lambda_fraction = estimate(st.y, st.y_sq, served, xi);
    est.lambda_star = estimate(st.y, st.y_sq, served, static_cast<double>(cfg.k));
    est.theta_eavesdrop = estimate(st.theta_e, st.theta_e, served, 1.0);
    est.theta_jam = estimate(st.theta_j, st.theta_j, served, 1.0);
    est.eavesdrop_success = estimate(st.recovered, st.recovered, served, 1.0);
    est.jam_success = estimate(st.undecodable, st.undecodable_sq, served, gens);
    if (with_analysis) {
      est.analytical = evaluate(cfg.scene->paths, est.wiretap, cfg.policy, cfg.k, cfg.r,
                                cfg.secret_blocks, rnd_model::operational);
    }
    rep.subsets.push_back(std::move(est));
  }
  return rep;
}

}  // namespace lncsec
