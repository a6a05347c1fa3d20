#pragma once

// Exact exposure analysis over all availability outcomes of the candidate
// paths: blocking, expected wiretap paths under minimum-delay (OPT) and
// random (RND) path selection, attacked-block counts and the probability
// that one wiretap edge sees at least nu of the selected paths.
//
// Enumeration is exhaustive (2^N outcomes), so N is capped at
// max_enumerated_paths. The bundled 18-path scenario takes a few ms per sum.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lncsec/error.hpp"
#include "lncsec/netmodel.hpp"

namespace lncsec {

inline constexpr std::size_t max_enumerated_paths = 30;

enum class selection { opt, rnd };

/// How RND expectations are normalised.
///   verbatim:    sum over xi-subsets beta of P''(beta, xi) / P(N = xi) * f(beta),
///                i.e. conditioned on exactly xi paths being available.
///   operational: availability drawn first, then a uniform xi-subset of the
///                N >= xi available paths; conditioned on not blocked.
enum class rnd_model { verbatim, operational };

struct selection_policy {
  selection kind = selection::opt;
  std::size_t xi = 1;
};

inline std::string to_string(selection s) { return s == selection::opt ? "opt" : "rnd"; }

/// Neumaier compensated sum.
class compensated_sum {
public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

namespace detail {

inline void check_universe(std::span<const double> probs) {
  if (probs.size() > max_enumerated_paths) {
    throw precondition_error("exact enumeration supports at most " +
                             std::to_string(max_enumerated_paths) + " paths, got " +
                             std::to_string(probs.size()));
  }
}

/// Calls f(mask, probability) for every availability outcome, carrying the
/// product incrementally down a depth-first walk.
template <class F>
void for_each_availability(std::span<const double> probs, F&& f) {
  check_universe(probs);
  auto walk = [&](auto& self, std::size_t pos, std::uint64_t mask, double prod) -> void {
    if (pos == probs.size()) {
      f(mask, prod);
      return;
    }
    self(self, pos + 1, mask | (std::uint64_t{1} << pos), prod * probs[pos]);
    self(self, pos + 1, mask, prod * (1.0 - probs[pos]));
  };
  walk(walk, 0, 0, 1.0);
}

/// The xi lowest positions set in `mask`.
inline std::uint64_t lowest_bits(std::uint64_t mask, std::size_t xi) {
  std::uint64_t chosen = 0;
  for (std::size_t i = 0; i < xi && mask != 0; ++i) {
    const std::uint64_t low = mask & (~mask + 1);
    chosen |= low;
    mask ^= low;
  }
  return chosen;
}

inline double binom(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

/// Visits every size-gamma subset of {0..n-1} as a bitmask, in lexicographic order.
template <class F>
void for_each_combination(std::size_t n, std::size_t gamma, F&& f) {
  if (gamma > n) return;
  std::vector<std::size_t> pick(gamma);
  for (std::size_t i = 0; i < gamma; ++i) pick[i] = i;
  while (true) {
    std::uint64_t mask = 0;
    for (auto i : pick) mask |= std::uint64_t{1} << i;
    f(mask);
    std::size_t i = gamma;
    while (i > 0 && pick[i - 1] == n - gamma + i - 1) --i;
    if (i == 0) return;
    ++pick[i - 1];
    for (std::size_t j = i; j < gamma; ++j) pick[j] = pick[j - 1] + 1;
  }
}

}  // namespace detail

/// P''(alpha, gamma, Phi): product of p over the members times product of
/// (1 - p) over the rest of the universe.
inline double combo_probability(std::span<const double> probs, std::uint64_t members) {
  detail::check_universe(probs);
  double prod = 1.0;
  for (std::size_t l = 0; l < probs.size(); ++l) {
    prod *= (members >> l & 1u) ? probs[l] : 1.0 - probs[l];
  }
  return prod;
}

/// P(N = j): sum of combo_probability over all C(|Phi|, j) subsets.
inline double prob_n_available(std::span<const double> probs, std::size_t j) {
  detail::check_universe(probs);
  if (j > probs.size()) throw precondition_error("j exceeds the number of paths");
  compensated_sum acc;
  detail::for_each_combination(probs.size(), j,
                               [&](std::uint64_t m) { acc.add(combo_probability(probs, m)); });
  return acc.value();
}

/// P_B(xi) = sum_{j < xi} P(N = j).
inline double blocking_probability(std::span<const double> probs, std::size_t xi) {
  if (xi < 1 || xi > probs.size()) {
    throw precondition_error("xi must lie in [1, " + std::to_string(probs.size()) + "]");
  }
  compensated_sum acc;
  for (std::size_t j = 0; j < xi; ++j) acc.add(prob_n_available(probs, j));
  return acc.value();
}

/// y^w: number of wiretap paths among the chosen table positions.
inline std::size_t wiretap_path_count(const path_table& paths, std::span<const std::size_t> chosen,
                                      const edge_set& wiretap) {
  std::size_t y = 0;
  for (auto pos : chosen) {
    if (pos >= paths.size()) throw precondition_error("path position out of range");
    if (path_is_wiretapped(paths[pos], wiretap)) ++y;
  }
  return y;
}

namespace detail {

inline void check_xi(const path_table& paths, std::size_t xi) {
  if (xi < 1 || xi > paths.size()) {
    throw precondition_error("xi = " + std::to_string(xi) + " outside [1, " +
                             std::to_string(paths.size()) + "]");
  }
}

/// Averages g(mask) over every availability outcome with at least xi paths,
/// normalised by 1 - P_B(xi). The normaliser is the served mass
/// sum_{j >= xi} P(N = j), accumulated in the same walk.
template <class G>
double opt_expectation(const path_table& paths, std::size_t xi, G&& g) {
  check_xi(paths, xi);
  const auto probs = paths.availabilities();
  compensated_sum acc;
  compensated_sum served;
  for_each_availability(probs, [&](std::uint64_t mask, double prob) {
    if (static_cast<std::size_t>(std::popcount(mask)) >= xi) {
      served.add(prob);
      acc.add(prob * g(mask));
    }
  });
  if (!(served.value() > 0.0)) throw undefined_expectation_error("every request is blocked (P_B = 1)");
  return acc.value() / served.value();
}

/// Verbatim RND form: sum over xi-subsets beta of P''(beta, xi)/P(N = xi) * g(beta).
template <class G>
double rnd_verbatim_expectation(const path_table& paths, std::size_t xi, G&& g) {
  check_xi(paths, xi);
  const auto probs = paths.availabilities();
  const double exact = prob_n_available(probs, xi);
  if (!(exact > 0.0)) {
    throw undefined_expectation_error("probability of exactly xi available paths is zero");
  }
  compensated_sum acc;
  for_each_combination(probs.size(), xi, [&](std::uint64_t beta) {
    acc.add(combo_probability(probs, beta) / exact * g(beta));
  });
  return acc.value();
}

}  // namespace detail

/// Expected number of wiretap paths among the xi lowest-delay available
/// paths, conditioned on the request not being blocked.
inline double expected_wiretap_paths_opt(const path_table& paths, const edge_set& wiretap,
                                         std::size_t xi) {
  const std::uint64_t wt = wiretap_mask(paths, wiretap);
  return detail::opt_expectation(paths, xi, [&](std::uint64_t avail) {
    return static_cast<double>(std::popcount(detail::lowest_bits(avail, xi) & wt));
  });
}

inline double expected_wiretap_paths_rnd(const path_table& paths, const edge_set& wiretap,
                                         std::size_t xi, rnd_model model = rnd_model::verbatim) {
  const std::uint64_t wt = wiretap_mask(paths, wiretap);
  if (model == rnd_model::verbatim) {
    return detail::rnd_verbatim_expectation(paths, xi, [&](std::uint64_t beta) {
      return static_cast<double>(std::popcount(beta & wt));
    });
  }
  // Uniform xi-subset of A available paths, w of them wiretapped: E[y] = xi * w / A.
  return detail::opt_expectation(paths, xi, [&](std::uint64_t avail) {
    const auto a = static_cast<double>(std::popcount(avail));
    const auto w = static_cast<double>(std::popcount(avail & wt));
    return static_cast<double>(xi) * w / a;
  });
}

inline double expected_wiretap_paths(const path_table& paths, const edge_set& wiretap,
                                     selection_policy policy, rnd_model model = rnd_model::verbatim) {
  return policy.kind == selection::opt ? expected_wiretap_paths_opt(paths, wiretap, policy.xi)
                                       : expected_wiretap_paths_rnd(paths, wiretap, policy.xi, model);
}

/// Lambda(y) = M * y / xi, blocks of the secret seen by the attacker.
inline double attacked_blocks(double y, std::size_t secret_blocks, std::size_t xi) {
  if (xi == 0) throw precondition_error("xi must be positive");
  return static_cast<double>(secret_blocks) * y / static_cast<double>(xi);
}

/// Lambda*(y) = y / k, share of a generation seen by the attacker.
inline double attacked_blocks_per_generation(double y, std::size_t k) {
  if (k == 0) throw precondition_error("k must be positive");
  return y / static_cast<double>(k);
}

struct redundancy_advice {
  std::size_t redundant_blocks = 0;  ///< ceil(Lambda(y)) over the whole secret
  std::size_t jam_threshold = 1;     ///< nu = r + 1 blocks per generation defeat decoding
};

inline redundancy_advice recommend_redundancy(double y, std::size_t secret_blocks, std::size_t xi) {
  if (y < 0.0) throw precondition_error("expected wiretap paths must be >= 0");
  const double lambda = attacked_blocks(y, secret_blocks, xi);
  // absorb representation error so exact integers are not bumped up
  const auto r = static_cast<std::size_t>(std::ceil(lambda - 1e-9));
  return {r, r + 1};
}

namespace detail {

/// Hypergeometric tail P(Y >= nu) when xi of `available` paths are chosen
/// uniformly and `wiretapped` of them are exposed.
inline double hypergeometric_tail(std::size_t available, std::size_t wiretapped, std::size_t xi,
                                  std::size_t nu) {
  const double total = binom(available, xi);
  double hit = 0.0;
  for (std::size_t t = nu; t <= std::min(wiretapped, xi); ++t) {
    hit += binom(wiretapped, t) * binom(available - wiretapped, xi - t);
  }
  return hit / total;
}

}  // namespace detail

/// Theta(nu, xi): probability that at least nu of the xi utilised paths are
/// wiretap paths for the given edge set (a single edge in the classic case).
/// nu = k for eavesdropping, nu = r + 1 for jamming.
inline double catastrophic_threat(const path_table& paths, selection_policy policy, std::size_t nu,
                                  const edge_set& wiretap, rnd_model model = rnd_model::verbatim) {
  if (nu < 1) throw precondition_error("nu must be >= 1");
  detail::check_xi(paths, policy.xi);
  if (nu > policy.xi) return 0.0;
  const std::size_t xi = policy.xi;
  const std::uint64_t wt = wiretap_mask(paths, wiretap);
  if (policy.kind == selection::opt) {
    return detail::opt_expectation(paths, xi, [&](std::uint64_t avail) {
      return static_cast<std::size_t>(std::popcount(detail::lowest_bits(avail, xi) & wt)) >= nu ? 1.0
                                                                                                : 0.0;
    });
  }
  if (model == rnd_model::verbatim) {
    return detail::rnd_verbatim_expectation(paths, xi, [&](std::uint64_t beta) {
      return static_cast<std::size_t>(std::popcount(beta & wt)) >= nu ? 1.0 : 0.0;
    });
  }
  const std::size_t n = paths.size();
  std::vector<std::vector<double>> tail(n + 1, std::vector<double>(n + 1, 0.0));
  for (std::size_t a = xi; a <= n; ++a) {
    for (std::size_t w = 0; w <= a; ++w) tail[a][w] = detail::hypergeometric_tail(a, w, xi, nu);
  }
  return detail::opt_expectation(paths, xi, [&](std::uint64_t avail) {
    return tail[std::popcount(avail)][std::popcount(avail & wt)];
  });
}

inline double catastrophic_threat(const path_table& paths, selection_policy policy, std::size_t nu,
                                  const edge_key& single_edge, rnd_model model = rnd_model::verbatim) {
  return catastrophic_threat(paths, policy, nu, edge_set{single_edge}, model);
}

struct exposure_report {
  selection_policy policy;
  std::size_t k = 0;
  std::size_t r = 0;
  std::size_t secret_blocks = 0;
  double expected_wiretap_paths = 0.0;  ///< Y-bar
  double blocking = 0.0;                ///< P_B(xi)
  double lambda = 0.0;                  ///< Lambda(Y-bar)
  double lambda_star = 0.0;             ///< Lambda*(Y-bar)
  double theta_eavesdrop = 0.0;         ///< Theta(nu = k, xi)
  double theta_jam = 0.0;               ///< Theta(nu = r + 1, xi)

  double lambda_fraction() const noexcept {
    return secret_blocks == 0 ? 0.0 : lambda / static_cast<double>(secret_blocks);
  }
};

/// All closed-form metrics for one (policy, k, r, wiretap set) cell; xi = k + r.
inline exposure_report evaluate(const path_table& paths, const edge_set& wiretap, selection kind,
                                std::size_t k, std::size_t r, std::size_t secret_blocks,
                                rnd_model model = rnd_model::verbatim) {
  if (k < 1) throw precondition_error("k must be >= 1");
  if (secret_blocks < 1) throw precondition_error("secret must hold at least one block");
  exposure_report rep;
  rep.policy = {kind, k + r};
  rep.k = k;
  rep.r = r;
  rep.secret_blocks = secret_blocks;
  rep.blocking = blocking_probability(paths.availabilities(), rep.policy.xi);
  rep.expected_wiretap_paths = expected_wiretap_paths(paths, wiretap, rep.policy, model);
  rep.lambda = attacked_blocks(rep.expected_wiretap_paths, secret_blocks, rep.policy.xi);
  rep.lambda_star = attacked_blocks_per_generation(rep.expected_wiretap_paths, k);
  rep.theta_eavesdrop = catastrophic_threat(paths, rep.policy, k, wiretap, model);
  rep.theta_jam = catastrophic_threat(paths, rep.policy, r + 1, wiretap, model);
  return rep;
}

}  // namespace lncsec
