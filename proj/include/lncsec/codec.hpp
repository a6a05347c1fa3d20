#pragma once

// Generation-based linear network coding at the end systems: round-robin
// lane distribution, random any-k-of-n coefficient matrices, encoding of k
// source blocks into n coded blocks and incremental Gauss-Jordan decoding.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lncsec/error.hpp"
#include "lncsec/gf.hpp"

namespace lncsec {

using symbol_block = std::vector<symbol>;

/// Default block length in symbols (80 bytes at m = 8).
inline constexpr std::size_t default_block_length = 80;

struct generation_params {
  std::size_t k = 1;  ///< source blocks per generation
  std::size_t r = 0;  ///< redundant coded blocks
  std::size_t n() const noexcept { return k + r; }

  void validate() const {
    if (k < 1) throw precondition_error("generation size k must be >= 1");
  }
};

struct coding_vector {
  std::vector<symbol> coefficients;
  bool operator==(const coding_vector&) const = default;
};

using coding_matrix = std::vector<coding_vector>;

struct coded_block {
  std::uint64_t generation_id = 0;
  coding_vector vector;
  symbol_block payload;
  bool operator==(const coded_block&) const = default;
};

/// k source blocks sharing one coefficient set. `data_blocks` counts the
/// non-padding blocks (only the final generation of a stream is short).
struct generation {
  std::uint64_t id = 0;
  std::vector<symbol_block> blocks;
  std::size_t data_blocks = 0;
};

inline std::size_t generation_count(std::size_t stream_blocks, std::size_t k) {
  if (k == 0) throw precondition_error("lane count must be >= 1");
  return (stream_blocks + k - 1) / k;
}

/// Block i goes to lane i mod k.
inline std::vector<std::vector<symbol_block>> parallelize(std::span<const symbol_block> stream,
                                                          std::size_t k) {
  if (k == 0) throw precondition_error("lane count must be >= 1");
  std::vector<std::vector<symbol_block>> lanes(k);
  for (std::size_t i = 0; i < stream.size(); ++i) lanes[i % k].push_back(stream[i]);
  return lanes;
}

/// Inverse of parallelize: reads lanes round-robin until a lane runs dry.
inline std::vector<symbol_block> serialize(const std::vector<std::vector<symbol_block>>& lanes) {
  std::vector<symbol_block> stream;
  for (std::size_t pos = 0;; ++pos) {
    for (const auto& lane : lanes) {
      if (pos >= lane.size()) return stream;
      stream.push_back(lane[pos]);
    }
  }
}

/// Groups a stream into generations of k blocks; the last one is zero-padded.
inline std::vector<generation> split_generations(std::span<const symbol_block> stream,
                                                 std::size_t k) {
  const std::size_t count = generation_count(stream.size(), k);
  const std::size_t len = stream.empty() ? 0 : stream.front().size();
  std::vector<generation> out(count);
  for (std::size_t g = 0; g < count; ++g) {
    out[g].id = g;
    out[g].blocks.reserve(k);
    for (std::size_t lane = 0; lane < k; ++lane) {
      const std::size_t i = g * k + lane;
      if (i < stream.size()) {
        if (stream[i].size() != len) throw precondition_error("stream blocks differ in length");
        out[g].blocks.push_back(stream[i]);
        ++out[g].data_blocks;
      } else {
        out[g].blocks.emplace_back(len, symbol{0});
      }
    }
  }
  return out;
}

template <class Rng>
symbol_block random_block(const galois_field& field, std::size_t length, Rng& rng) {
  std::uniform_int_distribution<std::uint32_t> dist(0, field.order() - 1);
  symbol_block block(length);
  for (auto& s : block) s = static_cast<symbol>(dist(rng));
  return block;
}

/// Rank of a set of coefficient rows over the field.
inline std::size_t matrix_rank(const galois_field& field, std::vector<std::vector<symbol>> rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows.front().size();
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < rows.size(); ++col) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && rows[pivot][col] == 0) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[pivot], rows[rank]);
    const symbol inv = field.inv(rows[rank][col]);
    field.scale(rows[rank], inv);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i != rank && rows[i][col] != 0) field.mul_add(rows[i], rows[rank], rows[i][col]);
    }
    ++rank;
  }
  return rank;
}

namespace detail {

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

}  // namespace detail

/// Largest number of k-subsets make_coefficients will verify.
inline constexpr double max_verified_subsets = 1 << 20;

/// True iff every k-row subset of `matrix` is invertible.
inline bool any_k_decodable(const galois_field& field, const coding_matrix& matrix, std::size_t k) {
  const std::size_t n = matrix.size();
  if (n < k) return false;
  std::vector<std::size_t> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    std::vector<std::vector<symbol>> rows;
    rows.reserve(k);
    for (auto i : pick) rows.push_back(matrix[i].coefficients);
    if (matrix_rank(field, std::move(rows)) != k) return false;
    // next combination in lexicographic order
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
    if (i == 0) return true;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
}

/// Samples a fresh n x k coefficient matrix, resampling until every k of the
/// n rows are linearly independent.
template <class Rng>
coding_matrix make_coefficients(const galois_field& field, const generation_params& params, Rng& rng,
                                std::size_t max_attempts = 256) {
  params.validate();
  const std::size_t k = params.k;
  const std::size_t n = params.n();
  if (detail::binomial(n, k) > max_verified_subsets) {
    throw precondition_error("C(n, k) too large to verify any-k-of-n decodability");
  }
  std::uniform_int_distribution<std::uint32_t> dist(1, field.order() - 1);
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    coding_matrix matrix(n);
    for (auto& row : matrix) {
      row.coefficients.resize(k);
      for (auto& c : row.coefficients) c = static_cast<symbol>(dist(rng));
    }
    if (any_k_decodable(field, matrix, k)) return matrix;
  }
  throw coding_error("no any-" + std::to_string(k) + "-of-" + std::to_string(n) +
                     " decodable matrix found in " + std::to_string(max_attempts) +
                     " attempts over GF(2^" + std::to_string(field.bits()) + ")");
}

/// Coded payload j is sum_i vectors[j][i] * source[i], symbol by symbol.
inline std::vector<coded_block> encode_generation(const galois_field& field,
                                                  std::uint64_t generation_id,
                                                  std::span<const symbol_block> source,
                                                  const coding_matrix& vectors) {
  if (source.empty()) throw precondition_error("encode: empty generation");
  const std::size_t k = source.size();
  const std::size_t len = source.front().size();
  for (const auto& b : source) {
    if (b.size() != len) throw precondition_error("encode: source blocks differ in length");
  }
  std::vector<coded_block> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (v.coefficients.size() != k) {
      throw precondition_error("encode: coding vector length " +
                               std::to_string(v.coefficients.size()) + " != k = " +
                               std::to_string(k));
    }
    coded_block cb{generation_id, v, symbol_block(len, 0)};
    for (std::size_t i = 0; i < k; ++i) field.mul_add(cb.payload, source[i], v.coefficients[i]);
    out.push_back(std::move(cb));
  }
  return out;
}

/// Receiver-side state for one generation. Keeps the innovative rows in
/// reduced row-echelon form so the rank is always current.
class decode_state {
public:
  decode_state(const galois_field& field, std::uint64_t generation_id, std::size_t k)
      : field_(&field), generation_id_(generation_id), k_(k), pivot_row_(k, npos) {
    if (k == 0) throw precondition_error("generation size k must be >= 1");
  }

  std::uint64_t generation_id() const noexcept { return generation_id_; }
  std::size_t k() const noexcept { return k_; }
  std::size_t rank() const noexcept { return rows_.size(); }
  bool decodable() const noexcept { return rank() == k_; }
  const std::vector<coded_block>& received() const noexcept { return received_; }

  /// Returns true iff the block raised the rank.
  bool ingest(const coded_block& block) {
    if (block.generation_id != generation_id_) {
      throw precondition_error("block of generation " + std::to_string(block.generation_id) +
                               " offered to generation " + std::to_string(generation_id_));
    }
    if (block.vector.coefficients.size() != k_) {
      throw precondition_error("coding vector length does not match k");
    }
    if (!received_.empty() && block.payload.size() != received_.front().payload.size()) {
      throw precondition_error("payload length differs from earlier blocks");
    }
    received_.push_back(block);

    row fresh{block.vector.coefficients, block.payload};
    for (std::size_t col = 0; col < k_; ++col) {
      const std::size_t pr = pivot_row_[col];
      if (pr != npos && fresh.coeffs[col] != 0) reduce(fresh, rows_[pr], fresh.coeffs[col]);
    }
    const auto lead = std::find_if(fresh.coeffs.begin(), fresh.coeffs.end(),
                                   [](symbol s) { return s != 0; });
    if (lead == fresh.coeffs.end()) return false;

    const auto pivot = static_cast<std::size_t>(lead - fresh.coeffs.begin());
    const symbol inv = field_->inv(*lead);
    field_->scale(fresh.coeffs, inv);
    field_->scale(fresh.payload, inv);
    for (auto& existing : rows_) {
      if (existing.coeffs[pivot] != 0) reduce(existing, fresh, existing.coeffs[pivot]);
    }
    pivot_row_[pivot] = rows_.size();
    rows_.push_back(std::move(fresh));
    return true;
  }

  /// Source blocks in lane order.
  std::vector<symbol_block> decode() const {
    if (!decodable()) throw insufficient_rank_error(rank(), k_);
    std::vector<symbol_block> out(k_);
    for (std::size_t col = 0; col < k_; ++col) out[col] = rows_[pivot_row_[col]].payload;
    return out;
  }

private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  struct row {
    std::vector<symbol> coeffs;
    symbol_block payload;
  };

  void reduce(row& target, const row& by, symbol factor) const {
    field_->mul_add(target.coeffs, by.coeffs, factor);
    field_->mul_add(target.payload, by.payload, factor);
  }

  const galois_field* field_;
  std::uint64_t generation_id_;
  std::size_t k_;
  std::vector<std::size_t> pivot_row_;
  std::vector<row> rows_;
  std::vector<coded_block> received_;
};

inline std::vector<symbol_block> decode_generation(const decode_state& state) {
  return state.decode();
}

/// Encodes a whole stream generation by generation with fresh coefficients.
template <class Rng>
std::vector<coded_block> encode_stream(const galois_field& field,
                                       std::span<const symbol_block> stream,
                                       const generation_params& params, Rng& rng) {
  std::vector<coded_block> out;
  for (const auto& gen : split_generations(stream, params.k)) {
    auto coded = encode_generation(field, gen.id, gen.blocks, make_coefficients(field, params, rng));
    for (auto& cb : coded) out.push_back(std::move(cb));
  }
  return out;
}

/// Collects coded blocks for a stream of `stream_blocks` source blocks and
/// re-serializes the decoded generations, dropping the zero padding.
class stream_decoder {
public:
  stream_decoder(const galois_field& field, std::size_t k, std::size_t stream_blocks)
      : k_(k), stream_blocks_(stream_blocks) {
    const std::size_t count = generation_count(stream_blocks, k);
    states_.reserve(count);
    for (std::size_t g = 0; g < count; ++g) states_.emplace_back(field, g, k);
  }

  bool ingest(const coded_block& block) {
    if (block.generation_id >= states_.size()) {
      throw precondition_error("generation id " + std::to_string(block.generation_id) +
                               " out of range");
    }
    return states_[block.generation_id].ingest(block);
  }

  const decode_state& state(std::size_t g) const { return states_.at(g); }
  std::size_t generations() const noexcept { return states_.size(); }

  bool complete() const noexcept {
    return std::all_of(states_.begin(), states_.end(),
                       [](const decode_state& s) { return s.decodable(); });
  }

  std::vector<symbol_block> output() const {
    std::vector<symbol_block> stream;
    stream.reserve(states_.size() * k_);
    for (const auto& s : states_) {
      for (auto& b : s.decode()) stream.push_back(std::move(b));
    }
    stream.resize(stream_blocks_);
    return stream;
  }

private:
  std::size_t k_;
  std::size_t stream_blocks_;
  std::vector<decode_state> states_;
};

}  // namespace lncsec
