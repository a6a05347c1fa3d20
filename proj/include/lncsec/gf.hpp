#pragma once

// Arithmetic over GF(2^m), 1 <= m <= 16, backed by log/antilog tables.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lncsec {

/// One field symbol. Only the low m bits are significant.
using symbol = std::uint16_t;

struct field_spec {
  unsigned m = 8;
  /// Bit i is the coefficient of x^i; must have degree m and be irreducible.
  std::uint32_t reduction_polynomial = 0x11D;
};

namespace detail {

inline int poly_degree(std::uint32_t p) noexcept {
  int d = -1;
  while (p != 0) {
    p >>= 1;
    ++d;
  }
  return d;
}

/// Remainder of a / b in GF(2)[x].
inline std::uint32_t poly_mod(std::uint32_t a, std::uint32_t b) noexcept {
  const int db = poly_degree(b);
  for (int da = poly_degree(a); da >= db; da = poly_degree(a)) {
    a ^= b << (da - db);
  }
  return a;
}

/// Trial division by every polynomial of degree 1..deg/2.
inline bool is_irreducible(std::uint32_t p) noexcept {
  const int deg = poly_degree(p);
  if (deg < 1) return false;
  for (std::uint32_t q = 2; poly_degree(q) <= deg / 2; ++q) {
    if (poly_mod(p, q) == 0) return false;
  }
  return true;
}

}  // namespace detail

class galois_field {
public:
  explicit galois_field(field_spec spec = {}) : spec_(spec) {
    if (spec_.m < 1 || spec_.m > 16) {
      throw std::invalid_argument("field bit-width must be in [1, 16], got " +
                                  std::to_string(spec_.m));
    }
    if (detail::poly_degree(spec_.reduction_polynomial) != static_cast<int>(spec_.m)) {
      throw std::invalid_argument("reduction polynomial degree does not match m");
    }
    if (!detail::is_irreducible(spec_.reduction_polynomial)) {
      throw std::invalid_argument("reduction polynomial is reducible over GF(2)");
    }
    build_tables();
  }

  /// The default GF(2^8) field with polynomial 0x11D.
  static const galois_field& gf256() {
    static const galois_field field{};
    return field;
  }

  const field_spec& spec() const noexcept { return spec_; }
  unsigned bits() const noexcept { return spec_.m; }
  std::uint32_t order() const noexcept { return 1u << spec_.m; }
  bool contains(std::uint32_t v) const noexcept { return v < order(); }
  symbol generator() const noexcept { return generator_; }

  symbol add(symbol a, symbol b) const noexcept { return a ^ b; }
  symbol sub(symbol a, symbol b) const noexcept { return a ^ b; }

  symbol mul(symbol a, symbol b) const noexcept {
    if (a == 0 || b == 0) return 0;
    return exp_[log_[a] + log_[b]];
  }

  symbol inv(symbol a) const {
    if (a == 0) throw std::domain_error("zero has no multiplicative inverse");
    return exp_[(order() - 1) - log_[a]];
  }

  symbol div(symbol a, symbol b) const {
    if (b == 0) throw std::domain_error("division by zero");
    if (a == 0) return 0;
    return exp_[log_[a] + (order() - 1) - log_[b]];
  }

  symbol pow(symbol a, std::uint64_t e) const noexcept {
    if (e == 0) return 1;
    if (a == 0) return 0;
    const std::uint64_t reduced = (static_cast<std::uint64_t>(log_[a]) * (e % (order() - 1))) % (order() - 1);
    return exp_[reduced];
  }

  /// log_g(a) for the table generator g; a must be nonzero.
  std::uint32_t log(symbol a) const {
    if (a == 0) throw std::domain_error("log of zero");
    return log_[a];
  }
  symbol antilog(std::uint32_t e) const noexcept { return exp_[e % (order() - 1)]; }

  /// Carry-less shift-and-reduce product; used to build the tables.
  symbol mul_reference(symbol a, symbol b) const noexcept {
    std::uint32_t x = a;
    std::uint32_t acc = 0;
    const std::uint32_t top = 1u << spec_.m;
    for (std::uint32_t y = b; y != 0; y >>= 1) {
      if (y & 1u) acc ^= x;
      x <<= 1;
      if (x & top) x ^= spec_.reduction_polynomial;
    }
    return static_cast<symbol>(acc);
  }

  /// dst[i] ^= c * src[i]
  void mul_add(std::span<symbol> dst, std::span<const symbol> src, symbol c) const {
    if (dst.size() != src.size()) throw std::invalid_argument("mul_add: length mismatch");
    if (c == 0) return;
    const std::uint32_t lc = log_[c];
    for (std::size_t i = 0; i < dst.size(); ++i) {
      if (src[i] != 0) dst[i] ^= exp_[lc + log_[src[i]]];
    }
  }

  /// dst[i] = c * dst[i]
  void scale(std::span<symbol> dst, symbol c) const noexcept {
    if (c == 1) return;
    for (auto& v : dst) v = mul(v, c);
  }

private:
  void build_tables() {
    const std::uint32_t q = order();
    const std::uint32_t group = q - 1;
    exp_.assign(2 * static_cast<std::size_t>(group) + 1, 0);
    log_.assign(q, 0);
    if (group == 1) {  // GF(2)
      generator_ = 1;
      exp_[0] = exp_[1] = exp_[2] = 1;
      return;
    }
    // Smallest element whose multiplicative order is q - 1.
    for (std::uint32_t g = 2; g < q; ++g) {
      std::uint32_t x = 1;
      std::uint32_t steps = 0;
      do {
        x = mul_reference(static_cast<symbol>(x), static_cast<symbol>(g));
        ++steps;
      } while (x != 1 && steps <= group);
      if (steps == group) {
        generator_ = static_cast<symbol>(g);
        break;
      }
    }
    std::uint32_t x = 1;
    for (std::uint32_t e = 0; e < group; ++e) {
      exp_[e] = static_cast<symbol>(x);
      log_[x] = e;
      x = mul_reference(static_cast<symbol>(x), generator_);
    }
    for (std::uint32_t e = group; e < exp_.size(); ++e) exp_[e] = exp_[e - group];
  }

  field_spec spec_;
  symbol generator_ = 0;
  std::vector<symbol> exp_;
  std::vector<std::uint32_t> log_;
};

}  // namespace lncsec
