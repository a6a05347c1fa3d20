#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lncsec {

/// A caller violated an operation's precondition (length, generation or id mismatch).
class precondition_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Decoding was requested before k independent coded blocks arrived.
class insufficient_rank_error : public std::runtime_error {
public:
  insufficient_rank_error(std::size_t rank, std::size_t needed)
      : std::runtime_error("insufficient rank: have " + std::to_string(rank) + ", need " +
                           std::to_string(needed)),
        rank_(rank),
        needed_(needed) {}
  std::size_t rank() const noexcept { return rank_; }
  std::size_t needed() const noexcept { return needed_; }

private:
  std::size_t rank_;
  std::size_t needed_;
};

/// An expectation conditioned on an event of probability zero.
class undefined_expectation_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Coefficient sampling could not produce an any-k-of-n decodable matrix.
class coding_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Scenario document failed to parse or validate. line() is 0 when not tied to a line.
class load_error : public std::runtime_error {
public:
  explicit load_error(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// A simulation produced no usable (unblocked) trials.
class degenerate_report_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace lncsec
