#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace slowconv {

// Prescribed positive rate sequence a_n -> 0, indexed from n = 1.
class RateSeq {
 public:
  enum class Kind { power, logpow, table };

  static RateSeq power(double alpha);   // n^-alpha
  static RateSeq logpow(double alpha);  // (ln(n + 2))^-alpha
  // Explicit a_1, a_2, ...; positive and non-increasing.
  static RateSeq table(std::vector<double> values);

  Kind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return alpha_; }
  const std::vector<double>& values() const noexcept { return table_; }

  double operator()(std::int64_t n) const;

  // Smallest n >= from with a_n < x. Throws Infeasible when a table runs out.
  std::int64_t first_below(double x, std::int64_t from = 1) const;

  std::string describe() const;

 private:
  RateSeq(Kind kind, double alpha, std::vector<double> table)
      : kind_(kind), alpha_(alpha), table_(std::move(table)) {}

  Kind kind_;
  double alpha_;
  std::vector<double> table_;
};

}  // namespace slowconv
