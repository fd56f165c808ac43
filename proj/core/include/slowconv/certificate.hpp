#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace slowconv {

// Parameters recorded next to a verified inequality. Fields that do not
// apply to a given pipeline stay empty.
struct CertContext {
  std::optional<double> L;
  std::optional<double> eps_k;
  std::optional<double> height;
  std::optional<double> measure_v;
  std::optional<double> measure_core;
  std::optional<double> measure_a;
  std::optional<double> residual;
  std::optional<int> weight_id;
  std::vector<std::pair<std::string, double>> extra;
};

// One instance of "lhs > rhs", evaluated as lhs > rhs + eta.
struct Certificate {
  std::string kind;
  int k = 0;
  std::int64_t n = 0;
  double lhs = 0;
  double rhs = 0;
  double eta = 0;
  bool pass = false;
  CertContext context;

  static Certificate make(std::string kind, int k, std::int64_t n, double lhs, double rhs, double eta,
                          CertContext context = {}) {
    Certificate c{std::move(kind), k, n, lhs, rhs, eta, lhs > rhs + eta, std::move(context)};
    return c;
  }

  double margin() const noexcept { return lhs - rhs; }
};

inline std::size_t exceedance_count(std::span<const Certificate> certs) {
  std::size_t n = 0;
  for (const auto& c : certs) n += c.pass ? 1 : 0;
  return n;
}

inline bool all_pass(std::span<const Certificate> certs) {
  return exceedance_count(certs) == certs.size();
}

}  // namespace slowconv
