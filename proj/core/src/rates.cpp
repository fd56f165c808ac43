#include "slowconv/rates.hpp"

#include <cmath>
#include <sstream>

#include "slowconv/error.hpp"

namespace slowconv {

RateSeq RateSeq::power(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("power rate needs alpha > 0");
  return RateSeq(Kind::power, alpha, {});
}

RateSeq RateSeq::logpow(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("log rate needs alpha > 0");
  return RateSeq(Kind::logpow, alpha, {});
}

RateSeq RateSeq::table(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("rate table must not be empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw InvalidArgument("rate table entries must be positive");
    }
    if (i > 0 && values[i] > values[i - 1]) {
      throw InvalidArgument("rate table must be non-increasing");
    }
  }
  return RateSeq(Kind::table, 0.0, std::move(values));
}

double RateSeq::operator()(std::int64_t n) const {
  if (n < 1) throw InvalidArgument("rate index starts at 1");
  switch (kind_) {
    case Kind::power:
      return std::pow(static_cast<double>(n), -alpha_);
    case Kind::logpow:
      return std::pow(std::log(static_cast<double>(n) + 2.0), -alpha_);
    case Kind::table:
      if (static_cast<std::size_t>(n) > table_.size()) {
        throw InvalidArgument("rate table has no entry " + std::to_string(n));
      }
      return table_[static_cast<std::size_t>(n - 1)];
  }
  return 0.0;
}

std::int64_t RateSeq::first_below(double x, std::int64_t from) const {
  from = std::max<std::int64_t>(from, 1);
  const std::int64_t limit = kind_ == Kind::table ? static_cast<std::int64_t>(table_.size())
                                                   : std::int64_t{1} << 62;
  if (from > limit) throw Infeasible("rate table exhausted");
  if ((*this)(from) < x) return from;
  // a_n is non-increasing: gallop, then bisect on (lo, hi]
  std::int64_t lo = from;
  std::int64_t step = 1;
  std::int64_t hi = from;
  while (true) {
    hi = lo + step > limit ? limit : lo + step;
    if ((*this)(hi) < x) break;
    if (hi == limit) {
      throw Infeasible("no rate index below " + std::to_string(x) + " within range");
    }
    lo = hi;
    step *= 2;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if ((*this)(mid) < x) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

std::string RateSeq::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::power:
      os << "power(alpha=" << alpha_ << ")";
      break;
    case Kind::logpow:
      os << "logpow(alpha=" << alpha_ << ")";
      break;
    case Kind::table:
      os << "table(" << table_.size() << " entries)";
      break;
  }
  return os.str();
}

}  // namespace slowconv
