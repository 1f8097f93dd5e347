// Copyright 2026 The mlcca Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mlcca {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension mismatches and malformed containers.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A value outside its admissible domain (e.g. bundle beyond capacity).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A search space or enumeration exceeding the configured cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or input data (non-monotone tables, bad specs).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A metric that is undefined for the given input.
class MetricError : public Error {
 public:
  using Error::Error;
};

/// Absolute tolerance for comparing monetary quantities.
inline constexpr double kMoneyTol = 1e-9;

/// Default cap on |X| for full enumeration / tabulation.
inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

// ---------------------------------------------------------------------------
// Value types
// ---------------------------------------------------------------------------

/// Number of available copies of each of the m distinct items.
class Capacities {
 public:
  Capacities() = default;
  explicit Capacities(std::vector<int> counts) : counts_(std::move(counts)) {
    if (counts_.empty()) throw ValidationError("capacities: need at least one item");
    for (int c : counts_) {
      if (c < 1) throw ValidationError("capacities: every item needs at least one copy");
    }
  }
  Capacities(std::initializer_list<int> counts) : Capacities(std::vector<int>(counts)) {}

  [[nodiscard]] std::size_t size() const { return counts_.size(); }
  [[nodiscard]] int operator[](std::size_t j) const { return counts_[j]; }
  [[nodiscard]] std::span<const int> counts() const { return counts_; }
  [[nodiscard]] const std::vector<int>& vec() const { return counts_; }

  friend bool operator==(const Capacities&, const Capacities&) = default;

 private:
  std::vector<int> counts_;
};

/// Item-count vector; x_j copies of item j.
class Bundle {
 public:
  Bundle() = default;
  explicit Bundle(std::vector<int> counts) : counts_(std::move(counts)) {
    for (int x : counts_) {
      if (x < 0) throw DomainError("bundle: negative item count");
    }
  }
  Bundle(std::initializer_list<int> counts) : Bundle(std::vector<int>(counts)) {}

  static Bundle empty(std::size_t m) { return Bundle(std::vector<int>(m, 0)); }
  static Bundle full(const Capacities& c) { return Bundle(c.vec()); }

  [[nodiscard]] std::size_t size() const { return counts_.size(); }
  [[nodiscard]] int operator[](std::size_t j) const { return counts_[j]; }
  [[nodiscard]] std::span<const int> counts() const { return counts_; }
  [[nodiscard]] const std::vector<int>& vec() const { return counts_; }
  [[nodiscard]] bool is_empty() const {
    for (int x : counts_)
      if (x != 0) return false;
    return true;
  }

  /// Componentwise x <= y.
  [[nodiscard]] bool dominated_by(const Bundle& other) const {
    if (other.size() != size()) throw StructuralError("bundle: dimension mismatch");
    for (std::size_t j = 0; j < size(); ++j)
      if (counts_[j] > other.counts_[j]) return false;
    return true;
  }

  [[nodiscard]] bool within(const Capacities& c) const {
    if (c.size() != size()) return false;
    for (std::size_t j = 0; j < size(); ++j)
      if (counts_[j] > c[j]) return false;
    return true;
  }

  [[nodiscard]] std::string to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t j = 0; j < counts_.size(); ++j) os << (j ? "," : "") << counts_[j];
    os << ')';
    return os.str();
  }

  friend bool operator==(const Bundle&, const Bundle&) = default;
  friend auto operator<=>(const Bundle&, const Bundle&) = default;

 private:
  std::vector<int> counts_;
};

/// Linear item prices (currency per copy).
class PriceVector {
 public:
  PriceVector() = default;
  explicit PriceVector(std::vector<double> prices) : prices_(std::move(prices)) {
    for (double p : prices_) {
      if (!std::isfinite(p) || p < 0.0) throw DomainError("price vector: prices must be finite and >= 0");
    }
  }
  PriceVector(std::initializer_list<double> prices) : PriceVector(std::vector<double>(prices)) {}

  static PriceVector zeros(std::size_t m) { return PriceVector(std::vector<double>(m, 0.0)); }

  [[nodiscard]] std::size_t size() const { return prices_.size(); }
  [[nodiscard]] double operator[](std::size_t j) const { return prices_[j]; }
  [[nodiscard]] std::span<const double> values() const { return prices_; }
  [[nodiscard]] const std::vector<double>& vec() const { return prices_; }

  friend bool operator==(const PriceVector&, const PriceVector&) = default;

 private:
  std::vector<double> prices_;
};

/// One bundle per bidder (0-based bidder index).
struct Allocation {
  std::vector<Bundle> bundles;

  [[nodiscard]] std::size_t num_bidders() const { return bundles.size(); }
  static Allocation empty(std::size_t n, std::size_t m) {
    return Allocation{std::vector<Bundle>(n, Bundle::empty(m))};
  }
  friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// A truthful demand response: the bundle demanded at `price` in `round`.
struct DemandObservation {
  Bundle bundle;
  PriceVector price;
  int round = 0;

  DemandObservation() = default;
  DemandObservation(Bundle b, PriceVector p, int r) : bundle(std::move(b)), price(std::move(p)), round(r) {
    if (bundle.size() != price.size()) throw StructuralError("demand observation: bundle/price dimension mismatch");
    if (round < 0) throw ValidationError("demand observation: negative round");
  }
  friend bool operator==(const DemandObservation&, const DemandObservation&) = default;
};

// ---------------------------------------------------------------------------
// Arithmetic
// ---------------------------------------------------------------------------

inline double inner_product(std::span<const double> p, std::span<const int> x) {
  if (p.size() != x.size()) throw StructuralError("inner_product: dimension mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) s += p[j] * static_cast<double>(x[j]);
  return s;
}

inline double inner_product(const PriceVector& p, const Bundle& x) { return inner_product(p.values(), x.counts()); }

inline double quasilinear_utility(double value, const PriceVector& p, const Bundle& x) {
  return value - inner_product(p, x);
}

/// Total copies of each item across an allocation.
inline std::vector<int> total_demand(std::span<const Bundle> bundles, std::size_t m) {
  std::vector<int> d(m, 0);
  for (const auto& b : bundles) {
    if (b.size() != m) throw StructuralError("total_demand: dimension mismatch");
    for (std::size_t j = 0; j < m; ++j) d[j] += b[j];
  }
  return d;
}

inline bool is_feasible(const Allocation& a, const Capacities& c) {
  const auto d = total_demand(a.bundles, c.size());
  for (std::size_t j = 0; j < c.size(); ++j)
    if (d[j] > c[j]) return false;
  return true;
}

/// Any type exposing `double value(std::span<const int>) const`.
template <class V>
concept BundleValuation = requires(const V& v, std::span<const int> x) {
  { v.value(x) } -> std::convertible_to<double>;
};

template <BundleValuation V>
double social_welfare(const Allocation& a, std::span<const V> models) {
  if (a.bundles.size() != models.size()) throw StructuralError("social_welfare: bidder count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < models.size(); ++i) s += models[i].value(a.bundles[i].counts());
  return s;
}

template <BundleValuation V>
double social_welfare(const Allocation& a, const std::vector<V>& models) {
  return social_welfare(a, std::span<const V>(models));
}

// ---------------------------------------------------------------------------
// Bundle space X = {0..c_1} x ... x {0..c_m}
// ---------------------------------------------------------------------------

/// Mixed-radix indexing of X: rank(x) = sum_j x_j * prod_{k>j}(c_k+1).
/// Item 0 is the most significant digit, so increasing rank is
/// lexicographic order on bundles.
class BundleSpace {
 public:
  BundleSpace() = default;
  explicit BundleSpace(Capacities c) : caps_(std::move(c)), stride_(caps_.size()) {
    std::size_t s = 1;
    for (std::size_t j = caps_.size(); j-- > 0;) {
      stride_[j] = s;
      const auto radix = static_cast<std::size_t>(caps_[j]) + 1;
      if (s > std::numeric_limits<std::size_t>::max() / radix) {
        size_ = std::numeric_limits<std::size_t>::max();
        return;
      }
      s *= radix;
    }
    size_ = s;
  }

  [[nodiscard]] const Capacities& capacities() const { return caps_; }
  [[nodiscard]] std::size_t dim() const { return caps_.size(); }
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] std::size_t stride(std::size_t j) const { return stride_[j]; }

  void require_enumerable(std::size_t cap) const {
    if (size_ > cap) {
      throw ResourceError("bundle space of size " + std::to_string(size_) + " exceeds enumeration cap " +
                          std::to_string(cap));
    }
  }

  [[nodiscard]] std::size_t rank(std::span<const int> x) const {
    if (x.size() != dim()) throw StructuralError("rank: dimension mismatch");
    std::size_t r = 0;
    for (std::size_t j = 0; j < dim(); ++j) {
      if (x[j] < 0 || x[j] > caps_[j]) throw DomainError("rank: bundle outside capacities");
      r += static_cast<std::size_t>(x[j]) * stride_[j];
    }
    return r;
  }
  [[nodiscard]] std::size_t rank(const Bundle& x) const { return rank(x.counts()); }

  void unrank_into(std::size_t r, std::span<int> out) const {
    for (std::size_t j = 0; j < dim(); ++j) {
      out[j] = static_cast<int>(r / stride_[j]);
      r %= stride_[j];
    }
  }
  [[nodiscard]] Bundle unrank(std::size_t r) const {
    if (r >= size_) throw DomainError("unrank: rank out of range");
    std::vector<int> x(dim());
    unrank_into(r, x);
    return Bundle(std::move(x));
  }

  /// Calls f(rank, counts) for every bundle in increasing rank order.
  template <class F>
  void for_each(F&& f) const {
    std::vector<int> x(dim(), 0);
    for (std::size_t r = 0; r < size_; ++r) {
      f(r, std::span<const int>(x));
      for (std::size_t j = dim(); j-- > 0;) {
        if (++x[j] <= caps_[j]) break;
        x[j] = 0;
      }
    }
  }

 private:
  Capacities caps_;
  std::vector<std::size_t> stride_;
  std::size_t size_ = 0;
};

}  // namespace mlcca
