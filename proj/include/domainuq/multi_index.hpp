#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <map>
#include <ostream>
#include <utility>
#include <vector>

namespace domainuq {

/// Finitely supported multi-index over 1-based dimensions. Only nonzero
/// exponents are stored, so two indices compare equal iff they agree
/// entrywise.
class MultiIndex {
 public:
  using Dimension = std::size_t;
  using Exponent = unsigned;

  MultiIndex() = default;
  MultiIndex(std::initializer_list<std::pair<const Dimension, Exponent>> entries) {
    for (const auto& [j, v] : entries) set(j, v);
  }

  /// The unit multi-index e_j.
  static MultiIndex unit(Dimension j, Exponent times = 1) {
    MultiIndex m;
    m.set(j, times);
    return m;
  }

  Exponent operator[](Dimension j) const {
    auto it = entries_.find(j);
    return it == entries_.end() ? 0 : it->second;
  }

  void set(Dimension j, Exponent v) {
    if (v == 0) {
      entries_.erase(j);
    } else {
      entries_[j] = v;
    }
  }

  unsigned order() const noexcept {
    unsigned total = 0;
    for (const auto& [j, v] : entries_) total += v;
    return total;
  }

  std::vector<Dimension> support() const {
    std::vector<Dimension> out;
    out.reserve(entries_.size());
    for (const auto& [j, v] : entries_) out.push_back(j);
    return out;
  }

  bool is_zero() const noexcept { return entries_.empty(); }
  const std::map<Dimension, Exponent>& entries() const noexcept { return entries_; }

  /// Componentwise partial order w <= m.
  bool is_below(const MultiIndex& m) const {
    for (const auto& [j, v] : entries_) {
      if (v > m[j]) return false;
    }
    return true;
  }

  MultiIndex operator+(const MultiIndex& other) const {
    MultiIndex out = *this;
    for (const auto& [j, v] : other.entries_) out.set(j, out[j] + v);
    return out;
  }

  /// Componentwise difference; requires other <= *this.
  MultiIndex operator-(const MultiIndex& other) const {
    MultiIndex out = *this;
    for (const auto& [j, v] : other.entries_) out.set(j, out[j] - v);
    return out;
  }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex& a, const MultiIndex& b) { return a.entries_ <=> b.entries_; }

  friend std::ostream& operator<<(std::ostream& os, const MultiIndex& m) {
    os << '{';
    bool first = true;
    for (const auto& [j, v] : m.entries_) {
      if (!first) os << ", ";
      os << j << ':' << v;
      first = false;
    }
    return os << '}';
  }

 private:
  std::map<Dimension, Exponent> entries_;
};

/// Calls fn(w) for every w <= m, in mixed-radix order over supp(m) (first
/// support coordinate fastest). Every strict predecessor w' < w is visited
/// before w.
inline void for_each_below(const MultiIndex& m, const std::function<void(const MultiIndex&)>& fn) {
  const auto supp = m.support();
  std::vector<MultiIndex::Exponent> digits(supp.size(), 0);
  MultiIndex w;
  while (true) {
    fn(w);
    std::size_t i = 0;
    for (; i < supp.size(); ++i) {
      if (digits[i] < m[supp[i]]) {
        ++digits[i];
        w.set(supp[i], digits[i]);
        break;
      }
      digits[i] = 0;
      w.set(supp[i], 0);
    }
    if (i == supp.size()) return;
  }
}

}  // namespace domainuq
