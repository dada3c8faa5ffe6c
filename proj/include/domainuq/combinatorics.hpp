#pragma once

// Exact integer and rational sequences that enter the SPOD weight
// construction: Stirling numbers of the second kind, generalized Delannoy
// numbers, the sequences a_k, a'_k, tau_k and the multi-index sequence P_m.

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <string>
#include <cstddef>
#include <limits>
#include <map>
#include <vector>

#include "domainuq/error.hpp"
#include "domainuq/multi_index.hpp"

namespace domainuq::combinatorics {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt factorial(unsigned n) {
  BigInt r = 1;
  for (unsigned i = 2; i <= n; ++i) r *= i;
  return r;
}

inline BigInt binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt r = 1;
  for (unsigned i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

/// m! = prod_j m_j!
inline BigInt factorial(const MultiIndex& m) {
  BigInt r = 1;
  for (const auto& [j, v] : m.entries()) r *= factorial(v);
  return r;
}

/// binom(m, w) = prod_j binom(m_j, w_j)
inline BigInt binomial(const MultiIndex& m, const MultiIndex& w) {
  BigInt r = 1;
  for (const auto& [j, v] : m.entries()) r *= binomial(v, w[j]);
  return r;
}

/// S(n, m) from the alternating sum (1/m!) sum_j (-1)^{m-j} C(m,j) j^n,
/// with S(0,0) = 1 and S(n,m) = 0 for m > n.
inline BigInt stirling2(unsigned n, unsigned m) {
  if (m > n) return 0;
  if (n == 0) return 1;
  BigInt sum = 0;
  for (unsigned j = 0; j <= m; ++j) {
    BigInt term = binomial(m, j) * boost::multiprecision::pow(BigInt(j), n);
    if ((m - j) % 2 == 0) {
      sum += term;
    } else {
      sum -= term;
    }
  }
  return sum / factorial(m);
}

inline constexpr std::size_t kUnboundedSupport = std::numeric_limits<std::size_t>::max();

namespace detail {

inline BigInt delannoy_memo(std::size_t q, const MultiIndex& m, std::map<MultiIndex, BigInt>& memo) {
  if (m.is_zero()) return 1;
  if (auto it = memo.find(m); it != memo.end()) return it->second;
  const auto supp = m.support();
  const std::size_t r = supp.size();
  BigInt total = 0;
  // nonempty subsets u of supp(m) with |u| <= q, as bitmasks
  for (std::size_t mask = 1; mask < (std::size_t{1} << r); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) > q) continue;
    MultiIndex reduced = m;
    for (std::size_t i = 0; i < r; ++i) {
      if (mask & (std::size_t{1} << i)) reduced.set(supp[i], m[supp[i]] - 1);
    }
    total += delannoy_memo(q, reduced, memo);
  }
  memo.emplace(m, total);
  return total;
}

}  // namespace detail

/// Generalized Delannoy number D_q(m): D_q(0) = 1 and
/// D_q(m) = sum over nonempty u in supp(m), |u| <= q, of D_q(m - e_u).
/// Pass kUnboundedSupport for q = infinity.
inline BigInt delannoy(std::size_t q, const MultiIndex& m) {
  if (q == 0) throw Error(ErrorKind::InvalidArgument, "delannoy requires q >= 1");
  if (m.support().size() >= 63) throw Error(ErrorKind::InvalidArgument, "support too large");
  std::map<MultiIndex, BigInt> memo;
  return detail::delannoy_memo(q, m, memo);
}

/// Closed form of D_2(k e_i + l e_j): sum_t 2^t C(k,t) C(l,t).
inline BigInt delannoy_closed_form(unsigned k, unsigned l) {
  BigInt total = 0;
  for (unsigned t = 0; t <= std::min(k, l); ++t) {
    total += (BigInt(1) << t) * binomial(k, t) * binomial(l, t);
  }
  return total;
}

enum class SequenceKind { A, APrime, Tau };

template <class T>
struct SequenceTable {
  SequenceKind kind;
  std::vector<T> values;

  const T& operator[](std::size_t k) const { return values.at(k); }
  std::size_t size() const noexcept { return values.size(); }
};

/// a_0 = a_1 = 1, a_k = a_{k-1} + a_{k-2}/2.
inline SequenceTable<Rational> seq_a(unsigned k_max) {
  SequenceTable<Rational> t{SequenceKind::A, {}};
  t.values.reserve(k_max + 1);
  for (unsigned k = 0; k <= k_max; ++k) {
    if (k < 2) {
      t.values.emplace_back(1);
    } else {
      t.values.push_back(t.values[k - 1] + t.values[k - 2] / 2);
    }
  }
  return t;
}

/// a'_0 = a'_1 = 1, a'_k = k a'_{k-1} + (k^2-k)/2 a'_{k-2}  (OEIS A080599).
inline SequenceTable<Rational> seq_a_prime(unsigned k_max) {
  SequenceTable<Rational> t{SequenceKind::APrime, {}};
  t.values.reserve(k_max + 1);
  for (unsigned k = 0; k <= k_max; ++k) {
    if (k < 2) {
      t.values.emplace_back(1);
    } else {
      const Rational kk = k;
      t.values.push_back(kk * t.values[k - 1] + (kk * kk - kk) / 2 * t.values[k - 2]);
    }
  }
  return t;
}

/// tau_0 = 1, tau_k = sum_{j<k} (k-j+1) tau_j  (OEIS A003480).
inline SequenceTable<BigInt> seq_tau(unsigned k_max) {
  SequenceTable<BigInt> t{SequenceKind::Tau, {}};
  t.values.reserve(k_max + 1);
  t.values.emplace_back(1);
  for (unsigned k = 1; k <= k_max; ++k) {
    BigInt sum = 0;
    for (unsigned j = 0; j < k; ++j) sum += (k - j + 1) * t.values[j];
    t.values.push_back(sum);
  }
  return t;
}

inline double seq_a_closed_form(unsigned k) {
  const double r3 = std::sqrt(3.0);
  return (std::pow(1.0 + r3, k + 1) - std::pow(1.0 - r3, k + 1)) / (std::pow(2.0, k + 1) * r3);
}

/// Valid for k >= 1 only; at k = 0 the expression evaluates to 1/2.
inline double seq_tau_closed_form(unsigned k) {
  const double r2 = std::sqrt(2.0);
  return (std::pow(2.0 + r2, k + 1) - std::pow(2.0 - r2, k + 1)) / (4.0 * r2);
}

inline constexpr unsigned kDefaultOrderCap = 12;

/// P_0 = 1 and P_m = (|m|+d)!/(m! d!) + sum_{w<m} P_w (|m|-|w|+1)!.
/// The leading term is a multinomial coefficient, so every P_m is an integer.
inline BigInt seq_p(const MultiIndex& m, unsigned d, unsigned order_cap = kDefaultOrderCap) {
  if (d == 0) throw Error(ErrorKind::InvalidArgument, "seq_p requires d >= 1");
  if (m.order() > order_cap) {
    throw Error(ErrorKind::OrderCapExceeded,
                "|m| = " + std::to_string(m.order()) + " exceeds cap " + std::to_string(order_cap));
  }
  const BigInt d_fact = factorial(d);
  std::map<MultiIndex, BigInt> table;
  for_each_below(m, [&](const MultiIndex& w) {
    const unsigned ow = w.order();
    BigInt value = factorial(ow + d) / (factorial(w) * d_fact);
    for_each_below(w, [&](const MultiIndex& v) {
      if (v == w) return;
      value += table.at(v) * factorial(ow - v.order() + 1);
    });
    table.emplace(w, std::move(value));
  });
  return table.at(m);
}

/// Order factor (l + d - 1)! / (d - 1)! of the SPOD weights.
inline BigInt order_factor(unsigned l, unsigned d) { return factorial(l + d - 1) / factorial(d - 1); }

}  // namespace domainuq::combinatorics
