#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace due {

/// Reduced fraction p/q with q >= 1 and gcd(p, q) = 1.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Fraction&, const Fraction&) = default;
};

inline Fraction make_fraction(std::int64_t p, std::int64_t q) {
  if (q == 0) throw std::invalid_argument("make_fraction: zero denominator");
  if (q < 0) {
    p = -p;
    q = -q;
  }
  const std::int64_t g = std::gcd(p, q);
  return Fraction{g ? p / g : p, g ? q / g : q};
}

/// Distance from v to the nearest integer lattice point (Euclidean metric).
/// Invariant under integer translation of any coordinate, so it descends to T^d.
template <typename Derived>
typename Derived::Scalar torus_norm(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Scalar sq = Scalar(0);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const Scalar r = v(i) - std::round(v(i));
    sq += r * r;
  }
  return std::sqrt(sq);
}

inline double torus_norm(double x) {
  return std::abs(x - std::round(x));
}

/// Parameters of the approximating sequence p_l/q_l -> p0/q0 used by the
/// conjugation scheme: p_hat = qbar*p0*l + 1, q_hat = qbar*q0*l, then reduce.
struct AkSequenceParams {
  Fraction target;      // p0/q0
  std::int64_t qbar = 1;  // every q_l is a multiple of qbar
};

namespace detail {

inline __int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline std::int64_t narrow128(__int128 x) {
  if (x > std::numeric_limits<std::int64_t>::max() || x < std::numeric_limits<std::int64_t>::min())
    throw std::overflow_error("ak_rational: reduced terms exceed 64-bit range");
  return static_cast<std::int64_t>(x);
}

}  // namespace detail

/// l-th element of the approximating sequence. Guarantees gcd(p_l, q_l) = 1,
/// qbar | q_l, and |p_l/q_l - p0/q0| = 1/(qbar*q0*l).
inline Fraction ak_rational(const AkSequenceParams& params, std::int64_t ell) {
  if (ell < 1) throw std::invalid_argument("ak_rational: ell must be >= 1");
  if (params.qbar < 1) throw std::invalid_argument("ak_rational: qbar must be >= 1");
  const __int128 qbar = params.qbar;
  const __int128 p_hat = qbar * params.target.num * ell + 1;
  const __int128 q_hat = qbar * params.target.den * ell;
  const __int128 g = detail::gcd128(p_hat, q_hat);
  return Fraction{detail::narrow128(p_hat / g), detail::narrow128(q_hat / g)};
}

}  // namespace due
