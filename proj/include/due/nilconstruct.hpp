#pragma once

#include <due/nilfourier.hpp>
#include <due/nilgroup.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace due {

namespace detail {

// exp(-1/u) continued by 0, the standard flat-at-zero window.
inline double flat_exp(double u) { return u <= 0.0 ? 0.0 : std::exp(-1.0 / u); }

}  // namespace detail

/// Smooth nondecreasing step [0,1] -> [0,1]: identically 0 on [0, delta],
/// identically 1 on [1-delta, 1], with rho(1-t) = 1 - rho(t) exactly.
inline double rho_step(double t, double delta = 0.1) {
  if (!(delta >= 0.0 && delta < 0.5)) throw std::invalid_argument("rho_step: delta in [0, 1/2)");
  const double u = (t - delta) / (1.0 - 2.0 * delta);
  const double a = detail::flat_exp(u);
  const double b = detail::flat_exp(1.0 - u);
  if (a == 0.0) return 0.0;
  if (b == 0.0) return 1.0;
  return a / (a + b);
}

struct EtaParams {
  int q0 = 1;
  double delta = 0.1;  // flat-margin width of the underlying step
};

/// Smooth staircase on the circle: climbs from 0 to 1 over [0, 1/2] in q0
/// steps of height 1/q0 and mirrors back over [1/2, 1]. Vanishes to all orders
/// near 0 and 1, and eta(t + l/(2 q0)) = eta(t) + l/q0 while both arguments
/// stay in the climbing half.
inline double eta(double t, const EtaParams& params) {
  if (params.q0 < 1) throw std::invalid_argument("eta: q0 must be >= 1");
  double u = t - std::floor(t);
  if (u >= 0.5) u = 1.0 - u;
  const double scaled = 2.0 * params.q0 * u;
  const double fl = std::floor(scaled);
  return (rho_step(scaled - fl, params.delta) + fl) / params.q0;
}

/// sum_{l < 2 q0} e^{2 pi i m eta(t + l/(2 q0))}: equals 2 q0 for m = 0 and
/// vanishes for 0 < |m| < q0.
inline Complex eta_exponential_sum(int m, double t, const EtaParams& params) {
  Complex acc(0.0, 0.0);
  for (int l = 0; l < 2 * params.q0; ++l)
    acc += std::polar(1.0, kTwoPi * m * eta(t + l / (2.0 * params.q0), params));
  return acc;
}

/// The recursive conjugation data on T x N/Gamma: loops gamma_0..gamma_d with
/// periods qbar_0..qbar_d and the constants of the level identity.
struct NilConstruction {
  NilStructured structure;
  int degree = 1;        // n
  int q0 = 1;            // requested commutation period
  int q0_eff = 1;        // smallest multiple of q0 strictly greater than n
  double delta = 0.1;
  std::vector<std::int64_t> qbar;  // qbar_0..qbar_d
  std::vector<double> level_constant;  // C_0..C_d of the level identity

  EtaParams eta_params() const { return {q0_eff, delta}; }

  /// gamma_k(t) = gamma_{k-1}(t) exp(eta(qbar_{k-1} t) v_k) in exp coordinates.
  NilPointd gamma(int k, double t) const {
    if (k < 0 || k > structure.dim()) throw std::out_of_range("gamma: level out of range");
    NilPointd acc = nil_identity(structure);
    const EtaParams ep = eta_params();
    for (int j = 1; j <= k; ++j) {
      NilPointd step = NilPointd::Zero(structure.dim());
      step(j - 1) = eta(static_cast<double>(qbar[j - 1]) * t, ep);
      acc = mul(structure, acc, step);
    }
    return acc;
  }
};

/// Build the conjugating loops for degree-n test functions and requested q0.
/// n >= q0 is handled by replacing q0 with its smallest multiple exceeding n;
/// 1/q0_eff-periodic loops remain 1/q0-periodic, so the commutation condition
/// is preserved.
inline NilConstruction build_construction(NilStructured structure, int n, int q0,
                                          double delta = 0.1) {
  if (n < 1) throw std::invalid_argument("build_construction: degree must be >= 1");
  if (q0 < 1) throw std::invalid_argument("build_construction: q0 must be >= 1");
  NilConstruction cons{std::move(structure), n, q0, q0, delta, {}, {}};
  cons.q0_eff = q0 * (n / q0 + 1);  // smallest multiple of q0 strictly greater than n

  const int d = cons.structure.dim();
  cons.qbar.resize(d + 1);
  cons.level_constant.resize(d + 1);
  cons.qbar[0] = cons.q0_eff;
  cons.level_constant[0] = static_cast<double>(cons.qbar[0]);
  for (int k = 1; k <= d; ++k) {
    cons.qbar[k] = 2 * cons.qbar[k - 1] * cons.q0_eff;
    // the zero-frequency term of the eta exponential sum contributes 2 q0
    cons.level_constant[k] = 2.0 * cons.q0_eff * cons.level_constant[k - 1];
  }
  return cons;
}

struct LevelIdentityReport {
  int level = 0;
  std::int64_t qbar = 0;
  double level_constant = 0.0;
  std::int64_t p = 1;
  double max_defect = 0.0;
  double max_birkhoff = 0.0;   // max |LHS| seen (useful when the RHS vanishes)
  double theta_tail_budget = 0.0;
};

/// Grid for the verification: points t in {i/t_size} and fiber second-kind
/// coordinates on a uniform grid of fiber_size points per coordinate.
struct VerifyGrid {
  int t_size = 8;
  int fiber_size = 4;
};

/// Check the level-k Birkhoff identity for one test function: the length
/// qbar_k orbit sum of phi under the conjugated rotation by p/qbar_k equals
/// C_k * phihat_0^(k) evaluated at the projected, translated fiber point.
inline LevelIdentityReport verify_level_identity(const NilConstruction& cons, int k,
                                                 const BasisElement& element, std::int64_t p,
                                                 const VerifyGrid& grid = {}) {
  const int d = cons.structure.dim();
  if (k < 0 || k > d) throw std::out_of_range("verify_level_identity: level out of range");
  if (std::gcd(p, cons.qbar[k]) != 1)
    throw std::invalid_argument("verify_level_identity: p must be coprime with qbar_k");

  const NilStructured& s = cons.structure;
  const NilStructured quotient = quotient_structure(s, k);
  const std::int64_t q = cons.qbar[k];
  const double alpha = static_cast<double>(p) / static_cast<double>(q);

  // phihat_0^(k): descend the level-0 zero branch plus k more zero branches
  const CoefficientTree* coefficient = element.tree.zero_tower(k + 1);

  LevelIdentityReport report;
  report.level = k;
  report.qbar = q;
  report.level_constant = cons.level_constant[k];
  report.p = p;
  report.theta_tail_budget = element.theta_tail;

  for (int it = 0; it < grid.t_size; ++it) {
    const double t = static_cast<double>(it) / grid.t_size;
    const NilPointd gamma_t_inv = inv(s, cons.gamma(k, t));

    long fiber_total = 1;
    for (int i = 0; i < d; ++i) fiber_total *= grid.fiber_size;
    for (long idx = 0; idx < fiber_total; ++idx) {
      long rest = idx;
      NilPointd y(d);
      for (int i = 0; i < d; ++i) {
        y(i) = static_cast<double>(rest % grid.fiber_size) / grid.fiber_size;
        rest /= grid.fiber_size;
      }
      const NilPointd x = from_second_kind(s, y);

      // Birkhoff sum along the conjugated rotation orbit
      Complex birkhoff(0.0, 0.0);
      for (std::int64_t j = 0; j < q; ++j) {
        double tj = t + static_cast<double>(j) * alpha;
        tj -= std::floor(tj);
        const NilPointd fiber = mul(s, cons.gamma(k, tj), mul(s, gamma_t_inv, x));
        const auto reduced = reduce_mod_lattice(s, fiber);
        birkhoff += evaluate(element.tree, tj, to_second_kind(s, reduced.point));
      }

      Complex rhs(0.0, 0.0);
      if (coefficient) {
        const NilPointd translated = mul(s, gamma_t_inv, x);
        const NilPointd projected = project_quotient(s, translated, k);
        const auto reduced = reduce_mod_lattice(quotient, projected);
        rhs = cons.level_constant[k] *
              coefficient->evaluate(to_second_kind(quotient, reduced.point));
      }

      report.max_defect = std::max(report.max_defect, std::abs(birkhoff - rhs));
      report.max_birkhoff = std::max(report.max_birkhoff, std::abs(birkhoff));
    }
  }
  return report;
}

}  // namespace due
