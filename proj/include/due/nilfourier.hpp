#pragma once

#include <due/nilgroup.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace due {

using Complex = std::complex<double>;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Evaluable function of `arity` real variables, carrying a closed-form tag so
/// trees built from library constructors can be serialized.
struct LeafFunction {
  enum class Form { Constant, Trig, ThetaSection, Theta, Quadrature };

  int arity = 0;
  std::function<Complex(const Eigen::VectorXd&)> fn;
  Form form = Form::Quadrature;

  // closed-form payload (interpretation depends on `form`)
  Complex coeff{1.0, 0.0};
  Eigen::VectorXi freqs;                  // Trig: coeff * e^{2 pi i freqs . y}
  int theta_k = 0, theta_J = 0;           // Theta / ThetaSection parameters
  double theta_width = 1.0;

  Complex operator()(const Eigen::VectorXd& y) const { return fn(y); }
};

inline LeafFunction constant_leaf(int arity, Complex value) {
  LeafFunction leaf;
  leaf.arity = arity;
  leaf.form = LeafFunction::Form::Constant;
  leaf.coeff = value;
  leaf.fn = [value](const Eigen::VectorXd&) { return value; };
  return leaf;
}

/// coeff * e^{2 pi i sum_v freqs_v y_v}
inline LeafFunction trig_leaf(Eigen::VectorXi freqs, Complex coeff = Complex(1.0, 0.0)) {
  LeafFunction leaf;
  leaf.arity = static_cast<int>(freqs.size());
  leaf.form = LeafFunction::Form::Trig;
  leaf.coeff = coeff;
  leaf.freqs = std::move(freqs);
  const Eigen::VectorXi f = leaf.freqs;
  leaf.fn = [f, coeff](const Eigen::VectorXd& y) {
    double phase = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) phase += f(i) * y(i);
    return coeff * std::polar(1.0, kTwoPi * phase);
  };
  return leaf;
}

/// Hierarchical Fourier-type coefficient tower for functions on T x N/Gamma in
/// second-kind cover coordinates (t, y_1, ..., y_d). A node at `level` owns
/// variable `level` (level 0 is t): nonzero frequencies carry leaf functions of
/// the remaining variables, and only the zero-frequency branch recurses. A
/// missing zero branch means that coefficient vanishes identically; at the last
/// level the zero branch degenerates to a complex scalar.
class CoefficientTree {
 public:
  CoefficientTree(int num_vars, int level, int degree)
      : num_vars_(num_vars), level_(level), degree_(degree) {
    if (level_ < 0 || level_ > num_vars_) throw std::invalid_argument("CoefficientTree: bad level");
  }

  int num_vars() const { return num_vars_; }
  int level() const { return level_; }
  int degree() const { return degree_; }
  bool terminal() const { return level_ == num_vars_; }
  int remaining_vars() const { return num_vars_ - level_; }

  void set_mode(int k, LeafFunction leaf) {
    if (k == 0) throw std::invalid_argument("set_mode: zero mode recurses, use zero_child");
    if (std::abs(k) > degree_) throw std::invalid_argument("set_mode: frequency above degree");
    if (leaf.arity != remaining_vars() - 1) throw std::invalid_argument("set_mode: leaf arity");
    modes_[k] = std::move(leaf);
  }

  CoefficientTree& ensure_zero_child() {
    if (terminal()) throw std::logic_error("ensure_zero_child: terminal node");
    if (!zero_) zero_ = std::make_unique<CoefficientTree>(num_vars_, level_ + 1, degree_);
    return *zero_;
  }

  void set_terminal_scalar(Complex v) {
    if (!terminal()) throw std::logic_error("set_terminal_scalar: not terminal");
    scalar_ = v;
  }

  const std::map<int, LeafFunction>& modes() const { return modes_; }
  const CoefficientTree* zero_child() const { return zero_.get(); }
  CoefficientTree* zero_child() { return zero_.get(); }
  Complex terminal_scalar() const { return scalar_; }

  /// Follow the zero branch `depth` times; nullptr once a branch is absent.
  const CoefficientTree* zero_tower(int depth) const {
    const CoefficientTree* node = this;
    for (int i = 0; i < depth && node; ++i) node = node->zero_.get();
    return node;
  }

  /// Nested-sum evaluation; `coords` holds variables level..num_vars-1.
  Complex evaluate(const Eigen::VectorXd& coords) const {
    if (static_cast<int>(coords.size()) != remaining_vars())
      throw std::invalid_argument("CoefficientTree::evaluate: coordinate count");
    if (terminal()) return scalar_;
    Complex acc(0.0, 0.0);
    const Eigen::VectorXd rest = coords.tail(coords.size() - 1);
    for (const auto& [k, leaf] : modes_) acc += leaf(rest) * std::polar(1.0, kTwoPi * k * coords(0));
    if (zero_) acc += zero_->evaluate(rest);
    return acc;
  }

  CoefficientTree clone() const {
    CoefficientTree out(num_vars_, level_, degree_);
    out.modes_ = modes_;
    out.scalar_ = scalar_;
    if (zero_) out.zero_ = std::make_unique<CoefficientTree>(zero_->clone());
    return out;
  }

 private:
  int num_vars_;
  int level_;
  int degree_;
  std::map<int, LeafFunction> modes_;
  std::unique_ptr<CoefficientTree> zero_;
  Complex scalar_{0.0, 0.0};
};

/// phi(t, y) with y the second-kind cover coordinates of the fiber point.
inline Complex evaluate(const CoefficientTree& tree, double t, const Eigen::VectorXd& y) {
  Eigen::VectorXd coords(y.size() + 1);
  coords(0) = t;
  coords.tail(y.size()) = y;
  return tree.evaluate(coords);
}

/// Fourier coefficient in the first variable by uniform-grid quadrature:
/// (1/m) sum_a f(a/m, rest) e^{-2 pi i k a/m}. Exact for trigonometric
/// polynomials of degree < m/2 in that variable.
inline LeafFunction fourier_coefficient(const std::function<Complex(const Eigen::VectorXd&)>& f,
                                        int arity, int k, int grid_size) {
  if (arity < 1) throw std::invalid_argument("fourier_coefficient: needs at least one variable");
  if (grid_size <= 2 * std::abs(k))
    throw std::invalid_argument("fourier_coefficient: grid aliases the requested frequency");
  LeafFunction leaf;
  leaf.arity = arity - 1;
  leaf.form = LeafFunction::Form::Quadrature;
  leaf.fn = [f, arity, k, grid_size](const Eigen::VectorXd& rest) {
    Eigen::VectorXd full(arity);
    full.tail(arity - 1) = rest;
    Complex acc(0.0, 0.0);
    for (int a = 0; a < grid_size; ++a) {
      const double u = static_cast<double>(a) / grid_size;
      full(0) = u;
      acc += f(full) * std::polar(1.0, -kTwoPi * k * u);
    }
    return acc / static_cast<double>(grid_size);
  };
  return leaf;
}

/// Product uniform-grid average of f over [0,1)^arity (the Haar mean in
/// second-kind coordinates); exact for band-limited integrands.
inline Complex quadrature_mean(const std::function<Complex(const Eigen::VectorXd&)>& f, int arity,
                               int grid_per_var) {
  long total = 1;
  for (int i = 0; i < arity; ++i) total *= grid_per_var;
  Complex acc(0.0, 0.0);
  Eigen::VectorXd y(arity);
  for (long idx = 0; idx < total; ++idx) {
    long rest = idx;
    for (int i = 0; i < arity; ++i) {
      y(i) = static_cast<double>(rest % grid_per_var) / grid_per_var;
      rest /= grid_per_var;
    }
    acc += f(y);
  }
  return acc / static_cast<double>(total);
}

namespace detail {

inline double gaussian_window(double u, double width) {
  return std::exp(-std::numbers::pi * u * u / (width * width));
}

}  // namespace detail

/// Truncated Weil-Brezin section G(x, y) = sum_{|j|<=J} h(x+j) e^{-2 pi i k j y}
/// with h a Gaussian window. G(x+1, y) = e^{2 pi i k y} G(x, y) up to the
/// truncation tail, which is the quasi-periodicity a central frequency-k
/// function on the Heisenberg cover must satisfy.
inline LeafFunction theta_section(int k, int J, double width) {
  LeafFunction leaf;
  leaf.arity = 2;
  leaf.form = LeafFunction::Form::ThetaSection;
  leaf.theta_k = k;
  leaf.theta_J = J;
  leaf.theta_width = width;
  leaf.fn = [k, J, width](const Eigen::VectorXd& y) {
    Complex acc(0.0, 0.0);
    for (int j = -J; j <= J; ++j)
      acc += detail::gaussian_window(y(0) + j, width) * std::polar(1.0, -kTwoPi * k * j * y(1));
    return acc;
  };
  return leaf;
}

struct ThetaMode {
  LeafFunction leaf;          // function of (y_1, y_2, y_3) on the Heisenberg cover
  double invariance_tail;     // bound on the right-Gamma-invariance defect
};

/// Gamma-invariant-up-to-tail test function e^{2 pi i k y_1} G(y_2, y_3) on the
/// Heisenberg-3 cover. k = 0 is rejected: the central frequency is the point.
inline ThetaMode theta_function(int k, int J, double width = 1.0) {
  if (k == 0) throw std::invalid_argument("theta_function: k = 0 (use torus pullbacks)");
  if (J < 0) throw std::invalid_argument("theta_function: J must be >= 0");
  LeafFunction leaf;
  leaf.arity = 3;
  leaf.form = LeafFunction::Form::Theta;
  leaf.theta_k = k;
  leaf.theta_J = J;
  leaf.theta_width = width;
  const LeafFunction section = theta_section(k, J, width);
  leaf.fn = [k, section](const Eigen::VectorXd& y) {
    return std::polar(1.0, kTwoPi * k * y(0)) * section(y.tail(2));
  };

  double tail = 0.0;
  for (int j = J; j < J + 200; ++j) {
    const double term = detail::gaussian_window(static_cast<double>(j), width);
    tail += 2.0 * term;
    if (term < 1e-300) break;
  }
  return {std::move(leaf), tail};
}

/// One spanning test function together with bookkeeping from the constructor.
struct BasisElement {
  CoefficientTree tree;
  std::string name;
  bool uses_theta = false;
  bool mean_subtracted = false;
  double theta_tail = 0.0;
};

namespace detail {

// Tree with a single tower path: e^{2 pi i (ell t + sum_v a_v y_v)} where the
// nonzero fiber frequencies sit on torus-like coordinates.
inline CoefficientTree monomial_tree(int d, int degree, int ell, const Eigen::VectorXi& a) {
  CoefficientTree root(d + 1, 0, degree);
  // frequencies along the tower: variable 0 is t, variable 1+v is y_v
  Eigen::VectorXi freq(d + 1);
  freq(0) = ell;
  freq.tail(d) = a;
  CoefficientTree* node = &root;
  for (int lvl = 0; lvl <= d; ++lvl) {
    if (freq(lvl) != 0) {
      node->set_mode(freq(lvl), trig_leaf(freq.tail(d - lvl)));
      return root;
    }
    if (lvl < d) {
      node = &node->ensure_zero_child();
    } else {
      node->ensure_zero_child().set_terminal_scalar(Complex(1.0, 0.0));
    }
  }
  return root;
}

inline CoefficientTree theta_tree(int d, int degree, int ell, const ThetaMode& mode) {
  CoefficientTree root(d + 1, 0, degree);
  if (ell != 0) {
    root.set_mode(ell, mode.leaf);
  } else {
    root.ensure_zero_child().set_mode(mode.leaf.theta_k,
                                      theta_section(mode.leaf.theta_k, mode.leaf.theta_J,
                                                    mode.leaf.theta_width));
  }
  return root;
}

}  // namespace detail

/// Spanning family of degree-n pseudo-polynomial test functions with zero Haar
/// mean: torus-pullback monomials over t and the torus-like fiber coordinates,
/// plus Weil-Brezin modes with central frequency 1 <= |k| <= n when the
/// structure is Heisenberg-3-shaped. For Heisenberg-3 the family has
/// (2n+1)^3 - 1 + (2n+1) * 2n elements.
inline std::vector<BasisElement> pseudo_poly_basis(const NilStructured& s, int n, int theta_J = 6,
                                                   double theta_width = 1.0) {
  if (n < 1) throw std::invalid_argument("pseudo_poly_basis: degree must be >= 1");
  const int d = s.dim();
  std::vector<int> torus_vars;
  for (int k = 0; k < d; ++k)
    if (!s.is_derived_coordinate(k)) torus_vars.push_back(k);

  std::vector<BasisElement> out;

  // (a) torus modes: multi-index over (t, torus coordinates), not all zero
  const int slots = 1 + static_cast<int>(torus_vars.size());
  std::vector<int> idx(slots, -n);
  while (true) {
    bool all_zero = true;
    for (int v : idx) all_zero &= v == 0;
    if (!all_zero) {
      Eigen::VectorXi a = Eigen::VectorXi::Zero(d);
      for (size_t v = 0; v < torus_vars.size(); ++v) a(torus_vars[v]) = idx[v + 1];
      BasisElement el{detail::monomial_tree(d, n, idx[0], a), "", false, false, 0.0};
      el.name = "trig l=" + std::to_string(idx[0]);
      for (size_t v = 0; v < torus_vars.size(); ++v)
        el.name += " a" + std::to_string(torus_vars[v] + 1) + "=" + std::to_string(idx[v + 1]);
      out.push_back(std::move(el));
    }
    int pos = slots - 1;
    while (pos >= 0 && idx[pos] == n) idx[pos--] = -n;
    if (pos < 0) break;
    ++idx[pos];
  }

  // (b) Weil-Brezin modes on a Heisenberg-3-shaped structure
  const bool heis3 = d == 3 && s.central() == 1 && s.bracket_coeff(1, 2, 0) != 0.0;
  if (heis3) {
    for (int ell = -n; ell <= n; ++ell)
      for (int k = -n; k <= n; ++k) {
        if (k == 0) continue;
        const ThetaMode mode = theta_function(k, theta_J, theta_width);
        BasisElement el{detail::theta_tree(d, n, ell, mode), "", true, false, mode.invariance_tail};
        el.name = "theta l=" + std::to_string(ell) + " k=" + std::to_string(k);
        out.push_back(std::move(el));
      }
  }

  // all constructions above have exact zero mean; verify and subtract if a
  // future constructor misses
  const int grid = 4 * n + 4;
  for (auto& el : out) {
    const auto f = [&el, d](const Eigen::VectorXd& c) {
      return evaluate(el.tree, c(0), c.tail(d));
    };
    const Complex mean = quadrature_mean(f, d + 1, grid);
    if (std::abs(mean) > 1e-12) {
      el.mean_subtracted = true;
      CoefficientTree* node = &el.tree;
      for (int lvl = 0; lvl < d; ++lvl) node = &node->ensure_zero_child();
      CoefficientTree& term = node->ensure_zero_child();
      term.set_terminal_scalar(term.terminal_scalar() - mean);
    }
  }
  return out;
}

struct PseudoPolyReport {
  bool ok = true;
  double max_out_of_band = 0.0;
  int worst_level = -1;
  int worst_frequency = 0;
};

/// Scan the zero tower: frequencies n < |k| <= 2n at every level must vanish.
/// Coefficients are measured by quadrature against a probe set of the
/// remaining variables.
inline PseudoPolyReport is_pseudo_polynomial(const CoefficientTree& tree, int n,
                                             double tol = 1e-10) {
  PseudoPolyReport report;
  const int grid = 4 * n + 4;
  const CoefficientTree* node = &tree;
  while (node && !node->terminal()) {
    const int rest = node->remaining_vars() - 1;
    // deterministic probe points for the remaining variables
    std::vector<Eigen::VectorXd> probes;
    const int num_probes = rest == 0 ? 1 : 7;
    for (int p = 0; p < num_probes; ++p) {
      Eigen::VectorXd y(rest);
      for (int i = 0; i < rest; ++i) y(i) = std::fmod(0.137 + 0.61803398875 * (p + 3 * i + 1), 1.0);
      probes.push_back(y);
    }
    const auto f = [node](const Eigen::VectorXd& c) { return node->evaluate(c); };
    for (int k = n + 1; k <= 2 * n; ++k)
      for (int sign : {1, -1}) {
        const LeafFunction coeff =
            fourier_coefficient(f, node->remaining_vars(), sign * k, grid);
        for (const auto& y : probes) {
          const double mag = std::abs(coeff(y));
          if (mag > report.max_out_of_band) {
            report.max_out_of_band = mag;
            report.worst_level = node->level();
            report.worst_frequency = sign * k;
          }
        }
      }
    // stored modes above the band are a structural violation
    for (const auto& [k, leaf] : node->modes())
      if (std::abs(k) > n)
        for (const auto& y : probes) {
          const double mag = std::abs(leaf(y));
          if (mag > report.max_out_of_band) {
            report.max_out_of_band = mag;
            report.worst_level = node->level();
            report.worst_frequency = k;
          }
        }
    node = node->zero_child();
  }
  report.ok = report.max_out_of_band < tol;
  return report;
}

}  // namespace due
