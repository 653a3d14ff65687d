#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace due {

template <typename Scalar>
using NilPoint = Eigen::Vector<Scalar, Eigen::Dynamic>;

using NilPointd = NilPoint<double>;
using LatticeElement = Eigen::VectorXi;  // exp(n_1 v_1) ... exp(n_d v_d)

/// Step-2 nilpotent Lie algebra in a Mal'cev basis v_1..v_d adapted to the
/// integer lattice: the first `central` basis vectors span a central subspace
/// containing every bracket, and brackets only involve the remaining vectors.
/// Group elements are handled in exponential coordinates, where the product is
/// the exact step-2 closed form a + b + [a,b]/2.
template <typename Scalar>
class NilStructure {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  NilStructure(int dim, int central, std::vector<Matrix> bracket_tables)
      : dim_(dim), central_(central), bracket_(std::move(bracket_tables)) {
    if (dim_ < 0 || central_ < 0 || central_ > dim_)
      throw std::invalid_argument("NilStructure: bad dimensions");
    if (static_cast<int>(bracket_.size()) != central_)
      throw std::invalid_argument("NilStructure: need one bracket table per central vector");
    for (int k = 0; k < central_; ++k) {
      const Matrix& b = bracket_[k];
      if (b.rows() != dim_ || b.cols() != dim_)
        throw std::invalid_argument("NilStructure: bracket table has wrong shape");
      if (!((b + b.transpose()).array().abs() < Scalar(1e-14)).all())
        throw std::invalid_argument("NilStructure: bracket table must be antisymmetric");
      // centrality: brackets may not involve the central vectors themselves
      for (int i = 0; i < central_; ++i)
        if (b.row(i).cwiseAbs().maxCoeff() > Scalar(0) || b.col(i).cwiseAbs().maxCoeff() > Scalar(0))
          throw std::invalid_argument("NilStructure: bracket involves a central vector");
    }
  }

  int dim() const { return dim_; }
  int central() const { return central_; }
  const std::vector<Matrix>& bracket_tables() const { return bracket_; }

  /// b_{ij}^k (all indices 0-based); zero for k >= central.
  Scalar bracket_coeff(int i, int j, int k) const {
    return k < central_ ? bracket_[k](i, j) : Scalar(0);
  }

  /// True if coordinate k receives some bracket, i.e. v_k sits in the derived
  /// algebra and its lattice direction is not a plain torus factor.
  bool is_derived_coordinate(int k) const {
    return k < central_ && bracket_[k].cwiseAbs().maxCoeff() > Scalar(0);
  }

  /// [a, b] in exponential coordinates.
  NilPoint<Scalar> bracket(const NilPoint<Scalar>& a, const NilPoint<Scalar>& b) const {
    check_point(a);
    check_point(b);
    NilPoint<Scalar> out = NilPoint<Scalar>::Zero(dim_);
    for (int k = 0; k < central_; ++k) out(k) = a.dot(bracket_[k] * b);
    return out;
  }

  void check_point(const NilPoint<Scalar>& a) const {
    if (a.size() != dim_) throw std::invalid_argument("NilStructure: point has wrong dimension");
  }

 private:
  int dim_;
  int central_;
  std::vector<Matrix> bracket_;
};

using NilStructured = NilStructure<double>;

/// One structure constant [v_i, v_j] = value * v_k (0-based indices).
template <typename Scalar>
struct BracketEntry {
  int i, j, k;
  Scalar value;
};

/// Build a structure from sparse entries; the antisymmetric counterpart of
/// each entry is filled in automatically. Entries landing outside the central
/// block or sourced from it are rejected.
template <typename Scalar>
NilStructure<Scalar> make_nil_structure(int dim, int central,
                                        const std::vector<BracketEntry<Scalar>>& entries) {
  if (dim < 0 || central < 0 || central > dim)
    throw std::invalid_argument("make_nil_structure: bad dimensions");
  std::vector<typename NilStructure<Scalar>::Matrix> tables(
      central, NilStructure<Scalar>::Matrix::Zero(dim, dim));
  for (const auto& e : entries) {
    if (e.value == Scalar(0)) continue;
    if (e.k < 0 || e.k >= central)
      throw std::invalid_argument("make_nil_structure: bracket value outside the central block");
    if (e.i < central || e.j < central || e.i >= dim || e.j >= dim || e.i == e.j)
      throw std::invalid_argument("make_nil_structure: bracket sourced from an invalid pair");
    tables[e.k](e.i, e.j) += e.value;
    tables[e.k](e.j, e.i) -= e.value;
  }
  return NilStructure<Scalar>(dim, central, std::move(tables));
}

/// The 3-dimensional Heisenberg algebra: [v_2, v_3] = v_1, all else zero.
template <typename Scalar = double>
NilStructure<Scalar> heisenberg3() {
  typename NilStructure<Scalar>::Matrix b = NilStructure<Scalar>::Matrix::Zero(3, 3);
  b(1, 2) = Scalar(1);
  b(2, 1) = Scalar(-1);
  return NilStructure<Scalar>(3, 1, {b});
}

/// R^d with the trivial bracket (torus case).
template <typename Scalar = double>
NilStructure<Scalar> abelian_structure(int dim) {
  return NilStructure<Scalar>(dim, 0, {});
}

template <typename Scalar>
NilPoint<Scalar> nil_identity(const NilStructure<Scalar>& s) {
  return NilPoint<Scalar>::Zero(s.dim());
}

/// Group product in exponential coordinates: a + b + [a,b]/2 (exact, step 2).
template <typename Scalar>
NilPoint<Scalar> mul(const NilStructure<Scalar>& s, const NilPoint<Scalar>& a,
                     const NilPoint<Scalar>& b) {
  return a + b + Scalar(0.5) * s.bracket(a, b);
}

template <typename Scalar>
NilPoint<Scalar> inv(const NilStructure<Scalar>& s, const NilPoint<Scalar>& a) {
  s.check_point(a);
  return -a;
}

namespace detail {

// x_k = y_k + (strict upper part of the bracket quadratic form)/2; the form
// only reads non-central coordinates, where x and y agree.
template <typename Scalar>
Scalar second_kind_correction(const NilStructure<Scalar>& s, const NilPoint<Scalar>& v, int k) {
  const auto& b = s.bracket_tables()[k];
  Scalar acc = Scalar(0);
  for (int i = 0; i < s.dim(); ++i)
    for (int j = i + 1; j < s.dim(); ++j) acc += v(i) * v(j) * b(i, j);
  return Scalar(0.5) * acc;
}

}  // namespace detail

/// Coordinates of the second kind: point = exp(y_1 v_1) ... exp(y_d v_d).
template <typename Scalar>
NilPoint<Scalar> to_second_kind(const NilStructure<Scalar>& s, const NilPoint<Scalar>& x) {
  s.check_point(x);
  NilPoint<Scalar> y = x;
  for (int k = 0; k < s.central(); ++k) y(k) -= detail::second_kind_correction(s, x, k);
  return y;
}

template <typename Scalar>
NilPoint<Scalar> from_second_kind(const NilStructure<Scalar>& s, const NilPoint<Scalar>& y) {
  s.check_point(y);
  NilPoint<Scalar> x = y;
  for (int k = 0; k < s.central(); ++k) x(k) += detail::second_kind_correction(s, y, k);
  return x;
}

/// exp coordinates of the lattice element exp(n_1 v_1) ... exp(n_d v_d).
template <typename Scalar>
NilPoint<Scalar> lattice_point(const NilStructure<Scalar>& s, const LatticeElement& n) {
  if (n.size() != s.dim()) throw std::invalid_argument("lattice_point: wrong dimension");
  return from_second_kind(s, NilPoint<Scalar>(n.template cast<Scalar>()));
}

template <typename Scalar>
struct ReducedPoint {
  NilPoint<Scalar> point;    // second-kind coordinates in [0,1)^d
  LatticeElement lattice;    // a = point * lattice
};

/// Write a = r * gamma with gamma in the lattice and r in the fundamental
/// domain [0,1)^d of second-kind coordinates, peeling indices d-1 .. 0.
template <typename Scalar>
ReducedPoint<Scalar> reduce_mod_lattice(const NilStructure<Scalar>& s, const NilPoint<Scalar>& a) {
  s.check_point(a);
  NilPoint<Scalar> cur = a;
  LatticeElement n = LatticeElement::Zero(s.dim());
  for (int i = s.dim() - 1; i >= 0; --i) {
    const NilPoint<Scalar> y = to_second_kind(s, cur);
    n(i) = static_cast<int>(std::floor(y(i)));
    NilPoint<Scalar> step = NilPoint<Scalar>::Zero(s.dim());
    step(i) = Scalar(-n(i));
    cur = mul(s, cur, from_second_kind(s, step));
  }
  return {cur, n};
}

/// Structure of N / N_(i): drop the first i basis vectors.
template <typename Scalar>
NilStructure<Scalar> quotient_structure(const NilStructure<Scalar>& s, int i) {
  if (i < 0 || i > s.dim()) throw std::out_of_range("quotient_structure: level out of range");
  const int d = s.dim() - i;
  const int c = std::max(s.central() - i, 0);
  std::vector<typename NilStructure<Scalar>::Matrix> tables;
  tables.reserve(c);
  for (int k = i; k < s.central(); ++k)
    tables.push_back(s.bracket_tables()[k].bottomRightCorner(d, d));
  return NilStructure<Scalar>(d, c, std::move(tables));
}

/// Image of a point under N -> N / N_(i) in exponential coordinates (drops the
/// first i coordinates; a group homomorphism for every i).
template <typename Scalar>
NilPoint<Scalar> project_quotient(const NilStructure<Scalar>& s, const NilPoint<Scalar>& a, int i) {
  s.check_point(a);
  if (i < 0 || i > s.dim()) throw std::out_of_range("project_quotient: level out of range");
  return a.tail(s.dim() - i);
}

}  // namespace due
