#pragma once

// Symmetric tensors stored as homogeneous polynomials.
//
// A symmetric tensor T of order d over m variables is identified with the
// polynomial T(X) = sum_{|a|=d} T_a * multinomial(d, a) * X^a. Only the
// coefficients T_a are stored, one per multi-index, in graded-lex order
// (for a fixed degree: lexicographically descending exponent vectors, so
// X1^2, X1X2, X1X3, X2^2, ... ).

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace momentgmm {

using MultiIndex = std::vector<int>;

/// Number of monomials of degree d in m variables, C(m+d-1, d).
std::size_t monomial_count(int dim, int degree);

/// Enumeration of all degree-d monomials in m variables with exact
/// multinomial coefficients and O(m) index lookup.
class MonomialBasis {
 public:
  MonomialBasis(int dim, int degree);

  int dim() const noexcept { return dim_; }
  int degree() const noexcept { return degree_; }
  std::size_t size() const noexcept { return exponents_.size(); }

  const MultiIndex& exponent(std::size_t pos) const { return exponents_[pos]; }
  const std::vector<MultiIndex>& exponents() const noexcept { return exponents_; }

  /// multinomial(d; a) = d! / prod(a_j!), exact up to d = 20.
  std::uint64_t multinomial_exact(std::size_t pos) const { return multinomials_[pos]; }
  double multinomial(std::size_t pos) const { return weights_[pos]; }
  const Eigen::VectorXd& multinomials() const noexcept { return weights_; }

  /// Position of a multi-index of this degree; throws InputError otherwise.
  std::size_t index_of(const MultiIndex& alpha) const;

  /// Shared, lazily built instance for (dim, degree).
  static std::shared_ptr<const MonomialBasis> get(int dim, int degree);

 private:
  int dim_;
  int degree_;
  std::vector<MultiIndex> exponents_;
  std::vector<std::uint64_t> multinomials_;
  Eigen::VectorXd weights_;
};

/// Monomial value x^a.
double monomial_value(const MultiIndex& alpha, const Eigen::Ref<const Eigen::VectorXd>& x);

class SymmetricTensor {
 public:
  SymmetricTensor(int dim, int order);
  SymmetricTensor(int dim, int order, Eigen::VectorXd coeffs);

  int dim() const noexcept { return basis_->dim(); }
  int order() const noexcept { return basis_->degree(); }
  std::size_t size() const noexcept { return basis_->size(); }

  const MonomialBasis& basis() const noexcept { return *basis_; }
  const Eigen::VectorXd& coeffs() const noexcept { return coeffs_; }
  Eigen::VectorXd& coeffs() noexcept { return coeffs_; }

  double operator[](const MultiIndex& alpha) const { return coeffs_[basis_->index_of(alpha)]; }
  double& operator[](const MultiIndex& alpha) { return coeffs_[basis_->index_of(alpha)]; }

  SymmetricTensor& operator+=(const SymmetricTensor& other);
  SymmetricTensor& operator-=(const SymmetricTensor& other);
  SymmetricTensor& operator*=(double s);

 private:
  std::shared_ptr<const MonomialBasis> basis_;
  Eigen::VectorXd coeffs_;
};

SymmetricTensor operator+(SymmetricTensor a, const SymmetricTensor& b);
SymmetricTensor operator-(SymmetricTensor a, const SymmetricTensor& b);
SymmetricTensor operator*(double s, SymmetricTensor a);

/// T = sum_i weights[i] * (points[i] . X)^order
struct WaringDecomposition {
  Eigen::VectorXd weights;
  std::vector<Eigen::VectorXd> points;
  int order = 0;

  std::size_t rank() const noexcept { return points.size(); }
  int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
};

/// T(x) = sum_a T_a multinomial(d,a) x^a.
double eval(const SymmetricTensor& t, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Coefficients of (v . X)^d, i.e. T_a = v^a.
SymmetricTensor pow_linear(const Eigen::Ref<const Eigen::VectorXd>& v, int degree);

double apolar(const SymmetricTensor& p, const SymmetricTensor& q);
double apolar_norm(const SymmetricTensor& p);

SymmetricTensor reconstruct(const WaringDecomposition& w);

/// Partial derivative with respect to X_i (order d-1), exact index shift.
SymmetricTensor partial_derivative(const SymmetricTensor& p, int var);

/// Product X_i * q (order d+1).
SymmetricTensor multiply_variable(const SymmetricTensor& q, int var);

}  // namespace momentgmm
