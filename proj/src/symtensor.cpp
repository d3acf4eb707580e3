#include "momentgmm/symtensor.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <utility>

#include "momentgmm/errors.hpp"

namespace momentgmm {

namespace {

constexpr int kMaxDegree = 20;

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    // exact: result * (n-k+i) is always divisible by i at this point
    result = result * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return result;
}

void enumerate(int dim, int degree, int var, MultiIndex& current, std::vector<MultiIndex>& out) {
  if (var == dim - 1) {
    current[var] = degree;
    out.push_back(current);
    return;
  }
  for (int a = degree; a >= 0; --a) {
    current[var] = a;
    enumerate(dim, degree - a, var + 1, current, out);
  }
  current[var] = 0;
}

void check_same_shape(const SymmetricTensor& a, const SymmetricTensor& b, const char* op) {
  if (a.dim() != b.dim() || a.order() != b.order()) {
    throw InputError(std::string(op) + ": shape mismatch (" + std::to_string(a.dim()) + "," +
                     std::to_string(a.order()) + ") vs (" + std::to_string(b.dim()) + "," +
                     std::to_string(b.order()) + ")");
  }
}

}  // namespace

std::size_t monomial_count(int dim, int degree) {
  if (degree < 0 || dim < 0) return 0;
  if (dim == 0) return degree == 0 ? 1 : 0;
  return static_cast<std::size_t>(binomial(dim + degree - 1, degree));
}

MonomialBasis::MonomialBasis(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim < 1) throw InputError("MonomialBasis: dim must be >= 1");
  if (degree < 0 || degree > kMaxDegree) {
    throw InputError("MonomialBasis: degree must lie in [0, " + std::to_string(kMaxDegree) + "]");
  }
  exponents_.reserve(monomial_count(dim, degree));
  MultiIndex current(static_cast<std::size_t>(dim), 0);
  enumerate(dim, degree, 0, current, exponents_);

  std::vector<std::uint64_t> factorial(static_cast<std::size_t>(degree) + 1, 1);
  for (int i = 1; i <= degree; ++i) factorial[i] = factorial[i - 1] * static_cast<std::uint64_t>(i);

  multinomials_.reserve(exponents_.size());
  weights_.resize(static_cast<Eigen::Index>(exponents_.size()));
  for (std::size_t pos = 0; pos < exponents_.size(); ++pos) {
    std::uint64_t value = factorial[degree];
    for (int a : exponents_[pos]) value /= factorial[a];
    multinomials_.push_back(value);
    weights_[static_cast<Eigen::Index>(pos)] = static_cast<double>(value);
  }
}

std::size_t MonomialBasis::index_of(const MultiIndex& alpha) const {
  if (static_cast<int>(alpha.size()) != dim_) {
    throw InputError("index_of: multi-index has " + std::to_string(alpha.size()) +
                     " entries, expected " + std::to_string(dim_));
  }
  int total = 0;
  for (int a : alpha) {
    if (a < 0) throw InputError("index_of: negative exponent");
    total += a;
  }
  if (total != degree_) {
    throw InputError("index_of: multi-index degree " + std::to_string(total) + " != " +
                     std::to_string(degree_));
  }
  // Every index with a larger leading exponent comes first.
  std::size_t pos = 0;
  int remaining = degree_;
  for (int j = 0; j + 1 < dim_; ++j) {
    for (int a = remaining; a > alpha[j]; --a) pos += monomial_count(dim_ - j - 1, remaining - a);
    remaining -= alpha[j];
  }
  return pos;
}

std::shared_ptr<const MonomialBasis> MonomialBasis::get(int dim, int degree) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const MonomialBasis>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{dim, degree}];
  if (!slot) slot = std::make_shared<const MonomialBasis>(dim, degree);
  return slot;
}

double monomial_value(const MultiIndex& alpha, const Eigen::Ref<const Eigen::VectorXd>& x) {
  double value = 1.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    for (int e = 0; e < alpha[j]; ++e) value *= x[static_cast<Eigen::Index>(j)];
  }
  return value;
}

SymmetricTensor::SymmetricTensor(int dim, int order)
    : basis_(MonomialBasis::get(dim, order)),
      coeffs_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_->size()))) {}

SymmetricTensor::SymmetricTensor(int dim, int order, Eigen::VectorXd coeffs)
    : basis_(MonomialBasis::get(dim, order)), coeffs_(std::move(coeffs)) {
  if (static_cast<std::size_t>(coeffs_.size()) != basis_->size()) {
    throw InputError("SymmetricTensor: expected " + std::to_string(basis_->size()) +
                     " coefficients for dim " + std::to_string(dim) + ", order " +
                     std::to_string(order) + ", got " + std::to_string(coeffs_.size()));
  }
}

SymmetricTensor& SymmetricTensor::operator+=(const SymmetricTensor& other) {
  check_same_shape(*this, other, "operator+=");
  coeffs_ += other.coeffs_;
  return *this;
}

SymmetricTensor& SymmetricTensor::operator-=(const SymmetricTensor& other) {
  check_same_shape(*this, other, "operator-=");
  coeffs_ -= other.coeffs_;
  return *this;
}

SymmetricTensor& SymmetricTensor::operator*=(double s) {
  coeffs_ *= s;
  return *this;
}

SymmetricTensor operator+(SymmetricTensor a, const SymmetricTensor& b) { return a += b; }
SymmetricTensor operator-(SymmetricTensor a, const SymmetricTensor& b) { return a -= b; }
SymmetricTensor operator*(double s, SymmetricTensor a) { return a *= s; }

double eval(const SymmetricTensor& t, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != t.dim()) {
    throw InputError("eval: point has length " + std::to_string(x.size()) + ", tensor dim is " +
                     std::to_string(t.dim()));
  }
  const auto& basis = t.basis();
  double sum = 0.0;
  for (std::size_t pos = 0; pos < basis.size(); ++pos) {
    const auto i = static_cast<Eigen::Index>(pos);
    sum += t.coeffs()[i] * basis.multinomial(pos) * monomial_value(basis.exponent(pos), x);
  }
  return sum;
}

SymmetricTensor pow_linear(const Eigen::Ref<const Eigen::VectorXd>& v, int degree) {
  if (v.size() < 1) throw InputError("pow_linear: empty vector");
  if (degree < 1) throw InputError("pow_linear: degree must be >= 1");
  if (v.cwiseAbs().maxCoeff() == 0.0) throw InputError("pow_linear: zero vector");
  SymmetricTensor t(static_cast<int>(v.size()), degree);
  const auto& basis = t.basis();
  for (std::size_t pos = 0; pos < basis.size(); ++pos) {
    t.coeffs()[static_cast<Eigen::Index>(pos)] = monomial_value(basis.exponent(pos), v);
  }
  return t;
}

double apolar(const SymmetricTensor& p, const SymmetricTensor& q) {
  check_same_shape(p, q, "apolar");
  return (p.coeffs().array() * q.coeffs().array() * p.basis().multinomials().array()).sum();
}

double apolar_norm(const SymmetricTensor& p) { return std::sqrt(apolar(p, p)); }

SymmetricTensor reconstruct(const WaringDecomposition& w) {
  if (w.points.empty()) throw InputError("reconstruct: empty decomposition");
  if (static_cast<std::size_t>(w.weights.size()) != w.points.size()) {
    throw InputError("reconstruct: weights/points length mismatch");
  }
  const int dim = w.dim();
  SymmetricTensor t(dim, w.order);
  for (std::size_t i = 0; i < w.points.size(); ++i) {
    if (w.points[i].size() != dim) throw InputError("reconstruct: inconsistent point dimensions");
    t.coeffs() += w.weights[static_cast<Eigen::Index>(i)] * pow_linear(w.points[i], w.order).coeffs();
  }
  return t;
}

// With T(X) = sum T_a mult(d,a) X^a, the derivative has coefficients
// (dT/dX_i)_b = d * T_{b+e_i}, since mult(d, b+e_i) (b_i+1) = d mult(d-1, b).
SymmetricTensor partial_derivative(const SymmetricTensor& p, int var) {
  if (var < 0 || var >= p.dim()) throw InputError("partial_derivative: variable out of range");
  if (p.order() < 1) throw InputError("partial_derivative: order must be >= 1");
  SymmetricTensor out(p.dim(), p.order() - 1);
  const auto& basis = out.basis();
  const double d = p.order();
  for (std::size_t pos = 0; pos < basis.size(); ++pos) {
    MultiIndex shifted = basis.exponent(pos);
    ++shifted[var];
    out.coeffs()[static_cast<Eigen::Index>(pos)] = d * p[shifted];
  }
  return out;
}

// (X_i q)_a = q_{a-e_i} * a_i / d for a_i > 0, zero otherwise (d = new order).
SymmetricTensor multiply_variable(const SymmetricTensor& q, int var) {
  if (var < 0 || var >= q.dim()) throw InputError("multiply_variable: variable out of range");
  SymmetricTensor out(q.dim(), q.order() + 1);
  const auto& basis = out.basis();
  const double d = out.order();
  for (std::size_t pos = 0; pos < basis.size(); ++pos) {
    const MultiIndex& alpha = basis.exponent(pos);
    if (alpha[var] == 0) continue;
    MultiIndex shifted = alpha;
    --shifted[var];
    out.coeffs()[static_cast<Eigen::Index>(pos)] = q[shifted] * alpha[var] / d;
  }
  return out;
}

}  // namespace momentgmm
