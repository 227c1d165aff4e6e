#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace arp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense symmetric tensor of order j over R^n.
///
/// Only one entry per sorted multi-index (i_1 <= ... <= i_j) is stored, so
/// symmetry is structural: reading any permutation of an index returns the
/// same stored value. Indices are 0-based. Storage length is C(n+j-1, j).
/// Values are immutable after construction.
class SymTensor {
 public:
  static constexpr int kMaxOrder = 8;

  using Generator = std::function<double(std::span<const int>)>;

  /// Zero tensor.
  SymTensor(int order, int dim);

  /// Entries taken from `generator`, called once per sorted multi-index.
  static SymTensor build(int order, int dim, const Generator& generator);
  static SymTensor from_vector(const Vector& v);
  /// Reads the upper triangle; the lower triangle is ignored.
  static SymTensor from_matrix(const Matrix& m);

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::size_t size() const { return data_.size(); }
  std::span<const double> packed() const { return data_; }

  /// Entry at an arbitrary (not necessarily sorted) multi-index.
  double operator()(std::span<const int> index) const;
  double operator()(std::initializer_list<int> index) const;

  /// Packed position of a sorted multi-index.
  std::size_t rank(std::span<const int> sorted_index) const;

  /// Calls fn(sorted_index, packed_position) for every stored entry, in
  /// lexicographic order of the sorted index.
  void for_each_index(
      const std::function<void(std::span<const int>, std::size_t)>& fn) const;

  Vector to_vector() const;
  Matrix to_matrix() const;

  SymTensor operator-(const SymTensor& other) const;

 private:
  SymTensor(int order, int dim, std::vector<double> data);

  int order_;
  int dim_;
  std::vector<double> data_;
};

/// Number of distinct entries of a symmetric order-`order` tensor over R^dim.
std::size_t packed_size(int order, int dim);

/// Number of distinct orderings of a sorted multi-index.
double multiplicity(std::span<const int> sorted_index);

/// T[s]^times as a tensor of order T.order() - times (which must be >= 1).
SymTensor contract(const SymTensor& t, const Vector& s, int times);

/// T[s]^order.
double contract_full(const SymTensor& t, const Vector& s);
/// T[s]^(order-1).
Vector contract_to_vector(const SymTensor& t, const Vector& s);
/// T[s]^(order-2).
Matrix contract_to_matrix(const SymTensor& t, const Vector& s);

/// Result of contract_power: scalar, vector or symmetric matrix for orders
/// 0, 1, 2, and a SymTensor above that.
using Contraction = std::variant<double, Vector, Matrix, SymTensor>;

/// T[s]^times, with the result exposed by its order.
Contraction contract_power(const SymTensor& t, const Vector& s, int times);

/// Estimate of the injective norm max |T[v_1, ..., v_j]| over unit vectors.
///
/// Orders 1 and 2 are exact (Euclidean norm, spectral norm). For order 3 and
/// above the value comes from multi-start alternating maximization and is a
/// lower bound on the true norm; `tol` is the stopping tolerance on the
/// relative change of the objective between sweeps.
double injective_norm(const SymTensor& t, double tol = 1e-12);

}  // namespace arp
