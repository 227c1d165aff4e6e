#include "arp/sym_tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "arp/errors.hpp"

namespace arp {

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
  }
  return result;
}

void check_shape(int order, int dim) {
  if (order < 1 || dim < 1) {
    throw InvalidArgument("SymTensor: order and dim must be >= 1 (got order=" +
                          std::to_string(order) + ", dim=" + std::to_string(dim) + ")");
  }
  if (order > SymTensor::kMaxOrder) {
    throw InvalidArgument("SymTensor: order " + std::to_string(order) + " exceeds " +
                          std::to_string(SymTensor::kMaxOrder));
  }
}

// Advances a sorted multi-index to its lexicographic successor. Returns false
// once the last index (dim-1, ..., dim-1) has been passed.
bool next_sorted(std::span<int> index, int dim) {
  int pos = static_cast<int>(index.size()) - 1;
  while (pos >= 0 && index[pos] == dim - 1) --pos;
  if (pos < 0) return false;
  const int v = index[pos] + 1;
  for (std::size_t i = pos; i < index.size(); ++i) index[i] = v;
  return true;
}

std::size_t colex_rank(std::span<const int> sorted_index) {
  // Colexicographic rank of the strict combination c_t = i_t + t.
  std::size_t r = 0;
  for (std::size_t t = 0; t < sorted_index.size(); ++t) {
    r += binomial(static_cast<std::size_t>(sorted_index[t]) + t, t + 1);
  }
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Packed entries of T[s]^times, a tensor of order T.order() - times >= 0.
std::vector<double> contract_packed(const SymTensor& t, const Vector& s, int times) {
  if (s.size() != t.dim()) {
    throw InvalidArgument("contract: vector has dimension " + std::to_string(s.size()) +
                          ", tensor has dimension " + std::to_string(t.dim()));
  }
  if (times < 0 || times > t.order()) {
    throw InvalidArgument("contract: cannot apply " + std::to_string(times) +
                          " vectors to an order-" + std::to_string(t.order()) + " tensor");
  }
  const int dim = t.dim();
  const int rest = t.order() - times;

  // Weighted list of the contracted multi-indices: multiplicity * prod s.
  struct Term {
    std::array<int, SymTensor::kMaxOrder> index;
    double weight;
  };
  std::vector<Term> terms;
  {
    std::array<int, SymTensor::kMaxOrder> k{};
    std::span<int> kspan(k.data(), times);
    do {
      double w = multiplicity(kspan);
      for (int i = 0; i < times; ++i) w *= s[k[i]];
      if (w != 0.0) terms.push_back({k, w});
    } while (times > 0 && next_sorted(kspan, dim));
  }

  std::vector<double> out(rest == 0 ? 1 : packed_size(rest, dim), 0.0);
  std::array<int, SymTensor::kMaxOrder> j{};
  std::array<int, SymTensor::kMaxOrder> merged{};
  std::span<int> jspan(j.data(), rest);
  do {
    double acc = 0.0;
    for (const Term& term : terms) {
      std::merge(j.begin(), j.begin() + rest, term.index.begin(),
                 term.index.begin() + times, merged.begin());
      acc += term.weight * t.packed()[t.rank(std::span<const int>(merged.data(), t.order()))];
    }
    out[colex_rank(std::span<const int>(j.data(), rest))] = acc;
  } while (rest > 0 && next_sorted(jspan, dim));
  return out;
}

}  // namespace

std::size_t packed_size(int order, int dim) {
  return binomial(static_cast<std::size_t>(dim + order - 1), static_cast<std::size_t>(order));
}

double multiplicity(std::span<const int> sorted_index) {
  double denom = 1.0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= sorted_index.size(); ++i) {
    if (i < sorted_index.size() && sorted_index[i] == sorted_index[i - 1]) {
      ++run;
    } else {
      denom *= factorial(static_cast<int>(run));
      run = 1;
    }
  }
  return factorial(static_cast<int>(sorted_index.size())) / denom;
}

SymTensor::SymTensor(int order, int dim) : order_(order), dim_(dim) {
  check_shape(order, dim);
  data_.assign(packed_size(order, dim), 0.0);
}

SymTensor::SymTensor(int order, int dim, std::vector<double> data)
    : order_(order), dim_(dim), data_(std::move(data)) {}

SymTensor SymTensor::build(int order, int dim, const Generator& generator) {
  SymTensor t(order, dim);
  t.for_each_index([&](std::span<const int> idx, std::size_t pos) { t.data_[pos] = generator(idx); });
  return t;
}

SymTensor SymTensor::from_vector(const Vector& v) {
  if (v.size() < 1) throw InvalidArgument("SymTensor::from_vector: empty vector");
  return SymTensor(1, static_cast<int>(v.size()),
                   std::vector<double>(v.data(), v.data() + v.size()));
}

SymTensor SymTensor::from_matrix(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw InvalidArgument("SymTensor::from_matrix: matrix must be square and non-empty");
  }
  return build(2, static_cast<int>(m.rows()),
               [&](std::span<const int> idx) { return m(idx[0], idx[1]); });
}

std::size_t SymTensor::rank(std::span<const int> sorted_index) const {
  return colex_rank(sorted_index);
}

double SymTensor::operator()(std::span<const int> index) const {
  if (static_cast<int>(index.size()) != order_) {
    throw InvalidArgument("SymTensor: index length " + std::to_string(index.size()) +
                          " does not match order " + std::to_string(order_));
  }
  std::array<int, kMaxOrder> sorted{};
  for (int i = 0; i < order_; ++i) {
    if (index[i] < 0 || index[i] >= dim_) throw InvalidArgument("SymTensor: index out of range");
    sorted[i] = index[i];
  }
  std::sort(sorted.begin(), sorted.begin() + order_);
  return data_[rank(std::span<const int>(sorted.data(), order_))];
}

double SymTensor::operator()(std::initializer_list<int> index) const {
  return (*this)(std::span<const int>(index.begin(), index.size()));
}

void SymTensor::for_each_index(
    const std::function<void(std::span<const int>, std::size_t)>& fn) const {
  std::array<int, kMaxOrder> idx{};
  std::span<int> span(idx.data(), order_);
  do {
    std::span<const int> view(idx.data(), order_);
    fn(view, rank(view));
  } while (next_sorted(span, dim_));
}

Vector SymTensor::to_vector() const {
  if (order_ != 1) throw InvalidArgument("SymTensor::to_vector: order is not 1");
  return Eigen::Map<const Vector>(data_.data(), dim_);
}

Matrix SymTensor::to_matrix() const {
  if (order_ != 2) throw InvalidArgument("SymTensor::to_matrix: order is not 2");
  Matrix m(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    for (int j = i; j < dim_; ++j) {
      const int idx[2] = {i, j};
      m(i, j) = m(j, i) = data_[rank(idx)];
    }
  }
  return m;
}

SymTensor SymTensor::operator-(const SymTensor& other) const {
  if (order_ != other.order_ || dim_ != other.dim_) {
    throw InvalidArgument("SymTensor: shape mismatch in subtraction");
  }
  std::vector<double> d(data_.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = data_[i] - other.data_[i];
  return SymTensor(order_, dim_, std::move(d));
}

SymTensor contract(const SymTensor& t, const Vector& s, int times) {
  if (times >= t.order()) {
    throw InvalidArgument("contract: result would have order < 1; use contract_full");
  }
  if (times == 0) {
    if (s.size() != t.dim()) throw InvalidArgument("contract: dimension mismatch");
    return t;
  }
  std::vector<double> packed = contract_packed(t, s, times);
  return SymTensor::build(t.order() - times, t.dim(),
                          [&](std::span<const int> idx) { return packed[colex_rank(idx)]; });
}

double contract_full(const SymTensor& t, const Vector& s) {
  return contract_packed(t, s, t.order())[0];
}

Vector contract_to_vector(const SymTensor& t, const Vector& s) {
  if (t.order() == 1) {
    if (s.size() != t.dim()) throw InvalidArgument("contract: dimension mismatch");
    return t.to_vector();
  }
  std::vector<double> packed = contract_packed(t, s, t.order() - 1);
  return Eigen::Map<Vector>(packed.data(), t.dim());
}

Matrix contract_to_matrix(const SymTensor& t, const Vector& s) {
  if (t.order() < 2) throw InvalidArgument("contract_to_matrix: order must be >= 2");
  if (t.order() == 2) {
    if (s.size() != t.dim()) throw InvalidArgument("contract: dimension mismatch");
    return t.to_matrix();
  }
  return contract(t, s, t.order() - 2).to_matrix();
}

Contraction contract_power(const SymTensor& t, const Vector& s, int times) {
  const int rest = t.order() - times;
  if (times < 0 || rest < 0) {
    throw InvalidArgument("contract_power: cannot apply " + std::to_string(times) +
                          " vectors to an order-" + std::to_string(t.order()) + " tensor");
  }
  if (times == 0) return t;
  switch (rest) {
    case 0:
      return contract_full(t, s);
    case 1:
      return contract_to_vector(t, s);
    case 2:
      return contract_to_matrix(t, s);
    default:
      return contract(t, s, times);
  }
}

double injective_norm(const SymTensor& t, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("injective_norm: tol must be positive");
  if (t.order() == 1) return t.to_vector().norm();
  if (t.order() == 2) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(t.to_matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }

  const int n = t.dim();
  const int order = t.order();

  // Vector T[v_1, ..., v_{j-1}] with all slots but `skip` filled. Symmetry
  // lets the slots be contracted in any order.
  auto partial = [&](const std::vector<Vector>& vs, int skip) {
    SymTensor cur = t;
    for (int k = 0; k < order; ++k) {
      if (k == skip) continue;
      if (cur.order() == 2) return Vector(cur.to_matrix() * vs[k]);
      cur = contract(cur, vs[k], 1);
    }
    return cur.to_vector();
  };

  std::vector<Vector> starts;
  for (int k = 0; k < n; ++k) starts.push_back(Vector::Unit(n, k));
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  for (int r = 0; r < 8; ++r) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
    starts.push_back(v.normalized());
  }

  double best = 0.0;
  for (const Vector& start : starts) {
    std::vector<Vector> vs(order, start);
    double value = std::abs(contract_full(t, start));
    best = std::max(best, value);
    for (int sweep = 0; sweep < 1000; ++sweep) {
      const double previous = value;
      for (int slot = 0; slot < order; ++slot) {
        Vector w = partial(vs, slot);
        const double norm = w.norm();
        if (norm == 0.0) break;
        vs[slot] = w / norm;
        value = norm;
      }
      best = std::max(best, value);
      if (value - previous <= tol * std::max(value, 1e-300)) break;
    }
  }
  return best;
}

}  // namespace arp
