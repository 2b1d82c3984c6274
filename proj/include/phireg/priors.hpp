#pragma once

// Binary transformations, the psi^k prior family and its mixture prior.

#include <cstddef>
#include <iterator>
#include <vector>

#include "phireg/simplex.hpp"

namespace phireg {

/// A map [d] -> [d], i.e. a binary row-stochastic matrix with phi(i, map[i]) = 1.
/// Indices are 0-based.
class BinaryTransform {
 public:
  BinaryTransform() = default;
  explicit BinaryTransform(std::vector<std::size_t> map);

  static BinaryTransform identity(std::size_t d);
  /// Every expert to `target` (the external-regret comparator 1 e_target^T).
  static BinaryTransform constant(std::size_t d, std::size_t target);
  /// Identity with expert `from` rerouted to `to`.
  static BinaryTransform internal(std::size_t d, std::size_t from, std::size_t to);

  std::size_t size() const noexcept { return map_.size(); }
  std::size_t operator[](std::size_t i) const { return map_[i]; }
  const std::vector<std::size_t>& map() const noexcept { return map_; }

  Matrix to_matrix() const;

  friend bool operator==(const BinaryTransform&, const BinaryTransform&) = default;

 private:
  friend class BinaryTransformRange;
  std::vector<std::size_t> map_;
};

struct ComplexityReport {
  std::size_t d_self = 0;  ///< experts mapped to themselves
  std::size_t d_unif = 0;  ///< largest number of experts sharing one image
  std::size_t c = 0;       ///< min(d - d_self, d - d_unif + 1)
};

ComplexityReport complexity(const BinaryTransform& phi);

/// The d+1 matrices psi^1..psi^{d+1} and the mixture weights
/// [1/(2d)] * d followed by 1/2.
///
/// psi^k (k < d, 0-based) sends every expert to k with probability 1 - 1/d and
/// spreads the rest uniformly; psi^d does the same towards the expert itself.
class PriorFamily {
 public:
  explicit PriorFamily(std::size_t d);

  std::size_t dim() const noexcept { return d_; }
  std::size_t count() const noexcept { return psi_.size(); }
  const StochasticMatrix& psi(std::size_t k) const { return psi_.at(k); }
  double weight(std::size_t k) const { return weights_.at(k); }
  const Vec& weights() const noexcept { return weights_; }

  /// Closed-form entry of psi^k without touching the stored matrices.
  double psi_entry(std::size_t k, std::size_t i, std::size_t j) const;

  /// E_{phi ~ pi}[phi] = sum_k weight_k psi^k.
  Matrix marginal() const;

 private:
  std::size_t d_;
  std::vector<StochasticMatrix> psi_;
  Vec weights_;
};

inline PriorFamily make_prior_family(std::size_t d) { return PriorFamily(d); }

/// prod_i psi(i, phi(i)).
double induced_mass(const Matrix& psi, const BinaryTransform& phi);
/// sum_i log psi(i, phi(i)); safe for large d.
double induced_log_mass(const Matrix& psi, const BinaryTransform& phi);

/// Mixture prior pi(phi).
double prior_mass(const PriorFamily& family, const BinaryTransform& phi);
/// log pi(phi) via log-sum-exp over the mixture; safe for large d.
double prior_log_mass(const PriorFamily& family, const BinaryTransform& phi);

/// Largest d accepted by enumerate_binary (7^7 ~ 8.2e5 transforms).
inline constexpr std::size_t kMaxEnumerationDim = 7;

/// All d^d transforms in lexicographic order (map[0] most significant).
class BinaryTransformRange {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = BinaryTransform;
    using difference_type = std::ptrdiff_t;
    using pointer = const BinaryTransform*;
    using reference = const BinaryTransform&;

    iterator() = default;
    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++();
    void operator++(int) { ++*this; }
    friend bool operator==(const iterator& a, const iterator& b) { return a.done_ == b.done_; }

   private:
    friend class BinaryTransformRange;
    explicit iterator(std::size_t d);
    BinaryTransform current_;
    bool done_ = true;
  };

  explicit BinaryTransformRange(std::size_t d);
  iterator begin() const { return iterator(d_); }
  iterator end() const { return iterator(); }
  std::size_t count() const noexcept { return count_; }

 private:
  std::size_t d_;
  std::size_t count_;
};

/// Throws std::invalid_argument for d = 0 or d > kMaxEnumerationDim.
inline BinaryTransformRange enumerate_binary(std::size_t d) { return BinaryTransformRange(d); }

}  // namespace phireg
