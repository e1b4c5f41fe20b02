#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace aglab {

using cd = std::complex<double>;

namespace tol {
// Centralized tolerance constants. Pure index algebra is held to kAlgebra
// (relative); anything that passes through a finite-difference stencil is
// held to kFd.
inline constexpr double kAlgebra = 1e-12;
inline constexpr double kFd = 1e-6;
}  // namespace tol

enum class Family : uint8_t { Unprimed, Primed };
enum class Pos : uint8_t { Upper, Lower };

struct Slot {
  Family family;
  Pos pos;
  int dim;
  bool operator==(const Slot&) const = default;
};

/// Ordered slot list plus the conformal-weight integer carried by a tensor.
/// All unprimed slots share one dimension, all primed slots another; this is
/// checked on construction.
struct IndexSignature {
  std::vector<Slot> slots;
  int weight = 0;

  IndexSignature() = default;
  IndexSignature(std::vector<Slot> s, int w = 0);

  int rank() const { return static_cast<int>(slots.size()); }
  long size() const;
  std::string key() const;  // cache key; encodes slots and weight
  bool operator==(const IndexSignature&) const = default;
};

struct SignatureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dense multi-index array over complex scalars with an IndexSignature.
/// Row-major storage, slot 0 slowest.
class SpinorTensor {
 public:
  SpinorTensor() = default;
  explicit SpinorTensor(IndexSignature sig);

  static SpinorTensor zeros(IndexSignature sig) { return SpinorTensor(std::move(sig)); }
  /// delta_L{}^U for the given family: slot 0 lower, slot 1 upper.
  static SpinorTensor delta(Family fam, int dim);
  static SpinorTensor random(IndexSignature sig, std::function<double()> draw);

  const IndexSignature& sig() const { return sig_; }
  int rank() const { return sig_.rank(); }
  long size() const { return static_cast<long>(v_.size()); }
  int dim(int slot) const { return sig_.slots[slot].dim; }
  int weight() const { return sig_.weight; }
  void set_weight(int w) { sig_.weight = w; }

  cd& operator[](long i) { return v_[i]; }
  cd operator[](long i) const { return v_[i]; }
  cd& at(std::span<const int> idx) { return v_[flat(idx)]; }
  cd at(std::span<const int> idx) const { return v_[flat(idx)]; }
  cd& at(std::initializer_list<int> idx) { return v_[flat(std::span<const int>(idx.begin(), idx.size()))]; }
  cd at(std::initializer_list<int> idx) const { return v_[flat(std::span<const int>(idx.begin(), idx.size()))]; }

  long flat(std::span<const int> idx) const;
  void unflat(long f, std::span<int> idx) const;

  SpinorTensor permuted(const std::vector<int>& perm) const;  // new[i...] = old[i?perm]
  SpinorTensor symmetrized(const std::vector<int>& slots) const;
  SpinorTensor antisymmetrized(const std::vector<int>& slots) const;
  /// (Anti)symmetrization under simultaneous exchange of two slot groups,
  /// e.g. the tensor-index pair swap (AA') <-> (BB').
  SpinorTensor pair_symmetrized(const std::vector<int>& a, const std::vector<int>& b, int sign) const;
  SpinorTensor traced(int upper, int lower) const;
  SpinorTensor outer(const SpinorTensor& o) const;
  /// new[..., i, ...] = sum_j M(i, j) old[..., j, ...] on the given slot.
  SpinorTensor apply_matrix(int slot, const Eigen::MatrixXcd& m) const;

  SpinorTensor& operator+=(const SpinorTensor& o);
  SpinorTensor& operator-=(const SpinorTensor& o);
  SpinorTensor& operator*=(cd s);
  friend SpinorTensor operator+(SpinorTensor a, const SpinorTensor& b) { return a += b; }
  friend SpinorTensor operator-(SpinorTensor a, const SpinorTensor& b) { return a -= b; }
  friend SpinorTensor operator*(cd s, SpinorTensor a) { return a *= s; }
  friend SpinorTensor operator*(SpinorTensor a, cd s) { return a *= s; }

  double sup_norm() const;
  double frob_norm() const;
  double max_imag() const;
  bool is_real(double eps = tol::kAlgebra) const;

  /// Orthogonal projection off the span of all delta-terms; afterwards every
  /// upper/lower contraction within a family vanishes. The delta-coefficient
  /// least-squares system is cached per signature.
  SpinorTensor trace_free_part() const;
  SpinorTensor pure_trace_part() const;

  Eigen::VectorXcd vec() const;
  void set_vec(const Eigen::VectorXcd& v);

 private:
  IndexSignature sig_;
  std::vector<cd> v_;
  std::vector<long> strides_;
  void init_strides();
};

/// Splits a torsion-shaped tensor T_{AA'BB'}{}^{CC'} (slots in the order
/// A A' B B' C C', antisymmetric under the pair swap) into its two symmetry
/// types: f = sym(AB) antisym(A'B') part, f_tilde = antisym(AB) sym(A'B').
struct TorsionParts {
  SpinorTensor f;
  SpinorTensor f_tilde;
};
TorsionParts wedge_decompose_torsion(const SpinorTensor& t, double pre_eps = tol::kAlgebra);

/// Relative comparison helper used throughout the tests.
double rel_diff(const SpinorTensor& a, const SpinorTensor& b);

}  // namespace aglab
