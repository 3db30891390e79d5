#pragma once

#include "ldp/types.hpp"

#include <string>

namespace ldp {

/// Which V-norm the space carries. `h` means V = H (the norm coincides with
/// the H-norm). `w1p` is the discrete Sobolev norm on a periodic uniform grid,
/// (sum_i h |v_i|^p + sum_i h |(v_{i+1}-v_i)/h|^p)^(1/p).
enum class VNormKind { h, w1p };

/// Finite-dimensional slice of a Gelfand triple V in H in V*. Elements are
/// coordinate vectors in a fixed basis; the H geometry is a gram matrix
/// (identity for an orthonormal basis, h*I for a uniform grid of spacing h).
/// Dual elements are represented through the H-pairing, so embedding H into
/// V* is the identity on coordinates.
class GalerkinSpace {
 public:
  /// Orthonormal-basis space (gram = identity), V = H, alpha = 2.
  static GalerkinSpace euclidean(Index dim);

  /// Periodic uniform grid on [0, length) with n points, gram = (length/n)*I,
  /// V-norm = w1p with the given exponent p, alpha = p.
  static GalerkinSpace periodic_grid(Index n, double length, double p);

  /// General constructor: symmetric positive-definite gram.
  GalerkinSpace(Matrix gram, VNormKind v_norm, double p, double alpha,
                double grid_length);

  [[nodiscard]] Index dim() const { return dim_; }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] VNormKind v_norm_kind() const { return v_norm_; }
  [[nodiscard]] bool identity_gram() const { return identity_gram_; }
  [[nodiscard]] const Matrix& gram() const { return gram_; }

  /// Grid spacing h for grid spaces; 1 for euclidean spaces.
  [[nodiscard]] double spacing() const { return spacing_; }
  [[nodiscard]] double grid_length() const { return grid_length_; }

  /// Recorded constant c > 0 with v_norm(v) >= c * h_norm(v) for all v
  /// (continuous embedding V into H, exact on this discretization).
  [[nodiscard]] double embedding_constant() const { return embed_c_; }

  [[nodiscard]] double h_inner(const Vector& u, const Vector& v) const;
  [[nodiscard]] double h_norm(const Vector& v) const;
  [[nodiscard]] double v_norm(const Vector& v) const;

 private:
  Index dim_;
  Matrix gram_;
  bool identity_gram_;
  VNormKind v_norm_;
  double p_;
  double alpha_;
  double spacing_;
  double grid_length_;
  double embed_c_;
};

/// Element of V* in pairing coordinates: dual_pairing(w, v) = <w.coords, v>_H.
struct DualVector {
  Vector coords;
};

[[nodiscard]] double h_inner(const GalerkinSpace& sp, const Vector& u,
                             const Vector& v);

/// <w, v> between V* and V; equals h_inner(w.coords, v).
[[nodiscard]] double dual_pairing(const GalerkinSpace& sp, const DualVector& w,
                                  const Vector& v);

/// H into V* embedding; pairing of embed(u) against v is exactly <u, v>_H.
[[nodiscard]] DualVector embed(const Vector& u);

/// Galerkin projection onto span{e_1..e_m}: the unique p in the span with
/// <p, v>_H = dual_pairing(w, v) for every v in the span. With an identity
/// gram this is coordinate truncation; otherwise it solves the leading m x m
/// gram system. Returns full-length coordinates (zeros past m).
[[nodiscard]] Vector project(const GalerkinSpace& sp, const DualVector& w,
                             Index m);

}  // namespace ldp
