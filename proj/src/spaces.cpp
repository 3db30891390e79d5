#include "ldp/spaces.hpp"

#include <cmath>
#include <stdexcept>

namespace ldp {

namespace {

bool is_identity(const Matrix& m) {
  return m.isApprox(Matrix::Identity(m.rows(), m.cols()), 1e-14);
}

// Embedding constant for the chosen V-norm. For w1p with p >= 2 it follows
// from Hoelder on the length-L domain; for p < 2 from the unweighted norm
// inequality on n points, which brings in the grid spacing.
double embedding_constant_for(VNormKind kind, double p, double length,
                              double spacing) {
  if (kind == VNormKind::h) return 1.0;
  if (p >= 2.0) return std::pow(length, 1.0 / p - 0.5);
  return std::pow(spacing, 1.0 / p - 0.5);
}

}  // namespace

GalerkinSpace GalerkinSpace::euclidean(Index dim) {
  if (dim < 1) throw std::invalid_argument("GalerkinSpace: dim must be >= 1");
  return GalerkinSpace(Matrix::Identity(dim, dim), VNormKind::h, 2.0, 2.0,
                       1.0);
}

GalerkinSpace GalerkinSpace::periodic_grid(Index n, double length, double p) {
  if (n < 3) throw std::invalid_argument("periodic_grid: need n >= 3");
  if (!(length > 0.0)) throw std::invalid_argument("periodic_grid: length <= 0");
  if (!(p >= 2.0)) throw std::invalid_argument("periodic_grid: need p >= 2");
  const double h = length / static_cast<double>(n);
  return GalerkinSpace(h * Matrix::Identity(n, n), VNormKind::w1p, p, p,
                       length);
}

GalerkinSpace::GalerkinSpace(Matrix gram, VNormKind v_norm, double p,
                             double alpha, double grid_length)
    : dim_(gram.rows()),
      gram_(std::move(gram)),
      identity_gram_(is_identity(gram_)),
      v_norm_(v_norm),
      p_(p),
      alpha_(alpha),
      grid_length_(grid_length) {
  if (gram_.rows() != gram_.cols())
    throw std::invalid_argument("GalerkinSpace: gram must be square");
  if (!gram_.isApprox(gram_.transpose(), 1e-12))
    throw std::invalid_argument("GalerkinSpace: gram must be symmetric");
  spacing_ = v_norm_ == VNormKind::w1p
                 ? grid_length_ / static_cast<double>(dim_)
                 : 1.0;
  embed_c_ = embedding_constant_for(v_norm_, p_, grid_length_, spacing_);
}

double GalerkinSpace::h_inner(const Vector& u, const Vector& v) const {
  if (u.size() != dim_ || v.size() != dim_)
    throw std::invalid_argument("h_inner: dimension mismatch");
  if (identity_gram_) return u.dot(v);
  return u.dot(gram_ * v);
}

double GalerkinSpace::h_norm(const Vector& v) const {
  return std::sqrt(std::max(0.0, h_inner(v, v)));
}

double GalerkinSpace::v_norm(const Vector& v) const {
  if (v.size() != dim_)
    throw std::invalid_argument("v_norm: dimension mismatch");
  if (v_norm_ == VNormKind::h) return h_norm(v);
  const double h = spacing_;
  double sum = 0.0;
  for (Index i = 0; i < dim_; ++i) {
    const Index next = (i + 1 == dim_) ? 0 : i + 1;
    const double grad = (v[next] - v[i]) / h;
    sum += h * (std::pow(std::abs(v[i]), p_) + std::pow(std::abs(grad), p_));
  }
  return std::pow(sum, 1.0 / p_);
}

double h_inner(const GalerkinSpace& sp, const Vector& u, const Vector& v) {
  return sp.h_inner(u, v);
}

double dual_pairing(const GalerkinSpace& sp, const DualVector& w,
                    const Vector& v) {
  return sp.h_inner(w.coords, v);
}

DualVector embed(const Vector& u) { return DualVector{u}; }

Vector project(const GalerkinSpace& sp, const DualVector& w, Index m) {
  if (m < 0 || m > sp.dim())
    throw std::invalid_argument("project: m out of range");
  Vector out = Vector::Zero(sp.dim());
  if (m == 0) return out;
  if (sp.identity_gram()) {
    out.head(m) = w.coords.head(m);
    return out;
  }
  // <p, e_i>_H = <w, e_i> for i < m, p in the span of the leading basis.
  const Matrix g_mm = sp.gram().topLeftCorner(m, m);
  const Vector rhs = (sp.gram() * w.coords).head(m);
  const auto llt = g_mm.llt();
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("project: gram block is not positive definite");
  out.head(m) = llt.solve(rhs);
  return out;
}

}  // namespace ldp
