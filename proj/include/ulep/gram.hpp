#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "ulep/common.hpp"
#include "ulep/kernels.hpp"

namespace ulep {

/// Gram geometry of a finite kernel family: the quadratic form behind the
/// least-energy rate of a coordinate vector and the unit ball it carves out
/// of the family's coordinate space.
///
/// The form is y^T M^+ y restricted to range(M); coordinates with mass
/// outside the range get rate +infinity (the empty-infimum convention).
class GramEllipsoid {
 public:
  explicit GramEllipsoid(Eigen::MatrixXd m) : M_(std::move(m)) {
    if (M_.rows() != M_.cols() || M_.rows() < 1)
      throw DimensionUnsupported("gram: matrix must be square and nonempty");
    double asym = (M_ - M_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, M_.cwiseAbs().maxCoeff()))
      throw Error("gram: matrix is not symmetric");
    M_ = 0.5 * (M_ + M_.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M_);
    if (es.info() != Eigen::Success) throw Error("gram: eigendecomposition failed");
    V_ = es.eigenvectors();
    lam_ = es.eigenvalues();
    double lam_max = lam_.maxCoeff();
    if (lam_max < 0.0) lam_max = 0.0;
    rank_tol_ = 1e-10 * std::max(lam_max, 0.0);
    rank_ = 0;
    for (int i = 0; i < lam_.size(); ++i) {
      if (lam_[i] < 0.0) lam_[i] = 0.0;  // clamp quadrature noise
      if (lam_[i] > rank_tol_) ++rank_;
    }
  }

  // Closed-form Gram of the upper-box indicator family 1_{[s_i, 1]}:
  // M_ij = prod_k (1 - max(s_ik, s_jk)).
  static GramEllipsoid closed_form_indicator(const std::vector<std::vector<double>>& s_grid) {
    int p = static_cast<int>(s_grid.size());
    if (p < 1) throw ConfigInvalid("gram: empty anchor grid");
    std::size_t d = s_grid.front().size();
    Eigen::MatrixXd m(p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j <= i; ++j) {
        if (s_grid[i].size() != d || s_grid[j].size() != d)
          throw DimensionUnsupported("gram: ragged anchor grid");
        double v = 1.0;
        for (std::size_t k = 0; k < d; ++k) v *= 1.0 - std::max(s_grid[i][k], s_grid[j][k]);
        m(i, j) = m(j, i) = v;
      }
    return GramEllipsoid(std::move(m));
  }

  int p() const { return static_cast<int>(M_.rows()); }
  int rank() const { return rank_; }
  const Eigen::MatrixXd& matrix() const { return M_; }

  /// Least-energy rate of y: y^T M^+ y, or +infinity when y leaves range(M)
  /// by more than 1e-8 relative.
  double rate(const Eigen::VectorXd& y) const {
    if (y.size() != M_.rows()) throw DimensionUnsupported("rate: coordinate size mismatch");
    Eigen::VectorXd c = V_.transpose() * y;
    double value = 0.0, perp_sq = 0.0;
    for (int i = 0; i < c.size(); ++i) {
      if (lam_[i] > rank_tol_)
        value += c[i] * c[i] / lam_[i];
      else
        perp_sq += c[i] * c[i];
    }
    double ynorm = y.norm();
    if (std::sqrt(perp_sq) > 1e-8 * ynorm) return std::numeric_limits<double>::infinity();
    return value;
  }

  bool contains(const Eigen::VectorXd& y) const { return rate(y) <= 1.0 + 1e-10; }

  /// Boundary point of the ball in a given dual direction:
  /// y = M_r d / sqrt(d^T M_r d) with the rank-truncated reconstruction M_r,
  /// so the rate of the result is 1 to working precision.
  Eigen::VectorXd extreme_point(const Eigen::VectorXd& direction) const {
    if (direction.size() != M_.rows())
      throw DimensionUnsupported("extreme_point: direction size mismatch");
    Eigen::VectorXd c = V_.transpose() * direction;
    double s = 0.0;
    for (int i = 0; i < c.size(); ++i)
      if (lam_[i] > rank_tol_) s += lam_[i] * c[i] * c[i];
    double scale = std::max(1.0, lam_.maxCoeff()) * std::max(1.0, direction.squaredNorm());
    if (!(s > 1e-18 * scale))
      throw NullDirection("extreme_point: direction annihilated by the Gram form");
    Eigen::VectorXd y = Eigen::VectorXd::Zero(M_.rows());
    for (int i = 0; i < c.size(); ++i)
      if (lam_[i] > rank_tol_) y += (lam_[i] * c[i]) * V_.col(i);
    return y / std::sqrt(s);
  }

  /// Smallest sup-norm distance from y to the ball {rate <= 1}.
  ///
  /// Bisection on the radius t; each feasibility probe asks whether the box
  /// {u : |u - y|_inf <= t} meets the ball, decided by a projected-gradient
  /// minimization (full rank: the inverse form over the box; deficient rank:
  /// a range-parametrized squared-excess over the unit ball).
  double sup_distance(const Eigen::VectorXd& y) const {
    if (y.size() != M_.rows()) throw DimensionUnsupported("sup_distance: size mismatch");
    if (rank_ == 0) return y.cwiseAbs().maxCoeff();  // ball degenerates to {0}
    if (contains(y)) return 0.0;
    auto v = sup_distance_above(y, 0.0);
    return v ? *v : 0.0;
  }

  /// The distance when it exceeds `floor`; nullopt when it is at most
  /// `floor`, resolved by a single feasibility probe. Running-maximum sweeps
  /// over many coordinate vectors use this to skip full bisections.
  std::optional<double> sup_distance_above(const Eigen::VectorXd& y, double floor) const {
    if (y.size() != M_.rows()) throw DimensionUnsupported("sup_distance: size mismatch");
    if (rank_ == 0) {
      double v = y.cwiseAbs().maxCoeff();
      return v > floor ? std::optional<double>(v) : std::nullopt;
    }
    double j = rate(y);
    if (j <= 1.0 + 1e-10) return floor < 0.0 ? std::optional<double>(0.0) : std::nullopt;
    double norm_inf = y.cwiseAbs().maxCoeff();
    // The radial projection y / sqrt(j) lies in the ball, so the distance is
    // at most the sup-norm gap to it; that tightens the bisection bracket.
    double t_hi = std::isfinite(j) ? norm_inf * (1.0 - 1.0 / std::sqrt(j)) : norm_inf;
    if (!(t_hi > floor)) return std::nullopt;
    double t_lo = std::max(floor, 0.0);
    if (t_lo > 0.0 && probe(y, t_lo)) return std::nullopt;
    const double kWidth = 1e-7;
    while (t_hi - t_lo > kWidth) {
      double t = 0.5 * (t_lo + t_hi);
      (probe(y, t) ? t_hi : t_lo) = t;
    }
    return 0.5 * (t_lo + t_hi);
  }

 private:
  static constexpr int kIterCap = 100000;

  bool probe(const Eigen::VectorXd& y, double t) const {
    return rank_ == p() ? feasible_full_rank(y, t) : feasible_deficient(y, t);
  }

  bool feasible_full_rank(const Eigen::VectorXd& y, double t) const {
    int n = p();
    Eigen::VectorXd inv_lam(n);
    double lam_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      inv_lam[i] = 1.0 / lam_[i];
      lam_min = std::min(lam_min, lam_[i]);
    }
    auto clamp_box = [&](Eigen::VectorXd& u) {
      for (int i = 0; i < n; ++i) u[i] = std::clamp(u[i], y[i] - t, y[i] + t);
    };
    auto form = [&](const Eigen::VectorXd& u) {
      Eigen::VectorXd c = V_.transpose() * u;
      return (c.array().square() * inv_lam.array()).sum();
    };

    double j_y = rate(y);
    Eigen::VectorXd u = std::isfinite(j_y) && j_y > 1.0 ? (y / std::sqrt(j_y)).eval() : y;
    clamp_box(u);
    double step = 0.5 * lam_min;  // 1/L with L = 2 * lambda_max(M^{-1})
    double q = form(u);
    for (int it = 0; it < kIterCap; ++it) {
      if (q <= 1.0 + 1e-9) return true;
      Eigen::VectorXd grad = 2.0 * (V_ * (inv_lam.array() * (V_.transpose() * u).array()).matrix());
      Eigen::VectorXd next = u - step * grad;
      clamp_box(next);
      double moved = (next - u).cwiseAbs().maxCoeff();
      u = next;
      q = form(u);
      if (moved <= 1e-14 * std::max(1.0, u.cwiseAbs().maxCoeff())) break;
    }
    return q <= 1.0 + 1e-9;
  }

  // Range-parametrized probe: members are A x with A = V_r Lambda_r^{1/2},
  // |x|_2 <= 1. The box meets the ball iff the squared sup-excess
  // F(x) = sum_i ((|A x - y|_i - t)_+)^2 can be driven to zero.
  bool feasible_deficient(const Eigen::VectorXd& y, double t) const {
    int n = p();
    Eigen::MatrixXd A(n, rank_);
    int col = 0;
    double lam_max = 0.0;
    for (int i = 0; i < n; ++i) lam_max = std::max(lam_max, lam_[i]);
    for (int i = 0; i < n; ++i)
      if (lam_[i] > rank_tol_) A.col(col++) = std::sqrt(lam_[i]) * V_.col(i);

    auto excess = [&](const Eigen::VectorXd& e, Eigen::VectorXd& sig) {
      double f = 0.0;
      for (int i = 0; i < n; ++i) {
        double over = std::abs(e[i]) - t;
        if (over > 0.0) {
          f += over * over;
          sig[i] = 2.0 * over * (e[i] > 0.0 ? 1.0 : -1.0);
        } else {
          sig[i] = 0.0;
        }
      }
      return f;
    };

    const double f_tol = 1e-14 * std::max(1.0, y.squaredNorm());
    Eigen::VectorXd x = A.transpose() * y;
    if (x.norm() > 1.0) x /= x.norm();
    double step = 0.5 / std::max(lam_max, 1e-300);
    Eigen::VectorXd sig(n);
    double f = excess(A * x - y, sig);
    for (int it = 0; it < kIterCap; ++it) {
      if (f <= f_tol) return true;
      Eigen::VectorXd grad = A.transpose() * sig;
      Eigen::VectorXd next = x - step * grad;
      double nn = next.norm();
      if (nn > 1.0) next /= nn;
      double moved = (next - x).cwiseAbs().maxCoeff();
      x = next;
      f = excess(A * x - y, sig);
      if (moved <= 1e-15) break;
    }
    return f <= f_tol;
  }

  Eigen::MatrixXd M_;
  Eigen::MatrixXd V_;
  Eigen::VectorXd lam_;
  double rank_tol_ = 0.0;
  int rank_ = 0;
};

/// Gram matrix by the family's integration recipe (upper-box indicator
/// families short-circuit to the closed form).
inline GramEllipsoid gram(const KernelFamily& family) {
  if (auto anchors = family.indicator_anchors())
    return GramEllipsoid::closed_form_indicator(*anchors);
  int n = family.size();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = inner_product(family.at(i), family.at(j));
  return GramEllipsoid(std::move(m));
}

/// Quadrature route regardless of family structure (used to cross-check the
/// closed form).
inline GramEllipsoid gram_quadrature(const KernelFamily& family) {
  int n = family.size();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = inner_product(family.at(i), family.at(j));
  return GramEllipsoid(std::move(m));
}

/// Sup-norm gap between an increment functional sampled on an anchor grid
/// and the limit set carved out by that grid's indicator family: zero iff
/// the sampled shape is attainable at unit energy.
inline double strassen_distance(const std::vector<std::vector<double>>& s_grid,
                                const Eigen::VectorXd& values) {
  GramEllipsoid e = GramEllipsoid::closed_form_indicator(s_grid);
  if (values.size() != e.p()) throw DimensionUnsupported("strassen_distance: size mismatch");
  return e.sup_distance(values);
}

inline double strassen_distance(const std::vector<double>& s_grid_1d,
                                const Eigen::VectorXd& values) {
  std::vector<std::vector<double>> grid;
  grid.reserve(s_grid_1d.size());
  for (double s : s_grid_1d) grid.push_back({s});
  return strassen_distance(grid, values);
}

}  // namespace ulep
