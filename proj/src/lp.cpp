#include "lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lagot::detail {
namespace {

constexpr double kPivotTol = 1e-11;
constexpr std::size_t kRefactorEvery = 64;
constexpr int kDegenerateBeforeBland = 50;

class RevisedSimplex {
 public:
  RevisedSimplex(int rows, const std::vector<LpColumn>& columns, std::vector<double> rhs)
      : m_(static_cast<std::size_t>(rows)), n_(columns.size()), cols_(columns),
        sign_(m_, 1.0), b_(std::move(rhs)) {
    for (std::size_t r = 0; r < m_; ++r)
      if (b_[r] < 0) {
        sign_[r] = -1.0;
        b_[r] = -b_[r];
      }
    basis_.resize(m_);
    is_basic_.assign(n_ + m_, false);
    for (std::size_t r = 0; r < m_; ++r) {
      basis_[r] = n_ + r;
      is_basic_[n_ + r] = true;
    }
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) binv_[r * m_ + r] = 1.0;
    xb_ = b_;
  }

  LpResult run(std::size_t max_iterations) {
    LpResult res;
    const LpStatus p1 = iterate(1, max_iterations);
    res.iterations = iterations_;
    if (p1 != LpStatus::kOptimal) {
      res.status = p1;
      return res;
    }
    double infeas = 0.0, bmax = 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] >= n_) infeas += xb_[r];
      bmax = std::max(bmax, b_[r]);
    }
    if (infeas > 1e-9 * (1.0 + bmax)) {
      res.status = LpStatus::kInfeasible;
      return res;
    }
    res.status = iterate(2, max_iterations);
    res.iterations = iterations_;
    res.x.assign(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r)
      if (basis_[r] < n_) res.x[basis_[r]] = std::max(0.0, xb_[r]);
    for (std::size_t j = 0; j < n_; ++j) res.objective += cols_[j].cost * res.x[j];
    return res;
  }

 private:
  double cost(std::size_t var, int phase) const {
    if (var >= n_) return phase == 1 ? 1.0 : 0.0;
    return phase == 1 ? 0.0 : cols_[var].cost;
  }

  // d = B^-1 a_var
  void ftran(std::size_t var, std::vector<double>& d) const {
    d.assign(m_, 0.0);
    if (var >= n_) {
      const std::size_t k = var - n_;
      for (std::size_t r = 0; r < m_; ++r) d[r] = binv_[r * m_ + k];
      return;
    }
    for (const auto& [row, a] : cols_[var].entries) {
      const auto k = static_cast<std::size_t>(row);
      const double v = a * sign_[k];
      for (std::size_t r = 0; r < m_; ++r) d[r] += binv_[r * m_ + k] * v;
    }
  }

  void refactor() {
    std::vector<double> bmat(m_ * m_, 0.0);
    std::vector<double> d;
    for (std::size_t c = 0; c < m_; ++c) {
      const std::size_t var = basis_[c];
      if (var >= n_) {
        bmat[(var - n_) * m_ + c] = 1.0;
      } else {
        for (const auto& [row, a] : cols_[var].entries)
          bmat[static_cast<std::size_t>(row) * m_ + c] += a * sign_[static_cast<std::size_t>(row)];
      }
    }
    // Gauss-Jordan with partial pivoting on [B | I].
    std::vector<double> inv(m_ * m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) inv[r * m_ + r] = 1.0;
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < m_; ++r)
        if (std::abs(bmat[r * m_ + c]) > std::abs(bmat[piv * m_ + c])) piv = r;
      if (std::abs(bmat[piv * m_ + c]) < 1e-14) return;  // keep the eta form
      if (piv != c)
        for (std::size_t k = 0; k < m_; ++k) {
          std::swap(bmat[c * m_ + k], bmat[piv * m_ + k]);
          std::swap(inv[c * m_ + k], inv[piv * m_ + k]);
        }
      const double p = bmat[c * m_ + c];
      for (std::size_t k = 0; k < m_; ++k) {
        bmat[c * m_ + k] /= p;
        inv[c * m_ + k] /= p;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = bmat[r * m_ + c];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < m_; ++k) {
          bmat[r * m_ + k] -= f * bmat[c * m_ + k];
          inv[r * m_ + k] -= f * inv[c * m_ + k];
        }
      }
    }
    binv_ = std::move(inv);
    for (std::size_t r = 0; r < m_; ++r) {
      double s = 0.0;
      for (std::size_t k = 0; k < m_; ++k) s += binv_[r * m_ + k] * b_[k];
      xb_[r] = std::abs(s) < 1e-13 ? 0.0 : s;
    }
  }

  LpStatus iterate(int phase, std::size_t max_iterations) {
    double cmax = 0.0;
    for (std::size_t j = 0; j < n_; ++j) cmax = std::max(cmax, std::abs(cost(j, phase)));
    const double rc_tol = 1e-11 * (1.0 + cmax);
    std::vector<double> y(m_), d;
    int degenerate = 0;
    std::size_t since_refactor = 0;
    for (;;) {
      if (max_iterations && iterations_ >= max_iterations) return LpStatus::kIterationLimit;
      if (++since_refactor >= kRefactorEvery) {
        refactor();
        since_refactor = 0;
      }
      for (std::size_t k = 0; k < m_; ++k) {
        double s = 0.0;
        for (std::size_t r = 0; r < m_; ++r) s += cost(basis_[r], phase) * binv_[r * m_ + k];
        y[k] = s;
      }
      const bool bland = degenerate > kDegenerateBeforeBland;
      std::size_t enter = n_;
      double best = -rc_tol;
      for (std::size_t j = 0; j < n_; ++j) {
        if (is_basic_[j]) continue;
        double rc = cost(j, phase);
        for (const auto& [row, a] : cols_[j].entries)
          rc -= y[static_cast<std::size_t>(row)] * a * sign_[static_cast<std::size_t>(row)];
        if (rc < best) {
          enter = j;
          if (bland) break;
          best = rc;
        }
      }
      if (enter == n_) return LpStatus::kOptimal;

      ftran(enter, d);
      std::size_t leave = m_;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        double q;
        if (phase == 2 && basis_[r] >= n_ && std::abs(d[r]) > kPivotTol) {
          q = 0.0;  // artificial pinned at zero
        } else if (d[r] > kPivotTol) {
          q = std::max(0.0, xb_[r]) / d[r];
        } else {
          continue;
        }
        if (leave == m_ || q < ratio - 1e-12 * (1.0 + ratio)) {
          ratio = q;
          leave = r;
        } else if (q <= ratio + 1e-12 * (1.0 + ratio) && basis_[r] < basis_[leave]) {
          ratio = std::min(ratio, q);
          leave = r;
        }
      }
      if (leave == m_) return LpStatus::kUnbounded;

      const double theta = ratio;
      for (std::size_t r = 0; r < m_; ++r) xb_[r] -= theta * d[r];
      xb_[leave] = theta;
      const double piv = d[leave];
      for (std::size_t k = 0; k < m_; ++k) binv_[leave * m_ + k] /= piv;
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == leave || d[r] == 0.0) continue;
        const double f = d[r];
        for (std::size_t k = 0; k < m_; ++k) binv_[r * m_ + k] -= f * binv_[leave * m_ + k];
      }
      is_basic_[basis_[leave]] = false;
      is_basic_[enter] = true;
      basis_[leave] = enter;
      degenerate = theta <= 1e-14 ? degenerate + 1 : 0;
      ++iterations_;
    }
  }

  std::size_t m_, n_;
  const std::vector<LpColumn>& cols_;
  std::vector<double> sign_;
  std::vector<double> b_;
  std::vector<std::size_t> basis_;
  std::vector<bool> is_basic_;
  std::vector<double> binv_;
  std::vector<double> xb_;
  std::size_t iterations_ = 0;
};

}  // namespace

LpResult solve_lp(int rows, const std::vector<LpColumn>& columns, std::vector<double> rhs,
                  std::size_t max_iterations) {
  RevisedSimplex s(rows, columns, std::move(rhs));
  return s.run(max_iterations);
}

}  // namespace lagot::detail
