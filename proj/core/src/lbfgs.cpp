#include "wph/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>

#include "wph/error.hpp"

namespace wph {

const char* to_string(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::gtol: return "gradient tolerance";
    case LbfgsStatus::f_target: return "target loss reached";
    case LbfgsStatus::max_iter: return "iteration cap";
    case LbfgsStatus::line_search_failure: return "line search failure";
    case LbfgsStatus::non_finite: return "non-finite objective";
  }
  return "?";
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const std::vector<double>& a) {
  double m = 0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct Probe {
  double alpha;
  double f;
  double dphi;
  std::vector<double> g;
};

class LineSearch {
 public:
  LineSearch(const ObjectiveFn& fn, const std::vector<double>& x, const std::vector<double>& d,
             double f0, double dphi0, const LbfgsOptions& opt, int& evals)
      : fn_(fn), x_(x), d_(d), f0_(f0), dphi0_(dphi0), opt_(opt), evals_(evals) {}

  Probe eval(double alpha) {
    std::vector<double> xt(x_.size());
    for (std::size_t i = 0; i < xt.size(); ++i) xt[i] = x_[i] + alpha * d_[i];
    Probe p{alpha, 0, 0, std::vector<double>(x_.size())};
    p.f = fn_(xt, p.g);
    ++evals_;
    p.dphi = std::isfinite(p.f) ? dot(p.g, d_) : 0.0;
    if (std::isfinite(p.f) && armijo(p) && (!best_ || p.f < best_->f)) best_ = p;
    return p;
  }

  bool armijo(const Probe& p) const { return p.f <= f0_ + opt_.c1 * p.alpha * dphi0_; }
  bool curvature(const Probe& p) const { return std::abs(p.dphi) <= -opt_.c2 * dphi0_; }

  // Strong Wolfe search; returns false when no step satisfies both conditions.
  bool search(double alpha0, Probe& out) {
    Probe prev{0.0, f0_, dphi0_, {}};
    double alpha = alpha0;
    for (int i = 0; i < opt_.max_line_search; ++i) {
      Probe p = eval(alpha);
      if (!std::isfinite(p.f) || !armijo(p) || (i > 0 && p.f >= prev.f))
        return zoom(prev, p, out);
      if (curvature(p)) {
        out = std::move(p);
        return true;
      }
      if (p.dphi >= 0) return zoom(p, prev, out);
      prev = std::move(p);
      alpha *= 2.0;
    }
    return false;
  }

  const std::optional<Probe>& best() const { return best_; }

 private:
  bool zoom(Probe lo, Probe hi, Probe& out) {
    for (int i = 0; i < opt_.max_line_search; ++i) {
      double a = lo.alpha, b = hi.alpha;
      double width = std::abs(b - a);
      if (width < 1e-16 * std::max(1.0, std::abs(a))) return false;
      double t = 0.5 * (a + b);
      if (std::isfinite(hi.f) && !hi.g.empty()) {
        // Cubic interpolation of (alpha, f, dphi) at both ends.
        double d1 = lo.dphi + hi.dphi - 3.0 * (lo.f - hi.f) / (a - b);
        double disc = d1 * d1 - lo.dphi * hi.dphi;
        if (disc >= 0) {
          double d2 = std::copysign(std::sqrt(disc), b - a);
          double c = b - (b - a) * (hi.dphi + d2 - d1) / (hi.dphi - lo.dphi + 2.0 * d2);
          if (std::isfinite(c)) t = c;
        }
      }
      double lo_b = std::min(a, b) + 0.1 * width, hi_b = std::max(a, b) - 0.1 * width;
      t = std::clamp(t, lo_b, hi_b);
      Probe p = eval(t);
      if (!std::isfinite(p.f) || !armijo(p) || p.f >= lo.f) {
        hi = std::move(p);
      } else {
        if (curvature(p)) {
          out = std::move(p);
          return true;
        }
        if (p.dphi * (hi.alpha - lo.alpha) >= 0) hi = lo;
        lo = std::move(p);
      }
    }
    return false;
  }

  const ObjectiveFn& fn_;
  const std::vector<double>& x_;
  const std::vector<double>& d_;
  double f0_, dphi0_;
  const LbfgsOptions& opt_;
  int& evals_;
  std::optional<Probe> best_;
};

}  // namespace

LbfgsResult lbfgs_minimize(const ObjectiveFn& fn, std::vector<double> x0, const LbfgsOptions& opt,
                           const IterationHook& hook) {
  if (opt.memory < 1) throw ConfigError("lbfgs: memory must be >= 1");
  if (!(0 < opt.c1 && opt.c1 < opt.c2 && opt.c2 < 1)) throw ConfigError("lbfgs: need 0 < c1 < c2 < 1");
  LbfgsResult res;
  res.x = std::move(x0);
  const std::size_t n = res.x.size();
  std::vector<double> g(n);
  res.f = fn(res.x, g);
  res.evaluations = 1;
  res.losses.push_back(res.f);
  if (!std::isfinite(res.f)) {
    res.status = LbfgsStatus::non_finite;
    return res;
  }
  std::deque<std::vector<double>> S, Y;
  std::deque<double> rho;
  std::vector<double> d(n), q(n);
  std::vector<double> alpha_buf;

  for (int it = 1;; ++it) {
    if (res.f <= opt.f_target) {
      res.status = LbfgsStatus::f_target;
      return res;
    }
    if (max_abs(g) <= opt.gtol) {
      res.status = LbfgsStatus::gtol;
      return res;
    }
    if (it > opt.max_iter) {
      res.status = LbfgsStatus::max_iter;
      return res;
    }
    // Two-loop recursion.
    q = g;
    const std::size_t m = S.size();
    alpha_buf.assign(m, 0.0);
    for (std::size_t i = m; i-- > 0;) {
      alpha_buf[i] = rho[i] * dot(S[i], q);
      for (std::size_t t = 0; t < n; ++t) q[t] -= alpha_buf[i] * Y[i][t];
    }
    double gamma = 1.0;
    if (m > 0) {
      double sy = 1.0 / rho[m - 1];
      gamma = opt.gamma_scaling ? sy / dot(Y[m - 1], Y[m - 1]) : 1.0 / sy;
    }
    for (std::size_t t = 0; t < n; ++t) q[t] *= gamma;
    for (std::size_t i = 0; i < m; ++i) {
      double b = rho[i] * dot(Y[i], q);
      for (std::size_t t = 0; t < n; ++t) q[t] += S[i][t] * (alpha_buf[i] - b);
    }
    for (std::size_t t = 0; t < n; ++t) d[t] = -q[t];
    double dphi0 = dot(g, d);
    if (!(dphi0 < 0)) {
      S.clear(), Y.clear(), rho.clear();
      for (std::size_t t = 0; t < n; ++t) d[t] = -g[t];
      dphi0 = dot(g, d);
    }
    double alpha0 = 1.0;
    if (S.empty()) alpha0 = std::min(1.0, 1.0 / std::sqrt(dot(g, g)));

    LineSearch ls(fn, res.x, d, res.f, dphi0, opt, res.evaluations);
    Probe step;
    bool ok = ls.search(alpha0, step);
    if (!ok) {
      if (ls.best()) {
        step = *ls.best();
      } else {
        // Sufficient decrease only, by backtracking.
        double a = alpha0;
        bool found = false;
        for (int i = 0; i < 60 && !found; ++i, a *= 0.5) {
          Probe p = ls.eval(a);
          if (std::isfinite(p.f) && ls.armijo(p)) {
            step = std::move(p);
            found = true;
          }
        }
        if (!found) {
          res.status = LbfgsStatus::line_search_failure;
          return res;
        }
      }
      ++res.armijo_fallbacks;
    }
    std::vector<double> s(n), y(n);
    for (std::size_t t = 0; t < n; ++t) {
      s[t] = step.alpha * d[t];
      y[t] = step.g[t] - g[t];
    }
    double sy = dot(s, y);
    if (sy > 0) {
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > opt.memory) {
        S.pop_front(), Y.pop_front(), rho.pop_front();
      }
      for (std::size_t t = 0; t < n; ++t) res.x[t] += S.back()[t];
    } else {
      for (std::size_t t = 0; t < n; ++t) res.x[t] += step.alpha * d[t];
    }
    res.f = step.f;
    g = std::move(step.g);
    res.iterations = it;
    res.losses.push_back(res.f);
    if (hook) hook(it, res.x, res.f);
  }
}

}  // namespace wph
