#include "sten/potential.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace sten {
namespace {

bool all_finite(const double* x, int n) {
  for (int k = 0; k < n; ++k)
    if (!std::isfinite(x[k])) return false;
  return true;
}

struct GinzburgLandauImpl final : detail::PotentialImpl {
  int n;
  explicit GinzburgLandauImpl(int dim) : n(dim) {}
  double w(const double* u) const override {
    double s = -1.0;
    for (int k = 0; k < n; ++k) s += u[k] * u[k];
    return 0.25 * s * s;
  }
  void wu(const double* u, double* out) const override {
    double s = -1.0;
    for (int k = 0; k < n; ++k) s += u[k] * u[k];
    for (int k = 0; k < n; ++k) out[k] = s * u[k];
  }
  void wuu(const double* u, double* out) const override {
    double s = -1.0;
    for (int k = 0; k < n; ++k) s += u[k] * u[k];
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        out[i + n * j] = 2.0 * u[i] * u[j] + (i == j ? s : 0.0);
  }
};

struct DoubleWellImpl final : detail::PotentialImpl {
  int n;
  explicit DoubleWellImpl(int dim) : n(dim) {}
  double w(const double* u) const override {
    const double a = 1.0 - u[0] * u[0];
    double r = 0.25 * a * a;
    for (int k = 1; k < n; ++k) r += 0.5 * u[k] * u[k];
    return r;
  }
  void wu(const double* u, double* out) const override {
    out[0] = (u[0] * u[0] - 1.0) * u[0];
    for (int k = 1; k < n; ++k) out[k] = u[k];
  }
  void wuu(const double* u, double* out) const override {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) out[i + n * j] = 0.0;
    out[0] = 3.0 * u[0] * u[0] - 1.0;
    for (int k = 1; k < n; ++k) out[k + n * k] = 1.0;
  }
};

struct TripleWellImpl final : detail::PotentialImpl {
  double gamma;
  double ax[3], ay[3];  // cube roots of unity
  explicit TripleWellImpl(double deepen) : gamma(deepen) {
    const double s = std::sqrt(3.0) / 2.0;
    ax[0] = 1.0;  ay[0] = 0.0;
    ax[1] = -0.5; ay[1] = s;
    ax[2] = -0.5; ay[2] = -s;
  }
  // W = q1 q2 q3 (1 + gamma q1), q_k = |u - a_k|^2
  double w(const double* u) const override {
    double q[3];
    for (int k = 0; k < 3; ++k) {
      const double dx = u[0] - ax[k], dy = u[1] - ay[k];
      q[k] = dx * dx + dy * dy;
    }
    return q[0] * q[1] * q[2] * (1.0 + gamma * q[0]);
  }
  void wu(const double* u, double* out) const override {
    double q[3], dx[3], dy[3];
    for (int k = 0; k < 3; ++k) {
      dx[k] = u[0] - ax[k];
      dy[k] = u[1] - ay[k];
      q[k] = dx[k] * dx[k] + dy[k] * dy[k];
    }
    const double P = q[0] * q[1] * q[2];
    const double D = 1.0 + gamma * q[0];
    // grad P = 2 sum_k (u - a_k) prod_{l != k} q_l
    const double px = 2.0 * (dx[0] * q[1] * q[2] + q[0] * dx[1] * q[2] + q[0] * q[1] * dx[2]);
    const double py = 2.0 * (dy[0] * q[1] * q[2] + q[0] * dy[1] * q[2] + q[0] * q[1] * dy[2]);
    out[0] = px * D + P * 2.0 * gamma * dx[0];
    out[1] = py * D + P * 2.0 * gamma * dy[0];
  }
  void wuu(const double* u, double* out) const override {
    double q[3], d[3][2];
    for (int k = 0; k < 3; ++k) {
      d[k][0] = u[0] - ax[k];
      d[k][1] = u[1] - ay[k];
      q[k] = d[k][0] * d[k][0] + d[k][1] * d[k][1];
    }
    const double P = q[0] * q[1] * q[2];
    const double D = 1.0 + gamma * q[0];
    double gP[2] = {0, 0}, hP[2][2] = {{0, 0}, {0, 0}};
    for (int k = 0; k < 3; ++k) {
      const double rest = q[(k + 1) % 3] * q[(k + 2) % 3];
      gP[0] += 2.0 * d[k][0] * rest;
      gP[1] += 2.0 * d[k][1] * rest;
      hP[0][0] += 2.0 * rest;
      hP[1][1] += 2.0 * rest;
    }
    for (int k = 0; k < 3; ++k)
      for (int m = 0; m < 3; ++m) {
        if (m == k) continue;
        const int r = 3 - k - m;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) hP[i][j] += 4.0 * d[k][i] * d[m][j] * q[r];
      }
    const double gD[2] = {2.0 * gamma * d[0][0], 2.0 * gamma * d[0][1]};
    for (int i = 0; i < 2; ++i)
      for (int j = i; j < 2; ++j) {
        double h = hP[i][j] * D + gP[i] * gD[j] + gD[i] * gP[j];
        if (i == j) h += P * 2.0 * gamma;
        out[i + 2 * j] = h;
        out[j + 2 * i] = h;  // mirrored, exactly symmetric as built
      }
  }
};

struct ZeroImpl final : detail::PotentialImpl {
  int n;
  explicit ZeroImpl(int dim) : n(dim) {}
  double w(const double*) const override { return 0.0; }
  void wu(const double*, double* out) const override {
    for (int k = 0; k < n; ++k) out[k] = 0.0;
  }
  void wuu(const double*, double* out) const override {
    for (int k = 0; k < n * n; ++k) out[k] = 0.0;
  }
};

struct PolynomialImpl final : detail::PotentialImpl {
  int n;
  std::vector<PolyTerm> terms;
  PolynomialImpl(int dim, std::vector<PolyTerm> t) : n(dim), terms(std::move(t)) {}

  static double ipow(double x, int p) {
    double r = 1.0;
    for (int k = 0; k < p; ++k) r *= x;
    return r;
  }
  double w(const double* u) const override {
    double r = 0.0;
    for (const auto& t : terms) {
      double m = t.coeff;
      for (int k = 0; k < n; ++k) m *= ipow(u[k], t.powers[k]);
      r += m;
    }
    return r;
  }
  void wu(const double* u, double* out) const override {
    for (int i = 0; i < n; ++i) out[i] = 0.0;
    for (const auto& t : terms)
      for (int i = 0; i < n; ++i) {
        if (t.powers[i] == 0) continue;
        double m = t.coeff * t.powers[i] * ipow(u[i], t.powers[i] - 1);
        for (int k = 0; k < n; ++k)
          if (k != i) m *= ipow(u[k], t.powers[k]);
        out[i] += m;
      }
  }
  void wuu(const double* u, double* out) const override {
    for (int k = 0; k < n * n; ++k) out[k] = 0.0;
    for (const auto& t : terms)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          int pi = t.powers[i], pj = t.powers[j];
          double m = t.coeff;
          if (i == j) {
            if (pi < 2) continue;
            m *= pi * (pi - 1) * ipow(u[i], pi - 2);
          } else {
            if (pi == 0 || pj == 0) continue;
            m *= pi * pj * ipow(u[i], pi - 1) * ipow(u[j], pj - 1);
          }
          for (int k = 0; k < n; ++k)
            if (k != i && k != j) m *= ipow(u[k], t.powers[k]);
          out[i + n * j] += m;
          if (i != j) out[j + n * i] = out[i + n * j];
        }
  }
};

void require_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("potential dimension must be 1..3");
}

}  // namespace

Potential::Potential(int dim, std::string name, bool continuum, std::vector<Vec> minima,
                     std::shared_ptr<const detail::PotentialImpl> impl)
    : dim_(dim),
      name_(std::move(name)),
      continuum_minima_(continuum),
      minima_(std::move(minima)),
      impl_(std::move(impl)) {}

double Potential::W(const Vec& u) const {
  if (u.size() != dim_) throw ShapeError("potential argument has wrong dimension");
  if (!all_finite(u.data(), dim_)) throw DomainError("non-finite potential argument");
  return impl_->w(u.data());
}

Vec Potential::Wu(const Vec& u) const {
  if (u.size() != dim_) throw ShapeError("potential argument has wrong dimension");
  if (!all_finite(u.data(), dim_)) throw DomainError("non-finite potential argument");
  Vec g(dim_);
  impl_->wu(u.data(), g.data());
  return g;
}

Mat Potential::Wuu(const Vec& u) const {
  if (u.size() != dim_) throw ShapeError("potential argument has wrong dimension");
  if (!all_finite(u.data(), dim_)) throw DomainError("non-finite potential argument");
  Mat h(dim_, dim_);
  impl_->wuu(u.data(), h.data());
  return h;
}

EvalBundle Potential::eval(const Vec& u) const {
  EvalBundle b;
  b.W = W(u);
  b.Wu = Wu(u);
  b.Wuu = Wuu(u);
  return b;
}

double Potential::hessian_norm(const Vec& u) const {
  Mat h = Wuu(u);
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Potential Potential::ginzburg_landau(int dim) {
  require_dim(dim);
  std::ostringstream name;
  name << "ginzburg_landau(dim=" << dim << ")";
  return Potential(dim, name.str(), /*continuum=*/true, {},
                   std::make_shared<GinzburgLandauImpl>(dim));
}

Potential Potential::double_well(int dim) {
  require_dim(dim);
  std::vector<Vec> minima(2, Vec::Zero(dim));
  minima[0][0] = -1.0;
  minima[1][0] = 1.0;
  std::ostringstream name;
  name << "double_well(dim=" << dim << ")";
  return Potential(dim, name.str(), false, std::move(minima),
                   std::make_shared<DoubleWellImpl>(dim));
}

Potential Potential::triple_well(double deepen) {
  if (!(deepen >= 0.0)) throw ConfigError("triple_well deepen parameter must be >= 0");
  auto impl = std::make_shared<TripleWellImpl>(deepen);
  std::vector<Vec> minima(3, Vec::Zero(2));
  for (int k = 0; k < 3; ++k) {
    minima[k][0] = impl->ax[k];
    minima[k][1] = impl->ay[k];
  }
  std::ostringstream name;
  name << "triple_well(deepen=" << deepen << ")";
  return Potential(2, name.str(), false, std::move(minima), std::move(impl));
}

Potential Potential::zero(int dim) {
  require_dim(dim);
  std::ostringstream name;
  name << "zero(dim=" << dim << ")";
  return Potential(dim, name.str(), false, {}, std::make_shared<ZeroImpl>(dim));
}

Potential Potential::polynomial(int dim, std::vector<PolyTerm> terms, std::vector<Vec> minima,
                                std::string name) {
  require_dim(dim);
  Potential p(dim, std::move(name), false, std::move(minima),
              std::make_shared<PolynomialImpl>(dim, std::move(terms)));
  for (const Vec& a : p.minima()) {
    if (a.size() != dim) throw ShapeError("polynomial minimum has wrong dimension");
    if (std::abs(p.W(a)) > 1e-12) throw ConfigError("listed minimum has W != 0");
    if (p.Wu(a).cwiseAbs().maxCoeff() > 1e-12) throw ConfigError("listed minimum has W_u != 0");
  }
  return p;
}

Potential Potential::make(const std::string& family, const std::vector<double>& params) {
  auto dim_param = [&](int fallback) {
    return params.empty() ? fallback : static_cast<int>(params[0]);
  };
  if (family == "ginzburg_landau") return ginzburg_landau(dim_param(2));
  if (family == "double_well") return double_well(dim_param(2));
  if (family == "triple_well") return triple_well(params.empty() ? 0.0 : params[0]);
  if (family == "zero") return zero(dim_param(2));
  throw ConfigError("unknown potential family: " + family);
}

GradientConsistencyReport check_gradient_consistency(const Potential& p,
                                                     const std::vector<Vec>& sample_points,
                                                     const std::vector<double>& h_sequence) {
  if (h_sequence.size() < 2) throw ConfigError("gradient consistency needs >= 2 step sizes");
  for (std::size_t k = 0; k + 1 < h_sequence.size(); ++k)
    if (!(h_sequence[k] > h_sequence[k + 1]))
      throw ConfigError("step sizes must be strictly decreasing");

  constexpr double kExactFloor = 1e-12;
  GradientConsistencyReport rep;
  std::vector<double> measurable;
  for (const Vec& x : sample_points) {
    std::vector<double> errs;
    for (double h : h_sequence) {
      Vec fd(p.dim());
      for (int i = 0; i < p.dim(); ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        fd[i] = (p.W(xp) - p.W(xm)) / (2.0 * h);
      }
      errs.push_back((p.Wu(x) - fd).cwiseAbs().maxCoeff());
    }
    const bool exact = std::all_of(errs.begin(), errs.end(),
                                   [&](double e) { return e <= kExactFloor; });
    if (exact) {
      ++rep.exact_points;
      rep.point_orders.push_back(std::numeric_limits<double>::infinity());
    } else {
      const double order = fit_order(h_sequence, errs);
      rep.point_orders.push_back(order);
      measurable.push_back(order);
    }
  }
  rep.median_order = measurable.empty() ? std::numeric_limits<double>::infinity()
                                        : median(measurable);
  rep.pass = measurable.empty() || rep.median_order >= 1.8;
  return rep;
}

}  // namespace sten
