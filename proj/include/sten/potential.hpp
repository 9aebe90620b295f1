#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sten/convergence.hpp"
#include "sten/types.hpp"

namespace sten {

namespace detail {
// Raw evaluation core. Implementations must not allocate; buffers are sized
// by dim(). No input validation on this path.
struct PotentialImpl {
  virtual ~PotentialImpl() = default;
  virtual double w(const double* u) const = 0;
  virtual void wu(const double* u, double* out) const = 0;
  virtual void wuu(const double* u, double* out) const = 0;  // column-major dim x dim
};
}  // namespace detail

struct EvalBundle {
  double W = 0.0;
  Vec Wu;
  Mat Wuu;
};

// One monomial of a polynomial potential: coeff * prod_i u_i^powers[i].
struct PolyTerm {
  double coeff = 0.0;
  std::array<int, kMaxDim> powers{};
};

// A C^2 potential W: R^n -> R with W >= 0 and a known set of global minima.
// Immutable after construction; safe to share across workers.
class Potential {
 public:
  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  // True when the zero set of W is a connected manifold (Ginzburg-Landau
  // unit circle) rather than isolated points; the minima list is then empty.
  bool continuum_minima() const { return continuum_minima_; }
  const std::vector<Vec>& minima() const { return minima_; }

  double W(const Vec& u) const;
  Vec Wu(const Vec& u) const;
  Mat Wuu(const Vec& u) const;
  EvalBundle eval(const Vec& u) const;  // validates input, returns all three

  // Unchecked fast path for node loops.
  double w_raw(const double* u) const { return impl_->w(u); }
  void wu_raw(const double* u, double* out) const { impl_->wu(u, out); }
  void wuu_raw(const double* u, double* out) const { impl_->wuu(u, out); }

  // Spectral norm of W_uu at u (largest |eigenvalue|).
  double hessian_norm(const Vec& u) const;

  // W(u) = (|u|^2 - 1)^2 / 4. Minima form the unit circle; the minima list
  // stays empty and continuum_minima() is set.
  static Potential ginzburg_landau(int dim = 2);
  // W(u) = (1 - u_1^2)^2 / 4 + sum_{k>=2} u_k^2 / 2, minima (+-1, 0, ..., 0).
  static Potential double_well(int dim);
  // W(u) = |u-a_1|^2 |u-a_2|^2 |u-a_3|^2 * (1 + deepen * |u-a_1|^2) on R^2,
  // a_k the three cube roots of unity. deepen = 0 gives the symmetric well;
  // deepen > 0 raises the landscape away from a_1 while keeping W >= 0 and
  // the same three minima.
  static Potential triple_well(double deepen = 0.0);
  // W == 0 (harmonic-field identity tests).
  static Potential zero(int dim);
  // User-defined polynomial W from a coefficient table, with the minima
  // supplied explicitly. Construction verifies W(a) = 0 and |W_u(a)| <= 1e-12
  // at each listed minimum.
  static Potential polynomial(int dim, std::vector<PolyTerm> terms, std::vector<Vec> minima,
                              std::string name = "polynomial");
  // Lookup by family name ("ginzburg_landau", "double_well", "triple_well",
  // "zero") with numeric parameters (dim, or deepen for the triple well).
  static Potential make(const std::string& family, const std::vector<double>& params);

 private:
  Potential(int dim, std::string name, bool continuum, std::vector<Vec> minima,
            std::shared_ptr<const detail::PotentialImpl> impl);

  int dim_ = 0;
  std::string name_;
  bool continuum_minima_ = false;
  std::vector<Vec> minima_;
  std::shared_ptr<const detail::PotentialImpl> impl_;
};

struct GradientConsistencyReport {
  std::vector<double> point_orders;  // least-squares order per sample point
  double median_order = 0.0;
  int exact_points = 0;  // points where all FD gaps sit at the roundoff floor
  bool pass = false;
};

// Compare W_u against central finite differences of W over a halving step
// sequence. Passes when the median measured order is >= 1.8 (points whose
// errors are identically zero, e.g. for W == 0, count as passing).
GradientConsistencyReport check_gradient_consistency(const Potential& p,
                                                     const std::vector<Vec>& sample_points,
                                                     const std::vector<double>& h_sequence);

}  // namespace sten
