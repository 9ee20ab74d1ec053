#pragma once

#include <string>
#include <vector>

#include "ciw/cylfield.hpp"
#include "ciw/triad.hpp"

namespace ciw {

struct SolveOptions {
  enum Method { kGaussNewton, kGradientDescent };
  Method method = kGaussNewton;
  int max_iter = 60;
  double tol_grad = 1e-10;    // stop when |grad F| falls below
  double tol_f = 1e-22;       // or when F falls below
  int cg_max_iter = 800;
  double cg_tol = 1e-10;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  int max_backtracks = 40;
};

struct IterRecord {
  int iter = 0;
  double F = 0.0;
  double gnorm = 0.0;
  double res_dbar = 0.0;
  double res_closed = 0.0;
  double step = 0.0;
};

struct SolveResult {
  MapField field;
  std::vector<IterRecord> history;
  bool converged = false;
  double F = 0.0;
  double gnorm = 0.0;
  std::string message;
};

// Least-squares formulation of the contact-instanton system on a truncated
// cylinder: F(w) = int |dbar^pi w|^2 + int |d(w^*lambda o j)|^2, discretized
// with the cylfield stencils.  Boundary rows (tau = 0, L) are Dirichlet data
// taken from the initial field.
class InstantonProblem {
 public:
  InstantonProblem(const Triad& T, MapField init);

  double functional(const MapField& f) const;
  // Riemannian gradient: ambient vectors, tangent to the constraint, zero on
  // the boundary rows; exact derivative of the discrete functional
  NodeVecs gradient(const MapField& f) const;
  SolveResult solve(const SolveOptions& opt) const;

  const MapField& init() const { return init_; }
  const Triad& triad() const { return triad_; }

 private:
  Triad triad_;
  MapField init_;
};

// Flat-model reference instanton: holomorphic (x, y) data
// (eps e^{-tau} cos t, -eps e^{-tau} sin t) plus z = kappa tau corrected by a
// discrete Poisson solve so the closedness equation holds to stencil order.
MapField oracle_flat(const CylinderGrid& g, double eps, double kappa);

void write_history_csv(const std::vector<IterRecord>& hist, const std::string& path);

}  // namespace ciw
