#pragma once

#include <string>
#include <vector>

#include "ciw/triad.hpp"

namespace ciw {

// generic Reeb-flow integrator (RK4); cross-checks the closed-form flow
Vec flow_rk4(const Triad& T, const Vec& p, double s, int nsteps);

struct OrbitResult {
  Vec p0;                  // point on the orbit
  double period = 0.0;
  bool found = false;
  int iters = 0;
  double residual = 0.0;   // |flow_T(p0) - p0| at the solution
};

// Newton shooting for a closed Reeb orbit near (guess, period_guess); the
// phase is pinned by requiring the update to stay normal to the flow direction
OrbitResult find_closed_orbit(const Triad& T, const Vec& guess,
                              double period_guess, int max_iter = 40,
                              double tol = 1e-12);

// linearized return map on xi_{p0}, in the orthonormal frame at p0
struct ReturnMap {
  XiFrame frame;
  double m[2][2] = {{0, 0}, {0, 0}};
  double det = 0.0;
  // min |mu - 1| over the two (possibly complex) eigenvalues; the orbit is
  // nondegenerate iff this margin is positive
  double floquet_margin = 0.0;
  int unit_eigenvalues = 0;  // eigenvalues within unit_tol of 1
};

ReturnMap return_map(const Triad& T, const OrbitResult& orb,
                     double unit_tol = 1e-6);

// asymptotic operator of the orbit: A eta = J nabla_s eta - (T/2) (L_X J) eta
// on sections of xi along the unit-speed-parametrized orbit (s in [0,1)),
// discretized in parallel-transported frames with the holonomy-twisted
// periodic central stencil and then symmetrized
struct AzSpectrum {
  std::vector<double> eigs;      // ascending
  double holonomy_angle = 0.0;   // rotation angle of the transported frame
  double sym_defect = 0.0;       // pre-symmetrization asymmetry, max-norm
  int dim = 0;                   // matrix side (2 * samples)
  std::vector<double> matrix;    // symmetrized operator, row-major dim x dim
  // spectral gap: min |eig|
  double gap() const;
};

AzSpectrum assemble_az_spectrum(const Triad& T, const OrbitResult& orb,
                                int nsamples, int substeps = 4);

// closed-form spectrum {2 pi k - theta, -(2 pi k - theta) : k in Z} valid in
// the Reeb-invariant (Sasakian) case, truncated to the nev smallest |.|
std::vector<double> sasakian_az_spectrum(double holonomy_angle, int nev);

struct KernelReport {
  int near_kernel = 0;       // |eig| below threshold
  int unit_floquet = 0;      // return-map eigenvalues at 1
  double threshold = 0.0;
  bool consistent = false;
};

KernelReport kernel_correspondence(const Triad& T, const OrbitResult& orb,
                                   int nsamples);

}  // namespace ciw
