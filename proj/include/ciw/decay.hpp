#pragma once

#include <string>
#include <vector>

#include "ciw/cylfield.hpp"
#include "ciw/reeb.hpp"
#include "ciw/triad.hpp"

namespace ciw {

// xi of the three-interval inequality: the larger root of
// gamma r^2 - r + gamma = 0
double three_interval_xi(double gamma);
// gamma for which the pure exponential e^{-c k} satisfies the hypothesis
// with equality: 1 / (e^c + e^{-c})
double gamma_of_rate(double c);

struct ThreeIntervalResult {
  bool hypothesis_ok = false;
  std::vector<int> violations;   // interior indices failing the hypothesis
  double xi = 0.0;
  std::vector<double> bound;     // x0 xi^-k + xN xi^-(N-k); empty on failure
  bool bound_ok = false;
  double max_overshoot = 0.0;    // max (x_k - bound_k), clipped at 0
};

// hypothesis x_k <= gamma (x_{k-1} + x_{k+1}) for interior k; when it holds,
// asserts the conclusion x_k <= x_0 xi^-k + x_N xi^-(N-k)
ThreeIntervalResult three_interval_bound(const std::vector<double>& xs,
                                         double gamma);

struct DecayReport {
  std::vector<double> xk;        // ||zeta||^2 over windows [k+1, k+2] x S^1
  double gamma_used = 0.0;
  std::vector<int> three_interval_violations;
  int fit_begin = 0, fit_end = 0;  // window index range of the tail fit
  double slope = 0.0;
  double delta_fit = 0.0;          // rate of ||zeta||, i.e. -slope/2
  double r2 = 0.0;
  double Q_limit = 0.0, T_limit = 0.0;  // slice averages over the last window
  double orbit_distance = -1.0;    // sup distance of the final slice, if asked
};

// window energies of zeta = pi dw/dtau, three-interval verdict, log-linear
// tail fit; requires at least 4 unit windows
DecayReport analyze_decay(const Triad& T, const MapField& f, double gamma = 0.4,
                          const OrbitResult* orbit = nullptr);

// integrates d eta / d tau + A eta = 0 for the dense symmetric matrix A
// (row-major, n x n) and fits the L^2 decay rate over the tail; negative
// when eta grows
double linear_evolution_rate(const std::vector<double>& A, int n,
                             const std::vector<double>& eta0, double horizon);

struct ThetaReport {
  double identity_residual = 0.0;  // max |dbar theta - (1/2)|zeta|^2|
  std::vector<double> slice_norm;  // ||theta||_{L2(S^1)} per slice
  double rate = 0.0;               // fitted decay rate of the slice norms
  bool constant_tail = false;
  double Q_limit = 0.0;
};

// theta = (a_t - T) + i a_tau; checks dbar theta = (1/2)|zeta|^2 and fits the
// slice-norm decay; requires the charge to (numerically) vanish
ThetaReport theta_component(const Triad& T, const MapField& f, double Tlimit,
                            double q_threshold = 5e-2);

struct AReport {
  std::vector<double> a;          // nodal primitive of w*lambda o j
  double charge_residual = 0.0;   // max |loop integral| over slices
  double path_residual = 0.0;     // circle-then-axial vs axial-then-circle
  double T_used = 0.0;
  std::vector<double> alpha;      // slice integral of b = a - T tau
  double C0 = 0.0;                // tail limit of alpha
  std::vector<double> sup_dev;    // per slice, sup |a - T tau - C0|
};

// integrates da = w*lambda o j from the origin node along the tau = 0 circle
// and then axially; requires the charge to (numerically) vanish
AReport reconstruct_a(const Triad& T, const MapField& f,
                      double q_threshold = 5e-2);

// per-slice sup_t min over the orbit's rotation family of the ambient
// distance between w(tau, .) and the orbit
std::vector<double> limit_orbit_distance(const Triad& T, const MapField& f,
                                         const OrbitResult& orbit,
                                         int orbit_samples = 512);

void write_decay_csv(const DecayReport& rep, const std::string& path);

}  // namespace ciw
