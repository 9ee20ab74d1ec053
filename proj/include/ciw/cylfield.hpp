#pragma once

#include <string>
#include <vector>

#include "ciw/triad.hpp"

namespace ciw {

// Truncated cylinder [0, L] x S^1, flat metric dtau^2 + dt^2, t-period 1.
// Node (i, j) sits at (tau, t) = (i * L/(ntau-1), j / nt); row-major storage.
struct CylinderGrid {
  double L = 1.0;
  int ntau = 2;
  int nt = 2;

  double htau() const { return L / (ntau - 1); }
  double ht() const { return 1.0 / nt; }
  double tau(int i) const { return i * htau(); }
  double t(int j) const { return j * ht(); }
  int idx(int i, int j) const { return i * nt + j; }
  int size() const { return ntau * nt; }
  // trapezoid weight in tau, uniform in t
  double weight(int i) const { return (i == 0 || i == ntau - 1) ? 0.5 : 1.0; }
};

struct MapField {
  CylinderGrid grid;
  std::string triad_id;
  std::vector<Vec> w;

  Vec& at(int i, int j) { return w[grid.idx(i, j)]; }
  const Vec& at(int i, int j) const { return w[grid.idx(i, j)]; }
};

// nodal ambient-vector data over the grid (sections of w^* TM or w^* xi)
using NodeVecs = std::vector<Vec>;

// xi-valued one-form over the cylinder: beta = btau dtau + bt dt
struct XiOneForm {
  NodeVecs btau, bt;
};

struct EnergyReport {
  double e_total = 0.0;   // (1/2) integral |d^pi w|^2
  double e_dbar = 0.0;    // integral |dbar^pi w|^2
  double e_del = 0.0;     // integral |del^pi w|^2
  double T = 0.0;         // action at the tau = 0 slice
  double Q = 0.0;         // charge at the tau = 0 slice
};

struct IdentityResiduals {
  double energy_split = 0.0;   // e^pi vs |del|^2 + |dbar|^2
  double dlambda_split = 0.0;  // 2 w^* dlambda vs (|del|^2 - |dbar|^2) dA
  double lambda_wedge = 0.0;   // w^*lambda ^ (w^*lambda o j) vs -|w^*lambda|^2 dA
  double onshell = 0.0;        // w^* dlambda vs (1/2)|d^pi w|^2 dA
  double res_dbar = 0.0;       // max |dbar^pi w|
  double res_closed = 0.0;     // max |d(w^*lambda o j)|
};

// second-order stencil derivatives of the map (central in t, one-sided at the
// tau boundary); ambient-valued
NodeVecs deriv_tau(const MapField& f);
NodeVecs deriv_t(const MapField& f);
// scalar-field versions, same stencils
std::vector<double> deriv_tau(const CylinderGrid& g, const std::vector<double>& s);
std::vector<double> deriv_t(const CylinderGrid& g, const std::vector<double>& s);

// pullback w^*lambda = a_tau dtau + a_t dt
void pullback_lambda(const Triad& T, const MapField& f, std::vector<double>& a_tau,
                     std::vector<double>& a_t);

// zeta = pi dw/dtau, eta = pi dw/dt
void xi_derivatives(const Triad& T, const MapField& f, NodeVecs& zeta, NodeVecs& eta);

// (0,1) and (1,0) parts; returned vector is the dtau-component, the dt
// component is -J value (dbar) / +J value (del)
NodeVecs dbar_pi(const Triad& T, const MapField& f);
NodeVecs del_pi(const Triad& T, const MapField& f);

double integrate(const CylinderGrid& g, const std::vector<double>& nodal);
double slice_integral(const CylinderGrid& g, const std::vector<double>& nodal, int i);

EnergyReport energies(const Triad& T, const MapField& f);
IdentityResiduals check_energy_identities(const Triad& T, const MapField& f);

// per-slice action/charge: T_i over [tau_i, L] plus slice holonomy, Q_i
void charge_action_slices(const Triad& T, const MapField& f,
                          std::vector<double>& Ts, std::vector<double>& Qs);

void save_field(const MapField& f, const std::string& path);
MapField load_field(const std::string& path);

}  // namespace ciw
