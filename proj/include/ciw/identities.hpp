#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ciw/cylfield.hpp"
#include "ciw/triad.hpp"

namespace ciw {

// Covariant calculus for sections of xi pulled back along a map field.
// A single smooth orthonormal frame (e1, e2 = J e1) is carried along the
// whole image; covariant derivatives of a section combine stencil
// derivatives of its frame coefficients with the precomputed connection
// action on the frame leg.
struct PullbackConnection {
  const Triad* T = nullptr;
  const MapField* f = nullptr;
  NodeVecs e1, e2;      // frame of xi along w, g-orthonormal, e2 = J e1
  NodeVecs wtau, wt;    // ambient stencil derivatives of the map
  NodeVecs n1tau, n1t;  // nabla^pi of the frame leg e1 along wtau / wt

  PullbackConnection(const Triad& T, const MapField& f);

  void coords(const NodeVecs& s, std::vector<double>& c1,
              std::vector<double>& c2) const;
  // covariant derivative of a xi-valued nodal section along the map
  void nabla(const NodeVecs& s, NodeVecs& out_tau, NodeVecs& out_t) const;
  XiOneForm nabla(const NodeVecs& s) const;
  // curvature of the pulled-back connection over (d/dtau, d/dt) applied to
  // e1, via the discrete commutator of covariant derivatives
  NodeVecs curvature_e1() const;
  // endomorphism action R(d/dtau, d/dt) v given the commutator field r1
  Vec curvature_apply(const NodeVecs& r1, int k, const Vec& v) const;
};

// exterior calculus on xi-valued forms over the flat cylinder; the Hodge
// star on 1-forms is *beta = -beta o j, the scalar Laplacian is the Hodge
// one, Delta = -(d_tautau + d_tt)
XiOneForm star1(const XiOneForm& b);
NodeVecs d_oneform(const PullbackConnection& P, const XiOneForm& b);  // 2-form comp
NodeVecs delta_oneform(const PullbackConnection& P, const XiOneForm& b);
XiOneForm delta_twoform(const PullbackConnection& P, const NodeVecs& g2);

struct IdentityReport {
  std::string name;
  std::vector<double> residuals;  // per resolution, max over the interior window
  double order = 0.0;             // least-squares slope of log res vs log h
  double expected_order = 0.0;    // 0: cap-only check (algebra / inequality)
  double cap = 0.0;               // bound on the finest residual
  bool pass = false;
  std::string note;
};

// per-field evaluators; residuals are max nodal values over the window
// tau in [L/4, 3L/4] (wide composed stencils lose an order at the cylinder
// ends, so orders are measured away from them)
double fundamental_equation_residual(const Triad& T, const MapField& f);
// full_torsion: evaluate the off-shell two-form identity including the
// torsion term; otherwise the on-shell reduced right-hand side
double two_form_equation_residual(const Triad& T, const MapField& f,
                                  bool full_torsion);
double torsion_onshell_residual(const Triad& T, const MapField& f);
double weitzenboeck_density_residual(const Triad& T, const MapField& f);
double laplacian_double_residual(const Triad& T, const MapField& f);
// two-route Laplacian on a seeded smooth xi-valued 1-form, plus the scalar
// Bochner identity for the same form; returns the larger residual
double weitzenboeck_forms_residual(const Triad& T, const MapField& f,
                                   std::uint64_t seed);
double integration_by_parts_residual(const Triad& T, const MapField& f,
                                     std::uint64_t seed);
// pure algebra, resolution independent
double hodge_star_square_defect(const CylinderGrid& g, std::uint64_t seed);
double inner_star_defect(const Triad& T, const MapField& f, std::uint64_t seed);

// one-sided checks; return max violation (0 when the inequality holds) and
// optionally the worst ratio lhs/rhs
double apriori_density_violation(const Triad& T, const MapField& f,
                                 double* ratio = nullptr);
// D1 = [d1a, d1b] x S^1 inside D2 = [d2a, d2b] x S^1, fractions of L
double coercive_estimate_violation(const Triad& T, const MapField& f,
                                   double d1a, double d1b, double d2a,
                                   double d2b, double* ratio = nullptr);

// sampled C^0 tensor sup-norms over the image of f (times a 1.1 safety
// factor): Lie derivative of J, its covariant derivative, curvature
struct TensorNorms {
  double lieJ = 0.0;
  double nabla_lieJ = 0.0;
  double ric = 0.0;
};
TensorNorms sample_tensor_norms(const Triad& T, const MapField& f);

// full suite over a list of resolutions (grid n -> (n+1) x n nodes, L = 1);
// flat triads run every identity on the exact-solution field, other triads
// run the off-shell subset on a synthetic smooth field
std::vector<IdentityReport> run_identity_suite(const std::string& triad_id,
                                               const std::vector<int>& ns,
                                               std::uint64_t seed);
bool suite_pass(const std::vector<IdentityReport>& reports);
void write_identity_csv(const std::vector<IdentityReport>& reports,
                        const std::vector<int>& ns, const std::string& path);

}  // namespace ciw
