#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ciw/models.hpp"
#include "ciw/smallvec.hpp"

namespace ciw {

using Vec = AVec<double>;
using VecField = std::function<Vec(const Vec&)>;
using ScalarField = std::function<double(const Vec&)>;

struct FdConfig {
  double step1 = 1e-4;  // first derivatives (metric, fields, flows)
  double step2 = 1e-3;  // outer step of nested derivatives (curvature)
};

// g-orthonormal frame of xi_p with e2 = J e1 and dlambda(e1, e2) = 1.
struct XiFrame {
  Vec p, e1, e2;
};

// Endomorphism of xi_p expressed in an orthonormal frame: E e_b = m[a][b] e_a.
struct XiEndo {
  XiFrame f;
  double m[2][2] = {{0, 0}, {0, 0}};
};

struct AxiomReport {
  // named residuals, max over sampled points
  std::vector<std::pair<std::string, double>> entries;
  double max_residual = 0.0;
  double get(const std::string& name) const;
};

class Triad {
 public:
  // ids: "r3-standard", "ellipsoid:a1=..,a2=..",
  //      "ellipsoid-perturbed:seed=..[,a1=..][,a2=..][,eps=..]"
  static Triad from_id(const std::string& id);

  const std::string& id() const { return id_; }
  int dim() const;
  bool constrained() const;
  bool sasakian() const;
  FdConfig& fd() { return fd_; }
  const FdConfig& fd() const { return fd_; }

  // pointwise contact structure
  double lambda(const Vec& p, const Vec& v) const;
  double dlambda(const Vec& p, const Vec& u, const Vec& v) const;
  Vec reeb(const Vec& p) const;
  Vec japply(const Vec& p, const Vec& v) const;
  Vec project_xi(const Vec& p, const Vec& v) const;
  Vec tangent_project(const Vec& p, const Vec& v) const;
  Vec project_point(const Vec& p) const;
  double constraint(const Vec& p) const;
  double metric(const Vec& p, const Vec& u, const Vec& v) const;
  Vec flow(const Vec& p, double s) const;  // closed-form Reeb flow
  // ambient differential of the time-s Reeb flow applied to v
  Vec flow_pushforward(const Vec& p, double s, const Vec& v) const;

  XiFrame xi_frame(const Vec& p) const;
  XiFrame xi_frame(const Vec& p, const Vec& seed) const;
  void frame_coords(const XiFrame& f, const Vec& v, double& c1, double& c2) const;
  Vec endo_apply(const XiEndo& E, const Vec& v) const;
  double endo_opnorm(const XiEndo& E) const;

  // Lie derivative of J along the Reeb field, as endomorphism of xi_p.
  XiEndo lie_derivative_J(const Vec& p) const;
  XiEndo lie_derivative_J_fd(const Vec& p) const;  // forces the flow-difference path
  Vec lieJ_apply(const Vec& p, const Vec& v) const;

  // Levi-Civita connection of the triad metric (finite-difference chart).
  Vec lc_nabla(const Vec& p, const Vec& X, const VecField& Y) const;
  // canonical triad connection
  Vec nabla(const Vec& p, const Vec& X, const VecField& Y) const;
  // its xi-block: projection of nabla for xi-valued fields
  Vec nabla_pi(const Vec& p, const Vec& X, const VecField& Z) const;
  Vec bracket(const Vec& p, const VecField& U, const VecField& V) const;
  double dirderiv(const Vec& p, const Vec& X, const ScalarField& f) const;
  // torsion of the triad connection on projected-constant extensions
  Vec torsion(const Vec& p, const Vec& u, const Vec& v) const;
  // torsion of the xi-block on xi-projected extensions
  Vec torsion_pi(const Vec& p, const Vec& u, const Vec& v) const;
  XiEndo curvature_pi(const Vec& p, const Vec& u, const Vec& v) const;

  // transport of a xi vector along a sampled curve; returns the vector at
  // every sample (index 0 = v0).
  std::vector<Vec> parallel_transport(const std::vector<Vec>& curve,
                                      const Vec& v0, int substeps = 2) const;
  std::vector<XiFrame> transport_frames(const std::vector<Vec>& curve,
                                        const XiFrame& f0, int substeps = 2) const;

  AxiomReport axiom_check(int npoints, double step, std::uint64_t seed) const;

  // sampling helper: quasi-random on-manifold point
  Vec sample_point(CounterRng& rng) const;

  const std::variant<FlatCore, EllipsoidCore>& core() const { return core_; }

 private:
  std::string id_;
  std::variant<FlatCore, EllipsoidCore> core_;
  FdConfig fd_;

  struct Chart;
  friend struct Chart;
};

}  // namespace ciw
