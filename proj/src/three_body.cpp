#include "dwelltime/three_body.hpp"

#include <algorithm>
#include <cmath>

#include "dwelltime/errors.hpp"
#include "dwelltime/parallel.hpp"
#include "dwelltime/quadrature.hpp"

namespace dwelltime {

namespace {

struct Channel {
  VectorXcd values;
  VectorXd density;
  VectorXd current;  // (1/m) Im(phi* phi') on the grid
  VectorXd dcurrent;
  VectorXd weights;
  double gamma = 0.0;
  double norm = 0.0;
  double boundary_current = 0.0;
};

Channel channel_of(const ResonanceEigenpair& eig) {
  const auto& sol = eig.eigenfunction;
  const auto node = sol.grid.node_index(eig.r0);
  if (!node) throw DomainError("eigenpair matching radius is not a grid node");
  const Index n = *node + 1;
  std::vector<Index> breaks;
  for (Index b : sol.breaks) {
    if (b < n - 1) breaks.push_back(b);
  }
  breaks.push_back(n - 1);

  Channel c;
  c.values = sol.values.head(n);
  c.density = c.values.cwiseAbs2();
  c.current = (c.values.conjugate().cwiseProduct(sol.derivatives.head(n))).imag() / sol.mass;
  c.dcurrent = differentiate(c.current, sol.grid.spacing(), breaks);
  c.weights = simpson_weights(n, sol.grid.spacing(), breaks);
  c.gamma = eig.gamma;
  c.norm = c.weights.dot(c.density);
  c.boundary_current = c.current(n - 1);
  return c;
}

void require_decaying(const ResonanceEigenpair& eig, const char* channel) {
  if (!(eig.gamma > 0.0)) {
    throw NonphysicalStateError(std::string("nonpositive width in the ") + channel + " channel");
  }
}

}  // namespace

ThreeBodyModel build_three_body(const std::array<double, 3>& masses, const PotentialSpec& V_r,
                                const PotentialSpec& V_rho, double r_chi, double rho_phi) {
  for (double m : masses) {
    if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("masses must be positive and finite");
  }
  if (r_chi < V_r.support_radius() * (1.0 - 1e-12)) {
    throw ConfigError("r_chi is smaller than the support radius of V_r");
  }
  if (rho_phi < V_rho.support_radius() * (1.0 - 1e-12)) {
    throw ConfigError("rho_phi is smaller than the support radius of V_rho");
  }
  ThreeBodyModel model;
  model.m1 = masses[0];
  model.m2 = masses[1];
  model.m3 = masses[2];
  const double pair = model.m2 + model.m3;
  model.mu1 = model.m1 * pair / (model.m1 + pair);
  model.mu2 = model.m2 * model.m3 / pair;
  model.V_r = V_r;
  model.V_rho = V_rho;
  model.r_chi = r_chi;
  model.rho_phi = rho_phi;
  return model;
}

std::pair<ResonanceEigenpair, ResonanceEigenpair> solve_subsystems(const ThreeBodyModel& model,
                                                                   const std::vector<Complex>& seeds_r,
                                                                   const std::vector<Complex>& seeds_rho,
                                                                   const KpOptions& options, double spacing) {
  struct Job {
    const char* name;
    const PotentialSpec* potential;
    double mass;
    double region;
    const std::vector<Complex>* seeds;
  };
  const std::array<Job, 2> jobs{Job{"r (chi)", &model.V_r, model.mu1, model.r_chi, &seeds_r},
                                Job{"rho (Phi)", &model.V_rho, model.mu2, model.rho_phi, &seeds_rho}};
  std::array<KpSearchResult, 2> results;
  std::array<std::string, 2> errors;
  parallel_for(jobs.size(), [&](std::size_t i) {
    const Job& job = jobs[i];
    if (job.seeds->empty()) {
      errors[i] = "no seeds";
      return;
    }
    try {
      results[i] = find_kp_eigenvalues(*job.potential, job.mass, *job.seeds, job.region,
                                       grid_to(job.region, spacing), options);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (errors[i].empty() && results[i].eigenpairs.empty()) {
      errors[i] = results[i].failures.empty() ? "no eigenvalue found"
                                              : "no seed converged (" + results[i].failures.front().reason + ")";
    }
    if (!errors[i].empty()) {
      throw ConvergenceError(std::string("channel ") + jobs[i].name + ": " + errors[i]);
    }
  }
  return {results[0].eigenpairs.front(), results[1].eigenpairs.front()};
}

ThreeBodyWidth three_body_width(const ResonanceEigenpair& eig_r, const ResonanceEigenpair& eig_rho) {
  require_decaying(eig_r, "r");
  require_decaying(eig_rho, "rho");
  ThreeBodyWidth w;
  w.gamma_R = eig_r.gamma + eig_rho.gamma;
  w.tau_R = 1.0 / w.gamma_R;
  w.gamma_currents = boundary_current(eig_r) / eigen_norm(eig_r) + boundary_current(eig_rho) / eigen_norm(eig_rho);
  return w;
}

ThreeBodyCurrents three_body_currents(const ResonanceEigenpair& eig_r, const ResonanceEigenpair& eig_rho,
                                      double t) {
  if (!std::isfinite(t)) throw DomainError("time must be finite");
  const double decay = std::exp(-(eig_r.gamma + eig_rho.gamma) * t);
  ThreeBodyCurrents c;
  c.j_r = decay * eigen_norm(eig_rho) * boundary_current(eig_r);
  c.j_rho = decay * eigen_norm(eig_r) * boundary_current(eig_rho);
  c.j_3b = c.j_r + c.j_rho;
  return c;
}

ThreeBodyReport three_body_dwell(const ThreeBodyModel& model, const ResonanceEigenpair& eig_r,
                                 const ResonanceEigenpair& eig_rho) {
  if (std::abs(eig_r.r0 - model.r_chi) > 1e-12 * model.r_chi ||
      std::abs(eig_rho.r0 - model.rho_phi) > 1e-12 * model.rho_phi) {
    throw ConfigError("eigenpairs were not solved on the model's dwell regions");
  }
  const ThreeBodyWidth width = three_body_width(eig_r, eig_rho);
  const Channel chi = channel_of(eig_r);
  const Channel phi = channel_of(eig_rho);

  ThreeBodyReport report;
  report.W_chi = eig_r.W;
  report.W_phi = eig_rho.W;
  report.E_total = eig_r.W + eig_rho.W;
  report.gamma_R = width.gamma_R;
  report.tau_R = width.tau_R;
  report.tau_chi = chi.norm / chi.boundary_current;
  report.tau_phi_sub = phi.norm / phi.boundary_current;

  const ThreeBodyCurrents currents = three_body_currents(eig_r, eig_rho, 0.0);
  const double factorized = chi.norm * phi.norm;
  report.tau_3b = factorized / currents.j_3b;

  // Direct 2D Simpson quadrature of |chi(r) Phi(rho)|^2.
  double direct = 0.0;
  for (Index i = 0; i < chi.values.size(); ++i) {
    if (chi.weights(i) == 0.0) continue;
    direct += chi.weights(i) * (chi.values(i) * phi.values).cwiseAbs2().dot(phi.weights);
  }
  report.tau_3b_quadrature = direct / currents.j_3b;
  report.factorization_residual = std::abs(direct - factorized) / factorized;
  if (report.factorization_residual > 1e-9) {
    throw ConsistencyError("2D quadrature disagrees with the factorized norm product");
  }

  report.identity_residual = std::abs(report.tau_3b * (1.0 / report.tau_chi + 1.0 / report.tau_phi_sub) - 1.0);
  report.lifetime_residual = std::abs(report.tau_3b * report.gamma_R - 1.0);
  report.continuity_residual = continuity_residual(eig_r, eig_rho).generalized_max;
  return report;
}

ContinuityReport continuity_residual(const ResonanceEigenpair& eig_r, const ResonanceEigenpair& eig_rho,
                                     const std::vector<double>& t_samples) {
  const Channel chi = channel_of(eig_r);
  const Channel phi = channel_of(eig_rho);
  const double gamma_R = chi.gamma + phi.gamma;

  ContinuityReport report;
  for (double t : t_samples) {
    const double f2 = std::exp(-gamma_R * t);
    // J_r = |Phi|^2 |f|^2 j_chi(r), J_rho = |chi|^2 |f|^2 j_Phi(rho).
    double worst = 0.0;
    double scale = 0.0;
    for (Index i = 0; i < chi.values.size(); ++i) {
      const auto psi2 = (chi.values(i) * phi.values).cwiseAbs2() * f2;
      const VectorXd balance = -gamma_R * psi2 + phi.density * (f2 * chi.dcurrent(i)) +
                               (f2 * chi.density(i)) * phi.dcurrent;
      worst = std::max(worst, balance.cwiseAbs().maxCoeff());
      scale = std::max(scale, gamma_R * psi2.maxCoeff());
    }
    report.generalized_max = std::max(report.generalized_max, worst / scale);

    // n_r = N_Phi |chi|^2 |f|^2, j_r = N_Phi |f|^2 j_chi(r); likewise for rho.
    const VectorXd n_r = phi.norm * f2 * chi.density;
    const VectorXd n_rho = chi.norm * f2 * phi.density;
    const VectorXd div_r = phi.norm * f2 * chi.dcurrent;
    const VectorXd div_rho = chi.norm * f2 * phi.dcurrent;
    const double scale_r = chi.gamma * n_r.maxCoeff();
    const double scale_rho = phi.gamma * n_rho.maxCoeff();
    report.individual_r_max =
        std::max(report.individual_r_max, (chi.gamma * n_r - div_r).cwiseAbs().maxCoeff() / scale_r);
    report.individual_rho_max =
        std::max(report.individual_rho_max, (phi.gamma * n_rho - div_rho).cwiseAbs().maxCoeff() / scale_rho);
    report.literal_r_max =
        std::max(report.literal_r_max, (-gamma_R * n_r + div_r).cwiseAbs().maxCoeff() / scale_r);
    report.literal_rho_max =
        std::max(report.literal_rho_max, (-gamma_R * n_rho + div_rho).cwiseAbs().maxCoeff() / scale_rho);
    const double jr_end = phi.norm * f2 * chi.boundary_current;
    const double jrho_end = chi.norm * f2 * phi.boundary_current;
    report.integrated_r =
        std::max(report.integrated_r, std::abs(1.0 - chi.gamma * chi.weights.dot(n_r) / jr_end));
    report.integrated_rho =
        std::max(report.integrated_rho, std::abs(1.0 - phi.gamma * phi.weights.dot(n_rho) / jrho_end));
  }
  return report;
}

}  // namespace dwelltime
