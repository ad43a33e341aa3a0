#include "popdyn/presets.hpp"

#include <algorithm>
#include <stdexcept>

namespace popdyn {

namespace {

DemographyModel base(const std::string& name, const PresetParams& p) {
  DemographyModel m;
  m.name = name;
  m.theta = p.theta;
  m.dispersal = DispersalLaw::isotropic(p.dim, 2.0 * p.diffusion, p.theta);
  const GaussianKernel g{p.dim, p.interaction_variance};
  m.kernel_gamma = g;
  m.kernel_r = g;
  m.kernel_F = g;
  m.gamma = RateFunction::constant(1.0);
  m.r = RateFunction::constant(1.0);
  m.gamma_cap = 1.0;
  return m;
}

void finish(DemographyModel& m, const PresetParams& p) {
  m.mu_cap = std::max(bound_mu(m, p.density_ceiling), 1e-6);
  m.check();
}

}  // namespace

double bound_mu(const DemographyModel& model, double ceiling) {
  const Point x = Point::Zero(model.dispersal.dim());
  double best = 0.0;
  constexpr int kSteps = 2000;
  for (int i = 0; i <= kSteps; ++i) {
    const double m = ceiling * i / kSteps;
    const double g = std::min(model.gamma(x, m), model.gamma_cap);
    best = std::max(best, model.r(x, m) * g - model.F(x, m) / model.theta);
  }
  return best;
}

DemographyModel logistic_model(const PresetParams& p) {
  DemographyModel m = base("logistic", p);
  m.F = RateFunction::of_density([](double d) { return 1.0 - d; });
  finish(m, p);
  return m;
}

DemographyModel critical_model(const PresetParams& p) {
  DemographyModel m = base("critical", p);
  m.F = RateFunction::constant(0.0);
  finish(m, p);
  return m;
}

DemographyModel fkpp_model(const PresetParams& p) {
  DemographyModel m = logistic_model(p);
  m.name = "fkpp";
  return m;
}

DemographyModel allen_cahn_model(const PresetParams& p) {
  DemographyModel m = base("allen_cahn", p);
  const double s = p.s;
  m.F = RateFunction::of_density([s](double d) { return (1.0 - d) * (2.0 * d - 1.0 + s); });
  finish(m, p);
  return m;
}

DemographyModel pme_model(const PresetParams& p) {
  DemographyModel m = base("pme", p);
  const double cap = p.gamma_cap;
  m.gamma = RateFunction::of_density([cap](double d) { return std::min(d, cap); });
  m.gamma_cap = cap;
  m.F = RateFunction::of_density([](double d) { return 1.0 - d; });
  finish(m, p);
  return m;
}

DemographyModel clumping_model(const PresetParams& p) {
  PresetParams q = p;
  q.diffusion = 0.5 * 0.2 * 0.2;
  DemographyModel m = base("clumping", q);
  m.kernel_gamma = GaussianKernel{p.dim, 9.0};
  m.kernel_F = m.kernel_gamma;
  m.gamma = RateFunction::of_density([](double d) { return 3.0 / (1.0 + d); });
  m.gamma_cap = 3.0;
  const double theta = p.theta;
  // mu = r gamma - F/theta = 0.3 exactly.
  m.F = RateFunction::of_density([theta](double d) { return theta * (3.0 / (1.0 + d) - 0.3); });
  finish(m, q);
  return m;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"logistic", "fkpp", "allen_cahn", "pme", "clumping",
                                              "critical"};
  return names;
}

DemographyModel model_by_name(const std::string& name, const PresetParams& p) {
  if (name == "logistic") return logistic_model(p);
  if (name == "fkpp") return fkpp_model(p);
  if (name == "allen_cahn") return allen_cahn_model(p);
  if (name == "pme") return pme_model(p);
  if (name == "clumping") return clumping_model(p);
  if (name == "critical") return critical_model(p);
  throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace popdyn
