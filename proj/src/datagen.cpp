#include "effscreen/datagen.hpp"

#include <cmath>

#include "effscreen/errors.hpp"

namespace effscreen {

std::vector<double> generate_response(const FactorialDesign& design, const ScenarioModel& model,
                                      const SeedSpec& seed) {
  if (model.k != design.k) {
    throw validation_error("scenario model k does not match design k");
  }
  validate_model(model);
  const std::vector<double> var = variance_vector(design, model.dispersion);
  std::vector<double> y(design.n, model.location.intercept);
  for (const auto& [idx, beta] : model.location.betas) {
    if (beta == 0.0) continue;
    for (int run = 0; run < design.n; ++run) {
      y[run] += design.at(run, idx) * beta;
    }
  }
  CounterRng rng = CounterRng::from(seed, kDomainResponse);
  for (int run = 0; run < design.n; ++run) {
    y[run] += std::sqrt(var[run]) * rng.next_normal();
  }
  return y;
}

}  // namespace effscreen
