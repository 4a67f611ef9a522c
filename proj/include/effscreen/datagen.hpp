#pragma once

#include <vector>

#include "effscreen/design.hpp"
#include "effscreen/dispersion.hpp"
#include "effscreen/rng.hpp"

namespace effscreen {

// Draw one response vector y = X*beta + eps, eps_i ~ N(0, sigma_i^2) with the
// per-run variances of the multiplicative dispersion model. Bit-reproducible
// for a fixed SeedSpec.
std::vector<double> generate_response(const FactorialDesign& design, const ScenarioModel& model,
                                      const SeedSpec& seed);

}  // namespace effscreen
