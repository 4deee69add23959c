#pragma once

#include <json.hpp>

#include "shiftlab/toy.hpp"

namespace shiftlab {

/// Named scenario generators. Targets (halfspace direction, threshold,
/// discrete tables) are fixed at generation time from the given stream;
/// the returned samplers are then deterministic per draw stream.
///
/// Names: sphere-uniform, gaussian-normalized, subspace-concentrated,
/// boundary-concentrated, discrete-k. Throws UnknownScenario for anything
/// else and ConfigInvalid for unknown parameter fields.
ShiftScenario generate_scenario(const std::string& name,
                                const nlohmann::json& params, Rng& rng);

/// Uniform draw from the unit sphere in R^n.
Point uniform_sphere_point(int n, Rng& rng);

}  // namespace shiftlab
