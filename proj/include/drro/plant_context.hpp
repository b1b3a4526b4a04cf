#pragma once

#include <cstdint>
#include <vector>

#include "drro/core_model.hpp"
#include "drro/riccati_factors.hpp"

namespace drro {

/// Per-frequency operators of the B̄ fixed point that do not depend on B̄ or
/// gamma, precomputed once.
struct AdjointResolvents {
  std::vector<CMatrix> s_rows;  // Cbar (e^{-jw} I - Abar)^{-1}, d x n
  std::vector<CMatrix> b_cols;  // (I - e^{jw} Abar)^{-1} Dbar, n x p
};

/// Everything derived from a plant on a given grid. Immutable once built and
/// safe to share between threads.
struct PlantContext {
  WeightedPlant wp;
  FrequencyGrid grid;
  PlantResponses responses;
  RiccatiData riccati;
  AdjointTriple triple;
  CanonicalFactors factors;
  AdjointResolvents resolvents;
  std::uint64_t plant_hash = 0;

  const PlantModel& plant() const { return wp.plant; }
};

PlantContext prepare_plant(const PlantModel& plant, const FrequencyGrid& grid);

}  // namespace drro
