#include "drro/plant_context.hpp"

#include "drro/resolvent.hpp"

namespace drro {

PlantContext prepare_plant(const PlantModel& plant, const FrequencyGrid& grid) {
  WeightedPlant wp = weight_plant(plant);
  PlantResponses responses = eval_plant_responses(wp, grid);
  RiccatiData rd = solve_dare(wp);
  AdjointTriple triple = adjoint_triple(rd, wp);
  CanonicalFactors factors = canonical_factors(rd, wp, responses);

  AdjointResolvents res;
  res.s_rows.reserve(grid.size());
  res.b_cols.reserve(grid.size());
  const CMatrix cbar = triple.Cbar.cast<Complex>();
  const CMatrix dbar = triple.Dbar.cast<Complex>();
  const Matrix abar_t = triple.Abar;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex z = grid.z(i);
    // C (z^{-1} I - Abar)^{-1} computed as a transposed solve.
    const CMatrix rows =
        resolvent_solve(1.0 / z, abar_t.transpose(), cbar.transpose()).transpose();
    // (I - z Abar)^{-1} D = z^{-1} (z^{-1} I - Abar)^{-1} D
    const CMatrix cols = resolvent_solve(1.0 / z, abar_t, dbar) / z;
    res.s_rows.push_back(rows);
    res.b_cols.push_back(cols);
  }

  const std::uint64_t hash = plant.content_hash();
  return PlantContext{std::move(wp), grid,          std::move(responses), std::move(rd),
                      std::move(triple), std::move(factors), std::move(res), hash};
}

}  // namespace drro
