#pragma once

#include <filesystem>
#include <string>

#include "drro/gamma_search.hpp"
#include "drro/synthesis.hpp"

namespace drro {

// K_H2 = DeltaInv Upart, the nominal (white-noise) optimal causal controller.
ControllerSamples h2_controller(const PlantContext& ctx);

inline constexpr double kRoOffset = 1e-3;

// K_gamma at gamma = (1 + eps) gamma_ro, tagged RO.
ControllerSamples ro_limit_controller(const PlantContext& ctx, double gamma_ro,
                                      double eps = kRoOffset, const GammaSearchConfig& cfg = {});

struct ImportedController {
  ControllerSamples samples;
  std::string source;
};

inline constexpr double kImportLeakTol = 1e-4;

/// Loads a controller cache (must match the plant hash and grid) or a
/// state-space file {"A_c","B_c","C_c","D_c"} for u = K w in physical input
/// units, sampled on the grid and mapped to weighted inputs by R^{1/2}.
ImportedController import_controller(const std::filesystem::path& file, const PlantContext& ctx);

// K(z) = C_c (zI - A_c)^{-1} B_c + D_c on the grid.
GridSamples sample_state_space(const Matrix& Ac, const Matrix& Bc, const Matrix& Cc,
                               const Matrix& Dc, const FrequencyGrid& grid);

}  // namespace drro
