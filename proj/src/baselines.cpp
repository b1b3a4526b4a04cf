#include "drro/baselines.hpp"

#include "drro/controller_io.hpp"
#include "drro/errors.hpp"
#include "drro/resolvent.hpp"
#include "json_matrix.hpp"

namespace drro {

ControllerSamples h2_controller(const PlantContext& ctx) {
  const auto& f = ctx.factors;
  GridSamples K = f.DeltaInv * f.Upart;
  ControllerSamples out{std::move(K), Provenance::kH2, std::nullopt, std::nullopt};
  check_controller(out, 1e-6);
  return out;
}

ControllerSamples ro_limit_controller(const PlantContext& ctx, double gamma_ro, double eps,
                                      const GammaSearchConfig& cfg) {
  if (!(eps > 0.0)) fail(ErrorKind::kInvalidArgument, "RO offset must be positive");
  SynthesisConfig sc;
  sc.gamma = gamma_ro > 0.0 ? (1.0 + eps) * gamma_ro : eps;
  sc.fp_tol = cfg.fp_tol;
  sc.max_iters = cfg.max_iters;
  SynthesisResult res = synthesize(sc, ctx);
  res.controller.provenance = Provenance::kRO;
  return std::move(res.controller);
}

GridSamples sample_state_space(const Matrix& Ac, const Matrix& Bc, const Matrix& Cc,
                               const Matrix& Dc, const FrequencyGrid& grid) {
  const Eigen::Index m = Ac.rows();
  if (Ac.cols() != m || Bc.rows() != m || Cc.cols() != m || Cc.rows() != Dc.rows() ||
      Bc.cols() != Dc.cols()) {
    fail(ErrorKind::kDimensionMismatch, "inconsistent state-space controller shapes");
  }
  const CMatrix b = Bc.cast<Complex>();
  const CMatrix c = Cc.cast<Complex>();
  const CMatrix dd = Dc.cast<Complex>();
  return GridSamples::generate(grid, static_cast<int>(Dc.rows()), static_cast<int>(Dc.cols()),
                               [&](Complex z) -> CMatrix {
                                 if (m == 0) return dd;
                                 return c * resolvent_solve(z, Ac, b) + dd;
                               });
}

namespace {

// Accepts [] for a static controller.
Matrix optional_matrix(const detail::json& j, const std::string& key, Eigen::Index rows,
                       Eigen::Index cols) {
  if (j.contains(key) && j.at(key).is_array() && j.at(key).empty()) return Matrix(rows, cols);
  return detail::matrix_from_json(j, key);
}

}  // namespace

ImportedController import_controller(const std::filesystem::path& file, const PlantContext& ctx) {
  const std::string text = read_file(file);
  ImportedController out;
  out.source = file.string();
  const int d = ctx.plant().d();
  const int p = ctx.plant().p();

  if (is_controller_cache(text)) {
    ControllerCache cache = controller_from_json(text);
    if (cache.plant_hash != ctx.plant_hash) {
      fail(ErrorKind::kInvalidArgument,
           "controller cache " + file.string() + " was built for a different plant");
    }
    require_same_grid(cache.controller.K.grid(), ctx.grid, "import_controller");
    out.samples = std::move(cache.controller);
  } else {
    const detail::json j = detail::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      fail(ErrorKind::kParseError, file.string() + " is not a JSON object");
    }
    const Matrix Dc = detail::matrix_from_json(j, "D_c");
    const bool dynamic = !(j.contains("A_c") && j["A_c"].is_array() && j["A_c"].empty());
    const Matrix Ac = dynamic ? detail::matrix_from_json(j, "A_c") : Matrix(0, 0);
    const Matrix Bc = optional_matrix(j, "B_c", Ac.rows(), Dc.cols());
    const Matrix Cc = optional_matrix(j, "C_c", Dc.rows(), Ac.rows());
    if (Dc.rows() != d || Dc.cols() != p) {
      fail(ErrorKind::kDimensionMismatch, "controller must map the disturbance to the input");
    }
    GridSamples K = sample_state_space(Ac, Bc, Cc, Dc, ctx.grid);
    // Physical input u to weighted input R^{1/2} u.
    const CMatrix sqrt_r = ctx.wp.sqrtR.cast<Complex>();
    for (std::size_t i = 0; i < K.size(); ++i) K[i] = sqrt_r * K[i];
    out.samples = ControllerSamples{std::move(K), Provenance::kImported, std::nullopt, std::nullopt};
  }
  if (out.samples.K.rows() != d || out.samples.K.cols() != p) {
    fail(ErrorKind::kDimensionMismatch, "imported controller has the wrong shape");
  }
  check_controller(out.samples, kImportLeakTol);
  return out;
}

}  // namespace drro
