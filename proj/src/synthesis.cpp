#include "drro/synthesis.hpp"

#include <algorithm>
#include <cmath>

#include "drro/errors.hpp"
#include "drro/resolvent.hpp"

namespace drro {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::kDrRo: return "DrRo";
    case Provenance::kH2: return "H2";
    case Provenance::kRO: return "RO";
    case Provenance::kImported: return "Imported";
  }
  return "Imported";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "DrRo") return Provenance::kDrRo;
  if (s == "H2") return Provenance::kH2;
  if (s == "RO") return Provenance::kRO;
  if (s == "Imported") return Provenance::kImported;
  fail(ErrorKind::kParseError, "unknown controller provenance '" + s + "'");
}

void check_controller(const ControllerSamples& k, double max_leak) {
  for (std::size_t i = 0; i < k.K.size(); ++i) {
    if (!k.K[i].allFinite()) {
      fail(ErrorKind::kNonFiniteSample, "controller sample " + std::to_string(i) + " not finite");
    }
  }
  const double leak = causal_leak(k.K);
  if (leak > max_leak) {
    fail(ErrorKind::kCausalLeakExceeded,
         "controller causal leak " + std::to_string(leak) + " exceeds " + std::to_string(max_leak));
  }
}

GridSamples s_minus_from_bbar(const Matrix& Bbar, const AdjointTriple& triple,
                              const FrequencyGrid& grid) {
  const CMatrix cbar = triple.Cbar.cast<Complex>();
  const CMatrix b = Bbar.cast<Complex>();
  return GridSamples::generate(grid, static_cast<int>(triple.Cbar.rows()),
                               static_cast<int>(Bbar.cols()), [&](Complex z) -> CMatrix {
                                 return cbar * resolvent_solve(1.0 / z, triple.Abar, b);
                               });
}

namespace {

double f2(double s2, double gamma) {
  const double a = 1.0 + std::sqrt(1.0 + 4.0 * s2 / gamma);
  return 0.25 * a * a;
}

ScalarSpectrum n_from_norms(const FrequencyGrid& grid, const std::vector<double>& s2, double gamma) {
  std::vector<double> n(s2.size());
  for (std::size_t i = 0; i < s2.size(); ++i) n[i] = f2(s2[i], gamma);
  return ScalarSpectrum(grid, std::move(n));
}

Matrix bbar_from_cols(const std::vector<CMatrix>& cols, const std::vector<Complex>& l) {
  const std::size_t n = cols.size();
  const Eigen::Index rows = cols.front().rows();
  const Eigen::Index nc = cols.front().cols();
  Matrix re(rows, nc), im(rows, nc);
  std::vector<Complex> buf(n);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < nc; ++c) {
      for (std::size_t i = 0; i < n; ++i) buf[i] = cols[i](r, c) * l[i];
      const Complex m = pairwise_sum(std::span<const Complex>(buf)) / static_cast<double>(n);
      re(r, c) = m.real();
      im(r, c) = m.imag();
    }
  }
  if (!re.allFinite() || !im.allFinite()) {
    fail(ErrorKind::kNumericalBreakdown, "non-finite B̄ update");
  }
  const double tol = 1e-6 * std::max(1.0, re.cwiseAbs().maxCoeff());
  if (im.cwiseAbs().maxCoeff() > tol) {
    fail(ErrorKind::kImaginaryLeak,
         "imaginary part of B̄ update " + std::to_string(im.cwiseAbs().maxCoeff()));
  }
  return re;
}

struct MapEval {
  std::vector<CMatrix> S;
  std::vector<double> s2;
  Matrix next;
};

MapEval eval_map(const PlantContext& ctx, double gamma, const Matrix& Bbar) {
  const auto& rows = ctx.resolvents.s_rows;
  const std::size_t n = rows.size();
  MapEval out;
  out.S.resize(n);
  out.s2.resize(n);
  const CMatrix b = Bbar.cast<Complex>();
  for (std::size_t i = 0; i < n; ++i) {
    out.S[i] = rows[i] * b;
    out.s2[i] = out.S[i].squaredNorm();
  }
  const ScalarSpectrum spec = n_from_norms(ctx.grid, out.s2, gamma);
  const ScalarFactor l = spectral_factor_dft(spec);
  out.next = bbar_from_cols(ctx.resolvents.b_cols, l.values);
  return out;
}

double rel_residual(const Matrix& phi, const Matrix& b) {
  return (phi - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

ScalarSpectrum n_from_s(const GridSamples& S, double gamma) {
  if (!(gamma > 0.0)) fail(ErrorKind::kInvalidArgument, "gamma must be positive");
  std::vector<double> s2(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) s2[i] = S[i].squaredNorm();
  return n_from_norms(S.grid(), s2, gamma);
}

Matrix bbar_from_l(const ScalarFactor& L, const AdjointTriple& triple) {
  std::vector<CMatrix> cols(L.values.size());
  const CMatrix dbar = triple.Dbar.cast<Complex>();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const Complex z = L.grid.z(i);
    cols[i] = resolvent_solve(1.0 / z, triple.Abar, dbar) / z;
  }
  return bbar_from_cols(cols, L.values);
}

Matrix fixed_point_map(const PlantContext& ctx, double gamma, const Matrix& Bbar) {
  if (!(gamma > 0.0)) fail(ErrorKind::kInvalidArgument, "gamma must be positive");
  return eval_map(ctx, gamma, Bbar).next;
}

ControllerSamples controller_from_state(const PlantContext& ctx, const SynthesisState& st,
                                        double gamma) {
  const auto& f = ctx.factors;
  GridSamples K(ctx.grid, f.Kcirc.rows(), f.Kcirc.cols());
  for (std::size_t i = 0; i < K.size(); ++i) {
    K[i] = f.Kcirc[i] - f.DeltaInv[i] * st.S_minus[i] / st.Lfac.values[i];
  }
  return ControllerSamples{std::move(K), Provenance::kDrRo, gamma, std::nullopt};
}

namespace {

// Flattened view of B̄ for the Newton solve.
Vector flat(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }
Matrix unflat(const Vector& v, Eigen::Index r, Eigen::Index c) {
  return Eigen::Map<const Matrix>(v.data(), r, c);
}

constexpr int kMaxNewtonFailures = 6;
// Below the RO bound the iteration creeps without converging; no halving of
// the best residual within this many iterations counts as infeasible.
constexpr int kStagnationWindow = 50;

bool is_infeasibility_signal(ErrorKind k) {
  return k == ErrorKind::kIllConditionedSpectrum || k == ErrorKind::kNonPositiveSpectrum ||
         k == ErrorKind::kImaginaryLeak || k == ErrorKind::kNumericalBreakdown;
}

}  // namespace

SynthesisResult synthesize(const SynthesisConfig& cfg, const PlantContext& ctx,
                           const std::optional<Matrix>& warm_start) {
  if (!(cfg.gamma > 0.0) || !std::isfinite(cfg.gamma)) {
    fail(ErrorKind::kInvalidArgument, "gamma must be positive and finite");
  }
  if (!(cfg.fp_tol > 0.0) || cfg.max_iters < 1 || !(cfg.damping > 0.0 && cfg.damping <= 1.0)) {
    fail(ErrorKind::kInvalidArgument, "invalid synthesis tolerances");
  }
  const double gamma = cfg.gamma;
  const Matrix& dbar = ctx.triple.Dbar;
  const Eigen::Index nr = dbar.rows();
  const Eigen::Index nc = dbar.cols();
  const double blowup = 1e12 * std::max(1.0, dbar.norm());

  Matrix b = dbar;
  if (warm_start) {
    if (warm_start->rows() != nr || warm_start->cols() != nc) {
      fail(ErrorKind::kDimensionMismatch, "warm start has wrong shape");
    }
    b = *warm_start;
  }

  SynthesisState st;
  auto infeasible = [&](const std::string& why) {
    fail(ErrorKind::kGammaInfeasible,
         "gamma = " + std::to_string(gamma) + " infeasible: " + why);
  };
  auto phi = [&](const Matrix& x) -> Matrix {
    try {
      return eval_map(ctx, gamma, x).next;
    } catch (const Error& e) {
      if (is_infeasibility_signal(e.kind())) infeasible(e.what());
      throw;
    }
  };
  // Trial evaluation during line search: failures just reject the trial.
  auto try_phi = [&](const Matrix& x) -> std::optional<Matrix> {
    try {
      return eval_map(ctx, gamma, x).next;
    } catch (const Error& e) {
      if (is_infeasibility_signal(e.kind())) return std::nullopt;
      throw;
    }
  };

  Matrix pb = phi(b);
  double res = rel_residual(pb, b);
  st.history.push_back(res);
  double beta = cfg.damping;
  Matrix prev_step;
  int newton_failures = 0;
  bool converged = res < cfg.fp_tol;
  double best = res;
  int best_iter = 0;

  while (!converged && st.iters < cfg.max_iters) {
    ++st.iters;
    const Vector x = flat(b);
    const Vector fx = flat(pb) - x;
    const Eigen::Index m = x.size();
    bool advanced = false;

    // Newton with finite-difference Jacobian.
    const double h = 1e-7 * std::max(1.0, b.norm());
    Matrix jac(m, m);
    bool jac_ok = true;
    for (Eigen::Index j = 0; j < m && jac_ok; ++j) {
      Vector xp = x;
      xp(j) += h;
      const auto pj = try_phi(unflat(xp, nr, nc));
      if (!pj) {
        jac_ok = false;
        break;
      }
      jac.col(j) = ((flat(*pj) - xp) - fx) / h;
    }
    if (jac_ok) {
      Eigen::FullPivLU<Matrix> lu(jac);
      if (lu.isInvertible()) {
        const Vector dx = lu.solve(-fx);
        const double base = fx.norm();
        for (double lam = 1.0; lam >= 1.0 / 64.0; lam *= 0.5) {
          const Matrix bt = unflat(x + lam * dx, nr, nc);
          if (!bt.allFinite()) continue;
          const auto pt = try_phi(bt);
          if (pt && (*pt - bt).norm() < base) {
            prev_step = bt - b;
            b = bt;
            pb = *pt;
            advanced = true;
            ++st.newton_steps;
            newton_failures = 0;
            break;
          }
        }
      }
    }

    if (!advanced) {
      ++newton_failures;
      if (newton_failures >= kMaxNewtonFailures) {
        infeasible("Newton iteration stalled " + std::to_string(newton_failures) + " times");
      }
      const Matrix step = beta * (pb - b);
      if (prev_step.size() == step.size() && (prev_step.array() * step.array()).sum() < 0.0) {
        beta = std::max(0.1, 0.5 * beta);
      }
      prev_step = step;
      b += step;
      pb = phi(b);
      ++st.relaxation_steps;
    }

    if (!b.allFinite() || b.norm() > blowup) infeasible("B̄ diverged");
    res = rel_residual(pb, b);
    st.history.push_back(res);
    converged = res < cfg.fp_tol;
    if (res < 0.5 * best) {
      best = res;
      best_iter = st.iters;
    } else if (!converged && st.iters - best_iter >= kStagnationWindow) {
      infeasible("no progress in " + std::to_string(kStagnationWindow) +
                 " iterations, residual " + std::to_string(res));
    }
  }
  if (!converged) {
    fail(ErrorKind::kMaxItersExceeded,
         "fixed point not reached after " + std::to_string(st.iters) +
             " iterations, residual " + std::to_string(res));
  }

  // Final state and certificates at the returned B̄.
  const MapEval fin = [&] {
    try {
      return eval_map(ctx, gamma, b);
    } catch (const Error& e) {
      if (is_infeasibility_signal(e.kind())) infeasible(e.what());
      throw;
    }
  }();
  st.Bbar = b;
  st.fixed_point_residual = rel_residual(fin.next, b);
  st.S_minus = GridSamples(ctx.grid, fin.S);
  st.Nspec = n_from_norms(ctx.grid, fin.s2, gamma);
  st.Lfac = spectral_factor_dft(st.Nspec);
  const FactorResiduals fr = factor_residuals(st.Nspec, st.Lfac);
  st.kkt_residual = fr.magnitude_err;
  st.l_causal_leak = fr.causal_leak;

  // S should equal the strictly anticausal part of Delta Kcirc L.
  {
    const auto& f = ctx.factors;
    GridSamples x(ctx.grid, f.Kcirc.rows(), f.Kcirc.cols());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = f.Delta[i] * f.Kcirc[i] * st.Lfac.values[i];
    const std::size_t n = x.size();
    double worst = 0.0;
    for (int r = 0; r < x.rows(); ++r) {
      for (int c = 0; c < x.cols(); ++c) {
        std::vector<Complex> coef = idft(x.entry(r, c));
        for (std::size_t t = 0; t <= n / 2; ++t) coef[t] = 0.0;
        const std::vector<Complex> proj = dft(coef);
        for (std::size_t i = 0; i < n; ++i) {
          worst = std::max(worst, std::abs(proj[i] - st.S_minus[i](r, c)));
        }
      }
    }
    st.anticausal_consistency = worst / std::max(1e-300, st.S_minus.sup_abs());
    if (st.S_minus.sup_abs() == 0.0) st.anticausal_consistency = worst;
  }

  SynthesisResult out{std::move(st), ControllerSamples{}};
  out.controller = controller_from_state(ctx, out.state, gamma);
  out.state.k_causal_leak = causal_leak(out.controller.K);
  if (out.state.k_causal_leak > 1e-6) {
    fail(ErrorKind::kNumericalBreakdown,
         "controller causal leak " + std::to_string(out.state.k_causal_leak));
  }
  double sup_c = 0.0;
  for (std::size_t i = 0; i < out.controller.K.size(); ++i) {
    const CMatrix e = ctx.factors.Delta[i] * (out.controller.K[i] - ctx.factors.Kcirc[i]);
    sup_c = std::max(sup_c, e.squaredNorm());
  }
  if (!(sup_c < gamma)) {
    infeasible("sup C_K = " + std::to_string(sup_c) + " >= gamma");
  }
  return out;
}

ImpulseResponse impulse_response(const ControllerSamples& k, int lags) {
  const std::size_t n = k.K.size();
  if (lags < 1 || static_cast<std::size_t>(lags) > n / 2) {
    fail(ErrorKind::kInvalidArgument, "impulse response length out of range");
  }
  const std::vector<CMatrix> coef = k.K.lag_coefficients();
  ImpulseResponse out;
  double kept = 0.0, tail = 0.0;
  for (std::size_t t = 0; t < n / 2; ++t) {
    const double e = coef[t].squaredNorm();
    if (t < static_cast<std::size_t>(lags)) {
      out.taps.push_back(coef[t].real());
      kept += e;
    } else {
      tail += e;
    }
  }
  out.tail_energy = (kept + tail) > 0.0 ? tail / (kept + tail) : 0.0;
  return out;
}

}  // namespace drro
