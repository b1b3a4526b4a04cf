#include <gtest/gtest.h>

#include "drro/baselines.hpp"
#include "drro/errors.hpp"
#include "drro/gamma_search.hpp"
#include "drro/synthesis.hpp"
#include "test_util.hpp"

using namespace drro;
using drro::testing::toy_ctx;
using drro::testing::two_state_ctx;

namespace {

// Square of the largest Hankel singular value of Cbar (z^{-1} I - Abar)^{-1} Dbar.
double hankel_sq(const AdjointTriple& t) {
  const Eigen::Index n = t.Abar.rows();
  Matrix wc = Matrix::Zero(n, n), wo = Matrix::Zero(n, n);
  for (int k = 0; k < 5000; ++k) {
    wc = t.Abar * wc * t.Abar.transpose() + t.Dbar * t.Dbar.transpose();
    wo = t.Abar.transpose() * wo * t.Abar + t.Cbar.transpose() * t.Cbar;
  }
  return (wc * wo).eigenvalues().real().maxCoeff();
}

SynthesisResult synth_at(const PlantContext& ctx, double gamma) {
  SynthesisConfig c;
  c.gamma = gamma;
  return synthesize(c, ctx);
}

}  // namespace

TEST(Synthesis, BbarOfFirstOrderFactor) {
  // L = 1 + 0.5 z^{-1}  =>  B = Dbar + 0.5 Abar Dbar.
  const PlantContext& ctx = two_state_ctx();
  ScalarFactor L{ctx.grid, std::vector<Complex>(ctx.grid.size())};
  for (std::size_t i = 0; i < L.values.size(); ++i) L.values[i] = 1.0 + 0.5 / ctx.grid.z(i);
  const Matrix b = bbar_from_l(L, ctx.triple);
  const Matrix expect = ctx.triple.Dbar + 0.5 * ctx.triple.Abar * ctx.triple.Dbar;
  EXPECT_LT((b - expect).norm(), 1e-13);
}

TEST(Synthesis, SMinusIsStrictlyAnticausal) {
  const PlantContext& ctx = two_state_ctx();
  Matrix b(2, 1);
  b << 0.3, -1.1;
  const GridSamples S = s_minus_from_bbar(b, ctx.triple, ctx.grid);
  EXPECT_LT(anticausal_leak(S), 1e-12);
  for (std::size_t i = 0; i < S.size(); i += 97) {
    EXPECT_LT((S[i] - ctx.resolvents.s_rows[i] * b.cast<Complex>()).norm(), 1e-13);
  }
}

TEST(Synthesis, NFromSFormula) {
  const FrequencyGrid g(8);
  GridSamples S(g, 1, 1);
  for (std::size_t i = 0; i < g.size(); ++i) S[i](0, 0) = 2.0 * std::cos(g.omega(i));
  const ScalarSpectrum N = n_from_s(S, 0.5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s2 = std::norm(S[i](0, 0));
    // N solves N^2... equivalently sqrt(N)(sqrt(N) - 1) = |S|^2 / gamma.
    EXPECT_NEAR(std::sqrt(N[i]) * (std::sqrt(N[i]) - 1.0), s2 / 0.5, 1e-12 * (1 + s2));
    EXPECT_GE(N[i], 1.0);
  }
}

TEST(Synthesis, CertificatesAtTwiceRoBound) {
  const PlantContext& ctx = two_state_ctx();
  const double gamma = 2.0 * hankel_sq(ctx.triple);
  const SynthesisResult res = synth_at(ctx, gamma);
  const SynthesisState& st = res.state;
  EXPECT_LT(st.fixed_point_residual, 1e-9);
  EXPECT_LT(st.kkt_residual, 1e-6);
  EXPECT_LT(st.l_causal_leak, 1e-6);
  EXPECT_LT(st.k_causal_leak, 1e-6);
  EXPECT_LT(st.anticausal_consistency, 1e-6);
  // Independent re-evaluation of the map at the returned point.
  EXPECT_LT((fixed_point_map(ctx, gamma, st.Bbar) - st.Bbar).norm(), 1e-8);
  const RegretSpectrum C = regret_spectrum(res.controller, ctx);
  for (std::size_t i = 0; i < C.size(); i += 31) {
    EXPECT_NEAR(C[i], st.S_minus[i].squaredNorm() / st.Nspec[i], 1e-12 * (1 + C[i]));
  }
  EXPECT_LT(C.sup(), gamma);
}

TEST(Synthesis, LargeGammaRecoversH2) {
  for (const PlantContext* ctx : {&toy_ctx(), &two_state_ctx()}) {
    const SynthesisResult res = synth_at(*ctx, 1e12);
    const ControllerSamples h2 = h2_controller(*ctx);
    EXPECT_LT((res.controller.K - h2.K).sup_abs(), 1e-6);
  }
}

TEST(Synthesis, BelowRoBoundIsInfeasible) {
  const PlantContext& ctx = two_state_ctx();
  const double ro = hankel_sq(ctx.triple);
  for (double f : {0.25, 0.9, 0.999}) {
    try {
      synth_at(ctx, f * ro);
      ADD_FAILURE() << "converged at " << f << " gamma_ro";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kGammaInfeasible) << f;
    }
  }
  EXPECT_NO_THROW(synth_at(ctx, 1.001 * ro));
}

TEST(Synthesis, WarmStartReachesSameFixedPoint) {
  const PlantContext& ctx = two_state_ctx();
  const double gamma = 1.5 * hankel_sq(ctx.triple);
  const SynthesisResult cold = synth_at(ctx, gamma);
  SynthesisConfig c;
  c.gamma = gamma;
  const SynthesisResult warm = synthesize(c, ctx, Matrix(1.01 * cold.state.Bbar));
  EXPECT_LT((warm.state.Bbar - cold.state.Bbar).norm(), 1e-8 * cold.state.Bbar.norm());
  EXPECT_THROW(synthesize(c, ctx, Matrix::Zero(3, 1)), Error);
}

TEST(Synthesis, RejectsBadConfig) {
  SynthesisConfig c;
  c.gamma = -1.0;
  EXPECT_THROW(synthesize(c, toy_ctx()), Error);
  c.gamma = 1.0;
  c.max_iters = 0;
  EXPECT_THROW(synthesize(c, toy_ctx()), Error);
}

TEST(ImpulseResponse, H2TapsAreRealAndDecay) {
  const ControllerSamples h2 = h2_controller(two_state_ctx());
  const ImpulseResponse ir = impulse_response(h2, 512);
  EXPECT_EQ(ir.taps.size(), 512u);
  EXPECT_LT(ir.tail_energy, 1e-20);
  const ImpulseResponse shortr = impulse_response(h2, 2);
  EXPECT_GT(shortr.tail_energy, 0.0);
  EXPECT_THROW(impulse_response(h2, 0), Error);
}
