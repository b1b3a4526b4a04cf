#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "drro/errors.hpp"
#include "test_util.hpp"

using namespace drro;
using drro::testing::data_path;
using drro::testing::scalar_plant;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kInvalidArgument;
}

}  // namespace

TEST(PlantModel, LoadsReferencePlants) {
  const PlantModel p = load_plant(data_path("two_state_plant.json"));
  EXPECT_EQ(p.n(), 2);
  EXPECT_EQ(p.d(), 1);
  EXPECT_EQ(p.p(), 1);
  EXPECT_DOUBLE_EQ(p.A()(0, 1), 0.2);
  const PlantModel again = parse_plant(plant_to_json(p));
  EXPECT_EQ(again.content_hash(), p.content_hash());
}

TEST(PlantModel, ValidationErrors) {
  EXPECT_EQ(kind_of([] { load_plant("/nonexistent/plant.json"); }), ErrorKind::kParseError);
  EXPECT_EQ(kind_of([] { parse_plant("{not json"); }), ErrorKind::kParseError);
  EXPECT_EQ(kind_of([] { parse_plant(R"({"A": [[1]]})"); }), ErrorKind::kParseError);
  EXPECT_EQ(kind_of([] {
              parse_plant(R"({"A":[[0.5]],"B_u":[[1]],"B_w":[[1,1]],"Q":[[1]],"R":[[1]]})");
            }),
            ErrorKind::kDisturbanceNotScalar);
  EXPECT_EQ(kind_of([] { scalar_plant(0.5, 1, 1, -1.0); }), ErrorKind::kInvalidArgument);
  // Unstable mode not reachable from the input.
  EXPECT_EQ(kind_of([] { scalar_plant(2.0, 0.0, 1.0); }), ErrorKind::kNotStabilizable);
  EXPECT_EQ(kind_of([] {
              parse_plant(R"({"A":[[0.5,0]],"B_u":[[1]],"B_w":[[1]],"Q":[[1]],"R":[[1]]})");
            }),
            ErrorKind::kDimensionMismatch);
}

TEST(PlantModel, HashTracksContent) {
  const auto a = scalar_plant(0.5, 1, 1);
  const auto b = scalar_plant(0.5000000001, 1, 1);
  EXPECT_NE(a.content_hash(), b.content_hash());
  EXPECT_EQ(a.content_hash(), scalar_plant(0.5, 1, 1).content_hash());
}

TEST(FrequencyGrid, PointsAndLimits) {
  const FrequencyGrid g(8);
  EXPECT_EQ(g.size(), 256u);
  EXPECT_EQ(g.z(0), Complex(1.0, 0.0));
  EXPECT_EQ(g.z(64), Complex(0.0, 1.0));
  EXPECT_EQ(g.z(128), Complex(-1.0, 0.0));
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_EQ(g.z(g.size() - i), std::conj(g.z(i)));
  EXPECT_THROW(FrequencyGrid(7), Error);
  EXPECT_THROW(FrequencyGrid(21), Error);
}

TEST(PlantResponses, MatchTruncatedMarkovSeries) {
  // F = sqrtQ sum_k A^k B_u z^{-k-1} R^{-1/2} for a stable A.
  const PlantModel p = load_plant(data_path("two_state_plant.json"));
  const FrequencyGrid g(8);
  const PlantResponses pr = eval_plant_responses(weight_plant(p), g);
  for (std::size_t i : {0ul, 17ul, 100ul, 200ul}) {
    const Complex zinv = 1.0 / g.z(i);
    CMatrix f = CMatrix::Zero(2, 1), gg = CMatrix::Zero(2, 1);
    Matrix ak = Matrix::Identity(2, 2);
    Complex zk = zinv;
    for (int k = 0; k < 200; ++k) {
      f += (ak * p.B_u()).cast<Complex>() * zk;
      gg += (ak * p.B_w()).cast<Complex>() * zk;
      ak = ak * p.A();
      zk *= zinv;
    }
    EXPECT_LT((f - pr.F[i]).norm(), 1e-12);
    EXPECT_LT((gg - pr.G[i]).norm(), 1e-12);
  }
}

TEST(GridSamples, LagEnergyOfPureDelays) {
  const FrequencyGrid g(8);
  auto delay = [&](int lag) {
    return GridSamples::generate(g, 1, 1, [&](Complex z) {
      CMatrix m(1, 1);
      m(0, 0) = std::pow(z, -lag);
      return m;
    });
  };
  EXPECT_LT(causal_leak(delay(3)), 1e-14);
  EXPECT_NEAR(causal_leak(delay(-3)), 1.0, 1e-14);
  EXPECT_LT(anticausal_leak(delay(-1)), 1e-14);
  EXPECT_NEAR(anticausal_leak(delay(0)), 1.0, 1e-14);
  EXPECT_LT(conjugate_symmetry_error(delay(5)), 1e-14);
}

TEST(GridSamples, CsvFormat) {
  const FrequencyGrid g(8);
  GridSamples s(g, 1, 1);
  s[1](0, 0) = Complex(0.1, -2.0);
  std::ostringstream os;
  write_samples_csv(os, s);
  std::istringstream is(os.str());
  std::string header, row0, row1;
  std::getline(is, header);
  std::getline(is, row0);
  std::getline(is, row1);
  EXPECT_EQ(header, "omega,re(0,0),im(0,0)");
  EXPECT_EQ(row1.substr(row1.find(',') + 1), "0.10000000000000001,-2");
}
