#include <gtest/gtest.h>
#include <torch/torch.h>

#include "oracles.hpp"
#include "strokegestalt/error.hpp"
#include "strokegestalt/losses.hpp"

namespace sg = strokegestalt;

TEST(PsmLoss, Identities) {
  const auto x = torch::rand({2, 3, 8, 8});
  EXPECT_EQ(sg::psm_loss(x, x, sg::Norm::kL2).item<double>(), 0.0);
  EXPECT_EQ(sg::psm_loss(x, x, sg::Norm::kL1).item<double>(), 0.0);
  EXPECT_DOUBLE_EQ(sg::psm_loss(torch::zeros({1, 3, 4, 4}), torch::full({1, 3, 4, 4}, 0.5), sg::Norm::kL2).item<double>(),
                   0.25);
}

TEST(PsmLoss, MatchesLoopOracle) {
  torch::manual_seed(0);
  for (int i = 0; i < 10; ++i) {
    const auto a = torch::rand({2, 3, 6, 10}, torch::kDouble), b = torch::rand({2, 3, 6, 10}, torch::kDouble);
    EXPECT_NEAR(sg::psm_loss(a, b, sg::Norm::kL2).item<double>(), oracle::mean_diff(a, b, false), 1e-10);
    EXPECT_NEAR(sg::psm_loss(a, b, sg::Norm::kL1).item<double>(), oracle::mean_diff(a, b, true), 1e-10);
  }
}

TEST(PsmLoss, ShapeMismatchThrows) {
  EXPECT_THROW(sg::psm_loss(torch::zeros({1, 3, 4, 4}), torch::zeros({1, 3, 4, 5}), sg::Norm::kL2), sg::ShapeError);
}

TEST(SfmLoss, HandComputedOneHot) {
  auto a = torch::zeros({1, 1, 2, 2}), b = torch::zeros({1, 1, 2, 2});
  a[0][0][0][0] = 1;
  b[0][0][1][1] = 1;
  EXPECT_DOUBLE_EQ(sg::sfm_loss(a, b, sg::Norm::kL1).item<double>(), 0.5);
  EXPECT_EQ(sg::sfm_loss(a, a, sg::Norm::kL1).item<double>(), 0.0);
}

TEST(SfmLoss, MatchesLoopOracle) {
  torch::manual_seed(1);
  for (int i = 0; i < 10; ++i) {
    const auto a = torch::rand({3, 5, 4, 8}, torch::kDouble), b = torch::rand({3, 5, 4, 8}, torch::kDouble);
    EXPECT_NEAR(sg::sfm_loss(a, b, sg::Norm::kL1).item<double>(), oracle::mean_diff(a, b, true), 1e-10);
    EXPECT_NEAR(sg::sfm_loss(a, b, sg::Norm::kL2).item<double>(), oracle::mean_diff(a, b, false), 1e-10);
  }
}

TEST(SfmLoss, MaskSelectsSteps) {
  torch::manual_seed(2);
  const auto a = torch::rand({2, 3, 2, 2}, torch::kDouble), b = torch::rand({2, 3, 2, 2}, torch::kDouble);
  auto mask = torch::tensor({{1.0, 1.0, 0.0}, {0.0, 0.0, 0.0}}, torch::kDouble);
  using torch::indexing::Slice;
  const auto expect = oracle::mean_diff(a.index({0, Slice(0, 2)}), b.index({0, Slice(0, 2)}), true);
  EXPECT_NEAR(sg::sfm_loss(a, b, sg::Norm::kL1, mask).item<double>(), expect, 1e-12);
  EXPECT_EQ(sg::sfm_loss(a, b, sg::Norm::kL1, torch::zeros({2, 3})).item<double>(), 0.0);
  EXPECT_THROW(sg::sfm_loss(a, b, sg::Norm::kL1, torch::ones({2, 2})), sg::ShapeError);
}

TEST(SfmLoss, LengthMismatchMentionsAlignment) {
  try {
    sg::sfm_loss(torch::zeros({1, 3, 2, 2}), torch::zeros({1, 4, 2, 2}), sg::Norm::kL1);
    FAIL();
  } catch (const sg::ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("alignment"), std::string::npos);
  }
}

TEST(TotalLoss, LambdaZeroIsExactlyPsm) {
  const auto psm = torch::tensor(0.123456789, torch::kDouble), sfm = torch::tensor(7.5, torch::kDouble);
  EXPECT_EQ(sg::total_loss(psm, sfm, 0.0).item<double>(), psm.item<double>());
  EXPECT_NEAR(sg::total_loss(torch::tensor(0.1, torch::kDouble), torch::tensor(0.002, torch::kDouble), 50).item<double>(),
              0.2, 1e-15);
  EXPECT_THROW(sg::total_loss(psm, sfm, -1.0), sg::Error);
}

TEST(TotalLoss, AffineInLambda) {
  const auto psm = torch::tensor(0.3, torch::kDouble), sfm = torch::tensor(0.04, torch::kDouble);
  const double t0 = sg::total_loss(psm, sfm, 0).item<double>();
  const double t1 = sg::total_loss(psm, sfm, 1).item<double>();
  const double t2 = sg::total_loss(psm, sfm, 2).item<double>();
  EXPECT_NEAR(t1 - t0, 0.04, 1e-15);
  EXPECT_NEAR(t2 - t1, 0.04, 1e-15);
}

TEST(Losses, NonNegativeAndZeroOnlyForEqualInputs) {
  torch::manual_seed(3);
  for (int i = 0; i < 20; ++i) {
    const auto a = torch::rand({1, 2, 3, 3}), b = torch::rand({1, 2, 3, 3});
    for (auto n : {sg::Norm::kL1, sg::Norm::kL2}) {
      EXPECT_GT(sg::psm_loss(a, b, n).item<double>(), 0.0);
      EXPECT_GT(sg::sfm_loss(a, b, n).item<double>(), 0.0);
    }
  }
}

TEST(Norm, Strings) {
  EXPECT_EQ(sg::norm_from_string("l1"), sg::Norm::kL1);
  EXPECT_EQ(sg::norm_from_string("L2"), sg::Norm::kL2);
  EXPECT_THROW(sg::norm_from_string("l3"), sg::Error);
}
