// Copyright 2026 The swinseg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "checks.hpp"
#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "swinseg/error.hpp"
#include "swinseg/ops.hpp"

namespace swinseg {
namespace {

using testing::T64;

T64 vec(std::vector<double> v, Shape shape = {}, bool grad = false) {
  if (shape.empty()) shape = {static_cast<Index>(v.size())};
  return T64::from_data(shape, std::move(v), grad);
}

TEST(Tensor, ShapeAndDataAgree) {
  EXPECT_EQ(T64::zeros({2, 3, 4}).numel(), 24);
  EXPECT_THROW(T64::from_data({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
}

TEST(Tensor, FiniteInputsStayFiniteAtExtremes) {
  auto x = vec({-700.0, -30.0, 0.0, 30.0, 700.0});
  for (const auto& y : {softmax(x), gelu(x), relu(x),
                        layer_norm(x, T64::full({5}, 1.0), T64::zeros({5}), 1e-5)}) {
    for (double v : y.vec()) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(Matmul, IdentityTimesX) {
  Rng rng(1);
  auto x = testing::randn({3, 5}, rng, 1.0, false);
  auto eye = vec({1, 0, 0, 0, 1, 0, 0, 0, 1}, {3, 3});
  EXPECT_EQ(matmul(eye, x).vec(), x.vec());
}

TEST(Matmul, HandMultiplication) {
  auto a = vec({1, 2, 3, 4}, {2, 2});
  auto b = vec({0, 1, 1, 0}, {2, 2});
  EXPECT_EQ(matmul(a, b).vec(), (std::vector<double>{2, 1, 4, 3}));
}

TEST(Matmul, GradientOfSumIsOnesTimesBTransposed) {
  Rng rng(2);
  auto a = testing::randn({3, 4}, rng);
  auto b = testing::randn({4, 2}, rng);
  sum(matmul(a, b)).backward();
  for (Index i = 0; i < 3; ++i) {
    for (Index k = 0; k < 4; ++k) {
      const double expected = b.vec()[static_cast<std::size_t>(k * 2)] + b.vec()[static_cast<std::size_t>(k * 2 + 1)];
      EXPECT_NEAR(a.grad()[static_cast<std::size_t>(i * 4 + k)], expected, 1e-12);
    }
  }
  testing::GradCheckOptions opts;
  opts.step = 1e-6;
  const auto r = testing::gradcheck([&] { return sum(matmul(a, b)); }, {a}, opts);
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

TEST(Matmul, InnerExtentMismatchIsDimensionError) {
  EXPECT_THROW(matmul(T64::zeros({2, 3}), T64::zeros({4, 2})), DimensionError);
}

TEST(LayerNorm, ClosedFormWithZeroEpsilon) {
  auto y = layer_norm(vec({1, 2, 3}), vec({1, 1, 1}), vec({0, 0, 0}), 0.0);
  const double s = std::sqrt(1.5);  // 1 / sqrt(2/3)
  EXPECT_NEAR(y.vec()[0], -s, 1e-12);
  EXPECT_NEAR(y.vec()[1], 0.0, 1e-12);
  EXPECT_NEAR(y.vec()[2], s, 1e-12);
  EXPECT_NEAR(y.vec()[2], 1.2247, 1e-4);
}

TEST(LayerNorm, ConstantInputGivesBeta) {
  auto y = layer_norm(vec({5, 5, 5, 5}), vec({1, 2, 3, 4}), vec({0.5, -1, 2, 0}), 1e-5);
  EXPECT_EQ(y.vec(), (std::vector<double>{0.5, -1, 2, 0}));
}

TEST(LayerNorm, ZeroGammaGivesBeta) {
  auto y = layer_norm(vec({1, -4, 9}), vec({0, 0, 0}), vec({0.1, 0.2, 0.3}), 1e-5);
  EXPECT_EQ(y.vec(), (std::vector<double>{0.1, 0.2, 0.3}));
}

TEST(LayerNorm, NormalizedMomentsProperty) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Index c = rng.uniform_int(2, 33);
    auto x = testing::randn({4, c}, rng, rng.uniform(0.1, 10.0), false);
    auto y = layer_norm(x, T64::full({c}, 1.0), T64::zeros({c}), 0.0);
    for (Index r = 0; r < 4; ++r) {
      double m = 0, v = 0;
      for (Index k = 0; k < c; ++k) m += y.vec()[static_cast<std::size_t>(r * c + k)];
      m /= static_cast<double>(c);
      for (Index k = 0; k < c; ++k) {
        const double d = y.vec()[static_cast<std::size_t>(r * c + k)] - m;
        v += d * d;
      }
      v /= static_cast<double>(c);
      EXPECT_LT(std::abs(m), 1e-10);
      EXPECT_NEAR(v, 1.0, 1e-8);
    }
  }
}

TEST(LayerNorm, ParamsRequirePositiveEpsilon) {
  LayerNormParams<double> p{T64::full({3}, 1.0), T64::zeros({3}), 0.0};
  EXPECT_THROW(p.validate(), ValidationError);
  p.eps = 1e-5;
  EXPECT_NO_THROW(p.validate());
  p.beta = T64::zeros({4});
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Softmax, UniformInput) {
  auto y = softmax(vec({2, 2, 2, 2}));
  for (double v : y.vec()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Softmax, ClosedForm) {
  auto y = softmax(vec({0, std::log(3.0)}));
  EXPECT_NEAR(y.vec()[0], 0.25, 1e-15);
  EXPECT_NEAR(y.vec()[1], 0.75, 1e-15);
}

TEST(Softmax, RowsSumToOneAndShiftInvariant) {
  Rng rng(4);
  auto x = testing::randn({5, 7}, rng, 20.0, false);
  auto y = softmax(x);
  auto shifted = softmax(add(x, T64::full({1, 1}, 123.5)));
  for (Index r = 0; r < 5; ++r) {
    double s = 0;
    for (Index k = 0; k < 7; ++k) {
      const auto i = static_cast<std::size_t>(r * 7 + k);
      s += y.vec()[i];
      EXPECT_GT(y.vec()[i], 0.0);
      EXPECT_NEAR(y.vec()[i], shifted.vec()[i], 1e-12);
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Conv2d, UnitKernelIsIdentity) {
  Rng rng(5);
  auto x = testing::randn({2, 5, 4, 1}, rng, 1.0, false);
  auto y = conv2d(x, T64::full({1, 1, 1, 1}, 1.0), T64{}, 1, 0);
  EXPECT_EQ(y.shape(), x.shape());
  EXPECT_EQ(y.vec(), x.vec());
}

TEST(Conv2d, OnesKernelStrideFourSums) {
  Rng rng(6);
  auto x = testing::randn({1, 4, 4, 1}, rng, 1.0, false);
  auto y = conv2d(x, T64::full({4, 4, 1, 1}, 1.0), T64{}, 4, 0);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 1, 1}));
  double s = 0;
  for (double v : x.vec()) s += v;
  EXPECT_NEAR(y.item(), s, 1e-12);
}

TEST(Conv2d, OutputExtentAndErrors) {
  auto y = conv2d(T64::zeros({1, 7, 9, 2}), T64::zeros({3, 3, 2, 4}), T64{}, 2, 1);
  EXPECT_EQ(y.shape(), (Shape{1, 4, 5, 4}));
  EXPECT_THROW(conv2d(T64::zeros({1, 2, 2, 1}), T64::zeros({3, 3, 1, 1}), T64{}, 1, 0),
               DimensionError);
  EXPECT_THROW(conv2d(T64::zeros({1, 4, 4, 2}), T64::zeros({3, 3, 3, 1}), T64{}, 1, 1),
               DimensionError);
}

TEST(Conv2d, GradientOnSixBySixInput) {
  Rng rng(7);
  auto x = testing::randn({1, 6, 6, 2}, rng);
  auto w = testing::randn({3, 3, 2, 2}, rng);
  auto b = testing::randn({2}, rng);
  const auto r = testing::gradcheck(
      [&] { return testing::random_projection(conv2d(x, w, b, 1, 1), 3); }, {x, w, b});
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
}

TEST(Activations, KnownValues) {
  auto g = gelu(vec({0.0, 3.0}));
  EXPECT_EQ(g.vec()[0], 0.0);
  EXPECT_NEAR(g.vec()[1], 2.9964, 1e-4);
  EXPECT_EQ(relu(vec({-1.0})).item(), 0.0);
  EXPECT_EQ(relu(vec({2.5})).item(), 2.5);
}

TEST(CyclicShift, ZeroShiftIsIdentity) {
  Rng rng(8);
  auto x = testing::randn({1, 3, 4, 2}, rng, 1.0, false);
  EXPECT_EQ(cyclic_shift(x, 0, 0).vec(), x.vec());
}

TEST(CyclicShift, HandRoll) {
  // [[a,b],[c,d]] rolled by (1,1) -> [[d,c],[b,a]]
  auto x = vec({1, 2, 3, 4}, {1, 2, 2, 1});
  EXPECT_EQ(cyclic_shift(x, 1, 1).vec(), (std::vector<double>{4, 3, 2, 1}));
}

TEST(CyclicShift, BijectionAndInverse) {
  Rng rng(9);
  auto x = testing::randn({2, 5, 3, 2}, rng, 1.0, false);
  for (Index dy = -4; dy <= 4; ++dy) {
    for (Index dx = -2; dx <= 2; ++dx) {
      auto y = cyclic_shift(x, dy, dx);
      auto a = y.vec(), b = x.vec();
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      EXPECT_EQ(a, b);
      EXPECT_EQ(cyclic_shift(y, -dy, -dx).vec(), x.vec());
    }
  }
}

TEST(CrossEntropy, UniformLogitsGiveLogK) {
  std::vector<std::int32_t> labels{0, 1, 2, 1};
  auto loss = cross_entropy_loss(T64::zeros({1, 2, 2, 3}), std::span<const std::int32_t>(labels));
  EXPECT_NEAR(loss.item(), std::log(3.0), 1e-15);
  EXPECT_NEAR(loss.item(), 1.0986, 1e-4);
}

TEST(CrossEntropy, LossVanishesWithMargin) {
  std::vector<std::int32_t> labels{2, 0};
  double previous = std::numeric_limits<double>::infinity();
  for (double margin : {1.0, 5.0, 20.0, 50.0}) {
    auto logits = vec({0, 0, margin, margin, 0, 0}, {1, 1, 2, 3});
    const double l = cross_entropy_loss(logits, std::span<const std::int32_t>(labels)).item();
    EXPECT_LT(l, previous);
    previous = l;
  }
  EXPECT_LT(previous, 1e-20);
}

TEST(CrossEntropy, OutOfRangeLabelIsValidationError) {
  std::vector<std::int32_t> labels{0, 3};
  EXPECT_THROW(cross_entropy_loss(T64::zeros({1, 1, 2, 3}), std::span<const std::int32_t>(labels)),
               ValidationError);
}

TEST(Backward, SumGivesOnes) {
  auto x = vec({1, 2, 3}, {}, true);
  sum(x).backward();
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), (std::vector<double>{1, 1, 1}));
}

TEST(Backward, SumOfSquares) {
  auto x = vec({1, 2}, {}, true);
  sum(mul(x, x)).backward();
  EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()), (std::vector<double>{2, 4}));
}

TEST(Backward, NonScalarIsUsageError) {
  auto x = vec({1, 2}, {}, true);
  EXPECT_THROW(scale(x, 2.0).backward(), UsageError);
}

TEST(Backward, SecondPassOnReleasedGraphIsUsageError) {
  auto x = vec({1, 2}, {}, true);
  auto loss = sum(mul(x, x));
  loss.backward();
  EXPECT_THROW(loss.backward(), UsageError);
}

TEST(Backward, LeafGradientsAccumulateAcrossGraphsUntilZeroed) {
  auto x = vec({1, 2}, {}, true);
  sum(x).backward();
  sum(scale(x, 3.0)).backward();
  EXPECT_EQ(x.grad()[0], 4.0);
  x.zero_grad();
  EXPECT_FALSE(x.has_grad());
}

TEST(Backward, NoGradGuardRecordsNothing) {
  auto x = vec({1, 2}, {}, true);
  {
    NoGradGuard guard;
    auto y = sum(mul(x, x));
    EXPECT_FALSE(y.requires_grad());
  }
  EXPECT_TRUE(grad_enabled());
}

TEST(Gradients, EveryPrimitiveMatchesFiniteDifferences) {
  const auto r = testing::check_primitive_gradients();
  EXPECT_TRUE(r.pass) << r.detail;
}

}  // namespace
}  // namespace swinseg
