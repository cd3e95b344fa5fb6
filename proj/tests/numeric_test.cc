// Copyright 2026 The Persona Authors
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

#include <cmath>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"
#include "persona/error.h"
#include "persona/matrix.h"
#include "persona/ops.h"
#include "persona/optim.h"
#include "persona/rng.h"

namespace persona {
namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (double& v : m.flat()) v = rng.uniform(-scale, scale);
  return m;
}

// Central difference of a scalar function of one matrix entry.
template <typename F>
double numeric_partial(Matrix& m, std::size_t i, F f, double h = 1e-5) {
  const double saved = m.flat()[i];
  m.flat()[i] = saved + h;
  const double up = f();
  m.flat()[i] = saved - h;
  const double down = f();
  m.flat()[i] = saved;
  return (up - down) / (2 * h);
}

double rel_error(double a, double n) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8});
}

double dot(const Matrix& a, const Matrix& b) {
  return std::inner_product(a.flat().begin(), a.flat().end(), b.flat().begin(), 0.0);
}

TEST(RngTest, SameSeedSameSequence) {
  Rng a(9), b(9);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngTest, StreamsDiffer) {
  Rng a = Rng::stream(1, 0), b = Rng::stream(1, 1);
  EXPECT_NE(a.next_u64(), b.next_u64());
}

TEST(RngTest, UniformIntInRangeAndCoversAll) {
  Rng rng(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.uniform_int(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(RngTest, UniformInUnitInterval) {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(XavierTest, SingleValueBound) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const Matrix m = xavier_init(1, 1, rng);
    EXPECT_LE(std::abs(m(0, 0)), std::sqrt(3.0));
  }
}

TEST(XavierTest, Deterministic) {
  Rng a(11), b(11);
  EXPECT_EQ(xavier_init(5, 7, a), xavier_init(5, 7, b));
}

TEST(XavierTest, MeanWithinThreeSigma) {
  Rng rng(42);
  const Matrix m = xavier_init(64, 64, rng);
  const double a = std::sqrt(6.0 / 128.0);
  const double mean = std::accumulate(m.flat().begin(), m.flat().end(), 0.0) / 4096.0;
  EXPECT_LT(std::abs(mean), 3 * a / std::sqrt(3.0 * 4096.0));
  for (double v : m.flat()) EXPECT_LE(std::abs(v), a);
}

TEST(XavierTest, ZeroDimensionRejected) {
  Rng rng(1);
  EXPECT_THROW(xavier_init(0, 3, rng), Error);
}

TEST(MatrixTest, DataLengthMismatch) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), Error);
}

TEST(AffineTest, IdentityWeights) {
  Rng rng(1);
  const Matrix x = random_matrix(3, 4, rng);
  Matrix w(4, 4);
  for (std::size_t i = 0; i < 4; ++i) w(i, i) = 1.0;
  EXPECT_EQ(affine(x, w, Matrix(1, 4)), x);
}

TEST(AffineTest, ZeroInputBroadcastsBias) {
  Rng rng(2);
  const Matrix w = random_matrix(4, 2, rng);
  const Matrix b = random_matrix(1, 2, rng);
  const Matrix out = affine(Matrix(3, 4), w, b);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(out(r, c), b(0, c));
  }
}

TEST(AffineTest, MatchesTripleLoop) {
  Rng rng(3);
  const Matrix x = random_matrix(3, 4, rng);
  const Matrix w = random_matrix(4, 2, rng);
  const Matrix b = random_matrix(1, 2, rng);
  const Matrix out = affine(x, w, b);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double s = b(0, j);
      for (std::size_t k = 0; k < 4; ++k) s += x(i, k) * w(k, j);
      EXPECT_NEAR(out(i, j), s, 1e-12);
    }
  }
}

TEST(AffineTest, ShapeMismatch) {
  EXPECT_THROW(affine(Matrix(2, 3), Matrix(4, 2), Matrix(1, 2)), Error);
}

TEST(AffineTest, BackwardMatchesFiniteDifferences) {
  Rng rng(4);
  Matrix x = random_matrix(3, 4, rng);
  Matrix w = random_matrix(4, 2, rng);
  Matrix b = random_matrix(1, 2, rng);
  const Matrix upstream = random_matrix(3, 2, rng);
  auto f = [&] { return dot(affine(x, w, b), upstream); };
  Matrix dx, dw(4, 2), db(1, 2);
  affine_backward(x, w, upstream, &dx, dw, db);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_LT(rel_error(dx.flat()[i], numeric_partial(x, i, f)), 1e-7);
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_LT(rel_error(dw.flat()[i], numeric_partial(w, i, f)), 1e-7);
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_LT(rel_error(db.flat()[i], numeric_partial(b, i, f)), 1e-7);
  }
}

TEST(ActivationTest, Examples) {
  const Matrix x(1, 3, {-1, 0, 2});
  EXPECT_EQ(activate(Activation::kRelu, x), Matrix(1, 3, {0, 0, 2}));
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(activate(Activation::kTanh, Matrix(1, 1))(0, 0), 0.0);
}

TEST(ActivationTest, SigmoidStableAtExtremes) {
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
}

TEST(ActivationTest, NonFiniteInputRejected) {
  EXPECT_THROW(activate(Activation::kTanh, Matrix(1, 1, {NAN})), Error);
}

TEST(ActivationTest, BackwardMatchesFiniteDifferences) {
  for (Activation kind : {Activation::kRelu, Activation::kSigmoid, Activation::kTanh}) {
    Rng rng(5);
    Matrix x = random_matrix(4, 5, rng, 2.0);
    // relu is checked away from its kink.
    for (double& v : x.flat()) {
      if (std::abs(v) < 1e-3) v = 0.5;
    }
    const Matrix upstream = random_matrix(4, 5, rng);
    auto f = [&] { return dot(activate(kind, x), upstream); };
    const Matrix y = activate(kind, x);
    const Matrix dx = activate_backward(kind, x, y, upstream);
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_LT(rel_error(dx.flat()[i], numeric_partial(x, i, f)), 1e-4);
    }
  }
}

TEST(SoftmaxTest, UniformRow) {
  const Matrix y = row_softmax(Matrix(1, 4));
  for (double v : y.flat()) EXPECT_EQ(v, 0.25);
}

TEST(SoftmaxTest, ShiftInvariant) {
  Rng rng(6);
  const Matrix x = random_matrix(3, 5, rng);
  Matrix shifted = x;
  for (double& v : shifted.flat()) v += 7.5;
  const Matrix a = row_softmax(x), b = row_softmax(shifted);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.flat()[i], b.flat()[i], 1e-15);
}

TEST(SoftmaxTest, DirectFormula) {
  const Matrix y = row_softmax(Matrix(1, 3, {1, 2, 3}));
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(y(0, j), std::exp(j + 1.0) / z, 1e-12);
}

TEST(SoftmaxTest, RowsSumToOneInOpenInterval) {
  Rng rng(7);
  const Matrix y = row_softmax(random_matrix(20, 9, rng, 30.0));
  for (std::size_t r = 0; r < y.rows(); ++r) {
    double s = 0;
    for (double v : y.row(r)) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(SoftmaxTest, BackwardMatchesFiniteDifferences) {
  Rng rng(8);
  Matrix x = random_matrix(3, 4, rng);
  const Matrix upstream = random_matrix(3, 4, rng);
  auto f = [&] { return dot(row_softmax(x), upstream); };
  const Matrix dx = row_softmax_backward(row_softmax(x), upstream);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_LT(rel_error(dx.flat()[i], numeric_partial(x, i, f)), 1e-4);
  }
}

TEST(CrossEntropyTest, PerfectPredictionIsZero) {
  Matrix logits(2, 3, -1e4);
  logits(0, 1) = 0;
  logits(1, 2) = 0;
  const std::vector<std::int32_t> targets{1, 2};
  const std::vector<std::uint8_t> mask{1, 1};
  EXPECT_NEAR(masked_cross_entropy(logits, targets, mask).loss, 0.0, 1e-12);
}

TEST(CrossEntropyTest, UniformIsLogV) {
  const Matrix logits(1, 1000);
  const std::vector<std::int32_t> targets{17};
  const std::vector<std::uint8_t> mask{1};
  EXPECT_NEAR(masked_cross_entropy(logits, targets, mask).loss, std::log(1000.0), 1e-12);
  EXPECT_NEAR(std::log(1000.0), 6.9078, 1e-4);
}

TEST(CrossEntropyTest, MatchesPerPositionOracle) {
  Rng rng(9);
  const Matrix logits = random_matrix(5, 6, rng, 3.0);
  const std::vector<std::int32_t> targets{0, 5, 2, 2, 4};
  const std::vector<std::uint8_t> mask{1, 0, 1, 1, 0};
  double sum = 0;
  int count = 0;
  for (std::size_t t = 0; t < 5; ++t) {
    if (!mask[t]) continue;
    double z = 0;
    for (double v : logits.row(t)) z += std::exp(v);
    sum += std::log(z) - logits(t, static_cast<std::size_t>(targets[t]));
    ++count;
  }
  const auto ce = masked_cross_entropy(logits, targets, mask);
  EXPECT_NEAR(ce.loss, sum / count, 1e-12);
  EXPECT_EQ(ce.weight, 3.0);
}

TEST(CrossEntropyTest, NonNegative) {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix logits = random_matrix(4, 7, rng, 10.0);
    const std::vector<std::int32_t> targets{0, 1, 2, 6};
    const std::vector<std::uint8_t> mask{1, 1, 1, 1};
    EXPECT_GE(masked_cross_entropy(logits, targets, mask).loss, 0.0);
  }
}

TEST(CrossEntropyTest, BackwardMatchesFiniteDifferences) {
  Rng rng(11);
  Matrix logits = random_matrix(4, 5, rng);
  const std::vector<std::int32_t> targets{3, 1, 0, 4};
  const std::vector<std::uint8_t> mask{1, 1, 0, 1};
  auto f = [&] { return masked_cross_entropy(logits, targets, mask).loss; };
  const Matrix d = masked_cross_entropy(logits, targets, mask).dlogits;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double n = numeric_partial(logits, i, f);
    if (d.flat()[i] == 0.0) {
      EXPECT_NEAR(n, 0.0, 1e-10);
    } else {
      EXPECT_LT(rel_error(d.flat()[i], n), 1e-4);
    }
  }
}

TEST(CrossEntropyTest, Errors) {
  const Matrix logits(2, 3);
  const std::vector<std::int32_t> targets{0, 1};
  const std::vector<std::uint8_t> none{0, 0};
  const std::vector<std::uint8_t> short_mask{1};
  const std::vector<std::int32_t> bad{0, 3};
  const std::vector<std::uint8_t> all{1, 1};
  try {
    masked_cross_entropy(logits, targets, none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateMask);
  }
  EXPECT_THROW(masked_cross_entropy(logits, targets, short_mask), Error);
  EXPECT_THROW(masked_cross_entropy(logits, bad, all), Error);
}

TEST(MaxPoolTest, SinglePositionIsIdentity) {
  const Matrix f(1, 3, {0.5, -2, 7});
  const Pooled p = max_over_time(f);
  EXPECT_EQ(p.values, f);
  EXPECT_EQ(p.argmax, (std::vector<std::size_t>{0, 0, 0}));
}

TEST(MaxPoolTest, TiesPickLowestIndex) {
  const Pooled p = max_over_time(Matrix(4, 2, 1.25));
  EXPECT_EQ(p.argmax, (std::vector<std::size_t>{0, 0}));
  EXPECT_EQ(p.values(0, 0), 1.25);
}

TEST(MaxPoolTest, MatchesLinearScan) {
  Rng rng(12);
  const Matrix f = random_matrix(7, 3, rng);
  const Pooled p = max_over_time(f);
  for (std::size_t c = 0; c < 3; ++c) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < 7; ++r) {
      if (f(r, c) > f(best, c)) best = r;
    }
    EXPECT_EQ(p.argmax[c], best);
    EXPECT_EQ(p.values(0, c), f(best, c));
  }
}

TEST(MaxPoolTest, BackwardRoutesToArgmaxOnly) {
  Rng rng(13);
  const Matrix f = random_matrix(6, 4, rng);
  const Pooled p = max_over_time(f);
  const Matrix up = random_matrix(1, 4, rng);
  const Matrix d = max_over_time_backward(p, up, 6);
  for (std::size_t c = 0; c < 4; ++c) {
    double total = 0;
    for (std::size_t r = 0; r < 6; ++r) {
      if (r != p.argmax[c]) {
        EXPECT_EQ(d(r, c), 0.0);
      }
      total += d(r, c);
    }
    EXPECT_EQ(total, up(0, c));
  }
}

TEST(MaxPoolTest, EmptyInput) {
  try {
    max_over_time(Matrix(0, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyInput);
  }
}

TEST(AdamTest, ZeroGradientLeavesValue) {
  Parameter p(Matrix(1, 3, {1, 2, 3}));
  adam_step(p, {});
  EXPECT_EQ(p.value, Matrix(1, 3, {1, 2, 3}));
}

TEST(AdamTest, FirstStepHandComputed) {
  Parameter p(Matrix(1, 1, {0.0}));
  p.grad(0, 0) = 1.0;
  adam_step(p, {});
  EXPECT_NEAR(p.value(0, 0), -1e-3 / (1 + 1e-8), 1e-15);
  EXPECT_NEAR(p.value(0, 0), -9.99999e-4, 1e-9);
}

TEST(AdamTest, Deterministic) {
  Parameter a(Matrix(1, 2, {0.3, -0.1}));
  a.grad = Matrix(1, 2, {0.7, 2.0});
  Parameter b = a;
  adam_step(a, {});
  adam_step(b, {});
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.opt_m, b.opt_m);
  EXPECT_EQ(a.opt_v, b.opt_v);
}

TEST(AdamTest, NonFiniteGradientDiverges) {
  Parameter p(Matrix(1, 1));
  p.grad(0, 0) = INFINITY;
  try {
    adam_step(p, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTrainingDivergence);
  }
}

TEST(ClipTest, BelowThresholdUnchanged) {
  Parameter p(Matrix(1, 2));
  p.grad = Matrix(1, 2, {0.3, 0.4});
  std::vector<Parameter*> ps{&p};
  EXPECT_EQ(clip_global_norm(ps, 5.0), 1.0);
  EXPECT_EQ(p.grad, Matrix(1, 2, {0.3, 0.4}));
}

TEST(ClipTest, ThreeFourScaled) {
  Parameter p(Matrix(1, 2));
  p.grad = Matrix(1, 2, {3, 4});
  std::vector<Parameter*> ps{&p};
  clip_global_norm(ps, 2.5);
  EXPECT_NEAR(p.grad(0, 0), 1.5, 1e-15);
  EXPECT_NEAR(p.grad(0, 1), 2.0, 1e-15);
}

TEST(ClipTest, PostClipNormIsMin) {
  Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    Parameter a(Matrix(3, 3)), b(Matrix(1, 4));
    a.grad = random_matrix(3, 3, rng, 4.0);
    b.grad = random_matrix(1, 4, rng, 4.0);
    std::vector<Parameter*> ps{&a, &b};
    const double before = global_grad_norm(ps);
    clip_global_norm(ps, 5.0);
    const double after = global_grad_norm(ps);
    EXPECT_NEAR(after, std::min(before, 5.0), 1e-9);
    EXPECT_LE(after, before + 1e-12);
  }
}

TEST(GradCheckTest, AffineMseToy) {
  Rng rng(15);
  const Matrix x = random_matrix(4, 3, rng);
  const Matrix target = random_matrix(4, 2, rng);
  Parameter w(random_matrix(3, 2, rng)), b(random_matrix(1, 2, rng));
  auto loss = [&] {
    const Matrix y = affine(x, w.value, b.value);
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y.flat()[i] - target.flat()[i];
      s += 0.5 * d * d;
    }
    return s;
  };
  Matrix dy = affine(x, w.value, b.value);
  for (std::size_t i = 0; i < dy.size(); ++i) dy.flat()[i] -= target.flat()[i];
  affine_backward(x, w.value, dy, nullptr, w.grad, b.grad);
  const std::vector<NamedParameter> params{{"w", &w}, {"b", &b}};
  const auto report = gradient_check(loss, params);
  EXPECT_TRUE(report.passed);
  EXPECT_LT(report.max_rel_error, 1e-7);
  EXPECT_EQ(report.entries.size(), 2u);
}

TEST(GradCheckTest, DetectsWrongGradient) {
  Parameter w(Matrix(1, 1, {2.0}));
  w.grad(0, 0) = 1.0;  // true derivative of w^2 is 4
  const std::vector<NamedParameter> params{{"w", &w}};
  const auto report = gradient_check([&] { return w.value(0, 0) * w.value(0, 0); }, params);
  EXPECT_FALSE(report.passed);
  EXPECT_EQ(w.grad(0, 0), 1.0);
}

}  // namespace
}  // namespace persona
