#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "pmtnet/errors.hpp"
#include "pmtnet/tensor.hpp"

using namespace pmtnet;

TEST(TensorFill, FourZeros) {
  const Tensor4 t = tensor_filled({1, 1, 2, 2}, 0.0);
  EXPECT_EQ(t.size(), 4u);
  for (double v : t.values()) EXPECT_EQ(v, 0.0);
}

TEST(TensorFill, OnesKeepShape) {
  const Tensor4 t = tensor_filled({2, 3, 8, 24}, 1.0);
  EXPECT_EQ(t.size(), 1152u);
  EXPECT_EQ(t.shape(), (Shape4{2, 3, 8, 24}));
  for (double v : t.values()) EXPECT_EQ(v, 1.0);
}

TEST(TensorFill, ZeroExtentRejected) {
  EXPECT_THROW(tensor_filled({1, 0, 1, 1}, 0.0), ShapeError);
  EXPECT_THROW(Tensor4(Shape4{1, 1, 1, 1}, std::vector<double>(3)), ShapeError);
}

TEST(TensorIndex, RowMajorLayout) {
  Tensor4 t({2, 3, 4, 5});
  for (std::size_t i = 0; i < t.size(); ++i) t.values()[i] = static_cast<double>(i);
  EXPECT_EQ(t(1, 2, 3, 4), 119.0);
  EXPECT_EQ(t(1, 0, 0, 0), 60.0);
  EXPECT_EQ(t.item(1)(0, 2, 3, 4), 119.0);
  EXPECT_THROW(t.reshaped({1, 1, 1, 7}), ShapeError);
  EXPECT_EQ(t.reshaped({1, 1, 1, 120}).values(), t.values());
}

TEST(Matmul, TransposedVariantsAgree) {
  Prng prng(3);
  Matrix a(3, 4), b(4, 2);
  for (double& v : a.data) v = prng.uniform(-1, 1);
  for (double& v : b.data) v = prng.uniform(-1, 1);
  const Matrix ab = matmul(a, b);
  Matrix at(4, 3), bt(2, 4);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) at(j, i) = a(i, j);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 2; ++j) bt(j, i) = b(i, j);
  const Matrix ab2 = matmul_at_b(at, b);
  const Matrix ab3 = matmul_a_bt(a, bt);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      double ref = 0.0;
      for (std::size_t k = 0; k < 4; ++k) ref += a(i, k) * b(k, j);
      EXPECT_NEAR(ab(i, j), ref, 1e-14);
      EXPECT_NEAR(ab2(i, j), ref, 1e-14);
      EXPECT_NEAR(ab3(i, j), ref, 1e-14);
    }
}

TEST(Im2col, SingleReceptiveField) {
  const Tensor4 x({1, 1, 2, 2}, {1, 2, 3, 4});
  const Matrix m = im2col(x, {{2, 2}, {1, 1}, {0, 0}});
  ASSERT_EQ(m.rows, 4u);
  ASSERT_EQ(m.cols, 1u);
  EXPECT_EQ(m.data, (std::vector<double>{1, 2, 3, 4}));
}

TEST(Im2col, ZeroPadding) {
  const Tensor4 x({1, 1, 1, 1}, {5});
  const Matrix m = im2col(x, {{3, 3}, {1, 1}, {1, 1}});
  ASSERT_EQ(m.rows, 9u);
  ASSERT_EQ(m.cols, 1u);
  EXPECT_EQ(m.data, (std::vector<double>{0, 0, 0, 0, 5, 0, 0, 0, 0}));
}

TEST(Im2col, MatchesNestedLoopOracle) {
  Prng prng(11);
  struct Case {
    Shape4 s;
    Window w;
  };
  const std::vector<Case> cases{{{1, 1, 4, 4}, {{3, 3}, {1, 1}, {0, 0}}},
                                {{2, 3, 5, 6}, {{2, 3}, {1, 1}, {1, 0}}},
                                {{1, 2, 8, 24}, {{5, 5}, {1, 1}, {2, 2}}},
                                {{3, 2, 4, 6}, {{2, 2}, {2, 2}, {0, 0}}}};
  for (const auto& c : cases) {
    const Tensor4 x = oracle::random_tensor(c.s, prng);
    const Matrix m = im2col(x, c.w);
    const auto ref = oracle::patches(x, c.w.kernel.h, c.w.kernel.w, c.w.stride.h, c.w.stride.w, c.w.pad.h, c.w.pad.w);
    ASSERT_EQ(m.rows, ref.size());
    ASSERT_EQ(m.cols, ref[0].size());
    for (std::size_t r = 0; r < m.rows; ++r)
      for (std::size_t col = 0; col < m.cols; ++col) EXPECT_EQ(m(r, col), ref[r][col]);
  }
}

TEST(Col2im, InvertsDisjointPatches) {
  Prng prng(5);
  const Tensor4 x = oracle::random_tensor({2, 3, 4, 6}, prng);
  const Window w{{2, 2}, {2, 2}, {0, 0}};
  EXPECT_EQ(col2im(im2col(x, w), x.shape(), w), x);
}

TEST(Col2im, AdjointIdentity) {
  Prng prng(6);
  for (int rep = 0; rep < 5; ++rep) {
    const Tensor4 x = oracle::random_tensor({2, 2, 5, 7}, prng);
    const Window w{{3, 3}, {1, 1}, {1, 1}};
    const Matrix cols = im2col(x, w);
    Matrix m(cols.rows, cols.cols);
    for (double& v : m.data) v = prng.uniform(-1, 1);
    const double lhs = oracle::dot(m.data, cols.data);
    const double rhs = oracle::dot(col2im(m, x.shape(), w).values(), x.values());
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(Col2im, ZeroMatrixGivesZeroTensor) {
  const Window w{{3, 3}, {1, 1}, {0, 0}};
  const Matrix m(9, 4);
  const Tensor4 x = col2im(m, {1, 1, 4, 4}, w);
  for (double v : x.values()) EXPECT_EQ(v, 0.0);
}

TEST(WindowOutput, RejectsNonTilingWindow) {
  EXPECT_EQ(window_output({8, 24}, {{3, 3}, {1, 1}, {0, 0}}), (Extent2{6, 22}));
  EXPECT_THROW(window_output({2, 2}, {{3, 3}, {1, 1}, {0, 0}}), ShapeError);
}

TEST(Prng, DeterministicAndSeedSensitive) {
  Prng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    EXPECT_NE(va, c.next_u64());
  }
}

TEST(Prng, MatchesReferenceRecurrence) {
  std::uint64_t sm = 2024;
  auto splitmix = [&sm] {
    std::uint64_t z = (sm += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t s[4] = {splitmix(), splitmix(), splitmix(), splitmix()};
  auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
  Prng p(2024);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t expect = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    ASSERT_EQ(p.next_u64(), expect) << "draw " << i;
  }
}

TEST(Prng, UniformAndBelowRanges) {
  Prng p(9);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 10000; ++i) {
    const double u = p.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const auto k = p.below(7);
    ASSERT_LT(k, 7u);
    seen.insert(k);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Prng, NormalMoments) {
  Prng p(10);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = p.normal();
    s += v;
    s2 += v * v;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Prng, ShuffleIsPermutation) {
  Prng p(12);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  p.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Prng, SubstreamsIndependentOfParentPosition) {
  Prng a(7);
  const auto s1 = a.substream(3).next_u64();
  a.next_u64();
  EXPECT_EQ(a.substream(3).next_u64(), s1);
  EXPECT_NE(a.substream(4).next_u64(), s1);
}
