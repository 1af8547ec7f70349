#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pmtnet {

/// Extents of a dense (batch, channel, row, column) array.
struct Shape4 {
  std::size_t n = 1;
  std::size_t c = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  std::size_t size() const noexcept { return n * c * h * w; }
  std::size_t per_item() const noexcept { return c * h * w; }
  bool valid() const noexcept { return n >= 1 && c >= 1 && h >= 1 && w >= 1; }
  friend bool operator==(const Shape4&, const Shape4&) = default;
};

/// Dense 4-D array of doubles, row-major in (n, c, h, w) order.
///
/// Element (n, c, i, j) lives at flat index ((n*C + c)*H + i)*W + j.
class Tensor4 {
 public:
  /// Empty tensor (no elements, all extents zero).
  Tensor4() = default;
  /// Zero-initialised tensor. Throws ShapeError on a zero extent.
  explicit Tensor4(Shape4 shape);
  Tensor4(Shape4 shape, std::vector<double> data);

  const Shape4& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double>& values() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  std::size_t index(std::size_t n, std::size_t c, std::size_t i, std::size_t j) const noexcept {
    return ((n * shape_.c + c) * shape_.h + i) * shape_.w + j;
  }
  double& operator()(std::size_t n, std::size_t c, std::size_t i, std::size_t j) noexcept {
    return data_[index(n, c, i, j)];
  }
  double operator()(std::size_t n, std::size_t c, std::size_t i, std::size_t j) const noexcept {
    return data_[index(n, c, i, j)];
  }

  /// Same data, new extents. Throws ShapeError unless the element count matches.
  Tensor4 reshaped(Shape4 shape) const;
  /// Copy of batch item `n` as a (1, c, h, w) tensor.
  Tensor4 item(std::size_t n) const;

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor4&, const Tensor4&) = default;

 private:
  Shape4 shape_{0, 0, 0, 0};
  std::vector<double> data_;
};

Tensor4 tensor_filled(Shape4 shape, double value);

/// Row-major dense matrix; the im2col workspace.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) noexcept { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data[i * cols + j]; }
};

/// out = a * b
Matrix matmul(const Matrix& a, const Matrix& b);
/// out = a^T * b
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
/// out = a * b^T
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

struct Extent2 {
  std::size_t h = 1;
  std::size_t w = 1;
  friend bool operator==(const Extent2&, const Extent2&) = default;
};

/// Kernel, stride and zero padding of a 2-D sliding window.
struct Window {
  Extent2 kernel{1, 1};
  Extent2 stride{1, 1};
  Extent2 pad{0, 0};
};

/// Output extents of a window sliding over an (h, w) plane. Throws ShapeError
/// if the window does not tile the padded input exactly or does not fit.
Extent2 window_output(Extent2 in, const Window& win);

/// Lowers every receptive field of `x` into one column. Result is
/// (c*kh*kw) x (n*hout*wout); column (n*hout + i)*wout + j holds output
/// position (i, j) of item n; padding contributes zeros.
Matrix im2col(const Tensor4& x, const Window& win);

/// Adjoint of im2col: scatters columns back into an `x_shape` tensor, summing
/// overlapping contributions.
Tensor4 col2im(const Matrix& m, Shape4 x_shape, const Window& win);

/// xoshiro256** seeded through splitmix64.
///
/// Recurrence (all arithmetic mod 2^64, rotl = rotate left):
///   result = rotl(s1 * 5, 7) * 9
///   t = s1 << 17; s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45)
/// Seeding fills s0..s3 with successive splitmix64 outputs of the seed.
/// Floating draws use only integer arithmetic plus std::log/std::sqrt/std::cos,
/// so integer streams are bit-identical on every platform.
class Prng {
 public:
  explicit Prng(std::uint64_t seed = 0);

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal() noexcept;
  /// Exponential with the given mean.
  double exponential(double mean) noexcept;

  /// Independent generator derived from this one's seed and `stream`.
  Prng substream(std::uint64_t stream) const noexcept;

  template <typename T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
};

}  // namespace pmtnet
