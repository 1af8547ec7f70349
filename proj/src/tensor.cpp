#include "pmtnet/tensor.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pmtnet/errors.hpp"

namespace pmtnet {

namespace {

std::string shape_str(const Shape4& s) {
  std::ostringstream os;
  os << '(' << s.n << ',' << s.c << ',' << s.h << ',' << s.w << ')';
  return os.str();
}

void require_valid(const Shape4& s) {
  if (!s.valid()) throw ShapeError("all tensor extents must be >= 1, got " + shape_str(s));
}

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

Tensor4::Tensor4(Shape4 shape) : shape_(shape) {
  require_valid(shape);
  data_.assign(shape.size(), 0.0);
}

Tensor4::Tensor4(Shape4 shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  require_valid(shape);
  if (data_.size() != shape.size())
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " + shape_str(shape));
}

Tensor4 Tensor4::reshaped(Shape4 shape) const {
  require_valid(shape);
  if (shape.size() != size())
    throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  return Tensor4(shape, data_);
}

Tensor4 Tensor4::item(std::size_t n) const {
  if (n >= shape_.n) throw ShapeError("batch index out of range");
  const std::size_t per = shape_.per_item();
  std::vector<double> out(data_.begin() + static_cast<std::ptrdiff_t>(n * per),
                          data_.begin() + static_cast<std::ptrdiff_t>((n + 1) * per));
  return Tensor4({1, shape_.c, shape_.h, shape_.w}, std::move(out));
}

bool Tensor4::all_finite() const noexcept {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor4 tensor_filled(Shape4 shape, double value) {
  require_valid(shape);
  return Tensor4(shape, std::vector<double>(shape.size(), value));
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw ShapeError("matmul: inner dimensions differ");
  Matrix out(a.rows, b.cols);
  const std::size_t n = b.cols;
  for (std::size_t i = 0; i < a.rows; ++i) {
    double* orow = &out.data[i * n];
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = &b.data[k * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw ShapeError("matmul_at_b: inner dimensions differ");
  Matrix out(a.cols, b.cols);
  const std::size_t n = b.cols;
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* brow = &b.data[k * n];
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      double* orow = &out.data[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += aki * brow[j];
    }
  }
  return out;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw ShapeError("matmul_a_bt: inner dimensions differ");
  Matrix out(a.rows, b.rows);
  const std::size_t k = a.cols;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = &a.data[i * k];
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* brow = &b.data[j * k];
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += arow[t] * brow[t];
      out(i, j) = acc;
    }
  }
  return out;
}

Extent2 window_output(Extent2 in, const Window& win) {
  const auto axis = [](std::size_t len, std::size_t k, std::size_t s, std::size_t p, const char* name) {
    if (k == 0 || s == 0) throw ShapeError(std::string("zero kernel or stride along ") + name);
    const std::size_t padded = len + 2 * p;
    if (padded < k) throw ShapeError(std::string("kernel larger than padded input along ") + name);
    if ((padded - k) % s != 0) throw ShapeError(std::string("window does not tile the input along ") + name);
    return (padded - k) / s + 1;
  };
  return {axis(in.h, win.kernel.h, win.stride.h, win.pad.h, "rows"),
          axis(in.w, win.kernel.w, win.stride.w, win.pad.w, "columns")};
}

Matrix im2col(const Tensor4& x, const Window& win) {
  const Shape4& s = x.shape();
  const Extent2 out = window_output({s.h, s.w}, win);
  const std::size_t kh = win.kernel.h, kw = win.kernel.w;
  const std::size_t positions = out.h * out.w;
  Matrix m(s.c * kh * kw, s.n * positions);
  const auto ph = static_cast<std::ptrdiff_t>(win.pad.h);
  const auto pw = static_cast<std::ptrdiff_t>(win.pad.w);
  const auto H = static_cast<std::ptrdiff_t>(s.h);
  const auto W = static_cast<std::ptrdiff_t>(s.w);
  for (std::size_t c = 0; c < s.c; ++c)
    for (std::size_t u = 0; u < kh; ++u)
      for (std::size_t v = 0; v < kw; ++v) {
        double* row = &m.data[((c * kh + u) * kw + v) * m.cols];
        for (std::size_t n = 0; n < s.n; ++n)
          for (std::size_t i = 0; i < out.h; ++i) {
            const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(i * win.stride.h + u) - ph;
            double* dst = row + (n * out.h + i) * out.w;
            if (r < 0 || r >= H) continue;
            for (std::size_t j = 0; j < out.w; ++j) {
              const std::ptrdiff_t col = static_cast<std::ptrdiff_t>(j * win.stride.w + v) - pw;
              if (col >= 0 && col < W) dst[j] = x(n, c, static_cast<std::size_t>(r), static_cast<std::size_t>(col));
            }
          }
      }
  return m;
}

Tensor4 col2im(const Matrix& m, Shape4 x_shape, const Window& win) {
  Tensor4 x(x_shape);
  const Extent2 out = window_output({x_shape.h, x_shape.w}, win);
  const std::size_t kh = win.kernel.h, kw = win.kernel.w;
  if (m.rows != x_shape.c * kh * kw || m.cols != x_shape.n * out.h * out.w)
    throw ShapeError("col2im: matrix shape does not match the lowered input shape");
  const auto ph = static_cast<std::ptrdiff_t>(win.pad.h);
  const auto pw = static_cast<std::ptrdiff_t>(win.pad.w);
  const auto H = static_cast<std::ptrdiff_t>(x_shape.h);
  const auto W = static_cast<std::ptrdiff_t>(x_shape.w);
  for (std::size_t c = 0; c < x_shape.c; ++c)
    for (std::size_t u = 0; u < kh; ++u)
      for (std::size_t v = 0; v < kw; ++v) {
        const double* row = &m.data[((c * kh + u) * kw + v) * m.cols];
        for (std::size_t n = 0; n < x_shape.n; ++n)
          for (std::size_t i = 0; i < out.h; ++i) {
            const std::ptrdiff_t r = static_cast<std::ptrdiff_t>(i * win.stride.h + u) - ph;
            if (r < 0 || r >= H) continue;
            const double* src = row + (n * out.h + i) * out.w;
            for (std::size_t j = 0; j < out.w; ++j) {
              const std::ptrdiff_t col = static_cast<std::ptrdiff_t>(j * win.stride.w + v) - pw;
              if (col >= 0 && col < W) x(n, c, static_cast<std::size_t>(r), static_cast<std::size_t>(col)) += src[j];
            }
          }
      }
  return x;
}

Prng::Prng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t state = seed;
  for (auto& s : s_) s = splitmix64(state);
}

std::uint64_t Prng::next_u64() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Prng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Prng::below(std::uint64_t bound) noexcept {
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

double Prng::normal() noexcept {
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Prng::exponential(double mean) noexcept {
  // 1 - u lies in (0, 1]
  return -mean * std::log(1.0 - uniform());
}

Prng Prng::substream(std::uint64_t stream) const noexcept {
  std::uint64_t state = seed_ ^ (0xD1B54A32D192ED03ULL * (stream + 1));
  return Prng(splitmix64(state));
}

}  // namespace pmtnet
