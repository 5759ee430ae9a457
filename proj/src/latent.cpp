#include "vibid/latent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vibid/errors.hpp"

namespace vibid {

LatentVideo::LatentVideo(std::size_t frames, std::size_t dims, double fill)
    : frames_(frames), dims_(dims), data_(frames * dims, fill) {}

LatentVideo::LatentVideo(std::size_t frames, std::size_t dims, std::vector<double> data)
    : frames_(frames), dims_(dims), data_(std::move(data)) {
  if (data_.size() != frames_ * dims_)
    throw ShapeMismatch("LatentVideo: expected " + std::to_string(frames_ * dims_) + " values, got " +
                        std::to_string(data_.size()));
}

LatentVideo::LatentVideo(std::initializer_list<std::initializer_list<double>> rows)
    : frames_(rows.size()), dims_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(frames_ * dims_);
  for (const auto& r : rows) {
    if (r.size() != dims_) throw ShapeMismatch("LatentVideo: ragged rows");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Frame LatentVideo::frame_copy(std::size_t f) const {
  auto s = frame(f);
  return Frame(std::vector<double>(s.begin(), s.end()));
}

void LatentVideo::set_frame(std::size_t f, const Frame& v) {
  if (v.dims() != dims_) throw ShapeMismatch("set_frame: dimension mismatch");
  std::ranges::copy(v.values(), frame(f).begin());
}

bool LatentVideo::all_finite() const noexcept {
  return std::ranges::all_of(data_, [](double x) { return std::isfinite(x); });
}

LatentVideo flip(const LatentVideo& v) {
  LatentVideo out(v.frames(), v.dims());
  const std::size_t last = v.frames() - 1;
  for (std::size_t f = 0; f < v.frames(); ++f) std::ranges::copy(v.frame(last - f), out.frame(f).begin());
  return out;
}

Frame extract_last_frame(const LatentVideo& v) {
  if (v.frames() == 0) throw ShapeMismatch("extract_last_frame: empty video");
  return v.frame_copy(v.frames() - 1);
}

namespace {

void require_same_shape(const LatentVideo& a, const LatentVideo& b, const char* what) {
  if (!a.same_shape(b))
    throw ShapeMismatch(std::string(what) + ": shape " + std::to_string(a.frames()) + "x" +
                        std::to_string(a.dims()) + " vs " + std::to_string(b.frames()) + "x" +
                        std::to_string(b.dims()));
}

}  // namespace

LatentVideo lerp(const LatentVideo& a, const LatentVideo& b, double lambda) {
  require_same_shape(a, b, "lerp");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidParameter("lerp: lambda must lie in [0, 1]");
  // Endpoints are returned verbatim so that lambda in {0, 1} is exact.
  if (lambda == 1.0) return a;
  if (lambda == 0.0) return b;
  LatentVideo out(a.frames(), a.dims());
  auto x = a.flat(), y = b.flat();
  auto o = out.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = lambda * x[i] + (1.0 - lambda) * y[i];
  return out;
}

LatentVideo operator+(const LatentVideo& a, const LatentVideo& b) {
  require_same_shape(a, b, "operator+");
  LatentVideo out = a;
  auto o = out.flat();
  auto y = b.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += y[i];
  return out;
}

LatentVideo operator-(const LatentVideo& a, const LatentVideo& b) {
  require_same_shape(a, b, "operator-");
  LatentVideo out = a;
  auto o = out.flat();
  auto y = b.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= y[i];
  return out;
}

LatentVideo operator*(double s, const LatentVideo& a) {
  LatentVideo out = a;
  for (double& x : out.flat()) x *= s;
  return out;
}

double squared_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

double max_abs_diff(const LatentVideo& a, const LatentVideo& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  auto x = a.flat(), y = b.flat();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

}  // namespace vibid
