#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace vibid {

/// One latent frame of dimension D.
class Frame {
 public:
  Frame() = default;
  explicit Frame(std::size_t dims, double fill = 0.0) : values_(dims, fill) {}
  explicit Frame(std::vector<double> values) : values_(std::move(values)) {}
  Frame(std::initializer_list<double> values) : values_(values) {}

  std::size_t dims() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  bool operator==(const Frame&) const = default;

 private:
  std::vector<double> values_;
};

/// F x D real array, frame-major. Frame i occupies [i*D, (i+1)*D).
class LatentVideo {
 public:
  LatentVideo() = default;
  LatentVideo(std::size_t frames, std::size_t dims, double fill = 0.0);
  LatentVideo(std::size_t frames, std::size_t dims, std::vector<double> data);
  /// Nested-list construction, mostly for tests: {{1}, {2}, {3}}.
  LatentVideo(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t frames() const noexcept { return frames_; }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool same_shape(const LatentVideo& o) const noexcept {
    return frames_ == o.frames_ && dims_ == o.dims_;
  }

  double operator()(std::size_t f, std::size_t d) const { return data_[f * dims_ + d]; }
  double& operator()(std::size_t f, std::size_t d) { return data_[f * dims_ + d]; }

  std::span<const double> frame(std::size_t f) const {
    return std::span<const double>(data_).subspan(f * dims_, dims_);
  }
  std::span<double> frame(std::size_t f) { return std::span<double>(data_).subspan(f * dims_, dims_); }
  Frame frame_copy(std::size_t f) const;
  void set_frame(std::size_t f, const Frame& v);

  std::span<const double> flat() const noexcept { return data_; }
  std::span<double> flat() noexcept { return data_; }

  bool all_finite() const noexcept;
  bool operator==(const LatentVideo&) const = default;

 private:
  std::size_t frames_ = 0;
  std::size_t dims_ = 0;
  std::vector<double> data_;
};

/// Start/end keyframes plus opaque tags (fps, motion id, ...) that are carried
/// through reports but never interpreted.
struct Conditioning {
  Frame start;
  Frame end;
  std::map<std::string, std::string> metadata;
};

/// Reverse the frame axis.
LatentVideo flip(const LatentVideo& v);

Frame extract_last_frame(const LatentVideo& v);

/// lambda * a + (1 - lambda) * b.
LatentVideo lerp(const LatentVideo& a, const LatentVideo& b, double lambda);

// Elementwise helpers used by the samplers.
LatentVideo operator+(const LatentVideo& a, const LatentVideo& b);
LatentVideo operator-(const LatentVideo& a, const LatentVideo& b);
LatentVideo operator*(double s, const LatentVideo& a);

double squared_norm(std::span<const double> v);
double max_abs_diff(const LatentVideo& a, const LatentVideo& b);

}  // namespace vibid
