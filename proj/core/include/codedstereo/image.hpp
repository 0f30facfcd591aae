#pragma once

#include <array>
#include <cassert>
#include <cstddef>
#include <vector>

namespace cs {

// Dense row-major 2D array of doubles. Row 0 is the top of the image.
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, double value = 0.0)
      : h_(height), w_(width), data_(static_cast<size_t>(height) * width, value) {
    assert(height >= 0 && width >= 0);
  }

  int height() const { return h_; }
  int width() const { return w_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int y, int x) {
    assert(y >= 0 && y < h_ && x >= 0 && x < w_);
    return data_[static_cast<size_t>(y) * w_ + x];
  }
  double operator()(int y, int x) const {
    assert(y >= 0 && y < h_ && x >= 0 && x < w_);
    return data_[static_cast<size_t>(y) * w_ + x];
  }
  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* row(int y) { return data_.data() + static_cast<size_t>(y) * w_; }
  const double* row(int y) const { return data_.data() + static_cast<size_t>(y) * w_; }

  bool same_shape(const Grid& o) const { return h_ == o.h_ && w_ == o.w_; }

  void fill(double v) { data_.assign(data_.size(), v); }

 private:
  int h_ = 0;
  int w_ = 0;
  std::vector<double> data_;
};

// Three-channel image, planar storage, channel order R, G, B.
struct Image {
  std::array<Grid, 3> ch;

  Image() = default;
  Image(int height, int width, double value = 0.0) {
    for (auto& c : ch) c = Grid(height, width, value);
  }

  int height() const { return ch[0].height(); }
  int width() const { return ch[0].width(); }

  Grid& operator[](int c) { return ch[c]; }
  const Grid& operator[](int c) const { return ch[c]; }
};

double grid_sum(const Grid& g);
double grid_min(const Grid& g);
double grid_max(const Grid& g);
double grid_mean(const Grid& g);
bool grid_finite(const Grid& g);

void clip01(Grid& g);
void clip01(Image& img);

// Mean over non-overlapping factor x factor blocks. Height and width must be
// divisible by factor.
Grid downsample_mean(const Grid& g, int factor);

Grid transpose(const Grid& g);

// g shifted right by shift columns (new x = old x + shift), replicating the
// edge column. Negative shift moves left.
Grid shift_columns_replicate(const Grid& g, int shift);

}  // namespace cs
