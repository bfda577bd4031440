#ifndef SEQ2SLATE_TENSOR_H_
#define SEQ2SLATE_TENSOR_H_

#include <cstdint>
#include <span>
#include <vector>

namespace seq2slate {

/// Dense row-major tensor of 64-bit floats. All model math runs in double
/// precision; shapes are small (desk-scale models), so a plain
/// vector<double> with shape bookkeeping is all we need.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape);
  Tensor(std::vector<int64_t> shape, std::vector<double> data);

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> view() { return data_; }
  std::span<const double> view() const { return data_; }

  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }
  double& at(int64_t r, int64_t c) { return data_[static_cast<size_t>(r * shape_[1] + c)]; }
  double at(int64_t r, int64_t c) const { return data_[static_cast<size_t>(r * shape_[1] + c)]; }

  /// Row view of a 2-D tensor.
  std::span<double> row(int64_t r) {
    return std::span<double>(data_.data() + r * shape_[1], static_cast<size_t>(shape_[1]));
  }
  std::span<const double> row(int64_t r) const {
    return std::span<const double>(data_.data() + r * shape_[1], static_cast<size_t>(shape_[1]));
  }

  void fill(double v);
  bool all_finite() const;

  bool operator==(const Tensor& other) const {
    return shape_ == other.shape_ && data_ == other.data_;
  }

 private:
  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

}  // namespace seq2slate

#endif  // SEQ2SLATE_TENSOR_H_
