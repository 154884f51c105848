#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace reann {

// Row-major dense 2-D array. Networks here have at most a few hundred
// weights, so nothing fancier is warranted.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  void fill(const T& value) { std::fill(data_.begin(), data_.end(), value); }

  // Drops / inserts whole rows or columns, keeping the rest in place.
  void erase_row(std::size_t r) {
    data_.erase(data_.begin() + r * cols_, data_.begin() + (r + 1) * cols_);
    --rows_;
  }
  void erase_col(std::size_t c) {
    std::vector<T> out;
    out.reserve(rows_ * (cols_ - 1));
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = 0; k < cols_; ++k)
        if (k != c) out.push_back((*this)(r, k));
    data_ = std::move(out);
    --cols_;
  }
  void append_row(std::span<const T> values) {
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }
  void append_col(std::span<const T> values) {
    std::vector<T> out;
    out.reserve(rows_ * (cols_ + 1));
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t k = 0; k < cols_; ++k) out.push_back((*this)(r, k));
      out.push_back(values[r]);
    }
    data_ = std::move(out);
    ++cols_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = Grid<double>;
using Mask = Grid<unsigned char>;

}  // namespace reann
