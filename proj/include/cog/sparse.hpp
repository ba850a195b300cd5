#pragma once

#include <cstdint>
#include <vector>

namespace cog {

// Compressed feature vector: strictly increasing indices with float values.
struct SparseVector {
  std::vector<std::uint32_t> index;
  std::vector<float> value;

  static SparseVector from_dense(const std::vector<double>& dense, std::uint32_t offset = 0);

  std::size_t nnz() const { return index.size(); }
  double dot(const std::vector<double>& w) const;
  double dot(const SparseVector& other) const;
  double squared_norm() const;
  void add_to(std::vector<double>& w, double scale) const;
  void append(const SparseVector& tail);
  std::vector<double> to_dense(std::size_t dim) const;
};

// a - b as a sparse vector.
SparseVector sparse_difference(const SparseVector& a, const SparseVector& b);

}  // namespace cog
