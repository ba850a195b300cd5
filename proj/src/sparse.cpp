#include "cog/sparse.hpp"

#include "cog/error.hpp"

namespace cog {

SparseVector SparseVector::from_dense(const std::vector<double>& dense, std::uint32_t offset) {
  SparseVector s;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    const auto v = static_cast<float>(dense[i]);
    if (v != 0.0f) {
      s.index.push_back(offset + static_cast<std::uint32_t>(i));
      s.value.push_back(v);
    }
  }
  return s;
}

double SparseVector::dot(const std::vector<double>& w) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < index.size(); ++k) acc += w[index[k]] * static_cast<double>(value[k]);
  return acc;
}

double SparseVector::dot(const SparseVector& o) const {
  double acc = 0.0;
  std::size_t i = 0, j = 0;
  while (i < index.size() && j < o.index.size()) {
    if (index[i] < o.index[j]) {
      ++i;
    } else if (index[i] > o.index[j]) {
      ++j;
    } else {
      acc += static_cast<double>(value[i]) * static_cast<double>(o.value[j]);
      ++i;
      ++j;
    }
  }
  return acc;
}

double SparseVector::squared_norm() const {
  double acc = 0.0;
  for (float v : value) acc += static_cast<double>(v) * static_cast<double>(v);
  return acc;
}

void SparseVector::add_to(std::vector<double>& w, double scale) const {
  for (std::size_t k = 0; k < index.size(); ++k) w[index[k]] += scale * static_cast<double>(value[k]);
}

void SparseVector::append(const SparseVector& tail) {
  if (!tail.index.empty() && !index.empty() && tail.index.front() <= index.back()) {
    throw Error(ErrorCode::kInvalidArgument, "sparse append requires increasing indices");
  }
  index.insert(index.end(), tail.index.begin(), tail.index.end());
  value.insert(value.end(), tail.value.begin(), tail.value.end());
}

std::vector<double> SparseVector::to_dense(std::size_t dim) const {
  std::vector<double> d(dim, 0.0);
  for (std::size_t k = 0; k < index.size(); ++k) d[index[k]] = static_cast<double>(value[k]);
  return d;
}

SparseVector sparse_difference(const SparseVector& a, const SparseVector& b) {
  SparseVector out;
  std::size_t i = 0, j = 0;
  auto push = [&](std::uint32_t idx, float v) {
    if (v != 0.0f) {
      out.index.push_back(idx);
      out.value.push_back(v);
    }
  };
  while (i < a.index.size() || j < b.index.size()) {
    if (j >= b.index.size() || (i < a.index.size() && a.index[i] < b.index[j])) {
      push(a.index[i], a.value[i]);
      ++i;
    } else if (i >= a.index.size() || b.index[j] < a.index[i]) {
      push(b.index[j], -b.value[j]);
      ++j;
    } else {
      push(a.index[i], a.value[i] - b.value[j]);
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace cog
