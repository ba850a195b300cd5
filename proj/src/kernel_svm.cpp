#include "cog/kernel_svm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "cog/binary_io.hpp"
#include "cog/error.hpp"

namespace cog {

namespace {

constexpr double kTau = 1e-12;
constexpr char kMagic[8] = {'C', 'O', 'G', 'K', 'S', 'V', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

double rbf_kernel(const FeatureRow& a, const FeatureRow& b, double gamma) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    d += t * t;
  }
  return std::exp(-gamma * d);
}

double KernelSVMModel::decision(const FeatureRow& x) const {
  double s = bias;
  for (std::size_t i = 0; i < support.size(); ++i) s += coef[i] * rbf_kernel(support[i], x, gamma);
  return s;
}

KernelSVMModel train_rbf_svm(const std::vector<FeatureRow>& x, const std::vector<int>& y,
                             const KernelSVMConfig& config) {
  const std::size_t n = x.size();
  if (n != y.size()) throw Error(ErrorCode::kInvalidArgument, "feature and label counts differ");
  bool pos = false, neg = false;
  for (int l : y) {
    if (l == 1) pos = true;
    else if (l == -1) neg = true;
    else throw Error(ErrorCode::kInvalidArgument, "labels must be +1 or -1");
  }
  if (!pos || !neg) throw Error(ErrorCode::kSingleClass, "kernel SVM needs both classes");
  if (!(config.C > 0.0) || !(config.gamma > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "C and gamma must be positive");
  }
  const double C = config.C;
  std::vector<double> K(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    K[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      K[i * n + j] = K[j * n + i] = rbf_kernel(x[i], x[j], config.gamma);
    }
  }
  std::vector<double> alpha(n, 0.0), G(n, -1.0);
  auto yd = [&](std::size_t t) { return static_cast<double>(y[t]); };
  auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0); };
  auto in_low = [&](std::size_t t) { return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < C); };

  KernelSVMModel model;
  model.gamma = config.gamma;
  model.C = C;
  int it = 0;
  for (; it < config.max_iterations; ++it) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -yd(t) * G[t] > gmax) {
        gmax = -yd(t) * G[t];
        i = t;
      }
    }
    double gmin = std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -yd(t) * G[t];
      gmin = std::min(gmin, v);
      if (i == n) continue;
      const double b = gmax - v;
      if (b > 0.0) {
        double a = K[i * n + i] + K[t * n + t] - 2.0 * K[i * n + t];
        if (a <= 0.0) a = kTau;
        const double obj = -(b * b) / a;
        if (obj < best) {
          best = obj;
          j = t;
        }
      }
    }
    if (i == n || j == n || gmax - gmin < config.tolerance) {
      model.converged = true;
      break;
    }
    // Two-variable subproblem (libsvm update without shrinking).
    const double old_ai = alpha[i], old_aj = alpha[j];
    double quad = K[i * n + i] + K[j * n + j] - 2.0 * K[i * n + j];
    if (quad <= 0.0) quad = kTau;
    if (y[i] != y[j]) {
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0 && alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = diff;
      } else if (diff <= 0.0 && alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0 && alpha[i] > C) {
        alpha[i] = C;
        alpha[j] = C - diff;
      } else if (diff <= 0.0 && alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      const double delta = (G[i] - G[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C && alpha[i] > C) {
        alpha[i] = C;
        alpha[j] = sum - C;
      } else if (sum <= C && alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C && alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = sum - C;
      } else if (sum <= C && alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_ai, dj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      G[t] += yd(t) * (yd(i) * K[t * n + i] * di + yd(j) * K[t * n + j] * dj);
    }
  }
  model.iterations = it;

  // Bias from free vectors, else the midpoint of the feasible interval.
  double sum_free = 0.0, ub = std::numeric_limits<double>::infinity(),
         lb = -std::numeric_limits<double>::infinity();
  int free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = yd(t) * G[t];
    if (alpha[t] >= C) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      sum_free += yg;
    }
  }
  double rho;
  if (free_count > 0) rho = sum_free / free_count;
  else if (std::isfinite(ub) && std::isfinite(lb)) rho = 0.5 * (ub + lb);
  else rho = std::isfinite(ub) ? ub : (std::isfinite(lb) ? lb : 0.0);
  model.bias = -rho;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support.push_back(x[t]);
      model.coef.push_back(alpha[t] * yd(t));
    }
  }
  return model;
}

double median_squared_distance(const std::vector<FeatureRow>& x) {
  std::vector<double> d;
  const std::size_t n = x.size();
  const std::size_t stride = std::max<std::size_t>(1, n / 200);
  for (std::size_t i = 0; i < n; i += stride) {
    for (std::size_t j = i + stride; j < n; j += stride) {
      double s = 0.0;
      for (std::size_t k = 0; k < x[i].size(); ++k) {
        const double t = x[i][k] - x[j][k];
        s += t * t;
      }
      if (s > 0.0) d.push_back(s);
    }
  }
  if (d.empty()) return 1.0;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
  return d[d.size() / 2];
}

double select_rbf_gamma(const std::vector<FeatureRow>& x, const std::vector<int>& y, double C) {
  const double base = 1.0 / median_squared_distance(x);
  double best_gamma = base, best_acc = -1.0;
  for (int e = -4; e <= 4; ++e) {
    const double gamma = std::ldexp(base, e);
    std::size_t correct = 0, total = 0;
    for (int fold = 0; fold < 3; ++fold) {
      std::vector<FeatureRow> tx, vx;
      std::vector<int> ty, vy;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (static_cast<int>(i % 3) == fold) {
          vx.push_back(x[i]);
          vy.push_back(y[i]);
        } else {
          tx.push_back(x[i]);
          ty.push_back(y[i]);
        }
      }
      const bool both = std::count(ty.begin(), ty.end(), 1) > 0 && std::count(ty.begin(), ty.end(), -1) > 0;
      if (!both || vx.empty()) continue;
      const auto model = train_rbf_svm(tx, ty, {C, gamma, 1e-3, 1000000});
      for (std::size_t i = 0; i < vx.size(); ++i) {
        correct += ((model.decision(vx[i]) >= 0.0 ? 1 : -1) == vy[i]) ? 1 : 0;
        ++total;
      }
    }
    const double acc = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    if (acc > best_acc) {
      best_acc = acc;
      best_gamma = gamma;
    }
  }
  return best_gamma;
}

void KernelSVMModel::write(std::ostream& out) const {
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kVersion);
  write_f64(out, gamma);
  write_f64(out, C);
  write_f64(out, bias);
  write_u32(out, static_cast<std::uint32_t>(support.size()));
  write_u32(out, static_cast<std::uint32_t>(support.empty() ? 0 : support.front().size()));
  for (std::size_t i = 0; i < support.size(); ++i) {
    write_f64(out, coef[i]);
    for (double v : support[i]) write_f64(out, v);
  }
}

KernelSVMModel KernelSVMModel::read(std::istream& in) {
  char magic[8];
  read_exact(in, magic, sizeof magic);
  if (!std::equal(magic, magic + 8, kMagic)) throw Error(ErrorCode::kMalformed, "not a kernel SVM model");
  if (read_u32(in) != kVersion) throw Error(ErrorCode::kVersionMismatch, "unsupported kernel model version");
  KernelSVMModel m;
  m.gamma = read_f64(in);
  m.C = read_f64(in);
  m.bias = read_f64(in);
  const std::uint32_t count = read_u32(in);
  const std::uint32_t dim = read_u32(in);
  m.converged = true;
  for (std::uint32_t i = 0; i < count; ++i) {
    m.coef.push_back(read_f64(in));
    FeatureRow row(dim);
    for (auto& v : row) v = read_f64(in);
    m.support.push_back(std::move(row));
  }
  return m;
}

}  // namespace cog
