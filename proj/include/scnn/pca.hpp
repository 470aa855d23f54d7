#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "scnn/error.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

struct EigenDecomposition {
  std::vector<double> values;  // descending
  Tensor vectors;              // [n x n], column j pairs with values[j]
};

// Cyclic Jacobi rotations for a symmetric matrix. Plenty fast at the
// dimensions this toolkit sees (a few hundred at most).
inline EigenDecomposition jacobi_eigen(Tensor a) {
  if (a.rank() != 2 || a.rows() != a.cols()) {
    throw ShapeError("eigendecomposition needs a square matrix, got " + a.shape_string());
  }
  const std::size_t n = a.rows();
  Tensor v({n, n});
  for (std::size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

  double norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) norm += a[i] * a[i];
  norm = std::sqrt(norm);
  const double stop = 1e-14 * (norm > 0.0 ? norm : 1.0);

  constexpr std::size_t kMaxSweeps = 100;
  for (std::size_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    }
    if (std::sqrt(2.0 * off) <= stop) break;
    if (sweep + 1 == kMaxSweeps) {
      throw NumericError("jacobi eigensolver did not converge in 100 sweeps");
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (apq == 0.0) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a.at(k, p), akq = a.at(k, q);
          a.at(k, p) = c * akp - s * akq;
          a.at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a.at(p, k), aqk = a.at(q, k);
          a.at(p, k) = c * apk - s * aqk;
          a.at(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v.at(k, p), vkq = v.at(k, q);
          v.at(k, p) = c * vkp - s * vkq;
          v.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (a.at(x, x) != a.at(y, y)) return a.at(x, x) > a.at(y, y);
    return x < y;
  });
  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Tensor({n, n});
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a.at(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors.at(i, j) = v.at(i, order[j]);
  }
  return out;
}

struct PcaResult {
  std::vector<double> mean;        // feature-space mean
  Tensor components;               // [dims x d], rows orthonormal
  std::vector<double> eigenvalues; // variance along each kept component
  double total_variance = 0.0;     // trace of the covariance
};

// Principal components of the sample covariance (denominator n-1). With
// fewer samples than features the Gram route gives the same leading
// components at a fraction of the eigenproblem size. Each component's sign
// is fixed by making its largest-magnitude loading positive.
inline PcaResult pca_fit(const Tensor& data, std::size_t dims) {
  if (data.rank() != 2) throw ShapeError("pca needs a [n x d] matrix");
  const std::size_t n = data.rows(), d = data.cols();
  if (n < 2) throw DataError("pca needs at least 2 samples");
  if (dims < 1 || dims > d) {
    throw ConfigError("pca dims " + std::to_string(dims) + " outside 1.." + std::to_string(d));
  }

  PcaResult result;
  result.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = data.row(r);
    for (std::size_t c = 0; c < d; ++c) result.mean[c] += row[c];
  }
  for (double& m : result.mean) m /= static_cast<double>(n);

  Tensor centered({n, d});
  for (std::size_t r = 0; r < n; ++r) {
    const double* src = data.row(r);
    double* dst = centered.row(r);
    for (std::size_t c = 0; c < d; ++c) dst[c] = src[c] - result.mean[c];
  }
  const double denom = static_cast<double>(n - 1);

  result.components = Tensor({dims, d});
  if (d <= n) {
    Tensor cov({d, d});
    for (std::size_t r = 0; r < n; ++r) {
      const double* row = centered.row(r);
      for (std::size_t i = 0; i < d; ++i) {
        const double ri = row[i];
        if (ri == 0.0) continue;
        double* cov_row = cov.row(i);
        for (std::size_t j = 0; j < d; ++j) cov_row[j] += ri * row[j];
      }
    }
    for (std::size_t i = 0; i < cov.size(); ++i) cov[i] /= denom;
    for (std::size_t i = 0; i < d; ++i) result.total_variance += cov.at(i, i);
    const EigenDecomposition eig = jacobi_eigen(std::move(cov));
    result.eigenvalues.assign(eig.values.begin(), eig.values.begin() + dims);
    for (std::size_t k = 0; k < dims; ++k) {
      for (std::size_t i = 0; i < d; ++i) result.components.at(k, i) = eig.vectors.at(i, k);
    }
  } else {
    Tensor gram({n, n});
    for (std::size_t i = 0; i < n; ++i) {
      const double* ri = centered.row(i);
      for (std::size_t j = i; j < n; ++j) {
        const double* rj = centered.row(j);
        double dot = 0.0;
        for (std::size_t c = 0; c < d; ++c) dot += ri[c] * rj[c];
        gram.at(i, j) = dot / denom;
        gram.at(j, i) = gram.at(i, j);
      }
    }
    for (std::size_t i = 0; i < n; ++i) result.total_variance += gram.at(i, i);
    const EigenDecomposition eig = jacobi_eigen(std::move(gram));
    if (dims > n) throw ConfigError("pca dims exceed the sample count on the gram route");
    result.eigenvalues.assign(eig.values.begin(), eig.values.begin() + dims);
    for (std::size_t k = 0; k < dims; ++k) {
      // Lift the Gram eigenvector into feature space and normalize.
      double* comp = result.components.row(k);
      for (std::size_t c = 0; c < d; ++c) comp[c] = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double u = eig.vectors.at(r, k);
        if (u == 0.0) continue;
        const double* row = centered.row(r);
        for (std::size_t c = 0; c < d; ++c) comp[c] += u * row[c];
      }
      double nrm = 0.0;
      for (std::size_t c = 0; c < d; ++c) nrm += comp[c] * comp[c];
      nrm = std::sqrt(nrm);
      if (nrm < 1e-300) {
        throw NumericError("pca component " + std::to_string(k + 1) +
                           " is numerically null; request fewer dims");
      }
      for (std::size_t c = 0; c < d; ++c) comp[c] /= nrm;
    }
  }

  for (std::size_t k = 0; k < dims; ++k) {
    double* comp = result.components.row(k);
    std::size_t arg = 0;
    for (std::size_t c = 1; c < d; ++c) {
      if (std::fabs(comp[c]) > std::fabs(comp[arg])) arg = c;
    }
    if (comp[arg] < 0.0) {
      for (std::size_t c = 0; c < d; ++c) comp[c] = -comp[c];
    }
  }
  return result;
}

inline Tensor pca_transform(const PcaResult& pca, const Tensor& data) {
  if (data.rank() != 2 || data.cols() != pca.mean.size()) {
    throw ShapeError("pca transform input " + data.shape_string() +
                     " does not match fitted dimension " + std::to_string(pca.mean.size()));
  }
  const std::size_t n = data.rows(), d = data.cols(), dims = pca.components.rows();
  Tensor out({n, dims});
  for (std::size_t r = 0; r < n; ++r) {
    const double* src = data.row(r);
    double* dst = out.row(r);
    for (std::size_t k = 0; k < dims; ++k) {
      const double* comp = pca.components.row(k);
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) acc += (src[c] - pca.mean[c]) * comp[c];
      dst[k] = acc;
    }
  }
  return out;
}

inline Tensor pca_project(const Tensor& data, std::size_t dims) {
  return pca_transform(pca_fit(data, dims), data);
}

}  // namespace scnn
