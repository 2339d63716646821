/*
 * Copyright 2026 The Emova Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "emova/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "emova/errors.hpp"

namespace emova::linalg {

std::vector<double> matvec(const Mat& m, const std::vector<double>& x) {
  if (x.size() != m.cols) throw ValidationError("matvec: dimension mismatch");
  std::vector<double> y(m.rows, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    double acc = 0.0;
    const double* row = &m.a[r * m.cols];
    for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

std::vector<double> matvec_t(const Mat& m, const std::vector<double>& x) {
  if (x.size() != m.rows) throw ValidationError("matvec_t: dimension mismatch");
  std::vector<double> y(m.cols, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = &m.a[r * m.cols];
    const double xi = x[r];
    for (std::size_t c = 0; c < m.cols; ++c) y[c] += row[c] * xi;
  }
  return y;
}

void jacobi_eigen(Mat sym, std::vector<double>& eigenvalues, Mat& eigenvectors) {
  const std::size_t n = sym.rows;
  if (n != sym.cols) throw ValidationError("jacobi_eigen: matrix must be square");

  eigenvectors = Mat(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) eigenvectors.at(i, i) = 1.0;

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(sym.at(i, i)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) scale = std::max(scale, std::abs(sym.at(i, j)));
  const double stop = std::max(scale, 1.0) * 1e-14;

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off = std::max(off, std::abs(sym.at(i, j)));
    if (off <= stop) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = sym.at(p, q);
        if (std::abs(apq) <= stop * 1e-2) continue;
        const double theta = (sym.at(q, q) - sym.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = sym.at(k, p);
          const double akq = sym.at(k, q);
          sym.at(k, p) = c * akp - s * akq;
          sym.at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = sym.at(p, k);
          const double aqk = sym.at(q, k);
          sym.at(p, k) = c * apk - s * aqk;
          sym.at(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = eigenvectors.at(k, p);
          const double vkq = eigenvectors.at(k, q);
          eigenvectors.at(k, p) = c * vkp - s * vkq;
          eigenvectors.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = sym.at(i, i);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return eigenvalues[a] < eigenvalues[b]; });
  std::vector<double> sorted_vals(n);
  Mat sorted_vecs(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    sorted_vals[i] = eigenvalues[order[i]];
    for (std::size_t k = 0; k < n; ++k) sorted_vecs.at(k, i) = eigenvectors.at(k, order[i]);
  }
  eigenvalues = std::move(sorted_vals);
  eigenvectors = std::move(sorted_vecs);
}

std::vector<double> lstsq_min_norm(const Mat& a, const std::vector<double>& b,
                                   double rel_cutoff) {
  if (b.size() != a.rows) throw ValidationError("lstsq_min_norm: dimension mismatch");
  if (rel_cutoff < 0.0) throw ValidationError("lstsq_min_norm: negative cutoff");
  const std::size_t n_rows = a.rows;
  const std::size_t n_cols = a.cols;

  const bool dual = n_rows < n_cols;  // pinv(A) b = A^T pinv(A A^T) b
  const std::size_t n = dual ? n_rows : n_cols;

  Mat gram(n, n, 0.0);
  if (dual) {
    for (std::size_t i = 0; i < n_rows; ++i)
      for (std::size_t j = i; j < n_rows; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n_cols; ++k) acc += a.at(i, k) * a.at(j, k);
        gram.at(i, j) = acc;
        gram.at(j, i) = acc;
      }
  } else {
    for (std::size_t r = 0; r < n_rows; ++r) {
      const double* row = &a.a[r * n_cols];
      for (std::size_t i = 0; i < n_cols; ++i) {
        const double ri = row[i];
        if (ri == 0.0) continue;
        for (std::size_t j = i; j < n_cols; ++j) gram.at(i, j) += ri * row[j];
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) gram.at(j, i) = gram.at(i, j);
  }

  std::vector<double> eigenvalues;
  Mat eigenvectors;
  jacobi_eigen(std::move(gram), eigenvalues, eigenvectors);

  const double lambda_max = eigenvalues.empty() ? 0.0 : eigenvalues.back();
  const double cutoff = lambda_max * rel_cutoff;

  const std::vector<double> rhs = dual ? b : matvec_t(a, b);
  std::vector<double> solved(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (eigenvalues[i] <= cutoff || eigenvalues[i] <= 0.0) continue;
    double proj = 0.0;
    for (std::size_t k = 0; k < n; ++k) proj += eigenvectors.at(k, i) * rhs[k];
    proj /= eigenvalues[i];
    for (std::size_t k = 0; k < n; ++k) solved[k] += proj * eigenvectors.at(k, i);
  }
  return dual ? matvec_t(a, solved) : solved;
}

}  // namespace emova::linalg
