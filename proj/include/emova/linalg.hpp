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

#pragma once

#include <cstddef>
#include <vector>

namespace emova::linalg {

// Dense row-major matrix of doubles.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

// y = M x
std::vector<double> matvec(const Mat& m, const std::vector<double>& x);

// y = M^T x
std::vector<double> matvec_t(const Mat& m, const std::vector<double>& x);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Returns eigenvalues (ascending) and matching eigenvector columns.
void jacobi_eigen(Mat sym, std::vector<double>& eigenvalues, Mat& eigenvectors);

// Minimum-norm least-squares solution of A x = b through the pseudo-inverse;
// Gram eigenvalues below max * rel_cutoff count as rank deficiency and drop
// out of the solution. Works through the smaller of A^T A and A A^T.
std::vector<double> lstsq_min_norm(const Mat& a, const std::vector<double>& b,
                                   double rel_cutoff = 1e-12);

}  // namespace emova::linalg
