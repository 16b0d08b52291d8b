// Copyright 2026 The spincavity Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#ifdef SPINCAVITY_USE_LAPACKE
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
#endif

namespace spincavity {

using cd = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using VecD = Eigen::VectorXd;
using SpMatC = Eigen::SparseMatrix<cd>;

inline MatC kron(const MatC& a, const MatC& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

inline SpMatC kron_sparse(const SpMatC& a, const SpMatC& b) {
  SpMatC out;
  out = Eigen::kroneckerProduct(a, b);
  return out;
}

inline VecC kron_vec(const VecC& a, const VecC& b) {
  VecC out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

/// Dense matrix exponential (scaling-and-squaring with Pade approximant).
inline MatC expm(const MatC& a) { return a.exp(); }

/// Economy SVD with rank truncation. Keeps at most `max_keep` directions and
/// drops singular values below rel_floor * sigma_max (numerical noise floor).
struct SvdTrunc {
  MatC isometry;           // m x kept, orthonormal columns (left vectors)
  MatC coeff;              // kept x n, equals diag(s) * V^H
  VecD singular_values;    // all min(m,n) values, descending
  long kept = 0;
  double discarded_weight = 0.0;  // sum of discarded s^2 over sum of all s^2
};

namespace detail {

inline void svd_economy(MatC& a, MatC& u, VecD& s, MatC& vh) {
  const long m = a.rows(), n = a.cols(), k = std::min(m, n);
  s.resize(k);
#ifdef SPINCAVITY_USE_LAPACKE
  if (m < n) {
    // A is overwritten with the first m rows of V^H (jobz='O', m < n).
    u.resize(m, m);
    lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'O', m, n, a.data(), m,
                                     s.data(), u.data(), m, u.data(), m);
    if (info != 0) throw std::runtime_error("zgesdd failed, info=" + std::to_string(info));
    vh = a.topRows(m);
  } else {
    // A is overwritten with the first n columns of U (jobz='O', m >= n).
    vh.resize(n, n);
    lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'O', m, n, a.data(), m,
                                     s.data(), vh.data(), n, vh.data(), n);
    if (info != 0) throw std::runtime_error("zgesdd failed, info=" + std::to_string(info));
    u = a.leftCols(n);
  }
#else
  Eigen::BDCSVD<MatC> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  u = svd.matrixU();
  s = svd.singularValues();
  vh = svd.matrixV().adjoint();
#endif
}

}  // namespace detail

inline SvdTrunc svd_truncate(MatC a, long max_keep, double rel_floor = 1e-14) {
  SvdTrunc out;
  MatC u, vh;
  detail::svd_economy(a, u, out.singular_values, vh);
  const VecD& s = out.singular_values;
  const double smax = s.size() ? s[0] : 0.0;
  long rank = 0;
  for (long i = 0; i < s.size(); ++i)
    if (s[i] > rel_floor * smax) ++rank;
  long kept = std::max<long>(1, std::min(rank, max_keep));
  kept = std::min<long>(kept, s.size());
  double total = s.squaredNorm();
  double dropped = s.tail(s.size() - kept).squaredNorm();
  out.kept = kept;
  out.discarded_weight = total > 0 ? dropped / total : 0.0;
  out.isometry = u.leftCols(kept);
  out.coeff = s.head(kept).asDiagonal() * vh.topRows(kept);
  return out;
}

/// Reorders a flat tensor stored row-major over `dims` so that output axis i
/// is input axis perm[i]; the result is row-major over the permuted dims.
inline void permute4(const VecC& in, const std::array<long, 4>& dims,
                     const std::array<int, 4>& perm, VecC& out,
                     std::array<long, 4>& out_dims) {
  std::array<long, 4> in_stride;
  in_stride[3] = 1;
  for (int i = 2; i >= 0; --i) in_stride[i] = in_stride[i + 1] * dims[i + 1];
  for (int i = 0; i < 4; ++i) out_dims[i] = dims[perm[i]];
  out.resize(in.size());
  const long d0 = out_dims[0], d1 = out_dims[1], d2 = out_dims[2], d3 = out_dims[3];
  const long s0 = in_stride[perm[0]], s1 = in_stride[perm[1]],
             s2 = in_stride[perm[2]], s3 = in_stride[perm[3]];
  const cd* src = in.data();
  cd* dst = out.data();
  long idx = 0;
  for (long i0 = 0; i0 < d0; ++i0)
    for (long i1 = 0; i1 < d1; ++i1)
      for (long i2 = 0; i2 < d2; ++i2) {
        const cd* row = src + i0 * s0 + i1 * s1 + i2 * s2;
        for (long i3 = 0; i3 < d3; ++i3) dst[idx++] = row[i3 * s3];
      }
}

/// Deterministic Gaussian offsets: sigma * probit((i+1/2)/n), symmetric about 0.
/// Inverse normal CDF after Acklam; |relative error| < 1.2e-9.
inline double inverse_normal_cdf(double p) {
  if (p <= 0.0 || p >= 1.0) throw std::domain_error("inverse_normal_cdf: p in (0,1) required");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double q, r, x;
  if (p < plow) {
    q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    q = p - 0.5;
    r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  return x;
}

inline std::vector<double> gaussian_quantile_offsets(int n, double sigma) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = sigma * inverse_normal_cdf((i + 0.5) / n);
  return out;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace spincavity
