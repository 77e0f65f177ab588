#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "flatdyn/errors.hpp"
#include "flatdyn/types.hpp"

namespace flatdyn {

/// Descending real part, ties broken by descending imaginary part.
template <typename Scalar>
void sort_eigenvalues(std::vector<std::complex<Scalar>>& values) {
  std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
}

namespace detail {

/// In-place Householder reduction to upper Hessenberg form.
template <typename Scalar>
void reduce_to_hessenberg(MatrixX<Scalar>& a) {
  using std::abs;
  using std::sqrt;
  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    VectorX<Scalar> v = a.col(k).tail(n - k - 1);
    const Scalar alpha = v.norm();
    if (alpha == Scalar(0)) continue;
    const Scalar beta = v(0) >= Scalar(0) ? -alpha : alpha;
    v(0) -= beta;
    const Scalar vnorm2 = v.squaredNorm();
    if (vnorm2 == Scalar(0)) continue;
    // a <- (I - 2vv^T/|v|^2) a (I - 2vv^T/|v|^2)
    auto rows = a.bottomRows(n - k - 1);
    rows -= (Scalar(2) / vnorm2) * v * (v.transpose() * rows);
    auto cols = a.rightCols(n - k - 1);
    cols -= (Scalar(2) / vnorm2) * (cols * v) * v.transpose();
    a.col(k).tail(n - k - 2).setZero();
  }
}

template <typename Scalar>
Scalar copy_sign(Scalar magnitude, Scalar sign_of) {
  return sign_of >= Scalar(0) ? std::abs(magnitude) : -std::abs(magnitude);
}

/// Francis double-shift QR on an upper Hessenberg matrix with deflation and
/// exceptional shifts every 10 stalled sweeps. `budget` bounds total sweeps.
template <typename Scalar>
std::vector<std::complex<Scalar>> hessenberg_qr(MatrixX<Scalar> a, int budget) {
  using std::abs;
  using std::sqrt;
  const int n = static_cast<int>(a.rows());
  std::vector<Scalar> wr(n), wi(n);

  Scalar anorm(0);
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += abs(a(i, j));

  int nn = n - 1;
  Scalar t(0);
  int total = 0;
  while (nn >= 0) {
    int its = 0;
    int l;
    do {
      for (l = nn; l >= 1; --l) {
        Scalar s = abs(a(l - 1, l - 1)) + abs(a(l, l));
        if (s == Scalar(0)) s = anorm;
        if (abs(a(l, l - 1)) + s == s) {
          a(l, l - 1) = Scalar(0);
          break;
        }
      }
      Scalar x = a(nn, nn);
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn] = Scalar(0);
        --nn;
      } else {
        Scalar y = a(nn - 1, nn - 1);
        Scalar w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          const Scalar p = Scalar(0.5) * (y - x);
          const Scalar q = p * p + w;
          Scalar z = sqrt(abs(q));
          x += t;
          if (q >= Scalar(0)) {
            z = p + copy_sign(z, p);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != Scalar(0)) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = Scalar(0);
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn - 1] = z;
            wi[nn] = -z;
          }
          nn -= 2;
        } else {
          if (total >= budget)
            throw ConvergenceError("QR iteration budget of " + std::to_string(budget) + " exhausted");
          if (its > 0 && its % 10 == 0) {
            t += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            const Scalar s = abs(a(nn, nn - 1)) + abs(a(nn - 1, nn - 2));
            y = x = Scalar(0.75) * s;
            w = Scalar(-0.4375) * s * s;
          }
          ++its;
          ++total;

          int m;
          Scalar p(0), q(0), r(0), z(0);
          for (m = nn - 2; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            Scalar s = y - z;
            p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = abs(p) + abs(q) + abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const Scalar u = abs(a(m, m - 1)) * (abs(q) + abs(r));
            const Scalar v = abs(p) * (abs(a(m - 1, m - 1)) + abs(z) + abs(a(m + 1, m + 1)));
            if (u + v == v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = Scalar(0);
            if (i != m + 2) a(i, i - 3) = Scalar(0);
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = Scalar(0);
              if (k != nn - 1) r = a(k + 2, k - 1);
              x = abs(p) + abs(q) + abs(r);
              if (x != Scalar(0)) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            const Scalar s = copy_sign(sqrt(p * p + q * q + r * r), p);
            if (s == Scalar(0)) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
              p = a(k, j) + q * a(k + 1, j);
              if (k != nn - 1) {
                p += r * a(k + 2, j);
                a(k + 2, j) -= p * z;
              }
              a(k + 1, j) -= p * y;
              a(k, j) -= p * x;
            }
            const int mmin = nn < k + 3 ? nn : k + 3;
            for (int i = l; i <= mmin; ++i) {
              p = x * a(i, k) + y * a(i, k + 1);
              if (k != nn - 1) {
                p += z * a(i, k + 2);
                a(i, k + 2) -= p * r;
              }
              a(i, k + 1) -= p * q;
              a(i, k) -= p;
            }
          }
        }
      }
    } while (l < nn - 1);
  }

  std::vector<std::complex<Scalar>> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.emplace_back(wr[i], wi[i]);
  return out;
}

}  // namespace detail

/// Eigenvalues of a small dense real matrix, with multiplicity.
///
/// Closed-form roots of the characteristic polynomial for n <= 2; otherwise
/// Householder reduction to Hessenberg form followed by shifted QR iteration.
/// Throws ConvergenceError when `budget` sweeps do not suffice.
template <typename Scalar>
std::vector<std::complex<Scalar>> eigenvalues(const MatrixX<Scalar>& m, int budget = 10000) {
  using std::abs;
  using std::sqrt;
  const Eigen::Index n = m.rows();
  if (n < 1 || m.cols() != n) throw InvalidArgument("eigenvalues needs a non-empty square matrix");
  if (!m.allFinite()) throw DomainError("matrix has non-finite entries");

  std::vector<std::complex<Scalar>> out;
  if (n == 1) {
    out.emplace_back(m(0, 0), Scalar(0));
  } else if (n == 2) {
    const Scalar half_trace = Scalar(0.5) * (m(0, 0) + m(1, 1));
    const Scalar half_gap = Scalar(0.5) * (m(0, 0) - m(1, 1));
    const Scalar disc = half_gap * half_gap + m(0, 1) * m(1, 0);
    if (disc >= Scalar(0)) {
      const Scalar root = sqrt(disc);
      const Scalar big = half_trace + detail::copy_sign(root, half_trace);
      const Scalar det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
      const Scalar small = big != Scalar(0) ? det / big : half_trace - root;
      out.emplace_back(big, Scalar(0));
      out.emplace_back(small, Scalar(0));
    } else {
      const Scalar root = sqrt(-disc);
      out.emplace_back(half_trace, root);
      out.emplace_back(half_trace, -root);
    }
  } else {
    MatrixX<Scalar> h = m;
    detail::reduce_to_hessenberg(h);
    out = detail::hessenberg_qr(std::move(h), budget);
  }
  sort_eigenvalues(out);
  return out;
}

}  // namespace flatdyn
