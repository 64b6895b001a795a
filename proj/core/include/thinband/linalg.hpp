#pragma once

#include "thinband/scalar.hpp"

#include <array>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>

namespace thinband {

template <typename T, int N>
struct Vec {
  std::array<T, N> v{};

  Vec() = default;
  Vec(std::initializer_list<T> init) {
    if (static_cast<int>(init.size()) != N) throw std::invalid_argument("Vec: bad initializer size");
    int i = 0;
    for (auto& x : init) v[i++] = x;
  }

  T& operator[](int i) { return v[static_cast<size_t>(i)]; }
  const T& operator[](int i) const { return v[static_cast<size_t>(i)]; }
  static constexpr int size() { return N; }

  Vec operator+(const Vec& o) const {
    Vec r;
    for (int i = 0; i < N; ++i) r[i] = v[static_cast<size_t>(i)] + o[i];
    return r;
  }
  Vec operator-(const Vec& o) const {
    Vec r;
    for (int i = 0; i < N; ++i) r[i] = v[static_cast<size_t>(i)] - o[i];
    return r;
  }
  Vec operator*(const T& s) const {
    Vec r;
    for (int i = 0; i < N; ++i) r[i] = v[static_cast<size_t>(i)] * s;
    return r;
  }
  bool operator==(const Vec& o) const { return v == o.v; }
};

template <typename T, int N>
T dot(const Vec<T, N>& a, const Vec<T, N>& b) {
  T s = a[0] * b[0];
  for (int i = 1; i < N; ++i) s = s + a[i] * b[i];
  return s;
}

// Row-major R x C matrix.
template <typename T, int R, int C>
struct Mat {
  std::array<T, static_cast<size_t>(R) * C> m{};

  T& operator()(int r, int c) { return m[static_cast<size_t>(r) * C + static_cast<size_t>(c)]; }
  const T& operator()(int r, int c) const {
    return m[static_cast<size_t>(r) * C + static_cast<size_t>(c)];
  }

  static Mat identity() {
    static_assert(R == C);
    Mat I;
    for (int i = 0; i < R; ++i) I(i, i) = T(1);
    return I;
  }

  Vec<T, R> operator*(const Vec<T, C>& x) const {
    Vec<T, R> y;
    for (int r = 0; r < R; ++r) {
      T s = (*this)(r, 0) * x[0];
      for (int c = 1; c < C; ++c) s = s + (*this)(r, c) * x[c];
      y[r] = s;
    }
    return y;
  }

  template <int K>
  Mat<T, R, K> operator*(const Mat<T, C, K>& o) const {
    Mat<T, R, K> out;
    for (int r = 0; r < R; ++r)
      for (int k = 0; k < K; ++k) {
        T s = (*this)(r, 0) * o(0, k);
        for (int c = 1; c < C; ++c) s = s + (*this)(r, c) * o(c, k);
        out(r, k) = s;
      }
    return out;
  }

  Mat operator+(const Mat& o) const {
    Mat r;
    for (size_t i = 0; i < m.size(); ++i) r.m[i] = m[i] + o.m[i];
    return r;
  }
  Mat operator-(const Mat& o) const {
    Mat r;
    for (size_t i = 0; i < m.size(); ++i) r.m[i] = m[i] - o.m[i];
    return r;
  }
  Mat operator*(const T& s) const {
    Mat r;
    for (size_t i = 0; i < m.size(); ++i) r.m[i] = m[i] * s;
    return r;
  }
  bool operator==(const Mat& o) const { return m == o.m; }
};

// Row vector times matrix: (1xR) * (RxC) -> (1xC).
template <typename T, int R, int C>
Vec<T, C> rowmul(const Vec<T, R>& x, const Mat<T, R, C>& a) {
  Vec<T, C> y;
  for (int c = 0; c < C; ++c) {
    T s = x[0] * a(0, c);
    for (int r = 1; r < R; ++r) s = s + x[r] * a(r, c);
    y[c] = s;
  }
  return y;
}

using Vec3i = Vec<std::int64_t, 3>;
using Vec4i = Vec<std::int64_t, 4>;
using Vec9i = Vec<std::int64_t, 9>;
using Mat3i = Mat<std::int64_t, 3, 3>;
using Mat4i = Mat<std::int64_t, 4, 4>;
using Mat9i = Mat<std::int64_t, 9, 9>;

using Vec3s = Vec<Scalar, 3>;
using Vec4s = Vec<Scalar, 4>;
using Vec9s = Vec<Scalar, 9>;
using Mat3s = Mat<Scalar, 3, 3>;

template <typename T, int N, int M>
Vec<Scalar, N> to_scalar(const Vec<T, N>& v, int prec = Scalar::kDefaultPrec) {
  Vec<Scalar, N> r;
  for (int i = 0; i < N; ++i) r[i] = Scalar(static_cast<long>(v[i]), prec);
  return r;
}

template <int R, int C>
Mat<Scalar, R, C> to_scalar(const Mat<std::int64_t, R, C>& a, int prec = Scalar::kDefaultPrec) {
  Mat<Scalar, R, C> r;
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) r(i, j) = Scalar(static_cast<long>(a(i, j)), prec);
  return r;
}

template <typename T, int N>
Vec<Scalar, N> to_scalar_vec(const Vec<T, N>& v, int prec = Scalar::kDefaultPrec) {
  return to_scalar<T, N, 0>(v, prec);
}

}  // namespace thinband
