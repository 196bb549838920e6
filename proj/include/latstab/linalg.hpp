#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace latstab {

using Complex = std::complex<double>;

// Fixed-size 2-vector / 2x2 matrix, templated on the scalar so the same
// arithmetic serves real system matrices and complex frequency responses.
template <typename T>
struct Vec2T {
    T v[2]{};

    T& operator[](int i) { return v[i]; }
    const T& operator[](int i) const { return v[i]; }
};

template <typename T>
struct Mat2T {
    T m[2][2]{};

    T& operator()(int r, int c) { return m[r][c]; }
    const T& operator()(int r, int c) const { return m[r][c]; }
};

using Vec2 = Vec2T<double>;
using Mat2 = Mat2T<double>;
using CVec2 = Vec2T<Complex>;
using CMat2 = Mat2T<Complex>;

template <typename T>
Vec2T<T> operator+(const Vec2T<T>& a, const Vec2T<T>& b) {
    return {a[0] + b[0], a[1] + b[1]};
}

template <typename T>
Vec2T<T> operator-(const Vec2T<T>& a, const Vec2T<T>& b) {
    return {a[0] - b[0], a[1] - b[1]};
}

template <typename T>
Vec2T<T> operator*(T s, const Vec2T<T>& a) {
    return {s * a[0], s * a[1]};
}

inline Vec2 operator*(double s, const Vec2& a) { return {s * a[0], s * a[1]}; }

template <typename T>
Vec2T<T> operator-(const Vec2T<T>& a) {
    return {-a[0], -a[1]};
}

template <typename T>
T dot(const Vec2T<T>& a, const Vec2T<T>& b) {
    return a[0] * b[0] + a[1] * b[1];
}

template <typename T>
Mat2T<T> operator+(const Mat2T<T>& a, const Mat2T<T>& b) {
    Mat2T<T> r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = a(i, j) + b(i, j);
    return r;
}

template <typename T>
Mat2T<T> operator-(const Mat2T<T>& a, const Mat2T<T>& b) {
    Mat2T<T> r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = a(i, j) - b(i, j);
    return r;
}

template <typename T>
Mat2T<T> operator*(T s, const Mat2T<T>& a) {
    Mat2T<T> r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = s * a(i, j);
    return r;
}

inline Mat2 operator*(double s, const Mat2& a) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = s * a(i, j);
    return r;
}

template <typename T>
Vec2T<T> operator*(const Mat2T<T>& a, const Vec2T<T>& x) {
    return {a(0, 0) * x[0] + a(0, 1) * x[1], a(1, 0) * x[0] + a(1, 1) * x[1]};
}

template <typename T>
Mat2T<T> operator*(const Mat2T<T>& a, const Mat2T<T>& b) {
    Mat2T<T> r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j);
    return r;
}

// column * row
template <typename T>
Mat2T<T> outer(const Vec2T<T>& col, const Vec2T<T>& row) {
    Mat2T<T> r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = col[i] * row[j];
    return r;
}

template <typename T>
T det(const Mat2T<T>& a) {
    return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
}

template <typename T>
Mat2T<T> identity2() {
    Mat2T<T> r;
    r(0, 0) = T(1);
    r(1, 1) = T(1);
    return r;
}

// Solve A x = b by Cramer's rule; throws when A is singular to working precision.
template <typename T>
Vec2T<T> solve(const Mat2T<T>& a, const Vec2T<T>& b) {
    const T d = det(a);
    double scale = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) scale = std::max(scale, std::abs(a(i, j)));
    if (std::abs(d) <= 1e-14 * scale * scale)
        throw std::domain_error("solve: singular 2x2 system");
    return {(b[0] * a(1, 1) - a(0, 1) * b[1]) / d, (a(0, 0) * b[1] - b[0] * a(1, 0)) / d};
}

template <typename T>
Mat2T<T> inverse(const Mat2T<T>& a) {
    const T d = det(a);
    double scale = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) scale = std::max(scale, std::abs(a(i, j)));
    if (std::abs(d) <= 1e-14 * scale * scale)
        throw std::domain_error("inverse: singular 2x2 matrix");
    Mat2T<T> r;
    r(0, 0) = a(1, 1) / d;
    r(0, 1) = -a(0, 1) / d;
    r(1, 0) = -a(1, 0) / d;
    r(1, 1) = a(0, 0) / d;
    return r;
}

inline CMat2 to_complex(const Mat2& a) {
    CMat2 r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r(i, j) = Complex(a(i, j), 0.0);
    return r;
}

inline CVec2 to_complex(const Vec2& a) { return {Complex(a[0], 0.0), Complex(a[1], 0.0)}; }

}  // namespace latstab
