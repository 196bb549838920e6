#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <stdexcept>
#include <vector>

#include "linalg.hpp"

namespace latstab {

/// Real-coefficient polynomial in the spatial Laplace variable s (units 1/m).
/// Coefficients are stored in ascending degree; trailing zeros are trimmed so
/// degree() is exact. The zero polynomial has an empty coefficient vector.
class Poly {
public:
    Poly() = default;
    Poly(std::initializer_list<double> ascending) : c_(ascending) { trim(); }
    explicit Poly(std::vector<double> ascending) : c_(std::move(ascending)) { trim(); }

    static Poly constant(double v) { return Poly{v}; }
    static Poly monomial(int degree, double coeff = 1.0) {
        std::vector<double> c(static_cast<size_t>(degree) + 1, 0.0);
        c.back() = coeff;
        return Poly(std::move(c));
    }

    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }

    double coeff(int k) const {
        return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[static_cast<size_t>(k)] : 0.0;
    }
    const std::vector<double>& coeffs() const { return c_; }

    double leading() const {
        if (c_.empty()) throw std::domain_error("Poly::leading: zero polynomial");
        return c_.back();
    }

    Complex eval(Complex s) const {
        Complex acc(0.0, 0.0);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
        return acc;
    }
    double eval(double x) const {
        double acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
        return acc;
    }

    Poly derivative() const {
        if (c_.size() <= 1) return Poly{};
        std::vector<double> d(c_.size() - 1);
        for (size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
        return Poly(std::move(d));
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (size_t k = 0; k < c.size(); ++k) c[k] = a.coeff(static_cast<int>(k)) + b.coeff(static_cast<int>(k));
        return Poly(std::move(c));
    }
    friend Poly operator-(const Poly& a, const Poly& b) {
        std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (size_t k = 0; k < c.size(); ++k) c[k] = a.coeff(static_cast<int>(k)) - b.coeff(static_cast<int>(k));
        return Poly(std::move(c));
    }
    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return Poly{};
        std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
        for (size_t i = 0; i < a.c_.size(); ++i)
            for (size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return Poly(std::move(c));
    }
    friend Poly operator*(double s, const Poly& a) {
        std::vector<double> c(a.c_);
        for (double& x : c) x *= s;
        return Poly(std::move(c));
    }
    friend Poly operator-(const Poly& a) { return -1.0 * a; }

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
    }
    std::vector<double> c_;
};

/// Strict Hurwitz test by the Routh table. A row of (near-)zeros means roots
/// placed symmetrically about the origin or on the imaginary axis, which can
/// never be strictly Hurwitz, so the verdict is immediate. An isolated zero
/// first-column pivot is replaced by +1e-12 times the row scale; tests
/// cross-check this handling against a root-finding oracle.
inline bool routh_hurwitz(const Poly& p) {
    if (p.is_zero()) throw std::invalid_argument("routh_hurwitz: zero polynomial");
    const int n = p.degree();
    if (n == 0) return true;  // no roots

    // Normalize so the leading coefficient is positive.
    std::vector<double> c(p.coeffs());
    if (c.back() < 0.0)
        for (double& x : c) x = -x;

    double scale = 0.0;
    for (double x : c) scale = std::max(scale, std::abs(x));

    // First table row holds degrees n, n-2, ...; second holds n-1, n-3, ...
    // pos = (n-k)/2 already places the highest degree at index 0.
    const size_t w = static_cast<size_t>(n) / 2 + 1;
    std::vector<double> upper(w, 0.0), lower(w, 0.0);
    for (int k = 0; k <= n; ++k) {
        const int pos = (n - k) / 2;
        if ((n - k) % 2 == 0)
            upper[static_cast<size_t>(pos)] = c[static_cast<size_t>(k)];
        else
            lower[static_cast<size_t>(pos)] = c[static_cast<size_t>(k)];
    }

    const double tol = 1e-12 * scale;
    std::vector<double> first_col;
    first_col.push_back(upper[0]);

    std::vector<double> prev = upper, cur = lower;
    for (int row = 1; row <= n; ++row) {
        bool all_zero = true;
        for (double x : cur)
            if (std::abs(x) > tol) all_zero = false;
        if (all_zero) return false;  // symmetric root pattern: not strictly Hurwitz

        double pivot = cur[0];
        if (std::abs(pivot) <= tol) pivot = tol > 0.0 ? tol : 1e-12;
        first_col.push_back(pivot);

        if (row == n) break;
        std::vector<double> next(cur.size(), 0.0);
        for (size_t j = 0; j + 1 < cur.size(); ++j)
            next[j] = (pivot * prev[j + 1] - prev[0] * cur[j + 1]) / pivot;
        prev = cur;
        prev[0] = pivot;
        cur = next;
    }

    for (double x : first_col)
        if (x <= 0.0) return false;
    return true;
}

}  // namespace latstab
