#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wkstab/errors.hpp"

namespace wkstab {

// Exact arithmetic throughout the geometric core. Expression templates are
// disabled so that `auto` always deduces a plain number type.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;

using Point = std::vector<Rational>;

inline double to_double(const Rational& r) { return static_cast<double>(r); }

inline Integer floor_rational(const Rational& r) {
    Integer n = numerator(r), d = denominator(r);  // d > 0 canonically
    Integer q = n / d;
    if (n % d != 0 && n < 0) --q;
    return q;
}

inline Integer ceil_rational(const Rational& r) { return -floor_rational(-r); }

/// Parses "p/q", plain integers, and decimal literals like "-1.25" (all exact).
inline Rational parse_rational(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw InvalidArgument("empty rational literal");
    auto slash = s.find('/');
    try {
        if (slash != std::string::npos) {
            Integer num(s.substr(0, slash));
            Integer den(s.substr(slash + 1));
            if (den == 0) throw InvalidArgument("zero denominator in '" + text + "'");
            return Rational(num, den);
        }
        auto dot = s.find('.');
        if (dot == std::string::npos) return Rational(Integer(s));
        std::string head = s.substr(0, dot), tail = s.substr(dot + 1);
        if (head.empty() || head == "-" || head == "+") head += "0";
        bool neg = head[0] == '-';
        Integer ipart(head);
        Integer scale = 1;
        Integer frac = 0;
        for (char c : tail) {
            if (!std::isdigit(static_cast<unsigned char>(c)))
                throw InvalidArgument("bad rational literal '" + text + "'");
            frac = frac * 10 + (c - '0');
            scale *= 10;
        }
        Rational r = Rational(ipart) + (neg ? -1 : 1) * Rational(frac, scale);
        return r;
    } catch (const std::exception&) {
        throw InvalidArgument("bad rational literal '" + text + "'");
    }
}

/// Canonical form: "p" for integers, "p/q" otherwise.
inline std::string rational_to_string(const Rational& r) {
    Integer n = numerator(r), d = denominator(r);
    if (d == 1) return n.str();
    return n.str() + "/" + d.str();
}

/// A scalar that is exact when every input was exact and a double otherwise.
/// Mirrors the two integration paths: rational quadrature vs. numeric rules.
class Value {
public:
    Value() : v_(Rational(0)) {}
    Value(Rational r) : v_(std::move(r)) {}
    Value(const Integer& i) : v_(Rational(i)) {}
    Value(int i) : v_(Rational(i)) {}
    Value(double d) : v_(d) {}

    bool is_exact() const { return std::holds_alternative<Rational>(v_); }
    const Rational& exact() const {
        if (!is_exact()) throw InvalidArgument("Value is not exact");
        return std::get<Rational>(v_);
    }
    double as_double() const {
        return is_exact() ? to_double(std::get<Rational>(v_)) : std::get<double>(v_);
    }

    Value operator-() const {
        return is_exact() ? Value(Rational(-exact())) : Value(-as_double());
    }
    friend Value operator+(const Value& a, const Value& b) {
        if (a.is_exact() && b.is_exact()) return Value(Rational(a.exact() + b.exact()));
        return Value(a.as_double() + b.as_double());
    }
    friend Value operator-(const Value& a, const Value& b) { return a + (-b); }
    friend Value operator*(const Value& a, const Value& b) {
        if (a.is_exact() && b.is_exact()) return Value(Rational(a.exact() * b.exact()));
        return Value(a.as_double() * b.as_double());
    }
    friend Value operator/(const Value& a, const Value& b) {
        if (a.is_exact() && b.is_exact()) {
            if (b.exact() == 0) throw InvalidArgument("Value division by zero");
            return Value(Rational(a.exact() / b.exact()));
        }
        return Value(a.as_double() / b.as_double());
    }
    Value& operator+=(const Value& o) { return *this = *this + o; }
    Value& operator-=(const Value& o) { return *this = *this - o; }
    Value& operator*=(const Value& o) { return *this = *this * o; }

    friend bool operator==(const Value& a, const Value& b) {
        if (a.is_exact() && b.is_exact()) return a.exact() == b.exact();
        return a.as_double() == b.as_double();
    }
    friend bool operator<(const Value& a, const Value& b) {
        if (a.is_exact() && b.is_exact()) return a.exact() < b.exact();
        return a.as_double() < b.as_double();
    }
    friend bool operator>(const Value& a, const Value& b) { return b < a; }
    friend bool operator<=(const Value& a, const Value& b) { return !(b < a); }
    friend bool operator>=(const Value& a, const Value& b) { return !(a < b); }

    friend Value abs(const Value& a) {
        return a.is_exact() ? Value(Rational(abs(a.exact()))) : Value(std::abs(a.as_double()));
    }

    std::string str() const;

private:
    std::variant<Rational, double> v_;
};

namespace detail {

/// FNV-1a, used for content-addressed output names and determinism hashes.
inline std::uint64_t fnv1a(const std::string& data, std::uint64_t seed = 1469598103934665603ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a_hex(const std::string& data) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a(data);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

/// Doubles formatted with 12 significant digits; keeps reports reproducible.
inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return std::string(buf);
}

}  // namespace detail

inline std::string Value::str() const {
    return is_exact() ? rational_to_string(exact()) : detail::format_double(as_double());
}

// ---------------------------------------------------------------------------
// Small dense linear algebra. Everything here is sized by the ambient
// dimension (n <= 6) or the affine basis (n+1), so plain Gaussian elimination
// is all that is ever needed.

namespace linalg {

using RatVec = std::vector<Rational>;
using RatMat = std::vector<std::vector<Rational>>;

template <class T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
    T s = T(0);
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Rational dot_iq(const std::vector<Integer>& a, const Point& b) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += Rational(a[i]) * b[i];
    return s;
}

template <class T>
std::vector<T> sub(const std::vector<T>& a, const std::vector<T>& b) {
    std::vector<T> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

/// Solves A x = b exactly; returns nullopt when A is singular.
inline std::optional<RatVec> solve(RatMat A, RatVec b) {
    const std::size_t n = A.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && A[piv][col] == 0) ++piv;
        if (piv == n) return std::nullopt;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        Rational p = A[col][col];
        for (std::size_t j = col; j < n; ++j) A[col][j] /= p;
        b[col] /= p;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || A[r][col] == 0) continue;
            Rational f = A[r][col];
            for (std::size_t j = col; j < n; ++j) A[r][j] -= f * A[col][j];
            b[r] -= f * b[col];
        }
    }
    return b;
}

/// Partial-pivot solve in doubles. Returns nullopt when the pivot collapses;
/// cond_estimate (max/min pivot ratio) reported for diagnostics.
inline std::optional<std::vector<double>> solve_double(std::vector<std::vector<double>> A,
                                                       std::vector<double> b,
                                                       double* cond_estimate = nullptr) {
    const std::size_t n = A.size();
    double pmax = 0.0, pmin = 0.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        double p = std::abs(A[col][col]);
        if (col == 0) pmax = pmin = p;
        pmax = std::max(pmax, p);
        pmin = std::min(pmin, p);
        if (p < 1e-300) return std::nullopt;
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = A[r][col] / A[col][col];
            for (std::size_t j = col; j < n; ++j) A[r][j] -= f * A[col][j];
            b[r] -= f * b[col];
        }
    }
    if (cond_estimate) *cond_estimate = pmin > 0 ? pmax / pmin : 1e300;
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
        x[i] = s / A[i][i];
    }
    return x;
}

inline Rational determinant(RatMat A) {
    const std::size_t n = A.size();
    Rational det = 1;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && A[piv][col] == 0) ++piv;
        if (piv == n) return Rational(0);
        if (piv != col) {
            std::swap(A[piv], A[col]);
            det = -det;
        }
        det *= A[col][col];
        for (std::size_t r = col + 1; r < n; ++r) {
            if (A[r][col] == 0) continue;
            Rational f = A[r][col] / A[col][col];
            for (std::size_t j = col; j < n; ++j) A[r][j] -= f * A[col][j];
        }
    }
    return det;
}

/// Row rank over the rationals.
inline int rank(RatMat A) {
    if (A.empty()) return 0;
    const std::size_t rows = A.size(), cols = A[0].size();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && A[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(A[piv], A[r]);
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || A[i][c] == 0) continue;
            Rational f = A[i][c] / A[r][c];
            for (std::size_t j = c; j < cols; ++j) A[i][j] -= f * A[r][j];
        }
        ++r;
    }
    return static_cast<int>(r);
}

/// One-dimensional kernel of an (n-1)-rank matrix, or nullopt.
inline std::optional<RatVec> kernel_vector(RatMat A, std::size_t cols) {
    const std::size_t rows = A.size();
    std::vector<int> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && A[piv][c] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(A[piv], A[r]);
        Rational p = A[r][c];
        for (std::size_t j = 0; j < cols; ++j) A[r][j] /= p;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || A[i][c] == 0) continue;
            Rational f = A[i][c];
            for (std::size_t j = 0; j < cols; ++j) A[i][j] -= f * A[r][j];
        }
        pivot_col.push_back(static_cast<int>(c));
        ++r;
    }
    if (r + 1 != cols) return std::nullopt;  // kernel not one-dimensional
    // Identify the free column and back-substitute.
    std::vector<bool> is_pivot(cols, false);
    for (int c : pivot_col) is_pivot[c] = true;
    std::size_t free_col = 0;
    while (free_col < cols && is_pivot[free_col]) ++free_col;
    RatVec k(cols, Rational(0));
    k[free_col] = 1;
    for (std::size_t i = 0; i < r; ++i) k[pivot_col[i]] = -A[i][free_col];
    return k;
}

/// Scales a rational direction to a primitive integer vector (gcd 1),
/// preserving orientation.
inline std::vector<Integer> primitive_direction(const RatVec& v) {
    Integer l = 1;
    for (const auto& x : v) l = lcm(l, denominator(x));
    std::vector<Integer> w(v.size());
    Integer g = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        w[i] = numerator(v[i]) * (l / denominator(v[i]));
        g = gcd(g, w[i]);
    }
    if (g == 0) throw InvalidArgument("zero direction has no primitive form");
    for (auto& x : w) x /= g;
    return w;
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
inline std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> A) {
    const std::size_t n = A.size();
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += A[i][j] * A[i][j];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(A[p][q]) < 1e-18) continue;
                double theta = (A[q][q] - A[p][p]) / (2 * A[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1));
                double c = 1.0 / std::sqrt(t * t + 1), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = A[k][p], akq = A[k][q];
                    A[k][p] = c * akp - s * akq;
                    A[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = A[p][k], aqk = A[q][k];
                    A[p][k] = c * apk - s * aqk;
                    A[q][k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = A[i][i];
    return ev;
}

}  // namespace linalg
}  // namespace wkstab
