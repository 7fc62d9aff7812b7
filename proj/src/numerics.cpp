#include "indy/numerics.hpp"

#include <cmath>
#include <sstream>

namespace indy {

namespace detail {

std::string shape_str(std::size_t rows, std::size_t cols) {
    std::ostringstream os;
    os << rows << "x" << cols;
    return os.str();
}

std::string vec_str(std::size_t len) {
    std::ostringstream os;
    os << "vector(" << len << ")";
    return os.str();
}

}  // namespace detail

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Vector matvec(const Matrix& m, const Vector& v) {
    if (v.size() != m.cols) {
        throw ShapeError("matvec: matrix " + detail::shape_str(m.rows, m.cols) +
                         " incompatible with " + detail::vec_str(v.size()));
    }
    Vector out(m.rows, 0.0);
    matvec_add(m, v, out);
    return out;
}

void matvec_add(const Matrix& m, const Vector& v, Vector& acc) {
    if (v.size() != m.cols || acc.size() != m.rows) {
        throw ShapeError("matvec_add: matrix " + detail::shape_str(m.rows, m.cols) +
                         " incompatible with " + detail::vec_str(v.size()) + " -> " +
                         detail::vec_str(acc.size()));
    }
    const double* p = m.data.data();
    for (std::size_t i = 0; i < m.rows; ++i) {
        double s = 0.0;
        const double* row = p + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) s += row[j] * v[j];
        acc[i] += s;
    }
}

Vector matvec_transposed(const Matrix& m, const Vector& v) {
    if (v.size() != m.rows) {
        throw ShapeError("matvec_transposed: matrix " + detail::shape_str(m.rows, m.cols) +
                         "^T incompatible with " + detail::vec_str(v.size()));
    }
    Vector out(m.cols, 0.0);
    matvec_transposed_add(m, v, out);
    return out;
}

void matvec_transposed_add(const Matrix& m, const Vector& v, Vector& acc) {
    if (v.size() != m.rows || acc.size() != m.cols) {
        throw ShapeError("matvec_transposed_add: matrix " + detail::shape_str(m.rows, m.cols) +
                         "^T incompatible with " + detail::vec_str(v.size()) + " -> " +
                         detail::vec_str(acc.size()));
    }
    const double* p = m.data.data();
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double vi = v[i];
        if (vi == 0.0) continue;
        const double* row = p + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) acc[j] += row[j] * vi;
    }
}

void add_outer(Matrix& m, const Vector& a, const Vector& b) {
    if (a.size() != m.rows || b.size() != m.cols) {
        throw ShapeError("add_outer: matrix " + detail::shape_str(m.rows, m.cols) +
                         " incompatible with outer of " + detail::vec_str(a.size()) + " and " +
                         detail::vec_str(b.size()));
    }
    double* p = m.data.data();
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double ai = a[i];
        if (ai == 0.0) continue;
        double* row = p + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) row[j] += ai * b[j];
    }
}

Vector hadamard(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw ShapeError("hadamard: length mismatch " + detail::vec_str(a.size()) + " vs " +
                         detail::vec_str(b.size()));
    }
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vector activation(Activation kind, const Vector& v) {
    Vector out(v.size());
    if (kind == Activation::LogisticSigmoid) {
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = logistic(v[i]);
    } else {
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
    }
    return out;
}

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() {
    ++counter;
    return mix64(seed + counter * kGolden);
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::size_t Rng::next_below(std::size_t n) {
    if (n == 0) throw ParamError("Rng::next_below: n must be >= 1");
    return static_cast<std::size_t>(next_double() * static_cast<double>(n));
}

double Rng::next_normal() {
    // u1 in (0,1] so the log is finite.
    const double u1 = 1.0 - next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t Rng::derive_seed(std::uint64_t stream_id) const {
    return mix64(seed ^ mix64((stream_id + 1) * kGolden));
}

Vector uniform(Rng& rng, double lo, double hi, std::size_t count) {
    if (lo > hi) {
        std::ostringstream os;
        os << "uniform: lo (" << lo << ") must be <= hi (" << hi << ")";
        throw ParamError(os.str());
    }
    Vector out(count);
    const double span = hi - lo;
    for (std::size_t i = 0; i < count; ++i) out[i] = lo + rng.next_double() * span;
    return out;
}

}  // namespace indy
