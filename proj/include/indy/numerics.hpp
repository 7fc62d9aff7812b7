#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "indy/errors.hpp"

namespace indy {

using Vector = std::vector<double>;

// Dense row-major matrix of 64-bit floats.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // length rows*cols

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    std::size_t size() const { return rows * cols; }

    static Matrix identity(std::size_t n);
    static Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, c); }
};

// out = M v
Vector matvec(const Matrix& m, const Vector& v);
// out = M^T v
Vector matvec_transposed(const Matrix& m, const Vector& v);
// acc += M v, without allocating
void matvec_add(const Matrix& m, const Vector& v, Vector& acc);
// acc += M^T v
void matvec_transposed_add(const Matrix& m, const Vector& v, Vector& acc);
// M += a b^T
void add_outer(Matrix& m, const Vector& a, const Vector& b);

Vector hadamard(const Vector& a, const Vector& b);

enum class Activation { LogisticSigmoid, Tanh };

double logistic(double x);
Vector activation(Activation kind, const Vector& v);

// Deterministic counter-based generator: sample i is a pure function of
// (seed, i), so the state serializes as two 64-bit integers and the stream
// is identical on every platform. The mixing function is splitmix64.
struct Rng {
    static constexpr const char* kAlgorithm = "splitmix64-counter/v1";

    std::uint64_t seed = 0;
    std::uint64_t counter = 0;

    Rng() = default;
    explicit Rng(std::uint64_t s) : seed(s) {}
    Rng(std::uint64_t s, std::uint64_t c) : seed(s), counter(c) {}

    std::uint64_t next_u64();
    // Uniform in [0,1), 53-bit resolution.
    double next_double();
    // Uniform integer in [0, n). Requires n >= 1.
    std::size_t next_below(std::size_t n);
    // Standard normal via Box-Muller over the counter stream.
    double next_normal();

    // Seed for an independent child stream; disjoint streams for distinct ids.
    std::uint64_t derive_seed(std::uint64_t stream_id) const;
    Rng fork(std::uint64_t stream_id) const { return Rng(derive_seed(stream_id)); }
};

// count samples uniform in [lo, hi); advances rng by count draws.
Vector uniform(Rng& rng, double lo, double hi, std::size_t count);

namespace detail {
std::string shape_str(std::size_t rows, std::size_t cols);
std::string vec_str(std::size_t len);
}  // namespace detail

}  // namespace indy
