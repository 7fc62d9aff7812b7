#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "indy/numerics.hpp"

using namespace indy;

TEST_CASE("matvec identity and direct arithmetic") {
    Matrix id = Matrix::identity(3);
    CHECK(matvec(id, {1, 2, 3}) == Vector{1, 2, 3});

    Matrix m(2, 2);
    m.data = {1, 2, 3, 4};
    CHECK(matvec(m, {1, 1}) == Vector{3, 7});

    Matrix z(4, 4);
    CHECK(matvec(z, {5, 6, 7, 8}) == Vector{0, 0, 0, 0});
}

TEST_CASE("matvec shape error names both shapes") {
    Matrix m(2, 3);
    CHECK_THROWS_WITH_AS(matvec(m, {1, 2}), doctest::Contains("2x3"), ShapeError);
    try {
        matvec(m, {1, 2});
    } catch (const ShapeError& e) {
        CHECK(std::string(e.what()).find("vector(2)") != std::string::npos);
    }
}

TEST_CASE("matvec distributes over vector addition") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t r = 1 + rng.next_below(6), c = 1 + rng.next_below(6);
        Matrix m(r, c);
        m.data = uniform(rng, -1e3, 1e3, r * c);
        Vector a = uniform(rng, -1e3, 1e3, c);
        Vector b = uniform(rng, -1e3, 1e3, c);
        Vector ab(c);
        for (std::size_t i = 0; i < c; ++i) ab[i] = a[i] + b[i];
        Vector lhs = matvec(m, ab);
        Vector va = matvec(m, a), vb = matvec(m, b);
        for (std::size_t i = 0; i < r; ++i)
            CHECK(lhs[i] == doctest::Approx(va[i] + vb[i]).epsilon(1e-12));
    }
}

TEST_CASE("hadamard") {
    CHECK(hadamard({1, 1, 1}, {5, 6, 7}) == Vector{5, 6, 7});
    CHECK(hadamard({2, 3}, {4, 5}) == Vector{8, 15});
    CHECK(hadamard({0, 0}, {9, 9}) == Vector{0, 0});
    CHECK_THROWS_AS(hadamard({1}, {1, 2}), ShapeError);

    Rng rng(3);
    Vector a = uniform(rng, -10, 10, 32), b = uniform(rng, -10, 10, 32);
    CHECK(hadamard(a, b) == hadamard(b, a));  // exact commutativity
}

TEST_CASE("activations") {
    CHECK(activation(Activation::LogisticSigmoid, {0.0})[0] == 0.5);
    CHECK(activation(Activation::Tanh, {0.0})[0] == 0.0);
    const double x = 3.7;
    const double s = activation(Activation::LogisticSigmoid, {x})[0] +
                     activation(Activation::LogisticSigmoid, {-x})[0];
    CHECK(s == doctest::Approx(1.0).epsilon(1e-15));

    Rng vr(5);
    Vector v = uniform(vr, -8, 8, 100);
    for (double y : activation(Activation::LogisticSigmoid, v)) {
        CHECK(y > 0.0);
        CHECK(y < 1.0);
    }
    for (double y : activation(Activation::Tanh, v)) {
        CHECK(y > -1.0);
        CHECK(y < 1.0);
    }
}

TEST_CASE("uniform contract") {
    Rng rng(42);
    CHECK(uniform(rng, 0, 0, 5) == Vector{0, 0, 0, 0, 0});

    Rng a(42), b(42);
    Vector va = uniform(a, -1, 1, 1000);
    Vector vb = uniform(b, -1, 1, 1000);
    CHECK(va == vb);
    for (double v : va) {
        CHECK(v >= -1.0);
        CHECK(v < 1.0);
    }
    CHECK(a.counter == 1000);

    CHECK_THROWS_AS(uniform(rng, 1.0, -1.0, 3), ParamError);
}

TEST_CASE("uniform mean is near zero across seeds") {
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        double sum = 0;
        for (int i = 0; i < 100000; ++i) sum += -1.0 + 2.0 * rng.next_double();
        if (std::abs(sum / 100000.0) <= 0.02) ++ok;
    }
    CHECK(ok >= 95);
}

TEST_CASE("rng streams are seed-deterministic and seekable") {
    Rng a(123);
    a.next_u64();
    a.next_u64();
    Rng b(123, 2);  // state after two draws
    CHECK(a.next_u64() == b.next_u64());

    // disjoint child streams
    Rng parent(9);
    CHECK(parent.derive_seed(0) != parent.derive_seed(1));
}

TEST_CASE("normal draws have roughly standard moments") {
    Rng rng(77);
    double sum = 0, sq = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.next_normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));
}
