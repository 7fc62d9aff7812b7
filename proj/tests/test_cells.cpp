#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "indy/cells.hpp"
#include "oracles.hpp"

using namespace indy;

namespace {

CellParams random_params(CellKind kind, std::size_t n, std::size_t m, Rng& rng) {
    CellParams p = make_cell_params(kind, n, m);
    for (auto& w : p.W) w.data = uniform(rng, -0.8, 0.8, w.size());
    for (auto& uu : p.U) uu.data = uniform(rng, -0.8, 0.8, uu.size());
    for (auto& vv : p.u) vv = uniform(rng, -1.0, 1.0, vv.size());
    for (auto& bb : p.b) bb = uniform(rng, -0.3, 0.3, bb.size());
    return p;
}

CellState random_state(const CellParams& p, Rng& rng) {
    CellState s;
    s.h = uniform(rng, -0.9, 0.9, p.m);
    if (is_gated(p.kind)) s.c = uniform(rng, -1.2, 1.2, p.m);
    return s;
}

}  // namespace

TEST_CASE("cell kind names round-trip") {
    for (CellKind k : {CellKind::Rnn, CellKind::IndRnn, CellKind::Lstm, CellKind::IndyLstm})
        CHECK(cell_kind_from_string(to_string(k)) == k);
    CHECK(to_string(CellKind::IndyLstm) == "indylstm");
    CHECK_THROWS_AS(cell_kind_from_string("gru"), ParamError);
}

TEST_CASE("zero-parameter LSTM step matches the hand-computed scalar case") {
    // all params zero, prev h=0, c=1: gates sigmoid(0)=0.5, candidate 0,
    // c_t = 0.5*1 + 0.5*0 = 0.5, h_t = 0.5*tanh(0.5)
    CellParams p = make_cell_params(CellKind::Lstm, 1, 1);
    CellState prev;
    prev.h = {0.0};
    prev.c = {1.0};
    StepCache cache;
    CellState out = step(p, {0.0}, prev, &cache);
    CHECK(cache.f[0] == 0.5);
    CHECK(cache.i[0] == 0.5);
    CHECK(cache.o[0] == 0.5);
    CHECK(out.c[0] == 0.5);
    CHECK(out.h[0] == doctest::Approx(0.2310586).epsilon(1e-6));
}

TEST_CASE("zero params and zero state give zero output for every kind") {
    for (CellKind kind : {CellKind::Rnn, CellKind::IndRnn, CellKind::Lstm, CellKind::IndyLstm}) {
        CellParams p = make_cell_params(kind, 3, 4);
        CellState out = step(p, {0, 0, 0}, zero_state(p));
        for (double h : out.h) CHECK(h == 0.0);
    }
}

TEST_CASE("step rejects mismatched shapes") {
    CellParams p = make_cell_params(CellKind::IndyLstm, 3, 4);
    CHECK_THROWS_AS(step(p, {0, 0}, zero_state(p)), ShapeError);
    CellState bad;
    bad.h = {0, 0};
    bad.c = {0, 0, 0, 0};
    CHECK_THROWS_AS(step(p, {0, 0, 0}, bad), ShapeError);
}

TEST_CASE("diagonal embedding reproduces forward and backward exactly") {
    Rng rng(2024);
    for (auto [diag_kind, _] : {std::pair{CellKind::IndyLstm, CellKind::Lstm},
                                std::pair{CellKind::IndRnn, CellKind::Rnn}}) {
        for (int trial = 0; trial < 10; ++trial) {
            CellParams diag = random_params(diag_kind, 4, 3, rng);
            CellParams full = embed_diagonal(diag);
            Vector x = uniform(rng, -1, 1, 4);
            CellState prev = random_state(diag, rng);

            StepCache dc, fc;
            CellState dout = step(diag, x, prev, &dc);
            CellState fout = step(full, x, prev, &fc);
            for (std::size_t i = 0; i < 3; ++i) {
                CHECK(std::abs(dout.h[i] - fout.h[i]) < 1e-12);
                if (!dout.c.empty()) CHECK(std::abs(dout.c[i] - fout.c[i]) < 1e-12);
            }

            Vector gh = uniform(rng, -1, 1, 3);
            Vector gc = is_gated(diag_kind) ? uniform(rng, -1, 1, 3) : Vector{};
            StepGrads dg = step_backward(diag, dc, gh, gc);
            StepGrads fg = step_backward(full, fc, gh, gc);
            for (std::size_t g = 0; g < diag.gates(); ++g) {
                for (std::size_t i = 0; i < 3; ++i) {
                    // u gradient equals the diagonal of the U gradient
                    CHECK(std::abs(dg.params.u[g][i] - fg.params.U[g].at(i, i)) < 1e-12);
                    CHECK(std::abs(dg.params.b[g][i] - fg.params.b[g][i]) < 1e-12);
                }
                for (std::size_t i = 0; i < dg.params.W[g].size(); ++i)
                    CHECK(std::abs(dg.params.W[g].data[i] - fg.params.W[g].data[i]) < 1e-12);
            }
            for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(dg.x[i] - fg.x[i]) < 1e-12);
            for (std::size_t i = 0; i < 3; ++i)
                CHECK(std::abs(dg.prev.h[i] - fg.prev.h[i]) < 1e-12);
        }
    }
}

TEST_CASE("zero cotangents give zero gradients") {
    Rng rng(5);
    CellParams p = random_params(CellKind::IndyLstm, 3, 4, rng);
    StepCache cache;
    CellState prev = random_state(p, rng);
    step(p, uniform(rng, -1, 1, 3), prev, &cache);
    StepGrads g = step_backward(p, cache, Vector(4, 0.0), Vector(4, 0.0));
    for (double* ptr : oracles::cell_param_pointers(g.params)) CHECK(*ptr == 0.0);
    for (double v : g.x) CHECK(v == 0.0);
    for (double v : g.prev.h) CHECK(v == 0.0);
}

TEST_CASE("step_backward matches central finite differences for every kind") {
    const double eps = 1e-6;
    for (CellKind kind : {CellKind::Rnn, CellKind::IndRnn, CellKind::Lstm, CellKind::IndyLstm}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            Rng rng(900 + seed);
            CellParams p = random_params(kind, 4, 3, rng);
            Vector x = uniform(rng, -1, 1, 4);
            CellState prev = random_state(p, rng);
            Vector gh = uniform(rng, -1, 1, 3);
            Vector gc = is_gated(kind) ? uniform(rng, -1, 1, 3) : Vector{};

            // scalar objective: <grad_h, h> + <grad_c, c>
            auto objective = [&]() {
                CellState out = step(p, x, prev);
                double v = 0;
                for (std::size_t i = 0; i < 3; ++i) v += gh[i] * out.h[i];
                if (!gc.empty())
                    for (std::size_t i = 0; i < 3; ++i) v += gc[i] * out.c[i];
                return v;
            };

            StepCache cache;
            step(p, x, prev, &cache);
            StepGrads analytic = step_backward(p, cache, gh, gc);

            double max_rel = 0;
            auto analytic_ptrs = oracles::cell_param_pointers(analytic.params);
            auto param_ptrs = oracles::cell_param_pointers(p);
            for (std::size_t i = 0; i < param_ptrs.size(); ++i) {
                const double num = oracles::central_difference(objective, param_ptrs[i], eps);
                max_rel = std::max(max_rel, oracles::grad_rel_error(*analytic_ptrs[i], num));
            }
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double num = oracles::central_difference(objective, &x[i], eps);
                max_rel = std::max(max_rel, oracles::grad_rel_error(analytic.x[i], num));
            }
            for (std::size_t i = 0; i < prev.h.size(); ++i) {
                const double num = oracles::central_difference(objective, &prev.h[i], eps);
                max_rel = std::max(max_rel, oracles::grad_rel_error(analytic.prev.h[i], num));
            }
            for (std::size_t i = 0; i < prev.c.size(); ++i) {
                const double num = oracles::central_difference(objective, &prev.c[i], eps);
                max_rel = std::max(max_rel, oracles::grad_rel_error(analytic.prev.c[i], num));
            }
            CHECK(max_rel < 1e-5);
        }
    }
}

TEST_CASE("param_count formulas and enumeration oracle") {
    CHECK(param_count(CellKind::Lstm, 1, 1) == 12);
    CHECK(param_count(CellKind::IndyLstm, 10, 96) == 4608);
    CHECK(param_count(CellKind::Lstm, 10, 96) == 41088);

    for (CellKind kind : {CellKind::Rnn, CellKind::IndRnn, CellKind::Lstm, CellKind::IndyLstm}) {
        for (std::size_t n = 1; n <= 8; ++n)
            for (std::size_t m = 1; m <= 8; ++m)
                CHECK(param_count(kind, n, m) == oracles::cell_param_enumeration(kind, n, m));
        for (auto [n, m] : {std::pair<std::size_t, std::size_t>{10, 96}, {10, 128}, {192, 96}})
            CHECK(param_count(kind, n, m) == oracles::cell_param_enumeration(kind, n, m));
    }
}

TEST_CASE("LSTM cell state is bounded by |c_prev| + 1") {
    Rng rng(31);
    for (CellKind kind : {CellKind::Lstm, CellKind::IndyLstm}) {
        CellParams p = random_params(kind, 5, 6, rng);
        CellState state = random_state(p, rng);
        for (int t = 0; t < 50; ++t) {
            CellState next = step(p, uniform(rng, -2, 2, 5), state);
            for (std::size_t i = 0; i < 6; ++i)
                CHECK(std::abs(next.c[i]) <= std::abs(state.c[i]) + 1.0 + 1e-15);
            state = next;
        }
    }
}
