#include "indy/cells.hpp"

#include <cmath>

namespace indy {

std::string to_string(CellKind kind) {
    switch (kind) {
        case CellKind::Rnn: return "rnn";
        case CellKind::IndRnn: return "indrnn";
        case CellKind::Lstm: return "lstm";
        case CellKind::IndyLstm: return "indylstm";
    }
    throw ParamError("to_string: invalid cell kind");
}

CellKind cell_kind_from_string(const std::string& s) {
    if (s == "rnn") return CellKind::Rnn;
    if (s == "indrnn") return CellKind::IndRnn;
    if (s == "lstm") return CellKind::Lstm;
    if (s == "indylstm") return CellKind::IndyLstm;
    throw ParamError("unknown cell kind '" + s + "' (expected rnn|indrnn|lstm|indylstm)");
}

bool is_gated(CellKind kind) { return kind == CellKind::Lstm || kind == CellKind::IndyLstm; }

bool is_diagonal(CellKind kind) { return kind == CellKind::IndRnn || kind == CellKind::IndyLstm; }

CellParams make_cell_params(CellKind kind, std::size_t n, std::size_t m) {
    CellParams p;
    p.kind = kind;
    p.n = n;
    p.m = m;
    const std::size_t gates = p.gates();
    p.W.assign(gates, Matrix(m, n));
    if (is_diagonal(kind)) {
        p.u.assign(gates, Vector(m, 0.0));
    } else {
        p.U.assign(gates, Matrix(m, m));
    }
    p.b.assign(gates, Vector(m, 0.0));
    return p;
}

CellParams zero_like(const CellParams& p) { return make_cell_params(p.kind, p.n, p.m); }

CellParams embed_diagonal(const CellParams& p) {
    if (!is_diagonal(p.kind)) throw ParamError("embed_diagonal: cell has full recurrence already");
    const CellKind full = p.kind == CellKind::IndyLstm ? CellKind::Lstm : CellKind::Rnn;
    CellParams out = make_cell_params(full, p.n, p.m);
    out.W = p.W;
    out.b = p.b;
    for (std::size_t g = 0; g < p.gates(); ++g)
        for (std::size_t i = 0; i < p.m; ++i) out.U[g].at(i, i) = p.u[g][i];
    return out;
}

CellState zero_state(const CellParams& p) {
    CellState s;
    s.h.assign(p.m, 0.0);
    if (is_gated(p.kind)) s.c.assign(p.m, 0.0);
    return s;
}

namespace {

void check_step_shapes(const CellParams& p, const Vector& x, const CellState& prev) {
    if (x.size() != p.n) {
        throw ShapeError("step: input " + detail::vec_str(x.size()) + " does not match cell input width " +
                         std::to_string(p.n));
    }
    if (prev.h.size() != p.m) {
        throw ShapeError("step: previous h " + detail::vec_str(prev.h.size()) +
                         " does not match cell width " + std::to_string(p.m));
    }
    if (is_gated(p.kind) && prev.c.size() != p.m) {
        throw ShapeError("step: previous c " + detail::vec_str(prev.c.size()) +
                         " does not match cell width " + std::to_string(p.m));
    }
}

// pre = W x + (U h | u (.) h) + b for one gate
Vector gate_preactivation(const CellParams& p, std::size_t g, const Vector& x, const Vector& h_prev) {
    Vector pre = p.b[g];
    matvec_add(p.W[g], x, pre);
    if (is_diagonal(p.kind)) {
        for (std::size_t i = 0; i < p.m; ++i) pre[i] += p.u[g][i] * h_prev[i];
    } else {
        matvec_add(p.U[g], h_prev, pre);
    }
    return pre;
}

}  // namespace

CellState step(const CellParams& params, const Vector& x, const CellState& prev, StepCache* cache) {
    check_step_shapes(params, x, prev);
    const std::size_t m = params.m;
    CellState out;

    if (is_gated(params.kind)) {
        std::vector<Vector> pre(4);
        for (std::size_t g = 0; g < 4; ++g) pre[g] = gate_preactivation(params, g, x, prev.h);
        Vector f = activation(Activation::LogisticSigmoid, pre[kForget]);
        Vector i = activation(Activation::LogisticSigmoid, pre[kInput]);
        Vector o = activation(Activation::LogisticSigmoid, pre[kOutput]);
        Vector g = activation(Activation::Tanh, pre[kCandidate]);
        out.c.resize(m);
        out.h.resize(m);
        for (std::size_t k = 0; k < m; ++k) out.c[k] = f[k] * prev.c[k] + i[k] * g[k];
        for (std::size_t k = 0; k < m; ++k) out.h[k] = o[k] * std::tanh(out.c[k]);
        if (cache) {
            cache->x = x;
            cache->h_prev = prev.h;
            cache->c_prev = prev.c;
            cache->pre = std::move(pre);
            cache->f = std::move(f);
            cache->i = std::move(i);
            cache->o = std::move(o);
            cache->g = std::move(g);
            cache->c = out.c;
            cache->h = out.h;
        }
    } else {
        Vector pre = gate_preactivation(params, 0, x, prev.h);
        out.h = activation(Activation::Tanh, pre);
        if (cache) {
            cache->x = x;
            cache->h_prev = prev.h;
            cache->c_prev.clear();
            cache->pre.assign(1, std::move(pre));
            cache->f.clear();
            cache->i.clear();
            cache->o.clear();
            cache->g.clear();
            cache->c.clear();
            cache->h = out.h;
        }
    }
    return out;
}

void step_backward(const CellParams& params, const StepCache& cache, const Vector& grad_h,
                   const Vector& grad_c, CellParams& acc, Vector& grad_x, CellState& grad_prev) {
    const std::size_t m = params.m;
    if (grad_h.size() != m) {
        throw ShapeError("step_backward: grad_h " + detail::vec_str(grad_h.size()) +
                         " does not match cell width " + std::to_string(m));
    }
    grad_x.assign(params.n, 0.0);
    grad_prev.h.assign(m, 0.0);
    grad_prev.c.clear();

    if (is_gated(params.kind)) {
        if (!grad_c.empty() && grad_c.size() != m) {
            throw ShapeError("step_backward: grad_c " + detail::vec_str(grad_c.size()) +
                             " does not match cell width " + std::to_string(m));
        }
        grad_prev.c.assign(m, 0.0);
        std::vector<Vector> da(4, Vector(m));
        for (std::size_t k = 0; k < m; ++k) {
            const double tc = std::tanh(cache.c[k]);
            const double dh = grad_h[k];
            const double dc = (grad_c.empty() ? 0.0 : grad_c[k]) + dh * cache.o[k] * (1.0 - tc * tc);
            const double do_ = dh * tc;
            const double df = dc * cache.c_prev[k];
            const double di = dc * cache.g[k];
            const double dg = dc * cache.i[k];
            grad_prev.c[k] = dc * cache.f[k];
            da[kForget][k] = df * cache.f[k] * (1.0 - cache.f[k]);
            da[kInput][k] = di * cache.i[k] * (1.0 - cache.i[k]);
            da[kOutput][k] = do_ * cache.o[k] * (1.0 - cache.o[k]);
            da[kCandidate][k] = dg * (1.0 - cache.g[k] * cache.g[k]);
        }
        for (std::size_t g = 0; g < 4; ++g) {
            add_outer(acc.W[g], da[g], cache.x);
            for (std::size_t k = 0; k < m; ++k) acc.b[g][k] += da[g][k];
            if (is_diagonal(params.kind)) {
                for (std::size_t k = 0; k < m; ++k) {
                    acc.u[g][k] += da[g][k] * cache.h_prev[k];
                    grad_prev.h[k] += params.u[g][k] * da[g][k];
                }
            } else {
                add_outer(acc.U[g], da[g], cache.h_prev);
                matvec_transposed_add(params.U[g], da[g], grad_prev.h);
            }
            matvec_transposed_add(params.W[g], da[g], grad_x);
        }
    } else {
        Vector da(m);
        for (std::size_t k = 0; k < m; ++k) da[k] = grad_h[k] * (1.0 - cache.h[k] * cache.h[k]);
        add_outer(acc.W[0], da, cache.x);
        for (std::size_t k = 0; k < m; ++k) acc.b[0][k] += da[k];
        if (is_diagonal(params.kind)) {
            for (std::size_t k = 0; k < m; ++k) {
                acc.u[0][k] += da[k] * cache.h_prev[k];
                grad_prev.h[k] += params.u[0][k] * da[k];
            }
        } else {
            add_outer(acc.U[0], da, cache.h_prev);
            matvec_transposed_add(params.U[0], da, grad_prev.h);
        }
        matvec_transposed_add(params.W[0], da, grad_x);
    }
}

StepGrads step_backward(const CellParams& params, const StepCache& cache, const Vector& grad_h,
                        const Vector& grad_c) {
    StepGrads out;
    out.params = zero_like(params);
    step_backward(params, cache, grad_h, grad_c, out.params, out.x, out.prev);
    return out;
}

std::uint64_t param_count(CellKind kind, std::uint64_t n, std::uint64_t m) {
    switch (kind) {
        case CellKind::Lstm: return 4 * m * (n + m + 1);
        case CellKind::IndyLstm: return 4 * m * (n + 2);
        case CellKind::Rnn: return m * (n + m + 1);
        case CellKind::IndRnn: return m * (n + 2);
    }
    throw ParamError("param_count: invalid cell kind");
}

std::uint64_t enumerate_params(const CellParams& p) {
    std::uint64_t total = 0;
    for (const auto& w : p.W) total += w.size();
    for (const auto& uu : p.U) total += uu.size();
    for (const auto& v : p.u) total += v.size();
    for (const auto& v : p.b) total += v.size();
    return total;
}

}  // namespace indy
