// Test-only reference implementations, independent of the library's
// computation paths: brute-force CTC by path enumeration, central finite
// differences, and tensor-enumeration parameter counting.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "indy/cells.hpp"
#include "indy/network.hpp"

namespace oracles {

// Sum of path probabilities over all (K+1)^T paths whose collapse equals
// the label; returns the negative log.
inline double ctc_loss_bruteforce(const std::vector<indy::Vector>& logprobs,
                                  const std::vector<int>& label) {
    const std::size_t T = logprobs.size();
    const int classes = static_cast<int>(logprobs[0].size());
    const int blank = classes - 1;
    double total = 0.0;
    std::vector<int> path(T, 0);
    std::function<void(std::size_t, double)> walk = [&](std::size_t t, double logp) {
        if (t == T) {
            // collapse: drop repeats, then blanks
            std::vector<int> collapsed;
            int prev = -1;
            for (int c : path) {
                if (c != prev && c != blank) collapsed.push_back(c);
                prev = c;
            }
            if (collapsed == label) total += std::exp(logp);
            return;
        }
        for (int c = 0; c < classes; ++c) {
            path[t] = c;
            walk(t + 1, logp + logprobs[t][c]);
        }
    };
    walk(0, 0.0);
    return -std::log(total);
}

// Central finite differences of a scalar function over a flat parameter
// vector accessed through pointers.
inline double central_difference(const std::function<double()>& f, double* x, double eps) {
    const double saved = *x;
    *x = saved + eps;
    const double fp = f();
    *x = saved - eps;
    const double fm = f();
    *x = saved;
    return (fp - fm) / (2.0 * eps);
}

// Relative error with an absolute floor, the usual gradient-check metric:
// components below the floor are compared absolutely at floor scale.
inline double grad_rel_error(double analytic, double numeric, double floor_scale = 1e-3) {
    return std::abs(analytic - numeric) /
           std::max({std::abs(analytic), std::abs(numeric), floor_scale});
}

// Element counts by walking the actual tensors of a constructed cell.
inline std::uint64_t cell_param_enumeration(indy::CellKind kind, std::size_t n, std::size_t m) {
    return indy::enumerate_params(indy::make_cell_params(kind, n, m));
}

// Collect every gradient component of a CellParams into one flat vector,
// in the same order as the matching parameter walk.
inline std::vector<double*> cell_param_pointers(indy::CellParams& p) {
    std::vector<double*> out;
    for (auto& w : p.W)
        for (auto& v : w.data) out.push_back(&v);
    for (auto& uu : p.U)
        for (auto& v : uu.data) out.push_back(&v);
    for (auto& vv : p.u)
        for (auto& v : vv) out.push_back(&v);
    for (auto& bb : p.b)
        for (auto& v : bb) out.push_back(&v);
    return out;
}

inline std::vector<double*> model_param_pointers(indy::Model& model) {
    std::vector<double*> out;
    for (auto ref : indy::tensor_refs(model))
        for (auto& v : *ref.data) out.push_back(&v);
    return out;
}

}  // namespace oracles
