#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "indy/numerics.hpp"

namespace indy {

enum class CellKind { Rnn, IndRnn, Lstm, IndyLstm };

std::string to_string(CellKind kind);                // lowercase name
CellKind cell_kind_from_string(const std::string&);  // ParamError on unknown
bool is_gated(CellKind kind);      // LSTM / IndyLSTM
bool is_diagonal(CellKind kind);   // IndRNN / IndyLSTM

// Gate indices for the gated kinds; the computation order is fixed as
// f, i, o, candidate so diagonal-embedding comparisons are reproducible.
enum Gate { kForget = 0, kInput = 1, kOutput = 2, kCandidate = 3 };

// Parameters of one cell direction. Gated kinds hold four tensors per group
// (f, i, o, candidate); RNN/IndRNN hold a single one. Recurrence is either a
// full m x m matrix (U) or its diagonal stored as a length-m vector (u).
struct CellParams {
    CellKind kind = CellKind::Lstm;
    std::size_t n = 0;  // input width
    std::size_t m = 0;  // output width

    std::vector<Matrix> W;  // each m x n
    std::vector<Matrix> U;  // each m x m; empty for diagonal kinds
    std::vector<Vector> u;  // each length m; empty for full-matrix kinds
    std::vector<Vector> b;  // each length m

    std::size_t gates() const { return is_gated(kind) ? 4 : 1; }
};

// All tensors zero, shapes fixed by (kind, n, m).
CellParams make_cell_params(CellKind kind, std::size_t n, std::size_t m);
// Grad accumulator with the same shapes as p.
CellParams zero_like(const CellParams& p);
// Embed a diagonal-recurrence cell into its full-matrix counterpart
// (IndyLSTM -> LSTM, IndRNN -> RNN) with U_g = diag(u_g).
CellParams embed_diagonal(const CellParams& p);

struct CellState {
    Vector h;
    Vector c;  // empty for RNN/IndRNN
};

CellState zero_state(const CellParams& p);

// Everything the backward pass needs from one forward step.
struct StepCache {
    Vector x, h_prev, c_prev;
    std::vector<Vector> pre;  // gate pre-activations, one per gate
    Vector f, i, o, g;        // gate activations; g is the candidate
    Vector c, h;
};

// One timestep of the cell equations. For diagonal kinds each U h_{t-1}
// product is replaced by u (.) h_{t-1}.
CellState step(const CellParams& params, const Vector& x, const CellState& prev,
               StepCache* cache = nullptr);

struct StepGrads {
    CellParams params;  // same shapes as the cell's parameters
    Vector x;
    CellState prev;
};

// Analytic gradients of one step. grad_h / grad_c are the upstream
// cotangents on h_t and c_t (grad_c empty or zero for RNN kinds).
// Parameter gradients accumulate into `acc`; returns (grad_x, grad_prev).
void step_backward(const CellParams& params, const StepCache& cache, const Vector& grad_h,
                   const Vector& grad_c, CellParams& acc, Vector& grad_x, CellState& grad_prev);

StepGrads step_backward(const CellParams& params, const StepCache& cache, const Vector& grad_h,
                        const Vector& grad_c);

// Closed-form parameter counts:
//   LSTM 4m(n+m+1), IndyLSTM 4m(n+2), RNN m(n+m+1), IndRNN m(n+2).
std::uint64_t param_count(CellKind kind, std::uint64_t n, std::uint64_t m);

// Element count of every tensor actually held by a CellParams.
std::uint64_t enumerate_params(const CellParams& p);

}  // namespace indy
