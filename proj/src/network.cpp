#include "indy/network.hpp"

#include <cmath>
#include <sstream>

namespace indy {

void Architecture::validate() const {
    if (depth < 1) throw ParamError("architecture: depth must be >= 1");
    if (width < 1) throw ParamError("architecture: width must be >= 1");
    if (input_dim < 1) throw ParamError("architecture: input_dim must be >= 1");
    if (num_classes < 1) throw ParamError("architecture: num_classes must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ParamError("architecture: dropout must be in [0,1)");
}

bool operator==(const Architecture& a, const Architecture& b) {
    return a.kind == b.kind && a.depth == b.depth && a.width == b.width &&
           a.input_dim == b.input_dim && a.num_classes == b.num_classes && a.dropout == b.dropout;
}

Model make_model(const Architecture& arch) {
    arch.validate();
    Model model;
    model.arch = arch;
    model.layers.reserve(arch.depth);
    for (std::size_t l = 0; l < arch.depth; ++l) {
        const std::size_t n = l == 0 ? arch.input_dim : 2 * arch.width;
        model.layers.push_back({make_cell_params(arch.kind, n, arch.width),
                                make_cell_params(arch.kind, n, arch.width)});
    }
    model.proj_w = Matrix(arch.output_classes(), 2 * arch.width);
    model.proj_b.assign(arch.output_classes(), 0.0);
    return model;
}

Model zero_like(const Model& model) { return make_model(model.arch); }

namespace {

const char* kGateSuffix[4] = {"f", "i", "o", "c"};

void cell_tensor_refs(const std::string& prefix, CellParams& p, std::vector<TensorRef>& out) {
    const bool gated = is_gated(p.kind);
    for (std::size_t g = 0; g < p.W.size(); ++g) {
        const std::string name = gated ? prefix + ".W_" + kGateSuffix[g] : prefix + ".W";
        out.push_back({name, {p.W[g].rows, p.W[g].cols}, &p.W[g].data});
    }
    for (std::size_t g = 0; g < p.U.size(); ++g) {
        const std::string name = gated ? prefix + ".U_" + kGateSuffix[g] : prefix + ".U";
        out.push_back({name, {p.U[g].rows, p.U[g].cols}, &p.U[g].data});
    }
    for (std::size_t g = 0; g < p.u.size(); ++g) {
        const std::string name = gated ? prefix + ".u_" + kGateSuffix[g] : prefix + ".u";
        out.push_back({name, {p.u[g].size()}, &p.u[g]});
    }
    for (std::size_t g = 0; g < p.b.size(); ++g) {
        const std::string name = gated ? prefix + ".b_" + kGateSuffix[g] : prefix + ".b";
        out.push_back({name, {p.b[g].size()}, &p.b[g]});
    }
}

}  // namespace

std::vector<TensorRef> tensor_refs(Model& model) {
    std::vector<TensorRef> out;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const std::string base = "layer" + std::to_string(l);
        cell_tensor_refs(base + ".fwd", model.layers[l].fwd, out);
        cell_tensor_refs(base + ".bwd", model.layers[l].bwd, out);
    }
    out.push_back({"proj.W", {model.proj_w.rows, model.proj_w.cols}, &model.proj_w.data});
    out.push_back({"proj.b", {model.proj_b.size()}, &model.proj_b});
    return out;
}

std::uint64_t enumerate_params(const Model& model) {
    std::uint64_t total = 0;
    for (const auto& layer : model.layers)
        total += enumerate_params(layer.fwd) + enumerate_params(layer.bwd);
    total += model.proj_w.size() + model.proj_b.size();
    return total;
}

std::uint64_t model_param_count(const Architecture& arch) {
    arch.validate();
    const std::uint64_t m = arch.width;
    const std::uint64_t k1 = arch.output_classes();
    std::uint64_t total = 2 * param_count(arch.kind, arch.input_dim, m);
    total += (arch.depth - 1) * 2 * param_count(arch.kind, 2 * m, m);
    total += 2 * m * k1 + k1;
    return total;
}

Vector dropout_mask(Rng& rng, double p, std::size_t len) {
    if (!(p >= 0.0 && p < 1.0)) throw ParamError("dropout_mask: p must be in [0,1)");
    Vector mask(len);
    const double keep_scale = 1.0 / (1.0 - p);
    for (std::size_t i = 0; i < len; ++i) mask[i] = rng.next_double() < p ? 0.0 : keep_scale;
    return mask;
}

std::vector<Vector> bidir_layer_forward(const CellParams& fwd, const CellParams& bwd,
                                        const std::vector<Vector>& inputs,
                                        std::vector<StepCache>* fwd_caches,
                                        std::vector<StepCache>* bwd_caches) {
    const std::size_t T = inputs.size();
    if (T == 0) throw ParamError("bidir_layer_forward: empty input sequence");
    if (fwd.m != bwd.m || fwd.n != bwd.n || fwd.kind != bwd.kind)
        throw ShapeError("bidir_layer_forward: direction parameter shapes differ");
    const std::size_t m = fwd.m;
    std::vector<Vector> out(T, Vector(2 * m));
    if (fwd_caches) fwd_caches->resize(T);
    if (bwd_caches) bwd_caches->resize(T);

    CellState state = zero_state(fwd);
    for (std::size_t t = 0; t < T; ++t) {
        state = step(fwd, inputs[t], state, fwd_caches ? &(*fwd_caches)[t] : nullptr);
        std::copy(state.h.begin(), state.h.end(), out[t].begin());
    }
    state = zero_state(bwd);
    for (std::size_t t = T; t-- > 0;) {
        state = step(bwd, inputs[t], state, bwd_caches ? &(*bwd_caches)[t] : nullptr);
        std::copy(state.h.begin(), state.h.end(), out[t].begin() + m);
    }
    return out;
}

std::vector<Vector> model_forward(const Model& model, const std::vector<Vector>& inputs,
                                  bool training, Rng& rng, SequenceCache* cache) {
    const std::size_t T = inputs.size();
    if (T == 0) throw ParamError("model_forward: empty input sequence");
    for (const auto& x : inputs) {
        if (x.size() != model.arch.input_dim)
            throw ShapeError("model_forward: input " + detail::vec_str(x.size()) +
                             " does not match input_dim " + std::to_string(model.arch.input_dim));
    }
    if (cache) {
        cache->layers.assign(model.arch.depth, {});
        cache->proj_in.clear();
        cache->logprobs.clear();
    }
    const bool use_dropout = training && model.arch.dropout > 0.0;

    std::vector<Vector> cur = inputs;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        LayerCache* lc = cache ? &cache->layers[l] : nullptr;
        std::vector<Vector> out =
            bidir_layer_forward(model.layers[l].fwd, model.layers[l].bwd, cur,
                                lc ? &lc->fwd : nullptr, lc ? &lc->bwd : nullptr);
        if (use_dropout) {
            if (lc) lc->masks.resize(T);
            for (std::size_t t = 0; t < T; ++t) {
                Vector mask = dropout_mask(rng, model.arch.dropout, out[t].size());
                for (std::size_t k = 0; k < out[t].size(); ++k) out[t][k] *= mask[k];
                if (lc) lc->masks[t] = std::move(mask);
            }
        }
        if (lc) lc->output = out;
        cur = std::move(out);
    }

    std::vector<Vector> logprobs(T);
    for (std::size_t t = 0; t < T; ++t) {
        Vector z = model.proj_b;
        matvec_add(model.proj_w, cur[t], z);
        double mx = z[0];
        for (double v : z) mx = std::max(mx, v);
        double sum = 0.0;
        for (double v : z) sum += std::exp(v - mx);
        const double lse = mx + std::log(sum);
        for (double& v : z) v -= lse;
        logprobs[t] = std::move(z);
    }
    if (cache) {
        cache->proj_in = std::move(cur);
        cache->logprobs = logprobs;
    }
    return logprobs;
}

std::vector<Vector> model_forward(const Model& model, const std::vector<Vector>& inputs) {
    Rng unused(0);
    return model_forward(model, inputs, /*training=*/false, unused, nullptr);
}

namespace {

// BPTT over one direction. `positions` ascending for the forward direction
// means recurrent grads flow t -> t-1; the backward direction re-walks its
// own processing order in reverse.
void direction_backward(const CellParams& params, const std::vector<StepCache>& caches,
                        const std::vector<Vector>& grad_out, std::size_t half_offset,
                        CellParams& acc, std::vector<Vector>& grad_inputs, bool forward_dir) {
    const std::size_t T = caches.size();
    const std::size_t m = params.m;
    Vector dh_rec(m, 0.0);
    Vector dc_rec;  // empty until the first gated step
    Vector grad_x;
    CellState grad_prev;
    Vector dh(m);
    for (std::size_t idx = 0; idx < T; ++idx) {
        const std::size_t t = forward_dir ? T - 1 - idx : idx;
        for (std::size_t k = 0; k < m; ++k) dh[k] = grad_out[t][half_offset + k] + dh_rec[k];
        step_backward(params, caches[t], dh, dc_rec, acc, grad_x, grad_prev);
        dh_rec = std::move(grad_prev.h);
        dc_rec = std::move(grad_prev.c);
        for (std::size_t k = 0; k < grad_x.size(); ++k) grad_inputs[t][k] += grad_x[k];
    }
}

}  // namespace

void model_backward(const Model& model, const SequenceCache& cache,
                    const std::vector<Vector>& grad_logprobs, Model& grads) {
    const std::size_t T = cache.logprobs.size();
    if (cache.layers.size() != model.arch.depth || cache.proj_in.size() != T)
        throw Error("model_backward: cache does not match model");
    if (grad_logprobs.size() != T)
        throw ShapeError("model_backward: grad_logprobs has " + std::to_string(grad_logprobs.size()) +
                         " rows, cache has " + std::to_string(T));

    const std::size_t m = model.arch.width;
    // Through the log-softmax: dz = g - softmax(z) * sum(g).
    std::vector<Vector> grad_out(T, Vector(2 * m, 0.0));
    Vector dz(model.arch.output_classes());
    for (std::size_t t = 0; t < T; ++t) {
        const Vector& g = grad_logprobs[t];
        const Vector& lp = cache.logprobs[t];
        double gsum = 0.0;
        for (double v : g) gsum += v;
        for (std::size_t k = 0; k < dz.size(); ++k) dz[k] = g[k] - std::exp(lp[k]) * gsum;
        add_outer(grads.proj_w, dz, cache.proj_in[t]);
        for (std::size_t k = 0; k < dz.size(); ++k) grads.proj_b[k] += dz[k];
        matvec_transposed_add(model.proj_w, dz, grad_out[t]);
    }

    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const LayerCache& lc = cache.layers[l];
        if (!lc.masks.empty()) {
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t k = 0; k < grad_out[t].size(); ++k) grad_out[t][k] *= lc.masks[t][k];
        }
        const std::size_t n = model.layers[l].fwd.n;
        std::vector<Vector> grad_in(T, Vector(n, 0.0));
        direction_backward(model.layers[l].fwd, lc.fwd, grad_out, 0, grads.layers[l].fwd, grad_in,
                           /*forward_dir=*/true);
        direction_backward(model.layers[l].bwd, lc.bwd, grad_out, m, grads.layers[l].bwd, grad_in,
                           /*forward_dir=*/false);
        grad_out = std::move(grad_in);
    }
}

}  // namespace indy
