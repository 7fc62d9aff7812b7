#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "indy/cells.hpp"
#include "indy/numerics.hpp"

namespace indy {

struct Architecture {
    CellKind kind = CellKind::IndyLstm;
    std::size_t depth = 3;        // recurrent layers L
    std::size_t width = 32;       // m per direction
    std::size_t input_dim = 10;   // d
    std::size_t num_classes = 8;  // K real characters; blank appended internally
    double dropout = 0.0;         // on each recurrent layer's outputs, training only

    std::size_t output_classes() const { return num_classes + 1; }
    void validate() const;  // ParamError on bad field
};

bool operator==(const Architecture& a, const Architecture& b);

struct BidirLayer {
    CellParams fwd;
    CellParams bwd;
};

// Bidirectional stack plus the affine projection feeding the per-frame
// log-softmax. Layer 1 reads d features; deeper layers read the 2m-wide
// concatenated outputs of the layer below.
struct Model {
    Architecture arch;
    std::vector<BidirLayer> layers;
    Matrix proj_w;  // (K+1) x 2m
    Vector proj_b;  // K+1
};

Model make_model(const Architecture& arch);  // all tensors zero
Model zero_like(const Model& model);

// Stable enumeration of every parameter tensor; the order defines the
// checkpoint manifest and the optimizer slot layout.
struct TensorRef {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double>* data;
};
std::vector<TensorRef> tensor_refs(Model& model);
std::uint64_t enumerate_params(const Model& model);

// Closed-form total: 2 pc(kind,d,m) + (L-1) 2 pc(kind,2m,m) + (2m+1)(K+1).
std::uint64_t model_param_count(const Architecture& arch);

// Per-entry 0 with probability p, else 1/(1-p). Requires 0 <= p < 1.
Vector dropout_mask(Rng& rng, double p, std::size_t len);

struct LayerCache {
    std::vector<StepCache> fwd;   // per timestep
    std::vector<StepCache> bwd;   // per timestep, indexed by input position
    std::vector<Vector> masks;    // per-timestep dropout masks, empty when inactive
    std::vector<Vector> output;   // post-dropout 2m outputs feeding the next layer
};

struct SequenceCache {
    std::vector<LayerCache> layers;
    std::vector<Vector> proj_in;    // top-layer outputs after dropout
    std::vector<Vector> logprobs;   // log-softmax outputs
};

// out[t] = concat(h_fwd[t], h_bwd[t]); both directions start from zero state.
std::vector<Vector> bidir_layer_forward(const CellParams& fwd, const CellParams& bwd,
                                        const std::vector<Vector>& inputs,
                                        std::vector<StepCache>* fwd_caches = nullptr,
                                        std::vector<StepCache>* bwd_caches = nullptr);

// Full forward pass to per-frame log-probabilities (logsumexp of each row
// is 0). Dropout masks are drawn from rng only when training and p > 0.
std::vector<Vector> model_forward(const Model& model, const std::vector<Vector>& inputs,
                                  bool training, Rng& rng, SequenceCache* cache = nullptr);

// Inference-mode convenience wrapper.
std::vector<Vector> model_forward(const Model& model, const std::vector<Vector>& inputs);

// BPTT through projection, dropout, and every layer/direction. The cache
// must come from a matching model_forward call; dropout masks are replayed.
// Gradients accumulate into `grads` (same shapes as the model).
void model_backward(const Model& model, const SequenceCache& cache,
                    const std::vector<Vector>& grad_logprobs, Model& grads);

}  // namespace indy
