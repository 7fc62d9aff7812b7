#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "indy/data.hpp"
#include "indy/network.hpp"

namespace indy {

struct TrainConfig {
    std::size_t batch_size = 8;
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t max_steps = 30000;
    std::size_t patience_steps = 10000;  // stop after this many steps without improvement
    std::size_t eval_every_steps = 500;
    std::uint64_t seed = 0;

    void validate() const;
};

// Adam first/second moment slots mirroring the model's tensors, plus the
// shared update counter.
struct OptState {
    Model m1;
    Model m2;
    std::uint64_t t = 0;
};

OptState make_opt_state(const Model& model);

// Bias-corrected Adam update; increments state.t once per call.
void adam_step(OptState& state, Model& model, const Model& grads, const TrainConfig& cfg);

struct TraceRow {
    std::uint64_t step = 0;
    double train_loss = 0.0;  // exponential moving average of batch losses
    double val_cer = 0.0;
    std::optional<double> test_cer;
};

struct TrainTrace {
    std::vector<TraceRow> rows;
};

// CSV with header step,train_loss,val_cer,test_cer (last column blank when
// not computed). Values carry full 64-bit precision.
void save_trace_csv(const TrainTrace& trace, const std::string& path);
TrainTrace load_trace_csv(const std::string& path);

// Complete training state at one step; resuming from it reproduces the
// uninterrupted run exactly.
struct Checkpoint {
    std::uint32_t version = 1;
    Architecture arch;
    Model model;
    OptState opt;
    std::string rng_algorithm;
    std::uint64_t rng_seed = 0;
    std::uint64_t rng_counter = 0;
    std::uint64_t step = 0;
    double best_val_cer = std::numeric_limits<double>::infinity();
    std::uint64_t best_step = 0;
    double ema_train_loss = std::numeric_limits<double>::quiet_NaN();  // until the first batch
};

// Binary format: magic "INDYCKPT", u32 version, u64 manifest length, UTF-8
// JSON manifest, then raw little-endian f64 payloads in manifest order.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Glorot-uniform weight matrices (bound sqrt(6/(fan_in+fan_out)), fan_in =
// columns, fan_out = rows), zero biases, diagonal recurrent vectors uniform
// in [-1,1). Deterministic in the seed.
Model init_model(const Architecture& arch, std::uint64_t seed);

struct TrainResult {
    Checkpoint best;         // state snapshot at the best validation step
    Checkpoint final_state;  // state when training stopped
    TrainTrace trace;
    std::uint64_t skipped_infeasible = 0;
};

// Mini-batch CTC training with Adam and validation-based early stopping.
// Samples whose feature length cannot fit their label are skipped and
// counted; a training set with no usable sample raises DataError. When
// test is non-null each evaluation also records test CER in the trace.
TrainResult train(const Model& initial, const Dataset& train_ds, const Dataset& val_ds,
                  const Dataset* test_ds, const TrainConfig& cfg);

// Continue a run from a checkpoint; cfg.max_steps is the absolute step
// budget, not an increment. The trace covers only the resumed portion.
TrainResult train_resume(const Checkpoint& ckpt, const Dataset& train_ds, const Dataset& val_ds,
                         const Dataset* test_ds, const TrainConfig& cfg);

// Greedy-decode every sample in inference mode; pooled corpus CER.
double evaluate(const Model& model, const Dataset& ds);

// Mean CTC loss of the dataset in inference mode (skips infeasible samples).
double mean_loss(const Model& model, const Dataset& ds);

}  // namespace indy
