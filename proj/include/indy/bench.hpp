#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "indy/training.hpp"

namespace indy {

// Cost model: one multiply-add per parameter, biases included; activation
// cost excluded. A layer's per-timestep madds therefore equal its parameter
// count, so madds(IndyLSTM)/madds(LSTM) = (n+2)/(n+m+1) for equal n, m.
std::uint64_t layer_madds(CellKind kind, std::uint64_t n, std::uint64_t m);

// Per-timestep total over all layers, both directions, and the projection.
std::uint64_t madds_per_step(const Architecture& arch);

struct InferenceTiming {
    double median_us_per_step = 0.0;
    double p90_us_per_step = 0.0;
    double total_us = 0.0;  // summed over the timed repetitions
};

// Wall-clock per-timestep statistics of inference-mode forward passes on a
// fixed random input; one warm-up run is discarded. repetitions must be >= 5.
InferenceTiming time_inference(const Model& model, std::size_t seq_len, std::size_t repetitions);

struct SweepGrid {
    std::vector<CellKind> kinds = {CellKind::Lstm, CellKind::IndyLstm};
    std::vector<std::size_t> depths = {3, 4, 5, 6, 7, 8, 9};
    std::vector<std::size_t> widths = {32, 64, 96, 128, 160, 192, 224, 256};
    std::vector<double> dropouts = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    std::size_t seeds_per_cell = 1;
    TrainConfig train;  // per-run budget; train.seed is the grid seed

    std::size_t size() const {
        return kinds.size() * depths.size() * widths.size() * dropouts.size() * seeds_per_cell;
    }
    void validate() const;
};

SweepGrid sweep_grid_from_json_file(const std::string& path);

struct SweepRow {
    CellKind kind = CellKind::Lstm;
    std::size_t depth = 0;
    std::size_t width = 0;
    double dropout = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t param_count = 0;
    std::uint64_t madds_per_step = 0;
    double best_val_cer = 0.0;  // NaN marks a failed run
    double test_cer = 0.0;
    std::uint64_t steps_to_best = 0;
    double wall_us_per_step = 0.0;
};

// Trains every grid point (kind x depth x width x dropout x seed replica,
// in that nested order), evaluates the best checkpoint on the test split,
// and writes one CSV row per run in grid order. Runs are independent and
// execute on `threads` workers; a failed run yields a NaN-marked row and
// the sweep continues. Per-run seeds derive from (grid seed, grid index).
std::vector<SweepRow> run_sweep(const SweepGrid& grid, const Dataset& train_ds,
                                const Dataset& val_ds, const Dataset& test_ds,
                                const std::string& csv_path, std::size_t threads = 0);

// CSV header:
// kind,depth,width,dropout,seed,param_count,madds_per_step,best_val_cer,test_cer,steps_to_best,wall_us_per_step
void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);
std::vector<SweepRow> load_sweep_csv(const std::string& path);

// Keep row r iff no other row has params <= r.params and cer < r.cer;
// sorted by params ascending. Rows with NaN cer are dropped.
std::vector<SweepRow> pareto_front(const std::vector<SweepRow>& rows);

struct OverfitJob {
    Architecture arch;
    std::uint64_t seed = 0;
};

// Trains each job on a deliberately small training set with early stopping
// disabled, recording train loss plus validation/test CER every
// eval_every_steps up to max_steps. One trace CSV per job, named
// trace_<kind>_<depth>x<width>_seed<seed>.csv under out_dir.
// Returns the traces in job order.
std::vector<TrainTrace> overfit_trace(const std::vector<OverfitJob>& jobs, const Dataset& train_ds,
                                      const Dataset& val_ds, const Dataset& test_ds,
                                      const TrainConfig& base_cfg, const std::string& out_dir,
                                      std::size_t threads = 0);

// The head-to-head trio the overfitting experiment defaults to:
// 3x96 LSTM, 3x96 IndyLSTM, 3x128 IndyLSTM.
std::vector<Architecture> default_overfit_archs(std::size_t input_dim, std::size_t num_classes,
                                                double dropout);

}  // namespace indy
