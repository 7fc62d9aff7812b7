// Command-line front end: data generation, training, evaluation,
// benchmarking, sweeps, and parameter-count queries.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "indy/bench.hpp"
#include "indy/ctc.hpp"
#include "indy/data.hpp"
#include "indy/network.hpp"
#include "indy/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flags override config-file values which override defaults. The config is
// a JSON object keyed by long flag names; it is expanded into synthetic
// arguments placed before the real ones, so TakeLast options resolve the
// precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (config_path.empty()) return args;

    std::ifstream in(config_path);
    if (!in) throw indy::ParamError("config: cannot open " + config_path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw indy::FormatError("config: bad JSON in " + config_path + ": " + e.what());
    }
    if (!doc.is_object()) throw indy::FormatError("config: top level must be an object");

    std::vector<std::string> injected;
    for (const auto& [key, value] : doc.items()) {
        if (value.is_boolean()) {
            if (value.get<bool>()) injected.push_back("--" + key);
        } else if (value.is_string()) {
            injected.push_back("--" + key + "=" + value.get<std::string>());
        } else {
            injected.push_back("--" + key + "=" + value.dump());
        }
    }
    // args[0] is the subcommand name when present; keep it first.
    std::vector<std::string> out;
    std::size_t head = 0;
    if (!args.empty() && !args[0].empty() && args[0][0] != '-') {
        out.push_back(args[0]);
        head = 1;
    }
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), args.begin() + head, args.end());
    return out;
}

indy::Dataset load_split(const fs::path& dir, const std::string& name) {
    return indy::load_dataset((dir / (name + ".jsonl")).string());
}

struct ArchFlags {
    std::string cell = "indylstm";
    std::size_t depth = 3;
    std::size_t width = 32;
    std::size_t input_dim = 10;
    std::size_t classes = 8;
    double dropout = 0.0;

    indy::Architecture to_arch() const {
        indy::Architecture a;
        a.kind = indy::cell_kind_from_string(cell);
        a.depth = depth;
        a.width = width;
        a.input_dim = input_dim;
        a.num_classes = classes;
        a.dropout = dropout;
        return a;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IndyLSTM sequence-recognition toolkit"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::string config_path;

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic glyph-stroke dataset");
    std::string gen_out;
    indy::SynthConfig synth;
    gen->add_option("--out", gen_out, "Output directory for train/val/test files")->required();
    gen->add_option("--alphabet-size", synth.alphabet_size, "Number of characters K")->capture_default_str();
    gen->add_option("--dim", synth.dim, "Feature dimension d")->capture_default_str();
    gen->add_option("--train-n", synth.train_count, "Training samples")->capture_default_str();
    gen->add_option("--val-n", synth.val_count, "Validation samples")->capture_default_str();
    gen->add_option("--test-n", synth.test_count, "Test samples")->capture_default_str();
    gen->add_option("--noise", synth.noise_stddev, "Gaussian noise stddev")->capture_default_str();
    gen->add_option("--label-min", synth.label_len_min, "Minimum label length")->capture_default_str();
    gen->add_option("--label-max", synth.label_len_max, "Maximum label length")->capture_default_str();
    gen->add_option("--proto-min", synth.proto_len_min, "Minimum prototype length")->capture_default_str();
    gen->add_option("--proto-max", synth.proto_len_max, "Maximum prototype length")->capture_default_str();
    gen->add_option("--seed", synth.seed, "Generator seed")->required();
    gen->add_option("--config", config_path, "JSON config file (flags take precedence)");

    // train
    auto* tr = app.add_subcommand("train", "Train a model with CTC and early stopping");
    std::string tr_data, tr_ckpt_out, tr_trace_out;
    ArchFlags tr_arch;
    indy::TrainConfig tr_cfg;
    tr->add_option("--data", tr_data, "Dataset directory (train/val/test .jsonl)")->required();
    tr->add_option("--cell", tr_arch.cell, "rnn|indrnn|lstm|indylstm")->capture_default_str();
    tr->add_option("--depth", tr_arch.depth, "Recurrent layers")->capture_default_str();
    tr->add_option("--width", tr_arch.width, "Units per direction")->capture_default_str();
    tr->add_option("--dropout", tr_arch.dropout, "Dropout on layer outputs")->capture_default_str();
    tr->add_option("--batch", tr_cfg.batch_size, "Batch size")->capture_default_str();
    tr->add_option("--lr", tr_cfg.learning_rate, "Learning rate")->capture_default_str();
    tr->add_option("--max-steps", tr_cfg.max_steps, "Step budget")->capture_default_str();
    tr->add_option("--patience", tr_cfg.patience_steps, "Steps without improvement before stopping")
        ->capture_default_str();
    tr->add_option("--eval-every", tr_cfg.eval_every_steps, "Validation interval")->capture_default_str();
    tr->add_option("--seed", tr_cfg.seed, "Training seed")->required();
    tr->add_option("--ckpt-out", tr_ckpt_out, "Write the best checkpoint here");
    tr->add_option("--trace-out", tr_trace_out, "Write the training trace CSV here");
    tr->add_option("--config", config_path, "JSON config file (flags take precedence)");

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset file");
    std::string ev_ckpt, ev_data;
    ev->add_option("--ckpt", ev_ckpt, "Checkpoint path")->required();
    ev->add_option("--data", ev_data, "Dataset .jsonl file")->required();
    ev->add_option("--config", config_path, "JSON config file (flags take precedence)");

    // bench
    auto* be = app.add_subcommand("bench", "Time inference-mode forward passes");
    std::string be_ckpt;
    ArchFlags be_arch;
    std::size_t be_seq_len = 64, be_reps = 9;
    be->add_option("--ckpt", be_ckpt, "Checkpoint to benchmark");
    be->add_option("--cell", be_arch.cell, "Cell kind when no checkpoint is given")->capture_default_str();
    be->add_option("--depth", be_arch.depth, "Layers")->capture_default_str();
    be->add_option("--width", be_arch.width, "Units per direction")->capture_default_str();
    be->add_option("--input-dim", be_arch.input_dim, "Feature dimension")->capture_default_str();
    be->add_option("--classes", be_arch.classes, "Real character count K (blank implicit)")
        ->capture_default_str();
    be->add_option("--seq-len", be_seq_len, "Timesteps per run")->capture_default_str();
    be->add_option("--reps", be_reps, "Timed repetitions (>= 5)")->capture_default_str();
    be->add_option("--config", config_path, "JSON config file (flags take precedence)");

    // sweep
    auto* sw = app.add_subcommand("sweep", "Train a hyperparameter grid and emit a CSV");
    std::string sw_data, sw_grid, sw_out;
    std::size_t sw_threads = 0;
    sw->add_option("--data", sw_data, "Dataset directory")->required();
    sw->add_option("--grid-json", sw_grid, "Grid description JSON")->required();
    sw->add_option("--out", sw_out, "Output CSV path")->required();
    sw->add_option("--threads", sw_threads, "Worker threads (0 = hardware)")->capture_default_str();
    sw->add_option("--config", config_path, "JSON config file (flags take precedence)");

    // params
    auto* pa = app.add_subcommand("params", "Print the total parameter count of an architecture");
    ArchFlags pa_arch;
    pa->add_option("--cell", pa_arch.cell, "rnn|indrnn|lstm|indylstm")->required();
    pa->add_option("--depth", pa_arch.depth, "Layers")->required();
    pa->add_option("--width", pa_arch.width, "Units per direction")->required();
    pa->add_option("--input-dim", pa_arch.input_dim, "Feature dimension")->required();
    pa->add_option("--classes", pa_arch.classes, "Real character count K (blank implicit)")->required();
    pa->add_option("--config", config_path, "JSON config file (flags take precedence)");

    // overfit-trace
    auto* ov = app.add_subcommand("overfit-trace",
                                  "Train the 3x96 LSTM / 3x96 + 3x128 IndyLSTM trio on a small "
                                  "training set and emit per-run trace CSVs");
    std::string ov_data, ov_out;
    indy::TrainConfig ov_cfg;
    ov_cfg.max_steps = 2000;
    ov_cfg.eval_every_steps = 50;
    double ov_dropout = 0.0;
    std::size_t ov_seeds = 1, ov_threads = 0;
    ov->add_option("--data", ov_data, "Dataset directory")->required();
    ov->add_option("--out", ov_out, "Output directory for trace CSVs")->required();
    ov->add_option("--max-steps", ov_cfg.max_steps, "Step budget per run")->capture_default_str();
    ov->add_option("--eval-every", ov_cfg.eval_every_steps, "Evaluation interval")->capture_default_str();
    ov->add_option("--seed", ov_cfg.seed, "Base seed")->required();
    ov->add_option("--seeds", ov_seeds, "Replica count (seeds seed..seed+n-1)")->capture_default_str();
    ov->add_option("--dropout", ov_dropout, "Dropout for all three architectures")->capture_default_str();
    ov->add_option("--threads", ov_threads, "Worker threads (0 = hardware)")->capture_default_str();
    ov->add_option("--config", config_path, "JSON config file (flags take precedence)");

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = expand_config(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::reverse(args.begin(), args.end());  // CLI11 parses the vector back to front
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, std::cout, std::cerr) == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(gen)) {
            const auto splits = indy::generate(synth);
            fs::create_directories(gen_out);
            indy::save_dataset(splits.train, (fs::path(gen_out) / "train.jsonl").string());
            indy::save_dataset(splits.validation, (fs::path(gen_out) / "val.jsonl").string());
            indy::save_dataset(splits.test, (fs::path(gen_out) / "test.jsonl").string());
            std::cout << "wrote " << splits.train.size() << "/" << splits.validation.size() << "/"
                      << splits.test.size() << " samples to " << gen_out << "\n";
        } else if (app.got_subcommand(tr)) {
            const auto train_ds = load_split(tr_data, "train");
            const auto val_ds = load_split(tr_data, "val");
            indy::Architecture arch = tr_arch.to_arch();
            arch.input_dim = train_ds.dim;
            arch.num_classes = train_ds.alphabet.size();
            const bool have_test = fs::exists(fs::path(tr_data) / "test.jsonl");
            indy::Dataset test_ds;
            if (have_test) test_ds = load_split(tr_data, "test");

            const indy::Model initial = indy::init_model(arch, tr_cfg.seed);
            const auto result =
                indy::train(initial, train_ds, val_ds, have_test ? &test_ds : nullptr, tr_cfg);
            if (result.skipped_infeasible > 0)
                std::cerr << "warning: skipped " << result.skipped_infeasible
                          << " infeasible sample draws\n";
            if (!tr_ckpt_out.empty()) indy::save_checkpoint(result.best, tr_ckpt_out);
            if (!tr_trace_out.empty()) indy::save_trace_csv(result.trace, tr_trace_out);
            std::cout << "best_val_cer=" << result.best.best_val_cer
                      << " best_step=" << result.best.best_step
                      << " stopped_at=" << result.final_state.step << "\n";
            if (have_test)
                std::cout << "test_cer=" << indy::evaluate(result.best.model, test_ds) << "\n";
        } else if (app.got_subcommand(ev)) {
            const auto ckpt = indy::load_checkpoint(ev_ckpt);
            const auto ds = indy::load_dataset(ev_data);
            std::cout << "cer=" << indy::evaluate(ckpt.model, ds) << "\n";
        } else if (app.got_subcommand(be)) {
            indy::Model model;
            if (!be_ckpt.empty()) {
                model = indy::load_checkpoint(be_ckpt).model;
            } else {
                model = indy::init_model(be_arch.to_arch(), 0);
            }
            const auto timing = indy::time_inference(model, be_seq_len, be_reps);
            std::cout << "params=" << indy::model_param_count(model.arch)
                      << " madds_per_step=" << indy::madds_per_step(model.arch)
                      << " median_us_per_step=" << timing.median_us_per_step
                      << " p90_us_per_step=" << timing.p90_us_per_step
                      << " total_us=" << timing.total_us << "\n";
        } else if (app.got_subcommand(sw)) {
            const auto grid = indy::sweep_grid_from_json_file(sw_grid);
            const auto train_ds = load_split(sw_data, "train");
            const auto val_ds = load_split(sw_data, "val");
            const auto test_ds = load_split(sw_data, "test");
            const auto rows = indy::run_sweep(grid, train_ds, val_ds, test_ds, sw_out, sw_threads);
            std::cout << "wrote " << rows.size() << " rows to " << sw_out << "\n";
            const auto front = indy::pareto_front(rows);
            std::cout << "pareto front: " << front.size() << " points\n";
        } else if (app.got_subcommand(pa)) {
            std::cout << indy::model_param_count(pa_arch.to_arch()) << "\n";
        } else if (app.got_subcommand(ov)) {
            const auto train_ds = load_split(ov_data, "train");
            const auto val_ds = load_split(ov_data, "val");
            const auto test_ds = load_split(ov_data, "test");
            const auto archs =
                indy::default_overfit_archs(train_ds.dim, train_ds.alphabet.size(), ov_dropout);
            std::vector<indy::OverfitJob> jobs;
            for (std::size_t s = 0; s < ov_seeds; ++s)
                for (const auto& arch : archs) jobs.push_back({arch, ov_cfg.seed + s});
            indy::overfit_trace(jobs, train_ds, val_ds, test_ds, ov_cfg, ov_out, ov_threads);
            std::cout << "wrote " << jobs.size() << " trace files to " << ov_out << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
