#include "indy/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace indy {

using nlohmann::json;

std::uint64_t layer_madds(CellKind kind, std::uint64_t n, std::uint64_t m) {
    return param_count(kind, n, m);
}

std::uint64_t madds_per_step(const Architecture& arch) {
    arch.validate();
    const std::uint64_t m = arch.width;
    const std::uint64_t k1 = arch.output_classes();
    std::uint64_t total = 2 * layer_madds(arch.kind, arch.input_dim, m);
    total += (arch.depth - 1) * 2 * layer_madds(arch.kind, 2 * m, m);
    total += 2 * m * k1 + k1;  // projection, bias counted as one madd each
    return total;
}

InferenceTiming time_inference(const Model& model, std::size_t seq_len, std::size_t repetitions) {
    if (repetitions < 5) throw ParamError("time_inference: repetitions must be >= 5");
    if (seq_len < 1) throw ParamError("time_inference: seq_len must be >= 1");

    Rng rng(0xBEEFCAFEull);
    std::vector<Vector> inputs(seq_len);
    for (auto& x : inputs) x = uniform(rng, -1.0, 1.0, model.arch.input_dim);

    using clock = std::chrono::steady_clock;
    volatile double sink = 0.0;
    std::vector<double> us_per_step;
    us_per_step.reserve(repetitions);
    double total_us = 0.0;
    for (std::size_t r = 0; r < repetitions + 1; ++r) {  // first run is warm-up
        const auto t0 = clock::now();
        const auto logprobs = model_forward(model, inputs);
        const auto t1 = clock::now();
        sink = sink + logprobs.back().back();
        if (r == 0) continue;
        const double us = std::chrono::duration<double, std::micro>(t1 - t0).count();
        us_per_step.push_back(us / static_cast<double>(seq_len));
        total_us += us;
    }
    std::sort(us_per_step.begin(), us_per_step.end());
    InferenceTiming out;
    out.median_us_per_step = us_per_step[us_per_step.size() / 2];
    out.p90_us_per_step = us_per_step[std::min(us_per_step.size() - 1,
                                               static_cast<std::size_t>(0.9 * us_per_step.size()))];
    out.total_us = total_us;
    return out;
}

void SweepGrid::validate() const {
    if (kinds.empty() || depths.empty() || widths.empty() || dropouts.empty())
        throw ParamError("sweep grid: all dimension lists must be nonempty");
    if (seeds_per_cell < 1) throw ParamError("sweep grid: seeds_per_cell must be >= 1");
    for (std::size_t w : widths)
        if (w < 1) throw ParamError("sweep grid: widths must be positive");
    train.validate();
}

SweepGrid sweep_grid_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("sweep grid: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError("sweep grid: bad JSON in " + path + ": " + e.what());
    }
    SweepGrid grid;
    if (j.contains("kinds")) {
        grid.kinds.clear();
        for (const auto& k : j.at("kinds")) grid.kinds.push_back(cell_kind_from_string(k.get<std::string>()));
    }
    if (j.contains("depths")) grid.depths = j.at("depths").get<std::vector<std::size_t>>();
    if (j.contains("widths")) grid.widths = j.at("widths").get<std::vector<std::size_t>>();
    if (j.contains("dropouts")) grid.dropouts = j.at("dropouts").get<std::vector<double>>();
    if (j.contains("seeds_per_cell")) grid.seeds_per_cell = j.at("seeds_per_cell").get<std::size_t>();
    if (j.contains("train")) {
        const json& t = j.at("train");
        if (t.contains("batch_size")) grid.train.batch_size = t.at("batch_size").get<std::size_t>();
        if (t.contains("learning_rate")) grid.train.learning_rate = t.at("learning_rate").get<double>();
        if (t.contains("max_steps")) grid.train.max_steps = t.at("max_steps").get<std::size_t>();
        if (t.contains("patience_steps")) grid.train.patience_steps = t.at("patience_steps").get<std::size_t>();
        if (t.contains("eval_every_steps"))
            grid.train.eval_every_steps = t.at("eval_every_steps").get<std::size_t>();
        if (t.contains("seed")) grid.train.seed = t.at("seed").get<std::uint64_t>();
    }
    grid.validate();
    return grid;
}

namespace {

SweepRow run_one(const SweepGrid& grid, const Dataset& train_ds, const Dataset& val_ds,
                 const Dataset& test_ds, CellKind kind, std::size_t depth, std::size_t width,
                 double dropout, std::uint64_t run_seed) {
    Architecture arch;
    arch.kind = kind;
    arch.depth = depth;
    arch.width = width;
    arch.input_dim = train_ds.dim;
    arch.num_classes = train_ds.alphabet.size();
    arch.dropout = dropout;

    SweepRow row;
    row.kind = kind;
    row.depth = depth;
    row.width = width;
    row.dropout = dropout;
    row.seed = run_seed;
    row.param_count = model_param_count(arch);
    row.madds_per_step = madds_per_step(arch);

    TrainConfig cfg = grid.train;
    cfg.seed = run_seed;
    const Model initial = init_model(arch, run_seed);

    const auto t0 = std::chrono::steady_clock::now();
    TrainResult result = train(initial, train_ds, val_ds, nullptr, cfg);
    const auto t1 = std::chrono::steady_clock::now();

    row.best_val_cer = result.best.best_val_cer;
    row.test_cer = evaluate(result.best.model, test_ds);
    row.steps_to_best = result.best.best_step;
    const std::uint64_t steps = result.final_state.step;
    row.wall_us_per_step = steps == 0 ? 0.0
                                      : std::chrono::duration<double, std::micro>(t1 - t0).count() /
                                            static_cast<double>(steps);
    return row;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepGrid& grid, const Dataset& train_ds,
                                const Dataset& val_ds, const Dataset& test_ds,
                                const std::string& csv_path, std::size_t threads) {
    grid.validate();

    struct Point {
        CellKind kind;
        std::size_t depth, width;
        double dropout;
        std::uint64_t seed;
    };
    std::vector<Point> points;
    points.reserve(grid.size());
    const Rng grid_rng(grid.train.seed);
    std::size_t index = 0;
    for (CellKind kind : grid.kinds)
        for (std::size_t depth : grid.depths)
            for (std::size_t width : grid.widths)
                for (double dropout : grid.dropouts)
                    for (std::size_t s = 0; s < grid.seeds_per_cell; ++s)
                        points.push_back({kind, depth, width, dropout, grid_rng.derive_seed(index++)});

    std::vector<SweepRow> rows(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= points.size()) return;
            const Point& p = points[i];
            try {
                rows[i] = run_one(grid, train_ds, val_ds, test_ds, p.kind, p.depth, p.width,
                                  p.dropout, p.seed);
            } catch (const std::exception&) {
                // Failed run: keep the grid coordinates, mark results as NaN.
                SweepRow row;
                row.kind = p.kind;
                row.depth = p.depth;
                row.width = p.width;
                row.dropout = p.dropout;
                row.seed = p.seed;
                row.best_val_cer = std::numeric_limits<double>::quiet_NaN();
                row.test_cer = std::numeric_limits<double>::quiet_NaN();
                rows[i] = row;
            }
        }
    };

    if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    threads = std::min(threads, points.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    if (!csv_path.empty()) save_sweep_csv(rows, csv_path);
    return rows;
}

void save_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParamError("save_sweep_csv: cannot write " + path);
    out << "kind,depth,width,dropout,seed,param_count,madds_per_step,best_val_cer,test_cer,"
           "steps_to_best,wall_us_per_step\n";
    for (const SweepRow& r : rows) {
        out << to_string(r.kind) << "," << r.depth << "," << r.width << "," << format_double(r.dropout)
            << "," << r.seed << "," << r.param_count << "," << r.madds_per_step << ","
            << format_double(r.best_val_cer) << "," << format_double(r.test_cer) << ","
            << r.steps_to_best << "," << format_double(r.wall_us_per_step) << "\n";
    }
}

std::vector<SweepRow> load_sweep_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("load_sweep_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) ||
        line != "kind,depth,width,dropout,seed,param_count,madds_per_step,best_val_cer,test_cer,"
                "steps_to_best,wall_us_per_step")
        throw FormatError("load_sweep_csv: bad header in " + path);
    std::vector<SweepRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string f;
        SweepRow r;
        try {
            std::getline(ss, f, ',');
            r.kind = cell_kind_from_string(f);
            std::getline(ss, f, ',');
            r.depth = std::stoull(f);
            std::getline(ss, f, ',');
            r.width = std::stoull(f);
            std::getline(ss, f, ',');
            r.dropout = std::stod(f);
            std::getline(ss, f, ',');
            r.seed = std::stoull(f);
            std::getline(ss, f, ',');
            r.param_count = std::stoull(f);
            std::getline(ss, f, ',');
            r.madds_per_step = std::stoull(f);
            std::getline(ss, f, ',');
            r.best_val_cer = std::stod(f);
            std::getline(ss, f, ',');
            r.test_cer = std::stod(f);
            std::getline(ss, f, ',');
            r.steps_to_best = std::stoull(f);
            std::getline(ss, f, ',');
            r.wall_us_per_step = std::stod(f);
        } catch (const std::exception&) {
            throw FormatError("load_sweep_csv: " + path + " line " + std::to_string(line_no) +
                              ": malformed row");
        }
        rows.push_back(r);
    }
    return rows;
}

std::vector<SweepRow> pareto_front(const std::vector<SweepRow>& rows) {
    std::vector<SweepRow> valid;
    for (const SweepRow& r : rows)
        if (!std::isnan(r.test_cer)) valid.push_back(r);
    if (valid.empty()) return valid;

    std::stable_sort(valid.begin(), valid.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.param_count != b.param_count) return a.param_count < b.param_count;
        return a.test_cer < b.test_cer;
    });
    // A row survives iff nothing with params <= its params has strictly
    // lower cer. After sorting, that is a running prefix minimum, taken per
    // distinct parameter count so equal-params rows see each other.
    std::vector<SweepRow> front;
    double best = std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    while (i < valid.size()) {
        std::size_t j = i;
        while (j < valid.size() && valid[j].param_count == valid[i].param_count) ++j;
        const double group_min = std::min(best, valid[i].test_cer);  // group is cer-sorted
        for (std::size_t k = i; k < j; ++k)
            if (valid[k].test_cer <= group_min) front.push_back(valid[k]);
        best = group_min;
        i = j;
    }
    return front;
}

std::vector<Architecture> default_overfit_archs(std::size_t input_dim, std::size_t num_classes,
                                                double dropout) {
    Architecture base;
    base.depth = 3;
    base.input_dim = input_dim;
    base.num_classes = num_classes;
    base.dropout = dropout;

    Architecture lstm96 = base;
    lstm96.kind = CellKind::Lstm;
    lstm96.width = 96;
    Architecture indy96 = base;
    indy96.kind = CellKind::IndyLstm;
    indy96.width = 96;
    Architecture indy128 = base;
    indy128.kind = CellKind::IndyLstm;
    indy128.width = 128;
    return {lstm96, indy96, indy128};
}

std::vector<TrainTrace> overfit_trace(const std::vector<OverfitJob>& jobs, const Dataset& train_ds,
                                      const Dataset& val_ds, const Dataset& test_ds,
                                      const TrainConfig& base_cfg, const std::string& out_dir,
                                      std::size_t threads) {
    if (jobs.empty()) throw ParamError("overfit_trace: no jobs");
    std::filesystem::create_directories(out_dir);

    std::vector<TrainTrace> traces(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const OverfitJob& job = jobs[i];
            TrainConfig cfg = base_cfg;
            cfg.seed = job.seed;
            cfg.patience_steps = std::max(cfg.max_steps, cfg.eval_every_steps);  // never stop early
            const Model initial = init_model(job.arch, job.seed);
            TrainResult result = train(initial, train_ds, val_ds, &test_ds, cfg);
            std::ostringstream name;
            name << "trace_" << to_string(job.arch.kind) << "_" << job.arch.depth << "x"
                 << job.arch.width << "_seed" << job.seed << ".csv";
            save_trace_csv(result.trace, (std::filesystem::path(out_dir) / name.str()).string());
            traces[i] = std::move(result.trace);
        }
    };

    if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    threads = std::min(threads, jobs.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return traces;
}

}  // namespace indy
