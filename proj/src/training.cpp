#include "indy/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace indy {

using nlohmann::json;

void TrainConfig::validate() const {
    if (batch_size < 1) throw ParamError("train config: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ParamError("train config: learning_rate must be > 0");
    if (eval_every_steps < 1) throw ParamError("train config: eval_every_steps must be >= 1");
    if (patience_steps < eval_every_steps)
        throw ParamError("train config: patience_steps must be >= eval_every_steps");
}

OptState make_opt_state(const Model& model) {
    OptState s;
    s.m1 = zero_like(model);
    s.m2 = zero_like(model);
    s.t = 0;
    return s;
}

void adam_step(OptState& state, Model& model, const Model& grads, const TrainConfig& cfg) {
    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

    auto params = tensor_refs(model);
    auto g = tensor_refs(const_cast<Model&>(grads));
    auto m1 = tensor_refs(state.m1);
    auto m2 = tensor_refs(state.m2);
    if (g.size() != params.size() || m1.size() != params.size() || m2.size() != params.size())
        throw ShapeError("adam_step: tensor layout mismatch between model, grads, and state");

    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& theta = *params[i].data;
        const auto& grad = *g[i].data;
        auto& m = *m1[i].data;
        auto& v = *m2[i].data;
        if (grad.size() != theta.size() || m.size() != theta.size())
            throw ShapeError("adam_step: tensor '" + params[i].name + "' shape mismatch");
        for (std::size_t k = 0; k < theta.size(); ++k) {
            m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
            v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            theta[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
    }
}

Model init_model(const Architecture& arch, std::uint64_t seed) {
    Model model = make_model(arch);
    Rng rng(seed);
    auto glorot = [&](Matrix& w) {
        const double bound = std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
        w.data = uniform(rng, -bound, bound, w.size());
    };
    for (auto& layer : model.layers) {
        for (CellParams* dir : {&layer.fwd, &layer.bwd}) {
            for (auto& w : dir->W) glorot(w);
            for (auto& uu : dir->U) glorot(uu);
            for (auto& vv : dir->u) vv = uniform(rng, -1.0, 1.0, vv.size());
            // biases stay zero
        }
    }
    glorot(model.proj_w);
    return model;
}

// ---------------------------------------------------------------------------
// Trace CSV

void save_trace_csv(const TrainTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParamError("save_trace_csv: cannot write " + path);
    out << "step,train_loss,val_cer,test_cer\n";
    char buf[64];
    for (const TraceRow& row : trace.rows) {
        out << row.step << ",";
        std::snprintf(buf, sizeof buf, "%.17g", row.train_loss);
        out << buf << ",";
        std::snprintf(buf, sizeof buf, "%.17g", row.val_cer);
        out << buf << ",";
        if (row.test_cer) {
            std::snprintf(buf, sizeof buf, "%.17g", *row.test_cer);
            out << buf;
        }
        out << "\n";
    }
}

TrainTrace load_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("load_trace_csv: cannot open " + path);
    TrainTrace trace;
    std::string line;
    if (!std::getline(in, line) || line != "step,train_loss,val_cer,test_cer")
        throw FormatError("load_trace_csv: bad header in " + path);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        TraceRow row;
        try {
            std::getline(ss, field, ',');
            row.step = std::stoull(field);
            std::getline(ss, field, ',');
            row.train_loss = std::stod(field);
            std::getline(ss, field, ',');
            row.val_cer = std::stod(field);
            if (std::getline(ss, field, ',') && !field.empty()) row.test_cer = std::stod(field);
        } catch (const std::exception&) {
            throw FormatError("load_trace_csv: " + path + " line " + std::to_string(line_no) +
                              ": malformed row");
        }
        trace.rows.push_back(row);
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Checkpoint serialization

namespace {

constexpr char kMagic[8] = {'I', 'N', 'D', 'Y', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

std::uint32_t get_u32(const std::string& s, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + i])) << (8 * i);
    return v;
}

std::uint64_t get_u64(const std::string& s, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[off + i])) << (8 * i);
    return v;
}

json arch_to_json(const Architecture& a) {
    json j;
    j["kind"] = to_string(a.kind);
    j["depth"] = a.depth;
    j["width"] = a.width;
    j["input_dim"] = a.input_dim;
    j["num_classes"] = a.num_classes;
    j["dropout"] = a.dropout;
    return j;
}

Architecture arch_from_json(const json& j) {
    Architecture a;
    a.kind = cell_kind_from_string(j.at("kind").get<std::string>());
    a.depth = j.at("depth").get<std::size_t>();
    a.width = j.at("width").get<std::size_t>();
    a.input_dim = j.at("input_dim").get<std::size_t>();
    a.num_classes = j.at("num_classes").get<std::size_t>();
    a.dropout = j.at("dropout").get<double>();
    return a;
}

// Payload order: model tensors, then Adam first moments, then second moments.
std::vector<TensorRef> checkpoint_tensors(Model& model, OptState& opt) {
    std::vector<TensorRef> out = tensor_refs(model);
    for (TensorRef ref : tensor_refs(opt.m1)) {
        ref.name = "adam.m1." + ref.name;
        out.push_back(ref);
    }
    for (TensorRef ref : tensor_refs(opt.m2)) {
        ref.name = "adam.m2." + ref.name;
        out.push_back(ref);
    }
    return out;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    auto& mut = const_cast<Checkpoint&>(ckpt);
    auto tensors = checkpoint_tensors(mut.model, mut.opt);

    json manifest;
    manifest["arch"] = arch_to_json(ckpt.arch);
    json meta;
    meta["step"] = ckpt.step;
    meta["best_step"] = ckpt.best_step;
    if (std::isfinite(ckpt.best_val_cer))
        meta["best_val_cer"] = ckpt.best_val_cer;
    else
        meta["best_val_cer"] = nullptr;
    meta["adam_t"] = ckpt.opt.t;
    if (std::isnan(ckpt.ema_train_loss))
        meta["ema_train_loss"] = nullptr;
    else
        meta["ema_train_loss"] = ckpt.ema_train_loss;
    manifest["meta"] = meta;
    json rng;
    rng["algorithm"] = ckpt.rng_algorithm;
    rng["seed"] = ckpt.rng_seed;
    rng["counter"] = ckpt.rng_counter;
    manifest["rng"] = rng;

    json tensor_list = json::array();
    std::uint64_t offset = 0;
    for (const TensorRef& ref : tensors) {
        json t;
        t["name"] = ref.name;
        t["shape"] = ref.shape;
        t["offset"] = offset;
        t["len"] = ref.data->size();
        tensor_list.push_back(t);
        offset += ref.data->size() * sizeof(double);
    }
    manifest["tensors"] = tensor_list;

    const std::string manifest_str = manifest.dump();
    std::string header;
    header.append(kMagic, sizeof kMagic);
    put_u32(header, ckpt.version);
    put_u64(header, manifest_str.size());

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParamError("save_checkpoint: cannot write " + path);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(manifest_str.data(), static_cast<std::streamsize>(manifest_str.size()));
    std::string payload;
    for (const TensorRef& ref : tensors) {
        for (double d : *ref.data) {
            std::uint64_t bits;
            std::memcpy(&bits, &d, sizeof bits);
            put_u64(payload, bits);
        }
    }
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw ParamError("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("load_checkpoint: cannot open " + path);
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (blob.size() < sizeof kMagic + 4 + 8) throw FormatError("load_checkpoint: file too short");
    if (std::memcmp(blob.data(), kMagic, sizeof kMagic) != 0)
        throw FormatError("load_checkpoint: bad magic");
    const std::uint32_t version = get_u32(blob, sizeof kMagic);
    if (version != kVersion)
        throw FormatError("load_checkpoint: unsupported version " + std::to_string(version));
    const std::uint64_t manifest_len = get_u64(blob, sizeof kMagic + 4);
    const std::size_t manifest_off = sizeof kMagic + 4 + 8;
    if (manifest_off + manifest_len > blob.size())
        throw FormatError("load_checkpoint: manifest length exceeds file size");

    json manifest;
    try {
        manifest = json::parse(blob.substr(manifest_off, manifest_len));
    } catch (const json::exception& e) {
        throw FormatError(std::string("load_checkpoint: bad manifest: ") + e.what());
    }

    Checkpoint ckpt;
    ckpt.version = version;
    ckpt.arch = arch_from_json(manifest.at("arch"));
    ckpt.model = make_model(ckpt.arch);
    ckpt.opt = make_opt_state(ckpt.model);
    const json& meta = manifest.at("meta");
    ckpt.step = meta.at("step").get<std::uint64_t>();
    ckpt.best_step = meta.at("best_step").get<std::uint64_t>();
    if (meta.at("best_val_cer").is_null())
        ckpt.best_val_cer = std::numeric_limits<double>::infinity();
    else
        ckpt.best_val_cer = meta.at("best_val_cer").get<double>();
    ckpt.opt.t = meta.at("adam_t").get<std::uint64_t>();
    if (meta.at("ema_train_loss").is_null())
        ckpt.ema_train_loss = std::numeric_limits<double>::quiet_NaN();
    else
        ckpt.ema_train_loss = meta.at("ema_train_loss").get<double>();
    const json& rng = manifest.at("rng");
    ckpt.rng_algorithm = rng.at("algorithm").get<std::string>();
    if (ckpt.rng_algorithm != Rng::kAlgorithm)
        throw FormatError("load_checkpoint: unsupported rng algorithm '" + ckpt.rng_algorithm + "'");
    ckpt.rng_seed = rng.at("seed").get<std::uint64_t>();
    ckpt.rng_counter = rng.at("counter").get<std::uint64_t>();

    auto tensors = checkpoint_tensors(ckpt.model, ckpt.opt);
    const json& tensor_list = manifest.at("tensors");
    if (tensor_list.size() != tensors.size())
        throw FormatError("load_checkpoint: manifest lists " + std::to_string(tensor_list.size()) +
                          " tensors, architecture implies " + std::to_string(tensors.size()));
    const std::size_t payload_off = manifest_off + manifest_len;
    std::uint64_t expected_offset = 0;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const json& t = tensor_list[i];
        if (t.at("name").get<std::string>() != tensors[i].name)
            throw FormatError("load_checkpoint: tensor " + std::to_string(i) + " is '" +
                              t.at("name").get<std::string>() + "', expected '" + tensors[i].name + "'");
        const auto shape = t.at("shape").get<std::vector<std::size_t>>();
        if (shape != tensors[i].shape)
            throw FormatError("load_checkpoint: tensor '" + tensors[i].name + "' shape mismatch");
        const std::uint64_t len = t.at("len").get<std::uint64_t>();
        const std::uint64_t offset = t.at("offset").get<std::uint64_t>();
        if (len != tensors[i].data->size() || offset != expected_offset)
            throw FormatError("load_checkpoint: tensor '" + tensors[i].name + "' layout mismatch");
        expected_offset += len * sizeof(double);
    }
    if (payload_off + expected_offset != blob.size())
        throw FormatError("load_checkpoint: payload has " + std::to_string(blob.size() - payload_off) +
                          " bytes, manifest implies " + std::to_string(expected_offset));
    std::size_t pos = payload_off;
    for (const TensorRef& ref : tensors) {
        for (double& d : *ref.data) {
            const std::uint64_t bits = get_u64(blob, pos);
            std::memcpy(&d, &bits, sizeof d);
            pos += 8;
        }
    }
    return ckpt;
}

// ---------------------------------------------------------------------------
// Training loop

double evaluate(const Model& model, const Dataset& ds) {
    if (ds.samples.empty()) throw ParamError("evaluate: empty dataset");
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(ds.samples.size());
    for (const Sample& s : ds.samples) {
        const auto logprobs = model_forward(model, s.features);
        pairs.emplace_back(s.label, ds.alphabet.decode(greedy_decode(logprobs)));
    }
    return corpus_cer(pairs);
}

double mean_loss(const Model& model, const Dataset& ds) {
    if (ds.samples.empty()) throw ParamError("mean_loss: empty dataset");
    double total = 0.0;
    std::size_t counted = 0;
    for (const Sample& s : ds.samples) {
        const Labeling label = ds.alphabet.encode(s.label);
        if (s.features.size() < label.size() + count_repeats(label)) continue;
        total += ctc_loss(model_forward(model, s.features), label).loss;
        ++counted;
    }
    if (counted == 0) throw DataError("mean_loss: no feasible samples");
    return total / static_cast<double>(counted);
}

namespace {

void check_datasets(const Architecture& arch, const Dataset& train_ds, const Dataset& val_ds,
                    const Dataset* test_ds) {
    if (train_ds.samples.empty() || val_ds.samples.empty())
        throw ParamError("train: train and validation datasets must be nonempty");
    if (train_ds.dim != arch.input_dim)
        throw ShapeError("train: dataset dim " + std::to_string(train_ds.dim) +
                         " does not match architecture input_dim " + std::to_string(arch.input_dim));
    if (train_ds.alphabet.size() != arch.num_classes)
        throw ParamError("train: alphabet size " + std::to_string(train_ds.alphabet.size()) +
                         " does not match architecture num_classes " + std::to_string(arch.num_classes));
    if (!(val_ds.alphabet == train_ds.alphabet))
        throw ParamError("train: validation alphabet differs from training alphabet");
    if (test_ds && !(test_ds->alphabet == train_ds.alphabet))
        throw ParamError("train: test alphabet differs from training alphabet");
}

Checkpoint snapshot(const Architecture& arch, const Model& model, const OptState& opt,
                    const Rng& rng, std::uint64_t step, double best_val_cer,
                    std::uint64_t best_step, double ema_train_loss) {
    Checkpoint c;
    c.arch = arch;
    c.model = model;
    c.opt = opt;
    c.rng_algorithm = Rng::kAlgorithm;
    c.rng_seed = rng.seed;
    c.rng_counter = rng.counter;
    c.step = step;
    c.best_val_cer = best_val_cer;
    c.best_step = best_step;
    c.ema_train_loss = ema_train_loss;
    return c;
}

TrainResult train_loop(Model model, OptState opt, Rng rng, std::uint64_t start_step,
                       double best_val_cer, std::uint64_t best_step, double start_ema,
                       const Dataset& train_ds, const Dataset& val_ds, const Dataset* test_ds,
                       const TrainConfig& cfg) {
    cfg.validate();
    const Architecture& arch = model.arch;
    check_datasets(arch, train_ds, val_ds, test_ds);

    std::vector<Labeling> labels(train_ds.samples.size());
    std::vector<bool> feasible(train_ds.samples.size());
    std::size_t usable = 0;
    for (std::size_t i = 0; i < train_ds.samples.size(); ++i) {
        labels[i] = train_ds.alphabet.encode(train_ds.samples[i].label);
        feasible[i] = train_ds.samples[i].features.size() >= labels[i].size() + count_repeats(labels[i]);
        if (feasible[i]) ++usable;
    }
    if (usable == 0) throw DataError("train: every training sample is infeasible for CTC");

    TrainResult result;
    result.skipped_infeasible = 0;
    Model grads = zero_like(model);
    auto grad_tensors = tensor_refs(grads);
    double ema_loss = start_ema;
    constexpr double kEmaDecay = 0.99;

    Checkpoint best = snapshot(arch, model, opt, rng, start_step, best_val_cer, best_step, ema_loss);
    bool improved_once = false;

    std::uint64_t step = start_step;
    SequenceCache cache;
    while (step < cfg.max_steps) {
        ++step;
        for (const TensorRef& ref : grad_tensors) std::fill(ref.data->begin(), ref.data->end(), 0.0);
        double batch_loss = 0.0;
        const double inv_batch = 1.0 / static_cast<double>(cfg.batch_size);
        for (std::size_t b = 0; b < cfg.batch_size; ++b) {
            std::size_t idx = rng.next_below(train_ds.samples.size());
            while (!feasible[idx]) {
                ++result.skipped_infeasible;
                idx = rng.next_below(train_ds.samples.size());
            }
            const Sample& sample = train_ds.samples[idx];
            auto logprobs = model_forward(model, sample.features, /*training=*/true, rng, &cache);
            CtcResult ctc = ctc_loss(logprobs, labels[idx]);
            batch_loss += ctc.loss * inv_batch;
            for (auto& row : ctc.grad)
                for (double& v : row) v *= inv_batch;
            model_backward(model, cache, ctc.grad, grads);
        }
        adam_step(opt, model, grads, cfg);
        ema_loss = std::isnan(ema_loss) ? batch_loss : kEmaDecay * ema_loss + (1.0 - kEmaDecay) * batch_loss;

        if (step % cfg.eval_every_steps == 0) {
            TraceRow row;
            row.step = step;
            row.train_loss = ema_loss;
            row.val_cer = evaluate(model, val_ds);
            if (test_ds) row.test_cer = evaluate(model, *test_ds);
            result.trace.rows.push_back(row);
            if (row.val_cer < best_val_cer) {
                best_val_cer = row.val_cer;
                best_step = step;
                best = snapshot(arch, model, opt, rng, step, best_val_cer, best_step, ema_loss);
                improved_once = true;
            }
            if (step - best_step >= cfg.patience_steps) break;
        }
    }

    result.best = std::move(best);
    if (!improved_once) {
        // No post-start improvement: the start state is still the best known.
        result.best.best_val_cer = best_val_cer;
        result.best.best_step = best_step;
    }
    result.final_state = snapshot(arch, model, opt, rng, step, best_val_cer, best_step, ema_loss);
    return result;
}

}  // namespace

TrainResult train(const Model& initial, const Dataset& train_ds, const Dataset& val_ds,
                  const Dataset* test_ds, const TrainConfig& cfg) {
    Rng rng(Rng(cfg.seed).derive_seed(1));  // stream 0 is reserved for init_model
    return train_loop(initial, make_opt_state(initial), rng, 0,
                      std::numeric_limits<double>::infinity(), 0,
                      std::numeric_limits<double>::quiet_NaN(), train_ds, val_ds, test_ds, cfg);
}

TrainResult train_resume(const Checkpoint& ckpt, const Dataset& train_ds, const Dataset& val_ds,
                         const Dataset* test_ds, const TrainConfig& cfg) {
    Rng rng(ckpt.rng_seed, ckpt.rng_counter);
    return train_loop(ckpt.model, ckpt.opt, rng, ckpt.step, ckpt.best_val_cer, ckpt.best_step,
                      ckpt.ema_train_loss, train_ds, val_ds, test_ds, cfg);
}

}  // namespace indy
