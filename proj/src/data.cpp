#include "indy/data.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace indy {

using nlohmann::json;

namespace {

std::vector<std::uint32_t> printable_pool() {
    std::vector<std::uint32_t> pool;
    for (char c = 'a'; c <= 'z'; ++c) pool.push_back(static_cast<std::uint32_t>(c));
    for (char c = 'A'; c <= 'Z'; ++c) pool.push_back(static_cast<std::uint32_t>(c));
    for (char c = '0'; c <= '9'; ++c) pool.push_back(static_cast<std::uint32_t>(c));
    return pool;
}

}  // namespace

Alphabet::Alphabet(const std::vector<std::uint32_t>& symbols) : symbols_(symbols) {
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        if (!index_.emplace(symbols_[i], static_cast<int>(i)).second)
            throw ParamError("alphabet: duplicate symbol '" + encode_utf8(symbols_[i]) + "'");
    }
}

Alphabet Alphabet::printable(std::size_t k) {
    const auto pool = printable_pool();
    if (k > pool.size()) {
        throw ParamError("alphabet size " + std::to_string(k) + " exceeds the printable pool of " +
                         std::to_string(pool.size()) + " symbols");
    }
    return Alphabet(std::vector<std::uint32_t>(pool.begin(), pool.begin() + k));
}

std::size_t Alphabet::printable_pool_size() { return printable_pool().size(); }

Labeling Alphabet::encode(const std::string& text) const {
    const auto cps = utf8_codepoints(text);
    Labeling out;
    out.reserve(cps.size());
    for (std::size_t i = 0; i < cps.size(); ++i) {
        auto it = index_.find(cps[i]);
        if (it == index_.end()) {
            throw ParamError("encode: character '" + encode_utf8(cps[i]) + "' at position " +
                             std::to_string(i) + " is not in the alphabet");
        }
        out.push_back(it->second);
    }
    return out;
}

std::string Alphabet::decode(const Labeling& label) const {
    std::string out;
    for (int idx : label) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= symbols_.size())
            throw ParamError("decode: index " + std::to_string(idx) + " outside alphabet of size " +
                             std::to_string(symbols_.size()));
        out += encode_utf8(symbols_[static_cast<std::size_t>(idx)]);
    }
    return out;
}

std::string encode_utf8(std::uint32_t cp) {
    std::string out;
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
}

void SynthConfig::validate() const {
    if (alphabet_size < 1) throw ParamError("synth: alphabet_size must be >= 1");
    if (dim < 1) throw ParamError("synth: dim must be >= 1");
    if (proto_len_min < 1 || proto_len_min > proto_len_max)
        throw ParamError("synth: prototype length range is empty");
    if (label_len_min < 1 || label_len_min > label_len_max)
        throw ParamError("synth: label length range is empty");
    if (noise_stddev < 0.0) throw ParamError("synth: noise stddev must be >= 0");
}

namespace {

std::size_t draw_in_range(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + rng.next_below(hi - lo + 1);
}

Dataset make_split(const Alphabet& alphabet, const std::vector<std::vector<Vector>>& prototypes,
                   const SynthConfig& cfg, Rng rng, std::size_t count) {
    Dataset ds;
    ds.dim = cfg.dim;
    ds.alphabet = alphabet;
    ds.samples.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        const std::size_t len = draw_in_range(rng, cfg.label_len_min, cfg.label_len_max);
        Labeling label(len);
        for (std::size_t i = 0; i < len; ++i)
            label[i] = static_cast<int>(rng.next_below(alphabet.size()));
        Sample sample;
        sample.label = alphabet.decode(label);
        for (int idx : label) {
            for (const Vector& frame : prototypes[static_cast<std::size_t>(idx)]) {
                Vector noisy = frame;
                if (cfg.noise_stddev > 0.0)
                    for (double& v : noisy) v += cfg.noise_stddev * rng.next_normal();
                sample.features.push_back(std::move(noisy));
            }
        }
        ds.samples.push_back(std::move(sample));
    }
    return ds;
}

}  // namespace

SynthSplits generate(const SynthConfig& config) {
    config.validate();
    const Alphabet alphabet = Alphabet::printable(config.alphabet_size);

    Rng master(config.seed);
    Rng proto_rng = master.fork(0);
    std::vector<std::vector<Vector>> prototypes(config.alphabet_size);
    for (std::size_t k = 0; k < config.alphabet_size; ++k) {
        const std::size_t len = draw_in_range(proto_rng, config.proto_len_min, config.proto_len_max);
        prototypes[k].resize(len);
        for (std::size_t t = 0; t < len; ++t)
            prototypes[k][t] = uniform(proto_rng, -1.0, 1.0, config.dim);
    }

    SynthSplits splits;
    splits.train = make_split(alphabet, prototypes, config, master.fork(1), config.train_count);
    splits.validation = make_split(alphabet, prototypes, config, master.fork(2), config.val_count);
    splits.test = make_split(alphabet, prototypes, config, master.fork(3), config.test_count);
    return splits;
}

std::string dataset_meta_path(const std::string& path) {
    const std::size_t slash = path.find_last_of("/\\");
    const std::size_t dot = path.find_last_of('.');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
        return path.substr(0, dot) + ".meta.json";
    return path + ".meta.json";
}

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream meta(dataset_meta_path(path));
    if (!meta) throw ParamError("save_dataset: cannot write " + dataset_meta_path(path));
    json meta_doc;
    meta_doc["dim"] = ds.dim;
    json alpha = json::array();
    for (std::uint32_t cp : ds.alphabet.symbols()) alpha.push_back(encode_utf8(cp));
    meta_doc["alphabet"] = alpha;
    meta << meta_doc.dump() << "\n";

    std::ofstream out(path);
    if (!out) throw ParamError("save_dataset: cannot write " + path);
    for (const Sample& s : ds.samples) {
        json rec;
        rec["features"] = s.features;
        rec["label"] = s.label;
        out << rec.dump() << "\n";
    }
}

Dataset load_dataset(const std::string& path) {
    std::ifstream meta(dataset_meta_path(path));
    if (!meta) throw FormatError("load_dataset: missing metadata file " + dataset_meta_path(path));
    json meta_doc;
    try {
        meta >> meta_doc;
    } catch (const json::exception& e) {
        throw FormatError("load_dataset: bad metadata in " + dataset_meta_path(path) + ": " + e.what());
    }
    Dataset ds;
    ds.dim = meta_doc.at("dim").get<std::size_t>();
    std::vector<std::uint32_t> symbols;
    for (const auto& entry : meta_doc.at("alphabet")) {
        const auto cps = utf8_codepoints(entry.get<std::string>());
        if (cps.size() != 1)
            throw FormatError("load_dataset: alphabet entries must be single characters");
        symbols.push_back(cps[0]);
    }
    ds.alphabet = Alphabet(symbols);

    std::ifstream in(path);
    if (!in) throw FormatError("load_dataset: cannot open " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw FormatError("load_dataset: " + path + " line " + std::to_string(line_no) +
                              ": " + e.what());
        }
        Sample s;
        try {
            s.features = rec.at("features").get<std::vector<Vector>>();
            s.label = rec.at("label").get<std::string>();
        } catch (const json::exception& e) {
            throw FormatError("load_dataset: " + path + " line " + std::to_string(line_no) +
                              ": " + e.what());
        }
        for (const Vector& frame : s.features) {
            if (frame.size() != ds.dim) {
                throw FormatError("load_dataset: " + path + " line " + std::to_string(line_no) +
                                  ": feature dim " + std::to_string(frame.size()) +
                                  " does not match metadata dim " + std::to_string(ds.dim));
            }
        }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

}  // namespace indy
