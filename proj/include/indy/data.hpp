#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "indy/ctc.hpp"
#include "indy/numerics.hpp"

namespace indy {

// Ordered set of distinct characters with a dense index map. The CTC blank
// is never a member; it lives at index size() in the network outputs.
class Alphabet {
  public:
    Alphabet() = default;
    explicit Alphabet(const std::vector<std::uint32_t>& symbols);

    // First k characters of the built-in printable pool (a-z, A-Z, 0-9).
    static Alphabet printable(std::size_t k);
    static std::size_t printable_pool_size();

    std::size_t size() const { return symbols_.size(); }
    std::uint32_t symbol(std::size_t idx) const { return symbols_.at(idx); }
    const std::vector<std::uint32_t>& symbols() const { return symbols_; }

    Labeling encode(const std::string& text) const;   // ParamError naming char+position
    std::string decode(const Labeling& label) const;  // ParamError on out-of-range index

    bool operator==(const Alphabet& other) const { return symbols_ == other.symbols_; }

  private:
    std::vector<std::uint32_t> symbols_;
    std::unordered_map<std::uint32_t, int> index_;
};

std::string encode_utf8(std::uint32_t codepoint);

struct Sample {
    std::vector<Vector> features;  // T x d
    std::string label;
};

struct Dataset {
    std::size_t dim = 0;
    Alphabet alphabet;
    std::vector<Sample> samples;

    std::size_t size() const { return samples.size(); }
};

struct SynthConfig {
    std::size_t alphabet_size = 8;
    std::size_t dim = 10;
    std::size_t proto_len_min = 3;
    std::size_t proto_len_max = 8;
    std::size_t label_len_min = 1;
    std::size_t label_len_max = 6;
    double noise_stddev = 0.05;
    bool warp = false;  // reserved
    std::size_t train_count = 2000;
    std::size_t val_count = 200;
    std::size_t test_count = 200;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthSplits {
    Dataset train, validation, test;
};

// Each alphabet symbol gets a fixed prototype sub-sequence (length drawn
// from [proto_len_min, proto_len_max], entries uniform in [-1,1)); a sample
// concatenates its label's prototypes and adds Gaussian noise. The three
// splits consume disjoint sub-streams of the seeded generator, so the output
// is a pure function of the config.
SynthSplits generate(const SynthConfig& config);

// One JSON object per line: {"features": [[...], ...], "label": "..."};
// floats carry enough digits for exact 64-bit round-trip. A sidecar
// <name>.meta.json holds {"dim": int, "alphabet": [chars]}.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// Sidecar path for a dataset path (extension replaced by .meta.json).
std::string dataset_meta_path(const std::string& path);

}  // namespace indy
