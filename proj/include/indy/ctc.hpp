#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "indy/numerics.hpp"

namespace indy {

// Class indices in [0, K); the blank is class K (the last of K+1) and never
// appears in a Labeling.
using Labeling = std::vector<int>;

struct CtcResult {
    double loss = 0.0;                 // negative log likelihood
    std::vector<Vector> grad;          // T x (K+1), d loss / d logprobs
};

// Number of adjacent equal pairs; a label needs T >= len + repeats frames.
std::size_t count_repeats(const Labeling& label);

// Negative log likelihood of `label` under per-frame log-probabilities
// (T rows, K+1 classes each, blank last), marginalized over all
// blank-augmented alignments, plus its exact gradient w.r.t. the inputs.
// Throws InfeasibleError when no alignment of length T exists.
CtcResult ctc_loss(const std::vector<Vector>& logprobs, const Labeling& label);

// Best-path decoding: per-frame argmax (ties toward the lower index),
// collapse adjacent repeats, drop blanks.
Labeling greedy_decode(const std::vector<Vector>& logprobs);

// Unicode scalar values of a UTF-8 string. FormatError on invalid UTF-8.
std::vector<std::uint32_t> utf8_codepoints(const std::string& s);

// Unit-cost Levenshtein distance over Unicode scalar values.
std::size_t edit_distance(const std::string& reference, const std::string& hypothesis);

// Edit distance divided by reference length. The reference must be nonempty.
double cer(const std::string& reference, const std::string& hypothesis);

// Pooled corpus rate: sum of edit distances / sum of reference lengths.
double corpus_cer(const std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace indy
