#include "indy/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace indy {

namespace {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline double log_add(double a, double b) {
    if (a == kLogZero) return b;
    if (b == kLogZero) return a;
    return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

}  // namespace

std::size_t count_repeats(const Labeling& label) {
    std::size_t r = 0;
    for (std::size_t i = 1; i < label.size(); ++i)
        if (label[i] == label[i - 1]) ++r;
    return r;
}

CtcResult ctc_loss(const std::vector<Vector>& logprobs, const Labeling& label) {
    const std::size_t T = logprobs.size();
    if (T == 0) throw ParamError("ctc_loss: empty input sequence");
    const std::size_t num_classes = logprobs[0].size();  // K+1
    if (num_classes < 1) throw ParamError("ctc_loss: need at least the blank class");
    const int blank = static_cast<int>(num_classes) - 1;
    for (const auto& row : logprobs) {
        if (row.size() != num_classes)
            throw ShapeError("ctc_loss: ragged log-probability rows");
    }
    for (int idx : label) {
        if (idx < 0 || idx >= blank) {
            std::ostringstream os;
            os << "ctc_loss: label index " << idx << " outside [0," << blank << ")";
            throw ParamError(os.str());
        }
    }
    const std::size_t needed = label.size() + count_repeats(label);
    if (T < needed) {
        std::ostringstream os;
        os << "ctc_loss: label of length " << label.size() << " with " << count_repeats(label)
           << " repeats needs at least " << needed << " frames, got " << T;
        throw InfeasibleError(os.str());
    }

    // Blank-augmented label: blank, l1, blank, l2, ..., blank.
    const std::size_t S = 2 * label.size() + 1;
    auto ext = [&](std::size_t s) -> int {
        return (s % 2 == 0) ? blank : label[s / 2];
    };

    std::vector<std::vector<double>> alpha(T, std::vector<double>(S, kLogZero));
    std::vector<std::vector<double>> beta(T, std::vector<double>(S, kLogZero));

    alpha[0][0] = logprobs[0][ext(0)];
    if (S > 1) alpha[0][1] = logprobs[0][ext(1)];
    for (std::size_t t = 1; t < T; ++t) {
        for (std::size_t s = 0; s < S; ++s) {
            double a = alpha[t - 1][s];
            if (s >= 1) a = log_add(a, alpha[t - 1][s - 1]);
            if (s >= 2 && ext(s) != blank && ext(s) != ext(s - 2))
                a = log_add(a, alpha[t - 1][s - 2]);
            alpha[t][s] = a == kLogZero ? kLogZero : a + logprobs[t][ext(s)];
        }
    }

    double log_p = alpha[T - 1][S - 1];
    if (S > 1) log_p = log_add(log_p, alpha[T - 1][S - 2]);
    // Feasible labels always have at least one alignment with nonzero
    // probability unless some required logprob is -inf; guard anyway.
    if (log_p == kLogZero) {
        CtcResult res;
        res.loss = std::numeric_limits<double>::infinity();
        res.grad.assign(T, Vector(num_classes, 0.0));
        return res;
    }

    beta[T - 1][S - 1] = logprobs[T - 1][ext(S - 1)];
    if (S > 1) beta[T - 1][S - 2] = logprobs[T - 1][ext(S - 2)];
    for (std::size_t t = T - 1; t-- > 0;) {
        for (std::size_t s = 0; s < S; ++s) {
            double bsum = beta[t + 1][s];
            if (s + 1 < S) bsum = log_add(bsum, beta[t + 1][s + 1]);
            if (s + 2 < S && ext(s + 2) != blank && ext(s + 2) != ext(s))
                bsum = log_add(bsum, beta[t + 1][s + 2]);
            beta[t][s] = bsum == kLogZero ? kLogZero : bsum + logprobs[t][ext(s)];
        }
    }

    CtcResult res;
    res.loss = -log_p;
    res.grad.assign(T, Vector(num_classes, 0.0));
    // d loss / d logprob[t][k] = -exp(lse_{s: ext(s)=k}(alpha+beta) - logprob - log_p);
    // alpha and beta both include frame t's emission, hence the subtraction.
    for (std::size_t t = 0; t < T; ++t) {
        Vector lse(num_classes, kLogZero);
        for (std::size_t s = 0; s < S; ++s) {
            const double ab = alpha[t][s] == kLogZero || beta[t][s] == kLogZero
                                  ? kLogZero
                                  : alpha[t][s] + beta[t][s];
            if (ab == kLogZero) continue;
            const int k = ext(s);
            lse[k] = log_add(lse[k], ab);
        }
        for (std::size_t k = 0; k < num_classes; ++k) {
            if (lse[k] == kLogZero) continue;
            res.grad[t][k] = -std::exp(lse[k] - logprobs[t][k] - log_p);
        }
    }
    return res;
}

Labeling greedy_decode(const std::vector<Vector>& logprobs) {
    if (logprobs.empty()) throw ParamError("greedy_decode: empty input sequence");
    const int blank = static_cast<int>(logprobs[0].size()) - 1;
    Labeling out;
    int prev = blank;
    for (const auto& row : logprobs) {
        int best = 0;
        for (std::size_t k = 1; k < row.size(); ++k)
            if (row[k] > row[best]) best = static_cast<int>(k);
        if (best != prev && best != blank) out.push_back(best);
        prev = best;
    }
    return out;
}

std::vector<std::uint32_t> utf8_codepoints(const std::string& s) {
    std::vector<std::uint32_t> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char c = static_cast<unsigned char>(s[i]);
        std::uint32_t cp = 0;
        std::size_t extra = 0;
        if (c < 0x80) {
            cp = c;
        } else if ((c >> 5) == 0x6) {
            cp = c & 0x1F;
            extra = 1;
        } else if ((c >> 4) == 0xE) {
            cp = c & 0x0F;
            extra = 2;
        } else if ((c >> 3) == 0x1E) {
            cp = c & 0x07;
            extra = 3;
        } else {
            throw FormatError("invalid UTF-8 lead byte at offset " + std::to_string(i));
        }
        if (i + extra >= s.size())
            throw FormatError("truncated UTF-8 sequence at offset " + std::to_string(i));
        for (std::size_t j = 1; j <= extra; ++j) {
            const unsigned char cc = static_cast<unsigned char>(s[i + j]);
            if ((cc >> 6) != 0x2)
                throw FormatError("invalid UTF-8 continuation at offset " + std::to_string(i + j));
            cp = (cp << 6) | (cc & 0x3F);
        }
        out.push_back(cp);
        i += extra + 1;
    }
    return out;
}

std::size_t edit_distance(const std::string& reference, const std::string& hypothesis) {
    const auto ref = utf8_codepoints(reference);
    const auto hyp = utf8_codepoints(hypothesis);
    std::vector<std::size_t> prev(hyp.size() + 1), cur(hyp.size() + 1);
    for (std::size_t j = 0; j <= hyp.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= ref.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= hyp.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[hyp.size()];
}

double cer(const std::string& reference, const std::string& hypothesis) {
    const std::size_t ref_len = utf8_codepoints(reference).size();
    if (ref_len == 0) throw ParamError("cer: empty reference");
    return static_cast<double>(edit_distance(reference, hypothesis)) / static_cast<double>(ref_len);
}

double corpus_cer(const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::size_t dist = 0, len = 0;
    for (const auto& [ref, hyp] : pairs) {
        dist += edit_distance(ref, hyp);
        len += utf8_codepoints(ref).size();
    }
    if (len == 0) throw ParamError("corpus_cer: total reference length is zero");
    return static_cast<double>(dist) / static_cast<double>(len);
}

}  // namespace indy
