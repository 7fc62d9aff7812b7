#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "indy/ctc.hpp"
#include "oracles.hpp"

using namespace indy;

namespace {

// Random normalized log-probabilities, T rows over `classes` classes.
std::vector<Vector> random_logprobs(std::size_t T, std::size_t classes, Rng& rng) {
    std::vector<Vector> out(T, Vector(classes));
    for (auto& row : out) {
        double mx = -1e300;
        for (double& v : row) {
            v = -3.0 + 6.0 * rng.next_double();
            mx = std::max(mx, v);
        }
        double sum = 0;
        for (double v : row) sum += std::exp(v - mx);
        const double lse = mx + std::log(sum);
        for (double& v : row) v -= lse;
    }
    return out;
}

std::vector<Vector> uniform_logprobs(std::size_t T, std::size_t classes) {
    return std::vector<Vector>(T, Vector(classes, -std::log(static_cast<double>(classes))));
}

// All label strings over k symbols with length <= max_len.
std::vector<Labeling> all_labels(int k, std::size_t max_len) {
    std::vector<Labeling> out = {{}};
    std::vector<Labeling> frontier = {{}};
    for (std::size_t len = 1; len <= max_len; ++len) {
        std::vector<Labeling> next;
        for (const Labeling& base : frontier) {
            for (int c = 0; c < k; ++c) {
                Labeling l = base;
                l.push_back(c);
                next.push_back(l);
                out.push_back(l);
            }
        }
        frontier = std::move(next);
    }
    return out;
}

}  // namespace

TEST_CASE("single-frame single-path case") {
    // uniform over {a, blank}: P(label "a") = 0.5
    const auto lp = uniform_logprobs(1, 2);
    CtcResult r = ctc_loss(lp, {0});
    CHECK(r.loss == doctest::Approx(-std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("two-frame path sum") {
    // paths aa, a_, _a: with p=0.5 everywhere, P = 0.75
    const auto lp = uniform_logprobs(2, 2);
    CtcResult r = ctc_loss(lp, {0});
    CHECK(r.loss == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
}

TEST_CASE("empty label is the all-blank path") {
    Rng rng(4);
    const auto lp = random_logprobs(5, 3, rng);
    double expect = 0;
    for (const auto& row : lp) expect -= row[2];
    CHECK(ctc_loss(lp, {}).loss == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("infeasible labels raise instead of returning infinity") {
    const auto lp = uniform_logprobs(2, 3);
    CHECK_THROWS_AS(ctc_loss(lp, {0, 1, 0}), InfeasibleError);   // needs 3 frames
    CHECK_THROWS_AS(ctc_loss(lp, {0, 0}), InfeasibleError);      // repeat needs 3 frames
    CHECK_NOTHROW(ctc_loss(uniform_logprobs(3, 3), {0, 0}));
    CHECK_THROWS_AS(ctc_loss(lp, {5}), ParamError);              // index out of range
}

TEST_CASE("matches brute-force path enumeration for all small cases") {
    Rng rng(99);
    for (std::size_t T = 1; T <= 6; ++T) {
        for (int k = 1; k <= 2; ++k) {
            for (const Labeling& label : all_labels(k, 3)) {
                if (T < label.size() + count_repeats(label)) continue;
                for (int draw = 0; draw < 3; ++draw) {
                    const auto lp = random_logprobs(T, k + 1, rng);
                    const double expect = oracles::ctc_loss_bruteforce(lp, label);
                    CHECK(std::abs(ctc_loss(lp, label).loss - expect) < 1e-10);
                }
            }
        }
    }
}

TEST_CASE("loss exponentiates to a probability") {
    Rng rng(123);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t T = 1 + rng.next_below(8);
        const auto lp = random_logprobs(T, 4, rng);
        Labeling label;
        for (std::size_t i = 0; i + 1 < T && label.size() < 3; i += 2)
            label.push_back(static_cast<int>(rng.next_below(3)));
        if (T < label.size() + count_repeats(label)) continue;
        const double p = std::exp(-ctc_loss(lp, label).loss);
        CHECK(p > 0.0);
        CHECK(p <= 1.0 + 1e-12);
    }
}

TEST_CASE("gradient matches finite differences on the log-probability inputs") {
    Rng rng(7);
    auto lp = random_logprobs(5, 3, rng);
    const Labeling label = {0, 1};
    CtcResult analytic = ctc_loss(lp, label);
    double max_rel = 0;
    for (auto& row : lp) {
        for (double& v : row) {
            const double num = oracles::central_difference(
                [&]() { return ctc_loss(lp, label).loss; }, &v, 1e-6);
            const std::size_t t = &row - lp.data();
            const std::size_t k = &v - row.data();
            max_rel = std::max(max_rel, oracles::grad_rel_error(analytic.grad[t][k], num));
        }
    }
    CHECK(max_rel < 1e-5);
}

TEST_CASE("greedy decode applies the collapse rule") {
    // classes: 0='a', 1='b', blank=2
    auto one_hot = [](const std::vector<int>& picks, std::size_t classes) {
        std::vector<Vector> lp(picks.size(), Vector(classes, -10.0));
        for (std::size_t t = 0; t < picks.size(); ++t) lp[t][picks[t]] = -0.01;
        return lp;
    };
    CHECK(greedy_decode(one_hot({0, 0, 2, 0}, 3)) == Labeling{0, 0});
    CHECK(greedy_decode(one_hot({2, 2, 2}, 3)) == Labeling{});
    CHECK(greedy_decode(one_hot({2, 0, 1, 1, 2}, 3)) == Labeling{0, 1});
    // argmax ties break toward the lower class index
    std::vector<Vector> tied(1, Vector(3, -1.0986122886681098));
    CHECK(greedy_decode(tied) == Labeling{0});
}

TEST_CASE("decoding a one-hot alignment recovers the label") {
    Rng rng(55);
    for (int trial = 0; trial < 30; ++trial) {
        const int k = 3;
        Labeling label;
        const std::size_t len = 1 + rng.next_below(4);
        for (std::size_t i = 0; i < len; ++i) label.push_back(static_cast<int>(rng.next_below(k)));
        // valid alignment: blank between repeats, blanks sprinkled around
        std::vector<int> path;
        int prev = -1;
        for (int c : label) {
            if (c == prev) path.push_back(k);
            if (rng.next_double() < 0.3) path.push_back(k);
            path.push_back(c);
            prev = c;
        }
        if (rng.next_double() < 0.5) path.push_back(k);
        std::vector<Vector> lp(path.size(), Vector(k + 1, -12.0));
        for (std::size_t t = 0; t < path.size(); ++t) lp[t][path[t]] = -0.001;
        CHECK(greedy_decode(lp) == label);
    }
}

TEST_CASE("cer basics") {
    CHECK(cer("abc", "abc") == 0.0);
    CHECK(cer("abc", "abd") == doctest::Approx(1.0 / 3.0));
    CHECK(cer("abc", "") == 1.0);
    CHECK_THROWS_AS(cer("", "x"), ParamError);
}

TEST_CASE("cer counts unicode scalar values, not bytes") {
    // two-codepoint reference with a one-codepoint edit
    CHECK(cer("\xc3\xa9x", "\xc3\xa9y") == doctest::Approx(0.5));
    CHECK(edit_distance("\xe2\x82\xac", "\xe2\x82\xac") == 0);  // euro sign
}

TEST_CASE("corpus_cer pools edits over reference length") {
    CHECK(corpus_cer({{"ab", "ab"}, {"cd", "cd"}}) == 0.0);
    CHECK(corpus_cer({{"ab", "ax"}, {"cd", "cd"}}) == doctest::Approx(0.25));
    CHECK(corpus_cer({{"a", ""}}) == 1.0);
    CHECK_THROWS_AS(corpus_cer({}), ParamError);
    CHECK_THROWS_AS(corpus_cer({{"", ""}}), ParamError);
}
