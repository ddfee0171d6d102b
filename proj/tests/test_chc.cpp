#include <cmath>
#include <map>

#include "catch_amalgamated.hpp"
#include "pathstar/chc.hpp"
#include "reference_instance.hpp"

using namespace pathstar;

namespace {

std::vector<TokenizedSample> make_dataset(int n, int D, int M, TargetVariant tv,
                                          std::uint64_t seed) {
    TokenizationOptions opt;
    opt.target_variant = tv;
    std::vector<TokenizedSample> out;
    for (int i = 0; i < n; ++i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        PathStarGraph g = sample_graph(100, D, M, rng);
        out.push_back(tokenize(sample_target(g, rng), opt, rng));
    }
    return out;
}

}  // namespace

TEST_CASE("edge lookup on the reference instance") {
    TaskInstance inst = reference_instance();
    Rng rng(1);
    // internal ids: path 3 -> 7 -> 1 -> 6
    REQUIRE(chc_predict({}, inst, rng) == 3);
    REQUIRE(chc_predict({3, 7}, inst, rng) == 1);
    REQUIRE(chc_predict({3, 7, 1}, inst, rng) == 6);
    REQUIRE_THROWS_AS(chc_predict({3, 7, 1, 6}, inst, rng), std::invalid_argument);

    std::map<int, int> freq;
    const int draws = 9000;
    for (int i = 0; i < draws; ++i) ++freq[chc_predict({3}, inst, rng)];
    for (int lead : {7, 8, 4}) {
        double p = static_cast<double>(freq[lead]) / draws;
        REQUIRE(p > 0.30);
        REQUIRE(p < 0.37);
    }
}

TEST_CASE("reversed prediction is a deterministic walk") {
    TaskInstance inst = reference_instance();
    Rng rng(2);
    REQUIRE(chc_predict_reversed({}, inst, rng) == 6);
    REQUIRE(chc_predict_reversed({6}, inst, rng) == 1);
    REQUIRE(chc_predict_reversed({6, 1}, inst, rng) == 7);
    REQUIRE(chc_predict_reversed({6, 1, 7}, inst, rng) == 3);
    REQUIRE_THROWS_AS(chc_predict_reversed({3}, inst, rng), std::invalid_argument);
}

TEST_CASE("forward teacher-forced accuracy: everything but the leading node") {
    for (int D : {3, 4}) {
        auto data = make_dataset(5000, D, 5, TargetVariant::FullForward, 101 + static_cast<std::uint64_t>(D));
        Rng rng(3);
        PositionReport rep = teacher_forced_eval(chc_predictor(), data, rng);
        REQUIRE(rep.sample_count == 5000);
        REQUIRE(rep.position_accuracy.size() == 5);
        REQUIRE(rep.position_accuracy[0] == 1.0);
        for (std::size_t p = 2; p < 5; ++p) REQUIRE(rep.position_accuracy[p] == 1.0);
        const double expect = 1.0 / D;
        const double sigma = std::sqrt(expect * (1 - expect) / 5000);
        REQUIRE(std::abs(rep.position_accuracy[1] - expect) < 4 * sigma);
        REQUIRE(rep.sequence_accuracy == rep.position_accuracy[1]);
    }
}

TEST_CASE("reversed teacher-forced accuracy is perfect") {
    auto data = make_dataset(3000, 3, 5, TargetVariant::Reversed, 103);
    Rng rng(4);
    PositionReport rep = teacher_forced_eval(chc_predictor(), data, rng);
    for (double acc : rep.position_accuracy) REQUIRE(acc == 1.0);
    REQUIRE(rep.sequence_accuracy == 1.0);
}

TEST_CASE("leading-only targets are a single chance-level position") {
    auto data = make_dataset(4000, 4, 5, TargetVariant::LeadingOnly, 107);
    Rng rng(5);
    PositionReport rep = teacher_forced_eval(chc_predictor(), data, rng);
    REQUIRE(rep.position_accuracy.size() == 1);
    const double sigma = std::sqrt(0.25 * 0.75 / 4000);
    REQUIRE(std::abs(rep.position_accuracy[0] - 0.25) < 4 * sigma);
    REQUIRE(rep.sequence_accuracy == rep.position_accuracy[0]);
}

TEST_CASE("single-node arms reduce to one guess after the start") {
    auto data = make_dataset(3000, 3, 2, TargetVariant::FullForward, 109);
    Rng rng(6);
    PositionReport rep = teacher_forced_eval(chc_predictor(), data, rng);
    REQUIRE(rep.position_accuracy.size() == 2);
    REQUIRE(rep.position_accuracy[0] == 1.0);
    const double sigma = std::sqrt((1.0 / 3) * (2.0 / 3) / 3000);
    REQUIRE(std::abs(rep.position_accuracy[1] - 1.0 / 3) < 4 * sigma);
    REQUIRE(rep.sequence_accuracy == rep.position_accuracy[1]);
}

TEST_CASE("copying t at the known final position") {
    // with M=2 the leading position is also the final one, so the toggle
    // makes the whole prediction deterministic
    auto data = make_dataset(500, 3, 2, TargetVariant::FullForward, 113);
    Rng rng(7);
    PositionReport rep = teacher_forced_eval(chc_predictor(true), data, rng);
    REQUIRE(rep.sequence_accuracy == 1.0);

    auto deep = make_dataset(500, 3, 5, TargetVariant::FullForward, 127);
    PositionReport rep2 = teacher_forced_eval(chc_predictor(true), deep, rng);
    REQUIRE(rep2.position_accuracy[4] == 1.0);  // t copied from Q
    REQUIRE(rep2.position_accuracy[1] < 0.6);   // leading still a guess
}
