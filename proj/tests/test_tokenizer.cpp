#include <algorithm>
#include <set>

#include "catch_amalgamated.hpp"
#include "pathstar/tokenizer.hpp"
#include "reference_instance.hpp"

using namespace pathstar;

namespace {

const std::vector<TokenizationOptions> all_option_combos() {
    std::vector<TokenizationOptions> combos;
    for (auto perm : {PermMode::EdgeWise, PermMode::ArmWise, PermMode::None})
        for (auto qp : {QPosition::Start, QPosition::End})
            for (auto tv : {TargetVariant::FullForward, TargetVariant::Reversed,
                            TargetVariant::LeadingOnly})
                for (int markers : {1, 2}) {
                    TokenizationOptions o;
                    o.perm_mode = perm;
                    o.q_position = qp;
                    o.target_variant = tv;
                    o.edge_marker_count = markers;
                    combos.push_back(o);
                }
    return combos;
}

std::multiset<std::pair<int, int>> edge_multiset(const PathStarGraph& g) {
    auto es = g.edges();
    return {es.begin(), es.end()};
}

}  // namespace

TEST_CASE("vocabulary layout") {
    Vocabulary v{100};
    REQUIRE(v.size() == 105);
    REQUIRE(v.edge_mark() == 100);
    REQUIRE(v.q_open() == 101);
    REQUIRE(v.q_close() == 102);
    REQUIRE(v.bos() == 103);
    REQUIRE(v.eos() == 104);
    REQUIRE(v.surface(0) == "1");
    REQUIRE(v.surface(99) == "100");
    REQUIRE(v.surface(v.edge_mark()) == "|");
    REQUIRE(v.id_of("100") == 99);
    REQUIRE(v.id_of("BOS") == 103);
    REQUIRE_FALSE(v.id_of("101").has_value());
    REQUIRE_FALSE(v.id_of("0").has_value());
    REQUIRE_FALSE(v.id_of("x").has_value());
}

TEST_CASE("reference instance serializations match the expected strings") {
    TaskInstance inst = reference_instance();
    TokenizationOptions opt;  // edge-wise, Q at end, full forward target

    // edges() order: (4,9)(9,1)(1,3)(4,8)(8,2)(2,7)(4,5)(5,10)(10,6) in display labels
    const std::vector<int> shuffled{1, 8, 4, 5, 2, 3, 6, 7, 0};
    TokenizedSample s = tokenize_with_order(inst, opt, shuffled);
    REQUIRE(detokenize(s) ==
            "BOS 9 1 | 10 6 | 8 2 | 2 7 | 1 3 | 4 8 | 4 5 | 5 10 | 4 9 | / 4 7 = 4 8 2 7 EOS");

    opt.perm_mode = PermMode::ArmWise;
    const std::vector<int> identity{0, 1, 2, 3, 4, 5, 6, 7, 8};
    TokenizedSample a = tokenize_with_order(inst, opt, identity);
    REQUIRE(detokenize(a) ==
            "BOS 4 9 | 9 1 | 1 3 | 4 8 | 8 2 | 2 7 | 4 5 | 5 10 | 10 6 | / 4 7 = 4 8 2 7 EOS");

    REQUIRE(s.prefix_len == 32);
    REQUIRE(s.target_len == 4);
}

TEST_CASE("token sequence length arithmetic") {
    Rng rng(1);
    PathStarGraph g = sample_graph(10, 2, 2, rng);
    TaskInstance inst = sample_target(g, rng);
    TokenizationOptions opt;
    opt.perm_mode = PermMode::None;
    opt.target_variant = TargetVariant::LeadingOnly;
    TokenizedSample s = tokenize(inst, opt, rng);
    REQUIRE(s.tokens.size() == 13);  // BOS(1) + 2 edges * 3 + Q(4) + l_t(1) + EOS(1)
    REQUIRE(s.target_len == 1);
}

TEST_CASE("permutation preserves the edge multiset") {
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        PathStarGraph g = sample_graph(60, 4, 5, rng);
        TaskInstance inst = sample_target(g, rng);
        TokenizationOptions opt;
        opt.perm_mode = i % 2 ? PermMode::EdgeWise : PermMode::ArmWise;
        TokenizedSample s = tokenize(inst, opt, rng);
        TokenizedSample parsed = parse_sample(detokenize(s), s.vocab());
        REQUIRE(edge_multiset(parsed.instance.graph) == edge_multiset(g));
        REQUIRE(parsed.instance.graph.start == g.start);
        REQUIRE(parsed.instance.target == inst.target);
    }
}

TEST_CASE("arm-wise serialization keeps each arm contiguous and ordered") {
    Rng rng(3);
    PathStarGraph g = sample_graph(60, 4, 5, rng);
    TaskInstance inst = sample_target(g, rng);
    TokenizationOptions opt;
    opt.perm_mode = PermMode::ArmWise;
    for (int i = 0; i < 20; ++i) {
        std::vector<int> order = draw_edge_order(g, opt.perm_mode, rng);
        const int per_arm = g.arm_len() - 1;
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (k % static_cast<std::size_t>(per_arm) == 0) continue;
            REQUIRE(order[k] == order[k - 1] + 1);  // in-arm edges stay near-to-far
        }
    }
}

TEST_CASE("round trip through text across every option combination") {
    int i = 0;
    for (const auto& opt : all_option_combos()) {
        for (int rep = 0; rep < 20; ++rep) {
            Rng rng = Rng::stream(23, static_cast<std::uint64_t>(i++));
            PathStarGraph g = sample_graph(40, 3, rep % 2 ? 5 : 2, rng);
            TaskInstance inst = sample_target(g, rng);
            TokenizedSample s = tokenize(inst, opt, rng);
            const std::string line = detokenize(s);
            TokenizedSample back = parse_sample(line, s.vocab());
            REQUIRE(back.tokens == s.tokens);
            REQUIRE(detokenize(back) == line);
            REQUIRE(back.prefix_len == s.prefix_len);
            REQUIRE(back.target_len == s.target_len);
            REQUIRE(back.options.q_position == opt.q_position);
            REQUIRE(back.options.target_variant == opt.target_variant);
            REQUIRE(back.options.edge_marker_count == opt.edge_marker_count);
            REQUIRE(back.instance.target == inst.target);
            REQUIRE(back.instance.graph.start == g.start);
            REQUIRE(edge_multiset(back.instance.graph) == edge_multiset(g));
        }
    }
}

TEST_CASE("parser rejects malformed lines") {
    Vocabulary v{10};
    REQUIRE_THROWS_WITH(parse_sample("BOS 4 | 2 7 | / 4 7 = 7 EOS", v),
                        Catch::Matchers::ContainsSubstring("malformed edge"));
    REQUIRE_THROWS_WITH(parse_sample("BOS 4 9 | 2 7 | 4 7 EOS", v),
                        Catch::Matchers::ContainsSubstring("Q delimiters"));
    REQUIRE_THROWS_WITH(parse_sample("BOS 4 4 | 2 7 | / 4 7 = 7 EOS", v),
                        Catch::Matchers::ContainsSubstring("duplicate node"));
    REQUIRE_THROWS_WITH(parse_sample("BOS 4 11 | 2 7 | / 4 7 = 7 EOS", v),
                        Catch::Matchers::ContainsSubstring("out of vocabulary"));
    REQUIRE_THROWS_AS(parse_sample("", v), std::invalid_argument);
}

TEST_CASE("Q position inferred from delimiters") {
    TaskInstance inst = reference_instance();
    TokenizationOptions opt;
    opt.q_position = QPosition::Start;
    Rng rng(4);
    TokenizedSample s = tokenize(inst, opt, rng);
    std::string line = detokenize(s);
    REQUIRE(line.rfind("BOS / 4 7 =", 0) == 0);
    REQUIRE(parse_sample(line, s.vocab()).options.q_position == QPosition::Start);
}

TEST_CASE("structured expansion shares the graph and varies the target") {
    TaskInstance inst = reference_instance();
    TokenizationOptions opt;
    Rng rng(5);
    auto group = structured_expand(inst, 2, opt, rng);
    REQUIRE(group.size() == 3);
    std::set<int> targets;
    for (const auto& s : group) {
        REQUIRE(edge_multiset(s.instance.graph) == edge_multiset(inst.graph));
        targets.insert(s.instance.target);
    }
    REQUIRE(targets == std::set<int>{6, 2, 5});  // all three final nodes
    REQUIRE(group.front().instance.target == inst.target);

    REQUIRE_THROWS_AS(structured_expand(inst, 3, opt, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(structured_expand(inst, 0, opt, rng), std::invalid_argument);
}

TEST_CASE("structured alternatives are drawn uniformly") {
    Rng g_rng(6);
    PathStarGraph g = sample_graph(40, 5, 3, g_rng);
    TaskInstance inst = make_instance(g, g.arms[0].back());
    TokenizationOptions opt;
    std::map<int, int> freq;
    const int draws = 1000;
    for (int i = 0; i < draws; ++i) {
        Rng rng = Rng::stream(29, static_cast<std::uint64_t>(i));
        for (const auto& s : structured_expand(inst, 2, opt, rng))
            if (s.instance.target != inst.target) ++freq[s.instance.target];
    }
    for (int d = 1; d < 5; ++d) {
        double p = static_cast<double>(freq[g.arms[static_cast<std::size_t>(d)].back()]) /
                   (2.0 * draws);
        REQUIRE(p > 0.25 - 0.04);
        REQUIRE(p < 0.25 + 0.04);
    }
}

TEST_CASE("epoch reshuffle redraws only the serialization order") {
    Rng rng(7);
    PathStarGraph g = sample_graph(40, 2, 3, rng);
    TaskInstance inst = sample_target(g, rng);
    TokenizationOptions opt;

    SECTION("no permutation means no change") {
        opt.perm_mode = PermMode::None;
        std::vector<TokenizedSample> batch{tokenize(inst, opt, rng)};
        auto before = batch[0].tokens;
        Rng e(8);
        epoch_reshuffle(batch, e);
        REQUIRE(batch[0].tokens == before);
    }

    SECTION("same seed replays the same permutations") {
        std::vector<TokenizedSample> a{tokenize(inst, opt, rng)}, b = a;
        Rng ra(9), rb(9);
        epoch_reshuffle(a, ra);
        epoch_reshuffle(b, rb);
        REQUIRE(a[0].tokens == b[0].tokens);
    }

    SECTION("all 24 orders of a 4-edge graph appear") {
        std::vector<TokenizedSample> batch{tokenize(inst, opt, rng)};
        std::set<std::vector<int>> orders;
        Rng e(10);
        for (int epoch = 0; epoch < 10000 && orders.size() < 24; ++epoch) {
            epoch_reshuffle(batch, e);
            orders.insert(batch[0].tokens);
            REQUIRE(batch[0].instance.target == inst.target);
        }
        REQUIRE(orders.size() == 24);
    }
}

TEST_CASE("dataset header round trip") {
    DatasetHeader h;
    h.D = 3;
    h.M = 5;
    h.vocab_size = 100;
    h.structured = 2;
    h.seed = 77;
    h.options.perm_mode = PermMode::ArmWise;
    h.options.q_position = QPosition::Start;
    h.options.target_variant = TargetVariant::Reversed;
    h.options.edge_marker_count = 2;
    DatasetHeader back = DatasetHeader::parse(h.line());
    REQUIRE(back.D == 3);
    REQUIRE(back.M == 5);
    REQUIRE(back.vocab_size == 100);
    REQUIRE(back.structured == 2);
    REQUIRE(back.seed == 77);
    REQUIRE(back.options.perm_mode == PermMode::ArmWise);
    REQUIRE(back.options.q_position == QPosition::Start);
    REQUIRE(back.options.target_variant == TargetVariant::Reversed);
    REQUIRE(back.options.edge_marker_count == 2);
    REQUIRE_THROWS_AS(DatasetHeader::parse("no hash"), std::invalid_argument);
}
