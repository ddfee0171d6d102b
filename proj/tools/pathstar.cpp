// pathstar — dataset generation, solver runs, baseline evaluation, and
// instance counting over the canonical text format.
//
// Exit codes: 0 success, 1 usage or constraint error, 2 validity below
// 100% in --strict solver runs.
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pathstar/chc.hpp"
#include "pathstar/graph.hpp"
#include "pathstar/solvers.hpp"
#include "pathstar/tokenizer.hpp"

namespace {

using namespace pathstar;

struct GenConfig {
    int D = 2, M = 5, vocab = 100, n = 100, markers = 1, structured = 0, test_n = 0;
    std::uint64_t seed = 0;
    std::string perm = "edge", qpos = "end", target = "forward";
    std::string out, test_out;
};

TokenizationOptions options_of(const GenConfig& c) {
    TokenizationOptions o;
    o.perm_mode = c.perm == "edge" ? PermMode::EdgeWise
                : c.perm == "arm" ? PermMode::ArmWise : PermMode::None;
    o.q_position = c.qpos == "start" ? QPosition::Start : QPosition::End;
    o.target_variant = c.target == "forward" ? TargetVariant::FullForward
                     : c.target == "reversed" ? TargetVariant::Reversed
                     : TargetVariant::LeadingOnly;
    o.edge_marker_count = c.markers;
    return o;
}

// Identity of a (graph, target) pair, for split disjointness.
std::string instance_key(const TaskInstance& inst) {
    std::ostringstream k;
    k << inst.graph.start;
    for (const auto& arm : inst.graph.arms) {
        k << '/';
        for (int v : arm) k << v << ',';
    }
    k << '>' << inst.target;
    return k.str();
}

void write_split(std::ostream& out, const GenConfig& c, const TokenizationOptions& opt,
                 std::uint64_t seed, int n, std::set<std::string>* seen, bool reject_seen) {
    DatasetHeader h;
    h.D = c.D;
    h.M = c.M;
    h.vocab_size = c.vocab;
    h.structured = c.structured;
    h.seed = seed;
    h.options = opt;
    out << h.line() << '\n';
    int produced = 0;
    std::uint64_t draw = 0;
    while (produced < n) {
        Rng rng = Rng::stream(seed, draw++);
        PathStarGraph g = sample_graph(c.vocab, c.D, c.M, rng);
        TaskInstance inst = sample_target(g, rng);
        const std::string key = instance_key(inst);
        if (seen) {
            if (reject_seen && seen->count(key)) continue;
            seen->insert(key);
        }
        if (c.structured > 0) {
            for (const auto& s : structured_expand(inst, c.structured, opt, rng))
                out << detokenize(s) << '\n';
        } else {
            out << detokenize(tokenize(inst, opt, rng)) << '\n';
        }
        ++produced;
    }
}

int cmd_gen(const GenConfig& c) {
    check_dims(c.vocab, c.D, c.M);
    if (c.structured > 0 && c.structured > c.D - 1)
        throw std::invalid_argument("S must be <= D-1");
    const TokenizationOptions opt = options_of(c);
    std::set<std::string> seen;
    const bool split = !c.test_out.empty();
    {
        std::ofstream out(c.out);
        if (!out) throw std::runtime_error("cannot open " + c.out);
        write_split(out, c, opt, c.seed, c.n, split ? &seen : nullptr, false);
    }
    if (split) {
        std::ofstream out(c.test_out);
        if (!out) throw std::runtime_error("cannot open " + c.test_out);
        write_split(out, c, opt, c.seed + 1, c.test_n, &seen, true);
    }
    return 0;
}

struct Dataset {
    DatasetHeader header;
    std::vector<TokenizedSample> samples;
};

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset file");
    Dataset d;
    d.header = DatasetHeader::parse(line);
    const Vocabulary vocab{d.header.vocab_size};
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        d.samples.push_back(parse_sample(line, vocab));
    }
    return d;
}

void emit(std::ostream* file, const std::string& text) {
    std::cout << text;
    if (file) *file << text;
}

int cmd_solve(const std::string& path, const std::string& solver, bool strict,
              const std::string& report_path) {
    const auto kind = solver_from_name(solver);
    if (!kind) throw std::invalid_argument("unknown solver: " + solver);
    Dataset d = load_dataset(path);
    bool in_regime = true;
    if (auto warn = regime_mismatch(*kind, d.header.options)) {
        std::cerr << "warning: " << *warn << " (running anyway)\n";
        in_regime = false;
    }
    long long valid = 0;
    int kqv_min = 0, kqv_max = 0, loops = 0;
    bool first = true;
    for (const auto& s : d.samples) {
        SolverReport rep = run_solver(*kind, SolverInput::from_sample(s), s.instance);
        valid += rep.valid;
        if (first || rep.kqv_count < kqv_min) kqv_min = rep.kqv_count;
        if (first || rep.kqv_count > kqv_max) kqv_max = rep.kqv_count;
        loops = rep.loop_iterations;
        first = false;
    }
    const auto n = static_cast<long long>(d.samples.size());
    std::ofstream report;
    if (!report_path.empty()) {
        report.open(report_path);
        if (!report) throw std::runtime_error("cannot open " + report_path);
    }
    std::ostringstream out;
    out << "solver=" << solver << '\n'
        << "samples=" << n << '\n'
        << "valid=" << valid << '\n';
    out << "validity=" << std::fixed << std::setprecision(4)
        << (n ? static_cast<double>(valid) / static_cast<double>(n) : 0.0) << '\n';
    out << "kqv_min=" << kqv_min << '\n'
        << "kqv_max=" << kqv_max << '\n'
        << "loop_iterations=" << loops << '\n'
        << "in_regime=" << (in_regime ? 1 : 0) << '\n';
    emit(report_path.empty() ? nullptr : &report, out.str());
    if (strict && in_regime && valid != n) return 2;
    return 0;
}

int cmd_eval(const std::string& path, bool final_t, std::uint64_t seed,
             const std::string& report_path) {
    Dataset d = load_dataset(path);
    Rng rng(seed);
    PositionReport rep = teacher_forced_eval(chc_predictor(final_t), d.samples, rng);
    std::ofstream report;
    if (!report_path.empty()) {
        report.open(report_path);
        if (!report) throw std::runtime_error("cannot open " + report_path);
    }
    std::ostringstream out;
    out << "samples=" << rep.sample_count << '\n'
        << "positions=" << rep.position_accuracy.size() << '\n';
    out << std::fixed << std::setprecision(4);
    for (std::size_t p = 0; p < rep.position_accuracy.size(); ++p)
        out << "pos_" << p << "=" << rep.position_accuracy[p] << '\n';
    out << "sequence=" << rep.sequence_accuracy << '\n';
    emit(report_path.empty() ? nullptr : &report, out.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"path-star task toolkit"};
    app.require_subcommand(1);

    GenConfig gc;
    auto* gen = app.add_subcommand("gen", "generate a dataset file");
    gen->add_option("--D", gc.D, "arm count")->required();
    gen->add_option("--M", gc.M, "arm length including start")->required();
    gen->add_option("--vocab", gc.vocab, "node vocabulary size |V|");
    gen->add_option("--n", gc.n, "number of base instances")->required();
    gen->add_option("--perm", gc.perm, "edge | arm | none")
        ->check(CLI::IsMember({"edge", "arm", "none"}));
    gen->add_option("--q-pos", gc.qpos, "start | end")->check(CLI::IsMember({"start", "end"}));
    gen->add_option("--target", gc.target, "forward | reversed | leading")
        ->check(CLI::IsMember({"forward", "reversed", "leading"}));
    gen->add_option("--markers", gc.markers, "edge markers per edge (1 or 2)")
        ->check(CLI::Range(1, 2));
    gen->add_option("--structured", gc.structured, "extra same-graph targets per instance (S)");
    gen->add_option("--seed", gc.seed, "random seed");
    gen->add_option("--out", gc.out, "output file")->required();
    gen->add_option("--test-out", gc.test_out, "optional disjoint test split file");
    gen->add_option("--test-n", gc.test_n, "test split size");

    std::string in_path, solver, report_path;
    bool strict = false;
    auto* solve = app.add_subcommand("solve", "run a solver over a dataset");
    solve->add_option("--in", in_path, "dataset file")->required();
    solve->add_option("--solver", solver,
                      "back_target | backward_targets | forward_start | log_doubling | "
                      "arms_constant | causal")
        ->required();
    solve->add_flag("--strict", strict, "exit 2 unless validity is 100% in-regime");
    solve->add_option("--report", report_path, "also write the report to a file");

    std::string eval_in, eval_report;
    bool final_t = false;
    std::uint64_t eval_seed = 0;
    auto* eval = app.add_subcommand("eval", "teacher-forced baseline evaluation");
    eval->add_option("--in", eval_in, "dataset file")->required();
    eval->add_flag("--final-t", final_t, "let the baseline copy t at the last position");
    eval->add_option("--seed", eval_seed, "random seed for the leading-node guess");
    eval->add_option("--report", eval_report, "also write the report to a file");

    int cd = 2, cm = 2, cv = 6;
    auto* count = app.add_subcommand("count", "exact instance count Z");
    count->add_option("--D", cd, "arm count")->required();
    count->add_option("--M", cm, "arm length including start")->required();
    count->add_option("--vocab", cv, "node vocabulary size |V|")->required();

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return cmd_gen(gc);
        if (solve->parsed()) return cmd_solve(in_path, solver, strict, report_path);
        if (eval->parsed()) return cmd_eval(eval_in, final_t, eval_seed, eval_report);
        if (count->parsed()) {
            std::cout << count_instances(cv, cd, cm) << '\n';
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 1 : 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
