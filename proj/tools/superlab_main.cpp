#include "superlab/dynamics.hpp"
#include "superlab/protocol.hpp"
#include "superlab/rng.hpp"
#include "superlab/statespace.hpp"
#include "superlab/theorems.hpp"
#include "superlab/unitary.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace {

using namespace superlab;

// Locale-free shortest round-trip formatting; CSV output must be
// byte-identical across runs and environments.
std::string fmt(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

struct Sink {
    std::ofstream file;

    bool open(const std::string& path) {
        if (path.empty()) return true;
        file.open(path, std::ios::binary | std::ios::trunc);
        return file.good();
    }
    std::ostream& stream() { return file.is_open() ? file : std::cout; }
    bool finish() {
        if (file.is_open()) {
            file.flush();
            return file.good();
        }
        std::cout.flush();
        return true;
    }
};

int emit(Sink& sink) {
    if (!sink.finish()) {
        std::cerr << "superlab: write failure\n";
        return 1;
    }
    return 0;
}

struct ProtocolArgs {
    std::string model = "rsi";
    int trials = 100;
    std::uint64_t seed = 0;
    double phase_actual = 0.0;
    double phase_assumed = 0.0;
    bool degrees = false;
    std::string out;
    std::string format = "csv";
};

int run_protocol(const ProtocolArgs& args) {
    const double scale = args.degrees ? std::numbers::pi / 180.0 : 1.0;
    ExperimentConfig cfg;
    cfg.phase_actual = args.phase_actual * scale;
    cfg.phase_assumed = args.phase_assumed * scale;
    cfg.trials = args.trials;
    cfg.seed = args.seed;
    cfg.model.rng_seed = args.seed;
    if (args.model == "collapse") {
        cfg.model.kind = ModelKind::ObjectiveCollapse;
        cfg.model.collapse_registers = {"spin"};
    }

    const std::vector<TrialRecord> records = run_trials(cfg);
    const EvidenceLedger ledger = accumulate_evidence(records);

    Sink sink;
    if (!sink.open(args.out)) {
        std::cerr << "superlab: cannot open output file '" << args.out << "'\n";
        return 1;
    }
    std::ostream& os = sink.stream();
    if (args.format == "csv") {
        os << "# schema: superlab.protocol.v1\n";
        os << "index,outcome,p_rsi,p_collapse\n";
        for (const TrialRecord& r : records) {
            os << r.index << ',' << (r.outcome == Outcome::Yes ? "Yes" : "No")
               << ',' << fmt(r.outcome_probability_rsi) << ','
               << fmt(r.outcome_probability_collapse) << '\n';
        }
        os << "# yes_count," << ledger.yes_count << '\n';
        os << "# no_count," << ledger.no_count << '\n';
        if (ledger.rsi_rejected) {
            os << "# rsi_rejected,true\n";
        } else {
            os << "# log_bayes_factor," << fmt(ledger.log_bayes_factor) << '\n';
        }
    } else {
        os << "protocol: model=" << args.model << " trials=" << args.trials
           << " seed=" << args.seed << '\n';
        os << "  phase actual=" << fmt(cfg.phase_actual)
           << " assumed=" << fmt(cfg.phase_assumed) << '\n';
        os << "  outcomes: yes=" << ledger.yes_count
           << " no=" << ledger.no_count << '\n';
        if (ledger.rsi_rejected) {
            os << "  verdict: unitary-only dynamics at the assumed phase is "
                  "rejected (zero-probability outcome observed)\n";
        } else {
            os << "  log Bayes factor (unitary-only over collapse) = "
               << fmt(ledger.log_bayes_factor) << '\n';
        }
    }
    return emit(sink);
}

struct CheckRow {
    std::string check;
    std::string statistic;
    double value = 0.0;
    bool pass = false;
};

struct TheoremArgs {
    int dim = 8;
    int instances = 200;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "text";
};

int pick_dim(int max_dim, Rng& rng) {
    if (max_dim <= 2) return 2;
    return 2 + static_cast<int>(rng.raw() % static_cast<std::uint64_t>(max_dim - 1));
}

int run_theorems(const TheoremArgs& args) {
    std::vector<CheckRow> rows;

    {
        // Overlap invariance under unitaries: orthogonal, identical, and
        // generic pairs, pushed through Haar and generator unitaries.
        Rng rng = Rng::for_stream(args.seed, 1);
        const RegisterLayout layout = RegisterLayout::single(args.dim);
        const UnitaryOperator source = haar_random(args.dim, rng.raw());
        std::vector<std::pair<StateVector, StateVector>> pairs;
        for (int k = 0; k + 1 < std::min(args.dim, 6); ++k) {
            pairs.emplace_back(StateVector(layout, source.entries().col(k)),
                               StateVector(layout, source.entries().col(k + 1)));
        }
        pairs.emplace_back(StateVector(layout, source.entries().col(0)),
                           StateVector(layout, source.entries().col(0)));
        for (int k = 0; k < 15; ++k) {
            Vector a(args.dim);
            Vector b(args.dim);
            for (int i = 0; i < args.dim; ++i) {
                a(i) = rng.complex_gaussian();
                b(i) = rng.complex_gaussian();
            }
            pairs.emplace_back(StateVector(layout, a / a.norm()),
                               StateVector(layout, b / b.norm()));
        }
        std::vector<UnitaryOperator> unitaries;
        for (int k = 0; k < 25; ++k) {
            unitaries.push_back(haar_random(args.dim, rng.raw()));
        }
        for (int k = 0; k < 5; ++k) {
            std::vector<double> params(
                static_cast<std::size_t>(generator_param_count(args.dim)));
            for (double& p : params) p = rng.gaussian();
            unitaries.push_back(from_generator(params));
        }
        const Lemma1Report rep = check_lemma1(pairs, unitaries);
        rows.push_back({"overlap_invariance", "max_deviation", rep.max_deviation,
                        rep.pass});
    }

    {
        // Branch linearity and per-branch mass inequality over random
        // structured instances.
        double max_flat = 0.0;
        double max_grouped = 0.0;
        bool flat_ok = true;
        bool grouped_ok = true;
        for (int i = 0; i < args.instances; ++i) {
            Rng rng = Rng::for_stream(args.seed, 1000 + static_cast<std::uint64_t>(i));
            const int d = pick_dim(args.dim, rng);
            const TheoremInstance inst = random_structured_instance(d, rng);
            const TestDecomposition dec =
                decompose(inst.U, inst.branches, inst.alpha, inst.partition);
            const LinearityReport lin = check_linearity_relation(dec);
            max_flat = std::max(max_flat, lin.flat_residual);
            max_grouped = std::max(max_grouped, lin.grouped_residual);
            flat_ok = flat_ok && lin.flat_ok;
            grouped_ok = grouped_ok && lin.grouped_ok && lin.mass_inequality_ok;
        }
        rows.push_back({"linearity_flat", "max_residual", max_flat, flat_ok});
        rows.push_back({"linearity_grouped", "max_residual", max_grouped, grouped_ok});
    }

    {
        // Phase-averaged preparation vs stochastic mixture through random
        // measure-after-unitary protocols.
        double max_disc = 0.0;
        bool ok = true;
        const int mixture_instances = std::max(20, args.instances / 4);
        for (int i = 0; i < mixture_instances; ++i) {
            Rng rng = Rng::for_stream(args.seed, 500000 + static_cast<std::uint64_t>(i));
            const int d = pick_dim(args.dim, rng);
            const int max_branches = std::min(d, 4);
            const int B =
                (max_branches == 2)
                    ? 2
                    : 2 + static_cast<int>(
                              rng.raw() % static_cast<std::uint64_t>(max_branches - 1));
            const Eigen::VectorXcd alpha = random_alpha(B, rng);
            const std::vector<Complex> weights(alpha.data(), alpha.data() + B);
            const UnitaryOperator source = haar_random(d, rng.raw());
            const RegisterLayout layout = RegisterLayout::single(d);
            std::vector<StateVector> branches;
            for (int k = 0; k < B; ++k) {
                branches.emplace_back(layout, source.entries().col(k));
            }
            std::vector<UnitaryOperator> protocol;
            if (i % 5 != 0) {
                for (int k = 0; k < 3; ++k) {
                    protocol.push_back(haar_random(d, rng.raw()));
                }
            }
            const int K = 2 + i % 3;
            const MixtureReport rep = mixture_indistinguishability(
                weights, branches, protocol, "sys", K);
            max_disc = std::max(max_disc, rep.max_discrepancy);
            ok = ok && rep.pass;
        }
        rows.push_back({"mixture_equivalence", "max_discrepancy", max_disc, ok});
    }

    bool all_pass = true;
    for (const CheckRow& row : rows) all_pass = all_pass && row.pass;

    Sink sink;
    if (!sink.open(args.out)) {
        std::cerr << "superlab: cannot open output file '" << args.out << "'\n";
        return 1;
    }
    std::ostream& os = sink.stream();
    if (args.format == "csv") {
        os << "# schema: superlab.theorems.v1\n";
        os << "check,statistic,value,pass\n";
        for (const CheckRow& row : rows) {
            os << row.check << ',' << row.statistic << ',' << fmt(row.value)
               << ',' << (row.pass ? "true" : "false") << '\n';
        }
        os << "# all_pass," << (all_pass ? "true" : "false") << '\n';
    } else {
        os << "theorem checks: dim<=" << args.dim
           << " instances=" << args.instances << " seed=" << args.seed << '\n';
        for (const CheckRow& row : rows) {
            os << "  " << row.check << ": " << row.statistic << '='
               << fmt(row.value) << (row.pass ? "  [pass]" : "  [FAIL]") << '\n';
        }
        os << (all_pass ? "all checks passed\n" : "CHECK FAILURE\n");
    }
    const int io = emit(sink);
    if (io != 0) return io;
    return all_pass ? 0 : 1;
}

struct SearchArgs {
    std::string kind = "branch-discriminating";
    int dim = 8;
    int restarts = 100;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "text";
};

int run_search(const SearchArgs& args) {
    TestKind kind = TestKind::BranchDiscriminating;
    if (args.kind == "definitive") kind = TestKind::Definitive;
    if (args.kind == "partially-definitive") kind = TestKind::PartiallyDefinitive;

    const SearchReport rep = violation_search(kind, args.dim, args.restarts, args.seed);

    Sink sink;
    if (!sink.open(args.out)) {
        std::cerr << "superlab: cannot open output file '" << args.out << "'\n";
        return 1;
    }
    std::ostream& os = sink.stream();
    if (args.format == "csv") {
        // elapsed time is deliberately absent: CSV output is byte-stable.
        os << "# schema: superlab.search.v1\n";
        os << "restart,feasible,score\n";
        for (int r = 0; r < rep.restarts; ++r) {
            const double score = rep.restart_scores[static_cast<std::size_t>(r)];
            const bool feasible = !std::isnan(score);
            os << r << ',' << (feasible ? "true" : "false") << ',' << fmt(score)
               << '\n';
        }
        os << "# kind," << args.kind << '\n';
        os << "# dim," << rep.dim << '\n';
        os << "# feasible_count," << rep.feasible_count << '\n';
        os << "# infeasible_count," << rep.infeasible_count << '\n';
        os << "# best_feasible_score,"
           << (rep.best_feasible_score ? fmt(*rep.best_feasible_score) : "none")
           << '\n';
        os << "# best_penalized_score," << fmt(rep.best_penalized_score) << '\n';
        os << "# theorem_holds," << (rep.theorem_holds() ? "true" : "false")
           << '\n';
    } else {
        os << "violation search: kind=" << args.kind << " dim=" << rep.dim
           << " restarts=" << rep.restarts << " seed=" << args.seed << '\n';
        os << "  feasible=" << rep.feasible_count
           << " infeasible=" << rep.infeasible_count << '\n';
        if (rep.best_feasible_score) {
            os << "  best feasible score = " << fmt(*rep.best_feasible_score)
               << '\n';
        } else {
            os << "  no feasible candidate (constraint set unreachable at this "
                  "dimension/kind)\n";
        }
        os << "  best penalized score = " << fmt(rep.best_penalized_score) << '\n';
        os << "  elapsed = " << fmt(rep.elapsed_seconds) << "s\n";
        os << (rep.theorem_holds()
                   ? "  verdict: no violation found\n"
                   : "  verdict: VIOLATION CANDIDATE FOUND (investigate)\n");
    }
    const int io = emit(sink);
    if (io != 0) return io;
    return rep.theorem_holds() ? 0 : 1;
}

struct MixtureArgs {
    int dim = 8;
    int instances = 100;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "text";
};

int run_mixture(const MixtureArgs& args) {
    struct Row {
        int instance;
        int K;
        double discrepancy;
        bool pass;
    };
    std::vector<Row> rows;
    bool all = true;
    double worst = 0.0;
    for (int i = 0; i < args.instances; ++i) {
        Rng rng = Rng::for_stream(args.seed, static_cast<std::uint64_t>(i));
        const int d = pick_dim(args.dim, rng);
        const int max_branches = std::min(d, 4);
        const int B = (max_branches == 2)
                          ? 2
                          : 2 + static_cast<int>(rng.raw() %
                                                 static_cast<std::uint64_t>(
                                                     max_branches - 1));
        const Eigen::VectorXcd alpha = random_alpha(B, rng);
        const std::vector<Complex> weights(alpha.data(), alpha.data() + B);
        const UnitaryOperator source = haar_random(d, rng.raw());
        const RegisterLayout layout = RegisterLayout::single(d);
        std::vector<StateVector> branches;
        for (int k = 0; k < B; ++k) {
            branches.emplace_back(layout, source.entries().col(k));
        }
        std::vector<UnitaryOperator> protocol;
        if (i % 5 != 0) {
            for (int k = 0; k < 3; ++k) {
                protocol.push_back(haar_random(d, rng.raw()));
            }
        }
        const int K = 2 + i % 3;
        const MixtureReport rep =
            mixture_indistinguishability(weights, branches, protocol, "sys", K);
        rows.push_back({i, K, rep.max_discrepancy, rep.pass});
        worst = std::max(worst, rep.max_discrepancy);
        all = all && rep.pass;
    }

    Sink sink;
    if (!sink.open(args.out)) {
        std::cerr << "superlab: cannot open output file '" << args.out << "'\n";
        return 1;
    }
    std::ostream& os = sink.stream();
    if (args.format == "csv") {
        os << "# schema: superlab.mixture.v1\n";
        os << "instance,K,max_discrepancy,pass\n";
        for (const Row& row : rows) {
            os << row.instance << ',' << row.K << ',' << fmt(row.discrepancy)
               << ',' << (row.pass ? "true" : "false") << '\n';
        }
        os << "# worst_discrepancy," << fmt(worst) << '\n';
        os << "# all_pass," << (all ? "true" : "false") << '\n';
    } else {
        os << "mixture equivalence: dim<=" << args.dim
           << " instances=" << args.instances << " seed=" << args.seed << '\n';
        os << "  worst discrepancy = " << fmt(worst) << '\n';
        os << (all ? "  all instances agree\n" : "  DISAGREEMENT FOUND\n");
    }
    const int io = emit(sink);
    if (io != 0) return io;
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"state-vector laboratory for superposition test protocols"};
    app.require_subcommand(1);

    ProtocolArgs pa;
    CLI::App* protocol =
        app.add_subcommand("protocol", "Run repeated trials under a dynamics model");
    protocol->add_option("--model", pa.model, "Dynamics model")
        ->check(CLI::IsMember({"rsi", "collapse"}));
    protocol->add_option("--trials", pa.trials, "Number of trials")
        ->check(CLI::Range(1, 10000000));
    protocol->add_option("--seed", pa.seed, "RNG seed");
    protocol->add_option("--phase-actual", pa.phase_actual,
                         "Preparation phase (radians unless --degrees)");
    protocol->add_option("--phase-assumed", pa.phase_assumed,
                         "Phase the machine transform assumes");
    protocol->add_flag("--degrees", pa.degrees, "Interpret phases in degrees");
    protocol->add_option("--out", pa.out, "Output file (default stdout)");
    protocol->add_option("--format", pa.format, "Output format")
        ->check(CLI::IsMember({"text", "csv"}));

    TheoremArgs ta;
    CLI::App* theorems =
        app.add_subcommand("theorems", "Run the impossibility-theorem check suite");
    theorems->add_option("--dim", ta.dim, "Maximum state dimension")
        ->check(CLI::Range(2, 64));
    theorems->add_option("--instances", ta.instances, "Random instances per check")
        ->check(CLI::Range(1, 10000000));
    theorems->add_option("--seed", ta.seed, "RNG seed");
    theorems->add_option("--out", ta.out, "Output file (default stdout)");
    theorems->add_option("--format", ta.format, "Output format")
        ->check(CLI::IsMember({"text", "csv"}));

    SearchArgs sa;
    CLI::App* search =
        app.add_subcommand("search", "Search for violations of the impossibility theorems");
    search->add_option("--kind", sa.kind, "Test kind to attack")
        ->check(CLI::IsMember(
            {"definitive", "partially-definitive", "branch-discriminating"}));
    search->add_option("--dim", sa.dim, "State dimension")
        ->check(CLI::Range(2, 64));
    search->add_option("--restarts", sa.restarts, "Random restarts")
        ->check(CLI::Range(1, 100000));
    search->add_option("--seed", sa.seed, "RNG seed");
    search->add_option("--out", sa.out, "Output file (default stdout)");
    search->add_option("--format", sa.format, "Output format")
        ->check(CLI::IsMember({"text", "csv"}));

    MixtureArgs ma;
    CLI::App* mixture = app.add_subcommand(
        "mixture", "Compare phase-averaged preparations against stochastic mixtures");
    mixture->add_option("--dim", ma.dim, "Maximum state dimension")
        ->check(CLI::Range(2, 64));
    mixture->add_option("--instances", ma.instances, "Random instances")
        ->check(CLI::Range(1, 10000000));
    mixture->add_option("--seed", ma.seed, "RNG seed");
    mixture->add_option("--out", ma.out, "Output file (default stdout)");
    mixture->add_option("--format", ma.format, "Output format")
        ->check(CLI::IsMember({"text", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (protocol->parsed()) return run_protocol(pa);
        if (theorems->parsed()) return run_theorems(ta);
        if (search->parsed()) return run_search(sa);
        if (mixture->parsed()) return run_mixture(ma);
    } catch (const std::exception& e) {
        std::cerr << "superlab: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
