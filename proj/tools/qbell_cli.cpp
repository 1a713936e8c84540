// Command-line front end; everything goes through the C API.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"
#include "qbell/qbell.h"

namespace {

struct Flags {
    int d = 2, n = 1, trials = 1, r = 3, t = 0, doping = -1, k = 4, grid = 100, threads = 0;
    std::uint64_t seed = 1;
    double eps = 0.1, eps1 = 0.0, eps2 = 0.5, delta = 0.1;
    std::string mode = "shared", out, state, group, source, backend = "povm";
    bool transcript = false, qubit_template = false, allow_out_of_range = false, large_table = false,
         separate_columns = false;
};

void add_common(CLI::App* app, Flags& f) {
    app->add_option("--d", f.d, "local dimension")->check(CLI::Range(2, 64));
    app->add_option("--n", f.n, "number of qudits")->check(CLI::Range(1, 16));
    app->add_option("--seed", f.seed, "RNG seed");
    app->add_option("--trials", f.trials, "independent trials")->check(CLI::PositiveNumber);
    app->add_option("--eps", f.eps, "distance parameter");
    app->add_option("--eps1", f.eps1, "tolerant: completeness distance");
    app->add_option("--eps2", f.eps2, "tolerant: soundness distance");
    app->add_option("--delta", f.delta, "failure probability");
    app->add_option("--r", f.r, "POVM copies");
    app->add_option("--t", f.t, "size test exponent / fixture stabiliser qudits");
    app->add_option("--doping", f.doping, "non-Clifford gates in doped inputs");
    app->add_option("--mode", f.mode, "baseline mode")->check(CLI::IsMember({"shared", "fresh"}));
    app->add_option("--k", f.k, "copies per round")->check(CLI::IsMember({1, 2, 4}));
    app->add_option("--out", f.out, "report path (fig: output base name)");
    app->add_option("--state", f.state, "input state JSON");
    app->add_option("--group", f.group, "input stabiliser group JSON");
    app->add_option("--source", f.source, "stabiliser|haar|doped|magic|size-fixture|near|far");
    app->add_option("--grid", f.grid, "figure grid resolution")->check(CLI::Range(1, 500));
    app->add_option("--threads", f.threads, "worker threads (0 = hardware)");
    app->add_flag("--transcript", f.transcript, "embed sample transcripts");
    app->add_flag("--template", f.qubit_template, "use the d=2 template R matrix");
    app->add_flag("--allow-out-of-range", f.allow_out_of_range, "run the size test beyond its proven range");
    app->add_flag("--large-table", f.large_table, "lift the b-table size limit");
    app->add_flag("--separate-columns", f.separate_columns, "hidden-group: per-column spans");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qudit Bell sampling experiments"};
    app.set_version_flag("--version", std::string(qbell_version()));
    app.require_subcommand(1);
    Flags f;
    std::string oracle_kind, fig_kind;

    const std::pair<const char*, const char*> plain[] = {
        {"learn", "learn a stabiliser state from Bell difference samples"},
        {"hidden-group", "recover the unsigned stabiliser group of a near-stabiliser state"},
        {"size-test", "decide whether the stabiliser group has at least d^t elements"},
        {"doped-test", "tell t-doped Clifford states from Haar-random states"},
        {"selftest", "run quick internal consistency checks"}};
    for (auto [name, desc] : plain) add_common(app.add_subcommand(name, desc), f);
    const std::pair<const char*, const char*> testers[] = {
        {"stab-test", "property test for stabiliser states"},
        {"tolerant", "tolerant stabiliser test with completeness eps1 and soundness eps2"}};
    for (auto [name, desc] : testers) {
        CLI::App* sc = app.add_subcommand(name, desc);
        add_common(sc, f);
        sc->add_option("--backend", f.backend, "povm|bell")->check(CLI::IsMember({"povm", "bell"}));
    }
    CLI::App* oracle = app.add_subcommand("oracle", "exact characteristic, p or b tables");
    add_common(oracle, f);
    oracle->add_option("kind", oracle_kind, "pdist|bdist|char")->required()->check(CLI::IsMember({"pdist", "bdist", "char"}));
    CLI::App* fig = app.add_subcommand("fig", "range comparison figure (csv + svg)");
    add_common(fig, f);
    fig->add_option("kind", fig_kind, "range")->required()->check(CLI::IsMember({"range"}));

    CLI11_PARSE(app, argc, argv);
    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();

    // Input files carry their own dimensions; use them unless --d/--n were given.
    const std::string& input = !f.group.empty() ? f.group : f.state;
    if (!input.empty() && (sub->count("--d") == 0 || sub->count("--n") == 0)) {
        std::ifstream in(input);
        const nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_object() && j.contains("d") && j.contains("n") && j["d"].is_number_integer() && j["n"].is_number_integer()) {
            if (sub->count("--d") == 0) f.d = j["d"].get<int>();
            if (sub->count("--n") == 0) f.n = j["n"].get<int>();
        }
    }

    nlohmann::json cfg = {{"command", command},
                          {"sub", command == "oracle" ? oracle_kind : command == "fig" ? fig_kind : ""},
                          {"backend", f.backend}, {"source", f.source}, {"state", f.state}, {"group", f.group},
                          {"out", f.out}, {"d", f.d}, {"n", f.n}, {"seed", f.seed}, {"trials", f.trials},
                          {"eps", f.eps}, {"eps1", f.eps1}, {"eps2", f.eps2}, {"delta", f.delta}, {"r", f.r},
                          {"t", f.t}, {"doping", f.doping}, {"mode", f.mode}, {"k", f.k}, {"grid", f.grid},
                          {"transcript", f.transcript}, {"template", f.qubit_template},
                          {"allow_out_of_range", f.allow_out_of_range}, {"large_table", f.large_table},
                          {"separate_columns", f.separate_columns}, {"threads", f.threads}};

    char* report = nullptr;
    const qbell_status st = qbell_run(cfg.dump().c_str(), &report);
    if (st != QBELL_OK) {
        std::cerr << "qbell: " << qbell_last_error() << '\n';
        return st <= QBELL_ERR_CAP ? static_cast<int>(st) : 1;
    }
    const std::string text(report);
    qbell_string_free(report);

    if (command == "fig" || f.out.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
    } else {
        std::ofstream os(f.out, std::ios::binary);
        os << text;
        if (!os) {
            std::cerr << "qbell: cannot write " << f.out << '\n';
            return 1;
        }
    }
    if (command == "selftest") {
        for (const auto& c : nlohmann::json::parse(text)["checks"])
            if (!c["pass"].get<bool>()) return 1;
    }
    return 0;
}
