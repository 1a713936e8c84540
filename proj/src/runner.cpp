#include "qbell/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "qbell/algorithms.hpp"
#include "qbell/errors.hpp"
#include "qbell/fixtures.hpp"

namespace qbell {

namespace {

using json = nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::Io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::Io, "cannot write '" + path + "'");
    out << text;
    require(static_cast<bool>(out), ErrorCode::Io, "short write to '" + path + "'");
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::Parse, what + ": " + e.what());
    }
}

struct Wilson {
    double lo, hi;
};

Wilson wilson95(std::uint64_t hits, std::uint64_t total) {
    if (total == 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    const double nn = static_cast<double>(total);
    const double p = static_cast<double>(hits) / nn;
    const double den = 1.0 + z * z / nn;
    const double centre = (p + z * z / (2 * nn)) / den;
    const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / den;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

json rate_json(std::uint64_t hits, std::uint64_t total) {
    const Wilson w = wilson95(hits, total);
    return {{"count", hits}, {"total", total},
            {"rate", total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0},
            {"ci95", {w.lo, w.hi}}};
}

// Runs body(i) for every trial on a small pool; results keep trial order.
std::vector<json> fan_out(int trials, int threads, const std::function<json(int)>& body) {
    std::vector<json> out(static_cast<std::size_t>(trials));
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(trials));
    std::atomic<int> next{0};
    const int workers = std::max(1, std::min(trials, threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency())));
    auto work = [&] {
        for (int i = next++; i < trials; i = next++) {
            try {
                out[static_cast<std::size_t>(i)] = body(i);
            } catch (...) {
                errs[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (const auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

int default_doping(int n) { return (n - 1) / 2; }

std::string default_source(const std::string& command) {
    if (command == "size-test") return "size-fixture";
    if (command == "doped-test") return "doped";
    if (command == "tolerant") return "near";
    if (command == "oracle") return "haar";
    return "stabiliser";
}

struct Prepared {
    DenseState psi;
    json info = json::object();
    std::optional<StabiliserGroup> group;
};

class StateSource {
public:
    StateSource(const ExperimentConfig& cfg, const PhaseContext& ctx) : cfg_(cfg), ctx_(ctx) {
        kind_ = cfg.source.empty() ? default_source(cfg.command) : cfg.source;
        if (!cfg.state_path.empty()) kind_ = "file";
        if (!cfg.group_path.empty()) kind_ = "group-file";
        if (kind_ == "file") {
            fixed_ = state_from_json(parse_json(read_file(cfg.state_path), cfg.state_path));
            require(fixed_->d() == ctx.d() && fixed_->num_qudits() == ctx.n(), ErrorCode::ContextMismatch,
                    "state file holds d = " + std::to_string(fixed_->d()) + ", n = " + std::to_string(fixed_->num_qudits()));
            fixed_ = DenseState(fixed_->d(), {fixed_->num_qudits()}, fixed_->amplitudes());
        } else if (kind_ == "group-file") {
            group_.emplace(StabiliserGroup::from_json(parse_json(read_file(cfg.group_path), cfg.group_path)));
            require(group_->ctx() == ctx, ErrorCode::ContextMismatch, "group file context differs from --d/--n");
            fixed_ = stabiliser_state(*group_);
        } else if (kind_ == "near" || kind_ == "far") {
            const double target = kind_ == "near" ? 1.0 - cfg.eps1 : 1.0 - cfg.eps2;
            const FidelityFixture fx = fidelity_fixture(far_state(ctx, cfg.seed), target);
            fixed_ = fx.state;
            fixed_info_ = {{"fixture_fidelity", fx.fidelity}, {"target", target}};
        } else if (kind_ == "magic") {
            fixed_ = magic_product(ctx);
        } else {
            require(kind_ == "stabiliser" || kind_ == "haar" || kind_ == "doped" || kind_ == "size-fixture",
                    ErrorCode::InvalidArgument, "unknown source '" + kind_ + "'");
        }
    }

    const std::string& kind() const { return kind_; }

    Prepared make(Rng rng) const {
        Prepared p;
        if (fixed_) {
            p.psi = *fixed_;
            p.info = fixed_info_;
            p.group = group_;
            return p;
        }
        if (kind_ == "stabiliser") {
            p.group.emplace(random_stabiliser_group(ctx_, rng));
            p.psi = stabiliser_state(*p.group);
            p.info = {{"group", p.group->to_json()}};
        } else if (kind_ == "haar") {
            p.psi = haar_random(ctx_, rng);
        } else if (kind_ == "doped") {
            const int t = cfg_.doping >= 0 ? cfg_.doping : default_doping(ctx_.n());
            auto [circuit, state] = doped_clifford(ctx_, t, rng);
            p.psi = std::move(state);
            p.info = {{"doping", t}, {"gates", circuit.gates.size()}};
        } else {
            p.psi = size_fixture(ctx_, cfg_.t, rng);
            p.info = {{"t", cfg_.t}};
        }
        return p;
    }

private:
    const ExperimentConfig& cfg_;
    PhaseContext ctx_;
    std::string kind_;
    std::optional<DenseState> fixed_;
    json fixed_info_ = json::object();
    std::optional<StabiliserGroup> group_;
};

SamplingOptions sampling_options(const ExperimentConfig& cfg) {
    SamplingOptions o;
    o.mode = parse_mode(cfg.mode);
    o.k = cfg.k;
    o.qubit_template = cfg.qubit_template;
    o.transcript = cfg.transcript;
    return o;
}

double prime_power_sum(const PhaseContext& ctx, double base_num, int n) {
    double s = 0.0;
    for (const PrimePower& f : ctx.factors()) s += std::pow(base_num / f.p, n);
    return s;
}

// Expected verdict when the promise can be decided exactly; null otherwise.
json expected_for(const ExperimentConfig& cfg, const std::string& kind, const Prepared& prep, const PhaseContext& ctx) {
    if (cfg.command == "doped-test") {
        if (kind == "doped" || kind == "stabiliser") return "accept";
        if (kind == "haar") return "reject";
        return nullptr;
    }
    if (cfg.command == "size-test") {
        if (kind == "size-fixture" || kind == "stabiliser") return "accept";
        return stabiliser_size(prep.psi) >= static_cast<std::uint64_t>(std::pow(ctx.d(), cfg.t)) ? json("accept") : json(nullptr);
    }
    if (cfg.command == "stab-test" || cfg.command == "tolerant") {
        if (kind == "stabiliser") return "accept";
        if (ctx.n() > 2 || ctx.d() > 6 || (ctx.n() == 2 && ctx.d() > 4)) return nullptr;
        const double F = stabiliser_fidelity(prep.psi).value;
        if (cfg.command == "stab-test") {
            if (F > 1.0 - 1e-9) return "accept";
            return F <= 1.0 - cfg.eps + 1e-9 ? json("reject") : json(nullptr);
        }
        if (F >= 1.0 - cfg.eps1 - 1e-6) return "accept";
        if (F <= 1.0 - cfg.eps2 + 1e-6) return "reject";
        return nullptr;
    }
    return nullptr;
}

json run_trials(const ExperimentConfig& cfg, const PhaseContext& ctx) {
    const SamplingOptions opt = sampling_options(cfg);
    require(cfg.trials >= 1, ErrorCode::InvalidArgument, "trials must be at least 1");
    if (cfg.command == "stab-test" || cfg.command == "tolerant")
        require(cfg.backend == "povm" || cfg.backend == "bell", ErrorCode::InvalidArgument,
                "backend must be povm or bell");

    // Fail fast on parameter errors before any trial runs.
    if (cfg.command == "hidden-group") (void)hidden_group_rounds(ctx, cfg.eps, cfg.delta);
    if (cfg.command == "size-test") {
        (void)size_test_rounds(ctx, cfg.eps, cfg.delta);
        require(cfg.allow_out_of_range || cfg.eps <= size_test_eps_bound(ctx), ErrorCode::ParamOutOfRange,
                "eps exceeds the size-test bound " + std::to_string(size_test_eps_bound(ctx)));
    }
    if (cfg.command == "tolerant") {
        if (cfg.backend == "povm") (void)tolerant_povm_rounds(gamma_r(ctx.d(), cfg.r, cfg.eps1, cfg.eps2), cfg.delta);
        else (void)tolerant_bell_rounds(alpha_bell(ctx.d(), cfg.eps1, cfg.eps2), cfg.delta);
    }

    const StateSource source(cfg, ctx);
    const Rng root(cfg.seed);
    std::vector<json> rows = fan_out(cfg.trials, cfg.threads, [&](int i) -> json {
        const Rng trial = root.split(static_cast<std::uint64_t>(i));
        const Prepared prep = source.make(trial.split(1));
        Rng rng = trial.split(2);
        json row = {{"trial", i}};
        if (!prep.info.empty()) row["input"] = prep.info;

        if (cfg.command == "learn") {
            const LearnResult res = learn_stabiliser(prep.psi, opt, rng);
            const bool ok = res.group && fidelity(stabiliser_state(*res.group), prep.psi) > 1.0 - 1e-9;
            row["result"] = res.to_json();
            row["correct"] = ok;
        } else if (cfg.command == "hidden-group") {
            const HiddenGroupResult res = hidden_group(prep.psi, cfg.eps, cfg.delta, opt, rng, cfg.separate_columns);
            row["result"] = res.to_json();
            row["correct"] = res.module == unsigned_group(prep.psi).module;
        } else {
            TesterVerdict v;
            if (cfg.command == "size-test") v = test_size(prep.psi, cfg.t, cfg.eps, cfg.delta, opt, rng, cfg.allow_out_of_range);
            else if (cfg.command == "doped-test") v = doped_vs_haar(prep.psi, opt, rng);
            else if (cfg.command == "stab-test")
                v = cfg.backend == "povm" ? stab_test_povm(prep.psi, cfg.eps, cfg.delta, cfg.r, rng, cfg.transcript)
                                          : stab_test_bell(prep.psi, cfg.eps, cfg.delta, opt, rng);
            else
                v = cfg.backend == "povm" ? tolerant_povm(prep.psi, cfg.eps1, cfg.eps2, cfg.delta, cfg.r, rng, cfg.transcript)
                                          : tolerant_bell(prep.psi, cfg.eps1, cfg.eps2, cfg.delta, opt, rng);
            row["verdict"] = v.to_json();
            const json expected = expected_for(cfg, source.kind(), prep, ctx);
            row["expected"] = expected;
            row["correct"] = expected.is_null() ? json(nullptr) : json((v.accept ? "accept" : "reject") == expected.get<std::string>());
        }
        return row;
    });

    std::uint64_t accepts = 0, decided = 0, correct = 0;
    for (const json& row : rows) {
        if (row.contains("verdict") && row["verdict"]["decision"] == "accept") ++accepts;
        if (!row["correct"].is_null()) {
            ++decided;
            if (row["correct"].get<bool>()) ++correct;
        }
    }
    json agg = {{"source", source.kind()}, {"correct", rate_json(correct, decided)}};
    if (cfg.command != "learn" && cfg.command != "hidden-group") agg["accept"] = rate_json(accepts, rows.size());
    if (cfg.command == "learn") agg["failure_bound"] = prime_power_sum(ctx, 1.0, ctx.n());
    if (cfg.command == "doped-test" && source.kind() == "haar") agg["failure_bound"] = 2.0 * prime_power_sum(ctx, 1.5, ctx.n());
    if (cfg.command == "hidden-group" || cfg.command == "stab-test" || cfg.command == "tolerant" || cfg.command == "size-test")
        agg["target_success"] = 1.0 - cfg.delta;
    return {{"trials", rows}, {"aggregate", agg}};
}

json run_oracle(const ExperimentConfig& cfg, const PhaseContext& ctx) {
    const StateSource source(cfg, ctx);
    const Prepared prep = source.make(Rng(cfg.seed).split(1));
    PhaseTable table;
    if (cfg.sub == "pdist") table = p_table(ctx, prep.psi);
    else if (cfg.sub == "char") table = characteristic_table(ctx, prep.psi);
    else if (cfg.sub == "bdist") table = b_exact(prep.psi, build_R(ctx, 4, cfg.qubit_template), cfg.large_table);
    else fail(ErrorCode::InvalidArgument, "oracle kind must be pdist, bdist or char");
    json out = {{"table", table.to_json()}, {"sum", table.sum().real()}};
    if (!prep.info.empty()) out["input"] = prep.info;
    return out;
}

// ---------------------------------------------------------------- figure

std::string fmt(double x) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << x;
    return os.str();
}

std::string range_svg(const RangeTable& t) {
    const double W = 360, H = 360, pad = 50, gap = 80;
    const double left2 = pad + W + gap;
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(left2 + W + pad) << "\" height=\"" << fmt(H + 2 * pad)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    auto xpos = [&](double e1, double x0) { return x0 + e1 * W; };
    auto ypos = [&](double e2) { return pad + (1.0 - e2) * H; };

    // Each region is an upper set in eps2, so one bar per eps1 column covers it.
    const double cell = W / t.grid;
    for (int pass = 0; pass < 2; ++pass) {
        const char* colour = pass == 0 ? "#4c72b0" : "#dd8452";
        for (int i = 0; i <= t.grid; ++i) {
            double lowest = 2.0;
            for (int j = 0; j <= t.grid; ++j) {
                const RangeRow& row = t.rows[static_cast<std::size_t>(j) * (t.grid + 1) + i];
                const bool in = pass == 0 ? row.gamma > 0.0 : row.alpha > 0.0;
                if (in) lowest = std::min(lowest, row.eps2);
            }
            if (lowest > 1.0) continue;
            const double x = std::max(pad, xpos(static_cast<double>(i) / t.grid, pad) - cell / 2);
            const double w = std::min(pad + W, x + cell) - x;
            s << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(ypos(1.0)) << "\" width=\"" << fmt(w) << "\" height=\""
              << fmt(ypos(lowest) - ypos(1.0)) << "\" fill=\"" << colour << "\" fill-opacity=\"0.45\"/>\n";
        }
    }
    auto axes = [&](double x0, double xspan, const std::string& xl, const std::string& yl, const std::string& title) {
        s << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(pad) << "\" width=\"" << fmt(W) << "\" height=\"" << fmt(H)
          << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int q = 0; q <= 4; ++q) {
            const double v = q / 4.0;
            std::ostringstream label;
            label << std::setprecision(3) << v * xspan;
            s << "<text x=\"" << fmt(x0 + v * W) << "\" y=\"" << fmt(pad + H + 16) << "\" text-anchor=\"middle\">"
              << label.str() << "</text>\n";
        }
        s << "<text x=\"" << fmt(x0 + W / 2) << "\" y=\"" << fmt(pad + H + 36) << "\" text-anchor=\"middle\">" << xl
          << "</text>\n";
        s << "<text x=\"" << fmt(x0 - 36) << "\" y=\"" << fmt(pad + H / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 "
          << fmt(x0 - 36) << ' ' << fmt(pad + H / 2) << ")\">" << yl << "</text>\n";
        s << "<text x=\"" << fmt(x0 + W / 2) << "\" y=\"" << fmt(pad - 14) << "\" text-anchor=\"middle\">" << title
          << "</text>\n";
    };
    for (int q = 0; q <= 4; ++q)
        s << "<text x=\"" << fmt(pad - 6) << "\" y=\"" << fmt(ypos(q / 4.0) + 4) << "\" text-anchor=\"end\">" << fmt(q / 4.0)
          << "</text>\n";
    axes(pad, 1.0, "eps1", "eps2", "d=" + std::to_string(t.d) + ", POVM r=" + std::to_string(t.r) + " (blue) vs Bell (orange)");

    // Copy counts on a log10 axis.
    double lo = 1e300, hi = 0;
    for (const RangeRow& row : t.curve)
        for (const auto& c : {row.copies_povm, row.copies_bell})
            if (c) {
                lo = std::min(lo, std::log10(static_cast<double>(*c)));
                hi = std::max(hi, std::log10(static_cast<double>(*c)));
            }
    const double xmax = t.curve_eps1_max > 0.0 ? t.curve_eps1_max : 1.0;
    if (hi > 0) {
        lo = std::floor(lo);
        hi = std::ceil(hi);
        if (hi <= lo) hi = lo + 1;
        auto yc = [&](double c) { return pad + (1.0 - (std::log10(c) - lo) / (hi - lo)) * H; };
        for (int pass = 0; pass < 2; ++pass) {
            std::ostringstream pts;
            for (const RangeRow& row : t.curve) {
                const auto& c = pass == 0 ? row.copies_povm : row.copies_bell;
                if (c) pts << fmt(left2 + row.eps1 / xmax * W) << ',' << fmt(yc(static_cast<double>(*c))) << ' ';
            }
            if (!pts.str().empty())
                s << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << (pass == 0 ? "#4c72b0" : "#dd8452")
                  << "\" points=\"" << pts.str() << "\"/>\n";
        }
        for (int e = static_cast<int>(lo); e <= static_cast<int>(hi); ++e)
            s << "<text x=\"" << fmt(left2 - 6) << "\" y=\"" << fmt(yc(std::pow(10.0, e)) + 4) << "\" text-anchor=\"end\">1e"
              << e << "</text>\n";
    }
    axes(left2, xmax, "eps1", "copies", "eps2=" + fmt(t.curve_eps2) + ", delta=" + fmt(t.delta));
    s << "</svg>\n";
    return s.str();
}

json run_figure(const ExperimentConfig& cfg) {
    require(cfg.sub == "range", ErrorCode::InvalidArgument, "only the range figure is available");
    const RangeTable t = range_tables(cfg.d, cfg.r, cfg.grid, 0.01, 0.9);
    const std::string base = cfg.out.empty() ? "range_d" + std::to_string(cfg.d) + "_r" + std::to_string(cfg.r) : cfg.out;
    const std::string csv = t.to_csv();
    const std::string svg = range_svg(t);
    write_file(base + ".csv", csv);
    write_file(base + ".svg", svg);

    bool gamma_any = false, alpha_any = false;
    for (const RangeRow& row : t.rows) {
        gamma_any |= row.gamma > 0.0;
        alpha_any |= row.alpha > 0.0;
    }
    json warnings = json::array();
    if (!gamma_any) warnings.push_back("gamma_r <= 0 everywhere on the grid");
    if (!alpha_any) warnings.push_back("alpha <= 0 everywhere on the grid");
    return {{"files", {base + ".csv", base + ".svg"}},
            {"csv_sha256", sha256_hex(csv)},
            {"svg_sha256", sha256_hex(svg)},
            {"boundary_formula", povm_boundary_eps1(cfg.d, cfg.r)},
            {"grid_boundary", t.grid_boundary_povm()},
            {"grid_step", 1.0 / cfg.grid},
            {"alpha_at_eps1_0_eps2_1", alpha_bell(cfg.d, 0.0, 1.0)},
            {"warnings", warnings}};
}

}  // namespace

std::string num(double x) {
    std::ostringstream os;
    os << std::setprecision(6) << x;
    return os.str();
}

json run_selftest() {
    json out = json::array();
    auto check = [&](const std::string& name, bool pass, const std::string& detail) {
        out.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
    };
    Rng rng(7, 0x5e1f);

    for (const auto& [d, expect] : std::vector<std::pair<int, int>>{{2, 6}, {3, 12}}) {
        int count = 0;
        enumerate_stabiliser_states(PhaseContext(d, 1), [&](const StabiliserGroup&, const DenseState&) { ++count; });
        check("stabiliser_count_d" + std::to_string(d), count == expect, std::to_string(count));
    }

    const double g3 = G_r_exact(magic_state(2), 3);
    check("g3_magic_qubit", std::abs(g3 - 0.625) < 1e-12, num(g3));

    const PhaseContext c31(3, 1);
    const DenseState h = haar_random(c31, rng);
    const double psum = p_table(c31, h).sum().real();
    check("pdist_normalised", std::abs(psum - 1.0) < 1e-12, num(psum));

    const RMatrix R = build_R(c31, 4);
    const PhaseTable a = b_exact(h, R), b = b_from_branches(h, R);
    double gap = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) gap = std::max(gap, std::abs(a.values()[i] - b.values()[i]));
    check("bdist_two_routes_agree", gap < 1e-12, num(gap));

    const StabiliserGroup S = random_stabiliser_group(c31, rng);
    const Witness w = conjugate_witness(S, R);
    check("conjugate_witness", std::abs(w.fidelity - 1.0) < 1e-9, num(w.fidelity));

    SamplingOptions opt;
    const LearnResult lr = learn_stabiliser(stabiliser_state(S), opt, rng);
    const bool learned = lr.group && fidelity(stabiliser_state(*lr.group), stabiliser_state(S)) > 1.0 - 1e-9;
    check("learn_stabiliser_d3", learned, "rounds " + std::to_string(lr.rounds));
    return out;
}

json ExperimentConfig::echo() const {
    return {{"command", command},   {"sub", sub},
            {"backend", backend},   {"source", source.empty() ? default_source(command) : source},
            {"state", state_path},  {"group", group_path},
            {"out", out},           {"d", d},
            {"n", n},               {"seed", seed},
            {"trials", trials},     {"eps", eps},
            {"eps1", eps1},         {"eps2", eps2},
            {"delta", delta},       {"r", r},
            {"t", t},               {"doping", doping},
            {"mode", mode},         {"k", k},
            {"grid", grid},         {"transcript", transcript},
            {"template", qubit_template}, {"allow_out_of_range", allow_out_of_range},
            {"large_table", large_table}, {"separate_columns", separate_columns}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    require(j.is_object(), ErrorCode::Parse, "config must be a JSON object");
    ExperimentConfig c;
    auto get = [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        try {
            j.at(key).get_to(field);
        } catch (const json::exception&) {
            fail(ErrorCode::Parse, std::string("config field '") + key + "' has the wrong type");
        }
    };
    get("command", c.command);
    get("sub", c.sub);
    get("backend", c.backend);
    get("source", c.source);
    get("state", c.state_path);
    get("group", c.group_path);
    get("out", c.out);
    get("d", c.d);
    get("n", c.n);
    get("seed", c.seed);
    get("trials", c.trials);
    get("eps", c.eps);
    get("eps1", c.eps1);
    get("eps2", c.eps2);
    get("delta", c.delta);
    get("r", c.r);
    get("t", c.t);
    get("doping", c.doping);
    get("mode", c.mode);
    get("k", c.k);
    get("grid", c.grid);
    get("transcript", c.transcript);
    get("template", c.qubit_template);
    get("allow_out_of_range", c.allow_out_of_range);
    get("large_table", c.large_table);
    get("separate_columns", c.separate_columns);
    get("threads", c.threads);
    require(!c.command.empty(), ErrorCode::Parse, "config field 'command' is required");
    return c;
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    require(EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) == 1, ErrorCode::Internal,
            "SHA-256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

std::string report_text(const json& report) { return report.dump(2) + "\n"; }

json run_experiment(const ExperimentConfig& cfg) {
    const json echo = cfg.echo();
    json report = {{"tool", "qbell"}, {"version", kVersion}, {"config", echo},
                   {"config_sha256", sha256_hex(echo.dump())}, {"seed", cfg.seed}};
    if (cfg.command == "selftest") {
        report["checks"] = run_selftest();
        return report;
    }
    if (cfg.command == "fig") {
        report["figure"] = run_figure(cfg);
        return report;
    }
    require(cfg.d >= 2 && cfg.n >= 1, ErrorCode::InvalidArgument, "need d >= 2 and n >= 1");
    require(cfg.k == 1 || cfg.k == 2 || cfg.k == 4, ErrorCode::InvalidArgument, "k must be 1, 2 or 4");
    const PhaseContext ctx(cfg.d, cfg.n);
    if (cfg.command == "oracle") {
        report["oracle"] = run_oracle(cfg, ctx);
        return report;
    }
    static const std::vector<std::string> known = {"learn", "hidden-group", "size-test", "doped-test", "stab-test", "tolerant"};
    require(std::find(known.begin(), known.end(), cfg.command) != known.end(), ErrorCode::InvalidArgument,
            "unknown command '" + cfg.command + "'");
    report["rng"] = {{"generator", "mt19937_64 keyed by splitmix64(seed, trial, role)"}, {"roles", {{"state", 1}, {"algorithm", 2}}}};
    report.update(run_trials(cfg, ctx));
    return report;
}

}  // namespace qbell
