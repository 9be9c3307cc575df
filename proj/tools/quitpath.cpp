// Command-line front end: analyze | synthesize | certify | discretize |
// simulate | payoff | export.

#include "quitpath/quitpath.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

using namespace quitpath;

namespace {

long env_seed(long fallback) {
    const char* s = std::getenv("QUITPATH_SEED");
    if (!s || !*s) return fallback;
    return std::strtol(s, nullptr, 10);
}

void error_json(const std::string& kind, const std::string& what) {
    nlohmann::json e;
    e["error"] = kind;
    e["message"] = what;
    std::cerr << e.dump() << "\n";
}

QuittingGame<Rational> load_game_file(const std::string& file) {
    return game_from_json<Rational>(load_json_file(file));
}

Vec<Rational> parse_vec(const std::string& s) {
    Vec<Rational> v;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        v.push_back(parse_rational(s.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return v;
}

std::string fmt(const Rational& v) { return rational_to_string(v); }

void print_path_summary(const AbsorptionPath<Rational>& path) {
    auto describe = [](const PathBlock<Rational>& b) {
        if (b.kind == BlockKind::Jump) {
            std::string s = "jump xi=(";
            for (std::size_t i = 0; i < b.xi.size(); ++i)
                s += (i ? "," : "") + fmt(b.xi[i]);
            return s + ")";
        }
        std::string s = "flow (";
        bool first = true;
        for (std::size_t i = 0; i < b.z.size(); ++i) {
            if (b.z[i] == Rational(0)) continue;
            if (!first) s += "+";
            s += "P" + std::to_string(i + 1);
            if (b.z[i] != Rational(1)) s += "*" + fmt(b.z[i]);
            first = false;
        }
        return s + ", rho=" + fmt(b.rho) + ")";
    };
    for (const auto& b : path.prefix) std::cout << "  prefix " << describe(b) << "\n";
    for (const auto& b : path.cycle) std::cout << "  cycle  " << describe(b) << "\n";
}

void print_cert_report(const PathCertReport<Rational>& rep, int n) {
    std::cout << (rep.certified ? "certified" : "NOT certified") << "\n";
    for (int i = 0; i < n; ++i) {
        const auto& p = rep.players[i];
        std::cout << "  P" << i + 1 << " worst margin " << to_double(p.worst_margin);
        if (!p.condition.empty()) std::cout << " (" << p.condition << " at t=" << p.worst_t << ")";
        std::cout << "\n";
    }
}

int cmd_analyze(const std::string& game_file, long samples, long seed) {
    auto game = normalize(load_game_file(game_file));
    QMatrixConfig qc;
    qc.samples = samples;
    qc.seed = static_cast<std::uint64_t>(seed);
    auto minors = principal_minors_q(quit_matrix(game), qc);
    bool all_pass = true;
    std::cout << "subset\tplayers\tsamples\tverdict\n";
    for (const auto& mv : minors) {
        std::cout << mv.subset << "\t" << quitter_label(mv.subset, game.n) << "\t"
                  << mv.verdict.samples_checked << "\t"
                  << (mv.verdict.passed() ? "pass" : "COUNTEREXAMPLE") << "\n";
        if (!mv.verdict.passed()) {
            all_pass = false;
            nlohmann::json cx;
            cx["subset"] = mv.subset;
            cx["q"] = nlohmann::json::array();
            for (const auto& v : mv.verdict.counterexample) cx["q"].push_back(to_double(v));
            std::cout << cx.dump() << "\n";
        }
    }
    return all_pass ? 0 : 2;
}

int cmd_synthesize(const std::string& game_file, const std::string& start_str,
                   const std::string& out_file) {
    auto game = normalize(load_game_file(game_file));
    std::optional<Vec<Rational>> start;
    if (!start_str.empty()) start = parse_vec(start_str);
    auto res = synthesize(game, start);
    print_path_summary(res.path);
    print_cert_report(res.cert.report, game.n);
    std::cout << "gamma at cycle start: (";
    for (int i = 0; i < game.n; ++i) std::cout << (i ? "," : "") << to_double(res.cert.gamma[i]);
    std::cout << ")\n";
    if (!out_file.empty()) save_json_file(out_file, path_to_json(res.path));
    return res.cert.report.certified ? 0 : 2;
}

int cmd_certify(const std::string& game_file, const std::string& path_file, double eps) {
    auto game = normalize(load_game_file(game_file));
    auto path = path_from_json<Rational>(load_json_file(path_file), game.n);
    auto rep = certify(game, path, Rational(eps));
    print_cert_report(rep, game.n);
    return rep.certified ? 0 : 2;
}

int cmd_discretize(const std::string& game_file, const std::string& path_file, int k,
                   const std::string& out_file, bool report) {
    auto game = convert_game<Rational, double>(load_game_file(game_file));
    auto path = path_from_json<double>(load_json_file(path_file), game.n);
    auto profile = discretize(game, path, k);
    if (!out_file.empty()) save_json_file(out_file, profile_to_json(profile));
    std::cout << "stages: prefix " << profile.prefix.size() << ", cycle " << profile.cycle.size()
              << "\n";
    if (report) {
        auto rep = verify_bound(game, path, k, profile);
        std::cout << "bound " << (rep.holds ? "holds" : "VIOLATED") << " over " << rep.points
                  << " grid points; worst ratio " << rep.worst_ratio << " at s=" << rep.worst_s
                  << "\n";
        return rep.holds ? 0 : 2;
    }
    return 0;
}

int cmd_simulate(const std::string& game_file, const std::string& profile_file, long runs,
                 long seed) {
    auto game = convert_game<Rational, double>(load_game_file(game_file));
    auto profile = profile_from_json<double>(load_json_file(profile_file), game.n);
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec<double> mean(game.n, 0.0);
    double absorbed_runs = 0, mean_stage = 0;
    const std::size_t max_stages = 1000000;
    for (long r = 0; r < runs; ++r) {
        for (std::size_t nstage = 1; nstage <= max_stages; ++nstage) {
            const auto& xi = profile.stage(nstage);
            ActionProfile a = 0;
            for (int i = 0; i < game.n; ++i)
                if (unif(rng) < xi[i]) a |= ActionProfile(1) << i;
            if (a != 0) {
                for (int i = 0; i < game.n; ++i) mean[i] += game.payoffs[a][i];
                absorbed_runs += 1;
                mean_stage += double(nstage);
                break;
            }
            if (nstage == max_stages)
                for (int i = 0; i < game.n; ++i) mean[i] += game.continue_payoff[i];
        }
    }
    for (int i = 0; i < game.n; ++i) mean[i] /= double(runs);
    std::cout << "runs " << runs << ", absorbed " << absorbed_runs
              << ", mean absorption stage " << (absorbed_runs > 0 ? mean_stage / absorbed_runs : -1)
              << "\nmean payoff: (";
    for (int i = 0; i < game.n; ++i) std::cout << (i ? "," : "") << mean[i];
    std::cout << ")\n";
    return 0;
}

int cmd_payoff(const std::string& game_file, const std::string& profile_file,
               const std::string& path_file, const std::string& t_str) {
    auto game = load_game_file(game_file);
    Vec<Rational> v;
    if (!profile_file.empty()) {
        auto profile = profile_from_json<Rational>(load_json_file(profile_file), game.n);
        v = payoff(game, profile);
    } else {
        auto path = path_from_json<Rational>(load_json_file(path_file), game.n);
        Rational t = t_str.empty() ? Rational(0) : parse_rational(t_str);
        auto pp = payoff_path(game, path, t, /*left_limit=*/t == Rational(0));
        v = pp.gamma;
    }
    std::cout << "(";
    for (std::size_t i = 0; i < v.size(); ++i) std::cout << (i ? "," : "") << fmt(v[i]);
    std::cout << ")\n";
    return 0;
}

int cmd_export(const std::string& game_file, const std::string& path_file, int grid,
               const std::string& out_file) {
    auto game = load_game_file(game_file);
    auto path = path_from_json<Rational>(load_json_file(path_file), game.n);
    if (out_file.empty()) {
        export_csv(game, path, grid, std::cout);
    } else {
        std::ofstream out(out_file);
        if (!out) throw IoError("cannot write " + out_file);
        export_csv(game, path, grid, out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quitting-game absorption paths: analysis, synthesis, certification"};
    app.require_subcommand(1);

    std::string game_file, path_file, profile_file, out_file, start_str, t_str;
    long samples = 10000, seed = env_seed(20230411), runs = 10000;
    int k = 100, grid = 512;
    double eps = 0.0;
    bool report = false;

    auto* analyze = app.add_subcommand("analyze", "Q-matrix test of R and its principal minors");
    analyze->add_option("--game", game_file)->required();
    analyze->add_option("--samples", samples);
    analyze->add_option("--seed", seed);

    auto* synth = app.add_subcommand("synthesize", "build a certified absorption path");
    synth->add_option("--game", game_file)->required();
    synth->add_option("--start", start_str);
    synth->add_option("--out", out_file);

    auto* cert = app.add_subcommand("certify", "sequential eps-perfectness of a path");
    cert->add_option("--game", game_file)->required();
    cert->add_option("--path", path_file)->required();
    cert->add_option("--eps", eps);

    auto* disc = app.add_subcommand("discretize", "stage profile approximating a path");
    disc->add_option("--game", game_file)->required();
    disc->add_option("--path", path_file)->required();
    disc->add_option("-k", k);
    disc->add_option("--out", out_file);
    disc->add_flag("--report", report);

    auto* sim = app.add_subcommand("simulate", "Monte-Carlo playout of a profile");
    sim->add_option("--game", game_file)->required();
    sim->add_option("--profile", profile_file)->required();
    sim->add_option("--runs", runs);
    sim->add_option("--seed", seed);

    auto* pay = app.add_subcommand("payoff", "expected payoff of a profile or payoff path value");
    pay->add_option("--game", game_file)->required();
    pay->add_option("--profile", profile_file);
    pay->add_option("--path", path_file);
    pay->add_option("--t", t_str);

    auto* exp = app.add_subcommand("export", "CSV of (t, pi_t, gamma_t) on a grid");
    exp->add_option("--game", game_file)->required();
    exp->add_option("--path", path_file)->required();
    exp->add_option("--grid", grid);
    exp->add_option("--out", out_file);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(analyze)) return cmd_analyze(game_file, samples, seed);
        if (app.got_subcommand(synth)) return cmd_synthesize(game_file, start_str, out_file);
        if (app.got_subcommand(cert)) return cmd_certify(game_file, path_file, eps);
        if (app.got_subcommand(disc)) return cmd_discretize(game_file, path_file, k, out_file, report);
        if (app.got_subcommand(sim)) return cmd_simulate(game_file, profile_file, runs, seed);
        if (app.got_subcommand(pay)) {
            if (profile_file.empty() == path_file.empty()) {
                error_json("usage", "payoff needs exactly one of --profile / --path");
                return 1;
            }
            return cmd_payoff(game_file, profile_file, path_file, t_str);
        }
        if (app.got_subcommand(exp)) return cmd_export(game_file, path_file, grid, out_file);
    } catch (const IoError& e) {
        error_json("io", e.what());
        return 1;
    } catch (const std::exception& e) {
        error_json("runtime", e.what());
        return 1;
    }
    return 1;
}
