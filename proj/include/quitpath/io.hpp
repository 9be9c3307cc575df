#pragma once

#include "quitpath/discretize.hpp"
#include "quitpath/game.hpp"
#include "quitpath/path.hpp"
#include "quitpath/strategy.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace quitpath {

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline nlohmann::json scalar_json(const Rational& v) { return rational_to_string(v); }
inline nlohmann::json scalar_json(double v) { return v; }

template <class S>
S scalar_from_json(const nlohmann::json& j) {
    if constexpr (scalar_traits<S>::exact) {
        if (j.is_string()) return parse_rational(j.get<std::string>());
        if (j.is_number_integer()) return Rational(j.get<long long>());
        if (j.is_number_float()) return scalar_traits<S>::from_double(j.get<double>());
    } else {
        if (j.is_string()) return to_double(parse_rational(j.get<std::string>()));
        if (j.is_number()) return j.get<double>();
    }
    throw IoError("expected a number, got " + j.dump());
}

template <class S>
Vec<S> vec_from_json(const nlohmann::json& j, int n, const char* what) {
    if (!j.is_array() || int(j.size()) != n)
        throw IoError(std::string(what) + " must be an array of length " + std::to_string(n));
    Vec<S> v;
    v.reserve(n);
    for (const auto& e : j) v.push_back(scalar_from_json<S>(e));
    return v;
}

template <class S>
nlohmann::json vec_json(const Vec<S>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const S& x : v) arr.push_back(scalar_json(x));
    return arr;
}

}  // namespace detail

/// Game JSON: players, continue_payoff, payoffs as a list of
/// {"quitters":[0-based indices], "payoff":[...]}; subsets not listed are
/// rejected unless "default_multi_quit" names a fill rule ("min_minus_one").
template <class S>
QuittingGame<S> game_from_json(const nlohmann::json& j) {
    if (!j.contains("players") || !j["players"].is_array())
        throw IoError("game needs a \"players\" array");
    const int n = int(j["players"].size());
    if (n < 1 || n > QuittingGame<S>::kMaxPlayers) throw IoError("unsupported player count");
    QuittingGame<S> g(n);
    for (int i = 0; i < n; ++i) g.player_names[i] = j["players"][i].get<std::string>();
    if (j.contains("continue_payoff"))
        g.continue_payoff = detail::vec_from_json<S>(j["continue_payoff"], n, "continue_payoff");

    std::vector<bool> given(std::size_t(1) << n, false);
    if (!j.contains("payoffs") || !j["payoffs"].is_array())
        throw IoError("game needs a \"payoffs\" array");
    for (const auto& entry : j["payoffs"]) {
        ActionProfile mask = 0;
        for (const auto& q : entry.at("quitters")) {
            int i = q.get<int>();
            if (i < 0 || i >= n) throw IoError("quitter index out of range");
            mask |= ActionProfile(1) << i;
        }
        if (mask == 0) throw IoError("empty quitter set; use continue_payoff instead");
        g.payoffs[mask] = detail::vec_from_json<S>(entry.at("payoff"), n, "payoff");
        given[mask] = true;
    }

    std::string rule = j.value("default_multi_quit", "");
    for (ActionProfile a = 1; a <= g.all_quit(); ++a) {
        if (given[a]) continue;
        if (popcount(a) == 1 || rule.empty())
            throw IoError("missing payoff for quitter set mask " + std::to_string(a) +
                          " and no default_multi_quit rule");
        if (rule != "min_minus_one") throw IoError("unknown default_multi_quit rule: " + rule);
        for (int i = 0; i < n; ++i) {
            S m;
            bool first = true;
            for (int q = 0; q < n; ++q) {
                if (!((a >> q) & 1)) continue;
                const S& v = g.single_quit(q)[i];
                if (first || v < m) { m = v; first = false; }
            }
            g.payoffs[a][i] = m - S(1);
        }
    }
    return g;
}

template <class S>
nlohmann::json game_to_json(const QuittingGame<S>& g) {
    nlohmann::json j;
    j["players"] = g.player_names;
    j["continue_payoff"] = detail::vec_json(g.continue_payoff);
    nlohmann::json payoffs = nlohmann::json::array();
    for (ActionProfile a = 1; a <= g.all_quit(); ++a) {
        nlohmann::json entry;
        nlohmann::json quitters = nlohmann::json::array();
        for (int i = 0; i < g.n; ++i)
            if ((a >> i) & 1) quitters.push_back(i);
        entry["quitters"] = quitters;
        entry["payoff"] = detail::vec_json(g.payoffs[a]);
        payoffs.push_back(entry);
    }
    j["payoffs"] = payoffs;
    return j;
}

/// Profile JSON: {"prefix": [[...] per stage], "tail": {"kind": "all_continue"
/// | "repeat_last" | "cycle", "stages": [[...]]}}.
template <class S>
BehaviorProfile<S> profile_from_json(const nlohmann::json& j, int n) {
    BehaviorProfile<S> x;
    if (j.contains("prefix"))
        for (const auto& st : j["prefix"])
            x.prefix.push_back(detail::vec_from_json<S>(st, n, "stage"));
    std::string kind = j.contains("tail") ? j["tail"].value("kind", "all_continue")
                                          : "all_continue";
    if (kind == "all_continue") {
        x.tail = TailKind::AllContinue;
    } else if (kind == "repeat_last") {
        x.tail = TailKind::RepeatLast;
        if (x.prefix.empty()) throw IoError("repeat_last tail needs a nonempty prefix");
    } else if (kind == "cycle") {
        x.tail = TailKind::Cycle;
        for (const auto& st : j["tail"].at("stages"))
            x.cycle.push_back(detail::vec_from_json<S>(st, n, "stage"));
        if (x.cycle.empty()) throw IoError("cycle tail needs stages");
    } else {
        throw IoError("unknown tail kind: " + kind);
    }
    return x;
}

template <class S>
nlohmann::json profile_to_json(const BehaviorProfile<S>& x) {
    nlohmann::json j;
    nlohmann::json prefix = nlohmann::json::array();
    for (const auto& st : x.prefix) prefix.push_back(detail::vec_json(st));
    j["prefix"] = prefix;
    nlohmann::json tail;
    switch (x.tail) {
        case TailKind::AllContinue: tail["kind"] = "all_continue"; break;
        case TailKind::RepeatLast: tail["kind"] = "repeat_last"; break;
        case TailKind::Cycle: {
            tail["kind"] = "cycle";
            nlohmann::json stages = nlohmann::json::array();
            for (const auto& st : x.cycle) stages.push_back(detail::vec_json(st));
            tail["stages"] = stages;
            break;
        }
    }
    j["tail"] = tail;
    return j;
}

/// Path JSON: {"prefix":[{"jump":{"xi":[...]}} | {"flow":{"z":[...],
/// "rho": ...}}], "cycle":[...]} plus an optional "allow_non_absorbing" flag.
template <class S>
AbsorptionPath<S> path_from_json(const nlohmann::json& j, int n) {
    AbsorptionPath<S> path;
    auto read_block = [&](const nlohmann::json& b) {
        if (b.contains("jump"))
            return PathBlock<S>::jump(detail::vec_from_json<S>(b["jump"].at("xi"), n, "xi"));
        if (b.contains("flow"))
            return PathBlock<S>::flow(detail::vec_from_json<S>(b["flow"].at("z"), n, "z"),
                                      detail::scalar_from_json<S>(b["flow"].at("rho")));
        throw IoError("block must be a jump or a flow");
    };
    if (j.contains("prefix"))
        for (const auto& b : j["prefix"]) path.prefix.push_back(read_block(b));
    if (j.contains("cycle"))
        for (const auto& b : j["cycle"]) path.cycle.push_back(read_block(b));
    path.allow_non_absorbing = j.value("allow_non_absorbing", false);
    path.validate();
    return path;
}

template <class S>
nlohmann::json path_to_json(const AbsorptionPath<S>& path) {
    auto block_json = [](const PathBlock<S>& b) {
        nlohmann::json out;
        if (b.kind == BlockKind::Jump) {
            out["jump"]["xi"] = detail::vec_json(b.xi);
        } else {
            out["flow"]["z"] = detail::vec_json(b.z);
            out["flow"]["rho"] = detail::scalar_json(b.rho);
        }
        return out;
    };
    nlohmann::json j;
    j["prefix"] = nlohmann::json::array();
    for (const auto& b : path.prefix) j["prefix"].push_back(block_json(b));
    j["cycle"] = nlohmann::json::array();
    for (const auto& b : path.cycle) j["cycle"].push_back(block_json(b));
    if (path.allow_non_absorbing) j["allow_non_absorbing"] = true;
    return j;
}

inline nlohmann::json load_json_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(file + ": " + e.what());
    }
    return j;
}

inline void save_json_file(const std::string& file, const nlohmann::json& j) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file);
    out << j.dump(2) << "\n";
}

/// Column label for a quitter set: 1-based player indices joined by '+'.
inline std::string quitter_label(ActionProfile a, int n) {
    std::string s;
    for (int i = 0; i < n; ++i) {
        if (!((a >> i) & 1)) continue;
        if (!s.empty()) s += '+';
        s += std::to_string(i + 1);
    }
    return s;
}

/// CSV of (t, pi_t(a) for a in A*, gamma_t(i)) on a uniform grid of `grid_n`
/// points over [0, 1). Jump instants fall between grid points unless they
/// coincide exactly; values are cadlag.
template <class S>
void export_csv(const QuittingGame<S>& game, const AbsorptionPath<S>& path, int grid_n,
                std::ostream& out) {
    if (grid_n < 2) throw std::invalid_argument("grid must have at least 2 points");
    const int n = game.n;
    out << "t";
    for (ActionProfile a = 1; a <= game.all_quit(); ++a)
        out << ",pi[" << quitter_label(a, n) << "]";
    for (int i = 0; i < n; ++i) out << ",gamma[" << i + 1 << "]";
    out << "\n";
    char buf[64];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        out << buf;
    };
    for (int g = 0; g < grid_n; ++g) {
        S t = S(g) / S(grid_n);
        PathPoint<S> pt = eval(path, t);
        PayoffPathPoint<S> gp = payoff_path(game, path, t);
        emit(to_double(t));
        for (ActionProfile a = 1; a <= game.all_quit(); ++a) {
            out << ",";
            emit(to_double(pt.pi[a]));
        }
        for (int i = 0; i < n; ++i) {
            out << ",";
            emit(gp.defined ? to_double(gp.gamma[i]) : 0.0);
        }
        out << "\n";
    }
}

}  // namespace quitpath
