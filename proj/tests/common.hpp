#pragma once

#include "quitpath/quitpath.hpp"

#include <string>

inline std::string fixture(const std::string& name) {
    return std::string(QP_FIXTURE_DIR) + "/" + name;
}

template <class S>
quitpath::QuittingGame<S> load_fixture_game(const std::string& name) {
    return quitpath::game_from_json<S>(quitpath::load_json_file(fixture(name)));
}

template <class S>
quitpath::AbsorptionPath<S> load_fixture_path(const std::string& name, int n) {
    return quitpath::path_from_json<S>(quitpath::load_json_file(fixture(name)), n);
}
