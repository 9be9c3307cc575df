#pragma once

// Convenience umbrella for the whole library.

#include "quitpath/scalar.hpp"
#include "quitpath/linalg.hpp"
#include "quitpath/game.hpp"
#include "quitpath/one_shot.hpp"
#include "quitpath/strategy.hpp"
#include "quitpath/path.hpp"
#include "quitpath/lcp.hpp"
#include "quitpath/synthesis.hpp"
#include "quitpath/discretize.hpp"
#include "quitpath/io.hpp"
