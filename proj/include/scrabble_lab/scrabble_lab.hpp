#pragma once

#include "scrabble_lab/bayesopt.hpp"
#include "scrabble_lab/cmaes.hpp"
#include "scrabble_lab/config.hpp"
#include "scrabble_lab/core.hpp"
#include "scrabble_lab/engine.hpp"
#include "scrabble_lab/evaluation.hpp"
#include "scrabble_lab/fitness.hpp"
#include "scrabble_lab/imitation.hpp"
#include "scrabble_lab/lexicon.hpp"
#include "scrabble_lab/mlp.hpp"
#include "scrabble_lab/movegen.hpp"
#include "scrabble_lab/parallel.hpp"
#include "scrabble_lab/players.hpp"
#include "scrabble_lab/rng.hpp"
#include "scrabble_lab/selfplay.hpp"
