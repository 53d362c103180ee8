#pragma once

#include "aperc/bench.hpp"
#include "aperc/errors.hpp"
#include "aperc/gridworld.hpp"
#include "aperc/info_select.hpp"
#include "aperc/model_io.hpp"
#include "aperc/pbvi.hpp"
#include "aperc/pomdp.hpp"
#include "aperc/random.hpp"
#include "aperc/random_instances.hpp"
#include "aperc/scenario_io.hpp"
