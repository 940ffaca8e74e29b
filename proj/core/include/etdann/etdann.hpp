#pragma once

#include "etdann/adam.hpp"
#include "etdann/dann.hpp"
#include "etdann/dataset.hpp"
#include "etdann/error.hpp"
#include "etdann/forest.hpp"
#include "etdann/matrix.hpp"
#include "etdann/metrics.hpp"
#include "etdann/neural.hpp"
#include "etdann/protocols.hpp"
#include "etdann/report.hpp"
#include "etdann/rng.hpp"
#include "etdann/run_config.hpp"
#include "etdann/similarity.hpp"
#include "etdann/standardizer.hpp"
#include "etdann/synthgen.hpp"
