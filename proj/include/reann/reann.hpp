#pragma once

#include "reann/error.hpp"
#include "reann/grid.hpp"
#include "reann/dataset.hpp"
#include "reann/network.hpp"
#include "reann/trainer.hpp"
#include "reann/pruner.hpp"
#include "reann/discretizer.hpp"
#include "reann/rex.hpp"
#include "reann/pipeline.hpp"
