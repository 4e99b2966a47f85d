#pragma once

#include "concal/calibration.hpp"
#include "concal/cluster.hpp"
#include "concal/consensus.hpp"
#include "concal/distance.hpp"
#include "concal/io.hpp"
#include "concal/metrics.hpp"
#include "concal/parallel.hpp"
#include "concal/pipeline.hpp"
#include "concal/simulate.hpp"
#include "concal/svg.hpp"
#include "concal/types.hpp"
