#pragma once

#include "awmvc/common.hpp"
#include "awmvc/dataset.hpp"
#include "awmvc/kmeans.hpp"
#include "awmvc/metrics.hpp"
#include "awmvc/procrustes.hpp"
#include "awmvc/solver.hpp"
