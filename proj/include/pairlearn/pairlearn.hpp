#pragma once

#include "pairlearn/common.hpp"
#include "pairlearn/linalg.hpp"
#include "pairlearn/kernels.hpp"
#include "pairlearn/filters.hpp"
#include "pairlearn/models.hpp"
#include "pairlearn/holdout.hpp"
#include "pairlearn/online.hpp"
#include "pairlearn/metrics.hpp"
#include "pairlearn/io.hpp"
#include "pairlearn/grid.hpp"
