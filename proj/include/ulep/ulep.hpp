#pragma once

// Umbrella header: pulls in the whole library in dependency order.

#include "ulep/common.hpp"
#include "ulep/rng.hpp"
#include "ulep/stats.hpp"
#include "ulep/quadrature.hpp"
#include "ulep/kernels.hpp"
#include "ulep/density.hpp"
#include "ulep/sample.hpp"
#include "ulep/grids.hpp"
#include "ulep/assumptions.hpp"
#include "ulep/process.hpp"
#include "ulep/gram.hpp"
#include "ulep/kde.hpp"
#include "ulep/selectors.hpp"
#include "ulep/config.hpp"
#include "ulep/harness.hpp"
#include "ulep/setup.hpp"
#include "ulep/report.hpp"
