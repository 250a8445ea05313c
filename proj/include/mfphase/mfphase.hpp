#pragma once

// Umbrella header: joint balanced community detection and phase
// synchronization on sparse Hermitian observations, via multi-frequency
// pivoted-QR spectral recovery and a generalized power method.

#include "mfphase/angle_grid.hpp"
#include "mfphase/assignment.hpp"
#include "mfphase/bench.hpp"
#include "mfphase/core.hpp"
#include "mfphase/cpqr.hpp"
#include "mfphase/eigensolve.hpp"
#include "mfphase/gpm.hpp"
#include "mfphase/instance_io.hpp"
#include "mfphase/metrics.hpp"
#include "mfphase/model.hpp"
#include "mfphase/rng.hpp"
#include "mfphase/spectral.hpp"
