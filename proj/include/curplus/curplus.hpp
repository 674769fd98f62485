#pragma once

// Umbrella header: the whole library except the JSON reporting helpers,
// which pull in the vendored nlohmann header (include
// curplus/json_report.hpp separately where needed).

#include "curplus/baselines.hpp"
#include "curplus/diagnostics.hpp"
#include "curplus/harness.hpp"
#include "curplus/io.hpp"
#include "curplus/mask.hpp"
#include "curplus/rng.hpp"
#include "curplus/sampling.hpp"
#include "curplus/solver.hpp"
#include "curplus/spectra.hpp"
#include "curplus/synth.hpp"
#include "curplus/types.hpp"
