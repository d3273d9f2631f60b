#pragma once

// Umbrella header for the SCP/LUR forecasting diagnostics library.

#include "scpdiag/bands.hpp"
#include "scpdiag/baseline.hpp"
#include "scpdiag/common.hpp"
#include "scpdiag/eval.hpp"
#include "scpdiag/io.hpp"
#include "scpdiag/lur.hpp"
#include "scpdiag/scp.hpp"
#include "scpdiag/spectral.hpp"
#include "scpdiag/synth.hpp"
