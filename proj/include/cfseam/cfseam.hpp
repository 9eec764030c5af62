#ifndef CFSEAM_CFSEAM_HPP
#define CFSEAM_CFSEAM_HPP

#include "cfseam/blend.hpp"
#include "cfseam/core.hpp"
#include "cfseam/evaluation.hpp"
#include "cfseam/graphcut.hpp"
#include "cfseam/ingest.hpp"
#include "cfseam/maxflow.hpp"
#include "cfseam/metrics.hpp"
#include "cfseam/refine.hpp"
#include "cfseam/synth.hpp"

#endif  // CFSEAM_CFSEAM_HPP
