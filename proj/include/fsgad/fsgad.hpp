#pragma once

// Few-shot graph anomaly detection: multi-view contrastive learning over
// RWR-sampled subgraphs plus high-pass message-enhanced attribute
// reconstruction, with anomaly injection, scoring and evaluation utilities.

#include "fsgad/autodiff.hpp"
#include "fsgad/contrast.hpp"
#include "fsgad/graph.hpp"
#include "fsgad/inject.hpp"
#include "fsgad/io.hpp"
#include "fsgad/matrix.hpp"
#include "fsgad/metrics.hpp"
#include "fsgad/pipeline.hpp"
#include "fsgad/reconstruct.hpp"
#include "fsgad/rng.hpp"
#include "fsgad/sampler.hpp"
#include "fsgad/trainer.hpp"
