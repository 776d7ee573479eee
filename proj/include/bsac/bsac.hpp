#pragma once

// Umbrella header for the bagging supervised autoencoder classifier library.

#include "bsac/autoencoder.hpp"
#include "bsac/cross_validation.hpp"
#include "bsac/csv.hpp"
#include "bsac/datasets.hpp"
#include "bsac/ensemble.hpp"
#include "bsac/matrix.hpp"
#include "bsac/metrics.hpp"
#include "bsac/model_io.hpp"
#include "bsac/nn.hpp"
#include "bsac/preprocess.hpp"
#include "bsac/reports.hpp"
#include "bsac/rng.hpp"
#include "bsac/threading.hpp"
