#pragma once

#include "dnt/errors.hpp"
#include "dnt/stats/normal.hpp"
#include "dnt/stats/random.hpp"
#include "dnt/stats/distributions.hpp"
#include "dnt/stats/moments.hpp"
#include "dnt/qq_plot.hpp"
#include "dnt/classical_tests.hpp"
#include "dnt/image_similarity.hpp"
#include "dnt/features.hpp"
#include "dnt/metric_learning.hpp"
#include "dnt/engine.hpp"
#include "dnt/model_io.hpp"
#include "dnt/harness.hpp"
