#pragma once

// Umbrella header pulling in the whole toolkit.

#include "ravnet/adam.hpp"
#include "ravnet/arch.hpp"
#include "ravnet/checkpoint.hpp"
#include "ravnet/config.hpp"
#include "ravnet/dataset.hpp"
#include "ravnet/errors.hpp"
#include "ravnet/experiments.hpp"
#include "ravnet/gradcheck.hpp"
#include "ravnet/gradcheck_suite.hpp"
#include "ravnet/layers.hpp"
#include "ravnet/losses.hpp"
#include "ravnet/metrics.hpp"
#include "ravnet/ops.hpp"
#include "ravnet/params.hpp"
#include "ravnet/parallel.hpp"
#include "ravnet/png_io.hpp"
#include "ravnet/rng.hpp"
#include "ravnet/tape.hpp"
#include "ravnet/tensor.hpp"
#include "ravnet/trainer.hpp"
#include "ravnet/windowing.hpp"
