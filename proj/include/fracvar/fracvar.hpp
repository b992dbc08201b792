#pragma once

// Umbrella header: exact simulation of fractional, bifractional, trifractional
// and n-th order fractional Brownian motions, Baxter-type variation statistics
// with their almost-sure limits, and singularity-based discrimination between
// candidate Hurst-index pairs.

#include "fracvar/errors.hpp"
#include "fracvar/fft.hpp"
#include "fracvar/grid.hpp"
#include "fracvar/kernels.hpp"
#include "fracvar/rng.hpp"
#include "fracvar/sampler.hpp"
#include "fracvar/singularity.hpp"
#include "fracvar/sum.hpp"
#include "fracvar/variation.hpp"
