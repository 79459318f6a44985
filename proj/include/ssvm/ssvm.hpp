#pragma once

// Structured sparse support vector machines over grid-structured connectome
// features: fused Lasso and GraphNet regularized margin classifiers trained
// by closed-form ADMM, with elastic-net and lasso baselines, a synthetic
// cohort generator, and cross-validation / recovery evaluation utilities.

#include "ssvm/augmentation.hpp"
#include "ssvm/errors.hpp"
#include "ssvm/eval.hpp"
#include "ssvm/fft.hpp"
#include "ssvm/grid.hpp"
#include "ssvm/io.hpp"
#include "ssvm/losses.hpp"
#include "ssvm/rng.hpp"
#include "ssvm/simulate.hpp"
#include "ssvm/solver.hpp"
#include "ssvm/spectral.hpp"
#include "ssvm/threads.hpp"
#include "ssvm/version.hpp"
