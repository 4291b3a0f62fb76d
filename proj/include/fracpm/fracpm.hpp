#pragma once

// Umbrella header.

#include "fracpm/analysis.hpp"
#include "fracpm/config.hpp"
#include "fracpm/errors.hpp"
#include "fracpm/io.hpp"
#include "fracpm/kernels.hpp"
#include "fracpm/mild.hpp"
#include "fracpm/norms.hpp"
#include "fracpm/params.hpp"
#include "fracpm/specfun.hpp"
#include "fracpm/spectral.hpp"
#include "fracpm/stepper.hpp"
#include "fracpm/verify.hpp"

#ifndef FRACPM_VERSION
#define FRACPM_VERSION "0.1.0"
#endif

namespace fracpm {
inline constexpr const char* version = FRACPM_VERSION;
}  // namespace fracpm
