#pragma once

#include "ostlab/constants.hpp"
#include "ostlab/datum.hpp"
#include "ostlab/decay_analysis.hpp"
#include "ostlab/errors.hpp"
#include "ostlab/evolution.hpp"
#include "ostlab/kernel.hpp"
#include "ostlab/lwp.hpp"
#include "ostlab/quadrature.hpp"
#include "ostlab/spectral_core.hpp"
