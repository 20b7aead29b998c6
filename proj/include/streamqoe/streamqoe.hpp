#pragma once

#include "analytic.hpp"
#include "bounds.hpp"
#include "estimate.hpp"
#include "rlnc.hpp"
#include "rng.hpp"
#include "simulate.hpp"
#include "stats.hpp"
