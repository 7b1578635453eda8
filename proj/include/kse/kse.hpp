#pragma once

// Umbrella header for the whole library.

#include "kse/config.hpp"
#include "kse/diagnostics.hpp"
#include "kse/errors.hpp"
#include "kse/etd.hpp"
#include "kse/fft.hpp"
#include "kse/field.hpp"
#include "kse/galerkin.hpp"
#include "kse/grid.hpp"
#include "kse/ksef.hpp"
#include "kse/models.hpp"
#include "kse/rng.hpp"
#include "kse/runner.hpp"
#include "kse/version.hpp"
