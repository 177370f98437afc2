#pragma once

#include <grainflow/configuration.hpp>
#include <grainflow/continuum.hpp>
#include <grainflow/energy.hpp>
#include <grainflow/error.hpp>
#include <grainflow/io.hpp>
#include <grainflow/kernel.hpp>
#include <grainflow/numeric.hpp>
#include <grainflow/optimize.hpp>
#include <grainflow/parallel.hpp>
#include <grainflow/rng.hpp>
