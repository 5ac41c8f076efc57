#pragma once

// Umbrella header for the whole library.

#include "commdim/common.hpp"
#include "commdim/dimensions.hpp"
#include "commdim/embed.hpp"
#include "commdim/geometry.hpp"
#include "commdim/ingest.hpp"
#include "commdim/io.hpp"
#include "commdim/nullmodels.hpp"
#include "commdim/polarization.hpp"
#include "commdim/presets.hpp"
#include "commdim/stats.hpp"
#include "commdim/validation.hpp"
