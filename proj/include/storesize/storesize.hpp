#pragma once

#include "storesize/asymptotic.hpp"
#include "storesize/closed_form.hpp"
#include "storesize/errors.hpp"
#include "storesize/model.hpp"
#include "storesize/parallel.hpp"
#include "storesize/presets.hpp"
#include "storesize/simulator.hpp"
#include "storesize/sizing.hpp"
#include "storesize/spectral.hpp"
#include "storesize/table.hpp"
#include "storesize/version.hpp"
