#pragma once

// Umbrella header for the somno toolkit.

#include "somno/apnea.hpp"
#include "somno/classify.hpp"
#include "somno/errors.hpp"
#include "somno/fft.hpp"
#include "somno/filter.hpp"
#include "somno/io.hpp"
#include "somno/metrics.hpp"
#include "somno/peaks.hpp"
#include "somno/radar.hpp"
#include "somno/radiometry.hpp"
#include "somno/rng.hpp"
#include "somno/sim.hpp"
#include "somno/spectral.hpp"
#include "somno/thermal.hpp"
#include "somno/time_series.hpp"
#include "somno/version.hpp"
