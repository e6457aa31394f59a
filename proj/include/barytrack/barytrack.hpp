#pragma once

#include "barytrack/error.hpp"
#include "barytrack/hurdat.hpp"
#include "barytrack/io.hpp"
#include "barytrack/kmeans.hpp"
#include "barytrack/rng.hpp"
#include "barytrack/sphere.hpp"
#include "barytrack/stats.hpp"
#include "barytrack/trajectory.hpp"
