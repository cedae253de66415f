#pragma once

#include "homlab/backforth.hpp"
#include "homlab/catalog.hpp"
#include "homlab/cli.hpp"
#include "homlab/dichotomy.hpp"
#include "homlab/group.hpp"
#include "homlab/ire.hpp"
#include "homlab/orbits.hpp"
#include "homlab/parallel.hpp"
#include "homlab/rng.hpp"
#include "homlab/stats.hpp"
#include "homlab/structure.hpp"
