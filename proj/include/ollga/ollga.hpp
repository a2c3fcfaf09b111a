#pragma once

#include "ollga/analysis.hpp"
#include "ollga/bitstring.hpp"
#include "ollga/distributions.hpp"
#include "ollga/drift.hpp"
#include "ollga/engine.hpp"
#include "ollga/rng.hpp"
#include "ollga/sweep.hpp"
#include "ollga/version.hpp"
