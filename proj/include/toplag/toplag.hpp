#pragma once

#include "toplag/date.hpp"
#include "toplag/ensemble.hpp"
#include "toplag/error.hpp"
#include "toplag/ingest.hpp"
#include "toplag/lattice.hpp"
#include "toplag/multistart.hpp"
#include "toplag/parallel.hpp"
#include "toplag/partition.hpp"
#include "toplag/rng.hpp"
#include "toplag/significance.hpp"
#include "toplag/synth.hpp"
#include "toplag/xcorr.hpp"
